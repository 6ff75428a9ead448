//! A minimal ordered work pool for batch sweeps.
//!
//! Jobs are indexed; workers pull the next index from a shared counter and
//! write results into their slot, so the assembled output is in job order no
//! matter how the work interleaves.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Runs `job` for every index in `0..count` on up to `jobs` worker threads,
/// returning results in index order.
///
/// `jobs == 1` runs inline on the caller's thread. Panics in workers are
/// propagated.
pub fn ordered_map<T, F>(count: usize, jobs: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1);
    if jobs == 1 || count <= 1 {
        return (0..count).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(count) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= count {
                    break;
                }
                let result = job(k);
                *slots[k].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}
