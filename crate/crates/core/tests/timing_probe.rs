use std::time::Instant;

use continuum_dynamics::dynamics::{ContactInput, SegmentModelT, SegmentParamsT, SegmentStateT};
use continuum_dynamics::sim::{simulate, DopriOptions};
use nalgebra::{Vector2, Vector6};

#[test]
#[ignore]
fn probe_step_costs() {
    let model =
        SegmentModelT::<f64>::with_reference_routing(SegmentParamsT::reference_distal()).unwrap();
    let state = SegmentStateT::new(
        Vector6::new(0.5, -0.3, 0.2, 0.4, -0.6, 0.1),
        Vector6::new(0.2, -0.1, 0.3, -0.2, 0.1, 0.0),
    )
    .unwrap();
    let tau = Vector2::new(0.7, -0.3);

    let t = Instant::now();
    let n = 50;
    for _ in 0..n {
        let _ = model.evaluate(&state, &tau, &ContactInput::None).unwrap();
    }
    eprintln!("evaluate(): {:?} each", t.elapsed() / n);

    let t = Instant::now();
    for _ in 0..n {
        let _ = model.mass_matrix(&state.c).unwrap();
    }
    eprintln!("mass_matrix(): {:?} each", t.elapsed() / n);

    let t = Instant::now();
    for _ in 0..n {
        let _ = model.coriolis_matrix(&state.c, &state.c_dot).unwrap();
    }
    eprintln!("coriolis_matrix(): {:?} each", t.elapsed() / n);

    for (rtol, atol) in [(1e-6, 1e-8), (1e-5, 1e-7), (1e-4, 1e-6)] {
        let opts = DopriOptions {
            rtol,
            atol,
            ..DopriOptions::default()
        };
        let t = Instant::now();
        let traj = simulate(
            &model,
            &state,
            &|_, _| Vector2::zeros(),
            &|_| ContactInput::None,
            1.0,
            100.0,
            &opts,
        )
        .unwrap();
        eprintln!(
            "1 s free sim rtol {rtol:.0e}: {:?} ({} samples)",
            t.elapsed(),
            traj.samples.len()
        );
    }
}
