//! Fixed-order Gauss-Legendre quadrature used by the dynamics assembly.

use crate::scalar::{real, Real};

/// 16-point Gauss-Legendre abscissae on [-1, 1] (positive half; the rule is
/// symmetric).
const GL16_NODES: [f64; 8] = [
    0.095_012_509_837_637_440_185,
    0.281_603_550_779_258_913_230,
    0.458_016_777_657_227_386_342,
    0.617_876_244_402_643_748_447,
    0.755_404_408_355_003_033_895,
    0.865_631_202_387_831_743_880,
    0.944_575_023_073_232_576_078,
    0.989_400_934_991_649_932_596,
];

/// Matching 16-point Gauss-Legendre weights.
const GL16_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_496_285,
    0.182_603_415_044_923_588_867,
    0.169_156_519_395_002_538_189,
    0.149_595_988_816_576_732_081,
    0.124_628_971_255_533_872_052,
    0.095_158_511_682_492_784_810,
    0.062_253_523_938_647_892_863,
    0.027_152_459_411_754_094_852,
];

/// Nodes and weights of the 16-point Gauss-Legendre rule mapped to `[a, b]`,
/// returned sorted ascending in the node coordinate.
pub fn gauss_legendre_16<T: Real>(a: T, b: T) -> [(T, T); 16] {
    let half = real::<T>(0.5);
    let mid = (a + b) * half;
    let scale = (b - a) * half;
    let mut out = [(T::zero(), T::zero()); 16];
    for i in 0..8 {
        let x = real::<T>(GL16_NODES[i]);
        let w = real::<T>(GL16_WEIGHTS[i]) * scale;
        // mirrored pair, filled so the final array is ascending in s
        out[7 - i] = (mid - scale * x, w);
        out[8 + i] = (mid + scale * x, w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        let rule = gauss_legendre_16(0.0_f64, 0.30065);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 0.30065, epsilon = 1e-14);
    }

    #[test]
    fn nodes_are_sorted_and_interior() {
        let rule = gauss_legendre_16(0.0_f64, 1.0);
        for k in 1..16 {
            assert!(rule[k].0 > rule[k - 1].0);
        }
        assert!(rule[0].0 > 0.0 && rule[15].0 < 1.0);
    }

    #[test]
    fn integrates_high_order_polynomials_exactly() {
        // A 16-point rule is exact through degree 31.
        let rule = gauss_legendre_16(-1.0_f64, 2.0);
        for p in [5_i32, 12, 23, 31] {
            let num: f64 = rule.iter().map(|&(x, w)| w * x.powi(p)).sum();
            let exact = (2.0f64.powi(p + 1) - (-1.0f64).powi(p + 1)) / (p as f64 + 1.0);
            assert_relative_eq!(num, exact, max_relative = 1e-12);
        }
    }
}
