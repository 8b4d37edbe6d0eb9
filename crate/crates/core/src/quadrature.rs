//! Adaptive 15-point Gauss–Kronrod quadrature (QUADPACK `qag` style).
//!
//! The interval is pre-split at caller-supplied breakpoints, then the
//! subinterval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |integral|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// tabulated values, kept verbatim
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 1e-300,
            max_intervals: 20_000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    // max-heap on error; ties broken by position so the order is total
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Piece { a, b, value, error }
}

/// Integrates `f` over `[a, b]`. `breakpoints` strictly inside the interval
/// become initial subinterval boundaries; `initial_pieces` further splits
/// each of those uniformly.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    initial_pieces: usize,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration bounds [{a}, {b}] not finite")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(lo);
    nodes.extend(cuts);
    nodes.push(hi);

    let pieces_each = initial_pieces.max(1);
    let mut heap = BinaryHeap::new();
    for w in nodes.windows(2) {
        let h = (w[1] - w[0]) / pieces_each as f64;
        for k in 0..pieces_each {
            let pa = w[0] + k as f64 * h;
            let pb = if k + 1 == pieces_each { w[1] } else { w[0] + (k + 1) as f64 * h };
            heap.push(kronrod(&f, pa, pb));
        }
    }

    loop {
        // Re-summing each pass keeps the totals free of cancellation drift.
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target && value.is_finite() {
            return Ok(Estimate {
                value: sign * value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals || !error.is_finite() {
            return Err(Error::Quadrature {
                residual: error,
                tolerance: target,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in f64
            return Err(Error::Quadrature {
                residual: error,
                tolerance: target,
                intervals: heap.len() + 1,
            });
        }
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_exact_for_polynomials() {
        // Kronrod part is exact through degree 22, Gauss part through 13.
        for deg in 0..=22 {
            let p = kronrod(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((p.value - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_oscillation_and_kinks() {
        let est = integrate(|x| (50.0 * x).sin().powi(2), 0.0, 10.0, &[], 1, Tolerance::relative(1e-12)).unwrap();
        let exact = 5.0 - (1000.0f64).sin() / 200.0;
        assert!((est.value - exact).abs() < 1e-10);

        let est = integrate(|x: f64| x.abs(), -1.0, 2.0, &[], 1, Tolerance::relative(1e-12)).unwrap();
        assert!((est.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let est = integrate(|x| x, 1.0, 0.0, &[], 1, Tolerance::relative(1e-12)).unwrap();
        assert!((est.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn step_function_with_breakpoint() {
        let f = |x: f64| if x < 0.3 { 1.0 } else { 0.0 };
        let est = integrate(f, 0.0, 1.0, &[0.3], 1, Tolerance::relative(1e-13)).unwrap();
        assert!((est.value - 0.3).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_reports_failure() {
        let err = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &[], 1, Tolerance::relative(1e-10)).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
