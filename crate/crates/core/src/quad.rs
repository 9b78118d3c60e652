//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate satisfies `err <= max(abs_tol, rel_tol * |value|)`. Endpoints are
//! never evaluated, so integrable endpoint singularities are tolerated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, err }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], abs_tol, rel_tol, DEFAULT_MAX_INTERVALS)
}

/// Integrates `f` over consecutive intervals `breaks[0]..breaks[n]`, seeding
/// the adaptive scheme with one segment per interval.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::domain("integrate", "need at least two break points"));
    }
    if breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("integrate", "break points must be finite"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        heap.push(gk15(&f, w[0], w[1]));
        evaluations += 15;
    }
    loop {
        let (value, err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
        if !value.is_finite() {
            return Err(Error::numeric("integrate", "integrand produced a non-finite value"));
        }
        if err <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                abs_err: err,
                evaluations,
            });
        }
        if heap.len() >= max_intervals {
            return Err(Error::numeric(
                "integrate",
                format!(
                    "no convergence with {max_intervals} intervals: value {value:e}, error estimate {err:e}"
                ),
            ));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            return Err(Error::numeric(
                "integrate",
                format!("interval collapsed near {mid:e}; residual error {err:e}"),
            ));
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, ∞)` via the map `x = a + t/(1-t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    let g = |t: f64| {
        let u = 1.0 - t;
        let x = a + t / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_with_breaks(g, &[0.0, 0.5, 0.9, 0.99, 1.0], abs_tol, rel_tol, DEFAULT_MAX_INTERVALS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_for_polynomials() {
        // the embedded Gauss rule is exact to degree 13, so one panel suffices
        let r = integrate(|x| x.powi(13) + 3.0 * x.powi(4), 0.0, 1.0, 1e-15, 1e-15).unwrap();
        assert_relative_eq!(r.value, 1.0 / 14.0 + 3.0 / 5.0, max_relative = 1e-14);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_inf(|x: f64| (-x).exp(), 0.0, 1e-14, 1e-13).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
        let r = integrate_to_inf(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1e-13, 1e-12).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-10);
    }

    #[test]
    fn reports_failure() {
        let r = integrate_with_breaks(|x: f64| (1.0 / x).sin() / x, &[1e-8, 1.0], 1e-14, 1e-14, 10);
        assert!(matches!(r, Err(Error::Numeric { .. })));
    }
}
