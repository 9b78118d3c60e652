//! Meijer G-function by numerical Mellin–Barnes contour integration.
//!
//! With the convention
//!
//! ```text
//!                1    ⌠  Π_{j≤m} Γ(b_j − s) Π_{j≤n} Γ(1 − a_j + s)
//! G(z) = ───── │  ────────────────────────────────────────────── z^s ds
//!               2πi   ⌡  Π_{j>m} Γ(1 − b_j + s) Π_{j>n} Γ(a_j − s)
//! ```
//!
//! the contour is the vertical line `Re s = c` separating the left poles
//! `s = a_j − 1 − k` (`j ≤ n`) from the right poles `s = b_j + k` (`j ≤ m`).
//! For real `z > 0` and real parameters the integrand is conjugate-symmetric,
//! so `G = (1/π) ∫_0^∞ Re I(c + it) dt`.
//!
//! Inside the gap `c` is placed at the minimum of `|I(c)|` along the real
//! axis. That keeps the integrand magnitude close to the size of the result
//! and limits cancellation when `z` is very small or very large.

use num_complex::Complex64;

use super::gamma::ln_gamma_complex;
use crate::quad;
use crate::{Error, Result};

/// Relative accuracy requested from the line integral.
pub const CONTOUR_REL_TOL: f64 = 1e-12;
/// Accuracy below which a result is reported as a numeric failure.
pub const ACCEPT_REL_TOL: f64 = 1e-8;
/// Gaps narrower than this are reported as a parameter error.
pub const MIN_POLE_GAP: f64 = 1e-3;

/// `(m, n, p, q)` shapes this implementation supports.
pub const SUPPORTED_SHAPES: [(usize, usize, usize, usize); 3] = [(1, 0, 0, 1), (1, 3, 3, 2), (1, 4, 4, 2)];

/// Index shape and parameters of a Meijer G-function `G^{m,n}_{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerShape {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl MeijerShape {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let (p, q) = (a.len(), b.len());
        if !SUPPORTED_SHAPES.contains(&(m, n, p, q)) {
            return Err(Error::Parameter(format!(
                "unsupported Meijer-G shape G^{{{m},{n}}}_{{{p},{q}}}; supported: {SUPPORTED_SHAPES:?}"
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("Meijer-G parameters must be finite".into()));
        }
        let shape = MeijerShape { m, n, a, b };
        let (lo, hi) = shape.pole_gap();
        if hi - lo < MIN_POLE_GAP {
            return Err(Error::Parameter(format!(
                "contour cannot separate the pole families: left poles up to {lo}, right poles from {hi}"
            )));
        }
        Ok(shape)
    }

    /// Shorthand for `G^{1,0}_{0,1}(z | —; b)`, which equals `z^b e^{-z}`.
    pub fn exponential(b: f64) -> Result<Self> {
        Self::new(1, 0, vec![], vec![b])
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.a.len()
    }
    pub fn q(&self) -> usize {
        self.b.len()
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `(max left pole, min right pole)`; either side may be infinite.
    pub fn pole_gap(&self) -> (f64, f64) {
        let lo = self.a[..self.n].iter().map(|a| a - 1.0).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.b[..self.m].iter().copied().fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    /// `δ = m + n − (p + q)/2`; the integrand decays like `exp(−δπ|t|)`.
    fn decay_rate(&self) -> f64 {
        (self.m + self.n) as f64 - 0.5 * (self.p() + self.q()) as f64
    }

    fn ln_integrand(&self, s: Complex64, ln_z: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = s * ln_z;
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_complex(b - s);
            } else {
                acc -= ln_gamma_complex(one - b + s);
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_complex(one - a + s);
            } else {
                acc -= ln_gamma_complex(a - s);
            }
        }
        acc
    }
}

/// Evaluates `G^{m,n}_{p,q}(z | a; b)` for real `z > 0`.
pub fn meijer_g(shape: &MeijerShape, z: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::domain("meijer_g", format!("argument must be positive and finite, got {z}")));
    }
    if shape.decay_rate() <= 0.0 {
        return Err(Error::Parameter("Mellin–Barnes integrand does not decay on the contour".into()));
    }
    let ln_z = z.ln();
    let c = contour_abscissa(shape, ln_z);
    let scale = shape.ln_integrand(Complex64::new(c, 0.0), ln_z).re;

    // Integrand normalised by its value at t = 0 so the quadrature works on O(1) numbers.
    let f = |t: f64| {
        let v = shape.ln_integrand(Complex64::new(c, t), ln_z) - scale;
        v.re.exp() * v.im.cos()
    };

    let t_max = truncation_point(shape, c, ln_z, scale);
    let mut breaks = vec![0.0];
    let step = (t_max / 64.0).max(0.25).min(2.0);
    let mut t = 0.0;
    while t + step < t_max {
        t += step;
        breaks.push(t);
    }
    breaks.push(t_max);

    let r = quad::integrate_with_breaks(f, &breaks, 1e-15, CONTOUR_REL_TOL, 20_000)
        .map_err(|e| e.with_context("meijer_g contour"))?;
    let value = r.value;
    if r.abs_err > ACCEPT_REL_TOL * value.abs() && r.abs_err > 1e-14 {
        return Err(Error::numeric(
            "meijer_g contour",
            format!(
                "truncated line integral did not reach relative accuracy {ACCEPT_REL_TOL:e}: value {value:e}, error {:e}",
                r.abs_err
            ),
        ));
    }
    Ok(value * scale.exp() / std::f64::consts::PI)
}

fn contour_abscissa(shape: &MeijerShape, ln_z: f64) -> f64 {
    let (lo, hi) = shape.pole_gap();
    let margin = |w: f64| (0.02 * w).min(0.02);
    let (mut left, mut right) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let w = hi - lo;
            (lo + margin(w), hi - margin(w))
        }
        (false, true) => (hi - 200.0, hi - 0.02),
        (true, false) => (lo + 0.02, lo + 200.0),
        (false, false) => (-100.0, 100.0),
    };
    let phi = |c: f64| shape.ln_integrand(Complex64::new(c, 0.0), ln_z).re;
    // golden-section search for the minimum of ln|I(c)|
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = right - g * (right - left);
    let mut x2 = left + g * (right - left);
    let mut f1 = phi(x1);
    let mut f2 = phi(x2);
    for _ in 0..80 {
        if f1 <= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - g * (right - left);
            f1 = phi(x1);
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + g * (right - left);
            f2 = phi(x2);
        }
        if (right - left).abs() < 1e-6 {
            break;
        }
    }
    0.5 * (left + right)
}

fn truncation_point(shape: &MeijerShape, c: f64, ln_z: f64, scale: f64) -> f64 {
    // first t (doubling) beyond which the log-modulus stays 45 below the peak
    let threshold = scale - 45.0;
    let mut t = 1.0;
    loop {
        let here = shape.ln_integrand(Complex64::new(c, t), ln_z).re;
        let further = shape.ln_integrand(Complex64::new(c, 1.5 * t), ln_z).re;
        if (here < threshold && further < here) || t > 4096.0 {
            return t;
        }
        t *= 1.5;
    }
}
