//! Gamma, log-Gamma, digamma and Beta functions for real and complex arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128, n = 15; relative error below 1e-15
// in the right half-plane.
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_ln_real(x: f64) -> f64 {
    // ln Γ(x) for x >= 0.5
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `ln |Γ(x)|` together with the sign of `Γ(x)`, for any real `x` that is not
/// a pole.
pub fn ln_gamma_sign(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::domain("ln_gamma_sign", format!("non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::domain("ln_gamma_sign", format!("pole at {x}")));
    }
    if x >= 0.5 {
        return Ok((lanczos_ln_real(x), 1.0));
    }
    // Γ(x) Γ(1-x) = π / sin(πx)
    let s = sin_pi(x);
    let (lg, _) = ln_gamma_sign(1.0 - x)?;
    Ok((PI.ln() - s.abs().ln() - lg, s.signum()))
}

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor(); // r in [0, 2)
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// `ln Γ(a)` for `a > 0`.
pub fn ln_gamma(a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain("ln_gamma", format!("argument must be positive and finite, got {a}")));
    }
    Ok(ln_gamma_sign(a)?.0)
}

/// `Γ(a)` for `a > 0`. Overflows to an error above `a ≈ 171.6`; use
/// [`ln_gamma`] there.
pub fn gamma_fn(a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain("gamma_fn", format!("argument must be positive and finite, got {a}")));
    }
    if a == a.floor() && a <= 30.0 {
        let mut prod = 1.0;
        let mut k = 2.0;
        while k < a {
            prod *= k;
            k += 1.0;
        }
        return Ok(prod);
    }
    let v = lanczos_ln_real(a).exp();
    if v.is_infinite() {
        return Err(Error::domain("gamma_fn", format!("Γ({a}) overflows f64; use ln_gamma")));
    }
    Ok(v)
}

/// `Γ(x)` for any real non-pole `x`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if x > 0.0 {
        return gamma_fn(x);
    }
    let (lg, sign) = ln_gamma_sign(x)?;
    Ok(sign * lg.exp())
}

/// `1/Γ(x)`; zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    match ln_gamma_sign(x) {
        Ok((lg, sign)) => sign * (-lg).exp(),
        Err(_) => f64::NAN,
    }
}

/// Product of Gamma functions `Π Γ(num_i) / Π Γ(den_j)` evaluated in log
/// domain with sign tracking. Denominator poles give zero; numerator poles are
/// an error.
pub fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut log = 0.0;
    let mut sign = 1.0;
    for &d in den {
        if is_nonpositive_integer(d) {
            return Ok(0.0);
        }
    }
    for &n in num {
        let (l, s) = ln_gamma_sign(n)?;
        log += l;
        sign *= s;
    }
    for &d in den {
        let (l, s) = ln_gamma_sign(d)?;
        log -= l;
        sign *= s;
    }
    Ok(sign * log.exp())
}

/// Digamma `ψ(x) = Γ'(x)/Γ(x)` for real non-pole `x`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || is_nonpositive_integer(x) {
        return Err(Error::domain("digamma", format!("invalid argument {x}")));
    }
    if x < 0.0 {
        // ψ(1-x) - ψ(x) = π cot(πx)
        let cot = (PI * x).cos() / sin_pi(x);
        return Ok(digamma(1.0 - x)? - PI * cot);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    Ok(acc + y.ln() - 0.5 / y - series)
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` computed in log domain.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::domain("beta_fn", format!("arguments must be positive, got ({a}, {b})")));
    }
    Ok(lanczos_ln_real_any(a) + lanczos_ln_real_any(b) - lanczos_ln_real_any(a + b))
}

fn lanczos_ln_real_any(x: f64) -> f64 {
    ln_gamma_sign(x).map(|(l, _)| l).unwrap_or(f64::NAN)
}

/// Principal-ish branch of `ln Γ(z)` for complex `z` away from the poles.
///
/// Only the value modulo `2πi` is meaningful, which is all the Mellin–Barnes
/// integrands need since they exponentiate sums of these terms.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        let zm = z - 1.0;
        let mut sum = Complex64::new(LANCZOS_COEF[0], 0.0);
        for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            sum += *c / (zm + k as f64);
        }
        let t = zm + LANCZOS_G + 0.5;
        return HALF_LN_2PI + (zm + 0.5) * t.ln() - t + sum.ln();
    }
    // reflection: ln Γ(z) = ln π - ln sin(πz) - ln Γ(1-z)
    Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(Complex64::new(1.0, 0.0) - z)
}

/// `ln sin(πz)` without overflow for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin w = e^{-iw} (e^{2iw} - 1) / (2i), with |e^{2iw}| <= 1 for Im w >= 0
    let i = Complex64::new(0.0, 1.0);
    // reduce the real part to keep the exponentials well conditioned
    let shift = 2.0 * (z.re / 2.0).floor();
    let zr = Complex64::new(z.re - shift, z.im);
    let w = zr * PI;
    let e2 = (2.0 * i * w).exp();
    -i * w + ((e2 - 1.0) / (2.0 * i)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_integer_and_half() {
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516, max_relative = 1e-14);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
        assert!(ln_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn ln_gamma_large_argument() {
        // ln Γ(200) from the Stirling series (independent route)
        let x: f64 = 200.0;
        let stirling = (x - 0.5) * x.ln() - x + HALF_LN_2PI + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3));
        assert_relative_eq!(ln_gamma(200.0).unwrap(), stirling, max_relative = 1e-14);
        assert!(gamma_fn(200.0).is_err());
    }

    #[test]
    fn negative_arguments_via_reflection() {
        // Γ(-0.5) = -2√π
        assert_relative_eq!(gamma_real(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!(gamma_real(-2.0).is_err());
    }

    #[test]
    fn digamma_values() {
        // ψ(1) = -γ_E, ψ(1/2) = -γ_E - 2 ln 2
        let euler = 0.577_215_664_901_532_9;
        assert_relative_eq!(digamma(1.0).unwrap(), -euler, max_relative = 1e-13);
        assert_relative_eq!(digamma(0.5).unwrap(), -euler - 2.0 * 2f64.ln(), max_relative = 1e-13);
        // recurrence across the reflection boundary
        let x = -1.3;
        assert_relative_eq!(digamma(x + 1.0).unwrap(), digamma(x).unwrap() + 1.0 / x, max_relative = 1e-12);
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta_fn(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta_fn(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-13);
        assert!(beta_fn(0.0, 1.0).is_err());
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for &x in &[0.3, 0.5, 1.7, 4.2, 25.0, -0.7, -3.4] {
            let c = ln_gamma_complex(Complex64::new(x, 0.0));
            let (l, _) = ln_gamma_sign(x).unwrap();
            assert_relative_eq!(c.re, l, epsilon = 1e-13, max_relative = 1e-13);
        }
    }

    #[test]
    fn complex_recurrence_and_modulus() {
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for &t in &[0.5, 3.0, 20.0, 80.0] {
            let lg = ln_gamma_complex(Complex64::new(0.5, t));
            let expect = 0.5 * (PI.ln() - (PI * t).cosh().ln());
            assert_relative_eq!(lg.re, expect, epsilon = 1e-12, max_relative = 1e-12);
        }
        // Γ(z+1) = z Γ(z) modulo 2πi, in the reflected half-plane too
        for &(x, y) in &[(-2.3, 1.1), (-0.4, 15.0), (3.3, -7.0)] {
            let z = Complex64::new(x, y);
            let lhs = ln_gamma_complex(z + 1.0);
            let rhs = ln_gamma_complex(z) + z.ln();
            let diff = (lhs - rhs).exp();
            assert_relative_eq!(diff.re, 1.0, epsilon = 1e-12);
            assert!(diff.im.abs() < 1e-12);
        }
    }
}
