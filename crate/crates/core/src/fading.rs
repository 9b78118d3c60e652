//! Fisher-Snedecor F fading, Gamma interference and the SINR distribution.
//!
//! The received SINR of a user is
//!
//! ```text
//! γ = P D^{-α} Z / (σ² + P_I Y)
//! ```
//!
//! where `Z` is the F-distributed channel gain after maximum-ratio
//! transmission over `N_T` antennas and `Y ~ Gamma(N_I, η)` is the aggregate
//! interference gain. Four evaluations of the SINR CDF are provided:
//!
//! * [`sinr_cdf_quad`] integrates the exact conditional form numerically and
//!   is the reference for everything else;
//! * [`sinr_cdf_accurate`] is the single Meijer-G approximation, which
//!   neglects the noise floor inside the interference integral;
//! * [`sinr_cdf_asymptotic`] is its leading high-power term;
//! * [`sinr_sample`] draws SINR realisations for Monte Carlo checks.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::quad;
use crate::specfun::{beta_inc_reg_ln, gamma_q, gamma_ratio, gauss_2f1, ln_beta, ln_gamma, meijer_g, MeijerShape};
use crate::{Error, Result};

/// Relative tolerance of the reference quadratures.
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Interference tail mass discarded by the reference quadratures.
pub const TAIL_MASS: f64 = 1e-14;

/// Parameters `(m_f, m_s, z̄)` of a Fisher-Snedecor F variate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    /// Multipath fading severity.
    pub m_f: f64,
    /// Shadowing severity; must exceed 1 for the mean to exist.
    pub m_s: f64,
    /// Mean power, linear scale.
    pub z_bar: f64,
}

impl FadingParams {
    pub fn new(m_f: f64, m_s: f64, z_bar: f64) -> Result<Self> {
        let fp = FadingParams { m_f, m_s, z_bar };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.m_f.is_finite()
            && self.m_f > 0.0
            && self.m_s.is_finite()
            && self.m_s > 1.0
            && self.z_bar.is_finite()
            && self.z_bar > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("FadingParams", format!("need m_f > 0, m_s > 1, z̄ > 0; got {self:?}")))
        }
    }

    /// `(m_s − 1) z̄ / m_f`, the scale of the F variate.
    pub fn scale(&self) -> f64 {
        (self.m_s - 1.0) * self.z_bar / self.m_f
    }
}

/// Aggregate interference: `N_I` Rayleigh paths of mean power `η` at transmit power `P_I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    pub n_paths: u32,
    /// Mean power gain per path, linear scale.
    pub eta: f64,
    /// Interferer transmit power in watts.
    pub p_i: f64,
}

impl InterferenceParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths >= 1 && self.eta.is_finite() && self.eta > 0.0 && self.p_i.is_finite() && self.p_i >= 0.0 {
            Ok(())
        } else {
            Err(Error::domain("InterferenceParams", format!("need N_I ≥ 1, η > 0, P_I ≥ 0; got {self:?}")))
        }
    }

    fn shape(&self) -> f64 {
        self.n_paths as f64
    }
}

/// Distance, path loss, antenna count and receiver noise of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Transmitter to user distance in metres.
    pub distance: f64,
    pub path_loss_exp: f64,
    pub n_antennas: u32,
    /// Noise power σ² in watts.
    pub noise_power: f64,
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if pos(self.distance) && pos(self.path_loss_exp) && self.n_antennas >= 1 && pos(self.noise_power) {
            Ok(())
        } else {
            Err(Error::domain("LinkGeometry", format!("all fields must be positive; got {self:?}")))
        }
    }

    /// Large-scale attenuation `D^{-α}`.
    pub fn path_gain(&self) -> f64 {
        self.distance.powf(-self.path_loss_exp)
    }
}

/// Everything that determines the SINR distribution of one user.
///
/// The fading parameters are the reduced ones returned by
/// [`sum_f_equivalent`]. `Λ = P D^{-α} (m_s − 1) z̄ / m_f` is recomputed by
/// every constructor and setter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrParams {
    fading: FadingParams,
    geometry: LinkGeometry,
    interference: InterferenceParams,
    p_tx: f64,
    lambda_k: f64,
}

impl SinrParams {
    /// Builds from already reduced fading parameters.
    pub fn new(
        fading: FadingParams,
        geometry: LinkGeometry,
        interference: InterferenceParams,
        p_tx: f64,
    ) -> Result<Self> {
        fading.validate()?;
        geometry.validate()?;
        interference.validate()?;
        if !(p_tx.is_finite() && p_tx > 0.0) {
            return Err(Error::domain("SinrParams", format!("transmit power must be positive, got {p_tx}")));
        }
        let lambda_k = p_tx * geometry.path_gain() * fading.scale();
        Ok(SinrParams {
            fading,
            geometry,
            interference,
            p_tx,
            lambda_k,
        })
    }

    /// Builds from per-antenna fading, applying the sum-of-F reduction over
    /// `geometry.n_antennas`.
    pub fn from_per_antenna(
        per_antenna: FadingParams,
        geometry: LinkGeometry,
        interference: InterferenceParams,
        p_tx: f64,
    ) -> Result<Self> {
        per_antenna.validate()?;
        geometry.validate()?;
        Self::new(sum_f_equivalent(per_antenna, geometry.n_antennas), geometry, interference, p_tx)
    }

    pub fn with_p_tx(&self, p_tx: f64) -> Result<Self> {
        Self::new(self.fading, self.geometry, self.interference, p_tx)
    }

    pub fn with_geometry(&self, geometry: LinkGeometry) -> Result<Self> {
        Self::new(self.fading, geometry, self.interference, self.p_tx)
    }

    pub fn with_interference(&self, interference: InterferenceParams) -> Result<Self> {
        Self::new(self.fading, self.geometry, interference, self.p_tx)
    }

    pub fn with_fading(&self, fading: FadingParams) -> Result<Self> {
        Self::new(fading, self.geometry, self.interference, self.p_tx)
    }

    pub fn fading(&self) -> &FadingParams {
        &self.fading
    }
    pub fn geometry(&self) -> &LinkGeometry {
        &self.geometry
    }
    pub fn interference(&self) -> &InterferenceParams {
        &self.interference
    }
    pub fn p_tx(&self) -> f64 {
        self.p_tx
    }
    pub fn lambda_k(&self) -> f64 {
        self.lambda_k
    }

    /// `P D^{-α}`, the signal gain multiplying `Z`.
    pub fn signal_gain(&self) -> f64 {
        self.p_tx * self.geometry.path_gain()
    }

    /// `σ² / (P_I η)`, the noise-to-interference ratio that the Meijer-G
    /// approximation neglects.
    pub fn noise_to_interference(&self) -> f64 {
        self.geometry.noise_power / (self.interference.p_i * self.interference.eta)
    }
}

/// Density of the F variate.
pub fn f_pdf(z: f64, fp: &FadingParams) -> Result<f64> {
    fp.validate()?;
    if !(z >= 0.0) {
        return Err(Error::domain("f_pdf", format!("z must be non-negative, got {z}")));
    }
    if z == 0.0 {
        return Ok(if fp.m_f < 1.0 {
            f64::INFINITY
        } else if fp.m_f == 1.0 {
            fp.m_s / ((fp.m_s - 1.0) * fp.z_bar)
        } else {
            0.0
        });
    }
    Ok(f_pdf_unchecked(z, fp, ln_beta(fp.m_f, fp.m_s)?))
}

fn f_pdf_unchecked(z: f64, fp: &FadingParams, ln_b: f64) -> f64 {
    let s = (fp.m_s - 1.0) * fp.z_bar;
    let ln = fp.m_f * fp.m_f.ln() + fp.m_s * s.ln() + (fp.m_f - 1.0) * z.ln()
        - ln_b
        - (fp.m_f + fp.m_s) * (fp.m_f * z + s).ln();
    ln.exp()
}

/// Distribution function of the F variate, `I_{x/(1+x)}(m_f, m_s)` with
/// `x = z / scale`.
pub fn f_cdf(z: f64, fp: &FadingParams) -> Result<f64> {
    fp.validate()?;
    if !(z >= 0.0) {
        return Err(Error::domain("f_cdf", format!("z must be non-negative, got {z}")));
    }
    f_cdf_with_ln_beta(z, fp, ln_beta(fp.m_f, fp.m_s)?)
}

pub(crate) fn f_cdf_with_ln_beta(z: f64, fp: &FadingParams, ln_b: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(1.0);
    }
    let x = z / fp.scale();
    beta_inc_reg_ln(fp.m_f, fp.m_s, x / (1.0 + x), 1.0 / (1.0 + x), ln_b)
}

/// The same distribution function through the Gauss hypergeometric form
/// `x^{m_f} ₂F₁(m_f, m_f + m_s; m_f + 1; −x) / (m_f B(m_f, m_s))`.
///
/// Kept as an independent cross-check of [`f_cdf`]; for large shapes it
/// multiplies a huge power by a tiny hypergeometric value and loses
/// precision.
pub fn f_cdf_hypergeometric(z: f64, fp: &FadingParams) -> Result<f64> {
    fp.validate()?;
    if !(z >= 0.0) {
        return Err(Error::domain("f_cdf_hypergeometric", format!("z must be non-negative, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let x = z / fp.scale();
    let h = gauss_2f1(fp.m_f, fp.m_f + fp.m_s, fp.m_f + 1.0, -x)?;
    Ok(((fp.m_f * x.ln() - fp.m_f.ln() - ln_beta(fp.m_f, fp.m_s)?).exp() * h).clamp(0.0, 1.0))
}

/// Sampler for the F variate `Z = z̄ (m_s − 1) G₁ / (m_f G₂)`.
#[derive(Debug, Clone)]
pub struct FSampler {
    g1: Gamma<f64>,
    g2: Gamma<f64>,
    scale: f64,
}

impl FSampler {
    pub fn new(fp: &FadingParams) -> Result<Self> {
        fp.validate()?;
        let g = |k: f64| Gamma::new(k, 1.0).map_err(|e| Error::Parameter(format!("gamma sampler: {e}")));
        Ok(FSampler {
            g1: g(fp.m_f)?,
            g2: g(fp.m_s)?,
            scale: fp.scale(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * self.g1.sample(rng) / self.g2.sample(rng)
    }
}

/// One draw of the F variate.
pub fn f_sample<R: Rng + ?Sized>(fp: &FadingParams, rng: &mut R) -> Result<f64> {
    Ok(FSampler::new(fp)?.sample(rng))
}

/// Equivalent single F variate for the sum over `n_antennas` branches:
/// `(N_T m_f, m_s, N_T z̄)`.
///
/// Exact when the shadowing term is shared by all antennas.
pub fn sum_f_equivalent(fp: FadingParams, n_antennas: u32) -> FadingParams {
    let n = n_antennas.max(1) as f64;
    FadingParams {
        m_f: n * fp.m_f,
        m_s: fp.m_s,
        z_bar: n * fp.z_bar,
    }
}

/// Density of the interference gain `Y ~ Gamma(N_I, η)`.
pub fn interference_pdf(y: f64, ip: &InterferenceParams) -> Result<f64> {
    ip.validate()?;
    if !(y >= 0.0) {
        return Err(Error::domain("interference_pdf", format!("y must be non-negative, got {y}")));
    }
    Ok(interference_pdf_unchecked(y, ip, ln_gamma(ip.shape())?))
}

fn interference_pdf_unchecked(y: f64, ip: &InterferenceParams, ln_g: f64) -> f64 {
    let k = ip.shape();
    if y == 0.0 {
        return if k == 1.0 { 1.0 / ip.eta } else { 0.0 };
    }
    ((k - 1.0) * y.ln() - y / ip.eta - k * ip.eta.ln() - ln_g).exp()
}

/// Distribution function of `Y`, `1 − Γ(N_I, y/η)/Γ(N_I)`.
pub fn interference_cdf(y: f64, ip: &InterferenceParams) -> Result<f64> {
    ip.validate()?;
    if !(y >= 0.0) {
        return Err(Error::domain("interference_cdf", format!("y must be non-negative, got {y}")));
    }
    Ok(1.0 - gamma_q(ip.shape(), y / ip.eta)?)
}

/// Point beyond which `Y` carries less than `mass` probability.
pub(crate) fn interference_tail_point(ip: &InterferenceParams, mass: f64) -> Result<f64> {
    let k = ip.shape();
    let mut t = k + 10.0;
    while gamma_q(k, t)? > mass {
        t *= 1.5;
    }
    Ok(t * ip.eta)
}

/// Breakpoints over `[0, y_max]` that put nodes near the bulk of the Gamma density.
fn interference_breaks(ip: &InterferenceParams, y_max: f64, extra: &[f64]) -> Vec<f64> {
    let mean = ip.shape() * ip.eta;
    let mut b: Vec<f64> = [0.0, 0.25 * mean, mean, 2.0 * mean, 4.0 * mean]
        .into_iter()
        .chain(extra.iter().copied())
        .filter(|v| v.is_finite() && *v >= 0.0 && *v < y_max)
        .collect();
    b.push(y_max);
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup();
    b
}

/// Averages `g(σ² + P_I y)` over the interference distribution.
///
/// `extra` are additional breakpoints in `y`.
pub(crate) fn average_over_interference<G: Fn(f64) -> f64>(
    sp: &SinrParams,
    g: G,
    extra: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let ip = sp.interference;
    let sigma2 = sp.geometry.noise_power;
    if ip.p_i == 0.0 {
        return Ok(g(sigma2));
    }
    let ln_g = ln_gamma(ip.shape())?;
    let y_max = interference_tail_point(&ip, TAIL_MASS)?;
    let breaks = interference_breaks(&ip, y_max, extra);
    let r = quad::integrate_with_breaks(
        |y| g(sigma2 + ip.p_i * y) * interference_pdf_unchecked(y, &ip, ln_g),
        &breaks,
        1e-300,
        rel_tol,
        quad::DEFAULT_MAX_INTERVALS,
    )?;
    Ok(r.value)
}

/// The `y` at which the conditional argument `γ(σ² + P_I y)/g` reaches `target`.
fn y_for_argument(sp: &SinrParams, gamma: f64, target: f64) -> f64 {
    (target * sp.signal_gain() / gamma - sp.geometry.noise_power) / sp.interference.p_i
}

fn validate_gamma(func: &'static str, gamma: f64) -> Result<()> {
    if gamma >= 0.0 && !gamma.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("SINR threshold must be non-negative, got {gamma}")))
    }
}

/// SINR density by quadrature over the interference.
pub fn sinr_pdf_quad(gamma: f64, sp: &SinrParams) -> Result<f64> {
    validate_gamma("sinr_pdf_quad", gamma)?;
    let fp = sp.fading;
    let g = sp.signal_gain();
    if gamma == 0.0 {
        return Ok(if fp.m_f > 1.0 { 0.0 } else { f64::INFINITY });
    }
    if gamma == f64::INFINITY {
        return Ok(0.0);
    }
    let ln_b = ln_beta(fp.m_f, fp.m_s)?;
    let extra = [y_for_argument(sp, gamma, fp.scale())];
    average_over_interference(sp, |x| x / g * f_pdf_unchecked(gamma * x / g, &fp, ln_b), &extra, QUAD_REL_TOL)
        .map_err(|e| e.with_context("sinr_pdf_quad"))
}

/// SINR distribution function by quadrature over the interference.
///
/// This is the reference against which the approximations are measured.
pub fn sinr_cdf_quad(gamma: f64, sp: &SinrParams) -> Result<f64> {
    validate_gamma("sinr_cdf_quad", gamma)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma == f64::INFINITY {
        return Ok(1.0);
    }
    let fp = sp.fading;
    let g = sp.signal_gain();
    let ln_b = ln_beta(fp.m_f, fp.m_s)?;
    let extra = [y_for_argument(sp, gamma, fp.scale())];
    let failure = std::cell::RefCell::new(None);
    let v = average_over_interference(
        sp,
        |x| match f_cdf_with_ln_beta(gamma * x / g, &fp, ln_b) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &extra,
        QUAD_REL_TOL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e.with_context("sinr_cdf_quad"));
    }
    Ok(v.map_err(|e| e.with_context("sinr_cdf_quad"))?.clamp(0.0, 1.0))
}

/// Result of the Meijer-G CDF approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccurateCdf {
    /// Approximate CDF clamped to `[0, 1]`.
    pub value: f64,
    /// Value before clamping.
    pub raw: f64,
    /// Meijer-G argument `γ P_I η / Λ`; small values are the intended regime.
    pub rho: f64,
    /// `σ² / (P_I η)`. The approximation overshoots by up to `exp` of this
    /// ratio, so it is only tight when the ratio is small.
    pub noise_to_interference: f64,
}

/// Meijer-G approximation of the SINR CDF.
///
/// `exp(σ²/(P_I η)) / (Γ(N_I)Γ(m_s)Γ(m_f)) · G^{1,3}_{3,2}(γ P_I η / Λ | 1−m_s, 1−N_I, 1; m_f, 0)`
pub fn sinr_cdf_accurate(gamma: f64, sp: &SinrParams) -> Result<AccurateCdf> {
    validate_gamma("sinr_cdf_accurate", gamma)?;
    let ip = sp.interference;
    if ip.p_i == 0.0 {
        return Err(Error::Parameter("the Meijer-G CDF needs a positive interference power".into()));
    }
    let fp = sp.fading;
    let rho = gamma * ip.p_i * ip.eta / sp.lambda_k;
    let nir = sp.noise_to_interference();
    if gamma == 0.0 {
        return Ok(AccurateCdf {
            value: 0.0,
            raw: 0.0,
            rho,
            noise_to_interference: nir,
        });
    }
    let shape = MeijerShape::new(1, 3, vec![1.0 - fp.m_s, 1.0 - ip.shape(), 1.0], vec![fp.m_f, 0.0])?;
    let g = meijer_g(&shape, rho).map_err(|e| e.with_context("sinr_cdf_accurate"))?;
    let pre = nir.exp() * gamma_ratio(&[], &[ip.shape(), fp.m_s, fp.m_f])?;
    let raw = pre * g;
    Ok(AccurateCdf {
        value: raw.clamp(0.0, 1.0),
        raw,
        rho,
        noise_to_interference: nir,
    })
}

/// Leading high-power term of the Meijer-G approximation,
/// `Γ(m_f+m_s)Γ(N_I+m_f) / (Γ(N_I)Γ(m_s)Γ(m_f+1)) · exp(σ²/(P_I η)) · (γ P_I η / Λ)^{m_f}`.
///
/// Not clamped: outside the high-power regime the value can exceed one.
pub fn sinr_cdf_asymptotic(gamma: f64, sp: &SinrParams) -> Result<f64> {
    validate_gamma("sinr_cdf_asymptotic", gamma)?;
    let ip = sp.interference;
    if ip.p_i == 0.0 {
        return Err(Error::Parameter("the asymptotic CDF needs a positive interference power".into()));
    }
    let fp = sp.fading;
    let n = ip.shape();
    let c = gamma_ratio(&[fp.m_f + fp.m_s, n + fp.m_f], &[n, fp.m_s, fp.m_f + 1.0])?;
    let rho = gamma * ip.p_i * ip.eta / sp.lambda_k;
    Ok(c * sp.noise_to_interference().exp() * rho.powf(fp.m_f))
}

/// Meijer-G approximation of
/// `I_A = ∫_a^∞ x^b (x−a)^c e^{−(x−a)/d} ₂F₁(α, β; ε; −ρx) dx`,
///
/// `exp(a/d) Γ(ε) d^{b+c+1} / (Γ(α)Γ(β)) · G^{1,3}_{3,2}(dρ | 1−β, −b−c, 1−α; 0, 1−ε)`.
///
/// It replaces the lower limit `a` by zero after shifting, so it is exact
/// when `a = 0` and degrades as `a/d` or `ρ` grow.
#[allow(clippy::too_many_arguments)]
pub fn lemma_ia_approx(a: f64, b: f64, c: f64, d: f64, alpha: f64, beta: f64, eps: f64, rho: f64) -> Result<f64> {
    if !(d > 0.0 && rho > 0.0 && a >= 0.0) {
        return Err(Error::domain("lemma_ia_approx", format!("need a ≥ 0, d > 0, ρ > 0; got a={a}, d={d}, ρ={rho}")));
    }
    let shape = MeijerShape::new(1, 3, vec![1.0 - beta, -b - c, 1.0 - alpha], vec![0.0, 1.0 - eps])?;
    let g = meijer_g(&shape, d * rho).map_err(|e| e.with_context("lemma_ia_approx"))?;
    let pre = (a / d + (b + c + 1.0) * d.ln()).exp() * gamma_ratio(&[eps], &[alpha, beta])?;
    Ok(pre * g)
}

/// Sampler for the SINR of one user.
#[derive(Debug, Clone)]
pub struct SinrSampler {
    z: FSampler,
    y: Gamma<f64>,
    gain: f64,
    noise: f64,
    p_i: f64,
}

impl SinrSampler {
    pub fn new(sp: &SinrParams) -> Result<Self> {
        let ip = sp.interference;
        Ok(SinrSampler {
            z: FSampler::new(&sp.fading)?,
            y: Gamma::new(ip.shape(), ip.eta).map_err(|e| Error::Parameter(format!("gamma sampler: {e}")))?,
            gain: sp.signal_gain(),
            noise: sp.geometry.noise_power,
            p_i: ip.p_i,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z = self.z.sample(rng);
        let y = self.y.sample(rng);
        self.gain * z / (self.noise + self.p_i * y)
    }
}

/// One SINR draw.
pub fn sinr_sample<R: Rng + ?Sized>(sp: &SinrParams, rng: &mut R) -> Result<f64> {
    Ok(SinrSampler::new(sp)?.sample(rng))
}
