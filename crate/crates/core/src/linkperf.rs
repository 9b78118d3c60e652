//! Outage, bit error and triplet drop probabilities.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::fading::{
    self, average_over_interference, sinr_cdf_accurate, sinr_cdf_asymptotic, sinr_cdf_quad, FadingParams,
    InterferenceParams, LinkGeometry, SinrParams, SinrSampler,
};
use crate::quad;
use crate::rng::{monte_carlo_mean, McEstimate};
use crate::specfun::{gamma_q, gamma_ratio, ln_beta, ln_gamma, meijer_g, MeijerShape};
use crate::{Error, Result};

/// Largest supported triplet length in bits.
pub const MAX_TRIPLET_BITS: u32 = 4096;

/// Shape parameters `(λ₁, λ₂)` of the conditional bit error probability
/// `Γ(λ₂, λ₁γ) / (2Γ(λ₂))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for ModulationParams {
    fn default() -> Self {
        ModulationParams {
            lambda1: 1.0,
            lambda2: 0.5,
        }
    }
}

impl ModulationParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if pos(self.lambda1) && pos(self.lambda2) {
            Ok(())
        } else {
            Err(Error::domain("ModulationParams", format!("λ₁ and λ₂ must be positive; got {self:?}")))
        }
    }
}

/// Coded triplet length `d_t` and the number of correctable bit errors `d_e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletCoding {
    pub d_t: u32,
    pub d_e: u32,
}

impl Default for TripletCoding {
    fn default() -> Self {
        TripletCoding { d_t: 256, d_e: 8 }
    }
}

impl TripletCoding {
    pub fn new(d_t: u32, d_e: u32) -> Result<Self> {
        let c = TripletCoding { d_t, d_e };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_t >= 1 && self.d_e < self.d_t && self.d_t <= MAX_TRIPLET_BITS {
            Ok(())
        } else {
            Err(Error::domain(
                "TripletCoding",
                format!("need 0 ≤ d_e < d_t ≤ {MAX_TRIPLET_BITS}; got {self:?}"),
            ))
        }
    }
}

/// Channel and coding description of one user, with per-antenna fading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserLink {
    pub fading: FadingParams,
    pub geometry: LinkGeometry,
    pub interference: InterferenceParams,
    #[serde(default)]
    pub modulation: ModulationParams,
    #[serde(default)]
    pub coding: TripletCoding,
}

impl UserLink {
    pub fn validate(&self) -> Result<()> {
        self.fading.validate()?;
        self.geometry.validate()?;
        self.interference.validate()?;
        self.modulation.validate()?;
        self.coding.validate()
    }

    /// SINR parameters at transmit power `p_tx`, after the antenna reduction.
    pub fn sinr_params(&self, p_tx: f64) -> Result<SinrParams> {
        SinrParams::from_per_antenna(self.fading, self.geometry, self.interference, p_tx)
    }
}

/// A probability from one of the evaluation methods; Monte Carlo methods
/// also report a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: Option<f64>,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Estimate { value, std_err: None }
    }
}

impl From<McEstimate> for Estimate {
    fn from(m: McEstimate) -> Self {
        Estimate {
            value: m.mean,
            std_err: Some(m.std_err),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageMethod {
    Quad,
    Accurate,
    Asymptotic,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BepMethod {
    Closed,
    Quad,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdpConvention {
    /// Block error probability `Σ_{j>d_e} C(d_t, j) e^j (1−e)^{d_t−j}`.
    #[default]
    Binomial,
    /// The same sum without the binomial coefficient.
    Literal,
}

/// Probability that the SINR falls below `gamma_th`.
pub fn outage_probability(gamma_th: f64, sp: &SinrParams, method: OutageMethod) -> Result<Estimate> {
    if !(gamma_th > 0.0) {
        return Err(Error::domain("outage_probability", format!("threshold must be positive, got {gamma_th}")));
    }
    match method {
        OutageMethod::Quad => sinr_cdf_quad(gamma_th, sp).map(Estimate::exact),
        OutageMethod::Accurate => sinr_cdf_accurate(gamma_th, sp).map(|a| Estimate::exact(a.value)),
        OutageMethod::Asymptotic => sinr_cdf_asymptotic(gamma_th, sp).map(Estimate::exact),
        OutageMethod::MonteCarlo { samples, seed } => {
            let sampler = SinrSampler::new(sp)?;
            Ok(monte_carlo_mean(samples, seed, 0, |r| (sampler.sample(r) <= gamma_th) as u8 as f64).into())
        }
    }
}

/// `Γ(λ₂, λ₁γ) / (2Γ(λ₂))`.
pub fn conditional_bep(gamma: f64, mp: &ModulationParams) -> Result<f64> {
    mp.validate()?;
    if !(gamma >= 0.0) {
        return Err(Error::domain("conditional_bep", format!("SINR must be non-negative, got {gamma}")));
    }
    Ok(0.5 * gamma_q(mp.lambda2, mp.lambda1 * gamma)?)
}

/// Average bit error probability by the chosen method.
pub fn bep(sp: &SinrParams, mp: &ModulationParams, method: BepMethod) -> Result<Estimate> {
    match method {
        BepMethod::Closed => bep_closed(sp, mp).map(Estimate::exact),
        BepMethod::Quad => bep_quad(sp, mp).map(Estimate::exact),
        BepMethod::MonteCarlo { samples, seed } => bep_mc(sp, mp, samples, seed).map(Estimate::from),
    }
    .map_err(|e| e.with_context(&format!("bep[{method:?}]")))
}

/// Meijer-G closed form built on the approximate CDF:
/// `exp(σ²/(P_I η)) / (2Γ(λ₂)Γ(N_I)Γ(m_s)Γ(m_f)) · G^{1,4}_{4,2}(P_I η/(λ₁Λ) | 1−m_s, 1−N_I, 1, 1−λ₂; m_f, 0)`.
///
/// Inherits the approximation's overshoot when `σ²/(P_I η)` is not small.
pub fn bep_closed(sp: &SinrParams, mp: &ModulationParams) -> Result<f64> {
    mp.validate()?;
    let ip = sp.interference();
    if ip.p_i == 0.0 {
        return Err(Error::Parameter("the closed-form BEP needs a positive interference power".into()));
    }
    let fp = sp.fading();
    let n = ip.n_paths as f64;
    let shape = MeijerShape::new(1, 4, vec![1.0 - fp.m_s, 1.0 - n, 1.0, 1.0 - mp.lambda2], vec![fp.m_f, 0.0])?;
    let z = ip.p_i * ip.eta / (mp.lambda1 * sp.lambda_k());
    let g = meijer_g(&shape, z)?;
    let pre = sp.noise_to_interference().exp() * 0.5 * gamma_ratio(&[], &[mp.lambda2, n, fp.m_s, fp.m_f])?;
    Ok(pre * g)
}

/// Reference average BEP: the interference average of the F-fading BEP at
/// the conditional signal scale.
pub fn bep_quad(sp: &SinrParams, mp: &ModulationParams) -> Result<f64> {
    mp.validate()?;
    let single = SingleFBep::new(sp.fading(), mp)?;
    let g = sp.signal_gain();
    let failure = RefCell::new(None);
    let fp = sp.fading();
    let ip = sp.interference();
    let pivot = (g * fp.scale() * mp.lambda1 - sp.geometry().noise_power) / ip.p_i;
    let v = average_over_interference(
        sp,
        |x| match single.eval(g / x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &[pivot],
        1e-9,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(v?.clamp(0.0, 0.5))
}

/// Monte Carlo average of the conditional BEP over SINR draws.
pub fn bep_mc(sp: &SinrParams, mp: &ModulationParams, samples: usize, seed: u64) -> Result<McEstimate> {
    mp.validate()?;
    let sampler = SinrSampler::new(sp)?;
    let mp = *mp;
    Ok(monte_carlo_mean(samples, seed, 1, |r| {
        0.5 * gamma_q(mp.lambda2, mp.lambda1 * sampler.sample(r)).unwrap_or(f64::NAN)
    }))
}

/// BEP over pure F fading with SINR `k Z`, as a function of `k`.
struct SingleFBep {
    fp: FadingParams,
    mp: ModulationParams,
    ln_b: f64,
    ln_pre: f64,
    u_max: f64,
}

impl SingleFBep {
    fn new(fp: &FadingParams, mp: &ModulationParams) -> Result<Self> {
        // λ₁^{λ₂}/Γ(λ₂) ∫ u^{2λ₂−1} e^{−λ₁u²} F_Z(u²/k) du after t = u²
        let mut t = mp.lambda2 + 10.0;
        while gamma_q(mp.lambda2, t)? > 1e-17 {
            t *= 1.3;
        }
        Ok(SingleFBep {
            fp: *fp,
            mp: *mp,
            ln_b: ln_beta(fp.m_f, fp.m_s)?,
            ln_pre: mp.lambda2 * mp.lambda1.ln() - ln_gamma(mp.lambda2)?,
            u_max: (t / mp.lambda1).sqrt(),
        })
    }

    fn eval(&self, k: f64) -> Result<f64> {
        if k == 0.0 {
            return Ok(0.5);
        }
        let (fp, mp) = (self.fp, self.mp);
        let mut breaks = vec![0.0];
        for m in [1e-2, 1e-1, 1.0, 1e1] {
            let u = (m * k * fp.scale()).sqrt();
            if u < self.u_max {
                breaks.push(u);
            }
        }
        breaks.push(self.u_max);
        breaks.sort_by(|a, b| a.total_cmp(b));
        let failure = RefCell::new(None);
        let r = quad::integrate_with_breaks(
            |u| {
                if u == 0.0 {
                    return 0.0;
                }
                let c = match fading::f_cdf_with_ln_beta(u * u / k, &fp, self.ln_b) {
                    Ok(c) => c,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        return f64::NAN;
                    }
                };
                (self.ln_pre + (2.0 * mp.lambda2 - 1.0) * u.ln() - mp.lambda1 * u * u).exp() * c
            },
            &breaks,
            1e-300,
            1e-10,
            quad::DEFAULT_MAX_INTERVALS,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(r?.value)
    }
}

/// Triplet drop probability for bit error probability `e`.
pub fn tdp(e: f64, coding: &TripletCoding, convention: TdpConvention) -> Result<f64> {
    coding.validate()?;
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::domain("tdp", format!("bit error probability must lie in [0, 1], got {e}")));
    }
    let (n, k0) = (coding.d_t, coding.d_e + 1);
    if e == 0.0 {
        return Ok(0.0);
    }
    if e == 1.0 {
        // only the all-wrong pattern survives
        return Ok(1.0);
    }
    Ok(match convention {
        TdpConvention::Binomial if mode(e, n) >= k0 => 1.0 - tail_sum(e, n, 0, coding.d_e, true)?.min(1.0),
        TdpConvention::Binomial => tail_sum(e, n, k0, n, true)?.min(1.0),
        TdpConvention::Literal => tail_sum(e, n, k0, n, false)?,
    })
}

/// Most likely error count. The tail without it is summed directly and the
/// other one is its complement, so values near 1 stay accurate.
fn mode(e: f64, n: u32) -> u32 {
    (((n + 1) as f64 * e).floor() as u32).min(n)
}

/// Delivery probability `1 − tdp(e)` under the binomial convention, summed
/// directly over the correctable patterns so tiny values keep their
/// relative accuracy.
pub fn delivery_prob(e: f64, coding: &TripletCoding) -> Result<f64> {
    coding.validate()?;
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::domain("delivery_prob", format!("bit error probability must lie in [0, 1], got {e}")));
    }
    if e == 0.0 {
        return Ok(1.0);
    }
    if e == 1.0 {
        return Ok(0.0);
    }
    if mode(e, coding.d_t) <= coding.d_e {
        return Ok(1.0 - tail_sum(e, coding.d_t, coding.d_e + 1, coding.d_t, true)?.min(1.0));
    }
    Ok(tail_sum(e, coding.d_t, 0, coding.d_e, true)?.min(1.0))
}

/// `Σ_{j=lo}^{hi} [C(n, j)] e^j (1 − e)^{n−j}` for `0 < e < 1`, summed
/// outward from the largest term and scaled by it.
fn tail_sum(e: f64, n: u32, lo: u32, hi: u32, binomial: bool) -> Result<f64> {
    let (le, lq) = (e.ln(), (-e).ln_1p());
    let ln_term = |j: u32| -> Result<f64> {
        let mut t = j as f64 * le + (n - j) as f64 * lq;
        if binomial {
            t += ln_choose(n, j, ln_gamma(n as f64 + 1.0)?)?;
        }
        Ok(t)
    };
    let odds = e / (1.0 - e);
    let ratio = |j: u32| if binomial { (n - j) as f64 / (j + 1) as f64 * odds } else { odds };
    let peak = if binomial {
        mode(e, n).clamp(lo, hi)
    } else if e <= 0.5 {
        lo
    } else {
        hi
    };
    let mut sum = 1.0;
    let mut t = 1.0;
    for j in peak..hi {
        t *= ratio(j);
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    t = 1.0;
    for j in (lo..peak).rev() {
        t /= ratio(j);
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    Ok((ln_term(peak)? + sum.ln()).exp())
}

fn ln_choose(n: u32, j: u32, ln_n1: f64) -> Result<f64> {
    let j = j.min(n - j);
    if n <= 60 {
        // exact in f64 for these sizes
        let mut c = 1u64;
        for i in 0..j as u64 {
            c = c * (n as u64 - i) / (i + 1);
        }
        return Ok((c as f64).ln());
    }
    if j <= 64 {
        return Ok((0..j).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum());
    }
    Ok(ln_n1 - ln_gamma(j as f64 + 1.0)? - ln_gamma((n - j) as f64 + 1.0)?)
}

/// `1 − tdp(bep)` for a triplet sent at `per_triplet_power`, using the
/// reference BEP.
pub fn triplet_delivery_prob(
    sp: &SinrParams,
    mp: &ModulationParams,
    coding: &TripletCoding,
    per_triplet_power: f64,
) -> Result<f64> {
    if per_triplet_power == 0.0 {
        return delivery_prob(0.5, coding);
    }
    delivery_prob(bep_quad(&sp.with_p_tx(per_triplet_power)?, mp)?, coding)
}

/// Reference BEP of one link as a function of transmit power, tabulated once
/// and interpolated.
///
/// The table is monotone cubic in `(ln P, ln BEP)` over
/// `[POWER_MIN, POWER_MAX]`; above the range it continues the last power law,
/// below it it joins `BEP(0) = 1/2`.
#[derive(Debug, Clone)]
pub struct BepCurve {
    curve: Pchip,
    lambda2: f64,
    p_min: f64,
    p_max: f64,
    bep_min_power: f64,
    tail_slope: f64,
}

impl BepCurve {
    pub const POWER_MIN: f64 = 1e-6;
    pub const POWER_MAX: f64 = 1e7;
    pub const POINTS_PER_DECADE: usize = 16;

    pub fn new(link: &UserLink) -> Result<Self> {
        link.validate()?;
        Self::for_params(&link.sinr_params(1.0)?, &link.modulation)
    }

    /// Builds from SINR parameters; the transmit power in `sp` is ignored.
    pub fn for_params(sp: &SinrParams, mp: &ModulationParams) -> Result<Self> {
        mp.validate()?;
        let (p_min, p_max) = (Self::POWER_MIN, Self::POWER_MAX);
        let ip = sp.interference();
        let sigma2 = sp.geometry().noise_power;
        let x_max = sigma2 + ip.p_i * fading::interference_tail_point(ip, fading::TAIL_MASS)?;
        let g1 = sp.with_p_tx(1.0)?.signal_gain();

        // single-fading BEP over the full range of conditional scales k = g P / x
        let single = SingleFBep::new(sp.fading(), mp)?;
        let k_lo = (g1 * p_min / x_max).ln() - 1.0;
        let k_hi = (g1 * p_max / sigma2).ln() + 1.0;
        let step = std::f64::consts::LN_10 / Self::POINTS_PER_DECADE as f64;
        let nk = ((k_hi - k_lo) / step).ceil() as usize + 1;
        let mut lk = Vec::with_capacity(nk);
        let mut lh = Vec::with_capacity(nk);
        for i in 0..nk {
            let x = k_lo + i as f64 * step;
            lk.push(x);
            lh.push(single.eval(x.exp())?.ln());
        }
        let h = Pchip::new(lk, lh)?;

        let np = ((p_max / p_min).log10() * Self::POINTS_PER_DECADE as f64).round() as usize + 1;
        let mut lp = Vec::with_capacity(np);
        let mut lb = Vec::with_capacity(np);
        for i in 0..np {
            let p = p_min * 10f64.powf(i as f64 / Self::POINTS_PER_DECADE as f64);
            let spp = sp.with_p_tx(p)?;
            let g = spp.signal_gain();
            let v = average_over_interference(&spp, |x| h.eval((g / x).ln()).exp(), &[], 1e-9)?;
            lp.push(p.ln());
            lb.push(v.min(0.5).ln());
        }
        let n = lp.len();
        let tail_slope = (lb[n - 1] - lb[n - 2]) / (lp[n - 1] - lp[n - 2]);
        let bep_min_power = lb[0].exp();
        Ok(BepCurve {
            curve: Pchip::new(lp, lb)?,
            lambda2: mp.lambda2,
            p_min,
            p_max,
            bep_min_power,
            tail_slope,
        })
    }

    /// Average BEP at transmit power `p` (watts).
    pub fn bep(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.5
        } else if p < self.p_min {
            0.5 - (0.5 - self.bep_min_power) * (p / self.p_min).powf(self.lambda2)
        } else if p <= self.p_max {
            self.curve.eval(p.ln()).exp()
        } else {
            (self.curve.eval(self.p_max.ln()) + self.tail_slope * (p / self.p_max).ln()).exp()
        }
    }

    /// Delivery probability `1 − tdp(bep(p))` under the binomial convention.
    pub fn delivery(&self, p: f64, coding: &TripletCoding) -> f64 {
        delivery_prob(self.bep(p), coding).unwrap_or(0.0)
    }
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Carlson).
#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("interpolation table", "need at least two finite points"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Ok(Pchip { x, y, d })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = ((t - self.x[i]) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conditional_bep_limits() {
        let mp = ModulationParams::default();
        assert_eq!(conditional_bep(0.0, &mp).unwrap(), 0.5);
        assert!(conditional_bep(1e3, &mp).unwrap() < 1e-100);
        // Q(1/2, 1)/2 = erfc(1)/2
        assert_relative_eq!(conditional_bep(1.0, &mp).unwrap(), 0.5 * 0.157_299_207_050_285_13, max_relative = 1e-13);
    }

    #[test]
    fn tdp_small_case() {
        let c = TripletCoding::new(3, 1).unwrap();
        assert_relative_eq!(tdp(0.1, &c, TdpConvention::Binomial).unwrap(), 0.028, max_relative = 1e-13);
        assert_eq!(tdp(0.0, &c, TdpConvention::Binomial).unwrap(), 0.0);
        assert_eq!(tdp(1.0, &c, TdpConvention::Binomial).unwrap(), 1.0);
        // without the coefficient: 0.01·0.9 + 0.001
        assert_relative_eq!(tdp(0.1, &c, TdpConvention::Literal).unwrap(), 0.01, max_relative = 1e-13);
        assert!(tdp(1.5, &c, TdpConvention::Binomial).is_err());
        assert!(TripletCoding::new(4, 4).is_err());
        assert!(TripletCoding::new(5000, 4).is_err());
    }

    #[test]
    fn delivery_keeps_tiny_values() {
        // exact rational sums of the first nine binomial terms
        let c = TripletCoding::new(256, 8).unwrap();
        assert_relative_eq!(delivery_prob(0.5, &c).unwrap(), 3.6548533133462435e-63, max_relative = 1e-12);
        assert_relative_eq!(delivery_prob(0.3, &c).unwrap(), 1.114796955648619e-28, max_relative = 1e-12);
        let e = 0.01;
        assert_relative_eq!(
            delivery_prob(e, &c).unwrap() + tdp(e, &c, TdpConvention::Binomial).unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn tdp_large_block_is_stable() {
        let c = TripletCoding::new(4096, 100).unwrap();
        let v = tdp(0.02, &c, TdpConvention::Binomial).unwrap();
        assert!(v.is_finite() && (0.0..=1.0).contains(&v));
        // mean 81.9 errors, so the tail above 100 is small but not negligible
        assert!(v > 1e-3 && v < 0.05, "{v}");
    }

    #[test]
    fn pchip_reproduces_linear_data() {
        let p = Pchip::new(vec![0.0, 1.0, 2.0, 4.0], vec![1.0, 3.0, 5.0, 9.0]).unwrap();
        for t in [0.0, 0.5, 1.7, 3.3, 4.0] {
            assert_relative_eq!(p.eval(t), 1.0 + 2.0 * t, max_relative = 1e-14);
        }
    }
}
