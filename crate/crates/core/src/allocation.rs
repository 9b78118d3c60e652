//! Nash-bargaining power allocation across users.
//!
//! A user `k` with slot power `P_k` sends its `N_k` triplets back to back.
//! Triplet `t` gets `p_t = P_k · N_k · prio_t / Σ prio`, so the slot energy
//! is split in proportion to priority and the per-triplet powers average to
//! `P_k`. The fitness of an allocation is the product of the users' expected
//! match scores, evaluated in closed form from each user's tabulated BEP
//! curve.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linkperf::{BepCurve, UserLink};
use crate::rng::substream;
use crate::semantics::{
    expected_score, matching_triplets, objective_priority, triplet_priority, Dataset, FusionConvention, ScoreReport,
};
use crate::{Error, Result};

/// Energy budget `W_A` spent over slots of length `T_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    /// Total energy in joules.
    pub w_a: f64,
    /// Slot duration in seconds.
    pub t_1: f64,
}

impl PowerBudget {
    pub fn from_total_power(p_total: f64) -> Self {
        PowerBudget { w_a: p_total, t_1: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_a.is_finite() && self.w_a > 0.0 && self.t_1.is_finite() && self.t_1 > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("power budget needs W_A > 0 and T_1 > 0, got {self:?}")))
        }
    }

    /// `W_A / T_1` in watts.
    pub fn p_total(&self) -> f64 {
        self.w_a / self.t_1
    }
}

/// Real-coded genetic algorithm settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcgaConfig {
    pub population: usize,
    pub mutation_prob: f64,
    pub max_iter: usize,
    /// BLX-α blend factor.
    pub blend: f64,
    pub tournament: usize,
    pub elitism: usize,
    /// Standard deviation of Gaussian mutation, as a fraction of the gene range.
    pub mutation_sigma: f64,
    /// Refine each user's per-triplet split with a second GA after the
    /// user-level allocation.
    pub refine_triplets: bool,
    pub seed: u64,
}

impl Default for RcgaConfig {
    fn default() -> Self {
        RcgaConfig {
            population: 50,
            mutation_prob: 0.001,
            max_iter: 20,
            blend: 0.5,
            tournament: 2,
            elitism: 1,
            mutation_sigma: 0.1,
            refine_triplets: false,
            seed: 0,
        }
    }
}

impl RcgaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("RCGA population must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::Config("mutation probability must lie in [0, 1]".into()));
        }
        if self.tournament == 0 || self.elitism >= self.population {
            return Err(Error::Config("tournament size must be positive and elitism below the population".into()));
        }
        if !(self.blend >= 0.0 && self.mutation_sigma >= 0.0) {
            return Err(Error::Config("blend factor and mutation sigma must be non-negative".into()));
        }
        Ok(())
    }
}

/// How triplet priorities are formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PriorityMode {
    /// Fused objective attention and user saliency.
    Fused { alpha: f64, convention: FusionConvention },
    /// Objective attention only.
    Objective,
    /// Every triplet equal.
    Uniform,
}

/// Per-user and per-triplet powers with the resulting expected scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationResult {
    pub user_powers: Vec<f64>,
    /// `[user][image][triplet]` powers in watts. For each user they average
    /// to the user's slot power.
    pub triplet_powers: Vec<Vec<Vec<f64>>>,
    pub expected_scores: Vec<ScoreReport>,
    pub utility: f64,
    /// Best utility after each generation (empty for non-GA allocators).
    pub fitness_history: Vec<f64>,
}

/// Users, links and dataset with precomputed priorities and BEP curves.
#[derive(Debug, Clone)]
pub struct Scenario {
    links: Vec<UserLink>,
    dataset: Arc<Dataset>,
    curves: Arc<Vec<BepCurve>>,
    priority: PriorityMode,
    /// `[user][image][triplet]` power multipliers `N_k prio / Σ prio`.
    weights: Vec<Vec<Vec<f64>>>,
    matching: Vec<Vec<Vec<usize>>>,
}

impl Scenario {
    pub fn new(links: Vec<UserLink>, dataset: Dataset, priority: PriorityMode) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::Config("a scenario needs at least one user".into()));
        }
        if links.len() != dataset.users.len() {
            return Err(Error::Config(format!(
                "{} links but {} user profiles in the dataset",
                links.len(),
                dataset.users.len()
            )));
        }
        dataset.validate()?;
        let curves = Self::curves_for(&links)?;
        Self::assemble(links, Arc::new(dataset), Arc::new(curves), priority)
    }

    fn curves_for(links: &[UserLink]) -> Result<Vec<BepCurve>> {
        let mut curves: Vec<BepCurve> = Vec::with_capacity(links.len());
        for (k, l) in links.iter().enumerate() {
            // reuse the curve of an earlier user with an identical channel
            let same = links[..k].iter().position(|o| {
                o.fading == l.fading && o.geometry == l.geometry && o.interference == l.interference && o.modulation == l.modulation
            });
            curves.push(match same {
                Some(j) => curves[j].clone(),
                None => BepCurve::new(l)?,
            });
        }
        Ok(curves)
    }

    fn assemble(links: Vec<UserLink>, dataset: Arc<Dataset>, curves: Arc<Vec<BepCurve>>, priority: PriorityMode) -> Result<Self> {
        let mut weights = Vec::with_capacity(links.len());
        let mut matching = Vec::with_capacity(links.len());
        for user in &dataset.users {
            let mut prio: Vec<Vec<f64>> = Vec::with_capacity(dataset.images.len());
            for img in &dataset.images {
                let row = img
                    .triplets
                    .iter()
                    .map(|t| match priority {
                        PriorityMode::Fused { alpha, convention } => {
                            triplet_priority(t, &user.saliency[&img.id], alpha, convention)
                        }
                        PriorityMode::Objective => objective_priority(t),
                        PriorityMode::Uniform => Ok(1.0),
                    })
                    .collect::<Result<Vec<f64>>>()?;
                prio.push(row);
            }
            let flat: Vec<f64> = prio.iter().flatten().copied().collect();
            let n = flat.len() as f64;
            let split = proportional_triplet_power(n, &flat)?;
            let mut it = split.into_iter();
            weights.push(prio.iter().map(|r| r.iter().map(|_| it.next().unwrap_or(0.0)).collect()).collect());
            matching.push(dataset.images.iter().map(|img| matching_triplets(img, &user.query)).collect());
        }
        Ok(Scenario {
            links,
            dataset,
            curves,
            priority,
            weights,
            matching,
        })
    }

    /// Same data and priorities with different channels.
    pub fn with_links(&self, links: Vec<UserLink>) -> Result<Self> {
        if links.len() != self.links.len() {
            return Err(Error::Config(format!("{} links for {} users", links.len(), self.links.len())));
        }
        let curves = Self::curves_for(&links)?;
        Ok(Scenario {
            links,
            dataset: self.dataset.clone(),
            curves: Arc::new(curves),
            priority: self.priority,
            weights: self.weights.clone(),
            matching: self.matching.clone(),
        })
    }

    /// Same channels and data with a different priority rule.
    pub fn with_priority(&self, priority: PriorityMode) -> Result<Self> {
        Self::assemble(self.links.clone(), self.dataset.clone(), self.curves.clone(), priority)
    }

    pub fn user_count(&self) -> usize {
        self.links.len()
    }
    pub fn links(&self) -> &[UserLink] {
        &self.links
    }
    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }
    pub fn priority(&self) -> PriorityMode {
        self.priority
    }
    pub fn bep_curve(&self, user: usize) -> &BepCurve {
        &self.curves[user]
    }

    /// Power multipliers of one user's triplets, `[image][triplet]`.
    pub fn triplet_weights(&self, user: usize) -> &[Vec<f64>] {
        &self.weights[user]
    }

    /// Triplet indices matching the user's query, per image.
    pub fn matching(&self, user: usize) -> &[Vec<usize>] {
        &self.matching[user]
    }

    /// Expected score of `user` when its triplets get the given powers.
    pub fn score_with_triplet_powers(&self, user: usize, powers: &[Vec<f64>]) -> Result<ScoreReport> {
        let curve = &self.curves[user];
        let coding = self.links[user].coding;
        let delivery: Vec<Vec<f64>> = self
            .matching[user]
            .iter()
            .zip(powers)
            .map(|(m, p)| {
                let mut row = vec![0.0; p.len()];
                for &t in m {
                    row[t] = curve.delivery(p[t], &coding);
                }
                row
            })
            .collect();
        expected_score(&self.dataset.users[user], &self.dataset.images, &delivery)
    }

    /// Per-triplet powers of `user` at slot power `p`.
    pub fn triplet_powers(&self, user: usize, p: f64) -> Vec<Vec<f64>> {
        self.weights[user].iter().map(|r| r.iter().map(|w| w * p).collect()).collect()
    }

    /// Expected score of `user` at slot power `p` under the priority split.
    pub fn user_score(&self, user: usize, p: f64) -> f64 {
        let curve = &self.curves[user];
        let coding = self.links[user].coding;
        let mut n_in = 0.0;
        for (m, w) in self.matching[user].iter().zip(&self.weights[user]) {
            if m.is_empty() {
                continue;
            }
            let miss: f64 = m.iter().map(|&t| 1.0 - curve.delivery(w[t] * p, &coding)).product();
            n_in += 1.0 - miss;
        }
        n_in / self.dataset.images.len().max(1) as f64
    }

    /// Drop-free score `s̃` of `user`.
    pub fn upper_bound(&self, user: usize) -> f64 {
        let n = self.matching[user].iter().filter(|m| !m.is_empty()).count();
        n as f64 / self.dataset.images.len().max(1) as f64
    }

    /// NBS utility at the given slot powers.
    pub fn utility(&self, user_powers: &[f64]) -> f64 {
        nbs_utility(&(0..self.user_count()).map(|k| self.user_score(k, user_powers[k])).collect::<Vec<_>>())
    }
}

/// `Π_k s_k`.
pub fn nbs_utility(scores: &[f64]) -> f64 {
    scores.iter().product()
}

/// Splits `user_power` in proportion to `priorities`; an all-zero priority
/// vector gets an equal split.
pub fn proportional_triplet_power(user_power: f64, priorities: &[f64]) -> Result<Vec<f64>> {
    if priorities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::domain("proportional_triplet_power", "priorities must be finite and non-negative"));
    }
    let n = priorities.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let total: f64 = priorities.iter().sum();
    if total == 0.0 {
        return Ok(vec![user_power / n as f64; n]);
    }
    Ok(priorities.iter().map(|p| user_power * p / total).collect())
}

fn check_powers(scenario: &Scenario, user_powers: &[f64]) -> Result<()> {
    if user_powers.len() != scenario.user_count() {
        return Err(Error::Shape(format!(
            "{} user powers for {} users",
            user_powers.len(),
            scenario.user_count()
        )));
    }
    if user_powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::domain("evaluate_allocation", "user powers must be finite and non-negative"));
    }
    Ok(())
}

/// Closed-form expected scores and utility of an allocation.
pub fn evaluate_allocation(user_powers: &[f64], scenario: &Scenario) -> Result<AllocationResult> {
    check_powers(scenario, user_powers)?;
    let triplet_powers: Vec<Vec<Vec<f64>>> =
        (0..scenario.user_count()).map(|k| scenario.triplet_powers(k, user_powers[k])).collect();
    let expected_scores = triplet_powers
        .iter()
        .enumerate()
        .map(|(k, tp)| scenario.score_with_triplet_powers(k, tp))
        .collect::<Result<Vec<_>>>()?;
    let utility = nbs_utility(&expected_scores.iter().map(|r| r.s).collect::<Vec<_>>());
    Ok(AllocationResult {
        user_powers: user_powers.to_vec(),
        triplet_powers,
        expected_scores,
        utility,
        fitness_history: Vec::new(),
    })
}

/// Equal user powers and equal triplet powers.
pub fn naive_allocation(scenario: &Scenario, budget: &PowerBudget) -> Result<AllocationResult> {
    budget.validate()?;
    let k = scenario.user_count();
    let uniform = scenario.with_priority(PriorityMode::Uniform)?;
    evaluate_allocation(&vec![budget.p_total() / k as f64; k], &uniform)
}

/// Best full-power allocation found by the real-coded GA.
pub fn rcga_optimize(scenario: &Scenario, budget: &PowerBudget, cfg: &RcgaConfig) -> Result<AllocationResult> {
    budget.validate()?;
    cfg.validate()?;
    let k = scenario.user_count();
    let p_total = budget.p_total();
    let equal = vec![1.0 / k as f64; k];
    let outcome = rcga_simplex(k, cfg, 0, vec![equal], |g| {
        let powers: Vec<f64> = g.iter().map(|f| f * p_total).collect();
        scenario.utility(&powers)
    });
    let powers: Vec<f64> = outcome.best.iter().map(|f| f * p_total).collect();
    let mut result = evaluate_allocation(&powers, scenario)?;
    if cfg.refine_triplets {
        refine_triplet_split(scenario, cfg, &mut result)?;
    }
    result.fitness_history = outcome.history;
    Ok(result)
}

fn refine_triplet_split(scenario: &Scenario, cfg: &RcgaConfig, result: &mut AllocationResult) -> Result<()> {
    for user in 0..scenario.user_count() {
        let p = result.user_powers[user];
        let shape: Vec<usize> = scenario.triplet_weights(user).iter().map(|r| r.len()).collect();
        let n: usize = shape.iter().sum();
        let start: Vec<f64> = scenario.triplet_weights(user).iter().flatten().map(|w| w / n as f64).collect();
        let unflatten = |g: &[f64]| {
            let mut it = g.iter();
            shape
                .iter()
                .map(|&len| (0..len).map(|_| it.next().copied().unwrap_or(0.0) * n as f64 * p).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        let outcome = rcga_simplex(n, cfg, 1 + user as u64, vec![start], |g| {
            scenario.score_with_triplet_powers(user, &unflatten(g)).map(|r| r.s).unwrap_or(0.0)
        });
        let powers = unflatten(&outcome.best);
        result.expected_scores[user] = scenario.score_with_triplet_powers(user, &powers)?;
        result.triplet_powers[user] = powers;
    }
    result.utility = nbs_utility(&result.expected_scores.iter().map(|r| r.s).collect::<Vec<_>>());
    Ok(())
}

/// Every full-power allocation on a simplex grid with spacing `step`,
/// as `(fractions, utility)` pairs. Limited to `K ≤ 3`.
pub fn simplex_grid(scenario: &Scenario, budget: &PowerBudget, step: f64) -> Result<Vec<(Vec<f64>, f64)>> {
    budget.validate()?;
    let k = scenario.user_count();
    if k > 3 {
        return Err(Error::Config("simplex grid search supports at most 3 users".into()));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!("grid step must lie in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    let mut points = Vec::new();
    match k {
        1 => points.push(vec![1.0]),
        2 => {
            for i in 0..=n {
                points.push(vec![i as f64 / n as f64, (n - i) as f64 / n as f64]);
            }
        }
        _ => {
            for i in 0..=n {
                for j in 0..=n - i {
                    points.push(vec![i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64]);
                }
            }
        }
    }
    let p_total = budget.p_total();
    Ok(points
        .into_par_iter()
        .map(|f| {
            let powers: Vec<f64> = f.iter().map(|x| x * p_total).collect();
            let u = scenario.utility(&powers);
            (f, u)
        })
        .collect())
}

/// Best point of [`simplex_grid`].
pub fn grid_search(scenario: &Scenario, budget: &PowerBudget, step: f64) -> Result<(Vec<f64>, f64)> {
    simplex_grid(scenario, budget, step)?
        .into_iter()
        .fold(None, |best: Option<(Vec<f64>, f64)>, (f, u)| match best {
            Some((_, bu)) if bu >= u => best,
            _ => Some((f, u)),
        })
        .ok_or_else(|| Error::Config("empty simplex grid".into()))
}

struct GaOutcome {
    best: Vec<f64>,
    history: Vec<f64>,
}

/// Projects onto the probability simplex by clamping and renormalising.
fn project(g: &mut [f64]) {
    for v in g.iter_mut() {
        if !(*v > 0.0) {
            *v = 0.0;
        }
    }
    let s: f64 = g.iter().sum();
    if s > 0.0 {
        g.iter_mut().for_each(|v| *v /= s);
    } else {
        let n = g.len() as f64;
        g.iter_mut().for_each(|v| *v = 1.0 / n);
    }
}

/// GA over the `dim`-simplex maximising `fitness`. `seeds` enter the
/// initial population first. Streams are keyed by `(seed, tag, generation,
/// individual)`.
fn rcga_simplex<F>(dim: usize, cfg: &RcgaConfig, tag: u64, seeds: Vec<Vec<f64>>, fitness: F) -> GaOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let pop_n = cfg.population;
    let mut pop: Vec<Vec<f64>> = seeds.into_iter().take(pop_n).collect();
    let mut idx = pop.len();
    while pop.len() < pop_n {
        let mut rng = substream(cfg.seed, &[tag, 0, idx as u64]);
        let mut g: Vec<f64> = (0..dim).map(|_| Exp1.sample(&mut rng)).collect();
        project(&mut g);
        pop.push(g);
        idx += 1;
    }
    let score = |pop: &[Vec<f64>]| -> Vec<f64> {
        pop.par_iter()
            .map(|g| {
                let f = fitness(g);
                if f.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    f
                }
            })
            .collect()
    };
    let mut fit = score(&pop);
    let argmax = |fit: &[f64]| {
        fit.iter()
            .enumerate()
            .fold(0, |b, (i, f)| if *f > fit[b] { i } else { b })
    };
    let mut history = Vec::with_capacity(cfg.max_iter + 1);
    history.push(fit[argmax(&fit)]);

    for gen in 1..=cfg.max_iter {
        let mut order: Vec<usize> = (0..pop_n).collect();
        order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]).then(a.cmp(&b)));
        let mut next: Vec<Vec<f64>> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
        let children: Vec<Vec<f64>> = (next.len()..pop_n)
            .into_par_iter()
            .map(|j| {
                let mut rng = substream(cfg.seed, &[tag, gen as u64, j as u64]);
                let mut pick = || {
                    let mut best = rng.random_range(0..pop_n);
                    for _ in 1..cfg.tournament {
                        let c = rng.random_range(0..pop_n);
                        if fit[c] > fit[best] {
                            best = c;
                        }
                    }
                    best
                };
                let (a, b) = (pick(), pick());
                let mut child: Vec<f64> = pop[a]
                    .iter()
                    .zip(&pop[b])
                    .map(|(x, y)| {
                        let (lo, hi) = (x.min(*y), x.max(*y));
                        let d = hi - lo;
                        let (l, h) = (lo - cfg.blend * d, hi + cfg.blend * d);
                        if h > l {
                            rng.random_range(l..h)
                        } else {
                            lo
                        }
                    })
                    .collect();
                project(&mut child);
                let mut mutated = false;
                for v in child.iter_mut() {
                    if rng.random::<f64>() < cfg.mutation_prob {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *v += cfg.mutation_sigma * z;
                        mutated = true;
                    }
                }
                if mutated {
                    project(&mut child);
                }
                child
            })
            .collect();
        next.extend(children);
        pop = next;
        fit = score(&pop);
        history.push(fit[argmax(&fit)]);
    }
    let best = pop[argmax(&fit)].clone();
    GaOutcome { best, history }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn utility_is_product() {
        assert_relative_eq!(nbs_utility(&[0.36, 0.09, 0.29]), 0.009396, max_relative = 1e-12);
        assert_relative_eq!(nbs_utility(&[0.46, 0.12, 0.33]), 0.018216, max_relative = 1e-12);
        assert_eq!(nbs_utility(&[0.5, 0.0, 0.9]), 0.0);
    }

    #[test]
    fn proportional_split() {
        let s = proportional_triplet_power(1000.0, &[0.4, 0.1]).unwrap();
        assert_relative_eq!(s[0], 800.0, max_relative = 1e-15);
        assert_relative_eq!(s[1], 200.0, max_relative = 1e-15);
        for v in proportional_triplet_power(9.0, &[0.2; 3]).unwrap() {
            assert_relative_eq!(v, 3.0, max_relative = 1e-15);
        }
        let s = proportional_triplet_power(7.0, &[0.3, 0.9, 0.05, 1.7]).unwrap();
        assert_relative_eq!(s.iter().sum::<f64>(), 7.0, max_relative = 1e-15);
        assert_eq!(proportional_triplet_power(9.0, &[0.0; 3]).unwrap(), vec![3.0; 3]);
        assert!(proportional_triplet_power(1.0, &[-1.0]).is_err());
    }

    #[test]
    fn projection_stays_on_simplex() {
        let mut g = vec![0.5, -0.2, 0.9];
        project(&mut g);
        assert_relative_eq!(g.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
        assert_eq!(g[1], 0.0);
        let mut z = vec![-1.0, -2.0];
        project(&mut z);
        assert_eq!(z, vec![0.5, 0.5]);
    }

    #[test]
    fn ga_finds_simple_optimum() {
        // maximise x₀ x₁ x₂² on the simplex: optimum (1/4, 1/4, 1/2)
        let cfg = RcgaConfig {
            max_iter: 60,
            mutation_prob: 0.05,
            seed: 3,
            ..RcgaConfig::default()
        };
        let out = rcga_simplex(3, &cfg, 0, vec![], |g| g[0] * g[1] * g[2] * g[2]);
        assert!((out.best[2] - 0.5).abs() < 0.03, "{:?}", out.best);
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
    }
}
