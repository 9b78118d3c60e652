//! Scenario configuration, experiment runners and CSV output.
//!
//! A [`ScenarioConfig`] is read from TOML. Every field has a default, so an
//! empty file describes the reference three-user scenario. Runners return a
//! [`Table`]; [`Table::write_csv`] prefixes it with a comment header holding
//! the tool version, runner name, SHA-256 of the effective configuration and
//! the seed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocation::{
    evaluate_allocation, naive_allocation, rcga_optimize, simplex_grid, AllocationResult, PowerBudget, PriorityMode,
    RcgaConfig, Scenario,
};
use crate::fading::{sinr_cdf_accurate, sinr_cdf_asymptotic, sinr_cdf_quad, FadingParams, InterferenceParams, LinkGeometry, SinrParams, SinrSampler};
use crate::linkperf::{conditional_bep, outage_probability, ModulationParams, OutageMethod, TripletCoding, UserLink};
use crate::rng::{derive_seed, substream, McEstimate};
use crate::specfun::gamma_fn;
use crate::semantics::{load_dataset, synth_dataset, Dataset, FusionConvention, SynthSpec, TripletPattern};
use crate::{db_to_linear, Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const TAG_OP_CURVE: u64 = 1;
const TAG_END_TO_END: u64 = 2;

// ---------------------------------------------------------------------------
// Configuration

/// A power level given either as a plain linear number or as a string with
/// a unit tag: `"-3 dB"`, `"0.5 lin"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelRepr", into = "f64")]
pub struct Level(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum LevelRepr {
    Num(f64),
    Text(String),
}

impl TryFrom<LevelRepr> for Level {
    type Error = String;
    fn try_from(r: LevelRepr) -> std::result::Result<Self, String> {
        match r {
            LevelRepr::Num(v) => Ok(Level(v)),
            LevelRepr::Text(s) => Level::parse(&s),
        }
    }
}

impl From<Level> for f64 {
    fn from(l: Level) -> f64 {
        l.0
    }
}

impl Level {
    pub fn db(v: f64) -> Self {
        Level(db_to_linear(v))
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim().replace('\u{2212}', "-");
        let (num, unit) = match t.find(|c: char| c.is_ascii_alphabetic()) {
            Some(i) => (t[..i].trim(), t[i..].trim().to_ascii_lowercase()),
            None => (t.as_str(), String::new()),
        };
        let v: f64 = num.parse().map_err(|_| format!("cannot read a number from {s:?}"))?;
        match unit.as_str() {
            "db" => Ok(Level::db(v)),
            "" | "lin" | "linear" => Ok(Level(v)),
            u => Err(format!("unknown unit {u:?} in {s:?}; use dB or lin")),
        }
    }
}

/// One user's channel, coding and query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserConfig {
    pub query: String,
    pub m_f: f64,
    pub m_s: f64,
    /// Per-antenna mean channel power.
    pub z_bar: Level,
    pub distance: f64,
    pub path_loss_exp: f64,
    pub n_antennas: u32,
    pub noise_power: f64,
    pub n_paths: u32,
    pub eta: Level,
    pub p_i: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub d_t: u32,
    pub d_e: u32,
}

impl Default for UserConfig {
    fn default() -> Self {
        UserConfig::reference(2.0, 2.0, "woman has hair")
    }
}

impl UserConfig {
    /// The reference channel with the given fading and shadowing parameters.
    pub fn reference(m_f: f64, m_s: f64, query: &str) -> Self {
        UserConfig {
            query: query.to_string(),
            m_f,
            m_s,
            z_bar: Level::db(-3.0),
            distance: 10.0,
            path_loss_exp: 2.0,
            n_antennas: 3,
            noise_power: 1.0,
            n_paths: 2,
            eta: Level::db(-3.0),
            p_i: 2.0,
            lambda1: 1.0,
            lambda2: 0.5,
            d_t: 256,
            d_e: 8,
        }
    }

    pub fn link(&self) -> Result<UserLink> {
        let link = UserLink {
            fading: FadingParams {
                m_f: self.m_f,
                m_s: self.m_s,
                z_bar: self.z_bar.0,
            },
            geometry: LinkGeometry {
                distance: self.distance,
                path_loss_exp: self.path_loss_exp,
                n_antennas: self.n_antennas,
                noise_power: self.noise_power,
            },
            interference: InterferenceParams {
                n_paths: self.n_paths,
                eta: self.eta.0,
                p_i: self.p_i,
            },
            modulation: ModulationParams {
                lambda1: self.lambda1,
                lambda2: self.lambda2,
            },
            coding: TripletCoding {
                d_t: self.d_t,
                d_e: self.d_e,
            },
        };
        link.validate().map_err(|e| Error::Config(format!("user link: {e}")))?;
        Ok(link)
    }
}

/// Where the images and user profiles come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetConfig {
    /// Generated from the users' queries and the experiment seed.
    Synth(SynthSpec),
    /// A JSON manifest; relative paths resolve against the config file.
    Manifest { path: PathBuf },
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Synth(SynthSpec::default())
    }
}

/// Parameters of the outage-versus-power experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpCurveConfig {
    pub m_f: Vec<f64>,
    pub m_s: f64,
    pub z_bar: Level,
    pub distance: f64,
    pub path_loss_exp: f64,
    pub n_antennas: u32,
    pub noise_power: f64,
    pub n_paths: u32,
    pub eta: Level,
    pub p_i: f64,
    pub gamma_th: f64,
    /// Transmit powers in dBW.
    pub p_dbw: Vec<f64>,
}

impl Default for OpCurveConfig {
    fn default() -> Self {
        OpCurveConfig {
            m_f: vec![1.5, 2.6, 4.0],
            m_s: 5.0,
            z_bar: Level::db(-1.0),
            distance: 1.5,
            path_loss_exp: 2.0,
            n_antennas: 1,
            noise_power: 1.0,
            n_paths: 3,
            eta: Level(0.4),
            p_i: 5.0,
            gamma_th: 1.0,
            p_dbw: (0..=20).map(|i| 2.0 * i as f64).collect(),
        }
    }
}

impl OpCurveConfig {
    pub fn sinr_params(&self, m_f: f64, p_dbw: f64) -> Result<SinrParams> {
        SinrParams::from_per_antenna(
            FadingParams {
                m_f,
                m_s: self.m_s,
                z_bar: self.z_bar.0,
            },
            LinkGeometry {
                distance: self.distance,
                path_loss_exp: self.path_loss_exp,
                n_antennas: self.n_antennas,
                noise_power: self.noise_power,
            },
            InterferenceParams {
                n_paths: self.n_paths,
                eta: self.eta.0,
                p_i: self.p_i,
            },
            db_to_linear(p_dbw),
        )
    }
}

/// Sweep axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alpha: Vec<f64>,
    /// Total power in watts.
    pub power: Vec<f64>,
    /// Simplex resolution of the allocation surface.
    pub surface_step: f64,
    /// Fixed per-user power of the channel sweeps, watts.
    pub per_user_power: f64,
    pub m_f: Vec<f64>,
    pub m_s: Vec<f64>,
    pub distance: Vec<f64>,
    pub p_i: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alpha: (0..=10).map(|i| i as f64 / 10.0).collect(),
            power: vec![1000.0, 1500.0, 2000.0, 2500.0, 3000.0],
            surface_step: 0.02,
            per_user_power: 1000.0,
            m_f: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            m_s: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            distance: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            p_i: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
        }
    }
}

/// How the end-to-end simulation draws the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitFading {
    /// A fresh SINR for every bit.
    #[default]
    PerBit,
    /// One SINR per triplet; bits are independent given it.
    PerTriplet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub channel_samples: usize,
    pub replications: usize,
    pub bit_fading: BitFading,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            channel_samples: 1_000_000,
            replications: 10_000,
            bit_fading: BitFading::PerBit,
        }
    }
}

/// Inputs of the communication-cost comparison. Unset counts are taken from
/// the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommCostConfig {
    pub image_mb: f64,
    pub triplet_bytes: f64,
    pub n_images: Option<usize>,
    pub downloads: Option<usize>,
    pub n_triplets: Option<usize>,
}

impl Default for CommCostConfig {
    fn default() -> Self {
        CommCostConfig {
            image_mb: 1.27,
            triplet_bytes: 12.0,
            n_images: None,
            downloads: None,
            n_triplets: None,
        }
    }
}

/// Everything an experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub budget: PowerBudget,
    /// Fusion coefficient.
    pub alpha: f64,
    pub convention: FusionConvention,
    pub rcga: RcgaConfig,
    pub dataset: DatasetConfig,
    pub users: Vec<UserConfig>,
    pub op_curve: OpCurveConfig,
    pub sweeps: SweepConfig,
    pub mc: McConfig,
    pub comm_cost: CommCostConfig,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 2024,
            out_dir: PathBuf::from("out"),
            budget: PowerBudget { w_a: 3000.0, t_1: 1.0 },
            alpha: 0.2,
            convention: FusionConvention::Text,
            rcga: RcgaConfig::default(),
            dataset: DatasetConfig::default(),
            users: vec![
                UserConfig::reference(2.0, 2.0, "woman has hair"),
                UserConfig::reference(2.0, 4.0, "sign on building"),
                UserConfig::reference(5.0, 2.0, "woman wearing shirt"),
            ],
            op_curve: OpCurveConfig::default(),
            sweeps: SweepConfig::default(),
            mc: McConfig::default(),
            comm_cost: CommCostConfig::default(),
            base_dir: None,
        }
    }
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Config(format!("sweep `{name}` is empty")));
    }
    if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("sweep `{name}` must be finite and strictly increasing")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a TOML file; relative dataset paths resolve
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ScenarioConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::Config("at least one user is required".into()));
        }
        for (k, u) in self.users.iter().enumerate() {
            u.link().map_err(|e| Error::Config(format!("user {}: {e}", k + 1)))?;
            TripletPattern::parse(&u.query).map_err(|e| Error::Config(format!("user {} query: {e}", k + 1)))?;
        }
        self.budget.validate()?;
        self.rcga.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("fusion coefficient must lie in [0, 1], got {}", self.alpha)));
        }
        let s = &self.sweeps;
        check_grid("alpha", &s.alpha)?;
        if s.alpha[0] < 0.0 || s.alpha[s.alpha.len() - 1] > 1.0 {
            return Err(Error::Config("sweep `alpha` must lie in [0, 1]".into()));
        }
        check_grid("power", &s.power)?;
        check_grid("m_f", &s.m_f)?;
        check_grid("m_s", &s.m_s)?;
        check_grid("distance", &s.distance)?;
        check_grid("p_i", &s.p_i)?;
        check_grid("op_curve.m_f", &self.op_curve.m_f)?;
        check_grid("op_curve.p_dbw", &self.op_curve.p_dbw)?;
        if s.power[0] <= 0.0 || s.per_user_power <= 0.0 {
            return Err(Error::Config("sweep powers must be positive".into()));
        }
        if !(s.surface_step > 0.0 && s.surface_step <= 0.5) {
            return Err(Error::Config("surface_step must lie in (0, 0.5]".into()));
        }
        if !(self.op_curve.gamma_th > 0.0) {
            return Err(Error::Config("op_curve.gamma_th must be positive".into()));
        }
        if let DatasetConfig::Manifest { .. } = self.dataset {
            let p = self.manifest_path().unwrap_or_default();
            if !p.is_file() {
                return Err(Error::Config(format!("dataset manifest {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        match &self.dataset {
            DatasetConfig::Manifest { path } if path.is_relative() => {
                Some(self.base_dir.as_deref().map(|b| b.join(path)).unwrap_or_else(|| path.clone()))
            }
            DatasetConfig::Manifest { path } => Some(path.clone()),
            DatasetConfig::Synth(_) => None,
        }
    }

    /// SHA-256 over the canonical JSON form of the configuration. The output
    /// directory does not affect results and is left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_string(&c).unwrap_or_default();
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn links(&self) -> Result<Vec<UserLink>> {
        self.users.iter().map(UserConfig::link).collect()
    }

    pub fn queries(&self) -> Result<Vec<TripletPattern>> {
        self.users.iter().map(|u| TripletPattern::parse(&u.query)).collect()
    }

    pub fn dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetConfig::Synth(spec) => synth_dataset(spec, &self.queries()?, self.seed),
            DatasetConfig::Manifest { .. } => {
                let path = self.manifest_path().unwrap_or_default();
                let ds = load_dataset(&path)?;
                let queries = self.queries()?;
                if ds.users.len() != queries.len() {
                    return Err(Error::Config(format!(
                        "manifest has {} users, config has {}",
                        ds.users.len(),
                        queries.len()
                    )));
                }
                for (k, (u, q)) in ds.users.iter().zip(&queries).enumerate() {
                    if &u.query != q {
                        return Err(Error::Config(format!(
                            "user {} query differs: manifest `{}`, config `{}`",
                            k + 1,
                            u.query,
                            q
                        )));
                    }
                }
                Ok(ds)
            }
        }
    }

    pub fn priority(&self) -> PriorityMode {
        PriorityMode::Fused {
            alpha: self.alpha,
            convention: self.convention,
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.links()?, self.dataset()?, self.priority())
    }

    fn with_total_power(&self, p: f64) -> PowerBudget {
        PowerBudget {
            w_a: p * self.budget.t_1,
            t_1: self.budget.t_1,
        }
    }
}

// ---------------------------------------------------------------------------
// Tables

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows of one experiment in a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub runner: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(runner: &str, columns: Vec<String>) -> Self {
        Table {
            runner: runner.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, `NaN` for text cells.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Rows whose `column` holds the text `value`.
    pub fn filter(&self, column: &str, value: &str) -> Vec<&Vec<Cell>> {
        match self.column_index(column) {
            Some(i) => self.rows.iter().filter(|r| r[i].as_str() == Some(value)).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self, cfg: &ScenarioConfig) -> String {
        let mut s = format!(
            "# semcom {VERSION}\n# runner: {}\n# scenario: {}\n# seed: {}\n",
            self.runner,
            cfg.hash(),
            cfg.seed
        );
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Writes `<dir>/<runner>.csv`.
    pub fn write_csv(&self, dir: &Path, cfg: &ScenarioConfig) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{}.csv", self.runner));
        fs::write(&path, self.to_csv(cfg)).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn indexed(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}_{i}")).collect()
}

// ---------------------------------------------------------------------------
// Runners

/// Outage probability versus transmit power by all four methods.
pub fn run_op_curve(cfg: &ScenarioConfig) -> Result<Table> {
    let oc = &cfg.op_curve;
    let cols = [
        "m_f", "p_dbw", "op_quad", "op_accurate", "op_asymptotic", "op_mc", "op_mc_se", "rho",
    ];
    let mut t = Table::new("op_curve", cols.iter().map(|s| s.to_string()).collect());
    let points: Vec<(usize, usize)> = (0..oc.m_f.len())
        .flat_map(|i| (0..oc.p_dbw.len()).map(move |j| (i, j)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<Cell>> {
            let (m_f, p) = (oc.m_f[i], oc.p_dbw[j]);
            let sp = oc.sinr_params(m_f, p)?;
            let g = oc.gamma_th;
            let quad = sinr_cdf_quad(g, &sp)?;
            let acc = sinr_cdf_accurate(g, &sp)?;
            let asy = sinr_cdf_asymptotic(g, &sp)?;
            let mc = outage_probability(
                g,
                &sp,
                OutageMethod::MonteCarlo {
                    samples: cfg.mc.channel_samples,
                    seed: derive_seed(cfg.seed, &[TAG_OP_CURVE, i as u64, j as u64]),
                },
            )?;
            Ok(vec![
                m_f.into(),
                p.into(),
                quad.into(),
                acc.value.into(),
                asy.into(),
                mc.value.into(),
                mc.std_err.unwrap_or(0.0).into(),
                acc.rho.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

fn allocation_columns(k: usize) -> Vec<String> {
    let mut c: Vec<String> = ["scheme", "p_total", "alpha", "utility"].iter().map(|s| s.to_string()).collect();
    c.extend(indexed("s", k));
    c.extend(indexed("s_tilde", k));
    c.extend(indexed("share", k));
    c
}

fn allocation_row(scheme: &str, p_total: f64, alpha: f64, r: &AllocationResult) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![scheme.into(), p_total.into(), alpha.into(), r.utility.into()];
    row.extend(r.expected_scores.iter().map(|s| Cell::Num(s.s)));
    row.extend(r.expected_scores.iter().map(|s| Cell::Num(s.s_tilde)));
    let total: f64 = r.user_powers.iter().sum();
    row.extend(r.user_powers.iter().map(|p| Cell::Num(if total > 0.0 { p / total } else { 0.0 })));
    row
}

/// NBS utility over the fusion coefficient and total power, with Naive and
/// OA reference rows (`alpha` is `NaN` on those).
pub fn run_alpha_sweep(cfg: &ScenarioConfig) -> Result<Table> {
    let base = cfg.scenario()?;
    let k = base.user_count();
    let mut t = Table::new("alpha_sweep", allocation_columns(k));
    let scenarios = cfg
        .sweeps
        .alpha
        .iter()
        .map(|&a| {
            base.with_priority(PriorityMode::Fused {
                alpha: a,
                convention: cfg.convention,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let oa = base.with_priority(PriorityMode::Objective)?;
    for &p in &cfg.sweeps.power {
        let budget = cfg.with_total_power(p);
        for (sc, &a) in scenarios.iter().zip(&cfg.sweeps.alpha) {
            t.push(allocation_row("nbs", p, a, &rcga_optimize(sc, &budget, &cfg.rcga)?));
        }
        t.push(allocation_row("oa", p, f64::NAN, &rcga_optimize(&oa, &budget, &cfg.rcga)?));
        t.push(allocation_row("naive", p, f64::NAN, &naive_allocation(&base, &budget)?));
    }
    Ok(t)
}

/// Per-user scores against total power for NBS, OA and Naive allocation,
/// with the drop-free upper bounds.
pub fn run_power_sweep(cfg: &ScenarioConfig) -> Result<Table> {
    let sc = cfg.scenario()?;
    let oa = sc.with_priority(PriorityMode::Objective)?;
    let mut t = Table::new("power_sweep", allocation_columns(sc.user_count()));
    for &p in &cfg.sweeps.power {
        let budget = cfg.with_total_power(p);
        t.push(allocation_row("nbs", p, cfg.alpha, &rcga_optimize(&sc, &budget, &cfg.rcga)?));
        t.push(allocation_row("oa", p, f64::NAN, &rcga_optimize(&oa, &budget, &cfg.rcga)?));
        t.push(allocation_row("naive", p, f64::NAN, &naive_allocation(&sc, &budget)?));
    }
    Ok(t)
}

/// Utility over the full-power simplex, plus the RCGA, equal-split and
/// Naive points.
pub fn run_allocation_surface(cfg: &ScenarioConfig) -> Result<Table> {
    let sc = cfg.scenario()?;
    let k = sc.user_count();
    let mut cols = vec!["kind".to_string()];
    cols.extend(indexed("share", k));
    cols.push("utility".into());
    let mut t = Table::new("alloc_surface", cols);
    let row = |kind: &str, shares: &[f64], u: f64| {
        let mut r: Vec<Cell> = vec![kind.into()];
        r.extend(shares.iter().map(|v| Cell::Num(*v)));
        r.push(u.into());
        r
    };
    for (f, u) in simplex_grid(&sc, &cfg.budget, cfg.sweeps.surface_step)? {
        t.push(row("grid", &f, u));
    }
    let p = cfg.budget.p_total();
    let ga = rcga_optimize(&sc, &cfg.budget, &cfg.rcga)?;
    t.push(row("rcga", &ga.user_powers.iter().map(|x| x / p).collect::<Vec<_>>(), ga.utility));
    let eq = vec![1.0 / k as f64; k];
    let eq_eval = evaluate_allocation(&eq.iter().map(|f| f * p).collect::<Vec<_>>(), &sc)?;
    t.push(row("equal", &eq, eq_eval.utility));
    t.push(row("naive", &eq, naive_allocation(&sc, &cfg.budget)?.utility));
    Ok(t)
}

fn channel_sweep<F>(cfg: &ScenarioConfig, name: &str, axes: [(&str, &[f64]); 2], set: F) -> Result<Table>
where
    F: Fn(&mut UserConfig, f64, f64) + Sync,
{
    let base = cfg.scenario()?;
    let k = base.user_count();
    let mut cols = vec![axes[0].0.to_string(), axes[1].0.to_string(), "utility".into()];
    cols.extend(indexed("s", k));
    let mut t = Table::new(name, cols);
    let p = cfg.sweeps.per_user_power;
    let points: Vec<(f64, f64)> = axes[0].1.iter().flat_map(|&a| axes[1].1.iter().map(move |&b| (a, b))).collect();
    let rows = points
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<Cell>> {
            let links = cfg
                .users
                .iter()
                .map(|u| {
                    let mut u = u.clone();
                    set(&mut u, a, b);
                    u.link()
                })
                .collect::<Result<Vec<_>>>()?;
            let sc = base.with_links(links)?;
            let scores: Vec<f64> = (0..k).map(|i| sc.user_score(i, p)).collect();
            let mut r: Vec<Cell> = vec![a.into(), b.into(), scores.iter().product::<f64>().into()];
            r.extend(scores.into_iter().map(Cell::Num));
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

/// Utility at fixed per-user power over a grid of `(m_f, m_s)`, applied to
/// every user.
pub fn run_smallscale_sweep(cfg: &ScenarioConfig) -> Result<Table> {
    channel_sweep(cfg, "smallscale", [("m_f", &cfg.sweeps.m_f), ("m_s", &cfg.sweeps.m_s)], |u, a, b| {
        u.m_f = a;
        u.m_s = b;
    })
}

/// Utility at fixed per-user power over a grid of distance and interference
/// power, applied to every user.
pub fn run_largescale_sweep(cfg: &ScenarioConfig) -> Result<Table> {
    channel_sweep(cfg, "largescale", [("distance", &cfg.sweeps.distance), ("p_i", &cfg.sweeps.p_i)], |u, a, b| {
        u.distance = a;
        u.p_i = b;
    })
}

/// Bytes moved with and without semantic pre-filtering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommCostReport {
    pub n_images: usize,
    pub n_users: usize,
    pub downloads: usize,
    pub n_triplets: usize,
    pub vanilla_mb: f64,
    pub triplet_mb: f64,
    pub download_mb: f64,
    pub semantic_mb: f64,
    pub savings: f64,
}

/// Vanilla cost sends every image to every user; the semantic scheme sends
/// the triplets and then only the matched images. Megabytes are 10⁶ bytes.
pub fn comm_cost(
    n_images: usize,
    image_mb: f64,
    n_users: usize,
    downloads: usize,
    n_triplets: usize,
    triplet_bytes: f64,
) -> CommCostReport {
    let vanilla_mb = n_images as f64 * image_mb * n_users as f64;
    let triplet_mb = n_triplets as f64 * triplet_bytes / 1e6;
    let download_mb = downloads as f64 * image_mb;
    let semantic_mb = triplet_mb + download_mb;
    CommCostReport {
        n_images,
        n_users,
        downloads,
        n_triplets,
        vanilla_mb,
        triplet_mb,
        download_mb,
        semantic_mb,
        savings: if vanilla_mb > 0.0 { 1.0 - semantic_mb / vanilla_mb } else { 0.0 },
    }
}

/// [`comm_cost`] with counts from the configuration or, where unset, from
/// the dataset: downloads are the images matching each user's query.
pub fn run_comm_cost(cfg: &ScenarioConfig) -> Result<(CommCostReport, Table)> {
    let cc = &cfg.comm_cost;
    let needs_data = cc.n_images.is_none() || cc.downloads.is_none() || cc.n_triplets.is_none();
    let ds = if needs_data { Some(cfg.dataset()?) } else { None };
    let n_images = cc.n_images.unwrap_or_else(|| ds.as_ref().map_or(0, |d| d.images.len()));
    let downloads = cc.downloads.unwrap_or_else(|| {
        ds.as_ref().map_or(0, |d| {
            d.users
                .iter()
                .map(|u| {
                    d.images
                        .iter()
                        .filter(|img| !crate::semantics::matching_triplets(img, &u.query).is_empty())
                        .count()
                })
                .sum()
        })
    });
    let n_triplets = cc.n_triplets.unwrap_or_else(|| {
        ds.as_ref().map_or(0, |d| d.images.iter().map(|i| i.triplets.len()).sum::<usize>() * d.users.len())
    });
    let r = comm_cost(n_images, cc.image_mb, cfg.users.len(), downloads, n_triplets, cc.triplet_bytes);
    let mut t = Table::new("comm_cost", vec!["quantity".into(), "value".into()]);
    t.push(vec!["n_images".into(), r.n_images.into()]);
    t.push(vec!["n_users".into(), r.n_users.into()]);
    t.push(vec!["downloads".into(), r.downloads.into()]);
    t.push(vec!["n_triplets".into(), r.n_triplets.into()]);
    t.push(vec!["vanilla_mb".into(), r.vanilla_mb.into()]);
    t.push(vec!["triplet_mb".into(), r.triplet_mb.into()]);
    t.push(vec!["download_mb".into(), r.download_mb.into()]);
    t.push(vec!["semantic_mb".into(), r.semantic_mb.into()]);
    t.push(vec!["savings".into(), r.savings.into()]);
    Ok((r, t))
}

/// Closed-form expectation and bit-level simulation of one quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub closed: f64,
    pub mc: McEstimate,
}

impl Comparison {
    pub fn z_score(&self) -> f64 {
        self.mc.z_score(self.closed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub scores: Vec<Comparison>,
    pub utility: Comparison,
    /// Realized scores never exceeded the drop-free bound.
    pub bounded: bool,
}

fn mean_se(values: &[f64]) -> McEstimate {
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    McEstimate {
        mean,
        std_err: (var / nf).sqrt(),
        samples: n,
    }
}

/// Decides bit errors from a uniform draw, evaluating the conditional BEP
/// only when a cheap upper bound cannot rule the error out.
struct BitFlip {
    mp: ModulationParams,
    /// `1 / (2Γ(λ₂))` when `λ₂ ≤ 1`, where `Γ(λ₂, x) ≤ x^{λ₂−1} e^{−x}`.
    bound_scale: Option<f64>,
}

impl BitFlip {
    fn new(mp: ModulationParams) -> Result<Self> {
        let bound_scale = if mp.lambda2 <= 1.0 { Some(0.5 / gamma_fn(mp.lambda2)?) } else { None };
        Ok(BitFlip { mp, bound_scale })
    }

    fn error(&self, gamma: f64, u: f64) -> Result<bool> {
        if u >= 0.5 {
            return Ok(false);
        }
        if let Some(c) = self.bound_scale {
            let x = self.mp.lambda1 * gamma;
            if x > 0.0 && u >= c * (-x + (self.mp.lambda2 - 1.0) * x.ln()).exp() {
                return Ok(false);
            }
        }
        Ok(u < conditional_bep(gamma, &self.mp)?)
    }
}

/// Simulates the transmission of every query-matching triplet bit by bit
/// and compares the realized scores with the closed-form expectation.
///
/// Only triplets that match a query can change a score, so the others are
/// not simulated. Replication `r` draws from `substream(seed, [tag, r])`.
pub fn mc_end_to_end(
    scenario: &Scenario,
    allocation: &AllocationResult,
    replications: usize,
    seed: u64,
    mode: BitFading,
) -> Result<EndToEndReport> {
    if replications < 2 {
        return Err(Error::Config("end-to-end simulation needs at least 2 replications".into()));
    }
    let k = scenario.user_count();
    if allocation.triplet_powers.len() != k {
        return Err(Error::Shape("allocation does not match the scenario".into()));
    }
    // SINR is linear in transmit power, so unit-power samplers suffice
    let samplers = scenario
        .links()
        .iter()
        .map(|l| SinrSampler::new(&l.sinr_params(1.0)?))
        .collect::<Result<Vec<_>>>()?;
    let flips = scenario
        .links()
        .iter()
        .map(|l| BitFlip::new(l.modulation))
        .collect::<Result<Vec<_>>>()?;
    let n_images = scenario.dataset().images.len().max(1) as f64;
    let work: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|u| {
            scenario
                .matching(u)
                .iter()
                .zip(&allocation.triplet_powers[u])
                .map(|(m, p)| m.iter().map(|&t| p[t]).collect())
                .collect()
        })
        .collect();

    let realized: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut rng = substream(seed, &[TAG_END_TO_END, r as u64]);
            let mut scores = Vec::with_capacity(k);
            for u in 0..k {
                let link = &scenario.links()[u];
                let (d_t, d_e) = (link.coding.d_t, link.coding.d_e);
                let mut matched = 0usize;
                for powers in &work[u] {
                    let mut hit = false;
                    for &p in powers {
                        let mut errors = 0u32;
                        let block = match mode {
                            BitFading::PerTriplet => Some(p * samplers[u].sample(&mut rng)),
                            BitFading::PerBit => None,
                        };
                        for _ in 0..d_t {
                            let g = match block {
                                Some(g) => g,
                                None => p * samplers[u].sample(&mut rng),
                            };
                            if flips[u].error(g, rng.random::<f64>())? {
                                errors += 1;
                                if errors > d_e {
                                    break;
                                }
                            }
                        }
                        if errors <= d_e {
                            hit = true;
                        }
                    }
                    if hit {
                        matched += 1;
                    }
                }
                scores.push(matched as f64 / n_images);
            }
            Ok(scores)
        })
        .collect::<Result<Vec<_>>>()?;

    let bounded = realized
        .iter()
        .all(|s| s.iter().enumerate().all(|(u, v)| *v <= scenario.upper_bound(u) + 1e-12));
    let scores = (0..k)
        .map(|u| Comparison {
            closed: allocation.expected_scores[u].s,
            mc: mean_se(&realized.iter().map(|s| s[u]).collect::<Vec<_>>()),
        })
        .collect();
    let utility = Comparison {
        closed: allocation.utility,
        mc: mean_se(&realized.iter().map(|s| s.iter().product()).collect::<Vec<_>>()),
    };
    Ok(EndToEndReport { scores, utility, bounded })
}

/// End-to-end check of the RCGA allocation of the configured scenario.
pub fn run_mc_validate(cfg: &ScenarioConfig) -> Result<(EndToEndReport, Table)> {
    let sc = cfg.scenario()?;
    let alloc = rcga_optimize(&sc, &cfg.budget, &cfg.rcga)?;
    let rep = mc_end_to_end(&sc, &alloc, cfg.mc.replications, cfg.seed, cfg.mc.bit_fading)?;
    let cols = ["quantity", "closed", "mc_mean", "mc_se", "z"];
    let mut t = Table::new("mc_validate", cols.iter().map(|s| s.to_string()).collect());
    let row = |name: String, c: &Comparison| -> Vec<Cell> {
        vec![Cell::Text(name), c.closed.into(), c.mc.mean.into(), c.mc.std_err.into(), c.z_score().into()]
    };
    for (u, c) in rep.scores.iter().enumerate() {
        t.push(row(format!("s_{}", u + 1), c));
    }
    t.push(row("utility".into(), &rep.utility));
    Ok((rep, t))
}

/// RCGA allocation of the configured scenario, one row per user.
pub fn run_allocate(cfg: &ScenarioConfig) -> Result<(AllocationResult, Table)> {
    let sc = cfg.scenario()?;
    let r = rcga_optimize(&sc, &cfg.budget, &cfg.rcga)?;
    let cols = ["user", "power", "share", "s", "s_tilde", "n_in", "n_truth"];
    let mut t = Table::new("allocate", cols.iter().map(|s| s.to_string()).collect());
    let total: f64 = r.user_powers.iter().sum();
    for (u, (p, s)) in r.user_powers.iter().zip(&r.expected_scores).enumerate() {
        t.push(vec![
            (u + 1).into(),
            (*p).into(),
            (p / total).into(),
            s.s.into(),
            s.s_tilde.into(),
            s.n_in.into(),
            s.n_truth.into(),
        ]);
    }
    Ok((r, t))
}
