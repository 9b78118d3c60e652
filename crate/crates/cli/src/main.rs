use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semcom::harness::{self, ScenarioConfig, Table};
use semcom::semantics::save_dataset;
use semcom::Error;

#[derive(Parser, Debug)]
#[command(name = "semcom", version, about = "Semantic triplet transmission experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario file (TOML). Built-in reference scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment seed, overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Channel samples of the outage estimate and end-to-end replications.
    #[arg(long, global = true)]
    mc_samples: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Outage probability against transmit power.
    OpCurve,
    /// Utility against the fusion coefficient, with baselines.
    AlphaSweep,
    /// Utility against the total power budget, with baselines.
    PowerSweep,
    /// Utility over the simplex of power shares.
    AllocSurface,
    /// Utility against the fading and shadowing shapes.
    Smallscale,
    /// Utility against distance and interference power.
    Largescale,
    /// Bytes moved with and without semantic filtering.
    CommCost,
    /// Bit-level simulation of the optimised allocation.
    McValidate,
    /// Writes the configured dataset as a manifest plus heatmaps.
    SynthDataset,
    /// Optimises the power allocation.
    Allocate,
}

fn load(g: &Global) -> semcom::Result<ScenarioConfig> {
    let mut cfg = match &g.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out_dir = o.clone();
    }
    if let Some(n) = g.mc_samples {
        cfg.mc.channel_samples = n;
        cfg.mc.replications = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(t: &Table, cfg: &ScenarioConfig) -> semcom::Result<PathBuf> {
    let path = t.write_csv(&cfg.out_dir, cfg)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> semcom::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("cannot serialise: {e}")))?;
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> semcom::Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load(&cli.global)?;
    match cli.cmd {
        Cmd::OpCurve => {
            emit(&harness::run_op_curve(&cfg)?, &cfg)?;
        }
        Cmd::AlphaSweep => {
            emit(&harness::run_alpha_sweep(&cfg)?, &cfg)?;
        }
        Cmd::PowerSweep => {
            emit(&harness::run_power_sweep(&cfg)?, &cfg)?;
        }
        Cmd::AllocSurface => {
            emit(&harness::run_allocation_surface(&cfg)?, &cfg)?;
        }
        Cmd::Smallscale => {
            emit(&harness::run_smallscale_sweep(&cfg)?, &cfg)?;
        }
        Cmd::Largescale => {
            emit(&harness::run_largescale_sweep(&cfg)?, &cfg)?;
        }
        Cmd::CommCost => {
            let (r, t) = harness::run_comm_cost(&cfg)?;
            emit(&t, &cfg)?;
            println!(
                "vanilla {:.2} MB, semantic {:.2} MB ({:.1}% saved)",
                r.vanilla_mb,
                r.semantic_mb,
                100.0 * r.savings
            );
        }
        Cmd::McValidate => {
            let (r, t) = harness::run_mc_validate(&cfg)?;
            emit(&t, &cfg)?;
            println!(
                "utility closed {:.6}, simulated {:.6} ± {:.1e} (z = {:.2})",
                r.utility.closed,
                r.utility.mc.mean,
                r.utility.mc.std_err,
                r.utility.z_score()
            );
            if !r.bounded {
                return Err(Error::Numeric {
                    context: "mc-validate".into(),
                    detail: "a realized score exceeded its upper bound".into(),
                });
            }
        }
        Cmd::SynthDataset => {
            let ds = cfg.dataset()?;
            let path = save_dataset(&ds, &cfg.out_dir.join("dataset"))?;
            eprintln!("wrote {}", path.display());
        }
        Cmd::Allocate => {
            let (r, t) = harness::run_allocate(&cfg)?;
            emit(&t, &cfg)?;
            write_json(&cfg.out_dir.join("allocation.json"), &r)?;
            let shares: Vec<String> = r.user_powers.iter().map(|p| format!("{p:.1}")).collect();
            println!("utility {:.6}, powers [{}] W", r.utility, shares.join(", "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
