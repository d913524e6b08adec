use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cluster_mbqc::channel::{channel_matrix, Axis, RotationSchedule};
use cluster_mbqc::oracle::{enumerate_channel, MeasurementPlan};
use cluster_mbqc::string_order::{profile, Parity, ProfileOptions};
use cluster_mbqc_lab::config::{Experiment, ExperimentConfig, Overrides};
use cluster_mbqc_lab::error::exit;
use cluster_mbqc_lab::experiments::{self, Runner};
use cluster_mbqc_lab::table::{Kind, ResultTable};
use cluster_mbqc_lab::{persist, verify, LabError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mbqc-lab", version, about = "Ground states, string order and logical channels of the perturbed cluster chain")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    n_sites: Option<usize>,
    #[arg(long, global = true)]
    delta: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta_log: Option<f64>,
    #[arg(long, global = true)]
    chi_max: Option<usize>,
    /// Use the reduced preset.
    #[arg(long, global = true)]
    desk: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ground-state cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// TOML experiment config; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Z,
    X,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Z => Axis::Z,
            AxisArg::X => Axis::X,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for the ground state and print its diagnostics.
    Solve,
    /// Odd-parity string-order profile.
    Profile,
    /// Logical channel of a split rotation.
    Channel {
        #[arg(long, value_enum, default_value = "z")]
        axis: AxisArg,
        /// First rotation site (defaults to a centered placement).
        #[arg(long)]
        buffer: Option<usize>,
    },
    /// Brute-force measurement oracle, compared against the channel.
    Oracle {
        #[arg(long, value_enum, default_value = "z")]
        axis: AxisArg,
        #[arg(long)]
        buffer: Option<usize>,
    },
    /// Run an experiment preset.
    Run {
        experiment: Experiment,
        /// thm2 only: read `delta,f` from this CSV instead of solving.
        #[arg(long)]
        f_csv: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Verify,
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        alpha: c.alpha,
        n_sites: c.n_sites,
        delta: c.delta,
        m: c.m,
        beta_log: c.beta_log,
        chi_max: c.chi_max,
        out: c.out.clone(),
        cache: c.cache.clone(),
    }
}

fn config(c: &Common, experiment: Experiment) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let mut cfg = ExperimentConfig::preset(experiment, c.desk);
            if experiment == Experiment::Custom {
                cfg.cache = false;
            }
            cfg
        }
    };
    overrides(c).apply(&mut cfg)?;
    Ok(cfg)
}

fn single(cfg: &ExperimentConfig) -> Result<cluster_mbqc::pauli::ChainSpec> {
    let specs = cfg.specs()?;
    match specs.as_slice() {
        [s] => Ok(*s),
        _ => Err(LabError::Config(format!("expected one (N, alpha) point, got {}", specs.len()))),
    }
}

fn schedule(cfg: &ExperimentConfig, axis: Axis, buffer: Option<usize>, bulk: f64) -> Result<RotationSchedule> {
    let n = cfg.chain.n_sites[0];
    let m = cfg.schedule.m[0];
    let delta = cfg.schedule.delta[0];
    let beta = cfg.schedule.beta_log.first().copied().unwrap_or(0.2);
    let d = buffer.unwrap_or_else(|| match axis {
        Axis::Z => experiments::centered_buffer(n, m, delta),
        Axis::X => experiments::centered_buffer(n, m, delta).saturating_sub(2).max(1),
    });
    Ok(RotationSchedule::new(axis, m, delta, d, beta, bulk)?)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

fn write_manifest(cfg: &ExperimentConfig, tables: &[ResultTable], dir: &Path) -> Result<PathBuf> {
    let mut files = Vec::new();
    for t in tables {
        files.extend(t.write(dir)?);
    }
    let manifest = json!({
        "experiment": cfg.experiment.name(),
        "config_hash": cfg.hash(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "created": chrono::Utc::now().to_rfc3339(),
        "config": cfg,
        "files": files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy()).collect::<Vec<_>>(),
        "tables": tables.iter().map(|t| json!({
            "name": t.name,
            "rows": t.n_rows(),
            "errors": t.errors,
            "metadata": t.metadata,
        })).collect::<Vec<_>>(),
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(LabError::io(&path))?;
    Ok(path)
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    match cli.cmd {
        Cmd::Solve => {
            let cfg = config(c, Experiment::Custom)?;
            let spec = single(&cfg)?;
            let state = Runner::for_config(&cfg).state(&cfg, &spec)?;
            if let Some(dir) = &c.out {
                std::fs::create_dir_all(dir).map_err(LabError::io(dir))?;
                persist::save(&state, &dir.join("ground_state.bin"))?;
            }
            print_json(&serde_json::to_value(persist::sidecar(&state, &[]))?);
            state.require_converged()?;
        }
        Cmd::Profile => {
            let cfg = config(c, Experiment::Custom)?;
            let spec = single(&cfg)?;
            let state = Runner::for_config(&cfg).state(&cfg, &spec)?;
            let dmax = c.delta.map(|d| d.min(spec.n_sites - 3));
            let p = profile(&state, Parity::Odd, &ProfileOptions { delta_max: dmax })?;
            let mut t = ResultTable::new("profile", &[("delta", Kind::Int), ("k_pair", Kind::Float), ("f", Kind::Float)]);
            for (&d, &f) in &p.f_values {
                t.push(vec![d.into(), p.k_pair[&d].into(), f.into()])?;
            }
            t.diag("bulk_value", p.bulk_value);
            t.diag("bulk_site", p.bulk_site);
            match &c.out {
                Some(dir) => {
                    t.write(dir)?;
                }
                None => print!("{}", t.to_csv()?),
            }
        }
        Cmd::Channel { axis, buffer } => {
            let cfg = config(c, Experiment::Custom)?;
            let spec = single(&cfg)?;
            let state = Runner::for_config(&cfg).state(&cfg, &spec)?;
            let p = profile(&state, Parity::Odd, &ProfileOptions { delta_max: Some(2) })?;
            let s = schedule(&cfg, axis.into(), buffer, p.bulk_value)?;
            let ch = channel_matrix(&state, &s)?;
            print_json(&json!({
                "sites": s.sites(),
                "gamma": s.gamma,
                "matrix": ch.matrix.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "d_m": ch.d_m,
                "beta_effective": ch.beta_effective,
                "gm": [ch.gm.re, ch.gm.im],
            }));
        }
        Cmd::Oracle { axis, buffer } => {
            let cfg = config(c, Experiment::Custom)?;
            let spec = single(&cfg)?;
            let state = Runner::for_config(&cfg).state(&cfg, &spec)?;
            let p = profile(&state, Parity::Odd, &ProfileOptions { delta_max: Some(2) })?;
            let s = schedule(&cfg, axis.into(), buffer, p.bulk_value)?;
            let o = enumerate_channel(&state, &MeasurementPlan::from_schedule(spec.n_sites, &s)?)?;
            let ch = channel_matrix(&state, &s)?;
            let dev = (o.channel - ch.matrix).abs().max();
            print_json(&json!({
                "sites": s.sites(),
                "branches": o.n_branches,
                "oracle": o.channel.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "max_deviation": dev,
            }));
            if dev > 1e-8 {
                return Err(LabError::Invariant(format!("oracle and channel differ by {dev:e}")));
            }
        }
        Cmd::Run { experiment, f_csv } => {
            let cfg = config(c, experiment)?;
            let tables = match (&f_csv, cfg.experiment) {
                (Some(path), Experiment::Thm2Optimality) => {
                    let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
                    let p = experiments::profile_from_csv(&text)?;
                    vec![experiments::thm2_table(&p, &cfg.schedule.delta, cfg.schedule.n_region)?]
                }
                (Some(_), e) => return Err(LabError::Config(format!("--f-csv only applies to thm2, not {e}"))),
                (None, _) => Runner::for_config(&cfg).run(&cfg)?,
            };
            let manifest = write_manifest(&cfg, &tables, &cfg.output_dir)?;
            log::info!("wrote {}", manifest.display());
            for t in &tables {
                if !t.errors.is_empty() {
                    log::warn!("{}: {} failed points", t.name, t.errors.len());
                }
                if cfg.experiment == Experiment::Thm2Optimality {
                    experiments::check_thm2(t)?;
                }
            }
        }
        Cmd::Verify => {
            let checks = verify::run_all()?;
            for ch in &checks {
                println!("{} {}: {}", if ch.passed { "PASS" } else { "FAIL" }, ch.name, ch.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(LabError::Invariant(format!("{failed} checks failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::BAD_CONFIG as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
