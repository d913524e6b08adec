//! Experiment configuration: TOML files, presets and CLI overrides.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cluster_mbqc::ground_state::SolverParams;
use cluster_mbqc::pauli::ChainSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig2KappaScan,
    Fig3SplitVsDelta,
    Fig1PackingDensity,
    Thm1Scaling,
    Thm2Optimality,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fig2KappaScan,
        Experiment::Fig3SplitVsDelta,
        Experiment::Fig1PackingDensity,
        Experiment::Thm1Scaling,
        Experiment::Thm2Optimality,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2KappaScan => "fig2_kappa_scan",
            Experiment::Fig3SplitVsDelta => "fig3_split_vs_delta",
            Experiment::Fig1PackingDensity => "fig1_packing_density",
            Experiment::Thm1Scaling => "thm1_scaling",
            Experiment::Thm2Optimality => "thm2_optimality",
            Experiment::Custom => "custom",
        }
    }

    fn short(self) -> &'static str {
        match self {
            Experiment::Fig2KappaScan => "fig2",
            Experiment::Fig3SplitVsDelta => "fig3",
            Experiment::Fig1PackingDensity => "fig1",
            Experiment::Thm1Scaling => "thm1",
            Experiment::Thm2Optimality => "thm2",
            Experiment::Custom => "custom",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s || e.short() == s)
            .ok_or_else(|| LabError::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n_sites: Vec<usize>,
    pub alpha: Vec<f64>,
}

/// Solver settings; unset fields take the solver defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lanczos_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lanczos_max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svd_cutoff: Option<f64>,
}

impl SolverConfig {
    pub fn params(&self) -> SolverParams {
        let mut p = SolverParams::default();
        if let Some(v) = self.chi_max {
            p.chi_max = v;
        }
        if let Some(v) = self.n_sweeps {
            p.n_sweeps = v;
        }
        if let Some(v) = self.energy_tol {
            p.energy_tol = v;
        }
        if let Some(v) = self.lanczos_tol {
            p.lanczos_tol = v;
        }
        if let Some(v) = self.lanczos_max_iter {
            p.lanczos_max_iter = v;
        }
        if let Some(v) = self.svd_cutoff {
            p.svd_cutoff = v;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub m: Vec<usize>,
    pub delta: Vec<usize>,
    pub beta_log: Vec<f64>,
    /// Region size for the packing and optimality scans.
    pub n_region: usize,
    /// Bare rotation angle for the two-site split scan.
    pub beta: f64,
    /// Largest pair distance sampled in string-order profiles.
    pub delta_max: usize,
    /// m entering kappa in the alpha scan.
    pub kappa_m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    pub cache: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    pub chain: ChainConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub schedule: ScheduleConfig,
}

fn fractions_of_pi4(fs: &[f64]) -> Vec<f64> {
    fs.iter().map(|f| f * FRAC_PI_4).collect()
}

impl ExperimentConfig {
    /// Built-in parameters; `desk` selects the reduced variant.
    pub fn preset(experiment: Experiment, desk: bool) -> Self {
        let boundary = 0.98 * FRAC_PI_4;
        let mut schedule = ScheduleConfig {
            m: vec![2],
            delta: vec![2],
            beta_log: vec![0.2],
            n_region: 120,
            beta: 0.05,
            delta_max: 60,
            kappa_m: 10,
        };
        let chain = match experiment {
            Experiment::Fig2KappaScan => {
                let alphas = if desk {
                    fractions_of_pi4(&[-0.3, 0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9])
                } else {
                    fractions_of_pi4(&[-0.9, -0.6, -0.3, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95, 0.98])
                };
                ChainConfig {
                    n_sites: vec![if desk { 201 } else { 501 }],
                    alpha: alphas,
                }
            }
            Experiment::Fig3SplitVsDelta => {
                schedule.delta = (1..=60).map(|j| 2 * j).collect();
                schedule.delta_max = 120;
                ChainConfig { n_sites: vec![201], alpha: vec![boundary] }
            }
            Experiment::Fig1PackingDensity => {
                schedule.delta = vec![2, 4, 6, 8, 10, 12, 20, 24, 30, 40, 60];
                schedule.delta_max = 120;
                ChainConfig { n_sites: vec![201], alpha: vec![boundary] }
            }
            Experiment::Thm1Scaling => {
                schedule.m = (2..=16).collect();
                schedule.delta = vec![2, 6];
                schedule.delta_max = 96;
                ChainConfig { n_sites: vec![101], alpha: vec![0.3] }
            }
            Experiment::Thm2Optimality => {
                schedule.delta = vec![2, 4, 6, 8, 10, 12];
                schedule.delta_max = 120;
                ChainConfig { n_sites: vec![201], alpha: vec![boundary] }
            }
            Experiment::Custom => ChainConfig { n_sites: vec![51], alpha: vec![0.3] },
        };
        Self {
            experiment,
            output_dir: PathBuf::from("out").join(experiment.name()),
            cache: true,
            cache_dir: None,
            chain,
            solver: SolverConfig::default(),
            schedule,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn hash(&self) -> String {
        let text = self.to_toml().unwrap_or_default();
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        self.cache.then(|| self.cache_dir.clone().unwrap_or_else(|| self.output_dir.join("cache")))
    }

    pub fn specs(&self) -> Result<Vec<ChainSpec>> {
        let mut out = Vec::new();
        for &n in &self.chain.n_sites {
            for &a in &self.chain.alpha {
                out.push(ChainSpec::new(n, a)?);
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.chain.n_sites.is_empty() || self.chain.alpha.is_empty() {
            return bad("chain.n_sites and chain.alpha must be non-empty".into());
        }
        for &n in &self.chain.n_sites {
            if n < 5 || n % 2 == 0 {
                return bad(format!("n_sites = {n} must be odd and at least 5"));
            }
        }
        for &a in &self.chain.alpha {
            if !a.is_finite() || a.abs() >= FRAC_PI_4 {
                return bad(format!("alpha = {a} lies outside (-pi/4, pi/4)"));
            }
        }
        self.solver.params().validate().map_err(|e| LabError::Config(e.to_string()))?;
        let s = &self.schedule;
        if s.m.iter().any(|&m| m == 0) {
            return bad("schedule.m entries must be positive".into());
        }
        if s.delta.is_empty() || s.delta.iter().any(|&d| d == 0 || d % 2 != 0) {
            return bad("schedule.delta entries must be even and positive".into());
        }
        if s.beta_log.iter().any(|b| !b.is_finite()) || !s.beta.is_finite() || s.beta == 0.0 {
            return bad("angles must be finite and beta nonzero".into());
        }
        if s.n_region == 0 || s.n_region % 2 != 0 {
            return bad(format!("n_region = {} must be even and positive", s.n_region));
        }
        if s.delta_max < 2 || s.kappa_m == 0 {
            return bad("delta_max must be at least 2 and kappa_m positive".into());
        }
        Ok(())
    }
}

/// Command-line values that replace config entries when present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub n_sites: Option<usize>,
    pub delta: Option<usize>,
    pub m: Option<usize>,
    pub beta_log: Option<f64>,
    pub chi_max: Option<usize>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(a) = self.alpha {
            cfg.chain.alpha = vec![a];
        }
        if let Some(n) = self.n_sites {
            cfg.chain.n_sites = vec![n];
        }
        if let Some(d) = self.delta {
            cfg.schedule.delta = vec![d];
        }
        if let Some(m) = self.m {
            cfg.schedule.m = vec![m];
        }
        if let Some(b) = self.beta_log {
            cfg.schedule.beta_log = vec![b];
        }
        if let Some(c) = self.chi_max {
            cfg.solver.chi_max = Some(c);
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(c) = &self.cache {
            cfg.cache = true;
            cfg.cache_dir = Some(c.clone());
        }
        cfg.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for e in Experiment::ALL {
            for desk in [false, true] {
                let cfg = ExperimentConfig::preset(e, desk);
                cfg.validate().unwrap();
                let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
                assert_eq!(back, cfg);
            }
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!("fig3".parse::<Experiment>().unwrap(), Experiment::Fig3SplitVsDelta);
        assert_eq!("thm1-scaling".parse::<Experiment>().unwrap(), Experiment::Thm1Scaling);
        assert!("fig9".parse::<Experiment>().is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ExperimentConfig::preset(Experiment::Custom, true);
        cfg.chain.alpha = vec![1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::preset(Experiment::Custom, true);
        cfg.schedule.delta = vec![3];
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"custom\"\nbogus = 1").is_err());
    }
}
