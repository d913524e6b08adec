//! Parameter sweeps behind the experiment presets.

use cluster_mbqc::channel::{channel_matrix, purity_loss, Axis, RotationSchedule};
use cluster_mbqc::ground_state::GroundState;
use cluster_mbqc::pauli::ChainSpec;
use cluster_mbqc::string_order::{
    centered_pair, convexity_check, kappa, moon_edge_areas_until, profile, F_of_delta, Parity, ProfileOptions,
    StringOrderProfile,
};
use rayon::prelude::*;

use crate::cache::GroundStateCache;
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::table::{Kind, ResultTable, Value};

pub struct Runner {
    pub cache: GroundStateCache,
}

impl Runner {
    pub fn new(cache: GroundStateCache) -> Self {
        Self { cache }
    }

    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        match cfg.cache_dir() {
            Some(dir) => Self::new(GroundStateCache::new(dir)),
            None => Self::new(GroundStateCache::disabled()),
        }
    }

    pub fn state(&self, cfg: &ExperimentConfig, spec: &ChainSpec) -> Result<GroundState> {
        let params = cfg.solver.params();
        let (state, source) = self.cache.get_or_solve(spec, &params)?;
        log::info!(
            "N={} alpha={:.6}: E={:.12} bond={} ({:?})",
            spec.n_sites,
            spec.alpha,
            state.energy,
            state.max_bond(),
            source
        );
        Ok(state)
    }

    pub fn run(&self, cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
        cfg.validate()?;
        let mut tables = match cfg.experiment {
            Experiment::Fig2KappaScan => vec![run_fig2(self, cfg)?],
            Experiment::Fig3SplitVsDelta => vec![run_fig3(self, cfg)?],
            Experiment::Fig1PackingDensity => vec![run_fig1_packing(self, cfg)?],
            Experiment::Thm1Scaling => vec![run_thm1_scaling(self, cfg)?],
            Experiment::Thm2Optimality => vec![run_thm2_optimality(self, cfg)?],
            Experiment::Custom => vec![run_custom(self, cfg)?],
        };
        for t in &mut tables {
            t.metadata.config_hash = cfg.hash();
        }
        Ok(tables)
    }
}

fn single_spec(cfg: &ExperimentConfig) -> Result<ChainSpec> {
    let specs = cfg.specs()?;
    if specs.len() != 1 {
        return Err(LabError::Config(format!(
            "{} takes one (N, alpha) point, got {}",
            cfg.experiment,
            specs.len()
        )));
    }
    Ok(specs[0])
}

fn odd_profile(state: &GroundState, delta_max: usize) -> Result<StringOrderProfile> {
    Ok(profile(state, Parity::Odd, &ProfileOptions { delta_max: Some(delta_max) })?)
}

/// Largest usable pair distance on an N-site chain, capped at `want`.
fn fit_delta_max(n: usize, want: usize) -> usize {
    let cap = n.saturating_sub(3);
    let d = want.min(cap);
    d - d % 2
}

/// Odd buffer placing `m` z-rotation sites spaced by `delta` around the chain middle.
pub fn centered_buffer(n: usize, m: usize, delta: usize) -> usize {
    let span = m.saturating_sub(1) * delta;
    let c = n.div_ceil(2);
    let mut d = c.saturating_sub(span / 2).max(3);
    if d % 2 == 0 {
        d -= 1;
    }
    d.max(3)
}

pub fn run_fig2(runner: &Runner, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        "fig2_kappa",
        &[
            ("n_sites", Kind::Int),
            ("alpha", Kind::Float),
            ("delta", Kind::Int),
            ("m", Kind::Int),
            ("bulk_value", Kind::Float),
            ("kappa", Kind::Float),
        ],
    );
    let m = cfg.schedule.kappa_m;
    let specs = cfg.specs()?;
    let rows: Vec<_> = specs
        .par_iter()
        .map(|spec| -> Result<(ChainSpec, f64, f64)> {
            let state = runner.state(cfg, spec)?;
            let dmax = fit_delta_max(spec.n_sites, (2 * (m - 1)).max(2));
            let p = odd_profile(&state, dmax)?;
            Ok((*spec, p.bulk_value, kappa(&p, m, 2)?))
        })
        .collect();
    for (spec, row) in specs.iter().zip(rows) {
        match row {
            Ok((spec, k, kap)) => table.push(vec![
                spec.n_sites.into(),
                spec.alpha.into(),
                2usize.into(),
                m.into(),
                k.into(),
                kap.into(),
            ])?,
            Err(e) => table.push_error(format!("N={} alpha={}", spec.n_sites, spec.alpha), e),
        }
    }
    Ok(table)
}

pub fn run_fig3(runner: &Runner, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let spec = single_spec(cfg)?;
    let n = spec.n_sites;
    let state = runner.state(cfg, &spec)?;
    let beta = cfg.schedule.beta;
    let p = odd_profile(&state, fit_delta_max(n, cfg.schedule.delta_max))?;

    let single = RotationSchedule::with_gamma(Axis::Z, 1, 2, p.bulk_site, beta, beta)?;
    let ch1 = channel_matrix(&state, &single)?;
    let d1 = purity_loss([ch1.matrix[(0, 0)], ch1.matrix[(1, 0)], ch1.matrix[(2, 0)]]);
    if d1 <= 0.0 {
        return Err(LabError::Invariant(format!("single-site purity loss {d1:e} is not positive")));
    }

    let mut table = ResultTable::new(
        "fig3_split",
        &[
            ("delta", Kind::Int),
            ("normalized_loss", Kind::Float),
            ("f", Kind::Float),
            ("predicted", Kind::Float),
        ],
    );
    for &delta in &cfg.schedule.delta {
        let point = format!("delta={delta}");
        let row = (|| -> Result<Vec<Value>> {
            let (k, _) = centered_pair(n, Parity::Odd, delta)?;
            let s = RotationSchedule::with_gamma(Axis::Z, 2, delta, k, beta / 2.0, beta)?;
            let ch = channel_matrix(&state, &s)?;
            let d2 = purity_loss([ch.matrix[(0, 0)], ch.matrix[(1, 0)], ch.matrix[(2, 0)]]);
            let f = p.f(delta)?;
            Ok(vec![delta.into(), (d2 / d1).into(), f.into(), ((1.0 + f) / 2.0).into()])
        })();
        match row {
            Ok(r) => table.push(r)?,
            Err(e) => table.push_error(point, e),
        }
    }
    let loss = table.floats("normalized_loss").unwrap_or(&[]).to_vec();
    let worst_rise = loss.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    table.diag("alpha", spec.alpha);
    table.diag("n_sites", n);
    table.diag("beta", beta);
    table.diag("single_site_loss", d1);
    table.diag("worst_rise", worst_rise);
    if let Some(last) = loss.last() {
        table.diag("tail_value", last);
    }
    Ok(table)
}

pub fn run_fig1_packing(runner: &Runner, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let spec = single_spec(cfg)?;
    let n = spec.n_sites;
    let state = runner.state(cfg, &spec)?;
    let region = cfg.schedule.n_region;
    let beta_log = cfg.schedule.beta_log.first().copied().unwrap_or(0.2);
    let p = odd_profile(&state, fit_delta_max(n, cfg.schedule.delta_max))?;

    let mut table = ResultTable::new(
        "fig1_packing",
        &[
            ("delta", Kind::Int),
            ("m", Kind::Int),
            ("d_m", Kind::Float),
            ("F_delta", Kind::Float),
        ],
    );
    for &delta in &cfg.schedule.delta {
        if region % delta != 0 {
            log::warn!("skipping delta = {delta}: does not divide n = {region}");
            continue;
        }
        let m = region / delta;
        let row = (|| -> Result<Vec<Value>> {
            let s = RotationSchedule::new(Axis::Z, m, delta, centered_buffer(n, m, delta), beta_log, p.bulk_value)?;
            let ch = channel_matrix(&state, &s)?;
            let f = F_of_delta(&p, region, delta)?;
            Ok(vec![delta.into(), m.into(), ch.d_m.into(), f.into()])
        })();
        match row {
            Ok(r) => table.push(r)?,
            Err(e) => table.push_error(format!("delta={delta}"), e),
        }
    }
    let deltas = table.ints("delta").unwrap_or(&[]).to_vec();
    let argmin = |col: &str| {
        let v = table.floats(col).unwrap_or(&[]);
        v.iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| deltas[i])
    };
    let (am_d, am_f) = (argmin("d_m"), argmin("F_delta"));
    table.diag("argmin_d_m", am_d.map_or("none".into(), |d| d.to_string()));
    table.diag("argmin_F", am_f.map_or("none".into(), |d| d.to_string()));
    table.diag("bulk_value", p.bulk_value);
    table.diag("beta_log", beta_log);
    table.diag("n_region", region);
    Ok(table)
}

/// `(C, slope)`: the bound constant `max_m m r(m)` and the log-log slope of `r(m)`.
pub fn scaling_fit(ms: &[f64], residuals: &[f64]) -> (f64, f64) {
    let c = ms.iter().zip(residuals).map(|(m, r)| m * r).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(residuals)
        .filter(|(_, &r)| r > 0.0)
        .map(|(m, r)| (m.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return (c, f64::NEG_INFINITY);
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (c, sxy / sxx)
}

pub fn run_thm1_scaling(runner: &Runner, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let spec = single_spec(cfg)?;
    let n = spec.n_sites;
    let state = runner.state(cfg, &spec)?;
    let beta_log = cfg.schedule.beta_log.first().copied().unwrap_or(0.2);
    let p = odd_profile(&state, fit_delta_max(n, cfg.schedule.delta_max))?;

    let mut table = ResultTable::new(
        "thm1_scaling",
        &[
            ("delta", Kind::Int),
            ("m", Kind::Int),
            ("d_m", Kind::Float),
            ("m_d_m", Kind::Float),
            ("kappa", Kind::Float),
            ("residual", Kind::Float),
            ("beta_effective", Kind::Float),
        ],
    );
    for &delta in &cfg.schedule.delta {
        let mut ms = Vec::new();
        let mut rs = Vec::new();
        for &m in &cfg.schedule.m {
            let row = (|| -> Result<(f64, f64, f64)> {
                let s = RotationSchedule::new(Axis::Z, m, delta, centered_buffer(n, m, delta), beta_log, p.bulk_value)?;
                let ch = channel_matrix(&state, &s)?;
                Ok((ch.d_m, kappa(&p, m, delta)?, ch.beta_effective))
            })();
            match row {
                Ok((d, kap, be)) => {
                    let md = m as f64 * d;
                    let r = (md - kap * beta_log * beta_log).abs();
                    ms.push(m as f64);
                    rs.push(r);
                    table.push(vec![delta.into(), m.into(), d.into(), md.into(), kap.into(), r.into(), be.into()])?;
                }
                Err(e) => table.push_error(format!("delta={delta} m={m}"), e),
            }
        }
        let (c, slope) = scaling_fit(&ms, &rs);
        table.diag(&format!("C_delta{delta}"), c);
        table.diag(&format!("slope_delta{delta}"), slope);
    }
    table.diag("alpha", spec.alpha);
    table.diag("beta_log", beta_log);
    table.diag("bulk_value", p.bulk_value);
    Ok(table)
}

/// `M_f(k delta0) >= M_f(delta0)` over every multiple present in the table.
pub fn moon_edge_violations(table: &ResultTable, tol: f64) -> Vec<(i64, i64)> {
    let ds = table.ints("delta").unwrap_or(&[]);
    let mf = table.floats("M_f").unwrap_or(&[]);
    let mut bad = Vec::new();
    for (i, &d0) in ds.iter().enumerate() {
        for (j, &d) in ds.iter().enumerate() {
            if d > d0 && d % d0 == 0 && mf[j] < mf[i] - tol {
                bad.push((d0, d));
            }
        }
    }
    bad
}

/// Moon-edge and F scan for a given profile.
pub fn thm2_table(p: &StringOrderProfile, deltas: &[usize], region: usize) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        "thm2_optimality",
        &[("delta", Kind::Int), ("M_f", Kind::Float), ("F_delta", Kind::Float)],
    );
    let x_max = region.min(p.delta_max());
    for &delta in deltas {
        let row = (|| -> Result<Vec<Value>> {
            if x_max % delta != 0 {
                return Err(cluster_mbqc::Error::Divisibility { delta, n: x_max }.into());
            }
            let mf = moon_edge_areas_until(p, delta, x_max)?;
            let f = F_of_delta(p, region, delta)?;
            Ok(vec![delta.into(), mf.edges.total.into(), f.into()])
        })();
        match row {
            Ok(r) => table.push(r)?,
            Err(e) => table.push_error(format!("delta={delta}"), e),
        }
    }
    let conv = convexity_check(p, 1e-6)?;
    table.diag("convex", conv.is_convex);
    table.diag("worst_second_difference", conv.worst_violation);
    table.diag("decreasing", conv.is_decreasing);
    if !conv.is_convex {
        log::warn!("string order is not convex at distances {:?}", conv.violating_distances);
    }
    let violations = moon_edge_violations(&table, 1e-12);
    table.diag("moon_edge_monotone", violations.is_empty());
    table.diag("moon_edge_violations", format!("{violations:?}"));
    Ok(table)
}

pub fn run_thm2_optimality(runner: &Runner, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let spec = single_spec(cfg)?;
    let state = runner.state(cfg, &spec)?;
    let p = odd_profile(&state, fit_delta_max(spec.n_sites, cfg.schedule.delta_max))?;
    let mut t = thm2_table(&p, &cfg.schedule.delta, cfg.schedule.n_region)?;
    t.diag("alpha", spec.alpha);
    t.diag("n_sites", spec.n_sites);
    Ok(t)
}

/// Fails when the moon-edge monotonicity recorded by [`thm2_table`] does not hold.
pub fn check_thm2(table: &ResultTable) -> Result<()> {
    match table.metadata.diagnostics.get("moon_edge_monotone").map(String::as_str) {
        Some("true") => Ok(()),
        _ => Err(LabError::Invariant(format!(
            "M_f(k delta0) < M_f(delta0) for {}",
            table.metadata.diagnostics.get("moon_edge_violations").map_or("?", |s| s.as_str())
        ))),
    }
}

/// Profile from a `delta,f` CSV. Only `f` enters the moon-edge and F scans.
pub fn profile_from_csv(text: &str) -> Result<StringOrderProfile> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut f = std::collections::BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).map(str::trim).ok_or_else(|| LabError::Format("missing column".into()));
        let d: usize = parse(0)?.parse().map_err(|e| LabError::Format(format!("delta: {e}")))?;
        let v: f64 = parse(1)?.parse().map_err(|e| LabError::Format(format!("f: {e}")))?;
        if d % 2 != 0 || d == 0 {
            return Err(LabError::Format(format!("delta {d} must be even and positive")));
        }
        f.insert(d, v);
    }
    let dmax = f.keys().next_back().copied().ok_or_else(|| LabError::Format("empty profile".into()))?;
    if f.len() != dmax / 2 {
        return Err(LabError::Format("profile must list every even delta up to its maximum".into()));
    }
    Ok(StringOrderProfile::synthetic(0.5, |d| f[&d], dmax)?)
}

/// Channel metrics for every (N, alpha, m, delta, beta_log) combination.
pub fn run_custom(runner: &Runner, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        "custom",
        &[
            ("n_sites", Kind::Int),
            ("alpha", Kind::Float),
            ("m", Kind::Int),
            ("delta", Kind::Int),
            ("beta_log", Kind::Float),
            ("bulk_value", Kind::Float),
            ("d_m", Kind::Float),
            ("beta_effective", Kind::Float),
        ],
    );
    for spec in cfg.specs()? {
        let n = spec.n_sites;
        let state = match runner.state(cfg, &spec) {
            Ok(s) => s,
            Err(e) => {
                table.push_error(format!("N={n} alpha={}", spec.alpha), e);
                continue;
            }
        };
        let p = odd_profile(&state, fit_delta_max(n, 2))?;
        for &m in &cfg.schedule.m {
            for &delta in &cfg.schedule.delta {
                for &b in &cfg.schedule.beta_log {
                    let row = RotationSchedule::new(Axis::Z, m, delta, centered_buffer(n, m, delta), b, p.bulk_value)
                        .and_then(|s| channel_matrix(&state, &s));
                    match row {
                        Ok(ch) => table.push(vec![
                            n.into(),
                            spec.alpha.into(),
                            m.into(),
                            delta.into(),
                            b.into(),
                            p.bulk_value.into(),
                            ch.d_m.into(),
                            ch.beta_effective.into(),
                        ])?,
                        Err(e) => table.push_error(format!("N={n} alpha={} m={m} delta={delta}", spec.alpha), e),
                    }
                }
            }
        }
    }
    Ok(table)
}
