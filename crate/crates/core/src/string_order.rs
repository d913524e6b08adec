//! String order profiles, the correlation function f, kappa, and the
//! convexity analytics built on them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{moon_edges, HermiteCubic, MoonEdges};
use crate::error::{Error, Result};
use crate::ground_state::{GroundState, Representation};
use crate::mps::{frobenius_dot, transfer_left, transfer_right, CanonicalMps};
use crate::pauli::{string_order_geq, string_order_pair, Pauli};

/// Below this `1 - K^2` the state counts as the cluster point and f vanishes.
pub const CLUSTER_POINT_TOL: f64 = 1e-12;

/// Tail cutoff for the F(delta) series.
pub const F_TAIL_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Odd sites, used by z-rotations.
    Odd,
    /// Even sites, used by x-rotations.
    Even,
}

impl Parity {
    pub fn contains(self, k: usize) -> bool {
        (k % 2 == 1) == (self == Parity::Odd)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProfileOptions {
    /// Largest pair distance; defaults to `min(60, N/3)` rounded down to even.
    pub delta_max: Option<usize>,
}

pub fn default_delta_max(n: usize) -> usize {
    let d = (n / 3).min(60);
    d - d % 2
}

#[derive(Clone, Debug, PartialEq)]
pub struct StringOrderProfile {
    pub n_sites: usize,
    pub alpha: f64,
    pub parity: Parity,
    /// `<K_{>=k}>` for every k of the parity.
    pub k_geq: BTreeMap<usize, f64>,
    /// `<K(delta)>` at bulk-centered pairs, including `delta = 0` with value 1.
    pub k_pair: BTreeMap<usize, f64>,
    /// The `(k, l)` used for each pair distance.
    pub pair_sites: BTreeMap<usize, (usize, usize)>,
    pub bulk_site: usize,
    pub bulk_value: f64,
    pub f_values: BTreeMap<usize, f64>,
    /// Decay length of f from a log-linear fit; `None` when too few points
    /// fall in the fit window.
    pub xi_estimate: Option<f64>,
}

/// Site whose `<K_{>=k}>` stands for the bulk value.
pub fn bulk_site(n: usize, parity: Parity) -> usize {
    let c = n.div_ceil(2);
    if parity.contains(c) {
        c
    } else {
        c - 1
    }
}

/// Pair `(k, k + delta)` of the given parity centered on the chain middle.
pub fn centered_pair(n: usize, parity: Parity, delta: usize) -> Result<(usize, usize)> {
    if delta == 0 || delta % 2 != 0 {
        return Err(Error::Parity(format!("pair distance must be even and positive, got {delta}")));
    }
    let c = n.div_ceil(2);
    let mut k = c as isize - (delta / 2) as isize;
    if !parity.contains(k.unsigned_abs()) {
        k -= 1;
    }
    if k < 1 || k as usize + delta > n {
        return Err(Error::OutOfGrid(delta));
    }
    Ok((k as usize, k as usize + delta))
}

impl StringOrderProfile {
    /// Builds a profile from raw expectation values; `k_pair` must not contain 0.
    pub fn from_values(
        n_sites: usize,
        alpha: f64,
        parity: Parity,
        k_geq: BTreeMap<usize, f64>,
        mut k_pair: BTreeMap<usize, f64>,
        pair_sites: BTreeMap<usize, (usize, usize)>,
        bulk_site: usize,
        bulk_value: f64,
    ) -> Result<Self> {
        for v in k_geq.values().chain(k_pair.values()).chain([&bulk_value]) {
            if !(v.abs() <= 1.0 + 1e-9) {
                return Err(Error::Domain(format!("string order value {v} exceeds operator norm")));
            }
        }
        k_pair.insert(0, 1.0);
        let k2 = bulk_value * bulk_value;
        let denom = 1.0 - k2;
        let f_values: BTreeMap<usize, f64> = k_pair
            .iter()
            .map(|(&d, &kd)| {
                let f = if d == 0 {
                    1.0
                } else if denom.abs() < CLUSTER_POINT_TOL {
                    0.0
                } else {
                    (kd - k2) / denom
                };
                (d, f)
            })
            .collect();
        let xi_estimate = fit_decay_length(&f_values);
        Ok(Self {
            n_sites,
            alpha,
            parity,
            k_geq,
            k_pair,
            pair_sites,
            bulk_site,
            bulk_value,
            f_values,
            xi_estimate,
        })
    }

    /// A profile with prescribed bulk value and f on `{2, 4, .., delta_max}`.
    pub fn synthetic<F: Fn(usize) -> f64>(bulk_value: f64, f: F, delta_max: usize) -> Result<Self> {
        let k2 = bulk_value * bulk_value;
        let k_pair = (1..=delta_max / 2)
            .map(|j| (2 * j, k2 + f(2 * j) * (1.0 - k2)))
            .collect();
        Self::from_values(0, 0.0, Parity::Odd, BTreeMap::new(), k_pair, BTreeMap::new(), 0, bulk_value)
    }

    pub fn delta_max(&self) -> usize {
        self.k_pair.keys().next_back().copied().unwrap_or(0)
    }

    pub fn f(&self, delta: usize) -> Result<f64> {
        self.f_values.get(&delta).copied().ok_or(Error::OutOfGrid(delta))
    }

    /// Spline through `(delta, f)` over the whole grid.
    pub fn f_curve(&self) -> Result<HermiteCubic> {
        let xs: Vec<f64> = self.f_values.keys().map(|&d| d as f64).collect();
        let ys: Vec<f64> = self.f_values.values().copied().collect();
        HermiteCubic::new(&xs, &ys)
    }
}

fn fit_decay_length(f: &BTreeMap<usize, f64>) -> Option<f64> {
    // only the leading decreasing run; finite chains turn f back up near the edges
    let mut prev = f64::INFINITY;
    let pts: Vec<(f64, f64)> = f
        .iter()
        .filter(|(&d, _)| d > 0)
        .take_while(|(_, &v)| {
            let keep = v < prev;
            prev = v;
            keep
        })
        .filter(|(_, &v)| (1e-6..=0.5).contains(&v))
        .map(|(&d, &v)| (d as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -1.0 / slope)
}

/// `<K_{>=k}>` for every k of the parity, one right-to-left pass on MPS.
fn geq_values(state: &GroundState, parity: Parity) -> Result<BTreeMap<usize, f64>> {
    let n = state.n_sites();
    let ks: Vec<usize> = (1..n).filter(|&k| parity.contains(k)).collect();
    match &state.representation {
        Representation::Dense(_) => ks
            .iter()
            .map(|&k| Ok((k, state.expectation(&string_order_geq(k, n)?)?)))
            .collect(),
        Representation::Mps(m) => Ok(mps_geq_values(m, parity, &ks)),
    }
}

fn mps_geq_values(m: &CanonicalMps, parity: Parity, ks: &[usize]) -> BTreeMap<usize, f64> {
    let n = m.n_sites();
    // Tail letters right of k do not depend on k, only on the parity.
    let tail = |j: usize| {
        if !parity.contains(j) {
            Pauli::X
        } else if j == n && parity == Parity::Odd {
            Pauli::Z
        } else {
            Pauli::I
        }
    };
    let mut out = BTreeMap::new();
    let mut env = vec![1.0];
    let mut wanted = ks.iter().rev().peekable();
    for j in (1..=n).rev() {
        if let Some(&&k) = wanted.peek() {
            if k == j {
                let head = transfer_left(None, m.tensor(k), Pauli::Z);
                out.insert(k, frobenius_dot(&head, &env));
                wanted.next();
            }
        }
        env = transfer_right(Some(&env), m.tensor(j), tail(j));
    }
    out
}

/// Evaluates the full profile of a converged state.
pub fn profile(state: &GroundState, parity: Parity, opts: &ProfileOptions) -> Result<StringOrderProfile> {
    state.require_converged()?;
    let n = state.n_sites();
    let delta_max = opts.delta_max.unwrap_or_else(|| default_delta_max(n));
    let k_geq = geq_values(state, parity)?;
    let mut k_pair = BTreeMap::new();
    let mut pair_sites = BTreeMap::new();
    for delta in (2..=delta_max).step_by(2) {
        let (k, l) = centered_pair(n, parity, delta)?;
        k_pair.insert(delta, state.expectation(&string_order_pair(k, l, n)?)?);
        pair_sites.insert(delta, (k, l));
    }
    let bs = bulk_site(n, parity);
    let bulk_value = k_geq[&bs];
    StringOrderProfile::from_values(n, state.spec.alpha, parity, k_geq, k_pair, pair_sites, bs, bulk_value)
}

/// `(|<K_{>=k} K_{>=l}> - <K_{k,l}>|, |<K_{k,l}> - <K_{>=k}><K_{>=l}>|)`.
pub fn factorization_residual(state: &GroundState, k: usize, l: usize) -> Result<(f64, f64)> {
    let n = state.n_sites();
    if k >= l || (l - k) % 2 != 0 {
        return Err(Error::Parity(format!("need k < l of equal parity, got ({k}, {l})")));
    }
    let a = string_order_geq(k, n)?;
    let b = if l < n {
        Some(string_order_geq(l, n)?)
    } else {
        None
    };
    let pair = state.expectation(&string_order_pair(k, l, n)?)?;
    let ka = state.expectation(&a)?;
    // K_{>=N} is not defined; for l = N the product reduces to K_{>=k} itself.
    let (prod, kb) = match &b {
        Some(b) => (state.expectation(&a.try_mul(b)?)?, state.expectation(b)?),
        None => (ka, 1.0),
    };
    Ok(((prod - pair).abs(), (pair - ka * kb).abs()))
}

fn check_delta(delta: usize) -> Result<()> {
    if delta == 0 || delta % 2 != 0 {
        return Err(Error::Parity(format!("delta must be even and positive, got {delta}")));
    }
    Ok(())
}

/// `kappa = (1 + 2 sum_{j=1}^{m-1} f(j delta)) (1/K^2 - 1)`.
pub fn kappa(profile: &StringOrderProfile, m: usize, delta: usize) -> Result<f64> {
    check_delta(delta)?;
    if m == 0 {
        return Err(Error::Domain(format!("m must be positive")));
    }
    let k = profile.bulk_value;
    if k == 0.0 {
        return Err(Error::Singular(format!("bulk string order vanishes")));
    }
    let mut s = 1.0;
    for j in 1..m {
        s += 2.0 * profile.f(j * delta)?;
    }
    Ok(s * (1.0 / (k * k) - 1.0))
}

/// `F(delta) = (delta/n)(1 + 2 sum_j f(j delta))`, the sum stopping at the
/// first `f < 1e-12` or at the end of the sampled grid.
#[allow(non_snake_case)]
pub fn F_of_delta(profile: &StringOrderProfile, n_region: usize, delta: usize) -> Result<f64> {
    check_delta(delta)?;
    if n_region == 0 || n_region % delta != 0 {
        return Err(Error::Divisibility { delta, n: n_region });
    }
    let mut s = 1.0;
    let mut j = 1;
    while let Ok(f) = profile.f(j * delta) {
        if f < F_TAIL_CUTOFF {
            break;
        }
        s += 2.0 * f;
        j += 1;
    }
    Ok(delta as f64 / n_region as f64 * s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub is_convex: bool,
    /// Most negative second difference of `<K(delta)>` (0 when none is negative).
    pub worst_violation: f64,
    pub violating_distances: Vec<usize>,
    pub is_decreasing: bool,
    pub increasing_distances: Vec<usize>,
    pub tolerance: f64,
}

/// Second differences of `<K(delta)>` on the grid `0, 2, 4, ..`.
pub fn convexity_check(profile: &StringOrderProfile, tol: f64) -> Result<ConvexityReport> {
    let pts: Vec<(usize, f64)> = profile.k_pair.iter().map(|(&d, &v)| (d, v)).collect();
    if pts.len() < 3 {
        return Err(Error::Domain(format!("convexity needs at least 3 grid points, got {}", pts.len())));
    }
    let step = pts[1].0 - pts[0].0;
    if step == 0 || pts.windows(2).any(|w| w[1].0 - w[0].0 != step) {
        return Err(Error::Domain(format!("convexity needs a uniform grid")));
    }
    let mut worst: f64 = 0.0;
    let mut violating = Vec::new();
    for w in pts.windows(3) {
        let d2 = w[0].1 - 2.0 * w[1].1 + w[2].1;
        worst = worst.min(d2);
        if d2 < -tol {
            violating.push(w[1].0);
        }
    }
    let increasing: Vec<usize> = pts
        .windows(2)
        .filter(|w| w[1].1 > w[0].1 + tol)
        .map(|w| w[1].0)
        .collect();
    Ok(ConvexityReport {
        is_convex: worst >= -tol,
        worst_violation: worst,
        violating_distances: violating,
        is_decreasing: increasing.is_empty(),
        increasing_distances: increasing,
        tolerance: tol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoonEdgeReport {
    pub edges: MoonEdges,
    /// False when the input profile failed the default convexity check.
    pub convex_input: bool,
}

/// Moon-edge areas of the interpolated f over the sampled grid.
pub fn moon_edge_areas(profile: &StringOrderProfile, delta: usize) -> Result<MoonEdgeReport> {
    moon_edge_areas_until(profile, delta, profile.delta_max())
}

/// As [`moon_edge_areas`], summing only intervals inside `[0, x_max]`.
pub fn moon_edge_areas_until(
    profile: &StringOrderProfile,
    delta: usize,
    x_max: usize,
) -> Result<MoonEdgeReport> {
    check_delta(delta)?;
    if x_max > profile.delta_max() {
        return Err(Error::OutOfGrid(x_max));
    }
    let curve = profile.f_curve()?;
    let edges = moon_edges(&curve, delta as f64, x_max as f64)?;
    let convex_input = convexity_check(profile, 1e-6).map(|r| r.is_convex).unwrap_or(false);
    Ok(MoonEdgeReport { edges, convex_input })
}
