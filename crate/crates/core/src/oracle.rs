//! Statevector simulation of the adaptive measurement protocol by exhaustive
//! enumeration of outcome branches.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::channel::RotationSchedule;
use crate::error::{Error, Result};
use crate::ground_state::GroundState;

pub const ORACLE_MAX_SITES: usize = 14;
/// Largest chain for [`decorated_expectation`].
pub const DECORATED_MAX_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReadoutBasis {
    X,
    Y,
    Z,
}

impl ReadoutBasis {
    pub const ALL: [ReadoutBasis; 3] = [ReadoutBasis::X, ReadoutBasis::Y, ReadoutBasis::Z];

    fn index(self) -> usize {
        self as usize
    }
}

/// Logical input prepared through the measurement basis of site 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalInput {
    /// Site 1 measured like every other site.
    Plus,
    /// Site 1 measured at angle pi/2.
    Y,
    /// Site 1 measured in the Z basis.
    Z,
}

impl LogicalInput {
    pub const ALL: [LogicalInput; 3] = [LogicalInput::Plus, LogicalInput::Y, LogicalInput::Z];
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPlan {
    pub n_sites: usize,
    /// Basis angle per site 1..N-1, stored at index `site - 1`.
    pub angles: Vec<f64>,
    pub readout: ReadoutBasis,
}

impl MeasurementPlan {
    /// Every site measured in the symmetry-respecting basis.
    pub fn wire(n_sites: usize) -> Result<Self> {
        if n_sites < 3 || n_sites % 2 == 0 {
            return Err(Error::InvalidChain(format!("need odd N >= 3, got {n_sites}")));
        }
        Ok(Self {
            n_sites,
            angles: vec![0.0; n_sites - 1],
            readout: ReadoutBasis::X,
        })
    }

    pub fn with_angle(mut self, site: usize, beta: f64) -> Result<Self> {
        if site < 1 || site >= self.n_sites {
            return Err(Error::IndexOutOfRange { index: site, min: 1, max: self.n_sites - 1 });
        }
        self.angles[site - 1] = beta;
        Ok(self)
    }

    pub fn with_readout(mut self, readout: ReadoutBasis) -> Self {
        self.readout = readout;
        self
    }

    /// Bare angle `gamma` on every rotation site of the schedule.
    pub fn from_schedule(n_sites: usize, schedule: &RotationSchedule) -> Result<Self> {
        schedule.check_fits(n_sites)?;
        let mut plan = Self::wire(n_sites)?;
        for s in schedule.sites() {
            plan = plan.with_angle(s, schedule.gamma)?;
        }
        Ok(plan)
    }

    pub fn angle(&self, site: usize) -> f64 {
        self.angles[site - 1]
    }
}

/// Parity of `s_{i-1}, s_{i-3}, ..`; `s` holds outcomes of sites 1.. at index `site - 1`.
pub fn side_process_q(s: &[u8], i: usize) -> u8 {
    let mut q = 0;
    let mut j = i as isize - 1;
    while j >= 1 {
        q ^= s[j as usize - 1] & 1;
        j -= 2;
    }
    q
}

pub fn readout_bit(s: &[u8], basis: ReadoutBasis) -> u8 {
    let take = |site: usize| match basis {
        ReadoutBasis::X => site % 2 == 1,
        ReadoutBasis::Y => true,
        ReadoutBasis::Z => site % 2 == 0,
    };
    s.iter()
        .enumerate()
        .filter(|(i, _)| take(i + 1))
        .fold(0, |acc, (_, &b)| acc ^ (b & 1))
}

/// Record after folding a Z-basis outcome on site 1 into site 2.
fn effective_record(s: &[u8], input: LogicalInput) -> Vec<u8> {
    let mut e = s.to_vec();
    if input == LogicalInput::Z && e.len() >= 2 {
        e[1] ^= e[0];
        e[0] = 0;
    }
    e
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchRecord {
    /// Outcomes of sites 1..N-1.
    pub outcomes: Vec<u8>,
    pub probability: f64,
    /// Normalized Bloch vector of the readout site in this branch.
    pub bloch: [f64; 3],
}

impl BranchRecord {
    /// Bloch vector with the readout parities applied.
    pub fn logical_bloch(&self, input: LogicalInput) -> [f64; 3] {
        let e = effective_record(&self.outcomes, input);
        let mut out = self.bloch;
        for b in ReadoutBasis::ALL {
            if readout_bit(&e, b) == 1 {
                out[b.index()] = -out[b.index()];
            }
        }
        out
    }
}

/// Eigenvector components `(u0, u1)` with `<e| = conj(u)` for site `i`.
fn basis_vector(plan: &MeasurementPlan, input: LogicalInput, site: usize, eff: &[u8], s: u8) -> [Complex64; 2] {
    let sign = if s == 0 { 1.0 } else { -1.0 };
    let h = core::f64::consts::FRAC_1_SQRT_2;
    if site == 1 && input == LogicalInput::Z {
        return if s == 0 {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        };
    }
    let beta = if site == 1 && input == LogicalInput::Y {
        core::f64::consts::FRAC_PI_2
    } else {
        plan.angle(site)
    };
    let q = side_process_q(eff, site);
    let phi = if q == 0 { -beta } else { beta };
    [Complex64::new(h, 0.0), Complex64::from_polar(sign * h, phi)]
}

fn check(state: &GroundState, plan: &MeasurementPlan, cap: usize) -> Result<Vec<Complex64>> {
    let n = state.n_sites();
    if plan.n_sites != n {
        return Err(Error::ShapeMismatch { left: n, right: plan.n_sites });
    }
    if n > cap {
        return Err(Error::Capacity(format!("branch enumeration limited to {cap} sites, got {n}")));
    }
    state.require_converged()?;
    state
        .dense_amplitudes()
        .map(<[Complex64]>::to_vec)
        .ok_or_else(|| Error::Representation(format!("branch enumeration needs a dense state")))
}

/// All `2^(N-1)` outcome branches, depth first with site 1 outermost.
pub fn enumerate_branches(state: &GroundState, plan: &MeasurementPlan, input: LogicalInput) -> Result<Vec<BranchRecord>> {
    let psi = check(state, plan, ORACLE_MAX_SITES)?;
    let n = plan.n_sites;
    let mut out = Vec::with_capacity(1 << (n - 1));
    let mut record = Vec::with_capacity(n - 1);
    descend(plan, input, &psi, 1, &mut record, &mut out);
    Ok(out)
}

fn descend(
    plan: &MeasurementPlan,
    input: LogicalInput,
    psi: &[Complex64],
    site: usize,
    record: &mut Vec<u8>,
    out: &mut Vec<BranchRecord>,
) {
    if site == plan.n_sites {
        let (a, b) = (psi[0], psi[1]);
        let p = a.norm_sqr() + b.norm_sqr();
        let ab = a.conj() * b;
        let bloch = if p > 0.0 {
            [2.0 * ab.re / p, 2.0 * ab.im / p, (a.norm_sqr() - b.norm_sqr()) / p]
        } else {
            [0.0; 3]
        };
        out.push(BranchRecord { outcomes: record.clone(), probability: p, bloch });
        return;
    }
    let half = psi.len() / 2;
    for s in 0..2u8 {
        record.push(s);
        let eff = effective_record(record, input);
        let [u0, u1] = basis_vector(plan, input, site, &eff, s);
        let (c0, c1) = (u0.conj(), u1.conj());
        let next: Vec<Complex64> = (0..half).map(|j| c0 * psi[2 * j] + c1 * psi[2 * j + 1]).collect();
        descend(plan, input, &next, site + 1, record, out);
        record.pop();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogicalExpectations {
    pub values: [f64; 3],
    pub n_branches: usize,
    pub total_probability: f64,
}

/// `(<X>, <Y>, <Z>)` of the logical output for one input.
pub fn logical_expectations(state: &GroundState, plan: &MeasurementPlan, input: LogicalInput) -> Result<LogicalExpectations> {
    let branches = enumerate_branches(state, plan, input)?;
    let mut values = [0.0; 3];
    let mut total = 0.0;
    for b in &branches {
        let v = b.logical_bloch(input);
        for k in 0..3 {
            values[k] += b.probability * v[k];
        }
        total += b.probability;
    }
    Ok(LogicalExpectations { values, n_branches: branches.len(), total_probability: total })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Logical expectations for the `|+>` input.
    pub expectations: [f64; 3],
    /// Reconstructed 3x3 logical channel.
    pub channel: Matrix3<f64>,
    /// Bloch vectors of the three inputs (columns), measured on the bare wire.
    pub inputs: Matrix3<f64>,
    pub n_branches: usize,
    pub max_prob_deviation: f64,
}

/// Runs the plan for three logical inputs and solves for the channel.
pub fn enumerate_channel(state: &GroundState, plan: &MeasurementPlan) -> Result<OracleResult> {
    if plan.angles.first().is_some_and(|&b| b != 0.0) {
        return Err(Error::Domain(format!("site 1 carries the input preparation and must have angle 0")));
    }
    let wire = MeasurementPlan::wire(plan.n_sites)?;
    let mut outputs = Matrix3::zeros();
    let mut inputs = Matrix3::zeros();
    let mut dev: f64 = 0.0;
    let mut n_branches = 0;
    for (j, input) in LogicalInput::ALL.into_iter().enumerate() {
        let out = logical_expectations(state, plan, input)?;
        let inp = logical_expectations(state, &wire, input)?;
        for k in 0..3 {
            outputs[(k, j)] = out.values[k];
            inputs[(k, j)] = inp.values[k];
        }
        dev = dev.max((out.total_probability - 1.0).abs()).max((inp.total_probability - 1.0).abs());
        n_branches = out.n_branches;
    }
    let inv = inputs
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("logical inputs are linearly dependent")))?;
    Ok(OracleResult {
        expectations: [outputs[(0, 0)], outputs[(1, 0)], outputs[(2, 0)]],
        channel: outputs * inv,
        inputs,
        n_branches,
        max_prob_deviation: dev,
    })
}

/// `<P_N prod_i O~_i>` from the definition of the decorated observables:
/// an explicit sum over every product basis state of sites 1..N-1.
pub fn decorated_expectation(
    state: &GroundState,
    plan: &MeasurementPlan,
    input: LogicalInput,
    basis: ReadoutBasis,
) -> Result<f64> {
    let psi = check(state, plan, DECORATED_MAX_SITES)?;
    let n = plan.n_sites;
    let body = n - 1;
    let mut total = 0.0;
    for bits in 0u32..(1 << body) {
        let s: Vec<u8> = (0..body).map(|i| ((bits >> i) & 1) as u8).collect();
        let eff = effective_record(&s, input);
        let u: Vec<[Complex64; 2]> = (1..n).map(|site| basis_vector(plan, input, site, &eff, s[site - 1])).collect();
        // v = (<s| x 1)|psi> on the readout site
        let mut v = [Complex64::new(0.0, 0.0); 2];
        for (idx, amp) in psi.iter().enumerate() {
            let mut w = *amp;
            for site in 1..n {
                w *= u[site - 1][(idx >> (site - 1)) & 1].conj();
            }
            v[(idx >> body) & 1] += w;
        }
        let ab = v[0].conj() * v[1];
        let val = match basis {
            ReadoutBasis::X => 2.0 * ab.re,
            ReadoutBasis::Y => 2.0 * ab.im,
            ReadoutBasis::Z => v[0].norm_sqr() - v[1].norm_sqr(),
        };
        let sign = if readout_bit(&eff, basis) == 0 { 1.0 } else { -1.0 };
        total += sign * val;
    }
    Ok(total)
}
