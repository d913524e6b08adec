//! Logical channels of split symmetry-breaking rotations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3, Matrix4};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense;
use crate::error::{Error, Result};
use crate::ground_state::{GroundState, Representation};
use crate::mps::{real_letter, transfer_left_into, CanonicalMps};
use crate::pauli::{string_order_geq, Pauli, PauliString};
use crate::string_order::Parity;

/// Largest m for the subset expansion.
pub const SUBSET_MAX_M: usize = 20;
/// `EvalPath::Auto` uses the subset expansion up to this m.
pub const AUTO_SUBSET_MAX_M: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Rotations on odd sites.
    Z,
    /// Rotations on even sites.
    X,
}

impl Axis {
    pub fn parity(self) -> Parity {
        match self {
            Axis::Z => Parity::Odd,
            Axis::X => Parity::Even,
        }
    }

    fn first_site(self, buffer_d: usize) -> usize {
        match self {
            Axis::Z => buffer_d,
            Axis::X => buffer_d + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EvalPath {
    #[default]
    Auto,
    SubsetOnly,
    NetworkOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotationSchedule {
    pub axis: Axis,
    pub m: usize,
    pub delta: usize,
    pub buffer_d: usize,
    pub gamma: f64,
    pub beta_log: f64,
}

/// `gamma = beta_log / (m K)`.
pub fn auto_gamma(beta_log: f64, m: usize, bulk_value: f64) -> Result<f64> {
    if bulk_value == 0.0 {
        return Err(Error::Singular(format!("bulk string order vanishes")));
    }
    if m == 0 {
        return Ok(0.0);
    }
    Ok(beta_log / (m as f64 * bulk_value))
}

impl RotationSchedule {
    /// Schedule with the per-site angle scaled by the bulk string order.
    pub fn new(axis: Axis, m: usize, delta: usize, buffer_d: usize, beta_log: f64, bulk_value: f64) -> Result<Self> {
        let gamma = auto_gamma(beta_log, m, bulk_value)?;
        Self::with_gamma(axis, m, delta, buffer_d, gamma, beta_log)
    }

    /// Schedule with a raw per-site angle.
    pub fn with_gamma(axis: Axis, m: usize, delta: usize, buffer_d: usize, gamma: f64, beta_log: f64) -> Result<Self> {
        if delta == 0 || delta % 2 != 0 {
            return Err(Error::Schedule(format!("delta must be even and positive, got {delta}")));
        }
        if buffer_d % 2 != 1 {
            return Err(Error::Schedule(format!("buffer length must be odd, got {buffer_d}")));
        }
        if axis == Axis::Z && buffer_d < 3 {
            return Err(Error::Schedule(format!("z rotations start at site 3 or later")));
        }
        if !gamma.is_finite() || !beta_log.is_finite() {
            return Err(Error::Schedule(format!("angles must be finite")));
        }
        Ok(Self { axis, m, delta, buffer_d, gamma, beta_log })
    }

    pub fn sites(&self) -> Vec<usize> {
        let s0 = self.axis.first_site(self.buffer_d);
        (0..self.m).map(|k| s0 + k * self.delta).collect()
    }

    /// Largest admissible rotation site on an N-site chain.
    pub fn last_allowed(&self, n: usize) -> usize {
        match self.axis {
            Axis::Z => n - 2,
            Axis::X => n - 1,
        }
    }

    pub fn fits(&self, n: usize) -> bool {
        self.sites().last().is_none_or(|&s| s <= self.last_allowed(n))
    }

    pub fn check_fits(&self, n: usize) -> Result<()> {
        if self.fits(n) {
            Ok(())
        } else {
            Err(Error::Schedule(format!(
                "rotation sites {:?} do not fit a chain of {n} sites",
                self.sites()
            )))
        }
    }

    pub fn target(&self) -> Matrix3<f64> {
        target_rotation(self.axis, self.beta_log)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogicalChannel {
    pub matrix: Matrix3<f64>,
    pub gm: Complex64,
    pub d_m: f64,
    pub beta_effective: f64,
    /// `<prod_k (cos g + i sin g K_k)>`.
    pub expectation: Complex64,
}

pub fn target_rotation(axis: Axis, beta: f64) -> Matrix3<f64> {
    let (s, c) = beta.sin_cos();
    match axis {
        Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
    }
}

/// Rotation block built from `E = C + iS`.
fn rotation_from(axis: Axis, e: Complex64) -> Matrix3<f64> {
    let (c, s) = (e.re, e.im);
    match axis {
        Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
    }
}

/// Embeds a unital 3x3 Pauli transfer block into the 4x4 form.
pub fn unital_4x4(m: &Matrix3<f64>) -> Matrix4<f64> {
    let mut out = Matrix4::identity();
    out.fixed_view_mut::<3, 3>(1, 1).copy_from(m);
    out
}

/// `sqrt(2 tr((M - R)^T (M - R)))`.
pub fn decoherence(m: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<f64> {
    if m.shape() != r.shape() {
        return Err(Error::ShapeMismatch { left: m.len(), right: r.len() });
    }
    if !matches!(m.shape(), (3, 3) | (4, 4)) {
        return Err(Error::Domain(format!("channel must be 3x3 or 4x4, got {:?}", m.shape())));
    }
    Ok((2.0 * (m - r).norm_squared()).sqrt())
}

pub fn decoherence3(m: &Matrix3<f64>, r: &Matrix3<f64>) -> f64 {
    (2.0 * (m - r).norm_squared()).sqrt()
}

/// `1 - <X>^2 - <Y>^2 - <Z>^2`.
pub fn purity_loss(e: [f64; 3]) -> f64 {
    1.0 - e.iter().map(|v| v * v).sum::<f64>()
}

/// Logical Bloch vector after two rotation sites with bare angles.
pub fn two_site_closed_form(k_geq_k: f64, k_geq_l: f64, k_pair: f64, beta_k: f64, beta_l: f64) -> [f64; 3] {
    let (sk, ck) = beta_k.sin_cos();
    let (sl, cl) = beta_l.sin_cos();
    [ck * cl - sk * sl * k_pair, sk * cl * k_geq_k + sl * ck * k_geq_l, 0.0]
}

fn check_state(state: &GroundState, schedule: &RotationSchedule) -> Result<()> {
    state.require_converged()?;
    schedule.check_fits(state.n_sites())
}

fn strings(schedule: &RotationSchedule, n: usize) -> Result<Vec<PauliString>> {
    schedule.sites().iter().map(|&s| string_order_geq(s, n)).collect()
}

/// Subset expansion: sum over T of `c^(m-|T|) (i s)^|T| <prod_{k in T} K_k>`,
/// walked in Gray-code order.
fn subset_expansion(state: &GroundState, schedule: &RotationSchedule) -> Result<Complex64> {
    let m = schedule.m;
    if m > SUBSET_MAX_M {
        return Err(Error::Capacity(format!("subset expansion limited to m <= {SUBSET_MAX_M}, got {m}")));
    }
    let n = state.n_sites();
    let ks = strings(schedule, n)?;
    let (s, c) = schedule.gamma.sin_cos();
    let i_s = Complex64::new(0.0, s);
    let mut prod = PauliString::identity(n);
    let mut included = vec![false; m];
    let mut size = 0usize;
    let mut total = Complex64::new(c.powi(m as i32), 0.0);
    for g in 1u64..(1u64 << m) {
        let bit = g.trailing_zeros() as usize;
        prod = prod.try_mul(&ks[bit])?;
        included[bit] = !included[bit];
        if included[bit] {
            size += 1;
        } else {
            size -= 1;
        }
        let w = c.powi((m - size) as i32) * i_s.powu(size as u32);
        total += w * state.expectation_complex(&prod)?;
    }
    Ok(total)
}

/// Parity-network evaluation of the same product.
fn network(state: &GroundState, schedule: &RotationSchedule) -> Result<Complex64> {
    let n = state.n_sites();
    let (s, c) = schedule.gamma.sin_cos();
    match &state.representation {
        Representation::Dense(psi) => {
            let mut phi = psi.clone();
            for k in strings(schedule, n)? {
                let kphi = dense::apply_pauli(&k, &phi)?;
                for (a, b) in phi.iter_mut().zip(kphi) {
                    *a = *a * c + b * Complex64::new(0.0, s);
                }
            }
            Ok(dense::inner(psi, &phi))
        }
        Representation::Mps(m) => Ok(mps_network(m, schedule, c, s)),
    }
}

fn mps_network(m: &CanonicalMps, schedule: &RotationSchedule, c: f64, s: f64) -> Complex64 {
    let sites = schedule.sites();
    let Some(&first) = sites.first() else {
        return Complex64::new(1.0, 0.0);
    };
    let n = m.n_sites();
    let parity = schedule.axis.parity();
    // env[p] = (re, im) for an even (p = 0) or odd (p = 1) number of strings opened
    let dl = m.tensor(first).dl;
    let mut eye = vec![0.0; dl * dl];
    (0..dl).for_each(|i| eye[i * dl + i] = 1.0);
    let mut env = [(eye, vec![0.0; dl * dl]), (vec![0.0; dl * dl], vec![0.0; dl * dl])];
    let mut next_rot = sites.iter().peekable();
    let id = real_letter(Pauli::I);
    let z = real_letter(Pauli::Z);
    for j in first..=n {
        let a = m.tensor(j);
        let size = a.dr * a.dr;
        let mut out = [(vec![0.0; size], vec![0.0; size]), (vec![0.0; size], vec![0.0; size])];
        if next_rot.peek() == Some(&&j) {
            next_rot.next();
            for p in 0..2 {
                let q = 1 - p;
                let (re, im) = &mut out[p];
                transfer_left_into(Some(&env[p].0), a, &id, c, re);
                transfer_left_into(Some(&env[q].1), a, &z, -s, re);
                transfer_left_into(Some(&env[p].1), a, &id, c, im);
                transfer_left_into(Some(&env[q].0), a, &z, s, im);
            }
        } else {
            for p in 0..2 {
                let letter = if p == 0 {
                    Pauli::I
                } else if !parity.contains(j) {
                    Pauli::X
                } else if j == n {
                    Pauli::Z
                } else {
                    Pauli::I
                };
                let entries = real_letter(letter);
                let (re, im) = &mut out[p];
                transfer_left_into(Some(&env[p].0), a, &entries, 1.0, re);
                transfer_left_into(Some(&env[p].1), a, &entries, 1.0, im);
            }
        }
        env = out;
    }
    Complex64::new(env[0].0[0] + env[1].0[0], env[0].1[0] + env[1].1[0])
}

/// `<prod_k (cos g + i sin g K_{>=s_k})>` along the chosen path.
pub fn string_product_expectation(
    state: &GroundState,
    schedule: &RotationSchedule,
    path: EvalPath,
) -> Result<Complex64> {
    check_state(state, schedule)?;
    match path {
        EvalPath::SubsetOnly => subset_expansion(state, schedule),
        EvalPath::NetworkOnly => network(state, schedule),
        EvalPath::Auto if schedule.m <= AUTO_SUBSET_MAX_M => subset_expansion(state, schedule),
        EvalPath::Auto => network(state, schedule),
    }
}

pub fn channel_matrix(state: &GroundState, schedule: &RotationSchedule) -> Result<LogicalChannel> {
    channel_matrix_with(state, schedule, EvalPath::Auto)
}

pub fn channel_matrix_with(state: &GroundState, schedule: &RotationSchedule, path: EvalPath) -> Result<LogicalChannel> {
    let e = string_product_expectation(state, schedule, path)?;
    let matrix = rotation_from(schedule.axis, e);
    let gm = Complex64::from_polar(1.0, -schedule.beta_log) * e - 1.0;
    let beta_effective = match schedule.axis {
        Axis::Z => matrix[(1, 0)].atan2(matrix[(0, 0)]),
        Axis::X => matrix[(2, 1)].atan2(matrix[(1, 1)]),
    };
    Ok(LogicalChannel {
        d_m: decoherence3(&matrix, &schedule.target()),
        matrix,
        gm,
        beta_effective,
        expectation: e,
    })
}

/// `G_m = e^{-i beta_log} <prod_k e^{i g K_k}> - 1`.
pub fn gm_exact(state: &GroundState, schedule: &RotationSchedule) -> Result<Complex64> {
    Ok(channel_matrix(state, schedule)?.gm)
}

/// `(<X>, <Y>)` of the logical output for a `|+>` input.
pub fn plus_state_product_formula(state: &GroundState, schedule: &RotationSchedule) -> Result<(f64, f64)> {
    let ch = channel_matrix(state, schedule)?;
    Ok((ch.matrix[(0, 0)], ch.matrix[(1, 0)]))
}
