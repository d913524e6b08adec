use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{self, RealPauliOperator};
use crate::dmrg::{dmrg, DmrgOptions};
use crate::error::{Error, Result};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::mpo::Mpo;
use crate::mps::{CanonicalMps, Mps};
use crate::pauli::{cluster_hamiltonian, ChainSpec, PauliString, PauliSum};

/// Largest chain handled by [`solve_exact`].
pub const EXACT_MAX_SITES: usize = 16;
/// Largest chain [`solve`] hands to the exact path.
pub const AUTO_EXACT_SITES: usize = 13;

/// Matvec budget of the local eigensolver per DMRG bond update.
pub const DMRG_LOCAL_ITER: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub chi_max: usize,
    pub n_sweeps: usize,
    pub energy_tol: f64,
    pub lanczos_tol: f64,
    pub lanczos_max_iter: usize,
    /// Relative discarded weight per DMRG truncation.
    pub svd_cutoff: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            chi_max: 64,
            n_sweeps: 30,
            energy_tol: 1e-10,
            lanczos_tol: 1e-10,
            lanczos_max_iter: 500,
            svd_cutoff: 1e-14,
        }
    }
}

impl SolverParams {
    /// Defaults with the larger bond dimension near the phase boundary.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(format!("{what}")));
        if self.chi_max == 0 || self.n_sweeps == 0 || self.lanczos_max_iter == 0 {
            return bad("chi_max, n_sweeps and lanczos_max_iter must be positive");
        }
        for (name, v) in [("energy_tol", self.energy_tol), ("lanczos_tol", self.lanczos_tol)] {
            if !(v > 0.0 && v <= 1e-4) {
                return Err(Error::InvalidParams(format!("{name} = {v} must lie in (0, 1e-4]")));
            }
        }
        if !(self.svd_cutoff >= 0.0 && self.svd_cutoff < 1e-4) {
            return bad("svd_cutoff must lie in [0, 1e-4)");
        }
        Ok(())
    }

    fn dmrg_options(&self) -> DmrgOptions {
        let ramp = [16, 32, 64].into_iter().filter(|&c| c < self.chi_max).collect();
        DmrgOptions {
            chi_max: self.chi_max,
            chi_ramp: ramp,
            n_sweeps: self.n_sweeps,
            energy_tol: self.energy_tol,
            lanczos_tol: self.lanczos_tol,
            lanczos_max_iter: self.lanczos_max_iter.min(DMRG_LOCAL_ITER),
            krylov_dim: DMRG_LOCAL_ITER,
            svd_cutoff: self.svd_cutoff,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    Dense(Vec<Complex64>),
    Mps(CanonicalMps),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Convergence {
    pub converged: bool,
    /// `|H psi - E psi|` for dense states; largest local eigensolver
    /// residual of the final sweep for MPS.
    pub residual: f64,
    pub truncation_error: f64,
    pub sweep_energies: Vec<f64>,
    /// Spectral gap above the ground state (dense only).
    pub gap: Option<f64>,
    /// Set when the gap is below 1e-8.
    pub near_degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub spec: ChainSpec,
    pub representation: Representation,
    pub energy: f64,
    pub convergence: Convergence,
    pub params: SolverParams,
}

pub fn build_hamiltonian(spec: &ChainSpec) -> Result<PauliSum> {
    ChainSpec::new(spec.n_sites, spec.alpha)?;
    cluster_hamiltonian(spec)
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lanczos ground state of the sparse Hamiltonian for `N <= 16`.
pub fn solve_exact(spec: &ChainSpec, params: &SolverParams) -> Result<GroundState> {
    params.validate()?;
    let spec = ChainSpec::new(spec.n_sites, spec.alpha)?;
    if spec.n_sites > EXACT_MAX_SITES {
        return Err(Error::Capacity(format!(
            "exact solver limited to {EXACT_MAX_SITES} sites, got {}",
            spec.n_sites
        )));
    }
    let h = RealPauliOperator::new(&build_hamiltonian(&spec)?)?;
    let dim = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x00c1_u64 ^ spec.n_sites as u64);
    let start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let opts = LanczosOptions {
        tol: params.lanczos_tol,
        max_iter: params.lanczos_max_iter,
        krylov_dim: 80,
    };
    let ground = lowest_eigenpair(|x, y| h.apply(x, y), &start, &[], &opts);
    if !ground.converged {
        return Err(Error::Convergence {
            best_residual: ground.residual,
            last_energies: None,
        });
    }
    let gap = if dim > 1 {
        let gap_opts = LanczosOptions {
            tol: 1e-6,
            max_iter: params.lanczos_max_iter,
            krylov_dim: 80,
        };
        let excited = lowest_eigenpair(|x, y| h.apply(x, y), &start, &[&ground.vector], &gap_opts);
        Some(excited.value - ground.value)
    } else {
        None
    };
    let mut v = ground.vector;
    fix_sign(&mut v);
    Ok(GroundState {
        spec,
        representation: Representation::Dense(v.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
        energy: ground.value,
        convergence: Convergence {
            converged: true,
            residual: ground.residual,
            truncation_error: 0.0,
            sweep_energies: Vec::new(),
            gap,
            near_degenerate: gap.is_some_and(|g| g < 1e-8),
        },
        params: params.clone(),
    })
}

/// Two-site DMRG from a perturbed cluster state.
pub fn solve_dmrg(spec: &ChainSpec, params: &SolverParams) -> Result<GroundState> {
    params.validate()?;
    let spec = ChainSpec::new(spec.n_sites, spec.alpha)?;
    if spec.n_sites < 5 {
        return Err(Error::InvalidChain(format!(
            "DMRG path needs N >= 5, got {}",
            spec.n_sites
        )));
    }
    let mpo = Mpo::from_pauli_sum(&build_hamiltonian(&spec)?)?;
    let init = Mps::perturbed_cluster_state(spec.n_sites, 8.min(params.chi_max), 1e-3, spec.n_sites as u64);
    let out = dmrg(&mpo, init, &params.dmrg_options())?;
    let energy = crate::dmrg::mpo_expectation(&out.state, &mpo);
    Ok(GroundState {
        spec,
        representation: Representation::Mps(out.state),
        energy,
        convergence: Convergence {
            converged: true,
            residual: out.local_residual.max((energy - out.energy).abs()),
            truncation_error: out.truncation_error,
            sweep_energies: out.sweep_energies,
            gap: None,
            near_degenerate: false,
        },
        params: params.clone(),
    })
}

pub fn solve(spec: &ChainSpec, params: &SolverParams) -> Result<GroundState> {
    if spec.n_sites <= AUTO_EXACT_SITES {
        solve_exact(spec, params)
    } else {
        solve_dmrg(spec, params)
    }
}

impl GroundState {
    pub fn n_sites(&self) -> usize {
        self.spec.n_sites
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.representation, Representation::Dense(_))
    }

    pub fn dense_amplitudes(&self) -> Option<&[Complex64]> {
        match &self.representation {
            Representation::Dense(v) => Some(v),
            Representation::Mps(_) => None,
        }
    }

    pub fn mps(&self) -> Option<&CanonicalMps> {
        match &self.representation {
            Representation::Mps(m) => Some(m),
            Representation::Dense(_) => None,
        }
    }

    pub fn max_bond(&self) -> usize {
        match &self.representation {
            Representation::Dense(_) => 0,
            Representation::Mps(m) => m.mps().max_bond(),
        }
    }

    pub fn require_converged(&self) -> Result<()> {
        if self.convergence.converged {
            Ok(())
        } else {
            Err(Error::NotConverged)
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match &self.representation {
            Representation::Dense(v) => dense::norm_sqr(v),
            Representation::Mps(m) => m.mps().norm_sqr(),
        }
    }

    /// `<psi|P|psi>` without the Hermiticity requirement.
    pub fn expectation_complex(&self, op: &PauliString) -> Result<Complex64> {
        if op.n_sites() != self.n_sites() {
            return Err(Error::ShapeMismatch {
                left: self.n_sites(),
                right: op.n_sites(),
            });
        }
        match &self.representation {
            Representation::Dense(v) => dense::expectation(op, v),
            Representation::Mps(m) => m.expectation(op),
        }
    }

    pub fn expectation(&self, op: &PauliString) -> Result<f64> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian(op.phase()));
        }
        let v = self.expectation_complex(op)?;
        if v.im.abs() > 1e-10 {
            return Err(Error::ImaginaryExpectation(v.im));
        }
        Ok(v.re)
    }

    /// `<H>` recomputed from the state.
    pub fn energy_expectation(&self) -> Result<f64> {
        let h = build_hamiltonian(&self.spec)?;
        match &self.representation {
            Representation::Dense(_) => {
                let mut e = 0.0;
                for (c, p) in &h.terms {
                    e += c * self.expectation(p)?;
                }
                Ok(e)
            }
            Representation::Mps(m) => Ok(crate::dmrg::mpo_expectation(m, &Mpo::from_pauli_sum(&h)?)),
        }
    }
}

pub fn expectation(state: &GroundState, op: &PauliString) -> Result<f64> {
    state.expectation(op)
}

/// Dense real vector of a state, for tests and small-chain tooling.
pub fn dense_real(state: &GroundState) -> Result<Vec<f64>> {
    match &state.representation {
        Representation::Dense(v) => Ok(v.iter().map(|c| c.re).collect()),
        Representation::Mps(m) => m.mps().to_dense(),
    }
}
