//! Two-site DMRG for real Hamiltonians.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::linalg::{gemm, matmul, svd_truncated, View};
use crate::mpo::{Mpo, MpoSite, DONE, START};
use crate::mps::{real_letter, transfer_left_into, transfer_right_into, CanonicalMps, Mps, Tensor3};

#[derive(Clone, Debug, PartialEq)]
pub struct DmrgOptions {
    pub chi_max: usize,
    /// Bond dimensions for the first sweeps before `chi_max` applies.
    pub chi_ramp: Vec<usize>,
    pub n_sweeps: usize,
    pub energy_tol: f64,
    pub lanczos_tol: f64,
    pub lanczos_max_iter: usize,
    pub krylov_dim: usize,
    /// Relative discarded weight allowed per truncation.
    pub svd_cutoff: f64,
}

impl Default for DmrgOptions {
    fn default() -> Self {
        Self {
            chi_max: 64,
            chi_ramp: vec![16, 32, 64],
            n_sweeps: 30,
            energy_tol: 1e-10,
            lanczos_tol: 1e-10,
            lanczos_max_iter: 10,
            krylov_dim: 10,
            svd_cutoff: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DmrgOutcome {
    pub state: CanonicalMps,
    pub energy: f64,
    pub sweep_energies: Vec<f64>,
    /// Largest relative discarded weight in the final sweep.
    pub truncation_error: f64,
    /// Largest local eigensolver residual in the final sweep.
    pub local_residual: f64,
}

#[derive(Clone, Debug)]
enum Block {
    Zero,
    Identity,
    Dense(Vec<f64>),
}

impl Block {
    fn env(&self) -> Option<Option<&[f64]>> {
        match self {
            Block::Zero => None,
            Block::Identity => Some(None),
            Block::Dense(v) => Some(Some(v)),
        }
    }
}

fn left_step(prev: &[Block], a: &Tensor3, w: &MpoSite) -> Vec<Block> {
    let mut out: Vec<Option<Vec<f64>>> = vec![None; w.wr];
    for e in &w.entries {
        if e.to == START {
            continue;
        }
        let Some(env) = prev[e.from].env() else { continue };
        let buf = out[e.to].get_or_insert_with(|| vec![0.0; a.dr * a.dr]);
        transfer_left_into(env, a, &real_letter(e.letter), e.coef, buf);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, b)| match b {
            _ if i == START => Block::Identity,
            Some(v) => Block::Dense(v),
            None => Block::Zero,
        })
        .collect()
}

fn right_step(next: &[Block], a: &Tensor3, w: &MpoSite) -> Vec<Block> {
    let mut out: Vec<Option<Vec<f64>>> = vec![None; w.wl];
    for e in &w.entries {
        if e.from == DONE {
            continue;
        }
        let Some(env) = next[e.to].env() else { continue };
        let buf = out[e.from].get_or_insert_with(|| vec![0.0; a.dl * a.dl]);
        transfer_right_into(env, a, &real_letter(e.letter), e.coef, buf);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, b)| match b {
            _ if i == DONE => Block::Identity,
            Some(v) => Block::Dense(v),
            None => Block::Zero,
        })
        .collect()
}

/// `y += H_eff theta` for the two-site block `theta[l][s1][s2][r]`.
struct TwoSite<'a> {
    dl: usize,
    dr: usize,
    left: &'a [Block],
    w1: &'a MpoSite,
    w2: &'a MpoSite,
    right: &'a [Block],
}

impl TwoSite<'_> {
    fn apply(&self, theta: &[f64], y: &mut [f64]) {
        let (dl, dr) = (self.dl, self.dr);
        let len = dl * 4 * dr;
        // theta contracted with the right environments
        let mut u: Vec<Option<Vec<f64>>> = vec![None; self.w2.wr];
        let mut u_is_theta = vec![false; self.w2.wr];
        for e in &self.w2.entries {
            let c = e.to;
            if u[c].is_some() || u_is_theta[c] {
                continue;
            }
            match &self.right[c] {
                Block::Zero => {}
                Block::Identity => u_is_theta[c] = true,
                Block::Dense(r) => {
                    let m = matmul(
                        View::row_major(theta, 4 * dl, dr),
                        View::row_major(r, dr, dr).t(),
                    );
                    u[c] = Some(m);
                }
            }
        }
        // apply second-site letters
        let mut v: Vec<Option<Vec<f64>>> = vec![None; self.w2.wl];
        for e in &self.w2.entries {
            let src: &[f64] = if u_is_theta[e.to] {
                theta
            } else if let Some(x) = &u[e.to] {
                x
            } else {
                continue;
            };
            if matches!(self.left_reach(e.from), false) {
                continue;
            }
            let dst = v[e.from].get_or_insert_with(|| vec![0.0; len]);
            for (sp, s, val) in real_letter(e.letter) {
                let c = e.coef * val;
                for ls1 in 0..dl * 2 {
                    let o = (ls1 * 2 + sp) * dr;
                    let i = (ls1 * 2 + s) * dr;
                    for r in 0..dr {
                        dst[o + r] += c * src[i + r];
                    }
                }
            }
        }
        // apply first-site letters
        let mut x: Vec<Option<Vec<f64>>> = vec![None; self.w1.wl];
        for e in &self.w1.entries {
            let Some(src) = &v[e.to] else { continue };
            if matches!(self.left[e.from], Block::Zero) {
                continue;
            }
            let dst = x[e.from].get_or_insert_with(|| vec![0.0; len]);
            let blk = 2 * dr;
            for (sp, s, val) in real_letter(e.letter) {
                let c = e.coef * val;
                for l in 0..dl {
                    let o = (l * 2 + sp) * blk;
                    let i = (l * 2 + s) * blk;
                    for k in 0..blk {
                        dst[o + k] += c * src[i + k];
                    }
                }
            }
        }
        // left environments
        for (a, xa) in x.iter().enumerate() {
            let Some(xa) = xa else { continue };
            match &self.left[a] {
                Block::Zero => {}
                Block::Identity => {
                    for (yi, xi) in y.iter_mut().zip(xa) {
                        *yi += xi;
                    }
                }
                Block::Dense(l) => gemm(
                    1.0,
                    View::row_major(l, dl, dl),
                    View::row_major(xa, dl, 4 * dr),
                    1.0,
                    y,
                ),
            }
        }
    }

    fn left_reach(&self, b: usize) -> bool {
        self.w1
            .entries
            .iter()
            .any(|e| e.to == b && !matches!(self.left[e.from], Block::Zero))
    }
}

/// Runs DMRG from `init`. Fails with [`Error::Convergence`] if the energy
/// change never drops below `energy_tol` within `n_sweeps` full sweeps.
pub fn dmrg(mpo: &Mpo, init: Mps, opts: &DmrgOptions) -> Result<DmrgOutcome> {
    let n = mpo.n_sites();
    if n < 3 {
        return Err(Error::InvalidChain(alloc::format!("DMRG needs at least 3 sites, got {n}")));
    }
    if init.n_sites() != n {
        return Err(Error::ShapeMismatch { left: n, right: init.n_sites() });
    }
    if opts.chi_max < 2 || opts.n_sweeps == 0 {
        return Err(Error::InvalidParams(alloc::format!(
            "chi_max >= 2 and n_sweeps >= 1 required"
        )));
    }
    init.validate()?;
    let mut mps = init;
    mps.left_canonicalize();

    let mut left: Vec<Vec<Block>> = vec![Vec::new(); n + 1];
    let mut right: Vec<Vec<Block>> = vec![Vec::new(); n + 1];
    left[0] = (0..mpo.sites[0].wl)
        .map(|i| if i == START { Block::Identity } else { Block::Zero })
        .collect();
    right[n] = (0..mpo.sites[n - 1].wr)
        .map(|i| if i == DONE { Block::Identity } else { Block::Zero })
        .collect();
    for j in 0..n - 1 {
        left[j + 1] = left_step(&left[j], &mps.tensors[j], &mpo.sites[j]);
    }

    let lopts = LanczosOptions {
        tol: opts.lanczos_tol,
        max_iter: opts.lanczos_max_iter,
        krylov_dim: opts.krylov_dim,
    };
    let mut energies: Vec<f64> = Vec::new();
    let mut energy = f64::INFINITY;

    for sweep in 0..opts.n_sweeps {
        let chi = opts.chi_ramp.get(sweep).copied().unwrap_or(opts.chi_max).min(opts.chi_max);
        let mut trunc: f64 = 0.0;
        let mut resid: f64 = 0.0;
        // right to left, then left to right
        for (dir_right, bonds) in [
            (false, (0..n - 1).rev().collect::<Vec<_>>()),
            (true, (0..n - 1).collect::<Vec<_>>()),
        ] {
            for j in bonds {
                let a1 = &mps.tensors[j];
                let a2 = &mps.tensors[j + 1];
                let (dl, dr) = (a1.dl, a2.dr);
                let theta = matmul(a1.left_matrix(), a2.right_matrix());
                let op = TwoSite {
                    dl,
                    dr,
                    left: &left[j],
                    w1: &mpo.sites[j],
                    w2: &mpo.sites[j + 1],
                    right: &right[j + 2],
                };
                let res = lowest_eigenpair(|x, y| op.apply(x, y), &theta, &[], &lopts);
                energy = res.value;
                resid = resid.max(res.residual);
                let t = svd_truncated(&res.vector, 2 * dl, 2 * dr, chi, opts.svd_cutoff);
                trunc = trunc.max(t.discarded);
                let k = t.rank;
                let nrm = t.s.iter().map(|x| x * x).sum::<f64>().sqrt();
                if dir_right {
                    let mut sv = t.vt;
                    for r in 0..k {
                        let f = t.s[r] / nrm;
                        sv[r * 2 * dr..(r + 1) * 2 * dr].iter_mut().for_each(|x| *x *= f);
                    }
                    mps.tensors[j] = Tensor3 { dl, dr: k, data: t.u };
                    mps.tensors[j + 1] = Tensor3 { dl: k, dr, data: sv };
                    left[j + 1] = left_step(&left[j], &mps.tensors[j], &mpo.sites[j]);
                } else {
                    let mut us = t.u;
                    for row in 0..2 * dl {
                        for r in 0..k {
                            us[row * k + r] *= t.s[r] / nrm;
                        }
                    }
                    mps.tensors[j] = Tensor3 { dl, dr: k, data: us };
                    mps.tensors[j + 1] = Tensor3 { dl: k, dr, data: t.vt };
                    right[j + 1] = right_step(&right[j + 2], &mps.tensors[j + 1], &mpo.sites[j + 1]);
                }
            }
        }
        let prev = energies.last().copied();
        energies.push(energy);
        let at_full = chi == opts.chi_max || sweep >= opts.chi_ramp.len();
        if let Some(p) = prev {
            if at_full && sweep >= 1 && (p - energy).abs() < opts.energy_tol {
                return Ok(DmrgOutcome {
                    state: CanonicalMps::from_left_canonical(mps),
                    energy,
                    sweep_energies: energies,
                    truncation_error: trunc,
                    local_residual: resid,
                });
            }
        }
    }
    let k = energies.len();
    Err(Error::Convergence {
        best_residual: (energies[k - 1] - energies[k.saturating_sub(2)]).abs(),
        last_energies: if k >= 2 { Some((energies[k - 2], energies[k - 1])) } else { None },
    })
}

/// `<psi|H|psi>` for a state whose sites 1..N-1 are left-canonical.
pub fn mpo_expectation(state: &CanonicalMps, mpo: &Mpo) -> f64 {
    let mps = state.mps();
    let n = mps.n_sites();
    let mut env: Vec<Block> = (0..mpo.sites[0].wl)
        .map(|i| if i == START { Block::Identity } else { Block::Zero })
        .collect();
    for j in 0..n - 1 {
        env = left_step(&env, &mps.tensors[j], &mpo.sites[j]);
    }
    let last = &mps.tensors[n - 1];
    let w = &mpo.sites[n - 1];
    let mut out = vec![0.0; 1];
    for e in &w.entries {
        if e.to != DONE {
            continue;
        }
        let Some(block) = env[e.from].env() else { continue };
        transfer_left_into(block, last, &real_letter(e.letter), e.coef, &mut out);
    }
    out[0]
}
