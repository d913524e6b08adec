//! Real matrix product states with physical dimension 2.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{gemm, matmul, qr_thin, View};
use crate::pauli::{Pauli, PauliString, Phase};

/// Site tensor `A[l][s][r]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub dl: usize,
    pub dr: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dl: usize, dr: usize) -> Self {
        Self {
            dl,
            dr,
            data: vec![0.0; dl * 2 * dr],
        }
    }

    #[inline]
    pub fn at(&self, l: usize, s: usize, r: usize) -> f64 {
        self.data[(l * 2 + s) * self.dr + r]
    }

    /// The `dl x dr` slice for physical index `s`.
    pub(crate) fn slice(&self, s: usize) -> View<'_> {
        View {
            data: &self.data[s * self.dr..],
            rows: self.dl,
            cols: self.dr,
            rs: 2 * self.dr,
            cs: 1,
        }
    }

    /// As a `(2 dl) x dr` matrix.
    pub(crate) fn left_matrix(&self) -> View<'_> {
        View::row_major(&self.data, 2 * self.dl, self.dr)
    }

    /// As a `dl x (2 dr)` matrix.
    pub(crate) fn right_matrix(&self) -> View<'_> {
        View::row_major(&self.data, self.dl, 2 * self.dr)
    }
}

/// Nonzero entries `<s'|op|s>` of a Pauli letter as a real matrix. `Y` is
/// stored as `-iY = [[0,-1],[1,0]]`; callers account for the factor `i`.
pub(crate) fn real_letter(p: Pauli) -> [(usize, usize, f64); 2] {
    match p {
        Pauli::I => [(0, 0, 1.0), (1, 1, 1.0)],
        Pauli::X => [(0, 1, 1.0), (1, 0, 1.0)],
        Pauli::Z => [(0, 0, 1.0), (1, 1, -1.0)],
        Pauli::Y => [(0, 1, -1.0), (1, 0, 1.0)],
    }
}

/// Environment block: `None` stands for the identity.
pub(crate) type Env<'a> = Option<&'a [f64]>;

/// `out[r', r] += c * sum_{s',s} op[s'][s] (A_{s'}^T E A_s)[r', r]`.
pub(crate) fn transfer_left_into(
    env: Env<'_>,
    a: &Tensor3,
    entries: &[(usize, usize, f64)],
    c: f64,
    out: &mut [f64],
) {
    let mut t: [Option<Vec<f64>>; 2] = [None, None];
    for &(_, s, _) in entries {
        if t[s].is_none() {
            t[s] = Some(match env {
                None => Vec::new(),
                Some(e) => matmul(View::row_major(e, a.dl, a.dl), a.slice(s)),
            });
        }
    }
    for &(sp, s, v) in entries {
        let ts = t[s].as_ref().unwrap();
        let tv = match env {
            None => a.slice(s),
            Some(_) => View::row_major(ts, a.dl, a.dr),
        };
        gemm(c * v, a.slice(sp).t(), tv, 1.0, out);
    }
}

pub(crate) fn transfer_left(env: Env<'_>, a: &Tensor3, p: Pauli) -> Vec<f64> {
    let mut out = vec![0.0; a.dr * a.dr];
    transfer_left_into(env, a, &real_letter(p), 1.0, &mut out);
    out
}

/// `out[l', l] += c * sum_{s',s} op[s'][s] (A_{s'} E A_s^T)[l', l]`.
pub(crate) fn transfer_right_into(
    env: Env<'_>,
    a: &Tensor3,
    entries: &[(usize, usize, f64)],
    c: f64,
    out: &mut [f64],
) {
    let mut u: [Option<Vec<f64>>; 2] = [None, None];
    for &(sp, _, _) in entries {
        if u[sp].is_none() {
            u[sp] = Some(match env {
                None => Vec::new(),
                Some(e) => matmul(a.slice(sp), View::row_major(e, a.dr, a.dr)),
            });
        }
    }
    for &(sp, s, v) in entries {
        let us = u[sp].as_ref().unwrap();
        let uv = match env {
            None => a.slice(sp),
            Some(_) => View::row_major(us, a.dl, a.dr),
        };
        gemm(c * v, uv, a.slice(s).t(), 1.0, out);
    }
}

pub(crate) fn transfer_right(env: Env<'_>, a: &Tensor3, p: Pauli) -> Vec<f64> {
    let mut out = vec![0.0; a.dl * a.dl];
    transfer_right_into(env, a, &real_letter(p), 1.0, &mut out);
    out
}

pub(crate) fn frobenius_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    pub tensors: Vec<Tensor3>,
}

impl Mps {
    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors.iter().skip(1).map(|t| t.dl).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tensors.is_empty() {
            return Err(Error::InvalidChain(format!("empty MPS")));
        }
        let n = self.tensors.len();
        if self.tensors[0].dl != 1 || self.tensors[n - 1].dr != 1 {
            return Err(Error::Representation(format!("MPS boundary bonds must be 1")));
        }
        for (i, w) in self.tensors.windows(2).enumerate() {
            if w[0].dr != w[1].dl {
                return Err(Error::Representation(format!("bond mismatch after site {}", i + 1)));
            }
        }
        for t in &self.tensors {
            if t.data.len() != t.dl * 2 * t.dr {
                return Err(Error::Representation(format!("tensor buffer size mismatch")));
            }
        }
        Ok(())
    }

    /// The ideal cluster state `prod CZ |+>^N`, bond dimension 2.
    pub fn cluster_state(n: usize) -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let mut tensors = Vec::with_capacity(n);
        for i in 0..n {
            let dl = if i == 0 { 1 } else { 2 };
            let dr = if i + 1 == n { 1 } else { 2 };
            let mut t = Tensor3::zeros(dl, dr);
            for a in 0..dl {
                for s in 0..2 {
                    let sign = if a * s == 1 { -1.0 } else { 1.0 };
                    let r = if dr == 1 { 0 } else { s };
                    t.data[(a * 2 + s) * dr + r] = sign * h;
                }
            }
            tensors.push(t);
        }
        Self { tensors }
    }

    /// The cluster state embedded in bond dimension `chi` with a small
    /// deterministic perturbation on every entry.
    pub fn perturbed_cluster_state(n: usize, chi: usize, noise: f64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base = Self::cluster_state(n);
        let mut dims = vec![1usize; n + 1];
        for i in 1..n {
            let from_left = 1usize.checked_shl(i as u32).unwrap_or(usize::MAX);
            let from_right = 1usize.checked_shl((n - i) as u32).unwrap_or(usize::MAX);
            dims[i] = chi.max(2).min(from_left).min(from_right);
        }
        let tensors = base
            .tensors
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut out = Tensor3::zeros(dims[i], dims[i + 1]);
                for l in 0..out.dl {
                    for s in 0..2 {
                        for r in 0..out.dr {
                            let v = if l < t.dl && r < t.dr { t.at(l, s, r) } else { 0.0 };
                            out.data[(l * 2 + s) * out.dr + r] = v + noise * (rng.random::<f64>() - 0.5);
                        }
                    }
                }
                out
            })
            .collect();
        Self { tensors }
    }

    /// Brings sites 1..N-1 into left-canonical form and normalizes the last site.
    pub fn left_canonicalize(&mut self) {
        let n = self.tensors.len();
        for i in 0..n - 1 {
            let t = &self.tensors[i];
            let (q, r, k) = qr_thin(&t.data, 2 * t.dl, t.dr);
            let dl = t.dl;
            let old_dr = t.dr;
            self.tensors[i] = Tensor3 { dl, dr: k, data: q };
            let next = &self.tensors[i + 1];
            let merged = matmul(View::row_major(&r, k, old_dr), next.right_matrix());
            self.tensors[i + 1] = Tensor3 {
                dl: k,
                dr: next.dr,
                data: merged,
            };
        }
        let last = &mut self.tensors[n - 1];
        let nrm = last.data.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            last.data.iter_mut().for_each(|x| *x /= nrm);
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut env = vec![1.0];
        for t in &self.tensors {
            env = transfer_left(Some(&env), t, Pauli::I);
        }
        env[0]
    }

    /// Dense amplitudes, site i on bit i-1.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        let n = self.tensors.len();
        if n > crate::dense::MAX_DENSE_SITES {
            return Err(Error::Capacity(format!("to_dense limited to {} sites", crate::dense::MAX_DENSE_SITES)));
        }
        // rows: accumulated configurations of sites 1..i, as (bits, vector over bond)
        let mut cur: Vec<Vec<f64>> = vec![vec![1.0]];
        for (i, t) in self.tensors.iter().enumerate() {
            let mut next = vec![Vec::new(); cur.len() * 2];
            for (b, v) in cur.iter().enumerate() {
                for s in 0..2 {
                    let mut w = vec![0.0; t.dr];
                    for (l, &vl) in v.iter().enumerate() {
                        for r in 0..t.dr {
                            w[r] += vl * t.at(l, s, r);
                        }
                    }
                    next[b | (s << i)] = w;
                }
            }
            cur = next;
        }
        Ok(cur.into_iter().map(|v| v[0]).collect())
    }

    /// Exact MPS of a dense real vector by successive SVDs.
    pub fn from_dense(psi: &[f64], n: usize) -> Result<Self> {
        if psi.len() != 1usize << n {
            return Err(Error::ShapeMismatch {
                left: n,
                right: psi.len().trailing_zeros() as usize,
            });
        }
        // Reorder so site 1 is the most significant index of a row-major reshape.
        let mut rest: Vec<f64> = vec![0.0; psi.len()];
        for (b, &a) in psi.iter().enumerate() {
            let mut rev = 0usize;
            for i in 0..n {
                rev |= ((b >> i) & 1) << (n - 1 - i);
            }
            rest[rev] = a;
        }
        let mut tensors = Vec::with_capacity(n);
        let mut dl = 1usize;
        for i in 0..n {
            let cols = rest.len() / (dl * 2);
            if i + 1 == n {
                tensors.push(Tensor3 { dl, dr: 1, data: rest.clone() });
                break;
            }
            let t = crate::linalg::svd_truncated(&rest, dl * 2, cols, usize::MAX, 1e-28);
            tensors.push(Tensor3 {
                dl,
                dr: t.rank,
                data: t.u,
            });
            let mut sv = t.vt;
            for k in 0..t.rank {
                for j in 0..cols {
                    sv[k * cols + j] *= t.s[k];
                }
            }
            rest = sv;
            dl = t.rank;
        }
        Ok(Self { tensors })
    }
}

/// An MPS in left-canonical form together with its right identity
/// environments, ready for repeated expectation values.
#[derive(Clone, Debug)]
pub struct CanonicalMps {
    mps: Mps,
    right_env: Vec<Vec<f64>>,
}

impl CanonicalMps {
    /// Takes an MPS, left-canonicalizes it, and caches right environments.
    pub fn new(mut mps: Mps) -> Result<Self> {
        mps.validate()?;
        mps.left_canonicalize();
        Ok(Self::from_left_canonical(mps))
    }

    /// Trusts that sites 1..N-1 are already left-canonical.
    pub(crate) fn from_left_canonical(mps: Mps) -> Self {
        let n = mps.n_sites();
        let mut right_env = vec![Vec::new(); n + 1];
        right_env[n] = vec![1.0];
        for j in (0..n).rev() {
            right_env[j] = transfer_right(Some(&right_env[j + 1]), &mps.tensors[j], Pauli::I);
        }
        Self { mps, right_env }
    }

    /// Accepts an MPS whose sites 1..N-1 are left-canonical within `tol`.
    pub fn from_left_canonical_checked(mps: Mps, tol: f64) -> Result<Self> {
        mps.validate()?;
        let n = mps.n_sites();
        for (i, t) in mps.tensors[..n - 1].iter().enumerate() {
            let g = transfer_left(None, t, Pauli::I);
            for r in 0..t.dr {
                for c in 0..t.dr {
                    let want = if r == c { 1.0 } else { 0.0 };
                    if (g[r * t.dr + c] - want).abs() > tol {
                        return Err(Error::Representation(format!("site {} is not left-canonical", i + 1)));
                    }
                }
            }
        }
        Ok(Self::from_left_canonical(mps))
    }

    pub fn mps(&self) -> &Mps {
        &self.mps
    }

    pub fn into_mps(self) -> Mps {
        self.mps
    }

    pub fn n_sites(&self) -> usize {
        self.mps.n_sites()
    }

    pub(crate) fn tensor(&self, site: usize) -> &Tensor3 {
        &self.mps.tensors[site - 1]
    }

    /// Right identity environment at the bond after `site` (0 ..= N).
    pub(crate) fn right_identity(&self, site: usize) -> &[f64] {
        &self.right_env[site]
    }

    pub fn expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.n_sites() != self.n_sites() {
            return Err(Error::ShapeMismatch {
                left: self.n_sites(),
                right: p.n_sites(),
            });
        }
        let ny = p.count(Pauli::Y) as u8;
        let phase = (p.phase() * Phase::from_power(ny)).to_complex();
        let Some((first, last)) = p.span() else {
            return Ok(phase);
        };
        let mut env: Option<Vec<f64>> = None;
        for site in first..=last {
            env = Some(transfer_left(env.as_deref(), self.tensor(site), p.letter(site)));
        }
        let v = frobenius_dot(env.as_ref().unwrap(), self.right_identity(last));
        Ok(phase * v)
    }

    /// Real expectation of a Hermitian string.
    pub fn expectation_real(&self, p: &PauliString) -> Result<f64> {
        if !p.is_hermitian() {
            return Err(Error::NotHermitian(p.phase()));
        }
        Ok(self.expectation(p)?.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{cluster_stabilizer, symmetry_generators};

    #[test]
    fn cluster_state_stabilized() {
        let n = 7;
        let c = CanonicalMps::new(Mps::cluster_state(n)).unwrap();
        for i in 1..=n {
            let v = c.expectation(&cluster_stabilizer(i, n).unwrap()).unwrap();
            assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
        let (g0, g1) = symmetry_generators(n).unwrap();
        assert!((c.expectation_real(&g0).unwrap() - 1.0).abs() < 1e-12);
        assert!((c.expectation_real(&g1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_round_trip() {
        let n = 6;
        let psi: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 - 5.0) / 10.0).collect();
        let m = Mps::from_dense(&psi, n).unwrap();
        let back = m.to_dense().unwrap();
        for (a, b) in psi.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_matches_dense_with_y() {
        let n = 5;
        let psi: Vec<f64> = (0..32).map(|i| ((i * 13 % 7) as f64 - 3.0) / 4.0).collect();
        let nrm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let psi: Vec<f64> = psi.iter().map(|x| x / nrm).collect();
        let c = CanonicalMps::new(Mps::from_dense(&psi, n).unwrap()).unwrap();
        let dense: Vec<Complex64> = psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for text in ["+Y1 Y3", "+X2 Y4 Z5", "-Z1 X2 X4 Z5", "+i Y2", "+X1"] {
            let p = PauliString::parse(text, n).unwrap();
            let a = c.expectation(&p).unwrap();
            let b = crate::dense::expectation(&p, &dense).unwrap();
            assert!((a - b).norm() < 1e-12, "{text}: {a} vs {b}");
        }
    }
}
