//! Dense state vectors. Site i is bit i-1 of the basis index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

pub const MAX_DENSE_SITES: usize = 24;

/// Largest string promoted to an explicit matrix by [`pauli_matrix`].
pub const MAX_MATRIX_SITES: usize = 14;

/// A Pauli string compiled to bit masks: `P|b> = coef * (-1)^{|b & z|} |b ^ x>`.
#[derive(Clone, Copy, Debug)]
pub struct MaskedPauli {
    pub x: u64,
    pub z: u64,
    pub coef: Complex64,
}

impl MaskedPauli {
    pub fn new(p: &PauliString) -> Result<Self> {
        let (x, z) = p.masks()?;
        // Y = i X Z on a single site.
        let ny = p.count(Pauli::Y) as u8;
        let phase = p.phase() * crate::pauli::Phase::from_power(ny);
        Ok(Self {
            x,
            z,
            coef: phase.to_complex(),
        })
    }

    #[inline]
    pub fn sign(&self, b: usize) -> f64 {
        if (b as u64 & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn check_dim(n: usize, len: usize) -> Result<()> {
    if n > MAX_DENSE_SITES {
        return Err(Error::Capacity(format!(
            "dense representation limited to {MAX_DENSE_SITES} sites, got {n}"
        )));
    }
    if len != 1usize << n {
        return Err(Error::ShapeMismatch {
            left: n,
            right: len.trailing_zeros() as usize,
        });
    }
    Ok(())
}

/// `P |psi>`.
pub fn apply_pauli(p: &PauliString, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    check_dim(p.n_sites(), psi.len())?;
    let m = MaskedPauli::new(p)?;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (b, &a) in psi.iter().enumerate() {
        out[b ^ m.x as usize] = m.coef * m.sign(b) * a;
    }
    Ok(out)
}

/// `<psi|P|psi>` (complex in general).
pub fn expectation(p: &PauliString, psi: &[Complex64]) -> Result<Complex64> {
    check_dim(p.n_sites(), psi.len())?;
    let m = MaskedPauli::new(p)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, &a) in psi.iter().enumerate() {
        acc += psi[b ^ m.x as usize].conj() * a * m.sign(b);
    }
    Ok(acc * m.coef)
}

/// Explicit `2^N x 2^N` matrix of a Pauli string.
pub fn pauli_matrix(p: &PauliString) -> Result<nalgebra::DMatrix<Complex64>> {
    let n = p.n_sites();
    if n > MAX_MATRIX_SITES {
        return Err(Error::Capacity(format!("matrix promotion limited to {MAX_MATRIX_SITES} sites, got {n}")));
    }
    let m = MaskedPauli::new(p)?;
    let dim = 1usize << n;
    let mut out = nalgebra::DMatrix::zeros(dim, dim);
    for b in 0..dim {
        out[(b ^ m.x as usize, b)] = m.coef * m.sign(b);
    }
    Ok(out)
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Real symmetric operator `sum_t c_t P_t` acting on real vectors.
#[derive(Clone, Debug)]
pub struct RealPauliOperator {
    pub n_sites: usize,
    terms: Vec<(f64, u64, u64)>,
}

impl RealPauliOperator {
    pub fn new(h: &PauliSum) -> Result<Self> {
        if h.n_sites > MAX_DENSE_SITES {
            return Err(Error::Capacity(format!(
                "dense representation limited to {MAX_DENSE_SITES} sites, got {}",
                h.n_sites
            )));
        }
        let mut terms = Vec::with_capacity(h.terms.len());
        for (c, p) in &h.terms {
            let m = MaskedPauli::new(p)?;
            if m.coef.im != 0.0 {
                return Err(Error::Domain(format!("term {p} is not a real matrix")));
            }
            terms.push((c * m.coef.re, m.x, m.z));
        }
        Ok(Self {
            n_sites: h.n_sites,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// `y += H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for &(c, xm, zm) in &self.terms {
            let xm = xm as usize;
            let zm = zm as usize;
            for (b, &v) in x.iter().enumerate() {
                let s = if (b & zm).count_ones() % 2 == 0 { c } else { -c };
                y[b ^ xm] += s * v;
            }
        }
    }

    /// Dense matrix, for small test oracles.
    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        let d = self.dim();
        let mut m = nalgebra::DMatrix::<f64>::zeros(d, d);
        for &(c, xm, zm) in &self.terms {
            for b in 0..d {
                let s = if (b & zm as usize).count_ones() % 2 == 0 { c } else { -c };
                m[(b ^ xm as usize, b)] += s;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, b: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        v[b] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn single_site_action() {
        // |0> on two sites, X on site 2 gives bit 1 set.
        let x2 = PauliString::parse("+X2", 2).unwrap();
        let out = apply_pauli(&x2, &basis(2, 0)).unwrap();
        assert_eq!(out[2], Complex64::new(1.0, 0.0));
        let y1 = PauliString::parse("+Y1", 2).unwrap();
        let out = apply_pauli(&y1, &basis(2, 0)).unwrap();
        assert_eq!(out[1], Complex64::new(0.0, 1.0));
        let out = apply_pauli(&y1, &basis(2, 1)).unwrap();
        assert_eq!(out[0], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn product_matches_sequential_application() {
        let a = PauliString::parse("+X1 Y2 Z3", 3).unwrap();
        let b = PauliString::parse("+Y1 Y2 X3", 3).unwrap();
        let psi: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new(0.1 * i as f64 + 0.3, 0.05 * (i * i) as f64))
            .collect();
        let seq = apply_pauli(&a, &apply_pauli(&b, &psi).unwrap()).unwrap();
        let prod = apply_pauli(&(&a * &b), &psi).unwrap();
        for (u, v) in seq.iter().zip(&prod) {
            assert!((u - v).norm() < 1e-14);
        }
    }
}
