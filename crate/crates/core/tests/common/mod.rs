#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// H(alpha) built directly from bit operations, site i on bit i-1.
pub fn dense_hamiltonian(n: usize, alpha: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    let bit = |b: usize, site: usize| (b >> (site - 1)) & 1;
    let mut h = DMatrix::zeros(dim, dim);
    let (c, s) = (alpha.cos(), alpha.sin());
    for b in 0..dim {
        for i in 1..=n {
            let mut parity = 0;
            if i > 1 {
                parity ^= bit(b, i - 1);
            }
            if i < n {
                parity ^= bit(b, i + 1);
            }
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            h[(b ^ (1 << (i - 1)), b)] -= c * sign;
            if i > 1 && i < n {
                h[(b ^ (1 << (i - 1)), b)] -= s;
            }
        }
    }
    h
}

pub fn ground_vector(n: usize, alpha: f64) -> (f64, DVector<f64>) {
    let eig = dense_hamiltonian(n, alpha).symmetric_eigen();
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

/// `<psi| prod X_x Z_z |psi>` for real psi; `xs`, `zs` are 1-based sites.
pub fn xz_expectation(psi: &DVector<f64>, xs: &[usize], zs: &[usize]) -> f64 {
    let xm: usize = xs.iter().map(|s| 1 << (s - 1)).sum();
    let zm: usize = zs.iter().map(|s| 1 << (s - 1)).sum();
    (0..psi.len())
        .map(|b| {
            let sign = if (b & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            psi[b ^ xm] * sign * psi[b]
        })
        .sum()
}

/// Sites of `Z_k X_{k+1} X_{k+3} .. Z_l` (or the open tail when `l` is None).
pub fn string_sites(k: usize, l: Option<usize>, n: usize) -> (Vec<usize>, Vec<usize>) {
    match l {
        Some(l) => ((k + 1..l).step_by(2).collect(), vec![k, l]),
        None if k % 2 == 1 => ((k + 1..n).step_by(2).collect(), vec![k, n]),
        None => ((k + 1..=n).step_by(2).collect(), vec![k]),
    }
}

/// `y = H x` without storing H.
pub fn apply_hamiltonian(n: usize, alpha: f64, x: &[f64], y: &mut [f64]) {
    let (c, s) = (alpha.cos(), alpha.sin());
    y.iter_mut().for_each(|v| *v = 0.0);
    for b in 0..x.len() {
        for i in 1..=n {
            let mut nb = 0;
            if i > 1 {
                nb |= 1 << (i - 2);
            }
            if i < n {
                nb |= 1 << i;
            }
            let sign = if (b & nb).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let mut w = c * sign;
            if i > 1 && i < n {
                w += s;
            }
            y[b ^ (1 << (i - 1))] -= w * x[b];
        }
    }
}

/// Lowest eigenpair from a fully reorthogonalized Krylov space.
pub fn sparse_ground_vector(n: usize, alpha: f64, krylov: usize) -> (f64, DVector<f64>) {
    let dim = 1usize << n;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut v: Vec<f64> = (0..dim).map(|b| 1.0 + ((b * 7919) % 13) as f64 / 13.0).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut t = DMatrix::zeros(krylov, krylov);
    let mut w = vec![0.0; dim];
    for j in 0..krylov {
        basis.push(v.clone());
        apply_hamiltonian(n, alpha, &v, &mut w);
        for (i, q) in basis.iter().enumerate() {
            let h: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
            if i + 1 >= j {
                t[(i, j)] = h;
                t[(j, i)] = h;
            }
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= h * b);
        }
        for q in &basis {
            let h: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= h * b);
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta < 1e-13 || j + 1 == krylov {
            let m = j + 1;
            let eig = t.view((0, 0), (m, m)).into_owned().symmetric_eigen();
            let i = eig.eigenvalues.imin();
            let mut psi = DVector::zeros(dim);
            for (k, q) in basis.iter().enumerate() {
                psi += DVector::from_column_slice(q) * eig.eigenvectors[(k, i)];
            }
            let nrm = psi.norm();
            return (eig.eigenvalues[i], psi / nrm);
        }
        v = w.iter().map(|x| x / beta).collect();
    }
    unreachable!()
}
