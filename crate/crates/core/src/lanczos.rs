//! Restarted Lanczos with full reorthogonalization for the lowest eigenpair
//! of a real symmetric operator given as a matvec closure.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Target for `|H x - theta x|` with `|x| = 1`.
    pub tol: f64,
    /// Total matvec budget across restarts.
    pub max_iter: usize,
    /// Krylov dimension before an explicit restart.
    pub krylov_dim: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            krylov_dim: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn project_out(v: &mut [f64], basis: &[&[f64]]) {
    for b in basis {
        let c = dot(b, v);
        axpy(-c, b, v);
    }
}

fn lowest_tridiagonal(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let s = eig.eigenvectors.column(best).iter().copied().collect();
    (eig.eigenvalues[best], s)
}

/// Lowest eigenpair of `apply`, restricted to the orthogonal complement of
/// `deflate` (which must be orthonormal).
///
/// Never fails: on budget exhaustion the best Ritz pair is returned with
/// `converged = false`.
pub fn lowest_eigenpair<F>(
    mut apply: F,
    start: &[f64],
    deflate: &[&[f64]],
    opts: &LanczosOptions,
) -> LanczosResult
where
    F: FnMut(&[f64], &mut [f64]),
{
    let dim = start.len();
    let mut v = start.to_vec();
    project_out(&mut v, deflate);
    let mut nv = norm(&v);
    if nv < 1e-300 {
        // Degenerate start: fall back to a deterministic dense vector.
        v = (0..dim).map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract()).collect();
        project_out(&mut v, deflate);
        nv = norm(&v);
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let krylov = opts.krylov_dim.max(2).min(dim.max(1));
    let mut iterations = 0usize;
    let mut w = vec![0.0; dim];
    let mut best = LanczosResult {
        value: f64::INFINITY,
        vector: v.clone(),
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
    };

    loop {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut s;
        loop {
            let j = basis.len() - 1;
            w.iter_mut().for_each(|x| *x = 0.0);
            apply(&basis[j], &mut w);
            iterations += 1;
            project_out(&mut w, deflate);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // Two passes of Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    axpy(-c, b, &mut w);
                }
                project_out(&mut w, deflate);
            }
            let b = norm(&w);
            let check = alpha.len() <= 24 || alpha.len() % 4 == 0;
            let exhausted =
                basis.len() >= krylov || iterations >= opts.max_iter || b < 1e-14 * (1.0 + a.abs());
            if check || exhausted {
                let (_, sv) = lowest_tridiagonal(&alpha, &beta);
                s = sv;
                let estimate = b * s[s.len() - 1].abs();
                if exhausted || estimate < 0.1 * opts.tol {
                    break;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let mut x = vec![0.0; dim];
        for (coef, b) in s.iter().zip(&basis) {
            axpy(*coef, b, &mut x);
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|e| *e /= nx);
        w.iter_mut().for_each(|e| *e = 0.0);
        apply(&x, &mut w);
        iterations += 1;
        project_out(&mut w, deflate);
        let rq = dot(&x, &w);
        axpy(-rq, &x, &mut w);
        let residual = norm(&w);
        if residual < best.residual {
            best = LanczosResult {
                value: rq,
                vector: x.clone(),
                residual,
                iterations,
                converged: false,
            };
        }
        best.iterations = iterations;
        if residual <= opts.tol {
            best.converged = true;
            return best;
        }
        if iterations >= opts.max_iter {
            return best;
        }
        v = x;
    }
}
