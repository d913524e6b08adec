//! Small dense kernels on row-major `f64` buffers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

/// Strided view of a matrix inside a slice.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub rs: usize,
    pub cs: usize,
}

impl<'a> View<'a> {
    pub fn row_major(data: &'a [f64], rows: usize, cols: usize) -> Self {
        Self { data, rows, cols, rs: cols, cs: 1 }
    }

    pub fn t(self) -> Self {
        Self {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
        }
    }

    fn check(&self) {
        if self.rows > 0 && self.cols > 0 {
            let last = (self.rows - 1) * self.rs + (self.cols - 1) * self.cs;
            assert!(last < self.data.len(), "matrix view out of bounds");
        }
    }
}

/// `c = alpha * a * b + beta * c`, with `c` row-major `a.rows x b.cols`.
pub(crate) fn gemm(alpha: f64, a: View<'_>, b: View<'_>, beta: f64, c: &mut [f64]) {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    a.check();
    b.check();
    let (m, k, n) = (a.rows, a.cols, b.cols);
    assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c[..m * n].iter_mut().for_each(|x| *x *= beta);
        return;
    }
    // SAFETY: bounds of all three operands were checked above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub(crate) fn matmul(a: View<'_>, b: View<'_>) -> Vec<f64> {
    let mut c = vec![0.0; a.rows * b.cols];
    gemm(1.0, a, b, 0.0, &mut c);
    c
}

pub(crate) fn to_dmatrix(data: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub(crate) struct Truncated {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub vt: Vec<f64>,
    pub rank: usize,
    /// Sum of discarded squared singular values over the total.
    pub discarded: f64,
}

/// Truncated SVD of a row-major `rows x cols` matrix, keeping at most
/// `max_rank` values and dropping a tail whose relative weight is below
/// `cutoff`.
pub(crate) fn svd_truncated(
    data: &[f64],
    rows: usize,
    cols: usize,
    max_rank: usize,
    cutoff: f64,
) -> Truncated {
    let m = to_dmatrix(data, rows, cols);
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let total: f64 = sv.iter().map(|x| x * x).sum();
    let mut rank = sv.len().min(max_rank).max(1);
    let mut tail: f64 = sv[rank..].iter().map(|x| x * x).sum();
    while rank > 1 && (tail + sv[rank - 1] * sv[rank - 1]) <= cutoff * total {
        tail += sv[rank - 1] * sv[rank - 1];
        rank -= 1;
    }
    let mut uo = vec![0.0; rows * rank];
    for i in 0..rows {
        for (c, &k) in order[..rank].iter().enumerate() {
            uo[i * rank + c] = u[(i, k)];
        }
    }
    let mut vo = vec![0.0; rank * cols];
    for (r, &k) in order[..rank].iter().enumerate() {
        for j in 0..cols {
            vo[r * cols + j] = vt[(k, j)];
        }
    }
    Truncated {
        u: uo,
        s: sv[..rank].to_vec(),
        vt: vo,
        rank,
        discarded: if total > 0.0 { tail / total } else { 0.0 },
    }
}

/// Thin QR of a row-major `rows x cols` matrix: `(q, r, k)` with `k = min(rows, cols)`.
pub(crate) fn qr_thin(data: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let m = to_dmatrix(data, rows, cols);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    (from_dmatrix(&q), from_dmatrix(&r), q.ncols())
}
