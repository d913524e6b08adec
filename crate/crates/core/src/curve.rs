//! Interpolated curves and the moon-edge areas between a curve and its chords.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub trait Curve {
    fn value(&self, x: f64) -> f64;
    fn integral(&self, a: f64, b: f64) -> f64;
}

/// Cubic spline with not-a-knot end conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() {
            return Err(Error::ShapeMismatch { left: n, right: ys.len() });
        }
        if n < 2 {
            return Err(Error::Domain(format!("spline needs at least 2 points, got {n}")));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(format!("spline abscissae must increase strictly")));
        }
        let m = if n == 2 {
            vec![0.0; 2]
        } else if n == 3 {
            // the single parabola through three points
            let h0 = xs[1] - xs[0];
            let h1 = xs[2] - xs[1];
            let d0 = (ys[1] - ys[0]) / h0;
            let d1 = (ys[2] - ys[1]) / h1;
            let c = 2.0 * (d1 - d0) / (h0 + h1);
            vec![c; 3]
        } else {
            let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            a[(0, 0)] = h[1];
            a[(0, 1)] = -(h[0] + h[1]);
            a[(0, 2)] = h[0];
            for i in 1..n - 1 {
                a[(i, i - 1)] = h[i - 1];
                a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
                a[(i, i + 1)] = h[i];
                rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
            }
            a[(n - 1, n - 3)] = h[n - 2];
            a[(n - 1, n - 2)] = -(h[n - 3] + h[n - 2]);
            a[(n - 1, n - 1)] = h[n - 3];
            let sol = a
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Singular(format!("spline system")))?;
            sol.iter().copied().collect()
        };
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    /// First derivative at knot `i`.
    pub fn slope(&self, i: usize) -> f64 {
        let j = i.min(self.xs.len() - 2);
        let h = self.xs[j + 1] - self.xs[j];
        let (m0, m1) = (self.m[j], self.m[j + 1]);
        let secant = (self.ys[j + 1] - self.ys[j]) / h;
        if j == i {
            secant - h * (2.0 * m0 + m1) / 6.0
        } else {
            secant + h * (m0 + 2.0 * m1) / 6.0
        }
    }

    /// Antiderivative on segment `i`, measured from its left knot.
    fn seg_primitive(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let a = x1 - x;
        let b = x - x0;
        let prim = |a: f64, b: f64| {
            -m0 * a.powi(4) / (24.0 * h) + m1 * b.powi(4) / (24.0 * h)
                - (y0 / h - m0 * h / 6.0) * a * a / 2.0
                + (y1 / h - m1 * h / 6.0) * b * b / 2.0
        };
        prim(a, b) - prim(h, 0.0)
    }
}

impl Curve for CubicSpline {
    fn value(&self, x: f64) -> f64 {
        let i = segment(&self.xs, x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let a = x1 - x;
        let b = x - x0;
        m0 * a.powi(3) / (6.0 * h)
            + m1 * b.powi(3) / (6.0 * h)
            + (self.ys[i] / h - m0 * h / 6.0) * a
            + (self.ys[i + 1] / h - m1 * h / 6.0) * b
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        integrate_segments(&self.xs, a, b, |i, x| self.seg_primitive(i, x))
    }
}

/// Piecewise cubic Hermite curve. Knot slopes come from the not-a-knot spline
/// and are clipped between the adjacent secants, so convex data give
/// nondecreasing slopes and nonnegative moon edges.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteCubic {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let spline = CubicSpline::new(xs, ys)?;
        let n = xs.len();
        let sec: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes: Vec<f64> = (0..n).map(|i| spline.slope(i)).collect();
        for i in 1..n - 1 {
            let (lo, hi) = (sec[i - 1].min(sec[i]), sec[i - 1].max(sec[i]));
            slopes[i] = slopes[i].clamp(lo, hi);
        }
        if n > 2 {
            slopes[0] = if sec[0] <= sec[1] { slopes[0].min(sec[0]) } else { slopes[0].max(sec[0]) };
            let (a, b) = (sec[n - 3], sec[n - 2]);
            slopes[n - 1] = if a <= b { slopes[n - 1].max(b) } else { slopes[n - 1].min(b) };
        } else {
            slopes = vec![sec[0]; 2];
        }
        Ok(Self { xs: xs.to_vec(), ys: ys.to_vec(), slopes })
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn seg_primitive(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        h * (y0 * (t4 / 2.0 - t3 + t)
            + m0 * (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0)
            + y1 * (t3 - t4 / 2.0)
            + m1 * (t4 / 4.0 - t3 / 3.0))
    }
}

impl Curve for HermiteCubic {
    fn value(&self, x: f64) -> f64 {
        let i = segment(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (3.0 * t2 - 2.0 * t3) * self.ys[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        integrate_segments(&self.xs, a, b, |i, x| self.seg_primitive(i, x))
    }
}

fn segment(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

/// Sums per-segment primitives measured from each left knot.
fn integrate_segments(xs: &[f64], a: f64, b: f64, prim: impl Fn(usize, f64) -> f64) -> f64 {
    if b < a {
        return -integrate_segments(xs, b, a, prim);
    }
    let (ia, ib) = (segment(xs, a), segment(xs, b));
    if ia == ib {
        return prim(ia, b) - prim(ia, a);
    }
    let mut total = prim(ia, xs[ia + 1]) - prim(ia, a);
    for i in ia + 1..ib {
        total += prim(i, xs[i + 1]);
    }
    total + prim(ib, b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoonEdge {
    pub start: f64,
    pub end: f64,
    /// Chord area minus the area under the curve.
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoonEdges {
    pub delta: f64,
    pub areas: Vec<MoonEdge>,
    pub total: f64,
}

/// A_f over `[i delta, (i+1) delta]` for every interval inside `[0, x_max]`,
/// and their sum M_f.
pub fn moon_edges<C: Curve>(curve: &C, delta: f64, x_max: f64) -> Result<MoonEdges> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("interval width must be positive, got {delta}")));
    }
    let count = ((x_max / delta) + 1e-9).floor() as usize;
    let mut areas = Vec::with_capacity(count);
    for i in 0..count {
        let a = i as f64 * delta;
        let b = a + delta;
        let chord = 0.5 * delta * (curve.value(a) + curve.value(b));
        areas.push(MoonEdge {
            start: a,
            end: b,
            area: chord - curve.integral(a, b),
        });
    }
    let total = areas.iter().map(|e| e.area).sum();
    Ok(MoonEdges { delta, areas, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_exactly() {
        let f = |x: f64| 0.5 * x * x * x - x * x + 3.0;
        let xs: Vec<f64> = (0..7).map(|i| i as f64 * 0.7).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        for &x in &[0.1, 1.3, 2.2, 4.1] {
            assert!((s.value(x) - f(x)).abs() < 1e-10);
        }
        let prim = |x: f64| 0.125 * x.powi(4) - x.powi(3) / 3.0 + 3.0 * x;
        assert!((s.integral(0.3, 3.9) - (prim(3.9) - prim(0.3))).abs() < 1e-10);
    }

    #[test]
    fn linear_data_has_no_moon_edges() {
        let xs: Vec<f64> = (0..11).map(|i| 2.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 0.04 * x).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        let e = moon_edges(&s, 4.0, 20.0).unwrap();
        assert_eq!(e.areas.len(), 5);
        assert!(e.total.abs() < 1e-12);
    }
}
