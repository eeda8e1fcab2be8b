//! Scalar quadrature and interpolation helpers used by the channel families
//! and the divisibility engine.
//!
//! The adaptive integrator is a plain Gauss–Kronrod 7/15 scheme with a global
//! worst-segment-first refinement loop. It is meant for smooth or piecewise
//! smooth one-dimensional integrands at desk scale; oscillatory integrands are
//! handled by seeding the segment queue at roughly the oscillation wavelength
//! (see [`adaptive_quad_segmented`]).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a}, {b}]: error estimate {err:.3e} exceeds tolerance {tol:.3e}")]
    NonConvergence { a: f64, b: f64, err: f64, tol: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteIntegrand { x: f64 },
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];

// 7-point Gauss weights; nodes are XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_945_0,
    0.417_959_183_673_469_387_8,
];

/// One Gauss–Kronrod 7/15 evaluation on [a, b]. Returns the Kronrod value and
/// an estimate of its absolute error.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<f64, QuadError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFiniteIntegrand { x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kronrod *= half;
    gauss *= half;
    abs_sum *= half.abs();

    // QUADPACK-style sharpened error estimate.
    let raw = (kronrod - gauss).abs();
    let err = if abs_sum > 0.0 && raw > 0.0 {
        raw.min(abs_sum * (200.0 * raw / abs_sum).powf(1.5).min(1.0))
    } else {
        raw
    };
    Ok((kronrod, err))
}

/// Single fixed 15-point Kronrod pass without error control, for sub-cell
/// cumulative integrals whose integrand is already resolved at cell scale.
pub(crate) fn gk15_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = WGK[7] * f(center);
    for j in 0..7 {
        let dx = half * XGK[j];
        acc += WGK[j] * (f(center - dx) + f(center + dx));
    }
    acc * half
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

const MAX_SEGMENTS: usize = 200_000;

/// Adaptive integration of `f` over `[a, b]` to absolute tolerance `abs_tol`,
/// with the segment queue seeded by `initial_segments` equal pieces.
///
/// Seeding matters for oscillatory integrands: the 15-point rule only resolves
/// a couple of oscillation periods per segment, so callers integrating
/// `f(x)·cos(ωx)`-like kernels should seed with roughly `(b-a)·ω/(2π)` pieces.
pub fn adaptive_quad_segmented<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    initial_segments: usize,
) -> Result<f64, QuadError> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let n0 = initial_segments.clamp(1, MAX_SEGMENTS / 2);
    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let width = (b - a) / n0 as f64;
    for i in 0..n0 {
        let sa = a + i as f64 * width;
        let sb = if i + 1 == n0 { b } else { a + (i + 1) as f64 * width };
        let (v, e) = gk15(f, sa, sb)?;
        total += v;
        total_err += e;
        heap.push(Segment { a: sa, b: sb, value: v, err: e });
    }

    let tol = abs_tol.max(f64::EPSILON * total.abs());
    while total_err > tol && !heap.is_empty() && heap.len() < MAX_SEGMENTS {
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; freeze its estimate.
            total_err -= worst.err;
            total_err += worst.err.min(f64::EPSILON * worst.value.abs());
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid)?;
        let (v2, e2) = gk15(f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }

    if total_err > tol {
        return Err(QuadError::NonConvergence { a, b, err: total_err, tol });
    }
    Ok(total)
}

/// Adaptive integration of `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64, QuadError> {
    adaptive_quad_segmented(f, a, b, abs_tol, 1)
}

/// Composite Simpson rule over uniformly spaced samples.
///
/// `values.len()` must be odd and at least 3; `h` is the grid spacing.
pub fn composite_simpson(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "Simpson needs an odd sample count >= 3");
    let n = values.len();
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("interpolation grid must be strictly increasing with at least 2 nodes")]
    BadGrid,
    #[error("interpolation data length {got} does not match grid length {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// Piecewise-cubic Hermite interpolant with second-order finite-difference
/// slopes (nonuniform grids allowed).
#[derive(Debug, Clone)]
pub struct CubicInterp {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicInterp {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, InterpError> {
        if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(InterpError::BadGrid);
        }
        if ys.len() != xs.len() {
            return Err(InterpError::LengthMismatch { got: ys.len(), want: xs.len() });
        }
        let slopes = fd_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("nonempty grid"))
    }

    /// Evaluate at `x`, which must lie inside the grid domain.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        assert!(
            x >= self.xs[0] - 1e-12 && x <= self.xs[n - 1] + 1e-12,
            "interpolation point {x} outside grid [{}, {}]",
            self.xs[0],
            self.xs[n - 1]
        );
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(Ordering::Less)) {
            Ok(i) => return self.ys[i.min(n - 1)],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }
}

/// Second-order slope estimates on a (possibly nonuniform) grid.
fn fd_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 2 {
        let d = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return vec![d, d];
    }
    let mut slopes = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        let d0 = (ys[i] - ys[i - 1]) / h0;
        let d1 = (ys[i + 1] - ys[i]) / h1;
        slopes[i] = (h1 * d0 + h0 * d1) / (h0 + h1);
    }
    // One-sided second-order estimates at the ends.
    let h0 = xs[1] - xs[0];
    let h1 = xs[2] - xs[1];
    let d0 = (ys[1] - ys[0]) / h0;
    let d1 = (ys[2] - ys[1]) / h1;
    slopes[0] = d0 + (d0 - d1) * h0 / (h0 + h1);
    let hn0 = xs[n - 1] - xs[n - 2];
    let hn1 = xs[n - 2] - xs[n - 3];
    let dn0 = (ys[n - 1] - ys[n - 2]) / hn0;
    let dn1 = (ys[n - 2] - ys[n - 3]) / hn1;
    slopes[n - 1] = dn0 + (dn0 - dn1) * hn0 / (hn0 + hn1);
    slopes
}
