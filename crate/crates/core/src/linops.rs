//! Linear operators: dense matrices, Gaussian blurs, 2-D forward
//! differences and vertical stacks, with adjoints and norm estimates.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Dense,
    Identity,
    Conv1d,
    Conv2d,
    FiniteDiff2d,
    Stacked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    ZeroPad,
    /// Half-sample symmetric extension (`x₋₁ = x₀`).
    Reflect,
}

/// A linear map `ℝ^d → ℝ^m`.
pub trait LinearOperator: Debug + Send + Sync {
    /// `(m, d)`.
    fn shape(&self) -> (usize, usize);
    fn structure(&self) -> Structure;
    /// Unchecked apply; `x.len() == d`.
    fn apply_raw(&self, x: &[f64]) -> Vec<f64>;
    /// Unchecked adjoint; `y.len() == m`.
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64>;
    /// True when every matrix entry is `≥ 0`.
    fn is_nonnegative(&self) -> bool;

    /// Column sums of absolute entries, when they are cheap to obtain.
    fn column_abs_sums(&self) -> Option<Vec<f64>> {
        if self.is_nonnegative() {
            Some(self.adjoint_raw(&vec![1.0; self.shape().0]))
        } else {
            None
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.shape().1, x.len())?;
        Ok(self.apply_raw(x))
    }

    fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.shape().0, y.len())?;
        Ok(self.adjoint_raw(y))
    }
}

pub type Operator = Arc<dyn LinearOperator>;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("dense matrix must be non-empty".into()));
        }
        check_len(rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("dense matrix entries must be finite".into()));
        }
        Ok(Dense { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
        }
        Dense::new(rows.len(), cols, rows.concat())
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Dense::new(n, n, data)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl LinearOperator for Dense {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    fn structure(&self) -> Structure {
        Structure::Dense
    }
    fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &yi) in self.data.chunks(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(r) {
                *o += a * yi;
            }
        }
        out
    }
    fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }
    fn column_abs_sums(&self) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        for r in self.data.chunks(self.cols) {
            for (o, a) in out.iter_mut().zip(r) {
                *o += a.abs();
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn shape(&self) -> (usize, usize) {
        (self.0, self.0)
    }
    fn structure(&self) -> Structure {
        Structure::Identity
    }
    fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
    fn is_nonnegative(&self) -> bool {
        true
    }
}

/// Map an out-of-range index onto `0..n`, or `None` for zero padding.
fn fold_index(j: isize, n: usize, b: Boundary) -> Option<usize> {
    let n = n as isize;
    if (0..n).contains(&j) {
        return Some(j as usize);
    }
    match b {
        Boundary::ZeroPad => None,
        Boundary::Reflect => {
            let m = j.rem_euclid(2 * n);
            Some(if m >= n { (2 * n - 1 - m) as usize } else { m as usize })
        }
    }
}

fn conv_apply(x: &[f64], kernel: &[f64], b: Boundary) -> Vec<f64> {
    let n = x.len();
    let r = (kernel.len() / 2) as isize;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(k, w)| fold_index(i as isize + k as isize - r, n, b).map(|j| w * x[j]))
                .sum()
        })
        .collect()
}

fn conv_adjoint(y: &[f64], kernel: &[f64], b: Boundary) -> Vec<f64> {
    let n = y.len();
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; n];
    for (i, &yi) in y.iter().enumerate() {
        for (k, w) in kernel.iter().enumerate() {
            if let Some(j) = fold_index(i as isize + k as isize - r, n, b) {
                out[j] += w * yi;
            }
        }
    }
    out
}

/// Same-size 1-D convolution with an odd-length kernel centred on each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    n: usize,
    kernel: Vec<f64>,
    boundary: Boundary,
}

impl Conv1d {
    pub fn new(n: usize, kernel: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if n == 0 || kernel.len() % 2 == 0 || kernel.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "conv1d needs n >= 1 and a finite kernel of odd length".into(),
            ));
        }
        Ok(Conv1d { n, kernel, boundary })
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }
}

impl LinearOperator for Conv1d {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }
    fn structure(&self) -> Structure {
        Structure::Conv1d
    }
    fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        conv_apply(x, &self.kernel, self.boundary)
    }
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        conv_adjoint(y, &self.kernel, self.boundary)
    }
    fn is_nonnegative(&self) -> bool {
        self.kernel.iter().all(|&v| v >= 0.0)
    }
}

/// Separable 2-D convolution on a row-major `height × width` image: the same
/// 1-D kernel along rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    height: usize,
    width: usize,
    kernel: Vec<f64>,
    boundary: Boundary,
}

impl Conv2d {
    pub fn new(height: usize, width: usize, kernel: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if height == 0 || width == 0 || kernel.len() % 2 == 0 || kernel.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "conv2d needs a non-empty image and a finite kernel of odd length".into(),
            ));
        }
        Ok(Conv2d { height, width, kernel, boundary })
    }

    fn separable(&self, x: &[f64], f: fn(&[f64], &[f64], Boundary) -> Vec<f64>) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut tmp = vec![0.0; h * w];
        for r in 0..h {
            let row = f(&x[r * w..(r + 1) * w], &self.kernel, self.boundary);
            tmp[r * w..(r + 1) * w].copy_from_slice(&row);
        }
        let mut out = vec![0.0; h * w];
        let mut col = vec![0.0; h];
        for c in 0..w {
            for r in 0..h {
                col[r] = tmp[r * w + c];
            }
            for (r, v) in f(&col, &self.kernel, self.boundary).into_iter().enumerate() {
                out[r * w + c] = v;
            }
        }
        out
    }
}

impl LinearOperator for Conv2d {
    fn shape(&self) -> (usize, usize) {
        let n = self.height * self.width;
        (n, n)
    }
    fn structure(&self) -> Structure {
        Structure::Conv2d
    }
    fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        self.separable(x, conv_apply)
    }
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        // row and column passes commute, so the adjoint is the separable adjoint
        self.separable(y, conv_adjoint)
    }
    fn is_nonnegative(&self) -> bool {
        self.kernel.iter().all(|&v| v >= 0.0)
    }
}

/// Which blur geometry to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlurShape {
    OneD(usize),
    TwoD { height: usize, width: usize },
}

/// Normalized Gaussian taps with half-width `⌈3σ⌉`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gaussian blur: sigma > 0 violated (sigma = {sigma})")));
    }
    let r = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    Ok(k)
}

pub fn gaussian_blur(shape: BlurShape, sigma: f64, boundary: Boundary) -> Result<Operator> {
    let k = gaussian_kernel(sigma)?;
    Ok(match shape {
        BlurShape::OneD(n) => Arc::new(Conv1d::new(n, k, boundary)?),
        BlurShape::TwoD { height, width } => Arc::new(Conv2d::new(height, width, k, boundary)?),
    })
}

/// Forward differences on a row-major `height × width` image. Output block
/// `i` (entries `2i`, `2i+1`) holds the horizontal and vertical difference
/// at pixel `i`; both vanish on the last column/row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiff2d {
    pub height: usize,
    pub width: usize,
}

impl FiniteDiff2d {
    /// Exact `‖L‖₂²`: the one-sided difference on `n` samples has squared
    /// singular values `4 sin²(πk/2n)`, `k < n`, and the two directions add.
    pub fn norm_sq(&self) -> f64 {
        let top = |n: usize| {
            let s = (std::f64::consts::PI * (n - 1) as f64 / (2.0 * n as f64)).sin();
            4.0 * s * s
        };
        top(self.height) + top(self.width)
    }
}

pub fn finite_difference_2d(height: usize, width: usize) -> Result<FiniteDiff2d> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidParameter("finite_difference_2d: height, width >= 1 violated".into()));
    }
    Ok(FiniteDiff2d { height, width })
}

impl LinearOperator for FiniteDiff2d {
    fn shape(&self) -> (usize, usize) {
        let n = self.height * self.width;
        (2 * n, n)
    }
    fn structure(&self) -> Structure {
        Structure::FiniteDiff2d
    }
    fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut out = vec![0.0; 2 * h * w];
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if c + 1 < w {
                    out[2 * i] = x[i + 1] - x[i];
                }
                if r + 1 < h {
                    out[2 * i + 1] = x[i + w] - x[i];
                }
            }
        }
        out
    }
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut out = vec![0.0; h * w];
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if c + 1 < w {
                    out[i + 1] += y[2 * i];
                    out[i] -= y[2 * i];
                }
                if r + 1 < h {
                    out[i + w] += y[2 * i + 1];
                    out[i] -= y[2 * i + 1];
                }
            }
        }
        out
    }
    fn is_nonnegative(&self) -> bool {
        false
    }
}

/// Vertical stack `[A₁; A₂; …]` of operators sharing the input dimension.
#[derive(Debug, Clone)]
pub struct Stacked {
    parts: Vec<Operator>,
}

impl Stacked {
    pub fn new(parts: Vec<Operator>) -> Result<Self> {
        let d = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("stacked operator needs at least one part".into()))?
            .shape()
            .1;
        for p in &parts {
            check_len(d, p.shape().1)?;
        }
        Ok(Stacked { parts })
    }
}

impl LinearOperator for Stacked {
    fn shape(&self) -> (usize, usize) {
        (self.parts.iter().map(|p| p.shape().0).sum(), self.parts[0].shape().1)
    }
    fn structure(&self) -> Structure {
        Structure::Stacked
    }
    fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        self.parts.iter().flat_map(|p| p.apply_raw(x)).collect()
    }
    fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.shape().1];
        let mut off = 0;
        for p in &self.parts {
            let m = p.shape().0;
            for (o, v) in out.iter_mut().zip(p.adjoint_raw(&y[off..off + m])) {
                *o += v;
            }
            off += m;
        }
        out
    }
    fn is_nonnegative(&self) -> bool {
        self.parts.iter().all(|p| p.is_nonnegative())
    }
    fn column_abs_sums(&self) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.shape().1];
        for p in &self.parts {
            for (o, v) in out.iter_mut().zip(p.column_abs_sums()?) {
                *o += v;
            }
        }
        Some(out)
    }
}

const POWER_MAX_ITERS: usize = 10_000;

/// Spectral norm `√λ_max(AᵀA)` by power iteration on `AᵀA`, stopping when
/// successive Rayleigh quotients agree to relative `tol`.
pub fn op_norm_2(a: &dyn LinearOperator, tol: f64) -> Result<f64> {
    let d = a.shape().1;
    // deterministic start with no special symmetry
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i * 7919 + 13) % 101) as f64 / 101.0).collect();
    normalize(&mut v);
    let mut prev = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let av = a.apply_raw(&v);
        let lam: f64 = av.iter().map(|x| x * x).sum();
        if lam == 0.0 {
            return Ok(0.0);
        }
        if (lam - prev).abs() <= tol * lam {
            return Ok(lam.sqrt());
        }
        prev = lam;
        v = a.adjoint_raw(&av);
        normalize(&mut v);
    }
    Err(Error::NonConvergence(POWER_MAX_ITERS))
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// `‖A‖₁ = max_j Σᵢ |A_ij|`.
pub fn norm_1_columns(a: &dyn LinearOperator) -> Result<f64> {
    a.column_abs_sums()
        .map(|c| c.into_iter().fold(0.0, f64::max))
        .ok_or_else(|| Error::Unsupported(format!("column sums are not available for {:?} operators", a.structure())))
}

/// Materialize an operator as a dense matrix (column by column).
pub fn to_dense(a: &dyn LinearOperator) -> Dense {
    let (m, d) = a.shape();
    let mut data = vec![0.0; m * d];
    let mut e = vec![0.0; d];
    for j in 0..d {
        e[j] = 1.0;
        for (i, v) in a.apply_raw(&e).into_iter().enumerate() {
            data[i * d + j] = v;
        }
        e[j] = 0.0;
    }
    Dense { rows: m, cols: d, data }
}
