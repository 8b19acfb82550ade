//! Dense cubic arrays for connection coefficients and curvature.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Rank-3 array `t[k][i][j]` with all indices in `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    t.data[(k * dim + i) * dim + j] = f(k, i, j);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Contract the two lower slots with vectors: `out^k = t[k][i][j] x^i y^j`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += self.get(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    /// Matrix `M[k][j] = t[k][i][j] x^i` (the endomorphism `Y -> t(X, Y)`).
    pub fn slot_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| self.get(k, i, j) * x[i]).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub(crate) fn lin_comb(terms: &[(f64, Self)]) -> Self {
        let dim = terms[0].1.dim;
        let mut data = vec![0.0; terms[0].1.data.len()];
        for (c, t) in terms {
            for (d, v) in data.iter_mut().zip(&t.data) {
                *d += c * v;
            }
        }
        Self { dim, data }
    }
}

/// Rank-4 array `r[l][i][j][k]`, curvature convention `R(d_i, d_j) d_k = r[l][i][j][k] d_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, l: usize, i: usize, j: usize, k: usize) -> usize {
        ((l * self.dim + i) * self.dim + j) * self.dim + k
    }

    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(l, i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, i: usize, j: usize, k: usize, v: f64) {
        let at = self.idx(l, i, j, k);
        self.data[at] = v;
    }

    /// `R(X, Y) Z` as a vector.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let w = xy * z[k];
                    if w == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        out[l] += self.get(l, i, j, k) * w;
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn average(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| 0.5 * (a + b)).collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(GeomError::ShapeMismatch { expected, got })
    }
}

/// Christoffel symbols `gamma[k][i][j] = Γ^k_ij`, i.e. `∇_{∂i} ∂j = Γ^k_ij ∂k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs {
    pub gamma: Tensor3,
}

impl ConnectionCoeffs {
    pub fn new(gamma: Tensor3) -> Self {
        Self { gamma }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { gamma: Tensor3::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma.get(k, i, j)
    }

    /// `max |Γ^k_ij - Γ^k_ji|`.
    pub fn torsion(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    m = m.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        m
    }

    /// Covariant derivative of a constant-coefficient vector: `∇_X Y = Γ(X, Y)` plus nothing else.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.gamma.contract(x, y)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.gamma.max_abs_diff(&other.gamma)
    }
}

/// Values that can be linearly combined, which is all finite differences need.
pub trait FdValue: Sized {
    fn lin_comb(terms: &[(f64, Self)]) -> Self;
}

impl FdValue for f64 {
    fn lin_comb(terms: &[(f64, Self)]) -> Self {
        terms.iter().map(|(c, v)| c * v).sum()
    }
}

impl FdValue for DVector<f64> {
    fn lin_comb(terms: &[(f64, Self)]) -> Self {
        let mut out = DVector::zeros(terms[0].1.len());
        for (c, v) in terms {
            out.axpy(*c, v, 1.0);
        }
        out
    }
}

impl FdValue for DMatrix<f64> {
    fn lin_comb(terms: &[(f64, Self)]) -> Self {
        let (r, c) = terms[0].1.shape();
        let mut out = DMatrix::zeros(r, c);
        for (w, v) in terms {
            out += v * *w;
        }
        out
    }
}

impl FdValue for Tensor3 {
    fn lin_comb(terms: &[(f64, Self)]) -> Self {
        Tensor3::lin_comb(terms)
    }
}

impl FdValue for ConnectionCoeffs {
    fn lin_comb(terms: &[(f64, Self)]) -> Self {
        let ts: Vec<(f64, Tensor3)> = terms.iter().map(|(c, g)| (*c, g.gamma.clone())).collect();
        ConnectionCoeffs::new(Tensor3::lin_comb(&ts))
    }
}

impl FdValue for Vec<DVector<f64>> {
    fn lin_comb(terms: &[(f64, Self)]) -> Self {
        (0..terms[0].1.len())
            .map(|idx| {
                let parts: Vec<(f64, DVector<f64>)> =
                    terms.iter().map(|(c, v)| (*c, v[idx].clone())).collect();
                DVector::lin_comb(&parts)
            })
            .collect()
    }
}
