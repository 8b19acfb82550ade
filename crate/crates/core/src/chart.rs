//! Coordinate charts, finite differences and metric linear algebra.
//!
//! A [`Chart`] is an open coordinate box carrying a metric field and, optionally,
//! an almost complex structure and a contrast tensor `K`. All fields are plain
//! closures of the coordinates; charts are immutable once built and can be
//! shared freely across threads.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeomError, Result};
use crate::tensor::{ConnectionCoeffs, FdValue, Tensor3};

pub type Point = DVector<f64>;
pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub type MatrixField = Arc<dyn Fn(&Point) -> Matrix + Send + Sync>;
pub type TensorField = Arc<dyn Fn(&Point) -> Tensor3 + Send + Sync>;
pub type ConnectionField = Arc<dyn Fn(&Point) -> Result<ConnectionCoeffs> + Send + Sync>;

/// Relative pivot threshold used by Gram-Schmidt and the linear solves.
pub const PIVOT_THRESHOLD: f64 = 1e-12;
/// Largest accepted metric condition number.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Number of times a stencil step is halved before giving up.
pub const MAX_STEP_SHRINKS: usize = 20;

/// Product of open intervals. Infinite endpoints are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self { bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); dim] }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self { bounds: vec![(lo, hi); dim] }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.len() == self.bounds.len()
            && p.iter()
                .zip(&self.bounds)
                .all(|(x, (lo, hi))| x.is_finite() && *x > *lo && *x < *hi)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.len() != self.dim() {
            return Err(GeomError::ShapeMismatch { expected: self.dim(), got: p.len() });
        }
        if self.contains(p) {
            Ok(())
        } else {
            Err(GeomError::OutOfDomain { point: p.iter().copied().collect() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FdScheme {
    #[serde(rename = "central-2")]
    Central2,
    #[serde(rename = "central-4")]
    Central4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub scheme: FdScheme,
    pub tol_identity: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-5, scheme: FdScheme::Central2, tol_identity: 1e-6 }
    }
}

impl FdConfig {
    /// Settings for derivatives of quantities that are themselves derived from
    /// first derivatives (curvature). A wider fourth-order stencil keeps the
    /// round-off of the inner derivative from being amplified by `1/h`.
    pub fn curvature() -> Self {
        Self { step: 1e-3, scheme: FdScheme::Central4, tol_identity: 1e-6 }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_scheme(mut self, scheme: FdScheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(GeomError::Configuration(format!("fd step must be positive, got {}", self.step)))
        }
    }
}

/// Step length actually usable at `p` along `axis`: halved until the whole
/// stencil fits in the domain.
pub fn stencil_step(p: &Point, axis: usize, cfg: &FdConfig, domain: &Domain) -> Result<f64> {
    cfg.validate()?;
    let reach = match cfg.scheme {
        FdScheme::Central2 => 1.0,
        FdScheme::Central4 => 2.0,
    };
    let mut h = cfg.step;
    for _ in 0..=MAX_STEP_SHRINKS {
        let mut lo = p.clone();
        let mut hi = p.clone();
        lo[axis] -= reach * h;
        hi[axis] += reach * h;
        if domain.contains(&lo) && domain.contains(&hi) {
            return Ok(h);
        }
        h *= 0.5;
    }
    Err(GeomError::Boundary { axis, point: p.iter().copied().collect() })
}

/// Central difference of `field` along coordinate `axis` at `p`.
pub fn partial_derivative<T, F>(field: F, p: &Point, axis: usize, cfg: &FdConfig, domain: &Domain) -> Result<T>
where
    T: FdValue,
    F: Fn(&Point) -> Result<T>,
{
    if axis >= p.len() {
        return Err(GeomError::ShapeMismatch { expected: p.len(), got: axis });
    }
    let h = stencil_step(p, axis, cfg, domain)?;
    let shifted = |s: f64| {
        let mut q = p.clone();
        q[axis] += s * h;
        field(&q)
    };
    match cfg.scheme {
        FdScheme::Central2 => {
            let fp = shifted(1.0)?;
            let fm = shifted(-1.0)?;
            Ok(T::lin_comb(&[(0.5 / h, fp), (-0.5 / h, fm)]))
        }
        FdScheme::Central4 => {
            let f2 = shifted(2.0)?;
            let f1 = shifted(1.0)?;
            let m1 = shifted(-1.0)?;
            let m2 = shifted(-2.0)?;
            let w = 1.0 / (12.0 * h);
            Ok(T::lin_comb(&[(-w, f2), (8.0 * w, f1), (-8.0 * w, m1), (w, m2)]))
        }
    }
}

/// Coordinate domain with metric, optional complex structure `J` and optional contrast tensor `K`.
///
/// `complex_structure(p)` is the matrix of `J` acting on coordinate vectors
/// (column `i` is `J ∂_i`). `contrast(p)` returns `K^k_ij`, the components of
/// `K(∂_i, ∂_j)`.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub domain: Domain,
    metric: MatrixField,
    complex_structure: Option<MatrixField>,
    contrast: Option<TensorField>,
    levi_civita: Option<ConnectionField>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("has_j", &self.complex_structure.is_some())
            .field("has_contrast", &self.contrast.is_some())
            .finish()
    }
}

impl Chart {
    /// Builds a chart; the metric closure is symmetrized so `g = gᵀ` holds exactly.
    pub fn new(name: impl Into<String>, domain: Domain, metric: impl Fn(&Point) -> Matrix + Send + Sync + 'static) -> Self {
        let metric: MatrixField = Arc::new(move |p: &Point| {
            let g = metric(p);
            (&g + g.transpose()) * 0.5
        });
        Self {
            name: name.into(),
            domain,
            metric,
            complex_structure: None,
            contrast: None,
            levi_civita: None,
        }
    }

    pub fn with_complex_structure(mut self, j: impl Fn(&Point) -> Matrix + Send + Sync + 'static) -> Result<Self> {
        if !self.dim().is_multiple_of(2) {
            return Err(GeomError::Configuration(format!(
                "complex structure needs an even dimension, chart has {}",
                self.dim()
            )));
        }
        self.complex_structure = Some(Arc::new(j));
        Ok(self)
    }

    pub fn with_contrast(mut self, k: impl Fn(&Point) -> Tensor3 + Send + Sync + 'static) -> Self {
        self.contrast = Some(Arc::new(k));
        self
    }

    /// Attach closed-form Levi-Civita symbols. Finite differences remain the
    /// reference used by [`levi_civita`]; this field feeds the connection pairs.
    pub fn with_levi_civita(mut self, lc: impl Fn(&Point) -> Result<ConnectionCoeffs> + Send + Sync + 'static) -> Self {
        self.levi_civita = Some(Arc::new(lc));
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn has_complex_structure(&self) -> bool {
        self.complex_structure.is_some()
    }

    pub fn has_contrast(&self) -> bool {
        self.contrast.is_some()
    }

    pub fn metric_at(&self, p: &Point) -> Result<Matrix> {
        self.domain.check(p)?;
        let g = (self.metric)(p);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::Numeric(format!("non-finite metric at {:?}", p.as_slice())));
        }
        Ok(g)
    }

    pub fn complex_structure_at(&self, p: &Point) -> Result<Matrix> {
        let j = self
            .complex_structure
            .as_ref()
            .ok_or_else(|| GeomError::Configuration(format!("chart `{}` has no complex structure", self.name)))?;
        self.domain.check(p)?;
        Ok(j(p))
    }

    pub fn contrast_at(&self, p: &Point) -> Result<Tensor3> {
        let k = self
            .contrast
            .as_ref()
            .ok_or_else(|| GeomError::Configuration(format!("chart `{}` has no contrast tensor", self.name)))?;
        self.domain.check(p)?;
        Ok(k(p))
    }

    /// Closed-form Levi-Civita symbols when the chart carries them, else finite differences.
    pub fn levi_civita_at(&self, p: &Point, cfg: &FdConfig) -> Result<ConnectionCoeffs> {
        match &self.levi_civita {
            Some(lc) => {
                self.domain.check(p)?;
                lc(p)
            }
            None => levi_civita(self, p, cfg),
        }
    }

    pub fn levi_civita_field(self: &Arc<Self>, cfg: FdConfig) -> ConnectionField {
        let chart = Arc::clone(self);
        Arc::new(move |p: &Point| chart.levi_civita_at(p, &cfg))
    }

    /// `∂_axis g` at `p`.
    pub fn metric_derivative(&self, p: &Point, axis: usize, cfg: &FdConfig) -> Result<Matrix> {
        partial_derivative(|q: &Point| self.metric_at(q), p, axis, cfg, &self.domain)
    }

    pub fn metric_derivatives(&self, p: &Point, cfg: &FdConfig) -> Result<Vec<Matrix>> {
        (0..self.dim()).map(|a| self.metric_derivative(p, a, cfg)).collect()
    }
}

/// Inverse of a symmetric positive-definite matrix with the condition-number guard.
pub fn checked_inverse(g: &Matrix) -> Result<Matrix> {
    let eig = SymmetricEigen::new(g.clone());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for v in eig.eigenvalues.iter() {
        lo = lo.min(*v);
        hi = hi.max(v.abs());
    }
    if !(lo > 0.0) {
        return Err(GeomError::DegenerateMetric(format!("smallest eigenvalue {lo:e}")));
    }
    if hi / lo > CONDITION_LIMIT {
        return Err(GeomError::DegenerateMetric(format!("condition number {:e}", hi / lo)));
    }
    g.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| GeomError::DegenerateMetric("cholesky factorization failed".into()))
}

/// Christoffel symbols of the metric, `Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li - ∂_l g_ij)`,
/// from finite differences of the metric field.
pub fn levi_civita(chart: &Chart, p: &Point, cfg: &FdConfig) -> Result<ConnectionCoeffs> {
    let g = chart.metric_at(p)?;
    let ginv = checked_inverse(&g)?;
    let dg = chart.metric_derivatives(p, cfg)?;
    Ok(christoffel_from(&ginv, &dg))
}

pub(crate) fn christoffel_from(ginv: &Matrix, dg: &[Matrix]) -> ConnectionCoeffs {
    let n = ginv.nrows();
    // lowered[l][i][j] = ½(∂_i g_lj + ∂_j g_li - ∂_l g_ij)
    let lowered = Tensor3::from_fn(n, |l, i, j| 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]));
    let gamma = Tensor3::from_fn(n, |k, i, j| (0..n).map(|l| ginv[(k, l)] * lowered.get(l, i, j)).sum());
    ConnectionCoeffs::new(gamma)
}

/// Ordered list of vectors at a point together with the Gram matrix they were built against.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub vectors: Vec<Vector>,
    pub metric_at: Matrix,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn gram_matrix(&self) -> Matrix {
        let k = self.vectors.len();
        Matrix::from_fn(k, k, |a, b| inner(&self.metric_at, &self.vectors[a], &self.vectors[b]))
    }

    /// `max |G - I|` over the frame's Gram matrix.
    pub fn orthonormality_defect(&self) -> f64 {
        let gm = self.gram_matrix();
        let k = gm.nrows();
        let mut m: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let target = if a == b { 1.0 } else { 0.0 };
                m = m.max((gm[(a, b)] - target).abs());
            }
        }
        m
    }

    /// Orthogonal projection of `v` onto the span of an orthonormal frame.
    pub fn project(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(v.len());
        for e in &self.vectors {
            out.axpy(inner(&self.metric_at, e, v), e, 1.0);
        }
        out
    }

    /// Components of `v` along each (orthonormal) frame vector.
    pub fn components(&self, v: &Vector) -> Vector {
        Vector::from_iterator(self.vectors.len(), self.vectors.iter().map(|e| inner(&self.metric_at, e, v)))
    }
}

#[inline]
pub fn inner(g: &Matrix, a: &Vector, b: &Vector) -> f64 {
    (a.transpose() * g * b)[(0, 0)]
}

#[inline]
pub fn norm(g: &Matrix, a: &Vector) -> f64 {
    inner(g, a, a).max(0.0).sqrt()
}

fn orthogonalize_against(v: &Vector, basis: &[Vector], gram: &Matrix) -> Vector {
    let mut w = v.clone();
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for e in basis {
            let c = inner(gram, e, &w);
            w.axpy(-c, e, 1.0);
        }
    }
    w
}

/// Orthonormalize `vectors` in order with respect to `gram`.
pub fn gram_schmidt(vectors: &[Vector], gram: &Matrix) -> Result<Frame> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != gram.nrows() {
            return Err(GeomError::ShapeMismatch { expected: gram.nrows(), got: v.len() });
        }
        let scale = norm(gram, v);
        let w = orthogonalize_against(v, &out, gram);
        let len = norm(gram, &w);
        if !(scale > 0.0) || len <= PIVOT_THRESHOLD * scale {
            return Err(GeomError::DependentInput { index });
        }
        out.push(w / len);
    }
    Ok(Frame { vectors: out, metric_at: gram.clone() })
}

/// Orthonormal frame starting with `first` (normalized) and completed from the standard basis.
pub fn complete_frame(first: &Vector, gram: &Matrix) -> Result<Frame> {
    let n = gram.nrows();
    let start = gram_schmidt(std::slice::from_ref(first), gram)?;
    let idx = complement_indices(&start, gram)?;
    let mut vectors = start.vectors;
    vectors.extend(complement_from(&Frame { vectors: vectors.clone(), metric_at: gram.clone() }, gram, &idx)?.vectors);
    debug_assert_eq!(vectors.len(), n);
    Ok(Frame { vectors, metric_at: gram.clone() })
}

/// Indices of the standard basis vectors that complete `subspace` to a basis,
/// chosen greedily by largest remaining component.
pub fn complement_indices(subspace: &Frame, gram: &Matrix) -> Result<Vec<usize>> {
    let n = gram.nrows();
    let basis = gram_schmidt(&subspace.vectors, gram)?;
    let mut current = basis.vectors;
    let mut chosen = Vec::new();
    while current.len() < n {
        let mut best: Option<(usize, f64, Vector)> = None;
        for c in 0..n {
            if chosen.contains(&c) {
                continue;
            }
            let e = Vector::from_fn(n, |r, _| if r == c { 1.0 } else { 0.0 });
            let w = orthogonalize_against(&e, &current, gram);
            let rel = norm(gram, &w) / norm(gram, &e);
            if best.as_ref().is_none_or(|(_, b, _)| rel > *b + 1e-12) {
                best = Some((c, rel, w));
            }
        }
        let (c, rel, w) = best.ok_or(GeomError::DependentInput { index: current.len() })?;
        if rel < 1e-8 {
            return Err(GeomError::DependentInput { index: current.len() });
        }
        let len = norm(gram, &w);
        current.push(w / len);
        chosen.push(c);
    }
    Ok(chosen)
}

/// Orthonormal complement of `subspace` built from the given standard-basis candidates.
pub fn complement_from(subspace: &Frame, gram: &Matrix, candidates: &[usize]) -> Result<Frame> {
    let n = gram.nrows();
    let base = gram_schmidt(&subspace.vectors, gram)?;
    let k = base.vectors.len();
    let mut all = base.vectors;
    for &c in candidates {
        let e = Vector::from_fn(n, |r, _| if r == c { 1.0 } else { 0.0 });
        let w = orthogonalize_against(&e, &all, gram);
        let len = norm(gram, &w);
        if len < 1e-8 {
            return Err(GeomError::DependentInput { index: all.len() });
        }
        all.push(w / len);
    }
    Ok(Frame { vectors: all.split_off(k), metric_at: gram.clone() })
}

/// Metric-orthogonal complement of the span of `subspace`.
pub fn orthogonal_complement(subspace: &Frame, ambient_gram: &Matrix) -> Result<Frame> {
    let idx = complement_indices(subspace, ambient_gram)?;
    complement_from(subspace, ambient_gram, &idx)
}

/// Complex structure of `C^n` in coordinates `(x¹..xⁿ, y¹..yⁿ)`: `J∂x_i = ∂y_i`, `J∂y_i = -∂x_i`.
pub fn standard_complex_structure(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(n + i, i)] = 1.0;
        j[(i, n + i)] = -1.0;
    }
    j
}

/// `|a - b|_max / (1 + max operand magnitude)`.
pub fn normalized_residual(diff: f64, scale: f64) -> f64 {
    diff / (1.0 + scale)
}
