//! CR structures on submanifolds: the holomorphic distribution `D`, its
//! totally real complement `D⊥`, and the normal splitting `JD⊥ ⊕ μ`.

use std::sync::Arc;

use super::{along_derivative, induced_geometry, pftf, shape_operator, DomainField, Form, Immersion, TangentSpace};
use crate::chart::{gram_schmidt, inner, norm, normalized_residual, FdConfig, Matrix, Point, Vector};
use crate::error::{GeomError, Result};
use crate::statstruct::DualPair;

/// Relative length below which a candidate is dropped while extending a frame.
const EXTEND_TOL: f64 = 1e-6;

/// Tangent distributions `D` and `D⊥`, given as domain-coordinate vector fields.
#[derive(Clone)]
pub struct CrStructure {
    pub d_fields: Vec<DomainField>,
    pub dperp_fields: Vec<DomainField>,
}

impl std::fmt::Debug for CrStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CrStructure")
            .field("dim_d", &self.d_fields.len())
            .field("dim_dperp", &self.dperp_fields.len())
            .finish()
    }
}

impl CrStructure {
    pub fn new(d_fields: Vec<DomainField>, dperp_fields: Vec<DomainField>) -> Self {
        Self { d_fields, dperp_fields }
    }

    /// Distributions spanned by coordinate fields of an `m`-dimensional domain.
    pub fn coordinate(m: usize, d_axes: &[usize], dperp_axes: &[usize]) -> Self {
        let field = |a: usize| -> DomainField { Arc::new(move |_: &Point| Vector::from_fn(m, |r, _| if r == a { 1.0 } else { 0.0 })) };
        Self { d_fields: d_axes.iter().map(|&a| field(a)).collect(), dperp_fields: dperp_axes.iter().map(|&a| field(a)).collect() }
    }

    /// Both distributions non-trivial.
    pub fn is_proper(&self) -> bool {
        !self.d_fields.is_empty() && !self.dperp_fields.is_empty()
    }

    pub fn frames(&self, space: &TangentSpace) -> Result<CrFrames> {
        CrFrames::new(self, space)
    }
}

/// Orthonormal frames of `D`, `D⊥`, `JD⊥` and `μ` at one point, in ambient coordinates.
#[derive(Debug, Clone)]
pub struct CrFrames {
    pub d: Vec<Vector>,
    pub dperp: Vec<Vector>,
    /// Same frames in domain coordinates.
    pub d_domain: Vec<Vector>,
    pub dperp_domain: Vec<Vector>,
    /// Orthonormalized normal parts of `J` applied to the `D⊥` frame.
    pub jdperp: Vec<Vector>,
    /// Orthonormal frame of the complement of `JD⊥` in the normal space.
    pub mu: Vec<Vector>,
}

fn extend_orthonormal(base: &mut Vec<Vector>, candidates: &[Vector], gram: &Matrix) {
    for c in candidates {
        let scale = norm(gram, c);
        if !(scale > 0.0) {
            continue;
        }
        let mut w = c.clone();
        for _ in 0..2 {
            for e in base.iter() {
                let k = inner(gram, e, &w);
                w.axpy(-k, e, 1.0);
            }
        }
        let len = norm(gram, &w);
        if len > EXTEND_TOL * scale {
            base.push(w / len);
        }
    }
}

impl CrFrames {
    fn new(cr: &CrStructure, space: &TangentSpace) -> Result<Self> {
        let m = space.dim();
        if cr.d_fields.len() + cr.dperp_fields.len() != m {
            return Err(GeomError::Configuration(format!(
                "CR distributions of dimensions {} + {} do not fill a {m}-dimensional tangent space",
                cr.d_fields.len(),
                cr.dperp_fields.len()
            )));
        }
        let mut pushed: Vec<Vector> = Vec::with_capacity(m);
        for f in cr.d_fields.iter().chain(&cr.dperp_fields) {
            let x = f(&space.u);
            if x.len() != m {
                return Err(GeomError::ShapeMismatch { expected: m, got: x.len() });
            }
            pushed.push(space.push(&x));
        }
        let frame = gram_schmidt(&pushed, &space.ambient_metric)?;
        let mut d = frame.vectors;
        let dperp = d.split_off(cr.d_fields.len());
        let d_domain = d.iter().map(|e| space.pull(e)).collect();
        let dperp_domain = dperp.iter().map(|e| space.pull(e)).collect();

        let (jdperp, mu) = match &space.complex_structure {
            Some(j) => {
                let cands: Vec<Vector> = dperp.iter().map(|e| space.normal_part(&(j * e))).collect();
                let mut jdperp = Vec::new();
                extend_orthonormal(&mut jdperp, &cands, &space.ambient_metric);
                let mut all = jdperp.clone();
                extend_orthonormal(&mut all, &space.normal.vectors, &space.ambient_metric);
                let mu = all.split_off(jdperp.len());
                (jdperp, mu)
            }
            None => (Vec::new(), Vec::new()),
        };
        Ok(Self { d, dperp, d_domain, dperp_domain, jdperp, mu })
    }

    /// Orthogonal projection onto `D`.
    pub fn project_d(&self, space: &TangentSpace, v: &Vector) -> Vector {
        project(&self.d, space, v)
    }

    pub fn project_dperp(&self, space: &TangentSpace, v: &Vector) -> Vector {
        project(&self.dperp, space, v)
    }

    pub fn project_mu(&self, space: &TangentSpace, v: &Vector) -> Vector {
        project(&self.mu, space, v)
    }
}

fn project(frame: &[Vector], space: &TangentSpace, v: &Vector) -> Vector {
    let mut out = Vector::zeros(v.len());
    for e in frame {
        out.axpy(space.inner(e, v), e, 1.0);
    }
    out
}

/// Defining residuals of a CR structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrResiduals {
    /// Largest distance of `J e` from `D` over the `D` frame.
    pub jd_closure: f64,
    /// Largest tangential part of `J e` over the `D⊥` frame.
    pub jdperp_normality: f64,
    /// `‖F ∘ P‖` in orthonormal frames.
    pub fp_norm: f64,
}

impl CrResiduals {
    pub fn max(&self) -> f64 {
        self.jd_closure.max(self.jdperp_normality).max(self.fp_norm)
    }
}

pub fn cr_residuals(imm: &Immersion, cr: &CrStructure, u: &Point) -> Result<CrResiduals> {
    let space = TangentSpace::at(imm, u)?;
    let frames = cr.frames(&space)?;
    let j = space.j()?;
    let mut jd_closure: f64 = 0.0;
    for e in &frames.d {
        let je = j * e;
        jd_closure = jd_closure.max(space.norm(&(&je - frames.project_d(&space, &je))));
    }
    let mut jdperp_normality: f64 = 0.0;
    for e in &frames.dperp {
        jdperp_normality = jdperp_normality.max(space.norm(&space.tangential(&(j * e))));
    }
    let fp_norm = pftf(&space)?.fp_norm();
    Ok(CrResiduals { jd_closure, jdperp_normality, fp_norm })
}

/// Norms of `A_{FZ}X` and `A*_{FZ}X` over `X ∈ D`, `Z ∈ D⊥` frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrProduct {
    pub a_norm: f64,
    pub a_star_norm: f64,
    /// `None` when the CR structure is not proper.
    pub verdict: Option<bool>,
}

pub fn cr_product_criterion(
    imm: &Immersion,
    pair: &DualPair,
    cr: &CrStructure,
    u: &Point,
    cfg: &FdConfig,
    tol: f64,
) -> Result<CrProduct> {
    if !cr.is_proper() {
        return Ok(CrProduct { a_norm: 0.0, a_star_norm: 0.0, verdict: None });
    }
    let geom = induced_geometry(imm, pair, u, cfg)?;
    let space = &geom.space;
    let frames = cr.frames(space)?;
    let j = space.j()?;
    let mut a_norm: f64 = 0.0;
    let mut a_star_norm: f64 = 0.0;
    for z in &frames.dperp {
        let fz = space.normal_part(&(j * z));
        let a = shape_operator(&geom, &fz, false)?;
        let a_star = shape_operator(&geom, &fz, true)?;
        for x in &frames.d_domain {
            a_norm = a_norm.max(space.domain_norm(&(&a * x)));
            a_star_norm = a_star_norm.max(space.domain_norm(&(&a_star * x)));
        }
    }
    Ok(CrProduct { a_norm, a_star_norm, verdict: Some(a_norm <= tol && a_star_norm <= tol) })
}

/// Residuals of the hypotheses and conclusion of the Riemannian-product criterion for
/// generic submanifolds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannianProduct {
    /// `‖f‖`: zero exactly when the submanifold is generic.
    pub f_residual: f64,
    /// `P∇*_X Y - ∇_X PY` over coordinate fields, normalized.
    pub py_residual: f64,
    /// `‖B*(X, D)‖` over coordinate `X` and the `D` frame.
    pub bstar_d_residual: f64,
    /// `‖B*(X, PY)‖` over coordinate fields.
    pub conclusion_b_residual: f64,
}

impl RiemannianProduct {
    pub fn hypotheses(&self) -> f64 {
        self.f_residual.max(self.py_residual).max(self.bstar_d_residual)
    }
}

pub fn riemannian_product_hypotheses(
    imm: &Immersion,
    pair: &DualPair,
    cr: &CrStructure,
    u: &Point,
    cfg: &FdConfig,
) -> Result<RiemannianProduct> {
    let geom = induced_geometry(imm, pair, u, cfg)?;
    let space = &geom.space;
    let frames = cr.frames(space)?;
    let split = pftf(space)?;
    let j = space.j()?.clone();
    let m = space.dim();
    let unit = |a: usize| Vector::from_fn(m, |r, _| if r == a { 1.0 } else { 0.0 });

    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for col in 0..m {
        // PY for the coordinate field Y = ∂_col, as an ambient field along the immersion
        let py_field = |v: &Point| -> Result<Vector> {
            let s = TangentSpace::at(imm, v)?;
            let jy = s.j()? * s.jacobian.column(col);
            Ok(s.tangential(&jy))
        };
        for axis in 0..m {
            let d = along_derivative(imm, &geom.ambient.nabla, space, axis, py_field, cfg)?;
            let lhs = space.tangential(&d);
            let nabla_star_xy = space.push(&geom.conn.gamma_star.apply(&unit(axis), &unit(col)));
            let rhs = space.tangential(&(&j * nabla_star_xy));
            diff = diff.max(space.norm(&(&lhs - &rhs)));
            scale = scale.max(space.norm(&lhs)).max(space.norm(&rhs));
        }
    }

    let mut bstar_d: f64 = 0.0;
    let mut conclusion: f64 = 0.0;
    for a in 0..m {
        let x = unit(a);
        for y in &frames.d_domain {
            bstar_d = bstar_d.max(space.norm(&geom.b_form(Form::Star, &x, y)));
        }
        for c in 0..m {
            let py = space.p_op(&unit(c))?;
            conclusion = conclusion.max(space.norm(&geom.b_form(Form::Star, &x, &py)));
        }
    }
    Ok(RiemannianProduct {
        f_residual: split.f.amax(),
        py_residual: normalized_residual(diff, scale),
        bstar_d_residual: bstar_d,
        conclusion_b_residual: conclusion,
    })
}
