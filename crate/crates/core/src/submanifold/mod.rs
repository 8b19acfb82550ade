//! Immersions into a chart and the geometry they induce: connections, both
//! imbedding curvature tensors, shape operators, normal connections and the
//! tangential/normal splitting of `J`.

mod cr;
mod propositions;

use std::sync::Arc;

pub use cr::{
    cr_product_criterion, cr_residuals, riemannian_product_hypotheses, CrFrames, CrProduct, CrResiduals, CrStructure,
    RiemannianProduct,
};
pub use propositions::{proposition_suite, PropositionCheck, PropositionReport, Verdict};

use crate::chart::{
    checked_inverse, complement_from, complement_indices, gram_schmidt, inner, norm, normalized_residual,
    partial_derivative, Chart, Domain, FdConfig, Frame, Matrix, Point, Vector,
};
use crate::curvature::{curvature_at, CurvatureAt};
use crate::error::{GeomError, Result};
use crate::statstruct::DualPair;
use crate::tensor::{ConnectionCoeffs, Tensor3};

pub type PointMap = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
pub type JacobianMap = Arc<dyn Fn(&Point) -> Matrix + Send + Sync>;
/// Second derivatives `∂_i ∂_j f`, stored at index `i * m + j`.
pub type HessianMap = Arc<dyn Fn(&Point) -> Vec<Vector> + Send + Sync>;
/// Vector field on the submanifold in domain coordinates.
pub type DomainField = Arc<dyn Fn(&Point) -> Vector + Send + Sync>;

/// Relative size below which a vector is taken to lie in a claimed subspace.
pub const SECTOR_TOL: f64 = 1e-8;

/// Smooth map from a coordinate box into an ambient chart.
#[derive(Clone)]
pub struct Immersion {
    pub name: String,
    pub domain: Domain,
    pub ambient: Arc<Chart>,
    map: PointMap,
    jacobian: Option<JacobianMap>,
    hessian: Option<HessianMap>,
    fd: FdConfig,
}

impl std::fmt::Debug for Immersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Immersion")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("ambient", &self.ambient.name)
            .finish()
    }
}

impl Immersion {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        ambient: Arc<Chart>,
        map: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Result<Self> {
        if domain.dim() == 0 || domain.dim() >= ambient.dim() {
            return Err(GeomError::Configuration(format!(
                "immersion of dimension {} into an ambient of dimension {}",
                domain.dim(),
                ambient.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            domain,
            ambient,
            map: Arc::new(map),
            jacobian: None,
            hessian: None,
            fd: FdConfig::default(),
        })
    }

    pub fn with_jacobian(mut self, j: impl Fn(&Point) -> Matrix + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(&Point) -> Vec<Vector> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    /// Finite-difference settings used when no closed-form derivative is attached.
    pub fn with_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn point(&self, u: &Point) -> Result<Point> {
        self.domain.check(u)?;
        let x = (self.map)(u);
        if x.len() != self.ambient_dim() {
            return Err(GeomError::ShapeMismatch { expected: self.ambient_dim(), got: x.len() });
        }
        self.ambient.domain.check(&x)?;
        Ok(x)
    }

    /// `N × m` matrix whose column `a` is `∂_a f`.
    pub fn jacobian_at(&self, u: &Point) -> Result<Matrix> {
        self.domain.check(u)?;
        if let Some(j) = &self.jacobian {
            return Ok(j(u));
        }
        let cols: Vec<Vector> = (0..self.dim())
            .map(|a| partial_derivative(|q: &Point| Ok((self.map)(q)), u, a, &self.fd, &self.domain))
            .collect::<Result<_>>()?;
        Ok(Matrix::from_columns(&cols))
    }

    pub fn hessian_at(&self, u: &Point) -> Result<Vec<Vector>> {
        self.domain.check(u)?;
        if let Some(h) = &self.hessian {
            return Ok(h(u));
        }
        let m = self.dim();
        let dj: Vec<Matrix> = (0..m)
            .map(|a| partial_derivative(|q: &Point| self.jacobian_at(q), u, a, &self.fd, &self.domain))
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                // symmetrize the two finite-difference orders
                out.push((dj[i].column(j) + dj[j].column(i)) * 0.5);
            }
        }
        Ok(out)
    }
}

/// Tangent and normal spaces of an immersion at one domain point.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    pub u: Point,
    pub x: Point,
    pub jacobian: Matrix,
    pub ambient_metric: Matrix,
    pub metric: Matrix,
    pub metric_inv: Matrix,
    /// Orthonormal tangent frame in ambient coordinates.
    pub tangent: Frame,
    /// The same frame in domain coordinates.
    pub tangent_domain: Vec<Vector>,
    pub normal: Frame,
    /// Standard-basis indices completing the tangent frame; reused at nearby
    /// points so the normal frame varies smoothly.
    pub normal_candidates: Vec<usize>,
    pub complex_structure: Option<Matrix>,
}

impl TangentSpace {
    pub fn at(imm: &Immersion, u: &Point) -> Result<Self> {
        Self::build(imm, u, None)
    }

    pub fn with_candidates(imm: &Immersion, u: &Point, candidates: &[usize]) -> Result<Self> {
        Self::build(imm, u, Some(candidates))
    }

    fn build(imm: &Immersion, u: &Point, candidates: Option<&[usize]>) -> Result<Self> {
        let x = imm.point(u)?;
        let jacobian = imm.jacobian_at(u)?;
        let ambient_metric = imm.ambient.metric_at(&x)?;
        let metric = jacobian.transpose() * &ambient_metric * &jacobian;
        let metric = (&metric + metric.transpose()) * 0.5;
        let metric_inv = checked_inverse(&metric)?;
        let cols: Vec<Vector> = (0..imm.dim()).map(|a| jacobian.column(a).into_owned()).collect();
        let tangent = gram_schmidt(&cols, &ambient_metric)?;
        let normal_candidates = match candidates {
            Some(c) => c.to_vec(),
            None => complement_indices(&tangent, &ambient_metric)?,
        };
        let normal = complement_from(&tangent, &ambient_metric, &normal_candidates)?;
        let complex_structure =
            if imm.ambient.has_complex_structure() { Some(imm.ambient.complex_structure_at(&x)?) } else { None };
        let mut space = Self {
            u: u.clone(),
            x,
            jacobian,
            ambient_metric,
            metric,
            metric_inv,
            tangent,
            tangent_domain: Vec::new(),
            normal,
            normal_candidates,
            complex_structure,
        };
        space.tangent_domain = space.tangent.vectors.iter().map(|e| space.pull(e)).collect();
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn codim(&self) -> usize {
        self.normal.len()
    }

    /// Domain vector to ambient vector.
    pub fn push(&self, x: &Vector) -> Vector {
        &self.jacobian * x
    }

    /// Domain components of the tangential part of an ambient vector.
    pub fn pull(&self, v: &Vector) -> Vector {
        &self.metric_inv * (self.jacobian.transpose() * (&self.ambient_metric * v))
    }

    pub fn tangential(&self, v: &Vector) -> Vector {
        self.push(&self.pull(v))
    }

    pub fn normal_part(&self, v: &Vector) -> Vector {
        v - self.tangential(v)
    }

    pub fn inner(&self, a: &Vector, b: &Vector) -> f64 {
        inner(&self.ambient_metric, a, b)
    }

    pub fn norm(&self, a: &Vector) -> f64 {
        norm(&self.ambient_metric, a)
    }

    /// Norm of a domain vector in the induced metric.
    pub fn domain_norm(&self, x: &Vector) -> f64 {
        norm(&self.metric, x)
    }

    pub fn j(&self) -> Result<&Matrix> {
        self.complex_structure
            .as_ref()
            .ok_or_else(|| GeomError::Configuration("ambient chart has no complex structure".into()))
    }

    /// `PX` in domain coordinates for a domain vector `X`.
    pub fn p_op(&self, x: &Vector) -> Result<Vector> {
        Ok(self.pull(&(self.j()? * self.push(x))))
    }

    /// `FX` as an ambient normal vector.
    pub fn f_tangent(&self, x: &Vector) -> Result<Vector> {
        Ok(self.normal_part(&(self.j()? * self.push(x))))
    }

    /// `tV` in domain coordinates for an ambient normal vector `V`.
    pub fn t_op(&self, v: &Vector) -> Result<Vector> {
        Ok(self.pull(&(self.j()? * v)))
    }

    /// `fV` as an ambient normal vector.
    pub fn f_normal(&self, v: &Vector) -> Result<Vector> {
        Ok(self.normal_part(&(self.j()? * v)))
    }
}

/// Which ambient connection a bilinear form or derivative refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Plain,
    Star,
    Levi,
}

/// Induced connections and imbedding curvature tensors at one point.
#[derive(Debug, Clone)]
pub struct InducedConnection {
    pub gamma: ConnectionCoeffs,
    pub gamma_star: ConnectionCoeffs,
    pub gamma_levi: ConnectionCoeffs,
    /// `B(∂_i, ∂_j)` at index `i * m + j`, as ambient vectors.
    pub b: Vec<Vector>,
    pub b_star: Vec<Vector>,
    pub b_levi: Vec<Vector>,
}

/// Ambient Christoffel symbols of the three connections at `x`.
#[derive(Debug, Clone)]
pub struct AmbientConnections {
    pub nabla: ConnectionCoeffs,
    pub nabla_star: ConnectionCoeffs,
    pub levi: ConnectionCoeffs,
}

impl AmbientConnections {
    pub fn at(imm: &Immersion, pair: &DualPair, x: &Point, cfg: &FdConfig) -> Result<Self> {
        Ok(Self {
            nabla: (pair.nabla)(x)?,
            nabla_star: (pair.nabla_star)(x)?,
            levi: imm.ambient.levi_civita_at(x, cfg)?,
        })
    }

    pub fn get(&self, form: Form) -> &ConnectionCoeffs {
        match form {
            Form::Plain => &self.nabla,
            Form::Star => &self.nabla_star,
            Form::Levi => &self.levi,
        }
    }
}

pub fn induced_connection(
    imm: &Immersion,
    pair: &DualPair,
    space: &TangentSpace,
    cfg: &FdConfig,
) -> Result<(InducedConnection, AmbientConnections)> {
    let ambient = AmbientConnections::at(imm, pair, &space.x, cfg)?;
    let hess = imm.hessian_at(&space.u)?;
    let m = space.dim();
    let cols: Vec<Vector> = (0..m).map(|a| space.jacobian.column(a).into_owned()).collect();
    let split = |conn: &ConnectionCoeffs| {
        let mut gamma = Tensor3::zeros(m);
        let mut b = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let v = &hess[i * m + j] + conn.apply(&cols[i], &cols[j]);
                let t = space.pull(&v);
                for k in 0..m {
                    gamma.set(k, i, j, t[k]);
                }
                b.push(&v - space.push(&t));
            }
        }
        (ConnectionCoeffs::new(gamma), b)
    };
    let (gamma, b) = split(&ambient.nabla);
    let (gamma_star, b_star) = split(&ambient.nabla_star);
    let (gamma_levi, b_levi) = split(&ambient.levi);
    Ok((InducedConnection { gamma, gamma_star, gamma_levi, b, b_star, b_levi }, ambient))
}

/// Everything the submanifold checks need at one domain point.
#[derive(Debug, Clone)]
pub struct InducedGeometry {
    pub space: TangentSpace,
    pub ambient: AmbientConnections,
    pub conn: InducedConnection,
    /// `h^r_ij = ḡ(B(e_i, e_j), e_r)`, one `m × m` matrix per normal frame vector.
    pub h: Vec<Matrix>,
    pub h_star: Vec<Matrix>,
    pub h_levi: Vec<Matrix>,
    pub mean: Vector,
    pub mean_star: Vector,
    /// `ω_i[s][r] = ḡ(∇̄_{∂_i} e_r, e_s)` for the normal frame.
    pub normal_gamma: Vec<Matrix>,
    pub normal_gamma_star: Vec<Matrix>,
}

impl InducedGeometry {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn b_coord(&self, form: Form, i: usize, j: usize) -> &Vector {
        let m = self.dim();
        match form {
            Form::Plain => &self.conn.b[i * m + j],
            Form::Star => &self.conn.b_star[i * m + j],
            Form::Levi => &self.conn.b_levi[i * m + j],
        }
    }

    /// `B(X, Y)` for domain vectors.
    pub fn b_form(&self, form: Form, x: &Vector, y: &Vector) -> Vector {
        let m = self.dim();
        let mut out = Vector::zeros(self.space.x.len());
        for i in 0..m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out.axpy(c, self.b_coord(form, i, j), 1.0);
                }
            }
        }
        out
    }

    pub fn gamma(&self, form: Form) -> &ConnectionCoeffs {
        match form {
            Form::Plain => &self.conn.gamma,
            Form::Star => &self.conn.gamma_star,
            Form::Levi => &self.conn.gamma_levi,
        }
    }

    pub fn mean_of(&self, form: Form) -> Vector {
        match form {
            Form::Plain => self.mean.clone(),
            Form::Star => self.mean_star.clone(),
            Form::Levi => (&self.mean + &self.mean_star) * 0.5,
        }
    }

    /// `max |B_ij - B_ji|` over both tensors.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for form in [Form::Plain, Form::Star] {
                    d = d.max((self.b_coord(form, i, j) - self.b_coord(form, j, i)).amax());
                }
            }
        }
        d
    }

    /// `max |2B⁰ - B - B*|`, normalized.
    pub fn average_defect(&self) -> f64 {
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for ((b, bs), b0) in self.conn.b.iter().zip(&self.conn.b_star).zip(&self.conn.b_levi) {
            diff = diff.max((b0 * 2.0 - b - bs).amax());
            scale = scale.max(b.amax()).max(bs.amax());
        }
        normalized_residual(diff, scale)
    }
}

fn h_coefficients(space: &TangentSpace, b: &[Vector]) -> Vec<Matrix> {
    let m = space.dim();
    space
        .normal
        .vectors
        .iter()
        .map(|n| {
            Matrix::from_fn(m, m, |a, c| {
                let ea = &space.tangent_domain[a];
                let ec = &space.tangent_domain[c];
                let mut s = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        s += ea[i] * ec[j] * space.inner(&b[i * m + j], n);
                    }
                }
                s
            })
        })
        .collect()
}

fn mean_vector(space: &TangentSpace, b: &[Vector]) -> Vector {
    let m = space.dim();
    let mut h = Vector::zeros(space.x.len());
    for i in 0..m {
        for j in 0..m {
            h.axpy(space.metric_inv[(i, j)], &b[i * m + j], 1.0);
        }
    }
    h / m as f64
}

/// `∂_axis W + Γ̄(∂_axis f, W)`: the ambient covariant derivative of a vector
/// field `W` along the submanifold, given in ambient coordinates.
pub fn along_derivative<F>(
    imm: &Immersion,
    conn: &ConnectionCoeffs,
    space: &TangentSpace,
    axis: usize,
    field: F,
    cfg: &FdConfig,
) -> Result<Vector>
where
    F: Fn(&Point) -> Result<Vector>,
{
    let d = partial_derivative(&field, &space.u, axis, cfg, &imm.domain)?;
    let w = field(&space.u)?;
    let t = space.jacobian.column(axis).into_owned();
    Ok(d + conn.apply(&t, &w))
}

/// Same derivative along an arbitrary domain direction `x`.
pub fn along_direction<F>(
    imm: &Immersion,
    conn: &ConnectionCoeffs,
    space: &TangentSpace,
    x: &Vector,
    field: F,
    cfg: &FdConfig,
) -> Result<Vector>
where
    F: Fn(&Point) -> Result<Vector>,
{
    let mut out = Vector::zeros(space.x.len());
    for a in 0..space.dim() {
        if x[a] != 0.0 {
            out.axpy(x[a], &along_derivative(imm, conn, space, a, &field, cfg)?, 1.0);
        }
    }
    Ok(out)
}

pub fn induced_geometry(imm: &Immersion, pair: &DualPair, u: &Point, cfg: &FdConfig) -> Result<InducedGeometry> {
    let space = TangentSpace::at(imm, u)?;
    let (conn, ambient) = induced_connection(imm, pair, &space, cfg)?;
    let h = h_coefficients(&space, &conn.b);
    let h_star = h_coefficients(&space, &conn.b_star);
    let h_levi = h_coefficients(&space, &conn.b_levi);
    let mean = mean_vector(&space, &conn.b);
    let mean_star = mean_vector(&space, &conn.b_star);

    let q = space.codim();
    let cands = space.normal_candidates.clone();
    let mut normal_gamma = Vec::with_capacity(space.dim());
    let mut normal_gamma_star = Vec::with_capacity(space.dim());
    for axis in 0..space.dim() {
        let mut w = Matrix::zeros(q, q);
        let mut ws = Matrix::zeros(q, q);
        for r in 0..q {
            let field = |v: &Point| -> Result<Vector> {
                Ok(TangentSpace::with_candidates(imm, v, &cands)?.normal.vectors[r].clone())
            };
            let d = along_derivative(imm, &ambient.nabla, &space, axis, field, cfg)?;
            let ds = along_derivative(imm, &ambient.nabla_star, &space, axis, field, cfg)?;
            for s in 0..q {
                w[(s, r)] = space.inner(&d, &space.normal.vectors[s]);
                ws[(s, r)] = space.inner(&ds, &space.normal.vectors[s]);
            }
        }
        normal_gamma.push(w);
        normal_gamma_star.push(ws);
    }
    Ok(InducedGeometry { space, ambient, conn, h, h_star, h_levi, mean, mean_star, normal_gamma, normal_gamma_star })
}

/// `A*_V` (from `B`) when `starred`, else `A_V` (from `B*`), as a domain endomorphism.
pub fn shape_operator(geom: &InducedGeometry, v: &Vector, starred: bool) -> Result<Matrix> {
    let space = &geom.space;
    let tangential = space.norm(&space.tangential(v));
    if tangential > SECTOR_TOL * (1.0 + space.norm(v)) {
        return Err(GeomError::SectorMismatch(tangential));
    }
    let m = geom.dim();
    let form = if starred { Form::Plain } else { Form::Star };
    let lowered = Matrix::from_fn(m, m, |j, i| space.inner(geom.b_coord(form, i, j), v));
    Ok(&space.metric_inv * lowered)
}

/// Tangential/normal splitting of `J` in orthonormal frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PFtf {
    /// `m × m`, tangent frame to tangent frame.
    pub p: Matrix,
    /// `(N - m) × m`, tangent frame to normal frame.
    pub f_tan: Matrix,
    /// `m × (N - m)`, normal frame to tangent frame.
    pub t: Matrix,
    /// `(N - m) × (N - m)`, normal frame to normal frame.
    pub f: Matrix,
    /// Largest `|Jv - (tangential + normal parts)|` over frame vectors.
    pub reconstruction: f64,
}

impl PFtf {
    /// `‖F ∘ P‖` as a max-entry norm.
    pub fn fp_norm(&self) -> f64 {
        (&self.f_tan * &self.p).amax()
    }
}

pub fn pftf(space: &TangentSpace) -> Result<PFtf> {
    let j = space.j()?;
    let m = space.dim();
    let q = space.codim();
    let mut p = Matrix::zeros(m, m);
    let mut f_tan = Matrix::zeros(q, m);
    let mut t = Matrix::zeros(m, q);
    let mut f = Matrix::zeros(q, q);
    let mut recon: f64 = 0.0;
    for (a, e) in space.tangent.vectors.iter().enumerate() {
        let je = j * e;
        let pc = space.tangent.components(&je);
        let fc = space.normal.components(&je);
        p.set_column(a, &pc);
        f_tan.set_column(a, &fc);
        recon = recon.max((&je - space.tangent.project(&je) - space.normal.project(&je)).amax());
    }
    for (r, n) in space.normal.vectors.iter().enumerate() {
        let jn = j * n;
        t.set_column(r, &space.tangent.components(&jn));
        f.set_column(r, &space.normal.components(&jn));
        recon = recon.max((&jn - space.tangent.project(&jn) - space.normal.project(&jn)).amax());
    }
    Ok(PFtf { p, f_tan, t, f, reconstruction: recon })
}

/// Curvatures of the induced connections `∇` and `∇*` at `u`.
pub fn intrinsic_curvatures(imm: &Immersion, pair: &DualPair, u: &Point, cfg: &FdConfig, curv: &FdConfig) -> Result<(CurvatureAt, CurvatureAt)> {
    let field = |form: Form| {
        move |v: &Point| -> Result<ConnectionCoeffs> {
            let space = TangentSpace::at(imm, v)?;
            let (c, _) = induced_connection(imm, pair, &space, cfg)?;
            Ok(match form {
                Form::Plain => c.gamma,
                Form::Star => c.gamma_star,
                Form::Levi => c.gamma_levi,
            })
        }
    };
    let r = curvature_at(field(Form::Plain), u, curv, &imm.domain)?;
    let rs = curvature_at(field(Form::Star), u, curv, &imm.domain)?;
    Ok((r, rs))
}

/// Residuals of the Gauss equation for `∇` and for `∇*` over coordinate probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussResidual {
    pub plain: f64,
    pub starred: f64,
}

impl GaussResidual {
    pub fn max(&self) -> f64 {
        self.plain.max(self.starred)
    }
}

/// Compare `ḡ(R̄(X,Y)Z,W)` with `g(R(X,Y)Z,W) + ḡ(B(X,Z),B*(Y,W)) - ḡ(B*(X,W),B(Y,Z))`
/// and the analogue with the roles of the two connections exchanged.
pub fn gauss_residual_from(
    geom: &InducedGeometry,
    ambient: (&CurvatureAt, &CurvatureAt),
    intrinsic: (&CurvatureAt, &CurvatureAt),
) -> GaussResidual {
    let space = &geom.space;
    let m = geom.dim();
    let cols: Vec<Vector> = (0..m).map(|a| space.jacobian.column(a).into_owned()).collect();
    let e = |a: usize| Vector::from_fn(m, |r, _| if r == a { 1.0 } else { 0.0 });
    let mut out = [0.0_f64; 2];
    for (slot, (rbar, r, first, second)) in [
        (ambient.0, intrinsic.0, Form::Plain, Form::Star),
        (ambient.1, intrinsic.1, Form::Star, Form::Plain),
    ]
    .into_iter()
    .enumerate()
    {
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                for c in 0..m {
                    let rb = rbar.r.apply(&cols[a], &cols[b], &cols[c]);
                    let ri = space.push(&r.r.apply(&e(a), &e(b), &e(c)));
                    for d in 0..m {
                        let lhs = space.inner(&rb, &cols[d]);
                        let intr = space.inner(&ri, &cols[d]);
                        let t1 = space.inner(geom.b_coord(first, a, c), geom.b_coord(second, b, d));
                        let t2 = space.inner(geom.b_coord(second, a, d), geom.b_coord(first, b, c));
                        diff = diff.max((lhs - intr - t1 + t2).abs());
                        scale = scale.max(lhs.abs()).max(intr.abs()).max(t1.abs()).max(t2.abs());
                    }
                }
            }
        }
        out[slot] = normalized_residual(diff, scale);
    }
    GaussResidual { plain: out[0], starred: out[1] }
}

pub fn gauss_equation_residual(imm: &Immersion, pair: &DualPair, u: &Point, cfg: &FdConfig) -> Result<GaussResidual> {
    let curv = FdConfig { tol_identity: cfg.tol_identity, ..FdConfig::curvature() };
    let geom = induced_geometry(imm, pair, u, cfg)?;
    let rb = curvature_at(|q: &Point| (pair.nabla)(q), &geom.space.x, &curv, &imm.ambient.domain)?;
    let rbs = curvature_at(|q: &Point| (pair.nabla_star)(q), &geom.space.x, &curv, &imm.ambient.domain)?;
    let (r, rs) = intrinsic_curvatures(imm, pair, u, cfg, &curv)?;
    Ok(gauss_residual_from(&geom, (&rb, &rbs), (&r, &rs)))
}
