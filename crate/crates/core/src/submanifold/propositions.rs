//! Residual checks for the structural propositions on statistical and
//! CR-statistical submanifolds of holomorphic statistical manifolds.
//!
//! Each check reports hypothesis residuals next to conclusion residuals; a
//! conclusion is only asserted when every hypothesis residual is within
//! tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::cr::CrFrames;
use super::{
    along_derivative, along_direction, cr_residuals, induced_geometry, intrinsic_curvatures, pftf, shape_operator,
    CrStructure, Form, Immersion, InducedGeometry, TangentSpace,
};
use crate::chart::{gram_schmidt, normalized_residual, partial_derivative, FdConfig, Point, Vector};
use crate::curvature::{averaged_curvature, s_tensor};
use crate::error::{GeomError, Result};
use crate::statstruct::DualPair;

/// Named proposition checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropositionCheck {
    /// `A*_V tU = A*_U tV` exactly when `∇⊥ fV = f ∇⊥* V`.
    NormalFParallel,
    /// `∇⊥(FY) = F∇*Y` exactly when `∇(tV) = t∇⊥* V`.
    TangentFParallel,
    /// Holomorphic submanifolds: traceless `B`, `B*` and the holomorphic sectional Gauss identity.
    HolomorphicTrace,
    /// `A_{fV} X = -A*_V PX` for `X ∈ D`, `V ∈ μ`.
    ShapeFAnticommute,
    /// `∇⊥_X JY - ∇⊥_Y JX ∈ JD⊥` for `X, Y ∈ D⊥`.
    TotallyRealNormalClosure,
    /// `D` is minimal for both induced connections.
    HolomorphicMinimality,
    /// `B(JX, Y) = B(JY, X)` on `D` when `D` is involutive.
    InvolutiveBSymmetry,
    /// `A*_V JX = -J A*_V X` on mixed totally geodesic submanifolds.
    MixedGeodesicShapeAnticommute,
}

impl PropositionCheck {
    pub const ALL: [PropositionCheck; 8] = [
        Self::NormalFParallel,
        Self::TangentFParallel,
        Self::HolomorphicTrace,
        Self::ShapeFAnticommute,
        Self::TotallyRealNormalClosure,
        Self::HolomorphicMinimality,
        Self::InvolutiveBSymmetry,
        Self::MixedGeodesicShapeAnticommute,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::NormalFParallel => "normal-f-parallel",
            Self::TangentFParallel => "tangent-f-parallel",
            Self::HolomorphicTrace => "holomorphic-trace",
            Self::ShapeFAnticommute => "shape-f-anticommute",
            Self::TotallyRealNormalClosure => "totally-real-normal-closure",
            Self::HolomorphicMinimality => "holomorphic-minimality",
            Self::InvolutiveBSymmetry => "involutive-b-symmetry",
            Self::MixedGeodesicShapeAnticommute => "mixed-geodesic-shape-anticommute",
        }
    }
}

impl fmt::Display for PropositionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PropositionCheck {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.id() == s).ok_or_else(|| GeomError::UnknownCheck(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub check: PropositionCheck,
    pub hypotheses: BTreeMap<String, f64>,
    pub conclusions: BTreeMap<String, f64>,
    /// Informational values that are not asserted.
    pub diagnostics: BTreeMap<String, f64>,
}

impl PropositionReport {
    fn new(check: PropositionCheck) -> Self {
        Self { check, hypotheses: BTreeMap::new(), conclusions: BTreeMap::new(), diagnostics: BTreeMap::new() }
    }

    fn hyp(&mut self, k: &str, v: f64) {
        self.hypotheses.insert(k.to_string(), v);
    }

    fn concl(&mut self, k: &str, v: f64) {
        self.conclusions.insert(k.to_string(), v);
    }

    fn diag(&mut self, k: &str, v: f64) {
        self.diagnostics.insert(k.to_string(), v);
    }

    pub fn max_hypothesis(&self) -> f64 {
        self.hypotheses.values().fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_conclusion(&self) -> f64 {
        self.conclusions.values().fold(0.0, |a, &b| a.max(b))
    }

    pub fn verdict(&self, hypothesis_tol: f64, conclusion_tol: f64) -> Verdict {
        if self.hypotheses.values().any(|v| !(*v <= hypothesis_tol)) {
            Verdict::NotApplicable
        } else if self.conclusions.values().all(|v| *v <= conclusion_tol) {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }
}

/// Running `max |lhs - rhs|` with the operand scale for normalization.
#[derive(Default)]
struct Residual {
    diff: f64,
    scale: f64,
}

impl Residual {
    fn push(&mut self, lhs: f64, rhs: f64) {
        self.diff = self.diff.max((lhs - rhs).abs());
        self.scale = self.scale.max(lhs.abs()).max(rhs.abs());
    }

    fn push_norms(&mut self, diff: f64, a: f64, b: f64) {
        self.diff = self.diff.max(diff);
        self.scale = self.scale.max(a).max(b);
    }

    fn value(&self) -> f64 {
        normalized_residual(self.diff, self.scale)
    }
}

fn unit(m: usize, a: usize) -> Vector {
    Vector::from_fn(m, |r, _| if r == a { 1.0 } else { 0.0 })
}

fn cr_hypotheses(report: &mut PropositionReport, imm: &Immersion, cr: &CrStructure, u: &Point) -> Result<()> {
    let r = cr_residuals(imm, cr, u)?;
    report.hyp("jd_closure", r.jd_closure);
    report.hyp("jdperp_normality", r.jdperp_normality);
    report.hyp("fp_norm", r.fp_norm);
    Ok(())
}

/// Component of `[X, Y]` outside `D`, over pairs of the supplied `D` fields.
fn involutivity(imm: &Immersion, cr: &CrStructure, space: &TangentSpace, frames: &CrFrames, cfg: &FdConfig) -> Result<f64> {
    let m = space.dim();
    let mut worst: f64 = 0.0;
    let derivs: Vec<Vec<Vector>> = cr
        .d_fields
        .iter()
        .map(|f| (0..m).map(|a| partial_derivative(|q: &Point| Ok(f(q)), &space.u, a, cfg, &imm.domain)).collect())
        .collect::<Result<_>>()?;
    for a in 0..cr.d_fields.len() {
        for b in (a + 1)..cr.d_fields.len() {
            let x = (cr.d_fields[a])(&space.u);
            let y = (cr.d_fields[b])(&space.u);
            let mut bracket = Vector::zeros(m);
            for i in 0..m {
                bracket.axpy(x[i], &derivs[b][i], 1.0);
                bracket.axpy(-y[i], &derivs[a][i], 1.0);
            }
            let amb = space.push(&bracket);
            worst = worst.max(space.norm(&frames.project_dperp(space, &amb)));
        }
    }
    Ok(worst)
}

/// Largest `‖B(X, Z)‖` over `X ∈ D`, `Z ∈ D⊥` frames.
fn mixed_geodesic(geom: &InducedGeometry, frames: &CrFrames, form: Form) -> f64 {
    let mut worst: f64 = 0.0;
    for x in &frames.d_domain {
        for z in &frames.dperp_domain {
            worst = worst.max(geom.space.norm(&geom.b_form(form, x, z)));
        }
    }
    worst
}

/// Evaluate one proposition check at the domain point `u`.
pub fn proposition_suite(
    imm: &Immersion,
    pair: &DualPair,
    cr: &CrStructure,
    u: &Point,
    check: PropositionCheck,
    cfg: &FdConfig,
) -> Result<PropositionReport> {
    let geom = induced_geometry(imm, pair, u, cfg)?;
    let mut report = PropositionReport::new(check);
    match check {
        PropositionCheck::NormalFParallel => normal_f_parallel(imm, &geom, cfg, &mut report)?,
        PropositionCheck::TangentFParallel => tangent_f_parallel(imm, &geom, cfg, &mut report)?,
        PropositionCheck::HolomorphicTrace => holomorphic_trace(imm, pair, &geom, cfg, &mut report)?,
        PropositionCheck::ShapeFAnticommute => {
            cr_hypotheses(&mut report, imm, cr, u)?;
            shape_f_anticommute(cr, &geom, &mut report)?;
        }
        PropositionCheck::TotallyRealNormalClosure => {
            cr_hypotheses(&mut report, imm, cr, u)?;
            totally_real_normal_closure(imm, cr, &geom, cfg, &mut report)?;
        }
        PropositionCheck::HolomorphicMinimality => {
            cr_hypotheses(&mut report, imm, cr, u)?;
            holomorphic_minimality(imm, cr, &geom, cfg, &mut report)?;
        }
        PropositionCheck::InvolutiveBSymmetry => {
            cr_hypotheses(&mut report, imm, cr, u)?;
            involutive_b_symmetry(imm, cr, &geom, cfg, &mut report)?;
        }
        PropositionCheck::MixedGeodesicShapeAnticommute => {
            cr_hypotheses(&mut report, imm, cr, u)?;
            mixed_geodesic_shape(imm, cr, &geom, cfg, &mut report)?;
        }
    }
    Ok(report)
}

fn normal_f_parallel(imm: &Immersion, geom: &InducedGeometry, cfg: &FdConfig, report: &mut PropositionReport) -> Result<()> {
    let space = &geom.space;
    let j = space.j()?;
    let m = space.dim();
    let q = space.codim();
    let cands = space.normal_candidates.clone();
    let normal_at = |v: &Point| TangentSpace::with_candidates(imm, v, &cands);
    let mut equiv = Residual::default();
    let mut lhs_max: f64 = 0.0;
    let mut rhs_max: f64 = 0.0;
    for r in 0..q {
        let v = &space.normal.vectors[r];
        let fv_field = |p: &Point| -> Result<Vector> {
            let s = normal_at(p)?;
            s.f_normal(&s.normal.vectors[r])
        };
        let v_field = |p: &Point| -> Result<Vector> { Ok(normal_at(p)?.normal.vectors[r].clone()) };
        let a_star_v = shape_operator(geom, v, true)?;
        let tv = space.t_op(v)?;
        for axis in 0..m {
            let d_fv = along_derivative(imm, &geom.ambient.nabla, space, axis, fv_field, cfg)?;
            let d_star_v = along_derivative(imm, &geom.ambient.nabla_star, space, axis, v_field, cfg)?;
            let f_nabla_star_v = space.normal_part(&(j * space.normal_part(&d_star_v)));
            let lhs_vec = space.normal_part(&d_fv) - f_nabla_star_v;
            for s in 0..q {
                let un = &space.normal.vectors[s];
                let lhs = space.inner(&lhs_vec, un);
                let a_star_u = shape_operator(geom, un, true)?;
                let w = &a_star_v * space.t_op(un)? - &a_star_u * &tv;
                let rhs = (&space.metric * w)[axis];
                equiv.push(lhs, rhs);
                lhs_max = lhs_max.max(lhs.abs());
                rhs_max = rhs_max.max(rhs.abs());
            }
        }
    }
    report.concl("equivalence", equiv.value());
    report.diag("normal_f_parallel", lhs_max);
    report.diag("shape_t_symmetry", rhs_max);
    Ok(())
}

fn tangent_f_parallel(imm: &Immersion, geom: &InducedGeometry, cfg: &FdConfig, report: &mut PropositionReport) -> Result<()> {
    let space = &geom.space;
    let j = space.j()?;
    let m = space.dim();
    let q = space.codim();
    let cands = space.normal_candidates.clone();
    let mut equiv = Residual::default();
    let mut normal_identity = Residual::default();
    let mut lhs_max: f64 = 0.0;
    for col in 0..m {
        let fy_field = |p: &Point| -> Result<Vector> {
            let s = TangentSpace::at(imm, p)?;
            s.f_tangent(&unit(m, col))
        };
        for axis in 0..m {
            let d_fy = along_derivative(imm, &geom.ambient.nabla, space, axis, fy_field, cfg)?;
            let nabla_star_xy = space.push(&geom.conn.gamma_star.apply(&unit(m, axis), &unit(m, col)));
            let lhs_vec = space.normal_part(&d_fy) - space.normal_part(&(j * nabla_star_xy));
            // normal identity: fB*(X,Y) - B(X,PY)
            let bstar = geom.b_coord(Form::Star, axis, col);
            let py = space.p_op(&unit(m, col))?;
            let rhs_vec = space.f_normal(bstar)? - geom.b_form(Form::Plain, &unit(m, axis), &py);
            normal_identity.push_norms(space.norm(&(&lhs_vec - &rhs_vec)), space.norm(&lhs_vec), space.norm(&rhs_vec));
            for r in 0..q {
                let v = &space.normal.vectors[r];
                let tv_field = |p: &Point| -> Result<Vector> {
                    let s = TangentSpace::with_candidates(imm, p, &cands)?;
                    Ok(s.tangential(&(s.j()? * &s.normal.vectors[r])))
                };
                let v_field =
                    |p: &Point| -> Result<Vector> { Ok(TangentSpace::with_candidates(imm, p, &cands)?.normal.vectors[r].clone()) };
                let d_tv = along_derivative(imm, &geom.ambient.nabla, space, axis, tv_field, cfg)?;
                let d_star_v = along_derivative(imm, &geom.ambient.nabla_star, space, axis, v_field, cfg)?;
                let t_vec = space.tangential(&d_tv) - space.tangential(&(j * space.normal_part(&d_star_v)));
                let lhs = space.inner(&lhs_vec, v);
                let rhs = -space.inner(&t_vec, &space.jacobian.column(col).into_owned());
                equiv.push(lhs, rhs);
                lhs_max = lhs_max.max(lhs.abs());
            }
        }
    }
    report.concl("equivalence", equiv.value());
    report.concl("normal_identity", normal_identity.value());
    report.diag("tangent_f_parallel", lhs_max);
    Ok(())
}

fn holomorphic_trace(
    imm: &Immersion,
    pair: &DualPair,
    geom: &InducedGeometry,
    cfg: &FdConfig,
    report: &mut PropositionReport,
) -> Result<()> {
    let space = &geom.space;
    let split = pftf(space)?;
    report.hyp("f_tangent", split.f_tan.amax());
    report.hyp("t", split.t.amax());
    let m = space.dim();
    let mut tr = Vector::zeros(space.x.len());
    let mut tr_star = Vector::zeros(space.x.len());
    for e in &space.tangent_domain {
        tr += geom.b_form(Form::Plain, e, e);
        tr_star += geom.b_form(Form::Star, e, e);
    }
    report.concl("trace_b", space.norm(&tr));
    report.concl("trace_b_star", space.norm(&tr_star));

    let curv = FdConfig { tol_identity: cfg.tol_identity, ..FdConfig::curvature() };
    let (r, rs) = intrinsic_curvatures(imm, pair, &space.u, cfg, &curv)?;
    let s = s_tensor(&r, &rs)?;
    let s_bar = averaged_curvature(pair, &space.x, &curv, &imm.ambient.domain)?;
    let mut probes: Vec<Vector> = space.tangent_domain.clone();
    for a in 0..m {
        for b in (a + 1)..m {
            probes.push((&space.tangent_domain[a] + &space.tangent_domain[b]) / std::f64::consts::SQRT_2);
        }
    }
    let mut res = Residual::default();
    for x in &probes {
        let jx = space.p_op(x)?;
        let lhs = (x.transpose() * &space.metric * s.apply(x, &jx, &jx))[(0, 0)];
        let (tx, tjx) = (space.push(x), space.push(&jx));
        let bar = space.inner(&s_bar.apply(&tx, &tjx, &tjx), &tx);
        let bb = space.inner(&geom.b_form(Form::Plain, x, x), &geom.b_form(Form::Star, x, x));
        res.push(lhs, bar - 2.0 * bb);
    }
    report.concl("holomorphic_sectional", res.value());
    Ok(())
}

fn shape_f_anticommute(cr: &CrStructure, geom: &InducedGeometry, report: &mut PropositionReport) -> Result<()> {
    let space = &geom.space;
    let frames = cr.frames(space)?;
    let mut res = Residual::default();
    for v in &frames.mu {
        let fv = space.f_normal(v)?;
        let a_fv = shape_operator(geom, &fv, false)?;
        let a_star_v = shape_operator(geom, v, true)?;
        for x in &frames.d_domain {
            let lhs = &a_fv * x;
            let rhs = -(&a_star_v * space.p_op(x)?);
            res.push_norms(space.domain_norm(&(&lhs - &rhs)), space.domain_norm(&lhs), space.domain_norm(&rhs));
        }
    }
    report.concl("shape_f_anticommute", res.value());
    report.diag("mu_dim", frames.mu.len() as f64);
    report.diag("d_dim", frames.d.len() as f64);
    Ok(())
}

fn totally_real_normal_closure(
    imm: &Immersion,
    cr: &CrStructure,
    geom: &InducedGeometry,
    cfg: &FdConfig,
    report: &mut PropositionReport,
) -> Result<()> {
    let space = &geom.space;
    let frames = cr.frames(space)?;
    let j_field = |k: usize| {
        let f = cr.dperp_fields[k].clone();
        move |p: &Point| -> Result<Vector> {
            let s = TangentSpace::at(imm, p)?;
            Ok(s.j()? * s.push(&f(p)))
        }
    };
    let mut res = Residual::default();
    let k = cr.dperp_fields.len();
    for a in 0..k {
        let xa = (cr.dperp_fields[a])(&space.u);
        for b in (a + 1)..k {
            let xb = (cr.dperp_fields[b])(&space.u);
            let d1 = along_direction(imm, &geom.ambient.nabla, space, &xa, j_field(b), cfg)?;
            let d2 = along_direction(imm, &geom.ambient.nabla, space, &xb, j_field(a), cfg)?;
            let diff = frames.project_mu(space, &(&d1 - &d2));
            res.push_norms(space.norm(&diff), space.norm(&d1), space.norm(&d2));
        }
    }
    report.concl("mu_component", res.value());
    report.diag("mu_dim", frames.mu.len() as f64);
    Ok(())
}

/// Orthonormal `D` frame field in domain coordinates, index `a`.
fn d_frame_field<'a>(imm: &'a Immersion, cr: &'a CrStructure, a: usize) -> impl Fn(&Point) -> Result<Vector> + 'a {
    move |p: &Point| -> Result<Vector> {
        let s = TangentSpace::at(imm, p)?;
        let pushed: Vec<Vector> = cr.d_fields.iter().map(|f| s.push(&f(p))).collect();
        let frame = gram_schmidt(&pushed, &s.ambient_metric)?;
        Ok(frame.vectors[a].clone())
    }
}

fn holomorphic_minimality(
    imm: &Immersion,
    cr: &CrStructure,
    geom: &InducedGeometry,
    cfg: &FdConfig,
    report: &mut PropositionReport,
) -> Result<()> {
    let space = &geom.space;
    let frames = cr.frames(space)?;
    for (form, key) in [(Form::Plain, "d_perp_component"), (Form::Star, "d_perp_component_star")] {
        let conn = geom.ambient.get(form);
        let mut sum = Vector::zeros(space.x.len());
        let mut scale: f64 = 0.0;
        for (a, e) in frames.d_domain.iter().enumerate() {
            let d = along_direction(imm, conn, space, e, d_frame_field(imm, cr, a), cfg)?;
            let t = space.tangential(&d);
            scale = scale.max(space.norm(&t));
            sum += t;
        }
        let perp = frames.project_dperp(space, &sum);
        report.concl(key, normalized_residual(space.norm(&perp), scale));
    }
    Ok(())
}

fn involutive_b_symmetry(
    imm: &Immersion,
    cr: &CrStructure,
    geom: &InducedGeometry,
    cfg: &FdConfig,
    report: &mut PropositionReport,
) -> Result<()> {
    let space = &geom.space;
    let frames = cr.frames(space)?;
    report.hyp("involutivity", involutivity(imm, cr, space, &frames, cfg)?);
    let mut sym = Residual::default();
    for x in &frames.d_domain {
        let jx = space.p_op(x)?;
        for y in &frames.d_domain {
            let jy = space.p_op(y)?;
            let a = geom.b_form(Form::Plain, &jx, y);
            let b = geom.b_form(Form::Plain, &jy, x);
            sym.push_norms(space.norm(&(&a - &b)), space.norm(&a), space.norm(&b));
        }
    }
    report.concl("b_symmetry", sym.value());
    Ok(())
}

fn mixed_geodesic_shape(
    imm: &Immersion,
    cr: &CrStructure,
    geom: &InducedGeometry,
    cfg: &FdConfig,
    report: &mut PropositionReport,
) -> Result<()> {
    let space = &geom.space;
    let frames = cr.frames(space)?;
    let j = space.j()?;
    report.hyp("involutivity", involutivity(imm, cr, space, &frames, cfg)?);
    report.hyp("mixed_geodesic", mixed_geodesic(geom, &frames, Form::Plain));
    report.hyp("mixed_geodesic_star", mixed_geodesic(geom, &frames, Form::Star));
    for (starred, key) in [(true, "anticommute_star"), (false, "anticommute")] {
        let mut res = Residual::default();
        let mut d_part = Residual::default();
        for v in &frames.mu {
            let a = shape_operator(geom, v, starred)?;
            for x in &frames.d_domain {
                let lhs = space.push(&(&a * space.p_op(x)?));
                let rhs = -(j * space.push(&(&a * x)));
                res.push_norms(space.norm(&(&lhs - &rhs)), space.norm(&lhs), space.norm(&rhs));
                let dd = frames.project_d(space, &(&lhs - &rhs));
                d_part.push_norms(space.norm(&dd), space.norm(&lhs), space.norm(&rhs));
            }
        }
        report.concl(key, res.value());
        report.diag(&format!("{key}_d_component"), d_part.value());
    }
    report.diag("mu_dim", frames.mu.len() as f64);
    Ok(())
}
