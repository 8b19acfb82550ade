//! The Ricci inequality for submanifolds of holomorphic statistical manifolds of
//! constant holomorphic curvature, its quadratic-program subroutine, equality
//! diagnostics and the `D` / `D⊥` sector bounds.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{complete_frame, Chart, FdConfig, Frame, Matrix, Point, Vector};
use crate::curvature::{averaged_curvature, curvature_at, fit_holomorphic_c, ricci_pair, s_tensor, HolomorphicFit, HolomorphicSample, STensorAt};
use crate::error::{GeomError, Result};
use crate::statstruct::DualPair;
use crate::submanifold::{induced_geometry, intrinsic_curvatures, Form, Immersion, InducedGeometry};

/// Band for the equality conditions.
pub const EQUALITY_TOL: f64 = 1e-6;

/// Band for the sector-membership test of the corollary bounds.
pub const SECTOR_TOL: f64 = 1e-6;

/// Allowed relative drift of `‖X‖` from one.
pub const UNIT_TOL: f64 = 1e-8;

/// `max h₁ Σ_{i≥2} hᵢ` subject to `Σ hᵢ = α`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub alpha: f64,
    pub m: usize,
    /// A maximizer. The maximizing set is the affine family `h₁ = α/2`,
    /// `Σ_{i≥2} hᵢ = α/2`; this is the member with all weight of the tail on `h₂`.
    pub solution: Vector,
    pub max_value: f64,
    /// Largest eigenvalue of the objective's Hessian restricted to the constraint plane.
    pub certificate: f64,
}

impl QuadraticProgram {
    pub fn constraint_residual(&self) -> f64 {
        (self.solution.sum() - self.alpha).abs()
    }
}

/// Objective `h₁ Σ_{i≥2} hᵢ`.
pub fn objective(h: &[f64]) -> f64 {
    h[0] * h[1..].iter().sum::<f64>()
}

/// Hessian quadratic form of the objective, `2 x₁ Σ_{i≥2} xᵢ`.
pub fn hessian_form(x: &[f64]) -> f64 {
    2.0 * objective(x)
}

fn objective_hessian(m: usize) -> Matrix {
    Matrix::from_fn(m, m, |i, j| if (i == 0) != (j == 0) { 1.0 } else { 0.0 })
}

/// Orthonormal basis (columns) of the plane `Σ xᵢ = 0`.
fn constraint_tangent(m: usize) -> Matrix {
    let basis = Matrix::from_fn(m, m - 1, |r, k| match r {
        0 => 1.0,
        _ if r == k + 1 => -1.0,
        _ => 0.0,
    });
    basis.qr().q()
}

pub fn quadratic_max(alpha: f64, m: usize) -> Result<QuadraticProgram> {
    if m < 2 {
        return Err(GeomError::Domain(format!("quadratic program needs m ≥ 2, got {m}")));
    }
    if !alpha.is_finite() {
        return Err(GeomError::Domain(format!("constraint value must be finite, got {alpha}")));
    }
    let mut solution = Vector::zeros(m);
    solution[0] = alpha / 2.0;
    solution[1] = alpha / 2.0;
    let q = constraint_tangent(m);
    let restricted = q.transpose() * objective_hessian(m) * &q;
    let certificate = SymmetricEigen::new(restricted).eigenvalues.max();
    Ok(QuadraticProgram { alpha, m, solution, max_value: alpha * alpha / 4.0, certificate })
}

/// Best objective value found by seeded random search on the constraint plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub alpha: f64,
    pub m: usize,
    pub samples: usize,
    pub best_value: f64,
    pub best_point: Vec<f64>,
    /// `best_value - α²/4`.
    pub excess: f64,
}

const ASCENT_STARTS: usize = 8;
const ASCENT_ITERS: usize = 200;

fn project_to_plane(h: &mut [f64], alpha: f64) {
    let shift = (alpha - h.iter().sum::<f64>()) / h.len() as f64;
    h.iter_mut().for_each(|v| *v += shift);
}

/// Projected gradient ascent with backtracking.
fn local_ascent(start: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    let m = start.len();
    let mut h = start.to_vec();
    let mut value = objective(&h);
    let mut step = 1.0;
    for _ in 0..ASCENT_ITERS {
        let tail: f64 = h[1..].iter().sum();
        let mut grad: Vec<f64> = (0..m).map(|i| if i == 0 { tail } else { h[0] }).collect();
        let mean = grad.iter().sum::<f64>() / m as f64;
        grad.iter_mut().for_each(|g| *g -= mean);
        if grad.iter().all(|g| g.abs() < 1e-15) {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut trial: Vec<f64> = h.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            project_to_plane(&mut trial, alpha);
            let v = objective(&trial);
            if v > value {
                h = trial;
                value = v;
                improved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, h)
}

/// Seeded random search over `Σ hᵢ = α` followed by local ascent from the best samples.
pub fn random_search_oracle(alpha: f64, m: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<OracleRun> {
    if m < 2 {
        return Err(GeomError::Domain(format!("quadratic program needs m ≥ 2, got {m}")));
    }
    let radius = 2.0 * (alpha.abs() + 1.0);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(ASCENT_STARTS + 1);
    let mut h = vec![0.0; m];
    for _ in 0..samples {
        h.iter_mut().for_each(|v| *v = rng.gen_range(-radius..radius));
        project_to_plane(&mut h, alpha);
        let v = objective(&h);
        if best.len() < ASCENT_STARTS || v > best[best.len() - 1].0 {
            let at = best.partition_point(|(b, _)| *b >= v);
            best.insert(at, (v, h.clone()));
            best.truncate(ASCENT_STARTS);
        }
    }
    let (best_value, best_point) = best
        .iter()
        .map(|(_, p)| local_ascent(p, alpha))
        .chain(best.iter().cloned())
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, c| if c.0 > acc.0 { c } else { acc });
    Ok(OracleRun { alpha, m, samples, best_value, best_point, excess: best_value - alpha * alpha / 4.0 })
}

/// Oracle runs over every `(α, m)` pair, each on its own ChaCha stream of `seed`.
/// Results are ordered by `α` first, then `m`.
pub fn oracle_sweep(alphas: &[f64], ms: &[usize], samples: usize, seed: u64) -> Result<Vec<OracleRun>> {
    let jobs: Vec<(f64, usize)> = alphas.iter().flat_map(|&a| ms.iter().map(move |&m| (a, m))).collect();
    jobs.par_iter()
        .enumerate()
        .map(|(idx, &(a, m))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            random_search_oracle(a, m, samples, &mut rng)
        })
        .collect()
}

/// Chart on the immersion's domain carrying the induced metric `JᵀḡJ`.
pub fn induced_metric_chart(imm: &Immersion) -> Chart {
    let imm = imm.clone();
    let m = imm.dim();
    Chart::new(format!("{}-induced", imm.name), imm.domain.clone(), move |u: &Point| {
        let metric = || -> Result<Matrix> {
            let jac = imm.jacobian_at(u)?;
            let g = imm.ambient.metric_at(&imm.point(u)?)?;
            Ok(jac.transpose() * g * jac)
        };
        metric().unwrap_or_else(|_| Matrix::from_element(m, m, f64::NAN))
    })
}

/// Levi-Civita Ricci sum of `chart` at `p` along unit `x`, with `frame[0] = x`.
pub fn ricci0(chart: &Chart, p: &Point, x: &Vector, frame: &Frame, cfg: &FdConfig, curv: &FdConfig) -> Result<f64> {
    let r = curvature_at(|q: &Point| chart.levi_civita_at(q, cfg), p, curv, &chart.domain)?;
    let s = STensorAt { s: r.r };
    ricci_pair(&s, &chart.metric_at(p)?, x, frame)
}

/// Constant-holomorphic-curvature fit of the ambient averaged curvature at one point.
pub fn pointwise_holomorphic_fit(chart: &Chart, pair: &DualPair, x: &Point, curv: &FdConfig) -> Result<HolomorphicFit> {
    let s = averaged_curvature(pair, x, curv, &chart.domain)?;
    fit_holomorphic_c(&[HolomorphicSample { s, metric: chart.metric_at(x)?, complex_structure: chart.complex_structure_at(x)? }])
}

/// Equality conditions: `B(X,X) = (m/2)H`, `B*(X,X) = (m/2)H*`, `B(X,Y) = B*(X,Y) = 0` for `Y ⊥ X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityFlags {
    pub h_xx: bool,
    pub h_star_xx: bool,
    pub h_xy: bool,
    pub h_star_xy: bool,
    pub h_xx_residual: f64,
    pub h_star_xx_residual: f64,
    pub h_xy_residual: f64,
    pub h_star_xy_residual: f64,
}

impl EqualityFlags {
    pub fn all(&self) -> bool {
        self.h_xx && self.h_star_xx && self.h_xy && self.h_star_xy
    }
}

/// Both sides of the identity linking the dual-pair and Levi-Civita Ricci sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainIdentity {
    /// `2 Ric(X) - (c/2)(m - 1 + 3‖PX‖²)`.
    pub lhs: f64,
    /// `4[Ric⁰(X) - (c/4)(m - 1 + 3‖PX‖²)] - Σ(h₁₁hᵢᵢ - h₁ᵢ²) - Σ(h*₁₁h*ᵢᵢ - h*₁ᵢ²)`.
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciReport {
    pub point: Vec<f64>,
    pub x: Vec<f64>,
    pub m: usize,
    pub ric_pair: f64,
    pub ric0: f64,
    pub px_norm2: f64,
    pub c: f64,
    pub fit_residual: f64,
    /// Whether the ambient fit is good enough for the inequality to be asserted.
    pub applicable: bool,
    pub h_norm2: f64,
    pub h_star_norm2: f64,
    pub rhs: f64,
    pub slack: f64,
    pub equality: EqualityFlags,
    pub chain: ChainIdentity,
    /// `Σ_{i≥2} ‖B(X, eᵢ)‖²`, dropped when passing to the inequality.
    pub dropped: f64,
    pub dropped_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChenRicciOptions {
    pub fd: FdConfig,
    pub curvature: FdConfig,
    pub fit_tol: f64,
    pub equality_tol: f64,
}

impl Default for ChenRicciOptions {
    fn default() -> Self {
        Self { fd: FdConfig::default(), curvature: FdConfig::curvature(), fit_tol: 1e-6, equality_tol: EQUALITY_TOL }
    }
}

fn general_rhs(ric0: f64, c: f64, m: usize, px_norm2: f64, h2: f64, hs2: f64) -> f64 {
    let mf = m as f64;
    2.0 * ric0 - c / 4.0 * (mf - 1.0 + 3.0 * px_norm2) - mf * mf / 8.0 * (h2 + hs2)
}

/// `(Σ_{i≥2} ḡ(B(X,X), B(eᵢ,eᵢ)), Σ_{i≥2} ‖B(X,eᵢ)‖²)`.
fn h_sums(geom: &InducedGeometry, form: Form, frame: &Frame) -> (f64, f64) {
    let e = &frame.vectors;
    let bxx = geom.b_form(form, &e[0], &e[0]);
    let mut prod = 0.0;
    let mut mixed = 0.0;
    for ei in &e[1..] {
        prod += geom.space.inner(&bxx, &geom.b_form(form, ei, ei));
        let b1i = geom.b_form(form, &e[0], ei);
        mixed += geom.space.inner(&b1i, &b1i);
    }
    (prod, mixed)
}

fn equality_residuals(geom: &InducedGeometry, form: Form, frame: &Frame) -> (f64, f64) {
    let e = &frame.vectors;
    let half_m = geom.dim() as f64 / 2.0;
    let diag = geom.b_form(form, &e[0], &e[0]) - geom.mean_of(form) * half_m;
    let off = e[1..].iter().map(|ei| geom.space.norm(&geom.b_form(form, &e[0], ei))).fold(0.0, f64::max);
    (geom.space.norm(&diag), off)
}

/// Every term of the Ricci inequality at `u` for the unit domain vector `x`.
pub fn chen_ricci_report(imm: &Immersion, pair: &DualPair, u: &Point, x: &Vector, fit: HolomorphicFit, opts: &ChenRicciOptions) -> Result<RicciReport> {
    let geom = induced_geometry(imm, pair, u, &opts.fd)?;
    let g = &geom.space.metric;
    let m = geom.dim();
    if x.len() != m {
        return Err(GeomError::ShapeMismatch { expected: m, got: x.len() });
    }
    let len = geom.space.domain_norm(x);
    if (len - 1.0).abs() > UNIT_TOL {
        return Err(GeomError::NotUnit(len));
    }
    let frame = complete_frame(x, g)?;

    let (r, rs) = intrinsic_curvatures(imm, pair, u, &opts.fd, &opts.curvature)?;
    let ric_pair = ricci_pair(&s_tensor(&r, &rs)?, g, x, &frame)?;
    let metric_chart = induced_metric_chart(imm);
    let ric0 = ricci0(&metric_chart, u, x, &frame, &opts.fd, &opts.curvature)?;

    let px = geom.space.p_op(x)?;
    let px_norm2 = geom.space.domain_norm(&px).powi(2);
    let h_norm2 = geom.space.norm(&geom.mean).powi(2);
    let h_star_norm2 = geom.space.norm(&geom.mean_star).powi(2);
    let c = fit.c;
    let rhs = general_rhs(ric0, c, m, px_norm2, h_norm2, h_star_norm2);
    let slack = ric_pair - rhs;

    let (f, dropped) = h_sums(&geom, Form::Plain, &frame);
    let (fs, dropped_star) = h_sums(&geom, Form::Star, &frame);
    let curv_term = (m as f64 - 1.0 + 3.0 * px_norm2) * c;
    let lhs = 2.0 * ric_pair - curv_term / 2.0;
    let chain_rhs = 4.0 * (ric0 - curv_term / 4.0) - (f - dropped) - (fs - dropped_star);
    let scale = lhs.abs().max(chain_rhs.abs());

    let (hxx, hxy) = equality_residuals(&geom, Form::Plain, &frame);
    let (hsxx, hsxy) = equality_residuals(&geom, Form::Star, &frame);
    let tol = opts.equality_tol;
    let equality = EqualityFlags {
        h_xx: hxx <= tol,
        h_star_xx: hsxx <= tol,
        h_xy: hxy <= tol,
        h_star_xy: hsxy <= tol,
        h_xx_residual: hxx,
        h_star_xx_residual: hsxx,
        h_xy_residual: hxy,
        h_star_xy_residual: hsxy,
    };

    Ok(RicciReport {
        point: u.as_slice().to_vec(),
        x: x.as_slice().to_vec(),
        m,
        ric_pair,
        ric0,
        px_norm2,
        c,
        fit_residual: fit.residual,
        applicable: fit.residual <= opts.fit_tol,
        h_norm2,
        h_star_norm2,
        rhs,
        slack,
        equality,
        chain: ChainIdentity { lhs, rhs: chain_rhs, residual: (lhs - chain_rhs).abs() / (1.0 + scale) },
        dropped,
        dropped_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    D,
    Dperp,
}

/// Right-hand side specialized to unit `X` in `D` (`‖PX‖ = 1`) or in `D⊥` (`PX = 0`).
pub fn corollary_bounds(report: &RicciReport, sector: Sector) -> Result<f64> {
    let (target, weight) = match sector {
        Sector::D => (1.0, report.m as f64 + 2.0),
        Sector::Dperp => (0.0, report.m as f64 - 1.0),
    };
    let off = (report.px_norm2 - target).abs();
    if off > SECTOR_TOL {
        return Err(GeomError::SectorMismatch(off));
    }
    let mf = report.m as f64;
    Ok(2.0 * report.ric0 - report.c * weight / 4.0 - mf * mf / 8.0 * (report.h_norm2 + report.h_star_norm2))
}

/// `count` unit vectors for the metric `g`, drawn from a seeded Gaussian.
pub fn seeded_unit_directions(g: &Matrix, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let m = g.nrows();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = Vector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let len = crate::chart::norm(g, &v);
        if len > 1e-6 {
            out.push(v / len);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn setup(id: GalleryId, params: GalleryParams) -> (Immersion, DualPair) {
        let (imm, _) = build_immersion(&GallerySpec::with_params(id, params)).unwrap();
        let pair = DualPair::from_contrast(&imm.ambient, FdConfig::default()).unwrap();
        (imm, pair)
    }

    fn report_at(imm: &Immersion, pair: &DualPair, u: &Point, x: &Vector, opts: &ChenRicciOptions) -> RicciReport {
        let fit = pointwise_holomorphic_fit(&imm.ambient, pair, &imm.point(u).unwrap(), &opts.curvature).unwrap();
        chen_ricci_report(imm, pair, u, x, fit, opts).unwrap()
    }

    fn unit(m: usize, a: usize) -> Vector {
        Vector::from_fn(m, |r, _| if r == a { 1.0 } else { 0.0 })
    }

    #[test]
    fn quadratic_max_closed_form() {
        let qp = quadratic_max(2.0, 3).unwrap();
        assert_eq!(qp.max_value, 1.0);
        assert_eq!(qp.solution[0], 1.0);
        assert_eq!(qp.solution.rows(1, 2).sum(), 1.0);
        assert_eq!(objective(qp.solution.as_slice()), 1.0);
        assert!(qp.certificate <= 1e-12);
        for m in 2..9 {
            let qp = quadratic_max(0.0, m).unwrap();
            assert_eq!(qp.max_value, 0.0);
            assert_eq!(qp.constraint_residual(), 0.0);
        }
        assert!(quadratic_max(-1.5, 2).unwrap().certificate < -0.5);
    }

    #[test]
    fn quadratic_max_rejects_small_dimension() {
        assert!(matches!(quadratic_max(1.0, 1), Err(GeomError::Domain(_))));
        assert!(matches!(quadratic_max(f64::NAN, 3), Err(GeomError::Domain(_))));
    }

    #[test]
    fn oracle_does_not_beat_the_bound_and_gets_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let run = random_search_oracle(2.0, 3, 1_000_000, &mut rng).unwrap();
        assert!(run.best_value <= 1.0 + 1e-9, "{run:?}");
        assert!(run.best_value >= 1.0 - 1e-9, "{run:?}");
    }

    #[test]
    fn oracle_sweep_is_deterministic() {
        let a = oracle_sweep(&[-1.0, 0.5], &[2, 5], 2000, 3).unwrap();
        let b = oracle_sweep(&[-1.0, 0.5], &[2, 5], 2000, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!((a[1].alpha, a[1].m), (-1.0, 5));
    }

    #[test]
    fn ricci0_of_flat_and_half_plane_metrics() {
        let flat = Chart::new("plane", crate::chart::Domain::cube(2, -1.0, 1.0), |_| Matrix::identity(2, 2));
        let p = Vector::from_vec(vec![0.2, 0.1]);
        let frame = complete_frame(&unit(2, 0), &Matrix::identity(2, 2)).unwrap();
        let cfg = FdConfig::default();
        assert_eq!(ricci0(&flat, &p, &unit(2, 0), &frame, &cfg, &FdConfig::curvature()).unwrap(), 0.0);

        let half = build_chart(&GallerySpec::with_params(GalleryId::HalfPlane, GalleryParams { lambda: 0.0, ..Default::default() })).unwrap();
        let p = Vector::from_vec(vec![1.0, 0.0]);
        let g = half.metric_at(&p).unwrap();
        let x = unit(2, 1) / g[(1, 1)].sqrt();
        let frame = complete_frame(&x, &g).unwrap();
        let ric = ricci0(&half, &p, &frame.vectors[0], &frame, &cfg, &FdConfig::curvature()).unwrap();
        assert_abs_diff_eq!(ric, 0.5, epsilon = 1e-5);
    }

    #[test]
    fn ricci0_of_a_curve_is_zero() {
        let (imm, _) = setup(GalleryId::LagrangianTorus, GalleryParams::default());
        let chart = induced_metric_chart(&imm);
        let u = Vector::from_vec(vec![0.3]);
        let x = unit(1, 0);
        let frame = complete_frame(&x, &chart.metric_at(&u).unwrap()).unwrap();
        assert_eq!(ricci0(&chart, &u, &x, &frame, &FdConfig::default(), &FdConfig::curvature()).unwrap(), 0.0);
    }

    #[test]
    fn totally_geodesic_plane_is_an_equality_case() {
        let params = GalleryParams { m: 2, n: 2, kind: FlatKind::Real, ..Default::default() };
        let (imm, pair) = setup(GalleryId::TrivialFlat, params);
        let opts = ChenRicciOptions::default();
        for x in [unit(2, 0), Vector::from_vec(vec![0.6, -0.8])] {
            let r = report_at(&imm, &pair, &Vector::from_vec(vec![0.3, -0.2]), &x, &opts);
            assert!(r.applicable);
            assert_eq!((r.ric_pair, r.ric0, r.c, r.slack), (0.0, 0.0, 0.0, 0.0));
            assert!(r.equality.all());
            assert_eq!(r.chain.residual, 0.0);
        }
    }

    #[test]
    fn lagrangian_torus_satisfies_the_inequality_and_is_step_stable() {
        let params = GalleryParams { n: 2, r: Some(vec![1.0, 1.0]), ..Default::default() };
        let (imm, pair) = setup(GalleryId::LagrangianTorus, params);
        let opts = ChenRicciOptions::default();
        let halved = ChenRicciOptions { curvature: FdConfig::curvature().with_step(5e-4), ..opts };
        for (a, b) in [(-1.0, 0.5), (0.0, 0.0), (0.7, 1.4)] {
            let u = Vector::from_vec(vec![a, b]);
            let r = report_at(&imm, &pair, &u, &unit(2, 0), &opts);
            let oracle = report_at(&imm, &pair, &u, &unit(2, 0), &halved);
            assert!(r.applicable && r.slack >= -1e-6, "{r:?}");
            assert_abs_diff_eq!(r.slack, oracle.slack, epsilon = 1e-6);
            assert_abs_diff_eq!(r.rhs, oracle.rhs, epsilon = 1e-6);
            assert!(r.chain.residual <= 1e-5, "{r:?}");
            assert_eq!(r.px_norm2, 0.0);
        }
    }

    #[test]
    fn cr_cn_r_at_the_origin_and_corollary_bounds() {
        let (imm, pair) = setup(GalleryId::CrCnR, GalleryParams::default());
        let opts = ChenRicciOptions::default();
        let u = Vector::zeros(3);
        let r = report_at(&imm, &pair, &u, &unit(3, 2), &opts);
        assert!(r.applicable, "{r:?}");
        assert!(r.slack >= -1e-6 && r.chain.residual <= 1e-5, "{r:?}");
        assert_eq!(corollary_bounds(&r, Sector::Dperp).unwrap(), r.rhs);
        assert!(matches!(corollary_bounds(&r, Sector::D), Err(GeomError::SectorMismatch(_))));

        let r = report_at(&imm, &pair, &u, &unit(3, 0), &opts);
        assert_abs_diff_eq!(r.px_norm2, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(corollary_bounds(&r, Sector::D).unwrap(), r.rhs, epsilon = 1e-12);
    }

    #[test]
    fn contrast_away_from_the_origin_is_not_applicable() {
        let (imm, pair) = setup(GalleryId::CrCnR, GalleryParams::default());
        let r = report_at(&imm, &pair, &Vector::from_vec(vec![0.8, -0.5, 0.6]), &unit(3, 2), &ChenRicciOptions::default());
        assert!(!r.applicable, "{r:?}");
    }

    #[test]
    fn sector_bounds_coincide_when_c_vanishes() {
        let params = GalleryParams { m: 2, n: 2, kind: FlatKind::Real, ..Default::default() };
        let (imm, pair) = setup(GalleryId::TrivialFlat, params);
        let mut r = report_at(&imm, &pair, &Vector::zeros(2), &unit(2, 0), &ChenRicciOptions::default());
        let dperp = corollary_bounds(&r, Sector::Dperp).unwrap();
        r.px_norm2 = 1.0;
        assert_eq!(corollary_bounds(&r, Sector::D).unwrap(), dperp);
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let params = GalleryParams { m: 2, n: 2, kind: FlatKind::Real, ..Default::default() };
        let (imm, pair) = setup(GalleryId::TrivialFlat, params);
        let fit = HolomorphicFit { c: 0.0, residual: 0.0 };
        let err = chen_ricci_report(&imm, &pair, &Vector::zeros(2), &(unit(2, 0) * 2.0), fit, &ChenRicciOptions::default());
        assert!(matches!(err, Err(GeomError::NotUnit(_))));
    }

    #[test]
    fn curved_circle_has_equality_flags_for_its_direction() {
        let (imm, pair) = setup(GalleryId::LagrangianTorus, GalleryParams::default());
        let r = report_at(&imm, &pair, &Vector::from_vec(vec![0.4]), &unit(1, 0), &ChenRicciOptions::default());
        // m = 1: B(X,X) = H and there is no orthogonal Y, so only h_xx can fail
        assert!(!r.equality.h_xx && r.equality.h_xy, "{r:?}");
        assert_abs_diff_eq!(r.equality.h_xx_residual, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn seeded_directions_are_unit_and_reproducible() {
        let g = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let a = seeded_unit_directions(&g, 8, &mut ChaCha8Rng::seed_from_u64(1));
        let b = seeded_unit_directions(&g, 8, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        for v in &a {
            assert_abs_diff_eq!(crate::chart::norm(&g, v), 1.0, epsilon = 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hessian_form_is_negative_on_the_constraint_plane(x in proptest::collection::vec(-5.0f64..5.0, 2..9)) {
            let mut x = x;
            project_to_plane(&mut x, 0.0);
            prop_assert!((hessian_form(&x) + 2.0 * x[0] * x[0]).abs() < 1e-9);
        }

        #[test]
        fn maximizer_satisfies_constraint_exactly(k in -6i32..=6, m in 2usize..9) {
            let alpha = k as f64 / 2.0;
            let qp = quadratic_max(alpha, m).unwrap();
            prop_assert_eq!(qp.solution[0], alpha / 2.0);
            prop_assert_eq!(qp.constraint_residual(), 0.0);
            prop_assert_eq!(objective(qp.solution.as_slice()), qp.max_value);
        }

        #[test]
        fn slack_is_even_in_the_direction(theta in 0.0f64..std::f64::consts::TAU) {
            let params = GalleryParams { n: 2, r: Some(vec![1.0, 1.5]), ..Default::default() };
            let (imm, pair) = setup(GalleryId::LagrangianTorus, params);
            let u = Vector::from_vec(vec![0.2, -0.4]);
            let g = imm.ambient.metric_at(&imm.point(&u).unwrap()).unwrap();
            let jac = imm.jacobian_at(&u).unwrap();
            let gi = jac.transpose() * g * jac;
            let x = Vector::from_vec(vec![theta.cos(), theta.sin()]);
            let x = &x / crate::chart::norm(&gi, &x);
            let opts = ChenRicciOptions::default();
            let a = report_at(&imm, &pair, &u, &x, &opts);
            let b = report_at(&imm, &pair, &u, &(-&x), &opts);
            prop_assert!((a.slack - b.slack).abs() < 1e-9);
            prop_assert!(a.slack >= -1e-6);
            prop_assert!(!a.equality.all() || a.slack <= 1e-6);
        }
    }
}
