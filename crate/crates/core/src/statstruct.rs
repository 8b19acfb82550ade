//! Dual connection pairs and the statistical / holomorphic-statistical axioms as residuals.

use std::sync::Arc;

use crate::chart::{checked_inverse, normalized_residual, Chart, ConnectionField, FdConfig, Matrix, Point, Vector};
use crate::error::{GeomError, Result};
use crate::tensor::{ConnectionCoeffs, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSource {
    FromDuality,
    FromContrast,
    AlphaFamily(f64),
    LeviCivita,
}

/// A connection field together with its dual with respect to the chart metric.
#[derive(Clone)]
pub struct DualPair {
    pub nabla: ConnectionField,
    pub nabla_star: ConnectionField,
    pub source: PairSource,
}

impl std::fmt::Debug for DualPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DualPair").field("source", &self.source).finish()
    }
}

impl DualPair {
    /// `∇ = ∇⁰ + K`, `∇* = ∇⁰ - K`.
    pub fn from_contrast(chart: &Arc<Chart>, cfg: FdConfig) -> Result<Self> {
        if !chart.has_contrast() {
            return Err(GeomError::Configuration(format!("chart `{}` has no contrast tensor", chart.name)));
        }
        let c1 = Arc::clone(chart);
        let c2 = Arc::clone(chart);
        Ok(Self {
            nabla: Arc::new(move |p: &Point| Ok(from_contrast(&c1, p, &cfg)?.0)),
            nabla_star: Arc::new(move |p: &Point| Ok(from_contrast(&c2, p, &cfg)?.1)),
            source: PairSource::FromContrast,
        })
    }

    /// Pair whose starred member is obtained by solving the duality equation.
    pub fn from_duality(chart: &Arc<Chart>, nabla: ConnectionField, cfg: FdConfig) -> Self {
        let c = Arc::clone(chart);
        let n = Arc::clone(&nabla);
        Self {
            nabla,
            nabla_star: Arc::new(move |p: &Point| dual_connection(&c, &n(p)?, p, &cfg)),
            source: PairSource::FromDuality,
        }
    }

    /// The self-dual pair `(∇⁰, ∇⁰)`.
    pub fn levi_civita(chart: &Arc<Chart>, cfg: FdConfig) -> Self {
        let f = chart.levi_civita_field(cfg);
        Self { nabla: Arc::clone(&f), nabla_star: f, source: PairSource::LeviCivita }
    }

    /// Exchange the roles of `∇` and `∇*`.
    pub fn swapped(&self) -> Self {
        Self {
            nabla: Arc::clone(&self.nabla_star),
            nabla_star: Arc::clone(&self.nabla),
            source: self.source,
        }
    }

    pub fn at(&self, p: &Point) -> Result<(ConnectionCoeffs, ConnectionCoeffs)> {
        Ok(((self.nabla)(p)?, (self.nabla_star)(p)?))
    }
}

/// Solve `∂_i g_jk = Γ^l_ij g_lk + Γ*^m_ik g_jm` for `Γ*` at `p`.
pub fn dual_connection(chart: &Chart, nabla: &ConnectionCoeffs, p: &Point, cfg: &FdConfig) -> Result<ConnectionCoeffs> {
    let n = chart.dim();
    if nabla.dim() != n {
        return Err(GeomError::ShapeMismatch { expected: n, got: nabla.dim() });
    }
    let g = chart.metric_at(p)?;
    let ginv = checked_inverse(&g)?;
    let dg = chart.metric_derivatives(p, cfg)?;
    let mut star = Tensor3::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let rhs = Vector::from_fn(n, |j, _| {
                dg[i][(j, k)] - (0..n).map(|l| nabla.get(l, i, j) * g[(l, k)]).sum::<f64>()
            });
            let sol = &ginv * rhs;
            for m in 0..n {
                star.set(m, i, k, sol[m]);
            }
        }
    }
    Ok(ConnectionCoeffs::new(star))
}

/// `(Γ⁰ + K, Γ⁰ - K)` at `p`.
pub fn from_contrast(chart: &Chart, p: &Point, cfg: &FdConfig) -> Result<(ConnectionCoeffs, ConnectionCoeffs)> {
    let k = chart.contrast_at(p)?;
    let lc = chart.levi_civita_at(p, cfg)?;
    Ok((ConnectionCoeffs::new(lc.gamma.add(&k)?), ConnectionCoeffs::new(lc.gamma.sub(&k)?)))
}

/// Residuals of the three algebraic conditions on a contrast tensor for given probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KConditionResiduals {
    /// `|K(X,Y) - K(Y,X)|`
    pub symmetry: f64,
    /// `|g(K(X,Y),Z) - g(Y,K(X,Z))|`
    pub self_adjoint: f64,
    /// `|K(X,JY) + J K(X,Y)|`
    pub j_anticommute: f64,
}

impl KConditionResiduals {
    pub fn max(&self) -> f64 {
        self.symmetry.max(self.self_adjoint).max(self.j_anticommute)
    }
}

pub fn check_k_conditions(chart: &Chart, p: &Point, x: &Vector, y: &Vector, z: &Vector) -> Result<KConditionResiduals> {
    let k = chart.contrast_at(p)?;
    let j = chart.complex_structure_at(p)?;
    let g = chart.metric_at(p)?;
    Ok(k_condition_residuals(&k, &g, &j, x, y, z))
}

pub fn k_condition_residuals(k: &Tensor3, g: &Matrix, j: &Matrix, x: &Vector, y: &Vector, z: &Vector) -> KConditionResiduals {
    let kxy = k.contract(x, y);
    let kyx = k.contract(y, x);
    let kxz = k.contract(x, z);
    let jy = j * y;
    let lhs = (kxy.transpose() * g * z)[(0, 0)];
    let rhs = (y.transpose() * g * &kxz)[(0, 0)];
    KConditionResiduals {
        symmetry: (&kxy - &kyx).amax(),
        self_adjoint: (lhs - rhs).abs(),
        j_anticommute: (k.contract(x, &jy) + j * &kxy).amax(),
    }
}

/// Max-norm residuals of the statistical-manifold axioms at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureResiduals {
    pub torsion: f64,
    pub torsion_star: f64,
    pub duality: f64,
    pub codazzi: f64,
    pub holomorphic: Option<f64>,
}

impl StructureResiduals {
    /// Largest of the torsion, duality and Codazzi residuals.
    pub fn max_statistical(&self) -> f64 {
        self.torsion.max(self.torsion_star).max(self.duality).max(self.codazzi)
    }
}

/// Torsion, duality and Codazzi residuals over the coordinate probes; the
/// holomorphic residual is filled in when the chart carries `J`.
pub fn statistical_residuals(chart: &Chart, pair: &DualPair, p: &Point, cfg: &FdConfig) -> Result<StructureResiduals> {
    let n = chart.dim();
    let (gam, star) = pair.at(p)?;
    let g = chart.metric_at(p)?;
    let dg = chart.metric_derivatives(p, cfg)?;

    let lower = |c: &ConnectionCoeffs, i: usize, j: usize, k: usize| -> f64 {
        (0..n).map(|l| c.get(l, i, j) * g[(l, k)]).sum()
    };

    let mut dual_diff: f64 = 0.0;
    let mut dual_scale: f64 = 0.0;
    // (∇_i g)_jk for both connections
    let mut nab_g = vec![0.0; n * n * n];
    let mut nab_g_star = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = dg[i][(j, k)];
                let a = lower(&gam, i, j, k);
                let b = lower(&star, i, k, j);
                dual_diff = dual_diff.max((d - a - b).abs());
                dual_scale = dual_scale.max(d.abs()).max(a.abs()).max(b.abs());
                nab_g[(i * n + j) * n + k] = d - a - lower(&gam, i, k, j);
                nab_g_star[(i * n + j) * n + k] = d - b - lower(&star, i, j, k);
            }
        }
    }
    let mut cod_diff: f64 = 0.0;
    let mut cod_scale: f64 = 0.0;
    for t in [&nab_g, &nab_g_star] {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = t[(i * n + j) * n + k];
                    let b = t[(j * n + i) * n + k];
                    cod_diff = cod_diff.max((a - b).abs());
                    cod_scale = cod_scale.max(a.abs());
                }
            }
        }
    }
    let holomorphic = if chart.has_complex_structure() {
        Some(holomorphic_residual(chart, pair, p, cfg)?)
    } else {
        None
    };
    Ok(StructureResiduals {
        torsion: gam.torsion(),
        torsion_star: star.torsion(),
        duality: normalized_residual(dual_diff, dual_scale),
        codazzi: normalized_residual(cod_diff, cod_scale),
        holomorphic,
    })
}

/// `max |∇_X(JY) - J ∇*_X Y|` over coordinate probes, normalized.
pub fn holomorphic_residual(chart: &Chart, pair: &DualPair, p: &Point, cfg: &FdConfig) -> Result<f64> {
    let n = chart.dim();
    let j = chart.complex_structure_at(p)?;
    let (gam, star) = pair.at(p)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let dj: Matrix = crate::chart::partial_derivative(
            |q: &Point| chart.complex_structure_at(q),
            p,
            i,
            cfg,
            &chart.domain,
        )?;
        for jj in 0..n {
            for k in 0..n {
                let lhs = dj[(k, jj)] + (0..n).map(|l| gam.get(k, i, l) * j[(l, jj)]).sum::<f64>();
                let rhs: f64 = (0..n).map(|l| j[(k, l)] * star.get(l, i, jj)).sum();
                diff = diff.max((lhs - rhs).abs());
                scale = scale.max(lhs.abs()).max(rhs.abs());
            }
        }
    }
    Ok(normalized_residual(diff, scale))
}

/// α-connection of the exponential family in the coordinate `Φ`: `Γ = (α - 1)/Φ`.
pub fn alpha_connection(phi: f64, alpha: f64) -> Result<ConnectionCoeffs> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(GeomError::Domain(format!("Φ must be positive, got {phi}")));
    }
    let mut t = Tensor3::zeros(1);
    t.set(0, 0, 0, (alpha - 1.0) / phi);
    Ok(ConnectionCoeffs::new(t))
}

/// Fisher information `E[(∂_Φ log p)²]` of `p(u, Φ) = Φ e^{-Φu}` by adaptive quadrature.
pub fn fisher_metric_quadrature(phi: f64) -> Result<f64> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(GeomError::Domain(format!("Φ must be positive, got {phi}")));
    }
    let integrand = |u: f64| {
        let score = 1.0 / phi - u;
        score * score * phi * (-phi * u).exp()
    };
    // e^{-50} ~ 2e-22 relative tail
    integrate_adaptive(integrand, 0.0, 50.0 / phi, 1e-13 / (phi * phi).max(1e-300))
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for nodes 1, 3, 5, 7 of the Kronrod set.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * KRONROD_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive 7/15-point Gauss-Kronrod with interval bisection.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut stack = vec![(a, b, tol, 0usize)];
    let mut total = 0.0;
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (val, err) = gauss_kronrod(&f, lo, hi);
        if !val.is_finite() {
            return Err(GeomError::Numeric(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= t.max(1e-300) || hi - lo < 1e-12 * (b - a).abs() {
            total += val;
        } else if depth >= 60 {
            return Err(GeomError::Numeric("quadrature did not converge".into()));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t, depth + 1));
            stack.push((mid, hi, 0.5 * t, depth + 1));
        }
    }
    Ok(total)
}
