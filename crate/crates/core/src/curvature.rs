//! Curvature of affine connections, the averaged tensor of a dual pair, sectional and
//! Ricci sums, and the constant-holomorphic-curvature fit.

use crate::chart::{inner, partial_derivative, Domain, FdConfig, Frame, Matrix, Point, Vector};
use crate::error::{GeomError, Result};
use crate::statstruct::DualPair;
use crate::tensor::{ConnectionCoeffs, Tensor4};

/// Tolerance for accepting a frame as orthonormal in the Ricci sum.
pub const FRAME_TOL: f64 = 1e-8;

/// `R^l_ijk` at a point, with `R(∂_i, ∂_j) ∂_k = R^l_ijk ∂_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureAt {
    pub r: Tensor4,
}

/// Averaged curvature `½(R + R*)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct STensorAt {
    pub s: Tensor4,
}

impl CurvatureAt {
    /// `max |R^l_ijk + R^l_jik|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        antisymmetry_defect(&self.r)
    }
}

impl STensorAt {
    pub fn antisymmetry_defect(&self) -> f64 {
        antisymmetry_defect(&self.s)
    }

    pub fn apply(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        self.s.apply(x, y, z)
    }
}

fn antisymmetry_defect(t: &Tensor4) -> f64 {
    let n = t.dim();
    let mut m: f64 = 0.0;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m = m.max((t.get(l, i, j, k) + t.get(l, j, i, k)).abs());
                }
            }
        }
    }
    m
}

/// Curvature of the connection field `gamma` at `p`, derivatives by finite differences.
pub fn curvature_at<F>(gamma: F, p: &Point, cfg: &FdConfig, domain: &Domain) -> Result<CurvatureAt>
where
    F: Fn(&Point) -> Result<ConnectionCoeffs>,
{
    let n = p.len();
    let g0 = gamma(p)?;
    if g0.dim() != n {
        return Err(GeomError::ShapeMismatch { expected: n, got: g0.dim() });
    }
    let dg: Vec<ConnectionCoeffs> = (0..n)
        .map(|a| partial_derivative(&gamma, p, a, cfg, domain))
        .collect::<Result<_>>()?;
    Ok(CurvatureAt { r: curvature_from(&g0, &dg) })
}

/// Assemble `R` from `Γ` and its coordinate derivatives `dΓ[a] = ∂_a Γ`.
pub fn curvature_from(g: &ConnectionCoeffs, dg: &[ConnectionCoeffs]) -> Tensor4 {
    let n = g.dim();
    let mut r = Tensor4::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..n {
                    let mut v = dg[i].get(l, j, k) - dg[j].get(l, i, k);
                    for m in 0..n {
                        v += g.get(l, i, m) * g.get(m, j, k) - g.get(l, j, m) * g.get(m, i, k);
                    }
                    r.set(l, i, j, k, v);
                }
            }
        }
    }
    r
}

/// Entrywise average of the curvatures of `∇` and `∇*`.
pub fn s_tensor(r: &CurvatureAt, r_star: &CurvatureAt) -> Result<STensorAt> {
    Ok(STensorAt { s: r.r.average(&r_star.r)? })
}

/// Averaged curvature of a dual pair at `p`.
pub fn averaged_curvature(pair: &DualPair, p: &Point, cfg: &FdConfig, domain: &Domain) -> Result<STensorAt> {
    let r = curvature_at(|q: &Point| (pair.nabla)(q), p, cfg, domain)?;
    let rs = curvature_at(|q: &Point| (pair.nabla_star)(q), p, cfg, domain)?;
    s_tensor(&r, &rs)
}

/// `g(S(X,Y)Y, X) / (|X|²|Y|² - g(X,Y)²)`.
pub fn sectional_pair(s: &STensorAt, g: &Matrix, x: &Vector, y: &Vector) -> Result<f64> {
    let xx = inner(g, x, x);
    let yy = inner(g, y, y);
    let xy = inner(g, x, y);
    let area2 = xx * yy - xy * xy;
    if !(area2 > 1e-24 * xx * yy) {
        return Err(GeomError::DegeneratePlane);
    }
    Ok(inner(g, &s.apply(x, y, y), x) / area2)
}

/// Sum of sectional values `K(X ∧ e_i)` over `i ≥ 2` of an orthonormal frame with `e_1 = X`.
pub fn ricci_pair(s: &STensorAt, g: &Matrix, x: &Vector, frame: &Frame) -> Result<f64> {
    let len = inner(g, x, x).sqrt();
    if (len - 1.0).abs() > FRAME_TOL {
        return Err(GeomError::NotUnit(len));
    }
    let defect = frame.orthonormality_defect();
    if defect > FRAME_TOL || frame.is_empty() {
        return Err(GeomError::NotOrthonormal(defect));
    }
    let lead = (&frame.vectors[0] - x).amax();
    if lead > FRAME_TOL {
        return Err(GeomError::NotOrthonormal(lead));
    }
    frame.vectors[1..].iter().map(|e| sectional_pair(s, g, x, e)).sum()
}

/// Coordinate components of the unit-`c` space-form tensor
/// `¼{g(Y,Z)X - g(X,Z)Y + g(JY,Z)JX - g(JX,Z)JY + 2g(X,JY)JZ}`.
pub fn holomorphic_model(g: &Matrix, j: &Matrix) -> Tensor4 {
    let n = g.nrows();
    let jtg = j.transpose() * g; // (Jᵀg)[a][b] = g(J∂a, ∂b)
    let gj = g * j; // (gJ)[a][b] = g(∂a, J∂b)
    let mut t = Tensor4::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let dl = |a: usize| if a == l { 1.0 } else { 0.0 };
                    let v = g[(jj, k)] * dl(i) - g[(i, k)] * dl(jj) + jtg[(jj, k)] * j[(l, i)] - jtg[(i, k)] * j[(l, jj)]
                        + 2.0 * gj[(i, jj)] * j[(l, k)];
                    t.set(l, i, jj, k, 0.25 * v);
                }
            }
        }
    }
    t
}

/// One point's worth of data for the holomorphic-curvature fit.
#[derive(Debug, Clone)]
pub struct HolomorphicSample {
    pub s: STensorAt,
    pub metric: Matrix,
    pub complex_structure: Matrix,
}

/// Least-squares value of `c` and the max-norm misfit over all samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphicFit {
    pub c: f64,
    pub residual: f64,
}

pub fn fit_holomorphic_c(samples: &[HolomorphicSample]) -> Result<HolomorphicFit> {
    if samples.is_empty() {
        return Err(GeomError::Configuration("holomorphic fit needs at least one sample".into()));
    }
    let models: Vec<Tensor4> = samples.iter().map(|s| holomorphic_model(&s.metric, &s.complex_structure)).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (s, t) in samples.iter().zip(&models) {
        for (a, b) in s.s.s.as_slice().iter().zip(t.as_slice()) {
            num += a * b;
            den += b * b;
        }
    }
    let c = if den > 0.0 { num / den } else { 0.0 };
    let mut residual: f64 = 0.0;
    for (s, t) in samples.iter().zip(&models) {
        for (a, b) in s.s.s.as_slice().iter().zip(t.as_slice()) {
            residual = residual.max((a - c * b).abs());
        }
    }
    Ok(HolomorphicFit { c, residual })
}
