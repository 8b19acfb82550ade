//! Built-in example manifolds and immersions.
//!
//! Charts: the exponential family with its α-connections, the Kaehler half-plane
//! with a constant contrast tensor, and flat `C^n` with the four contrast tensors
//! `K₁..K₄` built from a vector field `Λ`. Immersions: `C^n × R ⊂ C^{n+1}`, the
//! Lagrangian torus, the generic product `C^{n+1} × T^n ⊂ C^{2n+1}` and flat
//! linear inclusions.
//!
//! Complex coordinates are ordered `(x¹..xⁿ, y¹..yⁿ)` with `J∂x_i = ∂y_i`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{standard_complex_structure, Chart, Domain, Matrix, Point, Vector};
use crate::error::{GeomError, Result};
use crate::submanifold::{CrStructure, Immersion};
use crate::tensor::{ConnectionCoeffs, Tensor3};

/// Margin kept between the torus angles and `±π/2`.
pub const ANGLE_MARGIN: f64 = 0.1;
/// Largest complex dimension accepted for flat `C^n` charts.
pub const MAX_COMPLEX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GalleryId {
    ExpFamily,
    HalfPlane,
    K1Space,
    K2Space,
    K3Space,
    K4Space,
    CrCnR,
    LagrangianTorus,
    GenericProduct,
    TrivialFlat,
}

impl GalleryId {
    pub const ALL: [GalleryId; 10] = [
        Self::ExpFamily,
        Self::HalfPlane,
        Self::K1Space,
        Self::K2Space,
        Self::K3Space,
        Self::K4Space,
        Self::CrCnR,
        Self::LagrangianTorus,
        Self::GenericProduct,
        Self::TrivialFlat,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::ExpFamily => "exp-family",
            Self::HalfPlane => "half-plane",
            Self::K1Space => "k1-space",
            Self::K2Space => "k2-space",
            Self::K3Space => "k3-space",
            Self::K4Space => "k4-space",
            Self::CrCnR => "cr-cn-r",
            Self::LagrangianTorus => "lagrangian-torus",
            Self::GenericProduct => "generic-product",
            Self::TrivialFlat => "trivial-flat",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Self::ExpFamily => "exponential distributions, Fisher metric and alpha-connections (param: alpha)",
            Self::HalfPlane => "Kaehler half-plane x1 > 0 with constant contrast tensor (param: lambda)",
            Self::K1Space => "flat C^n with contrast K1 built from Lambda (params: n, lambda_mode)",
            Self::K2Space => "flat C^n with contrast K2 built from Lambda (params: n, lambda_mode)",
            Self::K3Space => "flat C^n with contrast K3 built from Lambda (params: n, lambda_mode)",
            Self::K4Space => "flat C^n with contrast K4 built from Lambda (params: n, lambda_mode)",
            Self::CrCnR => "CR-product C^n x R in C^(n+1) (params: n, contrast, lambda_mode, defect)",
            Self::LagrangianTorus => "Lagrangian torus of radii r in C^n (params: n, r, contrast, lambda_mode)",
            Self::GenericProduct => {
                "generic product C^(n+1) x torus in C^(2n+1) (params: n, r, contrast, lambda_mode)"
            }
            Self::TrivialFlat => "linear R^m or C^m inside C^n (params: m, n, kind, contrast, lambda_mode)",
        }
    }

    pub fn is_immersion(&self) -> bool {
        matches!(self, Self::CrCnR | Self::LagrangianTorus | Self::GenericProduct | Self::TrivialFlat)
    }
}

impl fmt::Display for GalleryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GalleryId {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.id() == s)
            .ok_or_else(|| GeomError::Configuration(format!("unknown gallery id `{s}`")))
    }
}

/// The vector field `Λ` entering the contrast tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMode {
    /// `Λ = Σ xⁱ∂x_i + Σ yⁱ∂y_i`.
    Radial,
    /// A fixed coordinate vector.
    Constant(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contrast {
    None,
    K1,
    K2,
    K3,
    K4,
}

/// Whether a flat linear submanifold is totally real or complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlatKind {
    Real,
    Complex,
}

/// Parameters for gallery constructors; each id reads only the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalleryParams {
    pub alpha: f64,
    pub lambda: f64,
    pub n: usize,
    pub m: usize,
    /// Torus radii; defaults to all ones.
    pub r: Option<Vec<f64>>,
    pub lambda_mode: LambdaMode,
    /// Ambient contrast for immersions; each immersion has its own default.
    pub contrast: Option<Contrast>,
    pub kind: FlatKind,
    /// Mixed second-order term injected into `cr-cn-r`.
    pub defect: f64,
}

impl Default for GalleryParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            lambda: 0.1,
            n: 1,
            m: 1,
            r: None,
            lambda_mode: LambdaMode::Radial,
            contrast: None,
            kind: FlatKind::Real,
            defect: 0.0,
        }
    }
}

impl GalleryParams {
    fn radii(&self) -> Result<Vec<f64>> {
        let r = self.r.clone().unwrap_or_else(|| vec![1.0; self.n]);
        if r.len() != self.n {
            return Err(GeomError::Configuration(format!("expected {} radii, got {}", self.n, r.len())));
        }
        if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(GeomError::Configuration("torus radii must be positive".into()));
        }
        Ok(r)
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > MAX_COMPLEX_DIM {
            return Err(GeomError::Configuration(format!("complex dimension {n} outside 1..={MAX_COMPLEX_DIM}")));
        }
        Ok(())
    }

    fn check_scalars(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("lambda", self.lambda), ("defect", self.defect)] {
            if !v.is_finite() {
                return Err(GeomError::Configuration(format!("parameter `{name}` must be finite")));
            }
        }
        if let LambdaMode::Constant(v) = &self.lambda_mode {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GeomError::Configuration("constant Lambda must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GallerySpec {
    pub id: GalleryId,
    #[serde(default)]
    pub params: GalleryParams,
}

impl GallerySpec {
    pub fn new(id: GalleryId) -> Self {
        Self { id, params: GalleryParams::default() }
    }

    pub fn with_params(id: GalleryId, params: GalleryParams) -> Self {
        Self { id, params }
    }
}

/// One line per gallery entry: `(id, description)`.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    GalleryId::ALL.iter().map(|g| (g.id(), g.description())).collect()
}

fn lambda_at(mode: &LambdaMode, p: &Point) -> Vector {
    match mode {
        LambdaMode::Radial => p.clone(),
        LambdaMode::Constant(v) => Vector::from_column_slice(v),
    }
}

/// Components `K^k_ij` of the selected contrast tensor for a Kaehler metric `g`,
/// complex structure `j` and vector field value `l`.
pub fn contrast_tensor(which: Contrast, g: &Matrix, j: &Matrix, l: &Vector) -> Tensor3 {
    let dim = g.nrows();
    if which == Contrast::None {
        return Tensor3::zeros(dim);
    }
    let jl = j * l;
    let gl = g * l;
    // a_i = g(Λ, ∂_i), b_i = g(Λ, J∂_i), c_i = g(JΛ, ∂_i)
    let a: Vec<f64> = (0..dim).map(|i| gl[i]).collect();
    let b: Vec<f64> = (0..dim).map(|i| (j.column(i).transpose() * &gl)[(0, 0)]).collect();
    let c: Vec<f64> = (0..dim).map(|i| (g.row(i) * &jl)[(0, 0)]).collect();
    Tensor3::from_fn(dim, |k, x, y| {
        let (cl, cjl) = match which {
            Contrast::K1 => (c[x] * c[y] - a[x] * a[y], c[x] * a[y] + a[x] * c[y]),
            Contrast::K2 => (
                b[x] * b[y] - a[x] * a[y] - b[x] * a[y] - a[x] * b[y],
                a[x] * a[y] - b[x] * b[y] - b[x] * a[y] - a[x] * b[y],
            ),
            Contrast::K3 => (b[x] * a[y] + a[x] * b[y], b[x] * b[y] - a[x] * a[y]),
            Contrast::K4 => (
                a[x] * a[y] - b[x] * b[y] + a[x] * b[y] + b[x] * a[y],
                b[x] * b[y] - a[x] * a[y] + a[x] * b[y] + b[x] * a[y],
            ),
            Contrast::None => (0.0, 0.0),
        };
        cl * l[k] + cjl * jl[k]
    })
}

/// Flat `C^n` on the box `(-half, half)^{2n}` with the given contrast.
pub fn flat_complex_chart(name: &str, n: usize, half: f64, contrast: Contrast, mode: &LambdaMode) -> Result<Arc<Chart>> {
    if let LambdaMode::Constant(v) = mode {
        if v.len() != 2 * n {
            return Err(GeomError::Configuration(format!("constant Lambda needs {} components, got {}", 2 * n, v.len())));
        }
    }
    let dim = 2 * n;
    let j = standard_complex_structure(n);
    let jk = j.clone();
    let mode = mode.clone();
    let chart = Chart::new(name, Domain::cube(dim, -half, half), move |_| Matrix::identity(dim, dim))
        .with_complex_structure(move |_| j.clone())?
        .with_levi_civita(move |_| Ok(ConnectionCoeffs::zeros(dim)))
        .with_contrast(move |p| contrast_tensor(contrast, &Matrix::identity(dim, dim), &jk, &lambda_at(&mode, p)));
    Ok(Arc::new(chart))
}

fn exp_family(alpha: f64) -> Arc<Chart> {
    let chart = Chart::new("exp-family", Domain::new(vec![(0.1, 10.0)]), |p| Matrix::from_element(1, 1, p[0].powi(-2)))
        .with_levi_civita(|p| Ok(ConnectionCoeffs::new(Tensor3::from_fn(1, |_, _, _| -1.0 / p[0]))))
        .with_contrast(move |p| Tensor3::from_fn(1, |_, _, _| alpha / p[0]));
    Arc::new(chart)
}

/// Contrast tensor of the half-plane: `-k¹₁₁ = k²₁₂ = k²₂₁ = k¹₂₂ = λ`.
pub fn half_plane_contrast(lambda: f64) -> Tensor3 {
    let mut k = Tensor3::zeros(2);
    k.set(0, 0, 0, -lambda);
    k.set(1, 0, 1, lambda);
    k.set(1, 1, 0, lambda);
    k.set(0, 1, 1, lambda);
    k
}

/// Levi-Civita symbols of `g = x¹((dx¹)² + (dx²)²)`.
pub fn half_plane_levi_civita(p: &Point) -> ConnectionCoeffs {
    let h = 0.5 / p[0];
    let mut g = Tensor3::zeros(2);
    g.set(0, 0, 0, h);
    g.set(1, 0, 1, h);
    g.set(1, 1, 0, h);
    g.set(0, 1, 1, -h);
    ConnectionCoeffs::new(g)
}

fn half_plane(lambda: f64) -> Result<Arc<Chart>> {
    let chart = Chart::new("half-plane", Domain::new(vec![(0.1, 10.0), (-10.0, 10.0)]), |p| {
        Matrix::identity(2, 2) * p[0]
    })
    .with_complex_structure(|_| standard_complex_structure(1))?
    .with_levi_civita(|p| Ok(half_plane_levi_civita(p)))
    .with_contrast(move |_| half_plane_contrast(lambda));
    Ok(Arc::new(chart))
}

/// Build the chart of a gallery entry. Immersion entries return their ambient chart.
pub fn build_chart(spec: &GallerySpec) -> Result<Arc<Chart>> {
    let p = &spec.params;
    p.check_scalars()?;
    match spec.id {
        GalleryId::ExpFamily => Ok(exp_family(p.alpha)),
        GalleryId::HalfPlane => half_plane(p.lambda),
        GalleryId::K1Space | GalleryId::K2Space | GalleryId::K3Space | GalleryId::K4Space => {
            p.check_n(p.n)?;
            let which = match spec.id {
                GalleryId::K1Space => Contrast::K1,
                GalleryId::K2Space => Contrast::K2,
                GalleryId::K3Space => Contrast::K3,
                _ => Contrast::K4,
            };
            flat_complex_chart(spec.id.id(), p.n, 1.0, which, &p.lambda_mode)
        }
        _ => Ok(Arc::clone(&build_immersion(spec)?.0.ambient)),
    }
}

/// Build an immersion entry together with its CR structure, when it has one.
pub fn build_immersion(spec: &GallerySpec) -> Result<(Immersion, Option<CrStructure>)> {
    let p = &spec.params;
    p.check_scalars()?;
    match spec.id {
        GalleryId::CrCnR => cr_cn_r(p),
        GalleryId::LagrangianTorus => lagrangian_torus(p),
        GalleryId::GenericProduct => generic_product(p),
        GalleryId::TrivialFlat => trivial_flat(p),
        other => Err(GeomError::Configuration(format!("gallery entry `{other}` is a chart, not an immersion"))),
    }
}

fn unit(dim: usize, i: usize) -> Vector {
    Vector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 })
}

/// `(z, t) ↦ (z, t)` from `C^n × R` into `C^{n+1}`, with `t` the real part of the
/// last coordinate and an optional `defect · x¹ · t` in its imaginary part.
fn cr_cn_r(p: &GalleryParams) -> Result<(Immersion, Option<CrStructure>)> {
    let n = p.n;
    p.check_n(n + 1)?;
    let contrast = p.contrast.unwrap_or(Contrast::K3);
    let ambient = flat_complex_chart("cr-cn-r-ambient", n + 1, 2.0, contrast, &p.lambda_mode)?;
    let m = 2 * n + 1;
    let big = 2 * (n + 1);
    let defect = p.defect;
    let place = move |u: &Point| {
        let mut x = Vector::zeros(big);
        for i in 0..n {
            x[i] = u[i];
            x[n + 1 + i] = u[n + i];
        }
        x[n] = u[2 * n];
        x[2 * n + 1] = defect * u[0] * u[2 * n];
        x
    };
    let jac = move |u: &Point| {
        let mut j = Matrix::zeros(big, m);
        for i in 0..n {
            j[(i, i)] = 1.0;
            j[(n + 1 + i, n + i)] = 1.0;
        }
        j[(n, 2 * n)] = 1.0;
        j[(2 * n + 1, 0)] = defect * u[2 * n];
        j[(2 * n + 1, 2 * n)] = defect * u[0];
        j
    };
    let hess = move |_: &Point| {
        let mut h = vec![Vector::zeros(big); m * m];
        h[2 * n] = unit(big, 2 * n + 1) * defect;
        h[2 * n * m] = unit(big, 2 * n + 1) * defect;
        h
    };
    let imm = Immersion::new("cr-cn-r", Domain::cube(m, -1.0, 1.0), ambient, place)?.with_jacobian(jac).with_hessian(hess);
    let d_axes: Vec<usize> = (0..2 * n).collect();
    Ok((imm, Some(CrStructure::coordinate(m, &d_axes, &[2 * n]))))
}

fn angle_domain(k: usize) -> Vec<(f64, f64)> {
    vec![(-FRAC_PI_2 + ANGLE_MARGIN, FRAC_PI_2 - ANGLE_MARGIN); k]
}

/// `u ↦ (r₁cos u¹, …, rₙcos uⁿ, r₁sin u¹, …, rₙsin uⁿ)` in `C^n`.
fn lagrangian_torus(p: &GalleryParams) -> Result<(Immersion, Option<CrStructure>)> {
    let n = p.n;
    p.check_n(n)?;
    let r = p.radii()?;
    let half = r.iter().cloned().fold(0.0, f64::max) + 1.0;
    let contrast = p.contrast.unwrap_or(Contrast::None);
    let ambient = flat_complex_chart("lagrangian-torus-ambient", n, half, contrast, &p.lambda_mode)?;
    let (r1, r2, r3) = (r.clone(), r.clone(), r);
    let imm = Immersion::new("lagrangian-torus", Domain::new(angle_domain(n)), ambient, move |u| {
        let mut x = Vector::zeros(2 * n);
        for i in 0..n {
            x[i] = r1[i] * u[i].cos();
            x[n + i] = r1[i] * u[i].sin();
        }
        x
    })?
    .with_jacobian(move |u| {
        let mut j = Matrix::zeros(2 * n, n);
        for i in 0..n {
            j[(i, i)] = -r2[i] * u[i].sin();
            j[(n + i, i)] = r2[i] * u[i].cos();
        }
        j
    })
    .with_hessian(move |u| {
        let mut h = vec![Vector::zeros(2 * n); n * n];
        for i in 0..n {
            let mut v = Vector::zeros(2 * n);
            v[i] = -r3[i] * u[i].cos();
            v[n + i] = -r3[i] * u[i].sin();
            h[i * n + i] = v;
        }
        h
    });
    let axes: Vec<usize> = (0..n).collect();
    Ok((imm, Some(CrStructure::coordinate(n, &[], &axes))))
}

/// `C^{n+1} × (−π/2, π/2)^n → C^{2n+1}`: identity on the first `n+1` complex
/// coordinates and a Lagrangian torus in the remaining `n`.
fn generic_product(p: &GalleryParams) -> Result<(Immersion, Option<CrStructure>)> {
    let n = p.n;
    p.check_n(2 * n + 1)?;
    let r = p.radii()?;
    let big_n = 2 * n + 1;
    let big = 2 * big_n;
    let m = 2 * (n + 1) + n;
    let half = r.iter().cloned().fold(1.0, f64::max) + 1.0;
    let contrast = p.contrast.unwrap_or(Contrast::K4);
    let ambient = flat_complex_chart("generic-product-ambient", big_n, half, contrast, &p.lambda_mode)?;
    let mut bounds = vec![(-1.0, 1.0); 2 * (n + 1)];
    bounds.extend(angle_domain(n));
    // domain: (x¹..x^{n+1}, y¹..y^{n+1}, θ¹..θⁿ)
    let xi = move |i: usize| i; // real part of complex coordinate i
    let yi = move |i: usize| big_n + i;
    let (r1, r2, r3) = (r.clone(), r.clone(), r);
    let imm = Immersion::new("generic-product", Domain::new(bounds), ambient, move |u| {
        let mut x = Vector::zeros(big);
        for i in 0..=n {
            x[xi(i)] = u[i];
            x[yi(i)] = u[n + 1 + i];
        }
        for k in 0..n {
            let th = u[2 * (n + 1) + k];
            x[xi(n + 1 + k)] = r1[k] * th.cos();
            x[yi(n + 1 + k)] = r1[k] * th.sin();
        }
        x
    })?
    .with_jacobian(move |u| {
        let mut j = Matrix::zeros(big, m);
        for i in 0..=n {
            j[(xi(i), i)] = 1.0;
            j[(yi(i), n + 1 + i)] = 1.0;
        }
        for k in 0..n {
            let a = 2 * (n + 1) + k;
            let th = u[a];
            j[(xi(n + 1 + k), a)] = -r2[k] * th.sin();
            j[(yi(n + 1 + k), a)] = r2[k] * th.cos();
        }
        j
    })
    .with_hessian(move |u| {
        let mut h = vec![Vector::zeros(big); m * m];
        for k in 0..n {
            let a = 2 * (n + 1) + k;
            let th = u[a];
            let mut v = Vector::zeros(big);
            v[xi(n + 1 + k)] = -r3[k] * th.cos();
            v[yi(n + 1 + k)] = -r3[k] * th.sin();
            h[a * m + a] = v;
        }
        h
    });
    let d_axes: Vec<usize> = (0..2 * (n + 1)).collect();
    let dperp_axes: Vec<usize> = (2 * (n + 1)..m).collect();
    Ok((imm, Some(CrStructure::coordinate(m, &d_axes, &dperp_axes))))
}

/// Linear `R^m ⊂ C^n` (`u ↦ x`) or `C^m ⊂ C^n` (`(x, y) ↦ (x, 0, y, 0)`).
fn trivial_flat(p: &GalleryParams) -> Result<(Immersion, Option<CrStructure>)> {
    let (n, m) = (p.n, p.m);
    p.check_n(n)?;
    let contrast = p.contrast.unwrap_or(Contrast::None);
    let ambient = flat_complex_chart("trivial-flat-ambient", n, 2.0, contrast, &p.lambda_mode)?;
    let big = 2 * n;
    match p.kind {
        FlatKind::Real => {
            if m == 0 || m > n {
                return Err(GeomError::Configuration(format!("real flat inclusion needs 1 <= m <= n, got m={m}, n={n}")));
            }
            let mut jac = Matrix::zeros(big, m);
            for i in 0..m {
                jac[(i, i)] = 1.0;
            }
            let jm = jac.clone();
            let imm = Immersion::new("trivial-flat", Domain::cube(m, -1.0, 1.0), ambient, move |u| &jm * u)?
                .with_jacobian(move |_| jac.clone())
                .with_hessian(move |_| vec![Vector::zeros(big); m * m]);
            let axes: Vec<usize> = (0..m).collect();
            Ok((imm, Some(CrStructure::coordinate(m, &[], &axes))))
        }
        FlatKind::Complex => {
            if m == 0 || m >= n {
                return Err(GeomError::Configuration(format!("complex flat inclusion needs 1 <= m < n, got m={m}, n={n}")));
            }
            let dm = 2 * m;
            let mut jac = Matrix::zeros(big, dm);
            for i in 0..m {
                jac[(i, i)] = 1.0;
                jac[(n + i, m + i)] = 1.0;
            }
            let jm = jac.clone();
            let imm = Immersion::new("trivial-flat", Domain::cube(dm, -1.0, 1.0), ambient, move |u| &jm * u)?
                .with_jacobian(move |_| jac.clone())
                .with_hessian(move |_| vec![Vector::zeros(big); dm * dm]);
            let axes: Vec<usize> = (0..dm).collect();
            Ok((imm, Some(CrStructure::coordinate(dm, &axes, &[]))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statstruct::k_condition_residuals;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
        Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn half_plane_contrast_entries() {
        let k = half_plane_contrast(0.1);
        assert_eq!(k.get(0, 0, 0), -0.1);
        assert_eq!(k.get(1, 0, 1), 0.1);
        assert_eq!(k.get(1, 1, 0), 0.1);
        assert_eq!(k.get(0, 1, 1), 0.1);
        for (a, b, c) in [(1, 0, 0), (0, 0, 1), (0, 1, 0), (1, 1, 1)] {
            assert_eq!(k.get(a, b, c), 0.0);
        }
    }

    #[test]
    fn k3_vanishes_at_origin_for_radial_lambda() {
        let chart = build_chart(&GallerySpec::new(GalleryId::K3Space)).unwrap();
        let k = chart.contrast_at(&Vector::zeros(2)).unwrap();
        assert_eq!(k.max_abs(), 0.0);
    }

    #[test]
    fn k1_on_first_basis_vector() {
        let params = GalleryParams { lambda_mode: LambdaMode::Constant(vec![1.0, 0.0]), ..Default::default() };
        let chart = build_chart(&GallerySpec::with_params(GalleryId::K1Space, params)).unwrap();
        let k = chart.contrast_at(&Vector::from_vec(vec![0.3, -0.2])).unwrap();
        let e1 = unit(2, 0);
        let v = k.contract(&e1, &e1);
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn contrast_tensors_satisfy_k_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let j = standard_complex_structure(n);
            let g = Matrix::identity(2 * n, 2 * n);
            for which in [Contrast::K1, Contrast::K2, Contrast::K3, Contrast::K4] {
                for _ in 0..5 {
                    let l = random_vec(&mut rng, 2 * n);
                    let k = contrast_tensor(which, &g, &j, &l);
                    let (x, y, z) = (random_vec(&mut rng, 2 * n), random_vec(&mut rng, 2 * n), random_vec(&mut rng, 2 * n));
                    let r = k_condition_residuals(&k, &g, &j, &x, &y, &z);
                    assert!(r.max() < 1e-12, "{which:?} n={n}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn contrast_relations_between_k1_k2_k3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let j = standard_complex_structure(n);
            let g = Matrix::identity(2 * n, 2 * n);
            for _ in 0..10 {
                let l = random_vec(&mut rng, 2 * n);
                let k1 = contrast_tensor(Contrast::K1, &g, &j, &l);
                let k3j = contrast_tensor(Contrast::K3, &g, &j, &(&j * &l));
                assert!(k1.max_abs_diff(&k3j).unwrap() < 1e-10);
                let k2 = contrast_tensor(Contrast::K2, &g, &j, &l);
                let dim = 2 * n;
                let expected = Tensor3::from_fn(dim, |kk, x, y| {
                    let v = k1.contract(&unit(dim, x), &unit(dim, y));
                    (&v - &j * &v)[kk]
                });
                assert!(k2.max_abs_diff(&expected).unwrap() < 1e-10);
                let k4 = contrast_tensor(Contrast::K4, &g, &j, &l);
                assert!(k4.add(&k2).unwrap().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn torus_induced_metric_is_radius_squared() {
        let params = GalleryParams { r: Some(vec![1.5]), ..Default::default() };
        let (imm, cr) = build_immersion(&GallerySpec::with_params(GalleryId::LagrangianTorus, params)).unwrap();
        let cr = cr.unwrap();
        assert!(cr.d_fields.is_empty());
        for u in [-1.0, 0.0, 0.7] {
            let j = imm.jacobian_at(&Vector::from_vec(vec![u])).unwrap();
            assert_abs_diff_eq!((j.transpose() * &j)[(0, 0)], 2.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn generic_product_dimensions() {
        let (imm, cr) = build_immersion(&GallerySpec::new(GalleryId::GenericProduct)).unwrap();
        assert_eq!(imm.dim(), 5);
        assert_eq!(imm.ambient_dim(), 6);
        let cr = cr.unwrap();
        assert_eq!((cr.d_fields.len(), cr.dperp_fields.len()), (4, 1));
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        for id in [GalleryId::CrCnR, GalleryId::LagrangianTorus, GalleryId::GenericProduct] {
            let params = GalleryParams { defect: 0.3, n: 2, ..Default::default() };
            let (imm, _) = build_immersion(&GallerySpec::with_params(id, params)).unwrap();
            let u = Vector::from_fn(imm.dim(), |i, _| 0.1 + 0.05 * i as f64);
            let plain = Immersion::new("fd", imm.domain.clone(), Arc::clone(&imm.ambient), {
                let imm = imm.clone();
                move |q| imm.point(q).unwrap()
            })
            .unwrap();
            let ja = imm.jacobian_at(&u).unwrap();
            let jf = plain.jacobian_at(&u).unwrap();
            assert!((ja - jf).amax() < 1e-8, "{id}");
            let ha = imm.hessian_at(&u).unwrap();
            let hf = plain.hessian_at(&u).unwrap();
            for (a, b) in ha.iter().zip(&hf) {
                assert!((a - b).amax() < 1e-4, "{id}");
            }
        }
    }

    #[test]
    fn unknown_ids_and_bad_params_are_rejected() {
        assert!("nope".parse::<GalleryId>().is_err());
        assert_eq!("cr-cn-r".parse::<GalleryId>().unwrap(), GalleryId::CrCnR);
        let bad = GalleryParams { r: Some(vec![-1.0]), ..Default::default() };
        assert!(build_immersion(&GallerySpec::with_params(GalleryId::LagrangianTorus, bad)).is_err());
        let bad = GalleryParams { kind: FlatKind::Complex, m: 2, n: 2, ..Default::default() };
        assert!(build_immersion(&GallerySpec::with_params(GalleryId::TrivialFlat, bad)).is_err());
        assert!(build_immersion(&GallerySpec::new(GalleryId::HalfPlane)).is_err());
        let bad = GalleryParams { lambda_mode: LambdaMode::Constant(vec![1.0]), ..Default::default() };
        assert!(build_chart(&GallerySpec::with_params(GalleryId::K1Space, bad)).is_err());
    }
}
