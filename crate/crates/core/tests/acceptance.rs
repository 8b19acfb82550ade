//! Acceptance battery. Runs as a plain binary so that every criterion prints its
//! own PASS/FAIL line; the process exits non-zero when any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use holostat::chart::standard_complex_structure;
use holostat::chenricci::{oracle_sweep, quadratic_max};
use holostat::curvature::{averaged_curvature, curvature_at, sectional_pair};
use holostat::gallery::{
    build_chart, build_immersion, Contrast, FlatKind, GalleryId, GalleryParams, GallerySpec, LambdaMode,
};
use holostat::report::{chart_samples, domain_grid, oracle_alphas, run, RunConfig, RunReport, Status, Suite, ORACLE_DIMENSIONS};
use holostat::statstruct::{alpha_connection, dual_connection, holomorphic_residual, statistical_residuals};
use holostat::submanifold::{
    cr_product_criterion, cr_residuals, gauss_equation_residual, induced_geometry, proposition_suite, CrStructure, Immersion,
    PropositionCheck, Verdict,
};
use holostat::{Chart, ConnectionCoeffs, Domain, DualPair, FdConfig, Matrix, Point, Tensor3, Vector};

const SEED: u64 = 20_240_601;

const STRUCTURE_TOL: f64 = 1e-6;
const HOLOMORPHIC_TOL: f64 = 1e-6;
const INJECTED_DELTA: f64 = 1e-3;
const INJECTED_FLOOR: f64 = 1e-4;
const DUAL_ALPHA_TOL: f64 = 1e-8;
const DISPLAYED_GAMMA_TOL: f64 = 1e-9;
const SECTIONAL_TOL: f64 = 1e-5;
const FLAT_TOL: f64 = 1e-7;
const FORM_TOL: f64 = 1e-6;
const GAUSS_TOL: f64 = 1e-5;
const TRACE_TOL: f64 = 1e-6;
const CR_TOL: f64 = 1e-6;
const PROPOSITION_TOL: f64 = 1e-5;
const CR_PRODUCT_TOL: f64 = 1e-6;
const DEFECT_BAND: f64 = 0.2;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_SAMPLES: usize = 1_000_000;
const SLACK_TOL: f64 = 1e-6;
const CHAIN_TOL: f64 = 1e-5;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn spec(id: GalleryId, params: GalleryParams) -> GallerySpec {
    GallerySpec::with_params(id, params)
}

fn chart_of(id: GalleryId, params: GalleryParams) -> Arc<Chart> {
    build_chart(&spec(id, params)).expect("gallery chart")
}

fn immersion_of(id: GalleryId, params: GalleryParams) -> (Immersion, CrStructure, DualPair) {
    let (imm, cr) = build_immersion(&spec(id, params)).expect("gallery immersion");
    let pair = DualPair::from_contrast(&imm.ambient, FdConfig::default()).expect("dual pair");
    (imm, cr.expect("CR structure"), pair)
}

fn grid(imm: &Immersion, k: usize) -> Vec<Point> {
    domain_grid(imm.domain.bounds(), k)
}

fn k_spaces() -> Vec<(String, Arc<Chart>)> {
    let mut out = Vec::new();
    for id in [GalleryId::K1Space, GalleryId::K2Space, GalleryId::K3Space, GalleryId::K4Space] {
        for n in [1, 2] {
            out.push((format!("{id} n={n}"), chart_of(id, GalleryParams { n, ..Default::default() })));
        }
    }
    out
}

fn half_planes() -> Vec<(String, Arc<Chart>)> {
    [0.0, 0.3, -0.5]
        .into_iter()
        .map(|lambda| (format!("half-plane λ={lambda}"), chart_of(GalleryId::HalfPlane, GalleryParams { lambda, ..Default::default() })))
        .collect()
}

fn structure_charts() -> Vec<(String, Arc<Chart>)> {
    let mut out: Vec<(String, Arc<Chart>)> = [-1.0, 0.0, 1.0]
        .into_iter()
        .map(|alpha| (format!("exp-family α={alpha}"), chart_of(GalleryId::ExpFamily, GalleryParams { alpha, ..Default::default() })))
        .collect();
    out.extend(half_planes());
    out.extend(k_spaces());
    out
}

/// Holomorphic inclusion `C¹ ⊂ C²` with a constant-`Λ` K1 contrast.
fn holomorphic_inclusion() -> GalleryParams {
    GalleryParams {
        m: 1,
        n: 2,
        kind: FlatKind::Complex,
        contrast: Some(Contrast::K1),
        lambda_mode: LambdaMode::Constant(vec![0.3, 0.5, -0.2, 0.4]),
        ..Default::default()
    }
}

fn circle() -> GalleryParams {
    GalleryParams { n: 1, ..Default::default() }
}

fn criterion_1() -> Outcome {
    let cfg = FdConfig::default();
    let mut worst = (0.0_f64, String::new());
    for (name, chart) in structure_charts() {
        let pair = DualPair::from_contrast(&chart, cfg).expect("dual pair");
        for p in chart_samples(&chart, 100, SEED).expect("samples") {
            let r = statistical_residuals(&chart, &pair, &p, &cfg).expect("structure residuals").max_statistical();
            if !(r <= worst.0) {
                worst = (r, name.clone());
            }
        }
    }
    Outcome::new(worst.0 <= STRUCTURE_TOL, format!("max torsion/duality/Codazzi residual {:.3e} ({}) ≤ {STRUCTURE_TOL:.0e}", worst.0, worst.1))
}

/// Flat `C¹` carrying `chart`'s contrast plus `δ` on `K(∂x, ∂x)` along `∂x`, which
/// is symmetric but does not anticommute with `J`.
fn injected_chart(base: Arc<Chart>, delta: f64) -> Arc<Chart> {
    let domain = base.domain.clone();
    let chart = Chart::new("injected", domain, |_| Matrix::identity(2, 2))
        .with_complex_structure(|_| standard_complex_structure(1))
        .expect("complex structure")
        .with_levi_civita(|_| Ok(ConnectionCoeffs::zeros(2)))
        .with_contrast(move |p| {
            let mut k = base.contrast_at(p).expect("base contrast");
            k.set(0, 0, 0, k.get(0, 0, 0) + delta);
            k
        });
    Arc::new(chart)
}

fn criterion_2() -> Outcome {
    let cfg = FdConfig::default();
    let mut charts = half_planes();
    charts.extend(k_spaces());
    let mut worst = (0.0_f64, String::new());
    for (name, chart) in &charts {
        let pair = DualPair::from_contrast(chart, cfg).expect("dual pair");
        for p in chart_samples(chart, 100, SEED).expect("samples") {
            let r = holomorphic_residual(chart, &pair, &p, &cfg).expect("holomorphic residual");
            if !(r <= worst.0) {
                worst = (r, name.clone());
            }
        }
    }
    let injected = injected_chart(chart_of(GalleryId::K1Space, GalleryParams::default()), INJECTED_DELTA);
    let pair = DualPair::from_contrast(&injected, cfg).expect("dual pair");
    let detected = chart_samples(&injected, 100, SEED)
        .expect("samples")
        .iter()
        .map(|p| holomorphic_residual(&injected, &pair, p, &cfg).expect("holomorphic residual"))
        .fold(f64::INFINITY, f64::min);
    Outcome::new(
        worst.0 <= HOLOMORPHIC_TOL && detected >= INJECTED_FLOOR,
        format!(
            "max residual {:.3e} ({}) ≤ {HOLOMORPHIC_TOL:.0e}; injected δ={INJECTED_DELTA:.0e} gives min {detected:.3e} ≥ {INJECTED_FLOOR:.0e}",
            worst.0, worst.1
        ),
    )
}

fn criterion_3() -> Outcome {
    let cfg = FdConfig::default();
    let chart = chart_of(GalleryId::ExpFamily, GalleryParams::default());
    let mut worst: f64 = 0.0;
    for alpha in [-1.0, 0.0, 0.5, 1.0] {
        for phi in [0.5, 1.0, 2.0, 5.0] {
            let p = Vector::from_element(1, phi);
            let dual = dual_connection(&chart, &alpha_connection(phi, alpha).unwrap(), &p, &cfg).expect("dual connection");
            let expected = alpha_connection(phi, -alpha).unwrap();
            worst = worst.max(dual.max_abs_diff(&expected).unwrap());
        }
    }
    Outcome::new(worst <= DUAL_ALPHA_TOL, format!("max |Γ*(α) - Γ(-α)| {worst:.3e} ≤ {DUAL_ALPHA_TOL:.0e}"))
}

/// The half-plane connection as displayed for the worked example.
fn displayed_half_plane(p: &Point, lambda: f64) -> Tensor3 {
    let h = 0.5 / p[0];
    let mut g = Tensor3::zeros(2);
    g.set(0, 0, 0, h - lambda);
    g.set(1, 0, 1, h + lambda);
    g.set(1, 1, 0, h + lambda);
    g.set(0, 1, 1, -(h + lambda));
    g
}

fn criterion_4() -> Outcome {
    let lambda = 0.1;
    let chart = chart_of(GalleryId::HalfPlane, GalleryParams { lambda, ..Default::default() });
    let pair = DualPair::from_contrast(&chart, FdConfig::default()).expect("dual pair");
    let mut worst = (0.0_f64, (0, 0, 0));
    for p in chart_samples(&chart, 20, SEED).expect("samples") {
        let (nabla, _) = pair.at(&p).expect("connection");
        let shown = displayed_half_plane(&p, lambda);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let d = (nabla.get(k, i, j) - shown.get(k, i, j)).abs();
                    if d > worst.0 {
                        worst = (d, (k, i, j));
                    }
                }
            }
        }
    }
    let (k, i, j) = worst.1;
    Outcome::new(
        worst.0 <= DISPLAYED_GAMMA_TOL,
        format!(
            "max |Γ - displayed| {:.3e} at Γ^{}_{}{} ≤ {DISPLAYED_GAMMA_TOL:.0e} (torsion-free duals of g = x¹δ force Γ¹₂₂ = λ - 1/(2x¹))",
            worst.0,
            k + 1,
            i + 1,
            j + 1
        ),
    )
}

/// Gaussian curvature `-Δ(ln φ) / (2φ)` of `φ(dx² + dy²)`, with the Laplacian taken
/// by a five-point stencil on `ln φ`.
fn conformal_sectional(phi: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    let h = 1e-3;
    let l = |a: f64, b: f64| phi(a, b).ln();
    let lap = (l(x + h, y) + l(x - h, y) + l(x, y + h) + l(x, y - h) - 4.0 * l(x, y)) / (h * h);
    -lap / (2.0 * phi(x, y))
}

/// Polar coordinates on the flat plane, with exact Christoffel symbols.
fn polar_chart() -> Arc<Chart> {
    let chart = Chart::new("polar", Domain::new(vec![(0.5, 2.0), (-1.0, 1.0)]), |p| {
        Matrix::from_diagonal(&Vector::from_vec(vec![1.0, p[0] * p[0]]))
    })
    .with_levi_civita(|p| {
        let mut g = Tensor3::zeros(2);
        g.set(0, 1, 1, -p[0]);
        g.set(1, 0, 1, 1.0 / p[0]);
        g.set(1, 1, 0, 1.0 / p[0]);
        Ok(ConnectionCoeffs::new(g))
    });
    Arc::new(chart)
}

fn criterion_5() -> Outcome {
    let curv = FdConfig::curvature();
    let chart = chart_of(GalleryId::HalfPlane, GalleryParams { lambda: 0.0, ..Default::default() });
    let pair = DualPair::from_contrast(&chart, FdConfig::default()).expect("dual pair");
    let p = Vector::from_vec(vec![1.0, 0.0]);
    let s = averaged_curvature(&pair, &p, &curv, &chart.domain).expect("curvature");
    let g = chart.metric_at(&p).unwrap();
    let e = |i: usize| Vector::from_fn(2, |r, _| if r == i { 1.0 } else { 0.0 });
    let sectional = sectional_pair(&s, &g, &e(0), &e(1)).expect("sectional");
    let oracle = conformal_sectional(|x, _| x, 1.0, 0.0);
    let sectional_err = (sectional - oracle).abs();

    let mut flats = k_spaces();
    flats.push(("polar".into(), polar_chart()));
    let mut worst = (0.0_f64, String::new());
    for (name, chart) in &flats {
        for q in chart_samples(chart, 20, SEED).expect("samples") {
            let r = curvature_at(|x: &Point| chart.levi_civita_at(x, &FdConfig::default()), &q, &curv, &chart.domain)
                .expect("curvature")
                .r
                .max_abs();
            if !(r <= worst.0) {
                worst = (r, name.clone());
            }
        }
    }
    Outcome::new(
        sectional_err <= SECTIONAL_TOL && worst.0 <= FLAT_TOL,
        format!(
            "sectional at (1,0) {sectional:.9} vs conformal oracle {oracle:.9} (|Δ| {sectional_err:.2e} ≤ {SECTIONAL_TOL:.0e}); flat max ‖R‖ {:.3e} ({}) ≤ {FLAT_TOL:.0e}",
            worst.0, worst.1
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = FdConfig::default();
    let cases = [
        ("circle", GalleryId::LagrangianTorus, circle(), 5),
        ("cr-cn-r n=1", GalleryId::CrCnR, GalleryParams::default(), 3),
        ("generic-product", GalleryId::GenericProduct, GalleryParams::default(), 2),
        ("holomorphic inclusion", GalleryId::TrivialFlat, holomorphic_inclusion(), 4),
    ];
    let (mut sym, mut avg) = (0.0_f64, 0.0_f64);
    let mut gauss = (0.0_f64, "");
    for (name, id, params, k) in cases {
        let (imm, _, pair) = immersion_of(id, params);
        for u in grid(&imm, k) {
            let geom = induced_geometry(&imm, &pair, &u, &cfg).expect("induced geometry");
            sym = sym.max(geom.symmetry_defect());
            avg = avg.max(geom.average_defect());
            if matches!(id, GalleryId::LagrangianTorus | GalleryId::CrCnR) {
                let r = gauss_equation_residual(&imm, &pair, &u, &cfg).expect("Gauss residual").max();
                if !(r <= gauss.0) {
                    gauss = (r, name);
                }
            }
        }
    }
    let (imm, cr, pair) = immersion_of(GalleryId::TrivialFlat, holomorphic_inclusion());
    let (mut trace, mut b_size) = (0.0_f64, 0.0_f64);
    for u in grid(&imm, 4) {
        let rep = proposition_suite(&imm, &pair, &cr, &u, PropositionCheck::HolomorphicTrace, &cfg).expect("trace check");
        trace = trace.max(rep.conclusions["trace_b"]).max(rep.conclusions["trace_b_star"]);
        let geom = induced_geometry(&imm, &pair, &u, &cfg).unwrap();
        b_size = b_size.max(geom.conn.b.iter().map(|b| b.amax()).fold(0.0, f64::max));
    }
    Outcome::new(
        sym <= FORM_TOL && avg <= FORM_TOL && gauss.0 <= GAUSS_TOL && trace <= TRACE_TOL && b_size > 0.0,
        format!(
            "symmetry {sym:.2e}, 2B⁰ - B - B* {avg:.2e} ≤ {FORM_TOL:.0e}; Gauss {:.2e} ({}) ≤ {GAUSS_TOL:.0e}; \
             tr B, tr B* {trace:.2e} ≤ {TRACE_TOL:.0e} with max |B| {b_size:.2e}",
            gauss.0, gauss.1
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = FdConfig::default();
    let mut cr_worst: f64 = 0.0;
    let mut minimality: f64 = 0.0;
    let mut all_hold = true;
    for (id, k) in [(GalleryId::CrCnR, 3), (GalleryId::GenericProduct, 2)] {
        let (imm, cr, pair) = immersion_of(id, GalleryParams::default());
        for u in grid(&imm, k) {
            cr_worst = cr_worst.max(cr_residuals(&imm, &cr, &u).expect("CR residuals").max());
            let rep = proposition_suite(&imm, &pair, &cr, &u, PropositionCheck::HolomorphicMinimality, &cfg).expect("minimality");
            minimality = minimality.max(rep.max_conclusion());
            all_hold &= rep.verdict(CR_TOL, PROPOSITION_TOL) == Verdict::Holds;
        }
    }
    let (imm, cr, pair) = immersion_of(GalleryId::TrivialFlat, holomorphic_inclusion());
    let mut mu_sector: f64 = 0.0;
    for u in grid(&imm, 4) {
        let rep = proposition_suite(&imm, &pair, &cr, &u, PropositionCheck::ShapeFAnticommute, &cfg).expect("μ-sector check");
        mu_sector = mu_sector.max(rep.max_conclusion());
        all_hold &= rep.verdict(CR_TOL, PROPOSITION_TOL) == Verdict::Holds;
    }
    Outcome::new(
        cr_worst <= CR_TOL && minimality <= PROPOSITION_TOL && mu_sector <= PROPOSITION_TOL && all_hold,
        format!(
            "jd_closure/jdperp_normality/FP {cr_worst:.2e} ≤ {CR_TOL:.0e}; D minimality {minimality:.2e}, \
             A_fV X + A*_V PX {mu_sector:.2e} ≤ {PROPOSITION_TOL:.0e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let cfg = FdConfig::default();
    let mut product = Vec::new();
    for (id, k) in [(GalleryId::CrCnR, 3), (GalleryId::GenericProduct, 2)] {
        let (imm, cr, pair) = immersion_of(id, GalleryParams::default());
        let points = grid(&imm, k);
        let (mut holds, mut worst) = (0usize, 0.0_f64);
        for u in &points {
            let c = cr_product_criterion(&imm, &pair, &cr, u, &cfg, CR_PRODUCT_TOL).expect("CR-product criterion");
            holds += usize::from(c.verdict == Some(true));
            worst = worst.max(c.a_norm).max(c.a_star_norm);
        }
        product.push((id, holds, points.len(), worst));
    }
    let params = GalleryParams { defect: INJECTED_DELTA, contrast: Some(Contrast::None), ..Default::default() };
    let (imm, cr, pair) = immersion_of(GalleryId::CrCnR, params);
    let (mut flagged, mut band) = (true, (f64::INFINITY, 0.0_f64));
    let points = grid(&imm, 3);
    for u in &points {
        let c = cr_product_criterion(&imm, &pair, &cr, u, &cfg, CR_PRODUCT_TOL).expect("CR-product criterion");
        flagged &= c.verdict == Some(false);
        let norm = c.a_norm.max(c.a_star_norm);
        band = (band.0.min(norm), band.1.max(norm));
    }
    let within = |x: f64| (x - INJECTED_DELTA).abs() <= DEFECT_BAND * INJECTED_DELTA;
    let defect_ok = flagged && within(band.0) && within(band.1);
    let products_ok = product.iter().all(|&(_, h, n, _)| h == n);
    let summary: Vec<String> =
        product.iter().map(|(id, h, n, w)| format!("{id} true at {h}/{n} (max ‖A‖ {w:.2e})")).collect();
    Outcome::new(
        products_ok && defect_ok,
        format!(
            "{}; defect {INJECTED_DELTA:.0e} flagged at every point: {flagged}, norms in [{:.3e}, {:.3e}] within {:.0}%",
            summary.join(", "),
            band.0,
            band.1,
            DEFECT_BAND * 100.0
        ),
    )
}

fn criterion_9() -> Outcome {
    let alphas = oracle_alphas();
    let runs = oracle_sweep(&alphas, &ORACLE_DIMENSIONS, ORACLE_SAMPLES, SEED).expect("oracle sweep");
    let excess = runs.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max);
    let exact = alphas.iter().all(|&a| {
        ORACLE_DIMENSIONS.iter().all(|&m| {
            let qp = quadratic_max(a, m).unwrap();
            qp.solution[0] == a / 2.0 && qp.constraint_residual() == 0.0
        })
    });
    Outcome::new(
        excess <= ORACLE_TOL && exact && runs.len() == alphas.len() * ORACLE_DIMENSIONS.len(),
        format!(
            "{} (α, m) pairs at {ORACLE_SAMPLES} samples: max oracle excess over α²/4 {excess:.3e} ≤ {ORACLE_TOL:.0e}; h₁₁ = α/2 exactly: {exact}",
            runs.len()
        ),
    )
}

fn ricci_run(gallery: GalleryId, params: GalleryParams, grid: usize, seed: u64) -> RunReport {
    let mut config = RunConfig::new(gallery, vec![Suite::ChenRicci]);
    config.params = params;
    config.grid = grid;
    config.seed = seed;
    config.directions = 8;
    config.tolerances.chen_ricci = SLACK_TOL;
    config.tolerances.chain_identity = CHAIN_TOL;
    run(&config).expect("Ricci run")
}

fn criterion_10() -> Outcome {
    let flat = ricci_run(GalleryId::TrivialFlat, GalleryParams { m: 2, n: 2, kind: FlatKind::Real, ..Default::default() }, 3, SEED);
    let recs = &flat.suites[0].records;
    let flat_ok = !recs.is_empty()
        && recs.iter().all(|r| r.slack == Some(0.0) && r.flags.values().all(|&f| f) && r.status == Status::Pass);

    let torus = GalleryParams { n: 2, r: Some(vec![1.0, 1.0]), contrast: Some(Contrast::None), ..Default::default() };
    let cr_cn_r = GalleryParams { n: 1, contrast: Some(Contrast::K3), ..Default::default() };
    let mut parts = Vec::new();
    let mut curved_ok = true;
    for (name, id, params) in [("lagrangian-torus", GalleryId::LagrangianTorus, torus), ("cr-cn-r", GalleryId::CrCnR, cr_cn_r)] {
        let report = ricci_run(id, params, 5, SEED);
        let recs = &report.suites[0].records;
        let applicable: Vec<_> = recs.iter().filter(|r| r.status != Status::Skipped).collect();
        let min_slack = applicable.iter().filter_map(|r| r.slack).fold(f64::INFINITY, f64::min);
        let chain = applicable.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
        curved_ok &= !applicable.is_empty()
            && applicable.iter().all(|r| r.status == Status::Pass)
            && min_slack >= -SLACK_TOL
            && chain <= CHAIN_TOL;
        parts.push(format!("{name} {}/{} applicable, min slack {min_slack:.3e}, chain {chain:.2e}", applicable.len(), recs.len()));
    }
    Outcome::new(
        flat_ok && curved_ok,
        format!(
            "flat plane slack 0 with equality flags at {} samples: {flat_ok}; {} (slack ≥ -{SLACK_TOL:.0e}, chain ≤ {CHAIN_TOL:.0e})",
            recs.len(),
            parts.join("; ")
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut config = RunConfig::new(GalleryId::CrCnR, Suite::ALL.to_vec());
    config.params.contrast = Some(Contrast::K3);
    config.grid = 3;
    config.oracle_samples = 10_000;
    config.seed = SEED;
    let first = run(&config).expect("run").render();
    let second = run(&config).expect("run").render();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    let serial = pool.install(|| run(&config)).expect("run").render();
    Outcome::new(
        first == second && first == serial,
        format!("{} bytes; repeat identical: {}; single-thread identical: {}", first.len(), first == second, first == serial),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("structure axioms", criterion_1),
        ("holomorphic condition", criterion_2),
        ("dual of α-connection", criterion_3),
        ("displayed half-plane Γ", criterion_4),
        ("curvature", criterion_5),
        ("submanifold forms", criterion_6),
        ("CR structure", criterion_7),
        ("CR-product", criterion_8),
        ("quadratic maximum", criterion_9),
        ("Ricci inequality", criterion_10),
        ("determinism", criterion_11),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {:>2} {:<24} {} [{:.1}s] {}",
            i + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} of {} passed in {:.1}s", criteria.len() - failed, criteria.len(), started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
