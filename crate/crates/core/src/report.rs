//! Batch runner: TOML run configurations, verification suites over seeded sample
//! points, and deterministic JSON reports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::chart::{Chart, FdConfig, FdScheme, Point, Vector};
use crate::chenricci::{chen_ricci_report, oracle_sweep, pointwise_holomorphic_fit, quadratic_max, seeded_unit_directions, ChenRicciOptions, EQUALITY_TOL};
use crate::curvature::{averaged_curvature, fit_holomorphic_c, HolomorphicSample};
use crate::error::GeomError;
use crate::gallery::{build_chart, build_immersion, GalleryId, GalleryParams, GallerySpec};
use crate::statstruct::{holomorphic_residual, statistical_residuals, DualPair};
use crate::submanifold::{cr_product_criterion, cr_residuals, proposition_suite, CrStructure, Immersion, PropositionCheck, TangentSpace, Verdict};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Fraction of each chart axis kept clear of the boundary when sampling.
const SAMPLE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Structure,
    Holomorphic,
    CurvatureFit,
    Cr,
    Propositions,
    CrProduct,
    ChenRicci,
    QuadraticOracle,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Self::Structure,
        Self::Holomorphic,
        Self::CurvatureFit,
        Self::Cr,
        Self::Propositions,
        Self::CrProduct,
        Self::ChenRicci,
        Self::QuadraticOracle,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::Structure => "structure",
            Self::Holomorphic => "holomorphic",
            Self::CurvatureFit => "curvature-fit",
            Self::Cr => "cr",
            Self::Propositions => "propositions",
            Self::CrProduct => "cr-product",
            Self::ChenRicci => "chen-ricci",
            Self::QuadraticOracle => "quadratic-oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        Self::ALL.into_iter().find(|x| x.id() == s).ok_or_else(|| RunError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSettings {
    pub step: f64,
    pub scheme: FdScheme,
    /// Outer step for curvature, which differentiates connection symbols.
    pub curvature_step: f64,
}

impl Default for FdSettings {
    fn default() -> Self {
        let d = FdConfig::default();
        Self { step: d.step, scheme: d.scheme, curvature_step: FdConfig::curvature().step }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub structure: f64,
    pub holomorphic: f64,
    /// Largest pointwise misfit for which the ambient counts as constant-curvature.
    pub curvature_fit: f64,
    pub cr: f64,
    pub propositions: f64,
    pub cr_product: f64,
    /// Allowed negative slack.
    pub chen_ricci: f64,
    pub chain_identity: f64,
    pub quadratic_oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structure: 1e-6,
            holomorphic: 1e-6,
            curvature_fit: 1e-6,
            cr: 1e-6,
            propositions: 1e-5,
            cr_product: 1e-6,
            chen_ricci: 1e-6,
            chain_identity: 1e-5,
            quadratic_oracle: 1e-9,
        }
    }
}

impl Tolerances {
    fn uniform(t: f64) -> Self {
        Self {
            structure: t,
            holomorphic: t,
            curvature_fit: t,
            cr: t,
            propositions: t,
            cr_product: t,
            chen_ricci: t,
            chain_identity: t,
            quadratic_oracle: t,
        }
    }

    fn all(&self) -> [f64; 9] {
        [
            self.structure,
            self.holomorphic,
            self.curvature_fit,
            self.cr,
            self.propositions,
            self.cr_product,
            self.chen_ricci,
            self.chain_identity,
            self.quadratic_oracle,
        ]
    }
}

fn default_grid() -> usize {
    5
}
fn default_samples() -> usize {
    100
}
fn default_oracle_samples() -> usize {
    100_000
}
fn default_directions() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gallery: GalleryId,
    #[serde(default)]
    pub params: GalleryParams,
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub seed: u64,
    /// Points per axis of the regular grid on an immersion's domain.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Seeded random points for suites that run on a chart.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub fd: FdSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: usize,
    /// Seeded unit directions per point for the Ricci inequality.
    #[serde(default = "default_directions")]
    pub directions: usize,
}

/// Command-line overrides applied on top of a parsed configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub fd_step: Option<f64>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn new(gallery: GalleryId, suites: Vec<Suite>) -> Self {
        Self {
            gallery,
            params: GalleryParams::default(),
            suites,
            seed: 0,
            grid: default_grid(),
            samples: default_samples(),
            fd: FdSettings::default(),
            tolerances: Tolerances::default(),
            oracle_samples: default_oracle_samples(),
            directions: default_directions(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, RunError> {
        let cfg: Self = toml::from_str(s).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), RunError> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(g) = o.grid {
            self.grid = g;
        }
        if let Some(h) = o.fd_step {
            self.fd.step = h;
        }
        if let Some(t) = o.tol {
            self.tolerances = Tolerances::uniform(t);
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let fail = |msg: String| Err(RunError::Config(msg));
        if self.suites.is_empty() {
            return fail("`suites` must not be empty".into());
        }
        let mut seen = self.suites.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.suites.len() {
            return fail("`suites` lists a suite twice".into());
        }
        if self.grid < 2 {
            return fail(format!("`grid` must be at least 2, got {}", self.grid));
        }
        for (name, v) in [("samples", self.samples), ("oracle_samples", self.oracle_samples), ("directions", self.directions)] {
            if v == 0 {
                return fail(format!("`{name}` must be positive"));
            }
        }
        for (name, v) in [("fd.step", self.fd.step), ("fd.curvature_step", self.fd.curvature_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("`{name}` must be a positive number, got {v}"));
            }
        }
        if self.tolerances.all().iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return fail("tolerances must be positive numbers".into());
        }
        Ok(())
    }

    fn fd_config(&self) -> FdConfig {
        FdConfig { step: self.fd.step, scheme: self.fd.scheme, tol_identity: self.tolerances.structure }
    }

    fn curvature_config(&self) -> FdConfig {
        FdConfig::curvature().with_step(self.fd.curvature_step)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric error in suite `{suite}` at point #{index} {point:?}: {source}")]
    Numeric { suite: String, index: usize, point: Vec<f64>, source: GeomError },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numeric { .. } => EXIT_NUMERIC,
        }
    }

    fn at(suite: &str, index: usize, point: &[f64], e: GeomError) -> Self {
        match e {
            GeomError::Configuration(msg) | GeomError::UnknownCheck(msg) => Self::Config(msg),
            source => Self::Numeric { suite: suite.to_string(), index, point: point.to_vec(), source },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Machine-readable cause attached to every skipped record or suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    NoComplexStructure,
    NotAnImmersion,
    NoCrStructure,
    HypothesisNotMet,
    NotProper,
    NonConstantHolomorphicCurvature,
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Self::NoComplexStructure => "no-complex-structure",
            Self::NotAnImmersion => "not-an-immersion",
            Self::NoCrStructure => "no-cr-structure",
            Self::HypothesisNotMet => "hypothesis-not-met",
            Self::NotProper => "not-proper",
            Self::NonConstantHolomorphicCurvature => "non-constant-holomorphic-curvature",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub index: usize,
    pub point: Vec<f64>,
    pub label: Option<String>,
    pub direction: Option<Vec<f64>>,
    pub values: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    /// The asserted residual, when the check is a residual bound.
    pub residual: Option<f64>,
    pub slack: Option<f64>,
    pub status: Status,
    pub reason: Option<Reason>,
}

impl Record {
    fn new(index: usize, point: &[f64]) -> Self {
        Self {
            index,
            point: point.to_vec(),
            label: None,
            direction: None,
            values: BTreeMap::new(),
            flags: BTreeMap::new(),
            residual: None,
            slack: None,
            status: Status::Pass,
            reason: None,
        }
    }

    fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    fn flag(mut self, key: &str, v: bool) -> Self {
        self.flags.insert(key.to_string(), v);
        self
    }

    /// Pass when `residual ≤ tol`.
    fn bounded(mut self, residual: f64, tol: f64) -> Self {
        self.residual = Some(residual);
        self.status = if residual <= tol { Status::Pass } else { Status::Fail };
        self
    }

    fn skip(mut self, reason: Reason) -> Self {
        self.status = Status::Skipped;
        self.reason = Some(reason);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub max_residual: Option<f64>,
    pub min_slack: Option<f64>,
    pub pass_count: usize,
    pub fail_count: usize,
    pub skip_count: usize,
}

impl Summary {
    pub fn from_records(records: &[Record]) -> Self {
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        let max_residual = records.iter().filter(|r| r.status != Status::Skipped).filter_map(|r| r.residual).reduce(f64::max);
        let min_slack = records.iter().filter(|r| r.status != Status::Skipped).filter_map(|r| r.slack).reduce(f64::min);
        Self {
            max_residual,
            min_slack,
            pass_count: count(Status::Pass),
            fail_count: count(Status::Fail),
            skip_count: count(Status::Skipped),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub status: Status,
    pub reason: Option<Reason>,
    /// Suite-level values such as a global fit.
    pub extras: BTreeMap<String, f64>,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl SuiteReport {
    fn from_records(suite: Suite, records: Vec<Record>, extras: BTreeMap<String, f64>) -> Self {
        let summary = Summary::from_records(&records);
        let status = if summary.fail_count > 0 { Status::Fail } else { Status::Pass };
        Self { suite, status, reason: None, extras, records, summary }
    }

    fn skipped(suite: Suite, reason: Reason) -> Self {
        Self {
            suite,
            status: Status::Skipped,
            reason: Some(reason),
            extras: BTreeMap::new(),
            records: Vec::new(),
            summary: Summary::from_records(&[]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub suites: Vec<SuiteReport>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILURE
        }
    }

    pub fn to_json(&self) -> Value {
        let config = config_echo(&self.config);
        json!({
            "artifact_version": ARTIFACT_VERSION,
            "config": config.clone(),
            "status": if self.passed() { "pass" } else { "fail" },
            "suites": self.suites.iter().map(|s| suite_json(s, &config)).collect::<Vec<_>>(),
        })
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report values are always serializable");
        s.push('\n');
        s
    }
}

/// A real number as a decimal string with 17 significant digits.
pub fn num(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}

fn config_echo(cfg: &RunConfig) -> Value {
    stringify_floats(serde_json::to_value(cfg).expect("configuration is always serializable"))
}

fn record_json(r: &Record) -> Value {
    let mut o = Map::new();
    o.insert("index".into(), json!(r.index));
    o.insert("point".into(), nums(&r.point));
    o.insert("label".into(), r.label.clone().map(Value::String).unwrap_or(Value::Null));
    o.insert("direction".into(), r.direction.as_deref().map(nums).unwrap_or(Value::Null));
    o.insert("values".into(), Value::Object(r.values.iter().map(|(k, v)| (k.clone(), num(*v))).collect()));
    o.insert("flags".into(), Value::Object(r.flags.iter().map(|(k, v)| (k.clone(), Value::Bool(*v))).collect()));
    o.insert("residual".into(), opt_num(r.residual));
    o.insert("slack".into(), opt_num(r.slack));
    o.insert("status".into(), json!(r.status));
    o.insert("reason".into(), json!(r.reason));
    Value::Object(o)
}

fn suite_json(s: &SuiteReport, config: &Value) -> Value {
    json!({
        "artifact_version": ARTIFACT_VERSION,
        "suite": s.suite.id(),
        "config": config,
        "status": s.status,
        "reason": s.reason,
        "extras": Value::Object(s.extras.iter().map(|(k, v)| (k.clone(), num(*v))).collect()),
        "records": s.records.iter().map(record_json).collect::<Vec<_>>(),
        "summary": {
            "max_residual": opt_num(s.summary.max_residual),
            "min_slack": opt_num(s.summary.min_slack),
            "pass_count": s.summary.pass_count,
            "fail_count": s.summary.fail_count,
            "skip_count": s.summary.skip_count,
        },
    })
}

/// JSON Schema of the report written by [`RunReport::render`].
pub fn report_schema() -> Value {
    let number = json!({ "type": "string", "description": "decimal with 17 significant digits" });
    let numbers = json!({ "type": "array", "items": number });
    let reason = json!({
        "enum": [null, "no-complex-structure", "not-an-immersion", "no-cr-structure", "hypothesis-not-met", "not-proper", "non-constant-holomorphic-curvature"]
    });
    let status = json!({ "enum": ["pass", "fail", "skipped"] });
    let record = json!({
        "type": "object",
        "required": ["index", "point", "label", "direction", "values", "flags", "residual", "slack", "status", "reason"],
        "additionalProperties": false,
        "properties": {
            "index": { "type": "integer", "minimum": 0 },
            "point": numbers,
            "label": { "type": ["string", "null"] },
            "direction": { "oneOf": [numbers, { "type": "null" }] },
            "values": { "type": "object", "additionalProperties": number },
            "flags": { "type": "object", "additionalProperties": { "type": "boolean" } },
            "residual": { "oneOf": [number, { "type": "null" }] },
            "slack": { "oneOf": [number, { "type": "null" }] },
            "status": status,
            "reason": reason
        }
    });
    let suite = json!({
        "type": "object",
        "required": ["artifact_version", "suite", "config", "status", "reason", "extras", "records", "summary"],
        "additionalProperties": false,
        "properties": {
            "artifact_version": { "type": "string" },
            "suite": { "enum": Suite::ALL.iter().map(|s| s.id()).collect::<Vec<_>>() },
            "config": { "type": "object" },
            "status": status,
            "reason": reason,
            "extras": { "type": "object", "additionalProperties": number },
            "records": { "type": "array", "items": record },
            "summary": {
                "type": "object",
                "required": ["max_residual", "min_slack", "pass_count", "fail_count", "skip_count"],
                "additionalProperties": false,
                "properties": {
                    "max_residual": { "oneOf": [number, { "type": "null" }] },
                    "min_slack": { "oneOf": [number, { "type": "null" }] },
                    "pass_count": { "type": "integer", "minimum": 0 },
                    "fail_count": { "type": "integer", "minimum": 0 },
                    "skip_count": { "type": "integer", "minimum": 0 }
                }
            }
        }
    });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "holostat verification report",
        "type": "object",
        "required": ["artifact_version", "config", "status", "suites"],
        "additionalProperties": false,
        "properties": {
            "artifact_version": { "type": "string" },
            "config": { "type": "object", "description": "echo of the run configuration; reals as decimal strings" },
            "status": { "enum": ["pass", "fail"] },
            "suites": { "type": "array", "items": suite }
        }
    })
}

/// Seeded uniform points inside the chart domain, away from its boundary.
pub fn chart_samples(chart: &Chart, count: usize, seed: u64) -> Result<Vec<Point>, RunError> {
    let bounds = chart.domain.bounds();
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite())) {
        return Err(RunError::Config(format!("chart `{}` has an unbounded domain", chart.name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            Vector::from_iterator(
                bounds.len(),
                bounds.iter().map(|(lo, hi)| {
                    let pad = SAMPLE_MARGIN * (hi - lo);
                    rng.gen_range(lo + pad..hi - pad)
                }),
            )
        })
        .collect())
}

/// Cell-centred regular grid with `k` points per axis, last axis fastest.
pub fn domain_grid(bounds: &[(f64, f64)], k: usize) -> Vec<Point> {
    let m = bounds.len();
    let total = k.pow(m as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = Vector::zeros(m);
            for axis in (0..m).rev() {
                let (lo, hi) = bounds[axis];
                p[axis] = lo + (hi - lo) * ((idx % k) as f64 + 0.5) / k as f64;
                idx /= k;
            }
            p
        })
        .collect()
}

struct Setup {
    config: RunConfig,
    chart: Arc<Chart>,
    pair: DualPair,
    immersion: Option<(Immersion, Option<CrStructure>)>,
}

/// Evaluate `f` at every point in parallel; the first failing point in index order is reported.
fn per_point<T: Send>(suite: Suite, points: &[Point], f: impl Fn(usize, &Point) -> crate::error::Result<T> + Sync) -> Result<Vec<T>, RunError> {
    let results: Vec<crate::error::Result<T>> = points.par_iter().enumerate().map(|(i, p)| f(i, p)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| RunError::at(suite.id(), i, points[i].as_slice(), e)))
        .collect()
}

fn structure_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    let tol = s.config.tolerances.structure;
    let cfg = s.config.fd_config();
    let points = chart_samples(&s.chart, s.config.samples, s.config.seed)?;
    let records = per_point(Suite::Structure, &points, |i, p| {
        let r = statistical_residuals(&s.chart, &s.pair, p, &cfg)?;
        Ok(Record::new(i, p.as_slice())
            .value("torsion", r.torsion)
            .value("torsion_star", r.torsion_star)
            .value("duality", r.duality)
            .value("codazzi", r.codazzi)
            .bounded(r.max_statistical(), tol))
    })?;
    Ok(SuiteReport::from_records(Suite::Structure, records, BTreeMap::new()))
}

fn holomorphic_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    if !s.chart.has_complex_structure() {
        return Ok(SuiteReport::skipped(Suite::Holomorphic, Reason::NoComplexStructure));
    }
    let tol = s.config.tolerances.holomorphic;
    let cfg = s.config.fd_config();
    let points = chart_samples(&s.chart, s.config.samples, s.config.seed)?;
    let records = per_point(Suite::Holomorphic, &points, |i, p| {
        let r = holomorphic_residual(&s.chart, &s.pair, p, &cfg)?;
        Ok(Record::new(i, p.as_slice()).value("holomorphic", r).bounded(r, tol))
    })?;
    Ok(SuiteReport::from_records(Suite::Holomorphic, records, BTreeMap::new()))
}

fn curvature_fit_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    if !s.chart.has_complex_structure() {
        return Ok(SuiteReport::skipped(Suite::CurvatureFit, Reason::NoComplexStructure));
    }
    let tol = s.config.tolerances.curvature_fit;
    let curv = s.config.curvature_config();
    let points = chart_samples(&s.chart, s.config.samples, s.config.seed)?;
    let samples = per_point(Suite::CurvatureFit, &points, |_, p| {
        Ok(HolomorphicSample {
            s: averaged_curvature(&s.pair, p, &curv, &s.chart.domain)?,
            metric: s.chart.metric_at(p)?,
            complex_structure: s.chart.complex_structure_at(p)?,
        })
    })?;
    let mut records = Vec::with_capacity(points.len());
    for (i, (p, sample)) in points.iter().zip(&samples).enumerate() {
        let fit = fit_holomorphic_c(std::slice::from_ref(sample)).map_err(|e| RunError::at(Suite::CurvatureFit.id(), i, p.as_slice(), e))?;
        let r = Record::new(i, p.as_slice()).value("c", fit.c).value("fit_residual", fit.residual);
        records.push(if fit.residual <= tol { r.bounded(fit.residual, tol) } else { r.skip(Reason::NonConstantHolomorphicCurvature) });
    }
    let global = fit_holomorphic_c(&samples).map_err(|e| RunError::at(Suite::CurvatureFit.id(), 0, &[], e))?;
    let extras = BTreeMap::from([("c".to_string(), global.c), ("fit_residual".to_string(), global.residual)]);
    Ok(SuiteReport::from_records(Suite::CurvatureFit, records, extras))
}

fn immersion_points(imm: &Immersion, grid: usize) -> Vec<Point> {
    domain_grid(imm.domain.bounds(), grid)
}

fn cr_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    let Some((imm, cr)) = &s.immersion else {
        return Ok(SuiteReport::skipped(Suite::Cr, Reason::NotAnImmersion));
    };
    let Some(cr) = cr else {
        return Ok(SuiteReport::skipped(Suite::Cr, Reason::NoCrStructure));
    };
    let tol = s.config.tolerances.cr;
    let points = immersion_points(imm, s.config.grid);
    let records = per_point(Suite::Cr, &points, |i, u| {
        let r = cr_residuals(imm, cr, u)?;
        Ok(Record::new(i, u.as_slice())
            .value("jd_closure", r.jd_closure)
            .value("jdperp_normality", r.jdperp_normality)
            .value("fp_norm", r.fp_norm)
            .bounded(r.max(), tol))
    })?;
    Ok(SuiteReport::from_records(Suite::Cr, records, BTreeMap::new()))
}

fn propositions_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    let Some((imm, cr)) = &s.immersion else {
        return Ok(SuiteReport::skipped(Suite::Propositions, Reason::NotAnImmersion));
    };
    let Some(cr) = cr else {
        return Ok(SuiteReport::skipped(Suite::Propositions, Reason::NoCrStructure));
    };
    let tol = s.config.tolerances.propositions;
    let cfg = s.config.fd_config();
    let points = immersion_points(imm, s.config.grid);
    let nested = per_point(Suite::Propositions, &points, |i, u| {
        PropositionCheck::ALL
            .iter()
            .enumerate()
            .map(|(k, &check)| {
                let rep = proposition_suite(imm, &s.pair, cr, u, check, &cfg)?;
                let mut r = Record::new(i * PropositionCheck::ALL.len() + k, u.as_slice());
                r.label = Some(check.id().to_string());
                for (name, v) in rep.hypotheses.iter().chain(&rep.conclusions).chain(&rep.diagnostics) {
                    r.values.insert(name.clone(), *v);
                }
                Ok(match rep.verdict(tol, tol) {
                    Verdict::NotApplicable => r.skip(Reason::HypothesisNotMet),
                    _ => r.bounded(rep.max_conclusion(), tol),
                })
            })
            .collect::<crate::error::Result<Vec<_>>>()
    })?;
    Ok(SuiteReport::from_records(Suite::Propositions, nested.into_iter().flatten().collect(), BTreeMap::new()))
}

fn cr_product_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    let Some((imm, cr)) = &s.immersion else {
        return Ok(SuiteReport::skipped(Suite::CrProduct, Reason::NotAnImmersion));
    };
    let Some(cr) = cr else {
        return Ok(SuiteReport::skipped(Suite::CrProduct, Reason::NoCrStructure));
    };
    if !cr.is_proper() {
        return Ok(SuiteReport::skipped(Suite::CrProduct, Reason::NotProper));
    }
    let tol = s.config.tolerances.cr_product;
    let cfg = s.config.fd_config();
    let points = immersion_points(imm, s.config.grid);
    let records = per_point(Suite::CrProduct, &points, |i, u| {
        let r = cr_product_criterion(imm, &s.pair, cr, u, &cfg, tol)?;
        let rec = Record::new(i, u.as_slice()).value("a_norm", r.a_norm).value("a_star_norm", r.a_star_norm);
        Ok(match r.verdict {
            Some(v) => rec.flag("verdict", v).bounded(r.a_norm.max(r.a_star_norm), tol),
            None => rec.skip(Reason::NotProper),
        })
    })?;
    Ok(SuiteReport::from_records(Suite::CrProduct, records, BTreeMap::new()))
}

fn chen_ricci_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    let Some((imm, _)) = &s.immersion else {
        return Ok(SuiteReport::skipped(Suite::ChenRicci, Reason::NotAnImmersion));
    };
    let t = &s.config.tolerances;
    let opts = ChenRicciOptions {
        fd: s.config.fd_config(),
        curvature: s.config.curvature_config(),
        fit_tol: t.curvature_fit,
        equality_tol: EQUALITY_TOL,
    };
    let dirs = s.config.directions;
    let points = immersion_points(imm, s.config.grid);
    let nested = per_point(Suite::ChenRicci, &points, |i, u| {
        let mut rng = ChaCha8Rng::seed_from_u64(s.config.seed);
        rng.set_stream(i as u64);
        let space = TangentSpace::at(imm, u)?;
        let fit = pointwise_holomorphic_fit(&imm.ambient, &s.pair, &space.x, &opts.curvature)?;
        seeded_unit_directions(&space.metric, dirs, &mut rng)
            .into_iter()
            .enumerate()
            .map(|(d, x)| {
                let rep = chen_ricci_report(imm, &s.pair, u, &x, fit, &opts)?;
                let mut r = Record::new(i * dirs + d, u.as_slice())
                    .value("ric_pair", rep.ric_pair)
                    .value("ric0", rep.ric0)
                    .value("px_norm2", rep.px_norm2)
                    .value("c", rep.c)
                    .value("fit_residual", rep.fit_residual)
                    .value("h_norm2", rep.h_norm2)
                    .value("h_star_norm2", rep.h_star_norm2)
                    .value("rhs", rep.rhs)
                    .value("slack", rep.slack)
                    .value("chain_lhs", rep.chain.lhs)
                    .value("chain_rhs", rep.chain.rhs)
                    .value("dropped", rep.dropped)
                    .value("dropped_star", rep.dropped_star)
                    .flag("applicable", rep.applicable)
                    .flag("equality_h_xx", rep.equality.h_xx)
                    .flag("equality_h_star_xx", rep.equality.h_star_xx)
                    .flag("equality_h_xy", rep.equality.h_xy)
                    .flag("equality_h_star_xy", rep.equality.h_star_xy);
                r.direction = Some(rep.x.clone());
                if !rep.applicable {
                    return Ok(r.skip(Reason::NonConstantHolomorphicCurvature));
                }
                r = r.bounded(rep.chain.residual, t.chain_identity);
                r.slack = Some(rep.slack);
                if rep.slack < -t.chen_ricci {
                    r.status = Status::Fail;
                }
                Ok(r)
            })
            .collect::<crate::error::Result<Vec<_>>>()
    })?;
    Ok(SuiteReport::from_records(Suite::ChenRicci, nested.into_iter().flatten().collect(), BTreeMap::new()))
}

/// `α ∈ {-3, -2.5, …, 3}`.
pub fn oracle_alphas() -> Vec<f64> {
    (-6..=6).map(|k| k as f64 / 2.0).collect()
}

pub const ORACLE_DIMENSIONS: [usize; 7] = [2, 3, 4, 5, 6, 7, 8];

fn quadratic_oracle_suite(s: &Setup) -> Result<SuiteReport, RunError> {
    let tol = s.config.tolerances.quadratic_oracle;
    let alphas = oracle_alphas();
    let runs = oracle_sweep(&alphas, &ORACLE_DIMENSIONS, s.config.oracle_samples, s.config.seed)
        .map_err(|e| RunError::at(Suite::QuadraticOracle.id(), 0, &[], e))?;
    let mut records = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let point = [run.alpha, run.m as f64];
        let qp = quadratic_max(run.alpha, run.m).map_err(|e| RunError::at(Suite::QuadraticOracle.id(), i, &point, e))?;
        let exact = qp.solution[0] == run.alpha / 2.0 && qp.constraint_residual() == 0.0;
        let mut r = Record::new(i, &point)
            .value("oracle_best", run.best_value)
            .value("bound", qp.max_value)
            .value("h11", qp.solution[0])
            .value("constraint_residual", qp.constraint_residual())
            .value("certificate", qp.certificate)
            .flag("maximizer_exact", exact)
            .bounded(run.excess.max(0.0), tol);
        if !exact || qp.certificate > tol {
            r.status = Status::Fail;
        }
        records.push(r);
    }
    Ok(SuiteReport::from_records(Suite::QuadraticOracle, records, BTreeMap::new()))
}

fn setup(config: &RunConfig) -> Result<Setup, RunError> {
    let spec = GallerySpec::with_params(config.gallery, config.params.clone());
    let wrap = |e: GeomError| RunError::at("setup", 0, &[], e);
    let immersion = if config.gallery.is_immersion() { Some(build_immersion(&spec).map_err(wrap)?) } else { None };
    let chart = match &immersion {
        Some((imm, _)) => Arc::clone(&imm.ambient),
        None => build_chart(&spec).map_err(wrap)?,
    };
    let pair = DualPair::from_contrast(&chart, config.fd_config()).map_err(wrap)?;
    Ok(Setup { config: config.clone(), chart, pair, immersion })
}

/// Run every configured suite in configuration order.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    config.validate()?;
    let s = setup(config)?;
    let suites = config
        .suites
        .iter()
        .map(|suite| match suite {
            Suite::Structure => structure_suite(&s),
            Suite::Holomorphic => holomorphic_suite(&s),
            Suite::CurvatureFit => curvature_fit_suite(&s),
            Suite::Cr => cr_suite(&s),
            Suite::Propositions => propositions_suite(&s),
            Suite::CrProduct => cr_product_suite(&s),
            Suite::ChenRicci => chen_ricci_suite(&s),
            Suite::QuadraticOracle => quadratic_oracle_suite(&s),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunReport { config: config.clone(), suites })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toml_config(extra: &str) -> Result<RunConfig, RunError> {
        RunConfig::from_toml_str(&format!("gallery = \"half-plane\"\nsuites = [\"structure\"]\n{extra}"))
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = toml_config("").unwrap();
        assert_eq!((cfg.grid, cfg.samples, cfg.seed, cfg.directions), (5, 100, 0, 8));
        assert_eq!(cfg.tolerances, Tolerances::default());
        for bad in ["grid = 1", "bogus = 3", "samples = 0", "[fd]\nstep = -1.0", "[tolerances]\ncr = 0.0", "[params]\nlambda = \"x\""] {
            assert!(matches!(toml_config(bad), Err(RunError::Config(_))), "{bad}");
        }
        assert!(RunConfig::from_toml_str("gallery = \"nowhere\"\nsuites = [\"cr\"]").is_err());
        assert!(RunConfig::from_toml_str("gallery = \"half-plane\"\nsuites = []").is_err());
        assert!(RunConfig::from_toml_str("gallery = \"half-plane\"\nsuites = [\"cr\", \"cr\"]").is_err());
        assert_eq!(RunError::Config(String::new()).exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let mut cfg = toml_config("").unwrap();
        cfg.apply(&Overrides { seed: Some(9), grid: Some(3), fd_step: Some(1e-4), tol: Some(1e-3) }).unwrap();
        assert_eq!((cfg.seed, cfg.grid, cfg.fd.step, cfg.tolerances.chen_ricci), (9, 3, 1e-4, 1e-3));
        assert!(cfg.apply(&Overrides { grid: Some(1), ..Default::default() }).is_err());
    }

    #[test]
    fn numbers_have_seventeen_significant_digits() {
        assert_eq!(num(0.1), Value::String("1.0000000000000001e-1".into()));
        assert_eq!(num(-2.0), Value::String("-2.0000000000000000e0".into()));
    }

    #[test]
    fn grid_is_cell_centred_and_ordered() {
        let g = domain_grid(&[(-1.0, 1.0), (0.0, 1.0)], 2);
        let flat: Vec<Vec<f64>> = g.iter().map(|p| p.as_slice().to_vec()).collect();
        assert_eq!(flat, vec![vec![-0.5, 0.25], vec![-0.5, 0.75], vec![0.5, 0.25], vec![0.5, 0.75]]);
        assert!(domain_grid(&[(-1.0, 1.0)], 5).iter().any(|p| p[0] == 0.0));
    }

    #[test]
    fn half_plane_structure_and_holomorphic_pass() {
        let mut cfg = RunConfig::new(GalleryId::HalfPlane, vec![Suite::Structure, Suite::Holomorphic]);
        cfg.params.lambda = 0.3;
        let rep = run(&cfg).unwrap();
        assert!(rep.passed());
        for s in &rep.suites {
            assert_eq!(s.summary.pass_count, 100);
            assert!(s.summary.max_residual.unwrap() <= 1e-6);
        }
    }

    #[test]
    fn chart_galleries_skip_immersion_suites() {
        let cfg = RunConfig::new(GalleryId::ExpFamily, vec![Suite::Holomorphic, Suite::Cr, Suite::ChenRicci]);
        let rep = run(&cfg).unwrap();
        assert!(rep.passed());
        let reasons: Vec<_> = rep.suites.iter().map(|s| s.reason).collect();
        assert_eq!(reasons, vec![Some(Reason::NoComplexStructure), Some(Reason::NotAnImmersion), Some(Reason::NotAnImmersion)]);
    }

    #[test]
    fn totally_geodesic_plane_has_zero_slack() {
        let mut cfg = RunConfig::new(GalleryId::TrivialFlat, vec![Suite::ChenRicci]);
        cfg.params.m = 2;
        cfg.params.n = 2;
        cfg.params.kind = crate::gallery::FlatKind::Real;
        cfg.grid = 2;
        let rep = run(&cfg).unwrap();
        let s = &rep.suites[0];
        assert_eq!(s.summary.pass_count, 4 * 8);
        for r in &s.records {
            assert_eq!(r.slack, Some(0.0));
            assert!(r.flags.iter().all(|(_, v)| *v));
        }
    }

    #[test]
    fn quadratic_oracle_passes() {
        let mut cfg = RunConfig::new(GalleryId::TrivialFlat, vec![Suite::QuadraticOracle]);
        cfg.oracle_samples = 2000;
        let rep = run(&cfg).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.suites[0].records.len(), 13 * 7);
    }

    #[test]
    fn skipped_records_carry_reasons_and_summary_is_recomputable() {
        let mut cfg = RunConfig::new(GalleryId::CrCnR, vec![Suite::ChenRicci, Suite::Propositions]);
        cfg.grid = 3;
        cfg.directions = 2;
        let rep = run(&cfg).unwrap();
        for s in &rep.suites {
            assert!(s.records.iter().all(|r| (r.status == Status::Skipped) == r.reason.is_some()));
            assert_eq!(Summary::from_records(&s.records), s.summary);
            assert!(s.summary.skip_count > 0);
        }
    }

    #[test]
    fn render_is_deterministic_and_matches_the_schema_shape() {
        let mut cfg = RunConfig::new(GalleryId::LagrangianTorus, vec![Suite::Cr, Suite::ChenRicci]);
        cfg.grid = 3;
        let a = run(&cfg).unwrap().render();
        let b = run(&cfg).unwrap().render();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        let schema = report_schema();
        let required = |s: &Value| s["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect::<Vec<_>>();
        for k in required(&schema) {
            assert!(v.get(&k).is_some(), "{k}");
        }
        let suite_schema = &schema["properties"]["suites"]["items"];
        for s in v["suites"].as_array().unwrap() {
            for k in required(suite_schema) {
                assert!(s.get(&k).is_some(), "{k}");
            }
            for r in s["records"].as_array().unwrap() {
                for k in required(&suite_schema["properties"]["records"]["items"]) {
                    assert!(r.get(&k).is_some(), "{k}");
                }
            }
        }
    }

    #[test]
    fn setup_errors_map_to_config_exit_code() {
        let mut cfg = RunConfig::new(GalleryId::LagrangianTorus, vec![Suite::Cr]);
        cfg.params.r = Some(vec![1.0, 2.0]);
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn numeric_errors_name_the_point() {
        let e = RunError::at("structure", 4, &[0.5, 1.0], GeomError::DegeneratePlane);
        assert_eq!(e.exit_code(), EXIT_NUMERIC);
        assert!(e.to_string().contains("#4") && e.to_string().contains("0.5"));
    }
}
