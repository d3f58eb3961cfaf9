//! Orchestration of one run: construct, certify, write the artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::calculus::{
    certify_exhaustion, certify_psh, certify_semi_anti_psh, sample_directions, ExhaustionPlan, PshPlan,
};
use crate::domain::{sample_domain_lenient, Domain, Proposal};
use crate::error::{Error, Result};
use crate::exhaustion::{
    construction_checks, lipschitz_stage, positivity_shift, psh_exhaustion, semi_anti_psh_exhaustion,
    smooth_exhaustion, CheckPlan, ConstructedField, PipelineState, Stage,
};
use crate::field::ScalarField;
use crate::regularize::CutoffKit;
use crate::report::{CertificationReport, Record};
use crate::space::{streams, CVec, GaussianSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;
pub const EXIT_CERTIFICATION: i32 = 4;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const STATE_FILE: &str = "state.json";

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub dim_sweep: Option<Vec<usize>>,
    pub tolerance_scale: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.gaussian.seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.display().to_string();
        }
        if let Some(d) = &self.dim_sweep {
            cfg.certify.dim_sweep = Some(d.clone());
        }
        if let Some(t) = self.tolerance_scale {
            cfg.certify.tolerance_scale = t;
        }
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub code: i32,
    /// One-line verdict; names the offending point on an abort.
    pub message: String,
    pub report: CertificationReport,
    pub state: Option<PipelineState>,
    pub out_dir: PathBuf,
}

/// Everything a run needs besides the certification plan.
pub struct Setup {
    pub domain: Domain<f64>,
    pub spec: GaussianSpec<f64>,
    pub kit: CutoffKit,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let spec = cfg.gaussian.build()?;
        Ok(Self {
            domain: cfg.domain.build()?,
            kit: CutoffKit::new(&spec, cfg.gaussian.kit_budget)?,
            spec,
        })
    }
}

/// Runs the configured construction.
pub fn construct(cfg: &RunConfig, setup: &Setup) -> Result<ConstructedField> {
    let (v, spec, kit) = (&setup.domain, &setup.spec, &setup.kit);
    let p = &cfg.pipeline;
    match p.stage {
        Stage::LipschitzEta => {
            let proposal = Proposal::default().on_stream(streams::PIPELINE);
            let c0 = positivity_shift(v, spec, &proposal);
            Ok(lipschitz_stage(v, kit, spec, c0))
        }
        Stage::SmoothPsi => smooth_exhaustion(v, kit, spec, &p.smooth_options()),
        Stage::SemiAntiPsi => semi_anti_psh_exhaustion(v, kit, spec, &p.semi_anti_options()),
        Stage::PshEta => psh_exhaustion(v, kit, spec, &p.psh_options()),
    }
}

/// Level of the base field below which the constructed field is certified:
/// where the truncated series is exact (the whole domain for the base field).
pub fn default_region_level(cf: &ConstructedField) -> Option<f64> {
    let k = cf.state.truncation_k as f64;
    match cf.stage() {
        Stage::LipschitzEta => None,
        Stage::SmoothPsi | Stage::SemiAntiPsi => Some(k - 2.0),
        Stage::PshEta => Some(k - 0.5),
    }
}

/// Points for the plurisubharmonicity and semi-anti-psh certificates.
pub fn certification_points(cfg: &RunConfig, setup: &Setup, cf: &ConstructedField) -> Vec<CVec<f64>> {
    let level = cfg.certify.region_level.or_else(|| default_region_level(cf));
    if cfg.certify.points == 0 {
        return Vec::new();
    }
    let base = cf.base.clone();
    let proposal = Proposal::default().on_stream(streams::sub(streams::CERTIFY, 100));
    sample_domain_lenient(&setup.domain, cfg.certify.points, &setup.spec, &proposal, |z| match level {
        Some(t) => base.eval(z) < t,
        None => true,
    })
    .0
}

fn dims(cfg: &RunConfig, n: usize) -> Vec<usize> {
    cfg.certify.dim_sweep.clone().unwrap_or_else(|| (1..=n).collect())
}

/// Field whose sublevel sets are certified: the base field for the
/// Lipschitz stage; otherwise the truncated series on the region
/// `{base < level}` where it is certified, and `+∞` outside it. The full
/// series agrees with the truncation there, and nothing is claimed beyond.
pub fn exhaustion_field(cf: &ConstructedField, region_level: Option<f64>) -> ScalarField<f64> {
    match (cf.stage(), region_level) {
        (Stage::LipschitzEta, _) | (_, None) => cf.field.clone(),
        (_, Some(t)) => {
            let (f, b) = (cf.field.clone(), cf.base.clone());
            ScalarField::new(format!("{} on base < {t}", cf.field.label()), move |z| {
                if b.eval(z) < t {
                    f.eval(z)
                } else {
                    f64::INFINITY
                }
            })
        }
    }
}

/// The `q`-quantiles of `f` over `pts` (nearest rank).
fn quantiles(f: &ScalarField<f64>, pts: &[CVec<f64>], qs: &[f64]) -> Vec<f64> {
    let mut vals: Vec<f64> = pts.iter().map(|z| f.eval(z)).filter(|x| x.is_finite()).collect();
    if vals.is_empty() {
        return Vec::new();
    }
    vals.sort_by(f64::total_cmp);
    qs.iter()
        .map(|q| vals[((q.clamp(0.0, 1.0) * (vals.len() - 1) as f64).round()) as usize])
        .collect()
}

/// Runs the configured certification plan.
pub fn certify(cfg: &RunConfig, setup: &Setup, cf: &ConstructedField) -> Result<CertificationReport> {
    let c = &cfg.certify;
    let (v, spec) = (&setup.domain, &setup.spec);
    let n = spec.truncation();
    let scale = c.tolerance_scale;
    let mut report = CertificationReport::default();
    if c.construction {
        let plan = CheckPlan {
            points: c.construction_points,
            sweep_points: (c.construction_points / 10).max(10),
            sweep_tol: 0.2 * scale,
            sandwich_tol: 1e-6 * scale,
        };
        report.extend(construction_checks(cf, v, spec, &plan)?);
    }
    let region = c.region_level.or_else(|| default_region_level(cf));
    let needs_points = c.psh || c.semi_anti || (c.exhaustion && !c.level_quantiles.is_empty());
    let pts = if needs_points { certification_points(cfg, setup, cf) } else { Vec::new() };
    if c.psh || c.semi_anti {
        let dims = dims(cfg, n);
        if c.psh {
            let mut plan = PshPlan::new(c.circle_tol * scale, n);
            plan.hessian_tol = c.hessian_tol * scale;
            plan.nodes = c.nodes;
            plan.h = cf.state.fd_step;
            plan.dims = dims.clone();
            plan.mode = c.tolerance_mode;
            let dirs = sample_directions(spec, c.directions);
            let mut r = certify_psh(&cf.field, v, &pts, &dirs, &c.radii, &plan);
            for rec in &mut r.records {
                rec.stats.insert("points".into(), pts.len() as f64);
            }
            report.extend(r);
        }
        if c.semi_anti {
            let cert = certify_semi_anti_psh(&cf.field, v, &pts, 1e-3 * scale, &dims, cf.state.fd_step);
            report.extend(cert.report);
        }
    }
    let field = exhaustion_field(cf, region);
    let mut levels = c.levels.clone();
    levels.extend(quantiles(&field, &pts, &c.level_quantiles));
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if c.exhaustion && !levels.is_empty() {
        let plan = ExhaustionPlan {
            samples_per_level: c.exhaustion_samples,
            boundary_resolution: c.boundary_resolution,
            probes: c.boundary_probes,
            rays: c.nested_rays,
            nested_points: c.nested_points,
            proposal: Proposal::default().on_stream(streams::sub(streams::CERTIFY, 200)),
        };
        report.extend(certify_exhaustion(&field, v, &levels, spec, &plan)?);
    }
    Ok(report)
}

#[derive(Serialize)]
struct Header<'a> {
    kind: &'static str,
    timestamp: String,
    schema_version: u32,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a PipelineState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abort: Option<String>,
}

#[derive(Serialize)]
struct Line<'a> {
    kind: &'static str,
    #[serde(flatten)]
    record: &'a Record,
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}

/// Loads, runs and reports. Never panics on bad input: every failure maps to
/// an exit code.
pub fn run_path(path: &Path, overrides: &Overrides) -> RunOutcome {
    match RunConfig::load(path) {
        Ok(mut cfg) => {
            overrides.apply(&mut cfg);
            run(&cfg)
        }
        Err(e) => config_error(e, overrides.out_dir.clone().unwrap_or_default()),
    }
}

fn config_error(e: Error, out_dir: PathBuf) -> RunOutcome {
    RunOutcome {
        code: EXIT_CONFIG,
        message: e.to_string(),
        report: CertificationReport::default(),
        state: None,
        out_dir,
    }
}

/// Runs a parsed config and writes its artifacts to `cfg.output.dir`.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let out_dir = PathBuf::from(&cfg.output.dir);
    if let Err(e) = cfg.validate() {
        return config_error(e, out_dir);
    }
    let setup = match Setup::new(cfg) {
        Ok(s) => s,
        Err(e) => return config_error(e, out_dir),
    };
    let cf = match construct(cfg, &setup) {
        Ok(cf) => cf,
        Err(e) => return abort(cfg, None, e, out_dir),
    };
    let report = match certify(cfg, &setup, &cf) {
        Ok(r) => r,
        Err(e) => return abort(cfg, Some(&cf.state), e, out_dir),
    };
    let passed = report.passed();
    let (code, message) = if passed {
        (EXIT_PASS, format!("all {} records passed", report.records.len()))
    } else {
        let worst = report.failures().next().expect("a failure");
        (
            EXIT_CERTIFICATION,
            format!(
                "{} of {} records failed; first: {} ({}) at {:?}",
                report.failures().count(),
                report.records.len(),
                worst.anchor,
                worst.subject,
                worst.location
            ),
        )
    };
    let mut out = RunOutcome {
        code,
        message,
        report,
        state: Some(cf.state.clone()),
        out_dir,
    };
    if let Err(e) = write_artifacts(cfg, &cf, &setup, &out) {
        out.code = EXIT_ABORT;
        out.message = format!("could not write artifacts: {e}");
    }
    out
}

fn abort(cfg: &RunConfig, state: Option<&PipelineState>, e: Error, out_dir: PathBuf) -> RunOutcome {
    let message = format!("pipeline aborted: {e}");
    let header = Header {
        kind: "header",
        timestamp: timestamp(),
        schema_version: super::config::SCHEMA_VERSION,
        config: cfg,
        state,
        abort: Some(e.to_string()),
    };
    let written = fs::create_dir_all(&out_dir).and_then(|_| {
        fs::write(
            out_dir.join(RECORDS_FILE),
            serde_json::to_string(&header).expect("header serializes") + "\n",
        )?;
        fs::write(out_dir.join(SUMMARY_FILE), format!("{message}\n"))
    });
    RunOutcome {
        code: EXIT_ABORT,
        message: match written {
            Ok(()) => message,
            Err(w) => format!("{message} (and could not write artifacts: {w})"),
        },
        report: CertificationReport::default(),
        state: state.cloned(),
        out_dir,
    }
}

/// The records file: a header line, then one line per record.
pub fn records_jsonl(cfg: &RunConfig, state: &PipelineState, report: &CertificationReport) -> String {
    let header = Header {
        kind: "header",
        timestamp: timestamp(),
        schema_version: super::config::SCHEMA_VERSION,
        config: cfg,
        state: Some(state),
        abort: None,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for r in &report.records {
        out.push_str(&serde_json::to_string(&Line { kind: "record", record: r }).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn write_artifacts(cfg: &RunConfig, cf: &ConstructedField, setup: &Setup, out: &RunOutcome) -> Result<()> {
    let dir = &out.out_dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(RECORDS_FILE), records_jsonl(cfg, &cf.state, &out.report))?;
    fs::write(dir.join(STATE_FILE), cf.state.to_json())?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let mut summary = super::describe_records(&out.report.records, Some(&cf.state));
    writeln!(summary, "verdict: {}", out.message).ok();
    fs::write(dir.join(SUMMARY_FILE), summary)?;
    if cfg.output.tables {
        let t = dir.join("tables");
        fs::create_dir_all(&t)?;
        for (name, body) in tables(cf, setup, cfg.certify.ray_points) {
            fs::write(t.join(name), body)?;
        }
    }
    Ok(())
}

/// Plot-ready CSV tables of the selected constants and of the field along rays.
pub fn tables(cf: &ConstructedField, setup: &Setup, ray_points: usize) -> Vec<(&'static str, String)> {
    let s = &cf.state;
    let mut out = Vec::new();
    let mut t = String::from("t,c,lipschitz,sup,samples\n");
    for e in &s.lipschitz_table {
        writeln!(t, "{},{},{},{},{}", e.t, e.c, e.lipschitz, e.sup, e.samples).ok();
    }
    out.push(("lipschitz.csv", t));
    let mut t = String::from("level,eps,upper_bound,halvings\n");
    for e in &s.eps_seq {
        writeln!(t, "{},{},{},{}", e.level, e.eps, e.upper_bound, e.halvings).ok();
    }
    out.push(("eps.csv", t));
    let mut t = String::from("t,lambda,samples\n");
    for e in &s.lambda_table {
        writeln!(t, "{},{},{}", e.t, e.lambda, e.samples).ok();
    }
    out.push(("lambda.csv", t));
    let mut t = String::from("level,t,modulus_gap,halvings,sandwich_margin\n");
    let t_seq = s.semi_anti.as_deref().map(|sa| &sa.t_seq).unwrap_or(&s.t_seq);
    for e in t_seq {
        writeln!(t, "{},{},{},{},{}", e.level, e.envelope.t, e.modulus_gap, e.halvings, e.sandwich_margin).ok();
    }
    out.push(("t_seq.csv", t));
    let mut t = String::from("k,alpha\n");
    for (k, a) in s.alpha_seq.iter().enumerate() {
        writeln!(t, "{},{}", k + 1, a).ok();
    }
    out.push(("alpha.csv", t));
    let mut t = String::from("k,truncation,s\n");
    for e in &s.s_seq {
        for (dim, v) in &e.per_dim {
            writeln!(t, "{},{},{}", e.k, dim, v).ok();
        }
    }
    out.push(("s_k.csv", t));
    out.push(("rays.csv", rays(cf, &setup.domain, &setup.spec, ray_points)));
    out
}

/// The field and its base along the coordinate rays from the domain center,
/// up to the boundary (or radius 4 on the whole space).
fn rays(cf: &ConstructedField, v: &Domain<f64>, spec: &GaussianSpec<f64>, points: usize) -> String {
    let n = spec.truncation();
    let center = v.center(n).with_ambient_dim(n);
    let mut t = String::from("ray,r,field,base\n");
    for i in 0..n {
        let u = CVec::basis(i, n);
        let reach = if v.is_full_space() {
            4.0
        } else {
            // Bisect for the exit radius along u.
            let (mut lo, mut hi) = (0.0, 4.0 * v.scale());
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if v.contains(&center.axpy(num_complex::Complex::new(mid, 0.0), &u)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        for k in 0..points {
            let r = reach * k as f64 / points.max(1) as f64;
            let z = center.axpy(num_complex::Complex::new(r, 0.0), &u);
            writeln!(t, "{},{},{},{}", i + 1, r, cf.field.eval(&z), cf.base.eval(&z)).ok();
        }
    }
    t
}
