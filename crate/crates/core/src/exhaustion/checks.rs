//! Sampled checks of the properties each construction promises, run on fresh
//! points (a stream of their own) rather than the points used for selection.

use super::psh::guarded;
use super::semi_anti::semi_anti_slices;
use super::state::{ConstructedField, Stage};
use crate::calculus::certify_semi_anti_psh;
use crate::domain::{sample_domain_lenient, Domain, Proposal};
use crate::error::Result;
use crate::report::{CertificationReport, Record, Worst};
use crate::space::{streams, CVec, GaussianSpec};

/// Budgets of [`construction_checks`].
#[derive(Clone, Debug)]
pub struct CheckPlan {
    /// Points per check.
    pub points: usize,
    /// Points per truncation in the dimension sweep.
    pub sweep_points: usize,
    /// Admitted relative spread of the semi-anti-psh constant across truncations.
    pub sweep_tol: f64,
    /// Relative slack of the regularization sandwich `ϱ ≤ ϱ_j ≤ ϱ + 1`.
    pub sandwich_tol: f64,
}

impl Default for CheckPlan {
    fn default() -> Self {
        Self {
            points: 1000,
            sweep_points: 100,
            sweep_tol: 0.2,
            sandwich_tol: 1e-6,
        }
    }
}

fn sample(
    v: &Domain<f64>,
    spec: &GaussianSpec<f64>,
    count: usize,
    stream: u64,
    accept: impl Fn(&CVec<f64>) -> bool,
) -> Vec<CVec<f64>> {
    let proposal = Proposal::default().on_stream(streams::sub(streams::CERTIFY, stream));
    sample_domain_lenient(v, count, spec, &proposal, accept).0
}

/// The stage-specific checks of a constructed field: sandwich bounds,
/// domination of the base exhaustion, exactness of the truncated series and,
/// for the semi-anti-psh stage, the dimension sweep of its Hessian bound.
pub fn construction_checks(
    cf: &ConstructedField,
    v: &Domain<f64>,
    spec: &GaussianSpec<f64>,
    plan: &CheckPlan,
) -> Result<CertificationReport> {
    match cf.stage() {
        Stage::LipschitzEta => Ok(CertificationReport::default()),
        _ if v.is_full_space() => Ok(CertificationReport::default()),
        Stage::SmoothPsi => Ok(smooth(cf, v, spec, plan)),
        Stage::SemiAntiPsi => semi_anti(cf, v, spec, plan),
        Stage::PshEta => psh(cf, v, spec, plan),
    }
}

/// `Ψ ≥ η` on `pts`.
fn dominates(cf: &ConstructedField, pts: &[CVec<f64>], anchor: &str) -> Record {
    let mut w = Worst::default();
    for z in pts {
        let e = cf.base.eval(z);
        w.observe((e - cf.field.eval(z)) / (1.0 + e.abs()), || z.to_pairs());
    }
    w.into_record(Record::new(anchor, cf.field.label(), 0).tolerance(1e-12))
}

/// On `{η < k}` the terms `j ≥ k + 3` vanish identically.
fn truncation(cf: &ConstructedField, pts: &[CVec<f64>]) -> Record {
    let k_terms = cf.terms.len();
    let mut w = Worst::default();
    for z in pts {
        let e = cf.base.eval(z);
        let k = e.floor() as usize + 1;
        let tail = cf.terms.iter().skip(k + 2).map(|t| t.eval(z).abs()).fold(0.0, f64::max);
        if k + 2 < k_terms {
            w.observe(tail, || z.to_pairs());
        }
    }
    w.into_record(Record::new("series-truncation", cf.field.label(), 0).tolerance(0.0))
        .stat("terms", k_terms as f64)
}

fn smooth(cf: &ConstructedField, v: &Domain<f64>, spec: &GaussianSpec<f64>, plan: &CheckPlan) -> CertificationReport {
    let s = &cf.state;
    let k = s.truncation_k;
    let eta = &cf.base;
    let pts = sample(v, spec, plan.points, 1, |z| eta.eval(z) < k as f64);

    // η ≤ η_j + C(j+½)ε_j ≤ η + 2C(j+½)ε_j on {η < j}.
    let mut w = Worst::default();
    for z in &pts {
        let e = eta.eval(z);
        for j in (e.floor() as usize + 1)..=k {
            let ce = s.lipschitz_table[j - 1].c * s.eps_seq[j - 1].eps;
            let shifted = cf.parts[j - 1].eval(z) + ce;
            w.observe((e - shifted).max(shifted - e - 2.0 * ce), || z.to_pairs());
        }
    }
    let mut report = CertificationReport::single(
        w.into_record(Record::new("smooth-sandwich", cf.field.label(), 0).tolerance(1e-9))
            .stat("points", pts.len() as f64),
    );

    let exact = k as f64 - 2.0;
    let inner: Vec<CVec<f64>> = pts.iter().filter(|z| eta.eval(z) < exact).cloned().collect();
    report.push(dominates(cf, &inner, "exhaustion-dominates-base"));
    report.push(truncation(cf, &pts));
    report
}

fn semi_anti(
    cf: &ConstructedField,
    v: &Domain<f64>,
    spec: &GaussianSpec<f64>,
    plan: &CheckPlan,
) -> Result<CertificationReport> {
    let k = cf.state.truncation_k;
    let eta = &cf.base;
    let exact = k as f64 - 2.0;
    let pts = sample(v, spec, plan.points, 2, |z| eta.eval(z) < k as f64);

    let mut w = Worst::default();
    for z in &pts {
        w.observe(-cf.field.eval(z), || z.to_pairs());
    }
    // Strict positivity: the violation −Ψ must stay below −MIN_POSITIVE.
    let mut report = CertificationReport::single(
        w.into_record(Record::new("exhaustion-positive", cf.field.label(), 0).tolerance(-f64::MIN_POSITIVE)),
    );

    // Annuli {j − 1 ≤ η < j} inside the exact region.
    let shells = (exact.floor() as usize).max(1);
    let mut annular = Vec::new();
    for j in 1..=shells {
        let lo = j as f64 - 1.0;
        annular.extend(sample(v, spec, plan.points / shells, 10 + j as u64, |z| {
            let e = eta.eval(z);
            e >= lo && e < j as f64
        }));
    }
    report.push(dominates(cf, &annular, "exhaustion-dominates-base").stat("annuli", shells as f64));
    report.push(truncation(cf, &pts));

    let h = cf.state.fd_step;
    let n = spec.truncation();
    let dims: Vec<usize> = (1..=n).collect();
    for level in 2..=(exact.floor() as usize).max(2) {
        let level = level as f64;
        let inside: Vec<CVec<f64>> = pts
            .iter()
            .filter(|z| eta.eval(z) < level)
            .take(plan.sweep_points)
            .cloned()
            .collect();
        let cert = certify_semi_anti_psh(&cf.field, v, &inside, 1e-3, &dims, h);
        for r in cert.report.records {
            report.push(r.stat("level", level));
        }

        // The dimension sweep runs on the whole exact region, where C is the
        // constant of the field. On smaller sublevels the sup is often taken
        // in a direction transverse to ℂ¹, which n' = 1 cannot see.
        if level < exact.floor().max(2.0) {
            continue;
        }
        let sweep = semi_anti_slices(&cf.field, v, spec, eta, level, plan.sweep_points, h)?;
        let cs: Vec<f64> = sweep.iter().map(|s| s.1).collect();
        let hi = cs.iter().copied().fold(0.0f64, f64::max);
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
        let finite = cs.iter().all(|c| c.is_finite());
        let mut rec = Record::new("semi-anti-dimension-sweep", cf.field.label(), sweep.iter().map(|s| s.2).sum())
            .tolerance(plan.sweep_tol)
            .violation(if finite { spread } else { f64::NAN })
            .stat("level", level);
        for (dim, c, count) in &sweep {
            rec = rec.stat(&format!("c_n{dim}"), *c).stat(&format!("points_n{dim}"), *count as f64);
        }
        report.push(rec);
    }
    Ok(report)
}

fn psh(cf: &ConstructedField, v: &Domain<f64>, spec: &GaussianSpec<f64>, plan: &CheckPlan) -> Result<CertificationReport> {
    let s = &cf.state;
    let g = guarded(v, spec, s)?;
    let rho = &cf.base;
    let mut report = CertificationReport::default();
    let per_term = (plan.points / cf.parts.len().max(1)).max(1);
    for (i, rj) in cf.parts.iter().enumerate() {
        let j = i + 1;
        let lam = s.lambda_table[i].lambda;
        // Ψ ≥ ϱ, so V_{Ψ,λ} ⊂ V_{ϱ,λ}; filter on the cheap field first.
        let pts = sample(v, spec, per_term, 20 + j as u64, |z| rho.eval(z) < lam && g.value(z) < lam);
        let mut w = Worst::default();
        for z in &pts {
            let r = rho.eval(z);
            let x = rj.eval(z);
            w.observe((r - x).max(x - r - 1.0) / (1.0 + r.abs()), || z.to_pairs());
        }
        report.push(
            w.into_record(Record::new("regularization-sandwich", rj.label(), 0).tolerance(plan.sandwich_tol))
                .stat("term", j as f64)
                .stat("lambda", lam),
        );
    }
    Ok(report)
}
