//! Wirtinger calculus by finite differences, complex Hessians, circle means,
//! and the sampled certifiers built on them.
//!
//! Conventions: `∂_j = ½(∂/∂x_j − i ∂/∂y_j)`, `∂̄_j = ½(∂/∂x_j + i ∂/∂y_j)`, and the
//! mixed Hessian is `H_{ij} = ∂_i ∂̄_j f`, so that the Levi form is
//! `Σ H_{ij} w_i w̄_j`. Real partials use central differences with one
//! Richardson level, `(4 D(h/2) − D(h)) / 3`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::domain::{sample_domain_where, sample_sublevel, sublevel, uniform_inclusion_margin, Domain, Proposal};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::report::{CertificationReport, Record, Worst};
use crate::scalar::Real;
use crate::space::{streams, CVec, GaussianSpec};

/// Finite-difference step appropriate for the scalar type: `1e-4` in double
/// precision, scaled by the fourth root of the machine-epsilon ratio otherwise.
pub fn default_step<T: Real>() -> T {
    let ratio = T::epsilon().f64() / f64::EPSILON;
    T::c(1e-4 * ratio.powf(0.25))
}

/// Shrinks `h` so that the stencil stays well inside `V`.
pub fn stencil_step<T: Real>(v: &Domain<T>, z: &CVec<T>, h: T) -> T {
    let d = v.signed_distance(z);
    if d.is_finite() {
        h.min(d / T::c(8.0))
    } else {
        h
    }
}

fn eval_checked<T: Real>(f: &ScalarField<T>, z: &CVec<T>) -> Result<T> {
    let v = f.eval(z);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            what: format!("{} at a stencil point", f.label()),
            value: v.f64(),
            point: z.to_pairs(),
        })
    }
}

fn shifted<T: Real>(x: &[T], moves: &[(usize, T)]) -> CVec<T> {
    let mut y = x.to_vec();
    for &(k, s) in moves {
        y[k] = y[k] + s;
    }
    CVec::from_real(&y)
}

/// Real gradient `∂f/∂x_k` over the `2n` real coordinates at step `h`.
fn real_gradient<T: Real>(f: &ScalarField<T>, x: &[T], h: T) -> Result<Vec<T>> {
    (0..x.len())
        .map(|k| {
            let p = eval_checked(f, &shifted(x, &[(k, h)]))?;
            let m = eval_checked(f, &shifted(x, &[(k, -h)]))?;
            Ok((p - m) / (T::c(2.0) * h))
        })
        .collect()
}

/// Wirtinger gradient pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WirtingerGrad<T> {
    /// `∂_j f`.
    pub d: Vec<Complex<T>>,
    /// `∂̄_j f`.
    pub dbar: Vec<Complex<T>>,
}

/// Central-difference `∂_j f`, `∂̄_j f` at `z` for `j < n`.
pub fn wirtinger_grad<T: Real>(f: &ScalarField<T>, z: &CVec<T>, h: T) -> Result<WirtingerGrad<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let x = z.to_real();
    let g1 = real_gradient(f, &x, h)?;
    let g2 = real_gradient(f, &x, h * T::c(0.5))?;
    let g: Vec<T> = g1
        .iter()
        .zip(&g2)
        .map(|(&a, &b)| (T::c(4.0) * b - a) / T::c(3.0))
        .collect();
    let half = T::c(0.5);
    let d = g.chunks(2).map(|c| Complex::new(c[0] * half, -c[1] * half)).collect();
    let dbar = g.chunks(2).map(|c| Complex::new(c[0] * half, c[1] * half)).collect();
    Ok(WirtingerGrad { d, dbar })
}

/// Real `2n × 2n` Hessian at step `h`, row-major.
fn real_hessian<T: Real>(f: &ScalarField<T>, x: &[T], f0: T, h: T) -> Result<Vec<T>> {
    let m = x.len();
    let mut out = vec![T::zero(); m * m];
    let h2 = h * h;
    for a in 0..m {
        let p = eval_checked(f, &shifted(x, &[(a, h)]))?;
        let q = eval_checked(f, &shifted(x, &[(a, -h)]))?;
        out[a * m + a] = (p - T::c(2.0) * f0 + q) / h2;
        for b in (a + 1)..m {
            let pp = eval_checked(f, &shifted(x, &[(a, h), (b, h)]))?;
            let pm = eval_checked(f, &shifted(x, &[(a, h), (b, -h)]))?;
            let mp = eval_checked(f, &shifted(x, &[(a, -h), (b, h)]))?;
            let mm = eval_checked(f, &shifted(x, &[(a, -h), (b, -h)]))?;
            let v = (pp - pm - mp + mm) / (T::c(4.0) * h2);
            out[a * m + b] = v;
            out[b * m + a] = v;
        }
    }
    Ok(out)
}

/// Complex form `H_{ij} = ¼[(R_{x_i x_j} + R_{y_i y_j}) + i(R_{x_i y_j} − R_{y_i x_j})]`.
fn complexify<T: Real>(r: &[T], n: usize) -> Vec<Complex<T>> {
    let m = 2 * n;
    let q = T::c(0.25);
    let mut h = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            let re = r[xi * m + xj] + r[yi * m + yj];
            let im = r[xi * m + yj] - r[yi * m + xj];
            h.push(Complex::new(re * q, im * q));
        }
    }
    h
}

/// The mixed Hessian at a point together with its error indicators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HessianForm<T> {
    pub base: CVec<T>,
    pub dim: usize,
    /// Row-major `H_{ij} = ∂_i ∂̄_j f`.
    pub matrix: Vec<Complex<T>>,
    /// `‖H − H*‖_max` before symmetrization.
    pub hermitian_defect: T,
    /// `‖H(h) − H(h/2)‖_max`, a proxy for the discretization error.
    pub fd_error: T,
}

impl<T: Real> HessianForm<T> {
    pub fn from_matrix(base: CVec<T>, matrix: Vec<Complex<T>>) -> Self {
        let dim = (matrix.len() as f64).sqrt().round() as usize;
        Self {
            base,
            dim,
            matrix,
            hermitian_defect: T::zero(),
            fd_error: T::zero(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[i * self.dim + j]
    }

    /// `Σ H_{ij} w_i w̄_j` (real for Hermitian `H`).
    pub fn quadratic_form(&self, w: &CVec<T>) -> T {
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc = acc + self.entry(i, j) * w.get(i) * w.get(j).conj();
            }
        }
        acc.re
    }

    /// Eigenvalues (ascending) of the leading `k × k` block, via the real
    /// symmetric embedding `[[A, −B], [B, A]]` whose spectrum doubles it.
    pub fn eigenvalues(&self, k: usize) -> Vec<f64> {
        let k = k.clamp(1, self.dim);
        let mut m = DMatrix::<f64>::zeros(2 * k, 2 * k);
        // The form Σ H_ij w_i w̄_j corresponds to the Hermitian matrix Hᵀ; its
        // spectrum equals that of H.
        for i in 0..k {
            for j in 0..k {
                let c = self.entry(i, j);
                let (a, b) = (c.re.f64(), c.im.f64());
                m[(i, j)] = a;
                m[(i + k, j + k)] = a;
                m[(i, j + k)] = -b;
                m[(i + k, j)] = b;
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev.into_iter().step_by(2).collect()
    }

    pub fn min_eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues(k).first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues(k).last().copied().unwrap_or(f64::NAN)
    }
}

/// Nested central-difference mixed Hessian, Richardson-extrapolated and
/// symmetrized to be Hermitian.
pub fn mixed_hessian<T: Real>(f: &ScalarField<T>, z: &CVec<T>, h: T) -> Result<HessianForm<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let n = z.ambient_dim();
    let x = z.to_real();
    let f0 = eval_checked(f, z)?;
    let r1 = complexify(&real_hessian(f, &x, f0, h)?, n);
    let r2 = complexify(&real_hessian(f, &x, f0, h * T::c(0.5))?, n);
    let mut fd_error = T::zero();
    let raw: Vec<Complex<T>> = r1
        .iter()
        .zip(&r2)
        .map(|(&a, &b)| {
            fd_error = fd_error.max((a - b).norm());
            (b * T::c(4.0) - a) / T::c(3.0)
        })
        .collect();
    let mut defect = T::zero();
    let mut matrix = raw.clone();
    for i in 0..n {
        for j in 0..n {
            let a = raw[i * n + j];
            let b = raw[j * n + i].conj();
            defect = defect.max((a - b).norm());
            matrix[i * n + j] = (a + b) * T::c(0.5);
        }
    }
    Ok(HessianForm {
        base: z.clone(),
        dim: n,
        matrix,
        hermitian_defect: defect,
        fd_error,
    })
}

/// Trapezoidal mean of `f(a + r e^{iθ} b)` over `m` equispaced angles.
///
/// With a domain given, every node must lie in it.
pub fn circle_mean<T: Real>(
    f: &ScalarField<T>,
    a: &CVec<T>,
    b: &CVec<T>,
    r: T,
    m: usize,
    domain: Option<&Domain<T>>,
) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidParameter("circle needs at least one node".into()));
    }
    let mut sum = T::zero();
    for k in 0..m {
        let th = T::TAU() * T::from_count(k) / T::from_count(m);
        let p = a.axpy(Complex::new(r * th.cos(), r * th.sin()), b);
        if let Some(v) = domain {
            if !v.contains(&p) {
                return Err(Error::OutsideDomain {
                    what: "circle node".into(),
                    point: p.to_pairs(),
                });
            }
        }
        sum = sum + eval_checked(f, &p)?;
    }
    Ok(sum / T::from_count(m))
}

/// Unit directions: all complex coordinate axes, then normalized samples of
/// `P` until `count` are produced.
pub fn sample_directions<T: Real>(spec: &GaussianSpec<T>, count: usize) -> Vec<CVec<T>> {
    let n = spec.truncation();
    let mut out: Vec<CVec<T>> = (0..n).map(|i| CVec::basis(i, n)).collect();
    out.truncate(count);
    let mut it = spec.sampler(streams::DIRECTIONS, 0);
    while out.len() < count {
        out.push(it.next_sample().normalized());
    }
    out
}

/// How tolerances are scaled before comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    /// Compare raw violations against the tolerance.
    #[default]
    Absolute,
    /// Divide violations by `max(1, local magnitude)` first: by `|f(a)|` for
    /// circle means and by the largest absolute eigenvalue for Hessians.
    Relative,
}

/// Parameters of [`certify_psh`].
#[derive(Clone, Debug)]
pub struct PshPlan<T> {
    pub circle_tol: T,
    pub hessian_tol: T,
    pub nodes: usize,
    pub h: T,
    /// Truncations `n'` of the dimension sweep.
    pub dims: Vec<usize>,
    pub mode: ToleranceMode,
}

impl<T: Real> PshPlan<T> {
    pub fn new(tol: T, n: usize) -> Self {
        Self {
            circle_tol: tol,
            hessian_tol: tol,
            nodes: 64,
            h: default_step(),
            dims: (1..=n).collect(),
            mode: ToleranceMode::Absolute,
        }
    }
}

/// Sampled plurisubharmonicity certificate: a circle-mean test and a Hessian
/// eigenvalue test across the dimension sweep.
///
/// Circles that would leave `V` are skipped (and counted). The Hessian test
/// admits the finite-difference error estimate on top of the tolerance.
pub fn certify_psh<T: Real>(
    f: &ScalarField<T>,
    v: &Domain<T>,
    points: &[CVec<T>],
    directions: &[CVec<T>],
    radii: &[T],
    plan: &PshPlan<T>,
) -> CertificationReport {
    let mut circle = Worst::default();
    let mut skipped = 0usize;
    let mut failures = 0usize;
    let mut max_defect = f64::NEG_INFINITY;
    for a in points {
        let Ok(fa) = f.try_eval(a) else {
            failures += 1;
            continue;
        };
        let scale = match plan.mode {
            ToleranceMode::Absolute => 1.0,
            ToleranceMode::Relative => fa.abs().f64().max(1.0),
        };
        let d = v.signed_distance(a);
        for b in directions {
            let b = b.normalized();
            for &r in radii {
                if d.is_finite() && r >= d {
                    skipped += 1;
                    continue;
                }
                match circle_mean(f, a, &b, r, plan.nodes, Some(v)) {
                    Ok(mean) => {
                        let defect = (fa - mean).f64();
                        max_defect = max_defect.max(defect);
                        circle.observe(defect / scale, || a.to_pairs());
                    }
                    Err(_) => failures += 1,
                }
            }
        }
    }
    let mut c_rec = circle
        .into_record(Record::new("psh-circle-mean", f.label(), 0).tolerance(plan.circle_tol.f64()))
        .stat("skipped_circles", skipped as f64)
        .stat("max_raw_defect", max_defect);
    if failures > 0 {
        c_rec = c_rec.stat("evaluation_failures", failures as f64).fail();
    }

    let mut report = CertificationReport::single(c_rec);
    report.push(hessian_record(f, v, points, plan));
    report
}

fn hessian_record<T: Real>(
    f: &ScalarField<T>,
    v: &Domain<T>,
    points: &[CVec<T>],
    plan: &PshPlan<T>,
) -> Record {
    let mut worst = Worst::default();
    let mut per_dim = vec![f64::INFINITY; plan.dims.len()];
    let mut max_fd = 0.0f64;
    let mut failures = 0usize;
    for a in points {
        let h = stencil_step(v, a, plan.h);
        let Ok(hf) = mixed_hessian(f, a, h) else {
            failures += 1;
            continue;
        };
        let fd = hf.fd_error.f64() + hf.hermitian_defect.f64();
        max_fd = max_fd.max(fd);
        let full = hf.eigenvalues(hf.dim);
        let scale = match plan.mode {
            ToleranceMode::Absolute => 1.0,
            ToleranceMode::Relative => full.iter().fold(1.0f64, |m, e| m.max(e.abs())),
        };
        for (slot, &k) in per_dim.iter_mut().zip(&plan.dims) {
            let lam = hf.min_eigenvalue(k);
            *slot = slot.min(lam);
            worst.observe((-lam - fd) / scale, || a.to_pairs());
        }
    }
    let mut rec = worst
        .into_record(Record::new("psh-hessian", f.label(), 0).tolerance(plan.hessian_tol.f64()))
        .stat("max_fd_error", max_fd);
    for (lam, k) in per_dim.iter().zip(&plan.dims) {
        rec = rec.stat(&format!("lambda_min_n{k}"), *lam);
    }
    if failures > 0 {
        rec = rec.stat("evaluation_failures", failures as f64).fail();
    }
    rec
}

/// Outcome of [`certify_semi_anti_psh`].
#[derive(Clone, Debug)]
pub struct SemiAntiPshCertificate {
    pub passes: bool,
    /// `max(0, sup λ_max(H))` over points and truncations.
    pub c_estimate: f64,
    /// `(n', C(n'))` along the dimension sweep.
    pub per_dim: Vec<(usize, f64)>,
    pub report: CertificationReport,
}

/// Estimates the semi-anti-psh parameter `C` (Hessian `≤ C·I`) at each
/// truncation and checks it is finite and non-decreasing along the sweep.
pub fn certify_semi_anti_psh<T: Real>(
    f: &ScalarField<T>,
    v: &Domain<T>,
    points: &[CVec<T>],
    tol: T,
    dims: &[usize],
    h: T,
) -> SemiAntiPshCertificate {
    let mut per_dim: Vec<(usize, f64)> = dims.iter().map(|&k| (k, 0.0)).collect();
    let mut worst_at: Option<Vec<[f64; 2]>> = None;
    let mut best = f64::NEG_INFINITY;
    let mut failures = 0usize;
    for a in points {
        let Ok(hf) = mixed_hessian(f, a, stencil_step(v, a, h)) else {
            failures += 1;
            continue;
        };
        for slot in per_dim.iter_mut() {
            let lam = hf.max_eigenvalue(slot.0);
            if !lam.is_finite() {
                failures += 1;
            }
            if lam > slot.1 {
                slot.1 = lam;
            }
            if lam > best {
                best = lam;
                worst_at = Some(a.to_pairs());
            }
        }
    }
    let c_estimate = per_dim.iter().fold(0.0f64, |m, &(_, c)| m.max(c));
    let tol = tol.f64();
    let monotone_gap = per_dim
        .windows(2)
        .map(|w| w[0].1 - w[1].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let finite = failures == 0 && c_estimate.is_finite();
    let passes = finite && (per_dim.len() < 2 || monotone_gap <= tol * c_estimate.max(1.0));
    let mut rec = Record::new("semi-anti-psh-bound", f.label(), points.len())
        .tolerance(tol * c_estimate.max(1.0))
        .violation(if per_dim.len() < 2 { 0.0 } else { monotone_gap })
        .stat("c_estimate", c_estimate);
    for (k, c) in &per_dim {
        rec = rec.stat(&format!("c_n{k}"), *c);
    }
    if let Some(l) = worst_at {
        rec = rec.at(l);
    }
    if !finite {
        rec = rec.stat("evaluation_failures", failures as f64).fail();
    }
    SemiAntiPshCertificate {
        passes,
        c_estimate,
        per_dim,
        report: CertificationReport::single(rec),
    }
}

/// Largest difference quotient `|f(z) − f(w)| / ‖z − w‖` over pairs of `S`.
pub fn estimate_lipschitz<T: Real>(f: &ScalarField<T>, s: &[CVec<T>]) -> Result<T> {
    if s.len() < 2 {
        return Err(Error::InvalidParameter("Lipschitz estimate needs at least two points".into()));
    }
    let vals: Vec<T> = s.iter().map(|z| f.try_eval(z)).collect::<Result<_>>()?;
    let mut best = T::zero();
    let mut distinct = false;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let d = s[i].distance(&s[j]);
            if d > T::zero() {
                distinct = true;
                best = best.max((vals[i] - vals[j]).abs() / d);
            }
        }
    }
    if !distinct {
        return Err(Error::InvalidParameter("all points coincide".into()));
    }
    Ok(best)
}

/// Parameters of [`certify_exhaustion`].
#[derive(Clone, Debug)]
pub struct ExhaustionPlan<T> {
    pub samples_per_level: usize,
    /// Sublevel sets must keep at least this distance from `∂V`.
    pub boundary_resolution: T,
    /// Number of boundary-layer probe points.
    pub probes: usize,
    /// Rays per point in the nested-inclusion check.
    pub rays: usize,
    /// Points of each inner set probed by the nested-inclusion check.
    pub nested_points: usize,
    pub proposal: Proposal<T>,
}

impl<T: Real> Default for ExhaustionPlan<T> {
    fn default() -> Self {
        Self {
            samples_per_level: 1000,
            boundary_resolution: T::c(1e-4),
            probes: 2000,
            rays: 4,
            nested_points: 200,
            proposal: Proposal::default(),
        }
    }
}

/// Sampled exhaustion certificate.
///
/// For each level `t`: sampled `V_t` keeps distance `≥ δ` from `∂V`
/// (`exhaustion-inclusion`); points at distance `δ` from `∂V` have `f > t`
/// (`exhaustion-boundary-layer`, which catches sublevels that reach the
/// boundary between samples); and `V_s` sits strictly inside `{f < t}` for
/// consecutive levels `s < t` (`exhaustion-nested`).
pub fn certify_exhaustion<T: Real>(
    f: &ScalarField<T>,
    v: &Domain<T>,
    levels: &[T],
    spec: &GaussianSpec<T>,
    plan: &ExhaustionPlan<T>,
) -> Result<CertificationReport> {
    let mut report = CertificationReport::default();
    let delta = plan.boundary_resolution;
    let probes = if v.is_full_space() {
        Vec::new()
    } else {
        boundary_layer_points(v, spec, plan)?
    };
    let mut previous: Option<(T, Vec<CVec<T>>)> = None;
    for (li, &t) in levels.iter().enumerate() {
        let proposal = plan.proposal.clone().on_stream(plan.proposal.stream + 1000 + li as u64);
        let set = sublevel(f, t, v);
        let pts = match sample_sublevel(&set, plan.samples_per_level, spec, &proposal) {
            Ok(p) => p,
            Err(Error::ThinSublevel { .. }) => Vec::new(),
            Err(e) => return Err(e),
        };
        let label = format!("{} at t={t}", f.label());
        if pts.is_empty() {
            report.push(
                Record::new("exhaustion-inclusion", label.clone(), 0)
                    .violation(f64::NEG_INFINITY)
                    .stat("level", t.f64())
                    .stat("empty", 1.0),
            );
        } else {
            let margin = uniform_inclusion_margin(&pts, v)?;
            let radius = pts.iter().fold(T::zero(), |m, z| m.max(z.norm()));
            let mut rec = Record::new("exhaustion-inclusion", label.clone(), pts.len())
                .tolerance(0.0)
                .violation((delta - margin).f64())
                .stat("level", t.f64())
                .stat("margin", margin.f64())
                .stat("max_norm", radius.f64());
            if let Some(z) = pts.iter().min_by(|a, b| {
                v.signed_distance(a)
                    .partial_cmp(&v.signed_distance(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            }) {
                rec = rec.at(z.to_pairs());
            }
            report.push(rec);
        }

        if !v.is_full_space() {
            let mut w = Worst::default();
            for q in &probes {
                let fq = f.eval(q);
                w.observe((t - fq).f64(), || q.to_pairs());
            }
            report.push(
                w.into_record(Record::new("exhaustion-boundary-layer", label.clone(), 0).tolerance(0.0))
                    .stat("level", t.f64())
                    .stat("resolution", delta.f64()),
            );
        }

        if let Some((s, prev)) = &previous {
            let gap = nested_gap(f, v, &prev[..prev.len().min(plan.nested_points)], t, plan.rays, spec);
            let rec = Record::new("exhaustion-nested", format!("{} at s={s} < t={t}", f.label()), prev.len())
                .tolerance(0.0)
                .violation(if gap > T::zero() { -gap.f64() } else { 1.0 })
                .stat("gap", gap.f64());
            report.push(rec);
        }
        previous = Some((t, pts));
    }
    Ok(report)
}

/// Points of `V` at distance `δ` from `∂V`: sampled interior points pushed
/// along `−∇d` to the boundary and then `δ` back inside.
fn boundary_layer_points<T: Real>(
    v: &Domain<T>,
    spec: &GaussianSpec<T>,
    plan: &ExhaustionPlan<T>,
) -> Result<Vec<CVec<T>>> {
    let proposal = plan.proposal.clone().on_stream(plan.proposal.stream + 999);
    let base = sample_domain_where(v, plan.probes.max(1), spec, &proposal, f64::NAN, |_| true)?;
    let delta = plan.boundary_resolution;
    let step = T::c(1e-7) * v.scale();
    let mut out = Vec::with_capacity(base.len());
    for z in base {
        let d = v.signed_distance(&z);
        let x = z.to_real();
        let grad: Vec<T> = (0..x.len())
            .map(|k| {
                let p = v.signed_distance(&shifted(&x, &[(k, step)]));
                let m = v.signed_distance(&shifted(&x, &[(k, -step)]));
                (p - m) / (T::c(2.0) * step)
            })
            .collect();
        let g = CVec::from_real(&grad).normalized();
        let q = z.axpy(Complex::new(delta - d, T::zero()), &g);
        if v.contains(&q) {
            out.push(q);
        }
    }
    Ok(out)
}

/// Smallest distance, along sampled rays, from points of `V_s` to the set
/// `{f ≥ t} ∪ ∂V`.
fn nested_gap<T: Real>(
    f: &ScalarField<T>,
    v: &Domain<T>,
    inner: &[CVec<T>],
    t: T,
    rays: usize,
    spec: &GaussianSpec<T>,
) -> T {
    if inner.is_empty() {
        return T::infinity();
    }
    let dirs = sample_directions(spec, rays.max(1) + spec.truncation());
    let reach = T::c(4.0) * v.scale();
    let mut best = T::infinity();
    let outside = |p: &CVec<T>| !v.contains(p) || !(f.eval(p) < t);
    for z in inner {
        for u in dirs.iter().skip(spec.truncation()).take(rays.max(1)) {
            for sign in [T::one(), -T::one()] {
                let u = u.scale(sign);
                let steps = 64;
                let ds = reach / T::from_count(steps);
                let mut lo = T::zero();
                let mut hi = None;
                for k in 1..=steps {
                    let s = ds * T::from_count(k);
                    if outside(&z.axpy(Complex::new(s, T::zero()), &u)) {
                        hi = Some(s);
                        break;
                    }
                    lo = s;
                }
                if let Some(mut hi) = hi {
                    for _ in 0..50 {
                        let mid = (lo + hi) * T::c(0.5);
                        if outside(&z.axpy(Complex::new(mid, T::zero()), &u)) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    best = best.min(lo);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn gradients() {
        let z = CVec::from_re(&[1.0, 0.0]);
        let g = wirtinger_grad(&ScalarField::norm_sqr(), &z, 1e-4).unwrap();
        assert!((g.d[0] - c(1.0, 0.0)).norm() < 1e-9);
        let g = wirtinger_grad(&ScalarField::re_coord(0), &CVec::from_pairs(&[(0.3, 2.0)]), 1e-4).unwrap();
        assert!((g.d[0] - c(0.5, 0.0)).norm() < 1e-10);
        let g = wirtinger_grad(&ScalarField::constant(3.0), &z, 1e-4).unwrap();
        assert!(g.d.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn hessians() {
        let z = CVec::from_pairs(&[(0.1, 0.2), (0.3, -0.1), (0.0, 0.5)]);
        let h = mixed_hessian(&ScalarField::norm_sqr(), &z, 1e-4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((h.entry(i, j) - c(want, 0.0)).norm() < 1e-6);
            }
        }
        let h = mixed_hessian(&ScalarField::re_coord(0), &z, 1e-4).unwrap();
        assert!(h.matrix.iter().all(|x| x.norm() < 1e-6));
        let h = mixed_hessian(&ScalarField::<f64>::modulus_pow4(0), &CVec::from_re(&[1.0]), 1e-4).unwrap();
        assert!((h.entry(0, 0).re - 4.0).abs() < 1e-6);
    }

    #[test]
    fn off_diagonal_sign_convention() {
        // f = 2 Re(z1 conj z2): ∂_1 ∂̄_2 f = 1, ∂_2 ∂̄_1 f = 1.
        // f = 2 Im(z1 conj z2) = 2(y1 x2 − x1 y2): ∂_1∂̄_2 f = −i... check against
        // the closed form H_{12} = ∂_1 ∂̄_2 [−i z1 z̄2 + i z̄1 z2] = −i.
        let f = ScalarField::new("2Im(z1 conj z2)", |z: &CVec<f64>| 2.0 * (z.get(0) * z.get(1).conj()).im);
        let h = mixed_hessian(&f, &CVec::from_re(&[0.2, 0.3]), 1e-4).unwrap();
        assert!((h.entry(0, 1) - c(0.0, -1.0)).norm() < 1e-6, "{:?}", h.entry(0, 1));
        assert!((h.entry(1, 0) - c(0.0, 1.0)).norm() < 1e-6);
        let w = CVec::from_pairs(&[(1.0, 0.0), (0.0, 1.0)]);
        // Σ H_ij w_i w̄_j = H_12 w_1 w̄_2 + H_21 w_2 w̄_1 = (−i)(−i) + i·i = −2.
        assert!((h.quadratic_form(&w) + 2.0).abs() < 1e-6);
        let ev = h.eigenvalues(2);
        assert!((ev[0] + 1.0).abs() < 1e-6 && (ev[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn circle_means() {
        let zero = CVec::<f64>::zeros(2);
        let e1 = CVec::basis(0, 2);
        assert!(circle_mean(&ScalarField::re_coord(0), &zero, &e1, 1.0, 64, None).unwrap().abs() < 1e-15);
        let m = circle_mean(&ScalarField::norm_sqr(), &zero, &e1, 1.0, 64, None).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        let a = CVec::from_re(&[0.3, 0.0]);
        let m = circle_mean(&ScalarField::modulus_sqr(0), &a, &e1, 0.5, 64, None).unwrap();
        assert!((m - (0.09 + 0.25)).abs() < 1e-14);
        let ball = Domain::unit_ball();
        assert!(circle_mean(&ScalarField::norm_sqr(), &zero, &e1, 1.0, 64, Some(&ball)).is_err());
    }

    #[test]
    fn psh_certificates() {
        let spec = GaussianSpec::geometric(2, 1).unwrap();
        let ball = Domain::unit_ball();
        let pts: Vec<_> = (0..5).map(|k| CVec::from_re(&[0.1 * k as f64, -0.05])).collect();
        let dirs = sample_directions(&spec, 4);
        let plan = PshPlan::new(1e-3, 2);
        let r = certify_psh(&ScalarField::norm_sqr(), &ball, &pts, &dirs, &[0.1], &plan);
        assert!(r.passed(), "{r:?}");
        let lam = r.find("psh-hessian").unwrap().stats["lambda_min_n2"];
        assert!((lam - 1.0).abs() < 1e-6);
        let neg = ScalarField::norm_sqr().scaled(-1.0);
        let r = certify_psh(&neg, &ball, &pts, &dirs, &[0.1], &plan);
        let rec = r.find("psh-circle-mean").unwrap();
        assert!(!rec.passed);
        assert!((rec.worst_violation - 0.01).abs() < 1e-9);
    }

    #[test]
    fn semi_anti_constants() {
        let ball = Domain::unit_ball();
        let pts: Vec<_> = (0..4).map(|k| CVec::from_re(&[0.1 * k as f64, 0.2])).collect();
        let dims = [1, 2];
        let cert = certify_semi_anti_psh(&ScalarField::norm_sqr(), &ball, &pts, 1e-3, &dims, 1e-4);
        assert!(cert.passes && (cert.c_estimate - 1.0).abs() < 1e-6);
        let cert = certify_semi_anti_psh(&ScalarField::constant(2.0), &ball, &pts, 1e-3, &dims, 1e-4);
        assert!(cert.passes && cert.c_estimate == 0.0);
        let cert = certify_semi_anti_psh(&ScalarField::norm_sqr().scaled(2.0), &ball, &pts, 1e-3, &dims, 1e-4);
        assert!((cert.c_estimate - 2.0).abs() < 1e-6);
    }

    #[test]
    fn lipschitz_estimates() {
        let pts: Vec<_> = (0..20).map(|k| CVec::from_pairs(&[(0.05 * k as f64, 0.03 * k as f64)])).collect();
        let l = estimate_lipschitz(&ScalarField::re_coord(0), &pts).unwrap();
        assert!(l <= 1.0 && l > 0.8);
        assert_eq!(estimate_lipschitz(&ScalarField::constant(1.0), &pts).unwrap(), 0.0);
        assert!(estimate_lipschitz(&ScalarField::norm(), &pts[..1]).is_err());
    }

    #[test]
    fn exhaustion_on_ball() {
        let spec = GaussianSpec::geometric(2, 5).unwrap();
        let ball = Domain::unit_ball();
        let eta = ScalarField::new("-ln d + |z|^2", |z: &CVec<f64>| -(1.0 - z.norm()).ln() + z.norm_sqr());
        let plan = ExhaustionPlan {
            samples_per_level: 300,
            probes: 300,
            ..ExhaustionPlan::default()
        };
        let r = certify_exhaustion(&eta, &ball, &[1.0, 2.0, 4.0], &spec, &plan).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        let r = certify_exhaustion(&ScalarField::re_coord(0), &ball, &[1.0, 2.0], &spec, &plan).unwrap();
        assert!(!r.passed());
        let full = Domain::full_space();
        let r = certify_exhaustion(&ScalarField::norm_sqr(), &full, &[1.0, 2.0], &spec, &plan).unwrap();
        assert!(r.passed());
    }
}
