//! A smooth plurisubharmonic exhaustion
//! `η_K = Σ_{j≤K} α_j ψ(ϱ_j + 2 − j)` of a pseudo-convex domain, where
//! `ϱ = ‖z‖² − ln d(z, ∂V) + c₀` and
//! `ϱ_j = mollify(𝓘_{λ(j)+1}(Ψ)·ϱ, ε_j) + ε_j‖z‖²` is cut off along the
//! sublevels of the semi-anti-psh exhaustion `Ψ`.
//!
//! Selection runs in four steps: the level map `λ` and radii `ε_j`; the
//! semi-anti-psh constants of `−ϱ_j`; the sandwich `ϱ ≤ ϱ_j ≤ ϱ + 1` and
//! plurisubharmonicity of `ϱ_j − ε_j‖z‖²`; and the coefficients `α_j`, each
//! large enough to absorb the sampled Hessian deficit `s_k` of the previous
//! partial sum.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sampling::{check_directions, check_displacements, gradient_direction, hessian_infimum, local_lipschitz, shell, Sampler, Want};
use super::semi_anti::{self, SemiAntiOptions, SemiAntiPsi};
use super::state::{
    CheckSummary, ConstructedField, EpsilonChoice, HessianInfimum, LambdaEntry, LevelConstant, PipelineState,
    SandwichSummary, SemiAntiConstant, Stage,
};
use super::{lipschitz_exhaustion, positivity_shift, sum_field};
use crate::calculus::{certify_semi_anti_psh, mixed_hessian};
use crate::domain::{Domain, Proposal};
use crate::error::{Error, Result};
use crate::field::{Provenance, ScalarField};
use crate::regularize::{eval_cutoff, mollify_with, psi_f64, CutoffKit, KernelSamples, MollifyOptions, Normalization};
use crate::space::{streams, CVec, GaussianSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PshOptions {
    /// Number of terms `K` of `η_K`; `Ψ` keeps `K + 4` terms.
    pub levels: usize,
    /// Points drawn from each half-integer sublevel of `ϱ`.
    pub pool_per_level: usize,
    /// Points placed on each level set used by a check.
    pub shell_points: usize,
    /// Pool points (closest to the level first) entering each check.
    pub check_points: usize,
    pub check_directions: usize,
    pub safety: f64,
    pub max_halvings: usize,
    pub eps_floor: f64,
    pub sandwich_points: usize,
    pub sandwich_hessian_points: usize,
    pub semi_anti_points: usize,
    /// Uniform points per annulus for the Hessian deficit `s_k`.
    pub deficit_points: usize,
    /// Level-set points per cutoff band for `s_k`.
    pub deficit_shell_points: usize,
    pub proposal_scale: f64,
    pub mollifier: MollifyOptions,
    pub semi_anti: SemiAntiOptions,
}

impl Default for PshOptions {
    fn default() -> Self {
        Self {
            levels: 4,
            pool_per_level: 120,
            shell_points: 40,
            check_points: 120,
            check_directions: 4,
            safety: 2.0,
            max_halvings: 60,
            eps_floor: 1e-12,
            sandwich_points: 200,
            sandwich_hessian_points: 16,
            semi_anti_points: 8,
            deficit_points: 32,
            deficit_shell_points: 4,
            proposal_scale: 1.0,
            mollifier: MollifyOptions {
                base_samples: 32,
                rotations: 8,
                normalization: Normalization::SelfNormalized,
                stream: 0,
            },
            semi_anti: SemiAntiOptions {
                samples: 200,
                shell_points: 60,
                sandwich_samples: 120,
                ..SemiAntiOptions::default()
            },
        }
    }
}

/// `λ(t)` recorded in a psh state (`None` beyond the table).
pub fn lambda_of(state: &PipelineState, t: f64) -> Option<f64> {
    state.lambda(t)
}

/// `Ψ` where its truncation is exact, `+∞` elsewhere (and off `V`).
#[derive(Clone)]
pub(super) struct GuardedPsi {
    pub(super) psi: Arc<SemiAntiPsi>,
    pub(super) rho: ScalarField<f64>,
    pub(super) limit: f64,
}

impl GuardedPsi {
    pub(super) fn value(&self, z: &CVec<f64>) -> f64 {
        let r = self.rho.eval(z);
        if !(r < self.limit) {
            return f64::INFINITY;
        }
        self.psi.eval(z)
    }

    fn field(&self) -> ScalarField<f64> {
        let me = self.clone();
        ScalarField::new("Psi", move |z: &CVec<f64>| me.value(z))
    }

    /// `𝓘_τ(Ψ)·ϱ`, solving for `Ψ` only inside the band where the cheap
    /// bounds leave the cutoff undecided.
    fn cut_rho(&self, tau: f64) -> ScalarField<f64> {
        let me = self.clone();
        ScalarField::new(format!("I_{tau}(Psi)*rho"), move |z: &CVec<f64>| {
            let r = me.rho.eval(z);
            if !(r < me.limit) {
                return 0.0;
            }
            let (lo, hi) = me.psi.bounds(z);
            if hi <= tau {
                r
            } else if lo >= tau + 1.0 {
                0.0
            } else {
                eval_cutoff(tau, me.psi.eval(z)) * r
            }
        })
    }
}

pub(super) fn guarded(v: &Domain<f64>, spec: &GaussianSpec<f64>, state: &PipelineState) -> Result<GuardedPsi> {
    let sa = state
        .semi_anti
        .as_deref()
        .ok_or_else(|| Error::Config("psh state lacks its semi-anti-psh stage".into()))?;
    Ok(GuardedPsi {
        psi: Arc::new(SemiAntiPsi::from_state(v, spec, sa)?),
        rho: lipschitz_exhaustion(v, state.c0),
        limit: sa.truncation_k as f64 - 2.0,
    })
}

/// `ϱ_j` for every recorded radius.
fn regularized(spec: &GaussianSpec<f64>, state: &PipelineState, g: &GuardedPsi) -> Result<Vec<ScalarField<f64>>> {
    let opts = state.mollifier.clone().unwrap_or_default();
    let samples = KernelSamples::draw(spec, &opts)?;
    let mut out = Vec::new();
    for (j, e) in state.eps_seq.iter().enumerate() {
        let lam = state.lambda_table[j].lambda;
        let eps = e.eps;
        let smooth = mollify_with(&g.cut_rho(lam + 1.0), eps, &state.kit, &samples, opts.normalization);
        out.push(
            smooth
                .plus(&ScalarField::norm_sqr().scaled(eps))
                .with_label(format!("rho_{}", j + 1))
                .with_provenance(Provenance::Mollified { eps }),
        );
    }
    Ok(out)
}

fn series_terms(rhos: &[ScalarField<f64>], alphas: &[f64]) -> Vec<ScalarField<f64>> {
    rhos.iter()
        .zip(alphas)
        .enumerate()
        .map(|(i, (r, &a))| {
            let j = i + 1;
            let shift = 2.0 - j as f64;
            let r = r.clone();
            ScalarField::new(format!("eta term {j}"), move |z: &CVec<f64>| a * psi_f64(r.eval(z) + shift).0)
                .with_provenance(Provenance::Pipeline {
                    stage: "psh_eta".into(),
                    k: j,
                })
        })
        .collect()
}

/// Sampled points with their `ϱ` and `Ψ` values.
struct Pool {
    pts: Vec<CVec<f64>>,
    rho: Vec<f64>,
    psi: Vec<f64>,
}

impl Pool {
    /// Up to `count` points with `Ψ` in `[lo, hi)`, those nearest `near` first.
    fn band(&self, lo: f64, hi: f64, near: f64, count: usize) -> Vec<CVec<f64>> {
        let mut idx: Vec<usize> = (0..self.pts.len())
            .filter(|&i| self.psi[i] >= lo && self.psi[i] < hi)
            .collect();
        idx.sort_by(|&a, &b| (self.psi[a] - near).abs().total_cmp(&(self.psi[b] - near).abs()));
        idx.into_iter().take(count).map(|i| self.pts[i].clone()).collect()
    }

    /// Seeds for level-set searches at `Ψ = target`, nearest first.
    fn seeds(&self, target: f64) -> Vec<CVec<f64>> {
        self.band(f64::NEG_INFINITY, f64::INFINITY, target, self.pts.len())
    }
}

/// Largest sampled `|Ψ(z+δu) − Ψ(z−δu)| / 2δ` along `u = ∇ϱ/|∇ϱ|`.
fn psi_slope<'a>(
    psi: &ScalarField<f64>,
    rho: &ScalarField<f64>,
    pts: impl Iterator<Item = &'a CVec<f64>>,
    delta: f64,
) -> f64 {
    let mut best = 0.0f64;
    for z in pts {
        let Some(u) = gradient_direction(rho, z) else { continue };
        let step = num_complex::Complex::new(delta, 0.0);
        let d = (psi.eval(&z.axpy(step, &u)) - psi.eval(&z.axpy(-step, &u))).abs() / (2.0 * delta);
        if d.is_finite() {
            best = best.max(d);
        }
    }
    best
}

/// Builds the plurisubharmonic exhaustion. On `V = ℓ²` it is `‖z‖²`.
pub fn psh_exhaustion(
    v: &Domain<f64>,
    kit: &CutoffKit,
    spec: &GaussianSpec<f64>,
    opts: &PshOptions,
) -> Result<ConstructedField> {
    if v.is_full_space() {
        let mut state = PipelineState::new(Stage::PshEta, v, spec, kit, 0.0);
        state.truncation_k = 1;
        return assemble(v, spec, &state);
    }
    if opts.levels == 0 {
        return Err(Error::InvalidParameter("psh exhaustion needs at least one term".into()));
    }
    let proposal = Proposal::default()
        .scaled(opts.proposal_scale)
        .on_stream(streams::PIPELINE);
    let c0 = positivity_shift(v, spec, &proposal);
    let k = opts.levels;
    let sa_opts = SemiAntiOptions {
        levels: k + 4,
        ..opts.semi_anti.clone()
    };
    let sa_state = semi_anti::select(v, kit, spec, &sa_opts, c0, proposal.clone())?;

    let mut state = PipelineState::new(Stage::PshEta, v, spec, kit, c0);
    state.truncation_k = k;
    state.safety = opts.safety;
    state.mollifier = Some(opts.mollifier.clone());
    state.semi_anti = Some(Box::new(sa_state));
    let g = guarded(v, spec, &state)?;
    let psi_f = g.field();
    let rho = g.rho.clone();
    let scale = v.scale();
    let smp = Sampler::new(v, spec, proposal);

    // Stratified pool over the range where Ψ is exact.
    let mut pts = Vec::new();
    let mut level = 1.0;
    let mut stream = 100;
    while level <= g.limit {
        pts.extend(smp.sublevel(&rho, level, opts.pool_per_level, stream));
        level += 0.5;
        stream += 1;
    }
    let pool = Pool {
        rho: pts.iter().map(|z| rho.eval(z)).collect(),
        psi: pts.iter().map(|z| g.value(z)).collect(),
        pts,
    };
    let psi_shell = |target: f64, count: usize| shell(&psi_f, &rho, &pool.seeds(target), target, count, scale);
    // Points of V_{Ψ,t}: pool points nearest the level plus points on it.
    let inside = |t: f64, count: usize| -> Vec<CVec<f64>> {
        let mut s = pool.band(f64::NEG_INFINITY, t, t, count);
        s.extend(psi_shell(t, opts.shell_points).into_iter().map(|c| c.inside));
        s
    };

    // Step 1a: λ(t) = 1 + max(t, sup_{V_{ϱ,t}} Ψ).
    let mut prev = 0.0f64;
    for t in 1..=k {
        let t = t as f64;
        let mut vals: Vec<f64> = (0..pool.pts.len())
            .filter(|&i| pool.rho[i] < t)
            .map(|i| pool.psi[i])
            .collect();
        let seeds: Vec<CVec<f64>> = pool.pts.clone();
        for c in shell(&rho, &rho, &seeds, t, opts.shell_points, scale) {
            vals.push(g.value(&c.inside));
        }
        let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lambda = (1.0 + t.max(sup)).max(prev + 1e-6);
        prev = lambda;
        state.lambda_table.push(LambdaEntry {
            t,
            lambda,
            samples: vals.len(),
        });
    }

    // Step 1b: C_j on V_{Ψ,λ(j)+½} and ε_j.
    let dirs = check_directions(spec, opts.check_directions, 1);
    for j in 1..=k {
        let lam = state.lambda_table[j - 1].lambda;
        let near = inside(lam + 0.5, opts.check_points);
        let lip = if near.len() >= 2 { local_lipschitz(&rho, &near) } else { 0.0 };
        let sup = near.iter().map(|z| rho.eval(z)).fold(0.0f64, f64::max);
        let c = if near.len() < 2 { 1.0 } else { opts.safety * lip.max(sup) };
        state.lipschitz_table.push(LevelConstant {
            t: lam + 0.5,
            c,
            lipschitz: lip,
            sup,
            samples: near.len(),
        });

        let set_a = inside(lam, opts.check_points);
        let bound = set_a
            .iter()
            .map(|z| 1.0 / (1.0 + z.norm_sqr() + c))
            .fold(1.0 / (1.0 + c), f64::min)
            .min(1.0);
        let mut set_b = pool.band(lam + 3.0, lam + 4.0, lam + 3.0, opts.check_points);
        set_b.extend(psi_shell(lam + 3.0, opts.shell_points).into_iter().map(|c| c.outside));
        let set_c = inside(lam + 4.0, opts.check_points);

        // Start from the radius at which Ψ, moving at its sampled slope, would
        // use up half the margin of the tightest check.
        let slope = psi_slope(&psi_f, &rho, set_a.iter().chain(&set_b).chain(&set_c), 1e-7 * scale);
        let mut eps = (bound * (1.0 - 1e-9)).min(0.5 / (2.0 * opts.safety * slope.max(1e-300)));
        let mut halvings = 0;
        loop {
            let checks = [
                check_displacements("displaced V_{Psi,l} stays below l+1/2", &psi_f, &rho, v, &set_a, &dirs, eps, Want::Below(lam + 0.5)),
                check_displacements("displaced complement of V_{Psi,l+3} stays above l+2", &psi_f, &rho, v, &set_b, &dirs, eps, Want::AtLeast(lam + 2.0)),
                check_displacements("displaced V_{Psi,l+4} stays below l+5", &psi_f, &rho, v, &set_c, &dirs, eps, Want::Below(lam + 5.0)),
            ];
            if checks.iter().all(CheckSummary::passed) {
                state.eps_seq.push(EpsilonChoice {
                    level: j,
                    eps,
                    upper_bound: bound,
                    halvings,
                    checks: checks.to_vec(),
                });
                break;
            }
            halvings += 1;
            eps *= 0.5;
            if eps < opts.eps_floor || halvings > opts.max_halvings {
                return Err(Error::DomainResolution {
                    level: j,
                    floor: opts.eps_floor,
                });
            }
        }
    }
    let eps_min = state.eps_seq.iter().map(|e| e.eps).fold(f64::INFINITY, f64::min);
    state.fd_step = (eps_min / 16.0).min(1e-4);
    let h = state.fd_step;
    let rhos = regularized(spec, &state, &g)?;
    let dims: Vec<usize> = (1..=spec.truncation()).collect();

    // Step 3: ϱ ≤ ϱ_j ≤ ϱ + 1 on V_{Ψ,λ(j)}, and ϱ_j − ε_j‖z‖² psh there.
    for (i, rj) in rhos.iter().enumerate() {
        let j = i + 1;
        let lam = state.lambda_table[i].lambda;
        let eps = state.eps_seq[i].eps;
        let pts = inside(lam, opts.sandwich_points);
        let mut lower = f64::INFINITY;
        let mut upper = f64::INFINITY;
        let mut tol_used = 0.0f64;
        for z in &pts {
            let r = rho.eval(z);
            let rj = rj.eval(z);
            let tol = 1e-6 * (1.0 + r.abs());
            tol_used = tol_used.max(tol);
            lower = lower.min(rj - r);
            upper = upper.min(r + 1.0 - rj);
            if rj - r < -tol || r + 1.0 - rj < -tol {
                return Err(Error::Sandwich {
                    level: j,
                    detail: format!("rho = {r}, rho_j = {rj}"),
                    point: z.to_pairs(),
                });
            }
        }
        let mut min_eig = f64::INFINITY;
        let stride = (pts.len() / opts.sandwich_hessian_points.max(1)).max(1);
        let mut hs = 0;
        for z in pts.iter().step_by(stride).take(opts.sandwich_hessian_points) {
            if let Ok(hf) = mixed_hessian(rj, z, h) {
                min_eig = min_eig.min(hf.min_eigenvalue(spec.truncation()) - eps);
                hs += 1;
            }
        }
        state.step3.push(SandwichSummary {
            j,
            samples: pts.len(),
            lower_margin: lower,
            upper_margin: upper,
            tolerance: tol_used,
            min_eigenvalue: min_eig,
            hessian_samples: hs,
        });
    }

    // Step 2: semi-anti-psh constants of −ϱ_j on V_{Ψ,λ(k)}.
    for kk in 1..=k {
        let lam = state.lambda_table[kk - 1].lambda;
        let all = pool.band(f64::NEG_INFINITY, lam, lam, pool.pts.len());
        let stride = (all.len() / opts.semi_anti_points.max(1)).max(1);
        let pts: Vec<CVec<f64>> = all.into_iter().step_by(stride).take(opts.semi_anti_points).collect();
        for (i, rj) in rhos.iter().enumerate() {
            let cert = certify_semi_anti_psh(&rj.scaled(-1.0), v, &pts, 0.0, &dims, h);
            state.c_jk.push(SemiAntiConstant {
                j: i + 1,
                k: kk,
                c: cert.c_estimate,
                per_dim: cert.per_dim,
                samples: pts.len(),
            });
        }
    }

    // Step 4: the coefficients α_j.
    let (psi1, dpsi1) = {
        let p = psi_f64(1.0);
        (p.0, p.1)
    };
    let sup_rho = |kk: usize| -> f64 {
        let lam = state.lambda_table[kk - 1].lambda;
        let s = inside(lam, opts.check_points);
        if s.is_empty() {
            pool.rho.iter().copied().fold(f64::INFINITY, f64::min).max(1.0)
        } else {
            s.iter().map(|z| rho.eval(z)).fold(0.0f64, f64::max)
        }
    };
    state.alpha_seq.push(sup_rho(1) / psi1);
    for kk in 1..k {
        let lo = state.lambda_table[kk - 1].lambda;
        let hi = state.lambda_table[kk].lambda;
        let mut pts = pool.band(lo, hi, lo, opts.deficit_points);
        for j in 1..=kk {
            let lam = state.lambda_table[j - 1].lambda;
            for off in [0.5, 1.0, 1.5, 2.0, 2.5] {
                let target = lam + off;
                if target < lo || target >= hi {
                    continue;
                }
                pts.extend(psi_shell(target, opts.deficit_shell_points).into_iter().map(|c| c.inside));
            }
        }
        let terms = series_terms(&rhos[..kk], &state.alpha_seq);
        let partial = sum_field(format!("eta_{kk}"), &terms);
        let (s, per_dim, location) = if pts.is_empty() {
            (0.0, Vec::new(), None)
        } else {
            hessian_infimum(&partial, &pts, &dims, h)
        };
        let s = if s.is_finite() { s } else { 0.0 };
        state.s_seq.push(HessianInfimum {
            k: kk,
            s,
            per_dim,
            samples: pts.len(),
            location,
        });
        let eps_next = state.eps_seq[kk].eps;
        let alpha = (opts.safety * (-s).max(0.0) / (eps_next * dpsi1)).max(sup_rho(kk + 1) / psi1);
        state.alpha_seq.push(alpha);
    }
    assemble_with(v, &state, g.rho.clone(), rhos)
}

pub(super) fn assemble(v: &Domain<f64>, spec: &GaussianSpec<f64>, state: &PipelineState) -> Result<ConstructedField> {
    if v.is_full_space() {
        let f = ScalarField::norm_sqr().with_provenance(Provenance::Pipeline {
            stage: "psh_eta".into(),
            k: 1,
        });
        return Ok(ConstructedField {
            field: f.clone(),
            terms: vec![f.clone()],
            parts: Vec::new(),
            base: f,
            state: state.clone(),
        });
    }
    let g = guarded(v, spec, state)?;
    let rhos = regularized(spec, state, &g)?;
    assemble_with(v, state, g.rho.clone(), rhos)
}

fn assemble_with(
    v: &Domain<f64>,
    state: &PipelineState,
    base: ScalarField<f64>,
    rhos: Vec<ScalarField<f64>>,
) -> Result<ConstructedField> {
    if state.alpha_seq.len() != rhos.len() {
        return Err(Error::Config("psh state has mismatched coefficient and radius tables".into()));
    }
    let terms = series_terms(&rhos, &state.alpha_seq);
    let field = sum_field(format!("psh exhaustion on {} (K={})", v.name(), terms.len()), &terms).with_provenance(
        Provenance::Pipeline {
            stage: "psh_eta".into(),
            k: terms.len(),
        },
    );
    Ok(ConstructedField {
        field,
        terms,
        parts: rhos,
        base,
        state: state.clone(),
    })
}
