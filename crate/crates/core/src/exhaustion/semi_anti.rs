//! A Lipschitz semi-anti-plurisubharmonic exhaustion
//! `Ψ = Σ_j (j/ψ(1)) ψ(U_{t_j}(I_jη) + 3 − j)`, where `U_t` is the
//! Lasry–Lions envelope.
//!
//! `g_j = I_jη` is supported in `{η < j+1}` and bounded by `j + 1` there.
//! Each `t_j` is the largest parameter whose sampled modulus gap
//! `w(2√(t·sup g_j))` stays under a target, so `g_j − gap ≤ U_{t_j} g_j ≤ g_j`.
//! That sandwich gives cheap two-sided bounds on `Ψ` from `η` alone
//! ([`SemiAntiPsi::bounds`]), which later stages use to avoid solving the
//! envelope problem when a cutoff of `Ψ` is already decided.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sampling::{check_directions, shell, Sampler};
use super::state::{ConstructedField, EnvelopeChoice, PipelineState, Stage};
use super::{cutoff_product, lipschitz_exhaustion, positivity_shift};
use crate::domain::{Domain, Proposal};
use crate::error::{Error, Result};
use crate::field::{Provenance, ScalarField};
use crate::regularize::{
    eval_cutoff, estimate_modulus, psi_f64, CutoffKit, Envelope, EnvelopeSpec, ModulusOptions,
};
use crate::space::{streams, CVec, GaussianSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemiAntiOptions {
    /// Number of series terms.
    pub levels: usize,
    /// Points per sampled set used for the modulus estimate.
    pub samples: usize,
    pub shell_points: usize,
    /// Points on which `U ≥ g − 1` is verified.
    pub sandwich_samples: usize,
    /// Admitted envelope drop `w(2√(t·sup))`; at most 1.
    pub gap: f64,
    pub modulus_cells: usize,
    pub modulus_directions: usize,
    pub max_halvings: usize,
    pub envelope_starts: usize,
    pub proposal_scale: f64,
}

impl Default for SemiAntiOptions {
    fn default() -> Self {
        Self {
            levels: 6,
            samples: 300,
            shell_points: 100,
            sandwich_samples: 200,
            gap: 1.0 / 64.0,
            modulus_cells: 256,
            modulus_directions: 4,
            max_halvings: 60,
            envelope_starts: 16,
            proposal_scale: 1.0,
        }
    }
}

/// Builds the semi-anti-psh exhaustion on `V ≠ ℓ²`.
pub fn semi_anti_psh_exhaustion(
    v: &Domain<f64>,
    kit: &CutoffKit,
    spec: &GaussianSpec<f64>,
    opts: &SemiAntiOptions,
) -> Result<ConstructedField> {
    if v.is_full_space() {
        return Err(Error::InvalidParameter(
            "semi-anti-psh exhaustion needs V ≠ ℓ² (use ‖z‖² on the whole space)".into(),
        ));
    }
    if !(opts.gap > 0.0 && opts.gap <= 1.0) {
        return Err(Error::InvalidParameter(format!("envelope gap must lie in (0, 1], got {}", opts.gap)));
    }
    let proposal = Proposal::default()
        .scaled(opts.proposal_scale)
        .on_stream(streams::PIPELINE);
    let c0 = positivity_shift(v, spec, &proposal);
    let state = select(v, kit, spec, opts, c0, proposal)?;
    assemble(v, spec, &state)
}

pub(super) fn select(
    v: &Domain<f64>,
    kit: &CutoffKit,
    spec: &GaussianSpec<f64>,
    opts: &SemiAntiOptions,
    c0: f64,
    proposal: Proposal<f64>,
) -> Result<PipelineState> {
    let eta = lipschitz_exhaustion(v, c0);
    let smp = Sampler::new(v, spec, proposal);
    let scale = v.scale();
    let mut state = PipelineState::new(Stage::SemiAntiPsi, v, spec, kit, c0);
    state.truncation_k = opts.levels;
    let pool = smp.sublevel(&eta, opts.levels as f64 + 1.5, 4 * opts.samples, 1);
    let psi1 = psi_f64(1.0).0;

    for j in 1..=opts.levels {
        let lvl = j as f64;
        let sup = lvl + 1.0;
        let g = cutoff_product(&eta, v, lvl);
        let mut pts: Vec<CVec<f64>> = pool
            .iter()
            .filter(|z| eta.eval(z) < lvl + 1.5)
            .take(opts.samples)
            .cloned()
            .collect();
        for c in shell(&eta, &eta, &pool, lvl, opts.shell_points / 2, scale) {
            pts.push(c.inside);
        }
        for c in shell(&eta, &eta, &pool, lvl + 1.0, opts.shell_points / 2, scale) {
            pts.push(c.inside);
            pts.push(c.outside);
        }
        let (mut t, gap_of) = if pts.len() >= 2 {
            let table = estimate_modulus(
                &g,
                &pts,
                &ModulusOptions {
                    max_t: 2.0 * sup.sqrt(),
                    cells: opts.modulus_cells,
                    directions: opts.modulus_directions,
                    seed: spec.seed ^ (j as u64).wrapping_mul(0x9E37_79B9),
                },
            )?;
            let gap_of = move |t: f64| table.eval(2.0 * (t * sup).sqrt());
            (largest_parameter(&gap_of, opts.gap, j, opts.max_halvings)?, Some(gap_of))
        } else {
            // Nothing sampled: the term is the constant ψ(3 − j) up to a thin set.
            (1e-6, None)
        };

        let check: Vec<&CVec<f64>> = pts.iter().take(opts.sandwich_samples).collect();
        let dirs = check_directions(spec, 4, 20 + j as u64);
        let mut halvings = 0;
        loop {
            let mut env = EnvelopeSpec::new(t, sup)?.nonnegative(true);
            // With t below the inverse sampled curvature of g the objective is
            // strongly convex on the search ball and one start finds the minimum.
            let curvature = second_difference_bound(&g, &check, env.search_radius, &dirs);
            env.starts = if curvature * t < 0.5 { 1 } else { opts.envelope_starts };
            let u = Envelope::new(&g, &env, spec)?;
            let margin = check
                .iter()
                .map(|z| u.eval(z) - (g.eval(z) - 1.0))
                .fold(f64::INFINITY, f64::min);
            if margin >= 0.0 || check.is_empty() {
                state.t_seq.push(EnvelopeChoice {
                    level: j,
                    envelope: env,
                    modulus_gap: gap_of.as_ref().map_or(0.0, |w| w(t)),
                    halvings,
                    sandwich_margin: if check.is_empty() { 0.0 } else { margin },
                    sandwich_samples: check.len(),
                });
                break;
            }
            halvings += 1;
            t *= 0.5;
            if halvings > opts.max_halvings {
                return Err(Error::Bisection { level: j, halvings });
            }
        }
        state.weights.push(lvl / psi1);
    }
    Ok(state)
}

/// `max |g(z+ru) + g(z−ru) − 2g(z)| / r²` over the points and directions.
fn second_difference_bound(g: &ScalarField<f64>, pts: &[&CVec<f64>], r: f64, dirs: &[CVec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for z in pts {
        let g0 = g.eval(z);
        for u in dirs {
            let u = u.with_ambient_dim(z.ambient_dim());
            let step = num_complex::Complex::new(r, 0.0);
            let d = g.eval(&z.axpy(step, &u)) + g.eval(&z.axpy(-step, &u)) - 2.0 * g0;
            if d.is_finite() {
                best = best.max(d.abs() / (r * r));
            }
        }
    }
    best
}

/// Largest `t ∈ (0, 1]` with `gap(t) ≤ target`, by bisection in `ln t`.
fn largest_parameter(gap: &dyn Fn(f64) -> f64, target: f64, level: usize, max_halvings: usize) -> Result<f64> {
    if gap(1.0) <= target {
        return Ok(1.0);
    }
    let mut lo = 1e-6;
    let mut halvings = 0;
    while gap(lo) > target {
        lo *= 0.5;
        halvings += 1;
        if halvings > max_halvings {
            return Err(Error::Bisection { level, halvings });
        }
    }
    let (mut a, mut b) = (lo.ln(), 0.0f64);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if gap(m.exp()) <= target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a.exp())
}

/// The assembled semi-anti-psh exhaustion with cheap bounds.
#[derive(Clone)]
pub struct SemiAntiPsi {
    eta: ScalarField<f64>,
    envelopes: Vec<Envelope<f64>>,
    weights: Vec<f64>,
    /// Per-term lower slack used by [`Self::bounds`]: twice the recorded
    /// modulus gap, capped at the guaranteed 1.
    slack: Vec<f64>,
}

impl std::fmt::Debug for SemiAntiPsi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemiAntiPsi")
            .field("terms", &self.weights.len())
            .field("slack", &self.slack)
            .finish()
    }
}

impl SemiAntiPsi {
    pub fn from_state(v: &Domain<f64>, spec: &GaussianSpec<f64>, state: &PipelineState) -> Result<Self> {
        let eta = lipschitz_exhaustion(v, state.c0);
        let mut envelopes = Vec::new();
        for (j, choice) in state.t_seq.iter().enumerate() {
            let g = cutoff_product(&eta, v, (j + 1) as f64);
            envelopes.push(Envelope::new(&g, &choice.envelope, spec)?);
        }
        Ok(Self {
            eta,
            envelopes,
            weights: state.weights.clone(),
            slack: state.t_seq.iter().map(|c| (2.0 * c.modulus_gap).min(1.0)).collect(),
        })
    }

    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    fn g(&self, j: usize, e: f64) -> f64 {
        let tau = j as f64;
        if e >= tau + 1.0 {
            0.0
        } else {
            eval_cutoff(tau, e) * e
        }
    }

    /// Term `j` (1-based) given `η(z) = e`; the envelope is solved only when
    /// the term is not decided by `g_j` alone.
    fn term(&self, j: usize, e: f64, z: &CVec<f64>) -> f64 {
        let w = self.weights[j - 1];
        let shift = 3.0 - j as f64;
        let g = self.g(j, e);
        if g + shift <= 0.0 {
            return 0.0;
        }
        if g == 0.0 {
            return w * psi_f64(shift).0;
        }
        w * psi_f64(self.envelopes[j - 1].eval(z) + shift).0
    }

    pub fn eval(&self, z: &CVec<f64>) -> f64 {
        let e = self.eta.eval(z);
        if !e.is_finite() {
            return f64::INFINITY;
        }
        (1..=self.terms()).map(|j| self.term(j, e, z)).sum()
    }

    pub fn term_at(&self, j: usize, z: &CVec<f64>) -> f64 {
        let e = self.eta.eval(z);
        if !e.is_finite() {
            return f64::INFINITY;
        }
        self.term(j, e, z)
    }

    /// `(lower, upper)` bounds on `Ψ(z)` from `η(z)` alone.
    pub fn bounds(&self, z: &CVec<f64>) -> (f64, f64) {
        let e = self.eta.eval(z);
        if !e.is_finite() {
            return (f64::INFINITY, f64::INFINITY);
        }
        let mut lo = 0.0;
        let mut hi = 0.0;
        for j in 1..=self.terms() {
            let w = self.weights[j - 1];
            let shift = 3.0 - j as f64;
            let g = self.g(j, e);
            hi += w * psi_f64(g + shift).0;
            lo += w * psi_f64(g - self.slack[j - 1] + shift).0;
        }
        (lo, hi)
    }

    pub fn field(&self, label: impl Into<String>) -> ScalarField<f64> {
        let me = Arc::new(self.clone());
        ScalarField::new(label, move |z: &CVec<f64>| me.eval(z))
    }
}

pub(super) fn assemble(v: &Domain<f64>, spec: &GaussianSpec<f64>, state: &PipelineState) -> Result<ConstructedField> {
    let psi = Arc::new(SemiAntiPsi::from_state(v, spec, state)?);
    let mut terms = Vec::new();
    for j in 1..=psi.terms() {
        let p = psi.clone();
        terms.push(
            ScalarField::new(format!("Psi term {j}"), move |z: &CVec<f64>| p.term_at(j, z)).with_provenance(
                Provenance::Pipeline {
                    stage: "semi_anti_Psi".into(),
                    k: j,
                },
            ),
        );
    }
    let parts = psi.envelopes.iter().map(|u| u.field()).collect();
    let field = psi
        .field(format!("semi-anti-psh exhaustion on {} (K={})", v.name(), psi.terms()))
        .with_provenance(Provenance::Pipeline {
            stage: "semi_anti_Psi".into(),
            k: psi.terms(),
        });
    Ok(ConstructedField {
        field,
        terms,
        parts,
        base: psi.eta.clone(),
        state: state.clone(),
    })
}

/// Semi-anti-psh parameter of `f` on the slices `{within < level} ∩ ℂ^{n'}`
/// for `n' = 1, …, n`: points are drawn from the `n'`-dimensional marginal
/// and padded with zeros, and the Hessian is read at truncation `n'`.
/// Since `ℂ^{n'−1} ⊂ ℂ^{n'}`, the points drawn for lower slices are reused
/// in higher ones, so the estimates are non-decreasing in `n'`; a
/// dimension-free bound shows up as a flat sequence. The returned count is
/// the number of points drawn natively in each slice.
pub fn semi_anti_slices(
    f: &ScalarField<f64>,
    v: &Domain<f64>,
    spec: &GaussianSpec<f64>,
    within: &ScalarField<f64>,
    level: f64,
    count: usize,
    h: f64,
) -> Result<Vec<(usize, f64, usize)>> {
    let n = spec.truncation();
    let mut out = Vec::with_capacity(n);
    let mut all: Vec<CVec<f64>> = Vec::new();
    for k in 1..=n {
        let sub = spec.truncated(k)?;
        let proposal = Proposal::default().on_stream(streams::sub(streams::PIPELINE, 500 + k as u64));
        let (pts, _) = crate::domain::sample_domain_lenient(v, count, &sub, &proposal, |z| {
            within.eval(&z.with_ambient_dim(n)) < level
        });
        let native = pts.len();
        all.extend(pts.iter().map(|z| z.with_ambient_dim(n)));
        let cert = crate::calculus::certify_semi_anti_psh(f, v, &all, 0.0, &[k], h);
        out.push((k, cert.c_estimate, native));
    }
    Ok(out)
}
