//! A smooth exhaustion `Ψ = Σ_j (w_j/ψ(1)) ψ(η_j + C(j+½)ε_j + 2 − j)` built
//! from mollified cutoffs `η_j = mollify(I_{j+1}η, ε_j)` of the Lipschitz
//! exhaustion `η`.

use serde::{Deserialize, Serialize};

use super::sampling::{check_directions, check_displacements, local_lipschitz, shell, Sampler, Want};
use super::state::{ConstructedField, EpsilonChoice, LevelConstant, PipelineState, Stage};
use super::{cutoff_product, lipschitz_exhaustion, positivity_shift, sum_field};
use crate::domain::{Domain, Proposal};
use crate::error::{Error, Result};
use crate::field::{Provenance, ScalarField};
use crate::regularize::{mollify_with, psi_f64, CutoffKit, KernelSamples, MollifyOptions};
use crate::space::{streams, CVec, GaussianSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothOptions {
    /// Highest level `J` on which the truncated series must be exact; the
    /// series keeps `J + 2` terms.
    pub levels: usize,
    /// Points per sampled set.
    pub samples: usize,
    /// Extra points placed on level sets, where the checks are tightest.
    pub shell_points: usize,
    /// Random directions per point in the inclusion checks.
    pub check_directions: usize,
    /// Factor applied to sampled Lipschitz estimates.
    pub safety: f64,
    pub max_halvings: usize,
    pub eps_floor: f64,
    pub proposal_scale: f64,
    pub mollifier: MollifyOptions,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        Self {
            levels: 4,
            samples: 1000,
            shell_points: 200,
            check_directions: 4,
            safety: 2.0,
            max_halvings: 60,
            eps_floor: 1e-12,
            proposal_scale: 1.0,
            mollifier: MollifyOptions::default(),
        }
    }
}

/// Builds the smooth exhaustion on `V ≠ ℓ²`.
pub fn smooth_exhaustion(
    v: &Domain<f64>,
    kit: &CutoffKit,
    spec: &GaussianSpec<f64>,
    opts: &SmoothOptions,
) -> Result<ConstructedField> {
    if v.is_full_space() {
        return Err(Error::InvalidParameter(
            "smooth exhaustion needs V ≠ ℓ² (use ‖z‖² on the whole space)".into(),
        ));
    }
    let proposal = Proposal::default()
        .scaled(opts.proposal_scale)
        .on_stream(streams::PIPELINE);
    let c0 = positivity_shift(v, spec, &proposal);
    let eta = lipschitz_exhaustion(v, c0);
    let smp = Sampler::new(v, spec, proposal);
    let k_terms = opts.levels + 2;
    let mut state = PipelineState::new(Stage::SmoothPsi, v, spec, kit, c0);
    state.truncation_k = k_terms;
    state.safety = opts.safety;
    state.mollifier = Some(opts.mollifier.clone());

    let scale = v.scale();
    let pool = smp.sublevel(&eta, k_terms as f64 + 3.5, 4 * opts.samples, 0);
    let below = |t: f64| -> Vec<CVec<f64>> {
        pool.iter()
            .filter(|z| eta.eval(z) < t)
            .take(opts.samples)
            .cloned()
            .collect()
    };

    // C(j + ½): Lipschitz bound of η on V_{j+½}; |η| ≤ t there exactly.
    for j in 1..=k_terms {
        let t = j as f64 + 0.5;
        let mut pts = below(t);
        pts.extend(shell(&eta, &eta, &pool, t, opts.shell_points, scale).into_iter().map(|c| c.inside));
        let lip = if pts.len() >= 2 { local_lipschitz(&eta, &pts) } else { 0.0 };
        state.lipschitz_table.push(LevelConstant {
            t,
            c: (opts.safety * lip).max(t),
            lipschitz: lip,
            sup: t,
            samples: pts.len(),
        });
    }

    let dirs = check_directions(spec, opts.check_directions, 0);
    for j in 1..=k_terms {
        let lvl = j as f64;
        let c = state.lipschitz_table[j - 1].c;
        let bound = 1.0 / (2.0 * c);
        let mut inner = below(lvl);
        inner.extend(shell(&eta, &eta, &pool, lvl, opts.shell_points, scale).into_iter().map(|c| c.inside));
        let mut outer: Vec<CVec<f64>> = pool
            .iter()
            .filter(|z| {
                let e = eta.eval(z);
                e >= lvl + 3.0 && e < lvl + 3.5
            })
            .take(opts.samples)
            .cloned()
            .collect();
        outer.extend(
            shell(&eta, &eta, &pool, lvl + 3.0, opts.shell_points, scale)
                .into_iter()
                .map(|c| c.outside),
        );
        let mut eps = bound * (1.0 - 1e-9);
        let mut halvings = 0;
        loop {
            let a = check_displacements(
                "closed ball around V_j stays in V_{j+1/2}",
                &eta,
                &eta,
                v,
                &inner,
                &dirs,
                eps,
                Want::Below(lvl + 0.5),
            );
            let b = check_displacements(
                "closed ball outside V_{j+3} misses V_{j+2}",
                &eta,
                &eta,
                v,
                &outer,
                &dirs,
                eps,
                Want::AtLeast(lvl + 2.0),
            );
            if a.passed() && b.passed() {
                state.eps_seq.push(EpsilonChoice {
                    level: j,
                    eps,
                    upper_bound: bound,
                    halvings,
                    checks: vec![a, b],
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
    let psi1 = psi_f64(1.0).0;
    state.weights = (1..=k_terms).map(|j| j as f64 / psi1).collect();
    assemble(v, spec, &state)
}

pub(super) fn assemble(v: &Domain<f64>, spec: &GaussianSpec<f64>, state: &PipelineState) -> Result<ConstructedField> {
    let eta = lipschitz_exhaustion(v, state.c0);
    let opts = state.mollifier.clone().unwrap_or_default();
    let samples = KernelSamples::draw(spec, &opts)?;
    let mut terms = Vec::new();
    let mut parts = Vec::new();
    for j in 1..=state.truncation_k {
        let eps = state.eps_seq[j - 1].eps;
        let shift = state.lipschitz_table[j - 1].c * eps + 2.0 - j as f64;
        let weight = state.weights[j - 1];
        let g = cutoff_product(&eta, v, j as f64 + 1.0);
        let eta_j = mollify_with(&g, eps, &state.kit, &samples, opts.normalization)
            .with_label(format!("eta_{j}"));
        let inner = eta_j.clone();
        terms.push(
            ScalarField::new(format!("Psi term {j}"), move |z: &CVec<f64>| {
                weight * psi_f64(inner.eval(z) + shift).0
            })
            .with_provenance(Provenance::Pipeline {
                stage: "smooth_Psi".into(),
                k: j,
            }),
        );
        parts.push(eta_j);
    }
    let field = sum_field(format!("smooth exhaustion on {} (K={})", v.name(), terms.len()), &terms)
        .with_provenance(Provenance::Pipeline {
            stage: "smooth_Psi".into(),
            k: state.truncation_k,
        });
    Ok(ConstructedField {
        field,
        terms,
        parts,
        base: eta,
        state: state.clone(),
    })
}
