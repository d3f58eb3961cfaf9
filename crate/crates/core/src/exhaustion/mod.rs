//! The constructive pipelines: the Lipschitz exhaustion, a smooth exhaustion,
//! a Lipschitz semi-anti-plurisubharmonic exhaustion, and a smooth
//! plurisubharmonic exhaustion of a pseudo-convex domain.
//!
//! Every "for all z in a set" of the underlying arguments becomes a sampled
//! check whose sample count and worst margin are recorded in the
//! [`PipelineState`]. The state holds every selected constant, so
//! [`rebuild`] can reassemble the field later without repeating the
//! selection.

mod checks;
mod lipschitz;
mod psh;
pub mod sampling;
mod semi_anti;
mod smooth;
mod state;

pub use checks::{construction_checks, CheckPlan};
pub use lipschitz::{lipschitz_exhaustion, positivity_shift, sampled_infimum};
pub use psh::{lambda_of, psh_exhaustion, PshOptions};
pub use semi_anti::{semi_anti_psh_exhaustion, semi_anti_slices, SemiAntiOptions, SemiAntiPsi};
pub use smooth::{smooth_exhaustion, SmoothOptions};
pub use state::{
    CheckSummary, ConstructedField, EnvelopeChoice, EpsilonChoice, HessianInfimum, LambdaEntry, LevelConstant,
    PipelineState, SandwichSummary, SemiAntiConstant, Stage,
};

use crate::domain::Domain;
use crate::error::Result;
use crate::field::ScalarField;
use crate::regularize::{eval_cutoff, eval_cutoff_deriv};
use crate::space::{CVec, GaussianSpec};

/// `I_τ f = 𝓘_τ(f)·f` on `V`, extended by `0` off `V`. It vanishes where
/// `f ≥ τ + 1` and equals `f` where `f ≤ τ`. The `∂̄` is closed-form when `f`'s is.
pub fn cutoff_product(f: &ScalarField<f64>, v: &Domain<f64>, tau: f64) -> ScalarField<f64> {
    let (g, dom) = (f.clone(), v.clone());
    let out = ScalarField::new(format!("I_{tau}({})", f.label()), move |z: &CVec<f64>| {
        if !dom.contains(z) {
            return 0.0;
        }
        let e = g.eval(z);
        if e >= tau + 1.0 {
            0.0
        } else {
            eval_cutoff(tau, e) * e
        }
    });
    if !f.has_dbar() {
        return out;
    }
    let (g, dom) = (f.clone(), v.clone());
    out.with_dbar(move |z: &CVec<f64>| {
        let n = z.ambient_dim();
        if !dom.contains(z) {
            return vec![num_complex::Complex::new(0.0, 0.0); n];
        }
        let e = g.eval(z);
        if e >= tau + 1.0 {
            return vec![num_complex::Complex::new(0.0, 0.0); n];
        }
        let s = eval_cutoff_deriv(tau, e) * e + eval_cutoff(tau, e);
        g.dbar(z).unwrap_or_default().into_iter().map(|c| c * s).collect()
    })
}

/// Reassembles a constructed field from a recorded state.
pub fn rebuild(v: &Domain<f64>, spec: &GaussianSpec<f64>, state: &PipelineState) -> Result<ConstructedField> {
    state.check_compatible(v, spec)?;
    match state.stage {
        Stage::LipschitzEta => {
            let base = lipschitz_exhaustion(v, state.c0);
            Ok(ConstructedField {
                field: base.clone(),
                terms: vec![base.clone()],
                parts: Vec::new(),
                base,
                state: state.clone(),
            })
        }
        Stage::SmoothPsi => smooth::assemble(v, spec, state),
        Stage::SemiAntiPsi => semi_anti::assemble(v, spec, state),
        Stage::PshEta => psh::assemble(v, spec, state),
    }
}

/// The Lipschitz stage as a constructed field.
pub fn lipschitz_stage(
    v: &Domain<f64>,
    kit: &crate::regularize::CutoffKit,
    spec: &GaussianSpec<f64>,
    c0: f64,
) -> ConstructedField {
    let state = PipelineState::new(Stage::LipschitzEta, v, spec, kit, c0);
    rebuild(v, spec, &state).expect("a fresh state is compatible")
}

fn sum_field(label: String, terms: &[ScalarField<f64>]) -> ScalarField<f64> {
    let terms = terms.to_vec();
    ScalarField::new(label, move |z| terms.iter().map(|t| t.eval(z)).sum())
}
