//! Selected constants of a construction, and the field it produced.

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::regularize::{CutoffKit, EnvelopeSpec, MollifyOptions};
use crate::space::{CVec, GaussianSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "lipschitz_eta")]
    LipschitzEta,
    #[serde(rename = "smooth_Psi")]
    SmoothPsi,
    #[serde(rename = "semi_anti_Psi")]
    SemiAntiPsi,
    #[serde(rename = "psh_eta")]
    PshEta,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::LipschitzEta => "lipschitz_eta",
            Stage::SmoothPsi => "smooth_Psi",
            Stage::SemiAntiPsi => "semi_anti_Psi",
            Stage::PshEta => "psh_eta",
        }
    }
}

/// `C(t)`: Lipschitz and size bound of the base field on a sublevel set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelConstant {
    #[serde(with = "crate::report::float")]
    pub t: f64,
    #[serde(with = "crate::report::float")]
    pub c: f64,
    /// Unscaled sampled Lipschitz estimate.
    #[serde(with = "crate::report::float")]
    pub lipschitz: f64,
    #[serde(with = "crate::report::float")]
    pub sup: f64,
    pub samples: usize,
}

/// One sampled inclusion check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub samples: usize,
    /// Smallest margin seen; negative means the check failed.
    #[serde(with = "crate::report::float")]
    pub worst_margin: f64,
    pub offender: Option<Vec<[f64; 2]>>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        !(self.worst_margin <= 0.0) || self.samples == 0
    }
}

/// A mollification radius and the checks that validated it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChoice {
    pub level: usize,
    #[serde(with = "crate::report::float")]
    pub eps: f64,
    #[serde(with = "crate::report::float")]
    pub upper_bound: f64,
    pub halvings: usize,
    pub checks: Vec<CheckSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    #[serde(with = "crate::report::float")]
    pub t: f64,
    #[serde(with = "crate::report::float")]
    pub lambda: f64,
    pub samples: usize,
}

/// Envelope parameter of one term of the semi-anti-psh series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeChoice {
    pub level: usize,
    pub envelope: EnvelopeSpec,
    /// Table value `w(2√(t·sup))`, the admitted drop of the envelope.
    #[serde(with = "crate::report::float")]
    pub modulus_gap: f64,
    pub halvings: usize,
    /// Smallest `U − (g − 1)` over the sandwich points.
    #[serde(with = "crate::report::float")]
    pub sandwich_margin: f64,
    pub sandwich_samples: usize,
}

/// Sampled infimum of a Hessian quadratic form along the dimension sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianInfimum {
    pub k: usize,
    #[serde(with = "crate::report::float")]
    pub s: f64,
    #[serde(with = "crate::report::float::pairs")]
    pub per_dim: Vec<(usize, f64)>,
    pub samples: usize,
    pub location: Option<Vec<[f64; 2]>>,
}

/// Semi-anti-psh parameter of `−ϱ_j` on a sublevel of `Ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiAntiConstant {
    pub j: usize,
    pub k: usize,
    #[serde(with = "crate::report::float")]
    pub c: f64,
    #[serde(with = "crate::report::float::pairs")]
    pub per_dim: Vec<(usize, f64)>,
    pub samples: usize,
}

/// Sampled check of `ϱ ≤ ϱ_j ≤ ϱ + 1` and of the Hessian of `ϱ_j − ε_j‖z‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichSummary {
    pub j: usize,
    pub samples: usize,
    /// `min (ϱ_j − ϱ)`.
    #[serde(with = "crate::report::float")]
    pub lower_margin: f64,
    /// `min (ϱ + 1 − ϱ_j)`.
    #[serde(with = "crate::report::float")]
    pub upper_margin: f64,
    #[serde(with = "crate::report::float")]
    pub tolerance: f64,
    /// Smallest eigenvalue of the Hessian of `ϱ_j − ε_j‖z‖²` at the Hessian points.
    #[serde(with = "crate::report::float")]
    pub min_eigenvalue: f64,
    pub hessian_samples: usize,
}

/// Everything a construction selected. Together with the domain and the
/// Gaussian measure it determines the constructed field, which
/// [`super::rebuild`] reassembles without repeating any selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub stage: Stage,
    pub domain: String,
    pub dim: usize,
    pub seed: u64,
    #[serde(with = "crate::report::float")]
    pub c0: f64,
    pub kit: CutoffKit,
    pub lipschitz_table: Vec<LevelConstant>,
    pub eps_seq: Vec<EpsilonChoice>,
    pub lambda_table: Vec<LambdaEntry>,
    pub t_seq: Vec<EnvelopeChoice>,
    pub alpha_seq: Vec<f64>,
    pub s_seq: Vec<HessianInfimum>,
    pub c_jk: Vec<SemiAntiConstant>,
    pub step3: Vec<SandwichSummary>,
    /// Series weights (`sup_{V_j} η / ψ(1)` bounds or `j/ψ(1)`).
    pub weights: Vec<f64>,
    pub truncation_k: usize,
    /// Finite-difference step suited to the finest scale of the field.
    #[serde(with = "crate::report::float")]
    pub fd_step: f64,
    pub mollifier: Option<MollifyOptions>,
    #[serde(with = "crate::report::float")]
    pub safety: f64,
    /// The semi-anti-psh stage feeding a psh construction.
    pub semi_anti: Option<Box<PipelineState>>,
}

impl PipelineState {
    pub fn new(stage: Stage, v: &Domain<f64>, spec: &GaussianSpec<f64>, kit: &CutoffKit, c0: f64) -> Self {
        Self {
            stage,
            domain: v.name().to_string(),
            dim: spec.truncation(),
            seed: spec.seed,
            c0,
            kit: kit.clone(),
            lipschitz_table: Vec::new(),
            eps_seq: Vec::new(),
            lambda_table: Vec::new(),
            t_seq: Vec::new(),
            alpha_seq: Vec::new(),
            s_seq: Vec::new(),
            c_jk: Vec::new(),
            step3: Vec::new(),
            weights: Vec::new(),
            truncation_k: 0,
            fd_step: 1e-4,
            mollifier: None,
            safety: 2.0,
            semi_anti: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state is plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("pipeline state: {e}")))
    }

    /// `λ(t)` from the recorded table: exact at tabulated `t`, the next
    /// tabulated value in between (an upper bound, since `λ` increases), and
    /// `None` beyond the table.
    pub fn lambda(&self, t: f64) -> Option<f64> {
        self.lambda_table
            .iter()
            .find(|e| e.t >= t)
            .map(|e| e.lambda.max(t + 1.0))
    }

    pub(crate) fn check_compatible(&self, v: &Domain<f64>, spec: &GaussianSpec<f64>) -> Result<()> {
        if self.domain != v.name() || self.dim != spec.truncation() || self.seed != spec.seed {
            return Err(Error::Config(format!(
                "state was built for {} (n={}, seed={}), not {} (n={}, seed={})",
                self.domain,
                self.dim,
                self.seed,
                v.name(),
                spec.truncation(),
                spec.seed
            )));
        }
        Ok(())
    }
}

/// A constructed field with its series terms and the recorded constants.
#[derive(Clone, Debug)]
pub struct ConstructedField {
    /// The truncated series (or, for the Lipschitz stage, the base field).
    pub field: ScalarField<f64>,
    /// The individual series terms; `field` is their sum.
    pub terms: Vec<ScalarField<f64>>,
    /// The regularized building blocks (`η_j`, `U_{t_j}(I_jη)` or `ϱ_j`).
    pub parts: Vec<ScalarField<f64>>,
    /// The Lipschitz exhaustion the construction started from.
    pub base: ScalarField<f64>,
    pub state: PipelineState,
}

impl ConstructedField {
    pub fn stage(&self) -> Stage {
        self.state.stage
    }

    pub fn truncation(&self) -> usize {
        self.terms.len()
    }

    /// Sum of the first `k` terms.
    pub fn partial_sum(&self, k: usize, z: &CVec<f64>) -> f64 {
        self.terms.iter().take(k).map(|t| t.eval(z)).sum()
    }

    /// `max(field, base)`: equals the full series wherever the truncation is
    /// exact and lies below it everywhere (the series dominates `base` and
    /// only gains non-negative terms), so its sublevel sets contain those of
    /// the full series.
    pub fn lower_envelope(&self) -> ScalarField<f64> {
        let (f, b) = (self.field.clone(), self.base.clone());
        ScalarField::new(format!("max({}, base)", self.field.label()), move |z| {
            let fb = b.eval(z);
            if !fb.is_finite() {
                return fb;
            }
            f.eval(z).max(fb)
        })
    }
}
