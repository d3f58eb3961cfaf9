//! The run configuration: a versioned TOML file.
//!
//! ```toml
//! schema_version = 1
//!
//! [domain]
//! name = "ball"
//! radius = 1.0
//!
//! [gaussian]
//! truncation = 2
//! seed = 7
//!
//! [pipeline]
//! stage = "psh_eta"
//! series_k = 4
//!
//! [certify]
//! psh = true
//! exhaustion = true
//! ```

use serde::{Deserialize, Serialize};

use crate::calculus::ToleranceMode;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::exhaustion::{PshOptions, SemiAntiOptions, SmoothOptions, Stage};
use crate::space::{CVec, GaussianSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub domain: DomainConfig,
    pub gaussian: GaussianConfig,
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A catalog domain with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Ball {
        #[serde(default = "one")]
        radius: f64,
        /// `(re, im)` pairs; the origin when omitted.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        center: Vec<[f64; 2]>,
    },
    Polydisc {
        radii: Vec<f64>,
    },
    HalfspaceIntersection {
        normals: Vec<Vec<[f64; 2]>>,
        offsets: Vec<f64>,
    },
    HartogsWedge {
        #[serde(default = "one")]
        radius: f64,
    },
    FullSpace,
    HollowedBall {
        #[serde(default = "one")]
        outer: f64,
        inner: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DomainConfig {
    pub fn build(&self) -> Result<Domain<f64>> {
        match self {
            DomainConfig::Ball { radius, center } => {
                if center.is_empty() {
                    Domain::ball(CVec::zeros(1), *radius)
                } else {
                    let c: Vec<(f64, f64)> = center.iter().map(|p| (p[0], p[1])).collect();
                    Domain::ball(CVec::from_pairs(&c), *radius)
                }
            }
            DomainConfig::Polydisc { radii } => Domain::polydisc(radii.clone()),
            DomainConfig::HalfspaceIntersection { normals, offsets } => {
                let ns = normals
                    .iter()
                    .map(|n| CVec::from_pairs(&n.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()))
                    .collect();
                Domain::halfspace_intersection(ns, offsets.clone())
            }
            DomainConfig::HartogsWedge { radius } => Domain::hartogs_wedge(*radius),
            DomainConfig::FullSpace => Ok(Domain::full_space()),
            DomainConfig::HollowedBall { outer, inner } => Domain::hollowed_ball(*outer, *inner),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    pub truncation: usize,
    pub seed: u64,
    /// Explicit `a_i`; the geometric rule `a_i = 2^{−(i+1)}` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_budget")]
    pub sample_budget: usize,
    /// Samples for the kernel normalization constant `c`.
    #[serde(default = "default_kit_budget")]
    pub kit_budget: usize,
}

fn default_budget() -> usize {
    GaussianSpec::<f64>::DEFAULT_BUDGET
}

fn default_kit_budget() -> usize {
    200_000
}

impl GaussianConfig {
    pub fn build(&self) -> Result<GaussianSpec<f64>> {
        let spec = match &self.weights {
            Some(w) => {
                if w.len() != self.truncation {
                    return Err(Error::Config(format!(
                        "{} weights given for truncation {}",
                        w.len(),
                        self.truncation
                    )));
                }
                GaussianSpec::new(w.clone(), self.seed, self.sample_budget)?
            }
            None => GaussianSpec::geometric(self.truncation, self.seed)?.with_budget(self.sample_budget),
        };
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub stage: Stage,
    /// Number of series terms (`J + 2` for the smooth stage's `J`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_k: Option<usize>,
    /// Limit on halvings of each `ε_j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_halvings: Option<usize>,
    /// Limit on halvings in the search for each `t_j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisection_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety: Option<f64>,
    #[serde(default)]
    pub smooth: SmoothOptions,
    #[serde(default)]
    pub semi_anti: SemiAntiOptions,
    #[serde(default)]
    pub psh: PshOptions,
}

impl PipelineConfig {
    pub fn smooth_options(&self) -> SmoothOptions {
        let mut o = self.smooth.clone();
        if let Some(k) = self.series_k {
            o.levels = k.saturating_sub(2).max(1);
        }
        if let Some(h) = self.eps_halvings {
            o.max_halvings = h;
        }
        if let Some(s) = self.safety {
            o.safety = s;
        }
        o
    }

    pub fn semi_anti_options(&self) -> SemiAntiOptions {
        let mut o = self.semi_anti.clone();
        if let Some(k) = self.series_k {
            o.levels = k;
        }
        if let Some(h) = self.bisection_depth {
            o.max_halvings = h;
        }
        o
    }

    pub fn psh_options(&self) -> PshOptions {
        let mut o = self.psh.clone();
        if let Some(k) = self.series_k {
            o.levels = k;
        }
        if let Some(h) = self.eps_halvings {
            o.max_halvings = h;
        }
        if let Some(h) = self.bisection_depth {
            o.semi_anti.max_halvings = h;
        }
        if let Some(s) = self.safety {
            o.safety = s;
        }
        o
    }
}

/// Which certifiers run, and with what budgets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub psh: bool,
    pub exhaustion: bool,
    pub semi_anti: bool,
    /// Stage-specific sandwich, domination and truncation checks.
    pub construction: bool,
    /// Points per construction check.
    pub construction_points: usize,
    /// Points of the plurisubharmonicity and semi-anti-psh certificates.
    pub points: usize,
    pub directions: usize,
    pub radii: Vec<f64>,
    pub nodes: usize,
    pub circle_tol: f64,
    pub hessian_tol: f64,
    pub tolerance_mode: ToleranceMode,
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
    pub levels: Vec<f64>,
    /// Further exhaustion levels, given as quantiles of the field over the
    /// certified region (so that the sublevel sets are not empty).
    pub level_quantiles: Vec<f64>,
    pub exhaustion_samples: usize,
    /// Inner points and rays per point of the nested-sublevel check.
    pub nested_points: usize,
    pub nested_rays: usize,
    pub boundary_probes: usize,
    pub boundary_resolution: f64,
    /// Truncations `n'` of the dimension sweep; `1..=n` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_sweep: Option<Vec<usize>>,
    /// Certification points are drawn from `{base < region_level}`; the
    /// stage's certified region when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_level: Option<f64>,
    /// Points along each ray of the `η`-profile table.
    pub ray_points: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            psh: false,
            exhaustion: true,
            semi_anti: false,
            construction: true,
            construction_points: 1000,
            points: 500,
            directions: 8,
            radii: vec![1e-2, 1e-3],
            nodes: 16,
            circle_tol: 1e-3,
            hessian_tol: 1e-3,
            tolerance_mode: ToleranceMode::Relative,
            tolerance_scale: 1.0,
            levels: vec![2.0, 4.0, 8.0],
            level_quantiles: Vec::new(),
            exhaustion_samples: 1000,
            nested_points: 200,
            nested_rays: 4,
            boundary_probes: 2000,
            boundary_resolution: 1e-4,
            dim_sweep: None,
            region_level: None,
            ray_points: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// Write plot-ready CSV tables next to the report.
    pub tables: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "plurisub-out".into(),
            tables: true,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    /// Checks everything that can be checked without running: the schema
    /// version, the domain parameters and the Gaussian weights.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.domain.build()?;
        let spec = self.gaussian.build()?;
        if let Some(d) = &self.certify.dim_sweep {
            if d.iter().any(|&k| k == 0 || k > spec.truncation()) {
                return Err(Error::Config(format!(
                    "dim_sweep {d:?} must lie in 1..={}",
                    spec.truncation()
                )));
            }
        }
        if !(self.certify.tolerance_scale > 0.0) {
            return Err(Error::Config("tolerance_scale must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str = r#"
schema_version = 1

[domain]
name = "ball"

[gaussian]
truncation = 2
seed = 7

[pipeline]
stage = "psh_eta"
series_k = 4

[certify]
psh = true
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(BALL).unwrap();
        assert_eq!(cfg.domain, DomainConfig::Ball { radius: 1.0, center: vec![] });
        assert!(cfg.certify.psh && cfg.certify.exhaustion);
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_toml(), cfg.to_toml());
    }

    #[test]
    fn weight_sum_is_a_config_error() {
        let text = BALL.replace("seed = 7", "seed = 7\nweights = [0.6, 0.5]");
        assert_eq!(RunConfig::parse(&text).unwrap_err(), Error::WeightSum { sum: 1.1 });
    }

    #[test]
    fn rejects_unknown_schema_and_fields() {
        assert!(RunConfig::parse(&BALL.replace("schema_version = 1", "schema_version = 2")).is_err());
        assert!(RunConfig::parse(&BALL.replace("series_k = 4", "series_q = 4")).is_err());
    }
}
