use serde::{Deserialize, Serialize};

use super::cutoff::{compute_k0, kernel};
use super::psi::eval_psi;
use crate::error::Result;
use crate::field::ScalarField;
use crate::scalar::Real;
use crate::space::{integrate_stream, streams, GaussianSpec};

/// Constants of the auxiliary functions for one Gaussian measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffKit {
    /// Default threshold of `𝓘_τ` (constructions pass their own).
    pub tau: f64,
    /// `max |𝓘′_τ|`, independent of `τ`.
    pub k0: f64,
    /// `c = (∫ ϑ dP)^{−1}`.
    pub c: f64,
    /// Standard error of `c` (delta method).
    pub c_std_error: f64,
    /// `∫ ϑ dP = ∫ |ϑ| dP`.
    pub theta_integral: f64,
    pub theta_samples: usize,
    /// `(ψ, ψ′, ψ″)(1)`.
    pub psi_at_one: [f64; 3],
}

impl CutoffKit {
    pub const DEFAULT_BUDGET: usize = 1_000_000;

    /// Estimates `c` with `budget` samples on the normalization stream.
    pub fn new<T: Real>(spec: &GaussianSpec<T>, budget: usize) -> Result<Self> {
        let s = spec.clone().with_budget(budget);
        let f = ScalarField::new("theta kernel", |z| kernel(z));
        let est = integrate_stream(&f, &s, streams::NORMALIZATION)?;
        let m = est.estimate.f64();
        let se = est.std_error.f64();
        let (p, p1, p2) = eval_psi(1.0f64);
        Ok(Self {
            tau: 0.0,
            k0: compute_k0(),
            c: 1.0 / m,
            c_std_error: se / (m * m),
            theta_integral: m,
            theta_samples: est.samples,
            psi_at_one: [p, p1, p2],
        })
    }

    /// Relative uncertainty of `c`.
    pub fn c_rel_error(&self) -> f64 {
        self.c_std_error / self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kit_constants() {
        let spec = GaussianSpec::<f64>::geometric(3, 11).unwrap();
        let kit = CutoffKit::new(&spec, 100_000).unwrap();
        assert!(kit.c > 1.0 && kit.c < 1.5);
        assert!(kit.c_rel_error() < 1e-2);
        assert!(kit.k0 > 1.7 && kit.k0 < 1.8);
    }
}
