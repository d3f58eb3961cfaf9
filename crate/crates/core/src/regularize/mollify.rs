//! Gaussian mollification `f_ε(z) = ∫ f(z − εζ) ϑ(ζ) dP(ζ)` with common random
//! numbers.
//!
//! The sample set is drawn once per returned field, so `f_ε` is a fixed
//! smooth function of `z` (a finite weighted sum of translates of `f`), not a
//! noisy estimator. Each base sample is used together with its rotations
//! `e^{2πi m/M} ζ` (`P` and `ϑ` are rotation invariant); this cancels all
//! odd moments exactly, so linear functions are reproduced without error.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::cutoff::kernel;
use super::kit::CutoffKit;
use crate::error::{Error, Result};
use crate::field::{Provenance, ScalarField};
use crate::scalar::Real;
use crate::space::{streams, CVec, GaussianSpec};

/// How the weighted sum is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `(1/N) Σ f(z − εζ_k) ϑ(ζ_k)`, estimating `∫ f(z − εζ) ϑ dP`.
    Raw,
    /// The raw estimate multiplied by the kit constant `c`.
    Kit,
    /// `Σ f(z − εζ_k) ϑ_k / Σ ϑ_k`: the `c`-normalized kernel with `c`
    /// estimated on the same samples, which maps constants to themselves
    /// exactly.
    SelfNormalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifyOptions {
    pub base_samples: usize,
    pub rotations: usize,
    pub normalization: Normalization,
    /// Sub-stream selecting an independent frozen sample set.
    pub stream: u64,
}

impl Default for MollifyOptions {
    fn default() -> Self {
        Self {
            base_samples: 256,
            rotations: 4,
            normalization: Normalization::SelfNormalized,
            stream: 0,
        }
    }
}

/// The frozen kernel samples: offsets with `ϑ > 0` and their weights.
#[derive(Clone, Debug)]
pub struct KernelSamples<T> {
    pub offsets: Vec<CVec<T>>,
    pub weights: Vec<T>,
    /// Total number of draws, including those with `ϑ = 0`.
    pub draws: usize,
}

impl<T: Real> KernelSamples<T> {
    pub fn draw(spec: &GaussianSpec<T>, opts: &MollifyOptions) -> Result<Self> {
        if opts.base_samples == 0 || opts.rotations == 0 {
            return Err(Error::InvalidParameter("mollifier needs samples and rotations".into()));
        }
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let stream = streams::sub(streams::MOLLIFIER, opts.stream);
        for zeta in spec.sampler(stream, 0).take(opts.base_samples) {
            let w = kernel(&zeta);
            if w <= T::zero() {
                continue;
            }
            for m in 0..opts.rotations {
                let th = T::TAU() * T::from_count(m) / T::from_count(opts.rotations);
                offsets.push(zeta.scale_complex(Complex::new(th.cos(), th.sin())));
                weights.push(w);
            }
        }
        Ok(Self {
            offsets,
            weights,
            draws: opts.base_samples * opts.rotations,
        })
    }

    pub fn weight_sum(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, &w| s + w)
    }

    /// The largest offset norm (`< 1` since `ϑ` vanishes outside the unit ball).
    pub fn max_offset(&self) -> T {
        self.offsets.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

/// Returns the mollified field `f_ε`.
pub fn mollify<T: Real>(
    f: &ScalarField<T>,
    eps: T,
    kit: &CutoffKit,
    spec: &GaussianSpec<T>,
    opts: &MollifyOptions,
) -> Result<ScalarField<T>> {
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("mollifier radius must be positive, got {eps}")));
    }
    let samples = KernelSamples::draw(spec, opts)?;
    Ok(mollify_with(f, eps, kit, &samples, opts.normalization))
}

/// As [`mollify`] with an explicit frozen sample set.
pub fn mollify_with<T: Real>(
    f: &ScalarField<T>,
    eps: T,
    kit: &CutoffKit,
    samples: &KernelSamples<T>,
    normalization: Normalization,
) -> ScalarField<T> {
    let denom = match normalization {
        Normalization::Raw => T::from_count(samples.draws),
        Normalization::Kit => T::from_count(samples.draws) / T::c(kit.c),
        Normalization::SelfNormalized => samples.weight_sum(),
    };
    let shifts: Vec<CVec<T>> = samples.offsets.iter().map(|z| z.scale(-eps)).collect();
    let weights: Vec<T> = samples.weights.iter().map(|&w| w / denom).collect();
    let inner = f.clone();
    ScalarField::new(format!("mollified({}, eps={eps})", f.label()), move |z: &CVec<T>| {
        let mut acc = T::zero();
        for (s, &w) in shifts.iter().zip(&weights) {
            acc = acc + w * inner.eval(&(z + s));
        }
        acc
    })
    .with_provenance(Provenance::Mollified { eps: eps.f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (GaussianSpec<f64>, CutoffKit) {
        let spec = GaussianSpec::geometric(2, 4).unwrap();
        let kit = CutoffKit::new(&spec, 50_000).unwrap();
        (spec, kit)
    }

    #[test]
    fn constants() {
        let (spec, kit) = setup();
        let z = CVec::from_re(&[0.1, 0.2]);
        let raw = MollifyOptions {
            normalization: Normalization::Raw,
            ..MollifyOptions::default()
        };
        let f = mollify(&ScalarField::constant(5.0), 0.1, &kit, &spec, &raw).unwrap();
        let s = KernelSamples::draw(&spec, &raw).unwrap();
        assert!((f.eval(&z) - 5.0 * s.weight_sum() / s.draws as f64).abs() < 1e-12);
        let f = mollify(&ScalarField::constant(5.0), 0.1, &kit, &spec, &MollifyOptions::default()).unwrap();
        assert!((f.eval(&z) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fields_are_reproduced() {
        let (spec, kit) = setup();
        let f = mollify(&ScalarField::re_coord(0), 0.2, &kit, &spec, &MollifyOptions::default()).unwrap();
        for x in [-0.3, 0.0, 0.7] {
            let z = CVec::from_pairs(&[(x, 0.1), (0.2, -0.4)]);
            assert!((f.eval(&z) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_radius() {
        let (spec, kit) = setup();
        assert!(mollify(&ScalarField::norm(), 0.0, &kit, &spec, &MollifyOptions::default()).is_err());
    }
}
