//! The Lasry–Lions inf-convolution `U_t g(z) = inf_ζ { g(ζ) + ‖z − ζ‖²/(2t) }`.
//!
//! The infimum is computed by multi-start projected gradient descent on the
//! ball `B(z, R)`, `R = search_radius`, which contains every minimizer when
//! `R ≥ √(4 t sup|g|)`. Start offsets are drawn once, so the returned field is
//! deterministic. The computed value is always an upper bound on the true
//! infimum (it is attained at a feasible point), and never exceeds `g(z)`
//! because `z` itself is one of the starts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Provenance, ScalarField};
use crate::scalar::Real;
use crate::space::{streams, CVec, GaussianSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub t: f64,
    pub search_radius: f64,
    pub starts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Certified (sampled) bound on `sup |g|`.
    pub sup_f: f64,
    /// `g ≥ 0`: lets the solver return `0` immediately where `g(z) = 0`.
    pub nonnegative: bool,
}

impl EnvelopeSpec {
    /// Parameter `t` for a field bounded by `sup_f`, with the minimal
    /// admissible search radius.
    pub fn new(t: f64, sup_f: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("envelope parameter must be positive, got {t}")));
        }
        if !(sup_f >= 0.0 && sup_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("sup|f| must be finite, got {sup_f}")));
        }
        Ok(Self {
            t,
            search_radius: (4.0 * t * sup_f).sqrt() * (1.0 + 1e-9) + 1e-12,
            starts: 16,
            max_iter: 500,
            grad_tol: 1e-8,
            sup_f,
            nonnegative: false,
        })
    }

    pub fn nonnegative(mut self, yes: bool) -> Self {
        self.nonnegative = yes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.search_radius < (4.0 * self.t * self.sup_f).sqrt() {
            return Err(Error::InvalidParameter(
                "search radius below sqrt(4 t sup|f|)".into(),
            ));
        }
        if self.starts == 0 {
            return Err(Error::InvalidParameter("envelope solver needs a start".into()));
        }
        Ok(())
    }
}

/// Value of the envelope at a point with solver diagnostics.
#[derive(Clone, Debug)]
pub struct EnvelopeEval<T> {
    pub value: T,
    pub minimizer: CVec<T>,
    /// Norm of the projected gradient at the reported minimizer.
    pub grad_norm: T,
    /// Estimated excess of the reported value over the local minimum.
    pub gap_estimate: T,
    pub iterations: usize,
    pub converged: bool,
}

/// A frozen solver for `U_t g`.
#[derive(Clone)]
pub struct Envelope<T> {
    f: ScalarField<T>,
    spec: EnvelopeSpec,
    offsets: Vec<CVec<T>>,
    fd_step: T,
}

impl<T: Real> Envelope<T> {
    pub fn new(f: &ScalarField<T>, env: &EnvelopeSpec, gauss: &GaussianSpec<T>) -> Result<Self> {
        env.validate()?;
        let n = gauss.truncation();
        let r = T::c(env.search_radius);
        let sigma = r * T::c(0.5) / T::from_count(2 * n).sqrt();
        let mut src = crate::space::NormalSource::new(gauss.seed, streams::ENVELOPE, 0);
        let offsets = (1..env.starts)
            .map(|_| {
                let e: Vec<_> = (0..n)
                    .map(|_| {
                        let (a, b) = src.normal_pair();
                        num_complex::Complex::new(T::c(a) * sigma, T::c(b) * sigma)
                    })
                    .collect();
                let v = CVec::from_entries(e);
                let len = v.norm();
                if len > r {
                    v.scale(r / len)
                } else {
                    v
                }
            })
            .collect();
        Ok(Self {
            f: f.clone(),
            spec: env.clone(),
            offsets,
            fd_step: T::c(1e-7),
        })
    }

    pub fn spec(&self) -> &EnvelopeSpec {
        &self.spec
    }

    /// Real-coordinate gradient of `g`, packed as `g_x + i g_y = 2 ∂̄g`.
    fn grad_f(&self, z: &CVec<T>) -> CVec<T> {
        if let Some(d) = self.f.dbar(z) {
            let two = T::c(2.0);
            return CVec::from_entries(d.into_iter().map(|c| c * two).collect());
        }
        let x = z.to_real();
        let h = self.fd_step * (T::one() + z.norm());
        let g: Vec<T> = (0..x.len())
            .map(|k| {
                let mut p = x.clone();
                p[k] = p[k] + h;
                let mut m = x.clone();
                m[k] = m[k] - h;
                (self.f.eval(&CVec::from_real(&p)) - self.f.eval(&CVec::from_real(&m))) / (T::c(2.0) * h)
            })
            .collect();
        CVec::from_real(&g)
    }

    fn project(&self, z: &CVec<T>, p: CVec<T>) -> CVec<T> {
        let r = T::c(self.spec.search_radius);
        let d = &p - z;
        let len = d.norm();
        if len > r {
            z + &d.scale(r / len)
        } else {
            p
        }
    }

    fn descend(&self, z: &CVec<T>, start: CVec<T>) -> EnvelopeEval<T> {
        let t = T::c(self.spec.t);
        let inv2t = T::one() / (T::c(2.0) * t);
        let phi = |p: &CVec<T>| self.f.eval(p) + (p - z).norm_sqr() * inv2t;
        let mut x = start;
        let mut fx = phi(&x);
        let mut step = t;
        let mut gnorm = T::infinity();
        let mut it = 0;
        let tol = T::c(self.spec.grad_tol);
        let mut stalled_at_rounding = false;
        while it < self.spec.max_iter {
            it += 1;
            let g = &self.grad_f(&x) + &(&x - z).scale(T::one() / t);
            // Projected gradient at unit step scale t.
            let probe = self.project(z, x.axpy(num_complex::Complex::new(-t, T::zero()), &g));
            let moved = (&x - &probe).norm();
            gnorm = moved / t;
            // For tiny t the step drops to rounding level before gnorm can.
            if !(gnorm > tol) || moved <= T::c(8.0 * f64::EPSILON) * (T::one() + x.norm()) {
                stalled_at_rounding = gnorm > tol;
                break;
            }
            let mut accepted = false;
            let mut s = (step * T::c(2.0)).min(t * T::c(4.0));
            for _ in 0..60 {
                let y = self.project(z, x.axpy(num_complex::Complex::new(-s, T::zero()), &g));
                let fy = phi(&y);
                let decrease = (&x - &y).norm_sqr() / s;
                if fy <= fx - T::c(1e-4) * decrease {
                    stalled_at_rounding = fx - fy <= T::c(4.0 * f64::EPSILON) * (T::one() + fx.abs());
                    x = y;
                    fx = fy;
                    step = s;
                    accepted = true;
                    break;
                }
                s = s * T::c(0.5);
            }
            if !accepted || stalled_at_rounding {
                break;
            }
        }
        let converged = !(gnorm > tol) || stalled_at_rounding;
        let gap = (t * gnorm * gnorm * T::c(0.5)).max(T::c(1e-12) * (T::one() + fx.abs()));
        EnvelopeEval {
            value: fx,
            minimizer: x,
            grad_norm: gnorm,
            gap_estimate: gap,
            iterations: it,
            converged,
        }
    }

    /// Evaluates `U_t g(z)` with diagnostics.
    pub fn eval_detailed(&self, z: &CVec<T>) -> EnvelopeEval<T> {
        let fz = self.f.eval(z);
        if self.spec.nonnegative && fz == T::zero() {
            return EnvelopeEval {
                value: T::zero(),
                minimizer: z.clone(),
                grad_norm: T::zero(),
                gap_estimate: T::zero(),
                iterations: 0,
                converged: true,
            };
        }
        let mut best = self.descend(z, z.clone());
        for off in &self.offsets {
            let cand = self.descend(z, z + off);
            if cand.value < best.value {
                best = cand;
            }
        }
        best
    }

    pub fn eval(&self, z: &CVec<T>) -> T {
        self.eval_detailed(z).value
    }

    pub fn field(&self) -> ScalarField<T> {
        let me = self.clone();
        ScalarField::new(
            format!("envelope({}, t={})", self.f.label(), self.spec.t),
            move |z| me.eval(z),
        )
        .with_provenance(Provenance::Envelope { t: self.spec.t })
    }
}

/// Returns `U_t f` as a field.
pub fn lasry_lions<T: Real>(
    f: &ScalarField<T>,
    env: &EnvelopeSpec,
    gauss: &GaussianSpec<T>,
) -> Result<ScalarField<T>> {
    Ok(Envelope::new(f, env, gauss)?.field())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_fixed() {
        let g = GaussianSpec::geometric(2, 1).unwrap();
        let env = EnvelopeSpec::new(0.5, 3.0).unwrap();
        let u = lasry_lions(&ScalarField::constant(3.0), &env, &g).unwrap();
        assert_eq!(u.eval(&CVec::from_re(&[0.3, 0.1])), 3.0);
    }

    #[test]
    fn quadratic_has_closed_form() {
        let g = GaussianSpec::geometric(2, 1).unwrap();
        // On a ball of radius 3 the minimizer z/(1+2t) is interior.
        let env = EnvelopeSpec::new(0.5, 9.0).unwrap();
        let u = lasry_lions(&ScalarField::<f64>::norm_sqr(), &env, &g).unwrap();
        let z = CVec::from_pairs(&[(0.6, 0.0), (0.0, 0.8)]);
        assert!((u.eval(&z) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn radius_invariant_is_checked() {
        let mut env = EnvelopeSpec::new(0.5, 4.0).unwrap();
        env.search_radius = 0.1;
        assert!(env.validate().is_err());
    }
}
