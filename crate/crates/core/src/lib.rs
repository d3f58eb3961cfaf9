//! Smooth plurisubharmonic exhaustion functions on pseudo-convex domains of
//! ℓ², realized at a finite truncation `n` and checked numerically.
//!
//! The building blocks are generic over the scalar type (any [`scalar::Real`],
//! in practice `f64` or `f32`):
//!
//! - [`space`]: truncated ℓ² vectors and the Gaussian product measure;
//! - [`domain`]: catalog domains with exact or numerical boundary distances
//!   and seeded rejection sampling;
//! - [`calculus`]: Wirtinger derivatives, mixed complex Hessians and the
//!   sampled certifiers (plurisubharmonicity, semi-anti-plurisubharmonicity,
//!   exhaustion);
//! - [`regularize`]: the smooth cutoff, the Gaussian mollifier and the
//!   Lasry–Lions envelope.
//!
//! The constructions in [`exhaustion`] and the run harness in [`harness`] are
//! `f64`. The aliases below fix the scalar to `f64`.
//!
//! ```
//! use plurisub::{Domain, GaussianSpec, CVec};
//! use plurisub::exhaustion::lipschitz_exhaustion;
//!
//! let v = Domain::unit_ball();
//! let spec = GaussianSpec::geometric(2, 7).unwrap();
//! let eta = lipschitz_exhaustion(&v, 1.0);
//! assert!(eta.eval(&CVec::from_re(&[0.5, 0.0])) > eta.eval(&CVec::zeros(spec.truncation())));
//! ```

pub mod calculus;
pub mod domain;
pub mod error;
pub mod exhaustion;
pub mod field;
pub mod harness;
pub mod regularize;
pub mod report;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};
pub use report::{CertificationReport, Record};

pub type CVec = space::CVec<f64>;
pub type GaussianSpec = space::GaussianSpec<f64>;
pub type Domain = domain::Domain<f64>;
pub type ScalarField = field::ScalarField<f64>;
pub type HessianForm = calculus::HessianForm<f64>;
pub type PshPlan = calculus::PshPlan<f64>;
pub type ExhaustionPlan = calculus::ExhaustionPlan<f64>;
pub type Envelope = regularize::Envelope<f64>;
pub type KernelSamples = regularize::KernelSamples<f64>;
