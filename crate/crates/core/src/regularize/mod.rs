//! Auxiliary functions and regularizations: the cutoff `𝓘_τ`, the kernel
//! `ϑ`, the auxiliary `ψ`, Gaussian mollification and Lasry–Lions envelopes.

pub mod cutoff;
pub mod envelope;
pub mod kit;
pub mod modulus;
pub mod mollify;
pub mod psi;

pub use cutoff::{compute_k0, eval_cutoff, eval_cutoff_deriv, kernel, smoothstep, theta};
pub use envelope::{lasry_lions, Envelope, EnvelopeEval, EnvelopeSpec};
pub use kit::CutoffKit;
pub use modulus::{estimate_modulus, ModulusOptions, ModulusTable};
pub use mollify::{mollify, mollify_with, KernelSamples, MollifyOptions, Normalization};
pub use psi::{eval_psi, psi, psi_f64};
