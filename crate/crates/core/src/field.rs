//! Real-valued fields on truncated ℓ².

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::space::CVec;

pub type EvalFn<T> = dyn Fn(&CVec<T>) -> T + Send + Sync;
/// Returns `(∂̄_1 f, …, ∂̄_n f)`; for real `f`, `∂_j f` is the conjugate.
pub type DbarFn<T> = dyn Fn(&CVec<T>) -> Vec<Complex<T>> + Send + Sync;
/// Returns the row-major `n × n` matrix `H_{ij} = ∂_i ∂̄_j f`.
pub type HessFn<T> = dyn Fn(&CVec<T>) -> Vec<Complex<T>> + Send + Sync;

/// Where a field came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Raw,
    Mollified { eps: f64 },
    Envelope { t: f64 },
    Pipeline { stage: String, k: usize },
}

/// An evaluable field with optional closed-form Wirtinger derivatives.
#[derive(Clone)]
pub struct ScalarField<T> {
    label: Arc<str>,
    eval: Arc<EvalFn<T>>,
    dbar: Option<Arc<DbarFn<T>>>,
    hessian: Option<Arc<HessFn<T>>>,
    provenance: Provenance,
}

impl<T> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("provenance", &self.provenance)
            .field("closed_form_dbar", &self.dbar.is_some())
            .field("closed_form_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl<T: Real> ScalarField<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(&CVec<T>) -> T + Send + Sync + 'static) -> Self {
        Self {
            label: Arc::from(label.into()),
            eval: Arc::new(f),
            dbar: None,
            hessian: None,
            provenance: Provenance::Raw,
        }
    }

    pub fn with_dbar(
        mut self,
        g: impl Fn(&CVec<T>) -> Vec<Complex<T>> + Send + Sync + 'static,
    ) -> Self {
        self.dbar = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(
        mut self,
        h: impl Fn(&CVec<T>) -> Vec<Complex<T>> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Arc::from(label.into());
        self
    }

    #[inline]
    pub fn eval(&self, z: &CVec<T>) -> T {
        (self.eval)(z)
    }

    /// Evaluates and rejects non-finite values.
    pub fn try_eval(&self, z: &CVec<T>) -> Result<T> {
        let v = self.eval(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                what: self.label.to_string(),
                value: v.f64(),
                point: z.to_pairs(),
            })
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn has_dbar(&self) -> bool {
        self.dbar.is_some()
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    /// Closed-form `∂̄f(z)` if available.
    pub fn dbar(&self, z: &CVec<T>) -> Option<Vec<Complex<T>>> {
        self.dbar.as_ref().map(|g| g(z))
    }

    /// Closed-form mixed Hessian if available.
    pub fn hessian(&self, z: &CVec<T>) -> Option<Vec<Complex<T>>> {
        self.hessian.as_ref().map(|h| h(z))
    }

    // ---- a small library of analytic fields --------------------------------

    pub fn constant(c: T) -> Self {
        Self::new(format!("constant {c}"), move |_| c)
            .with_dbar(|z| vec![Complex::new(T::zero(), T::zero()); z.ambient_dim()])
            .with_hessian(|z| {
                let n = z.ambient_dim();
                vec![Complex::new(T::zero(), T::zero()); n * n]
            })
    }

    /// `‖z‖²`, with `∂̄_j = z_j` and Hessian the identity.
    pub fn norm_sqr() -> Self {
        Self::new("|z|^2", |z| z.norm_sqr())
            .with_dbar(|z| z.entries().to_vec())
            .with_hessian(|z| identity(z.ambient_dim()))
    }

    /// `‖z‖` (Lipschitz, not differentiable at 0).
    pub fn norm() -> Self {
        Self::new("|z|", |z| z.norm())
    }

    /// `Re z_i` (0-based index), pluriharmonic.
    pub fn re_coord(i: usize) -> Self {
        Self::new(format!("Re z{}", i + 1), move |z| z.get(i).re)
            .with_dbar(move |z| {
                let mut g = vec![Complex::new(T::zero(), T::zero()); z.ambient_dim().max(i + 1)];
                g[i] = Complex::new(T::c(0.5), T::zero());
                g
            })
            .with_hessian(|z| {
                let n = z.ambient_dim();
                vec![Complex::new(T::zero(), T::zero()); n * n]
            })
    }

    /// `|z_i|²`.
    pub fn modulus_sqr(i: usize) -> Self {
        Self::new(format!("|z{}|^2", i + 1), move |z| z.get(i).norm_sqr())
            .with_dbar(move |z| {
                let mut g = vec![Complex::new(T::zero(), T::zero()); z.ambient_dim().max(i + 1)];
                g[i] = z.get(i);
                g
            })
            .with_hessian(move |z| {
                let n = z.ambient_dim().max(i + 1);
                let mut h = vec![Complex::new(T::zero(), T::zero()); n * n];
                h[i * n + i] = Complex::new(T::one(), T::zero());
                h
            })
    }

    /// `|z_i|⁴`, with `∂_i∂̄_i = 4|z_i|²`.
    pub fn modulus_pow4(i: usize) -> Self {
        Self::new(format!("|z{}|^4", i + 1), move |z| {
            let m = z.get(i).norm_sqr();
            m * m
        })
        .with_dbar(move |z| {
            let mut g = vec![Complex::new(T::zero(), T::zero()); z.ambient_dim().max(i + 1)];
            g[i] = z.get(i) * (T::c(2.0) * z.get(i).norm_sqr());
            g
        })
        .with_hessian(move |z| {
            let n = z.ambient_dim().max(i + 1);
            let mut h = vec![Complex::new(T::zero(), T::zero()); n * n];
            h[i * n + i] = Complex::new(T::c(4.0) * z.get(i).norm_sqr(), T::zero());
            h
        })
    }

    /// `s·f`.
    pub fn scaled(&self, s: T) -> Self {
        let f = self.clone();
        let mut out = Self::new(format!("{s}*({})", self.label), move |z| s * f.eval(z));
        if let Some(g) = self.dbar.clone() {
            out = out.with_dbar(move |z| g(z).into_iter().map(|c| c * s).collect());
        }
        if let Some(h) = self.hessian.clone() {
            out = out.with_hessian(move |z| h(z).into_iter().map(|c| c * s).collect());
        }
        out
    }

    /// `f + g`.
    pub fn plus(&self, other: &Self) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let mut out = Self::new(format!("({})+({})", self.label, other.label), move |z| {
            f.eval(z) + g.eval(z)
        });
        if let (Some(a), Some(b)) = (self.dbar.clone(), other.dbar.clone()) {
            out = out.with_dbar(move |z| add_vecs(a(z), b(z)));
        }
        if let (Some(a), Some(b)) = (self.hessian.clone(), other.hessian.clone()) {
            out = out.with_hessian(move |z| add_vecs(a(z), b(z)));
        }
        out
    }

    /// `φ ∘ f` without derivative information.
    pub fn map(&self, label: impl Into<String>, phi: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        let f = self.clone();
        Self::new(label, move |z| phi(f.eval(z)))
    }
}

fn identity<T: Real>(n: usize) -> Vec<Complex<T>> {
    let mut h = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        h[i * n + i] = Complex::new(T::one(), T::zero());
    }
    h
}

fn add_vecs<T: Real>(mut a: Vec<Complex<T>>, b: Vec<Complex<T>>) -> Vec<Complex<T>> {
    if a.len() < b.len() {
        a.resize(b.len(), Complex::new(T::zero(), T::zero()));
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x = *x + y;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_values() {
        let z = CVec::from_pairs(&[(1.0, 2.0), (0.0, -1.0)]);
        assert_eq!(ScalarField::norm_sqr().eval(&z), 6.0);
        assert_eq!(ScalarField::re_coord(0).eval(&z), 1.0);
        assert_eq!(ScalarField::modulus_pow4(0).eval(&z), 25.0);
        let s = ScalarField::norm_sqr().scaled(2.0).plus(&ScalarField::constant(1.0));
        assert_eq!(s.eval(&z), 13.0);
        assert_eq!(s.hessian(&z).unwrap()[0], Complex::new(2.0, 0.0));
    }

    #[test]
    fn try_eval_rejects_nan() {
        let f = ScalarField::<f64>::new("nan", |_| f64::NAN);
        assert!(f.try_eval(&CVec::zeros(1)).is_err());
    }
}
