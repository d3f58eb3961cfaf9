//! Empirical modulus of continuity `w_f(t) = sup{|f(z) − f(w)| : ‖z − w‖ ≤ t}`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::Real;
use crate::space::{streams, CVec, NormalSource};

/// Piecewise-linear modulus on the grid `kΔ`, `k = 0..=K`, constant beyond.
///
/// The raw sampled maxima are made monotone and then replaced by their least
/// concave majorant through the origin. A concave function vanishing at `0` is
/// subadditive, and the majorant only raises the (lower-bound) samples, so
/// the table stays conservative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub step: f64,
    pub values: Vec<f64>,
}

impl ModulusTable {
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        let x = t / self.step;
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap_or(&0.0);
        }
        let frac = x - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    pub fn max_t(&self) -> f64 {
        self.step * (self.values.len().saturating_sub(1)) as f64
    }

    fn from_raw(step: f64, mut raw: Vec<f64>) -> Self {
        raw[0] = 0.0;
        for k in 1..raw.len() {
            raw[k] = raw[k].max(raw[k - 1]);
        }
        // Upper concave hull of (k, raw[k]).
        let mut hull: Vec<usize> = Vec::new();
        for k in 0..raw.len() {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b - a) as f64 * (raw[k] - raw[a]) - (k - a) as f64 * (raw[b] - raw[a]);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(k);
        }
        let mut values = vec![0.0; raw.len()];
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (k, v) in values.iter_mut().enumerate().take(b + 1).skip(a) {
                *v = raw[a] + (raw[b] - raw[a]) * (k - a) as f64 / (b - a) as f64;
            }
        }
        if hull.len() == 1 {
            values.fill(0.0);
        }
        Self { step, values }
    }
}

#[derive(Clone, Debug)]
pub struct ModulusOptions {
    pub max_t: f64,
    pub cells: usize,
    /// Random directions probed from each point of `S` at every grid distance.
    pub directions: usize,
    pub seed: u64,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self {
            max_t: 2.0,
            cells: 128,
            directions: 4,
            seed: 0,
        }
    }
}

/// Samples `w_f` from pairs of `S` and from probes `z + kΔ·u` around each
/// `z ∈ S`.
pub fn estimate_modulus<T: Real>(
    f: &ScalarField<T>,
    s: &[CVec<T>],
    opts: &ModulusOptions,
) -> Result<ModulusTable> {
    if s.len() < 2 {
        return Err(Error::InvalidParameter("modulus estimate needs at least two points".into()));
    }
    let cells = opts.cells.max(1);
    let step = opts.max_t / cells as f64;
    let mut raw = vec![0.0f64; cells + 1];
    let vals: Vec<f64> = s.iter().map(|z| f.eval(z).f64()).collect();
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let d = s[i].distance(&s[j]).f64();
            let k = (d / step).ceil() as usize;
            if k <= cells {
                let k = k.max(1);
                raw[k] = raw[k].max((vals[i] - vals[j]).abs());
            }
        }
    }
    let mut src = NormalSource::new(opts.seed, streams::PAIRS, 0);
    for (z, &fz) in s.iter().zip(&vals) {
        let n = z.ambient_dim();
        for _ in 0..opts.directions {
            let e: Vec<Complex<T>> = (0..n)
                .map(|_| {
                    let (a, b) = src.normal_pair();
                    Complex::new(T::c(a), T::c(b))
                })
                .collect();
            let u = CVec::from_entries(e).normalized();
            for (k, slot) in raw.iter_mut().enumerate().skip(1) {
                let w = z.axpy(Complex::new(T::c(k as f64 * step), T::zero()), &u);
                let diff = (f.eval(&w).f64() - fz).abs();
                if diff.is_finite() {
                    *slot = slot.max(diff);
                }
            }
        }
    }
    Ok(ModulusTable::from_raw(step, raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_zero_modulus() {
        let s: Vec<_> = (0..5).map(|k| CVec::from_re(&[k as f64 * 0.1])).collect();
        let w = estimate_modulus(&ScalarField::constant(2.0), &s, &ModulusOptions::default()).unwrap();
        assert!(w.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn concave_completion_is_subadditive() {
        let w = ModulusTable::from_raw(0.5, vec![0.0, 0.1, 3.0, 3.0, 3.5]);
        for a in 0..10 {
            for b in 0..10 {
                let (s, t) = (a as f64 * 0.23, b as f64 * 0.19);
                assert!(w.eval(s + t) <= w.eval(s) + w.eval(t) + 1e-12);
            }
        }
        assert!(w.values.windows(2).all(|p| p[1] >= p[0]));
    }
}
