//! Truncated ℓ² vectors and the anisotropic Gaussian product measure `P`.
//!
//! A [`CVec`] is a point of ℂⁿ viewed inside ℓ²: entries beyond the stored ones
//! are zero, so vectors of different stored lengths compare and combine as if
//! zero-padded. A [`GaussianSpec`] fixes the weights `a_i`, under which
//! coordinate `z_i` has independent real and imaginary parts `N(0, a_i²)`.
//!
//! Sampling is counter based: sample `k` of stream `s` is a pure function of
//! `(seed, s, k)`, so any partition of the index range into shards reproduces the
//! same numbers in any order.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::report::{CertificationReport, Record};
use crate::scalar::Real;

/// Stream identifiers. Every consumer of randomness owns a distinct stream so
/// that adding a new consumer never perturbs existing numbers.
pub mod streams {
    pub const MEASURE: u64 = 1;
    pub const TAIL: u64 = 2;
    pub const ROTATION: u64 = 3;
    pub const MOLLIFIER: u64 = 4;
    pub const SUBLEVEL: u64 = 5;
    pub const DIRECTIONS: u64 = 6;
    pub const NORMALIZATION: u64 = 7;
    pub const ENVELOPE: u64 = 8;
    pub const PAIRS: u64 = 9;
    pub const PROJECTION: u64 = 10;
    pub const CERTIFY: u64 = 11;
    pub const PIPELINE: u64 = 12;

    /// Derives a sub-stream id; `base` occupies the high bits.
    pub const fn sub(base: u64, index: u64) -> u64 {
        (base << 40) ^ index
    }
}

/// A point of truncated ℓ².
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CVec<T> {
    entries: Vec<Complex<T>>,
    ambient_dim: usize,
}

impl<T: Real> CVec<T> {
    /// Builds a vector; `entries.len()` must not exceed `ambient_dim`.
    pub fn new(entries: Vec<Complex<T>>, ambient_dim: usize) -> Result<Self> {
        if entries.len() > ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "{} entries exceed ambient dimension {ambient_dim}",
                entries.len()
            )));
        }
        Ok(Self::padded(entries, ambient_dim))
    }

    /// Builds a vector whose ambient dimension is the number of entries.
    pub fn from_entries(entries: Vec<Complex<T>>) -> Self {
        let n = entries.len();
        Self {
            entries,
            ambient_dim: n,
        }
    }

    /// Builds a vector from real parts only.
    pub fn from_re(re: &[T]) -> Self {
        Self::from_entries(re.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    /// Builds a vector from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(T, T)]) -> Self {
        Self::from_entries(pairs.iter().map(|&(x, y)| Complex::new(x, y)).collect())
    }

    pub fn zeros(ambient_dim: usize) -> Self {
        Self {
            entries: vec![Complex::new(T::zero(), T::zero()); ambient_dim],
            ambient_dim,
        }
    }

    /// The `i`-th coordinate unit vector (0-based).
    pub fn basis(i: usize, ambient_dim: usize) -> Self {
        let mut v = Self::zeros(ambient_dim.max(i + 1));
        v.entries[i] = Complex::new(T::one(), T::zero());
        v
    }

    fn padded(mut entries: Vec<Complex<T>>, ambient_dim: usize) -> Self {
        entries.resize(ambient_dim, Complex::new(T::zero(), T::zero()));
        Self {
            entries,
            ambient_dim,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Stored coordinates (always `ambient_dim` long).
    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.entries
    }

    /// Coordinate `i`, zero beyond the truncation.
    pub fn get(&self, i: usize) -> Complex<T> {
        self.entries
            .get(i)
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn set(&mut self, i: usize, value: Complex<T>) {
        if i >= self.ambient_dim {
            self.entries
                .resize(i + 1, Complex::new(T::zero(), T::zero()));
            self.ambient_dim = i + 1;
        }
        self.entries[i] = value;
    }

    pub fn norm_sqr(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `Σ a_i conj(b_i)`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        let n = self.ambient_dim.min(other.ambient_dim);
        self.entries[..n]
            .iter()
            .zip(&other.entries[..n])
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a * b.conj()
            })
    }

    pub fn distance(&self, other: &Self) -> T {
        (self - other).norm()
    }

    /// `self + s·v`.
    pub fn axpy(&self, s: Complex<T>, v: &Self) -> Self {
        let n = self.ambient_dim.max(v.ambient_dim);
        let entries = (0..n).map(|i| self.get(i) + v.get(i) * s).collect();
        Self {
            entries,
            ambient_dim: n,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * s).collect(),
            ambient_dim: self.ambient_dim,
        }
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * s).collect(),
            ambient_dim: self.ambient_dim,
        }
    }

    /// Returns the unit vector in the direction of `self` (zero stays zero).
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self.scale(T::one() / n)
        } else {
            self.clone()
        }
    }

    /// `z_n`: keeps the first `n` coordinates and zeroes the rest.
    pub fn head(&self, n: usize) -> Self {
        let mut out = self.clone();
        for z in out.entries.iter_mut().skip(n) {
            *z = Complex::new(T::zero(), T::zero());
        }
        out
    }

    /// Re-declares the ambient dimension, padding or truncating entries.
    pub fn with_ambient_dim(&self, ambient_dim: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.truncate(ambient_dim);
        Self::padded(entries, ambient_dim)
    }

    /// Real coordinates `(x_1, y_1, x_2, y_2, …)`.
    pub fn to_real(&self) -> Vec<T> {
        self.entries.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_real(xs: &[T]) -> Self {
        Self::from_entries(
            xs.chunks(2)
                .map(|c| Complex::new(c[0], c.get(1).copied().unwrap_or_else(T::zero)))
                .collect(),
        )
    }

    /// Coordinates as `f64` pairs, for reports and error messages.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.entries.iter().map(|z| [z.re.f64(), z.im.f64()]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> CVec<U> {
        CVec {
            entries: self
                .entries
                .iter()
                .map(|z| Complex::new(U::c(z.re.f64()), U::c(z.im.f64())))
                .collect(),
            ambient_dim: self.ambient_dim,
        }
    }
}

/// Euclidean norm `√(Σ|z_i|²)`.
pub fn norm<T: Real>(v: &CVec<T>) -> T {
    v.norm()
}

impl<T: Real> PartialEq for CVec<T> {
    fn eq(&self, other: &Self) -> bool {
        let n = self.entries.len().max(other.entries.len());
        (0..n).all(|i| self.get(i) == other.get(i))
    }
}

impl<T: Real> Add for &CVec<T> {
    type Output = CVec<T>;
    fn add(self, rhs: &CVec<T>) -> CVec<T> {
        self.axpy(Complex::new(T::one(), T::zero()), rhs)
    }
}

impl<T: Real> Sub for &CVec<T> {
    type Output = CVec<T>;
    fn sub(self, rhs: &CVec<T>) -> CVec<T> {
        self.axpy(Complex::new(-T::one(), T::zero()), rhs)
    }
}

impl<T: Real> Add for CVec<T> {
    type Output = CVec<T>;
    fn add(self, rhs: CVec<T>) -> CVec<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for CVec<T> {
    type Output = CVec<T>;
    fn sub(self, rhs: CVec<T>) -> CVec<T> {
        &self - &rhs
    }
}

impl<T: Real> Neg for &CVec<T> {
    type Output = CVec<T>;
    fn neg(self) -> CVec<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &CVec<T> {
    type Output = CVec<T>;
    fn mul(self, s: T) -> CVec<T> {
        self.scale(s)
    }
}

/// Weights, truncation, seed and default budget defining the measure `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec<T> {
    weights: Vec<T>,
    pub seed: u64,
    pub sample_budget: usize,
}

impl<T: Real> GaussianSpec<T> {
    pub const DEFAULT_BUDGET: usize = 200_000;
    pub const DEFAULT_TRUNCATION: usize = 6;

    /// Validates `a_i > 0` and `Σ a_i < 1`.
    pub fn new(weights: Vec<T>, seed: u64, sample_budget: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("weights must be non-empty".into()));
        }
        if let Some(i) = weights.iter().position(|&a| !(a > T::zero() && a.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "weight a_{} = {} is not a positive finite number",
                i + 1,
                weights[i]
            )));
        }
        let sum = weights.iter().fold(T::zero(), |s, &a| s + a);
        if sum >= T::one() {
            return Err(Error::WeightSum { sum: sum.f64() });
        }
        if sample_budget == 0 {
            return Err(Error::InvalidParameter("sample_budget must be positive".into()));
        }
        Ok(Self {
            weights,
            seed,
            sample_budget,
        })
    }

    /// The default geometric weights `a_i = 2^{-(i+1)}`, `i = 1..n`.
    pub fn geometric(n: usize, seed: u64) -> Result<Self> {
        let weights = (1..=n).map(|i| T::c(0.5f64.powi(i as i32 + 1))).collect();
        Self::new(weights, seed, Self::DEFAULT_BUDGET)
    }

    pub fn with_budget(mut self, sample_budget: usize) -> Self {
        self.sample_budget = sample_budget.max(1);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn truncation(&self) -> usize {
        self.weights.len()
    }

    /// The same measure restricted to the first `n` coordinates.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.weights.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation {n} outside 1..={}",
                self.weights.len()
            )));
        }
        Self::new(self.weights[..n].to_vec(), self.seed, self.sample_budget)
    }

    /// `E‖z‖² = 2 Σ a_i²`.
    pub fn second_moment(&self) -> T {
        self.weights
            .iter()
            .fold(T::zero(), |s, &a| s + T::c(2.0) * a * a)
    }

    /// A reproducible sampler positioned at sample `start` of `stream`.
    pub fn sampler(&self, stream: u64, start: u64) -> GaussianSampler<T> {
        GaussianSampler::new(self, stream, start)
    }
}

/// Draws standard normals in pairs by Box–Muller from a ChaCha8 block stream.
///
/// Each complex coordinate consumes exactly two `u64` words, so sample `k` of an
/// `n`-coordinate measure begins at word `4·n·k` (in 32-bit units) — this is what
/// makes jump-ahead exact.
pub struct NormalSource {
    rng: ChaCha8Rng,
}

impl NormalSource {
    pub fn new(seed: u64, stream: u64, word_pos: u128) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        Self { rng }
    }

    /// Uniform in `(0, 1]`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        1.0 - bits as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = std::f64::consts::TAU * u2;
        (r * th.cos(), r * th.sin())
    }
}

/// Iterator over samples of `P` on one stream.
pub struct GaussianSampler<T> {
    weights: Vec<T>,
    source: NormalSource,
}

impl<T: Real> GaussianSampler<T> {
    fn new(spec: &GaussianSpec<T>, stream: u64, start: u64) -> Self {
        let n = spec.truncation() as u128;
        Self {
            weights: spec.weights.clone(),
            source: NormalSource::new(spec.seed, stream, 4 * n * start as u128),
        }
    }

    pub fn next_sample(&mut self) -> CVec<T> {
        let entries = self
            .weights
            .iter()
            .map(|&a| {
                let (x, y) = self.source.normal_pair();
                Complex::new(a * T::c(x), a * T::c(y))
            })
            .collect();
        CVec::from_entries(entries)
    }
}

impl<T: Real> Iterator for GaussianSampler<T> {
    type Item = CVec<T>;
    fn next(&mut self) -> Option<CVec<T>> {
        Some(self.next_sample())
    }
}

/// `count` samples of `P` from the measure stream.
pub fn sample_gaussian<T: Real>(spec: &GaussianSpec<T>, count: usize) -> Result<Vec<CVec<T>>> {
    sample_shard(spec, streams::MEASURE, 0, count)
}

/// Samples `start..start+count` of the given stream.
pub fn sample_shard<T: Real>(
    spec: &GaussianSpec<T>,
    stream: u64,
    start: u64,
    count: usize,
) -> Result<Vec<CVec<T>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be ≥ 1".into()));
    }
    Ok(spec.sampler(stream, start).take(count).collect())
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub estimate: T,
    pub std_error: T,
    pub samples: usize,
}

/// Welford accumulator for mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n > 0 {
            (self.variance() / self.n as f64).sqrt()
        } else {
            0.0
        }
    }
}

/// `∫ f dP` over `spec.sample_budget` samples of the measure stream.
pub fn integrate<T: Real>(f: &ScalarField<T>, spec: &GaussianSpec<T>) -> Result<Estimate<T>> {
    integrate_stream(f, spec, streams::MEASURE)
}

/// As [`integrate`] but on an explicit stream.
pub fn integrate_stream<T: Real>(
    f: &ScalarField<T>,
    spec: &GaussianSpec<T>,
    stream: u64,
) -> Result<Estimate<T>> {
    let mut acc = Welford::default();
    for (k, z) in spec.sampler(stream, 0).take(spec.sample_budget).enumerate() {
        let v = f.eval(&z);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: format!("integrand at sample {k}"),
                value: v.f64(),
                point: z.to_pairs(),
            });
        }
        acc.push(v.f64());
    }
    Ok(Estimate {
        estimate: T::c(acc.mean()),
        std_error: T::c(acc.std_error()),
        samples: acc.count(),
    })
}

/// `f_n(z) = ∫ f(z_n, zⁿ) dPₙ(zⁿ)`, realized with a frozen set of tail samples.
pub fn project_fn<T: Real>(
    f: &ScalarField<T>,
    n: usize,
    spec: &GaussianSpec<T>,
) -> Result<ScalarField<T>> {
    let big_n = spec.truncation();
    if n == 0 || n >= big_n {
        return Err(Error::InvalidParameter(format!(
            "projection level {n} must lie in 1..{big_n}"
        )));
    }
    let tails: Vec<Vec<Complex<T>>> = spec
        .sampler(streams::TAIL, 0)
        .take(spec.sample_budget)
        .map(|z| z.entries()[n..].to_vec())
        .collect();
    let inner = f.clone();
    let count = T::from_count(tails.len());
    Ok(ScalarField::new(
        format!("projection to {n} coordinates"),
        move |z: &CVec<T>| {
            let mut w = z.with_ambient_dim(big_n);
            let mut sum = T::zero();
            for tail in &tails {
                w.entries_mut()[n..].copy_from_slice(tail);
                sum = sum + inner.eval(&w);
            }
            sum / count
        },
    ))
}

/// Compares `∫ f dP` with `∫ f(e^{iθ₁}z₁, e^{iθ₂}z₂, …) dP` on paired samples.
///
/// Missing angles are zero. The test passes when the mean paired difference is
/// within three paired standard errors (plus a rounding allowance).
pub fn check_rotation_invariance<T: Real>(
    f: &ScalarField<T>,
    thetas: &[T],
    spec: &GaussianSpec<T>,
) -> CertificationReport {
    let rot: Vec<Complex<T>> = (0..spec.truncation())
        .map(|i| {
            let th = thetas.get(i).copied().unwrap_or_else(T::zero);
            Complex::new(th.cos(), th.sin())
        })
        .collect();
    let mut lhs = Welford::default();
    let mut rhs = Welford::default();
    let mut diff = Welford::default();
    let mut non_finite = None;
    for z in spec.sampler(streams::ROTATION, 0).take(spec.sample_budget) {
        let mut w = z.clone();
        for (zi, r) in w.entries_mut().iter_mut().zip(&rot) {
            *zi = *zi * r;
        }
        let (a, b) = (f.eval(&z).f64(), f.eval(&w).f64());
        if !(a.is_finite() && b.is_finite()) {
            non_finite.get_or_insert(z.to_pairs());
            continue;
        }
        lhs.push(a);
        rhs.push(b);
        diff.push(a - b);
    }
    let gap = diff.mean().abs();
    let tol = 3.0 * diff.std_error() + 1e-12 * (1.0 + lhs.mean().abs());
    let mut rec = Record::new("rotation-invariance", f.label(), lhs.count())
        .tolerance(tol)
        .violation(gap)
        .stat("integral", lhs.mean())
        .stat("rotated_integral", rhs.mean())
        .stat("difference", lhs.mean() - rhs.mean())
        .stat("paired_std_error", diff.std_error())
        .stat("seed", spec.seed as f64);
    if let Some(p) = non_finite {
        rec = rec.fail_at(p);
    }
    CertificationReport::single(rec)
}
