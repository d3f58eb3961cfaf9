//! The smooth cutoff `𝓘_τ`, the plateau bump `Θ`, and the kernel `ϑ(ζ) = Θ(‖ζ‖²)`.

use std::sync::OnceLock;

use crate::scalar::Real;
use crate::space::CVec;

/// `𝓘_τ(t)`: `1` on `(−∞, τ]`, `0` on `[τ+1, ∞)`, and in between
/// `(e^{1/(x−1)} − 1)·e^{−e^{1/(x−1)}/x} + 1` with `x = t − τ`.
pub fn eval_cutoff<T: Real>(tau: T, t: T) -> T {
    let x = t - tau;
    if x <= T::zero() {
        T::one()
    } else if x >= T::one() {
        T::zero()
    } else {
        let u = (T::one() / (x - T::one())).exp();
        (u - T::one()) * (-u / x).exp() + T::one()
    }
}

/// `𝓘′_τ(t)`, from
/// `f′(x) = e^{1/(x−1) − e^{1/(x−1)}/x} / (x²(1−x)²) · [−2x² + x − 1 + e^{1/(x−1)}(x² − x + 1)]`.
pub fn eval_cutoff_deriv<T: Real>(tau: T, t: T) -> T {
    let x = t - tau;
    if x <= T::zero() || x >= T::one() {
        return T::zero();
    }
    let a = T::one() / (x - T::one());
    let u = a.exp();
    let expo = a - u / x;
    if expo < T::c(-700.0) {
        return T::zero();
    }
    let two = T::c(2.0);
    let bracket = -two * x * x + x - T::one() + u * (x * x - x + T::one());
    let denom = x * x * (T::one() - x) * (T::one() - x);
    expo.exp() / denom * bracket
}

/// `K₀ = max_{0<x<1} |𝓘′₀(x)|`, by a dense grid followed by golden-section
/// refinement; computed once.
pub fn compute_k0() -> f64 {
    static K0: OnceLock<f64> = OnceLock::new();
    *K0.get_or_init(|| {
        let g = |x: f64| -eval_cutoff_deriv(0.0, x);
        let n = 10_000;
        let (mut best_i, mut best) = (1, f64::NEG_INFINITY);
        for i in 1..n {
            let v = g(i as f64 / n as f64);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let (mut a, mut b) = ((best_i - 1) as f64 / n as f64, (best_i + 1) as f64 / n as f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        for _ in 0..200 {
            if g(c) > g(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
            if b - a < 1e-15 {
                break;
            }
        }
        best.max(g(0.5 * (a + b)))
    })
}

/// `g(x) = e^{−1/x}` for `x > 0`, else `0`.
fn g<T: Real>(x: T) -> T {
    if x > T::zero() {
        (-T::one() / x).exp()
    } else {
        T::zero()
    }
}

/// Two-sided smoothstep `S(x) = g(x) / (g(x) + g(1 − x))`.
pub fn smoothstep<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if x >= T::one() {
        T::one()
    } else {
        let a = g(x);
        a / (a + g(T::one() - x))
    }
}

/// `Θ(t) = S((1 − |t|)/(3/4))`: equal to 1 for `|t| ≤ 1/4`, 0 for `|t| ≥ 1`.
pub fn theta<T: Real>(t: T) -> T {
    smoothstep((T::one() - t.abs()) / T::c(0.75))
}

/// `ϑ(ζ) = Θ(‖ζ‖²)`.
pub fn kernel<T: Real>(zeta: &CVec<T>) -> T {
    theta(zeta.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus() {
        assert_eq!(eval_cutoff(0.0, -1.0), 1.0);
        assert_eq!(eval_cutoff(0.0, 2.0), 0.0);
        assert_eq!(eval_cutoff(3.0, 3.0), 1.0);
        assert_eq!(eval_cutoff(3.0, 4.0), 0.0);
        assert_eq!(theta(0.25), 1.0);
        assert_eq!(theta(-1.0), 0.0);
        assert!(theta(0.5) > 0.0 && theta(0.5) < 1.0);
    }

    #[test]
    fn derivative_matches_differences() {
        for &x in &[0.1f64, 0.23, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (eval_cutoff(0.0, x + h) - eval_cutoff(0.0, x - h)) / (2.0 * h);
            assert!((fd - eval_cutoff_deriv(0.0, x)).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn f32_cutoff() {
        let v: f32 = eval_cutoff(0.0f32, 0.5);
        assert!((v - 0.340_375_16).abs() < 1e-5);
    }
}
