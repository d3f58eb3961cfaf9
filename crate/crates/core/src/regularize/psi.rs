//! The auxiliary function `ψ(t) = ∫₀ᵗ (t − u) e^{−1/u} du` (zero for `t ≤ 0`).
//!
//! Hence `ψ″(t) = e^{−1/t}`, `ψ′(t) = ∫₀ᵗ e^{−1/u} du`, and all three are positive
//! for `t > 0` and vanish to infinite order at `0`. Values at the nodes of a
//! grid of step `1/64` on `[0, 256]` are accumulated once with Gauss–Legendre
//! quadrature; evaluation adds the exact integral over the partial cell.

use std::sync::OnceLock;

use crate::scalar::Real;

const STEP: f64 = 1.0 / 64.0;
const SPAN: f64 = 256.0;

/// 10-point Gauss–Legendre nodes and weights on `[−1, 1]`.
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn second(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// `(∫_a^b e^{−1/u} du, ∫_a^b (b − u) e^{−1/u} du)`.
fn cell(a: f64, b: f64) -> (f64, f64) {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let (mut i1, mut i2) = (0.0, 0.0);
    for (&x, &w) in GL_X.iter().zip(&GL_W) {
        for u in [m - r * x, m + r * x] {
            let e = second(u);
            i1 += w * e;
            i2 += w * (b - u) * e;
        }
    }
    (i1 * r, i2 * r)
}

struct Table {
    psi: Vec<f64>,
    psi1: Vec<f64>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let cells = (SPAN / STEP) as usize;
        let mut psi = Vec::with_capacity(cells + 1);
        let mut psi1 = Vec::with_capacity(cells + 1);
        let (mut p, mut p1) = (0.0f64, 0.0f64);
        psi.push(p);
        psi1.push(p1);
        for k in 0..cells {
            let a = k as f64 * STEP;
            let (i1, i2) = cell(a, a + STEP);
            p += STEP * p1 + i2;
            p1 += i1;
            psi.push(p);
            psi1.push(p1);
        }
        Table { psi, psi1 }
    })
}

/// `(ψ(t), ψ′(t), ψ″(t))` in double precision.
pub fn psi_f64(t: f64) -> (f64, f64, f64) {
    if !(t > 0.0) {
        return (0.0, 0.0, 0.0);
    }
    let tab = table();
    let (mut a, mut p, mut p1) = if t < SPAN {
        let k = (t / STEP).floor() as usize;
        (k as f64 * STEP, tab.psi[k], tab.psi1[k])
    } else {
        (SPAN, *tab.psi.last().unwrap(), *tab.psi1.last().unwrap())
    };
    // Beyond the table, march in unit cells (the integrand is nearly constant).
    while t - a > 1.0 {
        let (i1, i2) = cell(a, a + 1.0);
        p += p1 + i2;
        p1 += i1;
        a += 1.0;
    }
    let (i1, i2) = cell(a, t);
    (p + (t - a) * p1 + i2, p1 + i1, second(t))
}

/// `(ψ(t), ψ′(t), ψ″(t))`.
pub fn eval_psi<T: Real>(t: T) -> (T, T, T) {
    let (a, b, c) = psi_f64(t.f64());
    (T::c(a), T::c(b), T::c(c))
}

/// `ψ(t)` alone.
pub fn psi<T: Real>(t: T) -> T {
    eval_psi(t).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_for_nonpositive() {
        assert_eq!(psi_f64(-1.0), (0.0, 0.0, 0.0));
        assert_eq!(psi_f64(0.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn second_derivative_is_exact() {
        assert_eq!(psi_f64(1.0).2, (-1.0f64).exp());
    }

    #[test]
    fn continues_past_table() {
        let (p, p1, _) = psi_f64(300.0);
        let (q, q1, _) = psi_f64(300.0 + 1e-3);
        assert!(((q - p) / 1e-3 - p1).abs() < 1e-3 * p1);
        assert!(q1 > p1);
    }
}
