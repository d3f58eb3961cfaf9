//! The Lipschitz exhaustion `η = −ln d(z, ∂V) + ‖z‖² + c₀`.

use num_complex::Complex;

use crate::domain::{sample_domain_lenient, Domain, Proposal};
use crate::field::ScalarField;
use crate::space::{CVec, GaussianSpec};

/// `−ln d(z, ∂V) + ‖z‖² + c₀` on `V` and `+∞` off it; `1 + ‖z‖² + c₀` when
/// `V = ℓ²`. Catalog domains get a closed-form `∂̄`.
pub fn lipschitz_exhaustion(v: &Domain<f64>, c0: f64) -> ScalarField<f64> {
    if v.is_full_space() {
        return ScalarField::norm_sqr()
            .plus(&ScalarField::constant(1.0 + c0))
            .with_label(format!("1+|z|^2+{c0}"));
    }
    let label = format!("-ln d(z,dV)+|z|^2+{c0} on {}", v.name());
    let dom = v.clone();
    let field = ScalarField::new(label, move |z: &CVec<f64>| {
        if !dom.contains(z) {
            return f64::INFINITY;
        }
        let d = dom.signed_distance(z);
        if d > 0.0 {
            -d.ln() + z.norm_sqr() + c0
        } else {
            f64::INFINITY
        }
    });
    if !v.has_closed_form_distance() {
        return field;
    }
    let dom = v.clone();
    field.with_dbar(move |z: &CVec<f64>| {
        let d = dom.signed_distance(z);
        let gd = dom.distance_dbar(z).unwrap_or_default();
        let n = z.ambient_dim().max(gd.len());
        (0..n)
            .map(|j| {
                let g = gd.get(j).copied().unwrap_or(Complex::new(0.0, 0.0));
                z.get(j) - g / d
            })
            .collect()
    })
}

/// Sampled `inf (‖z‖² − ln d)` over points of `V` drawn from the standard
/// proposal (at most `draws` proposals), or `None` if nothing was accepted.
pub fn sampled_infimum(
    v: &Domain<f64>,
    spec: &GaussianSpec<f64>,
    proposal: &Proposal<f64>,
    draws: usize,
) -> Option<f64> {
    let eta = lipschitz_exhaustion(v, 0.0);
    let prop = Proposal {
        max_draws: draws,
        min_acceptance: 0.0,
        ..proposal.clone()
    };
    let (pts, _) = sample_domain_lenient(v, draws, spec, &prop, |_| true);
    pts.iter().map(|z| eta.eval(z)).reduce(f64::min)
}

/// The positivity shift `c₀ = max(0, 1 − inf(‖z‖² − ln d)) + 1`, with the
/// infimum sampled over `10⁴` proposals; `0` for `V = ℓ²`.
pub fn positivity_shift(v: &Domain<f64>, spec: &GaussianSpec<f64>, proposal: &Proposal<f64>) -> f64 {
    if v.is_full_space() {
        return 0.0;
    }
    let inf = sampled_infimum(v, spec, proposal, 10_000).unwrap_or(0.0);
    (1.0 - inf).max(0.0) + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::wirtinger_grad;

    #[test]
    fn ball_values() {
        let b = Domain::unit_ball();
        let eta = lipschitz_exhaustion(&b, 0.0);
        assert_eq!(eta.eval(&CVec::zeros(2)), 0.0);
        let z = CVec::from_re(&[0.5, 0.0]);
        assert!((eta.eval(&z) - (2f64.ln() + 0.25)).abs() < 1e-15);
        assert_eq!(eta.eval(&CVec::from_re(&[1.0, 0.0])), f64::INFINITY);
        let full = lipschitz_exhaustion(&Domain::full_space(), 0.0);
        assert_eq!(full.eval(&CVec::zeros(3)), 1.0);
    }

    #[test]
    fn closed_form_dbar_matches_differences() {
        let cases = [
            (Domain::unit_ball(), CVec::from_pairs(&[(0.3, -0.2), (0.1, 0.4)])),
            (Domain::polydisc(vec![1.0, 0.8]).unwrap(), CVec::from_pairs(&[(0.2, 0.1), (0.5, -0.3)])),
            (Domain::hartogs_wedge(1.0).unwrap(), CVec::from_pairs(&[(0.1, 0.05), (0.3, 0.4)])),
            (Domain::hartogs_wedge(1.0).unwrap(), CVec::from_pairs(&[(0.3, 0.2), (0.4, 0.3)])),
            (Domain::hollowed_ball(1.0, 0.3).unwrap(), CVec::from_pairs(&[(0.35, 0.0), (0.1, 0.1)])),
            (
                Domain::halfspace_intersection(
                    vec![CVec::from_pairs(&[(0.6, 0.0), (0.0, 0.8)]), CVec::from_re(&[-1.0, 0.0])],
                    vec![1.0, 1.0],
                )
                .unwrap(),
                CVec::from_pairs(&[(0.2, 0.3), (-0.1, 0.2)]),
            ),
        ];
        for (v, z) in cases {
            let eta = lipschitz_exhaustion(&v, 1.0);
            let exact = eta.dbar(&z).unwrap();
            let plain = ScalarField::new("plain", {
                let e = eta.clone();
                move |p: &CVec<f64>| e.eval(p)
            });
            let fd = wirtinger_grad(&plain, &z, 1e-5).unwrap();
            for (a, b) in exact.iter().zip(&fd.dbar) {
                assert!((a - b).norm() < 1e-6, "{}: {a} vs {b}", v.name());
            }
        }
    }

    #[test]
    fn shift_makes_eta_positive() {
        let spec = GaussianSpec::geometric(2, 5).unwrap();
        let b = Domain::unit_ball();
        let c0 = positivity_shift(&b, &spec, &Proposal::default());
        assert!(c0 > 1.5 && c0 <= 2.0, "{c0}");
        let inf = sampled_infimum(&b, &spec, &Proposal::default(), 10_000).unwrap();
        assert!(inf + c0 > 0.0);
    }
}
