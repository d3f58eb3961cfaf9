use std::sync::OnceLock;

use proptest::prelude::*;

use plurisub::calculus::mixed_hessian;
use plurisub::domain::Domain;
use plurisub::harness::{DomainConfig, RunConfig};
use plurisub::regularize::{estimate_modulus, ModulusOptions, ModulusTable};
use plurisub::space::CVec;
use plurisub::field::ScalarField;

fn cvec(n: usize) -> impl Strategy<Value = CVec<f64>> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), n).prop_map(|p| CVec::from_pairs(&p))
}

fn modulus() -> &'static ModulusTable {
    static TABLE: OnceLock<ModulusTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let f = ScalarField::new("sin|z|^2", |z: &CVec<f64>| (3.0 * z.norm_sqr()).sin());
        let pts: Vec<CVec<f64>> = (0..60)
            .map(|k| {
                let s = k as f64 / 60.0;
                CVec::from_pairs(&[(s.cos(), s), (0.5 * s, -s.sin())])
            })
            .collect();
        estimate_modulus(
            &f,
            &pts,
            &ModulusOptions {
                max_t: 1.0,
                cells: 32,
                directions: 4,
                seed: 1,
            },
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_one_lipschitz(z in cvec(3), w in cvec(3)) {
        let domains = [
            Domain::unit_ball(),
            Domain::polydisc(vec![1.0, 0.5, 2.0]).unwrap(),
            Domain::hartogs_wedge(1.0).unwrap(),
        ];
        let gap = z.distance(&w);
        for v in &domains {
            let d = (v.signed_distance(&z) - v.signed_distance(&w)).abs();
            prop_assert!(d <= gap * (1.0 + 1e-9) + 1e-12, "{}: {d} > {gap}", v.name());
        }
    }

    #[test]
    fn modulus_is_subadditive(s in 0.0f64..0.6, t in 0.0f64..0.6) {
        let w = modulus();
        prop_assert!(w.eval(s + t) <= w.eval(s) + w.eval(t) + 1e-12);
        prop_assert!(w.eval(s.min(t)) <= w.eval(s.max(t)) + 1e-12);
    }

    #[test]
    fn padding_preserves_norm_and_prefix(z in cvec(3), extra in 0usize..4) {
        let p = z.with_ambient_dim(3 + extra);
        prop_assert_eq!(p.ambient_dim(), 3 + extra);
        prop_assert_eq!(p.norm_sqr(), z.norm_sqr());
        prop_assert_eq!(&p.entries()[..3], z.entries());
        prop_assert_eq!(p.head(2).head(2), p.head(2));
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), n in 1usize..6, radius in 0.1f64..10.0, k in 3usize..8) {
        let mut cfg = RunConfig::parse(&format!(
            "schema_version = 1\n[domain]\nname = \"ball\"\n[gaussian]\ntruncation = {n}\nseed = {seed}\n[pipeline]\nstage = \"smooth_Psi\"\nseries_k = {k}\n"
        )).unwrap();
        cfg.domain = DomainConfig::Ball { radius, center: vec![] };
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back.to_toml(), cfg.to_toml());
        prop_assert_eq!(back.gaussian.seed, seed);
    }
}

#[test]
fn f32_ball_distance() {
    let v = Domain::<f32>::unit_ball();
    let z = CVec::<f32>::from_pairs(&[(0.3, 0.4), (0.0, 0.0)]);
    assert!((v.signed_distance(&z) - 0.5).abs() < 1e-6);
}

#[test]
fn f32_hessian_of_norm_squared() {
    let f = ScalarField::<f32>::norm_sqr();
    let z = CVec::<f32>::from_pairs(&[(0.2, -0.1), (0.4, 0.3)]);
    let h = mixed_hessian(&f, &z, 1e-2).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((h.matrix[i * 2 + j].re - want).abs() < 1e-2, "{:?}", h.matrix);
            assert!(h.matrix[i * 2 + j].im.abs() < 1e-2);
        }
    }
}

#[test]
fn f32_matches_f64_distance() {
    let v64 = Domain::<f64>::polydisc(vec![1.0, 0.5]).unwrap();
    let v32 = Domain::<f32>::polydisc(vec![1.0, 0.5]).unwrap();
    let z = CVec::<f64>::from_pairs(&[(0.1, 0.2), (0.2, -0.1)]);
    let d64 = v64.signed_distance(&z);
    let d32 = v32.signed_distance(&z.cast::<f32>());
    assert!((d64 - d32 as f64).abs() < 1e-6);
}
