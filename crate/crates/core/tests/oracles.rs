//! Reference values computed independently with 50-digit arithmetic.

use plurisub::regularize::{compute_k0, eval_cutoff, eval_cutoff_deriv, psi_f64};

const CUTOFF_HALF: f64 = 0.340_375_156_387_688_646_264_369_318_283_912_288;
const K0: f64 = 1.730_035_524_746_407_414_207_510_469_062_145_332_778;
const K0_ARGMAX: f64 = 0.233_261_277_434_751_334_047_844_812_508_220_948;

/// (t, ψ(t), ψ′(t), ψ″(t))
const PSI: [(f64, f64, f64, f64); 5] = [
    (0.5, 0.001_850_220_505_668_639_893_0, 0.018_767_130_910_245_226_380, 0.135_335_283_236_612_691_89),
    (1.0, 0.038_803_539_578_161_911_080, 0.148_495_506_775_922_047_92, 0.367_879_441_171_442_321_60),
    (2.0, 0.420_157_992_197_498_241_44, 0.653_287_724_649_106_035_46, 0.606_530_659_712_633_423_60),
    (3.0, 1.398_080_754_722_682_216_5, 1.320_706_186_372_781_115_2, 0.716_531_310_573_789_263_68),
    (5.0, 5.556_383_303_158_316_007_8, 2.871_003_221_206_016_205_0, 0.818_730_753_077_981_849_58),
];

#[test]
fn cutoff_midpoint_matches_high_precision() {
    assert!((eval_cutoff(0.0, 0.5) - CUTOFF_HALF).abs() < 1e-12);
    assert!((eval_cutoff(2.5, 3.0) - CUTOFF_HALF).abs() < 1e-12);
}

#[test]
fn k0_matches_high_precision() {
    assert!((compute_k0() - K0).abs() < 1e-12, "{}", compute_k0());
    assert!((-eval_cutoff_deriv(0.0, K0_ARGMAX) - K0).abs() < 1e-12);
}

#[test]
fn psi_matches_high_precision() {
    for (t, p, p1, p2) in PSI {
        let (a, b, c) = psi_f64(t);
        assert!((a - p).abs() <= 1e-14 * p.max(1.0), "psi({t}) = {a} vs {p}");
        assert!((b - p1).abs() <= 1e-14 * p1.max(1.0), "psi'({t}) = {b} vs {p1}");
        assert!((c - p2).abs() <= 1e-15, "psi''({t})");
    }
}
