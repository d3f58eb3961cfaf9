//! Sampled versions of the geometric quantifiers used by the constructions:
//! sublevel pools, points on level sets, local Lipschitz bounds, and
//! displaced-ball inclusion checks.

use num_complex::Complex;

use super::state::CheckSummary;
use crate::calculus::mixed_hessian;
use crate::domain::{sample_domain_lenient, Domain, Proposal};
use crate::field::ScalarField;
use crate::space::{streams, CVec, GaussianSpec, NormalSource};

/// Sampling context shared by a construction.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    pub v: &'a Domain<f64>,
    pub spec: &'a GaussianSpec<f64>,
    pub proposal: Proposal<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(v: &'a Domain<f64>, spec: &'a GaussianSpec<f64>, proposal: Proposal<f64>) -> Self {
        Self { v, spec, proposal }
    }

    /// Up to `count` points of `{f < level}` (fewer, possibly none, when the
    /// set is thin); `stream` selects an independent proposal stream.
    pub fn sublevel(&self, f: &ScalarField<f64>, level: f64, count: usize, stream: u64) -> Vec<CVec<f64>> {
        if count == 0 {
            return Vec::new();
        }
        let prop = Proposal {
            stream: streams::sub(self.proposal.stream, stream),
            ..self.proposal.clone()
        };
        sample_domain_lenient(self.v, count, self.spec, &prop, |z| f.eval(z) < level).0
    }
}

/// Unit vector along the real gradient `2∂̄f`, from the closed form when
/// available and central differences otherwise.
pub fn gradient_direction(f: &ScalarField<f64>, z: &CVec<f64>) -> Option<CVec<f64>> {
    let g = match f.dbar(z) {
        Some(d) => CVec::from_entries(d.into_iter().map(|c| c * 2.0).collect()),
        None => {
            let x = z.to_real();
            let h = 1e-7 * (1.0 + z.norm());
            let g: Vec<f64> = (0..x.len())
                .map(|k| {
                    let mut p = x.clone();
                    p[k] += h;
                    let mut m = x.clone();
                    m[k] -= h;
                    (f.eval(&CVec::from_real(&p)) - f.eval(&CVec::from_real(&m))) / (2.0 * h)
                })
                .collect();
            CVec::from_real(&g)
        }
    };
    let len = g.norm();
    (len.is_finite() && len > 0.0).then(|| g.scale(1.0 / len))
}

/// A pair of points straddling the level set `{f = target}`: `inside` has
/// `f < target`, `outside` has `f ≥ target`, and they are within `1e-12`
/// relative distance of each other.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub inside: CVec<f64>,
    pub outside: CVec<f64>,
}

/// Finds a crossing of `{f = target}` on the line through `z` along the
/// gradient of `guide`, by doubling and bisection. Crossings where `f` jumps
/// to `+∞` (the boundary of `V` rather than the level set) are rejected.
pub fn level_crossing(
    f: &ScalarField<f64>,
    guide: &ScalarField<f64>,
    z: &CVec<f64>,
    target: f64,
    scale: f64,
) -> Option<Crossing> {
    let f0 = f.eval(z);
    if f0.is_nan() {
        return None;
    }
    let u = gradient_direction(guide, z)?;
    let below = f0 < target;
    let sign = if below { 1.0 } else { -1.0 };
    let at = |tau: f64| z.axpy(Complex::new(sign * tau, 0.0), &u);
    let (mut lo, mut hi) = (0.0, 1e-4 * scale);
    let mut found = false;
    for _ in 0..60 {
        let fv = f.eval(&at(hi));
        if fv.is_nan() {
            return None;
        }
        if (fv < target) != below {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * (1.0 + hi) {
            break;
        }
        if (f.eval(&at(mid)) < target) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (at(lo), at(hi));
    let (inside, outside) = if below { (a, b) } else { (b, a) };
    if !f.eval(&outside).is_finite() {
        return None;
    }
    Some(Crossing { inside, outside })
}

/// Crossings of `{f = target}` started from each seed point until `count`
/// are found.
pub fn shell(
    f: &ScalarField<f64>,
    guide: &ScalarField<f64>,
    seeds: &[CVec<f64>],
    target: f64,
    count: usize,
    scale: f64,
) -> Vec<Crossing> {
    let mut out = Vec::with_capacity(count);
    for z in seeds {
        if out.len() >= count {
            break;
        }
        if let Some(c) = level_crossing(f, guide, z, target, scale) {
            out.push(c);
        }
    }
    out
}

/// Local Lipschitz bound on a point set: the larger of the largest pairwise
/// difference quotient and the largest gradient norm at the points.
pub fn local_lipschitz(f: &ScalarField<f64>, pts: &[CVec<f64>]) -> f64 {
    let vals: Vec<f64> = pts.iter().map(|z| f.eval(z)).collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pts[i].distance(&pts[j]);
            if d > 0.0 && vals[i].is_finite() && vals[j].is_finite() {
                best = best.max((vals[i] - vals[j]).abs() / d);
            }
        }
    }
    for z in pts {
        let g = match f.dbar(z) {
            Some(d) => 2.0 * d.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            None => {
                let x = z.to_real();
                let h = 1e-7 * (1.0 + z.norm());
                let s: f64 = (0..x.len())
                    .map(|k| {
                        let mut p = x.clone();
                        p[k] += h;
                        let mut m = x.clone();
                        m[k] -= h;
                        let q = (f.eval(&CVec::from_real(&p)) - f.eval(&CVec::from_real(&m))) / (2.0 * h);
                        q * q
                    })
                    .sum();
                s.sqrt()
            }
        };
        if g.is_finite() {
            best = best.max(g);
        }
    }
    best
}

/// Frozen random unit directions for the inclusion checks.
pub fn check_directions(spec: &GaussianSpec<f64>, count: usize, stream: u64) -> Vec<CVec<f64>> {
    let n = spec.truncation();
    let mut src = NormalSource::new(spec.seed, streams::sub(streams::CERTIFY, stream), 0);
    (0..count)
        .map(|_| {
            let e: Vec<Complex<f64>> = (0..n)
                .map(|_| {
                    let (a, b) = src.normal_pair();
                    Complex::new(a, b)
                })
                .collect();
            CVec::from_entries(e).normalized()
        })
        .collect()
}

/// What a displaced point must satisfy.
#[derive(Clone, Copy, Debug)]
pub enum Want {
    /// `w ∈ V` and `f(w) < bound`.
    Below(f64),
    /// `w ∉ V` or `f(w) ≥ bound`.
    AtLeast(f64),
}

/// Checks `f(z − ε u)` for every point `z`, the unit directions `±∇guide(z)`
/// and the given random directions (the worst displacements in the closed
/// unit ball are on its boundary).
pub fn check_displacements(
    name: &str,
    f: &ScalarField<f64>,
    guide: &ScalarField<f64>,
    v: &Domain<f64>,
    points: &[CVec<f64>],
    directions: &[CVec<f64>],
    eps: f64,
    want: Want,
) -> CheckSummary {
    let mut worst = f64::INFINITY;
    let mut offender = None;
    let mut samples = 0usize;
    for z in points {
        let mut dirs: Vec<CVec<f64>> = Vec::with_capacity(directions.len() + 2);
        if let Some(u) = gradient_direction(guide, z) {
            dirs.push(u.scale(-1.0));
            dirs.push(u);
        }
        dirs.extend(directions.iter().cloned());
        for u in &dirs {
            let w = z.axpy(Complex::new(-eps, 0.0), u);
            samples += 1;
            let margin = match want {
                Want::Below(b) => {
                    if v.contains(&w) {
                        b - f.eval(&w)
                    } else {
                        f64::NEG_INFINITY
                    }
                }
                Want::AtLeast(b) => {
                    if v.contains(&w) {
                        let fw = f.eval(&w);
                        if fw >= b {
                            // a non-strict requirement: equality passes
                            (fw - b).max(f64::MIN_POSITIVE)
                        } else {
                            fw - b
                        }
                    } else {
                        f64::INFINITY
                    }
                }
            };
            let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            if margin < worst {
                worst = margin;
                if margin <= 0.0 {
                    offender = Some(w.to_pairs());
                }
            }
        }
    }
    CheckSummary {
        name: name.to_string(),
        samples,
        worst_margin: worst,
        offender,
    }
}

/// Smallest Hessian eigenvalue of `f` over `points` at each truncation in
/// `dims`, and the overall minimum with its location.
pub fn hessian_infimum(
    f: &ScalarField<f64>,
    points: &[CVec<f64>],
    dims: &[usize],
    h: f64,
) -> (f64, Vec<(usize, f64)>, Option<Vec<[f64; 2]>>) {
    let mut per_dim: Vec<(usize, f64)> = dims.iter().map(|&k| (k, f64::INFINITY)).collect();
    let mut best = f64::INFINITY;
    let mut at = None;
    for z in points {
        let Ok(hf) = mixed_hessian(f, z, h) else {
            continue;
        };
        for slot in per_dim.iter_mut() {
            let lam = hf.min_eigenvalue(slot.0.min(hf.dim));
            if lam < slot.1 {
                slot.1 = lam;
            }
            if lam < best {
                best = lam;
                at = Some(z.to_pairs());
            }
        }
    }
    (best, per_dim, at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustion::lipschitz_exhaustion;

    #[test]
    fn crossing_lands_on_level() {
        let b = Domain::unit_ball();
        let eta = lipschitz_exhaustion(&b, 0.0);
        let z = CVec::from_pairs(&[(0.1, 0.2), (-0.1, 0.0)]);
        let c = level_crossing(&eta, &eta, &z, 1.0, 1.0).unwrap();
        assert!(eta.eval(&c.inside) < 1.0 && eta.eval(&c.outside) >= 1.0);
        assert!((eta.eval(&c.inside) - 1.0).abs() < 1e-9);
        // the level beyond the domain is never reached
        assert!(level_crossing(&eta, &eta, &z, 1e9, 1.0).is_none());
    }

    #[test]
    fn displacement_checks() {
        let b = Domain::unit_ball();
        let eta = lipschitz_exhaustion(&b, 0.0);
        let spec = GaussianSpec::geometric(2, 1).unwrap();
        let dirs = check_directions(&spec, 4, 0);
        let z = vec![CVec::from_re(&[0.5, 0.0])];
        let ok = check_displacements("in", &eta, &eta, &b, &z, &dirs, 0.01, Want::Below(1.0));
        assert!(ok.passed());
        let bad = check_displacements("in", &eta, &eta, &b, &z, &dirs, 0.6, Want::Below(1.0));
        assert!(!bad.passed() && bad.offender.is_some());
    }
}
