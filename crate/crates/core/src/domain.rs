//! Open sets of truncated ℓ²: membership, distance to the boundary, uniform
//! inclusion and sublevel sets.
//!
//! Catalog domains carry closed-form distances. Arbitrary predicates fall back
//! to a numerical projection oracle, which is also used to cross-check the closed
//! forms.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::Real;
use crate::space::{streams, CVec, GaussianSpec, NormalSource};

pub type MembershipFn<T> = dyn Fn(&CVec<T>) -> bool + Send + Sync;

#[derive(Clone)]
pub enum Shape<T> {
    Ball { center: CVec<T>, radius: T },
    /// `|z_i| < r_i` for the listed coordinates; the remaining ones are free.
    Polydisc { radii: Vec<T> },
    /// `Re⟨z, n_k⟩ < b_k` with unit normals.
    Halfspaces { normals: Vec<CVec<T>>, offsets: Vec<T> },
    /// `|z_1| < |z_2| < r`.
    HartogsWedge { radius: T },
    FullSpace,
    /// `ρ < ‖z‖ < R`: pseudo-convex only in one complex dimension.
    HollowedBall { outer: T, inner: T },
    /// A user predicate; distances come from the numerical oracle.
    Predicate {
        membership: Arc<MembershipFn<T>>,
        center: CVec<T>,
        scale: T,
    },
}

impl<T: Real> fmt::Debug for Shape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Ball { center, radius } => write!(f, "Ball(center={:?}, r={radius})", center.to_pairs()),
            Shape::Polydisc { radii } => write!(f, "Polydisc({radii:?})"),
            Shape::Halfspaces { offsets, .. } => write!(f, "Halfspaces({} faces)", offsets.len()),
            Shape::HartogsWedge { radius } => write!(f, "HartogsWedge(r={radius})"),
            Shape::FullSpace => write!(f, "FullSpace"),
            Shape::HollowedBall { outer, inner } => write!(f, "HollowedBall({inner} < |z| < {outer})"),
            Shape::Predicate { scale, .. } => write!(f, "Predicate(scale={scale})"),
        }
    }
}

/// Tuning of the numerical projection oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub starts: usize,
    pub dense_directions: usize,
    pub march_steps: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            dense_directions: 2048,
            march_steps: 64,
            seed: 0x5eed,
        }
    }
}

/// An open set `V ⊆ ℓ²` at finite truncation.
#[derive(Clone)]
pub struct Domain<T> {
    name: String,
    shape: Shape<T>,
    pub pseudoconvex_hint: Option<bool>,
    pub oracle: OracleOptions,
}

impl<T: Real> fmt::Debug for Domain<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("name", &self.name)
            .field("shape", &self.shape)
            .field("pseudoconvex_hint", &self.pseudoconvex_hint)
            .finish()
    }
}

impl<T: Real> Domain<T> {
    fn build(name: &str, shape: Shape<T>, hint: Option<bool>) -> Self {
        Self {
            name: name.to_string(),
            shape,
            pseudoconvex_hint: hint,
            oracle: OracleOptions::default(),
        }
    }

    pub fn ball(center: CVec<T>, radius: T) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self::build("ball", Shape::Ball { center, radius }, Some(true)))
    }

    pub fn unit_ball() -> Self {
        Self::build(
            "ball",
            Shape::Ball {
                center: CVec::zeros(1),
                radius: T::one(),
            },
            Some(true),
        )
    }

    pub fn polydisc(radii: Vec<T>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidParameter("polydisc needs at least one radius".into()));
        }
        for &r in &radii {
            positive("polydisc radius", r)?;
        }
        Ok(Self::build("polydisc", Shape::Polydisc { radii }, Some(true)))
    }

    /// Intersection of `{Re⟨z, n_k⟩ < b_k}`; normals are normalized.
    pub fn halfspace_intersection(normals: Vec<CVec<T>>, offsets: Vec<T>) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(Error::InvalidParameter(
                "halfspace intersection needs matching, non-empty normals and offsets".into(),
            ));
        }
        let mut unit = Vec::with_capacity(normals.len());
        let mut b = Vec::with_capacity(offsets.len());
        for (n, &o) in normals.iter().zip(&offsets) {
            let len = n.norm();
            if !(len > T::zero() && len.is_finite()) || !o.is_finite() {
                return Err(Error::InvalidParameter("degenerate halfspace normal".into()));
            }
            unit.push(n.scale(T::one() / len));
            b.push(o / len);
        }
        Ok(Self::build(
            "halfspace_intersection",
            Shape::Halfspaces {
                normals: unit,
                offsets: b,
            },
            Some(true),
        ))
    }

    pub fn hartogs_wedge(radius: T) -> Result<Self> {
        positive("wedge radius", radius)?;
        Ok(Self::build("hartogs_wedge", Shape::HartogsWedge { radius }, Some(true)))
    }

    pub fn full_space() -> Self {
        Self::build("full_space", Shape::FullSpace, Some(true))
    }

    /// `B_R(0) \ B̄_ρ(0)`; not pseudo-convex in two or more complex dimensions.
    pub fn hollowed_ball(outer: T, inner: T) -> Result<Self> {
        positive("outer radius", outer)?;
        positive("inner radius", inner)?;
        if inner >= outer {
            return Err(Error::InvalidParameter("inner radius must be below outer".into()));
        }
        Ok(Self::build("hollowed_ball", Shape::HollowedBall { outer, inner }, Some(false)))
    }

    /// A domain given only by membership; distances are computed numerically.
    pub fn from_predicate(
        name: &str,
        center: CVec<T>,
        scale: T,
        membership: impl Fn(&CVec<T>) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        positive("scale", scale)?;
        if !membership(&center) {
            return Err(Error::InvalidParameter("predicate domain center is not a member".into()));
        }
        Ok(Self::build(
            name,
            Shape::Predicate {
                membership: Arc::new(membership),
                center,
                scale,
            },
            None,
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn is_full_space(&self) -> bool {
        matches!(self.shape, Shape::FullSpace)
    }

    pub fn has_closed_form_distance(&self) -> bool {
        !matches!(self.shape, Shape::Predicate { .. })
    }

    /// A representative interior point used to center proposals.
    pub fn center(&self, n: usize) -> CVec<T> {
        match &self.shape {
            Shape::Ball { center, .. } => center.with_ambient_dim(n.max(center.ambient_dim())),
            Shape::HartogsWedge { radius } => {
                let mut c = CVec::zeros(n.max(2));
                c.set(1, Complex::new(*radius * T::c(0.5), T::zero()));
                c
            }
            Shape::HollowedBall { outer, inner } => {
                CVec::basis(0, n).scale((*outer + *inner) * T::c(0.5))
            }
            Shape::Predicate { center, .. } => center.with_ambient_dim(n.max(center.ambient_dim())),
            _ => CVec::zeros(n),
        }
    }

    /// A length scale of the domain.
    pub fn scale(&self) -> T {
        match &self.shape {
            Shape::Ball { radius, .. } => *radius,
            Shape::Polydisc { radii } => radii.iter().fold(T::zero(), |m, &r| m.max(r)),
            Shape::HartogsWedge { radius } => *radius,
            Shape::HollowedBall { outer, .. } => *outer,
            Shape::Predicate { scale, .. } => *scale,
            Shape::Halfspaces { .. } | Shape::FullSpace => T::one(),
        }
    }

    pub fn contains(&self, z: &CVec<T>) -> bool {
        if !z.is_finite() {
            return false;
        }
        match &self.shape {
            Shape::Ball { center, radius } => z.distance(center) < *radius,
            Shape::Polydisc { radii } => radii.iter().enumerate().all(|(i, &r)| z.get(i).norm() < r),
            Shape::Halfspaces { normals, offsets } => normals
                .iter()
                .zip(offsets)
                .all(|(n, &b)| z.dot(n).re < b),
            Shape::HartogsWedge { radius } => {
                let (a, b) = (z.get(0).norm(), z.get(1).norm());
                a < b && b < *radius
            }
            Shape::FullSpace => true,
            Shape::HollowedBall { outer, inner } => {
                let r = z.norm();
                *inner < r && r < *outer
            }
            Shape::Predicate { membership, .. } => membership(z),
        }
    }

    /// Closed-form signed distance (positive inside, `≤ 0` outside for catalog
    /// shapes); the numerical oracle for predicate domains (`0` outside).
    pub fn signed_distance(&self, z: &CVec<T>) -> T {
        match &self.shape {
            Shape::Ball { center, radius } => *radius - z.distance(center),
            Shape::Polydisc { radii } => radii
                .iter()
                .enumerate()
                .map(|(i, &r)| r - z.get(i).norm())
                .fold(T::infinity(), T::min),
            Shape::Halfspaces { normals, offsets } => normals
                .iter()
                .zip(offsets)
                .map(|(n, &b)| b - z.dot(n).re)
                .fold(T::infinity(), T::min),
            Shape::HartogsWedge { radius } => {
                let (a, b) = (z.get(0).norm(), z.get(1).norm());
                ((b - a) / T::SQRT_2()).min(*radius - b)
            }
            Shape::FullSpace => T::infinity(),
            Shape::HollowedBall { outer, inner } => {
                let r = z.norm();
                (*outer - r).min(r - *inner)
            }
            Shape::Predicate { .. } => {
                if self.contains(z) {
                    self.numerical_distance(z)
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Closed-form `∂̄_j d(·, ∂V)` at a member point, taken on the active
    /// boundary piece (a one-sided derivative where pieces tie). `None` for
    /// predicate domains.
    pub fn distance_dbar(&self, z: &CVec<T>) -> Option<Vec<Complex<T>>> {
        let n = z.ambient_dim();
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::c(0.5);
        // ∂̄_j |w| = w_j / (2|w|), zero at the origin by convention
        let radial = |w: Complex<T>, r: T| if r > T::zero() { w * (half / r) } else { zero };
        let mut g = vec![zero; n];
        match &self.shape {
            Shape::Ball { center, .. } => {
                let n = n.max(center.ambient_dim());
                g.resize(n, zero);
                let w = z.with_ambient_dim(n) - center.with_ambient_dim(n);
                let r = w.norm();
                for (gj, &wj) in g.iter_mut().zip(w.entries()) {
                    *gj = -radial(wj, r);
                }
            }
            Shape::Polydisc { radii } => {
                let (i, _) = radii
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| (i, r - z.get(i).norm()))
                    .fold((0, T::infinity()), |a, b| if b.1 < a.1 { b } else { a });
                g.resize(n.max(i + 1), zero);
                g[i] = -radial(z.get(i), z.get(i).norm());
            }
            Shape::Halfspaces { normals, offsets } => {
                let (k, _) = normals
                    .iter()
                    .zip(offsets)
                    .map(|(nv, &b)| b - z.dot(nv).re)
                    .enumerate()
                    .fold((0, T::infinity()), |a, b| if b.1 < a.1 { b } else { a });
                let nv = &normals[k];
                g.resize(n.max(nv.ambient_dim()), zero);
                for (j, gj) in g.iter_mut().enumerate() {
                    *gj = -nv.get(j) * half;
                }
            }
            Shape::HartogsWedge { radius } => {
                g.resize(n.max(2), zero);
                let (a, b) = (z.get(0).norm(), z.get(1).norm());
                if (b - a) / T::SQRT_2() <= *radius - b {
                    let s = T::SQRT_2().recip();
                    g[0] = -radial(z.get(0), a) * s;
                    g[1] = radial(z.get(1), b) * s;
                } else {
                    g[1] = -radial(z.get(1), b);
                }
            }
            Shape::FullSpace => {}
            Shape::HollowedBall { outer, inner } => {
                let r = z.norm();
                let sign = if *outer - r <= r - *inner { -T::one() } else { T::one() };
                for (gj, &wj) in g.iter_mut().zip(z.entries()) {
                    *gj = radial(wj, r) * sign;
                }
            }
            Shape::Predicate { .. } => return None,
        }
        Some(g)
    }

    /// `d(z, ∂V)` for a member `z`; `+∞` when `V = ℓ²`.
    pub fn boundary_distance(&self, z: &CVec<T>) -> Result<T> {
        if !self.contains(z) {
            return Err(Error::OutsideDomain {
                what: format!("boundary distance of {}", self.name),
                point: z.to_pairs(),
            });
        }
        Ok(self.signed_distance(z))
    }

    /// First exit distance along the unit direction `u`, or `+∞` if the ray
    /// stays inside up to `reach`.
    fn exit_distance(&self, z: &CVec<T>, u: &CVec<T>, reach: T) -> T {
        let steps = self.oracle.march_steps.max(4);
        let ds = reach / T::from_count(steps);
        let mut lo = T::zero();
        let mut hi = None;
        for k in 1..=steps {
            let s = ds * T::from_count(k);
            if !self.contains(&z.axpy(Complex::new(s, T::zero()), u)) {
                hi = Some(s);
                break;
            }
            lo = s;
        }
        let Some(mut hi) = hi else {
            return T::infinity();
        };
        for _ in 0..80 {
            let mid = (lo + hi) * T::c(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.contains(&z.axpy(Complex::new(mid, T::zero()), u)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Distance to the complement by minimizing the ray-exit distance over the
    /// unit sphere: axis and random starts refined by a shrinking pattern
    /// search, with a dense random-direction scan as fallback.
    pub fn numerical_distance(&self, z: &CVec<T>) -> T {
        if self.is_full_space() {
            return T::infinity();
        }
        let n = z.ambient_dim().max(1);
        let z = z.with_ambient_dim(n);
        let reach = T::c(8.0) * (self.scale() + z.norm());
        let dim = 2 * n;
        let mut src = NormalSource::new(
            self.oracle.seed,
            streams::PROJECTION,
            0,
        );
        let random_dir = |src: &mut NormalSource| {
            let xs: Vec<T> = (0..dim)
                .map(|k| {
                    let (a, b) = src.normal_pair();
                    T::c(if k % 2 == 0 { a } else { b })
                })
                .collect();
            CVec::from_real(&xs).normalized()
        };

        let mut starts: Vec<CVec<T>> = Vec::new();
        for k in 0..dim {
            let mut xs = vec![T::zero(); dim];
            xs[k] = T::one();
            starts.push(CVec::from_real(&xs));
            xs[k] = -T::one();
            starts.push(CVec::from_real(&xs));
        }
        while starts.len() < self.oracle.starts {
            starts.push(random_dir(&mut src));
        }
        let mut scored: Vec<(T, CVec<T>)> = starts
            .into_iter()
            .map(|u| (self.exit_distance(&z, &u, reach), u))
            .collect();
        for _ in 0..self.oracle.dense_directions {
            let u = random_dir(&mut src);
            scored.push((self.exit_distance(&z, &u, reach), u));
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

        let mut best = T::infinity();
        for (d0, u0) in scored.into_iter().take(self.oracle.starts) {
            best = best.min(self.refine_direction(&z, u0, d0, reach));
        }
        best
    }

    fn refine_direction(&self, z: &CVec<T>, mut u: CVec<T>, mut d: T, reach: T) -> T {
        if !d.is_finite() {
            return d;
        }
        let dim = 2 * z.ambient_dim();
        let mut step = T::c(0.25);
        let floor = T::c(1e-10);
        while step > floor {
            let mut improved = false;
            let base = u.to_real();
            for k in 0..dim {
                for sign in [T::one(), -T::one()] {
                    let mut xs = base.clone();
                    xs[k] = xs[k] + sign * step;
                    let v = CVec::from_real(&xs).normalized();
                    let dv = self.exit_distance(z, &v, reach);
                    if dv < d {
                        d = dv;
                        u = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step = step * T::c(0.5);
            }
        }
        d
    }
}

fn positive<T: Real>(what: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

/// `inf_{z∈S} d(z, ∂V)`; `S ⊂° V` iff the result is positive.
pub fn uniform_inclusion_margin<T: Real>(s: &[CVec<T>], v: &Domain<T>) -> Result<T> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("uniform inclusion needs a non-empty set".into()));
    }
    let offenders: Vec<&CVec<T>> = s.iter().filter(|z| !v.contains(z)).collect();
    if let Some(first) = offenders.first() {
        return Err(Error::Offenders {
            count: offenders.len(),
            first: first.to_pairs(),
        });
    }
    Ok(s.iter()
        .map(|z| v.signed_distance(z))
        .fold(T::infinity(), T::min))
}

/// `V_t = {z ∈ V : η(z) ≤ t}` (or `< t` when `strict`).
#[derive(Clone)]
pub struct SublevelSet<T> {
    pub field: ScalarField<T>,
    pub level: T,
    pub strict: bool,
    pub domain: Domain<T>,
}

impl<T: Real> SublevelSet<T> {
    pub fn contains(&self, z: &CVec<T>) -> bool {
        if !self.domain.contains(z) {
            return false;
        }
        let v = self.field.eval(z);
        if self.strict {
            v < self.level
        } else {
            v <= self.level
        }
    }
}

pub fn sublevel<T: Real>(field: &ScalarField<T>, t: T, v: &Domain<T>) -> SublevelSet<T> {
    SublevelSet {
        field: field.clone(),
        level: t,
        strict: false,
        domain: v.clone(),
    }
}

/// Proposal used by rejection sampling: an isotropic Gaussian around the
/// domain center with per-real-coordinate deviation
/// `proposal_scale · scale(V) / √(2n)`.
#[derive(Clone, Debug)]
pub struct Proposal<T> {
    pub proposal_scale: T,
    pub stream: u64,
    pub batch: usize,
    pub min_acceptance: f64,
    pub max_draws: usize,
}

impl<T: Real> Default for Proposal<T> {
    fn default() -> Self {
        Self {
            proposal_scale: T::one(),
            stream: 0,
            batch: 10_000,
            min_acceptance: 1e-4,
            max_draws: 20_000_000,
        }
    }
}

impl<T: Real> Proposal<T> {
    pub fn on_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn scaled(mut self, s: T) -> Self {
        self.proposal_scale = s;
        self
    }
}

struct Draws<T> {
    points: Vec<CVec<T>>,
    draws: usize,
    complete: bool,
}

fn rejection_sample<T: Real>(
    v: &Domain<T>,
    count: usize,
    spec: &GaussianSpec<T>,
    proposal: &Proposal<T>,
    accept: impl Fn(&CVec<T>) -> bool,
) -> Draws<T> {
    let n = spec.truncation();
    let center = v.center(n).with_ambient_dim(n);
    let sigma = proposal.proposal_scale * v.scale() / T::from_count(2 * n).sqrt();
    let mut src = NormalSource::new(
        spec.seed,
        streams::sub(streams::SUBLEVEL, proposal.stream),
        0,
    );
    let mut points = Vec::with_capacity(count.min(1 << 16));
    let mut draws = 0usize;
    while points.len() < count {
        let entries: Vec<Complex<T>> = (0..n)
            .map(|_| {
                let (a, b) = src.normal_pair();
                Complex::new(T::c(a), T::c(b)) * sigma
            })
            .collect();
        let z = &center + &CVec::from_entries(entries);
        draws += 1;
        if v.contains(&z) && accept(&z) {
            points.push(z);
        }
        let thin = draws >= proposal.batch
            && draws % proposal.batch == 0
            && (points.len() as f64) < proposal.min_acceptance * draws as f64;
        if thin || (draws >= proposal.max_draws && points.len() < count) {
            return Draws { points, draws, complete: false };
        }
    }
    Draws { points, draws, complete: true }
}

/// Rejection-samples `count` points of `V` satisfying `accept`.
pub fn sample_domain_where<T: Real>(
    v: &Domain<T>,
    count: usize,
    spec: &GaussianSpec<T>,
    proposal: &Proposal<T>,
    level_for_errors: f64,
    accept: impl Fn(&CVec<T>) -> bool,
) -> Result<Vec<CVec<T>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be ≥ 1".into()));
    }
    let d = rejection_sample(v, count, spec, proposal, accept);
    if d.complete {
        Ok(d.points)
    } else {
        Err(Error::ThinSublevel {
            level: level_for_errors,
            accepted: d.points.len(),
            draws: d.draws,
        })
    }
}

/// Like [`sample_domain_where`], but a thin or empty set is not an error: the
/// points accepted before the acceptance test gave up are returned (possibly
/// none), together with the number of proposals drawn.
pub fn sample_domain_lenient<T: Real>(
    v: &Domain<T>,
    count: usize,
    spec: &GaussianSpec<T>,
    proposal: &Proposal<T>,
    accept: impl Fn(&CVec<T>) -> bool,
) -> (Vec<CVec<T>>, usize) {
    let d = rejection_sample(v, count, spec, proposal, accept);
    (d.points, d.draws)
}

/// Rejection-samples `count` points of a sublevel set.
pub fn sample_sublevel<T: Real>(
    set: &SublevelSet<T>,
    count: usize,
    spec: &GaussianSpec<T>,
    proposal: &Proposal<T>,
) -> Result<Vec<CVec<T>>> {
    sample_domain_where(&set.domain, count, spec, proposal, set.level.f64(), |z| {
        let v = set.field.eval(z);
        if set.strict {
            v < set.level
        } else {
            v <= set.level
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2(a: f64, b: f64) -> CVec<f64> {
        CVec::from_re(&[a, b])
    }

    #[test]
    fn ball_distances() {
        let b = Domain::<f64>::unit_ball();
        assert_eq!(b.boundary_distance(&z2(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(b.boundary_distance(&z2(0.5, 0.0)).unwrap(), 0.5);
        assert!(b.boundary_distance(&z2(1.0, 0.0)).is_err());
        assert!(Domain::ball(CVec::<f64>::zeros(2), 0.0).is_err());
    }

    #[test]
    fn catalog_distances() {
        let p = Domain::polydisc(vec![1.0, 1.0]).unwrap();
        assert_eq!(p.boundary_distance(&z2(0.5, 0.0)).unwrap(), 0.5);
        let w = Domain::hartogs_wedge(1.0).unwrap();
        let d = w.boundary_distance(&z2(0.0, 0.5)).unwrap();
        assert!((d - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(
            Domain::<f64>::full_space().boundary_distance(&z2(3.0, 4.0)).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn oracle_matches_closed_form_on_wedge() {
        let w = Domain::hartogs_wedge(1.0).unwrap();
        let z = z2(0.0, 0.5);
        let d = w.numerical_distance(&z);
        assert!((d - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-6, "{d}");
    }

    #[test]
    fn inclusion_margin() {
        let b = Domain::<f64>::unit_ball();
        assert_eq!(uniform_inclusion_margin(&[z2(0.0, 0.0)], &b).unwrap(), 1.0);
        assert!(uniform_inclusion_margin(&[z2(0.0, 0.0), z2(1.0, 0.0)], &b).is_err());
    }

    #[test]
    fn sublevel_sampling() {
        let spec = GaussianSpec::geometric(2, 3).unwrap();
        let b = Domain::<f64>::unit_ball();
        let set = sublevel(&ScalarField::norm_sqr(), 0.25, &b);
        let pts = sample_sublevel(&set, 200, &spec, &Proposal::default()).unwrap();
        assert!(pts.iter().all(|z| z.norm() <= 0.5));
        let empty = sublevel(&ScalarField::norm_sqr(), -1.0, &b);
        assert!(matches!(
            sample_sublevel(&empty, 10, &spec, &Proposal::default()),
            Err(Error::ThinSublevel { .. })
        ));
    }
}
