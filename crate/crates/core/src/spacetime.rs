//! Discrete causal geometry of two-dimensional Minkowski space.
//!
//! Minimal double cones have unit diameter. The cone `O^m_x + (t, 0)` is
//! centred at time `τ = t` for integer `x` and at `τ = t − ½` for
//! half-integer `x`, so the slice `t = 0` is a thickened Cauchy surface with
//! centres `(0, x)` and `(−½, x)`. In lightcone coordinates
//! `u = τ + x`, `v = τ − x` the centres form the integer lattice `ℤ²` and
//! every double cone of the net is a lattice rectangle `[u₁,u₂] × [v₁,v₂]`.
//! The causal order is the product order on `(u, v)`.
//!
//! Pasts and wedges are infinite, so they are represented as membership
//! predicates ([`ConeSet`]) rather than materialized sets.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfIndex(i64);

impl HalfIndex {
    pub const fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub const fn integer(i: i64) -> Self {
        Self(2 * i)
    }

    /// `x + ½`.
    pub const fn half_above(x: i64) -> Self {
        Self(2 * x + 1)
    }

    pub fn from_f64(value: f64) -> Option<Self> {
        let twice = value * 2.0;
        if twice.is_finite() && (twice - twice.round()).abs() < 1e-9 {
            Some(Self(twice.round() as i64))
        } else {
            None
        }
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Largest integer not above the value.
    pub const fn floor(self) -> i64 {
        self.0.div_euclid(2)
    }

    /// Smallest integer not below the value.
    pub const fn ceil(self) -> i64 {
        (self.0 + 1).div_euclid(2)
    }

    /// Shifts by `halves` half-steps.
    pub const fn offset(self, halves: i64) -> Self {
        Self(self.0 + halves)
    }
}

impl fmt::Display for HalfIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        HalfIndex::from_f64(v)
            .ok_or_else(|| serde::de::Error::custom(format!("{v} is not a multiple of 1/2")))
    }
}

/// Minimal double cone `O^m_x + (t, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinimalCone {
    pub x: HalfIndex,
    pub t: i64,
}

impl MinimalCone {
    pub const fn new(x: HalfIndex, t: i64) -> Self {
        Self { x, t }
    }

    /// Twice the centre time.
    pub const fn center_time_twice(&self) -> i64 {
        2 * self.t - self.x.twice().rem_euclid(2)
    }

    pub const fn u(&self) -> i64 {
        (self.center_time_twice() + self.x.twice()) / 2
    }

    pub const fn v(&self) -> i64 {
        (self.center_time_twice() - self.x.twice()) / 2
    }

    pub const fn from_lightcone(u: i64, v: i64) -> Self {
        let x2 = u - v;
        let tau2 = u + v;
        let t = (tau2 + x2.rem_euclid(2)) / 2;
        Self {
            x: HalfIndex::from_twice(x2),
            t,
        }
    }

    /// Integer time and space translation.
    pub const fn translate(&self, dt: i64, dx: i64) -> Self {
        Self {
            x: HalfIndex::from_twice(self.x.twice() + 2 * dx),
            t: self.t + dt,
        }
    }

    /// `self` lies in the causal past of `other` (reflexive).
    pub const fn precedes(&self, other: &MinimalCone) -> bool {
        self.u() <= other.u() && self.v() <= other.v()
    }

    pub const fn causally_related(&self, other: &MinimalCone) -> bool {
        self.precedes(other) || other.precedes(self)
    }
}

impl fmt::Display for MinimalCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O^m_{}+({},0)", self.x, self.t)
    }
}

/// A double cone of the net: all minimal cones in a lightcone rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    u_min: i64,
    u_max: i64,
    v_min: i64,
    v_max: i64,
}

impl Region {
    pub fn minimal(cone: MinimalCone) -> Self {
        Self {
            u_min: cone.u(),
            u_max: cone.u(),
            v_min: cone.v(),
            v_max: cone.v(),
        }
    }

    /// Canonical rectangle from lightcone bounds (swapped bounds are ordered).
    pub fn from_bounds(u: (i64, i64), v: (i64, i64)) -> Self {
        Self {
            u_min: u.0.min(u.1),
            u_max: u.0.max(u.1),
            v_min: v.0.min(v.1),
            v_max: v.0.max(v.1),
        }
    }

    /// Smallest double cone containing both minimal cones.
    pub fn span_cone(a: MinimalCone, b: MinimalCone) -> Self {
        Self::minimal(a).join(&Self::minimal(b))
    }

    /// Double cone spanned by a Cauchy-surface interval `(i, j)`.
    pub fn interval(i: HalfIndex, j: HalfIndex) -> Self {
        Self::span_cone(MinimalCone::new(i, 0), MinimalCone::new(j, 0))
    }

    /// Smallest double cone containing both regions (`O₁ ∨ O₂`).
    pub fn join(&self, other: &Region) -> Region {
        Region {
            u_min: self.u_min.min(other.u_min),
            u_max: self.u_max.max(other.u_max),
            v_min: self.v_min.min(other.v_min),
            v_max: self.v_max.max(other.v_max),
        }
    }

    pub fn u_bounds(&self) -> (i64, i64) {
        (self.u_min, self.u_max)
    }

    pub fn v_bounds(&self) -> (i64, i64) {
        (self.v_min, self.v_max)
    }

    /// Minimal cones along the right-forward lightlike direction.
    pub fn n_plus(&self) -> usize {
        (self.u_max - self.u_min + 1) as usize
    }

    /// Minimal cones along the left-forward lightlike direction.
    pub fn n_minus(&self) -> usize {
        (self.v_max - self.v_min + 1) as usize
    }

    /// `n(O) = n₊ + n₋ − 1`; the local algebra has linear dimension `2^n(O)`.
    pub fn n_cones(&self) -> usize {
        self.n_plus() + self.n_minus() - 1
    }

    pub fn contains(&self, cone: &MinimalCone) -> bool {
        (self.u_min..=self.u_max).contains(&cone.u()) && (self.v_min..=self.v_max).contains(&cone.v())
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        other.u_min <= self.u_min
            && self.u_max <= other.u_max
            && other.v_min <= self.v_min
            && self.v_max <= other.v_max
    }

    pub fn minimals(&self) -> Vec<MinimalCone> {
        let mut out = Vec::with_capacity(self.n_plus() * self.n_minus());
        for u in self.u_min..=self.u_max {
            for v in self.v_min..=self.v_max {
                out.push(MinimalCone::from_lightcone(u, v));
            }
        }
        out.sort_by_key(|c| (c.center_time_twice(), c.x));
        out
    }

    /// Cones lying on the time-zero thickened Cauchy surface.
    pub fn cauchy_sites(&self) -> Vec<HalfIndex> {
        let mut sites: Vec<HalfIndex> =
            self.minimals().into_iter().filter(|c| c.t == 0).map(|c| c.x).collect();
        sites.sort();
        sites
    }

    pub fn translate(&self, dt: i64, dx: i64) -> Region {
        Region {
            u_min: self.u_min + dt + dx,
            u_max: self.u_max + dt + dx,
            v_min: self.v_min + dt - dx,
            v_max: self.v_max + dt - dx,
        }
    }

    /// Rectangle extended by `du` cones towards smaller `u` and `dv` cones
    /// towards smaller `v`.
    pub fn extend_past(&self, du: i64, dv: i64) -> Region {
        Region {
            u_min: self.u_min - du,
            v_min: self.v_min - dv,
            ..*self
        }
    }

    /// `self ∩ I₋(other)`, if nonempty.
    pub fn intersect_backward_cone(&self, other: &Region) -> Option<Region> {
        let r = Region {
            u_min: self.u_min,
            u_max: self.u_max.min(other.u_max),
            v_min: self.v_min,
            v_max: self.v_max.min(other.v_max),
        };
        (r.u_min <= r.u_max && r.v_min <= r.v_max).then_some(r)
    }

    /// `self` lies in the left wedge of `other` (to its left, spacelike).
    pub fn is_left_of(&self, other: &Region) -> bool {
        spacelike_separated(self, other) && self.u_max < other.u_min
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[u {}..{}] x [v {}..{}] (n+={}, n-={}, n={})",
            self.u_min,
            self.u_max,
            self.v_min,
            self.v_max,
            self.n_plus(),
            self.n_minus(),
            self.n_cones()
        )
    }
}

/// No minimal cone of one region is in the causal past or future of any
/// minimal cone of the other (`|Δx| > |Δτ|` for all pairs).
pub fn spacelike_separated(r1: &Region, r2: &Region) -> bool {
    let m2 = r2.minimals();
    r1.minimals().iter().all(|a| {
        m2.iter().all(|b| {
            let dx = (a.x.twice() - b.x.twice()).abs();
            let dt = (a.center_time_twice() - b.center_time_twice()).abs();
            dx > dt
        })
    })
}

/// Lazily evaluated (possibly infinite) set of minimal cones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeSet {
    /// `u ≤ u_max, v ≤ v_max`
    Backward { u_max: i64, v_max: i64 },
    /// `u ≥ u_min, v ≥ v_min`
    Forward { u_min: i64, v_min: i64 },
    /// `u ≤ u_max, v ≥ v_min`
    LeftWedge { u_max: i64, v_min: i64 },
    /// `u ≥ u_min, v ≤ v_max`
    RightWedge { u_min: i64, v_max: i64 },
    Union(Vec<ConeSet>),
    Intersection(Vec<ConeSet>),
}

impl ConeSet {
    pub fn contains(&self, c: &MinimalCone) -> bool {
        let (u, v) = (c.u(), c.v());
        match self {
            ConeSet::Backward { u_max, v_max } => u <= *u_max && v <= *v_max,
            ConeSet::Forward { u_min, v_min } => u >= *u_min && v >= *v_min,
            ConeSet::LeftWedge { u_max, v_min } => u <= *u_max && v >= *v_min,
            ConeSet::RightWedge { u_min, v_max } => u >= *u_min && v <= *v_max,
            ConeSet::Union(sets) => sets.iter().any(|s| s.contains(c)),
            ConeSet::Intersection(sets) => sets.iter().all(|s| s.contains(c)),
        }
    }

    pub fn contains_region(&self, r: &Region) -> bool {
        r.minimals().iter().all(|c| self.contains(c))
    }
}

/// `I₋(R)`: minimal cones inside the union of backward light cones of `R`.
pub fn backward_cone(r: &Region) -> ConeSet {
    ConeSet::Backward {
        u_max: r.u_max,
        v_max: r.v_max,
    }
}

pub fn forward_cone(r: &Region) -> ConeSet {
    ConeSet::Forward {
        u_min: r.u_min,
        v_min: r.v_min,
    }
}

/// Weak common past `I₋(R₁) ∪ I₋(R₂)`.
pub fn wpast(r1: &Region, r2: &Region) -> ConeSet {
    ConeSet::Union(vec![backward_cone(r1), backward_cone(r2)])
}

/// Common past `I₋(R₁) ∩ I₋(R₂)`.
pub fn cpast(r1: &Region, r2: &Region) -> ConeSet {
    ConeSet::Backward {
        u_max: r1.u_max.min(r2.u_max),
        v_max: r1.v_max.min(r2.v_max),
    }
}

/// Strong common past: intersection of the backward light cones of every
/// point of `R₁ ∪ R₂`. A minimal cone fits below every point iff its top
/// vertex lies below the lowest points of both regions.
pub fn spast(r1: &Region, r2: &Region) -> ConeSet {
    ConeSet::Backward {
        u_max: r1.u_min.min(r2.u_min) - 1,
        v_max: r1.v_min.min(r2.v_min) - 1,
    }
}

/// Smallest wedges and light cones containing a double cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalBounds {
    pub left_wedge: ConeSet,
    pub right_wedge: ConeSet,
    pub future: ConeSet,
    pub past: ConeSet,
}

pub fn wedges_and_bounds(r: &Region) -> CausalBounds {
    CausalBounds {
        left_wedge: ConeSet::LeftWedge {
            u_max: r.u_max,
            v_min: r.v_min,
        },
        right_wedge: ConeSet::RightWedge {
            u_min: r.u_min,
            v_max: r.v_max,
        },
        future: forward_cone(r),
        past: backward_cone(r),
    }
}

/// The first-guess common-past localization `O_a ∨ O_b − (t, 0)` for the
/// smallest `t ≥ 0` placing it inside `cpast(O_a, O_b)`.
pub fn first_guess_common_past(a: &Region, b: &Region) -> (i64, Region) {
    let joined = a.join(b);
    let cp = cpast(a, b);
    let mut t = 0;
    loop {
        let shifted = joined.translate(-t, 0);
        if cp.contains_region(&shifted) {
            return (t, shifted);
        }
        t += 1;
    }
}

/// A labelled layer of a lattice diagram.
pub struct Layer<'a> {
    pub label: char,
    pub set: &'a dyn Fn(&MinimalCone) -> bool,
}

/// ASCII diagram: one row per half time step (latest first), one column per
/// half-integer site. Each cone shows the label of the first layer containing
/// it, or `.` if none does.
pub fn render_text(layers: &[Layer<'_>], x_range: (i64, i64), t_range: (i64, i64)) -> String {
    let (x_lo, x_hi) = (2 * x_range.0, 2 * x_range.1);
    let (tau_lo, tau_hi) = (2 * t_range.0, 2 * t_range.1 + 1);
    let mut out = String::new();
    for tau2 in (tau_lo..=tau_hi).rev() {
        out.push_str(&format!("{:>5} |", format!("{}", tau2 as f64 / 2.0)));
        for x2 in x_lo..=x_hi {
            if (tau2 - x2).rem_euclid(2) != 0 {
                out.push(' ');
                continue;
            }
            let cone = MinimalCone::from_lightcone((tau2 + x2) / 2, (tau2 - x2) / 2);
            let ch = layers
                .iter()
                .find(|l| (l.set)(&cone))
                .map(|l| l.label)
                .unwrap_or('.');
            out.push(ch);
        }
        out.push('\n');
    }
    out.push_str(&format!("      +{}\n", "-".repeat((x_hi - x_lo + 1) as usize)));
    out.push_str(&format!("       x from {} to {}\n", x_range.0, x_range.1));
    out
}

/// SVG rendering of the same diagram with one diamond per minimal cone.
pub fn render_svg(layers: &[Layer<'_>], x_range: (i64, i64), t_range: (i64, i64)) -> String {
    const PALETTE: [&str; 6] = ["#d1495b", "#00798c", "#edae49", "#66a182", "#30638e", "#8e6c8a"];
    let scale = 40.0;
    let (x_lo, x_hi) = (2 * x_range.0, 2 * x_range.1);
    let (tau_lo, tau_hi) = (2 * t_range.0, 2 * t_range.1 + 1);
    let width = (x_hi - x_lo + 2) as f64 * scale / 2.0;
    let height = (tau_hi - tau_lo + 2) as f64 * scale / 2.0;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    for tau2 in tau_lo..=tau_hi {
        for x2 in x_lo..=x_hi {
            if (tau2 - x2).rem_euclid(2) != 0 {
                continue;
            }
            let cone = MinimalCone::from_lightcone((tau2 + x2) / 2, (tau2 - x2) / 2);
            let fill = layers
                .iter()
                .position(|l| (l.set)(&cone))
                .map(|k| PALETTE[k % PALETTE.len()])
                .unwrap_or("#f4f4f4");
            let cx = (x2 - x_lo + 1) as f64 * scale / 2.0;
            let cy = (tau_hi - tau2 + 1) as f64 * scale / 2.0;
            let r = scale / 2.0;
            out.push_str(&format!(
                "  <polygon points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\" fill=\"{fill}\" stroke=\"#333\" stroke-width=\"0.8\"/>\n",
                cx, cy - r, cx + r, cy, cx, cy + r, cx - r, cy
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cone(x2: i64, t: i64) -> MinimalCone {
        MinimalCone::new(HalfIndex::from_twice(x2), t)
    }

    #[test]
    fn half_index_round_trip() {
        for twice in -9..9 {
            let h = HalfIndex::from_twice(twice);
            assert_eq!(HalfIndex::from_f64(h.value()), Some(h));
            assert_eq!(h.twice(), twice);
        }
        assert_eq!(HalfIndex::from_f64(0.3), None);
        assert_eq!(HalfIndex::from_twice(-1).floor(), -1);
        assert_eq!(HalfIndex::from_twice(-1).ceil(), 0);
        assert_eq!(HalfIndex::from_twice(3).to_string(), "3/2");
    }

    #[test]
    fn lightcone_coordinates_round_trip() {
        for x2 in -6..6 {
            for t in -3..3 {
                let c = cone(x2, t);
                assert_eq!(MinimalCone::from_lightcone(c.u(), c.v()), c);
            }
        }
        // integer sites sit on the slice, half-integer sites half a step below
        assert_eq!(cone(0, 0).center_time_twice(), 0);
        assert_eq!(cone(1, 0).center_time_twice(), -1);
    }

    #[test]
    fn span_examples() {
        let a = cone(0, 0);
        assert_eq!(Region::span_cone(a, a), Region::minimal(a));
        let r = Region::span_cone(cone(0, 0), cone(2, 0));
        let sites: Vec<String> = r.cauchy_sites().iter().map(|h| h.to_string()).collect();
        assert_eq!(sites, vec!["0", "1/2", "1"]);
        assert_eq!(r.n_cones(), 3);
        let r = Region::span_cone(cone(0, 0), cone(0, 1));
        assert_eq!((r.n_plus(), r.n_minus(), r.n_cones()), (2, 2, 3));
        assert_eq!(Region::span_cone(cone(0, 0), cone(0, 1)), r.join(&r));
    }

    /// Every minimal cone lying inside the continuum double cone spanned by
    /// two minimal cones, found by checking the four vertices.
    fn brute_span(a: MinimalCone, b: MinimalCone) -> Vec<MinimalCone> {
        // the spanned double cone in (τ, x): its extreme points
        let pts = |c: MinimalCone| {
            let (t2, x2) = (c.center_time_twice() as f64 / 2.0, c.x.value());
            [(t2 + 0.5, x2), (t2 - 0.5, x2), (t2, x2 + 0.5), (t2, x2 - 0.5)]
        };
        let all: Vec<(f64, f64)> = pts(a).into_iter().chain(pts(b)).collect();
        let umax = all.iter().map(|(t, x)| t + x).fold(f64::MIN, f64::max);
        let umin = all.iter().map(|(t, x)| t + x).fold(f64::MAX, f64::min);
        let vmax = all.iter().map(|(t, x)| t - x).fold(f64::MIN, f64::max);
        let vmin = all.iter().map(|(t, x)| t - x).fold(f64::MAX, f64::min);
        let mut out = Vec::new();
        for x2 in -20..20 {
            for t in -10..10 {
                let c = cone(x2, t);
                let inside = pts(c).iter().all(|(tt, xx)| {
                    let (u, v) = (tt + xx, tt - xx);
                    u >= umin - 1e-12 && u <= umax + 1e-12 && v >= vmin - 1e-12 && v <= vmax + 1e-12
                });
                if inside {
                    out.push(c);
                }
            }
        }
        out.sort_by_key(|c| (c.center_time_twice(), c.x));
        out
    }

    #[test]
    fn span_matches_brute_force() {
        for (a, b) in [(cone(0, 0), cone(0, 1)), (cone(0, 0), cone(2, 0)), (cone(-1, 1), cone(3, 0)), (cone(1, -1), cone(-2, 2))] {
            assert_eq!(Region::span_cone(a, b).minimals(), brute_span(a, b));
        }
    }

    #[test]
    fn spacelike_examples() {
        let r = Region::minimal(cone(0, 0));
        assert!(!spacelike_separated(&r, &r));
        let oa = Region::minimal(cone(-1, 1));
        let ob = Region::minimal(cone(1, 1));
        assert!(spacelike_separated(&oa, &ob));
        assert!(!spacelike_separated(&r, &Region::minimal(cone(0, 1))));
        // neighbouring Cauchy cones touch along a lightlike edge
        assert!(!spacelike_separated(&r, &Region::minimal(cone(1, 0))));
        assert!(oa.is_left_of(&ob));
    }

    #[test]
    fn past_examples() {
        let oa = Region::minimal(cone(-1, 1));
        let ob = Region::minimal(cone(1, 1));
        let r = oa.join(&ob);
        assert_eq!(wpast(&r, &r).contains_region(&r), backward_cone(&r).contains_region(&r));
        // the common past holds the spanned cone pushed one unit down
        assert!(cpast(&oa, &ob).contains_region(&r.translate(-1, 0)));
        assert!(!cpast(&oa, &ob).contains_region(&r));
        let (t, oc) = first_guess_common_past(&oa, &ob);
        assert_eq!(t, 1);
        assert_eq!(oc, r.translate(-1, 0));
        // O^m(0,0) sits inside the first guess
        assert!(oc.contains(&cone(0, 0)));
    }

    #[test]
    fn wedge_examples() {
        let m = Region::minimal(cone(0, 0));
        let b = wedges_and_bounds(&m);
        assert!(b.past.contains_region(&m) && b.future.contains_region(&m));
        assert!(b.left_wedge.contains_region(&m) && b.right_wedge.contains_region(&m));
        let oa = Region::minimal(cone(-1, 1));
        let ob = Region::minimal(cone(1, 1));
        assert!(wedges_and_bounds(&ob).left_wedge.contains_region(&oa));
        assert!(!wedges_and_bounds(&oa).left_wedge.contains_region(&ob));
    }

    /// Left-past and right-past extensions of spacelike cones stay spacelike,
    /// checked over every pair of minimal cones in a 12-site window.
    #[test]
    fn past_extensions_stay_spacelike() {
        let window: Vec<MinimalCone> = (-12..12).flat_map(|x2| (-1..3).map(move |t| cone(x2, t))).collect();
        for a in &window {
            for b in &window {
                let (ra, rb) = (Region::minimal(*a), Region::minimal(*b));
                if !ra.is_left_of(&rb) {
                    continue;
                }
                let la = ra.extend_past(1, 0);
                let rr = rb.extend_past(0, 1);
                let ba = wedges_and_bounds(&ra);
                let bb = wedges_and_bounds(&rb);
                assert!(ba.past.contains_region(&la) && ba.left_wedge.contains_region(&la));
                assert!(bb.past.contains_region(&rr) && bb.right_wedge.contains_region(&rr));
                assert!(spacelike_separated(&la, &rr), "{a} {b}");
            }
        }
    }

    fn arb_region() -> impl Strategy<Value = Region> {
        (-6i64..6, 0i64..3, -6i64..6, 0i64..3)
            .prop_map(|(u, du, v, dv)| Region::from_bounds((u, u + du), (v, v + dv)))
    }

    proptest! {
        #[test]
        fn past_inclusions(r1 in arb_region(), r2 in arb_region(), u in -10i64..10, v in -10i64..10) {
            let c = MinimalCone::from_lightcone(u, v);
            if spast(&r1, &r2).contains(&c) {
                prop_assert!(cpast(&r1, &r2).contains(&c));
            }
            if cpast(&r1, &r2).contains(&c) {
                prop_assert!(wpast(&r1, &r2).contains(&c));
            }
        }

        #[test]
        fn translation_covariance(r1 in arb_region(), r2 in arb_region(), dt in -3i64..3, dx in -3i64..3, u in -10i64..10, v in -10i64..10) {
            let c = MinimalCone::from_lightcone(u, v);
            let (s1, s2, sc) = (r1.translate(dt, dx), r2.translate(dt, dx), c.translate(dt, dx));
            prop_assert_eq!(wpast(&r1, &r2).contains(&c), wpast(&s1, &s2).contains(&sc));
            prop_assert_eq!(cpast(&r1, &r2).contains(&c), cpast(&s1, &s2).contains(&sc));
            prop_assert_eq!(spast(&r1, &r2).contains(&c), spast(&s1, &s2).contains(&sc));
            prop_assert_eq!(spacelike_separated(&r1, &r2), spacelike_separated(&s1, &s2));
        }

        #[test]
        fn backward_cone_monotone(r1 in arb_region(), grow_u in 0i64..2, grow_v in 0i64..2, u in -10i64..10, v in -10i64..10) {
            let r2 = Region::from_bounds((r1.u_bounds().0 - grow_u, r1.u_bounds().1 + grow_u), (r1.v_bounds().0, r1.v_bounds().1 + grow_v));
            prop_assert!(r1.is_subset_of(&r2));
            let c = MinimalCone::from_lightcone(u, v);
            if backward_cone(&r1).contains(&c) {
                prop_assert!(backward_cone(&r2).contains(&c));
            }
        }
    }

    #[test]
    fn render_marks_layers() {
        let oa = Region::minimal(cone(-1, 1));
        let f = |c: &MinimalCone| oa.contains(c);
        let txt = render_text(&[Layer { label: 'A', set: &f }], (-2, 2), (-1, 1));
        assert_eq!(txt.matches('A').count(), 1);
        let svg = render_svg(&[Layer { label: 'A', set: &f }], (-2, 2), (-1, 1));
        assert!(svg.starts_with("<svg") && svg.contains("#d1495b"));
    }
}
