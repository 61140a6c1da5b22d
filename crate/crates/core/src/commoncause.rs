//! Common causes for correlated events.
//!
//! [`lemma1_construct`] builds a noncommuting common cause `{C, C⊥}` inside a
//! tensor product `N = N₁ ⊗ N₂` by moving `B` along a unitary path in `N₂`
//! until the screening condition for `C⊥` is met. [`WeakPastSetup`] places that
//! construction in the weak past of two spacelike separated double cones of
//! the Ising net. [`u0_universal_check`] evaluates the dynamics-independent
//! cause `{½(1 ± U₀)}`, and [`commuting_cc_search`] looks heuristically for
//! commuting causes.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::dynamics::{cone_algebra, generate_algebra, Automorphism, DynamicsParams};
use crate::error::{Error, Result};
use crate::isingnet::ChainConfig;
use crate::matrixcore::{
    c, commutator, decompose_simple, extend_orthonormal, hermitian_eig, hermitian_generators,
    hs_norm, identity, is_projection, ntrace, perp, span_membership, zeros, CMat, HilbertSchmidt,
    SimpleDecomposition, SpanBasis, UnitaryPath, STRUCT_TOL,
};
use crate::probspace::{
    build_corr_state, correlation, evaluate, reichenbach_check, screening_check,
    satisfies_balance, subprojection_residual, triviality_check, validate_lambdas, Partition, ReichenbachReport,
    State, CORRELATION_TOL, FAITHFUL_TOL, STATE_TOL,
};
use crate::spacetime::{backward_cone, spacelike_separated, wpast, HalfIndex, MinimalCone, Region};

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const LOCALIZATION_TOL: f64 = 1e-9;
const BISECTION_DT: f64 = 1e-12;
const BISECTION_DG: f64 = 1e-11;
const BISECTION_MAX_ITER: usize = 200;

/// Row-major `[re, im]` pairs, one inner array per row.
pub fn serialize_matrix<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

fn serialize_opt_matrix<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => serialize_matrix(m, s),
        None => s.serialize_none(),
    }
}

/// A simple algebra `N`, a simple unital subalgebra `N₁` and its relative
/// commutant `N₂ = N₁' ∩ N`, so that `N = N₁ ⊗ N₂`.
#[derive(Clone, Debug)]
pub struct TensorSplit {
    pub n_basis: SpanBasis,
    pub n1_basis: SpanBasis,
    pub n2_basis: SpanBasis,
    pub iso2: SimpleDecomposition,
}

impl TensorSplit {
    pub fn new(n: SpanBasis, n1: SpanBasis) -> Result<Self> {
        for b in [&n, &n1] {
            let center_dim = b.center_dim();
            if center_dim != 1 {
                return Err(Error::NotSimple {
                    center_dim,
                    lin_dim: b.len(),
                });
            }
        }
        let outside = n1
            .elements()
            .iter()
            .map(|e| span_membership(e, &n))
            .fold(0.0, f64::max);
        if outside > STRUCT_TOL {
            return Err(Error::NotInSpan { residual: outside });
        }
        let n2 = n.relative_commutant(n1.elements());
        if n1.len() * n2.len() != n.len() {
            return Err(Error::DimensionMismatch {
                what: "relative commutant N1' ∩ N".into(),
                expected: n.len() / n1.len().max(1),
                found: n2.len(),
            });
        }
        let iso2 = decompose_simple(&n2)?;
        Ok(Self {
            n_basis: n,
            n1_basis: n1,
            n2_basis: n2,
            iso2,
        })
    }

    /// `M_{d₁} ⊗ M_{d₂}` acting on `ℂ^{d₁} ⊗ ℂ^{d₂}`.
    pub fn matrix_units(d1: usize, d2: usize) -> Result<Self> {
        let n1: Vec<CMat> = unit_basis(d1)
            .into_iter()
            .map(|e| crate::matrixcore::kron(&e, &identity(d2)))
            .collect();
        Self::new(
            SpanBasis::full_algebra(d1 * d2),
            crate::matrixcore::orthonormalize(&n1),
        )
    }

    pub fn dim(&self) -> usize {
        self.n_basis.dim_ambient()
    }

    /// Smallest eigenvalue of the density of `φ` restricted to `N`.
    pub fn faithful_margin(&self, phi: &State) -> Result<f64> {
        let rho_n = self.n_basis.project(phi.rho());
        let herm = (&rho_n + rho_n.adjoint()) * c(0.5, 0.0);
        Ok(hermitian_eig(&herm)?.0[0])
    }
}

fn unit_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = zeros(d);
            e[(i, j)] = c(1.0, 0.0);
            out.push(e);
        }
    }
    out
}

/// The path `t ↦ C(t) = A U(t) B U(t)*` and the screening function
/// `F(t) = φ(C⊥ A B⊥ C⊥) / φ(C⊥ A)` of one bisection instance.
///
/// `A` and `B` are stored after the optional swap to `A⊥, B⊥` that makes
/// `tr B ≥ tr B⊥`.
#[derive(Clone, Debug)]
pub struct CausePath<'a> {
    phi: &'a State,
    iso: &'a SimpleDecomposition,
    a: CMat,
    b: CMat,
    path: UnitaryPath,
    pub swapped: bool,
    /// `φ(A⊥B⊥) / φ(A⊥)`.
    pub target: f64,
}

impl<'a> CausePath<'a> {
    pub fn new(split: &'a TensorSplit, phi: &'a State, a: &CMat, b: &CMat) -> Result<Self> {
        let n = split.dim();
        if phi.dim() != n || a.nrows() != n || b.nrows() != n {
            return Err(Error::ShapeMismatch(format!(
                "state, events and algebra must act on dimension {n}"
            )));
        }
        let scale = (n as f64).sqrt();
        for (name, p) in [("A", a), ("B", b)] {
            if !is_projection(p, STATE_TOL * scale) {
                return Err(Error::NotProjection(name.into()));
            }
            let tr = ntrace(p).re;
            if tr < STATE_TOL || tr > 1.0 - STATE_TOL {
                return Err(Error::DegenerateEvent(format!("{name} has normalized trace {tr}")));
            }
        }
        for (p, basis) in [(a, &split.n1_basis), (b, &split.n2_basis)] {
            let residual = span_membership(p, basis);
            if residual > STRUCT_TOL {
                return Err(Error::NotInSpan { residual });
            }
        }
        let margin = split.faithful_margin(phi)?;
        if margin <= FAITHFUL_TOL {
            return Err(Error::NotFaithful(margin));
        }
        let cov = correlation(phi, a, b)?;
        if cov.abs() <= CORRELATION_TOL {
            return Err(Error::NotCorrelated(cov));
        }
        let swapped = ntrace(b).re < 0.5 - STATE_TOL;
        let (a, b) = if swapped { (perp(a), perp(b)) } else { (a.clone(), b.clone()) };
        let v = matching_unitary(&split.iso2.compress(&b))?;
        let path = UnitaryPath::with_tol(&v, 1e-10)?;
        let (ap, bp) = (perp(&a), perp(&b));
        let target = evaluate(phi, &(&ap * &bp)).re / evaluate(phi, &ap).re;
        Ok(Self {
            phi,
            iso: &split.iso2,
            a,
            b,
            path,
            swapped,
            target,
        })
    }

    /// Events after the swap.
    pub fn events(&self) -> (&CMat, &CMat) {
        (&self.a, &self.b)
    }

    pub fn unitary(&self, t: f64) -> CMat {
        self.iso.lift(&self.path.at(t))
    }

    pub fn cause(&self, t: f64) -> CMat {
        let u = self.unitary(t);
        &self.a * (&u * &self.b * u.adjoint())
    }

    /// `F(t)`; fails if the denominator `φ(A − C(t))` is not positive.
    pub fn f(&self, t: f64) -> Result<f64> {
        let ct = self.cause(t);
        let cp = perp(&ct);
        let den = evaluate(self.phi, &(&self.a - &ct)).re;
        if den <= FAITHFUL_TOL {
            return Err(Error::BracketFailure(format!(
                "denominator phi(A - C(t)) = {den:.3e} at t = {t}"
            )));
        }
        let num = evaluate(self.phi, &(&cp * &self.a * perp(&self.b) * &cp)).re;
        Ok(num / den)
    }
}

/// Unitary `V` on `ℂ^d` with `V B V* ≥ B⊥` for a projection `B` of rank at
/// least `d/2`: an orthonormal basis of `range(B)` is sent first onto a basis
/// of `range(B⊥)` and then back onto the start of itself.
fn matching_unitary(b: &CMat) -> Result<CMat> {
    let d = b.nrows();
    let (vals, vecs) = hermitian_eig(b)?;
    let kernel: Vec<usize> = (0..d).filter(|&k| vals[k] < 0.5).collect();
    let range: Vec<usize> = (0..d).filter(|&k| vals[k] >= 0.5).collect();
    if range.len() < kernel.len() {
        return Err(Error::DegenerateEvent("B is smaller than its complement".into()));
    }
    let source: Vec<usize> = range.iter().chain(&kernel).copied().collect();
    let target: Vec<usize> = kernel.iter().chain(&range).copied().collect();
    let mut s = CMat::zeros(d, d);
    let mut t = CMat::zeros(d, d);
    for (j, (&from, &to)) in source.iter().zip(&target).enumerate() {
        s.set_column(j, &vecs.column(from));
        t.set_column(j, &vecs.column(to));
    }
    Ok(t * s.adjoint())
}

#[derive(Clone, Debug, Serialize)]
pub struct CommonCauseCertificate {
    #[serde(serialize_with = "serialize_matrix")]
    pub c: CMat,
    pub t_prime: f64,
    /// Screening residuals for `C` and `C⊥`.
    pub residuals: Vec<f64>,
    pub tolerance: f64,
    pub passes: bool,
    /// Regions whose joint algebra contains `C`; empty outside the net.
    pub localization: Vec<Region>,
    pub localization_residual: f64,
    pub nontrivial: bool,
    pub reichenbach: ReichenbachReport,
    pub commutator_norm_a: f64,
    pub commutator_norm_b: f64,
    pub commutes_with_a: bool,
    pub commutes_with_b: bool,
    /// `‖C A C − C‖` for the event `C` was built under.
    pub subprojection_residual: f64,
    pub swapped: bool,
    pub f_at_0: f64,
    pub f_at_1: f64,
    pub target: f64,
    pub iterations: usize,
    pub final_gap: f64,
}

/// Bisection on `F(t) − target` over `[0, 1]`.
pub fn bisect(path: &CausePath) -> Result<(f64, usize, f64, f64, f64)> {
    let f0 = path.f(0.0)?;
    let f1 = path.f(1.0)?;
    let (g0, g1) = (f0 - path.target, f1 - path.target);
    if !(g0 > 0.0 && g1 < 0.0) {
        return Err(Error::BracketFailure(format!(
            "F(0) - target = {g0:.3e}, F(1) - target = {g1:.3e}"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut mid = 0.5;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < BISECTION_MAX_ITER {
        iterations += 1;
        mid = 0.5 * (lo + hi);
        let g = path.f(mid)? - path.target;
        gap = g.abs();
        if gap < BISECTION_DG || hi - lo < BISECTION_DT {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((mid, iterations, gap, f0, f1))
}

/// Builds a noncommuting common cause `{C, C⊥}` with `C = A U(t') B U(t')*`.
pub fn lemma1_construct(
    split: &TensorSplit,
    phi: &State,
    a: &CMat,
    b: &CMat,
    tol: f64,
) -> Result<CommonCauseCertificate> {
    let path = CausePath::new(split, phi, a, b)?;
    let (t_prime, iterations, final_gap, f_at_0, f_at_1) = bisect(&path)?;
    let cause = path.cause(t_prime);
    let part = Partition::binary(&cause)?;
    let screening = screening_check(phi, a, b, &part);
    let reichenbach = reichenbach_check(phi, a, b, &cause, tol)?;
    let commutator_norm_a = hs_norm(&commutator(&cause, a));
    let commutator_norm_b = hs_norm(&commutator(&cause, b));
    Ok(CommonCauseCertificate {
        t_prime,
        passes: screening.passes(tol),
        residuals: screening.residuals,
        tolerance: tol,
        localization: Vec::new(),
        localization_residual: span_membership(&cause, &split.n_basis),
        nontrivial: !triviality_check(&part, a, b),
        reichenbach,
        commutes_with_a: commutator_norm_a < STATE_TOL,
        commutes_with_b: commutator_norm_b < STATE_TOL,
        commutator_norm_a,
        commutator_norm_b,
        subprojection_residual: subprojection_residual(&cause, path.events().0),
        swapped: path.swapped,
        f_at_0,
        f_at_1,
        target: path.target,
        iterations,
        final_gap,
        c: cause,
    })
}

/// Regions used to localize the common cause of two spacelike separated
/// double cones, `O_a` to the left of `O_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeakPastRegions {
    pub o_a: Region,
    pub o_b: Region,
    /// `O_a ⊂ O^L_{a−} ⊂ I₋(O_a) ∩ W^L(O_a)`, simple algebra.
    pub o_a_left: Region,
    /// `O_b ⊂ O^R_{b−} ⊂ I₋(O_b) ∩ W^R(O_b)`, simple algebra.
    pub o_b_right: Region,
    /// `O^L_{a−} ∨ O^R_{b−}`.
    pub joined: Region,
    /// `Õ^R_−`, the support of `N`.
    pub support: Region,
    /// `Õ^R_− ∩ I₋(O_a)` and `Õ^R_− ∩ I₋(O_b)`.
    pub past_parts: [Region; 2],
}

fn even_extension(r: &Region, du: i64, dv: i64) -> Region {
    if r.n_cones() % 2 == 0 {
        *r
    } else {
        r.extend_past(du, dv)
    }
}

/// Candidate region families, preferred first. Only the choice of `Õ^R_−`
/// varies.
pub fn candidate_regions(o_a: &Region, o_b: &Region) -> Result<Vec<WeakPastRegions>> {
    if !spacelike_separated(o_a, o_b) {
        return Err(Error::NotSpacelike);
    }
    if !o_a.is_left_of(o_b) {
        return Err(Error::RegionSelectionFailure("O_a must lie to the left of O_b".into()));
    }
    let o_a_left = even_extension(o_a, 1, 0);
    let o_b_right = even_extension(o_b, 0, 1);
    if !spacelike_separated(&o_a_left, &o_b_right) {
        return Err(Error::RegionSelectionFailure(
            "past extensions of O_a and O_b are not spacelike".into(),
        ));
    }
    let joined = o_a_left.join(&o_b_right);
    let supports = if joined.n_cones() % 2 == 0 {
        vec![joined]
    } else {
        vec![joined.extend_past(0, 1), joined.extend_past(1, 0)]
    };
    let mut out = Vec::new();
    for support in supports {
        let (Some(pa), Some(pb)) = (
            support.intersect_backward_cone(o_a),
            support.intersect_backward_cone(o_b),
        ) else {
            continue;
        };
        out.push(WeakPastRegions {
            o_a: *o_a,
            o_b: *o_b,
            o_a_left,
            o_b_right,
            joined,
            support,
            past_parts: [pa, pb],
        });
    }
    Ok(out)
}

/// Algebras of one weak-past region family under fixed dynamics; reusable
/// across states and events.
#[derive(Clone, Debug)]
pub struct WeakPastSetup {
    pub regions: WeakPastRegions,
    pub split: TensorSplit,
    /// Algebra generated by the two past parts.
    pub past_algebra: SpanBasis,
    /// `dist(A(Õ^R_−), A(past parts))`.
    pub primitive_causality_residual: f64,
    pub support_center_dim: usize,
    pub support_in_backward_cone: bool,
    pub past_parts_in_wpast: bool,
}

impl WeakPastSetup {
    /// `O_a` and `O_b` in either order; the left one is taken as `O_a`.
    pub fn new(o_a: &Region, o_b: &Region, dynamics: &Automorphism) -> Result<Self> {
        let (left, right) = if o_b.is_left_of(o_a) { (o_b, o_a) } else { (o_a, o_b) };
        let mut last_error = None;
        for regions in candidate_regions(left, right)? {
            match Self::build(regions, dynamics) {
                Ok(setup) => return Ok(setup),
                Err(e) => last_error = Some(e),
            }
        }
        Err(Error::RegionSelectionFailure(match last_error {
            Some(e) => format!("no simple support region fits the window ({e}); enlarge the window or padding"),
            None => "no candidate support region".into(),
        }))
    }

    fn build(regions: WeakPastRegions, dynamics: &Automorphism) -> Result<Self> {
        let n = cone_algebra(&regions.support, dynamics)?;
        let support_center_dim = n.center_dim();
        let n1 = cone_algebra(&regions.o_a_left, dynamics)?;
        let n_b = cone_algebra(&regions.o_b_right, dynamics)?;
        let split = TensorSplit::new(n.basis.clone(), n1.basis)?;
        let outside = n_b
            .generators
            .iter()
            .map(|g| span_membership(g, &split.n2_basis))
            .fold(0.0, f64::max);
        if outside > STRUCT_TOL {
            return Err(Error::NotInSpan { residual: outside });
        }
        let mut gens = Vec::new();
        for part in &regions.past_parts {
            gens.extend(part_generators(part, dynamics)?);
        }
        let past_algebra = generate_algebra(&gens, dynamics.dim(), n.lin_dim)?;
        let primitive_causality_residual = past_algebra.span_distance(&n.basis);
        let wp = wpast(&regions.o_a, &regions.o_b);
        Ok(Self {
            support_in_backward_cone: backward_cone(&regions.o_a.join(&regions.o_b))
                .contains_region(&regions.support),
            past_parts_in_wpast: regions.past_parts.iter().all(|p| wp.contains_region(p)),
            regions,
            split,
            past_algebra,
            primitive_causality_residual,
            support_center_dim,
        })
    }

    /// Runs the bisection construction in `N = A(Õ^R_−)` and records the localization.
    pub fn run(&self, phi: &State, a: &CMat, b: &CMat, tol: f64) -> Result<CommonCauseCertificate> {
        let (a, b) = if span_membership(a, &self.split.n1_basis) <= STRUCT_TOL {
            (a, b)
        } else {
            (b, a)
        };
        let mut cert = lemma1_construct(&self.split, phi, a, b, tol)?;
        cert.localization = self.regions.past_parts.to_vec();
        cert.localization_residual = span_membership(&cert.c, &self.past_algebra);
        Ok(cert)
    }
}

fn part_generators(region: &Region, dynamics: &Automorphism) -> Result<Vec<CMat>> {
    region
        .minimals()
        .iter()
        .map(|m| dynamics.cone_image(m).cloned())
        .collect()
}

/// Weak-past common cause for `A ∈ A(O_a)`, `B ∈ A(O_b)`.
pub fn weak_past_pipeline(
    o_a: &Region,
    o_b: &Region,
    a: &CMat,
    b: &CMat,
    dynamics: &Automorphism,
    phi: &State,
    tol: f64,
) -> Result<(WeakPastSetup, CommonCauseCertificate)> {
    for (p, r) in [(a, o_a), (b, o_b)] {
        let alg = cone_algebra(r, dynamics)?;
        let residual = span_membership(p, &alg.basis);
        if residual > STRUCT_TOL {
            return Err(Error::NotInSpan { residual });
        }
    }
    let setup = WeakPastSetup::new(o_a, o_b, dynamics)?;
    let cert = setup.run(phi, a, b, tol)?;
    Ok((setup, cert))
}

/// `O_a = O^m_{−½} + (1, 0)` and `O_b = O^m_{½} + (1, 0)`.
pub fn adjacent_cones() -> (Region, Region) {
    (
        Region::minimal(MinimalCone::new(HalfIndex::from_twice(-1), 1)),
        Region::minimal(MinimalCone::new(HalfIndex::from_twice(1), 1)),
    )
}

/// Events `½(1 + U)` for the generators `U` of `O_a` and `O_b` in the
/// adjacent-cone example.
pub fn adjacent_events(dynamics: &Automorphism) -> Result<(CMat, CMat)> {
    let one = identity(dynamics.dim());
    let (o_a, o_b) = adjacent_cones();
    let proj = |r: Region| -> Result<CMat> {
        Ok((&one + dynamics.cone_image(&r.minimals()[0])?) * c(0.5, 0.0))
    };
    Ok((proj(o_a)?, proj(o_b)?))
}

/// Window for the adjacent-cone example: six qubits, one time step.
pub fn adjacent_window() -> ChainConfig {
    ChainConfig::new(-2, 3, 1).expect("fixed window is valid")
}

#[derive(Clone, Debug, Serialize)]
pub struct U0Entry {
    pub params: DynamicsParams,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub commutator_norm_a: f64,
    pub commutator_norm_b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct U0Report {
    pub lambdas: [f64; 4],
    pub entries: Vec<U0Entry>,
    pub max_residual: f64,
    pub caveat: &'static str,
}

impl U0Report {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

const U0_CAVEAT: &str =
    "the common cause {(1 +- U_0)/2} and the correlating events lie within a common Cauchy surface";

/// `θ₁, θ₂ ∈ {0, 0.4, π/2}`, `η₁, η₂ ∈ {±1}`.
pub fn u0_dynamics_grid() -> Vec<DynamicsParams> {
    let thetas = [0.0, 0.4, FRAC_PI_2];
    let mut grid = Vec::new();
    for &theta1 in &thetas {
        for &theta2 in &thetas {
            for eta1 in [1, -1] {
                for eta2 in [1, -1] {
                    grid.push(DynamicsParams {
                        theta1,
                        theta2,
                        eta1,
                        eta2,
                    });
                }
            }
        }
    }
    grid
}

/// Screening by `{½(1 ± U₀)}` of the adjacent-cone events under one dynamics,
/// for any admissible `λ`.
pub fn u0_screening(params: DynamicsParams, lambdas: [f64; 4]) -> Result<U0Entry> {
    let cfg = ChainConfig::new(-2, 2, 1)?;
    let dynamics = Automorphism::new(params, &cfg)?;
    let (a, b) = adjacent_events(&dynamics)?;
    let phi = build_corr_state(&a, &b, lambdas)?;
    let u0 = dynamics.chain().matrix(HalfIndex::integer(0))?;
    let cause = (identity(dynamics.dim()) + u0) * c(0.5, 0.0);
    let part = Partition::binary(&cause)?;
    let report = screening_check(&phi, &a, &b, &part);
    Ok(U0Entry {
        params,
        max_residual: report.max_residual,
        residuals: report.residuals,
        commutator_norm_a: hs_norm(&commutator(&cause, &a)),
        commutator_norm_b: hs_norm(&commutator(&cause, &b)),
    })
}

/// Requires `λ₁ = λ₂` and `λ₁ + λ₂ = λ₃ + λ₄`.
pub fn u0_universal_check(grid: &[DynamicsParams], lambdas: [f64; 4]) -> Result<U0Report> {
    validate_lambdas(lambdas)?;
    if (lambdas[0] - lambdas[1]).abs() > STATE_TOL || !satisfies_balance(lambdas) {
        return Err(Error::BadLambdas(format!("{lambdas:?} needs l1 = l2 and l1 + l2 = l3 + l4")));
    }
    let entries = grid
        .iter()
        .map(|p| u0_screening(*p, lambdas))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = entries.iter().map(|e| e.max_residual).fold(0.0, f64::max);
    Ok(U0Report {
        lambdas,
        entries,
        max_residual,
        caveat: U0_CAVEAT,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutingSearchReport {
    /// Largest screening residual of the best candidate found.
    pub best_residual: f64,
    pub best_residuals: Vec<f64>,
    #[serde(serialize_with = "serialize_opt_matrix")]
    pub best_c: Option<CMat>,
    pub trivial: bool,
    pub search_dim: usize,
    pub restarts: usize,
    pub evaluations: usize,
    pub note: &'static str,
}

const POLISH_STEPS: [f64; 3] = [0.1, 0.01, 0.001];

const SEARCH_NOTE: &str = "heuristic search: a positive best residual is evidence, not a proof, that no commuting common cause exists";

/// Screening residuals of `{C, C⊥}` and whether that partition is trivial.
pub fn evaluate_candidate(phi: &State, a: &CMat, b: &CMat, cause: &CMat) -> Result<(Vec<f64>, bool)> {
    let part = Partition::binary(cause)?;
    Ok((
        screening_check(phi, a, b, &part).residuals,
        triviality_check(&part, a, b),
    ))
}

/// Spectral projection of `H` onto eigenvalues strictly above the median.
fn upper_projection(h: &CMat) -> Option<CMat> {
    let n = h.nrows();
    let (vals, vecs) = hermitian_eig(h).ok()?;
    let median = 0.5 * (vals[(n - 1) / 2] + vals[n / 2]);
    let spread = (vals[n - 1] - vals[0]).max(1e-300);
    let mut p = zeros(n);
    let mut rank = 0;
    for k in 0..n {
        if vals[k] > median + 1e-9 * spread {
            let v = vecs.column(k);
            p += &v * v.adjoint();
            rank += 1;
        }
    }
    (rank > 0 && rank < n).then_some(p)
}

/// Searches the Hermitian elements of `target ∩ {A, B}'` for a nontrivial
/// commuting common cause, minimizing the squared screening residuals of the
/// upper spectral projection with Nelder–Mead from seeded random starts.
///
/// A simple target containing `A` and `B` is searched in its `d × d` factor,
/// where `φ` acts through the compressed density of its restriction.
pub fn commuting_cc_search(
    phi: &State,
    a: &CMat,
    b: &CMat,
    target: &SpanBasis,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<CommutingSearchReport> {
    let n = target.dim_ambient();
    let reducible = target.len() < n * n
        && target.center_dim() == 1
        && span_membership(a, target) < STRUCT_TOL
        && span_membership(b, target) < STRUCT_TOL;
    let reduced = reducible
        .then(|| decompose_simple(target).ok())
        .flatten()
        .and_then(|iso| {
            let rho = iso.compress(&target.project(phi.rho()));
            let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
            State::new(rho).ok().map(|phi_r| (iso, phi_r))
        });
    let Some((iso, phi_r)) = reduced else {
        return search_in(phi, a, b, target, restarts, iters, seed);
    };
    let (a_r, b_r) = (iso.compress(a), iso.compress(b));
    let mut report = search_in(&phi_r, &a_r, &b_r, &SpanBasis::full_algebra(iso.d), restarts, iters, seed)?;
    if let Some(p) = report.best_c.take() {
        let lifted = iso.lift(&p);
        let (residuals, trivial) = evaluate_candidate(phi, a, b, &lifted)?;
        report.best_residual = residuals.iter().cloned().fold(0.0, f64::max);
        report.best_residuals = residuals;
        report.trivial = trivial;
        report.best_c = Some(lifted);
    }
    Ok(report)
}

fn search_in(
    phi: &State,
    a: &CMat,
    b: &CMat,
    target: &SpanBasis,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<CommutingSearchReport> {
    let comm = target.relative_commutant(&[a.clone(), b.clone()]);
    let mut coords = vec![identity(target.dim_ambient())];
    for h in hermitian_generators(&comm) {
        extend_orthonormal(&mut coords, h, 1e-10);
    }
    coords.remove(0);
    if coords.is_empty() {
        return Err(Error::EmptyCommutant);
    }
    let dim = coords.len();
    let mut evaluations = 0;
    let mut objective = |x: &[f64]| -> (f64, Option<CMat>) {
        evaluations += 1;
        let mut h = zeros(target.dim_ambient());
        for (xi, g) in x.iter().zip(&coords) {
            h.hs_axpy(c(*xi, 0.0), g);
        }
        let Some(p) = upper_projection(&h) else {
            return (4.0, None);
        };
        match evaluate_candidate(phi, a, b, &p) {
            Ok((res, trivial)) => {
                let penalty = if trivial { 1.0 } else { 0.0 };
                (res.iter().map(|r| r * r).sum::<f64>() + penalty, Some(p))
            }
            Err(_) => (4.0, None),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: (f64, Option<Vec<f64>>) = (f64::INFINITY, None);
    for _ in 0..restarts.max(1) {
        let start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (x, fx) = nelder_mead(|x| objective(x).0, &start, 0.5, iters);
        if fx < best.0 {
            best = (fx, Some(x));
        }
    }
    // restart from the best point with shrinking simplices
    if let Some(mut x) = best.1.clone() {
        for step in POLISH_STEPS {
            let (y, fy) = nelder_mead(|x| objective(x).0, &x, step, iters);
            if fy < best.0 {
                best.0 = fy;
                x = y;
            }
        }
        best.1 = Some(x);
    }
    let best_c = best.1.and_then(|x| objective(&x).1);
    let (best_residuals, trivial) = match &best_c {
        Some(p) => evaluate_candidate(phi, a, b, p)?,
        None => (vec![f64::INFINITY], true),
    };
    Ok(CommutingSearchReport {
        best_residual: best_residuals.iter().cloned().fold(0.0, f64::max),
        best_residuals,
        best_c,
        trivial,
        search_dim: dim,
        restarts: restarts.max(1),
        evaluations,
        note: SEARCH_NOTE,
    })
}

/// Nelder–Mead minimization with standard coefficients; stops after
/// `max_evals` objective calls or when the simplex values agree to 1e-20.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    simplex.push((start.to_vec(), eval(start, &mut evals)));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };
    while evals < max_evals {
        simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
        if simplex[n].1 - simplex[0].1 < 1e-20 && simplex[0].1 < 1e-20 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (ci, xi) in centroid.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = combine(&centroid, &worst.0, -1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (toward, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = combine(&centroid, toward, 0.5);
            let fc = eval(&contracted, &mut evals);
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &entry.0, 0.5);
                    let fx = eval(&x, &mut evals);
                    *entry = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
    simplex.swap_remove(0)
}
