//! Noncommutative probability: states, partitions of unity, the conditional
//! expectation `E(M) = Σ_k C_k M C_k`, and the screening-off, Reichenbach and
//! triviality checkers.
//!
//! Densities are taken with respect to the normalized trace, so the
//! maximally mixed state has density `1`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrixcore::{
    c, commutator, frob, hermitian_deviation, hermitian_eig, hs_norm, identity, is_projection,
    ntrace, perp, zeros, CMat, C64,
};
use crate::spacetime::{spacelike_separated, Region};

pub const STATE_TOL: f64 = 1e-10;
pub const FAITHFUL_TOL: f64 = 1e-12;
pub const CORRELATION_TOL: f64 = 1e-10;
pub const CONDITIONER_TOL: f64 = 1e-12;

/// Faithful or not, a normalized positive functional `φ(M) = ntrace(ρ M)`.
#[derive(Clone, Debug)]
pub struct State {
    rho: CMat,
    faithful_margin: f64,
}

impl State {
    pub fn new(rho: CMat) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::ShapeMismatch("density matrix is not square".into()));
        }
        let dev = hermitian_deviation(&rho);
        if dev > STATE_TOL * (rho.nrows() as f64).sqrt() {
            return Err(Error::InvalidState(format!("density is not Hermitian ({dev:.3e})")));
        }
        let tr = ntrace(&rho);
        if (tr - c(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("normalized trace {tr} differs from 1")));
        }
        let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
        let (vals, _) = hermitian_eig(&rho)?;
        let faithful_margin = vals[0];
        if faithful_margin < -FAITHFUL_TOL {
            return Err(Error::InvalidState(format!(
                "density has negative eigenvalue {faithful_margin:.3e}"
            )));
        }
        Ok(Self {
            rho,
            faithful_margin,
        })
    }

    /// The trace itself.
    pub fn tracial(dim: usize) -> Self {
        Self {
            rho: identity(dim),
            faithful_margin: 1.0,
        }
    }

    /// Row-major `[re, im]` pairs.
    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        let n = (pairs.len() as f64).sqrt().round() as usize;
        if n * n != pairs.len() || n == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} entries do not form a square matrix",
                pairs.len()
            )));
        }
        let entries: Vec<C64> = pairs.iter().map(|p| c(p[0], p[1])).collect();
        Self::new(CMat::from_row_slice(n, n, &entries))
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Smallest eigenvalue of the density.
    pub fn faithful_margin(&self) -> f64 {
        self.faithful_margin
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful_margin > FAITHFUL_TOL
    }
}

/// `φ(M) = ntrace(ρ M)`.
pub fn evaluate(phi: &State, m: &CMat) -> C64 {
    let rho = phi.rho();
    let n = rho.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += rho[(i, k)] * m[(k, i)];
        }
    }
    s / n as f64
}

/// Random positive-definite density whose spectrum is bounded below by
/// `floor` (relative to the normalized trace).
pub fn random_faithful_state<R: Rng + ?Sized>(dim: usize, floor: f64, rng: &mut R) -> State {
    let mut g = zeros(dim);
    for v in g.iter_mut() {
        *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let pos = &g * g.adjoint();
    let tr = ntrace(&pos).re;
    let rho = pos * c((1.0 - floor) / tr, 0.0) + identity(dim) * c(floor, 0.0);
    State::new(rho).expect("random density is valid by construction")
}

/// Mutually orthogonal projections summing to the identity.
#[derive(Clone, Debug)]
pub struct Partition {
    projections: Vec<CMat>,
}

impl Partition {
    pub fn new(projections: Vec<CMat>) -> Result<Self> {
        let Some(first) = projections.first() else {
            return Err(Error::InvalidPartition("empty family".into()));
        };
        let n = first.nrows();
        let scale = (n as f64).sqrt();
        for (k, p) in projections.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::ShapeMismatch(format!("cell {k} has the wrong shape")));
            }
            if !is_projection(p, STATE_TOL * scale) {
                return Err(Error::NotProjection(format!("cell {k}")));
            }
        }
        for (k, p) in projections.iter().enumerate() {
            for q in &projections[k + 1..] {
                if frob(&(p * q)) > STATE_TOL * scale {
                    return Err(Error::InvalidPartition("cells are not orthogonal".into()));
                }
            }
        }
        let sum = projections.iter().fold(zeros(n), |acc, p| acc + p);
        if frob(&(sum - identity(n))) > STATE_TOL * scale {
            return Err(Error::InvalidPartition("cells do not sum to the identity".into()));
        }
        Ok(Self { projections })
    }

    /// `{C, C⊥}`.
    pub fn binary(cell: &CMat) -> Result<Self> {
        Self::new(vec![cell.clone(), perp(cell)])
    }

    pub fn cells(&self) -> &[CMat] {
        &self.projections
    }

    pub fn commutes_with(&self, m: &CMat, tol: f64) -> bool {
        self.projections.iter().all(|p| frob(&commutator(p, m)) < tol)
    }
}

/// Two commuting events with spacelike separated supports.
#[derive(Clone, Debug)]
pub struct EventPair {
    pub a: CMat,
    pub b: CMat,
    pub regions: (Region, Region),
}

impl EventPair {
    pub fn new(a: CMat, b: CMat, regions: (Region, Region)) -> Result<Self> {
        let scale = (a.nrows() as f64).sqrt();
        for (name, p) in [("A", &a), ("B", &b)] {
            if !is_projection(p, STATE_TOL * scale) {
                return Err(Error::NotProjection(name.into()));
            }
        }
        let comm = hs_norm(&commutator(&a, &b));
        if comm > STATE_TOL {
            return Err(Error::NotCommuting(comm));
        }
        if !spacelike_separated(&regions.0, &regions.1) {
            return Err(Error::NotSpacelike);
        }
        Ok(Self { a, b, regions })
    }
}

fn check_commuting(a: &CMat, b: &CMat) -> Result<()> {
    let comm = hs_norm(&commutator(a, b));
    if comm > STATE_TOL {
        return Err(Error::NotCommuting(comm));
    }
    Ok(())
}

/// `ρ_λ = λ₁ AB + λ₂ A⊥B⊥ + λ₃ A⊥B + λ₄ AB⊥`.
///
/// Only positivity and `Σλ = 4` are required. The rationality side conditions on `λ₁λ₂` and `λ₃λ₄` carry no meaning in
/// floating point and are not checked.
pub fn build_corr_state(a: &CMat, b: &CMat, lambdas: [f64; 4]) -> Result<State> {
    validate_lambdas(lambdas)?;
    let scale = (a.nrows() as f64).sqrt();
    for (name, p) in [("A", a), ("B", b)] {
        if !is_projection(p, STATE_TOL * scale) {
            return Err(Error::NotProjection(name.into()));
        }
        let tr = ntrace(p).re;
        if (tr - 0.5).abs() > STATE_TOL {
            return Err(Error::WrongTrace(tr));
        }
    }
    check_commuting(a, b)?;
    let (ap, bp) = (perp(a), perp(b));
    let rho = (a * b) * c(lambdas[0], 0.0)
        + (&ap * &bp) * c(lambdas[1], 0.0)
        + (&ap * b) * c(lambdas[2], 0.0)
        + (a * &bp) * c(lambdas[3], 0.0);
    let tr = ntrace(&rho).re;
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::WrongTrace(tr));
    }
    State::new(rho)
}

pub fn validate_lambdas(l: [f64; 4]) -> Result<()> {
    if l.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::BadLambdas(format!("{l:?} must be positive")));
    }
    let sum: f64 = l.iter().sum();
    if (sum - 4.0).abs() > STATE_TOL {
        return Err(Error::BadLambdas(format!("{l:?} sums to {sum}, not 4")));
    }
    Ok(())
}

/// `λ₁ + λ₂ = λ₃ + λ₄`, the extra condition imposed on the adjacent-cone
/// example states.
pub fn satisfies_balance(l: [f64; 4]) -> bool {
    (l[0] + l[1] - l[2] - l[3]).abs() <= STATE_TOL
}

/// `Re(φ(AB) − φ(A)φ(B))`.
pub fn correlation(phi: &State, a: &CMat, b: &CMat) -> Result<f64> {
    check_commuting(a, b)?;
    Ok((evaluate(phi, &(a * b)) - evaluate(phi, a) * evaluate(phi, b)).re)
}

pub fn is_correlated(phi: &State, a: &CMat, b: &CMat) -> Result<bool> {
    Ok(correlation(phi, a, b)?.abs() > CORRELATION_TOL)
}

/// `E(M) = Σ_k C_k M C_k`.
pub fn conditional_expectation(part: &Partition, m: &CMat) -> CMat {
    part.cells()
        .iter()
        .fold(zeros(m.nrows()), |acc, ck| acc + ck * m * ck)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScreeningReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

impl ScreeningReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

/// The four events `AB, A⊥B⊥, AB⊥, A⊥B`.
fn joint_events(a: &CMat, b: &CMat) -> [CMat; 4] {
    let (ap, bp) = (perp(a), perp(b));
    [a * b, &ap * &bp, a * &bp, &ap * b]
}

/// Per-cell residuals `|φ(C AB C) φ(C A⊥B⊥ C) − φ(C AB⊥ C) φ(C A⊥B C)|`.
pub fn screening_check(phi: &State, a: &CMat, b: &CMat, part: &Partition) -> ScreeningReport {
    let events = joint_events(a, b);
    let residuals: Vec<f64> = part
        .cells()
        .iter()
        .map(|ck| {
            let v: Vec<C64> = events.iter().map(|x| evaluate(phi, &(ck * x * ck))).collect();
            (v[0] * v[1] - v[2] * v[3]).norm()
        })
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    ScreeningReport {
        residuals,
        max_residual,
    }
}

/// Signed screening defects `φ'(XY C_k) φ'(X⊥Y⊥ C_k) − …` where `φ'` is
/// either `φ ∘ E` or `φ` itself.
pub fn screening_defects(
    phi: &State,
    a: &CMat,
    b: &CMat,
    part: &Partition,
    through_expectation: bool,
) -> Vec<C64> {
    let events = joint_events(a, b);
    part.cells()
        .iter()
        .map(|ck| {
            let v: Vec<C64> = events
                .iter()
                .map(|x| {
                    let m = x * ck;
                    if through_expectation {
                        evaluate(phi, &conditional_expectation(part, &m))
                    } else {
                        evaluate(phi, &m)
                    }
                })
                .collect();
            v[0] * v[1] - v[2] * v[3]
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ReichenbachReport {
    pub p_a_given_c: f64,
    pub p_a_given_cperp: f64,
    pub p_b_given_c: f64,
    pub p_b_given_cperp: f64,
    /// `|p(AB|C) − p(A|C) p(B|C)|`
    pub screen_c_residual: f64,
    pub screen_cperp_residual: f64,
    pub screen_c: bool,
    pub screen_cperp: bool,
    pub pos_impact_a: bool,
    pub pos_impact_b: bool,
}

/// Conditional probabilities `p(X|C) = φ(C X C)/φ(C)` and the classical
/// Reichenbach conditions. For a `C` commuting with `X` this is
/// `φ(XC)/φ(C)`.
pub fn reichenbach_check(phi: &State, a: &CMat, b: &CMat, cell: &CMat, tol: f64) -> Result<ReichenbachReport> {
    let cp = perp(cell);
    let (pc, pcp) = (evaluate(phi, cell).re, evaluate(phi, &cp).re);
    if pc < CONDITIONER_TOL {
        return Err(Error::ZeroConditioner(pc));
    }
    if pcp < CONDITIONER_TOL {
        return Err(Error::ZeroConditioner(pcp));
    }
    let cond = |x: &CMat, k: &CMat, pk: f64| evaluate(phi, &(k * x * k)).re / pk;
    let ab = a * b;
    let (pa_c, pa_cp) = (cond(a, cell, pc), cond(a, &cp, pcp));
    let (pb_c, pb_cp) = (cond(b, cell, pc), cond(b, &cp, pcp));
    let r_c = (cond(&ab, cell, pc) - pa_c * pb_c).abs();
    let r_cp = (cond(&ab, &cp, pcp) - pa_cp * pb_cp).abs();
    Ok(ReichenbachReport {
        p_a_given_c: pa_c,
        p_a_given_cperp: pa_cp,
        p_b_given_c: pb_c,
        p_b_given_cperp: pb_cp,
        screen_c_residual: r_c,
        screen_cperp_residual: r_cp,
        screen_c: r_c < tol,
        screen_cperp: r_cp < tol,
        pos_impact_a: pa_c > pa_cp + tol,
        pos_impact_b: pb_c > pb_cp + tol,
    })
}

/// `‖C X C − C‖` in the normalized Hilbert–Schmidt norm; zero iff `C ≤ X`.
pub fn subprojection_residual(cell: &CMat, x: &CMat) -> f64 {
    hs_norm(&(cell * x * cell - cell))
}

/// A partition is trivial when every cell lies below one of `A, A⊥, B, B⊥`.
pub fn triviality_check(part: &Partition, a: &CMat, b: &CMat) -> bool {
    let candidates = [a.clone(), perp(a), b.clone(), perp(b)];
    part.cells().iter().all(|ck| {
        candidates
            .iter()
            .any(|x| subprojection_residual(ck, x) < STATE_TOL)
    })
}
