//! Cauchy-surface net of the local quantum Ising model in the order–disorder
//! representation.
//!
//! The generator `U_x` at an integer site is the spin flip `X_x`; the
//! generator `U_{x+1/2}` is the domain-wall operator `Z_x Z_{x+1}`. The
//! generators of a window of qubits `x_min..=x_max` generate exactly the
//! flip-even part of the window's matrix algebra.

pub mod pauli;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{
    c, commutant, frob, identity, orthonormalize, CMat, SpanBasis, STRUCT_TOL,
};
use crate::spacetime::{HalfIndex, MinimalCone, Region};

pub use pauli::{PauliString, PauliSum};

pub const DEFAULT_MAX_QUBITS: usize = 10;

fn default_max_qubits() -> usize {
    DEFAULT_MAX_QUBITS
}

/// Finite window of qubit sites onto the infinite chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub x_min: i64,
    pub x_max: i64,
    /// Largest number of time steps (forward or backward) that dynamics on
    /// this window is asked to support.
    #[serde(default)]
    pub padding: usize,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: usize,
}

impl ChainConfig {
    pub fn new(x_min: i64, x_max: i64, padding: usize) -> Result<Self> {
        let cfg = Self {
            x_min,
            x_max,
            padding,
            max_qubits: DEFAULT_MAX_QUBITS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_max < self.x_min + 1 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 qubit sites, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.x_min < pauli::MIN_SITE || self.x_max > pauli::MAX_SITE {
            return Err(Error::InvalidConfig(format!(
                "sites must lie in [{}, {}]",
                pauli::MIN_SITE,
                pauli::MAX_SITE
            )));
        }
        if self.n_qubits() > self.max_qubits {
            return Err(Error::InvalidConfig(format!(
                "{} qubits exceed the cap of {}",
                self.n_qubits(),
                self.max_qubits
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn first_generator(&self) -> HalfIndex {
        HalfIndex::integer(self.x_min)
    }

    pub fn last_generator(&self) -> HalfIndex {
        HalfIndex::integer(self.x_max)
    }

    pub fn contains_generator(&self, i: HalfIndex) -> bool {
        self.first_generator() <= i && i <= self.last_generator()
    }

    pub fn generator_indices(&self) -> Vec<HalfIndex> {
        interval_indices(self.first_generator(), self.last_generator())
    }
}

/// `(i, j) = {i, i + 1/2, …, j}`; empty if `j < i`.
pub fn interval_indices(i: HalfIndex, j: HalfIndex) -> Vec<HalfIndex> {
    (i.twice()..=j.twice()).map(HalfIndex::from_twice).collect()
}

/// Pauli string of a single generator.
pub fn generator_pauli(i: HalfIndex) -> PauliString {
    if i.is_integer() {
        PauliString::x_at(i.floor())
    } else {
        let k = i.floor();
        PauliString {
            x: 0,
            z: PauliString::z_at(k).z | PauliString::z_at(k + 1).z,
        }
    }
}

/// Ordered product `U_{i_1} U_{i_2} ⋯` as `(-1)^neg · P`.
pub fn monom_pauli(indices: &[HalfIndex]) -> (bool, PauliString) {
    indices
        .iter()
        .fold((false, PauliString::IDENTITY), |(neg, acc), &i| {
            let (n, p) = acc.mul(generator_pauli(i));
            (neg ^ n, p)
        })
}

/// Writes a Pauli string as `(-1)^neg` times the ascending monom of the
/// returned generators. Fails for strings outside the flip-even algebra.
pub fn pauli_to_monom(p: PauliString) -> Result<(bool, Vec<HalfIndex>)> {
    let Some((lo, hi)) = p.support() else {
        return Ok((false, Vec::new()));
    };
    if p.z_parity() {
        return Err(Error::NotInAlgebra(format!(
            "odd number of Z factors on sites {lo}..={hi}"
        )));
    }
    let mut out = Vec::new();
    let mut parity = false;
    for s in lo..=hi {
        if p.has_x(s) {
            out.push(HalfIndex::integer(s));
        }
        parity ^= p.has_z(s);
        if parity {
            out.push(HalfIndex::half_above(s));
        }
    }
    let (neg, q) = monom_pauli(&out);
    debug_assert_eq!(q, p);
    Ok((neg, out))
}

#[derive(Debug)]
pub struct Generator {
    pub index: HalfIndex,
    pub pauli: PauliString,
    window: (i64, i64),
    dense: OnceLock<CMat>,
}

impl Generator {
    /// Dense self-adjoint unitary on the window, built on first use.
    pub fn matrix(&self) -> &CMat {
        self.dense
            .get_or_init(|| self.pauli.to_dense(self.window.0, self.window.1))
    }
}

/// The generators of a window.
#[derive(Debug)]
pub struct IsingChain {
    cfg: ChainConfig,
    generators: BTreeMap<HalfIndex, Generator>,
}

pub fn build_generators(cfg: &ChainConfig) -> Result<IsingChain> {
    cfg.validate()?;
    let generators = cfg
        .generator_indices()
        .into_iter()
        .map(|i| {
            (
                i,
                Generator {
                    index: i,
                    pauli: generator_pauli(i),
                    window: (cfg.x_min, cfg.x_max),
                    dense: OnceLock::new(),
                },
            )
        })
        .collect();
    Ok(IsingChain {
        cfg: cfg.clone(),
        generators,
    })
}

impl IsingChain {
    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim()
    }

    pub fn generator(&self, i: HalfIndex) -> Result<&Generator> {
        self.generators.get(&i).ok_or_else(|| {
            Error::OutOfWindow(format!(
                "generator U_{i} needs qubits outside [{}, {}]",
                self.cfg.x_min, self.cfg.x_max
            ))
        })
    }

    pub fn matrix(&self, i: HalfIndex) -> Result<&CMat> {
        Ok(self.generator(i)?.matrix())
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.generators.values()
    }

    pub fn check_interval(&self, i: HalfIndex, j: HalfIndex) -> Result<()> {
        if j < i {
            return Err(Error::InvalidConfig(format!("empty interval ({i}, {j})")));
        }
        self.generator(i)?;
        self.generator(j)?;
        Ok(())
    }

    /// Dense matrix of a Pauli string on this window.
    pub fn dense(&self, p: PauliString) -> Result<CMat> {
        if !p.fits(self.cfg.x_min, self.cfg.x_max) {
            return Err(Error::OutOfWindow(format!("Pauli string support {:?}", p.support())));
        }
        Ok(p.to_dense(self.cfg.x_min, self.cfg.x_max))
    }

    pub fn expand(&self, m: &CMat) -> Result<PauliSum> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix on a window of dimension {}",
                m.nrows(),
                m.ncols(),
                self.dim()
            )));
        }
        Ok(PauliSum::from_dense(m, self.cfg.x_min, self.cfg.x_max))
    }

    /// Global spin flip `∏ X`; commutes exactly with every generator.
    pub fn global_flip(&self) -> CMat {
        let p = (self.cfg.x_min..=self.cfg.x_max)
            .fold(PauliString::IDENTITY, |acc, s| acc.mul(PauliString::x_at(s)).1);
        p.to_dense(self.cfg.x_min, self.cfg.x_max)
    }

    /// Monom `U_{i_1}⋯U_{i_k}` for a subset of an interval, encoded as a bit
    /// mask over its generators in ascending order.
    pub fn monom(&self, indices: &[HalfIndex]) -> Result<CMat> {
        for &i in indices {
            self.generator(i)?;
        }
        let (neg, p) = monom_pauli(indices);
        let m = p.to_dense(self.cfg.x_min, self.cfg.x_max);
        Ok(if neg { -m } else { m })
    }
}

/// Symbolic monoms `(sign, string)` of an interval, indexed by subset mask.
pub fn monom_symbols(i: HalfIndex, j: HalfIndex) -> Vec<(bool, PauliString)> {
    let idx = interval_indices(i, j);
    (0u64..1 << idx.len())
        .map(|mask| {
            let chosen: Vec<HalfIndex> = idx
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &g)| g)
                .collect();
            monom_pauli(&chosen)
        })
        .collect()
}

/// Orthonormal monom basis of the interval `(i, j)`.
pub fn monom_basis(chain: &IsingChain, i: HalfIndex, j: HalfIndex) -> Result<SpanBasis> {
    chain.check_interval(i, j)?;
    let n = interval_indices(i, j).len();
    if n > 2 * chain.config().max_qubits {
        return Err(Error::InvalidConfig(format!("interval with {n} generators is too large")));
    }
    let elements: Vec<CMat> = monom_symbols(i, j)
        .into_iter()
        .map(|(neg, p)| {
            let m = p.to_dense(chain.cfg.x_min, chain.cfg.x_max);
            if neg {
                -m
            } else {
                m
            }
        })
        .collect();
    // distinct Pauli strings are exactly orthonormal
    Ok(SpanBasis::from_orthonormal(chain.dim(), elements))
}

/// A region together with an orthonormal basis of its local algebra.
#[derive(Clone, Debug)]
pub struct LocalAlgebra {
    pub region: Region,
    pub basis: SpanBasis,
    pub lin_dim: usize,
    /// Self-adjoint unitaries generating the algebra.
    pub generators: Vec<CMat>,
}

impl LocalAlgebra {
    pub fn center_dim(&self) -> usize {
        self.basis.center_dim()
    }

    pub fn contains(&self, m: &CMat, tol: f64) -> bool {
        self.basis.contains(m, tol)
    }
}

/// Algebra of the Cauchy-surface interval `(i, j)`.
pub fn interval_algebra(chain: &IsingChain, i: HalfIndex, j: HalfIndex) -> Result<LocalAlgebra> {
    let basis = monom_basis(chain, i, j)?;
    let generators = interval_indices(i, j)
        .into_iter()
        .map(|g| chain.matrix(g).cloned())
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalAlgebra {
        region: Region::interval(i, j),
        lin_dim: basis.len(),
        basis,
        generators,
    })
}

/// `A(O^m_i) = span{1, U_i} ≅ ℂ ⊕ ℂ`.
pub fn one_point_algebra(chain: &IsingChain, i: HalfIndex) -> Result<LocalAlgebra> {
    let mut alg = interval_algebra(chain, i, i)?;
    alg.region = Region::minimal(MinimalCone::new(i, 0));
    Ok(alg)
}

/// Minimal projections `½(1 ± U_i)` of a one-point algebra.
pub fn minimal_projections(chain: &IsingChain, i: HalfIndex) -> Result<(CMat, CMat)> {
    let u = chain.matrix(i)?;
    let one = identity(chain.dim());
    Ok(((&one + u) * c(0.5, 0.0), (&one - u) * c(0.5, 0.0)))
}

#[derive(Clone, Debug, Serialize)]
pub struct HaagReport {
    pub interval: (HalfIndex, HalfIndex),
    pub complement: Vec<String>,
    pub expected_dim: usize,
    pub computed_commutant_dim: usize,
    pub span_residual: f64,
    pub matches: bool,
    /// False when the interval fills the window and the complement is empty.
    pub informative: bool,
    #[serde(skip)]
    pub expected: SpanBasis,
}

/// Commutant of everything spacelike to the interval `(i, j)` within the
/// window, compared with the interval algebra.
///
/// The spacelike complement consists of the window generators at distance
/// at least 1 from the interval. The generators `U_{x_min − 1/2}` and
/// `U_{x_max + 1/2}` straddling the window edges are represented by their
/// in-window factors `Z_{x_min}` and `Z_{x_max}`; the global flip `∏ X`
/// restricts the commutant to the flip-even window algebra.
pub fn haag_duality_check(chain: &IsingChain, i: HalfIndex, j: HalfIndex) -> Result<HaagReport> {
    chain.check_interval(i, j)?;
    let cfg = chain.config();
    let (first, last) = (cfg.first_generator(), cfg.last_generator());
    let expected = monom_basis(chain, i, j)?;
    let full = i == first && j == last;
    let left_margin = i.twice() - first.twice();
    let right_margin = last.twice() - j.twice();
    if !full && (left_margin < 2 || right_margin < 2) {
        return Err(Error::MarginTooSmall(format!(
            "interval ({i}, {j}) in window [{}, {}] needs at least one generator of margin on each side",
            cfg.x_min, cfg.x_max
        )));
    }
    if full {
        return Ok(HaagReport {
            interval: (i, j),
            complement: Vec::new(),
            expected_dim: expected.len(),
            computed_commutant_dim: expected.len(),
            span_residual: 0.0,
            matches: true,
            informative: false,
            expected,
        });
    }
    let mut complement: Vec<(String, CMat)> = Vec::new();
    for g in chain.generators() {
        if g.index.twice() <= i.twice() - 2 || g.index.twice() >= j.twice() + 2 {
            complement.push((format!("U_{}", g.index), g.matrix().clone()));
        }
    }
    if first.offset(-1).twice() <= i.twice() - 2 {
        complement.push((format!("Z_{}", cfg.x_min), chain.dense(PauliString::z_at(cfg.x_min))?));
    }
    if last.offset(1).twice() >= j.twice() + 2 {
        complement.push((format!("Z_{}", cfg.x_max), chain.dense(PauliString::z_at(cfg.x_max))?));
    }
    let mut set: Vec<CMat> = complement.iter().map(|(_, m)| m.clone()).collect();
    set.push(chain.global_flip());
    let comm = commutant(&orthonormalize(&set), chain.dim());
    let span_residual = comm.span_distance(&expected);
    let matches = comm.len() == expected.len() && span_residual < STRUCT_TOL;
    Ok(HaagReport {
        interval: (i, j),
        complement: complement.into_iter().map(|(n, _)| n).collect(),
        expected_dim: expected.len(),
        computed_commutant_dim: comm.len(),
        span_residual,
        matches,
        informative: true,
        expected,
    })
}

/// Largest violation of the generator relations over all pairs, computed
/// on dense matrices (exactly zero for a correct representation).
pub fn relation_residual(chain: &IsingChain) -> f64 {
    let gens: Vec<&Generator> = chain.generators().collect();
    let one = identity(chain.dim());
    let mut worst: f64 = 0.0;
    for a in &gens {
        let ma = a.matrix();
        worst = worst.max(frob(&(ma - ma.adjoint())));
        worst = worst.max(frob(&(ma * ma - &one)));
        for b in &gens {
            let mb = b.matrix();
            let anti = (a.index.twice() - b.index.twice()).abs() == 1;
            let r = if anti { ma * mb + mb * ma } else { ma * mb - mb * ma };
            worst = worst.max(frob(&r));
        }
    }
    worst
}

/// Pairs violating the generator relations, checked symbolically on Pauli
/// strings (integer arithmetic).
pub fn symbolic_relation_violations(cfg: &ChainConfig) -> Vec<(HalfIndex, HalfIndex)> {
    let idx = cfg.generator_indices();
    let mut bad = Vec::new();
    for &a in &idx {
        let pa = generator_pauli(a);
        let (neg, sq) = pa.mul(pa);
        if neg || !sq.is_identity() || pa.adjoint_sign() {
            bad.push((a, a));
        }
        for &b in &idx {
            let anti = (a.twice() - b.twice()).abs() == 1;
            if generator_pauli(a).commutes_with(generator_pauli(b)) == anti {
                bad.push((a, b));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::{decompose_simple, hs_inner, is_projection, ntrace, zeros};

    fn h(twice: i64) -> HalfIndex {
        HalfIndex::from_twice(twice)
    }

    fn chain(lo: i64, hi: i64) -> IsingChain {
        build_generators(&ChainConfig::new(lo, hi, 0).unwrap()).unwrap()
    }

    #[test]
    fn two_site_generators() {
        let ch = chain(0, 1);
        let u = ch.matrix(h(1)).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| u[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(u * u, identity(4));
        let (u0, u1) = (ch.matrix(h(0)).unwrap(), ch.matrix(h(2)).unwrap());
        assert_eq!(frob(&(u0 * u + u * u0)), 0.0);
        assert_eq!(frob(&(u0 * u1 - u1 * u0)), 0.0);
    }

    #[test]
    fn relations_exact_on_six_qubits() {
        let ch = chain(-2, 3);
        assert_eq!(relation_residual(&ch), 0.0);
        assert!(symbolic_relation_violations(ch.config()).is_empty());
        let f = ch.global_flip();
        for g in ch.generators() {
            assert_eq!(frob(&(&f * g.matrix() - g.matrix() * &f)), 0.0);
        }
    }

    #[test]
    fn out_of_window() {
        let ch = chain(0, 2);
        assert!(matches!(ch.generator(h(-1)), Err(Error::OutOfWindow(_))));
        assert!(matches!(ch.generator(h(5)), Err(Error::OutOfWindow(_))));
        assert!(ch.generator(h(4)).is_ok());
        assert!(matches!(ChainConfig::new(0, 0, 0), Err(Error::InvalidConfig(_))));
        assert!(matches!(ChainConfig::new(0, 20, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn monom_bases() {
        let ch = chain(-1, 2);
        assert_eq!(monom_basis(&ch, h(0), h(0)).unwrap().len(), 2);
        let b = monom_basis(&ch, h(0), h(2)).unwrap();
        assert_eq!(b.len(), 8);
        assert!(b.gram_deviation() < 1e-15);
        assert!(b.is_star_closed(1e-12));
    }

    /// Subset → string injectivity and the sign bookkeeping of the inverse
    /// map, exhaustively for every interval with up to 12 generators.
    #[test]
    fn monom_map_injective() {
        for n in 1..=12usize {
            let i = h(-3);
            let j = i.offset(n as i64 - 1);
            let symbols = monom_symbols(i, j);
            let mut seen = std::collections::HashSet::new();
            for (mask, (neg, p)) in symbols.iter().enumerate() {
                assert!(seen.insert(*p), "duplicate string for n={n}");
                let (neg2, idx) = pauli_to_monom(*p).unwrap();
                assert_eq!(neg2, *neg);
                let all = interval_indices(i, j);
                let back: usize = idx
                    .iter()
                    .map(|g| 1usize << all.iter().position(|a| a == g).unwrap())
                    .sum();
                assert_eq!(back, mask);
            }
        }
    }

    #[test]
    fn odd_strings_rejected() {
        assert!(matches!(
            pauli_to_monom(PauliString::z_at(0)),
            Err(Error::NotInAlgebra(_))
        ));
    }

    #[test]
    fn center_parity_law() {
        let ch = chain(-1, 2);
        for n in 1..=6i64 {
            let i = h(-1);
            let alg = interval_algebra(&ch, i, i.offset(n - 1)).unwrap();
            assert_eq!(alg.lin_dim, 1 << n);
            let expected = if n % 2 == 0 { 1 } else { 2 };
            assert_eq!(alg.center_dim(), expected, "n = {n}");
            if n % 2 == 0 {
                let dec = decompose_simple(&alg.basis).unwrap();
                assert_eq!(dec.d, 1 << (n / 2));
            }
        }
    }

    #[test]
    fn one_point_projections() {
        let ch = chain(0, 1);
        let alg = one_point_algebra(&ch, h(1)).unwrap();
        assert_eq!(alg.lin_dim, 2);
        assert_eq!(alg.center_dim(), 2);
        let (p, q) = minimal_projections(&ch, h(1)).unwrap();
        assert!(is_projection(&p, 1e-12) && is_projection(&q, 1e-12));
        assert_eq!(&p + &q, identity(4));
        assert_eq!(&p * &q, zeros(4));
        assert!((ntrace(&p).re - 0.5).abs() < 1e-15);
        assert!(alg.contains(&p, 1e-12));
    }

    #[test]
    fn haag_duality_cases() {
        let ch = chain(-2, 3);
        let r = haag_duality_check(&ch, h(-4), h(6)).unwrap();
        assert!(!r.informative && r.matches);
        let r = haag_duality_check(&ch, h(0), h(0)).unwrap();
        assert!(r.informative && r.matches, "{r:?}");
        let r = haag_duality_check(&ch, h(0), h(2)).unwrap();
        assert!(r.matches, "{r:?}");
        let r = haag_duality_check(&ch, h(1), h(1)).unwrap();
        assert!(r.matches, "{r:?}");
        assert!(matches!(
            haag_duality_check(&ch, h(-3), h(0)),
            Err(Error::MarginTooSmall(_))
        ));
    }

    #[test]
    fn pauli_expansion_of_generator() {
        let ch = chain(-1, 1);
        let u = ch.matrix(h(-1)).unwrap();
        let sum = ch.expand(u).unwrap();
        assert_eq!(sum.len(), 1);
        let (p, coef) = sum.terms().next().unwrap();
        assert_eq!(*p, generator_pauli(h(-1)));
        assert!((coef - c(1.0, 0.0)).norm() < 1e-15);
        assert!((hs_inner(u, u) - c(1.0, 0.0)).norm() < 1e-15);
    }
}
