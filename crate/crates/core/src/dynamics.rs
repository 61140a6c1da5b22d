//! Causal unit-time automorphisms `β(θ₁, θ₂, η₁, η₂)`, the unit space
//! translation `α`, and the extension of the net to double cones of `K^m`.
//!
//! The algebra of the minimal cone `O^m_x + (t, 0)` is `β^{−t}(A(O^m_x))`. All
//! images `β^p(U_i)` for `|p| ≤ padding` that fit in the window are computed
//! when an [`Automorphism`] is built; later operations only read the cache.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isingnet::{
    build_generators, interval_algebra, interval_indices, monom_basis, pauli_to_monom,
    ChainConfig, IsingChain, LocalAlgebra,
};
use crate::matrixcore::{
    c, extend_orthonormal, frob, hs_inner, identity, orthonormalize, span_membership, zeros,
    CMat, HilbertSchmidt, SpanBasis, C64, STRUCT_TOL,
};
use crate::spacetime::{HalfIndex, MinimalCone, Region};

const INVERSE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    pub theta1: f64,
    pub theta2: f64,
    pub eta1: i8,
    pub eta2: i8,
}

impl DynamicsParams {
    pub fn new(theta1: f64, theta2: f64, eta1: i8, eta2: i8) -> Result<Self> {
        let p = Self {
            theta1,
            theta2,
            eta1,
            eta2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, th) in [("theta1", self.theta1), ("theta2", self.theta2)] {
            if !(th > -FRAC_PI_2 && th <= FRAC_PI_2 + 1e-12) {
                return Err(Error::InvalidParams(format!("{name} = {th} outside (-pi/2, pi/2]")));
            }
        }
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if eta != 1 && eta != -1 {
                return Err(Error::InvalidParams(format!("{name} = {eta} is not +1 or -1")));
            }
        }
        Ok(())
    }

    /// `θ₁ = θ₂ = π/2, η₁ = η₂ = 1`: `β` is the identity.
    pub fn trivial() -> Self {
        Self {
            theta1: FRAC_PI_2,
            theta2: FRAC_PI_2,
            eta1: 1,
            eta2: 1,
        }
    }

    /// `θ₁ = 0, η₁ = 1` with trivial half-integer part.
    pub fn conjugating() -> Self {
        Self {
            theta1: 0.0,
            theta2: FRAC_PI_2,
            eta1: 1,
            eta2: 1,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = |rng: &mut R| FRAC_PI_2 - rng.random::<f64>() * std::f64::consts::PI * 0.999_999;
        let eta = |rng: &mut R| if rng.random::<bool>() { 1 } else { -1 };
        Self {
            theta1: theta(rng),
            theta2: theta(rng),
            eta1: eta(rng),
            eta2: eta(rng),
        }
    }
}

/// Three-term combination shared by both generator formulas:
/// `η s² M + η c² L M R + (i/2) sin 2θ (L M − M R)`.
fn three_term(theta: f64, eta: i8, m: &CMat, l: &CMat, r: &CMat) -> CMat {
    let (s, co) = theta.sin_cos();
    let eta = eta as f64;
    let lm = l * m;
    let mr = m * r;
    m * c(eta * s * s, 0.0) + &lm * r * c(eta * co * co, 0.0) + (lm - mr) * c(0.0, 0.5 * (2.0 * theta).sin())
}

/// `β(U_x)` for an integer site.
pub fn beta_on_integer(chain: &IsingChain, params: &DynamicsParams, x: i64) -> Result<CMat> {
    let u = chain.matrix(HalfIndex::integer(x))?;
    let l = chain.matrix(HalfIndex::half_above(x - 1))?;
    let r = chain.matrix(HalfIndex::half_above(x))?;
    Ok(three_term(params.theta1, params.eta1, u, l, r))
}

/// `β(U_{x+1/2})`.
pub fn beta_on_half(chain: &IsingChain, params: &DynamicsParams, x: i64) -> Result<CMat> {
    let u = chain.matrix(HalfIndex::half_above(x))?;
    let l = beta_on_integer(chain, params, x)?;
    let r = beta_on_integer(chain, params, x + 1)?;
    Ok(three_term(params.theta2, params.eta2, u, &l, &r))
}

/// `β` together with the cached images `β^p(U_i)`.
pub struct Automorphism {
    params: DynamicsParams,
    chain: IsingChain,
    images: BTreeMap<(HalfIndex, i64), CMat>,
}

impl std::fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Automorphism")
            .field("params", &self.params)
            .field("window", self.chain.config())
            .field("cached_images", &self.images.len())
            .finish()
    }
}

impl Automorphism {
    pub fn new(params: DynamicsParams, cfg: &ChainConfig) -> Result<Self> {
        params.validate()?;
        let chain = build_generators(cfg)?;
        let mut auto = Self {
            params,
            chain,
            images: BTreeMap::new(),
        };
        let indices = cfg.generator_indices();
        for &i in &indices {
            auto.images.insert((i, 0), auto.chain.matrix(i)?.clone());
        }
        let padding = cfg.padding as i64;
        if padding >= 1 {
            for &i in &indices {
                let img = if i.is_integer() {
                    beta_on_integer(&auto.chain, &params, i.floor())
                } else {
                    beta_on_half(&auto.chain, &params, i.floor())
                };
                if let Ok(m) = img {
                    auto.images.insert((i, 1), m);
                }
            }
            for &i in &indices {
                if let Some(m) = auto.inverse_image(i) {
                    auto.images.insert((i, -1), m);
                }
            }
        }
        for p in 2..=padding {
            for sign in [1, -1] {
                for &i in &indices {
                    let prev = auto.images.get(&(i, sign * (p - 1))).cloned();
                    if let Some(prev) = prev {
                        if let Ok(m) = auto.apply_power(&prev, sign) {
                            auto.images.insert((i, sign * p), m);
                        }
                    }
                }
            }
        }
        Ok(auto)
    }

    /// `β^{-1}(U_i)`, recovered from `β` on the monoms of the smallest
    /// centred interval that reproduces `U_i`. Since `β` preserves the trace,
    /// it is unitary for the Hilbert–Schmidt product and
    /// `β^{-1}(U) = Σ_m ⟨β(m), U⟩ m` over an orthonormal monom basis.
    fn inverse_image(&self, i: HalfIndex) -> Option<CMat> {
        let target = self.chain.matrix(i).ok()?;
        for radius in 1..=3i64 {
            let (lo, hi) = (i.offset(-radius), i.offset(radius));
            let Ok(basis) = monom_basis(&self.chain, lo, hi) else {
                return None;
            };
            let idx = interval_indices(lo, hi);
            let Some(gens) = idx
                .iter()
                .map(|g| self.images.get(&(*g, 1)))
                .collect::<Option<Vec<_>>>()
            else {
                return None;
            };
            let mut result = zeros(self.chain.dim());
            let mut rebuilt = zeros(self.chain.dim());
            for mask in 0u64..1 << idx.len() {
                let mut img = identity(self.chain.dim());
                for (k, g) in gens.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        img = img * *g;
                    }
                }
                // basis element `mask` is the ascending monom of the same subset
                let m = &basis.elements()[mask as usize];
                let coef = hs_inner(&img, target);
                result.hs_axpy(coef, m);
                rebuilt.hs_axpy(coef, &img);
            }
            if frob(&(rebuilt - target)) < INVERSE_TOL * (self.chain.dim() as f64).sqrt() {
                return Some(result);
            }
        }
        None
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    pub fn chain(&self) -> &IsingChain {
        &self.chain
    }

    pub fn dim(&self) -> usize {
        self.chain.dim()
    }

    /// Cached `β^p(U_i)`.
    /// Generator of the minimal cone `O^m_x + (t, 0)`, that is `β^{−t}(U_x)`.
    pub fn cone_image(&self, cone: &MinimalCone) -> Result<&CMat> {
        self.image(cone.x, -cone.t)
    }

    pub fn image(&self, i: HalfIndex, power: i64) -> Result<&CMat> {
        self.images.get(&(i, power)).ok_or_else(|| {
            let cfg = self.chain.config();
            Error::OutOfWindow(format!(
                "β^{power}(U_{i}) does not fit in window [{}, {}] with padding {}",
                cfg.x_min, cfg.x_max, cfg.padding
            ))
        })
    }

    /// Applies `β^power` to a flip-even operator by expanding it in monoms
    /// and multiplying the cached generator images.
    pub fn apply_power(&self, m: &CMat, power: i64) -> Result<CMat> {
        if power == 0 {
            return Ok(m.clone());
        }
        let sum = self.chain.expand(m)?;
        let mut out = zeros(self.dim());
        for (p, coef) in sum.terms() {
            let (neg, idx) = pauli_to_monom(*p)?;
            let mut img = identity(self.dim());
            for g in idx {
                img = img * self.image(g, power)?;
            }
            out.hs_axpy(if neg { -coef } else { *coef }, &img);
        }
        Ok(out)
    }

    /// Largest violation of self-adjointness, unitarity and the generator
    /// commutation pattern among cached images of one power.
    pub fn relation_residual(&self, power: i64) -> f64 {
        let imgs: Vec<(HalfIndex, &CMat)> = self
            .images
            .iter()
            .filter(|((_, p), _)| *p == power)
            .map(|((i, _), m)| (*i, m))
            .collect();
        let one = identity(self.dim());
        let mut worst: f64 = 0.0;
        for (i, a) in &imgs {
            worst = worst.max(frob(&(*a - a.adjoint())));
            worst = worst.max(frob(&(*a * *a - &one)));
            for (j, b) in &imgs {
                let anti = (i.twice() - j.twice()).abs() == 1;
                let r = if anti { *a * *b + *b * *a } else { *a * *b - *b * *a };
                worst = worst.max(frob(&r));
            }
        }
        worst / (self.dim() as f64).sqrt()
    }

    pub fn cached_powers(&self, i: HalfIndex) -> Vec<i64> {
        self.images.keys().filter(|(g, _)| *g == i).map(|(_, p)| *p).collect()
    }
}

/// `β^power(M)` for `M` in the algebra of `region_hint`.
pub fn apply_automorphism(
    dynamics: &Automorphism,
    m: &CMat,
    region_hint: &Region,
    power: i64,
) -> Result<CMat> {
    let alg = cone_algebra(region_hint, dynamics)?;
    let residual = span_membership(m, &alg.basis);
    if residual > STRUCT_TOL {
        return Err(Error::NotInSpan { residual });
    }
    dynamics.apply_power(m, power)
}

/// Unit space translation `α^steps`: relabels `U_i ↦ U_{i+steps}`.
pub fn alpha_shift(chain: &IsingChain, m: &CMat, steps: i64) -> Result<CMat> {
    let cfg = chain.config();
    let shifted = chain.expand(m)?.shift(steps).ok_or_else(|| {
        Error::OutOfWindow(format!("shift by {steps} leaves the representable sites"))
    })?;
    match shifted.support() {
        Some((lo, hi)) if lo < cfg.x_min || hi > cfg.x_max => Err(Error::OutOfWindow(format!(
            "shifted support [{lo}, {hi}] outside window [{}, {}]",
            cfg.x_min, cfg.x_max
        ))),
        _ => Ok(shifted.to_dense(cfg.x_min, cfg.x_max)),
    }
}

/// Algebra of a double cone of `K^m`, generated by `β^{−t}(U_x)` for every
/// minimal cone `O^m_x + (t, 0)` it contains.
///
/// Fails with `DimensionMismatch` unless the linear dimension is `2^n(O)` and
/// the center is trivial (even `n(O)`) or two-dimensional (odd `n(O)`).
pub fn cone_algebra(region: &Region, dynamics: &Automorphism) -> Result<LocalAlgebra> {
    let generators = region
        .minimals()
        .iter()
        .map(|c| dynamics.cone_image(c).cloned())
        .collect::<Result<Vec<_>>>()?;
    let n = region.n_cones();
    let expected = 1usize << n;
    let basis = generate_algebra(&generators, dynamics.dim(), expected)?;
    if basis.len() != expected {
        return Err(Error::DimensionMismatch {
            what: format!("linear dimension of A({region})"),
            expected,
            found: basis.len(),
        });
    }
    let center = basis.center_dim();
    let expected_center = if n % 2 == 0 { 1 } else { 2 };
    if center != expected_center {
        return Err(Error::DimensionMismatch {
            what: format!("center of A({region})"),
            expected: expected_center,
            found: center,
        });
    }
    Ok(LocalAlgebra {
        region: *region,
        lin_dim: basis.len(),
        basis,
        generators,
    })
}

/// Span of all words in the generators, grown by multiplying new basis
/// elements with generators until the dimension is stable. Stops early once
/// the dimension exceeds `cap`.
pub fn generate_algebra(generators: &[CMat], dim: usize, cap: usize) -> Result<SpanBasis> {
    let mut basis = vec![identity(dim)];
    let mut frontier = vec![0usize];
    for g in generators {
        if extend_orthonormal(&mut basis, g.clone(), 1e-10) {
            frontier.push(basis.len() - 1);
        }
    }
    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > dim * dim || basis.len() > cap {
            break;
        }
        let mut next = Vec::new();
        for &k in &frontier {
            for g in generators {
                let prod = &basis[k] * g;
                if extend_orthonormal(&mut basis, prod, 1e-10) {
                    next.push(basis.len() - 1);
                }
            }
        }
        frontier = next;
    }
    Ok(orthonormalize(&basis))
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalityEntry {
    pub cones: [HalfIndex; 3],
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalityReport {
    pub params: DynamicsParams,
    pub entries: Vec<CausalityEntry>,
    pub max_residual: f64,
}

/// Compares `A(V)` with `A(V'')` for every triple `V` of neighbouring
/// Cauchy-surface cones whose completion fits in the window.
pub fn local_primitive_causality_check(dynamics: &Automorphism) -> Result<CausalityReport> {
    if dynamics.chain().config().padding < 1 {
        return Err(Error::OutOfWindow("local primitive causality needs padding >= 1".into()));
    }
    let mut entries = Vec::new();
    for i in dynamics.chain().config().generator_indices() {
        let (lo, hi) = (i.offset(-1), i.offset(1));
        let region = Region::interval(lo, hi);
        let Ok(completion) = cone_algebra(&region, dynamics) else {
            continue;
        };
        let cauchy = interval_algebra(dynamics.chain(), lo, hi)?;
        entries.push(CausalityEntry {
            cones: [lo, i, hi],
            residual: cauchy.basis.span_distance(&completion.basis),
        });
    }
    if entries.is_empty() {
        return Err(Error::OutOfWindow("no three-cone neighbourhood fits in the window".into()));
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(CausalityReport {
        params: dynamics.params,
        entries,
        max_residual,
    })
}

/// Matrix of `Σ_k coef_k · M_k`, convenience for tests and callers.
pub fn combine(terms: &[(C64, &CMat)], dim: usize) -> CMat {
    let mut out = zeros(dim);
    for (coef, m) in terms {
        out.hs_axpy(*coef, m);
    }
    out
}
