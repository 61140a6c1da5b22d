//! Exact Pauli-string arithmetic on the chain.
//!
//! A string `X^x Z^z` is stored as two bitmasks over sites `-64..=63`
//! (site `s` at bit `s + 64`); each site factor is `X^{x_s} Z^{z_s}`.

use std::collections::BTreeMap;

use crate::matrixcore::{c, zeros, CMat, C64};

pub const MIN_SITE: i64 = -64;
pub const MAX_SITE: i64 = 63;

const DROP: f64 = 1e-14;

fn bit(site: i64) -> u128 {
    assert!((MIN_SITE..=MAX_SITE).contains(&site), "site {site} outside the representable range");
    1u128 << (site - MIN_SITE)
}

fn popcount_odd(v: u128) -> bool {
    v.count_ones() % 2 == 1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u128,
    pub z: u128,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x_at(site: i64) -> Self {
        Self { x: bit(site), z: 0 }
    }

    pub fn z_at(site: i64) -> Self {
        Self { x: 0, z: bit(site) }
    }

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// `self · other = (-1)^neg · product`.
    pub fn mul(self, other: PauliString) -> (bool, PauliString) {
        let neg = popcount_odd(self.z & other.x);
        (
            neg,
            PauliString {
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        )
    }

    pub fn commutes_with(self, other: PauliString) -> bool {
        !popcount_odd((self.x & other.z) ^ (self.z & other.x))
    }

    /// `P* = (-1)^neg · P`.
    pub fn adjoint_sign(self) -> bool {
        popcount_odd(self.x & self.z)
    }

    /// Parity of the number of `Z` factors; even strings commute with `∏ X`.
    pub fn z_parity(self) -> bool {
        popcount_odd(self.z)
    }

    /// Smallest and largest site carrying a non-identity factor.
    pub fn support(self) -> Option<(i64, i64)> {
        let m = self.x | self.z;
        if m == 0 {
            return None;
        }
        let lo = m.trailing_zeros() as i64 + MIN_SITE;
        let hi = 127 - m.leading_zeros() as i64 + MIN_SITE;
        Some((lo, hi))
    }

    pub fn has_x(self, site: i64) -> bool {
        self.x & bit(site) != 0
    }

    pub fn has_z(self, site: i64) -> bool {
        self.z & bit(site) != 0
    }

    /// Relabels site `s` as `s + steps`.
    pub fn shift(self, steps: i64) -> Option<PauliString> {
        let Some((lo, hi)) = self.support() else {
            return Some(self);
        };
        if lo + steps < MIN_SITE || hi + steps > MAX_SITE {
            return None;
        }
        let sh = |m: u128| if steps >= 0 { m << steps } else { m >> (-steps) };
        Some(PauliString {
            x: sh(self.x),
            z: sh(self.z),
        })
    }

    /// Local masks in the tensor ordering where site `lo` is the most
    /// significant qubit.
    fn local_masks(self, lo: i64, hi: i64) -> (usize, usize) {
        let (mut lx, mut lz) = (0usize, 0usize);
        for s in lo..=hi {
            let pos = (hi - s) as usize;
            if self.has_x(s) {
                lx |= 1 << pos;
            }
            if self.has_z(s) {
                lz |= 1 << pos;
            }
        }
        (lx, lz)
    }

    fn from_local(lx: usize, lz: usize, lo: i64, hi: i64) -> Self {
        let mut p = PauliString::IDENTITY;
        for s in lo..=hi {
            let pos = (hi - s) as usize;
            if lx >> pos & 1 == 1 {
                p.x |= bit(s);
            }
            if lz >> pos & 1 == 1 {
                p.z |= bit(s);
            }
        }
        p
    }

    pub fn fits(self, lo: i64, hi: i64) -> bool {
        self.support().is_none_or(|(a, b)| lo <= a && b <= hi)
    }

    /// Dense matrix on qubits `lo..=hi`; entries lie in `{0, ±1}`.
    pub fn to_dense(self, lo: i64, hi: i64) -> CMat {
        assert!(self.fits(lo, hi), "Pauli string outside the window");
        let dim = 1usize << (hi - lo + 1);
        let (lx, lz) = self.local_masks(lo, hi);
        let mut m = zeros(dim);
        for s in 0..dim {
            let sign = if (lz & s).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(s ^ lx, s)] = c(sign, 0.0);
        }
        m
    }
}

/// Fast Walsh–Hadamard transform in place.
fn fwht(v: &mut [C64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Linear combination of Pauli strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliSum {
    terms: BTreeMap<PauliString, C64>,
}

impl PauliSum {
    pub fn single(coef: C64, p: PauliString) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(p, coef);
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Expansion of a dense matrix on qubits `lo..=hi`; coefficients are the
    /// normalized Hilbert–Schmidt products `ntrace(P* M)`. Terms below
    /// `1e-14` are dropped.
    pub fn from_dense(m: &CMat, lo: i64, hi: i64) -> Self {
        let dim = 1usize << (hi - lo + 1);
        assert_eq!(m.nrows(), dim, "matrix does not match the window");
        let mut terms = BTreeMap::new();
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for lx in 0..dim {
            for (s, b) in buf.iter_mut().enumerate() {
                *b = m[(s ^ lx, s)];
            }
            fwht(&mut buf);
            for (lz, v) in buf.iter().enumerate() {
                let coef = *v / dim as f64;
                if coef.norm() > DROP {
                    terms.insert(PauliString::from_local(lx, lz, lo, hi), coef);
                }
            }
        }
        Self { terms }
    }

    pub fn to_dense(&self, lo: i64, hi: i64) -> CMat {
        let dim = 1usize << (hi - lo + 1);
        let mut m = zeros(dim);
        for (p, coef) in &self.terms {
            let (lx, lz) = p.local_masks(lo, hi);
            for s in 0..dim {
                let sign = if (lz & s).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[(s ^ lx, s)] += coef * sign;
            }
        }
        m
    }

    pub fn shift(&self, steps: i64) -> Option<PauliSum> {
        let mut terms = BTreeMap::new();
        for (p, coef) in &self.terms {
            terms.insert(p.shift(steps)?, *coef);
        }
        Some(Self { terms })
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        self.terms
            .keys()
            .filter_map(|p| p.support())
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
}
