//! Truncated harmonic oscillator: the position operator fails to commute with
//! its own time translate.
//!
//! Work in the number basis `ψ_0, ψ_1, …` with `E_n = ħω(n + ½)` and
//! `U(t) = exp(iHt)`, so `x(t) = U(−t) x U(t)` has entries
//! `x_{mn} e^{i(E_n − E_m)t}`. The scaled commutator `(mω/ħ)[x, x(t)]` applied to
//! `ψ_0` only touches levels 0..=2, so four levels already give exact results.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrixcore::{c, commutator, zeros, CMat, C64};

pub const MIN_LEVELS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FockTruncation {
    pub n_levels: usize,
    pub hbar: f64,
    pub m: f64,
    pub omega: f64,
}

impl FockTruncation {
    /// Natural units `ħ = m = ω = 1`.
    pub fn new(n_levels: usize) -> Result<Self> {
        Self::with_units(n_levels, 1.0, 1.0, 1.0)
    }

    pub fn with_units(n_levels: usize, hbar: f64, m: f64, omega: f64) -> Result<Self> {
        if n_levels < MIN_LEVELS {
            return Err(Error::TruncationTooSmall(n_levels));
        }
        for (name, v) in [("hbar", hbar), ("m", m), ("omega", omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { n_levels, hbar, m, omega })
    }

    fn check(&self) -> Result<()> {
        if self.n_levels < MIN_LEVELS {
            return Err(Error::TruncationTooSmall(self.n_levels));
        }
        Ok(())
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.hbar * self.omega * (n as f64 + 0.5)
    }

    /// Length scale `sqrt(ħ / mω)`.
    pub fn length(&self) -> f64 {
        (self.hbar / (self.m * self.omega)).sqrt()
    }

    /// Position operator from the ladder form `x = sqrt(ħ/2mω)(a + a*)`.
    pub fn position(&self) -> CMat {
        let n = self.n_levels;
        let s = self.length() / 2f64.sqrt();
        let mut x = zeros(n);
        for k in 1..n {
            let v = c(s * (k as f64).sqrt(), 0.0);
            x[(k - 1, k)] = v;
            x[(k, k - 1)] = v;
        }
        x
    }

    /// `U(t) = exp(iHt)`, diagonal in the number basis.
    pub fn evolution(&self, t: f64) -> CMat {
        let n = self.n_levels;
        let mut u = zeros(n);
        for k in 0..n {
            u[(k, k)] = C64::from_polar(1.0, self.energy(k) * t);
        }
        u
    }

    /// `x(t) = U(−t) x U(t)`.
    pub fn evolved_position(&self, t: f64) -> CMat {
        self.evolution(-t) * self.position() * self.evolution(t)
    }

    /// `(mω/ħ)[x, x(t)]`.
    pub fn scaled_commutator(&self, t: f64) -> CMat {
        let x = self.position();
        let xt = self.evolved_position(t);
        commutator(&x, &xt) * c(self.m * self.omega / self.hbar, 0.0)
    }

    /// Coefficients of `(mω/ħ)[x, x(t)]ψ_0` in the number basis.
    pub fn commutator_on_ground(&self, t: f64) -> Result<Vec<C64>> {
        self.check()?;
        Ok(self.scaled_commutator(t).column(0).iter().copied().collect())
    }
}

/// Coefficient of `ψ_0` in `(mω/ħ)[x, x(t)]ψ_0`; equals `−i sin(ħωt)`.
pub fn commutator_groundstate(trunc: &FockTruncation, t: f64) -> Result<C64> {
    Ok(trunc.commutator_on_ground(t)?[0])
}

/// Coefficient of `ψ_2` in `(mω/ħ)[x, x(t)]ψ_0`.
pub fn psi2_coefficient(trunc: &FockTruncation, t: f64) -> Result<C64> {
    Ok(trunc.commutator_on_ground(t)?[2])
}

/// The closed form `(e^{i(E_0−E_1)t} − e^{i(E_1−E_2)t}) / √2`.
pub fn psi2_formula(trunc: &FockTruncation, t: f64) -> Result<C64> {
    trunc.check()?;
    let (e0, e1, e2) = (trunc.energy(0), trunc.energy(1), trunc.energy(2));
    Ok((C64::from_polar(1.0, (e0 - e1) * t) - C64::from_polar(1.0, (e1 - e2) * t)) / 2f64.sqrt())
}

/// The closed form `(e^{i(E_0−E_1)t} − e^{i(E_1−E_0)t}) / 2 = −i sin(ħωt)`.
pub fn psi0_formula(trunc: &FockTruncation, t: f64) -> Result<C64> {
    trunc.check()?;
    let d = (trunc.energy(0) - trunc.energy(1)) * t;
    Ok((C64::from_polar(1.0, d) - C64::from_polar(1.0, -d)) / 2.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillatorSample {
    pub t: f64,
    pub psi0: C64,
    pub psi0_expected: C64,
    pub psi2: C64,
    pub psi2_formula: C64,
}

pub fn sample_grid(trunc: &FockTruncation, ts: &[f64]) -> Result<Vec<OscillatorSample>> {
    ts.iter()
        .map(|&t| {
            let v = trunc.commutator_on_ground(t)?;
            Ok(OscillatorSample {
                t,
                psi0: v[0],
                psi0_expected: c(0.0, -(trunc.hbar * trunc.omega * t).sin()),
                psi2: v[2],
                psi2_formula: psi2_formula(trunc, t)?,
            })
        })
        .collect()
}

/// Hermite polynomials `H_0..=H_n` as coefficient vectors (lowest degree
/// first), from `H_{n+1} = 2ξH_n − 2nH_{n−1}`, i.e. `ξH_n = ½H_{n+1} + nH_{n−1}`.
pub fn hermite_polynomials(n: usize) -> Vec<Vec<f64>> {
    let mut hs: Vec<Vec<f64>> = vec![vec![1.0]];
    if n == 0 {
        return hs;
    }
    hs.push(vec![0.0, 2.0]);
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (d, &a) in hs[k].iter().enumerate() {
            next[d + 1] += 2.0 * a;
        }
        for (d, &a) in hs[k - 1].iter().enumerate() {
            next[d] -= 2.0 * k as f64 * a;
        }
        hs.push(next);
    }
    hs
}

/// `∫ ξ^k e^{−ξ²} dξ / √π`.
fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|j| j as f64 / 2.0).product()
}

/// `⟨ψ_m|x|ψ_n⟩` for `m, n < size` from the position-space eigenfunctions,
/// integrating Hermite polynomial products against the Gaussian weight.
pub fn position_matrix_hermite(trunc: &FockTruncation, size: usize) -> CMat {
    let hs = hermite_polynomials(size);
    let norm: Vec<f64> = (0..size)
        .map(|n| {
            let fact: f64 = (1..=n).map(|j| j as f64).product();
            (1.0 / (2f64.powi(n as i32) * fact)).sqrt()
        })
        .collect();
    let mut x = zeros(size);
    for m in 0..size {
        for n in 0..size {
            let mut acc = 0.0;
            for (i, &a) in hs[m].iter().enumerate() {
                for (j, &b) in hs[n].iter().enumerate() {
                    acc += a * b * gaussian_moment(i + j + 1);
                }
            }
            x[(m, n)] = c(trunc.length() * norm[m] * norm[n] * acc, 0.0);
        }
    }
    x
}
