//! Dense complex linear algebra for finite-dimensional operator algebras.
//!
//! Every matrix is a [`CMat`] acting on the global chain Hilbert space (or on a
//! small factor of it). Orthogonality, norms of algebra elements and span
//! membership all use the Hilbert–Schmidt inner product with the *normalized*
//! trace, `<X, Y> = tr(X* Y) / n`, so the identity has unit norm and distinct
//! Pauli strings are orthonormal. Plain Frobenius norms are used only for
//! structural predicates (idempotency, unitarity, vanishing commutators), where
//! they give the stricter bound.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Tolerance for structural predicates (span membership, projections).
pub const STRUCT_TOL: f64 = 1e-9;
/// Tolerance for validating inputs (Hermiticity, unitarity).
pub const INPUT_TOL: f64 = 1e-12;

const DECOMPOSE_RETRIES: usize = 5;
const INTERNAL_SEED: u64 = 0x51_5e_ed;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn diag_real(values: &[f64]) -> CMat {
    let n = values.len();
    let mut m = zeros(n);
    for (k, v) in values.iter().enumerate() {
        m[(k, k)] = c(*v, 0.0);
    }
    m
}

/// Normalized trace: `tr(M) / n`, so that the identity has trace one.
pub fn ntrace(m: &CMat) -> C64 {
    assert!(m.is_square(), "normalized trace of a non-square matrix");
    m.trace() / m.nrows() as f64
}

/// Hilbert–Schmidt inner product `ntrace(x* y)`.
pub fn hs_inner(x: &CMat, y: &CMat) -> C64 {
    debug_assert_eq!(x.shape(), y.shape());
    let s: C64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
    s / x.nrows() as f64
}

pub fn hs_norm(x: &CMat) -> f64 {
    hs_inner(x, x).re.max(0.0).sqrt()
}

/// Frobenius norm (unnormalized).
pub fn frob(x: &CMat) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    frob(&(m - m.adjoint()))
}

pub fn unitary_deviation(v: &CMat) -> f64 {
    frob(&(v * v.adjoint() - identity(v.nrows())))
}

/// Orthogonal complement `1 - p`.
pub fn perp(p: &CMat) -> CMat {
    identity(p.nrows()) - p
}

/// True iff `P² = P` and `P = P*` within `tol` (Frobenius).
pub fn is_projection(p: &CMat, tol: f64) -> bool {
    p.is_square() && frob(&(p * p - p)) < tol && hermitian_deviation(p) < tol
}

fn check_square(m: &CMat, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "{what}: expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Spectral decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    hermitian_eig_tol(m, INPUT_TOL)
}

pub fn hermitian_eig_tol(m: &CMat, tol: f64) -> Result<(Vec<f64>, CMat)> {
    check_square(m, "hermitian_eig")?;
    let dev = hermitian_deviation(m);
    if dev >= tol {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eigh_unchecked(m))
}

/// Eigendecomposition of the Hermitian part of `m`; callers guarantee
/// Hermiticity.
pub(crate) fn eigh_unchecked(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0));
    }
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = zeros(n);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vecs)
}

/// Groups indices of ascending `values` into clusters of (numerically) equal
/// eigenvalues.
pub(crate) fn eigen_clusters(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let spread = values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(last) if (v - values[*last.last().unwrap()]).abs() <= rel_tol * spread => {
                last.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }
    clusters
}

/// `W diag(values) W*` for a unitary `W`.
pub fn from_spectrum(w: &CMat, values: &[C64]) -> CMat {
    let mut scaled = w.clone();
    for (k, v) in values.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= *v;
    }
    scaled * w.adjoint()
}

/// A diagonalized unitary `V = W diag(e^{iθ}) W*` with principal phases
/// `θ ∈ (-π, π]`. Evaluating the one-parameter group `t ↦ exp(t log V)` from
/// the cached spectrum costs one matrix product per call.
#[derive(Clone, Debug)]
pub struct UnitaryPath {
    basis: CMat,
    phases: Vec<f64>,
}

impl UnitaryPath {
    pub fn new(v: &CMat) -> Result<Self> {
        Self::with_tol(v, INPUT_TOL)
    }

    pub fn with_tol(v: &CMat, tol: f64) -> Result<Self> {
        check_square(v, "unitary_log")?;
        let dev = unitary_deviation(v);
        if dev >= tol {
            return Err(Error::NotUnitary(dev));
        }
        let n = v.nrows();
        let vh = v.adjoint();
        let re_part = (v + &vh) * c(0.5, 0.0);
        let im_part = (v - &vh) * c(0.0, -0.5);
        // A normal matrix is diagonalized by any generic real combination of its
        // Hermitian and anti-Hermitian parts.
        for mix in [0.618_033_988_749_894_9, 0.318_309_886_183_790_7, 1.414_213_562_373_095, 2.718_281_828_459_045] {
            let pencil = &re_part + &im_part * c(mix, 0.0);
            let (_, w) = eigh_unchecked(&pencil);
            let diag = w.adjoint() * v * &w;
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += diag[(i, j)].norm_sqr();
                    }
                }
            }
            if off.sqrt() > 1e-10 {
                continue;
            }
            let phases = (0..n)
                .map(|k| {
                    let theta = diag[(k, k)].arg();
                    if (theta + std::f64::consts::PI).abs() < 1e-12 {
                        std::f64::consts::PI
                    } else {
                        theta
                    }
                })
                .collect();
            return Ok(Self { basis: w, phases });
        }
        Err(Error::DecompositionFailed(
            "could not diagonalize unitary for its logarithm".into(),
        ))
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The skew-Hermitian principal logarithm `K`.
    pub fn generator(&self) -> CMat {
        let vals: Vec<C64> = self.phases.iter().map(|t| c(0.0, *t)).collect();
        from_spectrum(&self.basis, &vals)
    }

    /// `exp(t K)`.
    pub fn at(&self, t: f64) -> CMat {
        let vals: Vec<C64> = self.phases.iter().map(|th| C64::from_polar(1.0, t * th)).collect();
        from_spectrum(&self.basis, &vals)
    }
}

/// Principal logarithm of a unitary: skew-Hermitian `K` with `exp(K) = V`
/// and eigenvalue phases in `(-π, π]`.
pub fn unitary_log(v: &CMat) -> Result<CMat> {
    Ok(UnitaryPath::new(v)?.generator())
}

/// Matrix exponential. Skew-Hermitian inputs go through the spectral
/// decomposition of `iK`; everything else through scaling and squaring.
pub fn expm(k: &CMat) -> Result<CMat> {
    check_square(k, "expm")?;
    let n = k.nrows();
    let scale = frob(k).max(1.0);
    if frob(&(k + k.adjoint())) < INPUT_TOL * scale {
        let ik = k * c(0.0, 1.0);
        let (mu, w) = eigh_unchecked(&ik);
        let vals: Vec<C64> = mu.iter().map(|m| C64::from_polar(1.0, -m)).collect();
        return Ok(from_spectrum(&w, &vals));
    }
    let norm = frob(k);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = k * c(0.5f64.powi(squarings), 0.0);
    let mut term = identity(n);
    let mut sum = identity(n);
    for order in 1..=18 {
        term = &term * &scaled * c(1.0 / order as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Vectors of a complex inner product space spanned by operators.
pub trait HilbertSchmidt: Clone {
    fn hs_dot(&self, other: &Self) -> C64;
    /// `self += a * x`
    fn hs_axpy(&mut self, a: C64, x: &Self);
    fn hs_scale(&mut self, a: f64);

    fn hs_len(&self) -> f64 {
        self.hs_dot(self).re.max(0.0).sqrt()
    }
}

impl HilbertSchmidt for CMat {
    fn hs_dot(&self, other: &Self) -> C64 {
        hs_inner(self, other)
    }
    fn hs_axpy(&mut self, a: C64, x: &Self) {
        self.zip_apply(x, |s, xv| *s += a * xv);
    }
    fn hs_scale(&mut self, a: f64) {
        *self *= c(a, 0.0);
    }
}

/// Orthogonalizes `v` against the orthonormal `basis` (two passes of modified
/// Gram–Schmidt) and appends the normalized remainder if it is not negligible
/// relative to `v`. Returns whether the basis grew.
pub fn extend_orthonormal<T: HilbertSchmidt>(basis: &mut Vec<T>, mut v: T, rel_tol: f64) -> bool {
    let original = v.hs_len();
    if original == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let coeff = b.hs_dot(&v);
            v.hs_axpy(-coeff, b);
        }
    }
    let rest = v.hs_len();
    if rest <= rel_tol * original.max(1e-300) || rest < 1e-13 {
        return false;
    }
    v.hs_scale(1.0 / rest);
    basis.push(v);
    true
}

pub fn gram_schmidt<T: HilbertSchmidt>(vectors: impl IntoIterator<Item = T>, rel_tol: f64) -> Vec<T> {
    let mut basis = Vec::new();
    for v in vectors {
        extend_orthonormal(&mut basis, v, rel_tol);
    }
    basis
}

/// An orthonormal (normalized Hilbert–Schmidt) family of square matrices.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    dim_ambient: usize,
    elements: Vec<CMat>,
}

const ORTHO_DROP: f64 = 1e-10;

impl SpanBasis {
    pub fn empty(dim_ambient: usize) -> Self {
        Self {
            dim_ambient,
            elements: Vec::new(),
        }
    }

    /// Wraps elements already known to be orthonormal.
    pub(crate) fn from_orthonormal(dim_ambient: usize, elements: Vec<CMat>) -> Self {
        Self {
            dim_ambient,
            elements,
        }
    }

    /// The full matrix algebra `M_n`, spanned by rescaled matrix units.
    pub fn full_algebra(n: usize) -> Self {
        let s = (n as f64).sqrt();
        let mut elements = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut e = zeros(n);
                e[(i, j)] = c(s, 0.0);
                elements.push(e);
            }
        }
        Self {
            dim_ambient: n,
            elements,
        }
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn coefficients(&self, m: &CMat) -> Vec<C64> {
        self.elements.iter().map(|b| hs_inner(b, m)).collect()
    }

    pub fn project(&self, m: &CMat) -> CMat {
        let mut out = zeros(self.dim_ambient);
        for b in &self.elements {
            out.hs_axpy(hs_inner(b, m), b);
        }
        out
    }

    pub fn contains(&self, m: &CMat, tol: f64) -> bool {
        span_membership(m, self) < tol
    }

    /// Largest entry of `Gram - 1`.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b) - c(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_star_closed(&self, tol: f64) -> bool {
        self.elements
            .iter()
            .all(|b| span_membership(&b.adjoint(), self) < tol)
    }

    /// Orthonormal basis of the sum of both spans.
    pub fn union(&self, other: &SpanBasis) -> SpanBasis {
        let mut elements = self.elements.clone();
        for e in &other.elements {
            extend_orthonormal(&mut elements, e.clone(), ORTHO_DROP);
        }
        SpanBasis::from_orthonormal(self.dim_ambient, elements)
    }

    /// `dim(A ∩ B) = dim A + dim B - dim(A + B)`.
    pub fn intersection_dim(&self, other: &SpanBasis) -> usize {
        self.len() + other.len() - self.union(other).len()
    }

    /// Maximum mutual membership residual; zero iff both spans coincide.
    pub fn span_distance(&self, other: &SpanBasis) -> f64 {
        let a = self
            .elements
            .iter()
            .map(|e| span_membership(e, other))
            .fold(0.0, f64::max);
        let b = other
            .elements
            .iter()
            .map(|e| span_membership(e, self))
            .fold(0.0, f64::max);
        a.max(b)
    }

    /// Elements of the span that commute with every matrix in `with`.
    pub fn relative_commutant(&self, with: &[CMat]) -> SpanBasis {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let mut gram = CMat::zeros(n, n);
        for g in with {
            let comms: Vec<CMat> = self.elements.iter().map(|b| commutator(b, g)).collect();
            for i in 0..n {
                for j in i..n {
                    let v = hs_inner(&comms[i], &comms[j]);
                    gram[(i, j)] += v;
                    if i != j {
                        gram[(j, i)] += v.conj();
                    }
                }
            }
        }
        let (vals, vecs) = eigh_unchecked(&gram);
        let top = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        let mut out = Vec::new();
        for (k, v) in vals.iter().enumerate() {
            if *v < 1e-11 * top {
                let mut x = zeros(self.dim_ambient);
                for (i, b) in self.elements.iter().enumerate() {
                    x.hs_axpy(vecs[(i, k)], b);
                }
                extend_orthonormal(&mut out, x, ORTHO_DROP);
            }
        }
        SpanBasis::from_orthonormal(self.dim_ambient, out)
    }

    /// Dimension of the center of the span, assumed to be a *-algebra.
    pub fn center_dim(&self) -> usize {
        let probes = random_hermitian_elements(self, 2, INTERNAL_SEED ^ 0xce);
        self.relative_commutant(&probes).len()
    }
}

/// Gram–Schmidt orthonormalization of operators under the normalized
/// Hilbert–Schmidt product; linearly dependent inputs are dropped.
pub fn orthonormalize(vectors: &[CMat]) -> SpanBasis {
    let dim = vectors.first().map(|v| v.nrows()).unwrap_or(0);
    SpanBasis::from_orthonormal(dim, gram_schmidt(vectors.iter().cloned(), ORTHO_DROP))
}

/// `‖M − proj_span(M)‖_HS`.
pub fn span_membership(m: &CMat, basis: &SpanBasis) -> f64 {
    hs_norm(&(m - basis.project(m)))
}

/// Hermitian real-linear generators of a *-closed span (trace parts removed).
pub(crate) fn hermitian_generators(basis: &SpanBasis) -> Vec<CMat> {
    let mut out = Vec::new();
    for b in basis.elements() {
        let n = b.nrows();
        for h in [(b + b.adjoint()) * c(0.5, 0.0), (b - b.adjoint()) * c(0.0, -0.5)] {
            let tr = ntrace(&h);
            let traceless = h - identity(n) * tr;
            if frob(&traceless) > 1e-12 {
                out.push(traceless);
            }
        }
    }
    out
}

fn random_hermitian_elements(basis: &SpanBasis, count: usize, seed: u64) -> Vec<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = hermitian_generators(basis);
    let n = basis.dim_ambient();
    (0..count)
        .map(|_| {
            let mut h = zeros(n);
            for g in &gens {
                h.hs_axpy(c(rng.random_range(-1.0..1.0), 0.0), g);
            }
            h
        })
        .collect()
}

/// Basis of the commutant `{X ∈ M_n : [X, b] = 0 ∀ b ∈ B}` of a *-closed
/// span.
///
/// The null space of the stacked maps `X ↦ Xb − bX` is computed inside the
/// commutant of one random Hermitian element `h` of the span, which is
/// block-diagonal in the eigenbasis of `h` and contains the answer. The Gram
/// matrix of the stacked maps on the matrix units of that block structure has
/// a closed form in the entries of each generator, so no `n² × n²` system is
/// formed.
pub fn commutant(basis: &SpanBasis, ambient_dim: usize) -> SpanBasis {
    let gens = hermitian_generators(basis);
    if gens.is_empty() {
        return SpanBasis::full_algebra(ambient_dim);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INTERNAL_SEED);
    let mut h = zeros(ambient_dim);
    for g in &gens {
        h.hs_axpy(c(rng.random_range(0.5..1.5), 0.0), g);
    }
    let (vals, w) = eigh_unchecked(&h);
    let clusters = eigen_clusters(&vals, 1e-8);
    let pairs: Vec<(usize, usize)> = clusters
        .iter()
        .flat_map(|cl| cl.iter().flat_map(move |&p| cl.iter().map(move |&q| (p, q))))
        .collect();
    let s = pairs.len();
    let wh = w.adjoint();
    let mut gram = CMat::zeros(s, s);
    for g in &gens {
        let gt = &wh * g * &w;
        let g2 = &gt * &gt;
        for (a, &(p, q)) in pairs.iter().enumerate() {
            for (b, &(r, t)) in pairs.iter().enumerate().skip(a) {
                // <[E_pq, g], [E_rt, g]> for Hermitian g (unnormalized trace)
                let mut v = -(gt[(p, r)] * gt[(t, q)]) * 2.0;
                if p == r {
                    v += g2[(t, q)];
                }
                if q == t {
                    v += g2[(p, r)];
                }
                gram[(a, b)] += v;
                if a != b {
                    gram[(b, a)] += v.conj();
                }
            }
        }
    }
    let (gvals, gvecs) = eigh_unchecked(&gram);
    let top = gvals.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    let norm = (ambient_dim as f64).sqrt();
    let mut out = Vec::new();
    for (k, v) in gvals.iter().enumerate() {
        if *v < 1e-10 * top {
            let mut y = zeros(ambient_dim);
            for (a, &(p, q)) in pairs.iter().enumerate() {
                y[(p, q)] += gvecs[(a, k)] * norm;
            }
            extend_orthonormal(&mut out, &w * y * &wh, ORTHO_DROP);
        }
    }
    SpanBasis::from_orthonormal(ambient_dim, out)
}

/// Unitary equivalence of a simple algebra with `M_d ⊗ 1_μ`.
#[derive(Clone, Debug)]
pub struct SimpleDecomposition {
    pub d: usize,
    pub mu: usize,
    /// Columns ordered `i·μ + j`, `i < d`, `j < μ`.
    pub w: CMat,
}

impl SimpleDecomposition {
    /// `Y ↦ W (Y ⊗ 1_μ) W*`.
    pub fn lift(&self, y: &CMat) -> CMat {
        &self.w * kron(y, &identity(self.mu)) * self.w.adjoint()
    }

    /// Inverse of [`lift`](Self::lift) on the algebra: the `d × d` block
    /// obtained by averaging over the multiplicity index.
    pub fn compress(&self, x: &CMat) -> CMat {
        let xt = self.w.adjoint() * x * &self.w;
        partial_trace_right(&xt, self.d, self.mu) * c(1.0 / self.mu as f64, 0.0)
    }
}

/// `Tr_2` of an operator on `C^a ⊗ C^b`.
pub fn partial_trace_right(x: &CMat, a: usize, b: usize) -> CMat {
    let mut out = zeros(a);
    for i in 0..a {
        for k in 0..a {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..b {
                s += x[(i * b + j, k * b + j)];
            }
            out[(i, k)] = s;
        }
    }
    out
}

/// Block decomposition of a simple unital *-algebra: finds `W` such that
/// `W* B W = M_d ⊗ 1_μ`.
///
/// The center is checked first (`NotSimple` if nontrivial). A random Hermitian
/// element of the algebra splits the space into `d` eigenspaces of dimension
/// `μ`; a random algebra element compressed between the first and the `i`-th
/// eigenspace supplies the intertwiner that aligns the multiplicity bases.
pub fn decompose_simple(basis: &SpanBasis) -> Result<SimpleDecomposition> {
    let n = basis.dim_ambient();
    let lin_dim = basis.len();
    let center_dim = basis.center_dim();
    let d = (lin_dim as f64).sqrt().round() as usize;
    if center_dim != 1 || d * d != lin_dim || d == 0 || n % d != 0 {
        return Err(Error::NotSimple {
            center_dim,
            lin_dim,
        });
    }
    let mu = n / d;
    if d == 1 {
        return Ok(SimpleDecomposition {
            d,
            mu,
            w: identity(n),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INTERNAL_SEED ^ 0xd5);
    let gens = hermitian_generators(basis);
    for _ in 0..DECOMPOSE_RETRIES {
        let mut h = zeros(n);
        for g in &gens {
            h.hs_axpy(c(rng.random_range(-1.0..1.0), 0.0), g);
        }
        let (vals, eigvecs) = eigh_unchecked(&h);
        let clusters = eigen_clusters(&vals, 1e-7);
        if clusters.len() != d || clusters.iter().any(|cl| cl.len() != mu) {
            continue;
        }
        let mut g = zeros(n);
        for b in basis.elements() {
            g.hs_axpy(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), b);
        }
        let block = |cl: &[usize]| {
            let mut f = CMat::zeros(n, cl.len());
            for (j, &k) in cl.iter().enumerate() {
                f.set_column(j, &eigvecs.column(k));
            }
            f
        };
        let first = block(&clusters[0]);
        let mut w = zeros(n);
        let mut ok = true;
        for (i, cl) in clusters.iter().enumerate() {
            let cols = if i == 0 {
                first.clone()
            } else {
                let fi = block(cl);
                let m = &fi * (fi.adjoint() * &g * &first);
                let norms: Vec<f64> = (0..mu).map(|j| m.column(j).norm()).collect();
                let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = norms.iter().cloned().fold(0.0, f64::max);
                if lo < 1e-6 || (hi - lo) > 1e-8 * hi {
                    ok = false;
                    break;
                }
                m * c(1.0 / norms[0], 0.0)
            };
            for j in 0..mu {
                w.set_column(i * mu + j, &cols.column(j));
            }
        }
        if !ok {
            continue;
        }
        let dec = SimpleDecomposition { d, mu, w };
        if unitary_deviation(&dec.w) > 1e-8 {
            continue;
        }
        let worst = basis
            .elements()
            .iter()
            .map(|b| hs_norm(&(dec.lift(&dec.compress(b)) - b)))
            .fold(0.0, f64::max);
        if worst < 1e-8 {
            return Ok(dec);
        }
    }
    Err(Error::DecompositionFailed(format!(
        "no separating element found after {DECOMPOSE_RETRIES} draws"
    )))
}
