//! Dense complex Hermitian matrix kernel.
//!
//! Everything downstream (divergences, Choi calculus, the exclusion solver)
//! is built on the operations here: a deterministic cyclic-Jacobi
//! eigendecomposition, functional calculus restricted to the support,
//! Schatten norms, and tensor/partial-trace algebra.
//!
//! Matrices are stored dense; the intended scale is small (dimension a few
//! dozen after tensor powers), where Jacobi sweeps are both fast enough and
//! bit-reproducible for a fixed input.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::consts::{DEFAULT_SUPPORT_TOL, HERMITICITY_TOL};

/// Dense complex matrix.
pub type CMatrix = Array2<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Errors from the matrix kernel.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: |A[{i}][{j}] - conj(A[{j}][{i}])| = {deviation:.3e}")]
    NotHermitian { i: usize, j: usize, deviation: f64 },

    #[error("negative eigenvalue {value:.3e} below -{tol:.3e} where PSD input required")]
    NegativeEigenvalue { value: f64, tol: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

/// Finite real value or positive infinity.
///
/// Divergences take values in `[0, +inf]`; the infinite branch encodes a
/// violated support condition and must propagate through max/sup
/// compositions, so it is a first-class value rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    /// Wraps a finite value. Panics on NaN (an upstream bug, never a valid
    /// divergence value) and maps `f64::INFINITY` to the infinite branch.
    pub fn finite(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN is not a valid ExtendedReal");
        if v.is_infinite() && v > 0.0 {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    /// Finite value, if any.
    pub fn value(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Collapses to `f64`, mapping the infinite branch to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
                ExtendedReal::Finite(a.max(b))
            }
            _ => ExtendedReal::Infinite,
        }
    }
}

impl std::ops::Add<f64> for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::finite(v + rhs),
            ExtendedReal::Infinite => ExtendedReal::Infinite,
        }
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

/// Square complex matrix with a Hermiticity certificate.
///
/// Construction symmetrizes the entries, so the stored matrix satisfies
/// `A = A^dagger` exactly; the checked constructor rejects inputs that are
/// not Hermitian to within [`HERMITICITY_TOL`] in the first place.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
}

impl HermitianOperator {
    /// Checked constructor: rejects non-square or non-Hermitian input,
    /// then symmetrizes.
    pub fn new(entries: CMatrix) -> Result<Self, LinalgError> {
        let (rows, cols) = (entries.nrows(), entries.ncols());
        if rows != cols || rows == 0 {
            return Err(LinalgError::NotSquare { rows, cols });
        }
        let scale = entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        for i in 0..rows {
            for j in i..cols {
                let dev = (entries[[i, j]] - entries[[j, i]].conj()).norm();
                if dev > HERMITICITY_TOL * scale {
                    return Err(LinalgError::NotHermitian { i, j, deviation: dev });
                }
            }
        }
        Ok(Self::symmetrize(entries))
    }

    /// Enforces Hermiticity by averaging with the adjoint.
    ///
    /// For internal use on results that are Hermitian in exact arithmetic
    /// (functional calculus, sums of conjugations) and only carry rounding
    /// noise in the anti-Hermitian part.
    pub fn symmetrize(entries: CMatrix) -> Self {
        let dim = entries.nrows();
        assert_eq!(dim, entries.ncols(), "symmetrize requires a square matrix");
        let mut m = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (m[[i, j]] + m[[j, i]].conj());
                m[[i, j]] = avg;
                m[[j, i]] = avg.conj();
            }
            m[[i, i]] = Complex64::new(m[[i, i]].re, 0.0);
        }
        Self { dim, entries: m }
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::eye(dim),
        }
    }

    /// Zero operator.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::zeros((dim, dim)),
        }
    }

    /// Real diagonal matrix.
    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = CMatrix::zeros((dim, dim));
        for (i, &v) in diag.iter().enumerate() {
            m[[i, i]] = Complex64::new(v, 0.0);
        }
        Self { dim, entries: m }
    }

    /// Rank-one projector `|v><v| / <v|v>`.
    pub fn projector_onto(v: &[Complex64]) -> Self {
        let dim = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut m = CMatrix::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] = v[i] * v[j].conj() / norm2;
            }
        }
        Self::symmetrize(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Trace (real by Hermiticity).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[[i, i]].re).sum()
    }

    /// Entrywise linear combination `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Self {
        Self::symmetrize(&self.entries + &(&other.entries * Complex64::new(c, 0.0)))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: &self.entries * Complex64::new(c, 0.0),
        }
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Eigenvalues ascend; eigenvectors are the matching columns of a unitary.
/// Within a degenerate cluster the basis is unspecified, so callers must
/// only use basis-invariant functions of the decomposition.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Eigensystem {
    /// Rebuilds `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut m = CMatrix::zeros((d, d));
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = v[[i, k]] * flam;
                for j in 0..d {
                    m[[i, j]] += vik * v[[j, k]].conj();
                }
            }
        }
        HermitianOperator::symmetrize(m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }
}

/// Hermitian eigendecomposition by fixed-order cyclic Jacobi sweeps.
///
/// The sweep order, rotation formulas, and final ascending sort are all
/// deterministic, so repeated calls on the same input give bit-identical
/// output.
pub fn eig_hermitian(a: &HermitianOperator) -> Eigensystem {
    let d = a.dim();
    let mut m = a.entries.clone();
    let mut v = CMatrix::eye(d);

    if d == 1 {
        return Eigensystem {
            eigenvalues: vec![m[[0, 0]].re],
            eigenvectors: v,
        };
    }

    let base: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let stop = 1e-15 * base.max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 64;

    for _ in 0..MAX_SWEEPS {
        let mut off2 = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off2 += 2.0 * m[[p, q]].norm_sqr();
            }
        }
        if off2.sqrt() <= stop {
            break;
        }
        for p in 0..(d - 1) {
            for q in (p + 1)..d {
                let apq = m[[p, q]];
                let beta = apq.norm();
                if beta <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / beta; // e^{i phi}
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary on the (p,q) plane: first absorb the phase of
                // a_pq into column q, then the real rotation.
                //   U[p,p] = c           U[p,q] = s
                //   U[q,p] = -s*conj(u)  U[q,q] = c*conj(u)
                let cu = phase.conj();
                // Column update: M <- M U, V <- V U.
                for k in 0..d {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp * c - mkq * (cu * s);
                    m[[k, q]] = mkp * s + mkq * (cu * c);
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * c - vkq * (cu * s);
                    v[[k, q]] = vkp * s + vkq * (cu * c);
                }
                // Row update: M <- U^dagger M.
                let u = phase;
                for k in 0..d {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = mpk * c - mqk * (u * s);
                    m[[q, k]] = mpk * s + mqk * (u * c);
                }
                // Clean rounding residue on the eliminated pair.
                m[[p, q]] = C_ZERO;
                m[[q, p]] = C_ZERO;
                m[[p, p]] = Complex64::new(m[[p, p]].re, 0.0);
                m[[q, q]] = Complex64::new(m[[q, q]].re, 0.0);
            }
        }
    }

    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| {
        m[[i, i]]
            .re
            .partial_cmp(&m[[j, j]].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let eigenvalues: Vec<f64> = idx.iter().map(|&i| m[[i, i]].re).collect();
    let mut vectors = CMatrix::zeros((d, d));
    for (new_col, &old_col) in idx.iter().enumerate() {
        for row in 0..d {
            vectors[[row, new_col]] = v[[row, old_col]];
        }
    }
    Eigensystem {
        eigenvalues,
        eigenvectors: vectors,
    }
}

/// Applies `f` to the spectrum restricted to the support.
///
/// Eigenvalues are compared against a relative cutoff
/// `support_tol * max|lambda|`; those above it map through `f`, those in
/// `[-cutoff, cutoff]` map to zero, and anything below `-cutoff` is a
/// genuine negative eigenvalue where a PSD input was required.
pub fn func_on_support(
    a: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    support_tol: f64,
) -> Result<HermitianOperator, LinalgError> {
    let eig = eig_hermitian(a);
    let cut = support_tol * eig.spectral_radius();
    let min = eig.min_eigenvalue();
    if min < -cut {
        return Err(LinalgError::NegativeEigenvalue {
            value: min,
            tol: cut,
        });
    }
    Ok(eig.reconstruct_with(|lam| if lam > cut { f(lam) } else { 0.0 }))
}

/// Projector onto the span of eigenvectors with `|lambda|` above the
/// relative cutoff.
pub fn support_projector(a: &HermitianOperator, support_tol: f64) -> HermitianOperator {
    let eig = eig_hermitian(a);
    let cut = support_tol * eig.spectral_radius();
    eig.reconstruct_with(|lam| if lam.abs() > cut { 1.0 } else { 0.0 })
}

/// Support-domination test `gamma^0 <= sigma^0`, i.e. the support of
/// `gamma` lies inside the support of `sigma` up to `tol`.
pub fn support_dominated(gamma: &HermitianOperator, sigma: &HermitianOperator, tol: f64) -> bool {
    let p_sigma = support_projector(sigma, DEFAULT_SUPPORT_TOL);
    let p_gamma = support_projector(gamma, DEFAULT_SUPPORT_TOL);
    let q = HermitianOperator::identity(sigma.dim()).add_scaled(&p_sigma, -1.0);
    let prod = q.matrix().dot(p_gamma.matrix()).dot(q.matrix());
    let leak = HermitianOperator::symmetrize(prod);
    schatten_norm(&leak, f64::INFINITY) <= tol
}

/// Schatten alpha-norm `(sum |lambda_i|^alpha)^(1/alpha)`; `alpha = inf`
/// gives the operator norm. Requires `alpha >= 1`.
pub fn schatten_norm(a: &HermitianOperator, alpha: f64) -> f64 {
    assert!(alpha >= 1.0, "Schatten norm requires alpha >= 1");
    let eig = eig_hermitian(a);
    if alpha.is_infinite() {
        return eig.spectral_radius();
    }
    if alpha == 1.0 {
        return eig.eigenvalues.iter().map(|l| l.abs()).sum();
    }
    // Factor out the largest magnitude to avoid overflow at large alpha.
    let top = eig.spectral_radius();
    if top == 0.0 {
        return 0.0;
    }
    let sum: f64 = eig
        .eigenvalues
        .iter()
        .map(|l| (l.abs() / top).powf(alpha))
        .sum();
    top * sum.powf(1.0 / alpha)
}

/// Kronecker product.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        dim: a.dim * b.dim,
        entries: kron_matrix(a.matrix(), b.matrix()),
    }
}

/// Kronecker product of raw complex matrices.
pub fn kron_matrix(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = CMatrix::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == C_ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Which tensor factor an operation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace over one factor of an operator on `A (x) B` with local
/// dimensions `dims = (d_a, d_b)`.
pub fn partial_trace(
    a: &HermitianOperator,
    traced: Subsystem,
    dims: (usize, usize),
) -> Result<HermitianOperator, LinalgError> {
    let (da, db) = dims;
    if da * db != a.dim() {
        return Err(LinalgError::DimensionMismatch {
            context: format!("partial_trace: {}x{} factors vs dim {}", da, db, a.dim()),
        });
    }
    let m = a.matrix();
    match traced {
        Subsystem::Second => {
            let mut out = CMatrix::zeros((da, da));
            for i in 0..da {
                for j in 0..da {
                    let mut acc = C_ZERO;
                    for b in 0..db {
                        acc += m[[i * db + b, j * db + b]];
                    }
                    out[[i, j]] = acc;
                }
            }
            Ok(HermitianOperator::symmetrize(out))
        }
        Subsystem::First => {
            let mut out = CMatrix::zeros((db, db));
            for x in 0..db {
                for y in 0..db {
                    let mut acc = C_ZERO;
                    for i in 0..da {
                        acc += m[[i * db + x, i * db + y]];
                    }
                    out[[x, y]] = acc;
                }
            }
            Ok(HermitianOperator::symmetrize(out))
        }
    }
}

/// Trace of a raw complex matrix.
pub fn trace_matrix(m: &CMatrix) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[[i, i]]).sum()
}

/// Conjugate transpose of a raw complex matrix.
pub fn dagger(m: &CMatrix) -> CMatrix {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = CMatrix::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[[j, i]] = m[[i, j]].conj();
        }
    }
    out
}

/// Real part of `Tr[A B]` for Hermitian `A`, `B`.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let ma = a.matrix();
    let mb = b.matrix();
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (ma[[i, j]] * mb[[j, i]]).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_hermitian, random_psd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn eig_diagonal_is_sorted() {
        let a = HermitianOperator::from_diag(&[2.0, 1.0]);
        let eig = eig_hermitian(&a);
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0]);
    }

    #[test]
    fn eig_pauli_x_spectrum() {
        let mut m = CMatrix::zeros((2, 2));
        m[[0, 1]] = C_ONE;
        m[[1, 0]] = C_ONE;
        let a = HermitianOperator::new(m).unwrap();
        let eig = eig_hermitian(&a);
        assert_close(eig.eigenvalues[0], -1.0, 1e-12);
        assert_close(eig.eigenvalues[1], 1.0, 1e-12);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = random_hermitian(&mut rng, 4);
        let eig = eig_hermitian(&a);
        let rebuilt = eig.reconstruct_with(|l| l);
        let mut max_dev = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                max_dev = max_dev.max((rebuilt.matrix()[[i, j]] - a.matrix()[[i, j]]).norm());
            }
        }
        let scale = a.matrix().iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        assert!(max_dev <= 1e-10 * scale, "residual {max_dev}");
        // Unitarity of the eigenvector matrix.
        let vtv = dagger(&eig.eigenvectors).dot(&eig.eigenvectors);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { C_ONE } else { C_ZERO };
                assert!((vtv[[i, j]] - expect).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn eig_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 5);
        let e1 = eig_hermitian(&a);
        let e2 = eig_hermitian(&a);
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
    }

    #[test]
    fn eig_matches_quadratic_roots_2x2() {
        // Closed-form characteristic-polynomial oracle for 2x2.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_hermitian(&mut rng, 2);
            let m = a.matrix();
            let tr = m[[0, 0]].re + m[[1, 1]].re;
            let det = (m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]]).re;
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            let lo = (tr - disc) / 2.0;
            let hi = (tr + disc) / 2.0;
            let eig = eig_hermitian(&a);
            assert_close(eig.eigenvalues[0], lo, 1e-10);
            assert_close(eig.eigenvalues[1], hi, 1e-10);
        }
    }

    #[test]
    fn func_ln_on_support() {
        let a = HermitianOperator::from_diag(&[1.0, std::f64::consts::E]);
        let out = func_on_support(&a, f64::ln, DEFAULT_SUPPORT_TOL).unwrap();
        assert_close(out.matrix()[[0, 0]].re, 0.0, 1e-12);
        assert_close(out.matrix()[[1, 1]].re, 1.0, 1e-12);
    }

    #[test]
    fn func_inverse_on_support() {
        let a = HermitianOperator::from_diag(&[2.0, 0.0]);
        let out = func_on_support(&a, |t| 1.0 / t, DEFAULT_SUPPORT_TOL).unwrap();
        assert_close(out.matrix()[[0, 0]].re, 0.5, 1e-12);
        assert_close(out.matrix()[[1, 1]].re, 0.0, 1e-12);
    }

    #[test]
    fn func_sqrt_squares_back() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = random_psd(&mut rng, 3);
        let root = func_on_support(&a, f64::sqrt, DEFAULT_SUPPORT_TOL).unwrap();
        let sq = HermitianOperator::symmetrize(root.matrix().dot(root.matrix()));
        for i in 0..3 {
            for j in 0..3 {
                assert!((sq.matrix()[[i, j]] - a.matrix()[[i, j]]).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn func_rejects_negative() {
        let a = HermitianOperator::from_diag(&[1.0, -0.5]);
        let err = func_on_support(&a, f64::ln, DEFAULT_SUPPORT_TOL).unwrap_err();
        assert!(matches!(err, LinalgError::NegativeEigenvalue { .. }));
    }

    #[test]
    fn ln_then_exp_restores_on_support() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = random_psd(&mut rng, 3);
            let ln_a = func_on_support(&a, f64::ln, DEFAULT_SUPPORT_TOL).unwrap();
            // exp restricted to the support of a
            let eig = eig_hermitian(&ln_a);
            let back = {
                let proj = support_projector(&a, DEFAULT_SUPPORT_TOL);
                let exp = eig.reconstruct_with(f64::exp);
                let m = proj.matrix().dot(exp.matrix()).dot(proj.matrix());
                HermitianOperator::symmetrize(m)
            };
            for i in 0..3 {
                for j in 0..3 {
                    assert!((back.matrix()[[i, j]] - a.matrix()[[i, j]]).norm() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn projector_examples() {
        let a = HermitianOperator::from_diag(&[1.0, 0.0]);
        let p = support_projector(&a, DEFAULT_SUPPORT_TOL);
        assert_close(p.matrix()[[0, 0]].re, 1.0, 1e-12);
        assert_close(p.matrix()[[1, 1]].re, 0.0, 1e-12);

        let z = HermitianOperator::zero(3);
        let pz = support_projector(&z, DEFAULT_SUPPORT_TOL);
        assert_close(schatten_norm(&pz, 1.0), 0.0, 1e-12);

        // |+><+| is idempotent.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = HermitianOperator::projector_onto(&[
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
        ]);
        let p2 = support_projector(&plus, DEFAULT_SUPPORT_TOL);
        let sq = HermitianOperator::symmetrize(p2.matrix().dot(p2.matrix()));
        for i in 0..2 {
            for j in 0..2 {
                assert!((sq.matrix()[[i, j]] - plus.matrix()[[i, j]]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn support_domination_cases() {
        let ket0 = HermitianOperator::from_diag(&[1.0, 0.0]);
        let ket1 = HermitianOperator::from_diag(&[0.0, 1.0]);
        let half = HermitianOperator::from_diag(&[0.5, 0.5]);
        assert!(support_dominated(&ket0, &half, 1e-10));
        assert!(!support_dominated(&ket0, &ket1, 1e-10));
        let a = HermitianOperator::from_diag(&[0.5, 0.5, 0.0]);
        let b = HermitianOperator::from_diag(&[0.3, 0.7, 0.0]);
        assert!(support_dominated(&a, &b, 1e-10));
    }

    #[test]
    fn schatten_examples() {
        let a = HermitianOperator::from_diag(&[3.0, -4.0]);
        assert_close(schatten_norm(&a, 1.0), 7.0, 1e-12);
        assert_close(schatten_norm(&a, 2.0), 5.0, 1e-12);
        assert_close(schatten_norm(&a, f64::INFINITY), 4.0, 1e-12);
    }

    #[test]
    fn schatten_monotone_in_alpha() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let alphas = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
        for _ in 0..100 {
            let a = random_hermitian(&mut rng, 3);
            let norms: Vec<f64> = alphas.iter().map(|&al| schatten_norm(&a, al)).collect();
            for w in norms.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "norms not nonincreasing: {norms:?}");
            }
        }
    }

    #[test]
    fn kron_and_partial_trace() {
        let i2 = HermitianOperator::identity(2);
        let i4 = kron(&i2, &i2);
        assert_eq!(i4.dim(), 4);
        assert_close(i4.trace(), 4.0, 1e-12);

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_psd(&mut rng, 2);
        let b = random_psd(&mut rng, 3);
        let ab = kron(&a, &b);
        let tr_b = partial_trace(&ab, Subsystem::Second, (2, 3)).unwrap();
        let expect = a.scale(b.trace());
        for i in 0..2 {
            for j in 0..2 {
                assert!((tr_b.matrix()[[i, j]] - expect.matrix()[[i, j]]).norm() <= 1e-12);
            }
        }

        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let x = random_hermitian(&mut rng, 6);
        let traced = partial_trace(&x, Subsystem::Second, (2, 3)).unwrap();
        assert_close(traced.trace(), x.trace(), 1e-12);
        let traced_a = partial_trace(&x, Subsystem::First, (2, 3)).unwrap();
        assert_close(traced_a.trace(), x.trace(), 1e-12);
    }

    #[test]
    fn partial_trace_dimension_guard() {
        let x = HermitianOperator::identity(6);
        assert!(partial_trace(&x, Subsystem::Second, (4, 2)).is_err());
    }

    #[test]
    fn extended_real_behaviour() {
        let f = ExtendedReal::finite(1.5);
        let inf = ExtendedReal::Infinite;
        assert!(f < inf);
        assert_eq!((f + 1.0).value(), Some(2.5));
        assert!((f + inf).is_infinite());
        assert_eq!(f.max(inf), ExtendedReal::Infinite);
        assert_eq!(ExtendedReal::finite(f64::INFINITY), ExtendedReal::Infinite);
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetry() {
        let mut m = CMatrix::zeros((2, 2));
        m[[0, 1]] = C_ONE;
        assert!(HermitianOperator::new(m).is_err());
    }
}
