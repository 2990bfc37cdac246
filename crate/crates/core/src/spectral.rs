//! Dense Hermitian linear algebra.
//!
//! [`decompose`] diagonalizes a [`HermitianOperator`], sorts the spectrum in
//! ascending order and groups numerically coincident eigenvalues into
//! degeneracy clusters. Every downstream computation that divides by an
//! eigenvalue gap goes through these clusters.

use std::ops::Range;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::{max_norm, CMatrix, Complex64};

/// Absolute asymmetry accepted by [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative clustering tolerance for [`decompose`].
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// A dense complex square matrix that equals its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Validates `entries` and stores its exact Hermitian part.
    ///
    /// Fails if the matrix is not square, is empty, or if any
    /// `|a_ij - conj(a_ji)|` exceeds [`HERMITIAN_TOL`].
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let asymmetry = max_asymmetry(&entries);
        if !(asymmetry <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::hermitian_part(&entries))
    }

    /// `(A + A†) / 2` without any tolerance check.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        let entries = (m + m.adjoint()).scale(0.5);
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self {
            entries: CMatrix::from_diagonal(&diag),
        }
    }

    /// Builds an operator from real-valued rows, e.g. Pauli-type test matrices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i].get(j).copied().unwrap_or(f64::NAN), 0.0));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * factor),
        }
    }
}

/// Largest `|a_ij - conj(a_ji)|` over all index pairs.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// Anti-Hermitian residual `max |(A - A†)/2|`.
pub fn anti_hermitian_residual(m: &CMatrix) -> f64 {
    max_norm(&(m - m.adjoint())) * 0.5
}

/// Eigendecomposition of a Hermitian operator with degeneracy clusters.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    clusters: Vec<Range<usize>>,
    cluster_of: Vec<usize>,
}

impl SpectralDecomposition {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Degeneracy clusters as contiguous index ranges into the eigenvalues.
    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    /// Cluster index of eigenvalue `i`.
    pub fn cluster_of(&self, i: usize) -> usize {
        self.cluster_of[i]
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Mean eigenvalue of a cluster, i.e. the `E_k` shared by its members.
    pub fn cluster_value(&self, k: usize) -> f64 {
        let r = &self.clusters[k];
        self.eigenvalues[r.clone()].iter().sum::<f64>() / r.len() as f64
    }

    /// Projector onto the eigenspace of cluster `k`.
    pub fn projector(&self, k: usize) -> Result<HermitianOperator> {
        let range = self.clusters.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.clusters.len(),
        })?;
        let cols = self.eigenvectors.columns(range.start, range.len());
        let p = cols * cols.adjoint();
        Ok(HermitianOperator::hermitian_part(&p))
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_function<F>(&self, f: F) -> CMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// `exp(-i t H)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        self.apply_function(|lambda| Complex64::from_polar(1.0, -t * lambda))
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|lambda| Complex64::new(lambda, 0.0))
    }

    /// Matrix elements `V† A V` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// Inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }

    /// `max(1, λ_max - λ_min)`, the scale for clustering thresholds.
    pub fn range_scale(&self) -> f64 {
        spectral_range(&self.eigenvalues).max(1.0)
    }
}

fn spectral_range(sorted: &[f64]) -> f64 {
    match (sorted.first(), sorted.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    }
}

/// Diagonalizes `h` and clusters its spectrum.
///
/// Adjacent ascending eigenvalues belong to the same cluster when their gap
/// is below `cluster_tol * max(1, spectral range)`; clusters are maximal runs
/// of such gaps.
pub fn decompose(h: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cluster tolerance must be positive, got {cluster_tol}"
        )));
    }
    let dim = h.dim();
    let asymmetry = max_asymmetry(h.matrix());
    if !(asymmetry <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence { dim });
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let threshold = cluster_tol * spectral_range(&eigenvalues).max(1.0);
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..dim {
        if eigenvalues[i] - eigenvalues[i - 1] >= threshold {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters.push(start..dim);

    let mut cluster_of = vec![0; dim];
    for (k, r) in clusters.iter().enumerate() {
        for i in r.clone() {
            cluster_of[i] = k;
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        clusters,
        cluster_of,
    })
}

/// Projector onto the eigenspace of cluster `cluster_index`.
pub fn projector(decomp: &SpectralDecomposition, cluster_index: usize) -> Result<HermitianOperator> {
    decomp.projector(cluster_index)
}

/// Commutator `[a, b]`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        HermitianOperator::hermitian_part(&a)
    }

    #[test]
    fn diagonal_with_degeneracy() {
        let h = HermitianOperator::from_diagonal(&[2.0, 5.0, 2.0]);
        let d = decompose(&h, 1e-9).unwrap();
        assert_eq!(d.eigenvalues(), &[2.0, 2.0, 5.0]);
        assert_eq!(d.clusters(), &[0..2, 2..3]);
    }

    #[test]
    fn zero_operator_is_one_cluster() {
        let d = decompose(&HermitianOperator::zeros(3), 1e-9).unwrap();
        assert_eq!(d.eigenvalues(), &[0.0, 0.0, 0.0]);
        assert_eq!(d.clusters().len(), 1);
        assert_eq!(d.clusters()[0], 0..3);
    }

    #[test]
    fn projectors_of_diagonal() {
        let h = HermitianOperator::from_diagonal(&[2.0, 2.0, 5.0]);
        let d = decompose(&h, 1e-9).unwrap();
        let p0 = d.projector(0).unwrap();
        let p1 = d.projector(1).unwrap();
        let e0 = HermitianOperator::from_diagonal(&[1.0, 1.0, 0.0]);
        let e1 = HermitianOperator::from_diagonal(&[0.0, 0.0, 1.0]);
        assert!(max_norm(&(p0.matrix() - e0.matrix())) < 1e-14);
        assert!(max_norm(&(p1.matrix() - e1.matrix())) < 1e-14);
        assert!(matches!(d.projector(2), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let h = random_hermitian(6, 11);
        let d = decompose(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let v = d.eigenvectors();
        let gram = v.adjoint() * v - CMatrix::identity(6, 6);
        assert!(max_norm(&gram) < 1e-10);
        let scale = d.range_scale();
        assert!(max_norm(&(d.reconstruct() - h.matrix())) < 1e-10 * scale);
        assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn random_projectors_idempotent_and_resolve_identity() {
        let h = random_hermitian(4, 3);
        let d = decompose(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let mut sum = CMatrix::zeros(4, 4);
        for k in 0..d.clusters().len() {
            let p = d.projector(k).unwrap();
            let p = p.matrix();
            assert!(max_norm(&(p * p - p)) < 1e-10);
            let trace: Complex64 = p.trace();
            assert!((trace.re - d.clusters()[k].len() as f64).abs() < 1e-10);
            for l in 0..d.clusters().len() {
                if l != k {
                    let q = d.projector(l).unwrap();
                    assert!(max_norm(&(p * q.matrix())) < 1e-10);
                }
            }
            sum += p;
        }
        assert!(max_norm(&(sum - CMatrix::identity(4, 4))) < 1e-10);
    }

    #[test]
    fn transitive_chaining() {
        // gaps of 0.6e-9 chain 1, 1+0.6e-9, 1+1.2e-9 into one cluster although
        // the outer pair differs by more than the threshold
        let h = HermitianOperator::from_diagonal(&[1.0, 1.0 + 0.6e-9, 1.0 + 1.2e-9, 3.0]);
        let d = decompose(&h, 1e-9 / 2.0).unwrap();
        assert_eq!(d.clusters(), &[0..3, 3..4]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { asymmetry }) => assert!((asymmetry - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            HermitianOperator::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let h = random_hermitian(5, 99);
        let a = decompose(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let b = decompose(&h, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.eigenvectors(), b.eigenvectors());
    }
}
