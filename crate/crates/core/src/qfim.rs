//! Quantum and classical Fisher information, symmetric logarithmic
//! derivatives and weighted Cramér–Rao bounds.
//!
//! All quantum quantities are evaluated for the evolved probe state
//! `ρ(φ) = U(φ) ρ(0) U(φ)†`, whose parameter derivative is
//! `∂_j ρ = -i [G_j, ρ]` for the generators of [`crate::generator`].

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::generator::{channel_unitary, GeneratorSet, ParamHamiltonianFamily};
use crate::spectral::{commutator, decompose, HermitianOperator, DEFAULT_CLUSTER_TOL};
use crate::{max_norm_real, CMatrix, CVector, Complex64, RMatrix};

/// Weights at or below this are treated as outside the support of `ρ`.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;
/// Default step of [`qfi_fidelity_oracle`].
pub const DEFAULT_FIDELITY_STEP: f64 = 1e-4;

const NORMALIZATION_TOL: f64 = 1e-12;

/// A probe state, either a unit vector or a spectral decomposition.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(CVector),
    Mixed { weights: Vec<f64>, eigenvectors: CMatrix },
}

impl QuantumState {
    pub fn pure(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidInput(format!("pure state must have unit norm, got {norm}")));
        }
        Ok(Self::Pure(amplitudes))
    }

    /// Builds a mixed state from weights and orthonormal eigenvector columns.
    /// The columns may cover only part of the space.
    pub fn mixed(weights: Vec<f64>, eigenvectors: CMatrix) -> Result<Self> {
        if weights.len() != eigenvectors.ncols() || weights.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: eigenvectors.ncols(),
                found: weights.len(),
            });
        }
        if let Some(p) = weights.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative or non-finite weight {p}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidInput(format!("weights must sum to 1, got {total}")));
        }
        let gram = eigenvectors.adjoint() * &eigenvectors - CMatrix::identity(weights.len(), weights.len());
        if crate::max_norm(&gram) > 1e-10 {
            return Err(Error::InvalidInput("eigenvectors are not orthonormal".into()));
        }
        Ok(Self::Mixed { weights, eigenvectors })
    }

    /// Spectral decomposition of a density matrix.
    pub fn from_density(rho: &HermitianOperator) -> Result<Self> {
        let d = decompose(rho, DEFAULT_CLUSTER_TOL)?;
        let weights: Vec<f64> = d.eigenvalues().iter().map(|p| if p.abs() < 1e-15 { 0.0 } else { *p }).collect();
        if let Some(p) = weights.iter().find(|p| **p < -1e-12) {
            return Err(Error::InvalidInput(format!("density matrix has negative eigenvalue {p}")));
        }
        let weights: Vec<f64> = weights.into_iter().map(|p| p.max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("density matrix trace is {total}")));
        }
        let weights = weights.into_iter().map(|p| p / total).collect();
        Self::mixed(weights, d.eigenvectors().clone())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Mixed { eigenvectors, .. } => eigenvectors.nrows(),
        }
    }

    /// `(weights, eigenvector columns)`; a pure state has one unit weight.
    pub fn spectrum(&self) -> (Vec<f64>, CMatrix) {
        match self {
            Self::Pure(v) => (vec![1.0], CMatrix::from_column_slice(v.len(), 1, v.as_slice())),
            Self::Mixed { weights, eigenvectors } => (weights.clone(), eigenvectors.clone()),
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        let (w, v) = self.spectrum();
        let mut scaled = v.clone();
        for (j, p) in w.iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= *p);
        }
        scaled * v.adjoint()
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(match self {
            Self::Pure(v) => Self::Pure(u * v),
            Self::Mixed { weights, eigenvectors } => Self::Mixed {
                weights: weights.clone(),
                eigenvectors: u * eigenvectors,
            },
        })
    }

    /// Columns `√p_k |k⟩` over the support, so that `ρ = A A†`.
    fn support_factor(&self, support_tol: f64) -> CMatrix {
        let (w, v) = self.spectrum();
        let cols: Vec<CVector> = w
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > support_tol)
            .map(|(j, p)| v.column(j).map(|z| z * p.sqrt()))
            .collect();
        CMatrix::from_columns(&cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoKind {
    Quantum,
    Classical,
}

/// A real symmetric positive semidefinite information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    pub entries: RMatrix,
    pub kind: InfoKind,
}

impl InfoMatrix {
    /// Symmetrizes `entries` after checking symmetry to 1e-10 and a minimum
    /// eigenvalue above `-1e-10` (both relative to `max(1, max|entry|)`).
    pub fn new(entries: RMatrix, kind: InfoKind) -> Result<Self> {
        let info = Self::symmetric(entries, kind)?;
        let scale = max_norm_real(&info.entries).max(1.0);
        let min = info.min_eigenvalue();
        if !(min > -1e-10 * scale) {
            return Err(Error::InvalidInput(format!(
                "information matrix not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(info)
    }

    /// Like [`Self::new`] without the semidefiniteness check, for
    /// finite-difference estimates whose null directions may come out
    /// slightly negative.
    pub fn symmetric(entries: RMatrix, kind: InfoKind) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let scale = max_norm_real(&entries).max(1.0);
        let asym = max_norm_real(&(&entries - entries.transpose()));
        if !(asym <= 1e-10 * scale) {
            return Err(Error::InvalidInput(format!("information matrix not symmetric (asymmetry {asym:.3e})")));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self { entries: sym, kind })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[(m, n)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

/// A symmetric positive-definite cost (weight) matrix `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: RMatrix,
}

impl CostMatrix {
    pub fn new(entries: RMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let asym = max_norm_real(&(&entries - entries.transpose()));
        if !(asym <= 1e-12) {
            return Err(Error::InvalidInput(format!("cost matrix not symmetric (asymmetry {asym:.3e})")));
        }
        let min = entries.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::InvalidInput(format!("cost matrix not positive definite (min eigenvalue {min:.3e})")));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: RMatrix::identity(dim, dim),
        }
    }

    pub fn entries(&self) -> &RMatrix {
        &self.entries
    }
}

fn check_dims(state_dim: usize, gens: &GeneratorSet) -> Result<()> {
    if gens.dim() != state_dim {
        return Err(Error::DimensionMismatch {
            expected: state_dim,
            found: gens.dim(),
        });
    }
    Ok(())
}

/// Pure-state QFIM, `4 Re(⟨G_m G_n⟩ - ⟨G_m⟩⟨G_n⟩)`.
pub fn qfim_pure(psi: &CVector, gens: &GeneratorSet) -> Result<InfoMatrix> {
    check_dims(psi.len(), gens)?;
    let applied: Vec<CVector> = gens.generators.iter().map(|g| g.matrix() * psi).collect();
    let means: Vec<f64> = applied.iter().map(|gpsi| psi.dotc(gpsi).re).collect();
    let d = gens.len();
    let mut entries = RMatrix::zeros(d, d);
    for m in 0..d {
        for n in m..d {
            // ⟨ψ|G_m G_n|ψ⟩ = (G_m ψ)† (G_n ψ)
            let second = applied[m].dotc(&applied[n]).re;
            let v = 4.0 * (second - means[m] * means[n]);
            entries[(m, n)] = v;
            entries[(n, m)] = v;
        }
    }
    InfoMatrix::new(entries, InfoKind::Quantum)
}

/// Mixed-state QFIM over the support `{k : p_k > support_tol}`:
///
/// ```text
/// I_mn = Σ_k 4 p_k Cov_k(G_m, G_n)
///      - Σ_{k≠l} 8 p_k p_l/(p_k + p_l) Re(⟨k|G_m|l⟩⟨l|G_n|k⟩)
/// ```
pub fn qfim_mixed(state: &QuantumState, gens: &GeneratorSet, support_tol: f64) -> Result<InfoMatrix> {
    check_dims(state.dim(), gens)?;
    let (weights, vectors) = state.spectrum();
    let support: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > support_tol).collect();
    let basis = CMatrix::from_columns(&support.iter().map(|&k| vectors.column(k).clone_owned()).collect::<Vec<_>>());
    let p: Vec<f64> = support.iter().map(|&k| weights[k]).collect();

    // G_m|k⟩ for every support vector, and the support-block matrix elements
    let applied: Vec<CMatrix> = gens.generators.iter().map(|g| g.matrix() * &basis).collect();
    let blocks: Vec<CMatrix> = applied.iter().map(|ga| basis.adjoint() * ga).collect();

    let d = gens.len();
    let r = p.len();
    let mut entries = RMatrix::zeros(d, d);
    for m in 0..d {
        for n in m..d {
            let mut acc = 0.0;
            for k in 0..r {
                let sym = applied[m].column(k).dotc(&applied[n].column(k)).re;
                let cov = sym - blocks[m][(k, k)].re * blocks[n][(k, k)].re;
                acc += 4.0 * p[k] * cov;
            }
            for k in 0..r {
                for l in 0..r {
                    if k == l {
                        continue;
                    }
                    let w = 8.0 * p[k] * p[l] / (p[k] + p[l]);
                    acc -= w * (blocks[m][(k, l)] * blocks[n][(l, k)]).re;
                }
            }
            entries[(m, n)] = acc;
            entries[(n, m)] = acc;
        }
    }
    InfoMatrix::new(entries, InfoKind::Quantum)
}

/// QFIM of either state variant.
pub fn qfim(state: &QuantumState, gens: &GeneratorSet) -> Result<InfoMatrix> {
    match state {
        QuantumState::Pure(psi) => qfim_pure(psi, gens),
        QuantumState::Mixed { .. } => qfim_mixed(state, gens, DEFAULT_SUPPORT_TOL),
    }
}

/// `∂_j ρ = -i [G_j, ρ]`.
pub fn state_derivative(state: &QuantumState, generator: &HermitianOperator) -> CMatrix {
    let rho = state.density_matrix();
    commutator(generator.matrix(), &rho).map(|z| z * Complex64::new(0.0, -1.0))
}

/// Symmetric logarithmic derivative `L_j` solving `2 ∂_j ρ = {ρ, L_j}`.
///
/// In the eigenbasis of `ρ`, `[L]_kl = 2 [∂ρ]_kl / (p_k + p_l)`. Elements
/// between two vectors outside the support are set to zero. The
/// support/kernel block is formed with the complement projector, so no basis
/// of the kernel is needed.
pub fn sld(state: &QuantumState, gens: &GeneratorSet, j: usize, support_tol: f64) -> Result<HermitianOperator> {
    check_dims(state.dim(), gens)?;
    if j >= gens.len() {
        return Err(Error::IndexOutOfRange { index: j, len: gens.len() });
    }
    let dim = state.dim();
    let (weights, vectors) = state.spectrum();
    let support: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > support_tol).collect();
    let drho = state_derivative(state, gens.get(j));

    let cols: Vec<CVector> = support.iter().map(|&k| vectors.column(k).clone_owned()).collect();
    let basis = CMatrix::from_columns(&cols);
    let p: Vec<f64> = support.iter().map(|&k| weights[k]).collect();
    let complement = CMatrix::identity(dim, dim) - &basis * basis.adjoint();

    let block = basis.adjoint() * &drho * &basis;
    let mut scaled = block.clone();
    for k in 0..p.len() {
        for l in 0..p.len() {
            scaled[(k, l)] = block[(k, l)] * (2.0 / (p[k] + p[l]));
        }
    }
    let mut l = &basis * scaled * basis.adjoint();
    for (k, v) in cols.iter().enumerate() {
        // |k⟩⟨k| ∂ρ Q + Q ∂ρ |k⟩⟨k|, scaled by 2/p_k
        let outer = v * v.adjoint();
        let cross = &outer * &drho * &complement + &complement * &drho * &outer;
        l += cross.map(|z| z * (2.0 / p[k]));
    }
    Ok(HermitianOperator::hermitian_part(&l))
}

/// All SLDs of a generator set.
pub fn slds(state: &QuantumState, gens: &GeneratorSet, support_tol: f64) -> Result<Vec<HermitianOperator>> {
    (0..gens.len()).map(|j| sld(state, gens, j, support_tol)).collect()
}

/// `max |2∂_jρ - {ρ, L_j}|`.
pub fn sld_residual(state: &QuantumState, generator: &HermitianOperator, l: &HermitianOperator) -> f64 {
    let rho = state.density_matrix();
    let drho = state_derivative(state, generator);
    let anti = &rho * l.matrix() + l.matrix() * &rho;
    crate::max_norm(&(drho.map(|z| z * 2.0) - anti))
}

/// `[S]_jk = Im Tr(ρ [L_j, L_k])`; vanishing entries mean the multiparameter
/// bound is asymptotically attainable.
pub fn saturability(state: &QuantumState, slds: &[HermitianOperator]) -> Result<RMatrix> {
    let dim = state.dim();
    if let Some(l) = slds.iter().find(|l| l.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: l.dim(),
        });
    }
    let rho = state.density_matrix();
    let d = slds.len();
    let mut out = RMatrix::zeros(d, d);
    for j in 0..d {
        for k in (j + 1)..d {
            let c = commutator(slds[j].matrix(), slds[k].matrix());
            let v = (&rho * c).trace().im;
            out[(j, k)] = v;
            out[(k, j)] = -v;
        }
    }
    Ok(out)
}

/// QFIM through the SLDs, `Re Tr(ρ L_m L_n)`.
pub fn qfim_from_slds(state: &QuantumState, slds: &[HermitianOperator]) -> Result<InfoMatrix> {
    let rho = state.density_matrix();
    let d = slds.len();
    let mut entries = RMatrix::zeros(d, d);
    for m in 0..d {
        for n in 0..d {
            entries[(m, n)] = (&rho * slds[m].matrix() * slds[n].matrix()).trace().re;
        }
    }
    InfoMatrix::new(entries, InfoKind::Quantum)
}

/// Scalar quantum Cramér–Rao bound `Tr(R I⁻¹)/ν`.
///
/// The information matrix must be invertible with minimum eigenvalue above
/// `1e-12·Tr(I)/D`; otherwise the error carries the null direction.
pub fn qcrb_scalar(info: &InfoMatrix, cost: &CostMatrix, repetitions: u32) -> Result<f64> {
    if repetitions == 0 {
        return Err(Error::InvalidInput("number of repetitions must be positive".into()));
    }
    let d = info.dim();
    if cost.entries().nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: cost.entries().nrows(),
        });
    }
    let eig = SymmetricEigen::new(info.entries.clone());
    let (imin, min) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty matrix");
    let threshold = 1e-12 * info.trace() / d as f64;
    if !(min > threshold) || min <= 0.0 {
        let mut dir: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        // sign convention: largest component positive
        let lead = dir.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if lead < 0.0 {
            dir.iter_mut().for_each(|x| *x = -*x);
        }
        return Err(Error::SingularInformation {
            min_eigenvalue: min,
            null_direction: dir,
        });
    }
    let mut inv = RMatrix::zeros(d, d);
    for k in 0..d {
        let v = eig.eigenvectors.column(k);
        inv += (v * v.transpose()) / eig.eigenvalues[k];
    }
    Ok((cost.entries() * inv).trace() / repetitions as f64)
}

/// Classical Fisher information of a sampled distribution.
///
/// `prob[x]` is the density at each sample point, `dprob[m][x]` its derivative
/// in parameter `m`, and `cell` the measure of one sample cell (`Δx`, or
/// `ΔxΔy` for flattened 2-D grids, or 1 for discrete outcomes). Points with
/// density below 1e-12 are skipped.
pub fn cfim_numeric(prob: &[f64], dprob: &[Vec<f64>], cell: f64) -> Result<InfoMatrix> {
    if !(cell > 0.0) {
        return Err(Error::InvalidInput("cell measure must be positive".into()));
    }
    if let Some(row) = dprob.iter().find(|r| r.len() != prob.len()) {
        return Err(Error::DimensionMismatch {
            expected: prob.len(),
            found: row.len(),
        });
    }
    if let Some(p) = prob.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidInput(format!("negative or non-finite probability {p}")));
    }
    let total: f64 = prob.iter().sum::<f64>() * cell;
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("distribution integrates to {total}, expected 1")));
    }
    let d = dprob.len();
    let mut entries = RMatrix::zeros(d, d);
    for (x, &p) in prob.iter().enumerate() {
        if p < 1e-12 {
            continue;
        }
        for m in 0..d {
            for n in m..d {
                entries[(m, n)] += cell * dprob[m][x] * dprob[n][x] / p;
            }
        }
    }
    for m in 0..d {
        for n in 0..m {
            entries[(m, n)] = entries[(n, m)];
        }
    }
    InfoMatrix::new(entries, InfoKind::Classical)
}

/// Uhlmann fidelity `‖A†B‖₁` for factorizations `ρ = AA†`, `σ = BB†`.
fn fidelity_from_factors(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = a.adjoint() * b;
    let gram = &overlap * overlap.adjoint();
    let eig = SymmetricEigen::new(HermitianOperator::hermitian_part(&gram).into_matrix());
    eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum()
}

/// Fidelity of two states of equal dimension.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> f64 {
    fidelity_from_factors(&a.support_factor(DEFAULT_SUPPORT_TOL), &b.support_factor(DEFAULT_SUPPORT_TOL))
}

/// Independent QFIM estimate from the Bures fidelity of the channel outputs.
///
/// The directional information along `v` is `8(1 - F(ρ(φ - δv/2), ρ(φ + δv/2)))/δ²`;
/// diagonal entries use `v = e_m`, off-diagonal entries four-point
/// polarization over `e_m ± e_n`. Accurate to `O(δ²)`, so the result is only
/// checked for symmetry. `initial` is the probe before the channel.
pub fn qfi_fidelity_oracle<F: ParamHamiltonianFamily + ?Sized>(
    family: &F,
    initial: &QuantumState,
    phi: &[f64],
    delta: f64,
) -> Result<InfoMatrix> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("fidelity step must be positive".into()));
    }
    if phi.len() != family.n_params() {
        return Err(Error::DimensionMismatch {
            expected: family.n_params(),
            found: phi.len(),
        });
    }
    let factor = initial.support_factor(DEFAULT_SUPPORT_TOL);
    let directional = |v: &DVector<f64>| -> Result<f64> {
        let lo: Vec<f64> = phi.iter().zip(v.iter()).map(|(p, x)| p - 0.5 * delta * x).collect();
        let hi: Vec<f64> = phi.iter().zip(v.iter()).map(|(p, x)| p + 0.5 * delta * x).collect();
        let a = channel_unitary(family, &lo)? * &factor;
        let b = channel_unitary(family, &hi)? * &factor;
        Ok(8.0 * (1.0 - fidelity_from_factors(&a, &b)) / (delta * delta))
    };
    let d = phi.len();
    let mut entries = RMatrix::zeros(d, d);
    for m in 0..d {
        let e = DVector::from_fn(d, |i, _| if i == m { 1.0 } else { 0.0 });
        entries[(m, m)] = directional(&e)?;
    }
    for m in 0..d {
        for n in (m + 1)..d {
            let plus = DVector::from_fn(d, |i, _| if i == m || i == n { 1.0 } else { 0.0 });
            let minus = DVector::from_fn(d, |i, _| if i == m { 1.0 } else if i == n { -1.0 } else { 0.0 });
            let v = (directional(&plus)? - directional(&minus)?) / 4.0;
            entries[(m, n)] = v;
            entries[(n, m)] = v;
        }
    }
    InfoMatrix::symmetric(entries, InfoKind::Quantum)
}
