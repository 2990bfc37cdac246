//! Local generators of parameter translations.
//!
//! For a channel `U(φ) = exp(-i H(φ))` the generator of translations in `φ_j`
//! is `G_j = i (∂_j U) U†`, equivalently
//!
//! ```text
//! G_j = ∫₀¹ exp(-i a H) ∂_j H exp(i a H) da.
//! ```
//!
//! [`generator_spectral`] evaluates the integral in closed form in the
//! eigenbasis of `H`: `(G_j)_ab = (∂_j H)_ab · g(-i (E_a - E_b))` with
//! `g(t) = (eᵗ - 1)/t`, `g(0) = 1` inside a degeneracy cluster. The other three
//! routes ([`generator_duhamel`], [`generator_bch`], [`generator_fd`]) exist to
//! cross-check it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;
use crate::spectral::{anti_hermitian_residual, commutator, decompose, HermitianOperator, SpectralDecomposition, DEFAULT_CLUSTER_TOL};
use crate::{max_norm, CMatrix, Complex64};

pub const DEFAULT_QUADRATURE_NODES: usize = 32;
pub const DEFAULT_BCH_TERM_TOL: f64 = 1e-12;
pub const DEFAULT_BCH_MAX_ORDER: usize = 40;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Base step of the finite-difference fallback for `∂_j H`.
pub const DERIVATIVE_FD_STEP: f64 = 1e-6;

/// A `D`-parameter family of Hamiltonians `φ ↦ H(φ)`.
///
/// Implementors supply `hamiltonian_at`; `derivative_at` falls back to a
/// central finite difference with a step-halving self-check.
pub trait ParamHamiltonianFamily: Sync {
    fn dim(&self) -> usize;

    fn n_params(&self) -> usize;

    fn hamiltonian_at(&self, phi: &[f64]) -> Result<HermitianOperator>;

    fn derivative_at(&self, phi: &[f64], j: usize) -> Result<HermitianOperator> {
        finite_difference_derivative(self, phi, j)
    }
}

/// Central finite difference of `H` in `φ_j` with step
/// `1e-6·max(1, |φ_j|)`, checked against the half step.
pub fn finite_difference_derivative<F: ParamHamiltonianFamily + ?Sized>(
    family: &F,
    phi: &[f64],
    j: usize,
) -> Result<HermitianOperator> {
    check_params(family, phi)?;
    if j >= family.n_params() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: family.n_params(),
        });
    }
    let h = DERIVATIVE_FD_STEP * phi[j].abs().max(1.0);
    let coarse = central_difference(family, phi, j, h)?;
    let fine = central_difference(family, phi, j, 0.5 * h)?;
    let disagreement = max_norm(&(&coarse - &fine));
    let scale = max_norm(&fine).max(1.0);
    if disagreement > 1e-5 * scale {
        return Err(Error::FiniteDifferenceUnstable { disagreement });
    }
    Ok(HermitianOperator::hermitian_part(&fine))
}

fn central_difference<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64], j: usize, h: f64) -> Result<CMatrix> {
    let mut plus = phi.to_vec();
    let mut minus = phi.to_vec();
    plus[j] += h;
    minus[j] -= h;
    let hp = family.hamiltonian_at(&plus)?;
    let hm = family.hamiltonian_at(&minus)?;
    Ok((hp.matrix() - hm.matrix()).unscale(2.0 * h))
}

fn check_params<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64]) -> Result<()> {
    if phi.len() != family.n_params() {
        return Err(Error::DimensionMismatch {
            expected: family.n_params(),
            found: phi.len(),
        });
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("parameter vector must be finite".into()));
    }
    Ok(())
}

/// `H(φ) = H₀ + Σ_j φ_j H_j`. With `H₀ = 0` this is the multiplicative
/// (Hamiltonian tomography) family whose generators are exactly the `H_j`.
#[derive(Debug, Clone)]
pub struct LinearFamily {
    offset: HermitianOperator,
    terms: Vec<HermitianOperator>,
}

impl LinearFamily {
    pub fn new(offset: Option<HermitianOperator>, terms: Vec<HermitianOperator>) -> Result<Self> {
        let dim = terms
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidInput("linear family needs at least one term".into()))?;
        for t in &terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
        }
        let offset = offset.unwrap_or_else(|| HermitianOperator::zeros(dim));
        if offset.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: offset.dim(),
            });
        }
        Ok(Self { offset, terms })
    }

    pub fn multiplicative(terms: Vec<HermitianOperator>) -> Result<Self> {
        Self::new(None, terms)
    }

    pub fn terms(&self) -> &[HermitianOperator] {
        &self.terms
    }
}

impl ParamHamiltonianFamily for LinearFamily {
    fn dim(&self) -> usize {
        self.offset.dim()
    }

    fn n_params(&self) -> usize {
        self.terms.len()
    }

    fn hamiltonian_at(&self, phi: &[f64]) -> Result<HermitianOperator> {
        check_params(self, phi)?;
        let mut m = self.offset.matrix().clone();
        for (p, t) in phi.iter().zip(&self.terms) {
            m += t.matrix().map(|z| z * *p);
        }
        Ok(HermitianOperator::hermitian_part(&m))
    }

    fn derivative_at(&self, phi: &[f64], j: usize) -> Result<HermitianOperator> {
        check_params(self, phi)?;
        self.terms.get(j).cloned().ok_or(Error::IndexOutOfRange {
            index: j,
            len: self.terms.len(),
        })
    }
}

type HamiltonianFn = dyn Fn(&[f64]) -> Result<HermitianOperator> + Send + Sync;
type DerivativeFn = dyn Fn(&[f64], usize) -> Result<HermitianOperator> + Send + Sync;

/// A family given by closures, with an optional analytic derivative.
pub struct ClosureFamily {
    dim: usize,
    n_params: usize,
    hamiltonian: Box<HamiltonianFn>,
    derivative: Option<Box<DerivativeFn>>,
}

impl ClosureFamily {
    pub fn new<H>(dim: usize, n_params: usize, hamiltonian: H) -> Self
    where
        H: Fn(&[f64]) -> Result<HermitianOperator> + Send + Sync + 'static,
    {
        Self {
            dim,
            n_params,
            hamiltonian: Box::new(hamiltonian),
            derivative: None,
        }
    }

    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(&[f64], usize) -> Result<HermitianOperator> + Send + Sync + 'static,
    {
        self.derivative = Some(Box::new(derivative));
        self
    }
}

impl ParamHamiltonianFamily for ClosureFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn hamiltonian_at(&self, phi: &[f64]) -> Result<HermitianOperator> {
        check_params(self, phi)?;
        let h = (self.hamiltonian)(phi)?;
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.dim(),
            });
        }
        Ok(h)
    }

    fn derivative_at(&self, phi: &[f64], j: usize) -> Result<HermitianOperator> {
        match &self.derivative {
            Some(d) => {
                check_params(self, phi)?;
                if j >= self.n_params {
                    return Err(Error::IndexOutOfRange {
                        index: j,
                        len: self.n_params,
                    });
                }
                d(phi, j)
            }
            None => finite_difference_derivative(self, phi, j),
        }
    }
}

/// One Hermitian generator per parameter.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub generators: Vec<HermitianOperator>,
}

impl GeneratorSet {
    pub fn new(generators: Vec<HermitianOperator>) -> Result<Self> {
        let dim = generators
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidInput("generator set is empty".into()))?;
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        Ok(Self { generators })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn get(&self, j: usize) -> &HermitianOperator {
        &self.generators[j]
    }

    /// Largest entrywise difference to another set of the same shape.
    pub fn max_difference(&self, other: &GeneratorSet) -> f64 {
        self.generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| max_norm(&(a.matrix() - b.matrix())))
            .fold(0.0, f64::max)
    }
}

/// Generators from the nested-commutator series, with the order reached.
#[derive(Debug, Clone)]
pub struct SeriesGenerators {
    pub set: GeneratorSet,
    /// Highest nested-commutator order whose term exceeded the tolerance.
    pub orders: Vec<usize>,
    /// Max-norm of every term for each parameter, starting at order 0.
    pub term_norms: Vec<Vec<f64>>,
}

/// Generators from finite differences of the channel.
#[derive(Debug, Clone)]
pub struct FdGenerators {
    pub set: GeneratorSet,
    /// Anti-Hermitian part discarded for each parameter.
    pub anti_hermitian_residual: Vec<f64>,
}

/// `exp(-i H(φ))` through the spectral decomposition of `H(φ)`.
pub fn channel_unitary<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64]) -> Result<CMatrix> {
    let h = family.hamiltonian_at(phi)?;
    let d = decompose(&h, DEFAULT_CLUSTER_TOL)?;
    Ok(d.unitary(1.0))
}

fn derivatives<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64]) -> Result<Vec<HermitianOperator>> {
    (0..family.n_params())
        .into_par_iter()
        .map(|j| family.derivative_at(phi, j))
        .collect()
}

/// `g(-iΔ) = (e^{-iΔ} - 1)/(-iΔ) = e^{-iΔ/2} sin(Δ/2)/(Δ/2)`.
fn duhamel_weight(delta: f64) -> Complex64 {
    let half = 0.5 * delta;
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    Complex64::from_polar(sinc, -half)
}

/// Applies the closed-form generator map to `∂_j H` given the decomposition
/// of `H`.
pub fn spectral_generator_from(decomp: &SpectralDecomposition, dh: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::hermitian_part(&spectral_generator_matrix(decomp, dh))
}

/// [`spectral_generator_from`] before taking the Hermitian part; its
/// anti-Hermitian residual measures round-off only.
pub fn spectral_generator_matrix(decomp: &SpectralDecomposition, dh: &HermitianOperator) -> CMatrix {
    let mut x = decomp.to_eigenbasis(dh.matrix());
    let lambda = decomp.eigenvalues();
    let n = decomp.dim();
    for a in 0..n {
        for b in 0..n {
            if decomp.cluster_of(a) != decomp.cluster_of(b) {
                x[(a, b)] *= duhamel_weight(lambda[a] - lambda[b]);
            }
        }
    }
    decomp.from_eigenbasis(&x)
}

/// Closed-form generators in the eigenbasis of `H(φ)`.
pub fn generator_spectral<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64]) -> Result<GeneratorSet> {
    let h = family.hamiltonian_at(phi)?;
    let decomp = decompose(&h, DEFAULT_CLUSTER_TOL)?;
    let gens = derivatives(family, phi)?
        .par_iter()
        .map(|dh| spectral_generator_from(&decomp, dh))
        .collect();
    GeneratorSet::new(gens)
}

/// Gauss–Legendre quadrature of `∫₀¹ exp(-iaH) ∂_j H exp(iaH) da`.
pub fn generator_duhamel<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64], n_nodes: usize) -> Result<GeneratorSet> {
    let gens = duhamel_matrices(family, phi, n_nodes)?
        .iter()
        .map(HermitianOperator::hermitian_part)
        .collect();
    GeneratorSet::new(gens)
}

/// The raw quadrature sums behind [`generator_duhamel`], one per parameter.
pub fn duhamel_matrices<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64], n_nodes: usize) -> Result<Vec<CMatrix>> {
    if n_nodes < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 quadrature nodes, got {n_nodes}")));
    }
    let h = family.hamiltonian_at(phi)?;
    let decomp = decompose(&h, DEFAULT_CLUSTER_TOL)?;
    let (nodes, weights) = gauss_legendre_unit(n_nodes)?;
    let propagators: Vec<(CMatrix, CMatrix)> = nodes
        .iter()
        .map(|&a| {
            let u = decomp.unitary(a);
            let ud = u.adjoint();
            (u, ud)
        })
        .collect();
    let dim = h.dim();
    Ok(derivatives(family, phi)?
        .par_iter()
        .map(|dh| {
            let mut acc = CMatrix::zeros(dim, dim);
            for ((u, ud), w) in propagators.iter().zip(&weights) {
                acc += (u * dh.matrix() * ud).map(|z| z * *w);
            }
            acc
        })
        .collect())
}

/// Nested-commutator series `Σ_n (-i)ⁿ/(n+1)! · [H, [H, …, ∂_j H]]`.
///
/// Summation stops at the first term whose max-norm falls below `term_tol`;
/// if `max_order` is reached first the series is reported as non-convergent.
pub fn generator_bch<F: ParamHamiltonianFamily + ?Sized>(
    family: &F,
    phi: &[f64],
    max_order: usize,
    term_tol: f64,
) -> Result<SeriesGenerators> {
    if max_order == 0 {
        return Err(Error::InvalidInput("max_order must be at least 1".into()));
    }
    if !(term_tol > 0.0) {
        return Err(Error::InvalidInput("term tolerance must be positive".into()));
    }
    let h = family.hamiltonian_at(phi)?;
    let results: Vec<Result<(HermitianOperator, usize, Vec<f64>)>> = derivatives(family, phi)?
        .par_iter()
        .map(|dh| bch_series(h.matrix(), dh.matrix(), max_order, term_tol))
        .collect();
    let mut gens = Vec::with_capacity(results.len());
    let mut orders = Vec::with_capacity(results.len());
    let mut term_norms = Vec::with_capacity(results.len());
    for r in results {
        let (g, order, norms) = r?;
        gens.push(g);
        orders.push(order);
        term_norms.push(norms);
    }
    Ok(SeriesGenerators {
        set: GeneratorSet::new(gens)?,
        orders,
        term_norms,
    })
}

fn bch_series(h: &CMatrix, dh: &CMatrix, max_order: usize, term_tol: f64) -> Result<(HermitianOperator, usize, Vec<f64>)> {
    let mut nested = dh.clone();
    // (-i)^n / (n+1)!
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut sum = CMatrix::zeros(h.nrows(), h.ncols());
    let mut norms = Vec::new();
    let mut last_significant = 0;
    for n in 0..=max_order {
        if n > 0 {
            nested = commutator(h, &nested);
            coeff *= Complex64::new(0.0, -1.0) / (n as f64 + 1.0);
        }
        let term = nested.map(|z| z * coeff);
        let norm = max_norm(&term);
        norms.push(norm);
        if norm < term_tol {
            let residual = anti_hermitian_residual(&sum);
            let limit = 10.0 * term_tol;
            if residual >= limit {
                return Err(Error::AntiHermitianResidual { residual, limit });
            }
            return Ok((HermitianOperator::hermitian_part(&sum), last_significant, norms));
        }
        sum += term;
        last_significant = n;
    }
    Err(Error::SeriesNonConvergence {
        max_order,
        last_term_norm: *norms.last().unwrap_or(&f64::NAN),
    })
}

/// Oracle route: `G_j = i (∂_j U) U†` with `∂_j U` from central differences
/// of [`channel_unitary`] at step `h·max(1, |φ_j|)`.
pub fn generator_fd<F: ParamHamiltonianFamily + ?Sized>(family: &F, phi: &[f64], h: f64) -> Result<FdGenerators> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
    }
    check_params(family, phi)?;
    let u = channel_unitary(family, phi)?;
    let ud = u.adjoint();
    let mut gens = Vec::with_capacity(phi.len());
    let mut residuals = Vec::with_capacity(phi.len());
    for j in 0..phi.len() {
        let step = h * phi[j].abs().max(1.0);
        let mut plus = phi.to_vec();
        let mut minus = phi.to_vec();
        plus[j] += step;
        minus[j] -= step;
        let du = (channel_unitary(family, &plus)? - channel_unitary(family, &minus)?).unscale(2.0 * step);
        let g = (du * &ud).map(|z| z * Complex64::new(0.0, 1.0));
        residuals.push(anti_hermitian_residual(&g));
        gens.push(HermitianOperator::hermitian_part(&g));
    }
    Ok(FdGenerators {
        set: GeneratorSet::new(gens)?,
        anti_hermitian_residual: residuals,
    })
}
