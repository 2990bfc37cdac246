//! Emitter grids, deformation maps and the deformation QFIM.
//!
//! Sources sit on an `N × M` lattice symmetric about the origin, each
//! emitting `n_j` photons with a bivariate Gaussian profile of covariance
//! `Σ = [[σx², ρσxσy], [ρσxσy, σy²]]`. A deformation moves the mean
//! positions `μ_j ↦ u_j(φ)` and leaves `Σ` untouched, giving
//!
//! ```text
//! I_mn = Σ_j n_j²/(1-ρ²) [ ∂_m u_jx ∂_n u_jx/σx² + ∂_m u_jy ∂_n u_jy/σy²
//!                          - ρ(∂_m u_jx ∂_n u_jy + ∂_m u_jy ∂_n u_jx)/(σx σy) ]
//! ```
//!
//! which [`qfim_grid`] evaluates directly for any map. Stretch, shear and
//! rotation have closed forms for isotropic `σ`.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::generator::{channel_unitary, generator_spectral, ClosureFamily};
use crate::qfim::{qfim_pure, saturability, slds, InfoKind, InfoMatrix, QuantumState, DEFAULT_SUPPORT_TOL};
use crate::quadrature::gauss_hermite_probabilist;
use crate::spectral::HermitianOperator;
use crate::{CVector, Complex64, RMatrix};

pub type Point = [f64; 2];

/// An `N × M` grid of identical-shape Gaussian emitters.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterGrid {
    n_cols: usize,
    n_rows: usize,
    d_x: f64,
    d_y: f64,
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
    photons: Vec<u32>,
}

impl EmitterGrid {
    /// Isotropic grid (`σx = σy = sigma`) with one photon per source.
    pub fn new(n_cols: usize, n_rows: usize, d_x: f64, d_y: f64, sigma: f64, rho: f64) -> Result<Self> {
        Self::anisotropic(n_cols, n_rows, d_x, d_y, sigma, sigma, rho)
    }

    pub fn anisotropic(
        n_cols: usize,
        n_rows: usize,
        d_x: f64,
        d_y: f64,
        sigma_x: f64,
        sigma_y: f64,
        rho: f64,
    ) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::InvalidInput(format!("grid must have N, M >= 1, got {n_cols}x{n_rows}")));
        }
        for (name, v) in [("d_x", d_x), ("d_y", d_y), ("sigma_x", sigma_x), ("sigma_y", sigma_y)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidInput(format!("correlation must satisfy |rho| < 1, got {rho}")));
        }
        Ok(Self {
            n_cols,
            n_rows,
            d_x,
            d_y,
            sigma_x,
            sigma_y,
            rho,
            photons: vec![1; n_cols * n_rows],
        })
    }

    /// Same photon number for every source.
    pub fn with_photons(mut self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("photon number must be positive".into()));
        }
        self.photons = vec![n; self.sources()];
        Ok(self)
    }

    /// Per-source photon numbers in source order.
    pub fn with_photon_counts(mut self, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != self.sources() {
            return Err(Error::DimensionMismatch {
                expected: self.sources(),
                found: counts.len(),
            });
        }
        if counts.contains(&0) {
            return Err(Error::InvalidInput("photon numbers must be positive".into()));
        }
        self.photons = counts;
        Ok(self)
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Total number of sources `s = N·M`.
    pub fn sources(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn d_x(&self) -> f64 {
        self.d_x
    }

    pub fn d_y(&self) -> f64 {
        self.d_y
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn photons(&self) -> &[u32] {
        &self.photons
    }

    /// The common photon number, if all sources share one.
    pub fn uniform_photons(&self) -> Option<u32> {
        let first = self.photons[0];
        self.photons.iter().all(|&n| n == first).then_some(first)
    }

    pub fn is_isotropic(&self) -> bool {
        self.sigma_x == self.sigma_y
    }

    /// Mean source positions, see [`grid_positions`].
    pub fn positions(&self) -> Vec<Point> {
        grid_positions(self.n_cols, self.n_rows, self.d_x, self.d_y)
    }

    /// The grid with rows and columns exchanged (`N ↔ M`, `d_x ↔ d_y`,
    /// `σx ↔ σy`).
    pub fn transposed(&self) -> Self {
        Self {
            n_cols: self.n_rows,
            n_rows: self.n_cols,
            d_x: self.d_y,
            d_y: self.d_x,
            sigma_x: self.sigma_y,
            sigma_y: self.sigma_x,
            rho: self.rho,
            photons: self.photons.clone(),
        }
    }
}

/// Mean positions labelled bottom-left to top-right along rows:
/// `μ_jx = (Mod(j-1, N) - (N-1)/2)·d_x`, `μ_jy = (⌈j/N⌉ - (M+1)/2)·d_y`.
pub fn grid_positions(n_cols: usize, n_rows: usize, d_x: f64, d_y: f64) -> Vec<Point> {
    let half_x = (n_cols as f64 - 1.0) / 2.0;
    let half_y = (n_rows as f64 + 1.0) / 2.0;
    (1..=n_cols * n_rows)
        .map(|j| {
            let col = ((j - 1) % n_cols) as f64;
            let row = j.div_ceil(n_cols) as f64;
            [(col - half_x) * d_x, (row - half_y) * d_y]
        })
        .collect()
}

/// A parameterized deformation of source positions.
///
/// Parameter order: `Stretch` (α, β), `Shear` (ι, κ), `Rotation` (ϑ),
/// `InhomExp` (γ). A `Composite` applies its maps in list order and
/// concatenates their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DeformationMap {
    /// `F = [[α, 0], [0, β]]`.
    Stretch,
    /// `F = [[1, ι], [κ, 1]]`.
    Shear,
    /// Counterclockwise rotation about the grid centre.
    Rotation,
    /// `(x, y) ↦ (x·exp(y/γ), y)`; γ must be non-zero.
    InhomExp,
    Composite(Vec<DeformationMap>),
}

impl DeformationMap {
    pub fn n_params(&self) -> usize {
        match self {
            Self::Stretch | Self::Shear => 2,
            Self::Rotation | Self::InhomExp => 1,
            Self::Composite(maps) => maps.iter().map(Self::n_params).sum(),
        }
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        match self {
            Self::Stretch => vec!["alpha", "beta"],
            Self::Shear => vec!["iota", "kappa"],
            Self::Rotation => vec!["theta"],
            Self::InhomExp => vec!["gamma"],
            Self::Composite(maps) => maps.iter().flat_map(Self::param_names).collect(),
        }
    }

    /// Parameters at which the map is the identity. `InhomExp` has none.
    pub fn identity_params(&self) -> Option<Vec<f64>> {
        match self {
            Self::Stretch => Some(vec![1.0, 1.0]),
            Self::Shear => Some(vec![0.0, 0.0]),
            Self::Rotation => Some(vec![0.0]),
            Self::InhomExp => None,
            Self::Composite(maps) => {
                let mut out = Vec::new();
                for m in maps {
                    out.extend(m.identity_params()?);
                }
                Some(out)
            }
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            Self::InhomExp => false,
            Self::Composite(maps) => maps.iter().all(Self::is_homogeneous),
            _ => true,
        }
    }

    fn check(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                found: phi.len(),
            });
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("deformation parameters must be finite".into()));
        }
        if let Self::InhomExp = self {
            if phi[0] == 0.0 {
                return Err(Error::InvalidInput("inhomogeneous map needs gamma != 0".into()));
            }
        }
        Ok(())
    }

    /// Deformed position `u(φ)` of a mean position `μ`.
    pub fn apply(&self, phi: &[f64], mu: Point) -> Result<Point> {
        self.check(phi)?;
        Ok(match self {
            Self::Stretch => [phi[0] * mu[0], phi[1] * mu[1]],
            Self::Shear => [mu[0] + phi[0] * mu[1], phi[1] * mu[0] + mu[1]],
            Self::Rotation => {
                let (s, c) = phi[0].sin_cos();
                [c * mu[0] - s * mu[1], s * mu[0] + c * mu[1]]
            }
            Self::InhomExp => [mu[0] * (mu[1] / phi[0]).exp(), mu[1]],
            Self::Composite(maps) => {
                let mut p = mu;
                let mut offset = 0;
                for m in maps {
                    let k = m.n_params();
                    p = m.apply(&phi[offset..offset + k], p)?;
                    offset += k;
                }
                p
            }
        })
    }

    /// `∂u/∂φ_m` for every parameter, in parameter order.
    pub fn jacobian(&self, phi: &[f64], mu: Point) -> Result<Vec<Point>> {
        self.check(phi)?;
        Ok(match self {
            Self::Stretch => vec![[mu[0], 0.0], [0.0, mu[1]]],
            Self::Shear => vec![[mu[1], 0.0], [0.0, mu[0]]],
            Self::Rotation => {
                let (s, c) = phi[0].sin_cos();
                vec![[-s * mu[0] - c * mu[1], c * mu[0] - s * mu[1]]]
            }
            Self::InhomExp => {
                let g = phi[0];
                vec![[-mu[0] * mu[1] * (mu[1] / g).exp() / (g * g), 0.0]]
            }
            Self::Composite(maps) => {
                // intermediate points p_0 = μ, p_{i+1} = f_i(p_i)
                let mut points = vec![mu];
                let mut ranges = Vec::with_capacity(maps.len());
                let mut offset = 0;
                for m in maps {
                    let k = m.n_params();
                    ranges.push(offset..offset + k);
                    let next = m.apply(&phi[offset..offset + k], *points.last().unwrap())?;
                    points.push(next);
                    offset += k;
                }
                let mut out = Vec::with_capacity(offset);
                for (i, m) in maps.iter().enumerate() {
                    for mut v in m.jacobian(&phi[ranges[i].clone()], points[i])? {
                        for later in (i + 1)..maps.len() {
                            let j = maps[later].spatial_jacobian(&phi[ranges[later].clone()], points[later])?;
                            let w = j * Vector2::new(v[0], v[1]);
                            v = [w[0], w[1]];
                        }
                        out.push(v);
                    }
                }
                out
            }
        })
    }

    /// `∂u/∂μ`, used by the chain rule for composites.
    pub fn spatial_jacobian(&self, phi: &[f64], mu: Point) -> Result<Matrix2<f64>> {
        self.check(phi)?;
        Ok(match self {
            Self::Stretch => Matrix2::new(phi[0], 0.0, 0.0, phi[1]),
            Self::Shear => Matrix2::new(1.0, phi[0], phi[1], 1.0),
            Self::Rotation => {
                let (s, c) = phi[0].sin_cos();
                Matrix2::new(c, -s, s, c)
            }
            Self::InhomExp => {
                let e = (mu[1] / phi[0]).exp();
                Matrix2::new(e, mu[0] * e / phi[0], 0.0, 1.0)
            }
            Self::Composite(maps) => {
                let mut acc = Matrix2::identity();
                let mut p = mu;
                let mut offset = 0;
                for m in maps {
                    let k = m.n_params();
                    let local = &phi[offset..offset + k];
                    acc = m.spatial_jacobian(local, p)? * acc;
                    p = m.apply(local, p)?;
                    offset += k;
                }
                acc
            }
        })
    }
}

/// Deformed mean positions of every source.
pub fn deformed_positions(map: &DeformationMap, phi: &[f64], grid: &EmitterGrid) -> Result<Vec<Point>> {
    grid.positions().into_iter().map(|mu| map.apply(phi, mu)).collect()
}

/// Deformation QFIM by direct summation over sources in order `j = 1…s`.
pub fn qfim_grid(grid: &EmitterGrid, map: &DeformationMap, phi: &[f64]) -> Result<InfoMatrix> {
    let rho = grid.rho;
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("correlation must satisfy |rho| < 1, got {rho}")));
    }
    let d = map.n_params();
    let (sx, sy) = (grid.sigma_x, grid.sigma_y);
    let mut entries = RMatrix::zeros(d, d);
    for (mu, &n) in grid.positions().into_iter().zip(&grid.photons) {
        let jac = map.jacobian(phi, mu)?;
        let weight = (n as f64) * (n as f64) / (1.0 - rho * rho);
        for m in 0..d {
            for k in m..d {
                let (a, b) = (jac[m], jac[k]);
                let term = a[0] * b[0] / (sx * sx) + a[1] * b[1] / (sy * sy) - rho * (a[0] * b[1] + a[1] * b[0]) / (sx * sy);
                entries[(m, k)] += weight * term;
            }
        }
    }
    for m in 0..d {
        for k in 0..m {
            entries[(m, k)] = entries[(k, m)];
        }
    }
    InfoMatrix::new(entries, InfoKind::Quantum)
}

fn closed_form_prefactor(grid: &EmitterGrid) -> Result<f64> {
    let n = grid.uniform_photons().ok_or(Error::ClosedFormUnavailable)?;
    if !grid.is_isotropic() {
        return Err(Error::ClosedFormUnavailable);
    }
    let nf = n as f64;
    Ok(nf * nf)
}

/// `d²·s·(count² - 1) / (12 σ² (1 - ρ²))`.
fn axis_information(spacing: f64, count: usize, sources: usize, sigma: f64, rho: f64) -> f64 {
    let c = count as f64;
    spacing * spacing * sources as f64 * (c * c - 1.0) / (12.0 * sigma * sigma * (1.0 - rho * rho))
}

/// Closed-form stretch QFIM `diag(I_αα, I_ββ)` for isotropic `σ`.
pub fn qfim_stretch_closed(grid: &EmitterGrid) -> Result<InfoMatrix> {
    let n2 = closed_form_prefactor(grid)?;
    let s = grid.sources();
    let alpha = n2 * axis_information(grid.d_x, grid.n_cols, s, grid.sigma_x, grid.rho);
    let beta = n2 * axis_information(grid.d_y, grid.n_rows, s, grid.sigma_x, grid.rho);
    InfoMatrix::new(RMatrix::from_row_slice(2, 2, &[alpha, 0.0, 0.0, beta]), InfoKind::Quantum)
}

/// Closed-form shear QFIM `diag(I_ιι, I_κκ)`: the stretch entries with the
/// axes interchanged.
pub fn shear_qfim(grid: &EmitterGrid) -> Result<InfoMatrix> {
    let stretch = qfim_stretch_closed(grid)?;
    let (alpha, beta) = (stretch.get(0, 0), stretch.get(1, 1));
    InfoMatrix::new(RMatrix::from_row_slice(2, 2, &[beta, 0.0, 0.0, alpha]), InfoKind::Quantum)
}

/// Ratio `I_αα / I_ββ = (d_x/d_y)² (N² - 1)/(M² - 1)`.
pub fn stretch_ratio(grid: &EmitterGrid) -> Result<f64> {
    if grid.n_rows < 2 {
        return Err(Error::InvalidInput("stretch ratio undefined for M = 1 (I_bb = 0)".into()));
    }
    let (n, m) = (grid.n_cols as f64, grid.n_rows as f64);
    let r = grid.d_x / grid.d_y;
    Ok(r * r * (n * n - 1.0) / (m * m - 1.0))
}

/// Closed-form rotation QFI for isotropic `σ`:
/// `n² s/(12σ²(1-ρ²)) {d_x²(N²-1)[1 + ρ sin 2ϑ] + d_y²(M²-1)[1 - ρ sin 2ϑ]}`.
pub fn qfim_rotation_closed(grid: &EmitterGrid, theta: f64) -> Result<f64> {
    rotation_closed_signed(grid, theta, 1.0)
}

/// [`qfim_rotation_closed`] with the sign of the `ρ sin 2ϑ` terms scaled by
/// `sign`; only the validation suite's mutation check uses `sign = -1`.
pub(crate) fn rotation_closed_signed(grid: &EmitterGrid, theta: f64, sign: f64) -> Result<f64> {
    let n2 = closed_form_prefactor(grid)?;
    let s = grid.sources();
    let (n, m) = (grid.n_cols as f64, grid.n_rows as f64);
    let osc = sign * grid.rho * (2.0 * theta).sin();
    let bracket = grid.d_x * grid.d_x * (n * n - 1.0) * (1.0 + osc) + grid.d_y * grid.d_y * (m * m - 1.0) * (1.0 - osc);
    Ok(n2 * s as f64 * bracket / (12.0 * grid.sigma_x * grid.sigma_x * (1.0 - grid.rho * grid.rho)))
}

/// Outcome of the oscillation test for the rotation QFI.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationVerdict {
    pub oscillates: bool,
    /// `ρ ≠ 0`.
    pub source_criterion: bool,
    /// `d_x²(N² - 1) ≠ d_y²(M² - 1)`.
    pub grid_criterion: bool,
    pub diagnostic: String,
}

/// The rotation QFI depends on ϑ iff `ρ ≠ 0` and
/// `d_x²(N² - 1) ≠ d_y²(M² - 1)` (relative tolerance 1e-12).
pub fn oscillation_criteria(grid: &EmitterGrid) -> OscillationVerdict {
    let (n, m) = (grid.n_cols as f64, grid.n_rows as f64);
    let a = grid.d_x * grid.d_x * (n * n - 1.0);
    let b = grid.d_y * grid.d_y * (m * m - 1.0);
    let source_criterion = grid.rho != 0.0;
    let grid_criterion = (a - b).abs() > 1e-12 * a.abs().max(b.abs());
    let diagnostic = match (source_criterion, grid_criterion) {
        (true, true) => "oscillating: rho != 0 and d_x^2(N^2-1) != d_y^2(M^2-1)".to_string(),
        (false, true) => "constant: source criterion fails (rho = 0)".to_string(),
        (true, false) => format!("constant: grid criterion fails (d_x^2(N^2-1) = d_y^2(M^2-1) = {a})"),
        (false, false) => "constant: source criterion (rho = 0) and grid criterion both fail".to_string(),
    };
    OscillationVerdict {
        oscillates: source_criterion && grid_criterion,
        source_criterion,
        grid_criterion,
        diagnostic,
    }
}

/// Finite-dimensional stand-in for the grid's momentum-space description.
///
/// Each source's photon momentum is discretized on a tensor Gauss–Hermite
/// lattice reproducing the Gaussian momentum covariance `Σ⁻¹/4` exactly. In
/// that basis the deformation Hamiltonian is diagonal with eigenvalues
/// `E_k(φ) = -n_j k·u_j(φ)`, so its generators are the diagonal operators
/// `∂_m E_k` and commute. Summing the per-source pure-state QFIMs recovers
/// [`qfim_grid`]; the SLD commutator test is then expected to vanish.
#[derive(Debug, Clone)]
pub struct MomentumSurrogate {
    grid: EmitterGrid,
    map: Arc<DeformationMap>,
    momenta: Arc<Vec<Point>>,
    amplitudes: Vec<f64>,
}

impl MomentumSurrogate {
    /// `nodes` Gauss–Hermite points per momentum axis (at least 2).
    pub fn new(grid: &EmitterGrid, map: &DeformationMap, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidInput("momentum surrogate needs at least 2 nodes per axis".into()));
        }
        let (z, w) = gauss_hermite_probabilist(nodes)?;
        let (sx, sy, rho) = (grid.sigma_x, grid.sigma_y, grid.rho);
        // Cholesky factor of Σ⁻¹/4
        let det = 1.0 - rho * rho;
        let a = 1.0 / (4.0 * det * sx * sx);
        let b = -rho / (4.0 * det * sx * sy);
        let c = 1.0 / (4.0 * det * sy * sy);
        let l11 = a.sqrt();
        let l21 = b / l11;
        let l22 = (c - l21 * l21).sqrt();
        let mut momenta = Vec::with_capacity(nodes * nodes);
        let mut amplitudes = Vec::with_capacity(nodes * nodes);
        for (z1, w1) in z.iter().zip(&w) {
            for (z2, w2) in z.iter().zip(&w) {
                momenta.push([l11 * z1, l21 * z1 + l22 * z2]);
                amplitudes.push((w1 * w2).sqrt());
            }
        }
        Ok(Self {
            grid: grid.clone(),
            map: Arc::new(map.clone()),
            momenta: Arc::new(momenta),
            amplitudes,
        })
    }

    pub fn dim(&self) -> usize {
        self.momenta.len()
    }

    /// The diagonal Hamiltonian family of source `j` (0-based).
    pub fn source_family(&self, j: usize) -> Result<ClosureFamily> {
        let mu = *self.grid.positions().get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            len: self.grid.sources(),
        })?;
        let n = self.grid.photons[j] as f64;
        let d = self.map.n_params();
        let (map_h, mom_h) = (Arc::clone(&self.map), Arc::clone(&self.momenta));
        let (map_d, mom_d) = (Arc::clone(&self.map), Arc::clone(&self.momenta));
        Ok(ClosureFamily::new(self.dim(), d, move |phi| {
            let u = map_h.apply(phi, mu)?;
            let e: Vec<f64> = mom_h.iter().map(|k| -n * (k[0] * u[0] + k[1] * u[1])).collect();
            Ok(HermitianOperator::from_diagonal(&e))
        })
        .with_derivative(move |phi, m| {
            let du = map_d.jacobian(phi, mu)?[m];
            let e: Vec<f64> = mom_d.iter().map(|k| -n * (k[0] * du[0] + k[1] * du[1])).collect();
            Ok(HermitianOperator::from_diagonal(&e))
        }))
    }

    /// Probe state of one source: real amplitudes `√w_k`.
    pub fn probe(&self) -> Result<QuantumState> {
        QuantumState::pure(CVector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes.iter().map(|&a| Complex64::new(a, 0.0)),
        ))
    }

    /// Sum over sources of the generator-based pure-state QFIM and of the
    /// saturability matrices `Im Tr(ρ[L_j, L_k])`.
    pub fn evaluate(&self, phi: &[f64]) -> Result<(InfoMatrix, RMatrix)> {
        let d = self.map.n_params();
        let probe = self.probe()?;
        let mut info = RMatrix::zeros(d, d);
        let mut sat = RMatrix::zeros(d, d);
        for j in 0..self.grid.sources() {
            let fam = self.source_family(j)?;
            let gens = generator_spectral(&fam, phi)?;
            let u = channel_unitary(&fam, phi)?;
            let state = probe.evolve(&u)?;
            let QuantumState::Pure(psi) = &state else { unreachable!() };
            info += qfim_pure(psi, &gens)?.entries;
            sat += saturability(&state, &slds(&state, &gens, DEFAULT_SUPPORT_TOL)?)?;
        }
        Ok((InfoMatrix::new(info, InfoKind::Quantum)?, sat))
    }
}

impl MomentumSurrogate {
    pub fn n_params(&self) -> usize {
        self.map.n_params()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fig_grid(rho: f64) -> EmitterGrid {
        EmitterGrid::new(3, 2, 1.0, 2.0, 1.0, rho).unwrap()
    }

    #[test]
    fn positions_of_three_by_two() {
        let p = grid_positions(3, 2, 4.0, 4.0);
        assert_eq!(p, vec![[-4.0, -2.0], [0.0, -2.0], [4.0, -2.0], [-4.0, 2.0], [0.0, 2.0], [4.0, 2.0]]);
        assert_eq!(grid_positions(1, 1, 3.0, 5.0), vec![[0.0, 0.0]]);
    }

    #[test]
    fn positions_sum_to_zero() {
        for n in 1..8 {
            for m in 1..8 {
                let p = grid_positions(n, m, 0.5, 2.0);
                let sx: f64 = p.iter().map(|q| q[0]).sum();
                let sy: f64 = p.iter().map(|q| q[1]).sum();
                assert_eq!((sx, sy), (0.0, 0.0), "{n}x{m}");
            }
        }
    }

    #[test]
    fn apply_examples() {
        assert_eq!(DeformationMap::Stretch.apply(&[2.0, 1.0], [1.0, 3.0]).unwrap(), [2.0, 3.0]);
        let r = DeformationMap::Rotation.apply(&[FRAC_PI_2], [1.0, 0.0]).unwrap();
        assert!(r[0].abs() < 1e-16 && (r[1] - 1.0).abs() < 1e-16);
        let e = DeformationMap::InhomExp.apply(&[2.0], [1.0, 2.0]).unwrap();
        assert!((e[0] - std::f64::consts::E).abs() < 1e-15 && e[1] == 2.0);
        assert!(DeformationMap::InhomExp.apply(&[0.0], [1.0, 2.0]).is_err());
        assert_eq!(DeformationMap::Shear.jacobian(&[0.0, 0.0], [1.0, 3.0]).unwrap()[0], [3.0, 0.0]);
    }

    #[test]
    fn identity_points() {
        let mu = [1.3, -0.4];
        for map in [
            DeformationMap::Stretch,
            DeformationMap::Shear,
            DeformationMap::Rotation,
            DeformationMap::Composite(vec![DeformationMap::Shear, DeformationMap::Rotation, DeformationMap::Stretch]),
        ] {
            let id = map.identity_params().unwrap();
            assert_eq!(map.apply(&id, mu).unwrap(), mu);
        }
        assert!(DeformationMap::InhomExp.identity_params().is_none());
    }

    #[test]
    fn stretch_direct_sum() {
        let q = qfim_grid(&fig_grid(0.0), &DeformationMap::Stretch, &[1.0, 1.0]).unwrap();
        assert!((q.get(0, 0) - 4.0).abs() < 1e-13);
        assert!((q.get(1, 1) - 6.0).abs() < 1e-13);
        assert_eq!(q.get(0, 1), 0.0);
        let closed = qfim_stretch_closed(&fig_grid(0.0)).unwrap();
        assert!((closed.get(0, 0) - 4.0).abs() < 1e-14 && (closed.get(1, 1) - 6.0).abs() < 1e-14);
        let corr = qfim_stretch_closed(&fig_grid(0.5)).unwrap();
        assert!((corr.get(0, 0) - 16.0 / 3.0).abs() < 1e-14 && (corr.get(1, 1) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn single_source_has_no_information() {
        let g = EmitterGrid::new(1, 1, 1.0, 1.0, 1.0, 0.3).unwrap();
        for map in [DeformationMap::Stretch, DeformationMap::Shear, DeformationMap::Rotation] {
            let phi = map.identity_params().unwrap();
            let q = qfim_grid(&g, &map, &phi).unwrap();
            assert!(q.entries.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn shear_values() {
        // brute-force sum with ∂u/∂ι = (μ_y, 0), ∂u/∂κ = (0, μ_x)
        let g = fig_grid(0.0);
        let direct = qfim_grid(&g, &DeformationMap::Shear, &[0.0, 0.0]).unwrap();
        assert!((direct.get(0, 0) - 6.0).abs() < 1e-13);
        assert!((direct.get(1, 1) - 4.0).abs() < 1e-13);
        let closed = shear_qfim(&g).unwrap();
        assert!((closed.get(0, 0) - 6.0).abs() < 1e-14 && (closed.get(1, 1) - 4.0).abs() < 1e-14);
        let square = shear_qfim(&EmitterGrid::new(4, 4, 1.5, 1.5, 1.0, 0.2).unwrap()).unwrap();
        assert_eq!(square.get(0, 0), square.get(1, 1));
    }

    #[test]
    fn rotation_values() {
        for theta in [0.0, 0.3, 1.0, 2.5] {
            let v = qfim_rotation_closed(&fig_grid(0.0), theta).unwrap();
            assert!((v - 10.0).abs() < 1e-13);
        }
        let v = qfim_rotation_closed(&fig_grid(0.5), 0.0).unwrap();
        assert!((v - 40.0 / 3.0).abs() < 1e-13);
        let direct = qfim_grid(&fig_grid(0.5), &DeformationMap::Rotation, &[0.0]).unwrap();
        assert!((direct.get(0, 0) - 40.0 / 3.0).abs() < 1e-13);
        let a = qfim_rotation_closed(&fig_grid(0.5), 0.7).unwrap();
        let b = qfim_rotation_closed(&fig_grid(0.5), 0.7 + PI).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn closed_forms_reject_anisotropy() {
        let g = EmitterGrid::anisotropic(3, 2, 1.0, 2.0, 1.0, 1.1, 0.0).unwrap();
        assert_eq!(qfim_stretch_closed(&g), Err(Error::ClosedFormUnavailable));
        assert_eq!(shear_qfim(&g), Err(Error::ClosedFormUnavailable));
        assert_eq!(qfim_rotation_closed(&g, 0.0), Err(Error::ClosedFormUnavailable));
    }

    #[test]
    fn ratio_examples() {
        let r = stretch_ratio(&EmitterGrid::new(5, 5, 1.0, 2.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(r, 0.25);
        assert_eq!(stretch_ratio(&EmitterGrid::new(4, 4, 1.0, 1.0, 1.0, 0.0).unwrap()).unwrap(), 1.0);
        let r = stretch_ratio(&EmitterGrid::new(3, 2, 1.0, 1.0, 1.0, 0.0).unwrap()).unwrap();
        assert!((r - 8.0 / 3.0).abs() < 1e-15);
        assert!(stretch_ratio(&EmitterGrid::new(3, 1, 1.0, 1.0, 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn oscillation_examples() {
        let v = oscillation_criteria(&fig_grid(0.0));
        assert!(!v.oscillates && !v.source_criterion && v.diagnostic.contains("source criterion"));
        assert!(oscillation_criteria(&fig_grid(0.5)).oscillates);
        let v = oscillation_criteria(&EmitterGrid::new(4, 4, 1.0, 1.0, 1.0, 0.5).unwrap());
        assert!(!v.oscillates && !v.grid_criterion && v.diagnostic.contains("grid criterion"));
    }

    #[test]
    fn photon_number_scales_quadratically() {
        let g = fig_grid(0.0).with_photons(3).unwrap();
        let q = qfim_stretch_closed(&g).unwrap();
        assert!((q.get(0, 0) - 36.0).abs() < 1e-12);
        let d = qfim_grid(&g, &DeformationMap::Stretch, &[1.0, 1.0]).unwrap();
        assert!((d.get(1, 1) - 54.0).abs() < 1e-12);
        let uneven = fig_grid(0.0).with_photon_counts(vec![1, 2, 1, 1, 2, 1]).unwrap();
        assert_eq!(qfim_stretch_closed(&uneven), Err(Error::ClosedFormUnavailable));
    }

    #[test]
    fn grid_validation() {
        assert!(EmitterGrid::new(0, 2, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(EmitterGrid::new(2, 2, -1.0, 1.0, 1.0, 0.0).is_err());
        assert!(EmitterGrid::new(2, 2, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(EmitterGrid::new(2, 2, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn surrogate_reproduces_direct_sum() {
        let g = EmitterGrid::anisotropic(3, 2, 1.0, 2.0, 0.8, 1.3, 0.4).unwrap().with_photons(2).unwrap();
        let map = DeformationMap::Composite(vec![DeformationMap::Stretch, DeformationMap::Rotation]);
        let phi = [1.1, 0.9, 0.35];
        let surrogate = MomentumSurrogate::new(&g, &map, 3).unwrap();
        let (info, sat) = surrogate.evaluate(&phi).unwrap();
        let direct = qfim_grid(&g, &map, &phi).unwrap();
        let scale = crate::max_norm_real(&direct.entries);
        assert!(crate::max_norm_real(&(info.entries - direct.entries)) < 1e-10 * scale);
        assert!(crate::max_norm_real(&sat) < 1e-10);
    }
}
