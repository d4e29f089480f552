use std::fmt::Write as _;
use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::SpinChainError;

/// Eigenvalues below this magnitude are treated as zero in the entropy sum.
pub const SPECTRUM_CLIP: f64 = 1e-10;

/// Unit-norm state in the σ³ product basis. Bit `b` of the index is the spin at bit position `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_sites: usize,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, SpinChainError> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(SpinChainError::LengthMismatch {
                what: "amplitudes (power of two)",
                expected: dim.next_power_of_two().max(1),
                got: dim,
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self {
            amplitudes,
            n_sites: dim.trailing_zeros() as usize,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self, SpinChainError> {
        Self::new(values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitudes arranged as a `2^|block| × 2^(n-|block|)` matrix, block index in rows.
    pub fn bipartition(&self, block: Range<usize>) -> Result<DMatrix<Complex64>, SpinChainError> {
        if block.start > block.end || block.end > self.n_sites {
            return Err(SpinChainError::BlockOutOfRange {
                lo: block.start,
                hi: block.end,
                n: self.n_sites,
            });
        }
        let (lo, hi) = (block.start, block.end);
        let width = hi - lo;
        let rows = 1usize << width;
        let cols = 1usize << (self.n_sites - width);
        let low_mask = (1usize << lo) - 1;
        let mut psi = DMatrix::zeros(rows, cols);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let r = (i >> lo) & (rows - 1);
            let c = (i & low_mask) | ((i >> hi) << lo);
            psi[(r, c)] = *a;
        }
        Ok(psi)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on `2^k` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants at tolerance `1e-10`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, SpinChainError> {
        let d = entries.nrows();
        if d != entries.ncols() || d == 0 {
            return Err(SpinChainError::DimensionMismatch(d, entries.ncols()));
        }
        let rho = Self { entries };
        let herm = (&rho.entries - rho.entries.adjoint())
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let trace = rho.entries.trace();
        let spectrum = rho.eigenvalues();
        let min_ev = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        if herm > 1e-10 || (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 || min_ev < -1e-10 {
            return Err(SpinChainError::InvalidDensity {
                asymmetry: herm,
                trace: trace.re,
                min_eigenvalue: min_ev,
            });
        }
        Ok(rho)
    }

    pub fn from_real(entries: DMatrix<f64>) -> Result<Self, SpinChainError> {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    /// Row-major CSV; each entry written as `re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let cells: Vec<String> = row.iter().map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Partial trace of `|ψ⟩⟨ψ|` over every bit outside `block`.
pub fn reduced_density(psi: &StateVector, block: Range<usize>) -> Result<DensityMatrix, SpinChainError> {
    let m = psi.bipartition(block)?;
    let mut rho = &m * m.adjoint();
    // symmetrize away roundoff so the Hermitian check is exact
    rho = (&rho + rho.adjoint()).map(|z| z * 0.5);
    DensityMatrix::new(rho)
}

/// Eigenvalues in decreasing order.
pub fn sorted_spectrum(rho: &DensityMatrix) -> Vec<f64> {
    let mut ev = rho.eigenvalues();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Von Neumann entropy in bits, `0 log 0 = 0`, tiny negative eigenvalues clipped.
pub fn entanglement_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&sorted_spectrum(rho))
}

pub(crate) fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > SPECTRUM_CLIP)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `sup_{‖φ‖=1} |⟨φ|(ρ₁ − ρ₂)|φ⟩|`, the spectral radius of the difference.
pub fn operator_norm_diff(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, SpinChainError> {
    if rho1.dim() != rho2.dim() {
        return Err(SpinChainError::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let diff = &rho1.entries - &rho2.entries;
    let diff = (&diff + diff.adjoint()).map(|z| z * 0.5);
    Ok(SymmetricEigen::new(diff)
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, e| acc.max(e.abs())))
}
