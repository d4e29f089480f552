//! Exact quantum-side computations for the transverse-field Ising chain
//!
//! The chain lives on sites `x ∈ [-m, m+L]` with free boundary conditions and
//! Hamiltonian
//!
//! ```text
//! H = -1/2 Σ λ_{x,x+1} σ³_x σ³_{x+1} - Σ δ_x σ¹_x
//! ```
//!
//! Basis states are indexed by `n`-bit integers. Site `x` maps to bit `x + m`,
//! so the block `[0, L]` occupies bits `m..=m+L`. A cleared bit is spin up
//! (`σ³ = +1`), a set bit is spin down (`σ³ = -1`).

mod density;
mod hamiltonian;
mod lanczos;

pub use density::{
    entanglement_entropy, operator_norm_diff, reduced_density, sorted_spectrum, DensityMatrix,
    StateVector,
};
pub use hamiltonian::{build_hamiltonian, Hamiltonian, LinearOperator, DENSE_SITE_LIMIT};
pub use lanczos::{ground_state, ground_state_with, GroundState, LanczosConfig};

use thiserror::Error;

/// Default cap on the number of sites so that state vectors fit in memory.
pub const DEFAULT_SITE_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinChainError {
    #[error("chain has {n} sites, above the cap of {cap}")]
    TooManySites { n: usize, cap: usize },
    #[error("dense matrix requested for {n} sites, limit is {limit}")]
    DenseTooLarge { n: usize, limit: usize },
    #[error("{what}[{index}] = {value} must be strictly positive and finite")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("lowest two Ritz values are {gap:e} apart; ground state is not isolated")]
    NearDegenerate { gap: f64 },
    #[error("block bits {lo}..{hi} outside a {n}-site state")]
    BlockOutOfRange { lo: usize, hi: usize, n: usize },
    #[error("not a density matrix: asymmetry {asymmetry:e}, trace {trace}, min eigenvalue {min_eigenvalue:e}")]
    InvalidDensity {
        asymmetry: f64,
        trace: f64,
        min_eigenvalue: f64,
    },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Geometry and intensities of a finite chain `[-m, m+L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainParams {
    m: usize,
    block_len: usize,
    couplings: Vec<f64>,
    fields: Vec<f64>,
}

impl SpinChainParams {
    /// Homogeneous chain with coupling `lambda` on every bond and field `delta` on every site.
    pub fn homogeneous(m: usize, l: usize, lambda: f64, delta: f64) -> Result<Self, SpinChainError> {
        let n = 2 * m + l + 1;
        Self::disordered(m, l, vec![lambda; n - 1], vec![delta; n])
    }

    /// Chain with per-bond couplings `λ_{x,x+1}` (`x = -m..m+L-1`) and per-site fields `δ_x`.
    pub fn disordered(
        m: usize,
        l: usize,
        couplings: Vec<f64>,
        fields: Vec<f64>,
    ) -> Result<Self, SpinChainError> {
        Self::with_cap(m, l, couplings, fields, DEFAULT_SITE_CAP)
    }

    pub fn with_cap(
        m: usize,
        l: usize,
        couplings: Vec<f64>,
        fields: Vec<f64>,
        cap: usize,
    ) -> Result<Self, SpinChainError> {
        let n = 2 * m + l + 1;
        if n > cap {
            return Err(SpinChainError::TooManySites { n, cap });
        }
        if fields.len() != n {
            return Err(SpinChainError::LengthMismatch {
                what: "fields",
                expected: n,
                got: fields.len(),
            });
        }
        if couplings.len() != n - 1 {
            return Err(SpinChainError::LengthMismatch {
                what: "couplings",
                expected: n - 1,
                got: couplings.len(),
            });
        }
        check_positive("couplings", &couplings)?;
        check_positive("fields", &fields)?;
        Ok(Self {
            m,
            block_len: l,
            couplings,
            fields,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Block length `L`; the block is `[0, L]` and has `L + 1` sites.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn n_sites(&self) -> usize {
        self.fields.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Bit index of site `x`.
    pub fn bit_of(&self, site: i64) -> Option<usize> {
        let b = site + self.m as i64;
        (b >= 0 && (b as usize) < self.n_sites()).then_some(b as usize)
    }

    /// Bit range of the block `[0, L]`.
    pub fn block_bits(&self) -> std::ops::Range<usize> {
        self.m..self.m + self.block_len + 1
    }

    /// Multiply every intensity by `eta`.
    pub fn scaled(&self, eta: f64) -> Result<Self, SpinChainError> {
        Self::disordered(
            self.m,
            self.block_len,
            self.couplings.iter().map(|c| c * eta).collect(),
            self.fields.iter().map(|f| f * eta).collect(),
        )
    }
}

fn check_positive(what: &'static str, values: &[f64]) -> Result<(), SpinChainError> {
    match values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        Some((index, &value)) => Err(SpinChainError::NonPositive { what, index, value }),
        None => Ok(()),
    }
}

/// Ground-state expectation `⟨ψ|σ³_x σ³_y|ψ⟩` for sites given as bit indices.
pub fn zz_correlation(psi: &StateVector, bit_x: usize, bit_y: usize) -> f64 {
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let sx = 1 - 2 * ((i >> bit_x) & 1) as i32;
            let sy = 1 - 2 * ((i >> bit_y) & 1) as i32;
            (sx * sy) as f64 * a.norm_sqr()
        })
        .sum()
}

/// Reduced density matrix of the block `[0, L]` in the ground state of `params`.
pub fn block_density(params: &SpinChainParams, tol: f64) -> Result<DensityMatrix, SpinChainError> {
    let h = build_hamiltonian(params)?;
    let gs = ground_state(&h, tol)?;
    reduced_density(&gs.state, params.block_bits())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_intensities() {
        assert!(matches!(
            SpinChainParams::homogeneous(1, 0, 0.0, 1.0),
            Err(SpinChainError::NonPositive { .. })
        ));
        assert!(matches!(
            SpinChainParams::homogeneous(1, 0, 1.0, -1.0),
            Err(SpinChainError::NonPositive { .. })
        ));
    }

    #[test]
    fn enforces_site_cap() {
        assert!(matches!(
            SpinChainParams::homogeneous(10, 0, 1.0, 1.0),
            Err(SpinChainError::TooManySites { n: 21, cap: 20 })
        ));
    }

    #[test]
    fn length_checks() {
        assert!(matches!(
            SpinChainParams::disordered(1, 0, vec![1.0], vec![1.0; 3]),
            Err(SpinChainError::LengthMismatch { what: "couplings", .. })
        ));
    }

    #[test]
    fn site_bit_mapping() {
        let p = SpinChainParams::homogeneous(2, 3, 1.0, 1.0).unwrap();
        assert_eq!(p.n_sites(), 8);
        assert_eq!(p.bit_of(-2), Some(0));
        assert_eq!(p.bit_of(0), Some(2));
        assert_eq!(p.bit_of(5), Some(7));
        assert_eq!(p.bit_of(6), None);
        assert_eq!(p.block_bits(), 2..6);
    }
}
