use nalgebra::DMatrix;

use super::{SpinChainError, SpinChainParams};

/// Largest chain for which an explicit dense matrix is built.
pub const DENSE_SITE_LIMIT: usize = 12;

/// A real symmetric operator known only through its action on vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Matrix-free transverse-field Ising Hamiltonian in the σ³ product basis.
///
/// The diagonal (σ³σ³ bond energies) is tabulated once; the σ¹ terms flip a
/// single bit each.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n_sites: usize,
    diagonal: Vec<f64>,
    fields: Vec<f64>,
}

pub fn build_hamiltonian(params: &SpinChainParams) -> Result<Hamiltonian, SpinChainError> {
    let n = params.n_sites();
    let dim = 1usize << n;
    let couplings = params.couplings();
    let diagonal = (0..dim)
        .map(|i| {
            -0.5 * couplings
                .iter()
                .enumerate()
                .map(|(b, lam)| {
                    let aligned = ((i >> b) & 1) == ((i >> (b + 1)) & 1);
                    if aligned {
                        *lam
                    } else {
                        -*lam
                    }
                })
                .sum::<f64>()
        })
        .collect();
    Ok(Hamiltonian {
        n_sites: n,
        diagonal,
        fields: params.fields().to_vec(),
    })
}

impl Hamiltonian {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Explicit matrix, available up to [`DENSE_SITE_LIMIT`] sites.
    pub fn dense(&self) -> Result<DMatrix<f64>, SpinChainError> {
        if self.n_sites > DENSE_SITE_LIMIT {
            return Err(SpinChainError::DenseTooLarge {
                n: self.n_sites,
                limit: DENSE_SITE_LIMIT,
            });
        }
        let dim = self.diagonal.len();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = self.diagonal[i];
            for (b, d) in self.fields.iter().enumerate() {
                m[(i, i ^ (1 << b))] -= d;
            }
        }
        Ok(m)
    }
}

impl LinearOperator for Hamiltonian {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = self.diagonal[i] * x[i];
            for (b, d) in self.fields.iter().enumerate() {
                acc -= d * x[i ^ (1 << b)];
            }
            *yi = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(params: &SpinChainParams) -> Vec<f64> {
        let h = build_hamiltonian(params).unwrap().dense().unwrap();
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn single_site_is_minus_sigma_x() {
        let p = SpinChainParams::homogeneous(0, 0, 1.0, 1.0).unwrap();
        let h = build_hamiltonian(&p).unwrap().dense().unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        let ev = spectrum(&p);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_sites_weak_coupling_is_product_limit() {
        let p = SpinChainParams::homogeneous(0, 1, 1e-12, 1.0).unwrap();
        assert!((spectrum(&p)[0] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn two_sites_ground_energy_matches_block_diagonalization() {
        // symmetric sector eigenvalues ±sqrt(λ²/4 + 4δ²)
        let (lam, del) = (2.0_f64, 1.0_f64);
        let p = SpinChainParams::homogeneous(0, 1, lam, del).unwrap();
        let e0 = -(lam * lam / 4.0 + 4.0 * del * del).sqrt();
        assert!((spectrum(&p)[0] - e0).abs() < 1e-12);
        assert!((e0 + 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matrix_free_apply_matches_dense() {
        let p = SpinChainParams::disordered(1, 1, vec![0.3, 1.1, 0.7], vec![1.0, 0.5, 2.0, 0.9])
            .unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let dense = h.dense().unwrap();
        assert_eq!(dense, dense.transpose());
        let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut y1 = vec![0.0; 16];
        let mut y2 = vec![0.0; 16];
        h.apply(&x, &mut y1);
        dense.apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn dense_refused_above_limit() {
        let p = SpinChainParams::homogeneous(6, 0, 1.0, 1.0).unwrap();
        assert!(matches!(
            build_hamiltonian(&p).unwrap().dense(),
            Err(SpinChainError::DenseTooLarge { n: 13, .. })
        ));
    }
}
