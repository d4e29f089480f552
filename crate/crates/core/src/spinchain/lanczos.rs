use nalgebra::{DMatrix, SymmetricEigen};

use super::density::StateVector;
use super::hamiltonian::LinearOperator;
use super::SpinChainError;

/// Settings for the restarted Lanczos solver.
#[derive(Debug, Clone)]
pub struct LanczosConfig {
    /// Residual bound `‖Hψ − Eψ‖` at convergence.
    pub tol: f64,
    /// Krylov vectors per restart, before the memory cap is applied.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Upper bound on the bytes held by stored Krylov vectors.
    pub memory_budget: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            krylov_dim: 48,
            max_restarts: 200,
            memory_budget: 256 << 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: StateVector,
    pub energy: f64,
    pub residual: f64,
    /// Total operator applications.
    pub iterations: usize,
}

pub fn ground_state<H: LinearOperator + ?Sized>(
    h: &H,
    tol: f64,
) -> Result<GroundState, SpinChainError> {
    ground_state_with(
        h,
        &LanczosConfig {
            tol,
            ..Default::default()
        },
    )
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
///
/// Starts from the normalized all-ones vector, which overlaps the
/// Perron–Frobenius ground state of any stoquastic Hamiltonian, and restarts
/// from the current Ritz vector. Deterministic for a given operator.
pub fn ground_state_with<H: LinearOperator + ?Sized>(
    h: &H,
    cfg: &LanczosConfig,
) -> Result<GroundState, SpinChainError> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(SpinChainError::BadTolerance(cfg.tol));
    }
    let dim = h.dim();
    let by_memory = (cfg.memory_budget / (8 * dim.max(1))).max(4);
    let k = cfg.krylov_dim.min(by_memory).min(dim).max(1);

    let mut x = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut hx = vec![0.0; dim];
    let mut applications = 0;
    let mut residual = f64::INFINITY;

    for _ in 0..=cfg.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::with_capacity(k);
        let mut beta: Vec<f64> = Vec::with_capacity(k);
        let mut w = vec![0.0; dim];
        loop {
            let j = basis.len() - 1;
            h.apply(&basis[j], &mut w);
            applications += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    axpy(-c, v, &mut w);
                }
            }
            let b = norm(&w);
            if basis.len() == k || b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|wi| wi / b).collect());
        }

        let r = alpha.len();
        let mut t = DMatrix::<f64>::zeros(r, r);
        for i in 0..r {
            t[(i, i)] = alpha[i];
            if i + 1 < r {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta = eig.eigenvalues[order[0]];
        let y = eig.eigenvectors.column(order[0]);

        x.iter_mut().for_each(|xi| *xi = 0.0);
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut x);
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|xi| *xi /= nx);

        h.apply(&x, &mut hx);
        applications += 1;
        let energy = dot(&x, &hx);
        residual = hx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - energy * b).powi(2))
            .sum::<f64>()
            .sqrt();

        if residual <= cfg.tol {
            if r >= 2 {
                let gap = eig.eigenvalues[order[1]] - theta;
                if gap < 100.0 * cfg.tol {
                    return Err(SpinChainError::NearDegenerate { gap });
                }
            }
            // fix the global phase so the largest component is positive
            let imax = (0..dim)
                .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
                .unwrap_or(0);
            if x[imax] < 0.0 {
                x.iter_mut().for_each(|xi| *xi = -*xi);
            }
            return Ok(GroundState {
                state: StateVector::from_real(&x)?,
                energy,
                residual,
                iterations: applications,
            });
        }
    }
    Err(SpinChainError::NoConvergence {
        iterations: applications,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
