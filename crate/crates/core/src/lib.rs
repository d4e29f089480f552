//! Transverse-field Ising chain alongside its continuum random-cluster representation.
//!
//! * [`spinchain`]: exact diagonalization, reduced density matrices, entanglement entropy.
//! * [`continuum`]: space-time boxes, death/bridge configurations, clusters.
//! * [`rcsampler`]: Poisson and Metropolis–Hastings samplers with Monte Carlo estimators.
//! * [`fkising`]: spins on clusters, slit statistics, quantum/classical cross-checks.
//! * [`bounds`]: closed-form constants and inequalities.
//! * [`cli`]: experiment configuration and orchestration.

pub mod spinchain;
pub mod continuum;
pub mod rcsampler;
pub mod stats;
pub mod bounds;
pub mod fkising;
pub mod cli;
