//! Shared fixtures for the benchmark suite.

use quasiwork_core::rng::{random_hermitian, random_state_vector, random_unitary};
use quasiwork_core::{DensityMatrix, HamiltonianProcess, SplitMix64};

/// Deterministic process used by every benchmark.
pub fn fixture_process(seed: u64, dim: usize) -> HamiltonianProcess {
    let mut rng = SplitMix64::new(seed);
    let h0 = random_hermitian(&mut rng, dim);
    let h1 = random_hermitian(&mut rng, dim);
    let u = random_unitary(&mut rng, dim);
    let rho = DensityMatrix::from_pure(&random_state_vector(&mut rng, dim)).unwrap();
    HamiltonianProcess::new(h0, h1, u, rho).unwrap()
}
