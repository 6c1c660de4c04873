//! Central tolerance configuration.
//!
//! Every numerical threshold used by the crate lives here so that a scenario
//! file can override any of them in one place. The defaults are the values
//! the validation and acceptance suites are pinned to.

use serde::{Deserialize, Serialize};

/// Tolerance record shared by construction, comparison, and verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Max-entry norm allowed for `A - A'` when validating Hermitian input.
    pub herm_tol: f64,
    /// Max-entry norm allowed for `U'U - I` when validating unitaries.
    pub uni_tol: f64,
    /// Eigenvalue gaps at or below this are merged into one spectral cluster.
    pub degeneracy_tol: f64,
    /// Completeness/orthogonality slack for projector families.
    pub family_tol: f64,
    /// Allowed defect when re-assembling an operator from its decomposition.
    pub reconstruction_tol: f64,
    /// Eigenvalue floor and trace slack for density matrices.
    pub density_tol: f64,
    /// Work supports closer than this collapse into a single atom.
    pub merge_tol: f64,
    /// Atoms with |weight| below this are dropped after merging.
    pub weight_prune_tol: f64,
    /// Comparison slack for the measure-axiom checks.
    pub axiom_tol: f64,
    /// Allowed deviation of a distribution's total weight from 1.
    pub normalization_tol: f64,
    /// Atom-wise slack for the work reversal symmetry check.
    pub symmetry_tol: f64,
    /// Atom-wise slack for the backward-class coincidence at q = 0, 1.
    pub endpoint_tol: f64,
    /// A counterexample search succeeds once a defect exceeds this.
    pub witness_threshold: f64,
    /// Allowed gap between the detector simulation and the closed formula.
    pub detector_tol: f64,
    /// Allowed gap between operational and direct characteristic functions.
    pub fourier_tol: f64,
    /// Jacobi sweep stops once every off-diagonal entry is at or below this.
    pub jacobi_off_diag: f64,
    /// Jacobi sweep cap; exceeding it signals pathological input.
    pub jacobi_max_sweeps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-12,
            uni_tol: 1e-10,
            degeneracy_tol: 1e-9,
            family_tol: 1e-10,
            reconstruction_tol: 1e-9,
            density_tol: 1e-10,
            merge_tol: 1e-9,
            weight_prune_tol: 1e-12,
            axiom_tol: 1e-9,
            normalization_tol: 1e-9,
            symmetry_tol: 1e-10,
            endpoint_tol: 1e-10,
            witness_threshold: 1e-6,
            detector_tol: 1e-9,
            fourier_tol: 1e-8,
            jacobi_off_diag: 1e-13,
            jacobi_max_sweeps: 100,
        }
    }
}
