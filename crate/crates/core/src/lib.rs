//! Work quasiprobability distributions for driven finite-dimensional
//! quantum systems.
//!
//! The crate builds the discrete work distributions of a driven protocol —
//! the one-parameter quasiprobability family `p_q`, the two-measurement
//! distribution, and their time-reversed counterparts in both the reversed
//! and the operational sense — and verifies the structural relations
//! between them by exact desk-scale numerics: the reversal symmetry
//! `p_bar(w) = p(-w)`, the reductions to the two-measurement scheme for
//! incoherent states, the endpoint coincidence of the two backward notions
//! and the generic gap between them away from the endpoints, the measure
//! axioms of the underlying event functional, and the detector protocol
//! that reads characteristic functions out of an ancilla coherence.
//!
//! Everything is plain dense linear algebra on immutable values: all types
//! here are safe to share across threads, and every construction is a pure
//! function of its inputs.

pub mod config;
pub mod detector;
pub mod distribution;
pub mod error;
pub mod events;
pub mod matrix;
pub mod process;
pub mod reversal;
pub mod rng;
pub mod scenario;
pub mod spectral;

pub use num_complex::Complex64;

pub use config::Tolerances;
pub use detector::{
    chi_backward_operational, chi_from_spec, chi_q_operational, detector_coherence_ratio,
    kicked_propagator, DetectorSpec, KickedEvolution,
};
pub use distribution::{
    distributions_equal, max_weight_defect, pq_distribution, pq_raw_atoms, three_event_weights,
    tpm_distribution, WorkAtom, WorkDistribution,
};
pub use error::{Error, Result};
pub use events::{
    check_axioms, check_axioms_with, dephase, forward_events, forward_events_with, is_incoherent,
    quasiprob_v, single_event_prob, tpm_joint, AxiomReport, Effect, EventSequence, ForwardEvents,
};
pub use matrix::ComplexMatrix;
pub use process::{
    heisenberg, thermal_state, DensityMatrix, HamiltonianProcess, HamiltonianSchedule,
};
pub use reversal::{
    backward_pq, backward_tpm, find_class_witness, operational_backward_pq, reverse,
    verify_symmetry, BackwardProcess, ClassWitness, SymmetryReport, TpmReductionStatus, Verdict,
};
pub use rng::{SplitMix64, RNG_ALGORITHM};
pub use scenario::{
    generate_scenario, run_chi, run_distribution, run_verify, BuiltScenario, ChiRow, ChiTable,
    DistributionBundle, DistributionSet, ProcessSpec, Scenario, SegmentSpec, StateSpec,
    VerifyReport, WitnessOutcome,
};
pub use spectral::{
    exp_i_hermitian, hermitian_eig, HermitianOperator, SpectralDecomposition, UnitaryOperator,
};
