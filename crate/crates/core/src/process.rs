//! Driven protocols on a finite time window.
//!
//! A protocol is either a piecewise-constant Hamiltonian schedule, whose
//! time-ordered propagator is the product of per-segment exponentials
//! (later segments applied on the left), or an explicitly supplied
//! unitary. Everything uses hbar = 1; energies and times are
//! dimensionless in files.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spectral::{
    exp_i_hermitian, hermitian_eig, HermitianOperator, UnitaryOperator,
};

/// Unit-trace positive matrix, validated on construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, &Tolerances::default())
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let herm = HermitianOperator::with_tolerance(matrix, tol.herm_tol).map_err(|e| {
            Error::InvalidDensityMatrix {
                reason: e.to_string(),
            }
        })?;
        let trace = herm.matrix().trace();
        if (trace.re - 1.0).abs() > tol.density_tol || trace.im.abs() > tol.density_tol {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("trace is {trace} instead of 1"),
            });
        }
        let eig = hermitian_eig(&herm, 0.0)?;
        let lowest = eig.eigenvalues()[0];
        if lowest < -tol.density_tol {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("negative eigenvalue {lowest}"),
            });
        }
        Ok(Self { matrix: herm })
    }

    /// `|psi><psi|` from (not necessarily normalized) amplitudes.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr <= 0.0 || !norm_sqr.is_finite() {
            return Err(Error::InvalidDensityMatrix {
                reason: "pure state vector has zero or non-finite norm".into(),
            });
        }
        let dim = amplitudes.len();
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm_sqr;
            }
        }
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: HermitianOperator::new(
                ComplexMatrix::identity(dim).scaled(1.0 / dim as f64),
            )
            .expect("scaled identity is Hermitian"),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(rho^2)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).trace().re
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(rho: DensityMatrix) -> ComplexMatrix {
        rho.matrix.into_matrix()
    }
}

/// Piecewise-constant Hamiltonian schedule over `[0, tau]`.
#[derive(Clone, Debug)]
pub struct HamiltonianSchedule {
    segments: Vec<(f64, HermitianOperator)>,
}

impl HamiltonianSchedule {
    pub fn new(segments: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptySchedule);
        }
        let dim = segments[0].1.dim();
        for (dt, h) in &segments {
            if *dt < 0.0 || !dt.is_finite() {
                return Err(Error::NegativeDuration(*dt));
            }
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: h.dim(),
                });
            }
        }
        Ok(Self { segments })
    }

    /// Discretizes `H(t) = (1 - t/tau) H0 + (t/tau) H1` into equal segments
    /// sampled at the segment midpoints.
    pub fn linear_ramp(
        h0: &HermitianOperator,
        h1: &HermitianOperator,
        tau: f64,
        segments: usize,
    ) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::DimensionMismatch {
                left: h0.dim(),
                right: h1.dim(),
            });
        }
        if segments == 0 {
            return Err(Error::EmptySchedule);
        }
        if tau < 0.0 || !tau.is_finite() {
            return Err(Error::NegativeDuration(tau));
        }
        let dt = tau / segments as f64;
        let mut out = Vec::with_capacity(segments);
        for m in 0..segments {
            let t_mid = (m as f64 + 0.5) * dt;
            let s = if tau > 0.0 { t_mid / tau } else { 0.0 };
            let mix = &h0.matrix().scaled(1.0 - s) + &h1.matrix().scaled(s);
            out.push((dt, HermitianOperator::new(mix)?));
        }
        Self::new(out)
    }

    pub fn segments(&self) -> &[(f64, HermitianOperator)] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|(dt, _)| dt).sum()
    }

    pub fn dim(&self) -> usize {
        self.segments[0].1.dim()
    }

    /// Time-ordered propagator: the product of per-segment exponentials,
    /// later segments composed on the left.
    pub fn propagator(&self) -> Result<UnitaryOperator> {
        let mut u = ComplexMatrix::identity(self.dim());
        for (dt, h) in &self.segments {
            let step = exp_i_hermitian(h, *dt)?;
            u = step.matrix() * &u;
        }
        UnitaryOperator::new(u)
    }
}

/// `U' A U`: the observable `A` pulled back through the evolution `u`.
pub fn heisenberg(
    observable: &HermitianOperator,
    u: &UnitaryOperator,
) -> Result<HermitianOperator> {
    if observable.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: observable.dim(),
            right: u.dim(),
        });
    }
    u.adjoint()
        .conjugate(observable.matrix())
        .and_then(HermitianOperator::new)
}

/// Gibbs state `exp(-beta H) / Tr(exp(-beta H))`, assembled in the
/// eigenbasis of `H` (so it commutes with `H` exactly up to rounding).
pub fn thermal_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    let eig = hermitian_eig(h, Tolerances::default().degeneracy_tol)?;
    let ground = eig.eigenvalues()[0];
    let mut z = 0.0;
    let mut acc = ComplexMatrix::zeros(h.dim());
    for (e, p) in eig.eigenvalues().iter().zip(eig.projectors()) {
        let boltzmann = (-(beta) * (e - ground)).exp();
        z += boltzmann * p.matrix().trace().re;
        acc = &acc + &p.matrix().scaled(boltzmann);
    }
    DensityMatrix::new(acc.scaled(1.0 / z))
}

/// A driven protocol together with its initial state: the endpoint
/// Hamiltonians, the propagator over the full window, and rho.
#[derive(Clone, Debug)]
pub struct HamiltonianProcess {
    h_initial: HermitianOperator,
    h_final: HermitianOperator,
    propagator: UnitaryOperator,
    initial_state: DensityMatrix,
}

impl HamiltonianProcess {
    pub fn new(
        h_initial: HermitianOperator,
        h_final: HermitianOperator,
        propagator: UnitaryOperator,
        initial_state: DensityMatrix,
    ) -> Result<Self> {
        let dim = h_initial.dim();
        for other in [h_final.dim(), propagator.dim(), initial_state.dim()] {
            if other != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: other,
                });
            }
        }
        Ok(Self {
            h_initial,
            h_final,
            propagator,
            initial_state,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_initial.dim()
    }

    pub fn h_initial(&self) -> &HermitianOperator {
        &self.h_initial
    }

    pub fn h_final(&self) -> &HermitianOperator {
        &self.h_final
    }

    pub fn propagator(&self) -> &UnitaryOperator {
        &self.propagator
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    /// The final Hamiltonian pulled back to the initial time.
    pub fn h_final_heisenberg(&self) -> Result<HermitianOperator> {
        heisenberg(&self.h_final, &self.propagator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_hermitian, SplitMix64};

    fn hadamard() -> UnitaryOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        UnitaryOperator::new(ComplexMatrix::from_real(2, &[s, s, s, -s]).unwrap()).unwrap()
    }

    fn diag01() -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_duration_schedule_gives_identity() {
        let mut rng = SplitMix64::new(1);
        let h = random_hermitian(&mut rng, 3);
        let schedule =
            HamiltonianSchedule::new(vec![(0.0, h.clone()), (0.0, h)]).unwrap();
        let u = schedule.propagator().unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(3)) <= 1e-14);
    }

    #[test]
    fn single_segment_collapses_to_one_exponential() {
        let mut rng = SplitMix64::new(2);
        let h = random_hermitian(&mut rng, 3);
        let tau = 0.7;
        let schedule = HamiltonianSchedule::new(vec![(tau, h.clone())]).unwrap();
        let u = schedule.propagator().unwrap();
        let direct = exp_i_hermitian(&h, tau).unwrap();
        assert!(u.matrix().max_abs_diff(direct.matrix()) <= 1e-12);
    }

    #[test]
    fn ramp_refinement_is_cauchy() {
        let mut rng = SplitMix64::new(3);
        let h0 = random_hermitian(&mut rng, 3);
        let h1 = random_hermitian(&mut rng, 3);
        let tau = 1.3;
        let u16 = HamiltonianSchedule::linear_ramp(&h0, &h1, tau, 16)
            .unwrap()
            .propagator()
            .unwrap();
        let u32 = HamiltonianSchedule::linear_ramp(&h0, &h1, tau, 32)
            .unwrap()
            .propagator()
            .unwrap();
        let u64_ = HamiltonianSchedule::linear_ramp(&h0, &h1, tau, 64)
            .unwrap()
            .propagator()
            .unwrap();
        let d1 = (u16.matrix() - u32.matrix()).frobenius_norm();
        let d2 = (u32.matrix() - u64_.matrix()).frobenius_norm();
        assert!(d2 < d1, "refinement differences not decreasing: {d1} vs {d2}");
    }

    #[test]
    fn commuting_segments_match_single_exponential() {
        let mut rng = SplitMix64::new(4);
        let h = random_hermitian(&mut rng, 4);
        let dts = [0.2, 0.5, 0.1];
        let schedule =
            HamiltonianSchedule::new(dts.iter().map(|&dt| (dt, h.clone())).collect()).unwrap();
        let u = schedule.propagator().unwrap();
        let direct = exp_i_hermitian(&h, dts.iter().sum()).unwrap();
        assert!(u.matrix().max_abs_diff(direct.matrix()) <= 1e-9);
    }

    #[test]
    fn propagator_is_unitary_for_many_segments() {
        let mut rng = SplitMix64::new(5);
        for n_seg in [1, 7, 64] {
            let segments = (0..n_seg)
                .map(|_| (rng.uniform(), random_hermitian(&mut rng, 3)))
                .collect();
            let u = HamiltonianSchedule::new(segments)
                .unwrap()
                .propagator()
                .unwrap();
            assert!(u.matrix().unitarity_defect() <= 1e-10);
        }
    }

    #[test]
    fn heisenberg_with_identity_is_noop() {
        let a = diag01();
        let out = heisenberg(&a, &UnitaryOperator::identity(2)).unwrap();
        assert!(out.matrix().max_abs_diff(a.matrix()) == 0.0);
    }

    #[test]
    fn heisenberg_hadamard_hand_value() {
        // H' diag(0,1) H = (I - sigma_x)/2.
        let out = heisenberg(&diag01(), &hadamard()).unwrap();
        let expect = ComplexMatrix::from_real(2, &[0.5, -0.5, -0.5, 0.5]).unwrap();
        assert!(out.matrix().max_abs_diff(&expect) <= 1e-14);
    }

    #[test]
    fn heisenberg_preserves_spectrum() {
        let mut rng = SplitMix64::new(6);
        let a = random_hermitian(&mut rng, 4);
        let u = crate::rng::random_unitary(&mut rng, 4);
        let moved = heisenberg(&a, &u).unwrap();
        let ev_a = hermitian_eig(&a, 1e-9).unwrap();
        let ev_m = hermitian_eig(&moved, 1e-9).unwrap();
        assert_eq!(ev_a.len(), ev_m.len());
        for (x, y) in ev_a.eigenvalues().iter().zip(ev_m.eigenvalues()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn thermal_at_beta_zero_is_maximally_mixed() {
        let mut rng = SplitMix64::new(7);
        let h = random_hermitian(&mut rng, 4);
        let rho = thermal_state(&h, 0.0).unwrap();
        assert!(rho
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(4).matrix())
            <= 1e-12);
    }

    #[test]
    fn thermal_at_large_beta_approaches_ground_state() {
        let h = diag01();
        let rho = thermal_state(&h, 500.0).unwrap();
        let ground = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(rho.matrix().max_abs_diff(&ground) <= 1e-12);
    }

    #[test]
    fn thermal_commutes_with_hamiltonian() {
        let mut rng = SplitMix64::new(8);
        let h = random_hermitian(&mut rng, 4);
        let rho = thermal_state(&h, 1.0).unwrap();
        let commutator = &(rho.matrix() * h.matrix()) - &(h.matrix() * rho.matrix());
        assert!(commutator.max_abs_entry() <= 1e-10);
    }

    #[test]
    fn density_matrix_rejects_wrong_trace() {
        let m = ComplexMatrix::from_real(2, &[0.7, 0.0, 0.0, 0.7]).unwrap();
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::InvalidDensityMatrix { .. })
        ));
    }

    #[test]
    fn density_matrix_rejects_negative_eigenvalue() {
        let m = ComplexMatrix::from_real(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::InvalidDensityMatrix { .. })
        ));
    }

    #[test]
    fn pure_state_has_unit_purity() {
        let mut rng = SplitMix64::new(9);
        let v = crate::rng::random_state_vector(&mut rng, 3);
        let rho = DensityMatrix::from_pure(&v).unwrap();
        assert!((rho.purity() - 1.0).abs() <= 1e-12);
        assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-12);
    }
}
