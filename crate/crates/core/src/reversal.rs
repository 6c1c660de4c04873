//! Time reversal of a driven process and of its work distributions.
//!
//! The backward process carries the conjugated data
//! `rho_bar = U rho U'`, `P_bar_i = U P_i U'`, `P_bar'_k = U P'_k U'`, and
//! the inverse evolution `U_bar = U'`. Quasiprobability weights are
//! invariant under this conjugation, and declaring work odd under reversal
//! yields the symmetry `p_bar(w) = p(-w)`.
//!
//! Two distinct backward distributions appear for the one-parameter family:
//! the reversed forward distribution `p_bar_q` (always the mirror of `p_q`)
//! and the operational class `p_tilde_q`, which applies the forward
//! construction natively to the backward data. They coincide for q = 0, 1
//! and generically differ otherwise; the witness search below exhibits the
//! gap.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::distribution::{
    max_weight_defect, pq_distribution, three_event_weights, WorkDistribution,
};
use crate::error::Result;
use crate::events::{forward_events_with, is_incoherent, ForwardEvents};
use crate::matrix::ComplexMatrix;
use crate::process::{DensityMatrix, HamiltonianProcess};
use crate::rng::{random_hermitian, random_state_vector, random_unitary, SplitMix64};
use crate::spectral::{SpectralDecomposition, UnitaryOperator};

/// Conjugated state, event families, and inverse evolution of a process.
#[derive(Clone, Debug)]
pub struct BackwardProcess {
    rho_bar: DensityMatrix,
    pi_bar: SpectralDecomposition,
    pi_bar_prime: SpectralDecomposition,
    u_bar: UnitaryOperator,
}

impl BackwardProcess {
    /// Evolved initial state `U rho U'`.
    pub fn rho_bar(&self) -> &DensityMatrix {
        &self.rho_bar
    }

    /// Conjugated initial-energy events `(e_i, U P_i U')`.
    pub fn pi_bar(&self) -> &SpectralDecomposition {
        &self.pi_bar
    }

    /// Conjugated final-energy events `(e'_k, U P'_k U')`; these equal the
    /// plain eigenprojectors of the final Hamiltonian.
    pub fn pi_bar_prime(&self) -> &SpectralDecomposition {
        &self.pi_bar_prime
    }

    /// Backward evolution `U'`.
    pub fn u_bar(&self) -> &UnitaryOperator {
        &self.u_bar
    }

    /// Whether `rho_bar` is diagonal with respect to the conjugated
    /// final-energy family (the backward notion of incoherence).
    pub fn is_incoherent(&self, tol: f64) -> bool {
        is_incoherent(&self.rho_bar, self.pi_bar_prime.projectors(), tol)
    }

    /// Views the backward data as a forward process: initial Hamiltonian
    /// `H(tau)`, final Hamiltonian `H(0)`, evolution `U'`, state `rho_bar`.
    /// The initial events are `pi_bar_prime` and the pulled-back final
    /// events are `pi_bar`.
    pub fn as_forward(
        &self,
        h_final_fwd: &crate::spectral::HermitianOperator,
        h_initial_fwd: &crate::spectral::HermitianOperator,
    ) -> Result<(HamiltonianProcess, ForwardEvents)> {
        let proc = HamiltonianProcess::new(
            h_final_fwd.clone(),
            h_initial_fwd.clone(),
            self.u_bar.clone(),
            self.rho_bar.clone(),
        )?;
        let ev = ForwardEvents::new(self.pi_bar_prime.clone(), self.pi_bar.clone());
        Ok((proc, ev))
    }
}

/// Conjugates a process and its event families into the backward process.
pub fn reverse(proc: &HamiltonianProcess, ev: &ForwardEvents) -> Result<BackwardProcess> {
    let u = proc.propagator();
    let rho_bar = DensityMatrix::new(u.conjugate(proc.initial_state().matrix())?)?;
    let pi_bar = ev.initial().transformed_by(u)?;
    let pi_bar_prime = ev.final_heisenberg().transformed_by(u)?;
    Ok(BackwardProcess {
        rho_bar,
        pi_bar,
        pi_bar_prime,
        u_bar: u.adjoint(),
    })
}

/// Reversed distribution of the one-parameter family: atoms at
/// `q e_i + (1 - q) e_j - e'_k` with weights
/// `Re Tr(P_bar_i rho_bar P_bar_j P_bar'_k)`.
pub fn backward_pq(b: &BackwardProcess, q: f64, merge_tol: f64) -> Result<WorkDistribution> {
    let weights = three_event_weights(&b.pi_bar, &b.pi_bar, &b.pi_bar_prime, &b.rho_bar)?;
    let e = b.pi_bar.eigenvalues();
    let e_final = b.pi_bar_prime.eigenvalues();
    let mut raw = Vec::with_capacity(e.len() * e.len() * e_final.len());
    for (i, row) in weights.iter().enumerate() {
        for (j, col) in row.iter().enumerate() {
            for (k, &weight) in col.iter().enumerate() {
                raw.push((q * e[i] + (1.0 - q) * e[j] - e_final[k], weight));
            }
        }
    }
    Ok(WorkDistribution::from_raw_atoms(raw, merge_tol))
}

/// Backward two-measurement distribution: first measurement in the
/// conjugated final-energy basis, atoms at `e_i - e'_k` with probabilities
/// `Tr(P_bar'_k rho_bar P_bar'_k P_bar_i)`.
pub fn backward_tpm(b: &BackwardProcess, merge_tol: f64) -> Result<WorkDistribution> {
    let weights = three_event_weights(&b.pi_bar_prime, &b.pi_bar_prime, &b.pi_bar, &b.rho_bar)?;
    let e = b.pi_bar.eigenvalues();
    let e_final = b.pi_bar_prime.eigenvalues();
    let mut raw = Vec::with_capacity(e.len() * e_final.len());
    for (k, row) in weights.iter().enumerate() {
        for (i, &weight) in row[k].iter().enumerate() {
            raw.push((e[i] - e_final[k], weight));
        }
    }
    Ok(WorkDistribution::from_raw_atoms(raw, merge_tol))
}

/// Operational backward class: the forward construction applied to the
/// backward data. Atoms at `e_i - q e'_k - (1 - q) e'_l` with weights
/// `Re Tr(P_bar'_k rho_bar P_bar'_l P_bar_i)`.
pub fn operational_backward_pq(
    b: &BackwardProcess,
    q: f64,
    merge_tol: f64,
) -> Result<WorkDistribution> {
    let weights = three_event_weights(&b.pi_bar_prime, &b.pi_bar_prime, &b.pi_bar, &b.rho_bar)?;
    let e = b.pi_bar.eigenvalues();
    let e_final = b.pi_bar_prime.eigenvalues();
    let mut raw = Vec::with_capacity(e.len() * e_final.len() * e_final.len());
    for (k, row) in weights.iter().enumerate() {
        for (l, col) in row.iter().enumerate() {
            for (i, &weight) in col.iter().enumerate() {
                raw.push((e[i] - q * e_final[k] - (1.0 - q) * e_final[l], weight));
            }
        }
    }
    Ok(WorkDistribution::from_raw_atoms(raw, merge_tol))
}

/// Verdict of one reversal check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Status of the backward TPM reduction at one `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TpmReductionStatus {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

/// Defects of the reversal checks at one `q`.
///
/// `symmetry_defect` compares `p_bar_q` against the support-negated `p_q`
/// and is expected to vanish for every scenario and every `q`.
/// `class_defect` compares the operational class `p_tilde_q` against
/// `p_bar_q`; it vanishes at q = 0, 1 and is generically nonzero otherwise.
/// `tpm_reduction_backward` reports whether `p_bar_q` matches the backward
/// TPM distribution when `rho_bar` is incoherent (expected only at q = 0, 1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub q: f64,
    pub symmetry_defect: f64,
    pub class_defect: f64,
    pub tpm_reduction_backward: TpmReductionStatus,
    pub verdict: Verdict,
}

/// Runs the reversal checks at one `q` with the given tolerances.
pub fn verify_symmetry(
    proc: &HamiltonianProcess,
    ev: &ForwardEvents,
    q: f64,
    tol: &Tolerances,
) -> Result<SymmetryReport> {
    let b = reverse(proc, ev)?;
    let forward = pq_distribution(proc, ev, q, tol.merge_tol)?;
    let backward = backward_pq(&b, q, tol.merge_tol)?;
    let symmetry_defect = max_weight_defect(&backward, &forward.negate_support());

    let operational = operational_backward_pq(&b, q, tol.merge_tol)?;
    let class_defect = max_weight_defect(&operational, &backward);

    let tpm_reduction_backward = if b.is_incoherent(tol.density_tol) {
        let reference = backward_tpm(&b, tol.merge_tol)?;
        if max_weight_defect(&backward, &reference) <= tol.normalization_tol {
            TpmReductionStatus::Pass
        } else {
            TpmReductionStatus::Fail
        }
    } else {
        TpmReductionStatus::NotApplicable
    };

    Ok(SymmetryReport {
        q,
        symmetry_defect,
        class_defect,
        tpm_reduction_backward,
        verdict: if symmetry_defect <= tol.symmetry_tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

/// A random instance on which the operational backward class and the
/// reversed forward distribution disagree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassWitness {
    pub draw: u32,
    pub q: f64,
    pub defect: f64,
    pub unitary: ComplexMatrix,
    pub state: ComplexMatrix,
}

/// Searches random pure states and random unitaries for a scenario where
/// `p_tilde_q` differs from `p_bar_q` by more than `threshold`.
pub fn find_class_witness(
    dim: usize,
    seed: u64,
    max_draws: u32,
    q: f64,
    threshold: f64,
) -> Result<Option<ClassWitness>> {
    let tol = Tolerances::default();
    let mut rng = SplitMix64::new(seed);
    for draw in 0..max_draws {
        let h0 = random_hermitian(&mut rng, dim);
        let h1 = random_hermitian(&mut rng, dim);
        let u = random_unitary(&mut rng, dim);
        let rho = DensityMatrix::from_pure(&random_state_vector(&mut rng, dim))?;
        let proc = HamiltonianProcess::new(h0, h1, u.clone(), rho.clone())?;
        let ev = forward_events_with(&proc, &tol)?;
        let b = reverse(&proc, &ev)?;
        let defect = max_weight_defect(
            &operational_backward_pq(&b, q, tol.merge_tol)?,
            &backward_pq(&b, q, tol.merge_tol)?,
        );
        if defect > threshold {
            return Ok(Some(ClassWitness {
                draw,
                q,
                defect,
                unitary: u.matrix().clone(),
                state: rho.matrix().clone(),
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    use crate::distribution::distributions_equal;
    use crate::events::forward_events;
    use crate::process::thermal_state;
    use crate::spectral::{hermitian_eig, HermitianOperator};

    const MERGE: f64 = 1e-9;

    fn diag01() -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap())
            .unwrap()
    }

    fn hadamard() -> UnitaryOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        UnitaryOperator::new(ComplexMatrix::from_real(2, &[s, s, s, -s]).unwrap()).unwrap()
    }

    fn plus_state() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap()
    }

    fn hadamard_scenario() -> (HamiltonianProcess, ForwardEvents) {
        let proc =
            HamiltonianProcess::new(diag01(), diag01(), hadamard(), plus_state()).unwrap();
        let ev = forward_events(&proc).unwrap();
        (proc, ev)
    }

    fn random_scenario(seed: u64, dim: usize) -> (HamiltonianProcess, ForwardEvents) {
        let mut rng = SplitMix64::new(seed);
        let h0 = random_hermitian(&mut rng, dim);
        let h1 = random_hermitian(&mut rng, dim);
        let u = random_unitary(&mut rng, dim);
        let rho = if rng.uniform() < 0.5 {
            DensityMatrix::from_pure(&random_state_vector(&mut rng, dim)).unwrap()
        } else {
            thermal_state(&h0, 1.0).unwrap()
        };
        let proc = HamiltonianProcess::new(h0, h1, u, rho).unwrap();
        let ev = forward_events(&proc).unwrap();
        (proc, ev)
    }

    #[test]
    fn identity_evolution_reverses_to_itself() {
        let proc = HamiltonianProcess::new(
            diag01(),
            diag01(),
            UnitaryOperator::identity(2),
            plus_state(),
        )
        .unwrap();
        let ev = forward_events(&proc).unwrap();
        let b = reverse(&proc, &ev).unwrap();
        assert!(b.rho_bar().matrix().max_abs_diff(proc.initial_state().matrix()) <= 1e-14);
        for (p, q) in b.pi_bar().projectors().iter().zip(ev.initial().projectors()) {
            assert!(p.matrix().max_abs_diff(q.matrix()) <= 1e-14);
        }
    }

    #[test]
    fn reversal_preserves_purity() {
        let (proc, ev) = hadamard_scenario();
        let b = reverse(&proc, &ev).unwrap();
        assert!((b.rho_bar().purity() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn conjugated_final_events_are_schrodinger_projectors() {
        for seed in [81, 82] {
            let (proc, ev) = random_scenario(seed, 4);
            let b = reverse(&proc, &ev).unwrap();
            let schrodinger = hermitian_eig(proc.h_final(), 1e-9).unwrap();
            assert_eq!(b.pi_bar_prime().len(), schrodinger.len());
            for (bar, plain) in b
                .pi_bar_prime()
                .projectors()
                .iter()
                .zip(schrodinger.projectors())
            {
                assert!(bar.matrix().max_abs_diff(plain.matrix()) <= 1e-10);
            }
        }
    }

    #[test]
    fn weights_are_invariant_under_reversal() {
        let (proc, ev) = random_scenario(83, 4);
        let b = reverse(&proc, &ev).unwrap();
        let forward = three_event_weights(
            ev.initial(),
            ev.initial(),
            ev.final_heisenberg(),
            proc.initial_state(),
        )
        .unwrap();
        let backward =
            three_event_weights(b.pi_bar(), b.pi_bar(), b.pi_bar_prime(), b.rho_bar()).unwrap();
        for (fi, bi) in forward.iter().zip(&backward) {
            for (fj, bj) in fi.iter().zip(bi) {
                for (fw, bw) in fj.iter().zip(bj) {
                    assert!((fw - bw).abs() <= 1e-12, "{fw} vs {bw}");
                }
            }
        }
    }

    #[test]
    fn backward_pq_of_identity_is_a_point_mass() {
        let proc = HamiltonianProcess::new(
            diag01(),
            diag01(),
            UnitaryOperator::identity(2),
            plus_state(),
        )
        .unwrap();
        let ev = forward_events(&proc).unwrap();
        let b = reverse(&proc, &ev).unwrap();
        for d in [
            backward_pq(&b, 0.5, MERGE).unwrap(),
            backward_tpm(&b, MERGE).unwrap(),
            operational_backward_pq(&b, 0.5, MERGE).unwrap(),
        ] {
            assert_eq!(d.atoms().len(), 1);
            assert!(d.atoms()[0].w.abs() <= 1e-12);
            assert!((d.atoms()[0].weight - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn backward_pq_mirrors_forward_pq() {
        for seed in [84, 85, 86] {
            let (proc, ev) = random_scenario(seed, 3);
            let b = reverse(&proc, &ev).unwrap();
            for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let forward = pq_distribution(&proc, &ev, q, MERGE).unwrap();
                let backward = backward_pq(&b, q, MERGE).unwrap();
                let defect = max_weight_defect(&backward, &forward.negate_support());
                assert!(defect <= 1e-10, "symmetry defect {defect} at q={q}");
            }
        }
    }

    #[test]
    fn hadamard_backward_atoms_at_q_one() {
        let (proc, ev) = hadamard_scenario();
        let b = reverse(&proc, &ev).unwrap();
        let d = backward_pq(&b, 1.0, MERGE).unwrap();
        // Mirror of the forward atoms {(-1, 1/2), (0, 1/2)}.
        assert_eq!(d.atoms().len(), 2);
        assert!((d.atoms()[0].w - 0.0).abs() <= 1e-12);
        assert!((d.atoms()[0].weight - 0.5).abs() <= 1e-12);
        assert!((d.atoms()[1].w - 1.0).abs() <= 1e-12);
        assert!((d.atoms()[1].weight - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn backward_tpm_weights_are_probabilities() {
        let (proc, ev) = random_scenario(87, 4);
        let b = reverse(&proc, &ev).unwrap();
        let d = backward_tpm(&b, MERGE).unwrap();
        assert!((d.total_weight() - 1.0).abs() <= 1e-9);
        for atom in d.atoms() {
            assert!(atom.weight >= -1e-12);
        }
    }

    #[test]
    fn incoherent_backward_state_reduces_operational_class_to_tpm() {
        // rho_bar diagonal in the final-energy basis: build rho = U' rho_bar U.
        let (proc, ev) = {
            let mut rng = SplitMix64::new(88);
            let h0 = random_hermitian(&mut rng, 3);
            let h1 = random_hermitian(&mut rng, 3);
            let u = random_unitary(&mut rng, 3);
            let rho_bar = thermal_state(&h1, 1.0).unwrap();
            let rho = DensityMatrix::new(u.adjoint().conjugate(rho_bar.matrix()).unwrap())
                .unwrap();
            let proc = HamiltonianProcess::new(h0, h1, u, rho).unwrap();
            let ev = forward_events(&proc).unwrap();
            (proc, ev)
        };
        let b = reverse(&proc, &ev).unwrap();
        assert!(b.is_incoherent(1e-9));
        let reference = backward_tpm(&b, MERGE).unwrap();
        for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let tilde = operational_backward_pq(&b, q, MERGE).unwrap();
            assert!(
                distributions_equal(&tilde, &reference, 1e-9),
                "operational class escaped the TPM reduction at q={q}"
            );
        }
        // The reversed forward distribution only reduces at the endpoints.
        for q in [0.0, 1.0] {
            let back = backward_pq(&b, q, MERGE).unwrap();
            assert!(distributions_equal(&back, &reference, 1e-9));
        }
        let back_half = backward_pq(&b, 0.5, MERGE).unwrap();
        assert!(
            max_weight_defect(&back_half, &reference) > 1e-6,
            "expected a visible gap at q=1/2"
        );
    }

    #[test]
    fn classes_coincide_at_the_endpoints() {
        for seed in [89, 90] {
            let (proc, ev) = random_scenario(seed, 3);
            let b = reverse(&proc, &ev).unwrap();
            for q in [0.0, 1.0] {
                let defect = max_weight_defect(
                    &operational_backward_pq(&b, q, MERGE).unwrap(),
                    &backward_pq(&b, q, MERGE).unwrap(),
                );
                assert!(defect <= 1e-10, "class defect {defect} at q={q}");
            }
        }
    }

    #[test]
    fn hadamard_classes_split_at_q_half() {
        let (proc, ev) = hadamard_scenario();
        let b = reverse(&proc, &ev).unwrap();
        let defect = max_weight_defect(
            &operational_backward_pq(&b, 0.5, MERGE).unwrap(),
            &backward_pq(&b, 0.5, MERGE).unwrap(),
        );
        // Hand evaluation gives a weight gap of exactly 1/2 at w = -1/2.
        assert!((defect - 0.5).abs() <= 1e-12, "defect {defect}");
    }

    #[test]
    fn double_reversal_restores_the_forward_data() {
        let (proc, ev) = random_scenario(91, 3);
        let b = reverse(&proc, &ev).unwrap();
        let (proc_bar, ev_bar) = b.as_forward(proc.h_final(), proc.h_initial()).unwrap();
        let bb = reverse(&proc_bar, &ev_bar).unwrap();
        assert!(bb
            .rho_bar()
            .matrix()
            .max_abs_diff(proc.initial_state().matrix())
            <= 1e-12);
        assert!(bb
            .u_bar()
            .matrix()
            .max_abs_diff(proc.propagator().matrix())
            <= 1e-12);
        for (p, q) in bb
            .pi_bar()
            .projectors()
            .iter()
            .zip(ev.final_heisenberg().projectors())
        {
            assert!(p.matrix().max_abs_diff(q.matrix()) <= 1e-12);
        }
        for (p, q) in bb
            .pi_bar_prime()
            .projectors()
            .iter()
            .zip(ev.initial().projectors())
        {
            assert!(p.matrix().max_abs_diff(q.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn verify_symmetry_reports_expected_fields() {
        let (proc, ev) = hadamard_scenario();
        let tol = Tolerances::default();
        let report = verify_symmetry(&proc, &ev, 0.5, &tol).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.symmetry_defect <= 1e-10);
        assert!((report.class_defect - 0.5).abs() <= 1e-12);
        // rho_bar = |0><0| is diagonal in the final basis but the reversed
        // family still fails the TPM reduction away from the endpoints.
        assert_eq!(report.tpm_reduction_backward, TpmReductionStatus::Fail);

        let report_end = verify_symmetry(&proc, &ev, 0.0, &tol).unwrap();
        assert!(report_end.class_defect <= 1e-10);
        assert_eq!(report_end.tpm_reduction_backward, TpmReductionStatus::Pass);

        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"verdict\":\"pass\""));
        assert!(text.contains("\"tpm_reduction_backward\":\"fail\""));
    }

    #[test]
    fn witness_search_finds_a_class_gap() {
        let witness = find_class_witness(2, 2025, 100, 0.5, 1e-6)
            .unwrap()
            .expect("witness should appear within 100 draws");
        assert!(witness.defect > 1e-6);
    }
}
