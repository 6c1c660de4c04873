//! Scenario files: a self-contained description of one driven protocol,
//! its initial state, and the evaluation grids, plus deterministic
//! generation and the report-producing runners the command line wraps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::detector::{chi_backward_operational, chi_q_operational};
use crate::distribution::{
    max_weight_defect, pq_distribution, tpm_distribution, WorkDistribution,
};
use crate::error::{Error, Result};
use crate::events::{check_axioms, forward_events_with, AxiomReport, ForwardEvents};
use crate::matrix::ComplexMatrix;
use crate::process::{
    thermal_state, DensityMatrix, HamiltonianProcess, HamiltonianSchedule,
};
use crate::reversal::{
    backward_pq, backward_tpm, find_class_witness, operational_backward_pq, reverse,
    verify_symmetry, BackwardProcess, ClassWitness, SymmetryReport, Verdict,
};
use crate::rng::{
    random_hermitian, random_state_vector, random_unitary, SplitMix64, RNG_ALGORITHM,
};
use crate::spectral::{HermitianOperator, UnitaryOperator};

/// How the evolution over the drive window is specified.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ProcessSpec {
    /// Piecewise-constant schedule; the propagator multiplies the
    /// per-segment exponentials in time order.
    #[serde(rename = "segments")]
    Segments { segments: Vec<SegmentSpec> },
    /// Linear interpolation between two Hamiltonians, discretized with
    /// midpoint sampling.
    #[serde(rename = "linear_ramp")]
    LinearRamp {
        #[serde(rename = "H0")]
        h0: ComplexMatrix,
        #[serde(rename = "H1")]
        h1: ComplexMatrix,
        tau: f64,
        segments: usize,
    },
    /// The propagator itself, for scenarios that need an exact unitary.
    #[serde(rename = "explicit_unitary")]
    ExplicitUnitary {
        #[serde(rename = "U")]
        u: ComplexMatrix,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub dt: f64,
    #[serde(rename = "H")]
    pub h: ComplexMatrix,
}

/// How the initial state is specified.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum StateSpec {
    #[serde(rename = "matrix")]
    Matrix { matrix: ComplexMatrix },
    /// Pure state amplitudes; normalized on build.
    #[serde(rename = "pure")]
    Pure { re: Vec<f64>, im: Vec<f64> },
    /// Gibbs state of the initial Hamiltonian, hence incoherent.
    #[serde(rename = "thermal")]
    Thermal { beta: f64 },
}

fn default_q_values() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

fn default_u_grid() -> Vec<f64> {
    (0..17).map(|k| -4.0 + 0.5 * k as f64).collect()
}

/// One complete problem instance as stored on disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub dim: usize,
    pub seed: u64,
    /// Generator identifier for reproducibility metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub process: ProcessSpec,
    /// Measured initial Hamiltonian; defaults to the schedule start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_initial: Option<ComplexMatrix>,
    /// Measured final Hamiltonian; defaults to the schedule end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_final: Option<ComplexMatrix>,
    pub rho: StateSpec,
    #[serde(default = "default_q_values")]
    pub q_values: Vec<f64>,
    #[serde(default = "default_u_grid")]
    pub u_grid: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A scenario compiled into validated operators, with the backward process
/// already attached.
#[derive(Clone, Debug)]
pub struct BuiltScenario {
    pub process: HamiltonianProcess,
    pub events: ForwardEvents,
    pub backward: BackwardProcess,
    pub q_values: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario fields serialize")
    }

    /// Validates every field and assembles the process, event families, and
    /// backward process.
    pub fn build(&self) -> Result<BuiltScenario> {
        let tol = self.tolerances.clone();
        let hermitian = |m: &ComplexMatrix, what: &str| -> Result<HermitianOperator> {
            if m.dim() != self.dim {
                return Err(Error::InvalidScenario(format!(
                    "{what} has dim {} but the scenario declares {}",
                    m.dim(),
                    self.dim
                )));
            }
            HermitianOperator::with_tolerance(m.clone(), tol.herm_tol)
                .map_err(|e| Error::InvalidScenario(format!("{what}: {e}")))
        };

        let (propagator, schedule_ends) = match &self.process {
            ProcessSpec::Segments { segments } => {
                let segs = segments
                    .iter()
                    .map(|s| Ok((s.dt, hermitian(&s.h, "schedule segment")?)))
                    .collect::<Result<Vec<_>>>()?;
                let schedule = HamiltonianSchedule::new(segs)?;
                let ends = (
                    schedule.segments().first().map(|(_, h)| h.clone()),
                    schedule.segments().last().map(|(_, h)| h.clone()),
                );
                (schedule.propagator()?, ends)
            }
            ProcessSpec::LinearRamp {
                h0,
                h1,
                tau,
                segments,
            } => {
                let h0 = hermitian(h0, "ramp start")?;
                let h1 = hermitian(h1, "ramp end")?;
                let schedule = HamiltonianSchedule::linear_ramp(&h0, &h1, *tau, *segments)?;
                (schedule.propagator()?, (Some(h0), Some(h1)))
            }
            ProcessSpec::ExplicitUnitary { u } => {
                if u.dim() != self.dim {
                    return Err(Error::InvalidScenario(format!(
                        "unitary has dim {} but the scenario declares {}",
                        u.dim(),
                        self.dim
                    )));
                }
                let u = UnitaryOperator::with_tolerance(u.clone(), tol.uni_tol)
                    .map_err(|e| Error::InvalidScenario(format!("propagator: {e}")))?;
                (u, (None, None))
            }
        };

        let h_initial = match (&self.h_initial, schedule_ends.0) {
            (Some(m), _) => hermitian(m, "h_initial")?,
            (None, Some(h)) => h,
            (None, None) => {
                return Err(Error::InvalidScenario(
                    "h_initial is required with an explicit unitary".into(),
                ))
            }
        };
        let h_final = match (&self.h_final, schedule_ends.1) {
            (Some(m), _) => hermitian(m, "h_final")?,
            (None, Some(h)) => h,
            (None, None) => {
                return Err(Error::InvalidScenario(
                    "h_final is required with an explicit unitary".into(),
                ))
            }
        };

        let rho = match &self.rho {
            StateSpec::Matrix { matrix } => {
                if matrix.dim() != self.dim {
                    return Err(Error::InvalidScenario(format!(
                        "state has dim {} but the scenario declares {}",
                        matrix.dim(),
                        self.dim
                    )));
                }
                DensityMatrix::with_tolerance(matrix.clone(), &tol)
                    .map_err(|e| Error::InvalidScenario(format!("rho: {e}")))?
            }
            StateSpec::Pure { re, im } => {
                if re.len() != self.dim || im.len() != self.dim {
                    return Err(Error::InvalidScenario(
                        "pure state amplitude length does not match dim".into(),
                    ));
                }
                let amps: Vec<Complex64> = re
                    .iter()
                    .zip(im)
                    .map(|(&r, &i)| Complex64::new(r, i))
                    .collect();
                DensityMatrix::from_pure(&amps)
                    .map_err(|e| Error::InvalidScenario(format!("rho: {e}")))?
            }
            StateSpec::Thermal { beta } => thermal_state(&h_initial, *beta)?,
        };

        let process = HamiltonianProcess::new(h_initial, h_final, propagator, rho)?;
        let events = forward_events_with(&process, &tol)?;
        let backward = reverse(&process, &events)?;
        Ok(BuiltScenario {
            process,
            events,
            backward,
            q_values: self.q_values.clone(),
            u_grid: self.u_grid.clone(),
            tolerances: tol,
            seed: self.seed,
        })
    }
}

/// Deterministic random scenario: gaussian Hermitian endpoints, a random
/// unitary, and a pure or thermal state decided by one coin flip.
pub fn generate_scenario(seed: u64, dim: usize) -> Result<Scenario> {
    if !(2..=8).contains(&dim) {
        return Err(Error::InvalidScenario(format!(
            "generated scenarios support dim 2..=8, got {dim}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let h_initial = random_hermitian(&mut rng, dim);
    let h_final = random_hermitian(&mut rng, dim);
    let u = random_unitary(&mut rng, dim);
    let rho = if rng.uniform() < 0.5 {
        let v = random_state_vector(&mut rng, dim);
        StateSpec::Pure {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    } else {
        StateSpec::Thermal {
            beta: rng.uniform_in(0.2, 2.0),
        }
    };
    Ok(Scenario {
        dim,
        seed,
        generator: Some(RNG_ALGORITHM.to_string()),
        process: ProcessSpec::ExplicitUnitary {
            u: u.matrix().clone(),
        },
        h_initial: Some(h_initial.matrix().clone()),
        h_final: Some(h_final.matrix().clone()),
        rho,
        q_values: default_q_values(),
        u_grid: default_u_grid(),
        tolerances: Tolerances::default(),
    })
}

/// The five distributions of one scenario at one `q`.
#[derive(Clone, Debug)]
pub struct DistributionSet {
    pub q: f64,
    pub forward: WorkDistribution,
    pub backward: WorkDistribution,
    pub operational: WorkDistribution,
}

/// All distributions the `dist` command emits.
#[derive(Clone, Debug)]
pub struct DistributionBundle {
    pub tpm: WorkDistribution,
    pub backward_tpm: WorkDistribution,
    pub per_q: Vec<DistributionSet>,
}

/// Builds every distribution of the scenario and asserts normalization.
pub fn run_distribution(built: &BuiltScenario) -> Result<DistributionBundle> {
    let tol = &built.tolerances;
    let check = |d: WorkDistribution| -> Result<WorkDistribution> {
        let sum = d.total_weight();
        if (sum - 1.0).abs() > tol.normalization_tol {
            return Err(Error::NotNormalized { sum });
        }
        Ok(d)
    };
    let tpm = check(tpm_distribution(&built.process, &built.events, tol.merge_tol)?)?;
    let b_tpm = check(backward_tpm(&built.backward, tol.merge_tol)?)?;
    let mut per_q = Vec::with_capacity(built.q_values.len());
    for &q in &built.q_values {
        per_q.push(DistributionSet {
            q,
            forward: check(pq_distribution(&built.process, &built.events, q, tol.merge_tol)?)?,
            backward: check(backward_pq(&built.backward, q, tol.merge_tol)?)?,
            operational: check(operational_backward_pq(&built.backward, q, tol.merge_tol)?)?,
        });
    }
    Ok(DistributionBundle {
        tpm,
        backward_tpm: b_tpm,
        per_q,
    })
}

/// One row of the characteristic-function table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiRow {
    pub q: f64,
    pub u: f64,
    pub re_chi: f64,
    pub im_chi: f64,
    pub re_chi_direct: f64,
    pub im_chi_direct: f64,
    pub defect: f64,
}

/// Operational-vs-direct characteristic function comparison over the grids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiTable {
    pub rows: Vec<ChiRow>,
    pub backward_rows: Vec<ChiRow>,
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ChiTable {
    /// Six-column CSV of the forward rows at one `q`.
    pub fn forward_csv(&self, q: f64) -> String {
        Self::csv_of(self.rows.iter().filter(|r| r.q == q))
    }

    pub fn backward_csv(&self, q: f64) -> String {
        Self::csv_of(self.backward_rows.iter().filter(|r| r.q == q))
    }

    fn csv_of<'a>(rows: impl Iterator<Item = &'a ChiRow>) -> String {
        let mut out = String::from("u,re_chi,im_chi,re_chi_direct,im_chi_direct,defect\n");
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.u, r.re_chi, r.im_chi, r.re_chi_direct, r.im_chi_direct, r.defect
            ));
        }
        out
    }
}

/// Evaluates the detector protocol against the direct Fourier sums over
/// `u_grid x q_values`, forward and backward.
pub fn run_chi(built: &BuiltScenario) -> Result<ChiTable> {
    let tol = &built.tolerances;
    let mut rows = Vec::new();
    let mut backward_rows = Vec::new();
    let mut max_defect = 0.0f64;
    for &q in &built.q_values {
        let forward = pq_distribution(&built.process, &built.events, q, tol.merge_tol)?;
        let operational = operational_backward_pq(&built.backward, q, tol.merge_tol)?;
        for &u in &built.u_grid {
            let chi = chi_q_operational(&built.process, u, q)?;
            let direct = forward.char_function_direct(u);
            let defect = (chi - direct).norm();
            max_defect = max_defect.max(defect);
            rows.push(ChiRow {
                q,
                u,
                re_chi: chi.re,
                im_chi: chi.im,
                re_chi_direct: direct.re,
                im_chi_direct: direct.im,
                defect,
            });

            let chi_b = chi_backward_operational(
                &built.backward,
                built.process.h_final(),
                built.process.h_initial(),
                u,
                q,
            )?;
            let direct_b = operational.char_function_direct(u);
            let defect_b = (chi_b - direct_b).norm();
            max_defect = max_defect.max(defect_b);
            backward_rows.push(ChiRow {
                q,
                u,
                re_chi: chi_b.re,
                im_chi: chi_b.im,
                re_chi_direct: direct_b.re,
                im_chi_direct: direct_b.im,
                defect: defect_b,
            });
        }
    }
    Ok(ChiTable {
        rows,
        backward_rows,
        max_defect,
        tolerance: tol.fourier_tol,
        passed: max_defect <= tol.fourier_tol,
    })
}

/// Outcome of the q = 1/2 class-gap witness search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessOutcome {
    pub searched_draws: u32,
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ClassWitness>,
}

/// Aggregate verification report for one scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub dim: usize,
    pub symmetry: Vec<SymmetryReport>,
    pub endpoint_class_defect: f64,
    pub axioms: AxiomReport,
    pub fourier_max_defect: f64,
    pub class_witness: WitnessOutcome,
    pub passed: bool,
}

/// Runs every check of the scenario: reversal symmetry at each `q`,
/// endpoint class coincidence, the measure axioms (whose TPM probe must
/// find its violation), Fourier consistency of the detector protocol, and
/// the q = 1/2 class-gap witness search.
pub fn run_verify(built: &BuiltScenario, axiom_trials: u32) -> Result<VerifyReport> {
    let tol = &built.tolerances;

    let mut symmetry = Vec::new();
    for &q in &built.q_values {
        symmetry.push(verify_symmetry(&built.process, &built.events, q, tol)?);
    }

    let mut endpoint_class_defect = 0.0f64;
    for q in [0.0, 1.0] {
        let defect = max_weight_defect(
            &operational_backward_pq(&built.backward, q, tol.merge_tol)?,
            &backward_pq(&built.backward, q, tol.merge_tol)?,
        );
        endpoint_class_defect = endpoint_class_defect.max(defect);
    }

    let axioms = check_axioms(built.process.initial_state(), built.seed, axiom_trials)?;

    let chi = run_chi(built)?;

    let witness = find_class_witness(
        built.process.dim(),
        built.seed.wrapping_add(1),
        100,
        0.5,
        tol.witness_threshold,
    )?;
    let class_witness = WitnessOutcome {
        searched_draws: 100,
        found: witness.is_some(),
        witness,
    };

    let passed = symmetry.iter().all(|r| r.verdict == Verdict::Pass)
        && endpoint_class_defect <= tol.endpoint_tol
        && axioms.all_as_expected
        && chi.passed
        && class_witness.found;

    Ok(VerifyReport {
        seed: built.seed,
        dim: built.process.dim(),
        symmetry,
        endpoint_class_defect,
        axioms,
        fourier_max_defect: chi.max_defect,
        class_witness,
        passed,
    })
}
