//! Effects, ordered-event quasiprobabilities, and executable axiom checks.
//!
//! An effect is a Hermitian operator `E` with `0 <= E <= I`. The functional
//! evaluated here assigns to an ordered sequence of effects the real part of
//! the trace of their left-to-right product against a state:
//! `v(E, F, G, ...) = Re Tr(E F G ... rho)`. Joint quasiprobabilities for
//! three or more events depend on how the events are grouped; the ordered
//! product corresponds to the chain decomposition `(E and F), (F and G), ...`
//! and alternative orderings can be reached through
//! [`EventSequence::reordered`].

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::process::{DensityMatrix, HamiltonianProcess};
use crate::rng::{random_effect_matrix, SplitMix64};
use crate::spectral::{hermitian_eig, HermitianOperator, SpectralDecomposition};

/// Measurement-outcome event: Hermitian with spectrum inside `[0, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct Effect {
    operator: HermitianOperator,
}

impl Effect {
    pub fn new(operator: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(operator, &Tolerances::default())
    }

    pub fn with_tolerance(operator: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let eig = hermitian_eig(&operator, 0.0)?;
        let min = eig.eigenvalues()[0];
        let max = *eig.eigenvalues().last().unwrap();
        if min < -tol.density_tol || max > 1.0 + tol.density_tol {
            return Err(Error::InvalidEffect { min, max });
        }
        Ok(Self { operator })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operator: HermitianOperator::new(ComplexMatrix::identity(dim))
                .expect("identity is Hermitian"),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            operator: HermitianOperator::new(ComplexMatrix::zeros(dim))
                .expect("zero is Hermitian"),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.operator.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// Scales the effect by `s` in `[0, 1]`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(HermitianOperator::new(self.matrix().scaled(s))?)
    }

    /// Effect sum, for building decompositions `E + F + ... <= I`.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        Self::new(HermitianOperator::new(self.matrix() + other.matrix())?)
    }
}

impl TryFrom<ComplexMatrix> for Effect {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }
}

impl From<Effect> for ComplexMatrix {
    fn from(e: Effect) -> ComplexMatrix {
        e.operator.into_matrix()
    }
}

/// Ordered, nonempty list of effects on one Hilbert space.
#[derive(Clone, Debug)]
pub struct EventSequence {
    effects: Vec<Effect>,
}

impl EventSequence {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) => e.dim(),
            None => return Err(Error::EmptySequence),
        };
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// Same events under a different grouping: `perm` lists the new product
    /// order by index into the current sequence.
    pub fn reordered(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.effects.len()];
        if perm.len() != self.effects.len() {
            return Err(Error::BadPermutation(format!(
                "permutation length {} does not match sequence length {}",
                perm.len(),
                self.effects.len()
            )));
        }
        for &i in perm {
            if i >= self.effects.len() || seen[i] {
                return Err(Error::BadPermutation(format!("bad index {i}")));
            }
            seen[i] = true;
        }
        Ok(Self {
            effects: perm.iter().map(|&i| self.effects[i].clone()).collect(),
        })
    }
}

/// `v(E) = Tr(E rho)`, the single-event probability.
pub fn single_event_prob(e: &Effect, rho: &DensityMatrix) -> Result<f64> {
    if e.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: rho.dim(),
        });
    }
    Ok((e.matrix() * rho.matrix()).trace().re)
}

/// `v(E, F, ...) = Re Tr(E F ... rho)`: the ordered-product quasiprobability.
pub fn quasiprob_v(seq: &EventSequence, rho: &DensityMatrix) -> Result<f64> {
    if seq.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: seq.dim(),
            right: rho.dim(),
        });
    }
    let mut product = seq.effects()[0].matrix().clone();
    for e in &seq.effects()[1..] {
        product = &product * e.matrix();
    }
    Ok((&product * rho.matrix()).trace().re)
}

/// `v_TPM(E, F) = Re Tr(E F E rho)`, the two-measurement joint probability.
///
/// Quadratic in its first argument, so it fails slot additivity there; the
/// axiom checker exhibits that failure.
pub fn tpm_joint(e: &Effect, f: &Effect, rho: &DensityMatrix) -> Result<f64> {
    if e.dim() != f.dim() || e.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: f.dim().max(rho.dim()),
        });
    }
    Ok((&(&(e.matrix() * f.matrix()) * e.matrix()) * rho.matrix())
        .trace()
        .re)
}

/// `Delta(rho) = sum_i P_i rho P_i` for a complete orthogonal family.
pub fn dephase(rho: &DensityMatrix, projectors: &[HermitianOperator]) -> Result<DensityMatrix> {
    let dim = rho.dim();
    let mut sum = ComplexMatrix::zeros(dim);
    for p in projectors {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: p.dim(),
            });
        }
        sum = &sum + p.matrix();
    }
    let tol = Tolerances::default();
    let completeness = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    if completeness > tol.family_tol {
        return Err(Error::IncompleteFamily {
            defect: completeness,
        });
    }
    for (j, pj) in projectors.iter().enumerate() {
        for pk in &projectors[j + 1..] {
            let cross = (pj.matrix() * pk.matrix()).max_abs_entry();
            if cross > tol.family_tol {
                return Err(Error::NonOrthogonalFamily { defect: cross });
            }
        }
    }
    let mut out = ComplexMatrix::zeros(dim);
    for p in projectors {
        out = &out + &(&(p.matrix() * rho.matrix()) * p.matrix());
    }
    DensityMatrix::new(out)
}

/// Whether `rho` is already diagonal with respect to the projector family.
pub fn is_incoherent(rho: &DensityMatrix, projectors: &[HermitianOperator], tol: f64) -> bool {
    match dephase(rho, projectors) {
        Ok(d) => d.matrix().max_abs_diff(rho.matrix()) <= tol,
        Err(_) => false,
    }
}

/// The two event families of a driven protocol: projectors of the initial
/// Hamiltonian, and projectors of the final Hamiltonian pulled back to the
/// initial time (`P'_k = U' |e'_k><e'_k| U`), with eigenvalues carried
/// alongside.
#[derive(Clone, Debug)]
pub struct ForwardEvents {
    initial: SpectralDecomposition,
    final_heisenberg: SpectralDecomposition,
}

impl ForwardEvents {
    pub fn new(initial: SpectralDecomposition, final_heisenberg: SpectralDecomposition) -> Self {
        Self {
            initial,
            final_heisenberg,
        }
    }

    /// Initial-energy events `(e_i, P_i)`.
    pub fn initial(&self) -> &SpectralDecomposition {
        &self.initial
    }

    /// Final-energy events pulled back to time zero, `(e'_k, P'_k)`.
    pub fn final_heisenberg(&self) -> &SpectralDecomposition {
        &self.final_heisenberg
    }
}

/// Builds the event families of a process with the default tolerances.
pub fn forward_events(proc: &HamiltonianProcess) -> Result<ForwardEvents> {
    forward_events_with(proc, &Tolerances::default())
}

pub fn forward_events_with(
    proc: &HamiltonianProcess,
    tol: &Tolerances,
) -> Result<ForwardEvents> {
    let initial = hermitian_eig_with_tol(proc.h_initial(), tol)?;
    let final_schrodinger = hermitian_eig_with_tol(proc.h_final(), tol)?;
    let final_heisenberg = final_schrodinger.transformed_by(&proc.propagator().adjoint())?;
    Ok(ForwardEvents::new(initial, final_heisenberg))
}

fn hermitian_eig_with_tol(
    h: &HermitianOperator,
    tol: &Tolerances,
) -> Result<SpectralDecomposition> {
    crate::spectral::hermitian_eig_with(h, tol.degeneracy_tol, tol)
}

/// One axiom check: the worst defect seen over all trials and, when the
/// check failed, the instance that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub max_defect: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AxiomWitness>,
}

/// Matrices of the instance that realized a reported defect.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomWitness {
    pub defect: f64,
    pub effects: Vec<ComplexMatrix>,
}

/// Outcome of the additivity probe against the two-measurement functional.
/// Unlike the other checks this one is expected to find a violation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TpmViolation {
    pub found: bool,
    pub max_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AxiomWitness>,
}

/// Report of the randomized measure-axiom suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub trials: u32,
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
    pub tpm_violation: TpmViolation,
    pub all_as_expected: bool,
}

struct DefectTracker {
    axiom: &'static str,
    max_defect: f64,
    witness: Option<AxiomWitness>,
}

impl DefectTracker {
    fn new(axiom: &'static str) -> Self {
        Self {
            axiom,
            max_defect: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, defect: f64, effects: &[&Effect]) {
        if defect > self.max_defect {
            self.max_defect = defect;
            self.witness = Some(AxiomWitness {
                defect,
                effects: effects.iter().map(|e| e.matrix().clone()).collect(),
            });
        }
    }

    fn finish(self, tol: f64) -> AxiomCheck {
        let passed = self.max_defect <= tol;
        AxiomCheck {
            axiom: self.axiom.to_string(),
            max_defect: self.max_defect,
            passed,
            witness: if passed { None } else { self.witness },
        }
    }
}

/// Runs the randomized axiom suite against `rho`.
///
/// Each trial draws fresh effects and decompositions `E = E_1 + E_2 (+ E_3)`
/// with the sum kept at or below the identity, then checks:
/// single-event range and additivity, two- and three-event identity
/// marginals, slot additivity for two, three, and four events, agreement of
/// the two conjugate evaluation routes, and finally slot additivity of the
/// two-measurement functional, which must fail.
pub fn check_axioms(rho: &DensityMatrix, seed: u64, trials: u32) -> Result<AxiomReport> {
    check_axioms_with(rho, seed, trials, &Tolerances::default())
}

pub fn check_axioms_with(
    rho: &DensityMatrix,
    seed: u64,
    trials: u32,
    tol: &Tolerances,
) -> Result<AxiomReport> {
    let dim = rho.dim();
    let mut rng = SplitMix64::new(seed);

    let mut range = DefectTracker::new("P1_single_event_range");
    let mut identity_one = DefectTracker::new("P2_identity_event");
    let mut additivity_one = DefectTracker::new("P3_single_event_additivity");
    let mut realness = DefectTracker::new("Q1_conjugate_route_agreement");
    let mut marginal_two = DefectTracker::new("Q2_identity_marginal");
    let mut additivity_two = DefectTracker::new("Q3_slot_additivity");
    let mut marginal_three = DefectTracker::new("Qq2_identity_marginal_three");
    let mut additivity_three = DefectTracker::new("Qq3_slot_additivity_three");
    let mut marginal_many = DefectTracker::new("Q2M_identity_marginal_four");
    let mut additivity_many = DefectTracker::new("Q3M_slot_additivity_four");
    let mut tpm = DefectTracker::new("tpm_slot_additivity");

    let identity = Effect::identity(dim);

    for _ in 0..trials.max(1) {
        let e = random_effect(&mut rng, dim)?;
        let f = random_effect(&mut rng, dim)?;
        let g = random_effect(&mut rng, dim)?;

        // Scaled split of one effect plus an independent rescaled pair.
        let s = rng.uniform();
        let split = (e.scaled(s)?, e.scaled(1.0 - s)?);
        let pair = random_summable_pair(&mut rng, dim)?;

        // P1: 0 <= v(E) <= 1.
        let ve = single_event_prob(&e, rho)?;
        range.record((-ve).max(ve - 1.0).max(0.0), &[&e]);

        // P2: v(I) = 1.
        identity_one.record((single_event_prob(&identity, rho)? - 1.0).abs(), &[]);

        // P3: v(E1 + E2 + E3) = v(E1) + v(E2) + v(E3).
        let (t1, t2) = (rng.uniform(), rng.uniform());
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let parts = [e.scaled(lo)?, e.scaled(hi - lo)?, e.scaled(1.0 - hi)?];
        let total = single_event_prob(&e, rho)?;
        let summed: f64 = parts
            .iter()
            .map(|p| single_event_prob(p, rho))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum();
        additivity_one.record((total - summed).abs(), &[&e]);

        // Q1: the ordered product route and the adjoint route give the same
        // real part.
        let product = &(e.matrix() * f.matrix()) * rho.matrix();
        let via_adjoint = product.adjoint().trace().re;
        realness.record((product.trace().re - via_adjoint).abs(), &[&e, &f]);

        // Q2: v(I, E) = v(E, I) = v(E).
        let v_ie = quasiprob_v(&EventSequence::new(vec![identity.clone(), e.clone()])?, rho)?;
        let v_ei = quasiprob_v(&EventSequence::new(vec![e.clone(), identity.clone()])?, rho)?;
        marginal_two.record((v_ie - ve).abs().max((v_ei - ve).abs()), &[&e]);

        // Q3: additivity in each slot, for both decomposition styles.
        for (a, b) in [(&split.0, &split.1), (&pair.0, &pair.1)] {
            let whole = a.plus(b)?;
            let first = quasiprob_v(&EventSequence::new(vec![whole.clone(), g.clone()])?, rho)?
                - quasiprob_v(&EventSequence::new(vec![a.clone(), g.clone()])?, rho)?
                - quasiprob_v(&EventSequence::new(vec![b.clone(), g.clone()])?, rho)?;
            let second = quasiprob_v(&EventSequence::new(vec![g.clone(), whole.clone()])?, rho)?
                - quasiprob_v(&EventSequence::new(vec![g.clone(), a.clone()])?, rho)?
                - quasiprob_v(&EventSequence::new(vec![g.clone(), b.clone()])?, rho)?;
            additivity_two.record(first.abs().max(second.abs()), &[a, b, &g]);
        }

        // Qq2: identity dropped from any slot of a three-event sequence.
        let v_ef = quasiprob_v(&EventSequence::new(vec![e.clone(), f.clone()])?, rho)?;
        for slot in 0..3 {
            let mut effects = vec![e.clone(), f.clone()];
            effects.insert(slot, identity.clone());
            let v = quasiprob_v(&EventSequence::new(effects)?, rho)?;
            marginal_three.record((v - v_ef).abs(), &[&e, &f]);
        }

        // Qq3: additivity in each slot of (E, F, G).
        let (a, b) = (&pair.0, &pair.1);
        let whole = a.plus(b)?;
        for slot in 0..3 {
            let build = |x: &Effect| -> Result<EventSequence> {
                let mut effects = vec![e.clone(), f.clone(), g.clone()];
                effects[slot] = x.clone();
                EventSequence::new(effects)
            };
            let defect = quasiprob_v(&build(&whole)?, rho)?
                - quasiprob_v(&build(a)?, rho)?
                - quasiprob_v(&build(b)?, rho)?;
            additivity_three.record(defect.abs(), &[a, b, &e, &f, &g]);
        }

        // Four-event marginal and additivity, one slot each.
        let v_efg = quasiprob_v(
            &EventSequence::new(vec![e.clone(), f.clone(), g.clone()])?,
            rho,
        )?;
        for slot in 0..4 {
            let mut effects = vec![e.clone(), f.clone(), g.clone()];
            effects.insert(slot, identity.clone());
            let v = quasiprob_v(&EventSequence::new(effects)?, rho)?;
            marginal_many.record((v - v_efg).abs(), &[&e, &f, &g]);
        }
        let four = |x: &Effect| -> Result<f64> {
            quasiprob_v(
                &EventSequence::new(vec![x.clone(), e.clone(), f.clone(), g.clone()])?,
                rho,
            )
        };
        additivity_many.record(
            (four(&whole)? - four(a)? - four(b)?).abs(),
            &[a, b, &e, &f, &g],
        );

        // The two-measurement functional is quadratic in its first slot, so
        // additivity there must break for generic pairs.
        let tpm_defect = tpm_joint(&whole, &g, rho)?
            - tpm_joint(a, &g, rho)?
            - tpm_joint(b, &g, rho)?;
        tpm.record(tpm_defect.abs(), &[a, b, &g]);
    }

    let realness_check = realness.finish(1e-12);
    let checks = vec![
        range.finish(tol.axiom_tol),
        identity_one.finish(tol.axiom_tol),
        additivity_one.finish(tol.axiom_tol),
        realness_check,
        marginal_two.finish(tol.axiom_tol),
        additivity_two.finish(tol.axiom_tol),
        marginal_three.finish(tol.axiom_tol),
        additivity_three.finish(tol.axiom_tol),
        marginal_many.finish(tol.axiom_tol),
        additivity_many.finish(tol.axiom_tol),
    ];

    let tpm_found = tpm.max_defect > tol.axiom_tol;
    let tpm_violation = TpmViolation {
        found: tpm_found,
        max_defect: tpm.max_defect,
        witness: tpm.witness,
    };

    let all_passed = checks.iter().all(|c| c.passed) && tpm_found;

    Ok(AxiomReport {
        seed,
        trials: trials.max(1),
        tolerance: tol.axiom_tol,
        checks,
        tpm_violation,
        all_as_expected: all_passed,
    })
}

fn random_effect(rng: &mut SplitMix64, dim: usize) -> Result<Effect> {
    Effect::new(random_effect_matrix(rng, dim))
}

/// Two independent effects rescaled so their sum stays at or below `I`.
fn random_summable_pair(rng: &mut SplitMix64, dim: usize) -> Result<(Effect, Effect)> {
    let a = random_effect(rng, dim)?;
    let b = random_effect(rng, dim)?;
    let sum = HermitianOperator::new(a.matrix() + b.matrix())?;
    let top = *hermitian_eig(&sum, 0.0)?.eigenvalues().last().unwrap();
    if top <= 1.0 {
        return Ok((a, b));
    }
    let scale = 1.0 / top;
    Ok((a.scaled(scale)?, b.scaled(scale)?))
}
