//! Discrete work quasiprobability distributions.
//!
//! A distribution is a finite comb of atoms `(w, weight)`. Supports closer
//! than `merge_tol` collapse into one atom (weights added, support averaged)
//! so the representation is canonical and distributions can be compared
//! atom by atom. Weights may be negative; every constructed distribution
//! still sums to 1 because the underlying projector families are complete.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::events::ForwardEvents;
use crate::process::{DensityMatrix, HamiltonianProcess};
use crate::spectral::SpectralDecomposition;

/// One delta component of a work distribution.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WorkAtom {
    pub w: f64,
    #[serde(rename = "p")]
    pub weight: f64,
}

/// Sorted atom list with pairwise support gaps above `merge_tol`.
#[derive(Clone, Debug)]
pub struct WorkDistribution {
    atoms: Vec<WorkAtom>,
    merge_tol: f64,
}

impl WorkDistribution {
    /// Canonicalizes raw `(support, weight)` pairs: sorts by support, merges
    /// chains of supports with consecutive gaps at or below `merge_tol`
    /// (merged support is the plain mean), then drops atoms whose merged
    /// |weight| falls below the pruning threshold.
    pub fn from_raw_atoms(raw: impl IntoIterator<Item = (f64, f64)>, merge_tol: f64) -> Self {
        let prune = Tolerances::default().weight_prune_tol;
        let mut pairs: Vec<(f64, f64)> = raw.into_iter().collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut atoms = Vec::new();
        let mut idx = 0;
        while idx < pairs.len() {
            let mut end = idx + 1;
            while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= merge_tol {
                end += 1;
            }
            let cluster = &pairs[idx..end];
            let w = cluster.iter().map(|(w, _)| w).sum::<f64>() / cluster.len() as f64;
            let weight: f64 = cluster.iter().map(|(_, p)| p).sum();
            if weight.abs() >= prune {
                atoms.push(WorkAtom { w, weight });
            }
            idx = end;
        }
        Self { atoms, merge_tol }
    }

    pub fn atoms(&self) -> &[WorkAtom] {
        &self.atoms
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `sum_atoms weight * w^n`; the zeroth moment is the normalization.
    pub fn moment(&self, n: u32) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.w.powi(n as i32))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `chi(u) = sum_atoms weight * exp(i u w)`, the direct Fourier sum.
    pub fn char_function_direct(&self, u: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| Complex64::from_polar(1.0, u * a.w).scale(a.weight))
            .sum()
    }

    /// Distribution of `-W`: atoms reflected through zero and re-sorted.
    pub fn negate_support(&self) -> Self {
        let mut atoms: Vec<WorkAtom> = self
            .atoms
            .iter()
            .map(|a| WorkAtom {
                w: -a.w,
                weight: a.weight,
            })
            .collect();
        atoms.reverse();
        Self {
            atoms,
            merge_tol: self.merge_tol,
        }
    }

    /// Serializes as `{"q": ..., "atoms": [{"w": ..., "p": ...}]}`; `q` is
    /// null for distributions outside the one-parameter family.
    pub fn to_json(&self, q: Option<f64>) -> String {
        serde_json::to_string_pretty(&DistributionFile {
            q,
            atoms: self.atoms.clone(),
        })
        .expect("plain floats serialize")
    }

    pub fn from_json(text: &str) -> Result<(Option<f64>, Self)> {
        let file: DistributionFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidScenario(format!("bad distribution file: {e}")))?;
        let dist = Self::from_raw_atoms(
            file.atoms.iter().map(|a| (a.w, a.weight)),
            Tolerances::default().merge_tol,
        );
        Ok((file.q, dist))
    }

    /// Two-column CSV, header `w,p`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w,p\n");
        for a in &self.atoms {
            out.push_str(&format!("{},{}\n", a.w, a.weight));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidScenario(format!("bad csv line {lineno}")))
            };
            raw.push((parse(fields.next())?, parse(fields.next())?));
        }
        Ok(Self::from_raw_atoms(raw, Tolerances::default().merge_tol))
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    q: Option<f64>,
    atoms: Vec<WorkAtom>,
}

/// Largest weight difference after aligning the supports of `a` and `b`.
///
/// Atoms from both distributions are pooled, clustered with the larger of
/// the two merge tolerances, and each cluster compares the summed weight
/// from `a` against the summed weight from `b`; an atom with no partner is
/// compared against zero.
pub fn max_weight_defect(a: &WorkDistribution, b: &WorkDistribution) -> f64 {
    let align = a.merge_tol.max(b.merge_tol);
    let mut pool: Vec<(f64, f64, bool)> = a
        .atoms
        .iter()
        .map(|at| (at.w, at.weight, true))
        .chain(b.atoms.iter().map(|at| (at.w, at.weight, false)))
        .collect();
    pool.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut worst = 0.0f64;
    let mut idx = 0;
    while idx < pool.len() {
        let mut end = idx + 1;
        while end < pool.len() && pool[end].0 - pool[end - 1].0 <= align {
            end += 1;
        }
        let from_a: f64 = pool[idx..end].iter().filter(|x| x.2).map(|x| x.1).sum();
        let from_b: f64 = pool[idx..end].iter().filter(|x| !x.2).map(|x| x.1).sum();
        worst = worst.max((from_a - from_b).abs());
        idx = end;
    }
    worst
}

/// Whether the two distributions agree atom-wise within `tol`.
pub fn distributions_equal(a: &WorkDistribution, b: &WorkDistribution, tol: f64) -> bool {
    max_weight_defect(a, b) <= tol
}

/// Three-index weight kernel `w[a][b][c] = Re Tr(A_a rho B_b C_c)`.
///
/// By cyclicity this equals the ordered-sequence functional evaluated on
/// `(B_b, C_c, A_a)`; the interleaved form is kept because the work
/// distributions place the state between the first two events.
pub fn three_event_weights(
    first: &SpectralDecomposition,
    middle: &SpectralDecomposition,
    last: &SpectralDecomposition,
    rho: &DensityMatrix,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let dim = rho.dim();
    for family in [first, middle, last] {
        if family.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: family.dim(),
            });
        }
    }
    // Tr(A rho B C) = sum_{x,y} (A rho)[x][y] (B C)[y][x].
    let a_rho: Vec<_> = first
        .projectors()
        .iter()
        .map(|p| p.matrix() * rho.matrix())
        .collect();
    let mut out =
        vec![vec![vec![0.0; last.len()]; middle.len()]; first.len()];
    for (b, pb) in middle.projectors().iter().enumerate() {
        for (c, pc) in last.projectors().iter().enumerate() {
            let bc = pb.matrix() * pc.matrix();
            for (a, left) in a_rho.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..dim {
                    for y in 0..dim {
                        acc += left[(x, y)] * bc[(y, x)];
                    }
                }
                out[a][b][c] = acc.re;
            }
        }
    }
    Ok(out)
}

/// Pre-merge atoms of the one-parameter family: one entry per index triple
/// `(i, j, k)`, in lexicographic triple order, at support
/// `e'_k - q e_i - (1 - q) e_j` with weight `Re Tr(P_i rho P_j P'_k)`.
///
/// Supports move affinely in `q`; the weights do not depend on `q` at all.
pub fn pq_raw_atoms(
    proc: &HamiltonianProcess,
    ev: &ForwardEvents,
    q: f64,
) -> Result<Vec<(f64, f64)>> {
    let weights = three_event_weights(
        ev.initial(),
        ev.initial(),
        ev.final_heisenberg(),
        proc.initial_state(),
    )?;
    let e = ev.initial().eigenvalues();
    let e_final = ev.final_heisenberg().eigenvalues();
    let mut raw = Vec::with_capacity(e.len() * e.len() * e_final.len());
    for (i, row) in weights.iter().enumerate() {
        for (j, col) in row.iter().enumerate() {
            for (k, &weight) in col.iter().enumerate() {
                raw.push((e_final[k] - q * e[i] - (1.0 - q) * e[j], weight));
            }
        }
    }
    Ok(raw)
}

/// Work quasiprobability distribution of the one-parameter family.
pub fn pq_distribution(
    proc: &HamiltonianProcess,
    ev: &ForwardEvents,
    q: f64,
    merge_tol: f64,
) -> Result<WorkDistribution> {
    Ok(WorkDistribution::from_raw_atoms(
        pq_raw_atoms(proc, ev, q)?,
        merge_tol,
    ))
}

/// Two-projective-measurement distribution: atoms at `e'_k - e_i` with the
/// genuine probabilities `Tr(P_i rho P_i P'_k)`.
pub fn tpm_distribution(
    proc: &HamiltonianProcess,
    ev: &ForwardEvents,
    merge_tol: f64,
) -> Result<WorkDistribution> {
    let weights = three_event_weights(
        ev.initial(),
        ev.initial(),
        ev.final_heisenberg(),
        proc.initial_state(),
    )?;
    let e = ev.initial().eigenvalues();
    let e_final = ev.final_heisenberg().eigenvalues();
    let mut raw = Vec::with_capacity(e.len() * e_final.len());
    for (i, row) in weights.iter().enumerate() {
        for (k, &weight) in row[i].iter().enumerate() {
            raw.push((e_final[k] - e[i], weight));
        }
    }
    Ok(WorkDistribution::from_raw_atoms(raw, merge_tol))
}
