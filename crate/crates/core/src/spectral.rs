//! Hermitian/unitary operator newtypes and spectral decomposition.
//!
//! The eigensolver is a cyclic Jacobi iteration on the Hermitian matrix.
//! At dim <= 16 it is dependency-free, accurate to machine precision, and
//! its rotations keep the working matrix exactly Hermitian. Eigenvalues
//! closer than a caller-supplied gap are merged into one cluster whose
//! projector is the sum of the member rank-1 eigenprojectors, so spectral
//! events stay well defined under degeneracy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Hermitian matrix, validated on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates `max |A - A'| <= herm_tol` with the default tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::default().herm_tol)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, herm_tol: f64) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl TryFrom<ComplexMatrix> for HermitianOperator {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> ComplexMatrix {
        h.matrix
    }
}

/// Unitary matrix, validated on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    /// Validates `max |U'U - I| <= uni_tol` with the default tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::default().uni_tol)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, uni_tol: f64) -> Result<Self> {
        let defect = matrix.unitarity_defect();
        if defect > uni_tol {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The inverse evolution `U'`.
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `U A U'`, preserving Hermiticity of `A`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: a.dim(),
            });
        }
        Ok(&(&self.matrix * a) * &self.matrix.adjoint())
    }
}

impl TryFrom<ComplexMatrix> for UnitaryOperator {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<UnitaryOperator> for ComplexMatrix {
    fn from(u: UnitaryOperator) -> ComplexMatrix {
        u.matrix
    }
}

/// Distinct eigenvalues with orthogonal projectors that sum to the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<HermitianOperator>,
}

impl SpectralDecomposition {
    /// Validates strict eigenvalue ordering, completeness and mutual
    /// orthogonality of the projector family.
    pub fn new(eigenvalues: Vec<f64>, projectors: Vec<HermitianOperator>) -> Result<Self> {
        Self::with_tolerance(eigenvalues, projectors, Tolerances::default().family_tol)
    }

    pub fn with_tolerance(
        eigenvalues: Vec<f64>,
        projectors: Vec<HermitianOperator>,
        family_tol: f64,
    ) -> Result<Self> {
        assert_eq!(eigenvalues.len(), projectors.len());
        if eigenvalues.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedEigenvalues);
        }
        let dim = projectors
            .first()
            .map(HermitianOperator::dim)
            .unwrap_or(0);
        let mut sum = ComplexMatrix::zeros(dim.max(1));
        for p in &projectors {
            sum = &sum + p.matrix();
        }
        let completeness = sum.max_abs_diff(&ComplexMatrix::identity(dim.max(1)));
        if completeness > family_tol {
            return Err(Error::IncompleteFamily {
                defect: completeness,
            });
        }
        let mut ortho = 0.0f64;
        for (j, pj) in projectors.iter().enumerate() {
            for (k, pk) in projectors.iter().enumerate() {
                let prod = pj.matrix() * pk.matrix();
                let target = if j == k {
                    pj.matrix().clone()
                } else {
                    ComplexMatrix::zeros(dim)
                };
                ortho = ortho.max(prod.max_abs_diff(&target));
            }
        }
        if ortho > family_tol {
            return Err(Error::NonOrthogonalFamily { defect: ortho });
        }
        Ok(Self {
            eigenvalues,
            projectors,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// `sum_k e_k P_k`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (e, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = &acc + &p.matrix().scaled(*e);
        }
        acc
    }

    /// Conjugates every projector by `u` (`P -> u P u'`), keeping the
    /// eigenvalue labels. Used to transport event families between pictures.
    pub fn transformed_by(&self, u: &UnitaryOperator) -> Result<Self> {
        let projectors = self
            .projectors
            .iter()
            .map(|p| {
                u.conjugate(p.matrix())
                    .and_then(HermitianOperator::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.eigenvalues.clone(), projectors)
    }
}

/// Spectral decomposition of a Hermitian operator by cyclic Jacobi rotations.
///
/// Eigenvalues whose consecutive gap is at most `degeneracy_tol` are merged
/// into one entry at the mean of the cluster, with the rank-`>=2` projector
/// summing the clustered eigenprojectors.
pub fn hermitian_eig(
    op: &HermitianOperator,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition> {
    let tol = Tolerances::default();
    hermitian_eig_with(op, degeneracy_tol, &tol)
}

pub fn hermitian_eig_with(
    op: &HermitianOperator,
    degeneracy_tol: f64,
    tol: &Tolerances,
) -> Result<SpectralDecomposition> {
    let n = op.dim();
    let mut a = op.matrix().clone();
    let mut v = ComplexMatrix::identity(n);

    let mut converged = n == 1;
    let mut sweeps = 0;
    while !converged && sweeps < tol.jacobi_max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].norm() <= tol.jacobi_off_diag {
                    continue;
                }
                rotated = true;
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = !rotated || max_off_diagonal(&a) <= tol.jacobi_off_diag;
    }
    if !converged {
        return Err(Error::EigenConvergence {
            sweeps,
            off_diag: max_off_diagonal(&a),
        });
    }

    // Sort eigenvector columns by eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let raw: Vec<(f64, Vec<Complex64>)> = order
        .iter()
        .map(|&c| (a[(c, c)].re, (0..n).map(|r| v[(r, c)]).collect()))
        .collect();

    // Group eigenvalues whose consecutive gaps are within degeneracy_tol.
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && raw[end].0 - raw[end - 1].0 <= degeneracy_tol {
            end += 1;
        }
        let cluster = &raw[start..end];
        let mean = cluster.iter().map(|(e, _)| e).sum::<f64>() / cluster.len() as f64;
        let mut proj = ComplexMatrix::zeros(n);
        for (_, col) in cluster {
            for i in 0..n {
                for j in 0..n {
                    let term = col[i] * col[j].conj();
                    proj[(i, j)] += term;
                }
            }
        }
        eigenvalues.push(mean);
        projectors.push(HermitianOperator::with_tolerance(proj, tol.herm_tol)?);
        start = end;
    }

    let decomposition =
        SpectralDecomposition::with_tolerance(eigenvalues, projectors, tol.family_tol)?;
    let defect = decomposition.reconstruct().max_abs_diff(op.matrix());
    if defect > tol.reconstruction_tol.max(degeneracy_tol) {
        return Err(Error::SpectralReconstruction {
            defect,
            tol: tol.reconstruction_tol.max(degeneracy_tol),
        });
    }
    Ok(decomposition)
}

fn max_off_diagonal(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in (p + 1)..n {
            worst = worst.max(a[(p, q)].norm());
        }
    }
    worst
}

/// One complex Jacobi rotation zeroing `a[(p, q)]`, applied as `J' A J`,
/// accumulating `V <- V J`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.dim();
    let apq = a[(p, q)];
    let r = apq.norm();
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    // tan(2 theta) = 2r / (aqq - app), resolved through the stable quadratic.
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let s_phase = phase.scale(s);

    for i in 0..n {
        if i == p || i == q {
            continue;
        }
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        let new_ip = aip.scale(c) - s_phase.conj() * aiq;
        let new_iq = s_phase * aip + aiq.scale(c);
        a[(i, p)] = new_ip;
        a[(p, i)] = new_ip.conj();
        a[(i, q)] = new_iq;
        a[(q, i)] = new_iq.conj();
    }
    a[(p, p)] = Complex64::new(app - t * r, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);

    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip.scale(c) - s_phase.conj() * viq;
        v[(i, q)] = s_phase * vip + viq.scale(c);
    }
}

/// `exp(-i theta A)` through the spectral decomposition of `A`.
pub fn exp_i_hermitian(op: &HermitianOperator, theta: f64) -> Result<UnitaryOperator> {
    let tol = Tolerances::default();
    let eig = hermitian_eig_with(op, tol.degeneracy_tol, &tol)?;
    let mut acc = ComplexMatrix::zeros(op.dim());
    for (e, p) in eig.eigenvalues().iter().zip(eig.projectors()) {
        let factor = Complex64::from_polar(1.0, -theta * e);
        acc = &acc + &p.matrix().scaled(factor);
    }
    UnitaryOperator::with_tolerance(acc, tol.uni_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_hermitian, SplitMix64};

    fn sigma_x() -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap())
            .unwrap()
    }

    fn diag01() -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap())
            .unwrap()
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_of_diagonal_matrix() {
        let eig = hermitian_eig(&diag01(), 1e-9).unwrap();
        assert_eq!(eig.eigenvalues(), &[0.0, 1.0]);
        let p0 = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let p1 = ComplexMatrix::from_real(2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(eig.projectors()[0].matrix().max_abs_diff(&p0) <= 1e-14);
        assert!(eig.projectors()[1].matrix().max_abs_diff(&p1) <= 1e-14);
    }

    #[test]
    fn eig_of_sigma_x() {
        let eig = hermitian_eig(&sigma_x(), 1e-9).unwrap();
        assert!((eig.eigenvalues()[0] + 1.0).abs() <= 1e-14);
        assert!((eig.eigenvalues()[1] - 1.0).abs() <= 1e-14);
        // Projectors (I -+ sigma_x)/2.
        let minus = ComplexMatrix::from_real(2, &[0.5, -0.5, -0.5, 0.5]).unwrap();
        let plus = ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(eig.projectors()[0].matrix().max_abs_diff(&minus) <= 1e-14);
        assert!(eig.projectors()[1].matrix().max_abs_diff(&plus) <= 1e-14);
    }

    #[test]
    fn random_5x5_reconstructs() {
        let mut rng = SplitMix64::new(71);
        let h = random_hermitian(&mut rng, 5);
        let eig = hermitian_eig(&h, 1e-9).unwrap();
        let defect = eig.reconstruct().max_abs_diff(h.matrix());
        assert!(defect <= 1e-9, "reconstruction defect {defect}");
    }

    #[test]
    fn eig_invariants_hold_across_dims() {
        let mut rng = SplitMix64::new(72);
        for dim in 2..=8 {
            let h = random_hermitian(&mut rng, dim);
            let eig = hermitian_eig(&h, 1e-9).unwrap();
            let mut sum = ComplexMatrix::zeros(dim);
            for p in eig.projectors() {
                sum = &sum + p.matrix();
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-10);
            for (j, pj) in eig.projectors().iter().enumerate() {
                for (k, pk) in eig.projectors().iter().enumerate() {
                    let prod = pj.matrix() * pk.matrix();
                    let expect = if j == k {
                        pj.matrix().clone()
                    } else {
                        ComplexMatrix::zeros(dim)
                    };
                    assert!(prod.max_abs_diff(&expect) <= 1e-10);
                }
            }
            assert!(eig.reconstruct().max_abs_diff(h.matrix()) <= 1e-9);
            assert!(eig
                .eigenvalues()
                .windows(2)
                .all(|w| w[1] - w[0] > 1e-9));
        }
    }

    #[test]
    fn identity_groups_into_single_projector() {
        let h = HermitianOperator::new(ComplexMatrix::identity(4)).unwrap();
        let eig = hermitian_eig(&h, 1e-9).unwrap();
        assert_eq!(eig.len(), 1);
        assert!((eig.eigenvalues()[0] - 1.0).abs() <= 1e-14);
        assert!(eig.projectors()[0]
            .matrix()
            .max_abs_diff(&ComplexMatrix::identity(4))
            <= 1e-12);
    }

    #[test]
    fn near_degenerate_pair_is_merged() {
        let h = HermitianOperator::new(
            ComplexMatrix::from_real(3, &[1.0, 0.0, 0.0, 0.0, 1.0 + 1e-12, 0.0, 0.0, 0.0, 2.0])
                .unwrap(),
        )
        .unwrap();
        let eig = hermitian_eig(&h, 1e-9).unwrap();
        assert_eq!(eig.len(), 2);
        assert!((eig.eigenvalues()[0] - (1.0 + 5e-13)).abs() <= 1e-12);
        // The merged projector has rank 2: its trace is 2.
        assert!((eig.projectors()[0].matrix().trace().re - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn exp_at_theta_zero_is_identity() {
        let u = exp_i_hermitian(&sigma_x(), 0.0).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-14);
    }

    #[test]
    fn exp_of_diagonal_at_pi() {
        let u = exp_i_hermitian(&diag01(), std::f64::consts::PI).unwrap();
        let expect = ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(u.matrix().max_abs_diff(&expect) <= 1e-14);
    }

    #[test]
    fn exp_inverse_cancels() {
        let mut rng = SplitMix64::new(73);
        let h = random_hermitian(&mut rng, 4);
        let theta = 0.83;
        let forward = exp_i_hermitian(&h, theta).unwrap();
        let backward = exp_i_hermitian(&h, -theta).unwrap();
        let prod = forward.matrix() * backward.matrix();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-10);
    }

    #[test]
    fn exp_is_additive_in_theta() {
        let mut rng = SplitMix64::new(74);
        let h = random_hermitian(&mut rng, 3);
        let (t1, t2) = (0.37, -1.21);
        let lhs = exp_i_hermitian(&h, t1).unwrap().matrix()
            * exp_i_hermitian(&h, t2).unwrap().matrix();
        let rhs = exp_i_hermitian(&h, t1 + t2).unwrap();
        assert!(lhs.max_abs_diff(rhs.matrix()) <= 1e-9);
    }

    #[test]
    fn unitary_validation_rejects_shrinking_map() {
        let m = ComplexMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(
            UnitaryOperator::new(m),
            Err(Error::NotUnitary { .. })
        ));
    }
}
