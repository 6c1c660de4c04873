//! Deterministic pseudo-random generation.
//!
//! All randomized machinery (axiom trials, witness searches, scenario
//! generation) draws from one documented generator so that witnesses are
//! reproducible from a seed alone, independent of any platform RNG:
//!
//! * stream: splitmix64 (Steele, Lea, Flood 2014), 64-bit state;
//! * uniforms: top 53 bits of each output, i.e. `(x >> 11) * 2^-53`;
//! * gaussians: Box-Muller, consuming exactly two uniforms per draw and
//!   returning `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::spectral::{exp_i_hermitian, hermitian_eig, HermitianOperator, UnitaryOperator};

/// Identifier recorded in generated files so results can be reproduced.
pub const RNG_ALGORITHM: &str = "splitmix64+box-muller";

/// splitmix64 stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw; consumes exactly two uniforms.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Complex gaussian with unit total variance.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian()).scale(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }
}

/// Random Hermitian matrix: complex gaussian entries symmetrized as
/// `(G + G') / 2`, which is exactly Hermitian entry by entry.
pub fn random_hermitian(rng: &mut SplitMix64, dim: usize) -> HermitianOperator {
    let data: Vec<Complex64> = (0..dim * dim).map(|_| rng.complex_gaussian()).collect();
    let g = ComplexMatrix::new(dim, data).expect("gaussian entries are finite");
    let sym = (&g + &g.adjoint()).scaled(0.5);
    HermitianOperator::new(sym).expect("symmetrized matrix is Hermitian")
}

/// Random unitary: the exponential of a random Hermitian generator.
pub fn random_unitary(rng: &mut SplitMix64, dim: usize) -> UnitaryOperator {
    let h = random_hermitian(rng, dim);
    exp_i_hermitian(&h, 1.0).expect("random generator diagonalizes")
}

/// Random normalized state vector with complex gaussian amplitudes.
pub fn random_state_vector(rng: &mut SplitMix64, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| rng.complex_gaussian()).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

/// Random effect: a gaussian Hermitian with its spectrum rescaled into [0, 1].
pub fn random_effect_matrix(rng: &mut SplitMix64, dim: usize) -> HermitianOperator {
    let h = random_hermitian(rng, dim);
    let eig = hermitian_eig(&h, 0.0).expect("gaussian Hermitian diagonalizes");
    let lo = eig.eigenvalues()[0];
    let hi = *eig.eigenvalues().last().unwrap();
    if hi - lo < 1e-12 {
        let u = rng.uniform();
        return HermitianOperator::new(ComplexMatrix::identity(dim).scaled(u))
            .expect("scaled identity is Hermitian");
    }
    let shifted = (h.matrix() - &ComplexMatrix::identity(dim).scaled(lo)).scaled(1.0 / (hi - lo));
    HermitianOperator::new(shifted).expect("affine rescaling preserves Hermiticity")
}
