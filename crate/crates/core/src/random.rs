//! Seeded random states, measures and operators for property runs.
//!
//! Everything draws from [`ChaCha8Rng`], so a seed fixes every sample on
//! every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::CMatrix;
use crate::group::Group;
use crate::instruments::CovariantMeasure;
use crate::observables::State;
use crate::scalar::{cx, Real, C};

pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    cx(T::lit(re * h), T::lit(im * h))
}

pub fn random_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C<T>> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Ginibre matrix with independent complex Gaussian entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    ginibre::<T, R>(rng, n, n).hermitian_part()
}

/// `G G^* / tr(G G^*)` for a Ginibre matrix `G`, the Hilbert–Schmidt
/// distributed mixed state.
pub fn random_state<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> State<T> {
    let g = ginibre::<T, R>(rng, n, n);
    let p = g.matmul(&g.adjoint());
    let tr = p.trace().re;
    State::from_trusted(p.scale_real(T::one() / tr).hermitian_part())
}

/// Haar-random pure state.
pub fn random_pure_state<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> State<T> {
    let v = random_vector::<T, R>(rng, n);
    let norm = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    let v: Vec<C<T>> = v.into_iter().map(|z| z / norm).collect();
    State::from_trusted(CMatrix::outer(&v, &v))
}

/// Unitary `exp(iH)` for a random Hermitian `H`.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let (values, vectors) = random_hermitian::<T, R>(rng, n)
        .eigh()
        .expect("Hermitian by construction");
    let phases: Vec<C<T>> = values.iter().map(|&l| C::from_polar(T::one(), l)).collect();
    vectors.matmul(&CMatrix::from_diag(&phases)).matmul(&vectors.adjoint())
}

/// Measure with positive densities `G_x G_x^*`, rescaled to total trace 1.
/// Each point is left empty with probability `1/4`, except that at least
/// one point always carries weight.
pub fn random_measure<T: Real, R: Rng + ?Sized>(rng: &mut R, group: &Group) -> CovariantMeasure<T> {
    let n = group.order();
    let mut m: Vec<CMatrix<T>> = (0..n)
        .map(|_| {
            let g = ginibre::<T, R>(rng, n, n);
            let keep = rng.gen_range(0..4) != 0;
            if keep {
                g.matmul(&g.adjoint()).hermitian_part()
            } else {
                CMatrix::zeros(n, n)
            }
        })
        .collect();
    if m.iter().all(|x| x.trace().re == T::zero()) {
        let g = ginibre::<T, R>(rng, n, n);
        m[rng.gen_range(0..n)] = g.matmul(&g.adjoint()).hermitian_part();
    }
    let total = m.iter().fold(T::zero(), |a, x| a + x.trace().re);
    let m = m.into_iter().map(|x| x.scale_real(T::one() / total)).collect();
    CovariantMeasure::from_trusted(group.clone(), m)
}
