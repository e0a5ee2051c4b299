//! Seeded random matrices for tests, benchmarks, and initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pauli::DenseOperator;
use crate::C64;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian via Box-Muller.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    C64::new(r * th.cos(), r * th.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng>(n: usize, rng: &mut R) -> DenseOperator {
    let d = 1usize << n;
    let data = (0..d * d).map(|_| complex_gaussian(rng)).collect();
    DenseOperator::from_vec(n, data).expect("shape")
}

/// Haar-random unitary: QR of a Ginibre matrix by modified Gram-Schmidt on
/// the columns, with the phases of `R`'s diagonal absorbed.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DenseOperator {
    let d = 1usize << n;
    let g = ginibre(n, rng);
    let mut cols: Vec<Vec<C64>> = (0..d).map(|j| (0..d).map(|i| g.get(i, j)).collect()).collect();
    for j in 0..d {
        for k in 0..j {
            let proj: C64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            let (head, tail) = cols.split_at_mut(j);
            for (x, q) in tail[0].iter_mut().zip(&head[k]) {
                *x -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    DenseOperator::from_fn(n, |i, j| cols[j][i])
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> DenseOperator {
    let g = ginibre(n, rng);
    g.add(&g.adjoint()).scale(C64::new(0.5, 0.0))
}

/// Random full-rank density matrix `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> DenseOperator {
    let g = ginibre(n, rng);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace().re;
    rho.scale(C64::new(1.0 / tr, 0.0))
}
