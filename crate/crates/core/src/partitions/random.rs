//! Seeded random states and partitions for the property suites.
//!
//! Partitions come from `k` complex Ginibre matrices `G_i`: with
//! `S = Σ G_i* G_i`, the family `x_i = G_i S^{-1/2}` resolves the identity.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{lemma_bound, OperationalPartition, TAU_UNITY};
use crate::error::Result;
use crate::quantum_core::{ComplexMatrix, DensityMatrix};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries (variance 1/2 per part).
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// `S^{-1/2}` for a Hermitian positive definite `S`.
pub fn inverse_sqrt_psd(s: &ComplexMatrix) -> ComplexMatrix {
    let eig = SymmetricEigen::new(s.clone());
    let v = &eig.eigenvectors;
    let scaled = ComplexMatrix::from_fn(v.nrows(), v.ncols(), |i, j| {
        v[(i, j)] * Complex64::new(1.0 / eig.eigenvalues[j].max(f64::MIN_POSITIVE).sqrt(), 0.0)
    });
    scaled * v.adjoint()
}

/// Random size-`k` partition of unity on `C^dim`.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> OperationalPartition {
    loop {
        let gs: Vec<ComplexMatrix> = (0..k).map(|_| ginibre(rng, dim, dim)).collect();
        let mut s = ComplexMatrix::zeros(dim, dim);
        for g in &gs {
            s += g.adjoint() * g;
        }
        let s = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
        let root = inverse_sqrt_psd(&s);
        let elements: Vec<ComplexMatrix> = gs.iter().map(|g| g * &root).collect();
        // a badly conditioned draw can miss the unity tolerance; redraw it
        if let Ok(x) = OperationalPartition::with_tolerance(elements, TAU_UNITY) {
            return x;
        }
    }
}

/// Random density matrix `W W* / Tr(W W*)` with `W` of a random rank in `1..=dim`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    let w = ginibre(rng, dim, rank);
    let mut m = &w * w.adjoint();
    let tr = m.trace().re;
    m /= Complex64::new(tr, 0.0);
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::with_tolerance(m, 1e-10).expect("Gram matrices are density matrices")
}

/// Outcome of a randomized run of the entropy bound `S(ρ_X) <= S(ω) + ln dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub failures: usize,
    /// Largest `S(ρ_X) - bound` seen; negative when every trial holds strictly.
    pub worst_margin: f64,
}

/// Runs `trials` random `(ω, X)` pairs with `dim` in `2..=8` and `k` in `1..=8`.
pub fn lemma_suite(seed: u64, trials: usize) -> Result<LemmaSuiteReport> {
    let mut rng = seeded_rng(seed);
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let dim = rng.random_range(2..=8);
        let k = rng.random_range(1..=8);
        let omega = random_density(&mut rng, dim);
        let x = random_partition(&mut rng, dim, k);
        let b = lemma_bound(&omega, &x)?;
        worst = worst.max(b.s_rho_x - b.bound);
        if !b.satisfied {
            failures += 1;
        }
    }
    Ok(LemmaSuiteReport {
        seed,
        trials,
        failures,
        worst_margin: worst,
    })
}
