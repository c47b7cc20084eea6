//! Dense complex linear algebra for density matrices.
//!
//! Everything here works on `nalgebra` matrices of `Complex64` entries.
//! Entropies are in nats. Eigenvalues at or below [`EPS_CLIP`] contribute
//! nothing to an entropy, so tiny negative roundoff eigenvalues never produce
//! a NaN.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AlfError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Entropy contributions `λ ln λ` with `λ <= EPS_CLIP` are treated as zero.
pub const EPS_CLIP: f64 = 1e-14;
/// Max entrywise `|A - A†|` accepted for a density matrix.
pub const TAU_HERM: f64 = 1e-12;
/// Max `|Tr ρ - 1|` accepted for a density matrix.
pub const TAU_TRACE: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const TAU_PSD: f64 = 1e-12;

/// Dense size limits. Exceeding one is an error, never a fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest ambient Hilbert-space dimension materialised densely.
    pub dense_dim: usize,
    /// Largest correlation-matrix dimension.
    pub correlation_dim: usize,
    /// Largest number of enumerated index tuples / paths.
    pub paths: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            dense_dim: 4096,
            correlation_dim: 4096,
            paths: 1 << 16,
        }
    }
}

impl Caps {
    pub fn check_dense(&self, what: &str, required: u128) -> Result<()> {
        check_cap(what, required, self.dense_dim)
    }

    pub fn check_correlation(&self, what: &str, required: u128) -> Result<()> {
        check_cap(what, required, self.correlation_dim)
    }

    pub fn check_paths(&self, what: &str, required: u128) -> Result<()> {
        check_cap(what, required, self.paths)
    }
}

fn check_cap(what: &str, required: u128, cap: usize) -> Result<()> {
    if required > cap as u128 {
        return Err(AlfError::CapExceeded {
            what: what.to_string(),
            required,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `base^exp` without overflow, saturating at `u128::MAX`.
pub fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Eigenvalues of a density matrix, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// `-Σ λ ln λ` over eigenvalues above [`EPS_CLIP`].
    pub fn entropy(&self) -> f64 {
        entropy_terms(self.eigenvalues.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

fn entropy_terms(values: impl Iterator<Item = f64>) -> f64 {
    let s: f64 = values.filter(|&p| p > EPS_CLIP).map(|p| -p * p.ln()).sum();
    // -0.0 from an all-zero sum reads badly in tables
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
///
/// The spectrum is computed once at construction (it is needed both for the
/// PSD check and for every entropy evaluation).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: Spectrum,
}

impl DensityMatrix {
    /// Validates with the default tolerances `TAU_HERM`, `TAU_TRACE`, `TAU_PSD`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, TAU_HERM)
    }

    /// Validates with one tolerance used for hermiticity, trace and positivity.
    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(AlfError::DimensionMismatch(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_dev = hermiticity_deviation(&matrix);
        if herm_dev > tol {
            return Err(AlfError::Validation {
                invariant: "hermitian",
                deviation: herm_dev,
                tolerance: tol,
            });
        }
        let trace_dev = (matrix.trace() - Complex64::new(1.0, 0.0)).norm();
        if trace_dev > tol {
            return Err(AlfError::Validation {
                invariant: "unit trace",
                deviation: trace_dev,
                tolerance: tol,
            });
        }
        let matrix = hermitian_part(&matrix);
        let spectrum = Spectrum {
            eigenvalues: hermitian_eigenvalues(&matrix),
        };
        let min = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(AlfError::Validation {
                invariant: "positive semidefinite",
                deviation: -min,
                tolerance: tol,
            });
        }
        Ok(DensityMatrix { matrix, spectrum })
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(probs[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

/// Max entrywise modulus of `A - A†`.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(A + A†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix, descending; ties keep solver order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// `S(ρ) = -Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.spectrum.entropy()
}

/// Shannon entropy of a probability vector in nats.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if let Some(&min) = p.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -TAU_PSD {
            return Err(AlfError::Validation {
                invariant: "nonnegative probabilities",
                deviation: -min,
                tolerance: TAU_PSD,
            });
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(AlfError::Validation {
            invariant: "probabilities sum to one",
            deviation: (total - 1.0).abs(),
            tolerance: 1e-10,
        });
    }
    Ok(entropy_terms(p.iter().copied()))
}

/// Kronecker product; entry `((i1,i2),(j1,j2)) = a(i1,j1) b(i2,j2)`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `⊗ factors`, left to right. An empty list yields the 1x1 identity.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Reduced density matrix on the factors listed in `keep`.
///
/// `dims` lists the tensor factors, first factor most significant. Kept
/// factors appear in increasing index order in the result.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(rho.matrix(), dims, keep)?;
    DensityMatrix::with_tolerance(reduced, 1e-10)
}

/// Partial trace of an arbitrary square matrix.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.nrows() || !m.is_square() {
        return Err(AlfError::DimensionMismatch(format!(
            "factor dims {:?} do not multiply to matrix dimension {}",
            dims,
            m.nrows()
        )));
    }
    if keep.is_empty() {
        return Err(AlfError::InvalidArgument("keep set must be nonempty".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(AlfError::InvalidArgument(format!(
                "keep set {:?} is not a set of factor indices below {}",
                keep,
                dims.len()
            )));
        }
        kept[k] = true;
    }
    let keep_dim: usize = dims.iter().zip(&kept).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let traced_dim = total / keep_dim;

    // split each full index into (kept index, traced index)
    let mut split = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut digits = vec![0usize; dims.len()];
        for f in (0..dims.len()).rev() {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        let (mut k_idx, mut t_idx) = (0usize, 0usize);
        for f in 0..dims.len() {
            if kept[f] {
                k_idx = k_idx * dims[f] + digits[f];
            } else {
                t_idx = t_idx * dims[f] + digits[f];
            }
        }
        split.push((k_idx, t_idx));
    }
    let mut by_traced: Vec<Vec<usize>> = vec![Vec::new(); traced_dim];
    for (idx, &(_, t)) in split.iter().enumerate() {
        by_traced[t].push(idx);
    }
    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for group in &by_traced {
        for &i in group {
            for &j in group {
                out[(split[i].0, split[j].0)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Matrix product that skips zero entries of the left factor.
///
/// Matrix units and Jordan–Wigner generators have at most one nonzero per
/// row, which makes this far cheaper than a dense product.
pub fn mul_skip_zeros(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let mut out = ComplexMatrix::zeros(a.nrows(), b.ncols());
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let aik = a[(i, k)];
            if aik == zero {
                continue;
            }
            for j in 0..b.ncols() {
                let bkj = b[(k, j)];
                if bkj != zero {
                    out[(i, j)] += aik * bkj;
                }
            }
        }
    }
    out
}

/// Max entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Max modulus over the off-diagonal entries.
pub fn max_off_diagonal(m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
