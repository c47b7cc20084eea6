//! Operational partitions of unity `{x_i}` with `Σ x_i* x_i = 1`, their
//! ordered composition, correlation matrices, and the entropy bound
//! `S(ρ_X) <= S(ω) + ln dim`.

pub mod file;
pub mod random;

use num_complex::Complex64;

use crate::error::{AlfError, Result};
use crate::quantum_core::{von_neumann_entropy, ComplexMatrix, DensityMatrix};

/// Tolerance on `Σ x_i* x_i = 1`.
pub const TAU_UNITY: f64 = 1e-10;
/// Slack allowed in the entropy bound.
pub const LEMMA_SLACK: f64 = 1e-9;

/// Result of a unity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnityReport {
    pub ok: bool,
    /// Max entrywise modulus of `Σ x_i* x_i - 1`.
    pub deviation: f64,
}

/// Checks `Σ x_i* x_i = 1` entrywise within `tol` and reports the deviation.
pub fn verify_unity(elements: &[ComplexMatrix], tol: f64) -> Result<UnityReport> {
    let dim = common_dim(elements)?;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for x in elements {
        sum += x.adjoint() * x;
    }
    let mut deviation: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((sum[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(UnityReport {
        ok: deviation <= tol,
        deviation,
    })
}

fn common_dim(elements: &[ComplexMatrix]) -> Result<usize> {
    let first = elements
        .first()
        .ok_or_else(|| AlfError::InvalidArgument("a partition needs at least one element".into()))?;
    let dim = first.nrows();
    for (i, x) in elements.iter().enumerate() {
        if x.nrows() != dim || x.ncols() != dim {
            return Err(AlfError::DimensionMismatch(format!(
                "element {i} is {}x{}, expected {dim}x{dim}",
                x.nrows(),
                x.ncols()
            )));
        }
    }
    if dim == 0 {
        return Err(AlfError::DimensionMismatch("elements have dimension 0".into()));
    }
    Ok(dim)
}

/// A finite operator family on `C^ambient_dim` resolving the identity.
#[derive(Debug, Clone)]
pub struct OperationalPartition {
    ambient_dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperationalPartition {
    /// Builds a partition, checking unity within [`TAU_UNITY`].
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(elements, TAU_UNITY)
    }

    pub fn with_tolerance(elements: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let report = verify_unity(&elements, tol)?;
        if !report.ok {
            return Err(AlfError::Validation {
                invariant: "partition of unity",
                deviation: report.deviation,
                tolerance: tol,
            });
        }
        Ok(OperationalPartition {
            ambient_dim: elements[0].nrows(),
            elements,
        })
    }

    /// The trivial partition `{1}`.
    pub fn identity(dim: usize) -> Self {
        OperationalPartition {
            ambient_dim: dim,
            elements: vec![ComplexMatrix::identity(dim, dim)],
        }
    }

    /// Shape checks only. Used where unity is established by construction
    /// and re-checked with a looser tolerance by the caller.
    pub(crate) fn from_parts_unchecked(ambient_dim: usize, elements: Vec<ComplexMatrix>) -> Self {
        OperationalPartition { ambient_dim, elements }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn unity_deviation(&self) -> f64 {
        verify_unity(&self.elements, f64::INFINITY)
            .map(|r| r.deviation)
            .unwrap_or(f64::INFINITY)
    }
}

/// Ordered composition `X ∨ Y = {x_i y_j}`, `i` outer and `j` inner.
pub fn compose(x: &OperationalPartition, y: &OperationalPartition) -> Result<OperationalPartition> {
    if x.ambient_dim != y.ambient_dim {
        return Err(AlfError::DimensionMismatch(format!(
            "cannot compose partitions on dimensions {} and {}",
            x.ambient_dim, y.ambient_dim
        )));
    }
    let mut elements = Vec::with_capacity(x.size() * y.size());
    for xi in &x.elements {
        for yj in &y.elements {
            elements.push(xi * yj);
        }
    }
    OperationalPartition::with_tolerance(elements, 2.0 * TAU_UNITY)
}

/// `k×k` matrix with entries `ρ_X(i,j) = Tr(ω x_j* x_i)`.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    density: DensityMatrix,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.density.dim()
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.density
    }

    pub fn into_density(self) -> DensityMatrix {
        self.density
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(&self.density)
    }
}

pub fn correlation_matrix(omega: &DensityMatrix, x: &OperationalPartition) -> Result<CorrelationMatrix> {
    if omega.dim() != x.ambient_dim {
        return Err(AlfError::DimensionMismatch(format!(
            "state has dimension {}, partition acts on {}",
            omega.dim(),
            x.ambient_dim
        )));
    }
    let raw = gram_correlation(omega.matrix(), &x.elements);
    Ok(CorrelationMatrix {
        density: DensityMatrix::with_tolerance(raw, TAU_UNITY)?,
    })
}

/// `Tr(ω x_j* x_i) = Σ_ab conj(x_j)_ab (x_i ω)_ab`, filled as a Hermitian matrix.
pub(crate) fn gram_correlation(omega: &ComplexMatrix, elements: &[ComplexMatrix]) -> ComplexMatrix {
    let k = elements.len();
    let weighted: Vec<ComplexMatrix> = elements.iter().map(|x| x * omega).collect();
    let mut rho = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v: Complex64 = weighted[i]
                .iter()
                .zip(elements[j].iter())
                .map(|(a, b)| a * b.conj())
                .sum();
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    rho
}

/// Both sides of `S(ρ_X) <= S(ω) + ln dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaBound {
    pub s_rho_x: f64,
    pub bound: f64,
    pub satisfied: bool,
}

pub fn lemma_bound(omega: &DensityMatrix, x: &OperationalPartition) -> Result<LemmaBound> {
    let rho = correlation_matrix(omega, x)?;
    let s_rho_x = rho.entropy();
    let bound = von_neumann_entropy(omega) + (omega.dim() as f64).ln();
    Ok(LemmaBound {
        s_rho_x,
        bound,
        satisfied: s_rho_x <= bound + LEMMA_SLACK,
    })
}
