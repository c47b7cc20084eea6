//! The shift on a quantum spin chain `⊗_Z M_d` with a product reference state.
//!
//! A local partition lives on sites `[1, M]`. Its `N`-step refinement
//! `Θ^{N-1}(x_{j_{N-1}}) ··· Θ(x_{j_1}) x_{j_0}` lives on `[1, M+N-1]`, and
//! tuples `j` are flattened lexicographically with `j_0` slowest.
//!
//! Two routes compute refined correlation matrices: a dense one that builds
//! every refined element on `d^(M+N-1)` dimensions, and a factorized one for
//! partitions of elementary tensors, which multiplies single-site traces.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{AlfError, Result};
use crate::partitions::{gram_correlation, OperationalPartition, TAU_UNITY};
use crate::quantum_core::{
    checked_pow, partial_trace, tensor_all, von_neumann_entropy, Caps, ComplexMatrix, DensityMatrix,
};

/// Slack used by the bound comparisons below.
pub const BOUND_SLACK: f64 = 1e-9;

/// Product state `⊗ site_state` on a chain of `d`-level sites.
#[derive(Debug, Clone)]
pub struct SpinChainSystem {
    d: usize,
    site_state: DensityMatrix,
}

impl SpinChainSystem {
    pub fn new(site_state: DensityMatrix) -> Result<Self> {
        let d = site_state.dim();
        if d < 2 {
            return Err(AlfError::InvalidArgument(format!(
                "site dimension must be at least 2, got {d}"
            )));
        }
        Ok(SpinChainSystem { d, site_state })
    }

    /// Site state `diag(spectrum)`.
    pub fn from_spectrum(spectrum: &[f64]) -> Result<Self> {
        Self::new(DensityMatrix::from_diagonal(spectrum)?)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn site_state(&self) -> &DensityMatrix {
        &self.site_state
    }

    /// Entropy density σ(ω); equals the single-site entropy for a product state.
    pub fn entropy_density(&self) -> f64 {
        von_neumann_entropy(&self.site_state)
    }

    /// `ω` restricted to `sites` consecutive sites.
    pub fn restriction(&self, sites: usize, caps: &Caps) -> Result<DensityMatrix> {
        caps.check_dense("restricted state dimension", checked_pow(self.d, sites))?;
        let m = tensor_all(std::iter::repeat_n(self.site_state.matrix(), sites));
        DensityMatrix::with_tolerance(m, 1e-10)
    }
}

/// Closed integer interval of sites.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if end < start {
            return Err(AlfError::InvalidArgument(format!("empty window [{start}, {end}]")));
        }
        Ok(Window { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn contains(&self, other: &Window) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn shifted(&self, n: i64) -> Window {
        Window {
            start: self.start + n,
            end: self.end + n,
        }
    }
}

/// Operator supported on a window of `d`-level sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    pub d: usize,
    pub window: Window,
    pub matrix: ComplexMatrix,
}

impl LocalOperator {
    pub fn new(d: usize, window: Window, matrix: ComplexMatrix) -> Result<Self> {
        let dim = checked_pow(d, window.len());
        if matrix.nrows() as u128 != dim || matrix.ncols() as u128 != dim {
            return Err(AlfError::DimensionMismatch(format!(
                "operator on {} sites of dimension {d} must be {dim}x{dim}, got {}x{}",
                window.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LocalOperator { d, window, matrix })
    }
}

/// `Θ^n(x)` written as a dense matrix on `ambient`.
pub fn shift_embed(x: &LocalOperator, n: usize, ambient: Window) -> Result<LocalOperator> {
    let support = x.window.shifted(n as i64);
    if !ambient.contains(&support) {
        return Err(AlfError::InvalidArgument(format!(
            "shifted support [{}, {}] escapes ambient window [{}, {}]",
            support.start, support.end, ambient.start, ambient.end
        )));
    }
    let left = x.d.pow((support.start - ambient.start) as u32);
    let right = x.d.pow((ambient.end - support.end) as u32);
    let matrix = ComplexMatrix::identity(left, left)
        .kronecker(&x.matrix)
        .kronecker(&ComplexMatrix::identity(right, right));
    LocalOperator::new(x.d, ambient, matrix)
}

/// Partition of unity in operators on sites `[1, M]`.
///
/// When every element is an elementary tensor `f_1 ⊗ ··· ⊗ f_M`, the
/// single-site factors are kept and enable the factorized correlation route.
#[derive(Debug, Clone)]
pub struct LocalPartition {
    d: usize,
    sites: usize,
    elements: Vec<ComplexMatrix>,
    factors: Option<Vec<Vec<ComplexMatrix>>>,
}

impl LocalPartition {
    pub fn new(d: usize, sites: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if d < 2 || sites == 0 {
            return Err(AlfError::InvalidArgument(format!(
                "need d >= 2 and M >= 1, got d={d}, M={sites}"
            )));
        }
        let dim = checked_pow(d, sites);
        if let Some(bad) = elements.iter().find(|e| e.nrows() as u128 != dim) {
            return Err(AlfError::DimensionMismatch(format!(
                "partition element of dimension {} on {sites} sites of dimension {d}",
                bad.nrows()
            )));
        }
        let checked = OperationalPartition::new(elements)?;
        Ok(LocalPartition {
            d,
            sites,
            elements: checked.elements().to_vec(),
            factors: None,
        })
    }

    /// Partition of elementary tensors; `factors[a][t]` acts on site `t + 1` of element `a`.
    pub fn from_factors(d: usize, factors: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let sites = factors.first().map(Vec::len).unwrap_or(0);
        for f in &factors {
            if f.len() != sites || f.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(AlfError::DimensionMismatch(
                    "every element needs one d x d factor per site".into(),
                ));
            }
        }
        let elements = factors.iter().map(|f| tensor_all(f.iter())).collect();
        let mut x = Self::new(d, sites, elements)?;
        x.factors = Some(factors);
        Ok(x)
    }

    /// Partition of an operator-list file on `d`-level sites; `M` is inferred
    /// from the ambient dimension.
    pub fn from_operator_list(d: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements.first().map(|e| e.nrows()).unwrap_or(0);
        let mut sites = 0;
        let mut acc = 1usize;
        while acc < dim {
            acc *= d;
            sites += 1;
        }
        if acc != dim || sites == 0 {
            return Err(AlfError::DimensionMismatch(format!(
                "ambient dimension {dim} is not a positive power of d={d}"
            )));
        }
        Self::new(d, sites, elements)
    }

    /// `{1}` on `sites` sites.
    pub fn identity(d: usize, sites: usize) -> Result<Self> {
        Self::from_factors(d, vec![vec![ComplexMatrix::identity(d, d); sites]])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn factors(&self) -> Option<&[Vec<ComplexMatrix>]> {
        self.factors.as_deref()
    }

    pub fn window(&self) -> Window {
        Window {
            start: 1,
            end: self.sites as i64,
        }
    }

    pub fn to_operational(&self) -> OperationalPartition {
        OperationalPartition::from_parts_unchecked(checked_pow(self.d, self.sites) as usize, self.elements.clone())
    }

    /// Window `[1, M+N-1]` of the `N`-step refinement.
    pub fn refined_window(&self, n_steps: usize) -> Window {
        Window {
            start: 1,
            end: (self.sites + n_steps - 1) as i64,
        }
    }

    fn check_caps(&self, n_steps: usize, caps: &Caps, dense: bool) -> Result<()> {
        if n_steps == 0 {
            return Err(AlfError::InvalidArgument("refinement needs N >= 1".into()));
        }
        let corr = checked_pow(self.size(), n_steps);
        let ambient = checked_pow(self.d, self.sites + n_steps - 1);
        let corr_ok = caps.check_correlation("refined correlation dimension k^N", corr);
        let dense_ok = if dense {
            caps.check_dense("refined ambient dimension d^(M+N-1)", ambient)
        } else {
            Ok(())
        };
        match (corr_ok, dense_ok) {
            (Ok(()), Ok(())) => Ok(()),
            _ => Err(AlfError::CapExceeded {
                what: format!(
                    "N={n_steps}: ambient d^(M+N-1)={ambient} (cap {}), correlation k^N={corr} (cap {})",
                    caps.dense_dim, caps.correlation_dim
                ),
                required: corr.max(if dense { ambient } else { 0 }),
                cap: caps.correlation_dim.min(caps.dense_dim) as u128,
            }),
        }
    }
}

/// Fourier partition `{p_i ⊗ q_j}` on two sites, element index `i*d + j`.
///
/// `p_i = |e_i⟩⟨e_i|` and `q_j = |f_j⟩⟨f_j|` with
/// `f_j = d^{-1/2} Σ_k exp(2πi jk/d) e_k`, indices running over `0..d`.
pub fn fourier_partition(d: usize) -> Result<LocalPartition> {
    if d < 2 {
        return Err(AlfError::InvalidArgument(format!(
            "Fourier partition needs d >= 2, got {d}"
        )));
    }
    let mut factors = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            factors.push(vec![basis_projector(d, i), fourier_projector(d, j)]);
        }
    }
    LocalPartition::from_factors(d, factors)
}

pub fn basis_projector(d: usize, i: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r == i && c == i {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `|f_j⟩`.
pub fn fourier_vector(d: usize, j: usize) -> Vec<Complex64> {
    let norm = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|k| Complex64::from_polar(norm, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
        .collect()
}

pub fn fourier_projector(d: usize, j: usize) -> ComplexMatrix {
    let f = fourier_vector(d, j);
    ComplexMatrix::from_fn(d, d, |r, c| f[r] * f[c].conj())
}

/// Mixed-radix digits of `index` in base `k`, most significant first.
fn digits(mut index: usize, k: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
    out
}

/// `N`-step refinement as dense operators on `[1, M+N-1]`.
pub fn refine(x: &LocalPartition, n_steps: usize, caps: &Caps) -> Result<OperationalPartition> {
    x.check_caps(n_steps, caps, true)?;
    let ambient = x.refined_window(n_steps);
    let shifted: Vec<Vec<ComplexMatrix>> = (0..n_steps)
        .map(|n| {
            x.elements
                .iter()
                .map(|e| {
                    let op = LocalOperator::new(x.d, x.window(), e.clone())?;
                    Ok(shift_embed(&op, n, ambient)?.matrix)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let k = x.size();
    let count = k.pow(n_steps as u32);
    let elements: Vec<ComplexMatrix> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let tuple = digits(idx, k, n_steps);
            let mut acc = shifted[0][tuple[0]].clone();
            for n in 1..n_steps {
                acc = &shifted[n][tuple[n]] * acc;
            }
            acc
        })
        .collect();
    let dim = checked_pow(x.d, ambient.len()) as usize;
    let refined = OperationalPartition::from_parts_unchecked(dim, elements);
    let dev = refined.unity_deviation();
    let tol = n_steps as f64 * TAU_UNITY;
    if dev > tol {
        return Err(AlfError::Validation {
            invariant: "refined partition of unity",
            deviation: dev,
            tolerance: tol,
        });
    }
    Ok(refined)
}

/// Refined correlation matrix `ρ_N(i,j) = ω(ξ_j* ξ_i)`.
///
/// Takes the factorized route when the partition carries single-site
/// factors, the dense route otherwise.
pub fn refined_correlation(
    sys: &SpinChainSystem,
    x: &LocalPartition,
    n_steps: usize,
    caps: &Caps,
) -> Result<DensityMatrix> {
    if x.factors.is_some() {
        refined_correlation_factorized(sys, x, n_steps, caps)
    } else {
        refined_correlation_dense(sys, x, n_steps, caps)
    }
}

/// Dense route: materialise every refined element and the restricted state.
pub fn refined_correlation_dense(
    sys: &SpinChainSystem,
    x: &LocalPartition,
    n_steps: usize,
    caps: &Caps,
) -> Result<DensityMatrix> {
    check_site_dim(sys, x)?;
    let refined = refine(x, n_steps, caps)?;
    let omega = sys.restriction(x.refined_window(n_steps).len(), caps)?;
    let raw = gram_correlation(omega.matrix(), refined.elements());
    DensityMatrix::with_tolerance(raw, 1e-10)
}

/// Factorized route: each refined element is an elementary tensor, so
/// `ω(ξ_j* ξ_i) = Π_s tr(σ A_j(s)* A_i(s))` over sites `s`.
pub fn refined_correlation_factorized(
    sys: &SpinChainSystem,
    x: &LocalPartition,
    n_steps: usize,
    caps: &Caps,
) -> Result<DensityMatrix> {
    check_site_dim(sys, x)?;
    let factors = x
        .factors
        .as_ref()
        .ok_or_else(|| AlfError::InvalidArgument("factorized route needs a partition of elementary tensors".into()))?;
    x.check_caps(n_steps, caps, false)?;
    let d = x.d;
    let sites = x.refined_window(n_steps).len();
    let k = x.size();
    let count = k.pow(n_steps as u32);
    let sigma = sys.site_state.matrix();

    // per refined element: the operator on every site, later shifts on the left
    let site_ops: Vec<Vec<ComplexMatrix>> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let tuple = digits(idx, k, n_steps);
            let mut ops = vec![ComplexMatrix::identity(d, d); sites];
            for (n, &a) in tuple.iter().enumerate() {
                for (t, f) in factors[a].iter().enumerate() {
                    ops[n + t] = f * &ops[n + t];
                }
            }
            ops
        })
        .collect();
    let weighted: Vec<Vec<ComplexMatrix>> = site_ops
        .iter()
        .map(|ops| ops.iter().map(|a| a * sigma).collect())
        .collect();

    let rows: Vec<Vec<Complex64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let mut v = Complex64::new(1.0, 0.0);
                    for s in 0..sites {
                        let t: Complex64 = weighted[i][s]
                            .iter()
                            .zip(site_ops[j][s].iter())
                            .map(|(a, b)| a * b.conj())
                            .sum();
                        v *= t;
                        if v == Complex64::new(0.0, 0.0) {
                            break;
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut rho = ComplexMatrix::zeros(count, count);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            rho[(i, j)] = *v;
            rho[(j, i)] = v.conj();
        }
    }
    DensityMatrix::with_tolerance(rho, 1e-10)
}

fn check_site_dim(sys: &SpinChainSystem, x: &LocalPartition) -> Result<()> {
    if sys.d != x.d {
        return Err(AlfError::DimensionMismatch(format!(
            "chain has d={}, partition has d={}",
            sys.d, x.d
        )));
    }
    Ok(())
}

/// `S(ρ̃_N) = (N-1)(ln d + S(site_state))` for the Fourier partition on a product state.
pub fn reduced_refined_entropy(sys: &SpinChainSystem, n_steps: usize) -> Result<f64> {
    if n_steps < 2 {
        return Err(AlfError::InvalidArgument(format!(
            "reduced refined entropy needs N >= 2, got {n_steps}"
        )));
    }
    Ok((n_steps - 1) as f64 * ((sys.d as f64).ln() + sys.entropy_density()))
}

/// Splits a Fourier refined correlation matrix into `ρ̃_N` (indices
/// `i_1..i_{N-1}, k_0..k_{N-2}`) and `ρ^r` (indices `i_0, k_{N-1}`).
pub fn split_fourier_correlation(
    rho_n: &DensityMatrix,
    d: usize,
    n_steps: usize,
) -> Result<(DensityMatrix, DensityMatrix)> {
    if n_steps < 2 {
        return Err(AlfError::InvalidArgument("splitting needs N >= 2".into()));
    }
    // factor order i_0, k_0, i_1, k_1, ..., i_{N-1}, k_{N-1}
    let dims = vec![d; 2 * n_steps];
    let last = 2 * n_steps - 1;
    let middle: Vec<usize> = (1..last).collect();
    let reduced = partial_trace(rho_n, &dims, &middle)?;
    let remainder = partial_trace(rho_n, &dims, &[0, last])?;
    Ok((reduced, remainder))
}

/// The bound chain `S(ρ̃_N) - 2 ln d <= S(ρ_N) <= S(ω_[1,N+1]) + (N+1) ln d`
/// for the Fourier partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitBound {
    pub n_steps: usize,
    pub s_rho_n: f64,
    /// Closed form `(N-1)(ln d + σ)`.
    pub s_reduced: f64,
    /// `S(ρ̃_N)` from the partial trace of the computed `ρ_N`.
    pub s_reduced_dense: f64,
    pub s_remainder: f64,
    pub s_remainder_bound: f64,
    pub upper_bound: f64,
    pub satisfied: bool,
}

pub fn split_bound_check(sys: &SpinChainSystem, n_steps: usize, caps: &Caps) -> Result<SplitBound> {
    let x = fourier_partition(sys.d)?;
    let rho = refined_correlation(sys, &x, n_steps, caps)?;
    split_bound_from(sys, &rho, n_steps)
}

pub(crate) fn split_bound_from(sys: &SpinChainSystem, rho: &DensityMatrix, n_steps: usize) -> Result<SplitBound> {
    let d = sys.d;
    let s_rho_n = von_neumann_entropy(rho);
    let s_reduced = reduced_refined_entropy(sys, n_steps)?;
    let (reduced, remainder) = split_fourier_correlation(rho, d, n_steps)?;
    let ln_d = (d as f64).ln();
    let sites = (n_steps + 1) as f64;
    let upper_bound = sites * sys.entropy_density() + sites * ln_d;
    let s_remainder_bound = 2.0 * ln_d;
    Ok(SplitBound {
        n_steps,
        s_rho_n,
        s_reduced,
        s_reduced_dense: von_neumann_entropy(&reduced),
        s_remainder: von_neumann_entropy(&remainder),
        s_remainder_bound,
        upper_bound,
        satisfied: s_rho_n >= s_reduced - s_remainder_bound - BOUND_SLACK && s_rho_n <= upper_bound + BOUND_SLACK,
    })
}

/// One row of an entropy-rate table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub n_steps: usize,
    pub entropy: f64,
    pub rate: f64,
    /// `S(ρ_N) - S(ρ_{N-1})`, with `S(ρ_0) = 0`.
    pub increment: f64,
}

/// `S(ρ_N)`, `S(ρ_N)/N` and increments for `N = 1..=n_max`. Finite-N data only.
pub fn entropy_rate_report(
    sys: &SpinChainSystem,
    x: &LocalPartition,
    n_max: usize,
    caps: &Caps,
) -> Result<Vec<RateRow>> {
    let entropies: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(|n| refined_correlation(sys, x, n, caps).map(|rho| von_neumann_entropy(&rho)))
        .collect::<Result<Vec<_>>>()?;
    let mut prev = 0.0;
    Ok(entropies
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let row = RateRow {
                n_steps: i + 1,
                entropy: s,
                rate: s / (i + 1) as f64,
                increment: s - prev,
            };
            prev = s;
            row
        })
        .collect())
}
