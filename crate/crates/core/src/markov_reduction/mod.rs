//! Exact finite Markov chains and the GICAR fine/coarse reduction.
//!
//! Transition probabilities and measures are exact rationals; entropies are
//! evaluated in `f64` only at the end.

mod entropy;
mod gicar_chain;
mod lumping;
mod stationary;
mod structure;

pub use entropy::{closed_form_rate, entropy_rate, finite_n_entropy, row_entropy};
pub use gicar_chain::{
    build_fine_chain, classify_states, closed_form_coarse_stationary, coarse_grain, CoarseChain, CoarseState,
    FineChain, FineState, StateSplit,
};
pub use lumping::{
    check_lumpable, check_path_lumpability, quotient_chain, LumpWitness, LumpabilityReport, PathLumpReport,
};
pub use stationary::{stationary_by_elimination, stationary_measure, stationary_residual};
pub use structure::{strongly_connected_components, structure_checks, StructureReport};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{AlfError, Result};

/// A sparse row: `(column, probability)` with strictly positive entries,
/// sorted by column.
pub type SparseRow = Vec<(usize, BigRational)>;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMarkovChain {
    labels: Vec<String>,
    rows: Vec<SparseRow>,
    mu0: Vec<BigRational>,
}

impl FiniteMarkovChain {
    /// Checks exact row-stochasticity and normalization of `mu0`. Zero
    /// entries are dropped and duplicate columns are rejected.
    pub fn new(labels: Vec<String>, rows: Vec<SparseRow>, mu0: Vec<BigRational>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(AlfError::InvalidArgument("chain has no states".into()));
        }
        if rows.len() != n || mu0.len() != n {
            return Err(AlfError::DimensionMismatch(format!(
                "{n} labels, {} rows, {} initial weights",
                rows.len(),
                mu0.len()
            )));
        }
        let mut clean = Vec::with_capacity(n);
        for (a, row) in rows.into_iter().enumerate() {
            let mut row: SparseRow = row.into_iter().filter(|(_, p)| !p.is_zero()).collect();
            row.sort_by_key(|(b, _)| *b);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(AlfError::InvalidArgument(format!("row {a} repeats a column")));
            }
            if let Some((b, p)) = row.iter().find(|(b, p)| *b >= n || p.is_negative()) {
                return Err(AlfError::InvalidArgument(format!(
                    "row {a}: bad entry {p} at column {b}"
                )));
            }
            let sum: BigRational = row.iter().map(|(_, p)| p).sum();
            if !sum.is_one() {
                return Err(AlfError::Validation {
                    invariant: "row sums to 1",
                    deviation: to_f64(&(sum - BigRational::one()).abs()),
                    tolerance: 0.0,
                });
            }
            clean.push(row);
        }
        if mu0.iter().any(|p| p.is_negative()) {
            return Err(AlfError::InvalidArgument("negative initial weight".into()));
        }
        let total: BigRational = mu0.iter().sum();
        if !total.is_one() {
            return Err(AlfError::Validation {
                invariant: "initial measure sums to 1",
                deviation: to_f64(&(total - BigRational::one()).abs()),
                tolerance: 0.0,
            });
        }
        Ok(FiniteMarkovChain {
            labels,
            rows: clean,
            mu0,
        })
    }

    pub fn from_dense(labels: Vec<String>, p: Vec<Vec<BigRational>>, mu0: Vec<BigRational>) -> Result<Self> {
        let rows = p.into_iter().map(|row| row.into_iter().enumerate().collect()).collect();
        Self::new(labels, rows, mu0)
    }

    /// Chain with uniform initial measure and states labelled by index.
    pub fn from_dense_uniform(p: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = p.len();
        let labels = (0..n).map(|i| i.to_string()).collect();
        let w = BigRational::new(BigInt::one(), BigInt::from(n.max(1)));
        Self::from_dense(labels, p, vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, a: usize) -> &[(usize, BigRational)] {
        &self.rows[a]
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn mu0(&self) -> &[BigRational] {
        &self.mu0
    }

    pub fn with_mu0(self, mu0: Vec<BigRational>) -> Result<Self> {
        Self::new(self.labels, self.rows, mu0)
    }

    pub fn prob(&self, a: usize, b: usize) -> BigRational {
        self.rows[a]
            .binary_search_by_key(&b, |(c, _)| *c)
            .map(|i| self.rows[a][i].1.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    /// `μ ↦ μP`.
    pub fn step(&self, mu: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.len()];
        for (a, row) in self.rows.iter().enumerate() {
            if mu[a].is_zero() {
                continue;
            }
            for (b, p) in row {
                out[*b] += &mu[a] * p;
            }
        }
        out
    }

    pub fn dense_f64(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (a, row) in self.rows.iter().enumerate() {
            for (b, p) in row {
                m[a][*b] = to_f64(p);
            }
        }
        m
    }
}

/// Lossless-as-possible conversion, also for very large numerators and
/// denominators.
pub fn to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    scaled_ratio(x.numer(), x.denom())
}

/// `num / den` computed after shifting both below 2^64.
pub(crate) fn scaled_ratio(num: &BigInt, den: &BigInt) -> f64 {
    let shift = num.bits().max(den.bits()).saturating_sub(64);
    let n = (num >> shift).to_f64().unwrap_or(0.0);
    let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// `{num, den}` encoding; integers that fit in `i64` become JSON numbers,
/// larger ones decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalJson {
    pub num: serde_json::Value,
    pub den: serde_json::Value,
}

fn int_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

impl From<&BigRational> for RationalJson {
    fn from(x: &BigRational) -> Self {
        RationalJson {
            num: int_json(x.numer()),
            den: int_json(x.denom()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionJson {
    pub from: usize,
    pub to: usize,
    pub p: RationalJson,
}

/// Inspectable description of a chain: labels, exact transitions, initial
/// and (when supplied) stationary measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDescription {
    pub states: Vec<String>,
    pub transitions: Vec<TransitionJson>,
    pub mu0: Vec<RationalJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<RationalJson>>,
}

impl ChainDescription {
    pub fn new(chain: &FiniteMarkovChain, stationary: Option<&[BigRational]>) -> Self {
        let transitions = chain
            .rows
            .iter()
            .enumerate()
            .flat_map(|(a, row)| {
                row.iter().map(move |(b, p)| TransitionJson {
                    from: a,
                    to: *b,
                    p: p.into(),
                })
            })
            .collect();
        ChainDescription {
            states: chain.labels.clone(),
            transitions,
            mu0: chain.mu0.iter().map(Into::into).collect(),
            stationary: stationary.map(|mu| mu.iter().map(Into::into).collect()),
        }
    }
}

#[cfg(test)]
pub(crate) fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_stochastic_rows() {
        let bad = FiniteMarkovChain::from_dense_uniform(vec![vec![q(1, 2), q(1, 3)], vec![q(1, 2), q(1, 2)]]);
        assert!(matches!(bad, Err(AlfError::Validation { .. })));
        let neg = FiniteMarkovChain::from_dense_uniform(vec![vec![q(3, 2), q(-1, 2)], vec![q(1, 2), q(1, 2)]]);
        assert!(neg.is_err());
        let bad_mu = FiniteMarkovChain::from_dense(
            vec!["a".into(), "b".into()],
            vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]],
            vec![q(1, 2), q(1, 3)],
        );
        assert!(bad_mu.is_err());
    }

    #[test]
    fn step_and_lookup() {
        let c = FiniteMarkovChain::from_dense_uniform(vec![vec![q(1, 4), q(3, 4)], vec![q(1, 1), q(0, 1)]]).unwrap();
        assert_eq!(c.row(1).len(), 1);
        assert_eq!(c.prob(0, 1), q(3, 4));
        assert_eq!(c.prob(1, 1), q(0, 1));
        assert_eq!(c.step(c.mu0()), vec![q(5, 8), q(3, 8)]);
    }

    #[test]
    fn huge_ratios_convert() {
        let den = BigInt::one() << 20000usize;
        let num = &den / BigInt::from(3);
        let x = BigRational::new_raw(num, den);
        assert!((to_f64(&x) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn json_encoding() {
        let j = serde_json::to_string(&RationalJson::from(&q(3, 8))).unwrap();
        assert_eq!(j, r#"{"num":3,"den":8}"#);
        let big = BigRational::new(BigInt::one(), BigInt::one() << 100usize);
        let j = serde_json::to_value(RationalJson::from(&big)).unwrap();
        assert!(j["den"].is_string());
    }
}
