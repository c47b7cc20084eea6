//! The Markov chains hidden in the diagonal GICAR correlation matrices.
//!
//! Fine states are the partition elements `(φ_1; ψ)`. From `(φ, ψ)` the
//! chain moves to `(φ', ψ')` with `ψ' = (φ_2, ..., φ_M, x)`, for either `x`
//! and every realizable `φ'_1`, with probability `|c_{φ'ψ'}|^2 / 2`.
//!
//! Coarse states `E^s_{pq}` collect the fine states with `φ_1 = p`,
//! `ψ_M = q` and `s` twos in `ψ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::lumping::quotient_chain;
use super::FiniteMarkovChain;
use crate::error::{AlfError, Result};
use crate::fermion_shift::GicarPartition;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FineState {
    pub phi1: u8,
    pub psi: Vec<u8>,
}

impl std::fmt::Display for FineState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let psi: String = self.psi.iter().map(|v| char::from(b'0' + v)).collect();
        write!(f, "({};{psi})", self.phi1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoarseState {
    pub s: usize,
    pub p: u8,
    pub q: u8,
}

impl std::fmt::Display for CoarseState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "E^{}_{}{}", self.s, self.p, self.q)
    }
}

impl CoarseState {
    /// Whether `E^s_{pq}` holds any fine state on `M` sites: the tail needs
    /// `s - p + 1` twos and the head of `ψ` needs `s - q + 1`, both in `0..M`.
    pub fn is_nonempty(&self, m: usize) -> bool {
        let ok = |k: u8| {
            let t = self.s as i64 - k as i64 + 1;
            (0..m as i64).contains(&t)
        };
        ok(self.p) && ok(self.q)
    }

    /// All nonempty classes for window `M`, ordered by `(s, p, q)`.
    pub fn all(m: usize) -> Vec<CoarseState> {
        let mut out = Vec::new();
        for s in 0..=m {
            for p in [1u8, 2] {
                for q in [1u8, 2] {
                    let c = CoarseState { s, p, q };
                    if c.is_nonempty(m) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FineChain {
    pub m: usize,
    pub states: Vec<FineState>,
    /// φ-tails, same order as `states`.
    pub tails: Vec<Vec<u8>>,
    pub chain: FiniteMarkovChain,
}

pub fn build_fine_chain(partition: &GicarPartition) -> Result<FineChain> {
    let m = partition.window();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let weight = BigRational::new(BigInt::one(), BigInt::one() << m);
    let elements = partition.elements();
    let states: Vec<FineState> = elements
        .iter()
        .map(|e| FineState {
            phi1: e.phi1(),
            psi: e.psi.clone(),
        })
        .collect();
    let rows = (0..elements.len())
        .map(|a| {
            partition
                .successors(a)
                .iter()
                .map(|&b| (b, &half * &elements[b].coeff_sq))
                .collect()
        })
        .collect();
    let mu0 = elements.iter().map(|e| &weight * &e.coeff_sq).collect();
    let labels = states.iter().map(ToString::to_string).collect();
    let chain = FiniteMarkovChain::new(labels, rows, mu0)?;
    Ok(FineChain {
        m,
        states,
        tails: elements.iter().map(|e| e.tail().to_vec()).collect(),
        chain,
    })
}

/// `A_3`: states whose φ-tail is constant (three successors); `A_4` the rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateSplit {
    pub a3: Vec<usize>,
    pub a4: Vec<usize>,
}

pub fn classify_states(fine: &FineChain) -> StateSplit {
    let (a3, a4) = (0..fine.states.len()).partition(|&a| {
        let t = &fine.tails[a];
        t.iter().all(|&v| v == t[0])
    });
    StateSplit { a3, a4 }
}

impl FineChain {
    pub fn coarse_state(&self, a: usize) -> CoarseState {
        let st = &self.states[a];
        CoarseState {
            s: st.psi.iter().filter(|&&v| v == 2).count(),
            p: st.phi1,
            q: *st.psi.last().expect("M >= 2"),
        }
    }

    /// The classes `E^s_{pq}` as lists of fine states, in coarse order.
    pub fn coarse_classes(&self) -> (Vec<CoarseState>, Vec<Vec<usize>>) {
        let states = CoarseState::all(self.m);
        let mut classes = vec![Vec::new(); states.len()];
        for a in 0..self.states.len() {
            let c = self.coarse_state(a);
            let i = states.binary_search(&c).expect("every fine state has a class");
            classes[i].push(a);
        }
        (states, classes)
    }
}

#[derive(Debug, Clone)]
pub struct CoarseChain {
    pub m: usize,
    pub states: Vec<CoarseState>,
    pub classes: Vec<Vec<usize>>,
    pub chain: FiniteMarkovChain,
}

impl CoarseChain {
    /// Coarse indices whose classes lie in `A_3`.
    pub fn a3(&self, fine: &FineChain) -> Vec<usize> {
        let split = classify_states(fine);
        (0..self.states.len())
            .filter(|&c| self.classes[c].iter().all(|a| split.a3.contains(a)))
            .collect()
    }
}

pub fn coarse_grain(fine: &FineChain) -> Result<CoarseChain> {
    let (states, classes) = fine.coarse_classes();
    if let Some(i) = classes.iter().position(Vec::is_empty) {
        return Err(AlfError::Consistency(format!("class {} is empty", states[i])));
    }
    let labels = states.iter().map(ToString::to_string).collect();
    let chain = quotient_chain(&fine.chain, &classes, labels)?;
    Ok(CoarseChain {
        m: fine.m,
        states,
        classes,
        chain,
    })
}

/// The closed-form stationary measure on the coarse classes: `1/(2M)` on
/// `E^0_11` and `E^M_22`, `1/(4M)` on the other `4M - 4`.
pub fn closed_form_coarse_stationary(m: usize) -> Vec<BigRational> {
    CoarseState::all(m)
        .into_iter()
        .map(|c| {
            let extreme = (c.s == 0 && c.p == 1 && c.q == 1) || (c.s == m && c.p == 2 && c.q == 2);
            let den = if extreme { 2 * m } else { 4 * m };
            BigRational::new(BigInt::one(), BigInt::from(den))
        })
        .collect()
}
