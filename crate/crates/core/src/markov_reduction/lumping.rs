use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{FiniteMarkovChain, SparseRow};
use crate::error::{AlfError, Result};

/// Two states of one class whose probabilities of jumping into a target
/// class differ.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpWitness {
    pub state: usize,
    pub other: usize,
    pub target_class: usize,
    pub mass: BigRational,
    pub other_mass: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LumpabilityReport {
    pub lumpable: bool,
    pub witness: Option<LumpWitness>,
}

fn class_of(n: usize, classes: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut owner = vec![usize::MAX; n];
    for (c, members) in classes.iter().enumerate() {
        if members.is_empty() {
            return Err(AlfError::InvalidArgument(format!("class {c} is empty")));
        }
        for &a in members {
            if a >= n || owner[a] != usize::MAX {
                return Err(AlfError::InvalidArgument(format!(
                    "state {a} is out of range or listed twice"
                )));
            }
            owner[a] = c;
        }
    }
    if let Some(a) = owner.iter().position(|&c| c == usize::MAX) {
        return Err(AlfError::InvalidArgument(format!("state {a} belongs to no class")));
    }
    Ok(owner)
}

fn class_masses(chain: &FiniteMarkovChain, owner: &[usize], a: usize) -> BTreeMap<usize, BigRational> {
    let mut m = BTreeMap::new();
    for (b, p) in chain.row(a) {
        *m.entry(owner[*b]).or_insert_with(BigRational::zero) += p;
    }
    m
}

/// Strong lumpability: `Σ_{b ∈ C_2} P_ab` is the same for every `a ∈ C_1`,
/// for every pair of classes.
pub fn check_lumpable(chain: &FiniteMarkovChain, classes: &[Vec<usize>]) -> Result<LumpabilityReport> {
    let owner = class_of(chain.len(), classes)?;
    for members in classes {
        let first = members[0];
        let reference = class_masses(chain, &owner, first);
        for &a in &members[1..] {
            let masses = class_masses(chain, &owner, a);
            if masses != reference {
                let zero = BigRational::zero();
                let target = reference
                    .keys()
                    .chain(masses.keys())
                    .copied()
                    .find(|c| reference.get(c).unwrap_or(&zero) != masses.get(c).unwrap_or(&zero))
                    .expect("maps differ");
                return Ok(LumpabilityReport {
                    lumpable: false,
                    witness: Some(LumpWitness {
                        state: first,
                        other: a,
                        target_class: target,
                        mass: reference.get(&target).cloned().unwrap_or_default(),
                        other_mass: masses.get(&target).cloned().unwrap_or_default(),
                    }),
                });
            }
        }
    }
    Ok(LumpabilityReport {
        lumpable: true,
        witness: None,
    })
}

/// The lumped chain; fails with a consistency error when the classes are
/// not lumpable.
pub fn quotient_chain(
    chain: &FiniteMarkovChain,
    classes: &[Vec<usize>],
    labels: Vec<String>,
) -> Result<FiniteMarkovChain> {
    if labels.len() != classes.len() {
        return Err(AlfError::DimensionMismatch(format!(
            "{} labels for {} classes",
            labels.len(),
            classes.len()
        )));
    }
    let report = check_lumpable(chain, classes)?;
    if let Some(w) = report.witness {
        return Err(AlfError::Consistency(format!(
            "not lumpable: states {} and {} send {} vs {} into class {}",
            w.state, w.other, w.mass, w.other_mass, w.target_class
        )));
    }
    let owner = class_of(chain.len(), classes)?;
    let rows: Vec<SparseRow> = classes
        .iter()
        .map(|members| class_masses(chain, &owner, members[0]).into_iter().collect())
        .collect();
    let mu0 = classes
        .iter()
        .map(|members| members.iter().map(|&a| &chain.mu0()[a]).sum())
        .collect();
    FiniteMarkovChain::new(labels, rows, mu0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathLumpReport {
    pub max_len: usize,
    pub fine_paths: usize,
    pub coarse_paths: usize,
    pub mismatches: usize,
}

impl PathLumpReport {
    pub fn ok(&self) -> bool {
        self.mismatches == 0
    }
}

/// Compares, exactly, each coarse path probability `μ(C_1) P_{C_1C_2} ⋯`
/// with the summed probabilities of the fine paths it covers, for paths of
/// `1..=max_len` states.
pub fn check_path_lumpability(
    fine: &FiniteMarkovChain,
    classes: &[Vec<usize>],
    coarse: &FiniteMarkovChain,
    max_len: usize,
) -> Result<PathLumpReport> {
    let owner = class_of(fine.len(), classes)?;
    if coarse.len() != classes.len() {
        return Err(AlfError::DimensionMismatch(
            "coarse chain and classes differ in size".into(),
        ));
    }

    let mut from_fine: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    let mut fine_paths = 0usize;
    let mut stack: Vec<(usize, usize, BigRational)> = Vec::new();
    let mut trail: Vec<usize> = Vec::with_capacity(max_len);
    for a in 0..fine.len() {
        if !fine.mu0()[a].is_zero() && max_len > 0 {
            stack.push((a, 1, fine.mu0()[a].clone()));
        }
    }
    // depth-first; `trail` holds the coarse labels of the current prefix
    while let Some((a, depth, w)) = stack.pop() {
        trail.truncate(depth - 1);
        trail.push(owner[a]);
        fine_paths += 1;
        *from_fine.entry(trail.clone()).or_insert_with(BigRational::zero) += &w;
        if depth < max_len {
            for (b, p) in fine.row(a) {
                stack.push((*b, depth + 1, &w * p));
            }
        }
    }

    let mut from_coarse: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    let mut stack: Vec<(Vec<usize>, BigRational)> = (0..coarse.len())
        .filter(|&c| !coarse.mu0()[c].is_zero() && max_len > 0)
        .map(|c| (vec![c], coarse.mu0()[c].clone()))
        .collect();
    while let Some((path, w)) = stack.pop() {
        if path.len() < max_len {
            let last = *path.last().expect("nonempty");
            for (d, p) in coarse.row(last) {
                let mut next = path.clone();
                next.push(*d);
                stack.push((next, &w * p));
            }
        }
        from_coarse.insert(path, w);
    }

    let zero = BigRational::zero();
    let mismatches = from_fine
        .keys()
        .chain(from_coarse.keys())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .filter(|k| from_fine.get(*k).unwrap_or(&zero) != from_coarse.get(*k).unwrap_or(&zero))
        .count();
    Ok(PathLumpReport {
        max_len,
        fine_paths,
        coarse_paths: from_coarse.len(),
        mismatches,
    })
}
