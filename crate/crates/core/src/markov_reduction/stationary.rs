//! Exact stationary measures.
//!
//! The fast route solves `μ(P - I) = 0, Σμ = 1` in `f64`, rounds each entry
//! to the nearest small-denominator rational and then checks `μP = μ` and
//! `Σμ = 1` exactly. An irreducible chain has only one solution, so a
//! candidate that passes is the stationary measure. When the check fails,
//! sparse rational Gaussian elimination takes over.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::structure::structure_checks;
use super::FiniteMarkovChain;
use crate::error::{AlfError, Result};

/// Largest chain solved by exact elimination.
pub const ELIMINATION_CAP: usize = 1 << 10;

/// `‖μP - μ‖_1`, exactly.
pub fn stationary_residual(chain: &FiniteMarkovChain, mu: &[BigRational]) -> BigRational {
    chain.step(mu).iter().zip(mu).map(|(a, b)| (a - b).abs()).sum()
}

fn is_stationary(chain: &FiniteMarkovChain, mu: &[BigRational]) -> bool {
    mu.iter().all(|p| !p.is_negative())
        && mu.iter().sum::<BigRational>().is_one()
        && stationary_residual(chain, mu).is_zero()
}

/// Unique stationary measure. It exists exactly when the chain has a single
/// closed class; transient states get weight zero. Irreducible chains are
/// the case without transients.
pub fn stationary_measure(chain: &FiniteMarkovChain) -> Result<Vec<BigRational>> {
    let report = structure_checks(chain);
    if report.closed_classes.len() != 1 {
        return Err(AlfError::Reducible {
            components: report.components,
        });
    }
    if report.irreducible {
        return solve_irreducible(chain);
    }
    let class = &report.closed_classes[0];
    let local = restrict(chain, class)?;
    let nu = solve_irreducible(&local)?;
    let mut mu = vec![BigRational::zero(); chain.len()];
    for (i, &a) in class.iter().enumerate() {
        mu[a] = nu[i].clone();
    }
    Ok(mu)
}

fn solve_irreducible(chain: &FiniteMarkovChain) -> Result<Vec<BigRational>> {
    if let Some(mu) = float_guess(chain) {
        if is_stationary(chain, &mu) {
            return Ok(mu);
        }
    }
    stationary_by_elimination(chain)
}

/// The sub-chain on a closed class (sorted), with a uniform initial measure.
pub(crate) fn restrict(chain: &FiniteMarkovChain, class: &[usize]) -> Result<FiniteMarkovChain> {
    let pos = |b: usize| class.binary_search(&b).expect("class is closed");
    let rows = class
        .iter()
        .map(|&a| chain.row(a).iter().map(|(b, p)| (pos(*b), p.clone())).collect())
        .collect();
    let labels = class.iter().map(|&a| chain.labels()[a].clone()).collect();
    let w = BigRational::new(BigInt::one(), BigInt::from(class.len()));
    FiniteMarkovChain::new(labels, rows, vec![w; class.len()])
}

fn float_guess(chain: &FiniteMarkovChain) -> Option<Vec<BigRational>> {
    let n = chain.len();
    let p = chain.dense_f64();
    // rows of (P^T - I), the last one replaced by the normalization
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == n - 1 {
            1.0
        } else {
            p[j][i] - if i == j { 1.0 } else { 0.0 }
        }
    });
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    x.iter().map(|&v| rationalize(v, 1e-12, 1 << 40)).collect()
}

/// Closest continued-fraction convergent within `tol`, with denominator at
/// most `max_den`.
pub(crate) fn rationalize(x: f64, tol: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = a as i128;
        let h = ai * h1 + h0;
        let k = ai * k1 + k0;
        if k > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        if (x - h as f64 / k as f64).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h), BigInt::from(k)));
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Exact solve of `(P^T - I) μ = 0` with the last equation replaced by
/// `Σμ = 1`.
pub fn stationary_by_elimination(chain: &FiniteMarkovChain) -> Result<Vec<BigRational>> {
    let n = chain.len();
    if n > ELIMINATION_CAP {
        return Err(AlfError::CapExceeded {
            what: "states for exact elimination".into(),
            required: n as u128,
            cap: ELIMINATION_CAP as u128,
        });
    }
    let mut rows: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); n];
    let mut rhs = vec![BigRational::zero(); n];
    for a in 0..n {
        for (b, p) in chain.row(a) {
            if *b != n - 1 {
                *rows[*b].entry(a).or_insert_with(BigRational::zero) += p;
            }
        }
    }
    for (i, row) in rows.iter_mut().enumerate().take(n - 1) {
        *row.entry(i).or_insert_with(BigRational::zero) -= BigRational::one();
        row.retain(|_, v| !v.is_zero());
    }
    rows[n - 1] = (0..n).map(|j| (j, BigRational::one())).collect();
    rhs[n - 1] = BigRational::one();

    for c in 0..n {
        let pivot = (c..n)
            .filter(|&r| rows[r].contains_key(&c))
            .min_by_key(|&r| rows[r].len())
            .ok_or_else(|| AlfError::Consistency(format!("singular stationary system at column {c}")))?;
        rows.swap(c, pivot);
        rhs.swap(c, pivot);
        let (head, tail) = rows.split_at_mut(c + 1);
        let prow = &head[c];
        let pval = prow[&c].clone();
        for (off, row) in tail.iter_mut().enumerate() {
            let Some(v) = row.get(&c).cloned() else { continue };
            let f = v / &pval;
            for (j, pv) in prow {
                let e = row.entry(*j).or_insert_with(BigRational::zero);
                *e -= &f * pv;
                if e.is_zero() {
                    row.remove(j);
                }
            }
            let r = c + 1 + off;
            let delta = &f * &rhs[c];
            rhs[r] -= delta;
        }
    }
    let mut mu = vec![BigRational::zero(); n];
    for c in (0..n).rev() {
        let mut acc = rhs[c].clone();
        for (j, v) in rows[c].range(c + 1..) {
            acc -= v * &mu[*j];
        }
        mu[c] = acc / &rows[c][&c];
    }
    if !is_stationary(chain, &mu) {
        return Err(AlfError::Consistency("elimination result is not stationary".into()));
    }
    Ok(mu)
}
