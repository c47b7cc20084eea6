use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::stationary::{restrict, stationary_measure};
use super::structure::structure_checks;
use super::{scaled_ratio, to_f64, FiniteMarkovChain};
use crate::error::{AlfError, Result};
use crate::quantum_core::shannon_entropy;

/// `H(P_a·) = -Σ_b P_ab ln P_ab`.
pub fn row_entropy(chain: &FiniteMarkovChain, a: usize) -> f64 {
    chain
        .row(a)
        .iter()
        .map(|(_, p)| {
            let p = to_f64(p);
            -p * p.ln()
        })
        .sum()
}

/// Entropy of the first `N + 1` steps,
/// `S_N = H(μ_0) + Σ_{n<N} Σ_a μ_n(a) H(P_a·)`.
///
/// `μ_n` is propagated exactly as an integer vector over a common
/// denominator, so long horizons carry no rounding drift.
pub fn finite_n_entropy(chain: &FiniteMarkovChain, n_steps: usize) -> Result<f64> {
    let n = chain.len();
    let h: Vec<f64> = (0..n).map(|a| row_entropy(chain, a)).collect();
    let mu0: Vec<f64> = chain.mu0().iter().map(to_f64).collect();
    let mut total = shannon_entropy(&mu0)?;
    if n_steps == 0 {
        return Ok(total);
    }

    let scale = chain
        .rows()
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    let weights: Vec<Vec<(usize, BigInt)>> = chain
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|(b, p)| (*b, p.numer() * (&scale / p.denom())))
                .collect()
        })
        .collect();
    let mut den = chain.mu0().iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let mut v: Vec<BigInt> = chain.mu0().iter().map(|p| p.numer() * (&den / p.denom())).collect();

    for step in 0..n_steps {
        total += v
            .iter()
            .zip(&h)
            .filter(|(x, _)| !x.is_zero())
            .map(|(x, ha)| scaled_ratio(x, &den) * ha)
            .sum::<f64>();
        if step + 1 == n_steps {
            break;
        }
        let mut next = vec![BigInt::zero(); n];
        for (a, row) in weights.iter().enumerate() {
            if v[a].is_zero() {
                continue;
            }
            for (b, w) in row {
                next[*b] += &v[a] * w;
            }
        }
        v = next;
        den *= &scale;
        if step % 32 == 31 {
            let g = v.iter().fold(den.clone(), |g, x| g.gcd(x));
            if !g.is_one() {
                v.iter_mut().for_each(|x| *x /= &g);
                den /= &g;
            }
        }
    }
    Ok(total)
}

/// `-Σ_a μ∞(a) Σ_b P_ab ln P_ab`.
///
/// Needs `μ_n → μ∞` from every start: one closed class, aperiodic. Primitive
/// chains qualify; transient states are allowed since they carry no
/// stationary weight.
pub fn entropy_rate(chain: &FiniteMarkovChain) -> Result<f64> {
    let report = structure_checks(chain);
    if report.closed_classes.len() != 1 {
        return Err(AlfError::Reducible {
            components: report.components,
        });
    }
    if !report.ergodic {
        let class = &report.closed_classes[0];
        let sub = structure_checks(&restrict(chain, class)?);
        return Err(AlfError::NotPrimitive {
            period: sub.period.unwrap_or(0),
        });
    }
    let mu = stationary_measure(chain)?;
    Ok(mu
        .iter()
        .enumerate()
        .map(|(a, m)| to_f64(m) * row_entropy(chain, a))
        .sum())
}

/// `(2 - 1/M) ln 2`.
pub fn closed_form_rate(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(AlfError::InvalidArgument(format!("window size M = {m}, need M >= 2")));
    }
    Ok((2.0 - 1.0 / m as f64) * LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_reduction::q;

    #[test]
    fn two_fair_bits() {
        let c = FiniteMarkovChain::from_dense_uniform(vec![vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]]).unwrap();
        assert!((finite_n_entropy(&c, 1).unwrap() - 2.0 * LN_2).abs() < 1e-15);
        assert!((finite_n_entropy(&c, 40).unwrap() - 41.0 * LN_2).abs() < 1e-12);
        assert!((entropy_rate(&c).unwrap() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn matches_path_enumeration() {
        let c = FiniteMarkovChain::from_dense(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![q(1, 2), q(1, 3), q(1, 6)],
                vec![q(0, 1), q(1, 4), q(3, 4)],
                vec![q(2, 5), q(0, 1), q(3, 5)],
            ],
            vec![q(1, 7), q(2, 7), q(4, 7)],
        )
        .unwrap();
        let p = c.dense_f64();
        let mu0: Vec<f64> = c.mu0().iter().map(to_f64).collect();
        for n in 0..=6usize {
            let mut probs = Vec::new();
            for code in 0..3usize.pow(n as u32 + 1) {
                let path: Vec<usize> = (0..=n).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
                let mut w = mu0[path[0]];
                for s in path.windows(2) {
                    w *= p[s[0]][s[1]];
                }
                probs.push(w);
            }
            let oracle = shannon_entropy(&probs).unwrap();
            assert!((finite_n_entropy(&c, n).unwrap() - oracle).abs() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn single_self_loop_has_zero_rate() {
        let c = FiniteMarkovChain::from_dense_uniform(vec![vec![q(1, 1)]]).unwrap();
        assert_eq!(entropy_rate(&c).unwrap(), 0.0);
        assert_eq!(finite_n_entropy(&c, 10).unwrap(), 0.0);
    }

    #[test]
    fn periodic_cycle_is_rejected() {
        let c = FiniteMarkovChain::from_dense_uniform(vec![
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1), q(0, 1)],
        ])
        .unwrap();
        assert!(matches!(entropy_rate(&c), Err(AlfError::NotPrimitive { period: 3 })));
        // the finite-N entropy still exists: only the initial choice is random
        assert!((finite_n_entropy(&c, 5).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        assert!((closed_form_rate(2).unwrap() - 1.039720770839918).abs() < 1e-12);
        assert!(closed_form_rate(1).is_err());
        let mut last = 0.0;
        for m in 2..200 {
            let r = closed_form_rate(m).unwrap();
            assert!(r > last && r < 2.0 * LN_2);
            assert!((2.0 * LN_2 - r - LN_2 / m as f64).abs() < 1e-15);
            last = r;
        }
    }
}
