use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, OracleMode};
use super::table::{Cell, ResultTable};
use crate::error::{AlfError, Result};
use crate::fermion_shift::{brute_force_correlation, build_gicar_partition, GicarPartition};
use crate::markov_reduction::{
    build_fine_chain, check_lumpable, classify_states, closed_form_rate, coarse_grain, entropy_rate, finite_n_entropy,
    stationary_measure, structure_checks, ChainDescription,
};
use crate::quantum_core::{checked_pow, max_off_diagonal, von_neumann_entropy, Caps};

/// Rate agreement tolerance; both sides are computed to near machine precision.
pub const RATE_TOL: f64 = 1e-10;
/// Largest off-diagonal entry allowed in the dense correlation matrix.
pub const DIAGONAL_TOL: f64 = 1e-12;
pub const DEFAULT_M: usize = 6;

pub const FERMION_COLUMNS: &[&str] = &[
    "M",
    "fine_states",
    "recurrent_states",
    "coarse_states",
    "mu_A3",
    "mu_A4",
    "rate_fine",
    "rate_coarse",
    "closed_form",
    "bound_2ln2",
    "N_max",
    "S_N_per_N",
    "pass_rate_fine",
    "pass_rate_coarse",
    "pass_mu_A3",
    "pass_below_bound",
    "pass_lumpable",
    "pass_primitive",
];

const DENSE_COLUMNS: &[&str] = &[
    "dense_N",
    "S_dense",
    "S_symbolic",
    "dense_offdiag",
    "pass_dense_diagonal",
];

/// Largest `N <= n_max` whose dense oracle fits the caps.
fn dense_depth(p: &GicarPartition, n_max: usize, caps: &Caps) -> Result<usize> {
    let fits = |n: usize| {
        checked_pow(2, p.window() + n) <= caps.dense_dim as u128 && checked_pow(p.size(), n + 1) <= caps.paths as u128
    };
    (1..=n_max)
        .rev()
        .find(|&n| fits(n))
        .ok_or_else(|| AlfError::CapExceeded {
            what: format!("dense oracle at M={}, N=1", p.window()),
            required: checked_pow(2, p.window() + 1).max(checked_pow(p.size(), 2)),
            cap: caps.dense_dim.min(caps.paths) as u128,
        })
}

/// Sweep `M = 2..=M_max`: fine and coarse chains, exact stationary masses,
/// entropy rates against the closed form, and optionally the dense oracle.
pub fn run_fermion(config: &ExperimentConfig) -> Result<ResultTable> {
    let m_max = config.m.unwrap_or(DEFAULT_M);
    if m_max < 2 {
        return Err(AlfError::InvalidArgument(format!("M = {m_max}, need M >= 2")));
    }
    let dense = config.oracle != OracleMode::Symbolic;
    let mut columns = FERMION_COLUMNS.to_vec();
    if dense {
        columns.extend_from_slice(DENSE_COLUMNS);
        if config.oracle == OracleMode::Both {
            columns.push("pass_dense_agree");
        }
    }
    let mut table = ResultTable::new("fermion", &columns);
    let mut chains = Vec::new();

    for m in 2..=m_max {
        let p = build_gicar_partition(m)?;
        let fine = build_fine_chain(&p)?;
        let coarse = coarse_grain(&fine)?;
        let mu_fine = stationary_measure(&fine.chain)?;
        let mu_coarse = stationary_measure(&coarse.chain)?;
        let split = classify_states(&fine);
        let a3: BigRational = split.a3.iter().map(|&a| &mu_fine[a]).sum();
        let a4: BigRational = split.a4.iter().map(|&a| &mu_fine[a]).sum();
        let expect_a3 = BigRational::new(BigInt::from(2), BigInt::from(m));

        let rate_fine = entropy_rate(&fine.chain)?;
        let rate_coarse = entropy_rate(&coarse.chain)?;
        let closed = closed_form_rate(m)?;
        let s_n = finite_n_entropy(&fine.chain, config.n_max)?;
        let fine_structure = structure_checks(&fine.chain);
        let recurrent: usize = fine_structure.closed_classes.iter().map(Vec::len).sum();
        let lumpable = check_lumpable(&fine.chain, &coarse.classes)?.lumpable;
        let primitive = structure_checks(&coarse.chain).primitive;

        let mut row = vec![
            Cell::Int(m as i64),
            Cell::Int(fine.chain.len() as i64),
            Cell::Int(recurrent as i64),
            Cell::Int(coarse.chain.len() as i64),
            Cell::Rational(a3.clone()),
            Cell::Rational(a4),
            Cell::Float(rate_fine),
            Cell::Float(rate_coarse),
            Cell::Float(closed),
            Cell::Float(2.0 * LN_2),
            Cell::Int(config.n_max as i64),
            Cell::Float(s_n / config.n_max as f64),
            Cell::Flag((rate_fine - closed).abs() <= RATE_TOL),
            Cell::Flag((rate_coarse - closed).abs() <= RATE_TOL),
            Cell::Flag(a3 == expect_a3),
            Cell::Flag(rate_fine < 2.0 * LN_2),
            Cell::Flag(lumpable),
            Cell::Flag(primitive),
        ];
        if dense {
            let n = dense_depth(&p, config.n_max, &config.caps)?;
            let bf = brute_force_correlation(&p, n, &config.caps)?;
            let s_dense = von_neumann_entropy(&bf.rho);
            let s_sym = finite_n_entropy(&fine.chain, n)?;
            let offdiag = max_off_diagonal(bf.rho.matrix());
            row.extend([
                Cell::Int(n as i64),
                Cell::Float(s_dense),
                Cell::Float(s_sym),
                Cell::Float(offdiag),
                Cell::Flag(offdiag <= DIAGONAL_TOL),
            ]);
            if config.oracle == OracleMode::Both {
                row.push(Cell::Flag((s_dense - s_sym).abs() <= config.tol));
            }
        }
        table.push(row);
        chains.push(json!({
            "M": m,
            "coarse": ChainDescription::new(&coarse.chain, Some(&mu_coarse)),
            "fine": ChainDescription::new(&fine.chain, Some(&mu_fine)),
        }));
    }
    table.extras.insert("chains".into(), Value::Array(chains));
    Ok(table)
}
