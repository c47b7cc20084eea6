//! Self-checks behind `alf-entropy verify`. Every suite yields one row with
//! its worst observed deviation; any failing row makes the run fail.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use super::config::{ExperimentConfig, PartitionSource};
use super::table::{Cell, ResultTable};
use crate::error::Result;
use crate::fermion_shift::{
    brute_force_correlation, build_gicar_partition, matrix_unit_product, random_unit, refined_correlation_symbolic,
    shift_matrix_unit, tracial_value, CarChain, MatrixUnit,
};
use crate::markov_reduction::{
    build_fine_chain, check_lumpable, check_path_lumpability, classify_states, closed_form_rate, coarse_grain,
    entropy_rate, finite_n_entropy, stationary_measure, stationary_residual, structure_checks, to_f64,
};
use crate::partitions::file::OperatorListFile;
use crate::partitions::random::{lemma_suite, random_partition, seeded_rng};
use crate::partitions::{compose, verify_unity, TAU_UNITY};
use crate::quantum_core::{max_abs_diff, max_off_diagonal, mul_skip_zeros, von_neumann_entropy, Caps, ComplexMatrix};
use crate::spin_shift::{
    fourier_partition, reduced_refined_entropy, refined_correlation_dense, split_fourier_correlation, SpinChainSystem,
};

pub const VERIFY_COLUMNS: &[&str] = &["suite", "cases", "worst_deviation", "tolerance", "detail", "pass"];

pub const LEMMA_TRIALS: usize = 500;
pub const LEMMA_SEEDS: u64 = 10;
pub const UNIT_TRIALS: usize = 1000;

struct Outcome {
    suite: &'static str,
    cases: usize,
    worst: f64,
    tol: f64,
    detail: String,
    pass: bool,
}

impl Outcome {
    fn within(suite: &'static str, cases: usize, worst: f64, tol: f64, detail: String) -> Self {
        Outcome {
            suite,
            cases,
            worst,
            tol,
            detail,
            pass: worst <= tol,
        }
    }

    fn row(self) -> Vec<Cell> {
        vec![
            Cell::Text(self.suite.into()),
            Cell::Int(self.cases as i64),
            Cell::Float(self.worst),
            Cell::Float(self.tol),
            Cell::Text(self.detail),
            Cell::Flag(self.pass),
        ]
    }
}

pub fn run_verify(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new("verify", VERIFY_COLUMNS);
    let mut outcomes = vec![lemma(config.seed)?, unitality_fourier(config.d)?, unitality_gicar()?];
    if let PartitionSource::File(path) = &config.partition {
        outcomes.push(unitality_file(path));
    }
    outcomes.extend([
        compose_associativity(config.seed)?,
        car_relations()?,
        units_symbolic_dense(config.seed)?,
        gicar_symbolic_dense()?,
        lumpability()?,
        stationary()?,
        structure()?,
        fermion_rates()?,
        spin_reduced_entropy()?,
    ]);
    for o in outcomes {
        table.push(o.row());
    }
    Ok(table)
}

fn lemma(seed: u64) -> Result<Outcome> {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for s in seed..seed + LEMMA_SEEDS {
        let r = lemma_suite(s, LEMMA_TRIALS)?;
        failures += r.failures;
        worst = worst.max(r.worst_margin);
    }
    Ok(Outcome {
        suite: "lemma_bound",
        cases: LEMMA_TRIALS * LEMMA_SEEDS as usize,
        worst,
        tol: 0.0,
        detail: format!(
            "seeds {seed}..{}, {failures} failures; deviation = max S(rho_X) - bound",
            seed + LEMMA_SEEDS
        ),
        pass: failures == 0,
    })
}

fn unitality_fourier(d: usize) -> Result<Outcome> {
    let mut dims: Vec<usize> = vec![2, 3, 4];
    if !dims.contains(&d) {
        dims.push(d);
    }
    let mut worst: f64 = 0.0;
    for &d in &dims {
        worst = worst.max(fourier_partition(d)?.to_operational().unity_deviation());
    }
    Ok(Outcome::within(
        "unitality_fourier",
        dims.len(),
        worst,
        TAU_UNITY,
        format!("d in {dims:?}"),
    ))
}

fn unitality_gicar() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut exact_defects = 0;
    for m in 2..=6 {
        let p = build_gicar_partition(m)?;
        exact_defects += p.unitality_defects().iter().filter(|(_, d)| !d.is_zero()).count();
        worst = worst.max(p.dense_unity_deviation(&Caps::default())?);
    }
    let mut o = Outcome::within(
        "unitality_gicar",
        5,
        worst,
        1e-12,
        format!("M = 2..6, {exact_defects} exact defects"),
    );
    o.pass &= exact_defects == 0;
    Ok(o)
}

fn unitality_file(path: &std::path::Path) -> Outcome {
    let checked = OperatorListFile::load(path)
        .and_then(|f| f.to_matrices())
        .and_then(|m| verify_unity(&m, TAU_UNITY).map(|r| (m.len(), r)));
    match checked {
        Ok((k, r)) => Outcome {
            suite: "unitality_file",
            cases: k,
            worst: r.deviation,
            tol: TAU_UNITY,
            detail: path.display().to_string(),
            pass: r.ok,
        },
        Err(e) => Outcome {
            suite: "unitality_file",
            cases: 0,
            worst: f64::INFINITY,
            tol: TAU_UNITY,
            detail: format!("{}: {e}", path.display()),
            pass: false,
        },
    }
}

fn compose_associativity(seed: u64) -> Result<Outcome> {
    let mut rng = seeded_rng(seed ^ 0xA550C);
    let trials = 25;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dim = rng.random_range(2..=5);
        let mut part = || {
            let k = rng.random_range(1..=3);
            random_partition(&mut rng, dim, k)
        };
        let (x, y, z) = (part(), part(), part());
        let left = compose(&compose(&x, &y)?, &z)?;
        let right = compose(&x, &compose(&y, &z)?)?;
        for (a, b) in left.elements().iter().zip(right.elements()) {
            worst = worst.max(max_abs_diff(a, b));
        }
        worst = worst.max(left.unity_deviation());
    }
    Ok(Outcome::within(
        "compose_associativity",
        trials,
        worst,
        1e-12,
        "random partitions, dim 2..5".into(),
    ))
}

fn car_relations() -> Result<Outcome> {
    let n = 8;
    let chain = CarChain::new(n, &Caps::default())?;
    let dim = chain.dim();
    let id = ComplexMatrix::identity(dim, dim);
    let zero = ComplexMatrix::zeros(dim, dim);
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        let ak = chain.annihilator(k)?;
        let ck = chain.creator(k)?;
        for l in 1..=n {
            let al = chain.annihilator(l)?;
            let anti = mul_skip_zeros(ak, al) + mul_skip_zeros(al, ak);
            worst = worst.max(max_abs_diff(&anti, &zero));
            let mixed = mul_skip_zeros(&ck, al) + mul_skip_zeros(al, &ck);
            worst = worst.max(max_abs_diff(&mixed, if k == l { &id } else { &zero }));
        }
    }
    Ok(Outcome::within(
        "car_relations",
        n * n,
        worst,
        1e-12,
        format!("{n} sites"),
    ))
}

fn units_symbolic_dense(seed: u64) -> Result<Outcome> {
    let n = 7;
    let chain = CarChain::new(n, &Caps::default())?;
    let mut rng = seeded_rng(seed ^ 0xCA7);
    let mut worst: f64 = 0.0;
    for _ in 0..UNIT_TRIALS {
        let u = random_unit(&mut rng, n);
        let du = chain.unit(&u)?;
        // partner on the same interval; half the time it chains onto u
        let phi: Vec<u8> = if rng.random_bool(0.5) {
            u.psi().to_vec()
        } else {
            (0..u.len()).map(|_| rng.random_range(1..=2u8)).collect()
        };
        let psi: Vec<u8> = (0..u.len()).map(|_| rng.random_range(1..=2u8)).collect();
        let v = MatrixUnit::new(u.start(), phi, psi, u.coeff().conj())?;
        let dv = chain.unit(&v)?;
        let product = match matrix_unit_product(&u, &v)? {
            Some(w) => chain.unit(&w)?,
            None => ComplexMatrix::zeros(du.nrows(), du.ncols()),
        };
        worst = worst.max(max_abs_diff(&product, &mul_skip_zeros(&du, &dv)));
        worst = worst.max(max_abs_diff(&chain.unit(&u.adjoint())?, &du.adjoint()));
        worst = worst.max((chain.tracial_state(&du) - tracial_value(&u)).norm());

        let w = random_unit(&mut rng, n - 1);
        let shifted = chain.shifted(&shift_matrix_unit(&w))?;
        worst = worst.max(max_abs_diff(&shifted, &chain.shifted_unit_oracle(&w)?));
    }
    Ok(Outcome::within(
        "units_symbolic_dense",
        UNIT_TRIALS,
        worst,
        1e-12,
        format!("product, adjoint, trace, shift on {n} sites"),
    ))
}

fn gicar_symbolic_dense() -> Result<Outcome> {
    let cases = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)];
    let caps = Caps::default();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (m, n) in cases {
        let p = build_gicar_partition(m)?;
        let sym = refined_correlation_symbolic(&p, n, &caps)?;
        let bf = brute_force_correlation(&p, n, &caps)?;
        pass &= bf.tuples == sym.paths;
        let diag: Vec<f64> = sym.diagonal();
        let rho = bf.rho.matrix();
        worst = worst.max(max_off_diagonal(rho));
        for (i, q) in diag.iter().enumerate() {
            worst = worst.max((rho[(i, i)].re - q).abs());
        }
        let fine = build_fine_chain(&p)?;
        worst = worst.max((von_neumann_entropy(&bf.rho) - finite_n_entropy(&fine.chain, n)?).abs());
    }
    let mut o = Outcome::within(
        "gicar_symbolic_dense",
        cases.len(),
        worst,
        1e-8,
        "(M,N) in (2,1..3), (3,1..2): support, diagonal, entropy".into(),
    );
    o.pass &= pass;
    Ok(o)
}

fn lumpability() -> Result<Outcome> {
    let mut mismatches = 0;
    let mut rows_ok = true;
    for m in 2..=6 {
        let fine = build_fine_chain(&build_gicar_partition(m)?)?;
        let coarse = coarse_grain(&fine)?;
        rows_ok &= check_lumpable(&fine.chain, &coarse.classes)?.lumpable;
        mismatches += check_path_lumpability(&fine.chain, &coarse.classes, &coarse.chain, 5)?.mismatches;
    }
    Ok(Outcome {
        suite: "lumpability",
        cases: 5,
        worst: mismatches as f64,
        tol: 0.0,
        detail: "M = 2..6, rows exact, paths of length <= 5".into(),
        pass: rows_ok && mismatches == 0,
    })
}

fn stationary() -> Result<Outcome> {
    let mut worst = BigRational::zero();
    let mut a3_ok = true;
    for m in 2..=8 {
        let fine = build_fine_chain(&build_gicar_partition(m)?)?;
        let coarse = coarse_grain(&fine)?;
        let mu = stationary_measure(&fine.chain)?;
        let nu = stationary_measure(&coarse.chain)?;
        for r in [
            stationary_residual(&fine.chain, &mu),
            stationary_residual(&coarse.chain, &nu),
        ] {
            if r > worst {
                worst = r;
            }
        }
        let a3: BigRational = classify_states(&fine).a3.iter().map(|&a| &mu[a]).sum();
        a3_ok &= a3 == BigRational::new(BigInt::from(2), BigInt::from(m));
    }
    Ok(Outcome {
        suite: "stationary_residual",
        cases: 7,
        worst: to_f64(&worst),
        tol: 0.0,
        detail: "M = 2..8, exact ||mu P - mu||_1 and mu(A3) = 2/M".into(),
        pass: worst.is_zero() && a3_ok,
    })
}

fn structure() -> Result<Outcome> {
    let mut pass = true;
    for m in 2..=8 {
        let fine = build_fine_chain(&build_gicar_partition(m)?)?;
        let coarse = coarse_grain(&fine)?;
        let c = structure_checks(&coarse.chain);
        pass &= c.irreducible && c.primitive;
        pass &= structure_checks(&fine.chain).ergodic;
    }
    Ok(Outcome {
        suite: "chain_structure",
        cases: 7,
        worst: 0.0,
        tol: 0.0,
        detail: "M = 2..8: coarse primitive, fine single aperiodic closed class".into(),
        pass,
    })
}

fn fermion_rates() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for m in 2..=8 {
        let fine = build_fine_chain(&build_gicar_partition(m)?)?;
        let coarse = coarse_grain(&fine)?;
        let closed = closed_form_rate(m)?;
        worst = worst.max((entropy_rate(&fine.chain)? - closed).abs());
        worst = worst.max((entropy_rate(&coarse.chain)? - closed).abs());
    }
    Ok(Outcome::within(
        "fermion_rate",
        7,
        worst,
        1e-10,
        "M = 2..8, fine and coarse".into(),
    ))
}

fn spin_reduced_entropy() -> Result<Outcome> {
    let sys = SpinChainSystem::from_spectrum(&[0.3, 0.7])?;
    let x = fourier_partition(2)?;
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        let rho = refined_correlation_dense(&sys, &x, n, &Caps::default())?;
        let (reduced, _) = split_fourier_correlation(&rho, 2, n)?;
        worst = worst.max((von_neumann_entropy(&reduced) - reduced_refined_entropy(&sys, n)?).abs());
    }
    Ok(Outcome::within(
        "spin_reduced_entropy",
        3,
        worst,
        1e-8,
        "d = 2, spectrum (0.3, 0.7), N = 2..4".into(),
    ))
}
