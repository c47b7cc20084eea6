//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero on any FAIL.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use alf_entropy::fermion_shift::{
    brute_force_correlation, build_gicar_partition, matrix_unit_product, random_unit, refined_correlation_symbolic,
    shift_matrix_unit, tracial_value, CarChain, MatrixUnit,
};
use alf_entropy::markov_reduction::{
    build_fine_chain, check_lumpable, check_path_lumpability, classify_states, coarse_grain, entropy_rate,
    finite_n_entropy, stationary_measure, stationary_residual, structure_checks,
};
use alf_entropy::partitions::random::{lemma_suite, seeded_rng};
use alf_entropy::quantum_core::{max_abs_diff, max_off_diagonal, tensor_all, von_neumann_entropy, Caps, ComplexMatrix};
use alf_entropy::spin_shift::{
    fourier_partition, refined_correlation_dense, refined_correlation_factorized, split_fourier_correlation,
    SpinChainSystem,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Independent oracle: `(2 - 1/M) ln 2` written out from `ln 2` alone.
fn rate_oracle(m: usize) -> f64 {
    2.0 * LN_2 - LN_2 / m as f64
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for m in [2, 3, 4, 5, 6, 8] {
        let fine = build_fine_chain(&build_gicar_partition(m).map_err(err)?).map_err(err)?;
        let coarse = coarse_grain(&fine).map_err(err)?;
        let rf = entropy_rate(&fine.chain).map_err(err)?;
        let rc = entropy_rate(&coarse.chain).map_err(err)?;
        let oracle = rate_oracle(m);
        worst = worst.max((rf - oracle).abs()).max((rc - oracle).abs());
        ensure(rf < 2.0 * LN_2, || format!("M={m}: rate {rf} not below 2 ln 2"))?;
    }
    let dt = t.elapsed();
    ensure(worst <= 1e-10, || format!("worst rate deviation {worst:.3e} > 1e-10"))?;
    ensure(dt < Duration::from_secs(1), || format!("took {dt:?}, limit 1 s"))?;
    Ok(format!(
        "M in {{2,3,4,5,6,8}}: worst |h - (2-1/M) ln 2| = {worst:.2e}, {dt:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    for m in 2..=8usize {
        let fine = build_fine_chain(&build_gicar_partition(m).map_err(err)?).map_err(err)?;
        let mu = stationary_measure(&fine.chain).map_err(err)?;
        ensure(stationary_residual(&fine.chain, &mu).is_zero(), || {
            format!("M={m}: fine residual nonzero")
        })?;
        let split = classify_states(&fine);
        let a3: BigRational = split.a3.iter().map(|&a| &mu[a]).sum();
        ensure(a3 == ratio(2, m as i64), || {
            format!("M={m}: mu(A3) = {a3}, expected 2/{m}")
        })?;

        let coarse = coarse_grain(&fine).map_err(err)?;
        let nu = stationary_measure(&coarse.chain).map_err(err)?;
        ensure(stationary_residual(&coarse.chain, &nu).is_zero(), || {
            format!("M={m}: coarse residual nonzero")
        })?;
        // oracle: 1/(2M) on the two extreme classes, 1/(4M) elsewhere
        for (c, st) in coarse.states.iter().enumerate() {
            let extreme = (st.s, st.p, st.q) == (0, 1, 1) || (st.s, st.p, st.q) == (m, 2, 2);
            let expect = if extreme {
                ratio(1, 2 * m as i64)
            } else {
                ratio(1, 4 * m as i64)
            };
            ensure(nu[c] == expect, || {
                format!("M={m}: mu({st}) = {}, expected {expect}", nu[c])
            })?;
        }
    }
    Ok("M = 2..8: mu(A3) = 2/M exactly, ||mu P - mu||_1 = 0 on fine and coarse chains".into())
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let caps = Caps::default();
    let mut worst_offdiag: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    let mut worst_entropy: f64 = 0.0;
    for (m, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let p = build_gicar_partition(m).map_err(err)?;
        let bf = brute_force_correlation(&p, n, &caps).map_err(err)?;
        let sym = refined_correlation_symbolic(&p, n, &caps).map_err(err)?;
        ensure(bf.tuples == sym.paths, || {
            format!("M={m} N={n}: nonzero tuples differ from matching paths")
        })?;
        let rho = bf.rho.matrix();
        worst_offdiag = worst_offdiag.max(max_off_diagonal(rho));
        // oracle: 2^{-(M+N)} Π |c|^2 along the path
        for (i, path) in sym.paths.iter().enumerate() {
            let w: f64 =
                path.iter().map(|&a| p.elements()[a].coeff().powi(2)).product::<f64>() * 0.5f64.powi((m + n) as i32);
            worst_diag = worst_diag.max((rho[(i, i)].re - w).abs());
        }
        let fine = build_fine_chain(&p).map_err(err)?;
        let s_markov = finite_n_entropy(&fine.chain, n).map_err(err)?;
        worst_entropy = worst_entropy.max((von_neumann_entropy(&bf.rho) - s_markov).abs());
    }
    let dt = t.elapsed();
    ensure(worst_offdiag <= 1e-12, || format!("off-diagonal {worst_offdiag:.3e}"))?;
    ensure(worst_diag <= 1e-12, || format!("diagonal mismatch {worst_diag:.3e}"))?;
    ensure(worst_entropy <= 1e-8, || {
        format!("entropy mismatch {worst_entropy:.3e}")
    })?;
    ensure(dt < Duration::from_secs(30), || format!("took {dt:?}, limit 30 s"))?;
    Ok(format!(
        "offdiag {worst_offdiag:.1e}, diag {worst_diag:.1e}, S(rho_N) vs S_N {worst_entropy:.1e}, {dt:.2?}"
    ))
}

fn criterion_4() -> Outcome {
    let fine = build_fine_chain(&build_gicar_partition(4).map_err(err)?).map_err(err)?;
    let t = Instant::now();
    let s = finite_n_entropy(&fine.chain, 10_000).map_err(err)?;
    let dt = t.elapsed();
    let gap = (s / 10_000.0 - rate_oracle(4)).abs();
    ensure(gap <= 1e-3, || format!("gap {gap:.3e} > 1e-3"))?;
    ensure(dt < Duration::from_secs(5), || format!("took {dt:?}, limit 5 s"))?;
    Ok(format!("M=4, N=10^4: |S_N/N - h| = {gap:.3e}, {dt:.2?}"))
}

fn spin_system() -> Result<SpinChainSystem, String> {
    SpinChainSystem::from_spectrum(&[0.3, 0.7]).map_err(err)
}

fn criterion_5() -> Outcome {
    let sys = spin_system()?;
    let x = fourier_partition(2).map_err(err)?;
    let caps = Caps::default();
    let h = binary_entropy(0.3);
    let mut worst: f64 = 0.0;
    for n in 2..=5usize {
        // N <= 4 materialises every refined element; N = 5 uses the
        // product-site route, whose output is itself checked against the
        // dense one for N <= 4 below
        let rho = if n <= 4 {
            let dense = refined_correlation_dense(&sys, &x, n, &caps).map_err(err)?;
            let fact = refined_correlation_factorized(&sys, &x, n, &caps).map_err(err)?;
            let d = max_abs_diff(dense.matrix(), fact.matrix());
            ensure(d <= 1e-12, || format!("N={n}: dense vs factorized {d:.3e}"))?;
            dense
        } else {
            refined_correlation_factorized(&sys, &x, n, &caps).map_err(err)?
        };
        let (reduced, _) = split_fourier_correlation(&rho, 2, n).map_err(err)?;
        let oracle = (n - 1) as f64 * (LN_2 + h);
        worst = worst.max((von_neumann_entropy(&reduced) - oracle).abs());
    }
    ensure(worst <= 1e-8, || format!("worst deviation {worst:.3e}"))?;
    Ok(format!(
        "d=2, spectrum (0.3, 0.7), N = 2..5: |S(reduced) - (N-1)(ln 2 + H)| <= {worst:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let sys = spin_system()?;
    let x = fourier_partition(2).map_err(err)?;
    let caps = Caps::default();
    let h = binary_entropy(0.3);
    let mut prev: Option<f64> = None;
    let mut rows = Vec::new();
    for n in 2..=5usize {
        let rho = refined_correlation_factorized(&sys, &x, n, &caps).map_err(err)?;
        let s = von_neumann_entropy(&rho);
        let (reduced, _) = split_fourier_correlation(&rho, 2, n).map_err(err)?;
        let lower = von_neumann_entropy(&reduced) - 2.0 * LN_2;
        // S(ω_[1,N+1]) of the product state is (N+1) H
        let upper = (n + 1) as f64 * (h + LN_2);
        ensure(lower - 1e-9 <= s && s <= upper + 1e-9, || {
            format!("N={n}: {lower} <= {s} <= {upper} fails")
        })?;
        let per_step = lower / n as f64;
        if let Some(p) = prev {
            ensure(per_step >= p, || format!("N={n}: lower bracket per step decreased"))?;
        }
        ensure(per_step < LN_2 + h, || {
            format!("N={n}: lower bracket per step above ln 2 + H")
        })?;
        prev = Some(per_step);
        rows.push(format!("{per_step:.4}"));
    }
    Ok(format!(
        "sandwich holds for N = 2..5; lower bracket per step {} rising toward {:.4}",
        rows.join(" < "),
        LN_2 + h
    ))
}

fn criterion_7() -> Outcome {
    let (mut trials, mut failures) = (0, 0);
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..10u64 {
        let r = lemma_suite(seed, 500).map_err(err)?;
        trials += r.trials;
        failures += r.failures;
        worst = worst.max(r.worst_margin);
    }
    ensure(failures == 0, || {
        format!("{failures} of {trials} trials violate the bound")
    })?;
    Ok(format!(
        "{trials} trials over 10 seeds, 0 violations, worst margin {worst:.3e}"
    ))
}

fn criterion_8() -> Outcome {
    let mut total_paths = 0;
    for m in 2..=6 {
        let fine = build_fine_chain(&build_gicar_partition(m).map_err(err)?).map_err(err)?;
        let coarse = coarse_grain(&fine).map_err(err)?;
        let rows = check_lumpable(&fine.chain, &coarse.classes).map_err(err)?;
        ensure(rows.lumpable, || {
            format!("M={m}: row sums differ, witness {:?}", rows.witness)
        })?;
        let paths = check_path_lumpability(&fine.chain, &coarse.classes, &coarse.chain, 5).map_err(err)?;
        ensure(paths.ok(), || format!("M={m}: {paths:?}"))?;
        total_paths += paths.coarse_paths;
    }
    Ok(format!(
        "M = 2..6: exact row lumpability, {total_paths} coarse paths of length <= 5 agree"
    ))
}

fn criterion_9() -> Outcome {
    for m in 2..=8usize {
        let fine = build_fine_chain(&build_gicar_partition(m).map_err(err)?).map_err(err)?;
        let coarse = coarse_grain(&fine).map_err(err)?;
        let r = structure_checks(&coarse.chain);
        ensure(r.irreducible && r.primitive && r.period == Some(1), || {
            format!("M={m}: coarse {r:?}")
        })?;
        ensure(coarse.chain.len() == 4 * m - 2, || {
            format!("M={m}: {} coarse states", coarse.chain.len())
        })?;
        let f = structure_checks(&fine.chain);
        ensure(f.ergodic, || {
            format!("M={m}: fine chain has no unique aperiodic closed class")
        })?;
    }
    Ok("M = 2..8: coarse chain irreducible and aperiodic; fine chain one aperiodic closed class".into())
}

fn ket_bra(a: u8, b: u8) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[((a - 1) as usize, (b - 1) as usize)] = Complex64::new(1.0, 0.0);
    m
}

/// Independent oracle: `E_{φψ}` as a plain tensor product of site ket-bras.
fn tensor_oracle(u: &MatrixUnit, n: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2, 2);
    let factors: Vec<ComplexMatrix> = (1..=n)
        .map(|k| {
            if (u.start()..=u.end()).contains(&k) {
                ket_bra(u.phi()[k - u.start()], u.psi()[k - u.start()])
            } else {
                id.clone()
            }
        })
        .collect();
    tensor_all(&factors) * u.coeff()
}

fn criterion_10() -> Outcome {
    let mut worst_car: f64 = 0.0;
    for n in 1..=8 {
        let chain = CarChain::new(n, &Caps::default()).map_err(err)?;
        let dim = chain.dim();
        let id = ComplexMatrix::identity(dim, dim);
        for k in 1..=n {
            for l in 1..=n {
                let ak = chain.annihilator(k).map_err(err)?;
                let al = chain.annihilator(l).map_err(err)?;
                let anti = ak * al + al * ak;
                worst_car = worst_car.max(anti.iter().map(|z| z.norm()).fold(0.0, f64::max));
                let mixed = ak.adjoint() * al + al * ak.adjoint();
                let expect = if k == l {
                    id.clone()
                } else {
                    ComplexMatrix::zeros(dim, dim)
                };
                worst_car = worst_car.max(max_abs_diff(&mixed, &expect));
            }
        }
    }
    ensure(worst_car <= 1e-12, || format!("CAR deviation {worst_car:.3e}"))?;

    let n = 6;
    let chain = CarChain::new(n, &Caps::default()).map_err(err)?;
    let mut rng = seeded_rng(0xACCE);
    let trials = 1000;
    let mut worst: f64 = 0.0;
    let mut nonzero_products = 0;
    for _ in 0..trials {
        let u = random_unit(&mut rng, n);
        let du = chain.unit(&u).map_err(err)?;
        worst = worst.max(max_abs_diff(&du, &tensor_oracle(&u, n)));

        let phi: Vec<u8> = if rng.random_bool(0.5) {
            u.psi().to_vec()
        } else {
            (0..u.len()).map(|_| rng.random_range(1..=2u8)).collect()
        };
        let psi: Vec<u8> = (0..u.len()).map(|_| rng.random_range(1..=2u8)).collect();
        let v = MatrixUnit::unit(u.start(), phi, psi).map_err(err)?;
        let dv = chain.unit(&v).map_err(err)?;
        let prod = match matrix_unit_product(&u, &v).map_err(err)? {
            Some(w) => {
                nonzero_products += 1;
                chain.unit(&w).map_err(err)?
            }
            None => ComplexMatrix::zeros(du.nrows(), du.ncols()),
        };
        worst = worst.max(max_abs_diff(&prod, &(&du * &dv)));
        worst = worst.max(max_abs_diff(&chain.unit(&u.adjoint()).map_err(err)?, &du.adjoint()));
        let trace = du.trace() / Complex64::new(chain.dim() as f64, 0.0);
        worst = worst.max((trace - tracial_value(&u)).norm());

        let w = random_unit(&mut rng, n - 1);
        let symbolic = chain.shifted(&shift_matrix_unit(&w)).map_err(err)?;
        worst = worst.max(max_abs_diff(&symbolic, &chain.shifted_unit_oracle(&w).map_err(err)?));
    }
    ensure(worst <= 1e-12, || format!("symbolic vs dense deviation {worst:.3e}"))?;
    ensure(nonzero_products > trials / 4, || {
        "too few nonzero products sampled".into()
    })?;
    Ok(format!(
        "CAR on 1..8 sites ({worst_car:.1e}); {trials} random units: product, adjoint, trace, shift ({worst:.1e})"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("fermion entropy rate = (2 - 1/M) ln 2", criterion_1),
        ("exact stationary measure", criterion_2),
        ("dense oracle vs symbolic correlation", criterion_3),
        ("finite-N convergence at M=4", criterion_4),
        ("spin reduced refined entropy", criterion_5),
        ("spin bound sandwich", criterion_6),
        ("correlation entropy bound", criterion_7),
        ("lumpability of the fine chain", criterion_8),
        ("coarse chain structure", criterion_9),
        ("CAR relations and matrix units", criterion_10),
    ];
    // libtest-style filtering: a free argument selects criteria by substring
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("[{:>2}] {name}", i + 1);
        if filter.as_ref().is_some_and(|f| !label.contains(f.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {label}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
