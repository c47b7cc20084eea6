//! Gauge-invariant partitions `x = c_{φψ} E^{[1,M]}_{φψ}` and their refinements
//! under the shift, in the tracial state.
//!
//! An element is fixed by `(φ_1, ψ)`: with `s` twos in `ψ`, the tail
//! `(φ_2, ..., φ_M)` must carry `s - φ_1 + 1` twos, so at most one tail is
//! chosen per pair. Elements are ordered by `ψ` read as a base-2 string
//! (`1 < 2`, first site most significant), then by `φ_1`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use super::jordan_wigner::CarChain;
use super::matrix_unit::{multiply_on_window, shift_matrix_unit, MatrixUnit};
use crate::error::{AlfError, Result};
use crate::quantum_core::{checked_pow, mul_skip_zeros, shannon_entropy, Caps, ComplexMatrix, DensityMatrix};

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn dyadic(exp: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << exp)
}

fn twos(s: &[u8]) -> usize {
    s.iter().filter(|&&v| v == 2).count()
}

/// `{1,2}^len` in base-2 order.
pub fn all_strings(len: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..(1usize << len)).map(move |mask| (0..len).map(|b| 1 + ((mask >> (len - 1 - b)) & 1) as u8).collect())
}

/// `|c|^2` for a given `ψ`: 1 on the two constant strings, 1/2 otherwise.
pub fn coefficient_squared(psi: &[u8]) -> BigRational {
    if psi.iter().all(|&v| v == psi[0]) {
        BigRational::one()
    } else {
        rational(1, 2)
    }
}

/// Lexicographically smallest tail with `t` twos: `1^{M-1-t} 2^t`.
pub fn canonical_tail(m: usize, t: usize) -> Vec<u8> {
    let mut tail = vec![1u8; m - 1 - t];
    tail.extend(std::iter::repeat_n(2u8, t));
    tail
}

/// Number of twos the tail of `(φ_1, ψ)` needs, if any tail is realizable.
pub fn required_tail_twos(m: usize, phi1: u8, psi: &[u8]) -> Option<usize> {
    let t = twos(psi) as i64 - phi1 as i64 + 1;
    (0..m as i64).contains(&t).then_some(t as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GicarElement {
    pub phi: Vec<u8>,
    pub psi: Vec<u8>,
    pub coeff_sq: BigRational,
}

impl GicarElement {
    pub fn phi1(&self) -> u8 {
        self.phi[0]
    }

    pub fn tail(&self) -> &[u8] {
        &self.phi[1..]
    }

    pub fn coeff(&self) -> f64 {
        self.coeff_sq.to_f64().expect("1 or 1/2").sqrt()
    }

    /// `c E^{[1,M]}_{φψ}`.
    pub fn unit(&self) -> MatrixUnit {
        MatrixUnit::new(1, self.phi.clone(), self.psi.clone(), Complex64::new(self.coeff(), 0.0))
            .expect("elements are well formed")
    }
}

#[derive(Debug, Clone)]
pub struct GicarPartition {
    m: usize,
    elements: Vec<GicarElement>,
    successors: Vec<Vec<usize>>,
}

/// Canonical partition on `M` sites.
pub fn build_gicar_partition(m: usize) -> Result<GicarPartition> {
    GicarPartition::with_tail_map(m, |phi1, psi| {
        required_tail_twos(m, phi1, psi).map(|t| canonical_tail(m, t))
    })
}

impl GicarPartition {
    /// Builds the partition from an arbitrary tail map, checking the gauge
    /// constraint on every mapped pair and exact unitality for every `ψ`.
    pub fn with_tail_map(m: usize, tail_map: impl Fn(u8, &[u8]) -> Option<Vec<u8>>) -> Result<Self> {
        if m < 2 {
            return Err(AlfError::InvalidArgument(format!("window size M = {m}, need M >= 2")));
        }
        if m > 20 {
            return Err(AlfError::CapExceeded {
                what: "GICAR window size M".into(),
                required: m as u128,
                cap: 20,
            });
        }
        let mut elements = Vec::new();
        for psi in all_strings(m) {
            let mut weight = BigRational::zero();
            for phi1 in [1u8, 2] {
                let Some(tail) = tail_map(phi1, &psi) else { continue };
                if tail.len() != m - 1 || tail.iter().any(|&v| v != 1 && v != 2) {
                    return Err(AlfError::InvalidArgument(format!(
                        "tail {tail:?} for (φ1={phi1}, ψ={psi:?}) is not a string in {{1,2}}^{}",
                        m - 1
                    )));
                }
                let mut phi = vec![phi1];
                phi.extend_from_slice(&tail);
                if twos(&phi) != twos(&psi) {
                    return Err(AlfError::InvalidArgument(format!(
                        "gauge constraint fails for φ={phi:?}, ψ={psi:?}"
                    )));
                }
                let coeff_sq = coefficient_squared(&psi);
                weight += &coeff_sq;
                elements.push(GicarElement {
                    phi,
                    psi: psi.clone(),
                    coeff_sq,
                });
            }
            if !weight.is_one() {
                return Err(AlfError::Validation {
                    invariant: "GICAR unitality Σ_φ |c_φψ|^2 = 1",
                    deviation: (weight - BigRational::one()).abs().to_f64().unwrap_or(f64::INFINITY),
                    tolerance: 0.0,
                });
            }
        }

        let index: HashMap<(&[u8], u8), usize> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.psi.as_slice(), e.phi1()), i))
            .collect();
        let successors = elements
            .iter()
            .map(|e| {
                let mut next = Vec::with_capacity(4);
                for last in [1u8, 2] {
                    let mut psi = e.tail().to_vec();
                    psi.push(last);
                    for phi1 in [1u8, 2] {
                        if let Some(&j) = index.get(&(psi.as_slice(), phi1)) {
                            next.push(j);
                        }
                    }
                }
                next.sort_unstable();
                next
            })
            .collect();
        Ok(GicarPartition {
            m,
            elements,
            successors,
        })
    }

    /// A valid partition with each tail drawn uniformly among the admissible
    /// arrangements of its twos.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        let mut table = HashMap::new();
        for psi in all_strings(m) {
            for phi1 in [1u8, 2] {
                if let Some(t) = required_tail_twos(m, phi1, &psi) {
                    let mut tail = canonical_tail(m, t);
                    tail.shuffle(rng);
                    table.insert((phi1, psi.clone()), tail);
                }
            }
        }
        Self::with_tail_map(m, |phi1, psi| table.get(&(phi1, psi.to_vec())).cloned())
    }

    pub fn window(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GicarElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> Result<&GicarElement> {
        self.elements
            .get(i)
            .ok_or_else(|| AlfError::InvalidArgument(format!("element index {i} >= {}", self.size())))
    }

    /// Indices `b` that may follow `a`: `(ψ^b_1..ψ^b_{M-1}) = (φ^a_2..φ^a_M)`.
    pub fn successors(&self, a: usize) -> &[usize] {
        &self.successors[a]
    }

    pub fn matches(&self, a: usize, b: usize) -> bool {
        let (ea, eb) = (&self.elements[a], &self.elements[b]);
        eb.psi[..self.m - 1] == ea.phi[1..]
    }

    /// Exact `Σ_φ |c_φψ|^2 - 1` for each `ψ`; all zero for a valid partition.
    pub fn unitality_defects(&self) -> Vec<(Vec<u8>, BigRational)> {
        let mut sums: HashMap<&[u8], BigRational> = HashMap::new();
        for e in &self.elements {
            *sums.entry(e.psi.as_slice()).or_insert_with(BigRational::zero) += &e.coeff_sq;
        }
        all_strings(self.m)
            .map(|psi| {
                let s = sums.get(psi.as_slice()).cloned().unwrap_or_else(BigRational::zero);
                (psi, s - BigRational::one())
            })
            .collect()
    }

    /// Max entrywise `|Σ x* x - 1|` with the elements realized densely.
    pub fn dense_unity_deviation(&self, caps: &Caps) -> Result<f64> {
        let chain = CarChain::new(self.m, caps)?;
        let mut sum = ComplexMatrix::zeros(chain.dim(), chain.dim());
        for e in &self.elements {
            let x = chain.unit(&e.unit())?;
            sum += mul_skip_zeros(&x.adjoint(), &x);
        }
        let id = ComplexMatrix::identity(chain.dim(), chain.dim());
        Ok(crate::quantum_core::max_abs_diff(&sum, &id))
    }

    fn check_indices(&self, path: &[usize]) -> Result<()> {
        if path.is_empty() {
            return Err(AlfError::InvalidArgument("empty path".into()));
        }
        if let Some(&bad) = path.iter().find(|&&i| i >= self.size()) {
            return Err(AlfError::InvalidArgument(format!(
                "element index {bad} >= {}",
                self.size()
            )));
        }
        Ok(())
    }

    /// Number of matching paths with `n_steps + 1` elements, saturating.
    pub fn path_count(&self, n_steps: usize) -> u128 {
        let mut count = vec![1u128; self.size()];
        for _ in 0..n_steps {
            count = (0..self.size())
                .map(|a| {
                    self.successors[a]
                        .iter()
                        .fold(0u128, |acc, &b| acc.saturating_add(count[b]))
                })
                .collect();
        }
        count.into_iter().fold(0u128, u128::saturating_add)
    }
}

/// `2^{-(M+N)} Π |c|^2` along a path of `N + 1` elements; zero unless every
/// consecutive pair matches.
pub fn refined_path_probability(p: &GicarPartition, path: &[usize]) -> Result<BigRational> {
    p.check_indices(path)?;
    if path.windows(2).any(|w| !p.matches(w[0], w[1])) {
        return Ok(BigRational::zero());
    }
    let mut prob = dyadic(p.m + path.len() - 1);
    for &i in path {
        prob *= &p.elements[i].coeff_sq;
    }
    Ok(prob)
}

/// Symbolic refined element `Θ^N(x_{j_N}) ⋯ Θ(x_{j_1}) x_{j_0}` on `[1, M+N]`,
/// or `None` when the product vanishes.
pub fn refined_element(p: &GicarPartition, path: &[usize]) -> Result<Option<MatrixUnit>> {
    p.check_indices(path)?;
    let mut acc = p.elements[path[0]].unit();
    for (n, &j) in path.iter().enumerate().skip(1) {
        let mut x = p.elements[j].unit();
        for _ in 0..n {
            x = shift_matrix_unit(&x).into_gauge_invariant()?;
        }
        let terms = multiply_on_window(&x, &acc);
        match terms.len() {
            0 => return Ok(None),
            1 => acc = terms.into_iter().next().expect("one term"),
            k => {
                return Err(AlfError::Consistency(format!(
                    "refined product split into {k} units; consecutive windows must overlap"
                )))
            }
        }
    }
    Ok(Some(acc))
}

/// Diagonal refined correlation matrix, indexed by the matching paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicCorrelation {
    pub n_steps: usize,
    /// Matching paths in lexicographic order.
    pub paths: Vec<Vec<usize>>,
    pub probabilities: Vec<BigRational>,
}

impl SymbolicCorrelation {
    pub fn total(&self) -> BigRational {
        self.probabilities.iter().fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.probabilities.iter().map(|p| p.to_f64().unwrap_or(0.0)).collect()
    }

    pub fn entropy(&self) -> Result<f64> {
        shannon_entropy(&self.diagonal())
    }
}

pub fn refined_correlation_symbolic(p: &GicarPartition, n_steps: usize, caps: &Caps) -> Result<SymbolicCorrelation> {
    caps.check_paths("refined GICAR paths", p.path_count(n_steps))?;
    let mut paths = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(n_steps + 1);
    fn walk(p: &GicarPartition, n_steps: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if stack.len() == n_steps + 1 {
            out.push(stack.clone());
            return;
        }
        let next: Vec<usize> = match stack.last() {
            None => (0..p.size()).collect(),
            Some(&a) => p.successors(a).to_vec(),
        };
        for b in next {
            stack.push(b);
            walk(p, n_steps, stack, out);
            stack.pop();
        }
    }
    walk(p, n_steps, &mut stack, &mut paths);
    let probabilities = paths
        .iter()
        .map(|path| refined_path_probability(p, path))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolicCorrelation {
        n_steps,
        paths,
        probabilities,
    })
}

/// Dense refined correlation built from Jordan–Wigner matrices.
#[derive(Debug, Clone)]
pub struct BruteForceCorrelation {
    /// Tuples whose dense product is nonzero, in lexicographic order.
    pub tuples: Vec<Vec<usize>>,
    /// `ρ(i, j) = 2^{-(M+N)} Tr(ξ_j* ξ_i)` over `tuples`.
    pub rho: DensityMatrix,
    /// Dense refined elements, same order as `tuples`.
    pub elements: Vec<ComplexMatrix>,
}

/// Every tuple `(j_0, ..., j_N)` is multiplied out densely on `M + N` sites.
/// A tuple whose prefix product is already exactly zero is dropped: its
/// element vanishes and contributes a zero row and column.
pub fn brute_force_correlation(p: &GicarPartition, n_steps: usize, caps: &Caps) -> Result<BruteForceCorrelation> {
    let sites = p.m + n_steps;
    caps.check_dense("refined CAR dimension 2^(M+N)", checked_pow(2, sites))?;
    caps.check_paths("index tuples k^(N+1)", checked_pow(p.size(), n_steps + 1))?;
    let chain = CarChain::new(sites, caps)?;

    // shifted[n][a] = Θ^n(x_a), densely
    let mut shifted: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(n_steps + 1);
    let mut units: Vec<MatrixUnit> = p.elements.iter().map(GicarElement::unit).collect();
    for n in 0..=n_steps {
        if n > 0 {
            units = units
                .iter()
                .map(|u| shift_matrix_unit(u).into_gauge_invariant())
                .collect::<Result<_>>()?;
        }
        shifted.push(units.iter().map(|u| chain.unit(u)).collect::<Result<_>>()?);
    }

    let zero = Complex64::new(0.0, 0.0);
    let mut tuples = Vec::new();
    let mut elements = Vec::new();
    let mut stack = Vec::with_capacity(n_steps + 1);
    #[allow(clippy::too_many_arguments)]
    fn walk(
        shifted: &[Vec<ComplexMatrix>],
        prefix: Option<&ComplexMatrix>,
        stack: &mut Vec<usize>,
        tuples: &mut Vec<Vec<usize>>,
        elements: &mut Vec<ComplexMatrix>,
        zero: Complex64,
    ) {
        let n = stack.len();
        if n == shifted.len() {
            tuples.push(stack.clone());
            elements.push(prefix.expect("nonempty tuple").clone());
            return;
        }
        for (a, x) in shifted[n].iter().enumerate() {
            let prod = match prefix {
                None => x.clone(),
                Some(acc) => mul_skip_zeros(x, acc),
            };
            if prod.iter().all(|&v| v == zero) {
                continue;
            }
            stack.push(a);
            walk(shifted, Some(&prod), stack, tuples, elements, zero);
            stack.pop();
        }
    }
    walk(&shifted, None, &mut stack, &mut tuples, &mut elements, zero);

    let sparse: Vec<Vec<(usize, Complex64)>> = elements
        .iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .filter(|(_, &v)| v != zero)
                .map(|(k, &v)| (k, v))
                .collect()
        })
        .collect();
    let norm = Complex64::new(chain.dim() as f64, 0.0);
    let k = tuples.len();
    let rho = ComplexMatrix::from_fn(k, k, |i, j| {
        let (a, b) = (&sparse[i], &sparse[j]);
        let (mut x, mut y) = (0, 0);
        let mut acc = zero;
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[x].1 * b[y].1.conj();
                    x += 1;
                    y += 1;
                }
            }
        }
        acc / norm
    });
    let rho = DensityMatrix::with_tolerance(rho, 1e-10)?;
    Ok(BruteForceCorrelation { tuples, rho, elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion_shift::matrix_unit::gauge_charge;
    use crate::partitions::random::seeded_rng;
    use crate::quantum_core::{max_abs_diff, max_off_diagonal, von_neumann_entropy};

    #[test]
    fn sizes() {
        for m in 2..=8 {
            assert_eq!(build_gicar_partition(m).unwrap().size(), (1 << (m + 1)) - 2);
        }
        assert_eq!(build_gicar_partition(2).unwrap().size(), 6);
        assert!(build_gicar_partition(1).is_err());
    }

    #[test]
    fn canonical_tails_put_ones_first() {
        assert_eq!(canonical_tail(4, 0), vec![1, 1, 1]);
        assert_eq!(canonical_tail(4, 2), vec![1, 2, 2]);
        let p = build_gicar_partition(3).unwrap();
        let e = p
            .elements()
            .iter()
            .find(|e| e.psi == [1, 2, 2] && e.phi1() == 1)
            .unwrap();
        assert_eq!(e.phi, vec![1, 2, 2]);
        let e = p
            .elements()
            .iter()
            .find(|e| e.psi == [1, 2, 2] && e.phi1() == 2)
            .unwrap();
        assert_eq!(e.phi, vec![2, 1, 2]);
    }

    #[test]
    fn constant_psi_admits_one_element() {
        let p = build_gicar_partition(4).unwrap();
        for sym in [1u8, 2] {
            let hits: Vec<_> = p.elements().iter().filter(|e| e.psi == vec![sym; 4]).collect();
            assert_eq!(hits.len(), 1);
            assert!(hits[0].coeff_sq.is_one());
            assert_eq!(hits[0].phi, vec![sym; 4]);
        }
    }

    #[test]
    fn unitality_exact_and_dense() {
        for m in 2..=6 {
            let p = build_gicar_partition(m).unwrap();
            assert!(p.unitality_defects().iter().all(|(_, d)| d.is_zero()));
            assert!(p.elements().iter().all(|e| gauge_charge(&e.unit()) == 0));
            assert!(p.dense_unity_deviation(&Caps::default()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn invalid_tail_maps_are_rejected() {
        // wrong number of twos
        let bad = GicarPartition::with_tail_map(3, |phi1, psi| required_tail_twos(3, phi1, psi).map(|_| vec![1, 1]));
        assert!(matches!(bad, Err(AlfError::InvalidArgument(_))));
        // omitting φ1 = 2 breaks unitality for non-constant ψ
        let partial = GicarPartition::with_tail_map(3, |phi1, psi| {
            (phi1 == 1)
                .then(|| required_tail_twos(3, 1, psi).map(|t| canonical_tail(3, t)))
                .flatten()
        });
        assert!(matches!(partial, Err(AlfError::Validation { .. })));
    }

    #[test]
    fn random_tail_maps_are_valid() {
        let mut rng = seeded_rng(4);
        for m in 2..=6 {
            let p = GicarPartition::random(m, &mut rng).unwrap();
            assert_eq!(p.size(), (1 << (m + 1)) - 2);
        }
    }

    #[test]
    fn single_element_probability() {
        let p = build_gicar_partition(3).unwrap();
        for (i, e) in p.elements().iter().enumerate() {
            let expect = &e.coeff_sq * rational(1, 8);
            assert_eq!(refined_path_probability(&p, &[i]).unwrap(), expect);
        }
    }

    #[test]
    fn mismatched_paths_have_zero_probability() {
        let p = build_gicar_partition(2).unwrap();
        let (a, b) = (0..p.size())
            .flat_map(|a| (0..p.size()).map(move |b| (a, b)))
            .find(|&(a, b)| !p.matches(a, b))
            .unwrap();
        assert!(refined_path_probability(&p, &[a, b]).unwrap().is_zero());
        assert!(refined_path_probability(&p, &[]).is_err());
    }

    #[test]
    fn exhaustive_path_sums_are_one() {
        let p = build_gicar_partition(2).unwrap();
        for n in 0..=4usize {
            let k = p.size();
            let mut total = BigRational::zero();
            for code in 0..k.pow(n as u32 + 1) {
                let path: Vec<usize> = (0..=n).map(|i| (code / k.pow(i as u32)) % k).collect();
                total += refined_path_probability(&p, &path).unwrap();
            }
            assert!(total.is_one(), "N={n}");
        }
        for m in 2..=4 {
            let p = build_gicar_partition(m).unwrap();
            for n in 0..=5 {
                let rho = refined_correlation_symbolic(&p, n, &Caps::default()).unwrap();
                assert!(rho.total().is_one());
                assert_eq!(rho.paths.len() as u128, p.path_count(n));
            }
        }
    }

    #[test]
    fn symbolic_elements_match_dense_products() {
        let p = build_gicar_partition(2).unwrap();
        let bf = brute_force_correlation(&p, 2, &Caps::default()).unwrap();
        let chain = CarChain::new(4, &Caps::default()).unwrap();
        for (path, dense) in bf.tuples.iter().zip(&bf.elements) {
            let unit = refined_element(&p, path).unwrap().unwrap();
            assert_eq!((unit.start(), unit.end()), (1, 4));
            assert!(max_abs_diff(&chain.unit(&unit).unwrap(), dense) < 1e-12);
        }
        let bad = (0..p.size()).find(|&b| !p.matches(0, b)).unwrap();
        assert_eq!(refined_element(&p, &[0, bad]).unwrap(), None);
    }

    #[test]
    fn dense_oracle_is_diagonal_and_matches_paths() {
        for (m, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
            let p = build_gicar_partition(m).unwrap();
            let sym = refined_correlation_symbolic(&p, n, &Caps::default()).unwrap();
            let bf = brute_force_correlation(&p, n, &Caps::default()).unwrap();
            assert_eq!(bf.tuples, sym.paths, "M={m} N={n}");
            assert!(max_off_diagonal(bf.rho.matrix()) <= 1e-12);
            for (i, q) in sym.diagonal().iter().enumerate() {
                assert!((bf.rho.matrix()[(i, i)].re - q).abs() <= 1e-12);
            }
            let trace: f64 = (0..bf.tuples.len()).map(|i| bf.rho.matrix()[(i, i)].re).sum();
            assert!((trace - 1.0).abs() <= 1e-12);
            assert!((von_neumann_entropy(&bf.rho) - sym.entropy().unwrap()).abs() <= 1e-8);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let p = build_gicar_partition(2).unwrap();
        let caps = Caps {
            paths: 10,
            ..Caps::default()
        };
        assert!(matches!(
            refined_correlation_symbolic(&p, 3, &caps),
            Err(AlfError::CapExceeded { .. })
        ));
        let caps = Caps {
            dense_dim: 8,
            ..Caps::default()
        };
        assert!(matches!(
            brute_force_correlation(&p, 2, &caps),
            Err(AlfError::CapExceeded { .. })
        ));
    }
}
