//! Dense Jordan–Wigner realization of the CAR algebra on `n` sites.
//!
//! Site `k` (1-based) is tensor factor `k-1`. On one site, basis index 0 is
//! the occupied mode `1` and index 1 the empty mode `2`, so
//! `a = |2⟩⟨1|` and `2a*a - 1 = diag(1, -1)`.
//!
//! Matrix units are never written down as tensor products here: they are
//! assembled from the annihilators, exactly as the algebra defines them.
//! Tensor products appear only in tests, as the independent check.

use num_complex::Complex64;

use super::matrix_unit::{MatrixUnit, ShiftedUnit};
use crate::error::{AlfError, Result};
use crate::quantum_core::{checked_pow, mul_skip_zeros, tensor_all, Caps, ComplexMatrix};

fn site_matrix(entries: [[f64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| Complex64::new(entries[i][j], 0.0))
}

/// Annihilators `a_1, ..., a_n` on `(C^2)^{⊗n}`.
#[derive(Debug, Clone)]
pub struct CarChain {
    n: usize,
    annihilators: Vec<ComplexMatrix>,
    /// `2 a_k* a_k - 1`, built once from the annihilators.
    parities: Vec<ComplexMatrix>,
}

impl CarChain {
    pub fn new(n: usize, caps: &Caps) -> Result<Self> {
        if n == 0 {
            return Err(AlfError::InvalidArgument("need at least one site".into()));
        }
        caps.check_dense("Jordan-Wigner dimension 2^n", checked_pow(2, n))?;
        let z = site_matrix([[1.0, 0.0], [0.0, -1.0]]);
        let lower = site_matrix([[0.0, 0.0], [1.0, 0.0]]);
        let id = ComplexMatrix::identity(2, 2);
        let annihilators = (1..=n)
            .map(|k| {
                let factors: Vec<&ComplexMatrix> = (1..=n)
                    .map(|j| match j.cmp(&k) {
                        std::cmp::Ordering::Less => &z,
                        std::cmp::Ordering::Equal => &lower,
                        std::cmp::Ordering::Greater => &id,
                    })
                    .collect();
                tensor_all(factors)
            })
            .collect::<Vec<ComplexMatrix>>();
        let dim = 1usize << n;
        let id = ComplexMatrix::identity(dim, dim);
        let parities = annihilators
            .iter()
            .map(|a| mul_skip_zeros(&a.adjoint(), a) * Complex64::new(2.0, 0.0) - &id)
            .collect();
        Ok(CarChain {
            n,
            annihilators,
            parities,
        })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn check_site(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n {
            return Err(AlfError::InvalidArgument(format!("site {k} outside [1, {}]", self.n)));
        }
        Ok(())
    }

    /// `a_k`.
    pub fn annihilator(&self, k: usize) -> Result<&ComplexMatrix> {
        self.check_site(k)?;
        Ok(&self.annihilators[k - 1])
    }

    /// `a_k*`.
    pub fn creator(&self, k: usize) -> Result<ComplexMatrix> {
        Ok(self.annihilator(k)?.adjoint())
    }

    /// `2 a_k* a_k - 1`.
    pub fn parity(&self, k: usize) -> Result<&ComplexMatrix> {
        self.check_site(k)?;
        Ok(&self.parities[k - 1])
    }

    /// `Π_{j=from}^{to} (2a_j*a_j - 1)`; the identity when `from > to`.
    pub fn parity_string(&self, from: usize, to: usize) -> Result<ComplexMatrix> {
        let mut acc = ComplexMatrix::identity(self.dim(), self.dim());
        for j in from..=to {
            acc = mul_skip_zeros(&acc, self.parity(j)?);
        }
        Ok(acc)
    }

    /// `E^{(k)}_{ab}` from `a_k` and `V_k = Π_{j<k}(2a_j*a_j - 1)`.
    pub fn site_unit(&self, k: usize, a: u8, b: u8) -> Result<ComplexMatrix> {
        let v = self.parity_string(1, k - 1)?;
        self.site_unit_from(k, a, b, &v)
    }

    /// `Θ(E^{(k)}_{ab})`: the same expression with `a_k ↦ a_{k+1}` and
    /// `V_k ↦ Θ(V_k) = Π_{j=2}^{k}(2a_j*a_j - 1)`.
    pub fn shifted_site_unit(&self, k: usize, a: u8, b: u8) -> Result<ComplexMatrix> {
        let v = self.parity_string(2, k)?;
        self.site_unit_from(k + 1, a, b, &v)
    }

    fn site_unit_from(&self, k: usize, a: u8, b: u8, v: &ComplexMatrix) -> Result<ComplexMatrix> {
        let ak = self.annihilator(k)?;
        let ak_star = ak.adjoint();
        Ok(match (a, b) {
            (1, 1) => mul_skip_zeros(&ak_star, ak),
            (2, 2) => mul_skip_zeros(ak, &ak_star),
            (2, 1) => mul_skip_zeros(v, ak),
            (1, 2) => mul_skip_zeros(v, &ak_star),
            _ => {
                return Err(AlfError::InvalidArgument(format!(
                    "site symbols must be 1 or 2, got ({a}, {b})"
                )))
            }
        })
    }

    fn check_unit(&self, u: &MatrixUnit, extra: usize) -> Result<()> {
        if u.end() + extra > self.n {
            return Err(AlfError::DimensionMismatch(format!(
                "unit on [{}, {}] does not fit {} sites",
                u.start(),
                u.end() + extra,
                self.n
            )));
        }
        Ok(())
    }

    /// `coeff · Π_{k=m}^{n} E^{(k)}_{φ_k ψ_k}`.
    pub fn unit(&self, u: &MatrixUnit) -> Result<ComplexMatrix> {
        self.check_unit(u, 0)?;
        let mut acc = ComplexMatrix::identity(self.dim(), self.dim()) * u.coeff();
        for (i, k) in (u.start()..=u.end()).enumerate() {
            acc = mul_skip_zeros(&acc, &self.site_unit(k, u.phi()[i], u.psi()[i])?);
        }
        Ok(acc)
    }

    /// `Θ(u)` assembled from shifted generators; the oracle for
    /// [`shift_matrix_unit`](super::matrix_unit::shift_matrix_unit).
    pub fn shifted_unit_oracle(&self, u: &MatrixUnit) -> Result<ComplexMatrix> {
        self.check_unit(u, 1)?;
        let mut acc = ComplexMatrix::identity(self.dim(), self.dim()) * u.coeff();
        for (i, k) in (u.start()..=u.end()).enumerate() {
            acc = mul_skip_zeros(&acc, &self.shifted_site_unit(k, u.phi()[i], u.psi()[i])?);
        }
        Ok(acc)
    }

    /// Dense form of a symbolic shift result, parity prefix included.
    pub fn shifted(&self, s: &ShiftedUnit) -> Result<ComplexMatrix> {
        let base = self.unit(&s.unit)?;
        if s.parity_exponent.rem_euclid(2) == 1 {
            Ok(mul_skip_zeros(self.parity(1)?, &base))
        } else {
            Ok(base)
        }
    }

    /// Normalized trace `2^{-n} Tr`.
    pub fn tracial_state(&self, m: &ComplexMatrix) -> Complex64 {
        m.trace() / Complex64::new(self.dim() as f64, 0.0)
    }
}

/// Dense form of `u` on `n` sites.
pub fn jw_dense(u: &MatrixUnit, n: usize, caps: &Caps) -> Result<ComplexMatrix> {
    CarChain::new(n, caps)?.unit(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion_shift::matrix_unit::{shift_matrix_unit, tracial_value};
    use crate::partitions::random::seeded_rng;
    use crate::quantum_core::max_abs_diff;
    use rand::Rng;

    fn ket_bra(a: u8, b: u8) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[((a - 1) as usize, (b - 1) as usize)] = Complex64::new(1.0, 0.0);
        m
    }

    fn tensor_oracle(u: &MatrixUnit, n: usize) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2, 2);
        let factors: Vec<ComplexMatrix> = (1..=n)
            .map(|k| {
                if k >= u.start() && k <= u.end() {
                    ket_bra(u.phi()[k - u.start()], u.psi()[k - u.start()])
                } else {
                    id.clone()
                }
            })
            .collect();
        tensor_all(&factors) * u.coeff()
    }

    fn random_unit<R: Rng>(rng: &mut R, n: usize) -> MatrixUnit {
        let start = rng.random_range(1..=n);
        let len = rng.random_range(1..=n - start + 1);
        let s = |rng: &mut R| (0..len).map(|_| rng.random_range(1..=2u8)).collect::<Vec<_>>();
        let phi = s(rng);
        let psi = s(rng);
        let coeff = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        MatrixUnit::new(start, phi, psi, coeff).unwrap()
    }

    #[test]
    fn canonical_anticommutation() {
        let chain = CarChain::new(4, &Caps::default()).unwrap();
        let id = ComplexMatrix::identity(16, 16);
        let zero = ComplexMatrix::zeros(16, 16);
        for k in 1..=4 {
            for l in 1..=4 {
                let ak = chain.annihilator(k).unwrap();
                let al = chain.annihilator(l).unwrap();
                let anti = ak * al + al * ak;
                assert!(max_abs_diff(&anti, &zero) < 1e-14);
                let mixed = ak.adjoint() * al + al * ak.adjoint();
                let expect = if k == l { &id } else { &zero };
                assert!(max_abs_diff(&mixed, expect) < 1e-14, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn generator_units_are_tensor_units() {
        let mut rng = seeded_rng(5);
        let n = 5;
        let chain = CarChain::new(n, &Caps::default()).unwrap();
        for _ in 0..200 {
            let u = random_unit(&mut rng, n);
            let got = chain.unit(&u).unwrap();
            assert!(max_abs_diff(&got, &tensor_oracle(&u, n)) < 1e-13, "{u:?}");
        }
    }

    #[test]
    fn symbolic_shift_matches_shifted_generators() {
        let mut rng = seeded_rng(9);
        let n = 6;
        let chain = CarChain::new(n, &Caps::default()).unwrap();
        let mut charged = 0;
        for _ in 0..300 {
            let u = random_unit(&mut rng, n - 1);
            let s = shift_matrix_unit(&u);
            charged += s.has_parity_prefix() as usize;
            let dense = chain.shifted(&s).unwrap();
            let oracle = chain.shifted_unit_oracle(&u).unwrap();
            assert!(max_abs_diff(&dense, &oracle) < 1e-12, "{u:?}");
        }
        assert!(charged > 50, "sample should include non-invariant units");
    }

    #[test]
    fn tracial_value_matches_normalized_trace() {
        let mut rng = seeded_rng(13);
        let n = 5;
        let chain = CarChain::new(n, &Caps::default()).unwrap();
        for _ in 0..100 {
            let mut u = random_unit(&mut rng, n);
            if rng.random_bool(0.5) {
                u = MatrixUnit::new(u.start(), u.phi().to_vec(), u.phi().to_vec(), u.coeff()).unwrap();
            }
            let dense = chain.tracial_state(&chain.unit(&u).unwrap());
            assert!((dense - tracial_value(&u)).norm() < 1e-14);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps {
            dense_dim: 8,
            ..Caps::default()
        };
        assert!(CarChain::new(3, &caps).is_ok());
        assert!(matches!(CarChain::new(4, &caps), Err(AlfError::CapExceeded { .. })));
    }
}
