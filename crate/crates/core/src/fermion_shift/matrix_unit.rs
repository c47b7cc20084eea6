//! Symbolic matrix units `c · E^{[m,n]}_{φψ}` of the CAR algebra.
//!
//! Site strings are over `{1, 2}`; `1` is the occupied and `2` the empty mode.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{AlfError, Result};

/// `coeff · E^{[start, start+len-1]}_{φψ}` with `φ, ψ ∈ {1,2}^len`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixUnit {
    start: usize,
    phi: Vec<u8>,
    psi: Vec<u8>,
    coeff: Complex64,
}

impl MatrixUnit {
    pub fn new(start: usize, phi: Vec<u8>, psi: Vec<u8>, coeff: Complex64) -> Result<Self> {
        if start == 0 {
            return Err(AlfError::InvalidArgument("sites are numbered from 1".into()));
        }
        if phi.len() != psi.len() || phi.is_empty() {
            return Err(AlfError::DimensionMismatch(format!(
                "φ has length {}, ψ has length {}; both must equal the (nonzero) window length",
                phi.len(),
                psi.len()
            )));
        }
        if phi.iter().chain(&psi).any(|&s| s != 1 && s != 2) {
            return Err(AlfError::InvalidArgument("site strings must be over {1, 2}".into()));
        }
        Ok(MatrixUnit { start, phi, psi, coeff })
    }

    /// Unit with coefficient 1.
    pub fn unit(start: usize, phi: Vec<u8>, psi: Vec<u8>) -> Result<Self> {
        Self::new(start, phi, psi, Complex64::new(1.0, 0.0))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.phi.len() - 1
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi(&self) -> &[u8] {
        &self.phi
    }

    pub fn psi(&self) -> &[u8] {
        &self.psi
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    /// `(c E_{φψ})* = c̄ E_{ψφ}`.
    pub fn adjoint(&self) -> MatrixUnit {
        MatrixUnit {
            start: self.start,
            phi: self.psi.clone(),
            psi: self.phi.clone(),
            coeff: self.coeff.conj(),
        }
    }

    fn same_interval(&self, other: &MatrixUnit) -> bool {
        self.start == other.start && self.len() == other.len()
    }
}

fn string_sum(s: &[u8]) -> i64 {
    s.iter().map(|&v| v as i64).sum()
}

/// `Σψ - Σφ`; zero exactly for gauge-invariant units.
pub fn gauge_charge(u: &MatrixUnit) -> i64 {
    string_sum(&u.psi) - string_sum(&u.phi)
}

/// `E_{φψ} E_{φ'ψ'} = δ_{ψφ'} E_{φψ'}` on a common interval.
pub fn matrix_unit_product(u: &MatrixUnit, v: &MatrixUnit) -> Result<Option<MatrixUnit>> {
    if !u.same_interval(v) {
        return Err(AlfError::DimensionMismatch(format!(
            "product needs a common interval, got [{}, {}] and [{}, {}]",
            u.start,
            u.end(),
            v.start,
            v.end()
        )));
    }
    if u.psi != v.phi {
        return Ok(None);
    }
    Ok(Some(MatrixUnit {
        start: u.start,
        phi: u.phi.clone(),
        psi: v.psi.clone(),
        coeff: u.coeff * v.coeff,
    }))
}

/// Rewrites `u` on `[start, end]`, expanding the identity on each added site
/// as `E_11 + E_22`.
pub fn pad_to_window(u: &MatrixUnit, start: usize, end: usize) -> Result<Vec<MatrixUnit>> {
    if start == 0 || start > u.start || end < u.end() {
        return Err(AlfError::InvalidArgument(format!(
            "window [{start}, {end}] does not contain [{}, {}]",
            u.start,
            u.end()
        )));
    }
    let left = u.start - start;
    let right = end - u.end();
    let pads = left + right;
    let mut out = Vec::with_capacity(1 << pads);
    for mask in 0..(1usize << pads) {
        let pad: Vec<u8> = (0..pads).map(|b| 1 + ((mask >> (pads - 1 - b)) & 1) as u8).collect();
        let mut phi = pad[..left].to_vec();
        phi.extend_from_slice(&u.phi);
        phi.extend_from_slice(&pad[left..]);
        let mut psi = pad[..left].to_vec();
        psi.extend_from_slice(&u.psi);
        psi.extend_from_slice(&pad[left..]);
        out.push(MatrixUnit {
            start,
            phi,
            psi,
            coeff: u.coeff,
        });
    }
    Ok(out)
}

/// Product of units on arbitrary intervals, as a linear combination of
/// units on the convex hull of both intervals.
///
/// Sites covered by both factors must match (`ψ_u = φ_v` there); sites
/// covered by neither are summed over as identities.
pub fn multiply_on_window(u: &MatrixUnit, v: &MatrixUnit) -> Vec<MatrixUnit> {
    let start = u.start.min(v.start);
    let end = u.end().max(v.end());
    let at = |w: &MatrixUnit, s: usize| -> Option<(u8, u8)> {
        (s >= w.start && s <= w.end()).then(|| (w.phi[s - w.start], w.psi[s - w.start]))
    };
    let mut phi = Vec::with_capacity(end - start + 1);
    let mut psi = Vec::with_capacity(end - start + 1);
    let mut gaps = Vec::new();
    for s in start..=end {
        match (at(u, s), at(v, s)) {
            (Some((pu, qu)), Some((pv, qv))) => {
                if qu != pv {
                    return Vec::new();
                }
                phi.push(pu);
                psi.push(qv);
            }
            (Some((pu, qu)), None) => {
                phi.push(pu);
                psi.push(qu);
            }
            (None, Some((pv, qv))) => {
                phi.push(pv);
                psi.push(qv);
            }
            (None, None) => {
                gaps.push(phi.len());
                phi.push(0);
                psi.push(0);
            }
        }
    }
    let coeff = u.coeff * v.coeff;
    (0..(1usize << gaps.len()))
        .map(|mask| {
            let mut phi = phi.clone();
            let mut psi = psi.clone();
            for (b, &g) in gaps.iter().enumerate() {
                let sym = 1 + ((mask >> b) & 1) as u8;
                phi[g] = sym;
                psi[g] = sym;
            }
            MatrixUnit { start, phi, psi, coeff }
        })
        .collect()
}

/// `Θ(u)`: the unit moved one site to the right, together with the exponent
/// of the parity prefix `(2a_1*a_1 - 1)^{Σφ-Σψ}`.
///
/// A nonzero exponent marks a unit that is not gauge invariant; GICAR code
/// paths refuse such results.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedUnit {
    pub unit: MatrixUnit,
    pub parity_exponent: i64,
}

impl ShiftedUnit {
    pub fn has_parity_prefix(&self) -> bool {
        self.parity_exponent != 0
    }

    /// The shifted unit, provided no parity prefix is attached.
    pub fn into_gauge_invariant(self) -> Result<MatrixUnit> {
        if self.has_parity_prefix() {
            return Err(AlfError::InvalidArgument(format!(
                "shifted unit carries parity prefix with exponent {}",
                self.parity_exponent
            )));
        }
        Ok(self.unit)
    }
}

pub fn shift_matrix_unit(u: &MatrixUnit) -> ShiftedUnit {
    ShiftedUnit {
        unit: MatrixUnit {
            start: u.start + 1,
            ..u.clone()
        },
        parity_exponent: -gauge_charge(u),
    }
}

/// Random unit on a random interval inside `[1, n_sites]`, coefficient in
/// the unit square.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n_sites: usize) -> MatrixUnit {
    let start = rng.random_range(1..=n_sites);
    let len = rng.random_range(1..=n_sites - start + 1);
    let phi = (0..len).map(|_| rng.random_range(1..=2u8)).collect();
    let psi = (0..len).map(|_| rng.random_range(1..=2u8)).collect();
    let coeff = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    MatrixUnit { start, phi, psi, coeff }
}

/// Normalized trace: `coeff · δ_{φψ} · 2^{-len}`.
pub fn tracial_value(u: &MatrixUnit) -> Complex64 {
    if u.phi == u.psi {
        u.coeff * 0.5f64.powi(u.len() as i32)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Block sizes `C(n, s)`, `s = 0..=n`, of the gauge-invariant algebra on `n` sites.
pub fn gicar_decomposition(n: usize) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(AlfError::InvalidArgument("need n >= 1".into()));
    }
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    Ok(row)
}
