//! C ABI over `alf-entropy`.
//!
//! Every function returns an [`AlfStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and can be read with
//! [`alf_last_error`]. Handles are opaque and must be released with their
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use alf_entropy::fermion_shift::build_gicar_partition;
use alf_entropy::markov_reduction::{
    build_fine_chain, closed_form_rate, coarse_grain, entropy_rate, finite_n_entropy, FiniteMarkovChain,
};
use alf_entropy::quantum_core::{von_neumann_entropy, Caps, ComplexMatrix, DensityMatrix};
use alf_entropy::spin_shift::{fourier_partition, reduced_refined_entropy, refined_correlation, SpinChainSystem};
use alf_entropy::AlfError;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    CapExceeded = 4,
    Validation = 5,
    NotErgodic = 6,
    Io = 7,
    Internal = 8,
}

impl From<&AlfError> for AlfStatus {
    fn from(e: &AlfError) -> Self {
        match e {
            AlfError::InvalidArgument(_) => AlfStatus::InvalidArgument,
            AlfError::DimensionMismatch(_) => AlfStatus::DimensionMismatch,
            AlfError::CapExceeded { .. } => AlfStatus::CapExceeded,
            AlfError::Validation { .. } => AlfStatus::Validation,
            AlfError::Reducible { .. } | AlfError::NotPrimitive { .. } => AlfStatus::NotErgodic,
            AlfError::Io(_) | AlfError::Parse(_) => AlfStatus::Io,
            AlfError::Consistency(_) => AlfStatus::Internal,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (AlfStatus, String)>) -> AlfStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AlfStatus::Internal
        }
    }
}

fn lift(e: AlfError) -> (AlfStatus, String) {
    (AlfStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (AlfStatus, String) {
    (AlfStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn alf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Von Neumann entropy (natural log) of a `dim x dim` density matrix given
/// row-major as interleaved `(re, im)` pairs, `2 * dim * dim` doubles.
///
/// # Safety
/// `re_im` must point to `2 * dim * dim` readable doubles and `out` to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn alf_von_neumann_entropy(re_im: *const f64, dim: usize, out: *mut f64) -> AlfStatus {
    guard(|| {
        if re_im.is_null() || out.is_null() {
            return Err(null("re_im or out"));
        }
        if dim == 0 {
            return Err((AlfStatus::InvalidArgument, "dim must be positive".into()));
        }
        let data = unsafe { std::slice::from_raw_parts(re_im, 2 * dim * dim) };
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
            let k = 2 * (i * dim + j);
            Complex64::new(data[k], data[k + 1])
        });
        let rho = DensityMatrix::new(m).map_err(lift)?;
        unsafe { *out = von_neumann_entropy(&rho) };
        Ok(())
    })
}

/// `(2 - 1/M) ln 2`.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn alf_closed_form_rate(m: usize, out: *mut f64) -> AlfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = closed_form_rate(m).map_err(lift)?;
        unsafe { *out = r };
        Ok(())
    })
}

/// Markov chain of the gauge-invariant Fermion partition on `M` sites.
pub struct AlfChain {
    chain: FiniteMarkovChain,
}

/// Builds the fine chain (`coarse = false`) or its lumped quotient.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn alf_chain_new(m: usize, coarse: bool, out: *mut *mut AlfChain) -> AlfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = build_gicar_partition(m).map_err(lift)?;
        let fine = build_fine_chain(&p).map_err(lift)?;
        let chain = if coarse {
            coarse_grain(&fine).map_err(lift)?.chain
        } else {
            fine.chain
        };
        unsafe { *out = Box::into_raw(Box::new(AlfChain { chain })) };
        Ok(())
    })
}

/// # Safety
/// `chain` must be null or a live handle from [`alf_chain_new`].
#[no_mangle]
pub unsafe extern "C" fn alf_chain_free(chain: *mut AlfChain) {
    if !chain.is_null() {
        drop(unsafe { Box::from_raw(chain) });
    }
}

/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_chain_state_count(chain: *const AlfChain, out: *mut usize) -> AlfStatus {
    guard(|| {
        let (Some(c), false) = (unsafe { chain.as_ref() }, out.is_null()) else {
            return Err(null("chain or out"));
        };
        unsafe { *out = c.chain.len() };
        Ok(())
    })
}

/// Entropy rate `-Σ μ∞(a) P_ab ln P_ab`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_chain_entropy_rate(chain: *const AlfChain, out: *mut f64) -> AlfStatus {
    guard(|| {
        let (Some(c), false) = (unsafe { chain.as_ref() }, out.is_null()) else {
            return Err(null("chain or out"));
        };
        let r = entropy_rate(&c.chain).map_err(lift)?;
        unsafe { *out = r };
        Ok(())
    })
}

/// Path entropy of the first `n_steps + 1` states.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_chain_finite_entropy(chain: *const AlfChain, n_steps: usize, out: *mut f64) -> AlfStatus {
    guard(|| {
        let (Some(c), false) = (unsafe { chain.as_ref() }, out.is_null()) else {
            return Err(null("chain or out"));
        };
        let s = finite_n_entropy(&c.chain, n_steps).map_err(lift)?;
        unsafe { *out = s };
        Ok(())
    })
}

/// Product state of one site state on a spin chain, with the Fourier partition.
pub struct AlfSpinSystem {
    sys: SpinChainSystem,
}

/// Site state `diag(spectrum)` with `d` levels.
///
/// # Safety
/// `spectrum` must point to `d` readable doubles and `out` to a writable
/// handle slot.
#[no_mangle]
pub unsafe extern "C" fn alf_spin_new(spectrum: *const f64, d: usize, out: *mut *mut AlfSpinSystem) -> AlfStatus {
    guard(|| {
        if spectrum.is_null() || out.is_null() {
            return Err(null("spectrum or out"));
        }
        let s = unsafe { std::slice::from_raw_parts(spectrum, d) };
        let sys = SpinChainSystem::from_spectrum(s).map_err(lift)?;
        unsafe { *out = Box::into_raw(Box::new(AlfSpinSystem { sys })) };
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a live handle from [`alf_spin_new`].
#[no_mangle]
pub unsafe extern "C" fn alf_spin_free(sys: *mut AlfSpinSystem) {
    if !sys.is_null() {
        drop(unsafe { Box::from_raw(sys) });
    }
}

/// `S(ρ_N)` of the `N`-step Fourier refinement, under the default caps.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_spin_refined_entropy(
    sys: *const AlfSpinSystem,
    n_steps: usize,
    out: *mut f64,
) -> AlfStatus {
    guard(|| {
        let (Some(s), false) = (unsafe { sys.as_ref() }, out.is_null()) else {
            return Err(null("sys or out"));
        };
        let x = fourier_partition(s.sys.d()).map_err(lift)?;
        let rho = refined_correlation(&s.sys, &x, n_steps, &Caps::default()).map_err(lift)?;
        unsafe { *out = von_neumann_entropy(&rho) };
        Ok(())
    })
}

/// Closed form `(N-1)(ln d + S(σ))` of the reduced refined entropy, `N >= 2`.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn alf_spin_reduced_entropy(
    sys: *const AlfSpinSystem,
    n_steps: usize,
    out: *mut f64,
) -> AlfStatus {
    guard(|| {
        let (Some(s), false) = (unsafe { sys.as_ref() }, out.is_null()) else {
            return Err(null("sys or out"));
        };
        let v = reduced_refined_entropy(&s.sys, n_steps).map_err(lift)?;
        unsafe { *out = v };
        Ok(())
    })
}
