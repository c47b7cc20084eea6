//! The shift on the Fermion chain: matrix-unit calculus, the Jordan–Wigner
//! realization, and gauge-invariant partitions under the tracial state.

pub mod gicar;
pub mod jordan_wigner;
pub mod matrix_unit;

pub use gicar::{
    brute_force_correlation, build_gicar_partition, refined_correlation_symbolic, refined_element,
    refined_path_probability, BruteForceCorrelation, GicarElement, GicarPartition, SymbolicCorrelation,
};
pub use jordan_wigner::{jw_dense, CarChain};
pub use matrix_unit::{
    gauge_charge, gicar_decomposition, matrix_unit_product, multiply_on_window, pad_to_window, random_unit,
    shift_matrix_unit, tracial_value, MatrixUnit, ShiftedUnit,
};
