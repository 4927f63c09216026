//! Time-frequency operator workbench on periodic discrete grids.
//!
//! The crate is organized in layers: [`grid`] holds the FFT substrate
//! (signals, norms, multipliers), [`windows`] the certified smooth frequency
//! windows and small kernels, [`varops`] the operator zoo (variation square
//! functions, bilinear tile multipliers, maximal adjoints), [`adversary`]
//! the deterministic extremizer generators and combinatorial certificates,
//! and [`harness`] the experiment driver and CLI.

pub mod adversary;
pub mod error;
pub mod grid;
pub mod harness;
pub mod varops;
pub mod windows;

pub use error::{Error, Result};
pub use grid::{
    apply_multiplier, inner, lp_norm, project_window, shift_modulate, signal_from_spectrum,
    GridSignal, Interval,
};
pub use windows::{
    build_profile, exp_sum_norm, fejer, plateau_variant, tent, tent_weights, wiener_norm,
    WindowKind, WindowProfile,
};
