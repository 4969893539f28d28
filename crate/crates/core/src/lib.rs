//! Deterministic simulator for a two-loop discrete-time quantum walk.
//!
//! The walker lives on a one-dimensional lattice and carries a two-level
//! internal state (the upper loop `u` and the lower loop `v`). Each step
//! applies a 2×2 coin, shifts `u` one site left and `v` one site right, and
//! multiplies each component by a position-dependent phase. A linear phase
//! gradient acts as a constant force and produces Bloch oscillations, or
//! Landau-Zener tunneling between the two quasi-energy bands when it is strong.
//!
//! Modules:
//! * [`walk`]: lattice field, coin, phase profiles and the exact one-step update.
//! * [`spectral`]: dispersion relation, momentum-space step operator, band
//!   projections and an FFT propagation oracle.
//! * [`analysis`]: observables extracted from trajectories (Zitterbewegung,
//!   hyperbola pattern, Bloch recovery, band transfer, ballistic spreading).
//! * [`io`]: run configuration grammar, CSV grids, PGM heatmaps and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod io;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use walk::{
    evolve, evolve_recorded, fidelity, make_initial, make_packet, step, Amp, Band, CoinOp,
    Gradient, GridKind, IntensityGrid, Loop, PhaseProfile, Spinor, Trajectory, WalkState,
};
