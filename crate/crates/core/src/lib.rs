//! Kink and interface ground states of the ferromagnetic spin-S XXZ model.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only arithmetic:
//!
//! - [`spin`]: spin-S matrices, the anisotropy parameter `q`, and fixed-magnetization
//!   sector bases.
//! - [`lattice`]: finite chains, rectangles and diagonal strips of the square lattice,
//!   oriented bonds and the zig-zag chain decomposition.
//! - [`operators`]: sparse assembly of the kink Hamiltonians and symmetry operators.
//! - [`states`]: the product states `chi(z)`, `phi(z)` and `Omega(z)`, their overlaps,
//!   sector components and magnetization profiles.
//! - [`spectral`]: dense and Lanczos eigensolvers, kernel counting and gap scans.
//! - [`qsos`]: the quantum solid-on-solid Hamiltonian obtained by projecting onto
//!   products of per-chain kink states.
//!
//! Basis convention used everywhere: the local states of a site are ordered
//! `m = S, S-1, ..., -S` (local index `k = S - m`), and product states are ordered
//! lexicographically with site 0 the most significant digit.
#![no_std]

extern crate alloc;

pub mod error;
pub mod lattice;
pub mod operators;
pub mod qsos;
pub mod spectral;
pub mod spin;
pub mod states;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Default threshold for "exact zero" assertions.
pub const ZERO_TOL: f64 = 1e-10;

/// Default cap on the dimension of a materialized full Hilbert space.
pub const DEFAULT_DIM_CAP: usize = 1 << 22;
