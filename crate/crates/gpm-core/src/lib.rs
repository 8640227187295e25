//! Generalized pseudomodes (gPM) for a lossy one-dimensional dielectric slab.
//!
//! The slab of length `L` and refractive index `n_R`, embedded in a background
//! of index `n_B`, supports quasi-normal modes (QNMs) with complex frequencies
//! `ω̃_μ = (μπ + i ln α) c/(L n_R)`, `α = |n_R − n_B|/(n_R + n_B)`. This crate
//! computes those modes in closed form, solves the Hermitization condition
//! `T = V V†` that turns the truncated QNM pole expansion into a set of
//! discrete modes with a valid Lindblad description, recovers the pseudomode
//! profiles `χ_λ(x)` and parameter matrices `ω`, `κ`, `γ`, and compares the
//! resulting spectral density against the exact continuum result computed from
//! the slab Green's function.
//!
//! Two baselines are included for comparison: a naive Hermitization that
//! treats the pole-expansion residues as real, and the quantized quasi-normal
//! mode construction built from regularized modes and a radiative S matrix.
//!
//! Everything is pure computation on `f64`/`Complex64`; the crate is
//! `no_std`-compatible (with `alloc`). File IO, parallel grid sweeps, and the
//! command-line interface live in the companion `gpm-cli` crate.
//!
//! Internal units: `c = L = ħ = ε₀ = 1`. Frequencies are reported in `c/L`,
//! spectral densities in `ħ/(ε₀ L)`.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod altmethods;
pub mod error;
pub mod gpm;
pub mod hermitization;
pub mod linalg;
pub mod metrics;
pub mod slab;

pub use error::{Error, Result};
pub use num_complex::Complex64;
