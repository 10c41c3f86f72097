//! Spectral solver for small-amplitude quasi-periodic solutions of the
//! completely resonant forced wave equation
//!
//! ```text
//! v_tt - v_xx + f(ω₁t, v) = 0,   v(t, x) = u(ω₁t, ω₂t + x),   ω₂ = 1 + ε
//! ```
//!
//! The unknown `u(φ₁, φ₂)` lives on the two-torus and is represented by a
//! sparse truncated Fourier series. The solver splits `u` into a kernel part
//! `q` and a range part `p`, solves the range equation by contraction, and
//! then attacks the bifurcation equation on the kernel: by a variational
//! saddle search when `ω₁ = n/m` is rational, and by continuation from a
//! non-degenerate periodic orbit of a superlinear oscillator when `ω₁` is
//! irrational.
//!
//! Modules, bottom-up:
//!
//! - [`fourier`]: series arithmetic, weighted norms, nonlinear composition
//! - [`resonance`]: frequency setups, Diophantine sieves, index classes,
//!   diagonal operators with certified inverses
//! - [`range_solver`]: Picard iteration for the range equations
//! - [`bifurcation_a`]: reduced action functional, linking geometry,
//!   critical-point search (rational forcing frequency)
//! - [`bifurcation_b`]: period map, limit orbit, monodromy, continuation in
//!   the amplitude parameter, even-power obstruction probe (irrational
//!   forcing frequency)
//! - [`harness`]: end-to-end pipelines, residuals, scans, config and CLI
//!
//! Runnable walkthroughs live under `examples/`:
//!
//! ```bash
//! cargo run --release --example series_algebra
//! cargo run --release --example frequency_sieve
//! cargo run --release --example range_contraction
//! cargo run --release --example limit_orbit
//! cargo run --release --example case_b_solution
//! cargo run --release --example case_a_saddle
//! cargo run --release --example scaling_scan
//! cargo run --release --example even_power_probe
//! ```

pub mod bifurcation_a;
pub mod bifurcation_b;
pub mod error;
pub mod fourier;
pub mod harness;
mod numerics;
pub mod range_solver;
pub mod resonance;

pub use error::{Error, Result, Stage};
pub use fourier::{Mode, Nonlinearity, Series2D, SpaceWeights, Truncation};
