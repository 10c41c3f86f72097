//! Truncated real Fourier series on the two-torus and the nonlinear
//! composition `u ↦ f(φ₁, u, δ)`.
//!
//! Norms follow the weighted ℓ¹ scale
//!
//! ```text
//! |u|_{σ,s} = Σ_l |û_l| e^{σ|l₂|} [l₁]^s,   [l₁] = max(|l₁|, 1)
//! ```
//!
//! under which products satisfy `|uv|_{σ,s} ≤ 2^s |u|_{σ,s} |v|_{σ,s}`.

mod nonlinearity;
mod series;

pub use nonlinearity::{coefficient_series, Harmonic, Nonlinearity};
pub use series::{Axis, Mode, Series2D, SeriesJson, SpaceWeights, Truncation, DROP_RELATIVE};
