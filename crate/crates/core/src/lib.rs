//! Numerical laboratory for the quantitative stability of the Hardy–Sobolev
//! inequality
//!
//! ```text
//! μ_{γ,s} (∫ |u|^{2*(s)} |x|^{−s} dx)^{2/2*(s)} ≤ ∫ |∇u|² dx − γ ∫ u² |x|^{−2} dx.
//! ```
//!
//! Every function handled here lives in a single spherical-harmonic sector,
//! `u(x) = R(|x|) Y_k(x/|x|)`. Internally radial profiles are stored in
//! Emden–Fowler form `φ(t) = r^{(N−2)/2} R(r)` with `t = ln r`, which turns the
//! singular weights `r^{N−1}`, `r^{N−3}` and `r^{N−1−s}` into exponentially
//! decaying integrands on the whole line.
//!
//! Module map:
//! - [`params`]: `(N, γ, s)`, best constant, Euler–Lagrange normalization.
//! - [`radial`]: one-sector functions, quadrature, CSV I/O.
//! - [`bubble`]: the extremal family `c U^λ`, dilations, tangent generator.
//! - [`functionals`]: norms, deficit, energy, Euler–Lagrange residual, dual norm.
//! - [`spectral`]: eigenvalues of the linearized operator by sector.
//! - [`manifold`]: projection onto the bubble manifold, multi-bubble fitting.
//! - [`interaction`]: two-bubble interaction integrals and exponent fits.
//! - [`experiments`]: stability-ratio scans and the stability-constant table.

// `!(x > 0.0)` is the NaN-rejecting form used throughout for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod interaction;
pub mod manifold;
pub mod params;
pub mod quadrature;
pub mod radial;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{best_constant, el_normalization_constant, gamma_fn, ProblemParams};
