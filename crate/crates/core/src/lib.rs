//! Pseudo-spectral construction of fully localised solitary waves of the
//! steady full-dispersion KP-I equation
//!
//! ```text
//! -c u + m(D) u + u^2 = 0,   c = 1 - eps^2,
//! ```
//!
//! by splitting the spectrum along the cone `|k1| <= delta, |k2/k1| <= delta`,
//! eliminating the high-frequency part with a contraction, and solving the
//! KP-scaled reduced equation by Newton-Krylov iteration seeded with the
//! explicit KP-I lumps.
//!
//! Everything is computed on one periodic grid in KP-scaled coordinates
//! `(X, Y) = (eps x, eps^2 y)`. A field `f` stored in the [`Frame::KpScaled`]
//! frame represents the physical function `F(x, y) = eps^2 f(eps x, eps^2 y)`,
//! and physical-frame norms are evaluated from the scaled coefficients by the
//! exact change of variables.
//!
//! Modules:
//! - [`spectral`]: grids, unitary transforms, fields, multipliers, cone
//!   projections, dealiased products, reflections and anisotropic norms.
//! - [`symbols`]: closed-form Fourier symbols and the dispersion curve.
//! - [`lumps`]: exact rational calculus for the lumps `zeta_1`, `zeta_2`.
//! - [`reduction`]: the high-frequency contraction, the reduced equation and
//!   its Newton solution, reassembly and the full residual.
//! - [`harness`]: epsilon sweeps, estimate verification, the nondegeneracy
//!   probe and the dispersion check.
//! - [`io`] and [`cli`]: configuration, persistence and command dispatch.

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod lumps;
pub mod reduction;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
pub use spectral::{Field, Frame, Grid, NormKind};
pub use symbols::SymbolParams;
