//! Periodic grids, unitary transforms and spectral fields.

mod field;
mod grid;
mod norm;
pub mod transform;

pub use field::{Field, Frame, Side};
#[allow(unused_imports)]
pub(crate) use field::{cone_mask, dealiased_product, energy, symmetrized, zero_forbidden};
pub use grid::Grid;
pub use norm::{norm, NormKind};
