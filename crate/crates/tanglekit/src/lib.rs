//! Symbolic computation of the Bar-Natan and Khovanov multicurve
//! invariants of pointed 4-ended tangles: type D structures over a
//! two-vertex quiver algebra, their simplification and classification
//! into curve components, mapping-class-group twisting, Floer-style
//! pairing, and the A∞ deformation with its extension solver.

pub mod ainfty;
pub mod algebra;
pub mod bimodule;
pub mod cube;
pub mod curves;
pub mod diagrams;
pub mod hom;
pub mod pairing;
pub mod simplify;
pub mod typed;

pub(crate) mod f2;
