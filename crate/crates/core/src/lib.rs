//! Tropical curves in toric surfaces: lattice geometry, parametrized tropical
//! curves and their deformation spaces, combinatorial type enumeration,
//! tropicalization of rational curves, and curves over finite fields.

pub mod arith;
pub mod charp_curves;
pub mod deformation;
pub mod enumeration;
pub mod field;
pub mod lattice_toric;
pub mod linalg;
pub mod trop_rational;
pub mod tropical_curve;
pub mod verify;
