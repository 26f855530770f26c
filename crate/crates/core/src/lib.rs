//! Exact invariant calculus for simply-connected smooth 4-manifolds.

pub mod arith;
pub mod lattice;
pub mod swring;
pub mod knots;
pub mod manifold;
pub mod surgery;
pub mod geography;
pub mod script;
