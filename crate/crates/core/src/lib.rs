//! Exact lattice computations for K3 surfaces with non-symplectic
//! automorphisms: Smith normal forms, finite quadratic forms, even lattices,
//! rational-curve configurations and Weierstrass fibrations.

pub mod curveconf;
pub mod error;
pub mod finquad;
pub mod lattice;
pub mod matrix;
pub(crate) mod parse;
pub mod snf;
pub mod weierstrass;

pub use curveconf::{CurveAutomorphism, CurveConfig, DivisorClass, InvariantLattice};
pub use error::{Error, Result};
pub use finquad::{parse_form, FiniteQuadraticForm, FormSymbol};
pub use lattice::{identify, nikulin_unique, parse_lattice_expr, Lattice};
pub use matrix::{IntMatrix, RatMatrix};
pub use snf::{integer_solve, saturated_kernel, smith_normal_form, SmithDecomposition};
pub use weierstrass::{classify_fiber, KodairaFiber, Order, RatPoly, WeierstrassModel};
