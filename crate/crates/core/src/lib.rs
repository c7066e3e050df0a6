//! Weil algebras and Weil functors on charts.
//!
//! A Weil algebra is presented as a quotient `Q[x0..x{n-1}]/I` of a polynomial
//! ring by an ideal containing a power of the maximal ideal. Evaluating a smooth
//! map on points with coordinates in such an algebra computes its truncated
//! Taylor prolongation, which is higher-order forward-mode differentiation.
//!
//! Besides the arithmetic, the crate carries runnable checks for the functor
//! laws of `T^W`, the natural transformations `α_φ`, microlinearity of charts,
//! transversal limits and vertical Weil functors. Every check is a pure
//! computation that returns a [`laws::LawReport`].
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod expr;
pub mod faults;
pub mod laws;
pub mod lift;
pub mod limits;
pub mod linalg;
pub mod poly;
pub mod presets;
pub mod scalar;

pub use algebra::{Tensor, WeilAlgebra, WeilElement, WeilMorphism};
pub use error::{Error, Result};
pub use expr::{Expr, OpenBox, Primitive, SmoothMap};
pub use lift::{LiftedMap, WeilPoint};
pub use scalar::{Mode, Rational, Scalar};
