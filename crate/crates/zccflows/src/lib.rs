//! Parametrized vector fields on matrix Lie algebras.
//!
//! A parametrized vector field of order `n` assigns a tangent vector to the
//! last coordinate of a point of `g^(n+1)`; lifting it makes the parameters
//! flow along with the point. This crate implements that construction for
//! matrix Lie algebras, together with:
//!
//! * the bracket induced on parametrized vector fields by their lifts,
//! * Lax-type fields `(x, y) -> [f(x), y]` and the primed bracket on the
//!   coefficient functions `f: g^n -> g`,
//! * the word identity `w(p)_+ = w(p_+)'` relating the pointwise and primed
//!   Lie algebra structures for a subalgebra splitting `g = g_+ ⊕ g_-`,
//! * numerical flow machinery (fixed RK4 and adaptive Dormand-Prince 5(4)),
//!   a dressing-method group ODE solver, and a zero-curvature checker,
//! * closed-form reference solutions for the sl3(R) example with the
//!   skew-symmetric / upper-triangular splitting.

pub mod error;
pub mod exprfun;
pub mod flows;
pub mod freelie;
pub mod liealg;
pub mod pvf;
pub mod sl3;

pub use error::{Error, Result};
