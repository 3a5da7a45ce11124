//! Exact U(p)-operator matrices, eigenbases and functional-equation matrices
//! for Siegel Eisenstein series of degree `n` and level `p`, with trivial or
//! quadratic character.
//!
//! All s-dependent quantities are rational functions in `X = p^{-2s}` with
//! coefficients in Q(i)(√p); nothing is approximated.

pub mod cli;
pub mod degree2;
pub mod exactscalar;
pub mod fpforms;
pub mod functeq;
pub mod ratfunc;
pub mod upoperator;

pub use exactscalar::{GaussRational, QuadScalar};
pub use fpforms::CharacterKind;
pub use ratfunc::{AffineExponent, Poly, RatFunc};
pub use upoperator::{EisensteinContext, RFMatrix};
