//! Pointwise geometry of conformal product metrics `g = e^{2f₁}g₁ + e^{2f₂}g₂`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: closed-form scalar expressions are parsed once and
//! evaluated as truncated jets, curvature is computed either from first
//! principles ([`oracle`]) or from the block formulas of [`conformal`], and
//! the two routes are compared by the callers.
//!
//! Module map:
//!
//! * [`expr`]: expression grammar, printer, jet evaluation.
//! * [`tensor`]: pointwise block tensors and the musical isomorphisms.
//! * [`oracle`]: coordinate Christoffel/Riemann/Ricci of an arbitrary chart metric.
//! * [`conformal`]: connection and curvature formulas for conformal products,
//!   Einstein relations and the splitting construction.
//! * [`ode`]: residuals of the one-dimensional-factor reductions.
//! * [`search`]: Fourier-parametrized Einstein-residual minimization on tori.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod conformal;
pub mod error;
pub mod expr;
pub(crate) mod math;
pub mod ode;
pub mod oracle;
pub mod real;
pub mod search;
pub mod tensor;

pub use error::{Error, Result};
pub use expr::{CoordSplit, Jet, JetSpace, ProductPoint, ScalarExpr};
