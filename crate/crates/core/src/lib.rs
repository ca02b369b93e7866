//! Exact-arithmetic deformation quantization toolkit.
//!
//! Star products are represented as truncated series of bidifferential
//! operators with polynomial coefficients over ℚ. On top of that the crate
//! provides order-by-order star inversion, commutative localization of
//! multidifferential operators at decidable multiplicative sets, localized
//! star products, and a small laboratory for testing Ore conditions.
//!
//! Every identity the library claims is checked by exact equality; there
//! is no floating point anywhere.

pub mod error;
pub mod frac;
pub mod linsolve;
pub mod localize;
pub mod multidiff;
pub mod orelab;
pub mod parse;
pub mod poly;
pub mod random;
pub mod rational;
pub mod ring;
pub mod series;
pub mod session;
pub mod star;
pub mod verify;

pub use error::{Error, Result};
pub use frac::{LocalFrac, MultSetSpec};
pub use multidiff::{MultiDiffOp, OrderCertificate};
pub use poly::{Monomial, MultiPoly};
pub use rational::Rational;
pub use ring::Coeff;
pub use series::{LambdaOrder, LambdaSeries};
pub use star::{EquivTransform, StarAlgebra, StarProduct};
