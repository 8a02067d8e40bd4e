//! Zeros of Laguerre polynomials `L_n^{(alpha_n)}(n z)` with
//! `alpha_n = -n A_n`, `A_n -> A` in `(0, 1)`, and the limit objects that
//! describe them: the endpoints `beta1, beta2`, the level curves `Gamma_r`,
//! the limit zero-counting measures, and leading-order asymptotics.

pub mod asymptotics;
pub mod cli;
pub mod contour;
pub mod error;
pub mod harness;
pub mod laguerre;
pub mod landscape;
pub mod measure;
pub mod mp;
pub mod quadrature;
pub mod rootfinder;
pub mod stats;

pub use error::{Error, Result};
