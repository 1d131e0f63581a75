//! A desk-scale numerical laboratory for a dispersionless two-component
//! Camassa-Holm system with quadratic and cubic nonlinearities.
//!
//! The system couples two velocity fields `u`, `v` through their momenta
//! `m = u - u_xx`, `n = v - v_xx`:
//!
//! ```text
//! m_t + [m (u v - u_x v_x)]_x / 2 - m (u v_x - u_x v) / 2 = 0
//! n_t + [n (u v - u_x v_x)]_x / 2 + n (u v_x - u_x v) / 2 = 0
//! ```
//!
//! Setting `v = 2` collapses it to the dispersionless Camassa-Holm
//! equation; `v = u` gives the cubic (FORQ-type) flow. Both reductions
//! are wired into the verification suites as independent oracles.
//!
//! The crate provides, module by module:
//!
//! - [`grid`]: periodic pseudospectral grid, derivatives, field state;
//! - [`green`]: the `(1 - d^2/dx^2)^{-1}` convolution operator;
//! - [`rhs`]: the velocity- and momentum-form right-hand sides;
//! - [`stepper`]: guarded fixed-step RK4 integration;
//! - [`flow`]: characteristics, transport identities, tail functionals;
//! - [`decay`]: weighted norms and exponential decay-index fits;
//! - [`scenario`]: canned initial conditions, experiment runner, file I/O;
//! - [`verify`]: the property suites behind `chpair verify`.
//!
//! The accompanying book (`book/` in the repository) walks through the
//! mathematics chapter by chapter; its code snippets compile and run as
//! doc-tests of this crate.

pub mod decay;
pub mod error;
pub mod flow;
pub mod green;
pub mod grid;
pub mod rhs;
pub mod scenario;
pub mod stepper;
pub mod util;
pub mod verify;

pub mod book;

pub use error::{Error, Result};
