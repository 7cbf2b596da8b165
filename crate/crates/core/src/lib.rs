//! Grid toolkit for the objects that appear in higher-integrability proofs for
//! double-phase systems: maximal operators, Riesz potentials, mean-value
//! polynomials, Whitney covers, Lipschitz truncation and Gehring-type
//! self-improvement, plus a verification harness that turns each estimate
//! into a measured, reproducible check.

pub mod corpus;
pub mod error;
pub mod exponents;
pub mod gehring;
pub mod grid;
pub mod harness;
pub mod io;
pub mod maximal;
pub mod meanpoly;
pub mod numeric;
pub mod potentials;
pub mod report;
pub mod suites;
pub mod truncation;
pub mod weights;
pub mod whitney;

pub use error::{Error, Result};
pub use grid::{GridFunction, MultiIndex, Region};
