//! Maximal surfaces in anti-De Sitter space `H³₁`, their Gauss maps into
//! `H² × H²` and `H² × ℝ`, and the numerical machinery used to check them.
//!
//! The crate is organised bottom-up:
//!
//! - [`elliptic`]: Jacobi elliptic functions in the parameter convention.
//! - [`sinhgordon`]: closed-form solutions of `v'' = 2 sinh 2v` and an RK4 oracle.
//! - [`lorentz`]: `ℝ⁴₂`, `H²`, bivectors, the star operator.
//! - [`immersions`]: the explicit surface families and Gauss-map constructions.
//! - [`diffgeo`]: finite-difference fundamental forms and verification reports.
//! - [`mesh`] and [`config`]: sampling, export and the plain-text config format.

pub mod config;
pub mod diffgeo;
pub mod elliptic;
pub mod error;
pub mod immersions;
pub mod lorentz;
pub mod mesh;
pub mod quadrature;
pub mod sinhgordon;

pub use error::{Error, Result};
