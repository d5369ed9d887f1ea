//! Numerical toolkit for positive radial solutions of gradient-dependent
//! semilinear elliptic systems on an annulus.
//!
//! The radial reduction maps the annulus onto `[0, 1]`, where solutions are
//! fixed points of a Hammerstein operator built from two Green's kernels.
//! This crate provides:
//!
//! * [`geometry`]: the change of variables `t -> r(t)` and the weight `p(t)`;
//! * [`kernels`]: the Green's kernels, their bounding functions and constants;
//! * [`spectral`]: principal characteristic values of the associated linear
//!   operators (Nyström + power iteration, with a shooting oracle);
//! * [`expr`]: a small expression language for the nonlinearities;
//! * [`criteria`]: stripe sets and the eigenvalue / index existence criteria;
//! * [`solver`]: discretised fixed-point solvers and solution certification;
//! * [`cone`]: weighted norms, cone membership, the `P = K - K` decomposition
//!   and mollifier smoothing;
//! * [`problem`]: the problem-file format consumed by the CLI.

pub mod cone;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod kernels;
mod par;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::GridFunction;
