use thiserror::Error;

use crate::cone::ConeError;
use crate::criteria::CriteriaError;
use crate::expr::{EvalError, ParseError};
use crate::geometry::GeometryError;
use crate::grid::GridError;
use crate::kernels::KernelError;
use crate::problem::ProblemError;
use crate::quadrature::QuadratureError;
use crate::solver::SolveError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
