//! Self-consistent one-dimensional Schrödinger–Poisson band-diagram solver.

mod density;
mod eigen;
mod poisson;
mod scf;
mod schrodinger;

pub use density::{logistic, sheet_density, softplus, subband_density};
pub use eigen::{thomas_solve, SymTridiagonal};
pub use poisson::{poisson_residual, solve_poisson, solve_poisson_nonlinear};
pub use scf::{self_consistent_solve, PotentialProfile, SolveResult, SolverConfig};
pub use schrodinger::{
    hamiltonian, lowest_localized_state, solve_schrodinger, solve_schrodinger_below, Subband,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("grid needs at least 3 nodes, got {0}")]
    GridTooShort(usize),
    #[error("array length {got} does not match the grid ({expected})")]
    LengthMismatch { expected: usize, got: usize },
    #[error("effective mass at node {0} is not positive")]
    NonPositiveMass(usize),
    #[error("requested {requested} states but the grid has {available} interior nodes")]
    TooManyStates { requested: usize, available: usize },
    #[error("eigenstate {index} did not converge (residual {residual:e} eV)")]
    EigenNotConverged { index: usize, residual: f64 },
    #[error("singular Poisson system")]
    SingularPoisson,
    #[error("nonlinear Poisson update stalled (last step {step:e} V)")]
    PoissonNewton { step: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Stack(#[from] crate::stack::StackError),
}
