//! Piecewise-affine discretization and minimization of the perforated and
//! relaxed energies.

mod chart;
mod functional;
mod precond;
mod solve;

pub use functional::{DiscreteFunctional, Frame, HardConstraint, PenaltyRegion, PenaltyTerm, PENALTY_ETA};
pub use solve::{
    limit_functional, perforated_functional, solve, solve_limit, solve_perforated, ConstraintFamily, DirichletData,
    LimitPenalty, LimitProblem, PerforatedFunctional, SolveOptions, SolveOutcome, TraceRow,
};
