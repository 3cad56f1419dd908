//! Regularized solvers for solvable linear systems `Au = f` whose operator
//! may be rank-deficient and severely ill-conditioned.
//!
//! The library provides four solution procedures — a stationary fixed-point
//! iteration built on shifted Gram solves, the Tikhonov variational minimizer
//! along two algebraic routes, an imaginary-shift iteration for Hermitian
//! operators, and a continuous regularization flow — together with an
//! SVD-based oracle (minimal-norm solutions, null-space projectors, spectral
//! error predictions) that every method is verified against, noise-aware
//! stopping rules, seeded test-problem generators, and a batch experiment
//! CLI.
//!
//! The quantitative backbone is the bound `|(A*A + aI)^{-1} A*| <= 1/(2*sqrt(a))`,
//! which holds for every operator regardless of its norm or conditioning and
//! makes all smoothing steps stable; the `verify` suite measures it directly.

pub mod cli;
pub mod error;
pub mod io;
pub mod operator;
pub mod oracle;
pub mod problems;
pub mod solvers;
pub mod stopping;
pub mod verify;

pub use error::{Error, Result};
pub use operator::{LinearOperator, RegParam, ShiftMode};
pub use oracle::SpectralDecomposition;
pub use problems::TestProblem;
pub use solvers::{DsmSchedule, DsmTrace, IterationTrace};
pub use stopping::{NoisyData, ScheduleParams};
