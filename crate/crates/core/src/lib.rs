//! Difference-of-convex (DC) programming with the classical DC Algorithm and
//! the Boosted DC Algorithm.
//!
//! For `phi = f1 - f2` with smooth convex `f1`, `f2`, every solver computes
//! the DCA point `y_k` by minimizing the strongly convex surrogate
//! `g(x) - <grad h(x_k), x>`. Boosted variants then exploit that
//! `d_k = y_k - x_k` is a descent direction of `phi` at `y_k` and run an
//! Armijo line search along it, which buys extra decrease per iteration.
//!
//! Modules:
//!
//! * [`problem`], [`builtins`] -- the problem abstraction and builtin problems.
//! * [`inner`] -- the damped Newton subproblem solver.
//! * [`solver`] -- DCA, BDCA (backtracking and quadratic interpolation) and
//!   the Fukushima-Mine baseline.
//! * [`biochem`] -- steady states of mass-action reaction networks as DC programs.
//! * [`analysis`] -- rate classification and auditing of descent inequalities.
//! * [`harness`] -- matched-target DCA vs BDCA comparisons.

pub mod analysis;
pub mod biochem;
pub mod builtins;
pub mod error;
pub mod harness;
pub mod inner;
pub mod problem;
pub mod solver;
pub mod trace;

pub use error::{ConfigError, EvalError, StepError};
pub use problem::{DcProblem, DcSplit, Evaluation, Matrix, Order, Vector};
pub use solver::{solve, SolveResult, SolverConfig, Status, TraceRecord, Variant};
