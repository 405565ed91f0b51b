//! Mass-action reaction networks and their steady-state objective.
//!
//! A network with `m` species and `n` reversible reactions is described by
//! nonnegative integer stoichiometry matrices `F` and `R` and log kinetic
//! parameters `w`. Steady states in log-concentration space `x` are the zeros
//! of `f(x) = [F - R, R - F] exp(w + [F, R]^T x)`, and `|f|^2` has a natural
//! split into two convex functions (see [`objective`]).

pub mod generator;
pub mod io;
pub mod network;
pub mod objective;
pub mod sparse;

pub use generator::{generate_network, GenerateError, GeneratorConfig};
pub use io::{load_network, parse_network, save_network, to_json, ModelError};
pub use network::{NetworkError, ReactionNetwork};
pub use objective::{NetworkObjective, Rates, EXPONENT_GUARD};
pub use sparse::SparseIntMatrix;
