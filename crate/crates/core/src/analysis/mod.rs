//! Checks derived from the convergence theory: the rate inequality and its
//! regimes, and an audit of the descent inequalities over a trace.

pub mod audit;
pub mod rate;

pub use audit::{audit_trace, AuditParams, AuditReport, Inequality, Violation};
pub use rate::{classify_rate, verify_rate_inequality, RateConfig, RateReport, Regime};
