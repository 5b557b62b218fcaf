//! Numerical toolkit for harmonically convex functions.
//!
//! A function `f` on an interval that excludes zero is harmonically convex
//! when `f(xy/(tx+(1-t)y)) <= t f(y) + (1-t) f(x)` for all `x, y` and
//! `t ∈ [0, 1]`. This crate samples that property, evaluates the
//! Hermite-Hadamard chain it implies, checks the derivative-based bounds
//! with their closed-form constants, and verifies the special-mean
//! inequalities that follow.
//!
//! Batch work goes through [`exec::Exec`]; with the default `parallel`
//! feature it runs on rayon, otherwise sequentially. Both give the same
//! results in the same order.

pub mod cli;
pub mod convexity;
pub mod error;
pub mod exec;
pub mod expr;
pub mod hh;
pub mod means;
pub mod quad;

pub use error::{Error, Result};
pub use exec::Exec;
pub use expr::{Expr, FunctionSpec};
pub use quad::{Interval, QuadConfig, QuadResult};
