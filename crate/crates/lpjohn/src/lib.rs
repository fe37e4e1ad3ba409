//! L_p John ellipsoids of log-concave functions at desk scale (n <= 3).
//!
//! A log-concave function f = e^{-u} with u convex, nonnegative, vanishing at
//! the origin and closed under double conjugation plays the role of a convex
//! body; the Gaussian gamma_Q(x) = exp(-x^t Q x / 2) plays the role of an
//! origin-centered ellipsoid. This crate implements the calculus that makes
//! the analogy computable:
//!
//! - support functions h_f = u* (Fenchel conjugate), polars, GL(n) images,
//!   L_p Asplund sums and scalar multiples, total mass J(f) and its
//!   entropy-adjusted companion ([`functions`]);
//! - surface-measure point clouds and the first variation of the total mass
//!   along a second function, with normalized and p = infinity forms, plus an
//!   independent difference-quotient oracle ([`variation`]);
//! - a damped fixed-point solver for the optimal Gaussian: the unique mass
//!   maximizer under a unit normalized first variation, i.e. the L_p John
//!   ellipsoid E_p f ([`solver`]);
//! - brute-force ground truth (grid search, Monte Carlo mass, dense
//!   conjugates) ([`oracle`]) and an inequality suite that checks every
//!   theorem-level claim numerically over a fixed corpus ([`validation`]).

pub mod error;
pub mod functions;
pub mod numerics;
pub mod oracle;
pub mod solver;
pub mod validation;
pub mod variation;

pub use error::{Error, ErrorKind, Result};
