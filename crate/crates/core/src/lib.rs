//! Decision-estimation coefficients and equilibrium learning on finite
//! model classes.
//!
//! Modules, bottom up:
//! - [`dist`]: finite distributions and f-divergences.
//! - [`instance`]: multi-agent and hidden-reward instances with exact
//!   evaluation of rewards, suboptimality and gaps.
//! - [`constructions`]: reductions between the two settings and the
//!   counterexample families.
//! - [`game`], [`dec`]: matrix-game solvers and the offset and constrained
//!   coefficients built on them.
//! - [`learners`]: MAExO, the E2D-style learner, first-hit and a uniform
//!   baseline.
//! - [`harness`]: Monte-Carlo risk, sweeps and the named verification suites.

pub mod constructions;
pub mod dec;
pub mod dist;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod harness;
pub mod instance;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod rng;

pub use dist::{DivergenceKind, Dist};
pub use error::{Error, Result};
pub use instance::{Decision, Instance, Kind};
