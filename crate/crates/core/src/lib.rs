//! Explicit structure-preserving integrators for linear-quadratic optimal
//! control problems and `N`-player linear-quadratic differential games.
//!
//! The pipeline integrates the linearized Riccati equation `y' = K(t) y`
//! backward from `y(T) = [I; Q_T]` to obtain `y(t0)`, then integrates the
//! Riccati flow and the closed-loop state forward together with splitting or
//! Magnus methods, emitting the feedback controls along the way.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

pub mod error;
pub mod games;
pub mod magnus;
pub mod matfun;
pub mod pipeline;
pub mod pollution;
pub mod problem;
pub mod reference;
pub mod riccati;
pub mod splitting;

pub use error::{Error, Result};
pub use games::{GameProblem, Player};
pub use matfun::Matrix;
pub use pipeline::{Method, Trajectory};
pub use pollution::{build_pollution, PollutionConfig, TimeFunction};
pub use problem::{LQProblem, RiccatiSystem, TimeMatrix};
pub use riccati::{BackwardMethod, RiccatiFlow};
pub use splitting::{ExtendedState, SplittingScheme, StepMap};
