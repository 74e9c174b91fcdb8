//! Point processes on tree-shaped linear networks.
//!
//! `linnetcox` simulates, fits and checks inhomogeneous Poisson processes and
//! thinned Cox processes living on a linear network `L` (a finite union of
//! line segments meeting at their endpoints). The Cox process is obtained by
//! thinning a Poisson process `Y` with retention probabilities
//!
//! ```text
//! Π(u) = exp(-σ²/2 · Σ_j Z_j(u)²),   j = 1..k
//! ```
//!
//! where `Z_1..Z_k` are independent unit-variance Gaussian fields with
//! exponential correlation `exp(-β d_L(u, v))` in the shortest-path metric.
//!
//! The crate is organised by capability:
//!
//! - [`network`]: geometry of the network (distances, erosion, lattices,
//!   sphere counts, tree simplification) and point patterns.
//! - [`sim`]: Poisson, Gaussian field, Cox and Matérn type-I generators.
//! - [`summaries`]: intensity estimators, theoretical `g₀`/`K`, the
//!   geometrically corrected `K̂`/`ĝ` and the empirical `F̂`/`Ĝ`/`Ĵ`.
//! - [`estimation`]: minimum contrast, two-step fitting, second-order
//!   composite likelihood and the simulation-study harness.
//! - [`envelopes`]: global rank envelope tests.
//! - [`io`], [`templates`], [`cli`]: file formats, synthetic networks and the
//!   command-line surface.
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod envelopes;
pub mod error;
pub mod estimation;
pub mod io;
pub mod network;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod summaries;
pub mod templates;

pub use error::{Error, Result};
pub use network::{Branch, LinearNetwork, NetworkPoint, PointPattern, SubNetwork};
pub use sim::{CoxModel, IntensityModel};
