//! Exact-arithmetic orbit classification on the unit-pairing quadric
//! {(x, y) : <x, y> = 1} under five matrix group actions, plus mechanical
//! verification suites for the invariant maps, the chart intertwining
//! identity, the swap-parity argument, and the tangent-span comparison.
//!
//! Everything that decides anything (orbit labels, censuses, identities)
//! runs over arbitrary-precision rationals; floating point appears only in
//! the finite-difference invariance residuals.

pub mod error;
mod exec;
pub mod fields;
pub mod groups;
pub mod involution;
pub mod matrix;
pub mod orbits;
pub mod rational;
pub mod sampling;
pub mod seed;
pub mod space;
pub mod suites;

pub use error::{Error, Result};
pub use fields::{FloatPoint, RankTable, SpanReport};
pub use groups::{ElementData, GroupElement, GroupTag};
pub use involution::{DeltaDistribution, IdentityReport};
pub use matrix::RatMatrix;
pub use orbits::{CensusReport, Continuous, GroupCase, OrbitLabel, Stratum};
pub use rational::{Rational, Sign};
pub use seed::SeedStream;
pub use space::{FiberSpec, Point};
pub use suites::{run_suite, run_suite_sized, SuiteKind, SuiteReport};
