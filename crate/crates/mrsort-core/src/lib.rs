//! Majority-rule sorting with not-necessarily-monotone criteria.
//!
//! This crate implements the model side and the learning side of majority-rule
//! sorting (MR-Sort) when criteria may be of four types: gain (more is better),
//! cost (less is better), single-peaked (an interval of values is approved) and
//! single-valley (everything outside an interval is approved).
//!
//! * [`model`] — model representation and forward assignment of alternatives
//!   to ordered categories.
//! * [`mip`] — construction of the solver-agnostic mixed-integer program that
//!   learns all model parameters, including each criterion's type, from
//!   assignment examples; LP-format export.
//! * [`solve`] — solver backend contract, interpretation of an optimal
//!   solution into a model, and the end-to-end learning pipeline.
//! * [`oracle`] — exhaustive grid search used to certify optimality on tiny
//!   instances.
//! * [`datagen`] — seeded random generation of ground-truth models and
//!   balanced example sets.
//! * [`metrics`] — restoration/generalization/direction-recovery metrics and
//!   experiment aggregation.
//!
//! The crate is `no_std` compatible (with `alloc`); everything that touches
//! the operating system (files, clocks, the bundled MILP solver) lives in the
//! companion `mrsort-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod datagen;
pub mod metrics;
pub mod mip;
pub mod model;
pub mod oracle;
pub mod solve;
mod util;

pub use model::{Alternative, ApprovedSet, CriterionSpec, Direction, LearningSet, MrSortModel};
