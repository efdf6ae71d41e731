//! Contextual player motion models for tracking data.
//!
//! Fits commitment-based motion models from player-tracking and play-by-play
//! transaction data: the probability a player would contest a pass to a
//! location in their vicinity, given their position and momentum when the
//! pass is kicked. Fitted models drive team spatial influence and dominance
//! fields, pass feature analysis and pass-type clustering. A synthetic match
//! generator with a known ground-truth commitment rule provides the oracle
//! for end-to-end validation.
//!
//! Pipeline overview:
//!
//! 1. [`ingest`] loads tracking and transaction CSVs, aligns transactions to
//!    whole seconds, extracts contests and mark-to-mark passes, and builds
//!    the labeled (x, y, v, t, C) commitment dataset.
//! 2. [`kde`] fits Gaussian product-kernel densities on the committed and
//!    ignored partitions and combines them into a commitment probability.
//! 3. [`spatial`] sums per-player commitment probabilities into team
//!    influence and dominance fields over the pitch.
//! 4. [`passing`] scores passes (distance, dominance, influence, equity
//!    delta), correlates features against distance-to-goal, and smooths
//!    them by field location.
//! 5. [`gmm`] clusters pass features with a seeded, deterministic EM.

// Validation guards use `!(x > 0.0)` so NaN is rejected along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod gmm;
pub mod grid;
pub mod ingest;
pub mod kde;
pub mod passing;
pub mod spatial;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    derive_kinematics, derive_kinematics_smoothed, relative_location, PlayerState,
    RelativeLocation, TrackingSample, Vec2,
};
pub use grid::{EvalMode, FieldGrid, GridSpec};
pub use ingest::{CommitmentSample, Contest, PassEvent, TrackingSet, TransactionEvent};
pub use kde::{BandwidthRule, CommitmentModel, KdeModel, SliceWindow};
pub use spatial::{dominance, team_influence, Pitch, Snapshot};
