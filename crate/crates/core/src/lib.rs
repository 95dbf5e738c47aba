//! Numerical laboratory for separating a two-part signal `x = [y; z]` from
//! few linear measurements `w = A y + B z`, where `B` is a fixed full-rank
//! block and `A` is drawn at random.
//!
//! The crate is organised around the experiment pipeline:
//!
//! * [`source`] — mixed discrete/continuous sources, concatenated two-part
//!   draws, and the clipping construction that turns a dictionary-sparse
//!   signal into a separable pair.
//! * [`operators`] — measurement pairs `[A B]`: deterministic `B` builders
//!   (identity embedding, orthonormal DCT, scaled Hadamard), random `A`
//!   samplers, mutual coherence, and ball volumes.
//! * [`dimension`] — covering numbers of finite point clouds and
//!   box-counting dimension fits.
//! * [`separator`] — the consistency-search decoder that enumerates sparse
//!   joint supports, plus Hölder-constant estimates and excision ladders for
//!   stability checks.
//! * [`uncertainty`] — small-ball concentration bounds for random rows,
//!   empirical null-space margins, and classical support-size uncertainty
//!   checks for orthonormal pairs.
//! * [`harness`] — config-driven experiment drivers (phase sweeps, declip
//!   runs, concentration grids) used by the `seplab` CLI.
//! * [`report`] — CSV/JSON emission with pinned schemas.
//!
//! Everything randomized is reproducible: master seeds fan out into
//! per-entry / per-trial streams through the mixing function in [`rng`], so
//! results are independent of evaluation order.

pub mod combinatorics;
pub mod dimension;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod rng;
pub mod separator;
pub mod source;
pub mod uncertainty;

pub use error::LabError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LabError>;
