//! Preamble schedule design for adaptive mmWave joint communication-radar.
//!
//! The crate builds uniform and sparse (nested, Wichmann) preamble schedules,
//! evaluates the velocity Cramér-Rao bound and the communication distortion
//! they lead to, estimates velocities with MUSIC-type methods, and searches
//! the resulting radar/communication trade-off.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::op_ref)]

pub mod error;
pub mod estimators;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod rng;
pub mod scene;
pub mod waveform;

pub use error::{JcrError, Result};
pub use metrics::{CommMetrics, CrbResult, DopplerModel, RadarMetrics};
pub use scene::{CommLink, EigenvalueMode, RadarScene, SnapshotSet, Target};
pub use waveform::{CoWaveform, FamilyKind, FamilyParams, FrameTiming, PreambleSchedule, SlotGrid};
