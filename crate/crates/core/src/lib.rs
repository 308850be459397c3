//! Work measurement from motion-capture traces using MOST (Maynard Operation
//! Sequence Technique) element motions.
//!
//! A trace of 13 marker positions per frame is turned into per-frame trunk
//! coordinates and limb angles, classified into static postures by a rule
//! file, cut into motions at posture changes, priced against the MOST
//! general-move data card and compared with the time the motion actually took.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod datacard;
pub mod error;
pub mod events;
pub mod io;
pub mod kinematics;
pub mod report;
pub mod rules;
pub mod segmentation;
pub mod synth;
pub mod timing;
pub mod trace;

mod text;

pub use analysis::{analyze, AnalysisConfig, Analyzer};
pub use error::{Error, Result};
pub use text::normalize_label;
