//! Precision landing on fiducial markers without altitude or range.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] converts gimbal angles and pixel offsets into pan/tilt
//!   bearings and computes field of view from zoom.
//! * [`world`] is a fixed-step kinematic model of the drone, gimbal, zoom and
//!   landing pad.
//! * [`sensing`] projects the pad into the active camera and decides whether
//!   the fiducial would be detected.
//! * [`controller`] is the 14-state landing policy.
//! * [`harness`] wires the three together, parses scenario files, exports
//!   telemetry and aggregates batch statistics.

// `!(a < b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod sensing;
pub mod world;

pub use controller::{
    Controller, ControllerConfig, ControllerInput, ControllerState, Mode, TargetObservation,
};
pub use error::{Error, Result};
pub use geometry::{Axis, CameraModel, GimbalState, PixelObservation, TargetAngles};
pub use harness::{
    BatchSummary, Outcome, RunRecord, Scenario, SimConfig, Summary, TelemetryRow,
};
pub use sensing::{CameraRig, Detection, ObscurationEvent};
pub use world::{
    CommandSet, DroneState, GimbalCommand, PadState, PadType, StreamCommand, WindGust,
    WorldState, ZoomCommand,
};
