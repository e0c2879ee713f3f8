//! Fixed-step kinematics for the drone, gimbal, zoom and landing pad.
//!
//! The drone tracks body-frame velocity targets through a first-order lag,
//! which stands in for the real flight controller. World frame is x east,
//! y north, z up with the pad base plane at z = 0; yaw is a compass heading
//! (clockwise from +y).

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, GimbalState};
use crate::sensing::{CameraRig, StreamId};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Vec3::new(x, y, z)
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Unit forward and right vectors for a compass heading.
pub fn heading_axes(yaw_deg: f64) -> (Vec3, Vec3) {
    let (s, c) = yaw_deg.to_radians().sin_cos();
    (Vec3::new(s, c, 0.0), Vec3::new(c, -s, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadType {
    Visual,
    ActiveIr,
    PassiveIr,
}

impl PadType {
    pub const ALL: [PadType; 3] = [PadType::Visual, PadType::ActiveIr, PadType::PassiveIr];

    pub fn as_str(self) -> &'static str {
        match self {
            PadType::Visual => "visual",
            PadType::ActiveIr => "active_ir",
            PadType::PassiveIr => "passive_ir",
        }
    }

    pub fn is_ir(self) -> bool {
        !matches!(self, PadType::Visual)
    }

    /// Concentric visual markers, single IR marker.
    pub fn default_marker_sizes(self) -> Vec<f64> {
        match self {
            PadType::Visual => vec![0.8, 0.2, 0.05],
            PadType::ActiveIr | PadType::PassiveIr => vec![0.6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub position: Vec3,
    pub yaw_deg: f64,
    pub velocity: Vec3,
    pub motors_on: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadState {
    pub position: Vec3,
    pub yaw_deg: f64,
    pub pad_type: PadType,
    /// Physical side lengths, largest first.
    pub marker_sizes_m: Vec<f64>,
}

impl PadState {
    pub fn new(pad_type: PadType, position: Vec3, yaw_deg: f64) -> Self {
        Self {
            position,
            yaw_deg,
            pad_type,
            marker_sizes_m: pad_type.default_marker_sizes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = &self.marker_sizes_m;
        let expected = if self.pad_type.is_ir() { 1 } else { 3 };
        if sizes.len() != expected {
            return Err(Error::validation(
                "marker_sizes_m",
                format!("{} pad needs {} markers, got {}", self.pad_type.as_str(), expected, sizes.len()),
            ));
        }
        if sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::validation("marker_sizes_m", "sizes must be positive"));
        }
        if sizes.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::validation("marker_sizes_m", "sizes must be strictly decreasing"));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        self.marker_sizes_m[0] / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GimbalCommand {
    Rate { pan_dps: f64, tilt_dps: f64 },
    Angle { pan_deg: f64, tilt_deg: f64 },
}

impl GimbalCommand {
    pub const HOLD: GimbalCommand = GimbalCommand::Rate { pan_dps: 0.0, tilt_dps: 0.0 };
    pub const STRAIGHT_DOWN: GimbalCommand = GimbalCommand::Angle { pan_deg: 0.0, tilt_deg: -90.0 };

    fn is_finite(&self) -> bool {
        match *self {
            GimbalCommand::Rate { pan_dps, tilt_dps } => pan_dps.is_finite() && tilt_dps.is_finite(),
            GimbalCommand::Angle { pan_deg, tilt_deg } => pan_deg.is_finite() && tilt_deg.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoomCommand {
    None,
    Out,
    /// Slew toward the target at the auto-zoom rate limit.
    Auto(f64),
    /// Jump straight to the given factor (used on stream switches).
    Set(f64),
}

impl ZoomCommand {
    pub fn is_none(&self) -> bool {
        matches!(self, ZoomCommand::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamCommand {
    Keep,
    Wide,
    Zoom,
    Ir,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandSet {
    pub forward_mps: f64,
    pub right_mps: f64,
    pub up_mps: f64,
    pub yaw_rate_dps: f64,
    pub gimbal: GimbalCommand,
    pub zoom: ZoomCommand,
    pub stream: StreamCommand,
    pub motor_stop: bool,
}

impl Default for CommandSet {
    fn default() -> Self {
        Self {
            forward_mps: 0.0,
            right_mps: 0.0,
            up_mps: 0.0,
            yaw_rate_dps: 0.0,
            gimbal: GimbalCommand::HOLD,
            zoom: ZoomCommand::None,
            stream: StreamCommand::Keep,
            motor_stop: false,
        }
    }
}

pub const FORWARD_LIMITS: (f64, f64) = (-0.5, 2.0);
// Lateral limit is symmetric.
pub const RIGHT_LIMITS: (f64, f64) = (-1.0, 1.0);
pub const UP_LIMITS: (f64, f64) = (-0.5, 1.0);
pub const YAW_RATE_LIMITS: (f64, f64) = (-10.0, 10.0);

impl CommandSet {
    pub fn within_limits(&self) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(self.forward_mps, FORWARD_LIMITS)
            && inside(self.right_mps, RIGHT_LIMITS)
            && inside(self.up_mps, UP_LIMITS)
            && inside(self.yaw_rate_dps, YAW_RATE_LIMITS)
    }
}

/// Clamps the velocity and yaw-rate targets to the execution limits.
pub fn saturate(cmd: &CommandSet) -> Result<CommandSet> {
    let fields = [
        ("forward_mps", cmd.forward_mps),
        ("right_mps", cmd.right_mps),
        ("up_mps", cmd.up_mps),
        ("yaw_rate_dps", cmd.yaw_rate_dps),
    ];
    for (field, value) in fields {
        if !value.is_finite() {
            return Err(Error::validation(field, format!("non-finite command {}", value)));
        }
    }
    if !cmd.gimbal.is_finite() {
        return Err(Error::validation("gimbal", "non-finite command"));
    }
    Ok(CommandSet {
        forward_mps: cmd.forward_mps.clamp(FORWARD_LIMITS.0, FORWARD_LIMITS.1),
        right_mps: cmd.right_mps.clamp(RIGHT_LIMITS.0, RIGHT_LIMITS.1),
        up_mps: cmd.up_mps.clamp(UP_LIMITS.0, UP_LIMITS.1),
        yaw_rate_dps: cmd.yaw_rate_dps.clamp(YAW_RATE_LIMITS.0, YAW_RATE_LIMITS.1),
        ..*cmd
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindGust {
    pub t_start: f64,
    pub t_end: f64,
    pub velocity_offset: Vec3,
}

impl WindGust {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < self.t_end) {
            return Err(Error::validation("gust", format!("t_start {} >= t_end {}", self.t_start, self.t_end)));
        }
        if !self.velocity_offset.is_finite() {
            return Err(Error::validation("gust", "non-finite velocity offset"));
        }
        Ok(())
    }

    pub fn active_at(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

/// Dynamics parameters that the real airframe would own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub velocity_time_constant_s: f64,
    pub gimbal_rate_max_dps: f64,
    pub tilt_limits_deg: [f64; 2],
    /// Multiplicative auto-zoom slew, factor per second.
    pub zoom_rate_per_s: f64,
    /// Multiplicative zoom-out factor per second (0.5 halves Z every second).
    pub zoom_out_per_s: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            velocity_time_constant_s: 0.5,
            gimbal_rate_max_dps: 60.0,
            tilt_limits_deg: [-120.0, 30.0],
            zoom_rate_per_s: 1.5,
            zoom_out_per_s: 0.5,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.velocity_time_constant_s > 0.0) {
            return Err(Error::validation("velocity_time_constant_s", "must be positive"));
        }
        if !(self.gimbal_rate_max_dps > 0.0) {
            return Err(Error::validation("gimbal_rate_max_dps", "must be positive"));
        }
        let [lo, hi] = self.tilt_limits_deg;
        if !(lo < hi && lo >= -180.0 && hi <= 180.0) {
            return Err(Error::validation("tilt_limits_deg", "need lo < hi within [-180, 180]"));
        }
        if !(self.zoom_rate_per_s > 1.0) {
            return Err(Error::validation("zoom_rate_per_s", "must exceed 1"));
        }
        if !(self.zoom_out_per_s > 0.0 && self.zoom_out_per_s < 1.0) {
            return Err(Error::validation("zoom_out_per_s", "must be in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub t: f64,
    pub drone: DroneState,
    pub gimbal: GimbalState,
    pub pad: PadState,
    pub active_camera: StreamId,
    pub zoom: f64,
    pub gusts: Vec<WindGust>,
    pub rng_seed: u64,
    pub touchdown: bool,
}

pub const MAX_DT: f64 = 0.25;

impl WorldState {
    pub fn active_gust(&self) -> Vec3 {
        self.gusts
            .iter()
            .filter(|g| g.active_at(self.t))
            .fold(Vec3::ZERO, |acc, g| acc + g.velocity_offset)
    }

    /// Advances the world by `dt` under an already saturated command.
    pub fn step(&self, cmd: &CommandSet, dt: f64, dynamics: &DynamicsConfig, rig: &CameraRig) -> Result<WorldState> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::validation("dt", format!("{} not in (0, {}]", dt, MAX_DT)));
        }
        let mut next = self.clone();
        let gust = self.active_gust();

        let drone = &mut next.drone;
        if drone.motors_on {
            let (fwd, right) = heading_axes(drone.yaw_deg);
            let target = fwd * cmd.forward_mps + right * cmd.right_mps + Vec3::new(0.0, 0.0, cmd.up_mps);
            let blend = (dt / dynamics.velocity_time_constant_s).min(1.0);
            drone.velocity = drone.velocity + (target - drone.velocity) * blend;
            drone.yaw_deg = wrap_deg(drone.yaw_deg + cmd.yaw_rate_dps * dt);
            drone.position = drone.position + (drone.velocity + gust) * dt;

            if drone.position.z <= 0.0 && drone.velocity.z + gust.z < 0.0 {
                drone.position.z = 0.0;
                drone.velocity = Vec3::ZERO;
                next.touchdown = true;
            } else if drone.position.z > 0.0 {
                next.touchdown = false;
            }
            if next.touchdown {
                drone.position.z = 0.0;
                drone.velocity = Vec3::ZERO;
            }
            if cmd.motor_stop {
                drone.motors_on = false;
                drone.velocity = Vec3::ZERO;
            }
        }

        next.gimbal = slew_gimbal(&self.gimbal, &cmd.gimbal, dt, dynamics);
        apply_stream_and_zoom(&mut next, cmd, dt, dynamics, rig);
        next.t = self.t + dt;
        Ok(next)
    }

    /// Horizontal distance from the pad center to the camera's ground point.
    pub fn touchdown_error(&self, camera_offset_body: [f64; 2]) -> Result<f64> {
        if !self.touchdown {
            return Err(Error::State("touchdown_error requested before touchdown".into()));
        }
        let cam = camera_ground_point(&self.drone, camera_offset_body);
        Ok((cam - self.pad.position).horizontal_norm())
    }
}

/// Camera position in the world, for a `[forward, right]` body-frame mounting offset.
pub fn camera_ground_point(drone: &DroneState, offset_body: [f64; 2]) -> Vec3 {
    let (fwd, right) = heading_axes(drone.yaw_deg);
    drone.position + fwd * offset_body[0] + right * offset_body[1]
}

fn slew_gimbal(current: &GimbalState, cmd: &GimbalCommand, dt: f64, dynamics: &DynamicsConfig) -> GimbalState {
    let max_step = dynamics.gimbal_rate_max_dps * dt;
    let (dpan, dtilt) = match *cmd {
        GimbalCommand::Rate { pan_dps, tilt_dps } => (pan_dps * dt, tilt_dps * dt),
        GimbalCommand::Angle { pan_deg, tilt_deg } => {
            (wrap_deg(pan_deg - current.pan_deg), tilt_deg - current.tilt_deg)
        }
    };
    let [lo, hi] = dynamics.tilt_limits_deg;
    GimbalState {
        pan_deg: wrap_deg(current.pan_deg + dpan.clamp(-max_step, max_step)),
        tilt_deg: (current.tilt_deg + dtilt.clamp(-max_step, max_step)).clamp(lo, hi),
    }
}

fn apply_stream_and_zoom(next: &mut WorldState, cmd: &CommandSet, dt: f64, dynamics: &DynamicsConfig, rig: &CameraRig) {
    let target_stream = match cmd.stream {
        StreamCommand::Keep => next.active_camera,
        StreamCommand::Wide => StreamId::Wide,
        StreamCommand::Zoom => StreamId::Zoom,
        StreamCommand::Ir => StreamId::Ir,
    };
    if target_stream != next.active_camera {
        next.active_camera = target_stream;
        next.zoom = rig.camera(target_stream).zoom_lo();
    }
    let camera = rig.camera(next.active_camera);
    let (lo, hi) = (camera.zoom_lo(), camera.zoom_hi());
    let z = next.zoom;
    let zoomed = match cmd.zoom {
        ZoomCommand::None => z,
        ZoomCommand::Out => z * dynamics.zoom_out_per_s.powf(dt),
        ZoomCommand::Auto(target) => {
            let max_ratio = dynamics.zoom_rate_per_s.powf(dt);
            target.clamp(z / max_ratio, z * max_ratio)
        }
        ZoomCommand::Set(target) => target,
    };
    next.zoom = if zoomed.is_finite() { zoomed.clamp(lo, hi) } else { z.clamp(lo, hi) };
}
