//! Angle and projection math shared by the sensing model and the controller.
//!
//! All angles crossing a public boundary are in degrees. Pan and yaw are
//! positive clockwise when viewed from above, tilt is 0 at the horizon and
//! negative below it, pixel `u` grows to the right and `v` grows downward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle in degrees into the half-open interval `[-180, 180)`.
pub fn wrap_deg(angle: f64) -> f64 {
    if (-180.0..180.0).contains(&angle) {
        return angle;
    }
    let r = (angle + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 180.0 {
        r - 360.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Intrinsics of one gimbal camera. Fixed-focal cameras use a zoom range of `[1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    pub name: String,
    pub sensor_width_mm: f64,
    pub sensor_height_mm: f64,
    pub base_focal_length_mm: f64,
    pub zoom_range: [f64; 2],
    pub stream_width_px: u32,
    pub stream_height_px: u32,
}

impl CameraModel {
    pub fn fixed(name: &str, width_mm: f64, height_mm: f64, focal_mm: f64, stream: (u32, u32)) -> Self {
        Self {
            name: name.to_string(),
            sensor_width_mm: width_mm,
            sensor_height_mm: height_mm,
            base_focal_length_mm: focal_mm,
            zoom_range: [1.0, 1.0],
            stream_width_px: stream.0,
            stream_height_px: stream.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sensor_width_mm", self.sensor_width_mm),
            ("sensor_height_mm", self.sensor_height_mm),
            ("base_focal_length_mm", self.base_focal_length_mm),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(field, format!("{} must be positive", value)));
            }
        }
        if self.stream_width_px == 0 || self.stream_height_px == 0 {
            return Err(Error::validation("stream", "resolution must be positive"));
        }
        let [lo, hi] = self.zoom_range;
        if !(lo.is_finite() && hi.is_finite() && 1.0 <= lo && lo <= hi) {
            return Err(Error::validation(
                "zoom_range",
                format!("need 1 <= lo <= hi, got [{}, {}]", lo, hi),
            ));
        }
        Ok(())
    }

    pub fn zoom_lo(&self) -> f64 {
        self.zoom_range[0]
    }

    pub fn zoom_hi(&self) -> f64 {
        self.zoom_range[1]
    }

    pub fn has_zoom(&self) -> bool {
        self.zoom_range[1] > self.zoom_range[0]
    }

    pub fn check_zoom(&self, zoom: f64) -> Result<()> {
        let [lo, hi] = self.zoom_range;
        if zoom.is_finite() && zoom >= lo && zoom <= hi {
            Ok(())
        } else {
            Err(Error::ZoomOutOfRange { zoom, lo, hi })
        }
    }

    pub fn sensor_dim_mm(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.sensor_width_mm,
            Axis::Vertical => self.sensor_height_mm,
        }
    }

    /// Full field of view, `2·atan(d / (2·Z·F_b))`, in degrees.
    pub fn fov_deg(&self, zoom: f64, axis: Axis) -> Result<f64> {
        self.check_zoom(zoom)?;
        Ok(fov_from_focal(self.sensor_dim_mm(axis), zoom * self.base_focal_length_mm))
    }

    /// Effective focal length over sensor width. Marker size fraction is
    /// `side · focal_ratio / range`.
    pub fn focal_ratio(&self, zoom: f64) -> f64 {
        zoom * self.base_focal_length_mm / self.sensor_width_mm
    }

    pub fn frame_center(&self) -> (f64, f64) {
        (
            self.stream_width_px as f64 / 2.0,
            self.stream_height_px as f64 / 2.0,
        )
    }
}

fn fov_from_focal(sensor_mm: f64, focal_mm: f64) -> f64 {
    2.0 * (sensor_mm / (2.0 * focal_mm)).atan().to_degrees()
}

/// Free function form of [`CameraModel::fov_deg`].
pub fn fov_deg(camera: &CameraModel, zoom: f64, axis: Axis) -> Result<f64> {
    camera.fov_deg(zoom, axis)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GimbalState {
    pub pan_deg: f64,
    pub tilt_deg: f64,
}

impl GimbalState {
    pub fn new(pan_deg: f64, tilt_deg: f64) -> Self {
        Self { pan_deg, tilt_deg }
    }
}

/// Marker center in pixel coordinates plus its size as a fraction of stream width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelObservation {
    pub u: f64,
    pub v: f64,
    pub u_c: f64,
    pub v_c: f64,
    pub s_p_frac: f64,
}

impl PixelObservation {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_c > 0.0 && self.v_c > 0.0) {
            return Err(Error::validation("frame center", "must be positive"));
        }
        if !(0.0..=2.0 * self.u_c).contains(&self.u) || !(0.0..=2.0 * self.v_c).contains(&self.v) {
            return Err(Error::validation(
                "pixel",
                format!("({}, {}) outside frame", self.u, self.v),
            ));
        }
        if !(self.s_p_frac > 0.0 && self.s_p_frac <= 1.0) {
            return Err(Error::validation(
                "s_p_frac",
                format!("{} not in (0, 1]", self.s_p_frac),
            ));
        }
        Ok(())
    }
}

/// Bearing from drone to pad: pan `phi`, tilt `theta`, relative yaw `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetAngles {
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub psi_deg: f64,
}

/// Normalises the pixel offset to `[-0.5, 0.5]` and scales by the field of
/// view. A marker below the frame center gives a negative `theta_v`.
pub fn pixel_offset_angles(obs: &PixelObservation, fov_u: f64, fov_v: f64) -> (f64, f64) {
    let phi_u = (obs.u - obs.u_c) / (2.0 * obs.u_c) * fov_u;
    let theta_v = -(obs.v - obs.v_c) / (2.0 * obs.v_c) * fov_v;
    (phi_u, theta_v)
}

/// Inverse of [`pixel_offset_angles`] for the pixel position.
pub fn angles_to_pixel(phi_u: f64, theta_v: f64, fov_u: f64, fov_v: f64, u_c: f64, v_c: f64) -> (f64, f64) {
    let u = u_c + phi_u / fov_u * 2.0 * u_c;
    let v = v_c - theta_v / fov_v * 2.0 * v_c;
    (u, v)
}

/// Adds the in-image offset to the gimbal's pan and tilt.
pub fn compose_target_angles(gimbal: &GimbalState, phi_u: f64, theta_v: f64) -> (f64, f64) {
    (wrap_deg(gimbal.pan_deg + phi_u), gimbal.tilt_deg + theta_v)
}

/// Pad heading minus drone heading, wrapped.
pub fn relative_yaw(drone_yaw_deg: f64, pad_yaw_deg: f64) -> f64 {
    wrap_deg(pad_yaw_deg - drone_yaw_deg)
}
