//! Geometric stand-in for the fiducial detector.
//!
//! The pad is projected into the active stream, and a detection is reported
//! when the marker is fully in frame, large enough to decode, not blocked by a
//! scripted obscuration, and visible to that camera given the pad type.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angles_to_pixel, wrap_deg, Axis, CameraModel, PixelObservation};
use crate::world::{camera_ground_point, heading_axes, PadType, Vec3, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamId {
    Wide,
    Zoom,
    Ir,
}

impl StreamId {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamId::Wide => "wide",
            StreamId::Zoom => "zoom",
            StreamId::Ir => "ir",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraRig {
    pub wide: CameraModel,
    pub zoom: CameraModel,
    pub ir: CameraModel,
    /// `[forward, right]` mounting offset of the camera from the drone center, meters.
    pub camera_offset_body: [f64; 2],
    /// Zoom factor the zoom camera starts a landing with.
    pub initial_zoom: f64,
}

impl Default for CameraRig {
    // Plausible values for a wide/zoom/IR gimbal payload; not measured data.
    fn default() -> Self {
        Self {
            wide: CameraModel::fixed("wide", 6.4, 3.6, 4.8, (1920, 1080)),
            zoom: CameraModel {
                name: "zoom".into(),
                sensor_width_mm: 7.68,
                sensor_height_mm: 4.32,
                base_focal_length_mm: 6.4,
                zoom_range: [2.0, 64.0],
                stream_width_px: 1920,
                stream_height_px: 1080,
            },
            ir: CameraModel::fixed("ir", 7.68, 6.144, 30.0, (640, 512)),
            camera_offset_body: [0.0, 0.0],
            initial_zoom: 4.0,
        }
    }
}

impl CameraRig {
    pub fn camera(&self, id: StreamId) -> &CameraModel {
        match id {
            StreamId::Wide => &self.wide,
            StreamId::Zoom => &self.zoom,
            StreamId::Ir => &self.ir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.wide.validate()?;
        self.zoom.validate()?;
        self.ir.validate()?;
        if self.wide.has_zoom() || self.ir.has_zoom() {
            return Err(Error::validation("rig", "wide and ir cameras must have a fixed focal length"));
        }
        if !self.camera_offset_body.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("camera_offset_body", "must be finite"));
        }
        self.zoom.check_zoom(self.initial_zoom)?;
        Ok(())
    }

    /// The stream a pad type is tracked on at the start of a landing.
    pub fn initial_stream(&self, pad_type: PadType) -> (StreamId, f64) {
        if pad_type.is_ir() {
            (StreamId::Ir, 1.0)
        } else {
            (StreamId::Zoom, self.initial_zoom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingConfig {
    pub s_detect_min_percent: f64,
    pub s_detect_max_percent: f64,
    /// Passive IR pad self-occludes below this altitude above the pad...
    pub passive_occlusion_height_m: f64,
    /// ...when the horizontal offset is under this fraction of the altitude.
    pub passive_occlusion_cone: f64,
    /// Standard deviation of pixel jitter; zero disables noise.
    pub pixel_jitter_px: f64,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            s_detect_min_percent: 1.0,
            s_detect_max_percent: 95.0,
            passive_occlusion_height_m: 5.0,
            passive_occlusion_cone: 0.3,
            pixel_jitter_px: 0.0,
        }
    }
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_detect_min_percent > 0.0 && self.s_detect_min_percent < self.s_detect_max_percent && self.s_detect_max_percent <= 100.0) {
            return Err(Error::validation("s_detect", "need 0 < min < max <= 100"));
        }
        if !(self.passive_occlusion_height_m >= 0.0 && self.passive_occlusion_cone >= 0.0) {
            return Err(Error::validation("passive_occlusion", "must be non-negative"));
        }
        if !(self.pixel_jitter_px >= 0.0 && self.pixel_jitter_px.is_finite()) {
            return Err(Error::validation("pixel_jitter_px", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObscurationEvent {
    pub t_start: f64,
    pub t_end: f64,
    /// Horizontal `[x, y]` shift applied to the pad when the event ends.
    #[serde(default)]
    pub pad_displacement: Option<[f64; 2]>,
}

impl ObscurationEvent {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < self.t_end) {
            return Err(Error::validation(
                "obscuration",
                format!("t_start {} >= t_end {}", self.t_start, self.t_end),
            ));
        }
        if let Some(d) = self.pad_displacement {
            if !d.iter().all(|v| v.is_finite()) {
                return Err(Error::validation("obscuration", "non-finite displacement"));
            }
        }
        Ok(())
    }

    pub fn active_at(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

/// One marker projected into the active stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerProjection {
    pub marker_id: usize,
    pub observation: PixelObservation,
    pub phi_u_deg: f64,
    pub theta_v_deg: f64,
    pub range_m: f64,
    /// Whole marker (center ± half side) lies inside the frame.
    pub fully_inside: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub observation: PixelObservation,
    pub marker_id: usize,
    pub s_p_percent: f64,
    pub pad_yaw_in_image_deg: f64,
    pub timestamp: f64,
}

/// Camera axes in the world: (optical axis, right, up).
fn camera_basis(yaw_deg: f64, pan_deg: f64, tilt_deg: f64) -> (Vec3, Vec3, Vec3) {
    let (sa, ca) = (yaw_deg + pan_deg).to_radians().sin_cos();
    let (se, ce) = tilt_deg.to_radians().sin_cos();
    let forward = Vec3::new(ce * sa, ce * ca, se);
    let right = Vec3::new(ca, -sa, 0.0);
    let up = Vec3::new(-se * sa, -se * ca, ce);
    (forward, right, up)
}

/// In-image angular offsets `(phi_u, theta_v)` of a world point, or `None`
/// when it is behind the image plane.
pub fn image_angles(world: &WorldState, rig: &CameraRig, point: Vec3) -> Option<(f64, f64, f64)> {
    let cam = camera_ground_point(&world.drone, rig.camera_offset_body);
    let d = point - cam;
    let (forward, right, up) = camera_basis(world.drone.yaw_deg, world.gimbal.pan_deg, world.gimbal.tilt_deg);
    let (x, y, z) = (d.dot(right), d.dot(up), d.dot(forward));
    if z <= 0.0 {
        return None;
    }
    let phi_u = x.atan2(z).to_degrees();
    let theta_v = y.atan2(x.hypot(z)).to_degrees();
    Some((phi_u, theta_v, d.norm()))
}

/// Projects every marker whose center falls inside the active frame.
pub fn project_pad(world: &WorldState, rig: &CameraRig) -> Vec<MarkerProjection> {
    let camera = rig.camera(world.active_camera);
    let (Ok(fov_u), Ok(fov_v)) = (
        camera.fov_deg(world.zoom, Axis::Horizontal),
        camera.fov_deg(world.zoom, Axis::Vertical),
    ) else {
        return Vec::new();
    };
    let Some((phi_u, theta_v, range)) = image_angles(world, rig, world.pad.position) else {
        return Vec::new();
    };
    if phi_u.abs() > fov_u / 2.0 || theta_v.abs() > fov_v / 2.0 {
        return Vec::new();
    }
    let (u_c, v_c) = camera.frame_center();
    let (u, v) = angles_to_pixel(phi_u, theta_v, fov_u, fov_v, u_c, v_c);
    let ratio = camera.focal_ratio(world.zoom);
    let width = 2.0 * u_c;
    world
        .pad
        .marker_sizes_m
        .iter()
        .enumerate()
        .map(|(marker_id, side)| {
            let s_p_frac = (side * ratio / range).min(1.0);
            let half = s_p_frac * width / 2.0;
            let fully_inside = u - half >= 0.0 && u + half <= 2.0 * u_c && v - half >= 0.0 && v + half <= 2.0 * v_c;
            MarkerProjection {
                marker_id,
                observation: PixelObservation { u, v, u_c, v_c, s_p_frac },
                phi_u_deg: phi_u,
                theta_v_deg: theta_v,
                range_m: range,
                fully_inside,
            }
        })
        .collect()
}

fn camera_sees_pad(pad_type: PadType, stream: StreamId) -> bool {
    match pad_type {
        PadType::Visual => matches!(stream, StreamId::Wide | StreamId::Zoom),
        // the IR stream is inverted before detection, so the active pad always decodes
        PadType::ActiveIr | PadType::PassiveIr => stream == StreamId::Ir,
    }
}

fn passive_pad_occluded(world: &WorldState, cfg: &SensingConfig) -> bool {
    let rel = world.drone.position - world.pad.position;
    let altitude = rel.z;
    altitude < cfg.passive_occlusion_height_m && rel.horizontal_norm() < cfg.passive_occlusion_cone * altitude
}

/// Returns the largest marker that passes every detectability gate.
pub fn detect(world: &WorldState, rig: &CameraRig, events: &[ObscurationEvent], cfg: &SensingConfig) -> Option<Detection> {
    if events.iter().any(|e| e.active_at(world.t)) {
        return None;
    }
    if !camera_sees_pad(world.pad.pad_type, world.active_camera) {
        return None;
    }
    if world.pad.pad_type == PadType::PassiveIr && passive_pad_occluded(world, cfg) {
        return None;
    }
    let best = project_pad(world, rig).into_iter().find(|m| {
        let pct = m.observation.s_p_frac * 100.0;
        m.fully_inside && pct >= cfg.s_detect_min_percent && pct <= cfg.s_detect_max_percent
    })?;

    let mut observation = best.observation;
    if cfg.pixel_jitter_px > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(world.rng_seed ^ world.t.to_bits().rotate_left(29));
        let noise = Normal::new(0.0, cfg.pixel_jitter_px).expect("validated sigma");
        observation.u = (observation.u + noise.sample(&mut rng)).clamp(0.0, 2.0 * observation.u_c);
        observation.v = (observation.v + noise.sample(&mut rng)).clamp(0.0, 2.0 * observation.v_c);
    }
    let camera_heading = world.drone.yaw_deg + world.gimbal.pan_deg;
    Some(Detection {
        observation,
        marker_id: best.marker_id,
        s_p_percent: observation.s_p_frac * 100.0,
        pad_yaw_in_image_deg: wrap_deg(world.pad.yaw_deg - camera_heading),
        timestamp: world.t,
    })
}

/// True pan/tilt bearing from the camera to `point`, relative to the drone heading.
pub fn true_bearing(world: &WorldState, rig: &CameraRig, point: Vec3) -> (f64, f64) {
    let cam = camera_ground_point(&world.drone, rig.camera_offset_body);
    let d = point - cam;
    let (fwd, right) = heading_axes(world.drone.yaw_deg);
    let phi = d.dot(right).atan2(d.dot(fwd)).to_degrees();
    let theta = d.z.atan2(d.horizontal_norm()).to_degrees();
    (wrap_deg(phi), theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compose_target_angles, pixel_offset_angles, GimbalState};
    use crate::world::{DroneState, PadState};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn world(pad_type: PadType, drone: Vec3, yaw: f64, gimbal: GimbalState, stream: StreamId, zoom: f64) -> WorldState {
        WorldState {
            t: 0.0,
            drone: DroneState { position: drone, yaw_deg: yaw, velocity: Vec3::ZERO, motors_on: true },
            gimbal,
            pad: PadState::new(pad_type, Vec3::ZERO, 0.0),
            active_camera: stream,
            zoom,
            gusts: vec![],
            rng_seed: 7,
            touchdown: false,
        }
    }

    /// Gimbal aimed exactly at the pad from a level drone at the given offset.
    fn aimed(pad_type: PadType, horizontal: f64, altitude: f64, stream: StreamId, zoom: f64) -> WorldState {
        let tilt = -(altitude.atan2(horizontal)).to_degrees();
        world(pad_type, Vec3::new(0.0, -horizontal, altitude), 0.0, GimbalState::new(0.0, tilt), stream, zoom)
    }

    #[test]
    fn centered_pad_matches_pinhole_size() {
        let rig = CameraRig::default();
        let w = aimed(PadType::Visual, 30.0, 40.0, StreamId::Zoom, 4.0);
        let proj = project_pad(&w, &rig);
        assert_eq!(proj.len(), 3);
        let m = proj[0];
        assert_relative_eq!(m.observation.u, 960.0, epsilon = 1e-9);
        assert_relative_eq!(m.observation.v, 540.0, epsilon = 1e-9);
        let fov_u = rig.zoom.fov_deg(4.0, Axis::Horizontal).unwrap().to_radians();
        let expected = 0.8 / (2.0 * 50.0 * (fov_u / 2.0).tan());
        assert_relative_eq!(m.observation.s_p_frac, expected, max_relative = 1e-12);
    }

    #[test]
    fn pad_at_half_fov_lands_on_frame_edge() {
        let rig = CameraRig::default();
        let fov_u = rig.wide.fov_deg(1.0, Axis::Horizontal).unwrap();
        // level camera looking north, pad at bearing +fov/2 on the horizon
        let mut w = world(PadType::Visual, Vec3::ZERO, 0.0, GimbalState::new(0.0, 0.0), StreamId::Wide, 1.0);
        let b = (fov_u / 2.0).to_radians();
        w.pad.position = Vec3::new(100.0 * b.sin(), 100.0 * b.cos(), 0.0);
        let proj = project_pad(&w, &rig);
        assert_relative_eq!(proj[0].observation.u, 1920.0, epsilon = 1e-6);
        assert!(!proj[0].fully_inside);
    }

    #[test]
    fn pad_behind_camera_is_not_projected() {
        let rig = CameraRig::default();
        let mut w = world(PadType::Visual, Vec3::new(0.0, 0.0, 10.0), 0.0, GimbalState::new(0.0, 0.0), StreamId::Wide, 1.0);
        w.pad.position = Vec3::new(0.0, -50.0, 10.0);
        assert!(project_pad(&w, &rig).is_empty());
        assert!(detect(&w, &rig, &[], &SensingConfig::default()).is_none());
    }

    #[test]
    fn visual_pad_on_zoom_camera_detects_largest_marker() {
        let rig = CameraRig::default();
        // S_p near 30%: 0.8 * (2 * 6.4 / 7.68) / range = 0.3 -> range 4.44 m
        let w = aimed(PadType::Visual, 2.5, 3.675, StreamId::Zoom, 2.0);
        let det = detect(&w, &rig, &[], &SensingConfig::default()).unwrap();
        assert_eq!(det.marker_id, 0);
        assert!((det.s_p_percent - 30.0).abs() < 0.5, "{}", det.s_p_percent);
    }

    #[test]
    fn obscuration_blocks_detection() {
        let rig = CameraRig::default();
        let mut w = aimed(PadType::Visual, 20.0, 10.0, StreamId::Zoom, 4.0);
        let ev = [ObscurationEvent { t_start: 0.0, t_end: 1.0, pad_displacement: None }];
        assert!(detect(&w, &rig, &ev, &SensingConfig::default()).is_none());
        w.t = 1.0;
        assert!(detect(&w, &rig, &ev, &SensingConfig::default()).is_some());
    }

    #[test]
    fn pad_type_camera_rules() {
        let rig = CameraRig::default();
        let cfg = SensingConfig::default();
        assert!(detect(&aimed(PadType::Visual, 10.0, 10.0, StreamId::Ir, 1.0), &rig, &[], &cfg).is_none());
        assert!(detect(&aimed(PadType::Visual, 10.0, 10.0, StreamId::Wide, 1.0), &rig, &[], &cfg).is_some());
        assert!(detect(&aimed(PadType::ActiveIr, 10.0, 10.0, StreamId::Zoom, 2.0), &rig, &[], &cfg).is_none());
        assert!(detect(&aimed(PadType::ActiveIr, 10.0, 10.0, StreamId::Ir, 1.0), &rig, &[], &cfg).is_some());
        assert!(detect(&aimed(PadType::PassiveIr, 10.0, 10.0, StreamId::Ir, 1.0), &rig, &[], &cfg).is_some());
    }

    #[test]
    fn passive_pad_occludes_directly_overhead() {
        let rig = CameraRig::default();
        let cfg = SensingConfig::default();
        let w = world(PadType::PassiveIr, Vec3::new(0.0, 0.0, 3.0), 0.0, GimbalState::new(0.0, -90.0), StreamId::Ir, 1.0);
        assert!(!project_pad(&w, &rig).is_empty());
        assert!(detect(&w, &rig, &[], &cfg).is_none());
        // same geometry with the active pad decodes fine
        let mut active = w.clone();
        active.pad.pad_type = PadType::ActiveIr;
        assert!(detect(&active, &rig, &[], &cfg).is_some());
        // outside the cone the passive pad is visible again
        let w = world(PadType::PassiveIr, Vec3::new(0.0, 0.0, 6.0), 0.0, GimbalState::new(0.0, -90.0), StreamId::Ir, 1.0);
        assert!(detect(&w, &rig, &[], &cfg).is_some());
    }

    #[test]
    fn small_marker_below_threshold_is_dropped() {
        let rig = CameraRig::default();
        let w = aimed(PadType::Visual, 150.0, 100.0, StreamId::Zoom, 2.0);
        let proj = project_pad(&w, &rig);
        assert!(proj[0].observation.s_p_frac < 0.01);
        assert!(detect(&w, &rig, &[], &SensingConfig::default()).is_none());
    }

    #[test]
    fn concentric_fallback_before_hard_gate() {
        let rig = CameraRig::default();
        let cfg = SensingConfig::default();
        let mut previous = None;
        let mut switched = false;
        let mut h = 20.0;
        while h > 0.3 {
            let w = world(PadType::Visual, Vec3::new(0.0, 0.0, h), 0.0, GimbalState::new(0.0, -90.0), StreamId::Wide, 1.0);
            let det = detect(&w, &rig, &[], &cfg).expect("some marker is always decodable in this band");
            if previous == Some(0) && det.marker_id == 1 {
                let largest = project_pad(&w, &rig)[0];
                assert!(!largest.fully_inside || largest.observation.s_p_frac * 100.0 > cfg.s_detect_max_percent);
                switched = true;
            }
            previous = Some(det.marker_id);
            h -= 0.01;
        }
        assert!(switched);
    }

    #[test]
    fn jitter_is_deterministic() {
        let rig = CameraRig::default();
        let cfg = SensingConfig { pixel_jitter_px: 2.0, ..SensingConfig::default() };
        let w = aimed(PadType::Visual, 20.0, 10.0, StreamId::Zoom, 4.0);
        let a = detect(&w, &rig, &[], &cfg).unwrap();
        let b = detect(&w, &rig, &[], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.observation.u != 960.0);
    }

    proptest! {
        #[test]
        fn level_gimbal_round_trip(yaw in -180.0f64..180.0, pan in -180.0f64..180.0, az_off in -0.49f64..0.49, el_off in -0.49f64..0.49, range in 5.0f64..200.0, zoom in 2.0f64..64.0) {
            let rig = CameraRig::default();
            let fov_u = rig.zoom.fov_deg(zoom, Axis::Horizontal).unwrap();
            let fov_v = rig.zoom.fov_deg(zoom, Axis::Vertical).unwrap();
            let mut w = world(PadType::Visual, Vec3::new(3.0, -4.0, 100.0), yaw, GimbalState::new(pan, 0.0), StreamId::Zoom, zoom);
            let az = (yaw + pan + az_off * fov_u).to_radians();
            let el = (el_off * fov_v).to_radians();
            w.pad.position = w.drone.position + Vec3::new(range * el.cos() * az.sin(), range * el.cos() * az.cos(), range * el.sin());
            let proj = project_pad(&w, &rig);
            prop_assert!(!proj.is_empty());
            let (phi_u, theta_v) = pixel_offset_angles(&proj[0].observation, fov_u, fov_v);
            let (phi, theta) = compose_target_angles(&w.gimbal, phi_u, theta_v);
            let (true_phi, true_theta) = true_bearing(&w, &rig, w.pad.position);
            prop_assert!(wrap_deg(phi - true_phi).abs() < 1e-6, "{} vs {}", phi, true_phi);
            prop_assert!((theta - true_theta).abs() < 1e-6);
        }

        #[test]
        fn size_monotone_in_distance_and_zoom(h in 5.0f64..80.0, dh in 0.01f64..20.0, zoom in 2.0f64..60.0, dz in 0.01f64..4.0) {
            let rig = CameraRig::default();
            let near = aimed(PadType::Visual, h, h, StreamId::Zoom, zoom);
            let far = aimed(PadType::Visual, h + dh, h + dh, StreamId::Zoom, zoom);
            let more = aimed(PadType::Visual, h, h, StreamId::Zoom, zoom + dz);
            let s = |w: &WorldState| project_pad(w, &rig)[0].observation.s_p_frac;
            prop_assert!(s(&far) < s(&near) || s(&near) == 1.0);
            prop_assert!(s(&more) > s(&near) || s(&near) == 1.0);
        }

        #[test]
        fn obscuration_is_total(t in 0.0f64..100.0, h in 2.0f64..50.0, dur in 0.1f64..20.0) {
            let rig = CameraRig::default();
            let mut w = world(PadType::Visual, Vec3::new(0.0, 0.0, h), 0.0, GimbalState::new(0.0, -90.0), StreamId::Wide, 1.0);
            w.t = t;
            let ev = [ObscurationEvent { t_start: t - dur / 2.0, t_end: t + dur / 2.0, pad_displacement: None }];
            prop_assert!(detect(&w, &rig, &ev, &SensingConfig::default()).is_none());
        }
    }
}
