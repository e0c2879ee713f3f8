//! The landing policy: a 14-mode state machine driven by the target's
//! angular position in the image, its pixel size, the zoom factor, the gimbal
//! state and flight-controller status flags.
//!
//! [`ControllerInput`] has no altitude or range field.
//!
//! Per-mode command laws, gains and timeouts are configuration. Transition
//! thresholds default to 3°, 3°, 3°, 1°, 2°, `Z_min = 2` and a 32% commit size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compose_target_angles, pixel_offset_angles, relative_yaw, wrap_deg, Axis, GimbalState};
use crate::sensing::{CameraRig, Detection, StreamId};
use crate::world::{saturate, CommandSet, GimbalCommand, StreamCommand, ZoomCommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
pub enum Mode {
    StaticSearch,
    SearchDown,
    SearchUp,
    AimCamera,
    AimDrone,
    Approach,
    YawAlign,
    HorizontalAlignment,
    Descent,
    Commit,
    Landed,
    ZoomOut1,
    ZoomOut2,
    Ascent,
}

impl Mode {
    pub const ALL: [Mode; 14] = [
        Mode::StaticSearch,
        Mode::SearchDown,
        Mode::SearchUp,
        Mode::AimCamera,
        Mode::AimDrone,
        Mode::Approach,
        Mode::YawAlign,
        Mode::HorizontalAlignment,
        Mode::Descent,
        Mode::Commit,
        Mode::Landed,
        Mode::ZoomOut1,
        Mode::ZoomOut2,
        Mode::Ascent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::StaticSearch => "static_search",
            Mode::SearchDown => "search_down",
            Mode::SearchUp => "search_up",
            Mode::AimCamera => "aim_camera",
            Mode::AimDrone => "aim_drone",
            Mode::Approach => "approach",
            Mode::YawAlign => "yaw_align",
            Mode::HorizontalAlignment => "horizontal_alignment",
            Mode::Descent => "descent",
            Mode::Commit => "commit",
            Mode::Landed => "landed",
            Mode::ZoomOut1 => "zoom_out_1",
            Mode::ZoomOut2 => "zoom_out_2",
            Mode::Ascent => "ascent",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn is_search(self) -> bool {
        matches!(self, Mode::StaticSearch | Mode::SearchDown | Mode::SearchUp)
    }

    /// Modes that fall back to `ZoomOut1` and may be resumed from it.
    pub fn is_resumable(self) -> bool {
        matches!(
            self,
            Mode::AimCamera | Mode::AimDrone | Mode::Approach | Mode::YawAlign | Mode::HorizontalAlignment
        )
    }

    /// Modes whose zoom policy is `auto`.
    pub fn is_tracking(self) -> bool {
        self.is_resumable() || self == Mode::Descent
    }

    pub fn zoom_mode(self) -> ZoomMode {
        match self {
            m if m.is_tracking() => ZoomMode::Auto,
            Mode::ZoomOut1 | Mode::ZoomOut2 | Mode::Ascent => ZoomMode::Out,
            _ => ZoomMode::None,
        }
    }
}

impl From<Mode> for &'static str {
    fn from(m: Mode) -> Self {
        m.as_str()
    }
}

impl TryFrom<String> for Mode {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        Mode::parse(&s).ok_or_else(|| format!("unknown mode {:?}", s))
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoomMode {
    None,
    Out,
    Auto,
}

/// Current mode, the mode to resume after `ZoomOut1`, and time spent in the mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    mode: Mode,
    resume_target: Option<Mode>,
    elapsed_s: f64,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self::new(Mode::StaticSearch)
    }
}

impl ControllerState {
    /// Fresh state in `mode`. Use [`ControllerState::zoom_out_1`] for `ZoomOut1`.
    pub fn new(mode: Mode) -> Self {
        assert!(mode != Mode::ZoomOut1, "ZoomOut1 needs a resume target");
        Self { mode, resume_target: None, elapsed_s: 0.0 }
    }

    pub fn zoom_out_1(resume: Mode) -> Self {
        assert!(resume.is_resumable(), "{} cannot be resumed", resume);
        Self { mode: Mode::ZoomOut1, resume_target: Some(resume), elapsed_s: 0.0 }
    }

    pub fn with_elapsed(mut self, elapsed_s: f64) -> Self {
        self.elapsed_s = elapsed_s;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn resume_target(&self) -> Option<Mode> {
        self.resume_target
    }

    pub fn elapsed_s(&self) -> f64 {
        self.elapsed_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    // transition thresholds
    pub theta_c_deg: f64,
    pub theta_d_deg: f64,
    pub theta_a_deg: f64,
    pub theta_y_deg: f64,
    pub theta_h_deg: f64,
    pub z_min: f64,
    /// Minimum pixel size for committing.
    pub s_max_percent: f64,
    pub auto_zoom_band_percent: [f64; 2],
    /// Auto zoom re-targets this far inside the band.
    pub auto_zoom_margin_percent: f64,
    /// Fraction of the half-frame the marker may occupy after zooming in.
    pub zoom_in_frame_margin: f64,
    /// Auto zoom backs out once the marker reaches this fraction of the half-frame.
    pub zoom_out_frame_margin: f64,
    /// Gimbal counts as pointing straight down within this tolerance.
    pub gimbal_settle_deg: f64,

    // search
    pub search_yaw_rate_dps: f64,
    pub static_search_tilt_deg: f64,
    pub search_tilt_range_deg: [f64; 2],
    pub search_tilt_rate_dps: f64,
    pub static_search_s: f64,
    pub search_down_s: f64,
    pub search_up_s: f64,

    // gains
    /// Gimbal rate per degree of in-image offset, 1/s.
    pub k_gimbal: f64,
    /// Yaw rate per degree of bearing, 1/s.
    pub k_yaw: f64,
    /// Lateral speed per degree of bearing during approach, m/s/deg.
    pub k_right: f64,
    /// Horizontal speed per degree of nadir offset, m/s/deg.
    pub k_horizontal: f64,
    pub approach_speed_mps: f64,
    /// Approach runs at full speed while cos(theta) exceeds this, slowing linearly below.
    pub approach_full_speed_cos: f64,
    pub descent_speed_mps: f64,
    pub commit_speed_mps: f64,
    pub ascent_speed_mps: f64,

    // recovery
    pub zoom_out_1_timeout_s: f64,
    pub zoom_out_2_timeout_s: f64,
    pub ascent_timeout_s: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            theta_c_deg: 3.0,
            theta_d_deg: 3.0,
            theta_a_deg: 3.0,
            theta_y_deg: 1.0,
            theta_h_deg: 2.0,
            z_min: 2.0,
            s_max_percent: 32.0,
            auto_zoom_band_percent: [20.0, 80.0],
            auto_zoom_margin_percent: 2.0,
            zoom_in_frame_margin: 0.8,
            zoom_out_frame_margin: 0.95,
            gimbal_settle_deg: 0.5,

            search_yaw_rate_dps: 6.0,
            static_search_tilt_deg: -45.0,
            search_tilt_range_deg: [-80.0, -10.0],
            search_tilt_rate_dps: 35.0,
            static_search_s: 2.0,
            search_down_s: 3.0,
            search_up_s: 3.0,

            k_gimbal: 2.0,
            k_yaw: 0.8,
            k_right: 0.05,
            k_horizontal: 0.05,
            approach_speed_mps: 2.0,
            approach_full_speed_cos: 0.5,
            descent_speed_mps: 0.5,
            commit_speed_mps: 0.3,
            ascent_speed_mps: 0.5,

            zoom_out_1_timeout_s: 6.0,
            zoom_out_2_timeout_s: 5.0,
            ascent_timeout_s: 10.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("theta_c_deg", self.theta_c_deg),
            ("theta_d_deg", self.theta_d_deg),
            ("theta_a_deg", self.theta_a_deg),
            ("theta_y_deg", self.theta_y_deg),
            ("theta_h_deg", self.theta_h_deg),
            ("z_min", self.z_min),
            ("s_max_percent", self.s_max_percent),
            ("gimbal_settle_deg", self.gimbal_settle_deg),
            ("search_tilt_rate_dps", self.search_tilt_rate_dps),
            ("static_search_s", self.static_search_s),
            ("search_down_s", self.search_down_s),
            ("search_up_s", self.search_up_s),
            ("k_gimbal", self.k_gimbal),
            ("k_yaw", self.k_yaw),
            ("approach_speed_mps", self.approach_speed_mps),
            ("approach_full_speed_cos", self.approach_full_speed_cos),
            ("descent_speed_mps", self.descent_speed_mps),
            ("commit_speed_mps", self.commit_speed_mps),
            ("ascent_speed_mps", self.ascent_speed_mps),
            ("zoom_out_1_timeout_s", self.zoom_out_1_timeout_s),
            ("zoom_out_2_timeout_s", self.zoom_out_2_timeout_s),
            ("ascent_timeout_s", self.ascent_timeout_s),
            ("zoom_in_frame_margin", self.zoom_in_frame_margin),
            ("zoom_out_frame_margin", self.zoom_out_frame_margin),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(field, format!("{} must be positive", value)));
            }
        }
        for (field, value) in [
            ("search_yaw_rate_dps", self.search_yaw_rate_dps),
            ("k_right", self.k_right),
            ("k_horizontal", self.k_horizontal),
            ("auto_zoom_margin_percent", self.auto_zoom_margin_percent),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::validation(field, format!("{} must be non-negative", value)));
            }
        }
        let [lo, hi] = self.auto_zoom_band_percent;
        if !(lo > 0.0 && lo + 2.0 * self.auto_zoom_margin_percent < hi && hi <= 100.0) {
            return Err(Error::validation("auto_zoom_band_percent", "need 0 < low < high <= 100 with room for the margin"));
        }
        if !(self.zoom_in_frame_margin <= self.zoom_out_frame_margin && self.zoom_out_frame_margin <= 1.0) {
            return Err(Error::validation("zoom_out_frame_margin", "need zoom_in_frame_margin <= zoom_out_frame_margin <= 1"));
        }
        let [down, up] = self.search_tilt_range_deg;
        if !(down < up) {
            return Err(Error::validation("search_tilt_range_deg", "need down < up"));
        }
        Ok(())
    }
}

/// What the controller knows about the marker in the current frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetObservation {
    pub phi_u_deg: f64,
    pub theta_v_deg: f64,
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub psi_deg: f64,
    pub s_p_percent: f64,
    /// Marker center offset from the frame center as a fraction of the frame, in `[-0.5, 0.5]`.
    pub offset_u_frac: f64,
    pub offset_v_frac: f64,
    /// Which concentric marker was decoded; 0 is the outermost.
    pub marker_id: usize,
}

impl TargetObservation {
    /// Converts a detection into angles using the stream's field of view.
    pub fn from_detection(det: &Detection, gimbal: &GimbalState, rig: &CameraRig, stream: StreamId, zoom: f64) -> Result<Self> {
        let camera = rig.camera(stream);
        let fov_u = camera.fov_deg(zoom, Axis::Horizontal)?;
        let fov_v = camera.fov_deg(zoom, Axis::Vertical)?;
        let obs = &det.observation;
        let (phi_u, theta_v) = pixel_offset_angles(obs, fov_u, fov_v);
        let (phi, theta) = compose_target_angles(gimbal, phi_u, theta_v);
        // pad yaw in the image is relative to the camera heading
        let psi = relative_yaw(0.0, det.pad_yaw_in_image_deg + gimbal.pan_deg);
        Ok(Self {
            phi_u_deg: phi_u,
            theta_v_deg: theta_v,
            phi_deg: phi,
            theta_deg: theta,
            psi_deg: psi,
            s_p_percent: det.s_p_percent,
            offset_u_frac: (obs.u - obs.u_c) / (2.0 * obs.u_c),
            offset_v_frac: (obs.v - obs.v_c) / (2.0 * obs.v_c),
            marker_id: det.marker_id,
        })
    }

    /// Angular distance of the marker from the optical axis.
    pub fn pixel_bearing_deg(&self) -> f64 {
        self.phi_u_deg.hypot(self.theta_v_deg)
    }
}

/// Everything the policy may look at. There is no altitude or range here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerInput {
    pub target: Option<TargetObservation>,
    pub gimbal: GimbalState,
    pub zoom: f64,
    pub active_stream: StreamId,
    /// Flight controller reports ground contact.
    pub touchdown: bool,
    /// Flight controller reports the motors stopped.
    pub motor_stopped: bool,
    pub dt: f64,
}

impl ControllerInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("dt", "must be positive"));
        }
        if !(self.zoom.is_finite() && self.zoom >= 1.0) {
            return Err(Error::validation("zoom", "must be >= 1"));
        }
        if let Some(t) = &self.target {
            let all = [t.phi_u_deg, t.theta_v_deg, t.phi_deg, t.theta_deg, t.psi_deg, t.s_p_percent];
            if !all.iter().all(|v| v.is_finite()) {
                return Err(Error::validation("target", "non-finite observation"));
            }
        }
        Ok(())
    }
}

fn gimbal_straight_down(g: &GimbalState, cfg: &ControllerConfig) -> bool {
    (g.tilt_deg + 90.0).abs() <= cfg.gimbal_settle_deg && wrap_deg(g.pan_deg).abs() <= cfg.gimbal_settle_deg
}

fn enter(mode: Mode) -> ControllerState {
    ControllerState::new(mode)
}

/// One step of the policy graph. Timers are read, not advanced.
pub fn transition(state: &ControllerState, input: &ControllerInput, cfg: &ControllerConfig) -> ControllerState {
    use Mode::*;
    let t = state.elapsed_s;
    let stay = *state;
    let lost = || ControllerState::zoom_out_1(state.mode);

    match (state.mode, input.target.as_ref()) {
        (StaticSearch | SearchDown | SearchUp, Some(_)) => enter(AimCamera),
        (StaticSearch, None) if t >= cfg.static_search_s => enter(SearchDown),
        (SearchDown, None) if t >= cfg.search_down_s => enter(SearchUp),
        (SearchUp, None) if t >= cfg.search_up_s => enter(StaticSearch),
        (StaticSearch | SearchDown | SearchUp, None) => stay,

        (AimCamera | AimDrone | Approach | YawAlign | HorizontalAlignment, None) => lost(),
        (AimCamera, Some(obs)) => {
            if obs.phi_u_deg.abs() < cfg.theta_c_deg && obs.theta_v_deg.abs() < cfg.theta_c_deg {
                enter(AimDrone)
            } else {
                stay
            }
        }
        (AimDrone, Some(obs)) => {
            if obs.phi_deg.abs() < cfg.theta_d_deg {
                enter(Approach)
            } else {
                stay
            }
        }
        (Approach, Some(obs)) => {
            if obs.theta_deg <= -(90.0 - cfg.theta_a_deg) {
                enter(YawAlign)
            } else {
                stay
            }
        }
        (YawAlign, Some(obs)) => {
            if obs.psi_deg.abs() < cfg.theta_y_deg {
                enter(HorizontalAlignment)
            } else {
                stay
            }
        }
        (HorizontalAlignment, Some(obs)) => {
            if gimbal_straight_down(&input.gimbal, cfg) && obs.pixel_bearing_deg() < cfg.theta_h_deg {
                enter(Descent)
            } else {
                stay
            }
        }

        (Descent, None) => enter(ZoomOut2),
        (Descent, Some(obs)) => {
            if input.zoom <= cfg.z_min && obs.s_p_percent >= cfg.s_max_percent {
                enter(Commit)
            } else {
                stay
            }
        }

        // the pad is expected to vanish under the drone, so detections are ignored
        (Commit, _) => {
            if input.motor_stopped {
                enter(Landed)
            } else {
                stay
            }
        }
        (Landed, _) => stay,

        (ZoomOut1, Some(_)) => enter(state.resume_target.expect("ZoomOut1 always carries a resume target")),
        (ZoomOut1, None) if t >= cfg.zoom_out_1_timeout_s => enter(StaticSearch),
        (ZoomOut2, Some(_)) | (Ascent, Some(_)) => enter(HorizontalAlignment),
        (ZoomOut2, None) if t >= cfg.zoom_out_2_timeout_s => enter(Ascent),
        (Ascent, None) if t >= cfg.ascent_timeout_s => enter(StaticSearch),
        (ZoomOut1 | ZoomOut2 | Ascent, None) => stay,
    }
}

/// Moves `current` toward `target` at no more than `rate` per second.
fn rate_toward(current: f64, target: f64, rate: f64, dt: f64) -> f64 {
    (wrap_deg(target - current) / dt).clamp(-rate, rate)
}

/// Target bearing rates estimated from the previous frame, for gimbal feed-forward.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BearingRate {
    pub phi_dps: f64,
    pub theta_dps: f64,
}

/// Per-mode velocity, yaw and gimbal commands, before zoom and saturation.
pub fn control_signals(state: &ControllerState, input: &ControllerInput, cfg: &ControllerConfig) -> CommandSet {
    control_signals_with_rate(state, input, cfg, BearingRate::default())
}

fn control_signals_with_rate(state: &ControllerState, input: &ControllerInput, cfg: &ControllerConfig, rate: BearingRate) -> CommandSet {
    use Mode::*;
    let mut cmd = CommandSet::default();
    let target = input.target.as_ref();
    let g = &input.gimbal;
    let track = |obs: &TargetObservation| GimbalCommand::Rate {
        pan_dps: cfg.k_gimbal * obs.phi_u_deg + rate.phi_dps,
        tilt_dps: cfg.k_gimbal * obs.theta_v_deg + rate.theta_dps,
    };
    let nadir = |cmd: &mut CommandSet, obs: &TargetObservation| {
        // with the camera pointing down, image up is drone forward
        cmd.forward_mps = cfg.k_horizontal * (obs.theta_deg + 90.0);
        cmd.right_mps = cfg.k_horizontal * obs.phi_u_deg;
        cmd.yaw_rate_dps = cfg.k_yaw * obs.psi_deg;
    };

    match state.mode {
        StaticSearch => {
            cmd.gimbal = GimbalCommand::Angle { pan_deg: 0.0, tilt_deg: cfg.static_search_tilt_deg };
        }
        SearchDown | SearchUp => {
            let [down, up] = cfg.search_tilt_range_deg;
            let tilt_target = if state.mode == SearchDown { down } else { up };
            cmd.yaw_rate_dps = cfg.search_yaw_rate_dps;
            cmd.gimbal = GimbalCommand::Rate {
                pan_dps: rate_toward(g.pan_deg, 0.0, cfg.search_tilt_rate_dps, input.dt),
                tilt_dps: rate_toward(g.tilt_deg, tilt_target, cfg.search_tilt_rate_dps, input.dt),
            };
        }
        AimCamera => {
            if let Some(obs) = target {
                cmd.gimbal = track(obs);
            }
        }
        AimDrone => {
            if let Some(obs) = target {
                cmd.yaw_rate_dps = cfg.k_yaw * obs.phi_deg;
                cmd.gimbal = track(obs);
            }
        }
        Approach => {
            if let Some(obs) = target {
                let cos_theta = obs.theta_deg.to_radians().cos().max(0.0);
                cmd.forward_mps = cfg.approach_speed_mps * (cos_theta / cfg.approach_full_speed_cos).min(1.0);
                cmd.right_mps = cfg.k_right * obs.phi_deg;
                cmd.yaw_rate_dps = cfg.k_yaw * obs.phi_deg;
                cmd.gimbal = track(obs);
            }
        }
        YawAlign => {
            cmd.gimbal = GimbalCommand::STRAIGHT_DOWN;
            if let Some(obs) = target {
                cmd.yaw_rate_dps = cfg.k_yaw * obs.psi_deg;
            }
        }
        HorizontalAlignment => {
            cmd.gimbal = GimbalCommand::STRAIGHT_DOWN;
            if let Some(obs) = target {
                nadir(&mut cmd, obs);
            }
        }
        Descent => {
            cmd.gimbal = GimbalCommand::STRAIGHT_DOWN;
            if let Some(obs) = target {
                nadir(&mut cmd, obs);
            }
            cmd.up_mps = -cfg.descent_speed_mps;
        }
        Commit => {
            cmd.gimbal = GimbalCommand::STRAIGHT_DOWN;
            cmd.up_mps = -cfg.commit_speed_mps;
            cmd.motor_stop = input.touchdown;
        }
        Landed => {}
        ZoomOut1 | ZoomOut2 => {
            cmd.gimbal = GimbalCommand::HOLD;
        }
        Ascent => {
            cmd.gimbal = GimbalCommand::HOLD;
            cmd.up_mps = cfg.ascent_speed_mps;
        }
    }
    cmd
}

/// Zoom and stream decision for the mode's zoom policy.
pub fn zoom_policy(
    mode: Mode,
    target: Option<&TargetObservation>,
    zoom: f64,
    stream: StreamId,
    cfg: &ControllerConfig,
    rig: &CameraRig,
) -> (ZoomCommand, StreamCommand) {
    const HOLD: (ZoomCommand, StreamCommand) = (ZoomCommand::None, StreamCommand::Keep);
    // the IR camera has no optical zoom
    if stream == StreamId::Ir {
        return HOLD;
    }
    let zoom_cam = &rig.zoom;
    let z_lo = zoom_cam.zoom_lo();
    match mode.zoom_mode() {
        ZoomMode::None => HOLD,
        ZoomMode::Out => match stream {
            StreamId::Zoom if zoom <= z_lo * (1.0 + 1e-9) => (ZoomCommand::Set(1.0), StreamCommand::Wide),
            StreamId::Zoom => (ZoomCommand::Out, StreamCommand::Keep),
            _ => HOLD,
        },
        ZoomMode::Auto => {
            let Some(obs) = target else { return HOLD };
            auto_zoom(obs, zoom, stream, cfg, rig)
        }
    }
}

/// Largest zoom-in factor that keeps the whole marker inside the frame margin.
fn max_zoom_in(obs: &TargetObservation, camera_aspect: f64, cfg: &ControllerConfig) -> f64 {
    frame_scale(obs, camera_aspect, cfg.zoom_in_frame_margin)
}

fn frame_scale(obs: &TargetObservation, camera_aspect: f64, margin: f64) -> f64 {
    let half_side = obs.s_p_percent / 100.0 / 2.0;
    let limit = 0.5 * margin;
    let ku = limit / (obs.offset_u_frac.abs() + half_side);
    let kv = limit / (obs.offset_v_frac.abs() + half_side * camera_aspect);
    ku.min(kv)
}

fn aspect(camera: &crate::geometry::CameraModel) -> f64 {
    camera.stream_width_px as f64 / camera.stream_height_px as f64
}

fn auto_zoom(obs: &TargetObservation, zoom: f64, stream: StreamId, cfg: &ControllerConfig, rig: &CameraRig) -> (ZoomCommand, StreamCommand) {
    const HOLD: (ZoomCommand, StreamCommand) = (ZoomCommand::None, StreamCommand::Keep);
    let [lo, hi] = cfg.auto_zoom_band_percent;
    let m = cfg.auto_zoom_margin_percent;
    let s = obs.s_p_percent;
    let zoom_cam = &rig.zoom;
    let (z_lo, z_hi) = (zoom_cam.zoom_lo(), zoom_cam.zoom_hi());

    let k_frame = max_zoom_in(obs, aspect(zoom_cam), cfg);
    let leaving = frame_scale(obs, aspect(zoom_cam), cfg.zoom_out_frame_margin) < 1.0;
    match stream {
        // An inner marker means the outer one no longer fits: never zoom in on
        // it, back out until the outer marker is decoded again.
        StreamId::Zoom if obs.marker_id > 0 => {
            if zoom > z_lo {
                (ZoomCommand::Auto(z_lo), StreamCommand::Keep)
            } else {
                HOLD
            }
        }
        StreamId::Wide if obs.marker_id > 0 => HOLD,
        // too large for the band, or about to leave the frame
        StreamId::Zoom if s > hi || leaving => {
            let mut wanted = zoom * k_frame.min(1.0);
            if s > hi {
                wanted = wanted.min(zoom * (hi - m) / s);
            }
            if wanted >= z_lo {
                return (ZoomCommand::Auto(wanted), StreamCommand::Keep);
            }
            let r = rig.wide.focal_ratio(1.0) / zoom_cam.focal_ratio(zoom);
            let on_wide = s * r;
            if on_wide >= lo && on_wide <= hi && k_frame >= r {
                (ZoomCommand::Set(1.0), StreamCommand::Wide)
            } else if zoom > z_lo {
                (ZoomCommand::Auto(z_lo), StreamCommand::Keep)
            } else {
                HOLD
            }
        }
        StreamId::Zoom if s < lo => {
            let wanted = (zoom * (lo + m) / s).min(zoom * k_frame).min(z_hi);
            if wanted > zoom {
                (ZoomCommand::Auto(wanted), StreamCommand::Keep)
            } else {
                HOLD
            }
        }
        StreamId::Wide if s < lo => {
            let ratio = zoom_cam.focal_ratio(z_lo) / rig.wide.focal_ratio(1.0);
            let on_zoom = s * ratio;
            // zoom camera at its widest must keep the marker in band and in frame
            let fits = ratio <= max_zoom_in(obs, aspect(&rig.wide), cfg);
            if on_zoom <= hi && fits {
                (ZoomCommand::Set(z_lo), StreamCommand::Zoom)
            } else {
                HOLD
            }
        }
        _ => HOLD,
    }
}

/// The policy with its mode, timers and the previous bearing for feed-forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Controller {
    state: ControllerState,
    cfg: ControllerConfig,
    rig: CameraRig,
    last_bearing: Option<(f64, f64)>,
}

impl Controller {
    pub fn new(cfg: ControllerConfig, rig: CameraRig) -> Self {
        Self { state: ControllerState::default(), cfg, rig, last_bearing: None }
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    /// Forces the policy into `state`, e.g. to test recovery from a given mode.
    pub fn set_state(&mut self, state: ControllerState) {
        self.state = state;
        self.last_bearing = None;
    }

    pub fn mode(&self) -> Mode {
        self.state.mode
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// Transition, then compute commands for the new mode. Output is saturated.
    pub fn tick(&mut self, input: &ControllerInput) -> CommandSet {
        let previous = self.state;
        let mut next = transition(&previous, input, &self.cfg);
        if next.mode == previous.mode {
            next.elapsed_s = previous.elapsed_s + input.dt;
        }

        let rate = match (input.target.as_ref(), self.last_bearing) {
            (Some(obs), Some((phi, theta))) if next.mode == previous.mode => BearingRate {
                phi_dps: wrap_deg(obs.phi_deg - phi) / input.dt,
                theta_dps: (obs.theta_deg - theta) / input.dt,
            },
            _ => BearingRate::default(),
        };
        self.last_bearing = input.target.map(|o| (o.phi_deg, o.theta_deg));
        self.state = next;

        let mut raw = control_signals_with_rate(&next, input, &self.cfg, rate);
        let (zoom, stream) = zoom_policy(next.mode, input.target.as_ref(), input.zoom, input.active_stream, &self.cfg, &self.rig);
        raw.zoom = zoom;
        raw.stream = stream;
        saturate(&raw).unwrap_or_else(|e| {
            log::warn!("dropping non-finite command in {}: {}", next.mode, e);
            CommandSet { motor_stop: raw.motor_stop, ..CommandSet::default() }
        })
    }
}

/// Free-function form of [`Controller::tick`].
pub fn tick(controller: &Controller, input: &ControllerInput) -> (Controller, CommandSet) {
    let mut next = controller.clone();
    let cmd = next.tick(input);
    (next, cmd)
}
