//! Scripted permanent detection loss from every state.

use tagland_core::controller::{Controller, ControllerInput, ControllerState, Mode, TargetObservation};
use tagland_core::geometry::GimbalState;
use tagland_core::sensing::{CameraRig, StreamId};
use tagland_core::ControllerConfig;

const DT: f64 = 0.05;

fn seen() -> TargetObservation {
    TargetObservation {
        phi_u_deg: 10.0,
        theta_v_deg: 10.0,
        phi_deg: 20.0,
        theta_deg: -40.0,
        psi_deg: 20.0,
        s_p_percent: 25.0,
        offset_u_frac: 0.1,
        offset_v_frac: 0.1,
        marker_id: 0,
    }
}

fn input(target: Option<TargetObservation>, touchdown: bool) -> ControllerInput {
    ControllerInput {
        target,
        gimbal: GimbalState::new(0.0, -45.0),
        zoom: 4.0,
        active_stream: StreamId::Zoom,
        touchdown,
        motor_stopped: touchdown,
        dt: DT,
    }
}

fn controller_in(mode: Mode) -> Controller {
    let mut c = Controller::new(ControllerConfig::default(), CameraRig::default());
    c.set_state(ControllerState::new(mode));
    c
}

fn ticks_until(c: &mut Controller, target: Mode, limit_s: f64, touchdown: bool) -> Option<f64> {
    let mut t = 0.0;
    while t <= limit_s {
        c.tick(&input(None, touchdown));
        if c.mode() == target {
            return Some(t);
        }
        t += DT;
    }
    None
}

#[test]
fn loss_from_any_tracking_state_reaches_search() {
    let cfg = ControllerConfig::default();
    let bound = cfg.zoom_out_1_timeout_s.max(cfg.zoom_out_2_timeout_s + cfg.ascent_timeout_s) + 1.0;
    for mode in Mode::ALL {
        if matches!(mode, Mode::Commit | Mode::Landed | Mode::ZoomOut1) || mode.is_search() {
            continue;
        }
        let mut c = controller_in(mode);
        let t = ticks_until(&mut c, Mode::StaticSearch, bound, false);
        assert!(t.is_some(), "{} never fell back to search", mode);
    }
    for resume in Mode::ALL.iter().filter(|m| m.is_resumable()) {
        let mut c = Controller::new(cfg.clone(), CameraRig::default());
        c.set_state(ControllerState::zoom_out_1(*resume));
        assert!(ticks_until(&mut c, Mode::StaticSearch, bound, false).is_some());
    }
}

#[test]
fn search_keeps_cycling_without_detection() {
    let mut c = controller_in(Mode::StaticSearch);
    let mut seen_modes = std::collections::BTreeSet::new();
    for _ in 0..400 {
        c.tick(&input(None, false));
        assert!(c.mode().is_search());
        seen_modes.insert(c.mode());
    }
    assert_eq!(seen_modes.len(), 3);
}

#[test]
fn commit_proceeds_to_landed_despite_loss() {
    let mut c = controller_in(Mode::Commit);
    for _ in 0..20 {
        c.tick(&input(None, false));
        assert_eq!(c.mode(), Mode::Commit);
    }
    let touching = ControllerInput { motor_stopped: false, ..input(None, true) };
    let cmd = c.tick(&touching);
    assert_eq!(c.mode(), Mode::Commit);
    assert!(cmd.motor_stop);
    // the flight controller reports the stop on the next frame
    c.tick(&input(None, true));
    assert_eq!(c.mode(), Mode::Landed);
}

#[test]
fn zoom_out_1_resumes_the_lost_state() {
    for resume in Mode::ALL.iter().filter(|m| m.is_resumable()) {
        let mut c = Controller::new(ControllerConfig::default(), CameraRig::default());
        c.set_state(ControllerState::zoom_out_1(*resume));
        c.tick(&input(Some(seen()), false));
        assert_eq!(c.mode(), *resume);
    }
}
