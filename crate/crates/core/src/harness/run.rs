use serde::{Deserialize, Serialize};

use super::scenario::{Scenario, SimConfig};
use crate::controller::{Controller, ControllerInput, Mode, TargetObservation};
use crate::error::Result;
use crate::geometry::GimbalState;
use crate::sensing::{detect, StreamId};
use crate::world::{CommandSet, DroneState, PadState, PadType, Vec3, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Landed,
    Timeout,
}

/// One control tick: the mode and commands chosen, and the world as observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub t: f64,
    pub state: Mode,
    pub forward_mps: f64,
    pub right_mps: f64,
    pub up_mps: f64,
    pub yaw_rate_dps: f64,
    pub gimbal_pan_deg: f64,
    pub gimbal_tilt_deg: f64,
    pub zoom: f64,
    pub stream: StreamId,
    pub detected: bool,
    pub s_p_percent: Option<f64>,
    pub phi_deg: Option<f64>,
    pub theta_deg: Option<f64>,
    pub psi_deg: Option<f64>,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub yaw_deg: f64,
}

/// Extra per-tick data that is useful for checks but not part of the exported telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickTrace {
    pub input: ControllerInput,
    pub command: CommandSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub seed: u64,
    pub pad_type: PadType,
    pub start_distance_m: f64,
    pub start_altitude_m: f64,
    pub outcome: Outcome,
    pub touchdown_error_m: Option<f64>,
    pub rows: Vec<TelemetryRow>,
}

impl RunRecord {
    pub fn landed(&self) -> bool {
        self.outcome == Outcome::Landed
    }

    /// Mode sequence with consecutive duplicates removed.
    pub fn mode_sequence(&self) -> Vec<Mode> {
        let mut seq: Vec<Mode> = Vec::new();
        for row in &self.rows {
            if seq.last() != Some(&row.state) {
                seq.push(row.state);
            }
        }
        seq
    }
}

/// Initial world for a scenario: pad at the origin, drone at the start pose.
pub fn initial_world(scenario: &Scenario, cfg: &SimConfig) -> WorldState {
    let b = scenario.start.bearing_deg.to_radians();
    let position = Vec3::new(
        scenario.start.distance_m * b.sin(),
        scenario.start.distance_m * b.cos(),
        scenario.start.altitude_m,
    );
    let (stream, zoom) = cfg.rig.initial_stream(scenario.pad_type);
    WorldState {
        t: 0.0,
        drone: DroneState {
            position,
            yaw_deg: crate::geometry::wrap_deg(scenario.start.yaw_deg),
            velocity: Vec3::ZERO,
            motors_on: true,
        },
        gimbal: GimbalState::new(0.0, cfg.controller.static_search_tilt_deg),
        pad: PadState::new(scenario.pad_type, Vec3::ZERO, scenario.pad_yaw_deg),
        active_camera: stream,
        zoom,
        gusts: scenario.gusts.clone(),
        rng_seed: scenario.seed,
        touchdown: false,
    }
}

/// Runs the closed loop detect → controller → world until landed or out of time.
pub fn run_scenario(scenario: &Scenario, cfg: &SimConfig) -> Result<RunRecord> {
    run_scenario_traced(scenario, cfg, |_, _| {})
}

/// Like [`run_scenario`], calling `observe` with every row and its controller input/command.
pub fn run_scenario_traced<F>(scenario: &Scenario, cfg: &SimConfig, mut observe: F) -> Result<RunRecord>
where
    F: FnMut(&TelemetryRow, &TickTrace),
{
    scenario.validate()?;
    cfg.validate()?;
    let dt = cfg.dt_s;
    let mut world = initial_world(scenario, cfg);
    world.pad.validate()?;
    let mut controller = Controller::new(cfg.controller.clone(), cfg.rig.clone());
    let mut displaced = vec![false; scenario.obscurations.len()];
    let mut rows = Vec::new();
    let mut outcome = Outcome::Timeout;
    let mut touchdown_error_m = None;
    let max_ticks = (scenario.max_sim_time_s / dt).ceil() as u64;

    for tick in 0..max_ticks {
        for (ev, done) in scenario.obscurations.iter().zip(displaced.iter_mut()) {
            if !*done && world.t >= ev.t_end {
                *done = true;
                if let Some([dx, dy]) = ev.pad_displacement {
                    world.pad.position = world.pad.position + Vec3::new(dx, dy, 0.0);
                }
            }
        }

        let detection = detect(&world, &cfg.rig, &scenario.obscurations, &cfg.sensing);
        let target = match &detection {
            Some(det) => Some(TargetObservation::from_detection(det, &world.gimbal, &cfg.rig, world.active_camera, world.zoom)?),
            None => None,
        };
        let input = ControllerInput {
            target,
            gimbal: world.gimbal,
            zoom: world.zoom,
            active_stream: world.active_camera,
            touchdown: world.touchdown,
            motor_stopped: !world.drone.motors_on,
            dt,
        };
        input.validate()?;
        let cmd = controller.tick(&input);

        let row = TelemetryRow {
            t: tick as f64 * dt,
            state: controller.mode(),
            forward_mps: cmd.forward_mps,
            right_mps: cmd.right_mps,
            up_mps: cmd.up_mps,
            yaw_rate_dps: cmd.yaw_rate_dps,
            gimbal_pan_deg: world.gimbal.pan_deg,
            gimbal_tilt_deg: world.gimbal.tilt_deg,
            zoom: world.zoom,
            stream: world.active_camera,
            detected: target.is_some(),
            s_p_percent: target.map(|t| t.s_p_percent),
            phi_deg: target.map(|t| t.phi_deg),
            theta_deg: target.map(|t| t.theta_deg),
            psi_deg: target.map(|t| t.psi_deg),
            x_m: world.drone.position.x,
            y_m: world.drone.position.y,
            z_m: world.drone.position.z,
            yaw_deg: world.drone.yaw_deg,
        };
        observe(&row, &TickTrace { input, command: cmd });
        rows.push(row);

        if controller.mode() == Mode::Landed {
            outcome = Outcome::Landed;
            touchdown_error_m = Some(world.touchdown_error(cfg.rig.camera_offset_body)?);
            break;
        }
        world = world.step(&cmd, dt, &cfg.dynamics, &cfg.rig)?;
    }

    Ok(RunRecord {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        pad_type: scenario.pad_type,
        start_distance_m: scenario.start.distance_m,
        start_altitude_m: scenario.start.altitude_m,
        outcome,
        touchdown_error_m,
        rows,
    })
}
