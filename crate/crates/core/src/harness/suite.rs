//! Built-in scenario sets: the nominal sampling envelope and the obscuration case study.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::Scenario;
use crate::sensing::ObscurationEvent;
use crate::world::PadType;

pub const VISUAL_MAX_DISTANCE_M: f64 = 168.0;
pub const VISUAL_MAX_ALTITUDE_M: f64 = 102.0;
pub const IR_MAX_DISTANCE_M: f64 = 40.0;
pub const IR_ALTITUDE_M: [f64; 2] = [6.0, 40.0];
/// Depression angle from the drone down to the pad for sampled visual starts.
pub const DEPRESSION_DEG: [f64; 2] = [8.0, 78.0];
pub const NOMINAL_MAX_SIM_TIME_S: f64 = 600.0;

/// `n` randomized starts for one pad type. The first run sits at the envelope corner.
pub fn nominal_suite(pad_type: PadType, n: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (pad_type as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..n)
        .map(|i| {
            let (distance, altitude) = match (pad_type.is_ir(), i) {
                (false, 0) => (VISUAL_MAX_DISTANCE_M, VISUAL_MAX_ALTITUDE_M),
                (true, 0) => (IR_MAX_DISTANCE_M, IR_ALTITUDE_M[1]),
                (false, _) => {
                    let d = rng.random_range(5.0..=VISUAL_MAX_DISTANCE_M);
                    let dep = rng.random_range(DEPRESSION_DEG[0]..=DEPRESSION_DEG[1]).to_radians();
                    (d, (d * dep.tan()).min(VISUAL_MAX_ALTITUDE_M))
                }
                (true, _) => {
                    let a = rng.random_range(IR_ALTITUDE_M[0]..=IR_ALTITUDE_M[1]);
                    let d_min = a / DEPRESSION_DEG[1].to_radians().tan();
                    (rng.random_range(d_min..=IR_MAX_DISTANCE_M), a)
                }
            };
            let mut s = Scenario::new(format!("{}_{:03}", pad_type.as_str(), i), pad_type, distance, altitude);
            s.start.bearing_deg = rng.random_range(-180.0..180.0);
            s.start.yaw_deg = rng.random_range(-180.0..180.0);
            s.pad_yaw_deg = rng.random_range(-180.0..180.0);
            s.seed = rng.random();
            s.max_sim_time_s = NOMINAL_MAX_SIM_TIME_S;
            s
        })
        .collect()
}

/// 50 runs for each pad type.
pub fn full_nominal_suite(seed: u64) -> Vec<Scenario> {
    PadType::ALL.iter().flat_map(|p| nominal_suite(*p, 50, seed)).collect()
}

/// Visual pad from 20 m out and 10 m up, obscured once during the approach and
/// again, long enough to force a climb and a fresh search, during the descent.
/// The pad shifts sideways when each obscuration ends.
pub fn case_study() -> Scenario {
    let mut s = Scenario::new("case_study", PadType::Visual, 20.0, 10.0);
    s.start.bearing_deg = 180.0;
    s.start.yaw_deg = -20.0;
    s.seed = 7;
    s.max_sim_time_s = NOMINAL_MAX_SIM_TIME_S;
    s.obscurations = vec![
        ObscurationEvent { t_start: CASE_APPROACH_OBSCURED[0], t_end: CASE_APPROACH_OBSCURED[1], pad_displacement: Some([0.5, 0.0]) },
        ObscurationEvent { t_start: CASE_DESCENT_OBSCURED[0], t_end: CASE_DESCENT_OBSCURED[1], pad_displacement: Some([0.0, 30.0]) },
    ];
    s
}

pub const CASE_APPROACH_OBSCURED: [f64; 2] = [12.0, 14.0];
pub const CASE_DESCENT_OBSCURED: [f64; 2] = [30.0, 50.0];
