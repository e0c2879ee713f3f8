//! Run-level invariant checks shared by the acceptance suite and the CLI.

use super::run::TickTrace;
use crate::controller::{ControllerInput, Mode};
use crate::sensing::{CameraRig, StreamId};
use crate::world::{ZoomCommand, DynamicsConfig};

/// Tally of auto-zoom band compliance over the ticks where it was achievable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BandTally {
    pub feasible: usize,
    pub in_band: usize,
}

impl BandTally {
    pub fn add(&mut self, other: BandTally) {
        self.feasible += other.feasible;
        self.in_band += other.in_band;
    }

    /// Share of feasible ticks with S_p in band; 1 when nothing was feasible.
    pub fn ratio(&self) -> f64 {
        if self.feasible == 0 {
            1.0
        } else {
            self.in_band as f64 / self.feasible as f64
        }
    }
}

/// Whether some zoom reachable from `input` within one tick, on the current
/// camera or after a wide/zoom switch, puts S_p in `band` with the marker in frame.
pub fn band_reachable(input: &ControllerInput, band: [f64; 2], rig: &CameraRig, dynamics: &DynamicsConfig) -> bool {
    let Some(t) = input.target else { return false };
    if input.active_stream == StreamId::Ir {
        return false;
    }
    let s = t.s_p_percent;
    let cam = rig.camera(input.active_stream);
    let aspect = cam.stream_width_px as f64 / cam.stream_height_px as f64;
    // largest scale factor that keeps the marker inside the frame
    let k_fit = (0.5 / (t.offset_u_frac.abs() + s / 200.0)).min(0.5 / (t.offset_v_frac.abs() + s / 200.0 * aspect));
    let ok = |k: f64| k <= k_fit && (band[0]..=band[1]).contains(&(s * k));

    let step = dynamics.zoom_rate_per_s.powf(input.dt);
    let lo_k = cam.zoom_lo().max(input.zoom / step) / input.zoom;
    let hi_k = cam.zoom_hi().min(input.zoom * step) / input.zoom;
    // best scale on the current camera: the one closest to the band, capped by the frame
    let want = if s < band[0] { band[0] / s } else if s > band[1] { band[1] / s } else { 1.0 };
    if ok(want.clamp(lo_k, hi_k.min(k_fit).max(lo_k))) {
        return true;
    }
    let other = match input.active_stream {
        StreamId::Wide => StreamId::Zoom,
        _ => StreamId::Wide,
    };
    let other_cam = rig.camera(other);
    ok(other_cam.focal_ratio(other_cam.zoom_lo()) / cam.focal_ratio(input.zoom))
}

/// Band compliance over a run's traces, counting tracked ticks only.
pub fn band_tally<'a>(
    ticks: impl IntoIterator<Item = (Mode, &'a TickTrace)>,
    band: [f64; 2],
    rig: &CameraRig,
    dynamics: &DynamicsConfig,
) -> BandTally {
    let mut tally = BandTally::default();
    for (mode, trace) in ticks {
        if !mode.is_tracking() || !band_reachable(&trace.input, band, rig, dynamics) {
            continue;
        }
        tally.feasible += 1;
        let s = trace.input.target.map_or(f64::NAN, |t| t.s_p_percent);
        if (band[0]..=band[1]).contains(&s) {
            tally.in_band += 1;
        }
    }
    tally
}

/// True when a zoom or stream change was commanded while the IR stream was active.
pub fn zoom_on_ir(trace: &TickTrace) -> bool {
    trace.input.active_stream == StreamId::Ir
        && (trace.command.zoom != ZoomCommand::None || trace.command.stream != crate::world::StreamCommand::Keep)
}
