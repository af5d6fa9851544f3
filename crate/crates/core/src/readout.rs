//! Mechanical readout of one spin: drive the oscillator resonantly with the
//! spin's force, integrate a window of cycles, extrapolate the amplitude
//! change to the detection time and classify it.

use crate::oscillator::{
    analytic_envelope, classify_amplitude, envelope_slope, integrate_strided, natural_frequency, DrivePhase,
    DriveWaveform, OscillatorError, OscillatorParams, OscillatorState, Readout, Trajectory,
};
use crate::register::{PortReader, RegisterError};
use crate::report::Report;

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutConfig {
    pub osc: OscillatorParams,
    /// Force magnitude of the read spin, N.
    pub force: f64,
    pub phase: DrivePhase,
    pub a0: f64,
    pub threshold: f64,
    /// Detection time the amplitude is extrapolated to, s.
    pub t_detect: f64,
    /// Cycles actually integrated. The detection time is reached by linear
    /// extrapolation when it is longer than this window.
    pub window_cycles: f64,
    pub steps_per_cycle: f64,
    /// Record every n-th integrator state.
    pub record_stride: u64,
}

#[derive(Debug, Clone)]
pub struct ReadoutOutcome {
    pub analytic_slope: f64,
    pub numeric_slope: f64,
    pub analytic_amplitude: f64,
    pub extrapolated_amplitude: f64,
    pub integrated_time: f64,
    pub readout: Readout,
    pub trajectory: Trajectory,
}

impl ReadoutOutcome {
    pub fn slope_relative_error(&self) -> f64 {
        ((self.numeric_slope - self.analytic_slope) / self.analytic_slope).abs()
    }

    pub fn to_report(&self, title: &str, cfg: &ReadoutConfig) -> Report {
        let mut r = Report::new(title);
        r.push("spin_force", cfg.force, "N");
        r.push("spring_k", cfg.osc.spring_k, "N/m");
        r.push("nu_z", natural_frequency(&cfg.osc), "Hz");
        r.push("static_deflection", cfg.force / cfg.osc.spring_k, "m");
        r.push("amplitude_A0", cfg.a0, "m");
        r.push("slope_analytic", self.analytic_slope, "m/s");
        r.push("slope_numeric", self.numeric_slope, "m/s");
        r.push("slope_relative_error", self.slope_relative_error(), "");
        r.push("integrated_time", self.integrated_time, "s");
        r.push("t_detect", cfg.t_detect, "s");
        r.push("delta_A_analytic", self.analytic_amplitude - cfg.a0, "m");
        r.push("delta_A_numeric", self.extrapolated_amplitude - cfg.a0, "m");
        r.push(
            "readout_code",
            match self.readout {
                Readout::SpinUp => 1.0,
                Readout::SpinDown => -1.0,
                Readout::Indeterminate => 0.0,
            },
            "",
        );
        r
    }
}

/// Integrates `min(window, t_detect)` and extrapolates linearly.
pub fn simulate_readout(cfg: &ReadoutConfig, spin_sign: f64) -> Result<ReadoutOutcome, OscillatorError> {
    let nu = natural_frequency(&cfg.osc);
    let drive = DriveWaveform::square(spin_sign * cfg.force, nu, cfg.phase);
    let analytic_slope = envelope_slope(&cfg.osc, &drive)?;
    let analytic_amplitude = analytic_envelope(&cfg.osc, cfg.a0, &drive, cfg.t_detect)?;

    let window = (cfg.window_cycles / nu).min(cfg.t_detect);
    let dt = 1.0 / (cfg.steps_per_cycle * nu);
    let trajectory = integrate_strided(
        &cfg.osc,
        OscillatorState::at_turning_point(cfg.a0),
        &drive,
        window,
        dt,
        cfg.record_stride,
    )?;
    let last = trajectory.last().expect("integrate returns at least one state");
    let integrated_time = last.time;
    let numeric_slope = (cfg.osc.amplitude(last) - cfg.a0) / integrated_time;
    let extrapolated_amplitude = (cfg.a0 + numeric_slope * cfg.t_detect).max(0.0);
    Ok(ReadoutOutcome {
        analytic_slope,
        numeric_slope,
        analytic_amplitude,
        extrapolated_amplitude,
        integrated_time,
        readout: classify_amplitude(extrapolated_amplitude, cfg.a0, cfg.threshold),
        trajectory,
    })
}

/// Port reader backed by the oscillator simulation.
pub struct MechanicalReader {
    pub config: ReadoutConfig,
}

impl PortReader for MechanicalReader {
    fn read(&mut self, spin_down: bool) -> Result<bool, RegisterError> {
        let sign = if spin_down { -1.0 } else { 1.0 };
        let mut cfg = self.config.clone();
        // trajectory is discarded, keep only the final state
        cfg.record_stride = u64::MAX;
        let outcome = simulate_readout(&cfg, sign).map_err(|e| RegisterError::Readout(e.to_string()))?;
        match outcome.readout {
            Readout::SpinUp => Ok(false),
            Readout::SpinDown => Ok(true),
            Readout::Indeterminate => Err(RegisterError::Readout("indeterminate amplitude change".into())),
        }
    }
}
