//! The z-axis harmonic oscillator of a trapped particle under
//! spin-dependent drive forces.
//!
//! Drive waveforms share one timing convention: they are synchronized with
//! the velocity of a reference oscillation released from its positive
//! turning point at `t = 0`, i.e. `v_ref(t) ∝ -sin(2π ν t)`. A phase-0
//! square drive pushes along the reference velocity for the whole cycle and
//! does `4 f A` of work per cycle; phase π takes the same energy out.
//!
//! The integrator is a Strang splitting: a half-step of the exact harmonic
//! flow, a kick from the drive sampled at the step midpoint (with implicit
//! midpoint damping), and another exact half-step. It is second order,
//! symplectic when undamped, and exact for the free oscillator.

use std::f64::consts::PI;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscillatorError {
    #[error("time step {dt:e} s exceeds 1/(50 nu) = {limit:e} s")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("oscillator state became non-finite at t = {time:e} s")]
    NonFinite { time: f64 },
    #[error("drive frequency {drive:e} Hz is off resonance with {natural:e} Hz")]
    OffResonance { drive: f64, natural: f64 },
    #[error("analytic envelope requires an undamped oscillator")]
    Damped,
    #[error("invalid oscillator input: {0}")]
    InvalidInput(String),
}

/// Relative tolerance for treating a drive as resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;
/// Minimum number of integration steps per oscillation period.
pub const MIN_STEPS_PER_CYCLE: f64 = 50.0;
/// Default number of integration steps per oscillation period.
pub const DEFAULT_STEPS_PER_CYCLE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub spring_k: f64,
    /// Quality factor; `None` means undamped.
    pub quality: Option<f64>,
}

impl OscillatorParams {
    pub fn undamped(mass: f64, spring_k: f64) -> Self {
        OscillatorParams {
            mass,
            spring_k,
            quality: None,
        }
    }

    pub fn validate(&self) -> Result<(), OscillatorError> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(OscillatorError::InvalidInput("mass must be positive".into()));
        }
        if !(self.spring_k > 0.0 && self.spring_k.is_finite()) {
            return Err(OscillatorError::InvalidInput("spring constant must be positive".into()));
        }
        if let Some(q) = self.quality {
            if q.is_nan() || q <= 0.0 {
                return Err(OscillatorError::InvalidInput("quality factor must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn angular_frequency(&self) -> f64 {
        (self.spring_k / self.mass).sqrt()
    }

    /// Velocity damping rate 2π ν / Q, zero when undamped.
    pub fn damping_rate(&self) -> f64 {
        match self.quality {
            Some(q) if q.is_finite() => self.angular_frequency() / q,
            _ => 0.0,
        }
    }

    pub fn energy(&self, state: &OscillatorState) -> f64 {
        0.5 * self.spring_k * state.z * state.z + 0.5 * self.mass * state.vz * state.vz
    }

    /// Amplitude from instantaneous energy, sqrt(2E/k).
    pub fn amplitude(&self, state: &OscillatorState) -> f64 {
        (2.0 * self.energy(state) / self.spring_k).sqrt()
    }

    /// Default step, 1/(200 ν).
    pub fn default_dt(&self) -> f64 {
        1.0 / (DEFAULT_STEPS_PER_CYCLE * natural_frequency(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorState {
    pub time: f64,
    pub z: f64,
    pub vz: f64,
}

impl OscillatorState {
    /// At rest on the positive turning point, the reference phase of every
    /// drive waveform.
    pub fn at_turning_point(amplitude: f64) -> Self {
        OscillatorState {
            time: 0.0,
            z: amplitude,
            vz: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Square,
    Sine,
    Static,
}

/// Sign relation between the drive and the reference velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrivePhase {
    /// Force along the velocity: energy in.
    Zero,
    /// Force against the velocity: energy out.
    Pi,
}

impl DrivePhase {
    pub fn sign(self) -> f64 {
        match self {
            DrivePhase::Zero => 1.0,
            DrivePhase::Pi => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveWaveform {
    pub kind: WaveKind,
    /// Plateau (square), peak (sine) or constant (static) force, N. The
    /// sign carries the spin orientation.
    pub force_amplitude: f64,
    pub frequency: f64,
    pub phase: DrivePhase,
    /// Frequency of the slow ±1 sign modulation, if any. The first half of
    /// each modulation period is +1.
    pub inversion_frequency: Option<f64>,
}

impl DriveWaveform {
    pub fn square(force: f64, frequency: f64, phase: DrivePhase) -> Self {
        DriveWaveform {
            kind: WaveKind::Square,
            force_amplitude: force,
            frequency,
            phase,
            inversion_frequency: None,
        }
    }

    pub fn sine(force: f64, frequency: f64, phase: DrivePhase) -> Self {
        DriveWaveform {
            kind: WaveKind::Sine,
            ..Self::square(force, frequency, phase)
        }
    }

    pub fn constant(force: f64) -> Self {
        DriveWaveform {
            kind: WaveKind::Static,
            force_amplitude: force,
            frequency: 0.0,
            phase: DrivePhase::Zero,
            inversion_frequency: None,
        }
    }

    pub fn with_inversion(mut self, frequency: f64) -> Self {
        self.inversion_frequency = Some(frequency);
        self
    }

    /// Unit-amplitude carrier shape at time `t`.
    pub fn carrier(&self, t: f64) -> f64 {
        match self.kind {
            WaveKind::Static => 1.0,
            WaveKind::Square => {
                let frac = fract(self.frequency * t);
                self.phase.sign() * if frac < 0.5 { -1.0 } else { 1.0 }
            }
            WaveKind::Sine => -self.phase.sign() * (2.0 * PI * fract(self.frequency * t)).sin(),
        }
    }
}

/// Slow ±1 inversion: +1 on the first half of each period.
pub fn inversion_sign(frequency: f64, t: f64) -> f64 {
    if fract(frequency * t) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

fn fract(x: f64) -> f64 {
    x - x.floor()
}

/// Anything that prescribes a force as a function of time.
pub trait ForceSource {
    fn force(&self, t: f64) -> f64;
}

impl ForceSource for DriveWaveform {
    fn force(&self, t: f64) -> f64 {
        let envelope = self.inversion_frequency.map_or(1.0, |nu| inversion_sign(nu, t));
        self.force_amplitude * self.carrier(t) * envelope
    }
}

impl ForceSource for [DriveWaveform] {
    fn force(&self, t: f64) -> f64 {
        self.iter().map(|d| d.force(t)).sum()
    }
}

impl ForceSource for Vec<DriveWaveform> {
    fn force(&self, t: f64) -> f64 {
        self.as_slice().force(t)
    }
}

/// No force at all.
pub struct Undriven;

impl ForceSource for Undriven {
    fn force(&self, _t: f64) -> f64 {
        0.0
    }
}

/// (1/2π) sqrt(k/M).
pub fn natural_frequency(params: &OscillatorParams) -> f64 {
    params.angular_frequency() / (2.0 * PI)
}

/// Fixed-step propagator. Step `i` ends at `t0 + (i + 1) dt`.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: OscillatorParams,
    dt: f64,
    omega: f64,
    cos_half: f64,
    sin_half: f64,
    damping: f64,
    t0: f64,
    steps: u64,
    state: OscillatorState,
}

impl Propagator {
    pub fn new(
        params: OscillatorParams,
        state0: OscillatorState,
        dt: f64,
    ) -> Result<Self, OscillatorError> {
        params.validate()?;
        if !(state0.time.is_finite() && state0.z.is_finite() && state0.vz.is_finite()) {
            return Err(OscillatorError::InvalidInput("initial state must be finite".into()));
        }
        let limit = 1.0 / (MIN_STEPS_PER_CYCLE * natural_frequency(&params));
        if dt.is_nan() || dt <= 0.0 || dt > limit {
            return Err(OscillatorError::StepTooLarge { dt, limit });
        }
        let omega = params.angular_frequency();
        let half = 0.5 * omega * dt;
        Ok(Propagator {
            params,
            dt,
            omega,
            cos_half: half.cos(),
            sin_half: half.sin(),
            damping: params.damping_rate(),
            t0: state0.time,
            steps: 0,
            state: state0,
        })
    }

    pub fn state(&self) -> OscillatorState {
        self.state
    }

    fn rotate_half(&mut self) {
        let (c, s, w) = (self.cos_half, self.sin_half, self.omega);
        let z = self.state.z;
        let v = self.state.vz;
        self.state.z = z * c + v / w * s;
        self.state.vz = v * c - z * w * s;
    }

    pub fn step<F: ForceSource + ?Sized>(&mut self, drive: &F) -> Result<OscillatorState, OscillatorError> {
        let t_mid = self.t0 + (self.steps as f64 + 0.5) * self.dt;
        self.rotate_half();
        let f = drive.force(t_mid);
        let g = 0.5 * self.damping * self.dt;
        self.state.vz = (self.state.vz * (1.0 - g) + self.dt * f / self.params.mass) / (1.0 + g);
        self.rotate_half();
        self.steps += 1;
        self.state.time = self.t0 + self.steps as f64 * self.dt;
        if !(self.state.z.is_finite() && self.state.vz.is_finite()) {
            return Err(OscillatorError::NonFinite {
                time: self.state.time,
            });
        }
        Ok(self.state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: OscillatorParams,
    pub states: Vec<OscillatorState>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&OscillatorState> {
        self.states.last()
    }

    pub fn final_amplitude(&self) -> Option<f64> {
        self.last().map(|s| self.params.amplitude(s))
    }

    /// Delimited export: `time_s,z_m,vz_m_per_s,energy_J`.
    pub fn write_delimited<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_s,z_m,vz_m_per_s,energy_J")?;
        for s in &self.states {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e}",
                s.time,
                s.z,
                s.vz,
                self.params.energy(s)
            )?;
        }
        Ok(())
    }
}

fn step_count(t_end: f64, dt: f64) -> u64 {
    // guard against t_end/dt landing a rounding error above an integer
    (t_end / dt - 1e-9).ceil().max(1.0) as u64
}

/// Integrates to `t_end` (relative to `state0.time`) and records every state.
pub fn integrate<F: ForceSource + ?Sized>(
    params: &OscillatorParams,
    state0: OscillatorState,
    drive: &F,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, OscillatorError> {
    integrate_strided(params, state0, drive, t_end, dt, 1)
}

/// As [`integrate`], keeping every `stride`-th state plus the final one.
pub fn integrate_strided<F: ForceSource + ?Sized>(
    params: &OscillatorParams,
    state0: OscillatorState,
    drive: &F,
    t_end: f64,
    dt: f64,
    stride: u64,
) -> Result<Trajectory, OscillatorError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(OscillatorError::InvalidInput("t_end must be positive".into()));
    }
    let stride = stride.max(1);
    let mut prop = Propagator::new(*params, state0, dt)?;
    let n = step_count(t_end, dt);
    let mut states = Vec::with_capacity((n / stride + 2).min(1 << 24) as usize);
    states.push(state0);
    for i in 1..=n {
        let s = prop.step(drive)?;
        if i % stride == 0 || i == n {
            states.push(s);
        }
    }
    Ok(Trajectory {
        params: *params,
        states,
    })
}

/// Amplitude growth rate of a resonant drive, m/s, for an undamped
/// oscillator: 4 f ν / k for a square drive, f / (2 M ω) = π f ν / k for a
/// sine drive. Sign follows force sign and phase.
pub fn envelope_slope(params: &OscillatorParams, drive: &DriveWaveform) -> Result<f64, OscillatorError> {
    params.validate()?;
    if params.damping_rate() != 0.0 {
        return Err(OscillatorError::Damped);
    }
    let natural = natural_frequency(params);
    let mismatch = (drive.frequency - natural).abs() / natural;
    if drive.kind == WaveKind::Static || mismatch > RESONANCE_TOLERANCE {
        return Err(OscillatorError::OffResonance {
            drive: drive.frequency,
            natural,
        });
    }
    let f = drive.force_amplitude * drive.phase.sign();
    let nu = drive.frequency;
    Ok(match drive.kind {
        WaveKind::Square => 4.0 * f * nu / params.spring_k,
        WaveKind::Sine => f / (2.0 * params.mass * 2.0 * PI * nu),
        WaveKind::Static => unreachable!(),
    })
}

/// ∫0^t p(s) ds for the slow inversion sign.
pub fn inversion_integral(frequency: f64, t: f64) -> f64 {
    let period = 1.0 / frequency;
    let frac = fract(t * frequency);
    if frac < 0.5 {
        frac * period
    } else {
        (1.0 - frac) * period
    }
}

/// Envelope A(t) = max(0, A0 + slope · ∫ p dt) under a resonant drive.
pub fn analytic_envelope(
    params: &OscillatorParams,
    a0: f64,
    drive: &DriveWaveform,
    t: f64,
) -> Result<f64, OscillatorError> {
    let slope = envelope_slope(params, drive)?;
    let effective_time = match drive.inversion_frequency {
        Some(nu) if nu > 0.0 => inversion_integral(nu, t),
        _ => t,
    };
    Ok((a0 + slope * effective_time).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    SpinUp,
    SpinDown,
    Indeterminate,
}

/// Classifies a final amplitude against the starting amplitude.
pub fn classify_amplitude(final_amplitude: f64, a0: f64, threshold: f64) -> Readout {
    if final_amplitude >= a0 + threshold {
        Readout::SpinUp
    } else if final_amplitude <= a0 - threshold {
        Readout::SpinDown
    } else {
        Readout::Indeterminate
    }
}

/// Enhanced oscillation reads as spin up, suppressed as spin down. The
/// amplitude is taken from the energy of the final state.
pub fn classify_readout(trajectory: &Trajectory, a0: f64, threshold: f64) -> Result<Readout, OscillatorError> {
    let amp = trajectory
        .final_amplitude()
        .ok_or_else(|| OscillatorError::InvalidInput("empty trajectory".into()))?;
    Ok(classify_amplitude(amp, a0, threshold))
}

pub fn static_deflection(params: &OscillatorParams, net_force: f64) -> f64 {
    net_force / params.spring_k
}
