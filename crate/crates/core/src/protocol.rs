//! Spin lattice as a set of force sources, and the gradient-inversion
//! protocol that lets one target spin drive the oscillator while the rest
//! of the lattice cancels.
//!
//! The gradient carrier oscillates at the axial frequency. A slow ±1
//! inversion `p(t)` (50% duty, frequency `ν_flip`) multiplies the gradient,
//! and the target spin is flipped at the same instants, so its force keeps
//! a constant resonant sign while every other spin's force alternates.
//!
//! Work is evaluated to first order along the reference motion
//! `v_ref(t) = -A0 ω sin(ω t)` with closed-form antiderivatives, summed per
//! inversion half-period.

use crate::oscillator::{natural_frequency, DrivePhase, DriveWaveform, OscillatorParams, WaveKind};
use crate::report::Report;
use crate::trap::larmor_frequency;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("window {t_end:e} s is not a whole number of inversion periods of {period:e} s")]
    MisalignedWindow { t_end: f64, period: f64 },
    #[error("inversion half-period is not a whole number of carrier work periods (nu_z/nu_flip = {ratio})")]
    IncommensurateInversion { ratio: f64 },
    #[error("inversion frequency {nu_flip:e} Hz exceeds nu_z/10 = {limit:e} Hz")]
    InversionTooFast { nu_flip: f64, limit: f64 },
    #[error("register must contain exactly one read/write port, found {0}")]
    PortCount(usize),
    #[error("invalid protocol input: {0}")]
    InvalidInput(String),
}

/// Relative slack when checking that windows and periods line up.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSite {
    pub index: usize,
    /// Magnetic moment magnitude, J/T.
    pub moment: f64,
    pub gyro_tag: String,
    /// +1 or -1.
    pub state: i8,
    pub is_port: bool,
}

impl SpinSite {
    pub fn new(index: usize, moment: f64, tag: &str, state: i8) -> Self {
        SpinSite {
            index,
            moment,
            gyro_tag: tag.to_string(),
            state,
            is_port: false,
        }
    }

    pub fn port(mut self) -> Self {
        self.is_port = true;
        self
    }

    fn sign(&self) -> f64 {
        if self.state < 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Signed force in a gradient.
    pub fn force(&self, gradient: f64) -> f64 {
        self.sign() * self.moment * gradient
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Static,
    /// Square gradient oscillation at the axial frequency.
    Square,
    /// Sinusoidal gradient oscillation at the axial frequency.
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSchedule {
    /// Gradient amplitude, T/m.
    pub base_gradient: f64,
    pub carrier: Carrier,
    /// Inversion frequency, Hz. Zero disables inversion.
    pub inversion_frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub target_work: f64,
    pub background_work: f64,
    pub amplitude_gain: f64,
    /// |background_work| / |target_work|.
    pub cancellation_ratio: f64,
    /// Set when there is background but no inversion to cancel it.
    pub cancellation_diverges: bool,
    /// Deflection the background would cause under a static gradient.
    pub background_deflection: f64,
    pub target_force: f64,
}

impl ProtocolResult {
    pub fn to_report(&self, title: &str) -> Report {
        let mut r = Report::new(title);
        r.push("target_force", self.target_force, "N");
        r.push("target_work_J", self.target_work, "J");
        r.push("background_work_J", self.background_work, "J");
        r.push("amplitude_gain_m", self.amplitude_gain, "m");
        r.push("cancellation_ratio", self.cancellation_ratio, "");
        r.push("background_deflection", self.background_deflection, "m");
        if self.cancellation_diverges {
            r.flag("no gradient inversion: background is not cancelled");
        }
        r
    }
}

/// True iff the site's Larmor frequency lies within `tolerance` of `rf`.
pub fn resonance_check(site: &SpinSite, rf_frequency: f64, field_b: f64, tolerance: f64) -> bool {
    if field_b.is_nan() || field_b <= 0.0 {
        return false;
    }
    (larmor_frequency(site.moment.abs(), field_b) - rf_frequency).abs() <= tolerance
}

/// Σ s_i μ_i G over all non-port sites.
pub fn net_static_force(sites: &[SpinSite], gradient: f64) -> f64 {
    sites.iter().filter(|s| !s.is_port).map(|s| s.force(gradient)).sum()
}

/// Time for the resonant amplitude change to reach `resolution`:
/// resolution · k / (4 f ν_z).
pub fn detection_time(osc: &OscillatorParams, force: f64, resolution: f64) -> f64 {
    resolution * osc.spring_k / (4.0 * force * natural_frequency(osc))
}

/// ∫0^t c(s) u(s) ds with u(s) = -sin(ω s) the unit reference velocity and
/// c the carrier shape, both at frequency `nu`.
fn carrier_work_integral(carrier: Carrier, nu: f64, t: f64) -> f64 {
    let omega = 2.0 * PI * nu;
    match carrier {
        Carrier::Square => {
            let half_cycles = 2.0 * nu * t;
            let whole = half_cycles.floor();
            (2.0 * whole + 1.0 - (PI * (half_cycles - whole)).cos()) / omega
        }
        Carrier::Sine => {
            let cycles = nu * t;
            0.5 * t - (4.0 * PI * (cycles - cycles.floor())).sin() / (4.0 * omega)
        }
        Carrier::Static => {
            let cycles = nu * t;
            ((2.0 * PI * (cycles - cycles.floor())).cos() - 1.0) / omega
        }
    }
}

fn is_whole(x: f64) -> bool {
    (x - x.round()).abs() <= ALIGNMENT_TOLERANCE * x.abs().max(1.0)
}

fn validate(
    sites: &[SpinSite],
    schedule: &GradientSchedule,
    osc: &OscillatorParams,
    a0: f64,
    t_end: f64,
) -> Result<(), ProtocolError> {
    osc.validate()
        .map_err(|e| ProtocolError::InvalidInput(e.to_string()))?;
    let ports = sites.iter().filter(|s| s.is_port).count();
    if ports != 1 {
        return Err(ProtocolError::PortCount(ports));
    }
    if sites.iter().any(|s| s.moment == 0.0 || !s.moment.is_finite()) {
        return Err(ProtocolError::InvalidInput("site moments must be non-zero".into()));
    }
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(ProtocolError::InvalidInput("reference amplitude must be positive".into()));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(ProtocolError::InvalidInput("t_end must be positive".into()));
    }
    if !schedule.base_gradient.is_finite() {
        return Err(ProtocolError::InvalidInput("gradient must be finite".into()));
    }
    let nu_flip = schedule.inversion_frequency;
    if nu_flip < 0.0 || !nu_flip.is_finite() {
        return Err(ProtocolError::InvalidInput("inversion frequency must be >= 0".into()));
    }
    if nu_flip > 0.0 {
        let nu_z = natural_frequency(osc);
        if nu_flip > nu_z / 10.0 * (1.0 + ALIGNMENT_TOLERANCE) {
            return Err(ProtocolError::InversionTooFast {
                nu_flip,
                limit: nu_z / 10.0,
            });
        }
        if !is_whole(t_end * nu_flip) {
            return Err(ProtocolError::MisalignedWindow {
                t_end,
                period: 1.0 / nu_flip,
            });
        }
        // c·u repeats every half carrier cycle for square and sine, every
        // full cycle for a static gradient
        let ratio = nu_z / nu_flip;
        let periods_per_half = match schedule.carrier {
            Carrier::Static => ratio / 2.0,
            Carrier::Square | Carrier::Sine => ratio,
        };
        if !is_whole(periods_per_half) {
            return Err(ProtocolError::IncommensurateInversion { ratio });
        }
    }
    Ok(())
}

/// Runs the gradient-inversion protocol over `[0, t_end]`.
pub fn run_protocol(
    sites: &[SpinSite],
    schedule: &GradientSchedule,
    osc: &OscillatorParams,
    a0: f64,
    t_end: f64,
) -> Result<ProtocolResult, ProtocolError> {
    validate(sites, schedule, osc, a0, t_end)?;
    let nu_z = natural_frequency(osc);
    let omega = 2.0 * PI * nu_z;
    let g = schedule.base_gradient;
    let port = sites.iter().find(|s| s.is_port).expect("validated");

    let unit_work = |a: f64, b: f64| {
        a0 * omega * (carrier_work_integral(schedule.carrier, nu_z, b)
            - carrier_work_integral(schedule.carrier, nu_z, a))
    };

    let target_force = port.force(g);
    let background_force = net_static_force(sites, g);
    let target_work = target_force * unit_work(0.0, t_end);

    let nu_flip = schedule.inversion_frequency;
    let background_work = if nu_flip > 0.0 {
        let half = 0.5 / nu_flip;
        let halves = (2.0 * t_end * nu_flip).round() as u64;
        let mut acc = 0.0;
        for k in 0..halves {
            let a = k as f64 * half;
            let b = (k + 1) as f64 * half;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * unit_work(a, b);
        }
        background_force * acc
    } else {
        background_force * unit_work(0.0, t_end)
    };

    let cancellation_ratio = if target_work == 0.0 {
        if background_work == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (background_work / target_work).abs()
    };

    // to first order dE = k A0 dA along the reference motion
    let amplitude_gain = (target_work / (osc.spring_k * a0)).max(-a0);

    Ok(ProtocolResult {
        target_work,
        background_work,
        amplitude_gain,
        cancellation_ratio,
        cancellation_diverges: nu_flip == 0.0 && sites.iter().any(|s| !s.is_port),
        background_deflection: background_force / osc.spring_k,
        target_force,
    })
}

/// Time-domain drives equivalent to the protocol, for cross-checking with
/// the integrator: the target as a steady resonant drive, the background
/// as one inverted drive.
pub fn protocol_drives(sites: &[SpinSite], schedule: &GradientSchedule, osc: &OscillatorParams) -> Vec<DriveWaveform> {
    let nu_z = natural_frequency(osc);
    let g = schedule.base_gradient;
    let kind = match schedule.carrier {
        Carrier::Static => WaveKind::Static,
        Carrier::Square => WaveKind::Square,
        Carrier::Sine => WaveKind::Sine,
    };
    let carrier = |force: f64| DriveWaveform {
        kind,
        force_amplitude: force,
        frequency: if kind == WaveKind::Static { 0.0 } else { nu_z },
        phase: DrivePhase::Zero,
        inversion_frequency: None,
    };
    let mut drives = Vec::new();
    if let Some(port) = sites.iter().find(|s| s.is_port) {
        drives.push(carrier(port.force(g)));
    }
    let bg = net_static_force(sites, g);
    if bg != 0.0 {
        let mut d = carrier(bg);
        if schedule.inversion_frequency > 0.0 {
            d.inversion_frequency = Some(schedule.inversion_frequency);
        }
        drives.push(d);
    }
    drives
}
