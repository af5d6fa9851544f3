//! Maps a validated scenario onto the core pipelines.

use crate::scenario::{Scenario, ScenarioKind};
use moltrap_core::circuit::{parse_program, run_program, CircuitError, Instruction};
use moltrap_core::oscillator::{DrivePhase, OscillatorError, OscillatorParams, Trajectory};
use moltrap_core::protocol::{detection_time, run_protocol, Carrier, GradientSchedule, ProtocolError, SpinSite};
use moltrap_core::readout::{simulate_readout, ReadoutConfig};
use moltrap_core::register::{MeasurementRecord, RegisterError};
use moltrap_core::trap::{
    derive_ion_trap, derive_optical_trap, molecule_mass, spin_force, spring_constant, IonTrapSpec, MoleculeSpec,
    OpticalTrapSpec, TrapError, WeightCalibration,
};
use moltrap_core::{constants, Report};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    /// Inputs are well-formed but physically or logically inadmissible.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed.
    #[error("{0}")]
    Numeric(String),
}

impl From<TrapError> for RunError {
    fn from(e: TrapError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<ProtocolError> for RunError {
    fn from(e: ProtocolError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<OscillatorError> for RunError {
    fn from(e: OscillatorError) -> Self {
        match e {
            OscillatorError::NonFinite { .. } => RunError::Numeric(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}

impl From<CircuitError> for RunError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Execution {
                source: RegisterError::Readout(_),
                ..
            } => RunError::Numeric(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunContext {
    /// Directory that relative paths in the scenario are resolved against.
    pub base_dir: Option<PathBuf>,
    /// Overrides the scenario's `seed`.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub records: Vec<MeasurementRecord>,
    pub trajectory: Option<Trajectory>,
}

impl RunOutput {
    fn report_only(report: Report) -> Self {
        RunOutput {
            report,
            records: Vec::new(),
            trajectory: None,
        }
    }

    /// Aligned table followed by one block per measurement record.
    pub fn render_table(&self) -> String {
        let mut out = self.report.to_table();
        for (i, rec) in self.records.iter().enumerate() {
            out.push_str(&format!("measurement {i}\n"));
            for line in rec.to_text().lines() {
                out.push_str(&format!("  {line}\n"));
            }
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut doc = self.report.to_json_value();
        if !self.records.is_empty() {
            let records: Vec<serde_json::Value> = self.records.iter().map(|r| r.to_json_value()).collect();
            doc["measurements"] = serde_json::Value::Array(records);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("report values are always serializable");
        s.push('\n');
        s
    }
}

fn seed(s: &Scenario, ctx: &RunContext) -> Result<u64, RunError> {
    if let Some(seed) = ctx.seed {
        return Ok(seed);
    }
    match s.si("seed") {
        None => Ok(0),
        Some(v) => whole(v, "seed"),
    }
}

fn whole(v: f64, key: &str) -> Result<u64, RunError> {
    if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(RunError::Validation(format!("{key} must be a non-negative integer, got {v}")))
    }
}

fn required(s: &Scenario, key: &str) -> f64 {
    s.si(key).unwrap_or_else(|| panic!("{key} is required by the schema"))
}

fn molecule(s: &Scenario) -> Result<MoleculeSpec, RunError> {
    let n = whole(required(s, "N"), "N")?;
    let n = u32::try_from(n).map_err(|_| RunError::Validation(format!("N = {n} is too large")))?;
    let mut m = MoleculeSpec::new(n);
    m.temperature = s.si_or("T", m.temperature);
    m.sound_speed = s.si_or("C", m.sound_speed);
    m.charge = s.si_or("charge", m.charge);
    m.spin_moment = s.si_or("moment", m.spin_moment);
    Ok(m)
}

fn positive(v: f64, key: &str) -> Result<f64, RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(RunError::Validation(format!("{key} must be positive, got {v}")))
    }
}

/// Axial oscillator of a trapped molecule with its thermal amplitude.
fn molecular_oscillator(s: &Scenario) -> Result<(MoleculeSpec, OscillatorParams, f64), RunError> {
    let m = molecule(s)?;
    m.validate()?;
    let nu_z = positive(required(s, "nu_z"), "nu_z")?;
    let mass = molecule_mass(&m);
    let osc = OscillatorParams::undamped(mass, spring_constant(mass, nu_z));
    let thermal = (2.0 * constants().boltzmann_kb * m.temperature / mass).sqrt() / (2.0 * PI * nu_z);
    let a0 = positive(s.si_or("A0", thermal), "A0")?;
    Ok((m, osc, a0))
}

/// Executes the scenario.
pub fn run_scenario(s: &Scenario, ctx: &RunContext) -> Result<RunOutput, RunError> {
    match s.kind {
        ScenarioKind::DeriveIon => derive_ion(s),
        ScenarioKind::DeriveOptical => derive_optical(s),
        ScenarioKind::Readout => readout(s),
        ScenarioKind::Protocol => protocol(s, ctx),
        ScenarioKind::Circuit => circuit(s, ctx),
    }
}

fn derive_ion(s: &Scenario) -> Result<RunOutput, RunError> {
    let m = molecule(s)?;
    let trap = IonTrapSpec {
        field_b: required(s, "B"),
        axial_frequency: required(s, "nu_z"),
    };
    let tr = derive_ion_trap(&m, &trap)?;
    let mut report = tr.to_report("derive_ion");
    if let Some(g) = s.si("gradient") {
        let f = spin_force(m.spin_moment, g);
        report.push("spin_force", f, "N");
        report.push("static_deflection", f / tr.spring_k, "m");
    }
    Ok(RunOutput::report_only(report))
}

fn derive_optical(s: &Scenario) -> Result<RunOutput, RunError> {
    let calibration = match (s.si("weight_fraction"), s.si("displacement")) {
        (Some(weight_fraction), Some(displacement)) => Some(WeightCalibration {
            weight_fraction,
            displacement,
        }),
        (None, None) => None,
        _ => {
            return Err(RunError::Validation(
                "weight_fraction and displacement must be given together".into(),
            ))
        }
    };
    let spec = OpticalTrapSpec {
        particle_mass: required(s, "M"),
        stiffness: s.si("k"),
        calibration,
    };
    let tr = derive_optical_trap(&spec)?;
    let mut report = tr.to_report("derive_optical");
    if let Some(g) = s.si("gradient") {
        let f = spin_force(s.si_or("moment", constants().proton_moment), g);
        report.push("spin_force", f, "N");
        report.push("static_deflection", f / tr.spring_k, "m");
    }
    Ok(RunOutput::report_only(report))
}

fn readout(s: &Scenario) -> Result<RunOutput, RunError> {
    let (m, osc, a0) = molecular_oscillator(s)?;
    let spin = s.si_or("spin", 1.0);
    if spin != 1.0 && spin != -1.0 {
        return Err(RunError::Validation(format!("spin must be 1 or -1, got {spin}")));
    }
    let steps_per_cycle = s.si_or("steps_per_cycle", 200.0);
    let cfg = ReadoutConfig {
        osc,
        force: spin_force(m.spin_moment, required(s, "gradient")),
        phase: if s.word("phase") == Some("pi") {
            DrivePhase::Pi
        } else {
            DrivePhase::Zero
        },
        a0,
        threshold: positive(s.si_or("threshold", 1e-6), "threshold")?,
        t_detect: positive(required(s, "t_end"), "t_end")?,
        window_cycles: positive(s.si_or("window_cycles", 1e4), "window_cycles")?,
        steps_per_cycle,
        // one sample per cycle, always at the same phase
        record_stride: whole(steps_per_cycle, "steps_per_cycle")?.max(1),
    };
    let outcome = simulate_readout(&cfg, spin)?;
    let mut report = outcome.to_report("readout", &cfg);
    if let Some(resolution) = s.si("resolution") {
        report.push("detection_time", detection_time(&cfg.osc, cfg.force, resolution), "s");
    }
    Ok(RunOutput {
        report,
        records: Vec::new(),
        trajectory: Some(outcome.trajectory),
    })
}

fn protocol(s: &Scenario, ctx: &RunContext) -> Result<RunOutput, RunError> {
    let (m, osc, a0) = molecular_oscillator(s)?;
    let count = whole(required(s, "background"), "background")?;
    let nu_flip = required(s, "nu_flip");
    let t_end = match (s.si("periods"), s.si("t_end")) {
        (Some(p), None) if nu_flip > 0.0 => whole(p, "periods")? as f64 / nu_flip,
        (Some(_), None) => return Err(RunError::Validation("periods needs nu_flip > 0".into())),
        (None, Some(t)) => t,
        _ => return Err(RunError::Validation("give exactly one of periods and t_end".into())),
    };
    let carrier = match s.word("carrier") {
        Some("sine") => Carrier::Sine,
        Some("static") => Carrier::Static,
        _ => Carrier::Square,
    };
    let background_moment = s.si_or("background_moment", constants().nuclear_magneton);
    let mut rng = ChaCha8Rng::seed_from_u64(seed(s, ctx)?);
    let mut sites = vec![SpinSite::new(0, m.spin_moment, "target", 1).port()];
    for i in 0..count {
        let state = if rng.random::<bool>() { 1 } else { -1 };
        sites.push(SpinSite::new(i as usize + 1, background_moment, "background", state));
    }
    let schedule = GradientSchedule {
        base_gradient: required(s, "gradient"),
        carrier,
        inversion_frequency: nu_flip,
    };
    let result = run_protocol(&sites, &schedule, &osc, a0, t_end)?;
    let mut report = result.to_report("protocol");
    report.push("background_spins", count as f64, "");
    report.push("t_end", t_end, "s");
    Ok(RunOutput::report_only(report))
}

fn resolve(base: Option<&Path>, path: &str) -> PathBuf {
    match base {
        Some(dir) if Path::new(path).is_relative() => dir.join(path),
        _ => PathBuf::from(path),
    }
}

fn circuit(s: &Scenario, ctx: &RunContext) -> Result<RunOutput, RunError> {
    let path = resolve(ctx.base_dir.as_deref(), s.word("program").expect("program is required by the schema"));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| RunError::Validation(format!("cannot read program {}: {e}", path.display())))?;
    let mut program = parse_program(&text)?;
    // a run seed shifts every instruction seed so one program gives
    // independent reproducible runs
    if let Some(offset) = ctx.seed.or(s.si("seed").map(|v| whole(v, "seed")).transpose()?) {
        for (_, ins) in &mut program.instructions {
            match ins {
                Instruction::Measure { seed } | Instruction::Init { seed, .. } => *seed = seed.wrapping_add(offset),
                _ => {}
            }
        }
    }
    let run = run_program(&program)?;
    let mut report = Report::new("circuit");
    report.push("qubits", program.qubits as f64, "");
    report.push("port", program.port as f64, "");
    report.push("measurements", run.records.len() as f64, "");
    report.push("norm", run.state.norm_sqr(), "");
    Ok(RunOutput {
        report,
        records: run.records,
        trajectory: None,
    })
}
