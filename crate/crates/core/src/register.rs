//! State-vector spin register with a single read/write port.
//!
//! Qubit `i` is bit `i` of the basis index, and configuration strings list
//! qubit 0 first: `"10"` is qubit 0 set, qubit 1 clear. Bit 0 is spin up
//! (s = +1), bit 1 is spin down.
//!
//! Coherent gates are only allowed while the measurement gradient is off.
//! Switching the gradient on projects the whole register onto a basis
//! configuration; afterwards the register is tracked classically.
//!
//! Sampling uses ChaCha8 seeded from a `u64` (`rand_chacha::ChaCha8Rng::
//! seed_from_u64`), one uniform `f64` per projection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const MAX_QUBITS: usize = 20;
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegisterError {
    #[error("coherent gate attempted while the measurement gradient is on")]
    GradientOn,
    #[error("gate needs two distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("qubit {qubit} out of range for a {size}-qubit register")]
    QubitOutOfRange { qubit: usize, size: usize },
    #[error("register size {0} outside 1..=20")]
    InvalidSize(usize),
    #[error("register is not in a classical configuration")]
    NotClassical,
    #[error("configuration has {got} bits, register has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid register state: {0}")]
    InvalidState(String),
    #[error("port readout failed: {0}")]
    Readout(String),
}

/// Classical bit string, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(pub Vec<bool>);

impl Configuration {
    pub fn zeros(n: usize) -> Self {
        Configuration(vec![false; n])
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Configuration((0..n).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| 1usize << i)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = RegisterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(RegisterError::InvalidState(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Configuration)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub configuration: Configuration,
    /// Sites read through the port, in order.
    pub schedule: Vec<usize>,
    pub port_bit_sequence: Vec<bool>,
    pub rng_seed: Option<u64>,
}

impl MeasurementRecord {
    pub fn port_bits_string(&self) -> String {
        self.port_bit_sequence.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let schedule: Vec<String> = self.schedule.iter().map(|i| i.to_string()).collect();
        let mut out = format!(
            "configuration = {}\nschedule = {}\nport_bits = {}\n",
            self.configuration,
            schedule.join(","),
            self.port_bits_string()
        );
        if let Some(seed) = self.rng_seed {
            out.push_str(&format!("seed = {seed}\n"));
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "configuration": self.configuration.to_string(),
            "schedule": self.schedule,
            "port_bits": self.port_bits_string(),
            "seed": self.rng_seed,
        })
    }
}

/// Decides the port spin's value. In integrated scenarios this is the
/// mechanical readout of the oscillator.
pub trait PortReader {
    fn read(&mut self, spin_down: bool) -> Result<bool, RegisterError>;
}

/// Reads the port bit without error.
pub struct IdealReader;

impl PortReader for IdealReader {
    fn read(&mut self, spin_down: bool) -> Result<bool, RegisterError> {
        Ok(spin_down)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    qubits: usize,
    amplitudes: Vec<Complex64>,
    gradient_on: bool,
    port: usize,
    last_seed: Option<u64>,
}

impl RegisterState {
    /// |00…0⟩ with the gradient off.
    pub fn zero(qubits: usize, port: usize) -> Result<Self, RegisterError> {
        Self::basis(&Configuration::zeros(qubits), port)
    }

    pub fn basis(config: &Configuration, port: usize) -> Result<Self, RegisterError> {
        let n = config.len();
        check_size(n)?;
        if port >= n {
            return Err(RegisterError::QubitOutOfRange { qubit: port, size: n });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[config.index()] = Complex64::new(1.0, 0.0);
        Ok(RegisterState {
            qubits: n,
            amplitudes,
            gradient_on: false,
            port,
            last_seed: None,
        })
    }

    /// Wraps a normalized amplitude vector of length 2^n.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>, port: usize) -> Result<Self, RegisterError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(RegisterError::InvalidState(format!("length {len} is not 2^n")));
        }
        let n = len.trailing_zeros() as usize;
        check_size(n)?;
        if port >= n {
            return Err(RegisterError::QubitOutOfRange { qubit: port, size: n });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(RegisterError::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(RegisterState {
            qubits: n,
            amplitudes,
            gradient_on: false,
            port,
            last_seed: None,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn port_index(&self) -> usize {
        self.port
    }

    pub fn gradient_on(&self) -> bool {
        self.gradient_on
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Switches the measurement gradient off, re-enabling coherent gates.
    pub fn gradient_off(mut self) -> Self {
        self.gradient_on = false;
        self
    }

    /// Born probability of every basis configuration.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// The configuration if the state is a single basis vector.
    pub fn classical_configuration(&self) -> Option<Configuration> {
        let mut found = None;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if (p - 1.0).abs() <= NORM_TOLERANCE {
                found = Some(i);
            } else if p > NORM_TOLERANCE {
                return None;
            }
        }
        found.map(|i| Configuration::from_index(i, self.qubits))
    }

    fn check_qubit(&self, q: usize) -> Result<(), RegisterError> {
        if q >= self.qubits {
            return Err(RegisterError::QubitOutOfRange {
                qubit: q,
                size: self.qubits,
            });
        }
        Ok(())
    }

    fn check_coherent(&self) -> Result<(), RegisterError> {
        if self.gradient_on {
            return Err(RegisterError::GradientOn);
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), RegisterError> {
        self.check_coherent()?;
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(RegisterError::SameQubit(a));
        }
        Ok(())
    }

    pub fn phase_in_place(&mut self, qubit: usize, theta: f64) -> Result<(), RegisterError> {
        self.check_coherent()?;
        self.check_qubit(qubit)?;
        let factor = Complex64::from_polar(1.0, theta);
        let mask = 1 << qubit;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= factor;
            }
        }
        Ok(())
    }

    pub fn xor_in_place(&mut self, control: usize, target: usize) -> Result<(), RegisterError> {
        self.check_pair(control, target)?;
        let (cm, tm) = (1 << control, 1 << target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
        Ok(())
    }

    pub fn swap_in_place(&mut self, a: usize, b: usize) -> Result<(), RegisterError> {
        self.check_pair(a, b)?;
        let (am, bm) = (1 << a, 1 << b);
        for i in 0..self.amplitudes.len() {
            if i & am != 0 && i & bm == 0 {
                self.amplitudes.swap(i, i ^ am ^ bm);
            }
        }
        Ok(())
    }

    /// RF pulse: rotation by `theta` about the transverse axis at angle
    /// `phi`, exp(-i θ/2 (cos φ X + sin φ Y)).
    pub fn pulse_in_place(&mut self, qubit: usize, theta: f64, phi: f64) -> Result<(), RegisterError> {
        self.check_coherent()?;
        self.check_qubit(qubit)?;
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = (theta / 2.0).sin();
        let off01 = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -phi);
        let off10 = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, phi);
        let mask = 1 << qubit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                self.amplitudes[i] = c * a0 + off01 * a1;
                self.amplitudes[i | mask] = off10 * a0 + c * a1;
            }
        }
        Ok(())
    }

    fn set_classical(&mut self, config: &Configuration) {
        self.amplitudes.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        self.amplitudes[config.index()] = Complex64::new(1.0, 0.0);
    }
}

fn check_size(n: usize) -> Result<(), RegisterError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(RegisterError::InvalidSize(n));
    }
    Ok(())
}

/// Multiplies the |1⟩ component of `qubit` by e^{iθ}.
pub fn apply_phase(state: &RegisterState, qubit: usize, theta: f64) -> Result<RegisterState, RegisterError> {
    let mut s = state.clone();
    s.phase_in_place(qubit, theta)?;
    Ok(s)
}

/// |c, t⟩ -> |c, t ⊕ c⟩.
pub fn apply_xor(state: &RegisterState, control: usize, target: usize) -> Result<RegisterState, RegisterError> {
    let mut s = state.clone();
    s.xor_in_place(control, target)?;
    Ok(s)
}

pub fn apply_swap(state: &RegisterState, a: usize, b: usize) -> Result<RegisterState, RegisterError> {
    let mut s = state.clone();
    s.swap_in_place(a, b)?;
    Ok(s)
}

pub fn apply_pulse(state: &RegisterState, qubit: usize, theta: f64, phi: f64) -> Result<RegisterState, RegisterError> {
    let mut s = state.clone();
    s.pulse_in_place(qubit, theta, phi)?;
    Ok(s)
}

/// Draws a basis index with Born probabilities from one uniform variate.
fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let total: f64 = probabilities.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in probabilities.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if target < acc {
            return i;
        }
    }
    last_nonzero
}

/// Switches the gradient on and collapses the register onto one basis
/// configuration sampled with Born probabilities.
pub fn project_all(state: &RegisterState, seed: u64) -> (RegisterState, MeasurementRecord) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let index = sample_index(&state.probabilities(), u);
    let config = Configuration::from_index(index, state.qubits);
    let mut s = state.clone();
    s.gradient_on = true;
    s.last_seed = Some(seed);
    s.set_classical(&config);
    let record = MeasurementRecord {
        configuration: config,
        schedule: Vec::new(),
        port_bit_sequence: Vec::new(),
        rng_seed: Some(seed),
    };
    (s, record)
}

/// Reads each scheduled site by swapping it into the port, reading the
/// port and swapping back.
pub fn port_readout(state: &RegisterState, schedule: &[usize]) -> Result<MeasurementRecord, RegisterError> {
    port_readout_with(state, schedule, &mut IdealReader)
}

pub fn port_readout_with<R: PortReader + ?Sized>(
    state: &RegisterState,
    schedule: &[usize],
    reader: &mut R,
) -> Result<MeasurementRecord, RegisterError> {
    let config = state.classical_configuration().ok_or(RegisterError::NotClassical)?;
    let mut bits = config.0.clone();
    let port = state.port;
    let mut read = Vec::with_capacity(schedule.len());
    for &site in schedule {
        state.check_qubit(site)?;
        bits.swap(site, port);
        read.push(reader.read(bits[port])?);
        bits.swap(site, port);
    }
    debug_assert_eq!(bits, config.0);
    Ok(MeasurementRecord {
        configuration: config,
        schedule: schedule.to_vec(),
        port_bit_sequence: read,
        rng_seed: state.last_seed,
    })
}

/// Measures the register, then flips the bits that differ from `target`.
/// The result is the exact target basis state with the gradient off.
pub fn initialize(state: &RegisterState, target: &Configuration, seed: u64) -> Result<RegisterState, RegisterError> {
    if target.len() != state.qubits {
        return Err(RegisterError::LengthMismatch {
            expected: state.qubits,
            got: target.len(),
        });
    }
    let (mut s, record) = project_all(state, seed);
    let mut bits = record.configuration.0;
    for (b, t) in bits.iter_mut().zip(&target.0) {
        if *b != *t {
            *b = *t;
        }
    }
    s.set_classical(&Configuration(bits));
    Ok(s.gradient_off())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    fn close(a: &RegisterState, b: &RegisterState, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn configuration_round_trip() {
        let c = cfg("0110");
        assert_eq!(c.index(), 0b0110);
        assert_eq!(Configuration::from_index(0b0110, 4), c);
        assert_eq!(c.to_string(), "0110");
        assert_eq!(cfg("10").index(), 1);
        assert!("012".parse::<Configuration>().is_err());
    }

    #[test]
    fn phase_examples() {
        let s = RegisterState::basis(&cfg("1"), 0).unwrap();
        assert_eq!(apply_phase(&s, 0, 0.0).unwrap(), s);
        let flipped = apply_phase(&s, 0, PI).unwrap();
        assert!((flipped.amplitudes()[1] - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(flipped.probabilities(), s.probabilities());

        let plus = RegisterState::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 0).unwrap();
        let twice = apply_phase(&apply_phase(&plus, 0, PI / 2.0).unwrap(), 0, PI / 2.0).unwrap();
        let once = apply_phase(&plus, 0, PI).unwrap();
        assert!(close(&twice, &once, 1e-15));
    }

    #[test]
    fn xor_truth_table() {
        let s = RegisterState::basis(&cfg("10"), 0).unwrap();
        assert_eq!(apply_xor(&s, 0, 1).unwrap().classical_configuration(), Some(cfg("11")));
        let z = RegisterState::basis(&cfg("00"), 0).unwrap();
        assert_eq!(apply_xor(&z, 0, 1).unwrap().classical_configuration(), Some(cfg("00")));
        assert_eq!(apply_xor(&z, 1, 1), Err(RegisterError::SameQubit(1)));
    }

    #[test]
    fn xor_entangles() {
        let h = FRAC_1_SQRT_2;
        // (|0⟩+|1⟩)/√2 on qubit 0, qubit 1 in |0⟩
        let s = RegisterState::from_amplitudes(vec![c(h, 0.0), c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 0).unwrap();
        let bell = apply_xor(&s, 0, 1).unwrap();
        let expected = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        for (a, e) in bell.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn swap_examples() {
        let s = RegisterState::basis(&cfg("01"), 0).unwrap();
        let sw = apply_swap(&s, 0, 1).unwrap();
        assert_eq!(sw.classical_configuration(), Some(cfg("10")));
        assert_eq!(apply_swap(&sw, 0, 1).unwrap(), s);
    }

    #[test]
    fn gates_refused_with_gradient_on() {
        let s = RegisterState::zero(2, 0).unwrap();
        let (m, _) = project_all(&s, 1);
        assert!(m.gradient_on());
        assert_eq!(apply_phase(&m, 0, 1.0), Err(RegisterError::GradientOn));
        assert_eq!(apply_xor(&m, 0, 1), Err(RegisterError::GradientOn));
        assert_eq!(apply_swap(&m, 0, 1), Err(RegisterError::GradientOn));
        assert_eq!(apply_pulse(&m, 0, 1.0, 0.0), Err(RegisterError::GradientOn));
        assert!(apply_xor(&m.gradient_off(), 0, 1).is_ok());
    }

    #[test]
    fn pulse_pi_is_bit_flip_and_half_pi_balances() {
        let s = RegisterState::zero(1, 0).unwrap();
        let flipped = apply_pulse(&s, 0, PI, 0.0).unwrap();
        assert!((flipped.probabilities()[1] - 1.0).abs() < 1e-15);
        let half = apply_pulse(&s, 0, PI / 2.0, 0.3).unwrap();
        assert!((half.probabilities()[0] - 0.5).abs() < 1e-15);
        assert!((half.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_of_basis_state_is_certain() {
        let s = RegisterState::basis(&cfg("0110"), 0).unwrap();
        for seed in 0..50 {
            let (p, rec) = project_all(&s, seed);
            assert_eq!(rec.configuration, cfg("0110"));
            assert_eq!(p.classical_configuration(), Some(cfg("0110")));
        }
    }

    #[test]
    fn projection_is_deterministic_in_seed() {
        let s = apply_pulse(&RegisterState::zero(3, 0).unwrap(), 1, PI / 2.0, 0.0).unwrap();
        assert_eq!(project_all(&s, 99), project_all(&s, 99));
    }

    #[test]
    fn port_readout_examples() {
        let s = RegisterState::basis(&cfg("1011"), 0).unwrap();
        let rec = port_readout(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(rec.port_bits_string(), "1011");
        let rec = port_readout(&s, &[2]).unwrap();
        assert_eq!(rec.port_bit_sequence, vec![true]);
        let plus = apply_pulse(&s.clone(), 1, PI / 2.0, 0.0).unwrap();
        assert_eq!(port_readout(&plus, &[0]), Err(RegisterError::NotClassical));
    }

    #[test]
    fn initialize_examples() {
        let s = apply_pulse(&RegisterState::zero(3, 0).unwrap(), 2, 1.0, 0.4).unwrap();
        let z = initialize(&s, &cfg("000"), 5).unwrap();
        assert_eq!(z.classical_configuration(), Some(cfg("000")));
        assert!(!z.gradient_on());
        let k = RegisterState::basis(&cfg("101"), 1).unwrap();
        let k2 = initialize(&k, &cfg("101"), 0).unwrap();
        assert_eq!(k2.amplitudes(), k.amplitudes());
        assert!(initialize(&k, &cfg("10"), 0).is_err());
    }

    #[test]
    fn size_limits() {
        assert_eq!(RegisterState::zero(0, 0), Err(RegisterError::InvalidSize(0)));
        assert_eq!(RegisterState::zero(21, 0), Err(RegisterError::InvalidSize(21)));
        assert!(RegisterState::zero(2, 2).is_err());
    }

    #[test]
    fn record_text() {
        let s = RegisterState::basis(&cfg("10"), 0).unwrap();
        let (p, _) = project_all(&s, 7);
        let rec = port_readout(&p, &[1, 0]).unwrap();
        assert_eq!(rec.to_text(), "configuration = 10\nschedule = 1,0\nport_bits = 01\nseed = 7\n");
    }
}
