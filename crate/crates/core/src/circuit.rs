//! Line-oriented circuit programs for the spin register.
//!
//! ```text
//! # comment
//! QUBITS 3          optional; otherwise the first INIT or the largest index
//! PORT 0            optional read/write port, default 0
//! INIT 000 7        measure with seed 7, then preset to 000
//! PULSE 0 pi/2 0    RF rotation: qubit, angle, axis phase
//! PHASE 1 pi/4
//! XOR 0 1
//! SWAP 1 2
//! MEASURE 11        project with seed 11 and read every site via the port
//! ```
//!
//! Angles are plain numbers (radians) or `[-][k*]pi[/d]`.

use crate::register::{
    initialize, port_readout_with, project_all, Configuration, IdealReader, MeasurementRecord, PortReader,
    RegisterError, RegisterState,
};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Phase { qubit: usize, theta: f64 },
    Xor { control: usize, target: usize },
    Swap { a: usize, b: usize },
    Pulse { qubit: usize, theta: f64, phi: f64 },
    Measure { seed: u64 },
    Init { bits: Configuration, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub qubits: usize,
    pub port: usize,
    pub instructions: Vec<(usize, Instruction)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("{}", format_errors(.0))]
    Parse(Vec<LineError>),
    #[error("line {line}: {source}")]
    Execution { line: usize, source: RegisterError },
}

fn format_errors(errors: &[LineError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parses `[-][k*]pi[/d]` or a plain number.
pub fn parse_angle(token: &str) -> Option<f64> {
    if let Ok(v) = token.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, rest) = match token.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, token),
    };
    let (numer, denom) = match rest.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (rest, 1.0),
    };
    let factor = match numer.split_once('*') {
        Some((k, "pi")) => k.parse::<f64>().ok()?,
        None if numer == "pi" => 1.0,
        _ => return None,
    };
    Some(sign * factor * PI / denom)
}

pub fn parse_program(text: &str) -> Result<Program, CircuitError> {
    let mut errors = Vec::new();
    let mut instructions = Vec::new();
    let mut qubits: Option<usize> = None;
    let mut port = 0usize;
    let mut max_index = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut err = |m: String| {
            errors.push(LineError {
                line: line_no,
                message: m,
            })
        };
        let op = tokens[0].to_ascii_uppercase();
        let args = &tokens[1..];
        let expect = match op.as_str() {
            "QUBITS" | "PORT" | "MEASURE" => 1,
            "PHASE" | "XOR" | "SWAP" | "INIT" => 2,
            "PULSE" => 3,
            other => {
                err(format!("unknown instruction {other:?}"));
                continue;
            }
        };
        if args.len() != expect {
            err(format!("{op} takes {expect} argument(s), got {}", args.len()));
            continue;
        }
        let index = |s: &str| s.parse::<usize>().map_err(|_| format!("bad qubit index {s:?}"));
        let seed = |s: &str| s.parse::<u64>().map_err(|_| format!("bad seed {s:?}"));
        let angle = |s: &str| parse_angle(s).ok_or_else(|| format!("bad angle {s:?}"));
        let parsed: Result<Option<Instruction>, String> = (|| {
            Ok(match op.as_str() {
                "QUBITS" => {
                    qubits = Some(index(args[0])?);
                    None
                }
                "PORT" => {
                    port = index(args[0])?;
                    None
                }
                "PHASE" => Some(Instruction::Phase {
                    qubit: index(args[0])?,
                    theta: angle(args[1])?,
                }),
                "XOR" => Some(Instruction::Xor {
                    control: index(args[0])?,
                    target: index(args[1])?,
                }),
                "SWAP" => Some(Instruction::Swap {
                    a: index(args[0])?,
                    b: index(args[1])?,
                }),
                "PULSE" => Some(Instruction::Pulse {
                    qubit: index(args[0])?,
                    theta: angle(args[1])?,
                    phi: angle(args[2])?,
                }),
                "MEASURE" => Some(Instruction::Measure { seed: seed(args[0])? }),
                "INIT" => Some(Instruction::Init {
                    bits: args[0].parse().map_err(|e: RegisterError| e.to_string())?,
                    seed: seed(args[1])?,
                }),
                _ => unreachable!(),
            })
        })();
        match parsed {
            Ok(Some(ins)) => {
                match &ins {
                    Instruction::Phase { qubit, .. } | Instruction::Pulse { qubit, .. } => {
                        max_index = max_index.max(*qubit)
                    }
                    Instruction::Xor { control, target } => max_index = max_index.max(*control).max(*target),
                    Instruction::Swap { a, b } => max_index = max_index.max(*a).max(*b),
                    Instruction::Init { bits, .. } => {
                        if qubits.is_none() {
                            qubits = Some(bits.len());
                        }
                    }
                    Instruction::Measure { .. } => {}
                }
                instructions.push((line_no, ins));
            }
            Ok(None) => {}
            Err(m) => err(m),
        }
    }

    if !errors.is_empty() {
        return Err(CircuitError::Parse(errors));
    }
    let qubits = qubits.unwrap_or((max_index + 1).max(port + 1));
    Ok(Program {
        qubits,
        port,
        instructions,
    })
}

#[derive(Debug, Clone)]
pub struct CircuitRun {
    pub state: RegisterState,
    pub records: Vec<MeasurementRecord>,
}

/// Runs from |0…0⟩ with ideal port readout.
pub fn run_program(program: &Program) -> Result<CircuitRun, CircuitError> {
    run_program_with(program, &mut IdealReader)
}

/// Runs from |0…0⟩. Each MEASURE projects the register and reads every
/// site through the port in index order.
pub fn run_program_with<R: PortReader + ?Sized>(program: &Program, reader: &mut R) -> Result<CircuitRun, CircuitError> {
    let at = |line: usize| move |source: RegisterError| CircuitError::Execution { line, source };
    let mut state = RegisterState::zero(program.qubits, program.port).map_err(at(0))?;
    let mut records = Vec::new();
    for (line, ins) in &program.instructions {
        let line = *line;
        match ins {
            Instruction::Phase { qubit, theta } => state.phase_in_place(*qubit, *theta).map_err(at(line))?,
            Instruction::Xor { control, target } => state.xor_in_place(*control, *target).map_err(at(line))?,
            Instruction::Swap { a, b } => state.swap_in_place(*a, *b).map_err(at(line))?,
            Instruction::Pulse { qubit, theta, phi } => {
                state.pulse_in_place(*qubit, *theta, *phi).map_err(at(line))?
            }
            Instruction::Measure { seed } => {
                let (projected, _) = project_all(&state, *seed);
                let schedule: Vec<usize> = (0..program.qubits).collect();
                records.push(port_readout_with(&projected, &schedule, reader).map_err(at(line))?);
                state = projected;
            }
            Instruction::Init { bits, seed } => {
                state = initialize(&state, bits, *seed).map_err(at(line))?;
            }
        }
    }
    Ok(CircuitRun { state, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5"), Some(0.5));
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_angle("3*pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_angle("pie"), None);
        assert_eq!(parse_angle("pi/0"), None);
    }

    #[test]
    fn bell_program() {
        let prog = parse_program(
            "# bell pair\nINIT 00 1\nPULSE 0 pi/2 -pi/2\nXOR 0 1\nMEASURE 3\n",
        )
        .unwrap();
        assert_eq!(prog.qubits, 2);
        let run = run_program(&prog).unwrap();
        let cfg = run.records[0].configuration.to_string();
        assert!(cfg == "00" || cfg == "11");
        assert_eq!(run.records[0].port_bits_string(), cfg);
    }

    #[test]
    fn all_parse_errors_reported() {
        let err = parse_program("XOR 0\nFOO 1\nPHASE 0 abc\nINIT 0x1 2\n").unwrap_err();
        match err {
            CircuitError::Parse(list) => {
                let lines: Vec<usize> = list.iter().map(|e| e.line).collect();
                assert_eq!(lines, vec![1, 2, 3, 4]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gate_after_measure_fails_with_line() {
        let prog = parse_program("QUBITS 2\nMEASURE 1\nXOR 0 1\n").unwrap();
        assert_eq!(
            run_program(&prog).unwrap_err(),
            CircuitError::Execution {
                line: 3,
                source: RegisterError::GradientOn
            }
        );
    }

    #[test]
    fn size_inferred_from_indices() {
        let prog = parse_program("SWAP 0 3\n").unwrap();
        assert_eq!(prog.qubits, 4);
        let run = run_program(&parse_program("QUBITS 3\nPULSE 2 pi 0\nSWAP 2 0\nMEASURE 0").unwrap()).unwrap();
        assert_eq!(run.records[0].configuration.to_string(), "100");
    }
}
