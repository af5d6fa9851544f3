//! Scenario files: one `key = value unit` assignment per line, `#`
//! comments. Every dimensioned value must carry a unit; enumerated values
//! (`carrier`, `phase`, `program`) are bare words.

use crate::units::{lookup, Dimension};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    DeriveIon,
    DeriveOptical,
    Readout,
    Protocol,
    Circuit,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::DeriveIon => "derive_ion",
            ScenarioKind::DeriveOptical => "derive_optical",
            ScenarioKind::Readout => "readout",
            ScenarioKind::Protocol => "protocol",
            ScenarioKind::Circuit => "circuit",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "derive_ion" => ScenarioKind::DeriveIon,
            "derive_optical" => ScenarioKind::DeriveOptical,
            "readout" => ScenarioKind::Readout,
            "protocol" => ScenarioKind::Protocol,
            "circuit" => ScenarioKind::Circuit,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyType {
    Number(Dimension),
    Word(&'static [&'static str]),
    Path,
}

struct KeySpec {
    name: &'static str,
    ty: KeyType,
    required: bool,
}

const fn num(name: &'static str, d: Dimension, required: bool) -> KeySpec {
    KeySpec {
        name,
        ty: KeyType::Number(d),
        required,
    }
}

use Dimension as D;

const SEED: KeySpec = num("seed", D::Dimensionless, false);

const ION_KEYS: &[KeySpec] = &[
    num("N", D::Dimensionless, true),
    num("B", D::Field, true),
    num("nu_z", D::Frequency, true),
    num("T", D::Temperature, false),
    num("C", D::Speed, false),
    num("charge", D::Charge, false),
    num("moment", D::Moment, false),
    num("gradient", D::Gradient, false),
    SEED,
];

const OPTICAL_KEYS: &[KeySpec] = &[
    num("M", D::Mass, true),
    num("k", D::Stiffness, false),
    num("weight_fraction", D::Dimensionless, false),
    num("displacement", D::Length, false),
    num("moment", D::Moment, false),
    num("gradient", D::Gradient, false),
    SEED,
];

const PHASES: &[&str] = &["0", "pi"];
const CARRIERS: &[&str] = &["square", "sine", "static"];

const READOUT_KEYS: &[KeySpec] = &[
    num("N", D::Dimensionless, true),
    num("nu_z", D::Frequency, true),
    num("gradient", D::Gradient, true),
    num("t_end", D::Time, true),
    num("moment", D::Moment, false),
    num("A0", D::Length, false),
    num("T", D::Temperature, false),
    num("spin", D::Dimensionless, false),
    KeySpec {
        name: "phase",
        ty: KeyType::Word(PHASES),
        required: false,
    },
    num("threshold", D::Length, false),
    num("window_cycles", D::Dimensionless, false),
    num("steps_per_cycle", D::Dimensionless, false),
    num("resolution", D::Length, false),
    SEED,
];

const PROTOCOL_KEYS: &[KeySpec] = &[
    num("N", D::Dimensionless, true),
    num("nu_z", D::Frequency, true),
    num("gradient", D::Gradient, true),
    num("background", D::Dimensionless, true),
    num("nu_flip", D::Frequency, true),
    num("periods", D::Dimensionless, false),
    num("t_end", D::Time, false),
    KeySpec {
        name: "carrier",
        ty: KeyType::Word(CARRIERS),
        required: false,
    },
    num("A0", D::Length, false),
    num("T", D::Temperature, false),
    num("moment", D::Moment, false),
    num("background_moment", D::Moment, false),
    SEED,
];

const CIRCUIT_KEYS: &[KeySpec] = &[
    KeySpec {
        name: "program",
        ty: KeyType::Path,
        required: true,
    },
    SEED,
];

fn schema(kind: ScenarioKind) -> &'static [KeySpec] {
    match kind {
        ScenarioKind::DeriveIon => ION_KEYS,
        ScenarioKind::DeriveOptical => OPTICAL_KEYS,
        ScenarioKind::Readout => READOUT_KEYS,
        ScenarioKind::Protocol => PROTOCOL_KEYS,
        ScenarioKind::Circuit => CIRCUIT_KEYS,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Number as written plus its unit symbol (empty when dimensionless).
    Number { value: f64, unit: String },
    Word(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub parameters: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioErrorKind {
    UnknownKey(String),
    MissingKey(String),
    DuplicateKey(String),
    UnitMismatch { key: String, unit: String, expected: String },
    MalformedLine(String),
    InvalidValue { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub kind: ScenarioErrorKind,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        match &self.kind {
            ScenarioErrorKind::UnknownKey(k) => write!(f, "unknown key {k:?}"),
            ScenarioErrorKind::MissingKey(k) => write!(f, "missing required key {k:?}"),
            ScenarioErrorKind::DuplicateKey(k) => write!(f, "key {k:?} given twice"),
            ScenarioErrorKind::UnitMismatch { key, unit, expected } => {
                if expected.is_empty() {
                    write!(f, "{key} is dimensionless, got unit {unit:?}")
                } else {
                    write!(f, "{key} needs a unit of {expected}, got {unit:?}")
                }
            }
            ScenarioErrorKind::MalformedLine(text) => write!(f, "malformed line {text:?}"),
            ScenarioErrorKind::InvalidValue { key, message } => write!(f, "{key}: {message}"),
        }
    }
}

fn err(line: Option<usize>, kind: ScenarioErrorKind) -> ScenarioError {
    ScenarioError { line, kind }
}

/// Parses and validates a scenario, collecting every error found.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ScenarioError>> {
    let mut errors = Vec::new();
    let mut kind: Option<(ScenarioKind, usize)> = None;
    let mut raw: Vec<(usize, String, Vec<String>)> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, rhs)) = content.split_once('=') else {
            errors.push(err(Some(line_no), ScenarioErrorKind::MalformedLine(content.to_string())));
            continue;
        };
        let key = key.trim();
        let tokens: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
        if key.is_empty() || key.contains(char::is_whitespace) || tokens.is_empty() || tokens.len() > 2 {
            errors.push(err(Some(line_no), ScenarioErrorKind::MalformedLine(content.to_string())));
            continue;
        }
        if key == "kind" {
            if kind.is_some() {
                errors.push(err(Some(line_no), ScenarioErrorKind::DuplicateKey("kind".into())));
            } else if tokens.len() != 1 {
                errors.push(err(Some(line_no), ScenarioErrorKind::MalformedLine(content.to_string())));
            } else {
                match tokens[0].parse::<ScenarioKind>() {
                    Ok(k) => kind = Some((k, line_no)),
                    Err(()) => errors.push(err(
                        Some(line_no),
                        ScenarioErrorKind::InvalidValue {
                            key: "kind".into(),
                            message: format!(
                                "unknown kind {:?}; expected derive_ion, derive_optical, readout, protocol or circuit",
                                tokens[0]
                            ),
                        },
                    )),
                }
            }
            continue;
        }
        raw.push((line_no, key.to_string(), tokens));
    }

    let Some((kind, _)) = kind else {
        if !errors.iter().any(|e| matches!(&e.kind, ScenarioErrorKind::InvalidValue { key, .. } if key == "kind")) {
            errors.push(err(None, ScenarioErrorKind::MissingKey("kind".into())));
        }
        return Err(errors);
    };

    let keys = schema(kind);
    let mut parameters: Vec<(String, Value)> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    for (line_no, key, tokens) in raw {
        let line = Some(line_no);
        let Some(spec) = keys.iter().find(|k| k.name == key) else {
            errors.push(err(line, ScenarioErrorKind::UnknownKey(key)));
            continue;
        };
        if seen.contains(&key) {
            errors.push(err(line, ScenarioErrorKind::DuplicateKey(key)));
            continue;
        }
        seen.push(key.clone());
        match spec.ty {
            KeyType::Number(dim) => {
                let Ok(value) = tokens[0].parse::<f64>() else {
                    errors.push(err(
                        line,
                        ScenarioErrorKind::InvalidValue {
                            key,
                            message: format!("{:?} is not a number", tokens[0]),
                        },
                    ));
                    continue;
                };
                if !value.is_finite() {
                    errors.push(err(
                        line,
                        ScenarioErrorKind::InvalidValue {
                            key,
                            message: "value must be finite".into(),
                        },
                    ));
                    continue;
                }
                let unit = tokens.get(1).cloned().unwrap_or_default();
                let ok = if unit.is_empty() {
                    dim == Dimension::Dimensionless
                } else {
                    lookup(&unit).is_some_and(|(d, _)| d == dim)
                };
                if !ok {
                    errors.push(err(
                        line,
                        ScenarioErrorKind::UnitMismatch {
                            key,
                            unit,
                            expected: dim.si_symbol().to_string(),
                        },
                    ));
                    continue;
                }
                parameters.push((key, Value::Number { value, unit }));
            }
            KeyType::Word(allowed) => {
                if tokens.len() != 1 || !allowed.contains(&tokens[0].as_str()) {
                    errors.push(err(
                        line,
                        ScenarioErrorKind::InvalidValue {
                            key,
                            message: format!("expected one of {}", allowed.join(", ")),
                        },
                    ));
                    continue;
                }
                parameters.push((key, Value::Word(tokens[0].clone())));
            }
            KeyType::Path => {
                if tokens.len() != 1 {
                    errors.push(err(
                        line,
                        ScenarioErrorKind::InvalidValue {
                            key,
                            message: "expected a single path".into(),
                        },
                    ));
                    continue;
                }
                parameters.push((key, Value::Word(tokens[0].clone())));
            }
        }
    }

    for spec in keys.iter().filter(|k| k.required) {
        if !seen.iter().any(|k| k == spec.name) {
            errors.push(err(None, ScenarioErrorKind::MissingKey(spec.name.to_string())));
        }
    }

    if errors.is_empty() {
        Ok(Scenario { kind, parameters })
    } else {
        Err(errors)
    }
}

impl Scenario {
    fn value(&self, key: &str) -> Option<&Value> {
        self.parameters.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Value converted to SI, if present.
    pub fn si(&self, key: &str) -> Option<f64> {
        match self.value(key)? {
            Value::Number { value, unit } if unit.is_empty() => Some(*value),
            Value::Number { value, unit } => lookup(unit).map(|(_, f)| value * f),
            Value::Word(_) => None,
        }
    }

    pub fn si_or(&self, key: &str, default: f64) -> f64 {
        self.si(key).unwrap_or(default)
    }

    pub fn word(&self, key: &str) -> Option<&str> {
        match self.value(key)? {
            Value::Word(w) => Some(w),
            Value::Number { .. } => None,
        }
    }

    /// Renders back to the line format; `parse_scenario(render())` returns
    /// an equal scenario.
    pub fn render(&self) -> String {
        let mut out = format!("kind = {}\n", self.kind.name());
        for (k, v) in &self.parameters {
            match v {
                Value::Number { value, unit } if unit.is_empty() => out.push_str(&format!("{k} = {value:e}\n")),
                Value::Number { value, unit } => out.push_str(&format!("{k} = {value:e} {unit}\n")),
                Value::Word(w) => out.push_str(&format!("{k} = {w}\n")),
            }
        }
        out
    }
}
