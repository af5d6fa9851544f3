//! Reference fixtures and report comparison.
//!
//! An expected-values file has one row per key:
//!
//! ```text
//! # key        published unit  tolerance  derived
//! nu_c         76e3      Hz    default    7.633719e4
//! ```
//!
//! `published` is the quoted estimate and `derived` the value recomputed
//! from the closed-form expressions; `-` marks a missing value. The
//! tolerance is `default` (looked up in [`default_tolerance`]), `rel:<x>`,
//! `decade`, or `atmost` (the reported value must not exceed `published`).

use crate::run::{run_scenario, RunContext, RunError};
use crate::scenario::parse_scenario;
use moltrap_core::Report;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::{self, Write};
use thiserror::Error;

/// Relative tolerance used by the strict profile against derived values.
pub const STRICT_TOLERANCE: f64 = 1e-5;

/// Slack on relative bounds so a value exactly on the boundary passes
/// despite rounding.
const BOUNDARY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// |value − expected| ≤ x·|expected|.
    Rel(f64),
    /// value rounds to the same power of ten as expected.
    Decade,
    /// |value| ≤ expected.
    AtMost,
}

impl Tolerance {
    pub fn check(self, value: f64, expected: f64) -> bool {
        match self {
            Tolerance::Rel(x) => (value - expected).abs() <= x * (1.0 + BOUNDARY_SLACK) * expected.abs(),
            Tolerance::Decade => value > 0.0 && expected > 0.0 && (value / expected).log10().abs() <= 0.5,
            Tolerance::AtMost => value.abs() <= expected,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Rel(x) => write!(f, "rel {x:e}"),
            Tolerance::Decade => write!(f, "decade"),
            Tolerance::AtMost => write!(f, "at most"),
        }
    }
}

/// Tolerance applied to a key when neither the fixture nor the caller
/// gives one.
///
/// | key | tolerance |
/// |---|---|
/// | nu_c, thermal_speed_v, rotation_omega, larmor_nu_s | rel 2% |
/// | axial_amplitude_A | rel 10% |
/// | spring_k | rel 1% |
/// | orbit_diameter | rel 20% |
/// | phonon_nu_p | decade |
/// | spin_force | rel 1e-12 |
/// | anything else | rel 1e-3 |
pub fn default_tolerance(key: &str) -> Tolerance {
    match key {
        "nu_c" | "thermal_speed_v" | "rotation_omega" | "larmor_nu_s" => Tolerance::Rel(0.02),
        "axial_amplitude_A" => Tolerance::Rel(0.10),
        "spring_k" => Tolerance::Rel(0.01),
        "orbit_diameter" => Tolerance::Rel(0.20),
        "phonon_nu_p" => Tolerance::Decade,
        "spin_force" => Tolerance::Rel(1e-12),
        _ => Tolerance::Rel(1e-3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Compare against published estimates.
    Paper,
    /// Compare against recomputed values at [`STRICT_TOLERANCE`].
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedRow {
    pub key: String,
    pub published: Option<f64>,
    pub unit: String,
    /// `None` means the default table applies.
    pub tolerance: Option<Tolerance>,
    pub derived: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub rows: Vec<ExpectedRow>,
}

impl Fixture {
    /// Explicit tolerances listed in the fixture.
    pub fn tolerances(&self) -> BTreeMap<String, Tolerance> {
        self.rows
            .iter()
            .filter_map(|r| r.tolerance.map(|t| (r.key.clone(), t)))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixtureError {
    #[error("report lacks fixture keys: {}", .0.join(", "))]
    KeyMismatch(Vec<String>),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("fixture {name}: scenario failed: {source}")]
    Scenario { name: String, source: RunError },
}

fn optional_number(token: &str, line: usize) -> Result<Option<f64>, FixtureError> {
    if token == "-" {
        return Ok(None);
    }
    token.parse().map(Some).map_err(|_| FixtureError::Malformed {
        line,
        message: format!("{token:?} is not a number"),
    })
}

pub fn parse_expected(name: &str, text: &str) -> Result<Fixture, FixtureError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let cols: Vec<&str> = content.split_whitespace().collect();
        let [key, published, unit, tolerance, derived] = cols[..] else {
            return Err(FixtureError::Malformed {
                line: line_no,
                message: format!("expected 5 columns, found {}", cols.len()),
            });
        };
        let tolerance = match tolerance {
            "default" => None,
            "decade" => Some(Tolerance::Decade),
            "atmost" => Some(Tolerance::AtMost),
            t => match t.strip_prefix("rel:").and_then(|x| x.parse::<f64>().ok()) {
                Some(x) if x >= 0.0 => Some(Tolerance::Rel(x)),
                _ => {
                    return Err(FixtureError::Malformed {
                        line: line_no,
                        message: format!("unknown tolerance {t:?}"),
                    })
                }
            },
        };
        rows.push(ExpectedRow {
            key: key.to_string(),
            published: optional_number(published, line_no)?,
            unit: if unit == "-" { String::new() } else { unit.to_string() },
            tolerance,
            derived: optional_number(derived, line_no)?,
        });
    }
    Ok(Fixture {
        name: name.to_string(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub key: String,
    pub value: f64,
    pub expected: f64,
    pub unit: String,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl Verdict {
    pub fn relative_error(&self) -> f64 {
        ((self.value - self.expected) / self.expected).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub fixture: String,
    pub verdicts: Vec<Verdict>,
}

impl Comparison {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.verdicts.iter().filter(|v| !v.pass).map(|v| v.key.as_str()).collect()
    }
}

/// Checks every fixture row the profile has a reference value for.
/// Keys absent from `tolerances` fall back to [`default_tolerance`]; pass
/// [`Fixture::tolerances`] to honour the fixture's own column.
pub fn compare_to_fixture(
    report: &Report,
    fixture: &Fixture,
    tolerances: &BTreeMap<String, Tolerance>,
    profile: Profile,
) -> Result<Comparison, FixtureError> {
    let missing: Vec<String> = fixture
        .rows
        .iter()
        .filter(|r| report.get(&r.key).is_none())
        .map(|r| r.key.clone())
        .collect();
    if !missing.is_empty() {
        return Err(FixtureError::KeyMismatch(missing));
    }
    let mut verdicts = Vec::new();
    for row in &fixture.rows {
        let value = report.get(&row.key).expect("checked above");
        let tolerance = tolerances.get(&row.key).copied().unwrap_or_else(|| default_tolerance(&row.key));
        let reference = match profile {
            Profile::Paper => row.published.map(|p| (p, tolerance)),
            Profile::Strict => match (row.derived, tolerance) {
                (Some(d), _) => Some((d, Tolerance::Rel(STRICT_TOLERANCE))),
                (None, Tolerance::AtMost) => row.published.map(|p| (p, tolerance)),
                (None, _) => None,
            },
        };
        if let Some((expected, tolerance)) = reference {
            verdicts.push(Verdict {
                key: row.key.clone(),
                value,
                expected,
                unit: row.unit.clone(),
                tolerance,
                pass: tolerance.check(value, expected),
            });
        }
    }
    Ok(Comparison {
        fixture: fixture.name.clone(),
        verdicts,
    })
}

/// A scenario shipped with the crate together with its expected values.
pub struct ReferenceFixture {
    pub name: &'static str,
    pub scenario: &'static str,
    pub expected: &'static str,
}

macro_rules! reference_fixture {
    ($name:literal) => {
        ReferenceFixture {
            name: $name,
            scenario: include_str!(concat!("../fixtures/", $name, ".scenario")),
            expected: include_str!(concat!("../fixtures/", $name, ".expected")),
        }
    };
}

pub const REFERENCE_FIXTURES: &[ReferenceFixture] = &[
    reference_fixture!("paper_ion"),
    reference_fixture!("paper_readout"),
    reference_fixture!("paper_optical"),
    reference_fixture!("paper_optical_calibration"),
    reference_fixture!("paper_protocol"),
];

impl ReferenceFixture {
    pub fn run(&self, profile: Profile) -> Result<Comparison, FixtureError> {
        let scenario = parse_scenario(self.scenario).map_err(|errs| FixtureError::Scenario {
            name: self.name.to_string(),
            source: RunError::Validation(errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")),
        })?;
        let out = run_scenario(&scenario, &RunContext::default()).map_err(|source| FixtureError::Scenario {
            name: self.name.to_string(),
            source,
        })?;
        let fixture = parse_expected(self.name, self.expected)?;
        compare_to_fixture(&out.report, &fixture, &fixture.tolerances(), profile)
    }
}

/// Runs every shipped fixture.
pub fn verify_all(profile: Profile) -> Result<Vec<Comparison>, FixtureError> {
    REFERENCE_FIXTURES.iter().map(|f| f.run(profile)).collect()
}

pub fn render_table(comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26} {:<20} {:>14} {:>14} {:<7} {:<12} {:>11}  verdict",
        "fixture", "key", "value", "expected", "unit", "tolerance", "rel_error"
    );
    let mut passed = 0;
    let mut total = 0;
    for c in comparisons {
        for v in &c.verdicts {
            total += 1;
            passed += usize::from(v.pass);
            let _ = writeln!(
                out,
                "{:<26} {:<20} {:>14.6e} {:>14.6e} {:<7} {:<12} {:>11}  {}",
                c.fixture,
                v.key,
                v.value,
                v.expected,
                v.unit,
                v.tolerance.to_string(),
                match v.tolerance {
                    Tolerance::AtMost => "-".to_string(),
                    _ => format!("{:.3e}", v.relative_error()),
                },
                if v.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    let overall = if passed == total { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "overall: {overall} ({passed}/{total} checks)");
    out
}

pub fn render_json(comparisons: &[Comparison]) -> String {
    let fixtures: Vec<serde_json::Value> = comparisons
        .iter()
        .map(|c| {
            let checks: Vec<serde_json::Value> = c
                .verdicts
                .iter()
                .map(|v| {
                    json!({
                        "key": v.key,
                        "value": v.value,
                        "expected": v.expected,
                        "unit": v.unit,
                        "tolerance": v.tolerance.to_string(),
                        "pass": v.pass,
                    })
                })
                .collect();
            json!({ "fixture": c.fixture, "pass": c.pass(), "checks": checks })
        })
        .collect();
    let doc = json!({
        "pass": comparisons.iter().all(Comparison::pass),
        "fixtures": fixtures,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("comparison values are always serializable");
    s.push('\n');
    s
}
