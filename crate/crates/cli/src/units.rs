//! Unit symbols accepted in scenario files and their SI scale factors.

use moltrap_core::constants;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Mass,
    Length,
    Time,
    Frequency,
    Field,
    Gradient,
    Force,
    Stiffness,
    Temperature,
    Speed,
    Charge,
    Moment,
}

impl Dimension {
    /// SI unit used in reports and error messages.
    pub fn si_symbol(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "",
            Dimension::Mass => "kg",
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Frequency => "Hz",
            Dimension::Field => "T",
            Dimension::Gradient => "T/m",
            Dimension::Force => "N",
            Dimension::Stiffness => "N/m",
            Dimension::Temperature => "K",
            Dimension::Speed => "m/s",
            Dimension::Charge => "C",
            Dimension::Moment => "J/T",
        }
    }
}

/// Looks up a unit symbol, returning its dimension and SI factor.
pub fn lookup(symbol: &str) -> Option<(Dimension, f64)> {
    use Dimension::*;
    let c = constants();
    Some(match symbol {
        "kg" => (Mass, 1.0),
        "g" => (Mass, 1e-3),
        "m_p" => (Mass, c.proton_mass),
        "m" => (Length, 1.0),
        "mm" => (Length, 1e-3),
        "um" | "µm" => (Length, 1e-6),
        "nm" => (Length, 1e-9),
        "pm" => (Length, 1e-12),
        "s" => (Time, 1.0),
        "ms" => (Time, 1e-3),
        "us" | "µs" => (Time, 1e-6),
        "ns" => (Time, 1e-9),
        "Hz" => (Frequency, 1.0),
        "kHz" => (Frequency, 1e3),
        "MHz" => (Frequency, 1e6),
        "GHz" => (Frequency, 1e9),
        "T" => (Field, 1.0),
        "mT" => (Field, 1e-3),
        "G" => (Field, 1e-4),
        "T/m" => (Gradient, 1.0),
        "T/mm" => (Gradient, 1e3),
        "G/cm" => (Gradient, 1e-2),
        "N" => (Force, 1.0),
        "pN" => (Force, 1e-12),
        "fN" => (Force, 1e-15),
        "aN" => (Force, 1e-18),
        "N/m" => (Stiffness, 1.0),
        "K" => (Temperature, 1.0),
        "mK" => (Temperature, 1e-3),
        "m/s" => (Speed, 1.0),
        "C" => (Charge, 1.0),
        "e" => (Charge, c.elementary_charge),
        "J/T" => (Moment, 1.0),
        "mu_N" => (Moment, c.nuclear_magneton),
        "mu_p" => (Moment, c.proton_moment),
        "mu_B" => (Moment, c.bohr_magneton),
        _ => return None,
    })
}
