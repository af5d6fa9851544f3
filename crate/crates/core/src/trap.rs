//! Static parameters of a trapped molecular ion or an optically levitated
//! particle: mass, size, inertia, stiffness and the frequency ladder.

use crate::constants::{constants, PhysicalConstants};
use crate::report::Report;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error("charge is zero: a neutral species cannot be held in an ion trap")]
    ZeroCharge,
    #[error("inconsistent optical trap: give either a stiffness or a calibration, not both")]
    InconsistentSpec,
    #[error("invalid trap specification: {0}")]
    InvalidSpec(String),
}

/// Warning attached to a report when the cyclotron frequency is below the
/// axial frequency.
pub const INADEQUATE_RADIAL_CONFINEMENT: &str =
    "inadequate radial confinement (nu_c < nu_z): an additional radial potential is required";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeSpec {
    pub nucleus_count: u32,
    /// Net charge, C.
    pub charge: f64,
    /// Effective sound speed, m/s.
    pub sound_speed: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Moment of the spin species whose Larmor frequency is reported, J/T.
    pub spin_moment: f64,
}

impl MoleculeSpec {
    /// Singly charged molecule at 4.2 K with a 10^3 m/s sound speed.
    pub fn new(nucleus_count: u32) -> Self {
        let c = constants();
        MoleculeSpec {
            nucleus_count,
            charge: c.elementary_charge,
            sound_speed: 1e3,
            temperature: 4.2,
            spin_moment: c.nuclear_magneton,
        }
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        if self.nucleus_count < 1 {
            return Err(TrapError::InvalidSpec("nucleus count must be at least 1".into()));
        }
        if !(self.sound_speed > 0.0 && self.sound_speed.is_finite()) {
            return Err(TrapError::InvalidSpec("sound speed must be positive".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(TrapError::InvalidSpec("temperature must be positive".into()));
        }
        if !self.charge.is_finite() || !self.spin_moment.is_finite() {
            return Err(TrapError::InvalidSpec("charge and moment must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonTrapSpec {
    /// Trapping field, T.
    pub field_b: f64,
    /// Axial frequency, Hz. Taken as a calibration input.
    pub axial_frequency: f64,
}

impl IonTrapSpec {
    pub fn validate(&self) -> Result<(), TrapError> {
        if !(self.field_b > 0.0 && self.field_b.is_finite()) {
            return Err(TrapError::InvalidSpec("field B must be positive".into()));
        }
        if !(self.axial_frequency > 0.0 && self.axial_frequency.is_finite()) {
            return Err(TrapError::InvalidSpec("axial frequency must be positive".into()));
        }
        Ok(())
    }
}

/// Stiffness calibration: a force equal to `weight_fraction` of the
/// particle's weight moves it by `displacement`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightCalibration {
    pub weight_fraction: f64,
    pub displacement: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalTrapSpec {
    pub particle_mass: f64,
    pub stiffness: Option<f64>,
    pub calibration: Option<WeightCalibration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapReport {
    pub mass: f64,
    pub nu_z: f64,
    pub spring_k: f64,
    pub radius: Option<f64>,
    pub inertia: Option<f64>,
    pub nu_c: Option<f64>,
    pub thermal_speed: Option<f64>,
    pub axial_amplitude: Option<f64>,
    pub orbit_diameter: Option<f64>,
    pub rotation_omega: Option<f64>,
    pub phonon_nu_p: Option<f64>,
    pub larmor_nu_s: Option<f64>,
    pub warnings: Vec<String>,
}

impl TrapReport {
    pub fn to_report(&self, title: &str) -> Report {
        let mut r = Report::new(title);
        r.push("mass_M", self.mass, "kg");
        let optional = [
            ("radius_R", self.radius, "m"),
            ("inertia_I", self.inertia, "kg m^2"),
            ("nu_c", self.nu_c, "Hz"),
        ];
        for (k, v, u) in optional {
            if let Some(v) = v {
                r.push(k, v, u);
            }
        }
        r.push("nu_z", self.nu_z, "Hz");
        r.push("spring_k", self.spring_k, "N/m");
        let optional = [
            ("thermal_speed_v", self.thermal_speed, "m/s"),
            ("axial_amplitude_A", self.axial_amplitude, "m"),
            ("orbit_diameter", self.orbit_diameter, "m"),
            ("rotation_omega", self.rotation_omega, "rad/s"),
            ("phonon_nu_p", self.phonon_nu_p, "Hz"),
            ("larmor_nu_s", self.larmor_nu_s, "Hz"),
        ];
        for (k, v, u) in optional {
            if let Some(v) = v {
                r.push(k, v, u);
            }
        }
        for w in &self.warnings {
            r.flag(w.clone());
        }
        r
    }
}

/// M = 10 N m_p.
pub fn molecule_mass(spec: &MoleculeSpec) -> f64 {
    10.0 * f64::from(spec.nucleus_count) * constants().proton_mass
}

/// R = 2.52 N^(1/3) a0, a near-spherical molecule.
pub fn molecule_radius(spec: &MoleculeSpec) -> f64 {
    2.52 * f64::from(spec.nucleus_count).cbrt() * constants().bohr_spacing_a0
}

/// I = 25.4 N^(5/3) m_p a0^2, the sphere value 2MR^2/5 with the
/// coefficient rounded to 25.4.
pub fn molecule_inertia(spec: &MoleculeSpec) -> f64 {
    let c = constants();
    25.4 * f64::from(spec.nucleus_count).powf(5.0 / 3.0) * c.proton_mass * c.bohr_spacing_a0.powi(2)
}

/// nu_c = |q| B / (2 pi M).
pub fn cyclotron_frequency(spec: &MoleculeSpec, trap: &IonTrapSpec) -> Result<f64, TrapError> {
    if spec.charge == 0.0 {
        return Err(TrapError::ZeroCharge);
    }
    Ok(spec.charge.abs() * trap.field_b / (2.0 * PI * molecule_mass(spec)))
}

/// k = M (2 pi nu)^2.
pub fn spring_constant(mass: f64, frequency: f64) -> f64 {
    mass * (2.0 * PI * frequency).powi(2)
}

/// Force on a moment in a field gradient, signed.
pub fn spin_force(moment: f64, gradient: f64) -> f64 {
    moment * gradient
}

/// Spin precession frequency 2 mu B / h.
pub fn larmor_frequency(moment: f64, field_b: f64) -> f64 {
    2.0 * moment * field_b / constants().planck_h
}

/// v = sqrt(2 k_B T / M).
fn thermal_speed(c: &PhysicalConstants, temperature: f64, mass: f64) -> f64 {
    (2.0 * c.boltzmann_kb * temperature / mass).sqrt()
}

pub fn derive_ion_trap(spec: &MoleculeSpec, trap: &IonTrapSpec) -> Result<TrapReport, TrapError> {
    spec.validate()?;
    trap.validate()?;
    let c = constants();
    let nu_c = cyclotron_frequency(spec, trap)?;
    let mass = molecule_mass(spec);
    let radius = molecule_radius(spec);
    let inertia = molecule_inertia(spec);
    let nu_z = trap.axial_frequency;

    let v = thermal_speed(&c, spec.temperature, mass);
    let omega_rot = (2.0 * c.boltzmann_kb * spec.temperature / inertia).sqrt();

    let mut warnings = Vec::new();
    if nu_c < nu_z {
        warnings.push(INADEQUATE_RADIAL_CONFINEMENT.to_string());
    }

    Ok(TrapReport {
        mass,
        nu_z,
        spring_k: spring_constant(mass, nu_z),
        radius: Some(radius),
        inertia: Some(inertia),
        nu_c: Some(nu_c),
        thermal_speed: Some(v),
        axial_amplitude: Some(v / (2.0 * PI * nu_z)),
        // cyclotron orbit diameter 2v/(2 pi nu_c)
        orbit_diameter: Some(v / (PI * nu_c)),
        rotation_omega: Some(omega_rot),
        phonon_nu_p: Some(spec.sound_speed / radius),
        larmor_nu_s: Some(larmor_frequency(spec.spin_moment, trap.field_b)),
        warnings,
    })
}

/// Stiffness implied by a weight-fraction calibration.
pub fn calibrated_stiffness(particle_mass: f64, cal: &WeightCalibration) -> f64 {
    cal.weight_fraction * particle_mass * constants().standard_gravity / cal.displacement
}

pub fn derive_optical_trap(spec: &OpticalTrapSpec) -> Result<TrapReport, TrapError> {
    if !(spec.particle_mass > 0.0 && spec.particle_mass.is_finite()) {
        return Err(TrapError::InvalidSpec("particle mass must be positive".into()));
    }
    let k = match (spec.stiffness, spec.calibration) {
        (Some(_), Some(_)) => return Err(TrapError::InconsistentSpec),
        (None, None) => {
            return Err(TrapError::InvalidSpec(
                "either a stiffness or a weight calibration is required".into(),
            ))
        }
        (Some(k), None) => k,
        (None, Some(cal)) => {
            if !(cal.weight_fraction > 0.0 && cal.displacement > 0.0) {
                return Err(TrapError::InvalidSpec(
                    "calibration weight fraction and displacement must be positive".into(),
                ));
            }
            calibrated_stiffness(spec.particle_mass, &cal)
        }
    };
    if !(k > 0.0 && k.is_finite()) {
        return Err(TrapError::InvalidSpec("stiffness must be positive".into()));
    }
    let nu_z = (k / spec.particle_mass).sqrt() / (2.0 * PI);
    Ok(TrapReport {
        mass: spec.particle_mass,
        nu_z,
        spring_k: k,
        radius: None,
        inertia: None,
        nu_c: None,
        thermal_speed: None,
        axial_amplitude: None,
        orbit_diameter: None,
        rotation_omega: None,
        phonon_nu_p: None,
        larmor_nu_s: None,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn paper_ion() -> (MoleculeSpec, IonTrapSpec) {
        (
            MoleculeSpec::new(100),
            IonTrapSpec {
                field_b: 5.0,
                axial_frequency: 318e3,
            },
        )
    }

    #[test]
    fn mass_examples() {
        assert!(rel(molecule_mass(&MoleculeSpec::new(100)), 1.67e-24) < 1e-12);
        assert!(rel(molecule_mass(&MoleculeSpec::new(1)), 1.67e-26) < 1e-12);
        assert!(rel(molecule_mass(&MoleculeSpec::new(1000)), 1.67e-23) < 1e-12);
    }

    #[test]
    fn radius_examples() {
        assert!(rel(molecule_radius(&MoleculeSpec::new(100)), 6.20e-10) < 1e-3);
        assert!(rel(molecule_radius(&MoleculeSpec::new(1)), 1.3356e-10) < 1e-9);
        let r1 = molecule_radius(&MoleculeSpec::new(1));
        let r8 = molecule_radius(&MoleculeSpec::new(8));
        assert!(rel(r8, 2.0 * r1) < 1e-12);
    }

    #[test]
    fn inertia_examples() {
        assert!(rel(molecule_inertia(&MoleculeSpec::new(100)), 2.567e-43) < 1e-3);
        assert!(rel(molecule_inertia(&MoleculeSpec::new(1)), 1.1915e-46) < 1e-4);
        for n in [1, 10, 100, 1000] {
            let s = MoleculeSpec::new(n);
            let sphere = 0.4 * molecule_mass(&s) * molecule_radius(&s).powi(2);
            assert!(rel(molecule_inertia(&s), sphere) < 0.002, "N={n}");
        }
    }

    #[test]
    fn cyclotron_examples() {
        let (m, t) = paper_ion();
        let nu_c = cyclotron_frequency(&m, &t).unwrap();
        assert!(rel(nu_c, 76e3) < 0.02);
        assert!(rel(nu_c, 7.634e4) < 1e-3);
        let zero_b = IonTrapSpec { field_b: 0.0, ..t };
        assert_eq!(cyclotron_frequency(&m, &zero_b).unwrap(), 0.0);
        let heavy = MoleculeSpec::new(400);
        assert!(rel(cyclotron_frequency(&heavy, &t).unwrap(), 1.9084e4) < 1e-3);
    }

    #[test]
    fn zero_charge_rejected() {
        let (mut m, t) = paper_ion();
        m.charge = 0.0;
        assert_eq!(cyclotron_frequency(&m, &t), Err(TrapError::ZeroCharge));
        assert_eq!(derive_ion_trap(&m, &t), Err(TrapError::ZeroCharge));
    }

    #[test]
    fn ion_report_paper_values() {
        let (m, t) = paper_ion();
        let r = derive_ion_trap(&m, &t).unwrap();
        assert!(rel(r.thermal_speed.unwrap(), 8.3) < 0.01);
        assert!(rel(r.axial_amplitude.unwrap(), 4.17e-6) < 1e-3);
        assert!(rel(r.rotation_omega.unwrap(), 2.13e10) < 0.01);
        assert!(rel(r.larmor_nu_s.unwrap(), 7.62e7) < 1e-3);
        let ratio = r.phonon_nu_p.unwrap() / 1e12;
        assert!(ratio > 10f64.powf(-0.5) && ratio < 10f64.powf(0.5));
        assert!(rel(r.spring_k, 6.68e-12) < 0.01);
        assert!(rel(r.orbit_diameter.unwrap(), 30e-6) < 0.2);
        assert_eq!(r.warnings, vec![INADEQUATE_RADIAL_CONFINEMENT.to_string()]);
    }

    #[test]
    fn no_warning_when_radially_confined() {
        let (m, _) = paper_ion();
        let t = IonTrapSpec {
            field_b: 5.0,
            axial_frequency: 10e3,
        };
        assert!(derive_ion_trap(&m, &t).unwrap().warnings.is_empty());
    }

    #[test]
    fn optical_calibration_and_frequency() {
        let cal = OpticalTrapSpec {
            particle_mass: 2e-16,
            stiffness: None,
            calibration: Some(WeightCalibration {
                weight_fraction: 1e-6,
                displacement: 1e-5,
            }),
        };
        let r = derive_optical_trap(&cal).unwrap();
        assert!(rel(r.spring_k, 1.96e-16) < 1e-12);
        // exactly 2% low: 0.98 of the nominal value
        assert!(rel(r.spring_k, 2e-16) <= 0.02 + 1e-12);

        let direct = OpticalTrapSpec {
            particle_mass: 2e-16,
            stiffness: Some(2e-16),
            calibration: None,
        };
        let r1 = derive_optical_trap(&direct).unwrap();
        assert!(rel(r1.nu_z, 0.159) < 1e-3);
        let r4 = derive_optical_trap(&OpticalTrapSpec {
            stiffness: Some(8e-16),
            ..direct
        })
        .unwrap();
        assert!(rel(r4.nu_z, 2.0 * r1.nu_z) < 1e-12);
        assert!(r1.thermal_speed.is_none());
    }

    #[test]
    fn optical_both_or_neither_rejected() {
        let both = OpticalTrapSpec {
            particle_mass: 2e-16,
            stiffness: Some(2e-16),
            calibration: Some(WeightCalibration {
                weight_fraction: 1e-6,
                displacement: 1e-5,
            }),
        };
        assert_eq!(derive_optical_trap(&both), Err(TrapError::InconsistentSpec));
        let neither = OpticalTrapSpec {
            stiffness: None,
            calibration: None,
            ..both
        };
        assert!(matches!(derive_optical_trap(&neither), Err(TrapError::InvalidSpec(_))));
    }

    #[test]
    fn spin_force_examples() {
        let c = constants();
        assert!(rel(spin_force(c.nuclear_magneton, 100.0), 5.05e-25) < 1e-12);
        assert!(rel(spin_force(c.proton_moment, 500.0), 7.05e-24) < 1e-12);
        assert_eq!(spin_force(c.proton_moment, 0.0), 0.0);
    }

    #[test]
    fn static_deflections() {
        let (m, t) = paper_ion();
        let k = derive_ion_trap(&m, &t).unwrap().spring_k;
        let d = spin_force(constants().nuclear_magneton, 100.0) / k;
        assert!(rel(d, 7.56e-14) < 0.01);
        let d_opt = spin_force(constants().proton_moment, 500.0) / 2e-16;
        assert!(rel(d_opt, 3.53e-8) < 0.02);
        assert!(rel(d_opt, 35e-9) < 0.02);
    }

    #[test]
    fn spring_constant_identity() {
        let (m, t) = paper_ion();
        let r = derive_ion_trap(&m, &t).unwrap();
        assert_eq!(r.spring_k, r.mass * (2.0 * PI * r.nu_z).powi(2));
        let v = r.thermal_speed.unwrap();
        assert_eq!(r.axial_amplitude.unwrap(), v / (2.0 * PI * r.nu_z));
    }

    #[test]
    fn report_keys() {
        let (m, t) = paper_ion();
        let rep = derive_ion_trap(&m, &t).unwrap().to_report("ion");
        for key in [
            "mass_M",
            "radius_R",
            "inertia_I",
            "nu_c",
            "nu_z",
            "spring_k",
            "thermal_speed_v",
            "axial_amplitude_A",
            "orbit_diameter",
            "rotation_omega",
            "phonon_nu_p",
            "larmor_nu_s",
        ] {
            assert!(rep.get(key).is_some(), "{key}");
        }
        assert_eq!(rep.flags.len(), 1);
    }
}
