//! Pinned physical constants.
//!
//! Proton mass, nuclear magneton and the inter-nuclear length scale are
//! fixed at the three-significant-figure values used throughout the
//! trapped-molecule estimates, so derived numbers regress bit-for-bit.
//! The remaining constants carry CODATA values. Scenarios cannot override
//! any of them.

/// The constant set shared by every model in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Proton rest mass, kg.
    pub proton_mass: f64,
    /// Nuclear magneton, J/T.
    pub nuclear_magneton: f64,
    /// Proton magnetic moment, J/T.
    pub proton_moment: f64,
    /// Electron-scale moment (Bohr magneton), J/T.
    pub bohr_magneton: f64,
    /// Quarter of the typical nearest-neighbour nuclear separation, m.
    pub bohr_spacing_a0: f64,
    /// Planck constant, J s.
    pub planck_h: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann_kb: f64,
    /// Elementary charge, C.
    pub elementary_charge: f64,
    /// Standard gravity, m/s^2.
    pub standard_gravity: f64,
}

/// Typical separation between adjacent nuclei, m. `a0` is a quarter of it.
pub const NUCLEAR_SEPARATION: f64 = 2.12e-10;

const PINNED: PhysicalConstants = PhysicalConstants {
    proton_mass: 1.67e-27,
    nuclear_magneton: 5.05e-27,
    proton_moment: 1.410e-26,
    bohr_magneton: 9.274e-24,
    bohr_spacing_a0: NUCLEAR_SEPARATION / 4.0,
    planck_h: 6.62607e-34,
    boltzmann_kb: 1.380649e-23,
    elementary_charge: 1.602e-19,
    standard_gravity: 9.8,
};

/// Returns the pinned constant set.
pub const fn constants() -> PhysicalConstants {
    PINNED
}

#[cfg(test)]
impl PhysicalConstants {
    pub(crate) fn all_values(&self) -> [f64; 9] {
        [
            self.proton_mass,
            self.nuclear_magneton,
            self.proton_moment,
            self.bohr_magneton,
            self.bohr_spacing_a0,
            self.planck_h,
            self.boltzmann_kb,
            self.elementary_charge,
            self.standard_gravity,
        ]
    }
}
