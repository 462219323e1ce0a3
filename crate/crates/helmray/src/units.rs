//! Unit normalization and the shared constant bundle.
//!
//! Internal units fix `hbar = 1`, `m = 1` (rest mass in the relativistic
//! regime) and `w0 = 1`. The single dimensionless input is the beam
//! parameter `lambda0 / w0`; everything else is derived from it.

use crate::error::{Result, SimError};

use std::f64::consts::PI;

/// Which Hamiltonian system the run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// Kinematic optics system: rays of the classical Helmholtz equation.
    Optics,
    /// Non-relativistic particles (time-independent Schroedinger).
    NonRelativistic,
    /// Relativistic particles (time-independent Klein-Gordon).
    Relativistic,
}

impl RegimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::Optics => "optics",
            RegimeKind::NonRelativistic => "nonrelativistic",
            RegimeKind::Relativistic => "relativistic",
        }
    }

    pub fn parse(s: &str) -> Option<RegimeKind> {
        match s {
            "optics" => Some(RegimeKind::Optics),
            "nonrelativistic" => Some(RegimeKind::NonRelativistic),
            "relativistic" => Some(RegimeKind::Relativistic),
            _ => None,
        }
    }
}

/// Normalization constants shared by every module.
///
/// Immutable after construction; safe to share read-only.
#[derive(Debug, Clone, Copy)]
pub struct UnitSystem {
    pub regime: RegimeKind,
    /// The beam parameter lambda0 / w0, the run's only dimensionless knob.
    pub lambda0_over_w0: f64,
    pub hbar: f64,
    /// Particle mass; rest mass m0 in the relativistic regime (0 for
    /// massless particles).
    pub mass: f64,
    pub c: f64,
    pub w0: f64,
    /// Launch momentum p0 = 2 pi hbar / lambda0.
    pub p0: f64,
    /// Launch energy in the regime's own convention (V = 0 baseline).
    pub energy: f64,
    /// epsilon = lambda0 / (2 pi w0) = hbar / (p0 w0).
    pub epsilon: f64,
}

impl UnitSystem {
    /// Vacuum wavenumber k0 = 2 pi / lambda0 (= p0 / hbar).
    pub fn k0(&self) -> f64 {
        self.p0 / self.hbar
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0_over_w0 * self.w0
    }

    /// Relativistic units for a massless particle (m0 = 0, c = 1).
    pub fn massless(lambda0_over_w0: f64) -> Result<UnitSystem> {
        if !(lambda0_over_w0 > 0.0) {
            return Err(SimError::Config(format!(
                "lambda0_over_w0 must be > 0, got {lambda0_over_w0}"
            )));
        }
        let p0 = 2.0 * PI / lambda0_over_w0;
        Ok(UnitSystem {
            regime: RegimeKind::Relativistic,
            lambda0_over_w0,
            hbar: 1.0,
            mass: 0.0,
            c: 1.0,
            w0: 1.0,
            p0,
            energy: p0, // E = p0 c with c = 1
            epsilon: lambda0_over_w0 / (2.0 * PI),
        })
    }
}

/// Builds the unit bundle for a regime.
///
/// `pc_over_rest_energy` = p0 c / (m0 c^2) fixes the relativistic scale and
/// is required (and must be > 0) for the massive relativistic regime; use
/// [`UnitSystem::massless`] for m0 = 0.
pub fn make_unit_system(
    lambda0_over_w0: f64,
    regime: RegimeKind,
    pc_over_rest_energy: Option<f64>,
) -> Result<UnitSystem> {
    if !(lambda0_over_w0 > 0.0) {
        return Err(SimError::Config(format!(
            "lambda0_over_w0 must be > 0, got {lambda0_over_w0}"
        )));
    }
    let hbar = 1.0;
    let w0 = 1.0;
    let mass = 1.0;
    let lambda0 = lambda0_over_w0 * w0;
    let p0 = 2.0 * PI * hbar / lambda0;
    let epsilon = lambda0_over_w0 / (2.0 * PI);

    let (c, energy) = match regime {
        RegimeKind::Optics => {
            // hbar omega with omega = c k0; c normalized to 1.
            let c = 1.0;
            (c, hbar * c * p0 / hbar)
        }
        RegimeKind::NonRelativistic => (1.0, p0 * p0 / (2.0 * mass)),
        RegimeKind::Relativistic => {
            let ratio = pc_over_rest_energy.ok_or_else(|| {
                SimError::Config(
                    "relativistic regime requires pc_over_rest_energy (or a massless unit system)"
                        .into(),
                )
            })?;
            if !(ratio > 0.0) {
                return Err(SimError::Config(format!(
                    "pc_over_rest_energy must be > 0, got {ratio}"
                )));
            }
            let c = p0 / (mass * ratio);
            let rest = mass * c * c;
            (c, (p0 * c * (p0 * c) + rest * rest).sqrt())
        }
    };

    Ok(UnitSystem {
        regime,
        lambda0_over_w0,
        hbar,
        mass,
        c,
        w0,
        p0,
        energy,
        epsilon,
    })
}

/// Rayleigh length z_R = pi w0^2 / lambda0.
pub fn rayleigh_length(u: &UnitSystem) -> f64 {
    PI * u.w0 * u.w0 / u.lambda0()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn epsilon_from_figure_ratio() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        assert!((u.epsilon - 3.1831e-5).abs() < 1e-9);
    }

    #[test]
    fn epsilon_is_one_at_two_pi() {
        let u = make_unit_system(2.0 * PI, RegimeKind::NonRelativistic, None).unwrap();
        assert!(rel_err(u.epsilon, 1.0) < 1e-15);
    }

    #[test]
    fn p0_for_figure_ratio() {
        // p0 = 2 pi / (lambda0/w0) = 2 pi / 2e-4
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        assert!((u.p0 - 31415.93).abs() < 0.01);
    }

    #[test]
    fn p0_lambda0_identity() {
        for ratio in [2e-4, 0.05, 1.0, 2.0 * PI, 17.3] {
            let u = make_unit_system(ratio, RegimeKind::NonRelativistic, None).unwrap();
            assert!(rel_err(u.p0 * u.lambda0() / (2.0 * PI * u.hbar), 1.0) < 1e-15);
        }
    }

    #[test]
    fn launch_energy_relations() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        assert!(rel_err(u.energy, u.p0 * u.p0 / (2.0 * u.mass)) <= 1e-12);

        let u = make_unit_system(2e-4, RegimeKind::Relativistic, Some(0.1)).unwrap();
        let rest = u.mass * u.c * u.c;
        assert!(rel_err(u.energy, ((u.p0 * u.c).powi(2) + rest * rest).sqrt()) <= 1e-12);
        assert!(rel_err(u.p0 * u.c / rest, 0.1) <= 1e-12);

        let u = UnitSystem::massless(2e-4).unwrap();
        assert!(rel_err(u.energy, u.p0 * u.c) <= 1e-12);
    }

    #[test]
    fn rayleigh_length_values() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        assert!((rayleigh_length(&u) - 15707.96).abs() < 0.01);

        // lambda0 = pi w0  =>  z_R = w0
        let u = make_unit_system(PI, RegimeKind::NonRelativistic, None).unwrap();
        assert!(rel_err(rayleigh_length(&u), u.w0) < 1e-15);

        // lambda0 = 2 pi w0  =>  z_R = w0 / 2
        let u = make_unit_system(2.0 * PI, RegimeKind::NonRelativistic, None).unwrap();
        assert!(rel_err(rayleigh_length(&u), 0.5 * u.w0) < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_unit_system(0.0, RegimeKind::NonRelativistic, None).is_err());
        assert!(make_unit_system(-1.0, RegimeKind::Optics, None).is_err());
        assert!(make_unit_system(2e-4, RegimeKind::Relativistic, None).is_err());
        assert!(make_unit_system(2e-4, RegimeKind::Relativistic, Some(0.0)).is_err());
    }
}
