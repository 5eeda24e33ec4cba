//! Single-mode source model: emitter rates, efficiencies, and the combined
//! figure of merit.
//!
//! The source quality factorizes as epsilon = beta * gamma, with
//! beta = F_p/(F_p + Gamma_B/Gamma_Bulk) the fraction of spontaneous emission
//! captured by the cavity mode and gamma = gamma_L * T11 the transmission
//! from the cavity to the collection lens. The same cavity character also
//! fixes the quantum parameters (g, kappa) used by the master-equation
//! indistinguishability calculation: kappa = omega/Q and
//! g = (1/2) sqrt(F_p kappa Gamma_Bulk), chosen so that bad-cavity adiabatic
//! elimination reproduces the Purcell rate F_p * Gamma_Bulk exactly.

use crate::axial::CavityCharacter;
use crate::error::{Error, Result};
use crate::phonon::PhononEnv;

/// Speed of light in nm/s.
pub const C_NM_PER_S: f64 = 2.997_924_58e17;

/// Bulk spontaneous-emission rate default, s^-1 (typical self-assembled InAs
/// quantum dot; only sets the absolute time scale of the dynamics).
pub const GAMMA_BULK_DEFAULT: f64 = 1.0e9;

/// Background emission ratio Gamma_B/Gamma_Bulk default at the 114 nm design
/// waist (dielectric screening of radiation modes in the thin wire).
pub const GAMMA_B_RATIO_DEFAULT: f64 = 0.05;

/// Reference micropillar source performance, for comparison reporting only.
pub const MICROPILLAR_EPSILON: f64 = 0.95;
pub const MICROPILLAR_ETA: f64 = 0.997;

/// Emitter-cavity parameter set consumed by the quantum dynamics.
#[derive(Debug, Clone)]
pub struct EmitterCavityParams {
    /// coherent emitter-cavity coupling, rad/s
    pub g: f64,
    /// cavity field escape rate, rad/s
    pub kappa: f64,
    /// background (non-cavity) emitter decay rate, s^-1
    pub gamma_b: f64,
    /// bulk spontaneous-emission rate, s^-1
    pub gamma_bulk: f64,
    /// emitter-cavity detuning, rad/s
    pub detuning: f64,
    /// additional pure dephasing rate, s^-1
    pub gamma_pd: f64,
    pub phonon: PhononEnv,
}

impl EmitterCavityParams {
    pub fn new(
        g: f64,
        kappa: f64,
        gamma_b: f64,
        gamma_bulk: f64,
        detuning: f64,
        gamma_pd: f64,
        phonon: PhononEnv,
    ) -> Result<EmitterCavityParams> {
        if !(g >= 0.0 && kappa >= 0.0 && gamma_b >= 0.0 && gamma_pd >= 0.0) {
            return Err(Error::invalid("rates must be non-negative"));
        }
        if !(gamma_bulk > 0.0) {
            return Err(Error::invalid("bulk decay rate must be positive"));
        }
        if !detuning.is_finite() {
            return Err(Error::invalid("detuning must be finite"));
        }
        Ok(EmitterCavityParams { g, kappa, gamma_b, gamma_bulk, detuning, gamma_pd, phonon })
    }

    /// Resonant parameter set from a cavity characterization.
    pub fn from_cavity(
        character: &CavityCharacter,
        gamma_b_ratio: f64,
        gamma_bulk: f64,
        phonon: PhononEnv,
    ) -> Result<EmitterCavityParams> {
        let (g, kappa) = cavity_parameters(character, character.lambda_c, gamma_bulk)?;
        if !(gamma_b_ratio >= 0.0) {
            return Err(Error::invalid("background ratio must be >= 0"));
        }
        EmitterCavityParams::new(g, kappa, gamma_b_ratio * gamma_bulk, gamma_bulk, 0.0, 0.0, phonon)
    }
}

/// Combined per-design record: efficiency chain and indistinguishability.
#[derive(Debug, Clone)]
pub struct FigureOfMerit {
    /// design descriptor (e.g. "hourglass n_top=11")
    pub design: String,
    pub beta: f64,
    /// lens coupling of the output mode's far field
    pub gamma_l: f64,
    /// taper fundamental-mode power transmission
    pub t11: f64,
    /// total transmission gamma = gamma_l * t11
    pub gamma: f64,
    /// single-mode efficiency beta * gamma
    pub epsilon_s: f64,
    /// collection efficiency
    pub epsilon: f64,
    /// indistinguishability
    pub eta: f64,
    /// product epsilon * eta
    pub epsilon_eta: f64,
}

impl FigureOfMerit {
    /// Assemble a record from the efficiency chain and an eta value; enforces
    /// the product identities and [0, 1] ranges.
    pub fn assemble(
        design: impl Into<String>,
        beta: f64,
        gamma_l: f64,
        t11: f64,
        eta: f64,
    ) -> Result<FigureOfMerit> {
        for (name, v) in
            [("beta", beta), ("gamma_l", gamma_l), ("t11", t11), ("eta", eta)]
        {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        let gamma = transmission(gamma_l, t11)?;
        let epsilon_s = single_mode_efficiency(beta, gamma)?;
        // single-mode estimate doubles as the collection efficiency; the
        // radiation-mode correction that separates them is out of scope
        let epsilon = epsilon_s;
        Ok(FigureOfMerit {
            design: design.into(),
            beta,
            gamma_l,
            t11,
            gamma,
            epsilon_s,
            epsilon,
            eta,
            epsilon_eta: epsilon * eta,
        })
    }
}

/// Fraction of spontaneous emission captured by the cavity mode:
/// beta = F_p / (F_p + Gamma_B/Gamma_Bulk).
pub fn beta(f_p: f64, gamma_b_over_bulk: f64) -> Result<f64> {
    if !(f_p >= 0.0) || !(gamma_b_over_bulk >= 0.0) {
        return Err(Error::invalid("beta arguments must be non-negative"));
    }
    if f_p == 0.0 && gamma_b_over_bulk == 0.0 {
        return Err(Error::UndefinedRatio(
            "beta undefined: no cavity coupling and no background emission".into(),
        ));
    }
    Ok(f_p / (f_p + gamma_b_over_bulk))
}

/// Cavity-to-lens transmission gamma = gamma_L * T11.
pub fn transmission(gamma_l: f64, t11: f64) -> Result<f64> {
    for (name, v) in [("gamma_l", gamma_l), ("t11", t11)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(gamma_l * t11)
}

/// Single-mode source efficiency epsilon_s = beta * gamma.
pub fn single_mode_efficiency(beta: f64, gamma: f64) -> Result<f64> {
    for (name, v) in [("beta", beta), ("gamma", gamma)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(beta * gamma)
}

/// Quantum parameters (g, kappa) of a characterized cavity at wavelength
/// `lambda` (nm): kappa = (2 pi c / lambda)/Q and
/// g = (1/2) sqrt(F_p kappa Gamma_Bulk), so 4 g^2/kappa = F_p Gamma_Bulk.
pub fn cavity_parameters(
    character: &CavityCharacter,
    lambda: f64,
    gamma_bulk: f64,
) -> Result<(f64, f64)> {
    if !(character.q > 0.0 && character.v_n > 0.0) {
        return Err(Error::invalid("cavity character needs Q, V_n > 0"));
    }
    if !(lambda > 0.0 && gamma_bulk > 0.0) {
        return Err(Error::invalid("wavelength and bulk rate must be positive"));
    }
    let omega = 2.0 * std::f64::consts::PI * C_NM_PER_S / lambda;
    let kappa = omega / character.q;
    let g = 0.5 * (character.f_p * kappa * gamma_bulk).sqrt();
    Ok((g, kappa))
}

/// Success probability of an N-photon protocol, P = (epsilon * eta)^N.
pub fn n_photon_success(epsilon: f64, eta: f64, n: u32) -> Result<f64> {
    for (name, v) in [("epsilon", epsilon), ("eta", eta)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
        }
    }
    if n < 1 {
        return Err(Error::invalid("photon count must be >= 1"));
    }
    Ok((epsilon * eta).powi(n as i32))
}
