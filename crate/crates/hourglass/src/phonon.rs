//! Polaron-frame phonon environment for the emitter.
//!
//! The emitter couples to a super-ohmic acoustic-phonon bath with spectral
//! density J(w) = alpha w^3 exp(-w^2/w_b^2). Dressing the emitter with the
//! lattice displacement (polaron transform) renormalizes the coherent
//! cavity coupling by the Franck-Condon factor B and produces incoherent
//! phonon-assisted transitions between the polariton eigenstates, with rates
//! that obey detailed balance at the bath temperature.

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380_649e-23;

/// Acoustic-phonon bath parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhononEnv {
    pub enabled: bool,
    /// super-ohmic coupling prefactor, s^2
    pub alpha: f64,
    /// Gaussian cutoff frequency, rad/s
    pub omega_b: f64,
    /// bath temperature, K
    pub temperature: f64,
}

impl PhononEnv {
    pub fn new(enabled: bool, alpha: f64, omega_b: f64, temperature: f64) -> Result<PhononEnv> {
        if !(alpha >= 0.0) {
            return Err(Error::invalid("phonon coupling alpha must be >= 0"));
        }
        if !(omega_b > 0.0) {
            return Err(Error::invalid("phonon cutoff omega_b must be > 0"));
        }
        if !(temperature >= 0.0) {
            return Err(Error::invalid("temperature must be >= 0"));
        }
        Ok(PhononEnv { enabled, alpha, omega_b, temperature })
    }

    /// Disabled environment (no phonon coupling at all).
    pub fn off() -> PhononEnv {
        PhononEnv { enabled: false, alpha: 0.0, omega_b: 1.0, temperature: 0.0 }
    }

    /// Representative InAs quantum dot in GaAs at 4 K. The parameters are a
    /// documented preset, not fitted here: alpha = 0.03 ps^2,
    /// omega_b = 2.2 ps^-1.
    pub fn inas_4k() -> PhononEnv {
        PhononEnv { enabled: true, alpha: 0.03e-24, omega_b: 2.2e12, temperature: 4.0 }
    }

    /// Spectral density J(w) = alpha w^3 exp(-w^2/w_b^2), 1/s for w in rad/s.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        if !self.enabled || omega <= 0.0 {
            return 0.0;
        }
        self.alpha * omega.powi(3) * (-(omega / self.omega_b).powi(2)).exp()
    }

    fn coth_half_beta(&self, omega: f64) -> f64 {
        if self.temperature <= 0.0 {
            return 1.0;
        }
        let x = HBAR * omega / (2.0 * KB * self.temperature);
        1.0 / x.tanh()
    }

    /// Bose occupation of a mode at `omega` rad/s.
    pub fn occupation(&self, omega: f64) -> f64 {
        if self.temperature <= 0.0 || omega <= 0.0 {
            return 0.0;
        }
        let x = HBAR * omega / (KB * self.temperature);
        1.0 / x.exp_m1()
    }
}

/// Polaron transform output: Franck-Condon factor and the phonon rate kernel.
#[derive(Debug, Clone)]
pub struct Polaron {
    /// coherent coupling renormalization, g -> B g
    pub b_factor: f64,
    env: PhononEnv,
}

impl Polaron {
    /// Phonon-assisted transition rate between polariton states separated by
    /// `delta` (rad/s). `delta > 0` is an energy-releasing (downward)
    /// transition, `delta < 0` requires absorbing a phonon. Rates obey
    /// rate(-d)/rate(+d) = exp(-hbar d / kB T).
    pub fn rate(&self, delta: f64) -> f64 {
        if !self.env.enabled || self.env.alpha == 0.0 || delta == 0.0 {
            return 0.0;
        }
        let w = delta.abs();
        let j = self.env.spectral_density(w);
        let n = self.env.occupation(w);
        let occ = if delta > 0.0 { n + 1.0 } else { n };
        0.5 * std::f64::consts::PI * j * occ
    }
}

/// Adaptive Simpson quadrature to absolute tolerance.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::IntegrationFailure(
                "phonon quadrature did not converge".into(),
            ));
        }
        Ok(recurse(f, a, m, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    recurse(f, a, b, simpson(f, a, b), tol, depth)
}

/// Franck-Condon exponent integral integrand: (J(w)/w^2) coth(hw/2kT).
fn fc_integrand(env: &PhononEnv, omega: f64) -> f64 {
    if omega <= 0.0 {
        // continuous limit: J(w)/w^2 coth(hw/2kT) -> 2 alpha kB T / hbar
        return if env.temperature > 0.0 { 2.0 * env.alpha * KB * env.temperature / HBAR } else { 0.0 };
    }
    env.spectral_density(omega) / (omega * omega) * env.coth_half_beta(omega)
}

/// Polaron transform of the environment: the Franck-Condon factor
/// B = exp(-1/2 Int (J/w^2) coth(hw/2kT) dw) and the phonon rate kernel.
/// The Gaussian cutoff makes the integrand negligible beyond 8 w_b.
pub fn polaron_transform(env: &PhononEnv) -> Result<Polaron> {
    if !(env.alpha >= 0.0 && env.omega_b > 0.0 && env.temperature >= 0.0) {
        return Err(Error::invalid("invalid phonon environment"));
    }
    if !env.enabled || env.alpha == 0.0 {
        return Ok(Polaron { b_factor: 1.0, env: env.clone() });
    }
    let f = |w: f64| fc_integrand(env, w);
    let integral = adaptive_simpson(&f, 0.0, 8.0 * env.omega_b, 1e-8, 40)?;
    if !integral.is_finite() || integral > 700.0 {
        return Err(Error::NumericOverflow(format!(
            "Franck-Condon exponent diverged: {integral}"
        )));
    }
    Ok(Polaron { b_factor: (-0.5 * integral).exp(), env: env.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disabled_environment_is_transparent() {
        let p = polaron_transform(&PhononEnv::off()).unwrap();
        assert_eq!(p.b_factor, 1.0);
        assert_eq!(p.rate(1e12), 0.0);
        let zero_alpha = PhononEnv::new(true, 0.0, 2.2e12, 4.0).unwrap();
        let p = polaron_transform(&zero_alpha).unwrap();
        assert_eq!(p.b_factor, 1.0);
        assert_eq!(p.rate(-5e11), 0.0);
    }

    #[test]
    fn zero_temperature_has_no_upward_rate() {
        let env = PhononEnv::new(true, 0.03e-24, 2.2e12, 0.0).unwrap();
        let p = polaron_transform(&env).unwrap();
        assert_eq!(p.rate(-1e12), 0.0);
        assert!(p.rate(1e12) > 0.0);
    }

    #[test]
    fn detailed_balance_at_finite_temperature() {
        let env = PhononEnv::inas_4k();
        let p = polaron_transform(&env).unwrap();
        for &d in &[2e11, 7e11, 1.5e12, 3e12] {
            let ratio = p.rate(-d) / p.rate(d);
            let boltzmann = (-HBAR * d / (KB * env.temperature)).exp();
            assert_relative_eq!(ratio, boltzmann, max_relative = 1e-10);
        }
    }

    #[test]
    fn franck_condon_matches_refined_quadrature() {
        // quadrature-refinement oracle: fixed-step Simpson at two resolutions
        let env = PhononEnv::inas_4k();
        let p = polaron_transform(&env).unwrap();
        let fixed = |n: usize| -> f64 {
            let hi = 8.0 * env.omega_b;
            let h = hi / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                let a = i as f64 * h;
                s += h / 6.0
                    * (fc_integrand(&env, a)
                        + 4.0 * fc_integrand(&env, a + 0.5 * h)
                        + fc_integrand(&env, a + h));
            }
            (-0.5 * s).exp()
        };
        let coarse = fixed(4000);
        let fine = fixed(8000);
        assert_relative_eq!(coarse, fine, max_relative = 1e-9);
        assert_relative_eq!(p.b_factor, fine, max_relative = 1e-6);
        assert!(p.b_factor > 0.0 && p.b_factor < 1.0, "B = {}", p.b_factor);
    }

    #[test]
    fn b_factor_decreases_with_temperature_and_coupling() {
        let b = |alpha: f64, t: f64| {
            polaron_transform(&PhononEnv::new(true, alpha, 2.2e12, t).unwrap()).unwrap().b_factor
        };
        assert!(b(0.03e-24, 4.0) < b(0.03e-24, 0.0));
        assert!(b(0.03e-24, 20.0) < b(0.03e-24, 4.0));
        assert!(b(0.06e-24, 4.0) < b(0.03e-24, 4.0));
    }

    #[test]
    fn invalid_environments_rejected() {
        assert!(PhononEnv::new(true, -1.0, 2.2e12, 4.0).is_err());
        assert!(PhononEnv::new(true, 0.03e-24, 0.0, 4.0).is_err());
        assert!(PhononEnv::new(true, 0.03e-24, 2.2e12, -1.0).is_err());
    }
}
