//! Far-field propagation of the exit-facet mode and collection-lens coupling.
//!
//! The x-polarized HE11 superposition has transverse components
//! Ex = sqrt(2) (P(r) + Q(r) cos 2phi), Ey = sqrt(2) Q(r) sin 2phi with
//! P = (Er - i Ephi)/2 and Q = (Er + i Ephi)/2, so the angular spectrum
//! separates into two Hankel transforms: a J0 transform of P (the
//! fiber-coupled part) and a J2 transform of Q. The facet is crossed through
//! a quarter-wave antireflection film treated as a planar thin film at
//! normal incidence, and the transmitted power is radiated into the forward
//! hemisphere.

use crate::bessel::jn;
use crate::error::{Error, Result};
use crate::modesolver::{solve_he11_tracked, ModeSolution};
use num_complex::Complex64;
use std::f64::consts::PI;

const N_THETA: usize = 400;
const N_RADIAL: usize = 3000;

/// Angular spectrum of the radiated field over the forward hemisphere.
///
/// Stored as the two azimuthal harmonics of the x-polarized mode; the total
/// angular power density is phi-independent after polarization summing.
#[derive(Debug, Clone)]
pub struct FarField {
    pub wavelength: f64,
    /// facet radius the field was launched from, nm
    pub radius: f64,
    /// polar angles, uniform on [0, pi/2]
    thetas: Vec<f64>,
    /// J0 (fiber-coupled) harmonic amplitude
    p_amp: Vec<Complex64>,
    /// J2 harmonic amplitude
    q_amp: Vec<Complex64>,
    /// power transmittance of the antireflection-coated facet
    pub facet_transmission: f64,
}

/// Normal-incidence power transmittance through a single thin film of index
/// `n_film` and thickness `t` between media `n_in` and `n_out`.
pub fn film_transmittance(n_in: f64, n_film: f64, t: f64, n_out: f64, lambda: f64) -> f64 {
    let delta = 2.0 * PI * n_film * t / lambda;
    let (c, s) = (delta.cos(), delta.sin());
    // characteristic matrix [[c, i s / n], [i n s, c]]
    let m11 = Complex64::new(c, 0.0);
    let m12 = Complex64::new(0.0, s / n_film);
    let m21 = Complex64::new(0.0, n_film * s);
    let m22 = Complex64::new(c, 0.0);
    let b = m11 + m12 * n_out;
    let a = m21 + m22 * n_out;
    let denom = b * n_in + a;
    let t_amp = 2.0 * n_in / denom;
    (n_out / n_in) * t_amp.norm_sqr()
}

/// Facet transmittance for a guided mode exiting through a quarter-wave
/// antireflection film of index sqrt(n_core); the film is itself a waveguide
/// section, so its effective film index is the HE11 effective index of the
/// coated cylinder at the same radius (bulk film index when that mode is too
/// close to cutoff to resolve).
pub fn facet_transmission(mode: &ModeSolution) -> f64 {
    let n_film_bulk = mode.n_core.sqrt();
    let n_film = solve_he11_tracked(mode.radius, n_film_bulk, mode.n_clad, mode.wavelength, None)
        .map(|m| m.n_eff)
        .unwrap_or(n_film_bulk);
    let t = mode.wavelength / (4.0 * n_film);
    film_transmittance(mode.n_eff, n_film, t, mode.n_clad, mode.wavelength)
}

/// Propagate a power-normalized mode through the facet into the far field.
///
/// The result is scaled so the hemisphere-integrated power equals the
/// facet-transmitted source power (the aperture model itself conserves power
/// only to the paraxial cos(theta) factor; the rescaling pins the absolute
/// normalization to the source).
pub fn far_field(mode: &ModeSolution) -> FarField {
    let k = 2.0 * PI / mode.wavelength;
    let t_facet = facet_transmission(mode);
    let rmax = mode.tail_radius();
    let dr = rmax / N_RADIAL as f64;
    // radial profiles of the two polarization harmonics (midpoint rule)
    let mut rs = Vec::with_capacity(N_RADIAL);
    let mut p_r = Vec::with_capacity(N_RADIAL);
    let mut q_r = Vec::with_capacity(N_RADIAL);
    for i in 0..N_RADIAL {
        let r = (i as f64 + 0.5) * dr;
        let f = mode.fields(r);
        let i_c = Complex64::new(0.0, 1.0);
        rs.push(r);
        p_r.push(0.5 * (f.er - i_c * f.ephi));
        q_r.push(0.5 * (f.er + i_c * f.ephi));
    }
    let mut thetas = Vec::with_capacity(N_THETA);
    let mut p_amp = Vec::with_capacity(N_THETA);
    let mut q_amp = Vec::with_capacity(N_THETA);
    for j in 0..N_THETA {
        let th = 0.5 * PI * j as f64 / (N_THETA - 1) as f64;
        let kt = k * th.sin();
        let mut pa = Complex64::new(0.0, 0.0);
        let mut qa = Complex64::new(0.0, 0.0);
        for i in 0..N_RADIAL {
            let r = rs[i];
            pa += p_r[i] * (jn(0, kt * r) * r * dr);
            qa += q_r[i] * (jn(2, kt * r) * r * dr);
        }
        thetas.push(th);
        p_amp.push(pa);
        q_amp.push(qa);
    }
    let mut ff = FarField {
        wavelength: mode.wavelength,
        radius: mode.radius,
        thetas,
        p_amp,
        q_amp,
        facet_transmission: t_facet,
    };
    let raw = ff.total_power();
    let scale = (t_facet / raw).sqrt();
    for v in ff.p_amp.iter_mut().chain(ff.q_amp.iter_mut()) {
        *v *= scale;
    }
    ff
}

/// Far field of an ideal Gaussian beam of the given waist; used as the
/// self-coupling reference.
pub fn gaussian_far_field(waist: f64, radius: f64, lambda: f64) -> FarField {
    let k = 2.0 * PI / lambda;
    let mut thetas = Vec::with_capacity(N_THETA);
    let mut p_amp = Vec::with_capacity(N_THETA);
    for j in 0..N_THETA {
        let th = 0.5 * PI * j as f64 / (N_THETA - 1) as f64;
        thetas.push(th);
        let g = (-(k * waist * th.sin()).powi(2) / 4.0).exp();
        p_amp.push(Complex64::new(g, 0.0));
    }
    let mut ff = FarField {
        wavelength: lambda,
        radius,
        thetas,
        p_amp,
        q_amp: vec![Complex64::new(0.0, 0.0); N_THETA],
        facet_transmission: 1.0,
    };
    let raw = ff.total_power();
    let scale = (1.0 / raw).sqrt();
    for v in ff.p_amp.iter_mut() {
        *v *= scale;
    }
    ff
}

impl FarField {
    /// Angular power density w(theta): hemisphere power = integral w dtheta.
    pub fn power_density(&self, idx: usize) -> f64 {
        let k = 2.0 * PI / self.wavelength;
        let th = self.thetas[idx];
        2.0 * PI
            * k
            * k
            * th.cos().powi(2)
            * th.sin()
            * (self.p_amp[idx].norm_sqr() + self.q_amp[idx].norm_sqr())
    }

    /// Trapezoid weights for integrating a grid function up to `theta_max`
    /// (partial final cell by linear interpolation). Shared by the power and
    /// overlap integrals so that the Cauchy-Schwarz ordering
    /// gaussian_coupling <= lens_transmission holds exactly in the discrete
    /// model.
    fn quad_weights(&self, theta_max: f64) -> Vec<f64> {
        let n = self.thetas.len();
        let dth = self.thetas[1] - self.thetas[0];
        let mut wq = vec![0.0; n];
        for i in 0..n - 1 {
            let a = self.thetas[i];
            if a >= theta_max {
                break;
            }
            if self.thetas[i + 1] <= theta_max {
                wq[i] += 0.5 * dth;
                wq[i + 1] += 0.5 * dth;
            } else {
                let f = (theta_max - a) / dth;
                wq[i] += dth * f * (1.0 - 0.5 * f);
                wq[i + 1] += dth * 0.5 * f * f;
            }
        }
        wq
    }

    fn integrate_density(&self, theta_max: f64) -> f64 {
        self.quad_weights(theta_max)
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.power_density(i))
            .sum()
    }

    /// Total power radiated into the forward hemisphere.
    pub fn total_power(&self) -> f64 {
        self.integrate_density(0.5 * PI)
    }

    /// Fraction of the source power radiated within polar angle `theta`
    /// (monotone from 0 to the facet transmission).
    pub fn encircled_power(&self, theta: f64) -> f64 {
        self.integrate_density(theta.clamp(0.0, 0.5 * PI))
    }

    /// Polar angle containing half the radiated power.
    pub fn half_power_angle(&self) -> f64 {
        let target = 0.5 * self.total_power();
        let (mut lo, mut hi) = (0.0_f64, 0.5 * PI);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.encircled_power(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Fraction of the source power collected by a lens of the given numerical
/// aperture (no mode filtering).
pub fn lens_transmission(ff: &FarField, na: f64) -> Result<f64> {
    if !(na > 0.0 && na <= 1.0) {
        return Err(Error::invalid(format!("NA must be in (0, 1], got {na}")));
    }
    Ok(ff.encircled_power(na.asin()))
}

fn coupling_at_waist(ff: &FarField, theta_na: f64, waist: f64) -> f64 {
    // overlap of the co-polarized (J0) harmonic with a Gaussian angular
    // profile, both restricted to the NA cone; the J2 harmonic is orthogonal
    // to the azimuthally symmetric fiber mode
    let k = 2.0 * PI / ff.wavelength;
    let wq = ff.quad_weights(theta_na);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (i, &w) in wq.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let th = ff.thetas[i];
        let g = (-(k * waist * th.sin()).powi(2) / 4.0).exp();
        let wgt = th.cos().powi(2) * th.sin();
        num += ff.p_amp[i].conj() * (g * wgt * w);
        den += g * g * wgt * w;
    }
    if den == 0.0 {
        return 0.0;
    }
    2.0 * PI * k * k * num.norm_sqr() / den
}

/// Coupling fraction into a Gaussian (single-mode-fiber) profile behind the
/// lens, maximized over the Gaussian waist by golden-section search.
pub fn gaussian_coupling(ff: &FarField, na: f64) -> Result<f64> {
    if !(na > 0.0 && na <= 1.0) {
        return Err(Error::invalid(format!("NA must be in (0, 1], got {na}")));
    }
    let theta_na = na.asin();
    let f = |w: f64| coupling_at_waist(ff, theta_na, w);
    let (mut a, mut b) = (0.2 * ff.radius, 5.0 * ff.radius);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-4 * b {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    Ok(f(0.5 * (a + b)))
}
