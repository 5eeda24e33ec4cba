//! Exact vector modes of a cylindrical step-index waveguide (core `n_core`,
//! infinite cladding `n_clad`).
//!
//! The characteristic equation for hybrid modes of azimuthal order m,
//! with u = k a sqrt(n_core^2 - n_eff^2) and w = k a sqrt(n_eff^2 - n_clad^2),
//! Ja = J'_m(u)/(u J_m(u)), Ka = K'_m(w)/(w K_m(w)):
//!
//!   (Ja + Ka)(n_core^2 Ja + n_clad^2 Ka) = m^2 n_eff^2 (1/u^2 + 1/w^2)^2
//!
//! Roots are located by a dense scan plus bisection (the function has poles
//! at zeros of J_m, so bracketing is the only robust option), then classified
//! into the HE/EH families by which quadratic branch they solve.

use crate::bessel::{jn, jn_prime, kn, kn_prime};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const SCAN_POINTS: usize = 2000;
const EDGE_DELTA: f64 = 1e-6;

/// Hybrid mode family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeFamily {
    He,
    Eh,
}

/// (family, azimuthal order m, radial order p), e.g. HE11 = (He, 1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub family: ModeFamily,
    pub m: u32,
    pub p: u32,
}

impl ModeLabel {
    pub const HE11: ModeLabel = ModeLabel {
        family: ModeFamily::He,
        m: 1,
        p: 1,
    };
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fam = match self.family {
            ModeFamily::He => "HE",
            ModeFamily::Eh => "EH",
        };
        write!(f, "{}{}{}", fam, self.m, self.p)
    }
}

/// Complex field components of a mode at one point; the e^{i m phi} factor
/// is *not* included (these are radial profiles).
#[derive(Debug, Clone, Copy, Default)]
pub struct FieldSample {
    pub er: Complex64,
    pub ephi: Complex64,
    pub ez: Complex64,
    pub hr: Complex64,
    pub hphi: Complex64,
    pub hz: Complex64,
}

/// A guided vector mode, power-normalized to unit axial flux.
///
/// H is measured in units of E/Z0 so that the axial Poynting flux is
/// (1/2) Re(Er Hphi* - Ephi Hr*) without impedance factors.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub label: ModeLabel,
    pub n_eff: f64,
    /// rad/nm
    pub propagation_constant: f64,
    pub radius: f64,
    pub wavelength: f64,
    pub n_core: f64,
    pub n_clad: f64,
    // Ez/Hz amplitudes inside (a, b) and outside (c, d), post-normalization.
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    kappa: f64,
    gamma: f64,
}

fn dispersion_parts(x: f64, radius: f64, n_core: f64, n_clad: f64, lambda: f64, m: u32) -> Option<(f64, f64, f64, f64, f64, f64)> {
    if x <= n_clad || x >= n_core {
        return None;
    }
    let k = 2.0 * PI / lambda;
    let u = k * radius * (n_core * n_core - x * x).sqrt();
    let w = k * radius * (x * x - n_clad * n_clad).sqrt();
    let jm = jn(m, u);
    let km = kn(m, w);
    if jm == 0.0 || km == 0.0 {
        return None;
    }
    let ja = jn_prime(m, u) / (u * jm);
    let ka = kn_prime(m, w) / (w * km);
    let rhs = (m as f64).powi(2) * x * x * (1.0 / (u * u) + 1.0 / (w * w)).powi(2);
    Some((u, w, ja, ka, rhs, k))
}

/// Characteristic function whose roots are guided modes of order m.
pub fn dispersion(x: f64, radius: f64, n_core: f64, n_clad: f64, lambda: f64, m: u32) -> f64 {
    match dispersion_parts(x, radius, n_core, n_clad, lambda, m) {
        Some((_, _, ja, ka, rhs, _)) => (ja + ka) * (n_core * n_core * ja + n_clad * n_clad * ka) - rhs,
        None => f64::NAN,
    }
}

fn classify(x: f64, radius: f64, n_core: f64, n_clad: f64, lambda: f64, m: u32) -> ModeFamily {
    if m == 0 {
        // TE/TM, mapped onto He/Eh by which factor vanishes
        let (_, _, ja, ka, _, _) = dispersion_parts(x, radius, n_core, n_clad, lambda, m).unwrap();
        return if (ja + ka).abs() < (n_core * n_core * ja + n_clad * n_clad * ka).abs() {
            ModeFamily::He
        } else {
            ModeFamily::Eh
        };
    }
    let (_, _, ja, ka, rhs, _) = dispersion_parts(x, radius, n_core, n_clad, lambda, m).unwrap();
    let nc2 = n_core * n_core;
    let ncl2 = n_clad * n_clad;
    let disc = ((nc2 - ncl2) * ka).powi(2) + 4.0 * nc2 * rhs;
    let root = disc.max(0.0).sqrt();
    let ja_he = (-(nc2 + ncl2) * ka - root) / (2.0 * nc2);
    let ja_eh = (-(nc2 + ncl2) * ka + root) / (2.0 * nc2);
    if (ja - ja_he).abs() <= (ja - ja_eh).abs() {
        ModeFamily::He
    } else {
        ModeFamily::Eh
    }
}

fn bisect_root(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if !flo.is_finite() || !fhi.is_finite() || flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if !fmid.is_finite() {
            return None;
        }
        if fmid == 0.0 {
            return Some(mid);
        }
        if flo * fmid < 0.0 {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let _ = fhi;
    let mid = 0.5 * (lo + hi);
    // reject poles: the function blows up instead of crossing smoothly
    if f(mid).abs() < 1e-5 {
        Some(mid)
    } else {
        None
    }
}

/// All guided-mode effective indices of azimuthal order m, descending,
/// with family labels attached.
pub fn find_roots(radius: f64, n_core: f64, n_clad: f64, lambda: f64, m: u32) -> Vec<(f64, ModeFamily)> {
    let lo = n_clad + EDGE_DELTA;
    let hi = n_core - EDGE_DELTA;
    if lo >= hi {
        return vec![];
    }
    let f = |x: f64| dispersion(x, radius, n_core, n_clad, lambda, m);
    let mut roots: Vec<f64> = Vec::new();
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    for i in 1..=SCAN_POINTS {
        let x = lo + step * i as f64;
        let fx = f(x);
        if prev_f.is_finite() && fx.is_finite() && prev_f * fx < 0.0 {
            if let Some(r) = bisect_root(prev_x, x, f) {
                roots.push(r);
            }
        }
        prev_x = x;
        prev_f = fx;
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
        .into_iter()
        .map(|r| (r, classify(r, radius, n_core, n_clad, lambda, m)))
        .collect()
}

fn build_mode(
    n_eff: f64,
    label: ModeLabel,
    radius: f64,
    n_core: f64,
    n_clad: f64,
    lambda: f64,
) -> ModeSolution {
    let m = label.m;
    let (u, w, ja, ka, _, k) = dispersion_parts(n_eff, radius, n_core, n_clad, lambda, m).unwrap();
    let beta = k * n_eff;
    let kappa = u / radius;
    let gamma = w / radius;
    // Ez amplitude a = 1; Hz amplitude from E_phi continuity:
    //   i beta m (1/u^2 + 1/w^2) a = k (Ja + Ka) b
    // For m = 0 the equation decouples (pure TE or TM).
    let a;
    let b;
    if m == 0 {
        let nc2 = n_core * n_core;
        let ncl2 = n_clad * n_clad;
        if (ja + ka).abs() < (nc2 * ja + ncl2 * ka).abs() {
            // TE: Ez = 0
            a = Complex64::new(0.0, 0.0);
            b = Complex64::new(1.0, 0.0);
        } else {
            a = Complex64::new(1.0, 0.0);
            b = Complex64::new(0.0, 0.0);
        }
    } else {
        a = Complex64::new(1.0, 0.0);
        b = Complex64::new(0.0, beta * m as f64 * (1.0 / (u * u) + 1.0 / (w * w)) / (k * (ja + ka)));
    }
    let ratio = jn(m, u) / kn(m, w);
    let c = a * ratio;
    let d = b * ratio;
    let mut mode = ModeSolution {
        label,
        n_eff,
        propagation_constant: beta,
        radius,
        wavelength: lambda,
        n_core,
        n_clad,
        a,
        b,
        c,
        d,
        kappa,
        gamma,
    };
    let p = mode.power();
    let s = 1.0 / p.sqrt();
    mode.a *= s;
    mode.b *= s;
    mode.c *= s;
    mode.d *= s;
    mode
}

impl ModeSolution {
    /// Field profile at radius r (phi dependence e^{i m phi} implied).
    pub fn fields(&self, r: f64) -> FieldSample {
        let r = r.max(1e-9);
        let m = self.label.m;
        let mf = m as f64;
        let beta = self.propagation_constant;
        let k = 2.0 * PI / self.wavelength;
        let i = Complex64::new(0.0, 1.0);
        if r < self.radius {
            let kap = self.kappa;
            let x = kap * r;
            let j = Complex64::new(jn(m, x), 0.0);
            let jd = Complex64::new(jn_prime(m, x), 0.0);
            let n2 = self.n_core * self.n_core;
            let pre = i / (kap * kap);
            FieldSample {
                ez: self.a * j,
                hz: self.b * j,
                er: pre * (beta * kap * self.a * jd + i * k * mf / r * self.b * j),
                ephi: pre * (i * beta * mf / r * self.a * j - k * kap * self.b * jd),
                hr: pre * (beta * kap * self.b * jd - i * k * n2 * mf / r * self.a * j),
                hphi: pre * (i * beta * mf / r * self.b * j + k * n2 * kap * self.a * jd),
            }
        } else {
            let gam = self.gamma;
            let x = gam * r;
            let kv = Complex64::new(kn(m, x), 0.0);
            let kd = Complex64::new(kn_prime(m, x), 0.0);
            let n2 = self.n_clad * self.n_clad;
            let pre = -Complex64::new(0.0, 1.0) / (gam * gam);
            FieldSample {
                ez: self.c * kv,
                hz: self.d * kv,
                er: pre * (beta * gam * self.c * kd + i * k * mf / r * self.d * kv),
                ephi: pre * (i * beta * mf / r * self.c * kv - k * gam * self.d * kd),
                hr: pre * (beta * gam * self.d * kd - i * k * n2 * mf / r * self.c * kv),
                hphi: pre * (i * beta * mf / r * self.d * kv + k * n2 * gam * self.c * kd),
            }
        }
    }

    /// Field at (r, phi) including the azimuthal factor.
    pub fn field_at(&self, r: f64, phi: f64) -> FieldSample {
        let f = self.fields(r);
        let ph = Complex64::from_polar(1.0, self.label.m as f64 * phi);
        FieldSample {
            er: f.er * ph,
            ephi: f.ephi * ph,
            ez: f.ez * ph,
            hr: f.hr * ph,
            hphi: f.hphi * ph,
            hz: f.hz * ph,
        }
    }

    /// Outer integration limit where the evanescent tail is negligible.
    pub fn tail_radius(&self) -> f64 {
        self.radius + (40.0 / self.gamma).min(self.radius + 2e5)
    }

    /// Axial Poynting flux 2 pi * 1/2 Re(Er Hphi* - Ephi Hr*) r dr.
    pub fn power(&self) -> f64 {
        let rmax = self.tail_radius();
        integrate_radial(self.radius, self.radius, rmax, |r| {
            let f = self.fields(r);
            0.5 * (f.er * f.hphi.conj() - f.ephi * f.hr.conj()).re
        }) * 2.0
            * PI
    }

    /// epsilon-weighted intensity epsilon(r) |E(r)|^2 (all components).
    pub fn eps_intensity(&self, r: f64) -> f64 {
        let f = self.fields(r);
        let eps = if r < self.radius {
            self.n_core * self.n_core
        } else {
            self.n_clad * self.n_clad
        };
        eps * (f.er.norm_sqr() + f.ephi.norm_sqr() + f.ez.norm_sqr())
    }

    /// Integral of epsilon |E|^2 over the cross-section.
    pub fn eps_intensity_integral(&self) -> f64 {
        let rmax = self.tail_radius();
        integrate_radial(self.radius, self.radius, rmax, |r| self.eps_intensity(r)) * 2.0 * PI
    }

    /// Peak of epsilon |E|^2 over the cross-section.
    pub fn eps_intensity_max(&self) -> f64 {
        let mut best: f64 = 0.0;
        let n = 2000;
        let rmax = self.radius * 2.0;
        for i in 0..=n {
            let r = rmax * i as f64 / n as f64;
            best = best.max(self.eps_intensity(r));
        }
        best
    }
}

/// Composite Gauss-Legendre quadrature of f(r) r dr over [0, rmax],
/// splitting panels at the interface radii to keep integrands smooth.
pub fn integrate_radial(split_a: f64, split_b: f64, rmax: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut cuts = vec![0.0, split_a.min(split_b), split_a.max(split_b), rmax];
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut total = 0.0;
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi <= lo {
            continue;
        }
        // subdivide long panels; fields oscillate on the ~100 nm scale inside
        let chunks = (((hi - lo) / 120.0).ceil() as usize).clamp(1, 400);
        let dx = (hi - lo) / chunks as f64;
        for c in 0..chunks {
            let a = lo + dx * c as f64;
            total += gauss16(a, a + dx, |r| f(r) * r);
        }
    }
    total
}

const GAUSS16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GAUSS16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn gauss16(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let xm = 0.5 * (a + b);
    let xr = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..8 {
        let dx = xr * GAUSS16_X[i];
        s += GAUSS16_W[i] * (f(xm + dx) + f(xm - dx));
    }
    s * xr
}

/// Solve one labeled guided mode.
pub fn solve_mode(radius: f64, n_core: f64, n_clad: f64, lambda: f64, label: ModeLabel) -> Result<ModeSolution> {
    if radius <= 0.0 || lambda <= 0.0 {
        return Err(Error::invalid("radius and wavelength must be positive"));
    }
    if n_core <= n_clad {
        return Err(Error::invalid(format!(
            "n_core ({n_core}) must exceed n_clad ({n_clad}) for guidance"
        )));
    }
    let roots = find_roots(radius, n_core, n_clad, lambda, label.m);
    let mut p = 0u32;
    for (x, fam) in roots {
        if fam == label.family {
            p += 1;
            if p == label.p {
                return Ok(build_mode(x, label, radius, n_core, n_clad, lambda));
            }
        }
    }
    Err(Error::ModeNotGuided {
        label: label.to_string(),
        radius_nm: radius,
    })
}

/// Fast HE11 solve using a previous effective index as a starting bracket;
/// falls back to the full scan when tracking fails.
pub fn solve_he11_tracked(radius: f64, n_core: f64, n_clad: f64, lambda: f64, guess: Option<f64>) -> Result<ModeSolution> {
    if let Some(g) = guess {
        let f = |x: f64| dispersion(x, radius, n_core, n_clad, lambda, 1);
        let mut half = 5e-4_f64;
        for _ in 0..6 {
            let lo = (g - half).max(n_clad + EDGE_DELTA);
            let hi = (g + half).min(n_core - EDGE_DELTA);
            let (flo, fhi) = (f(lo), f(hi));
            if flo.is_finite() && fhi.is_finite() && flo * fhi < 0.0 {
                if let Some(r) = bisect_root(lo, hi, f) {
                    // must still be the fundamental branch
                    if classify(r, radius, n_core, n_clad, lambda, 1) == ModeFamily::He {
                        return Ok(build_mode(r, ModeLabel::HE11, radius, n_core, n_clad, lambda));
                    }
                }
            }
            half *= 4.0;
            if half > 0.2 {
                break;
            }
        }
    }
    solve_mode(radius, n_core, n_clad, lambda, ModeLabel::HE11)
}

/// The n lowest-order guided modes of azimuthal order m, by descending
/// effective index. Returns fewer when modes are cut off.
pub fn guided_modes(radius: f64, n_core: f64, n_clad: f64, lambda: f64, m: u32, max_modes: usize) -> Vec<ModeSolution> {
    let roots = find_roots(radius, n_core, n_clad, lambda, m);
    let mut he_count = 0u32;
    let mut eh_count = 0u32;
    let mut out = Vec::new();
    for (x, fam) in roots {
        let p = match fam {
            ModeFamily::He => {
                he_count += 1;
                he_count
            }
            ModeFamily::Eh => {
                eh_count += 1;
                eh_count
            }
        };
        out.push(build_mode(x, ModeLabel { family: fam, m, p }, radius, n_core, n_clad, lambda));
        if out.len() >= max_modes {
            break;
        }
    }
    out
}

fn cross_power(a: &ModeSolution, b: &ModeSolution) -> Complex64 {
    let split_a = a.radius;
    let split_b = b.radius;
    let rmax = a.tail_radius().max(b.tail_radius());
    let mut cuts = vec![0.0, split_a.min(split_b), split_a.max(split_b), rmax];
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mut total = Complex64::new(0.0, 0.0);
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi <= lo {
            continue;
        }
        let chunks = (((hi - lo) / 120.0).ceil() as usize).clamp(1, 400);
        let dx = (hi - lo) / chunks as f64;
        for c in 0..chunks {
            let p0 = lo + dx * c as f64;
            let xm = p0 + 0.5 * dx;
            let xr = 0.5 * dx;
            for i in 0..8 {
                for sgn in [-1.0, 1.0] {
                    let r = xm + sgn * xr * GAUSS16_X[i];
                    let fa = a.fields(r);
                    let fb = b.fields(r);
                    let integrand = fa.er * fb.hphi.conj() - fa.ephi * fb.hr.conj();
                    total += integrand * (GAUSS16_W[i] * xr * r);
                }
            }
        }
    }
    total * Complex64::new(0.5 * 2.0 * PI, 0.0)
}

/// Symmetrized cross-power overlap of two power-normalized modes
/// (the mode-matching coupling coefficient). |overlap| <= 1.
pub fn mode_overlap(a: &ModeSolution, b: &ModeSolution) -> Result<Complex64> {
    if (a.wavelength - b.wavelength).abs() > 1e-9 {
        return Err(Error::invalid("mode overlap requires equal wavelengths"));
    }
    if a.label.m != b.label.m {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pab = cross_power(a, b);
    let pba = cross_power(b, a);
    Ok(0.5 * (pab + pba.conj()))
}
