//! One-dimensional transfer-matrix engine along the device axis.
//!
//! The 3D structure is reduced to a stack of thin cylindrical segments, each
//! carrying the local HE11 effective index of its material and radius
//! (effective-index approximation). On that stack the module computes DBR
//! reflectivities, the cavity resonance wavelength, the quality factor from
//! the transmission linewidth, the normalized mode volume from the axial
//! standing wave combined with tabulated transverse mode profiles, and the
//! Purcell factor.

use crate::error::{Error, Result};
use crate::geometry::DeviceGeometry;
use crate::modesolver::{solve_he11_tracked, ModeSolution};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Maximum staircase segment height, nm.
const SEGMENT_HEIGHT: f64 = 20.0;
/// Resonance search window half-width around the design wavelength, nm.
const SCAN_HALF_WIDTH: f64 = 30.0;
/// Wavelength grid used to tabulate effective-index dispersion, nm.
const LAMBDA_MARGIN: f64 = 32.0;
const N_LAMBDA: usize = 7;

/// Natural cubic spline on a strictly increasing grid.
#[derive(Debug, Clone)]
pub(crate) struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

impl CubicSpline {
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>) -> CubicSpline {
        let n = x.len();
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        CubicSpline { x, y, y2 }
    }

    pub(crate) fn eval(&self, xv: f64) -> f64 {
        let n = self.x.len();
        if n == 1 {
            return self.y[0];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] > xv {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let h = self.x[hi] - self.x[lo];
        let a = (self.x[hi] - xv) / h;
        let b = (xv - self.x[lo]) / h;
        a * self.y[lo]
            + b * self.y[hi]
            + ((a * a * a - a) * self.y2[lo] + (b * b * b - b) * self.y2[hi]) * h * h / 6.0
    }
}

/// Tabulated HE11 properties for one material: n_eff over (radius, lambda)
/// and transverse energy-density weights at the design wavelength.
struct MaterialTable {
    lambdas: Vec<f64>,
    /// one radial spline of n_eff per lambda node
    neff_splines: Vec<CubicSpline>,
    /// integral of eps |e|^2 over the cross-section (unit-power mode)
    w_int: CubicSpline,
    /// peak of eps |e|^2 over the cross-section (unit-power mode)
    w_max: CubicSpline,
}

impl MaterialTable {
    fn build(n_core: f64, r_min: f64, r_max: f64, design_lambda: f64) -> MaterialTable {
        let lo = (r_min * 0.97).max(20.0);
        let hi = r_max * 1.03;
        let n_r = (((hi - lo) / 10.0).ceil() as usize).clamp(8, 120);
        let rs: Vec<f64> = if hi - lo < 1.0 {
            vec![lo]
        } else {
            (0..=n_r).map(|i| lo + (hi - lo) * i as f64 / n_r as f64).collect()
        };
        let lambdas: Vec<f64> = (0..N_LAMBDA)
            .map(|j| design_lambda - LAMBDA_MARGIN + 2.0 * LAMBDA_MARGIN * j as f64 / (N_LAMBDA - 1) as f64)
            .collect();
        let mut neff_splines = Vec::with_capacity(N_LAMBDA);
        for &lam in &lambdas {
            let mut guess = None;
            let col: Vec<f64> = rs
                .iter()
                .map(|&r| {
                    let m = solve_he11_tracked(r, n_core, 1.0, lam, guess).expect("HE11 guided");
                    guess = Some(m.n_eff);
                    m.n_eff
                })
                .collect();
            neff_splines.push(CubicSpline::new(rs.clone(), col));
        }
        let mut guess = None;
        let mut wi = Vec::with_capacity(rs.len());
        let mut wm = Vec::with_capacity(rs.len());
        for &r in &rs {
            let m = solve_he11_tracked(r, n_core, 1.0, design_lambda, guess).expect("HE11 guided");
            guess = Some(m.n_eff);
            wi.push(m.eps_intensity_integral());
            wm.push(m.eps_intensity_max());
        }
        MaterialTable {
            lambdas,
            neff_splines,
            w_int: CubicSpline::new(rs.clone(), wi),
            w_max: CubicSpline::new(rs, wm),
        }
    }

    /// Radial spline of n_eff at an arbitrary wavelength (polynomial
    /// interpolation across the lambda nodes, done per radius grid point).
    fn neff_at(&self, radius: f64, lambda: f64) -> f64 {
        // Neville interpolation over the lambda nodes
        let mut vals: Vec<f64> = self.neff_splines.iter().map(|s| s.eval(radius)).collect();
        let n = vals.len();
        for level in 1..n {
            for i in 0..n - level {
                let x0 = self.lambdas[i];
                let x1 = self.lambdas[i + level];
                vals[i] = ((lambda - x0) * vals[i + 1] + (x1 - lambda) * vals[i]) / (x1 - x0);
            }
        }
        vals[0]
    }
}

/// Dispersion model for a segment's effective index.
enum IndexModel {
    /// tabulated HE11 of material `table_idx` at the segment radius
    Table(usize),
    /// fixed, wavelength-independent index (synthetic test stacks)
    Fixed(f64),
}

struct Segment {
    model: IndexModel,
    radius: f64,
    thickness: f64,
    /// transverse weights at the design wavelength (1 for synthetic stacks)
    w_int: f64,
    w_max: f64,
}

/// Effective-index stack, substrate (bottom) to air (top), with the QD plane
/// at a segment boundary.
pub struct AxialStack {
    segments: Vec<Segment>,
    tables: Vec<MaterialTable>,
    /// QD plane sits at the bottom face of this segment
    qd_segment: usize,
    pub design_wavelength: f64,
    /// semi-infinite bottom medium (bulk) index
    pub n_substrate: f64,
    /// exit medium above the stack
    pub n_exit: f64,
    /// index used for the (lambda/n)^3 mode-volume normalization
    pub norm_index: f64,
}

/// Resonance characterization record. `f_p` is always (3/(4 pi^2)) q / v_n
/// by construction.
#[derive(Debug, Clone)]
pub struct CavityCharacter {
    pub lambda_c: f64,
    pub q: f64,
    pub v_n: f64,
    pub f_p: f64,
    /// axial positions (nm from stack bottom) of |E|^2 maxima inside the
    /// cavity spacers
    pub antinode_positions: Vec<f64>,
}

/// Purcell factor F_p = (3 / (4 pi^2)) Q / V_n.
pub fn purcell(q: f64, v_n: f64) -> Result<f64> {
    if q <= 0.0 || v_n <= 0.0 {
        return Err(Error::invalid(format!("purcell needs Q, V_n > 0, got {q}, {v_n}")));
    }
    Ok(3.0 / (4.0 * PI * PI) * q / v_n)
}

/// Complex amplitude reflection of a planar layer sequence seen from the
/// entry medium `n_in`; `layers` are (index, thickness) ordered entry side
/// first, terminated by the semi-infinite `n_exit`.
pub fn dbr_reflection(layers: &[(f64, f64)], n_in: f64, n_exit: f64, lambda: f64) -> Complex64 {
    let k = 2.0 * PI / lambda;
    let mut y = Complex64::new(n_exit, 0.0);
    for &(n, t) in layers.iter().rev() {
        let d = k * n * t;
        let (c, s) = (d.cos(), d.sin());
        let nc = Complex64::new(n, 0.0);
        y = nc * (y * c + Complex64::new(0.0, n * s)) / (nc * c + Complex64::new(0.0, 1.0) * y * s);
    }
    (n_in - y) / (n_in + y)
}

impl AxialStack {
    /// Reduce a device geometry to a staircase of effective-index segments.
    pub fn from_geometry(geom: &DeviceGeometry) -> Result<AxialStack> {
        if geom.layers.is_empty() {
            return Err(Error::invalid("geometry has no layers"));
        }
        // collect distinct materials with their radius ranges
        let mut mats: Vec<(f64, f64, f64)> = Vec::new(); // (n_core, r_min, r_max)
        for l in &geom.layers {
            let (rl, rh) = (
                l.radius_bottom.min(l.radius_top),
                l.radius_bottom.max(l.radius_top),
            );
            match mats.iter_mut().find(|m| m.0 == l.material.refractive_index) {
                Some(m) => {
                    m.1 = m.1.min(rl);
                    m.2 = m.2.max(rh);
                }
                None => mats.push((l.material.refractive_index, rl, rh)),
            }
        }
        let tables: Vec<MaterialTable> = mats
            .iter()
            .map(|&(n, rl, rh)| MaterialTable::build(n, rl, rh, geom.design_wavelength))
            .collect();

        let mut segments = Vec::new();
        let mut qd_segment = 0;
        for (li, l) in geom.layers.iter().enumerate() {
            if li == geom.qd_layer_index {
                qd_segment = segments.len();
            }
            let ti = mats
                .iter()
                .position(|m| m.0 == l.material.refractive_index)
                .unwrap();
            let n_seg = ((l.thickness / SEGMENT_HEIGHT).ceil() as usize).max(1);
            let dt = l.thickness / n_seg as f64;
            for s in 0..n_seg {
                let f = (s as f64 + 0.5) / n_seg as f64;
                let r = l.radius_bottom + f * (l.radius_top - l.radius_bottom);
                segments.push(Segment {
                    model: IndexModel::Table(ti),
                    radius: r,
                    thickness: dt,
                    w_int: tables[ti].w_int.eval(r),
                    w_max: tables[ti].w_max.eval(r),
                });
            }
        }
        Ok(AxialStack {
            segments,
            tables,
            qd_segment,
            design_wavelength: geom.design_wavelength,
            n_substrate: geom.substrate.refractive_index,
            n_exit: 1.0,
            norm_index: geom.layers[geom.qd_layer_index].material.refractive_index,
        })
    }

    /// Synthetic stack with fixed (dispersionless) indices; `segments` are
    /// (index, thickness) from bottom to top, QD plane at the bottom face of
    /// segment `qd_segment`. Transverse weights are unity (pure 1D model).
    pub fn from_fixed_segments(
        segments: &[(f64, f64)],
        qd_segment: usize,
        n_substrate: f64,
        n_exit: f64,
        design_wavelength: f64,
    ) -> Result<AxialStack> {
        if segments.is_empty() || qd_segment > segments.len() {
            return Err(Error::invalid("empty stack or QD index out of range"));
        }
        let norm_index = segments[qd_segment.min(segments.len() - 1)].0;
        let segs = segments
            .iter()
            .flat_map(|&(n, t)| {
                let n_seg = ((t / SEGMENT_HEIGHT).ceil() as usize).max(1);
                let dt = t / n_seg as f64;
                (0..n_seg).map(move |_| Segment {
                    model: IndexModel::Fixed(n),
                    radius: 1.0,
                    thickness: dt,
                    w_int: 1.0,
                    w_max: 1.0,
                })
            })
            .collect::<Vec<_>>();
        // remap the QD segment index onto the refined staircase
        let mut qd_refined = 0;
        let mut count = 0;
        for (i, &(_, t)) in segments.iter().enumerate() {
            if i == qd_segment {
                break;
            }
            count += ((t / SEGMENT_HEIGHT).ceil() as usize).max(1);
            qd_refined = count;
        }
        Ok(AxialStack {
            segments: segs,
            tables: vec![],
            qd_segment: qd_refined,
            design_wavelength,
            n_substrate,
            n_exit,
            norm_index,
        })
    }

    /// Uniformly rescale the tabulated transverse mode area (doubling the
    /// area doubles the mode volume at a fixed axial profile).
    pub fn scale_transverse_area(&mut self, factor: f64) {
        for s in &mut self.segments {
            s.w_max /= factor;
        }
    }

    fn seg_index(&self, seg: &Segment, cols: &[CubicSpline]) -> f64 {
        match seg.model {
            IndexModel::Fixed(n) => n,
            IndexModel::Table(ti) => cols[ti].eval(seg.radius),
        }
    }

    /// Per-material radial splines of n_eff frozen at one wavelength
    /// (hoisted out of the per-segment loop for speed).
    fn column_splines(&self, lambda: f64) -> Vec<CubicSpline> {
        self.tables
            .iter()
            .map(|t| {
                let rs = t.neff_splines[0].x.clone();
                let ys = rs.iter().map(|&r| t.neff_at(r, lambda)).collect();
                CubicSpline::new(rs, ys)
            })
            .collect()
    }

    fn reflection(&self, lambda: f64, upward: bool) -> Complex64 {
        let cols = self.column_splines(lambda);
        let k = 2.0 * PI / lambda;
        let n_start = if self.qd_segment < self.segments.len() {
            self.seg_index(&self.segments[self.qd_segment], &cols)
        } else {
            self.norm_index
        };
        // Y = H/E transported in +z by the layer matrix. An upward-outgoing
        // wave has Y = +n, a downward-outgoing one Y = -n; the reflection at
        // the QD plane is b/f = (n - Y)/(n + Y) looking up and
        // f/b = (n + Y)/(n - Y) looking down (f is the upward wave).
        let apply = |y: Complex64, n: f64, t: f64| -> Complex64 {
            let d = k * n * t;
            let (c, s) = (d.cos(), d.sin());
            let nc = Complex64::new(n, 0.0);
            nc * (y * c + Complex64::new(0.0, n * s)) / (nc * c + Complex64::new(0.0, 1.0) * y * s)
        };
        if upward {
            // transport downward from the exit medium: -z, so negated phase
            let mut y = Complex64::new(self.n_exit, 0.0);
            for seg in self.segments[self.qd_segment..].iter().rev() {
                y = apply(y, self.seg_index(seg, &cols), -seg.thickness);
            }
            (n_start - y) / (n_start + y)
        } else {
            let mut y = Complex64::new(-self.n_substrate, 0.0);
            for seg in self.segments[..self.qd_segment].iter() {
                y = apply(y, self.seg_index(seg, &cols), seg.thickness);
            }
            (n_start + y) / (n_start - y)
        }
    }

    /// Amplitude reflection looking upward (toward the facet) from the QD
    /// plane.
    pub fn reflection_up(&self, lambda: f64) -> Complex64 {
        self.reflection(lambda, true)
    }

    /// Amplitude reflection looking downward (toward the substrate) from the
    /// QD plane.
    pub fn reflection_down(&self, lambda: f64) -> Complex64 {
        self.reflection(lambda, false)
    }

    /// Power transmission through the whole stack, substrate to exit medium.
    pub fn transmission(&self, lambda: f64) -> f64 {
        let cols = self.column_splines(lambda);
        let k = 2.0 * PI / lambda;
        // characteristic-matrix product, bottom to top
        let (mut m11, mut m12, mut m21, mut m22) = (
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        for seg in &self.segments {
            let n = self.seg_index(seg, &cols);
            let d = k * n * seg.thickness;
            let (c, s) = (d.cos(), d.sin());
            let a11 = Complex64::new(c, 0.0);
            let a12 = Complex64::new(0.0, s / n);
            let a21 = Complex64::new(0.0, n * s);
            let a22 = Complex64::new(c, 0.0);
            let (b11, b12) = (m11 * a11 + m12 * a21, m11 * a12 + m12 * a22);
            let (b21, b22) = (m21 * a11 + m22 * a21, m21 * a12 + m22 * a22);
            m11 = b11;
            m12 = b12;
            m21 = b21;
            m22 = b22;
        }
        let (n0, ns) = (self.n_substrate, self.n_exit);
        let denom = (m11 + m12 * ns) * n0 + (m21 + m22 * ns);
        let t = 2.0 * n0 / denom;
        (ns / n0) * t.norm_sqr()
    }

    /// Round-trip phase at the QD plane, wrapped to (-pi, pi].
    pub fn round_trip_phase(&self, lambda: f64) -> f64 {
        let ph = self.reflection_up(lambda).arg() + self.reflection_down(lambda).arg();
        wrap_phase(ph)
    }

    /// Cavity resonance: wavelength where the round-trip phase vanishes with
    /// the QD at a field antinode (upward reflection in phase), nearest the
    /// design wavelength.
    pub fn find_resonance(&self) -> Result<f64> {
        let lo = self.design_wavelength - SCAN_HALF_WIDTH;
        let hi = self.design_wavelength + SCAN_HALF_WIDTH;
        let n = 1201;
        let mut best: Option<f64> = None;
        let mut prev_l = lo;
        let mut prev_p = self.round_trip_phase(lo);
        for i in 1..=n {
            let l = lo + (hi - lo) * i as f64 / n as f64;
            let p = self.round_trip_phase(l);
            // zero crossing of the wrapped phase (skip +-pi branch jumps)
            if prev_p * p <= 0.0 && p != prev_p && (prev_p - p).abs() < PI {
                let (mut a, mut b) = (prev_l, l);
                let mut pa = prev_p;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let pm = self.round_trip_phase(mid);
                    if pa * pm > 0.0 {
                        a = mid;
                        pa = pm;
                    } else {
                        b = mid;
                    }
                }
                let root = 0.5 * (a + b);
                // antinode: the QD plane must sit at a maximum of the
                // standing wave, i.e. the upward mirror reflects in phase
                if self.reflection_up(root).arg().abs() < 0.5 * PI {
                    let keep = match best {
                        None => true,
                        Some(b) => {
                            (root - self.design_wavelength).abs() < (b - self.design_wavelength).abs()
                        }
                    };
                    if keep {
                        best = Some(root);
                    }
                }
            }
            prev_l = l;
            prev_p = p;
        }
        best.ok_or(Error::ResonanceNotFound { lo_nm: lo, hi_nm: hi })
    }

    /// Q = lambda / FWHM of the transmission resonance at `lambda_c`.
    pub fn quality_factor_at(&self, lambda_c: f64) -> Result<f64> {
        // refine the transmission peak by golden-section search
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lambda_c - 0.5, lambda_c + 0.5);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (self.transmission(c), self.transmission(d));
        for _ in 0..70 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = self.transmission(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = self.transmission(d);
            }
            if (b - a) < 1e-9 {
                break;
            }
        }
        let l_pk = 0.5 * (a + b);
        let t_pk = self.transmission(l_pk);
        if !(t_pk > 0.0) {
            return Err(Error::invalid("no transmission at resonance"));
        }
        let half = 0.5 * t_pk;
        let half_point = |dir: f64| -> Result<f64> {
            let mut step = 1e-5;
            let mut prev = l_pk;
            loop {
                let l = l_pk + dir * step;
                if self.transmission(l) < half {
                    // bisect between prev and l
                    let (mut x0, mut x1) = (prev, l);
                    for _ in 0..60 {
                        let mid = 0.5 * (x0 + x1);
                        if self.transmission(mid) > half {
                            x0 = mid;
                        } else {
                            x1 = mid;
                        }
                    }
                    return Ok(0.5 * (x0 + x1));
                }
                prev = l;
                step *= 2.0;
                if step > 120.0 {
                    return Err(Error::invalid("transmission linewidth unresolved within 120 nm"));
                }
            }
        };
        match (half_point(1.0), half_point(-1.0)) {
            (Ok(hi), Ok(lo)) => Ok(l_pk / (hi - lo)),
            // Low-contrast resonance (weak mirrors): the transmission never
            // falls to half maximum, so measure Q from the loop gain instead:
            // Q = lambda sqrt|rho| |d(arg rho)/d lambda| / (2(1 - |rho|))
            // with rho = r_up r_down at the QD plane (Airy linewidth).
            _ => {
                let rho = self.reflection_up(l_pk) * self.reflection_down(l_pk);
                let mag = rho.norm();
                if !(mag > 0.0 && mag < 1.0) {
                    return Err(Error::invalid("loop gain outside (0, 1) at resonance"));
                }
                let dl = 0.05;
                let p_hi = self.round_trip_phase(l_pk + dl);
                let p_lo = self.round_trip_phase(l_pk - dl);
                let slope = wrap_phase(p_hi - p_lo) / (2.0 * dl);
                Ok(l_pk * mag.sqrt() * slope.abs() / (2.0 * (1.0 - mag)))
            }
        }
    }

    /// Q at the stack's own resonance.
    pub fn quality_factor(&self) -> Result<f64> {
        let lc = self.find_resonance()?;
        self.quality_factor_at(lc)
    }

    /// Axial standing-wave intensity |E(z)|^2 of the cavity quasi-mode at
    /// segment midpoints; arbitrary overall scale.
    ///
    /// The profile is built outward from the QD plane with the local
    /// reflection coefficients as boundary data (upward wave f = 1 with
    /// return b = r_up above, and the matching superposition below), so the
    /// field decays into both mirrors as a resonant mode must — a plain
    /// scattering solution would instead carry the huge incident wave needed
    /// to push unit power through the bottom mirror.
    pub fn field_profile(&self, lambda: f64) -> Vec<(f64, f64)> {
        let k = 2.0 * PI / lambda;
        self.quasi_mode_amplitudes(lambda)
            .into_iter()
            .zip(self.segments.iter())
            .map(|((z_bot, f, b, n), seg)| {
                let half = Complex64::new(0.0, k * n * seg.thickness * 0.5);
                (z_bot + 0.5 * seg.thickness, (f * half.exp() + b * (-half).exp()).norm_sqr())
            })
            .collect()
    }

    /// Per-segment wave amplitudes (z_bottom, f, b, n_eff) of the quasi-mode,
    /// where the local field is F(z) = f e^{ikn(z - z_bottom)} + b e^{-ikn(...)}.
    ///
    /// Within each segment the split into counter-propagating waves is fixed
    /// by the local admittance looking away from the cavity, so the outgoing
    /// boundary condition is re-imposed at every plane. Naively marching the
    /// amplitudes through a mirror instead amplifies rounding noise by the
    /// mirror's exponential contrast and buries the decaying tail.
    fn quasi_mode_amplitudes(&self, lambda: f64) -> Vec<(f64, Complex64, Complex64, f64)> {
        let cols = self.column_splines(lambda);
        let k = 2.0 * PI / lambda;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![(0.0, zero, zero, 1.0); self.segments.len()];
        let qd = self.qd_segment;
        let apply = |y: Complex64, n: f64, t: f64| -> Complex64 {
            let d = k * n * t;
            let (c, s) = (d.cos(), d.sin());
            let nc = Complex64::new(n, 0.0);
            nc * (y * c + Complex64::new(0.0, n * s)) / (nc * c + Complex64::new(0.0, 1.0) * y * s)
        };
        let indices: Vec<f64> =
            self.segments.iter().map(|s| self.seg_index(s, &cols)).collect();

        // Y = H/E at the bottom face of each segment >= qd, transported
        // downward (-z) from the upward-outgoing exit condition Y = +n_exit
        let mut y_up = vec![zero; self.segments.len()];
        let mut y = Complex64::new(self.n_exit, 0.0);
        for j in (qd..self.segments.len()).rev() {
            y = apply(y, indices[j], -self.segments[j].thickness);
            y_up[j] = y;
        }
        // Y at the top face of each segment < qd, transported upward (+z)
        // from the downward-outgoing substrate condition Y = -n_substrate
        let mut y_dn = vec![zero; qd];
        let mut y = Complex64::new(-self.n_substrate, 0.0);
        for j in 0..qd {
            y = apply(y, indices[j], self.segments[j].thickness);
            y_dn[j] = y;
        }

        let n_qd = if qd < self.segments.len() { indices[qd] } else { self.norm_index };
        let y_qd = y_up.get(qd).copied().unwrap_or(Complex64::new(self.n_exit, 0.0));
        let r_up = (n_qd - y_qd) / (n_qd + y_qd);
        let e_qd = 1.0 + r_up;

        // upward: total field E is continuous; the local split has the
        // upward wave incident, b/f = reflection looking up
        let mut e = e_qd;
        let mut z = self.qd_z();
        for j in qd..self.segments.len() {
            let n = indices[j];
            let t = self.segments[j].thickness;
            let r = (n - y_up[j]) / (n + y_up[j]);
            let f = e / (1.0 + r);
            let b = r * f;
            out[j] = (z, f, b, n);
            let ph = Complex64::new(0.0, k * n * t).exp();
            e = f * ph + b / ph;
            z += t;
        }
        // downward: the downward wave is incident, f/b = (n + Y)/(n - Y) at
        // the segment's top face
        let mut e = e_qd;
        let mut z = self.qd_z();
        for j in (0..qd).rev() {
            let n = indices[j];
            let t = self.segments[j].thickness;
            let s = (n + y_dn[j]) / (n - y_dn[j]);
            let b_top = e / (1.0 + s);
            let f_top = s * b_top;
            let ph = Complex64::new(0.0, k * n * t).exp();
            let (f, b) = (f_top / ph, b_top * ph);
            z -= t;
            out[j] = (z, f, b, n);
            e = f + b;
        }
        out
    }

    /// Normalized mode volume V_n in units of (lambda_C / n)^3 at the given
    /// resonance: V = integral(eps |E|^2) / max(eps |E|^2), separable into
    /// the axial standing wave and the tabulated transverse profile.
    pub fn mode_volume_at(&self, lambda_c: f64) -> Result<f64> {
        let amps = self.quasi_mode_amplitudes(lambda_c);
        let k = 2.0 * PI / lambda_c;
        let mut integral = 0.0;
        let mut peak = 0.0_f64;
        for (seg, &(_, f, b, n)) in self.segments.iter().zip(amps.iter()) {
            // Closed-form integral and maximum of |f e^{iknz} + b e^{-iknz}|^2
            // over the segment (no sampling error on the 133 nm standing wave).
            let t = seg.thickness;
            let fb = f * b.conj();
            let two_kn = 2.0 * k * n;
            let cross = Complex64::new(0.0, two_kn * t).exp() - 1.0;
            let int_e2 = (f.norm_sqr() + b.norm_sqr()) * t
                + 2.0 * (fb * cross / Complex64::new(0.0, two_kn)).re;
            // max of |f|^2 + |b|^2 + 2|fb| cos(phi0 + 2knz) over z in [0, t]
            let phi0 = fb.arg();
            let span = two_kn * t;
            let cos_max = if span >= 2.0 * PI || (-phi0).rem_euclid(2.0 * PI) <= span {
                1.0
            } else {
                phi0.cos().max((phi0 + span).cos())
            };
            let max_e2 = f.norm_sqr() + b.norm_sqr() + 2.0 * fb.norm() * cos_max;
            // The 1D amplitude F carries power ∝ n_eff|F|², while the
            // transverse weights are quoted per unit modal power, so the local
            // energy density picks up a factor n_eff(z).
            integral += n * int_e2 * seg.w_int;
            peak = peak.max(n * max_e2 * seg.w_max);
        }
        if peak <= 0.0 {
            return Err(Error::invalid("vanishing field in mode-volume evaluation"));
        }
        let v = integral / peak;
        Ok(v / (lambda_c / self.norm_index).powi(3))
    }

    /// Positions of standing-wave antinodes within one wavelength of the QD
    /// plane (for antinode-placement verification).
    pub fn antinodes_near_qd(&self, lambda_c: f64) -> Vec<f64> {
        let profile = self.field_profile(lambda_c);
        let qd_z = self.qd_z();
        let window = 2.0 * lambda_c;
        let mut out = Vec::new();
        for i in 1..profile.len() - 1 {
            let (z, e2) = profile[i];
            if (z - qd_z).abs() > window {
                continue;
            }
            if e2 > profile[i - 1].1 && e2 >= profile[i + 1].1 {
                out.push(z);
            }
        }
        out
    }

    /// Axial position of the QD plane from the stack bottom, nm.
    pub fn qd_z(&self) -> f64 {
        self.segments[..self.qd_segment].iter().map(|s| s.thickness).sum()
    }

    /// Full resonance characterization: lambda_C, Q, V_n, F_p, antinodes.
    pub fn characterize(&self) -> Result<CavityCharacter> {
        let lambda_c = self.find_resonance()?;
        let q = self.quality_factor_at(lambda_c)?;
        let v_n = self.mode_volume_at(lambda_c)?;
        Ok(CavityCharacter {
            lambda_c,
            q,
            v_n,
            f_p: purcell(q, v_n)?,
            antinode_positions: self.antinodes_near_qd(lambda_c),
        })
    }
}

fn wrap_phase(p: f64) -> f64 {
    let mut w = p % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// HE11 effective index helper reused by synthetic tests and sweeps.
pub fn he11_neff(radius: f64, n_core: f64, lambda: f64) -> Result<f64> {
    Ok(solve_he11_tracked(radius, n_core, 1.0, lambda, None)?.n_eff)
}

/// Transverse weight pair (integral and peak of eps |e|^2) for a unit-power
/// HE11 mode; exposed for cross-checks.
pub fn transverse_weights(mode: &ModeSolution) -> (f64, f64) {
    (mode.eps_intensity_integral(), mode.eps_intensity_max())
}
