//! Materials and axial layer-stack construction for the micropillar and
//! hourglass devices.
//!
//! The hourglass is two opposed cones with the quantum dot at the narrow
//! waist: a spacer of height `h` on each side, distributed Bragg reflectors
//! (DBRs) continuing each cone, a homogeneous taper extension up to the top
//! facet radius, and a quarter-wave antireflection coating. Every DBR layer
//! is quarter-wave at the *local* HE11 effective index of its own cone
//! radius, which keeps the mirrors phase-correct in the strongly screened
//! small-diameter regime.

use crate::error::{Error, Result};
use crate::modesolver::solve_he11_tracked;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;

/// GaAs refractive index at 925 nm, 4 K.
pub const N_GAAS: f64 = 3.4788;
/// Al(0.33)GaAs refractive index at 925 nm, 4 K.
pub const N_ALGAAS: f64 = 2.9895;

/// An optical material: a name and its (fixed) refractive index at the
/// design wavelength and operating temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub refractive_index: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, refractive_index: f64) -> Result<Self> {
        if refractive_index < 1.0 {
            return Err(Error::invalid(format!(
                "refractive index must be >= 1, got {refractive_index}"
            )));
        }
        Ok(Material {
            name: name.into(),
            refractive_index,
        })
    }

    pub fn gaas() -> Self {
        Material {
            name: "GaAs".into(),
            refractive_index: N_GAAS,
        }
    }

    pub fn algaas() -> Self {
        Material {
            name: "AlGaAs".into(),
            refractive_index: N_ALGAAS,
        }
    }

    /// Antireflection coating matched to a core of index `n_core`
    /// (index sqrt(n_core)).
    pub fn ar(n_core: f64) -> Self {
        Material {
            name: "AR".into(),
            refractive_index: n_core.sqrt(),
        }
    }
}

/// One axial layer. Equal radii describe a cylinder section; unequal radii a
/// conical taper segment (radius linear in z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: Material,
    #[serde(rename = "thickness_nm")]
    pub thickness: f64,
    #[serde(rename = "r_bot_nm")]
    pub radius_bottom: f64,
    #[serde(rename = "r_top_nm")]
    pub radius_top: f64,
}

/// High/low index pair used for the DBR mirrors plus the spacer material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    /// spacer / high-index DBR material (GaAs)
    pub high: Material,
    /// low-index DBR material (AlGaAs)
    pub low: Material,
}

impl Default for MaterialSet {
    fn default() -> Self {
        MaterialSet {
            high: Material::gaas(),
            low: Material::algaas(),
        }
    }
}

/// Complete axial description of a device, substrate (bottom) to air (top).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    pub layers: Vec<Layer>,
    /// layer containing the quantum dot
    pub qd_layer_index: usize,
    /// axial position of the QD within that layer, from its bottom face, nm
    pub qd_axial_offset: f64,
    pub design_wavelength: f64,
    pub center_radius: f64,
    pub top_radius: f64,
    pub sidewall_angle_deg: f64,
    pub qd_dbr_separation: f64,
    pub n_top: u32,
    pub n_bot: u32,
    /// semi-infinite medium below the stack
    pub substrate: Material,
}

/// Parameters of the hourglass builder; defaults are the reference design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourglassParams {
    /// waist radius R0 at the QD plane, nm
    pub center_radius: f64,
    /// top facet radius R_top, nm
    pub top_radius: f64,
    /// sidewall angle theta, degrees
    pub sidewall_angle_deg: f64,
    /// QD-to-DBR separation h on each side, nm
    pub qd_dbr_separation: f64,
    pub n_top: u32,
    pub n_bot: u32,
    /// design wavelength, nm
    pub wavelength: f64,
    #[serde(default)]
    pub materials: MaterialSet,
}

impl Default for HourglassParams {
    fn default() -> Self {
        HourglassParams {
            center_radius: 114.0,
            top_radius: 930.0,
            sidewall_angle_deg: 0.8,
            qd_dbr_separation: 24142.0,
            n_top: 11,
            n_bot: 46,
            wavelength: 925.0,
            materials: MaterialSet::default(),
        }
    }
}

/// Parameters of the straight micropillar builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicropillarParams {
    pub radius: f64,
    pub n_top: u32,
    pub n_bot: u32,
    pub wavelength: f64,
    #[serde(default)]
    pub materials: MaterialSet,
}

/// Local HE11 effective index at the design wavelength, as a function of the
/// core index and radius. Implementations may cache or interpolate.
pub trait EffectiveIndexProvider {
    fn n_eff(&self, n_core: f64, radius: f64) -> f64;
}

/// Direct dispersion-equation solves, seeded from the previous radius per
/// material for speed (radii change slowly along a taper).
pub struct ExactEffectiveIndex {
    wavelength: f64,
    last: RefCell<HashMap<u64, f64>>,
}

impl ExactEffectiveIndex {
    pub fn new(wavelength: f64) -> Self {
        ExactEffectiveIndex {
            wavelength,
            last: RefCell::new(HashMap::new()),
        }
    }
}

impl EffectiveIndexProvider for ExactEffectiveIndex {
    fn n_eff(&self, n_core: f64, radius: f64) -> f64 {
        let key = n_core.to_bits();
        let guess = self.last.borrow().get(&key).copied();
        let m = solve_he11_tracked(radius, n_core, 1.0, self.wavelength, guess)
            .expect("HE11 has no cutoff");
        self.last.borrow_mut().insert(key, m.n_eff);
        m.n_eff
    }
}

/// Quarter-wave thickness lambda / (4 n_eff) for a layer of the given
/// material guided at effective index `n_eff`.
pub fn quarter_wave_thickness(_material: &Material, n_eff: f64, lambda: f64) -> Result<f64> {
    if n_eff < 1.0 || lambda <= 0.0 {
        return Err(Error::invalid(format!(
            "quarter-wave inputs out of range: n_eff = {n_eff}, lambda = {lambda}"
        )));
    }
    Ok(lambda / (4.0 * n_eff))
}

/// Antireflection layer for a core of index `n_core`: index sqrt(n_core),
/// thickness lambda / (4 n_eff_ar) with `n_eff_ar` the guided effective
/// index of the coating section, placed at the given facet radius.
pub fn ar_coating(n_core: f64, n_eff_ar: f64, lambda: f64, radius: f64) -> Result<Layer> {
    if n_core < 1.0 {
        return Err(Error::invalid(format!("n_core must be >= 1, got {n_core}")));
    }
    Ok(Layer {
        material: Material::ar(n_core),
        thickness: quarter_wave_thickness(&Material::ar(n_core), n_eff_ar, lambda)?,
        radius_bottom: radius,
        radius_top: radius,
    })
}

/// Self-consistent quarter-wave thickness on a cone: the local effective
/// index is evaluated at the layer's own mean radius, iterated to a fixed
/// point.
fn taper_quarter_wave(
    material: &Material,
    r_start: f64,
    tan_theta: f64,
    lambda: f64,
    neff: &dyn EffectiveIndexProvider,
) -> f64 {
    let n_core = material.refractive_index;
    let mut t = lambda / (4.0 * neff.n_eff(n_core, r_start));
    for _ in 0..20 {
        let t_new = lambda / (4.0 * neff.n_eff(n_core, r_start + tan_theta * 0.5 * t));
        if (t_new - t).abs() < 1e-10 * t {
            t = t_new;
            break;
        }
        t = t_new;
    }
    t
}

/// One cone half (spacer + DBR pairs), walking away from the QD plane.
/// Returns layers ordered QD-side first, with radius_bottom the QD-side
/// radius.
fn cone_section(
    params: &HourglassParams,
    n_pairs: u32,
    tan_theta: f64,
    neff: &dyn EffectiveIndexProvider,
) -> Vec<Layer> {
    let mats = &params.materials;
    let mut layers = Vec::with_capacity(1 + 2 * n_pairs as usize);
    let mut r = params.center_radius;
    let mut push = |material: &Material, thickness: f64, r: &mut f64| {
        let r0 = *r;
        let r1 = r0 + tan_theta * thickness;
        layers.push(Layer {
            material: material.clone(),
            thickness,
            radius_bottom: r0,
            radius_top: r1,
        });
        *r = r1;
    };
    push(&mats.high, params.qd_dbr_separation, &mut r);
    for _ in 0..n_pairs {
        for m in [&mats.low, &mats.high] {
            let t = taper_quarter_wave(m, r, tan_theta, params.wavelength, neff);
            push(m, t, &mut r);
        }
    }
    layers
}

/// Build the hourglass stack: bottom DBR + spacer below the QD, mirrored
/// spacer + top DBR above it, homogeneous taper extension to the facet
/// radius, and the AR coating.
pub fn build_hourglass(
    params: &HourglassParams,
    neff: &dyn EffectiveIndexProvider,
) -> Result<DeviceGeometry> {
    if params.center_radius <= 0.0
        || params.top_radius <= 0.0
        || params.qd_dbr_separation <= 0.0
        || params.wavelength <= 0.0
    {
        return Err(Error::invalid("all lengths must be positive"));
    }
    if params.sidewall_angle_deg < 0.0 {
        return Err(Error::invalid("sidewall angle must be >= 0"));
    }
    if params.top_radius < params.center_radius {
        return Err(Error::invalid(format!(
            "top radius {} nm below waist radius {} nm (inverted-trumpet assumption violated)",
            params.top_radius, params.center_radius
        )));
    }
    let tan_theta = params.sidewall_angle_deg.to_radians().tan();

    // bottom half: built walking downward from the QD, then flipped
    let down = cone_section(params, params.n_bot, tan_theta, neff);
    let mut layers: Vec<Layer> = down
        .iter()
        .rev()
        .map(|l| Layer {
            material: l.material.clone(),
            thickness: l.thickness,
            radius_bottom: l.radius_top,
            radius_top: l.radius_bottom,
        })
        .collect();

    // top half
    let qd_layer_index = layers.len();
    let up = cone_section(params, params.n_top, tan_theta, neff);
    let mut r_cur = up.last().map(|l| l.radius_top).unwrap_or(params.center_radius);
    layers.extend(up);

    // homogeneous taper extension to the facet radius
    if params.top_radius > r_cur + 1e-9 {
        if tan_theta <= 0.0 {
            return Err(Error::invalid(
                "zero sidewall angle cannot reach a larger top radius",
            ));
        }
        let t_ext = (params.top_radius - r_cur) / tan_theta;
        layers.push(Layer {
            material: params.materials.high.clone(),
            thickness: t_ext,
            radius_bottom: r_cur,
            radius_top: params.top_radius,
        });
        r_cur = params.top_radius;
    }

    // AR coating at the facet
    let n_core = params.materials.high.refractive_index;
    let n_eff_ar = neff.n_eff(n_core.sqrt(), r_cur);
    layers.push(ar_coating(n_core, n_eff_ar, params.wavelength, r_cur)?);

    Ok(DeviceGeometry {
        layers,
        qd_layer_index,
        qd_axial_offset: 0.0,
        design_wavelength: params.wavelength,
        center_radius: params.center_radius,
        top_radius: params.top_radius,
        sidewall_angle_deg: params.sidewall_angle_deg,
        qd_dbr_separation: params.qd_dbr_separation,
        n_top: params.n_top,
        n_bot: params.n_bot,
        substrate: params.materials.high.clone(),
    })
}

/// Straight micropillar: the hourglass builder at zero sidewall angle with a
/// wavelength-thick cavity (spacer lambda/(2 n_eff) on each side of the QD).
pub fn build_micropillar(
    params: &MicropillarParams,
    neff: &dyn EffectiveIndexProvider,
) -> Result<DeviceGeometry> {
    if params.radius <= 0.0 {
        return Err(Error::invalid("radius must be positive"));
    }
    let n_eff = neff.n_eff(params.materials.high.refractive_index, params.radius);
    let hp = HourglassParams {
        center_radius: params.radius,
        top_radius: params.radius,
        sidewall_angle_deg: 0.0,
        qd_dbr_separation: params.wavelength / (2.0 * n_eff),
        n_top: params.n_top,
        n_bot: params.n_bot,
        wavelength: params.wavelength,
        materials: params.materials.clone(),
    };
    build_hourglass(&hp, neff)
}

impl DeviceGeometry {
    /// Total stack height, nm.
    pub fn total_height(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Axial position of the QD plane measured from the stack bottom, nm.
    pub fn qd_z(&self) -> f64 {
        self.layers[..self.qd_layer_index]
            .iter()
            .map(|l| l.thickness)
            .sum::<f64>()
            + self.qd_axial_offset
    }

    /// Height of the structure above the QD plane excluding the AR coat
    /// (the "top taper height" H).
    pub fn top_taper_height(&self) -> f64 {
        let above: f64 = self.layers[self.qd_layer_index..]
            .iter()
            .map(|l| l.thickness)
            .sum();
        above - self.layers.last().map(|l| l.thickness).unwrap_or(0.0)
    }

    /// Local radius at axial position z (from stack bottom), linear within
    /// each layer.
    pub fn radius_at(&self, z: f64) -> f64 {
        let mut z0 = 0.0;
        for l in &self.layers {
            if z <= z0 + l.thickness {
                let f = ((z - z0) / l.thickness).clamp(0.0, 1.0);
                return l.radius_bottom + f * (l.radius_top - l.radius_bottom);
            }
            z0 += l.thickness;
        }
        self.layers.last().map(|l| l.radius_top).unwrap_or(0.0)
    }

    /// Lossless text serialization (structured key-value + layer table).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("geometry serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::config("geometry", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provider() -> ExactEffectiveIndex {
        ExactEffectiveIndex::new(925.0)
    }

    #[test]
    fn quarter_wave_values() {
        let t = quarter_wave_thickness(&Material::gaas(), 3.4788, 925.0).unwrap();
        assert!((t - 66.47).abs() < 0.01, "t = {t}");
        let t = quarter_wave_thickness(&Material::gaas(), 1.0, 925.0).unwrap();
        assert!((t - 231.25).abs() < 1e-9);
        let t = quarter_wave_thickness(&Material::ar(N_GAAS), 1.8652, 925.0).unwrap();
        assert!((t - 123.99).abs() < 0.01, "t = {t}");
        assert!(quarter_wave_thickness(&Material::gaas(), 0.5, 925.0).is_err());
    }

    #[test]
    fn ar_coating_values() {
        let l = ar_coating(3.4788, 1.8652, 925.0, 930.0).unwrap();
        assert!((l.material.refractive_index - 1.8652).abs() < 1e-4);
        assert!((l.thickness - 123.99).abs() < 0.01);
        let l = ar_coating(1.0, 1.0, 925.0, 930.0).unwrap();
        assert!((l.material.refractive_index - 1.0).abs() < 1e-12);
        assert!((l.thickness - 231.25).abs() < 1e-9);
        assert!(ar_coating(0.9, 1.0, 925.0, 930.0).is_err());
    }

    #[test]
    fn hourglass_top_height_near_reference() {
        let g = build_hourglass(&HourglassParams::default(), &provider()).unwrap();
        let h_um = g.top_taper_height() / 1000.0;
        assert!((h_um - 58.5).abs() / 58.5 < 0.05, "H = {h_um} um");
    }

    #[test]
    fn height_decreases_with_angle() {
        let mut prev = f64::INFINITY;
        for theta in [0.5, 0.8, 1.5, 3.0] {
            let p = HourglassParams {
                sidewall_angle_deg: theta,
                ..Default::default()
            };
            let h = build_hourglass(&p, &provider()).unwrap().top_taper_height();
            assert!(h < prev, "H not decreasing at theta = {theta}");
            prev = h;
        }
    }

    #[test]
    fn stack_contiguity_exact() {
        let g = build_hourglass(&HourglassParams::default(), &provider()).unwrap();
        for w in g.layers.windows(2) {
            assert_eq!(w[0].radius_top, w[1].radius_bottom);
        }
    }

    #[test]
    fn dbr_layers_are_locally_quarter_wave() {
        let p = HourglassParams::default();
        let prov = provider();
        let g = build_hourglass(&p, &prov).unwrap();
        let tan_theta = p.sidewall_angle_deg.to_radians().tan();
        // skip spacers, extension, AR: DBR layers are AlGaAs/GaAs pairs
        for l in &g.layers {
            if l.material.name == "AR"
                || (l.material.name == "GaAs"
                    && (l.thickness > 1000.0 || (l.radius_top - l.radius_bottom).abs() < 1e-12))
            {
                continue;
            }
            let r_mid = 0.5 * (l.radius_bottom + l.radius_top);
            let n_eff = prov.n_eff(l.material.refractive_index, r_mid);
            let expected = p.wavelength / (4.0 * n_eff);
            assert!(
                (l.thickness - expected).abs() < 1e-8 * expected,
                "layer at r = {r_mid} not quarter-wave: {} vs {expected}",
                l.thickness
            );
            let _ = tan_theta;
        }
    }

    #[test]
    fn mirror_symmetry_about_qd() {
        let p = HourglassParams::default();
        let g = build_hourglass(&p, &provider()).unwrap();
        let below = &g.layers[..g.qd_layer_index];
        let above = &g.layers[g.qd_layer_index..];
        // spacer + n_top pairs exist on both sides; compare pairwise walking
        // away from the QD plane
        for k in 0..(1 + 2 * p.n_top as usize) {
            let lb = &below[below.len() - 1 - k];
            let la = &above[k];
            assert_eq!(lb.material, la.material, "material asymmetry at k = {k}");
            assert!(
                (lb.thickness - la.thickness).abs() < 1e-9,
                "thickness asymmetry at k = {k}"
            );
        }
    }

    #[test]
    fn degenerate_taper_is_straight() {
        let p = HourglassParams {
            top_radius: 114.0,
            sidewall_angle_deg: 0.0,
            ..Default::default()
        };
        let g = build_hourglass(&p, &provider()).unwrap();
        for l in &g.layers {
            assert_eq!(l.radius_bottom, 114.0);
            assert_eq!(l.radius_top, 114.0);
        }
    }

    #[test]
    fn micropillar_structure() {
        let p = MicropillarParams {
            radius: 1000.0,
            n_top: 20,
            n_bot: 30,
            wavelength: 925.0,
            materials: MaterialSet::default(),
        };
        let g = build_micropillar(&p, &provider()).unwrap();
        // 2 pairs' layers per mirror + 2 spacers + AR
        assert_eq!(g.layers.len(), 2 * (20 + 30) + 2 + 1);
        // QD at the cavity center
        let below = &g.layers[g.qd_layer_index - 1];
        let above = &g.layers[g.qd_layer_index];
        assert!((below.thickness - above.thickness).abs() < 1e-9);
    }

    #[test]
    fn inverted_trumpet_rejected() {
        let p = HourglassParams {
            top_radius: 50.0,
            ..Default::default()
        };
        assert!(build_hourglass(&p, &provider()).is_err());
    }

    #[test]
    fn serialization_round_trips() {
        let g = build_hourglass(&HourglassParams::default(), &provider()).unwrap();
        let s1 = g.to_toml();
        let g2 = DeviceGeometry::from_toml(&s1).unwrap();
        assert_eq!(g, g2);
        assert_eq!(s1, g2.to_toml());
    }
}
