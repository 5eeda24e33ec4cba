//! Experiment configuration: one strict TOML file per run.
//!
//! The file is organized in sections (geometry, materials, collection,
//! emitter, phonons, sweep). Unknown keys are rejected so a typo cannot
//! silently fall back to a default. Every omitted field resolves to the
//! reference hourglass design value and the applied defaults are recorded so
//! output files can list them.

use crate::emission::{GAMMA_BULK_DEFAULT, GAMMA_B_RATIO_DEFAULT};
use crate::error::{Error, Result};
use crate::geometry::{HourglassParams, MaterialSet, N_ALGAAS, N_GAAS};
use crate::phonon::PhononEnv;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Raw file schema; every field optional so minimal configs work.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    geometry: Option<RawGeometry>,
    materials: Option<RawMaterials>,
    collection: Option<RawCollection>,
    emitter: Option<RawEmitter>,
    phonons: Option<RawPhonons>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    center_radius_nm: Option<f64>,
    top_radius_nm: Option<f64>,
    sidewall_angle_deg: Option<f64>,
    qd_dbr_separation_nm: Option<f64>,
    n_top: Option<u32>,
    n_bot: Option<u32>,
    wavelength_nm: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterials {
    n_high: Option<f64>,
    n_low: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollection {
    numerical_aperture: Option<f64>,
    /// optional fixed Gaussian waist (nm); absent = optimize per design
    gaussian_waist_nm: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmitter {
    gamma_bulk_per_s: Option<f64>,
    gamma_b_ratio: Option<f64>,
    gamma_pd_per_s: Option<f64>,
    detuning_rad_per_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhonons {
    enabled: Option<bool>,
    preset: Option<String>,
    alpha_s2: Option<f64>,
    omega_b_rad_per_s: Option<f64>,
    temperature_k: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: Option<String>,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
}

/// Fully-resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub schema_version: u32,
    pub geometry: HourglassParams,
    pub collection: Collection,
    pub emitter: Emitter,
    pub phonons: PhononEnv,
    pub phonon_preset: Option<String>,
    pub sweep: Option<Sweep>,
    /// human-readable record of every default that was applied
    #[serde(skip)]
    pub applied_defaults: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collection {
    pub numerical_aperture: f64,
    pub gaussian_waist_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Emitter {
    pub gamma_bulk_per_s: f64,
    pub gamma_b_ratio: f64,
    pub gamma_pd_per_s: f64,
    pub detuning_rad_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<f64>,
}

fn field_err(path: &str, section: &str, message: impl std::fmt::Display) -> Error {
    Error::config(path, format!("[{section}] {message}"))
}

impl Config {
    /// Reference design with all defaults, no sweep section.
    pub fn reference() -> Config {
        Config::from_toml_str("", "<builtin>").expect("empty config must resolve")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Config::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, path: &str) -> Result<Config> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::config(path, e.to_string()))?;
        let mut defaults: Vec<String> = Vec::new();
        fn note(defaults: &mut Vec<String>, field: &str, value: impl std::fmt::Display) {
            defaults.push(format!("{field} = {value} (default: reference design)"));
        }
        fn take(defaults: &mut Vec<String>, name: &str, v: Option<f64>, dflt: f64) -> f64 {
            v.unwrap_or_else(|| {
                note(defaults, name, dflt);
                dflt
            })
        }

        let version = raw.schema_version.unwrap_or(SCHEMA_VERSION);
        if version != SCHEMA_VERSION {
            return Err(field_err(
                path,
                "schema_version",
                format!("unsupported schema_version {version}, this build reads {SCHEMA_VERSION}"),
            ));
        }

        let g = raw.geometry.unwrap_or_default();
        let reference = HourglassParams::default();
        let center_radius =
            take(&mut defaults, "geometry.center_radius_nm", g.center_radius_nm, reference.center_radius);
        let top_radius = take(&mut defaults, "geometry.top_radius_nm", g.top_radius_nm, reference.top_radius);
        let angle = take(
            &mut defaults,
            "geometry.sidewall_angle_deg",
            g.sidewall_angle_deg,
            reference.sidewall_angle_deg,
        );
        let separation = take(
            &mut defaults,
            "geometry.qd_dbr_separation_nm",
            g.qd_dbr_separation_nm,
            reference.qd_dbr_separation,
        );
        let wavelength = take(&mut defaults, "geometry.wavelength_nm", g.wavelength_nm, reference.wavelength);
        let n_top = g.n_top.unwrap_or_else(|| {
            note(&mut defaults, "geometry.n_top", reference.n_top);
            reference.n_top
        });
        let n_bot = g.n_bot.unwrap_or_else(|| {
            note(&mut defaults, "geometry.n_bot", reference.n_bot);
            reference.n_bot
        });
        for (name, v) in [
            ("geometry.center_radius_nm", center_radius),
            ("geometry.top_radius_nm", top_radius),
            ("geometry.qd_dbr_separation_nm", separation),
            ("geometry.wavelength_nm", wavelength),
        ] {
            if !(v > 0.0) {
                return Err(field_err(path, "geometry", format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..90.0).contains(&angle) {
            return Err(field_err(path, "geometry", format!("sidewall_angle_deg {angle} outside [0, 90)")));
        }

        let m = raw.materials.unwrap_or_default();
        let n_high = take(&mut defaults, "materials.n_high", m.n_high, N_GAAS);
        let n_low = take(&mut defaults, "materials.n_low", m.n_low, N_ALGAAS);
        if !(n_high > n_low && n_low > 1.0) {
            return Err(field_err(path, "materials", format!("need n_high > n_low > 1, got {n_high}, {n_low}")));
        }
        let materials = MaterialSet {
            high: crate::geometry::Material::new("high", n_high)?,
            low: crate::geometry::Material::new("low", n_low)?,
        };

        let c = raw.collection.unwrap_or_default();
        let na = take(&mut defaults, "collection.numerical_aperture", c.numerical_aperture, 0.82);
        if !(0.0 < na && na <= 1.0) {
            return Err(field_err(path, "collection", format!("numerical_aperture {na} outside (0, 1]")));
        }
        if let Some(w) = c.gaussian_waist_nm {
            if !(w > 0.0) {
                return Err(field_err(path, "collection", format!("gaussian_waist_nm {w} must be positive")));
            }
        }

        let e = raw.emitter.unwrap_or_default();
        let gamma_bulk = take(&mut defaults, "emitter.gamma_bulk_per_s", e.gamma_bulk_per_s, GAMMA_BULK_DEFAULT);
        let gamma_b_ratio = take(&mut defaults, "emitter.gamma_b_ratio", e.gamma_b_ratio, GAMMA_B_RATIO_DEFAULT);
        let gamma_pd = take(&mut defaults, "emitter.gamma_pd_per_s", e.gamma_pd_per_s, 0.0);
        let detuning = take(&mut defaults, "emitter.detuning_rad_per_s", e.detuning_rad_per_s, 0.0);
        if !(gamma_bulk > 0.0) {
            return Err(field_err(path, "emitter", "gamma_bulk_per_s must be positive"));
        }
        if !(gamma_b_ratio >= 0.0 && gamma_pd >= 0.0) {
            return Err(field_err(path, "emitter", "rates must be non-negative"));
        }

        let p = raw.phonons.unwrap_or_default();
        let enabled = p.enabled.unwrap_or_else(|| {
            defaults.push("phonons.enabled = true (default: preset environment)".into());
            true
        });
        let explicit = (p.alpha_s2, p.omega_b_rad_per_s, p.temperature_k);
        let (phonons, preset_name) = if !enabled {
            (PhononEnv::off(), None)
        } else {
            match (&p.preset, explicit) {
                (Some(name), (None, None, None)) => match name.as_str() {
                    "inas_4k" => (PhononEnv::inas_4k(), Some(name.clone())),
                    other => {
                        return Err(field_err(
                            path,
                            "phonons",
                            format!("unknown preset '{other}'; available: inas_4k"),
                        ))
                    }
                },
                (None, (Some(alpha), Some(omega_b), Some(t))) => {
                    (PhononEnv::new(true, alpha, omega_b, t)?, None)
                }
                (None, (None, None, None)) => {
                    defaults.push(
                        "phonons.preset = inas_4k (default: representative InAs QD at 4 K; \
                         values taken from the phonon-coupling literature, not from this design study)"
                            .into(),
                    );
                    (PhononEnv::inas_4k(), Some("inas_4k".into()))
                }
                (Some(_), _) => {
                    return Err(field_err(
                        path,
                        "phonons",
                        "give either preset or explicit alpha_s2/omega_b_rad_per_s/temperature_k, not both",
                    ))
                }
                (None, _) => {
                    return Err(field_err(
                        path,
                        "phonons",
                        "phonon parameters are not part of the reference design data: when phonons \
                         are enabled, supply all of alpha_s2, omega_b_rad_per_s, temperature_k, or \
                         preset = \"inas_4k\" (documented representative values from the \
                         phonon-coupling literature)",
                    ))
                }
            }
        };

        let sweep = match raw.sweep {
            None => None,
            Some(s) => {
                let parameter = s.parameter.ok_or_else(|| {
                    field_err(path, "sweep", "sweep.parameter is required when [sweep] is present")
                })?;
                const KNOWN: [&str; 4] = ["n_top", "top_radius_nm", "sidewall_angle_deg", "center_radius_nm"];
                if !KNOWN.contains(&parameter.as_str()) {
                    return Err(field_err(
                        path,
                        "sweep",
                        format!("unknown sweep parameter '{parameter}'; available: {KNOWN:?}"),
                    ));
                }
                let values = match (s.values, s.start, s.stop, s.count) {
                    (Some(v), None, None, None) => v,
                    (None, Some(a), Some(b), Some(n)) => {
                        if n < 2 {
                            return Err(field_err(path, "sweep", "count must be >= 2"));
                        }
                        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                    }
                    _ => {
                        return Err(field_err(
                            path,
                            "sweep",
                            "give either values = [...] or start/stop/count",
                        ))
                    }
                };
                if values.is_empty() {
                    return Err(field_err(path, "sweep", "value list is empty"));
                }
                Some(Sweep { parameter, values })
            }
        };

        Ok(Config {
            schema_version: version,
            geometry: HourglassParams {
                center_radius,
                top_radius,
                sidewall_angle_deg: angle,
                qd_dbr_separation: separation,
                n_top,
                n_bot,
                wavelength,
                materials,
            },
            collection: Collection { numerical_aperture: na, gaussian_waist_nm: c.gaussian_waist_nm },
            emitter: Emitter {
                gamma_bulk_per_s: gamma_bulk,
                gamma_b_ratio,
                gamma_pd_per_s: gamma_pd,
                detuning_rad_per_s: detuning,
            },
            phonons,
            phonon_preset: preset_name,
            sweep,
            applied_defaults: defaults,
        })
    }

    /// Serialize the fully-resolved configuration; parsing the output yields
    /// an identical `Config` (round-trip idempotence).
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("schema_version = {}\n\n[geometry]\n", self.schema_version));
        let g = &self.geometry;
        out.push_str(&format!("center_radius_nm = {:?}\n", g.center_radius));
        out.push_str(&format!("top_radius_nm = {:?}\n", g.top_radius));
        out.push_str(&format!("sidewall_angle_deg = {:?}\n", g.sidewall_angle_deg));
        out.push_str(&format!("qd_dbr_separation_nm = {:?}\n", g.qd_dbr_separation));
        out.push_str(&format!("n_top = {}\n", g.n_top));
        out.push_str(&format!("n_bot = {}\n", g.n_bot));
        out.push_str(&format!("wavelength_nm = {:?}\n", g.wavelength));
        out.push_str("\n[materials]\n");
        out.push_str(&format!("n_high = {:?}\n", g.materials.high.refractive_index));
        out.push_str(&format!("n_low = {:?}\n", g.materials.low.refractive_index));
        out.push_str("\n[collection]\n");
        out.push_str(&format!("numerical_aperture = {:?}\n", self.collection.numerical_aperture));
        if let Some(w) = self.collection.gaussian_waist_nm {
            out.push_str(&format!("gaussian_waist_nm = {w:?}\n"));
        }
        out.push_str("\n[emitter]\n");
        let e = &self.emitter;
        out.push_str(&format!("gamma_bulk_per_s = {:?}\n", e.gamma_bulk_per_s));
        out.push_str(&format!("gamma_b_ratio = {:?}\n", e.gamma_b_ratio));
        out.push_str(&format!("gamma_pd_per_s = {:?}\n", e.gamma_pd_per_s));
        out.push_str(&format!("detuning_rad_per_s = {:?}\n", e.detuning_rad_per_s));
        out.push_str("\n[phonons]\n");
        out.push_str(&format!("enabled = {}\n", self.phonons.enabled));
        if self.phonons.enabled {
            if let Some(preset) = &self.phonon_preset {
                out.push_str(&format!("preset = {preset:?}\n"));
            } else {
                out.push_str(&format!("alpha_s2 = {:?}\n", self.phonons.alpha));
                out.push_str(&format!("omega_b_rad_per_s = {:?}\n", self.phonons.omega_b));
                out.push_str(&format!("temperature_k = {:?}\n", self.phonons.temperature));
            }
        }
        if let Some(sweep) = &self.sweep {
            out.push_str("\n[sweep]\n");
            out.push_str(&format!("parameter = {:?}\n", sweep.parameter));
            out.push_str(&format!("values = {:?}\n", sweep.values));
        }
        out
    }

    /// Disable phonon coupling (the `--no-phonons` CLI flag).
    pub fn without_phonons(mut self) -> Config {
        self.phonons = PhononEnv::off();
        self.phonon_preset = None;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_reference_design() {
        let cfg = Config::reference();
        assert_eq!(cfg.geometry.center_radius, 114.0);
        assert_eq!(cfg.geometry.top_radius, 930.0);
        assert_eq!(cfg.geometry.sidewall_angle_deg, 0.8);
        assert_eq!(cfg.geometry.n_bot, 46);
        assert_eq!(cfg.geometry.wavelength, 925.0);
        assert_eq!(cfg.collection.numerical_aperture, 0.82);
        assert_eq!(cfg.emitter.gamma_b_ratio, 0.05);
        assert!(cfg.phonons.enabled);
        assert!(!cfg.applied_defaults.is_empty());
        assert!(cfg.applied_defaults.iter().any(|d| d.contains("center_radius_nm = 114")));
    }

    #[test]
    fn unknown_keys_rejected_with_path() {
        let err = Config::from_toml_str("[geometry]\nradius_nm = 5.0\n", "test.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("test.toml"), "{msg}");
        assert!(msg.contains("radius_nm") || msg.contains("unknown field"), "{msg}");
    }

    #[test]
    fn invalid_values_rejected_with_field_path() {
        let err = Config::from_toml_str("[geometry]\ncenter_radius_nm = -3.0\n", "t.toml").unwrap_err();
        assert!(err.to_string().contains("center_radius_nm"), "{err}");
        let err = Config::from_toml_str("[collection]\nnumerical_aperture = 1.5\n", "t.toml").unwrap_err();
        assert!(err.to_string().contains("numerical_aperture"), "{err}");
    }

    #[test]
    fn phonons_require_complete_parameters() {
        let err = Config::from_toml_str("[phonons]\nenabled = true\nalpha_s2 = 3e-26\n", "t.toml")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("omega_b_rad_per_s"), "{msg}");
        assert!(msg.contains("literature"), "{msg}");
        let cfg = Config::from_toml_str(
            "[phonons]\nenabled = true\nalpha_s2 = 3e-26\nomega_b_rad_per_s = 2.2e12\ntemperature_k = 4.0\n",
            "t.toml",
        )
        .unwrap();
        assert_eq!(cfg.phonons.alpha, 3e-26);
        assert!(Config::from_toml_str("[phonons]\npreset = \"unknown\"\n", "t.toml").is_err());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = "
schema_version = 1
[geometry]
n_top = 9
top_radius_nm = 800.0
[emitter]
gamma_b_ratio = 0.07
[phonons]
enabled = true
alpha_s2 = 2.5e-26
omega_b_rad_per_s = 2.0e12
temperature_k = 10.0
[sweep]
parameter = \"n_top\"
start = 1.0
stop = 15.0
count = 15
";
        let cfg = Config::from_toml_str(text, "t.toml").unwrap();
        let serialized = cfg.to_toml();
        let cfg2 = Config::from_toml_str(&serialized, "t2.toml").unwrap();
        assert_eq!(cfg.geometry, cfg2.geometry);
        assert_eq!(cfg.collection, cfg2.collection);
        assert_eq!(cfg.emitter, cfg2.emitter);
        assert_eq!(cfg.phonons, cfg2.phonons);
        assert_eq!(cfg.sweep, cfg2.sweep);
        // second round trip is byte-identical
        assert_eq!(serialized, cfg2.to_toml());
    }

    #[test]
    fn sweep_linspace_and_validation() {
        let cfg = Config::from_toml_str(
            "[sweep]\nparameter = \"sidewall_angle_deg\"\nstart = 0.2\nstop = 1.0\ncount = 5\n",
            "t.toml",
        )
        .unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.values, vec![0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert!(Config::from_toml_str("[sweep]\nparameter = \"bogus\"\nvalues = [1.0]\n", "t.toml").is_err());
        assert!(Config::from_toml_str("[sweep]\nparameter = \"n_top\"\n", "t.toml").is_err());
    }

    #[test]
    fn no_phonons_flag_disables_environment() {
        let cfg = Config::reference().without_phonons();
        assert!(!cfg.phonons.enabled);
        let text = cfg.to_toml();
        assert!(text.contains("enabled = false"));
        let cfg2 = Config::from_toml_str(&text, "t.toml").unwrap();
        assert!(!cfg2.phonons.enabled);
    }
}
