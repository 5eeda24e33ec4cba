//! Design-space sweeps and the command-line front end.
//!
//! Each verb reproduces one figure-style scan (collection vs top radius,
//! taper transmission vs angle, cavity figures vs mirror pairs, and the full
//! efficiency/indistinguishability trade-off), or evaluates/optimizes a
//! single design. Sweep points run on a rayon pool and are written back in
//! index order, so CSV rows are bitwise reproducible for any `--jobs` value.
//! CSV headers carry the tool version and a hash of the resolved
//! configuration (no timestamps — reruns must be identical).

use crate::axial::{AxialStack, CavityCharacter};
use crate::config::Config;
use crate::emission::{beta, EmitterCavityParams, FigureOfMerit};
use crate::error::{Error, Result};
use crate::farfield::{far_field, gaussian_coupling, lens_transmission};
use crate::geometry::{build_hourglass, ExactEffectiveIndex};
use crate::modesolver::{solve_mode, ModeLabel};
use crate::plot::LinePlot;
use crate::quantum::{evolve, indistinguishability};
use crate::taper::{taper_transmission, Taper};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lens/fiber collection at a facet radius: (gamma_L Gaussian coupling,
/// gamma_L_T raw lens transmission).
pub fn collection_at_radius(cfg: &Config, r_top: f64) -> Result<(f64, f64)> {
    let mode = solve_mode(
        r_top,
        cfg.geometry.materials.high.refractive_index,
        1.0,
        cfg.geometry.wavelength,
        ModeLabel::HE11,
    )?;
    let ff = far_field(&mode);
    let na = cfg.collection.numerical_aperture;
    Ok((gaussian_coupling(&ff, na)?, lens_transmission(&ff, na)?))
}

/// Fundamental-mode taper transmission at a sidewall angle (two-mode basis,
/// default staircase).
pub fn taper_t11(cfg: &Config, theta_deg: f64) -> Result<f64> {
    let taper = Taper::from_angle(
        cfg.geometry.center_radius,
        cfg.geometry.top_radius,
        theta_deg,
        cfg.geometry.materials.high.refractive_index,
        1.0,
    )?;
    let res = taper_transmission(&taper, cfg.geometry.wavelength, 2, taper.default_segments())?;
    Ok(res.t11)
}

/// Resonance characterization of the hourglass cavity at a mirror count.
pub fn characterize_design(cfg: &Config, n_top: u32) -> Result<CavityCharacter> {
    let mut params = cfg.geometry.clone();
    params.n_top = n_top;
    let neff = ExactEffectiveIndex::new(params.wavelength);
    let geom = build_hourglass(&params, &neff)?;
    AxialStack::from_geometry(&geom)?.characterize()
}

/// Full single-design evaluation: efficiency chain plus master-equation
/// indistinguishability.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub fom: FigureOfMerit,
    pub character: CavityCharacter,
    pub g: f64,
    pub kappa: f64,
}

pub fn evaluate_design(cfg: &Config) -> Result<EvaluationReport> {
    let character = characterize_design(cfg, cfg.geometry.n_top)?;
    let (gamma_l, _) = collection_at_radius(cfg, cfg.geometry.top_radius)?;
    let t11 = taper_t11(cfg, cfg.geometry.sidewall_angle_deg)?;
    let b = beta(character.f_p, cfg.emitter.gamma_b_ratio)?;
    let mut params = EmitterCavityParams::from_cavity(
        &character,
        cfg.emitter.gamma_b_ratio,
        cfg.emitter.gamma_bulk_per_s,
        cfg.phonons.clone(),
    )?;
    params.gamma_pd = cfg.emitter.gamma_pd_per_s;
    params.detuning = cfg.emitter.detuning_rad_per_s;
    let eta = indistinguishability(&evolve(&params)?)?;
    let design = format!(
        "hourglass n_top={} R0={} Rtop={} theta={}",
        cfg.geometry.n_top, cfg.geometry.center_radius, cfg.geometry.top_radius, cfg.geometry.sidewall_angle_deg
    );
    Ok(EvaluationReport {
        fom: FigureOfMerit::assemble(design, b, gamma_l, t11, eta)?,
        g: params.g,
        kappa: params.kappa,
        character,
    })
}

/// 9-significant-digit CSV number formatting, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        "nan".into()
    }
}

fn config_sha(cfg: &Config) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_csv(
    path: &Path,
    verb: &str,
    cfg: &Config,
    columns: &[&str],
    rows: &[Vec<String>],
    errors: &[String],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# hourglass v{TOOL_VERSION}\n"));
    out.push_str(&format!("# command: {verb}\n"));
    out.push_str(&format!("# config sha256: {}\n", config_sha(cfg)));
    for d in &cfg.applied_defaults {
        out.push_str(&format!("# default applied: {d}\n"));
    }
    for e in errors {
        out.push_str(&format!("# error: {e}\n"));
    }
    out.push_str(&format!("# columns: {}\n", columns.join(",")));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Values for a sweep verb: the config's [sweep] section when it targets the
/// verb's parameter, otherwise the verb's default grid.
fn sweep_values(cfg: &Config, parameter: &str, default: Vec<f64>) -> Vec<f64> {
    match &cfg.sweep {
        Some(s) if s.parameter == parameter => s.values.clone(),
        _ => default,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Result of one sweep: written CSV path and per-point failures.
#[derive(Debug)]
pub struct SweepOutcome {
    pub csv_path: PathBuf,
    pub points: usize,
    pub failed: usize,
}

pub fn run_fig2(cfg: &Config, out_dir: &Path, svg: bool) -> Result<SweepOutcome> {
    let radii = sweep_values(cfg, "top_radius_nm", linspace(300.0, 2000.0, 50));
    let results: Vec<(f64, Result<(f64, f64)>)> = radii
        .par_iter()
        .map(|&r| (r, collection_at_radius(cfg, r)))
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for (r, res) in &results {
        match res {
            Ok((gl, glt)) => {
                if best.map_or(true, |(_, g)| *gl > g) {
                    best = Some((*r, *gl));
                }
                rows.push(vec![fmt_sig(*r), fmt_sig(*gl), fmt_sig(*glt)]);
            }
            Err(e) => {
                errors.push(format!("R_top = {r} nm: {e}"));
                rows.push(vec![fmt_sig(*r), "nan".into(), "nan".into()]);
            }
        }
    }
    if let Some((r, g)) = best {
        println!("gamma_L peak {g:.6} at R_top = {r} nm");
    }
    let csv_path = out_dir.join("fig2.csv");
    write_csv(&csv_path, "fig2", cfg, &["R_top_nm", "gamma_L", "gamma_L_T"], &rows, &errors)?;
    if svg {
        let pts = |k: usize| {
            results
                .iter()
                .filter_map(|(r, res)| res.as_ref().ok().map(|t| (*r, if k == 0 { t.0 } else { t.1 })))
                .collect::<Vec<_>>()
        };
        LinePlot::new("collection vs top radius", "R_top (nm)", "transmission")
            .series("gamma_L", pts(0))
            .series("gamma_L_T", pts(1))
            .write_svg(out_dir.join("fig2.svg"))?;
    }
    Ok(SweepOutcome { csv_path, points: radii.len(), failed: errors.len() })
}

pub fn run_fig3(cfg: &Config, out_dir: &Path, svg: bool) -> Result<SweepOutcome> {
    let thetas = sweep_values(cfg, "sidewall_angle_deg", linspace(0.2, 3.0, 15));
    let results: Vec<(f64, Result<f64>)> =
        thetas.par_iter().map(|&th| (th, taper_t11(cfg, th))).collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (th, res) in &results {
        match res {
            Ok(t11) => rows.push(vec![fmt_sig(*th), fmt_sig(*t11)]),
            Err(e) => {
                errors.push(format!("theta = {th} deg: {e}"));
                rows.push(vec![fmt_sig(*th), "nan".into()]);
            }
        }
    }
    let csv_path = out_dir.join("fig3.csv");
    write_csv(&csv_path, "fig3", cfg, &["theta_deg", "T11"], &rows, &errors)?;
    if svg {
        let pts: Vec<(f64, f64)> =
            results.iter().filter_map(|(th, r)| r.as_ref().ok().map(|t| (*th, *t))).collect();
        LinePlot::new("taper transmission vs sidewall angle", "theta (deg)", "T11")
            .series("T11", pts)
            .write_svg(out_dir.join("fig3.svg"))?;
    }
    Ok(SweepOutcome { csv_path, points: thetas.len(), failed: errors.len() })
}

fn n_top_values(cfg: &Config) -> Vec<u32> {
    sweep_values(cfg, "n_top", (1..=15).map(|n| n as f64).collect())
        .into_iter()
        .map(|v| v.round().max(1.0) as u32)
        .collect()
}

pub fn run_fig4(cfg: &Config, out_dir: &Path, svg: bool) -> Result<SweepOutcome> {
    let n_tops = n_top_values(cfg);
    let results: Vec<(u32, Result<(f64, CavityCharacter)>)> = n_tops
        .par_iter()
        .map(|&n| {
            let res = characterize_design(cfg, n)
                .and_then(|ch| Ok((beta(ch.f_p, cfg.emitter.gamma_b_ratio)?, ch)));
            (n, res)
        })
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (n, res) in &results {
        match res {
            Ok((b, ch)) => rows.push(vec![
                n.to_string(),
                fmt_sig(*b),
                fmt_sig(ch.f_p),
                fmt_sig(ch.q),
                fmt_sig(ch.v_n),
            ]),
            Err(e) => {
                errors.push(format!("n_top = {n}: {e}"));
                rows.push(vec![n.to_string(), "nan".into(), "nan".into(), "nan".into(), "nan".into()]);
            }
        }
    }
    let csv_path = out_dir.join("fig4.csv");
    write_csv(&csv_path, "fig4", cfg, &["n_top", "beta", "F_p", "Q", "V_n"], &rows, &errors)?;
    if svg {
        let pts: Vec<(f64, f64)> = results
            .iter()
            .filter_map(|(n, r)| r.as_ref().ok().map(|(b, _)| (*n as f64, *b)))
            .collect();
        LinePlot::new("beta vs top mirror pairs", "n_top", "beta")
            .series("beta", pts)
            .write_svg(out_dir.join("fig4.svg"))?;
    }
    Ok(SweepOutcome { csv_path, points: n_tops.len(), failed: errors.len() })
}

pub fn run_fig5(cfg: &Config, out_dir: &Path, svg: bool) -> Result<SweepOutcome> {
    let n_tops = n_top_values(cfg);
    // the taper/collection chain does not depend on n_top: compute once
    let (gamma_l, _) = collection_at_radius(cfg, cfg.geometry.top_radius)?;
    let t11 = taper_t11(cfg, cfg.geometry.sidewall_angle_deg)?;
    let gamma = gamma_l * t11;
    let results: Vec<(u32, Result<(f64, f64, f64, f64)>)> = n_tops
        .par_iter()
        .map(|&n| {
            let res = (|| {
                let ch = characterize_design(cfg, n)?;
                let b = beta(ch.f_p, cfg.emitter.gamma_b_ratio)?;
                let eps_s = b * gamma;
                let mut params = EmitterCavityParams::from_cavity(
                    &ch,
                    cfg.emitter.gamma_b_ratio,
                    cfg.emitter.gamma_bulk_per_s,
                    cfg.phonons.clone(),
                )?;
                params.gamma_pd = cfg.emitter.gamma_pd_per_s;
                params.detuning = cfg.emitter.detuning_rad_per_s;
                let eta = indistinguishability(&evolve(&params)?)?;
                Ok((eps_s, eps_s, eta, eps_s * eta))
            })();
            (n, res)
        })
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut best: Option<(u32, f64)> = None;
    for (n, res) in &results {
        match res {
            Ok((eps_s, eps, eta, eps_eta)) => {
                if best.map_or(true, |(_, v)| *eps_eta > v) {
                    best = Some((*n, *eps_eta));
                }
                rows.push(vec![n.to_string(), fmt_sig(*eps_s), fmt_sig(*eps), fmt_sig(*eta), fmt_sig(*eps_eta)]);
            }
            Err(e) => {
                errors.push(format!("n_top = {n}: {e}"));
                rows.push(vec![n.to_string(), "nan".into(), "nan".into(), "nan".into(), "nan".into()]);
            }
        }
    }
    if let Some((n, v)) = best {
        println!("optimum eps*eta = {v:.6} at n_top = {n}");
    }
    let csv_path = out_dir.join("fig5.csv");
    write_csv(&csv_path, "fig5", cfg, &["n_top", "eps_s", "eps", "eta", "eps_eta"], &rows, &errors)?;
    if svg {
        let pts = |k: usize| {
            results
                .iter()
                .filter_map(|(n, r)| {
                    r.as_ref().ok().map(|t| (*n as f64, [t.1, t.2, t.3][k]))
                })
                .collect::<Vec<_>>()
        };
        LinePlot::new("efficiency and indistinguishability", "n_top", "fraction")
            .series("eps", pts(0))
            .series("eta", pts(1))
            .series("eps_eta", pts(2))
            .write_svg(out_dir.join("fig5.svg"))?;
    }
    Ok(SweepOutcome { csv_path, points: n_tops.len(), failed: errors.len() })
}

const FOM_COLUMNS: [&str; 9] =
    ["design", "beta", "gamma_L", "T11", "gamma", "eps_s", "eps", "eta", "eps_eta"];

fn fom_row(fom: &FigureOfMerit) -> Vec<String> {
    vec![
        fom.design.clone(),
        fmt_sig(fom.beta),
        fmt_sig(fom.gamma_l),
        fmt_sig(fom.t11),
        fmt_sig(fom.gamma),
        fmt_sig(fom.epsilon_s),
        fmt_sig(fom.epsilon),
        fmt_sig(fom.eta),
        fmt_sig(fom.epsilon_eta),
    ]
}

pub fn run_evaluate(cfg: &Config, out_dir: &Path) -> Result<SweepOutcome> {
    let csv_path = out_dir.join("evaluate.csv");
    match evaluate_design(cfg) {
        Ok(report) => {
            println!(
                "{}: eps = {:.6}, eta = {:.6}, eps*eta = {:.6} (Q = {:.0}, V_n = {:.2}, F_p = {:.2})",
                report.fom.design,
                report.fom.epsilon,
                report.fom.eta,
                report.fom.epsilon_eta,
                report.character.q,
                report.character.v_n,
                report.character.f_p
            );
            write_csv(&csv_path, "evaluate", cfg, &FOM_COLUMNS, &[fom_row(&report.fom)], &[])?;
            Ok(SweepOutcome { csv_path, points: 1, failed: 0 })
        }
        Err(e) => {
            let errors = vec![format!("design point: {e}")];
            write_csv(&csv_path, "evaluate", cfg, &FOM_COLUMNS, &[], &errors)?;
            Ok(SweepOutcome { csv_path, points: 1, failed: 1 })
        }
    }
}

/// Apply a sweep parameter value to a configuration.
pub fn apply_parameter(cfg: &Config, name: &str, value: f64) -> Result<Config> {
    let mut out = cfg.clone();
    match name {
        "n_top" => out.geometry.n_top = value.round().max(1.0) as u32,
        "top_radius_nm" => out.geometry.top_radius = value,
        "sidewall_angle_deg" => out.geometry.sidewall_angle_deg = value,
        "center_radius_nm" => out.geometry.center_radius = value,
        other => return Err(Error::invalid(format!("unknown sweep parameter '{other}'"))),
    }
    Ok(out)
}

pub fn run_optimize(cfg: &Config, out_dir: &Path) -> Result<SweepOutcome> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| {
        Error::invalid("optimize needs a [sweep] section naming the parameter and its bounds")
    })?;
    let lo = sweep.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sweep.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let objective = |v: f64| -> Result<(f64, EvaluationReport)> {
        let point = apply_parameter(cfg, &sweep.parameter, v)?;
        let report = evaluate_design(&point)?;
        Ok((report.fom.epsilon_eta, report))
    };

    let (best_v, best) = if sweep.parameter == "n_top" {
        // integer parameter: exhaustive scan of the bracket
        let (a, b) = (lo.round().max(1.0) as u32, hi.round().max(1.0) as u32);
        let evals: Vec<(u32, Result<(f64, EvaluationReport)>)> =
            (a..=b).collect::<Vec<_>>().par_iter().map(|&n| (n, objective(n as f64))).collect();
        let mut best: Option<(f64, (f64, EvaluationReport))> = None;
        for (n, res) in evals {
            if let Ok(pair) = res {
                if best.as_ref().map_or(true, |(_, (v, _))| pair.0 > *v) {
                    best = Some((n as f64, pair));
                }
            }
        }
        best.ok_or_else(|| Error::invalid("no sweep point evaluated successfully"))?
    } else {
        // golden-section search on the continuous bracket
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut fc = objective(c)?;
        let mut fd = objective(d)?;
        for _ in 0..20 {
            if (b - a).abs() < 1e-3 * (hi - lo).abs() {
                break;
            }
            if fc.0 > fd.0 {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = objective(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = objective(d)?;
            }
        }
        if fc.0 > fd.0 {
            (c, fc)
        } else {
            (d, fd)
        }
    };

    println!(
        "optimize: best {} = {best_v}, eps*eta = {:.6} ({})",
        sweep.parameter, best.0, best.1.fom.design
    );
    let csv_path = out_dir.join("optimize.csv");
    write_csv(&csv_path, "optimize", cfg, &FOM_COLUMNS, &[fom_row(&best.1.fom)], &[])?;
    Ok(SweepOutcome { csv_path, points: 1, failed: 0 })
}

#[derive(Parser, Debug)]
#[command(
    name = "hourglass",
    version,
    about = "Cavity-enhanced single-photon-source design sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// configuration file (TOML); defaults to the reference design
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory for CSV/SVG files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// disable the phonon environment (alpha = 0)
    #[arg(long, global = true)]
    no_phonons: bool,
    /// also write SVG plots next to the CSV files
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaussian collection efficiency vs top facet radius
    Fig2,
    /// taper transmission vs sidewall angle
    Fig3,
    /// beta, Purcell factor, Q, mode volume vs top mirror pairs
    Fig4,
    /// efficiency, indistinguishability and their product vs top mirror pairs
    Fig5,
    /// evaluate the configured design point
    Evaluate,
    /// maximize eps*eta over the configured sweep parameter
    Optimize,
}

fn run_command(cli: &Cli) -> Result<SweepOutcome> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::reference(),
    };
    if cli.no_phonons {
        cfg = cfg.without_phonons();
    }
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Fig2 => run_fig2(&cfg, &cli.out, cli.svg),
        Command::Fig3 => run_fig3(&cfg, &cli.out, cli.svg),
        Command::Fig4 => run_fig4(&cfg, &cli.out, cli.svg),
        Command::Fig5 => run_fig5(&cfg, &cli.out, cli.svg),
        Command::Evaluate => run_evaluate(&cfg, &cli.out),
        Command::Optimize => run_optimize(&cfg, &cli.out),
    }
}

/// CLI entry point. Exit codes: 0 = all points ok, 1 = some points failed,
/// 2 = configuration or usage error.
pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let run = || match run_command(&cli) {
        Ok(outcome) => {
            eprintln!(
                "wrote {} ({} points, {} failed)",
                outcome.csv_path.display(),
                outcome.points,
                outcome.failed
            );
            if outcome.failed == 0 {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    match cli.jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Some(_) => {
            eprintln!("error: --jobs must be >= 1");
            2
        }
        None => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_sig_gives_nine_significant_digits() {
        assert_eq!(fmt_sig(0.998765432123), "9.98765432e-1");
        assert_eq!(fmt_sig(930.0), "9.30000000e2");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn apply_parameter_targets_geometry() {
        let cfg = Config::reference();
        assert_eq!(apply_parameter(&cfg, "n_top", 7.0).unwrap().geometry.n_top, 7);
        assert_eq!(apply_parameter(&cfg, "top_radius_nm", 800.0).unwrap().geometry.top_radius, 800.0);
        assert!(apply_parameter(&cfg, "bogus", 1.0).is_err());
    }

    #[test]
    fn csv_header_is_deterministic() {
        let cfg = Config::reference();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, "test", &cfg, &["a", "b"], &[vec!["1".into(), "2".into()]], &[]).unwrap();
        let first = std::fs::read_to_string(&path).unwrap();
        write_csv(&path, "test", &cfg, &["a", "b"], &[vec!["1".into(), "2".into()]], &[]).unwrap();
        let second = std::fs::read_to_string(&path).unwrap();
        assert_eq!(first, second);
        assert!(first.contains("# config sha256: "));
        assert!(!first.to_lowercase().contains("time"));
    }
}
