//! End-to-end design evaluation: epsilon, eta and their product.
//!
//! Runs the complete pipeline for the reference hourglass design — cavity
//! characterization, facet collection, taper transmission, and the phonon
//! master equation — and assembles the figure of merit. Also shows the
//! multi-photon scaling (eps * eta)^N that makes the product the quantity to
//! optimize, and compares against a representative micropillar.
//!
//! Run with: cargo run --release --example design_figure_of_merit

use hourglass::config::Config;
use hourglass::emission::{n_photon_success, MICROPILLAR_EPSILON, MICROPILLAR_ETA};
use hourglass::sweep::evaluate_design;

fn main() -> hourglass::Result<()> {
    let cfg = Config::reference();
    let report = evaluate_design(&cfg)?;
    let fom = &report.fom;

    println!("{}", fom.design);
    println!("  lambda_C = {:.3} nm", report.character.lambda_c);
    println!("  Q = {:.0}, V_n = {:.2}, F_p = {:.2}", report.character.q, report.character.v_n, report.character.f_p);
    println!("  g = {:.3e} rad/s, kappa = {:.3e} rad/s", report.g, report.kappa);
    println!();
    println!("  beta     = {:.6}   (cavity-mode fraction)", fom.beta);
    println!("  gamma_L  = {:.6}   (lens coupling)", fom.gamma_l);
    println!("  T11      = {:.6}   (taper transmission)", fom.t11);
    println!("  epsilon  = {:.6}   (collection efficiency)", fom.epsilon);
    println!("  eta      = {:.6}   (indistinguishability)", fom.eta);
    println!("  eps*eta  = {:.6}", fom.epsilon_eta);

    println!("\nN-photon success probability (eps*eta)^N:");
    println!("{:>6}  {:>12}  {:>12}", "N", "hourglass", "micropillar");
    for n in [1u32, 10, 20, 50] {
        println!(
            "{n:>6}  {:>12.4}  {:>12.4}",
            n_photon_success(fom.epsilon, fom.eta, n)?,
            n_photon_success(MICROPILLAR_EPSILON, MICROPILLAR_ETA, n)?
        );
    }
    Ok(())
}
