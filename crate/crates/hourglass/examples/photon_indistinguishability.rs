//! Photon indistinguishability from the polaron master equation.
//!
//! Evolves the emitter-cavity density matrix in the one-excitation basis,
//! computes the two-time correlation G1(t, tau) via the quantum regression
//! theorem, and evaluates the wave-packet overlap eta. Compares a clean
//! emitter, pure dephasing (against the analytic Gamma/(Gamma + 2 gamma_pd)
//! result), and the acoustic-phonon environment of an InAs dot at 4 K.
//!
//! Run with: cargo run --release --example photon_indistinguishability

use hourglass::emission::EmitterCavityParams;
use hourglass::phonon::{polaron_transform, PhononEnv};
use hourglass::quantum::{evolve, indistinguishability};

fn main() -> hourglass::Result<()> {
    // bad-cavity reference point: g = 22.4 GHz, kappa = 2 ps^-1
    let g = 2.24e10;
    let kappa = 2.0e12;
    let gamma_bulk = 1.0e9;
    let gamma_b = 0.05 * gamma_bulk;

    let base = EmitterCavityParams::new(g, kappa, gamma_b, gamma_bulk, 0.0, 0.0, PhononEnv::off())?;
    let grid = evolve(&base)?;
    println!("clean emitter:");
    println!("  cavity yield    = {:.6}", grid.cavity_yield);
    println!("  background yield = {:.6}", grid.background_yield);
    println!("  eta             = {:.6}\n", indistinguishability(&grid)?);

    println!("pure dephasing (analytic eta = Gamma / (Gamma + 2 gamma_pd)):");
    let purcell_rate = 4.0 * g * g / kappa; // bad-cavity enhanced decay
    let total = purcell_rate + gamma_b;
    for ratio in [0.25, 1.0, 4.0] {
        let mut p = base.clone();
        p.gamma_pd = ratio * total;
        let eta = indistinguishability(&evolve(&p)?)?;
        let analytic = total / (total + 2.0 * p.gamma_pd);
        println!("  gamma_pd/Gamma = {ratio:>5}: eta = {eta:.5}  (analytic {analytic:.5})");
    }

    let env = PhononEnv::inas_4k();
    let polaron = polaron_transform(&env)?;
    println!("\nacoustic phonons, InAs dot at {} K:", env.temperature);
    println!("  Franck-Condon factor B = {:.5}", polaron.b_factor);
    let mut p = base.clone();
    p.phonon = env;
    let eta = indistinguishability(&evolve(&p)?)?;
    println!("  eta = {eta:.6}");
    Ok(())
}
