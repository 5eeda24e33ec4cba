//! Axial cavity characterization: resonance, Q, mode volume, Purcell factor.
//!
//! Builds the hourglass geometry (two opposed cones between DBR mirrors,
//! emitter at the waist), reduces it to an effective-index stack, and scans
//! the top-mirror pair count. Q grows geometrically with the mirror count
//! while the normalized mode volume saturates near 28, so the Purcell factor
//! and the fraction beta of emission captured by the cavity mode rise with
//! n_top.
//!
//! Run with: cargo run --release --example cavity_character

use hourglass::axial::AxialStack;
use hourglass::emission::beta;
use hourglass::geometry::{build_hourglass, ExactEffectiveIndex, HourglassParams};

fn main() -> hourglass::Result<()> {
    let base = HourglassParams::default();
    let neff = ExactEffectiveIndex::new(base.wavelength);

    let geom = build_hourglass(&base, &neff)?;
    println!(
        "reference device: {} layers, total height {:.1} um, QD at z = {:.1} um\n",
        geom.layers.len(),
        geom.total_height() * 1e-3,
        geom.qd_z() * 1e-3
    );

    println!(
        "{:>6}  {:>10}  {:>9}  {:>8}  {:>9}  {:>9}",
        "n_top", "lambda_C", "Q", "V_n", "F_p", "beta"
    );
    for n_top in [1u32, 3, 5, 8, 11, 13, 15] {
        let mut p = base.clone();
        p.n_top = n_top;
        let ch = AxialStack::from_geometry(&build_hourglass(&p, &neff)?)?.characterize()?;
        println!(
            "{:>6}  {:>10.3}  {:>9.0}  {:>8.2}  {:>9.2}  {:>9.5}",
            n_top,
            ch.lambda_c,
            ch.q,
            ch.v_n,
            ch.f_p,
            beta(ch.f_p, 0.05)?
        );
    }
    Ok(())
}
