//! Reproducible design sweeps through the library API.
//!
//! Drives the same sweep engine that backs the CLI: a small n_top scan of
//! beta/Q/V_n written to CSV (with the config hash in the header), and a
//! taper-angle scan rendered to SVG. Running this example twice produces
//! byte-identical CSV files.
//!
//! Run with: cargo run --release --example sweep_csv

use hourglass::config::Config;
use hourglass::sweep::{run_fig3, run_fig4};

fn main() -> hourglass::Result<()> {
    let mut cfg = Config::reference();
    let out = std::env::temp_dir().join("hourglass_sweep_example");
    std::fs::create_dir_all(&out)?;

    // mirror-count scan (restricted to a few points to stay quick)
    cfg.sweep = Some(hourglass::config::Sweep {
        parameter: "n_top".into(),
        values: vec![3.0, 6.0, 9.0, 12.0, 15.0],
    });
    let outcome = run_fig4(&cfg, &out, false)?;
    println!(
        "wrote {} ({} points, {} failed)",
        outcome.csv_path.display(),
        outcome.points,
        outcome.failed
    );
    let text = std::fs::read_to_string(&outcome.csv_path)?;
    println!("--- {} ---\n{text}", outcome.csv_path.display());

    // taper-angle scan with an SVG plot
    cfg.sweep = Some(hourglass::config::Sweep {
        parameter: "sidewall_angle_deg".into(),
        values: vec![1.0, 1.5, 2.0, 2.5, 3.0],
    });
    let outcome = run_fig3(&cfg, &out, true)?;
    println!(
        "wrote {} and {}",
        outcome.csv_path.display(),
        out.join("fig3.svg").display()
    );
    Ok(())
}
