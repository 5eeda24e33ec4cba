//! End-to-end CLI checks: bitwise-reproducible CSV output across reruns and
//! `--jobs` settings, and the documented exit codes.

use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_hourglass");

/// Cheap design so each CLI invocation stays fast: short taper, few mirror
/// pairs, tiny sweep grids.
const CONFIG: &str = r#"
[geometry]
n_top = 4
top_radius_nm = 600
sidewall_angle_deg = 3.0
"#;

fn run(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn hourglass binary");
    let code = out.status.code().unwrap_or(-1);
    (code, String::from_utf8_lossy(&out.stderr).into_owned())
}

fn run_and_read(args: &[&str], dir: &Path, csv: &str) -> String {
    let (code, stderr) = run(args, dir);
    assert_eq!(code, 0, "command {args:?} failed: {stderr}");
    std::fs::read_to_string(dir.join(csv)).expect("csv written")
}

#[test]
fn csv_output_is_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("design.toml");

    for (verb, sweep, csv) in [
        ("fig2", "[sweep]\nparameter = \"top_radius_nm\"\nvalues = [500.0, 800.0, 1100.0]\n", "fig2.csv"),
        ("fig3", "[sweep]\nparameter = \"sidewall_angle_deg\"\nvalues = [3.0]\n", "fig3.csv"),
        ("fig4", "[sweep]\nparameter = \"n_top\"\nvalues = [3.0, 5.0]\n", "fig4.csv"),
        ("fig5", "[sweep]\nparameter = \"n_top\"\nvalues = [4.0]\n", "fig5.csv"),
        ("evaluate", "", "evaluate.csv"),
    ] {
        std::fs::write(&cfg_path, format!("{CONFIG}\n{sweep}")).unwrap();
        let args = [verb, "--config", "design.toml", "--out", "."];
        let first = run_and_read(&args, dir.path(), csv);
        let second = run_and_read(&args, dir.path(), csv);
        assert_eq!(first, second, "{verb}: rerun differs");

        let jobs_args = [verb, "--config", "design.toml", "--out", ".", "--jobs", "2"];
        let with_jobs = run_and_read(&jobs_args, dir.path(), csv);
        assert_eq!(first, with_jobs, "{verb}: --jobs 2 differs");
        assert!(first.contains("# config sha256:"), "{verb}: missing config hash");
    }
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();

    // unknown key anywhere in the file is a hard error
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[geometry]\nn_topp = 4\n").unwrap();
    let (code, stderr) = run(&["fig4", "--config", "bad.toml", "--out", "."], dir.path());
    assert_eq!(code, 2, "unknown key should exit 2: {stderr}");

    // missing file
    let (code, _) = run(&["fig4", "--config", "missing.toml", "--out", "."], dir.path());
    assert_eq!(code, 2);

    // partial phonon parameter set
    let partial = dir.path().join("partial.toml");
    std::fs::write(&partial, "[phonons]\nalpha_s2 = 3e-26\n").unwrap();
    let (code, stderr) = run(&["fig4", "--config", "partial.toml", "--out", "."], dir.path());
    assert_eq!(code, 2, "partial phonons should exit 2: {stderr}");

    // optimize without a [sweep] section
    let plain = dir.path().join("plain.toml");
    std::fs::write(&plain, CONFIG).unwrap();
    let (code, _) = run(&["optimize", "--config", "plain.toml", "--out", "."], dir.path());
    assert_eq!(code, 2);

    // usage error
    let (code, _) = run(&["no-such-verb"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn no_phonons_flag_changes_the_physics_not_the_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("design.toml");
    std::fs::write(&cfg, format!("{CONFIG}\n[sweep]\nparameter = \"n_top\"\nvalues = [4.0]\n")).unwrap();

    let with = run_and_read(&["fig5", "--config", "design.toml", "--out", "."], dir.path(), "fig5.csv");
    let without = run_and_read(
        &["fig5", "--config", "design.toml", "--out", ".", "--no-phonons"],
        dir.path(),
        "fig5.csv",
    );
    let eta = |text: &str| -> f64 {
        let row = text.lines().last().unwrap();
        row.split(',').nth(3).unwrap().parse().unwrap()
    };
    assert!(eta(&without) > 0.9999, "phonons off should give eta ~ 1: {}", eta(&without));
    assert!(eta(&with) < eta(&without), "phonon bath must reduce eta");
}
