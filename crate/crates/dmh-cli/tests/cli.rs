//! End-to-end runs of the `dmh` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dmh() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dmh"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dmh-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, contents: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    dmh().args(args).output().unwrap()
}

#[test]
fn solve_writes_profile_errors_and_vtk() {
    let dir = temp_dir("solve");
    let config = write_config(&dir, "n = 2\nkappa = 2\nsigma = 1\n");
    let out = dir.join("out");
    let result = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--vtk",
        "--matrix-market",
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );

    let errors = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    let mut lines = errors.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h,n,err_u_L2,err_u_maxh,err_P0u_L2,err_ustar_L2,err_J_maxh,err_J_L2,err_J_Hdiv"
    );
    let row = lines.next().unwrap();
    assert_eq!(row.split(',').count(), 9);
    assert!(lines.next().is_none());

    let profile = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("z,u_h,u_star\n"));
    // 6 elements per cell times n cells in the central column.
    assert_eq!(profile.lines().count(), 1 + 6 * 2);

    let vtk = std::fs::read_to_string(out.join("solution.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(vtk.contains("CELL_TYPES 48"));

    let mtx = std::fs::read_to_string(out.join("system.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general\n"));
    assert!(out.join("rhs.mtx").exists());
}

#[test]
fn identical_configs_give_byte_identical_output() {
    let dir = temp_dir("determinism");
    let config = write_config(&dir, "n = 2\n");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let result = run(&[
            "solve",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    for name in ["errors.csv", "profile.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn unknown_config_key_exits_with_code_1() {
    let dir = temp_dir("badkey");
    let config = write_config(&dir, "n = 2\nwarp_factor = 9\n");
    let result = run(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("unknown key"), "stderr: {stderr}");
}

#[test]
fn odd_resolution_exits_with_code_1() {
    let dir = temp_dir("oddn");
    let config = write_config(&dir, "n = 3\n");
    let result = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn missing_config_file_exits_with_code_1() {
    let result = run(&["solve", "--config", "/nonexistent/path.cfg"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn converge_reports_orders() {
    let dir = temp_dir("converge");
    let config = write_config(&dir, "n = 2,4\n");
    let out = dir.join("out");
    let result = run(&[
        "converge",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("observed orders"), "stdout: {stdout}");

    let errors = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 3);
    let orders = std::fs::read_to_string(out.join("orders.csv")).unwrap();
    assert!(orders.starts_with("n_coarse,n_fine,"));
    assert_eq!(orders.lines().count(), 2);
}

#[test]
fn converge_with_single_resolution_skips_orders() {
    let dir = temp_dir("converge1");
    let config = write_config(&dir, "n = 2\n");
    let out = dir.join("out");
    let result = run(&[
        "converge",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    assert!(!out.join("orders.csv").exists());
}

#[test]
fn sweep_writes_per_mode_profiles_and_summary() {
    let dir = temp_dir("sweep");
    let config = write_config(&dir, "n = 4\nsweep_cases = 0.5:1.0\n");
    let out = dir.join("out");
    let result = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    for mode in ["none", "sg", "upwind"] {
        assert!(out.join(format!("sweep_case0_{mode}.csv")).exists());
    }
    let summary = std::fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    assert!(summary.starts_with("case,mu,vz,peclet,mode,overshoot,undershoot\n"));
    assert_eq!(summary.lines().count(), 4);
    // Pe = |v| h / (2 mu) with h = sqrt(3)/4.
    let peclet: f64 = summary
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((peclet - 3.0f64.sqrt() / 4.0).abs() < 1e-12);
}

#[test]
fn sweep_case_peclet_numbers_match_the_reference_sequence() {
    // The six standard sweep cases at n = 16 produce the documented
    // case Peclet numbers.
    let h = 3.0f64.sqrt() / 16.0;
    let cases = [
        (0.5, 1.0),
        (0.0125, 0.625),
        (6.25e-3, 0.625),
        (3.125e-3, 0.625),
        (1.5625e-3, 0.625),
        (7.8125e-4, 0.625),
    ];
    let expected = [0.1083, 2.7063, 5.4127, 10.8253, 21.6506, 43.3013];
    for ((mu, vz), want) in cases.iter().zip(expected) {
        let peclet = vz * h / (2.0 * mu);
        assert!((peclet - want).abs() < 5e-5, "{peclet} vs {want}");
    }
}

#[test]
fn sweep_without_cases_is_a_config_error() {
    let dir = temp_dir("sweepnone");
    let config = write_config(&dir, "n = 4\n");
    let result = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn check_prints_the_constants_report() {
    let dir = temp_dir("check");
    let config = write_config(&dir, "n = 2\nv1 = 0,0,0\nv2 = 0,0,0\n");
    let result = run(&[
        "check",
        "--config",
        config.to_str().unwrap(),
        "--c-star",
        "1.0",
    ]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("k_a"), "stdout: {stdout}");
    assert!(stdout.contains("c0 (statement)"));
    assert!(stdout.contains("c0 (proof)"));
    assert!(stdout.contains("defines c0 twice"));
}
