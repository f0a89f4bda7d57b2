use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spt(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spt"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run spt")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_stack_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        "[[layers]]\nmaterial = \"InP\"\nthickness_nm = \"thick\"\n",
    )
    .unwrap();
    let o = spt(&["trace", "--stack", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("thickness_nm"), "{}", stderr(&o));

    fs::write(
        dir.path().join("unknown.toml"),
        "[[layers]]\nmaterial = \"GaN\"\nthickness_nm = 5.0\n",
    )
    .unwrap();
    let o = spt(&["band-diagram", "--stack", "unknown.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GaN"));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = spt(&["report", "--stack", "absent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn non_convergence_exits_3_with_residuals() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("solver.toml"), "max_iter = 3\n").unwrap();
    let o = spt(&["band-diagram", "--solver", "solver.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("last potential updates"));
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        spt(&["trace", "--ensemble", "0"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        spt(&["trace", "--duration-s", "-1"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(spt(&["nonsense"], dir.path()).status.code(), Some(2));
    let help = spt(&["sweep", "--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn repro_fig5_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = spt(&["repro", "fig5", "--seed", "7", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for file in ["trace.csv", "events.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let trace = fs::read_to_string(dir.path().join("a/trace.csv")).unwrap();
    assert!(trace.starts_with("t_s,I_A,n_trapped,n_ionized,shutter\n"));
    let events = fs::read_to_string(dir.path().join("a/events.csv")).unwrap();
    assert!(events.starts_with("t_s,kind\n"));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = spt(
        &[
            "switch",
            "--seed",
            "11",
            "--duration-s",
            "300",
            "--absorbed-rate",
            "5",
            "--out",
            "first",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: toml::Table =
        toml::from_str(&fs::read_to_string(dir.path().join("first/manifest.toml")).unwrap())
            .unwrap();
    let seed = manifest["run"]["seed"].as_integer().unwrap().to_string();
    let scenario = toml::to_string(manifest["scenario"].as_table().unwrap()).unwrap();
    fs::write(dir.path().join("scenario.toml"), scenario).unwrap();
    let o = spt(
        &[
            "switch",
            "--config",
            "scenario.toml",
            "--seed",
            &seed,
            "--out",
            "second",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("first/trace.csv")).unwrap(),
        fs::read(dir.path().join("second/trace.csv")).unwrap()
    );
    assert!(manifest.contains_key("materials") && manifest.contains_key("tool"));
}

#[test]
fn band_diagram_and_report_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = spt(&["report", "--out", "r"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: toml::Table =
        toml::from_str(&fs::read_to_string(dir.path().join("r/report.toml")).unwrap()).unwrap();
    let lambda = report["absorption"]["interband_wavelength_um"]
        .as_float()
        .unwrap();
    assert!((1.235..=1.365).contains(&lambda));
    assert!(report["escape"]["time_s"].as_float().unwrap() > 3600.0);

    let o = spt(
        &["band-diagram", "--gate-bias-V", "-0.2", "--out", "b"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("b/band_diagram.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("z_nm,Ec_eV,Ev_eV,phi_V,n_cm3"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    // Surface pinned at Ec = barrier − gate bias.
    assert!((first[1] - (0.7 * 1.52 + 0.2)).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 12547);
}

#[test]
fn sweep_ensemble_writes_seed_directories() {
    let dir = tempfile::tempdir().unwrap();
    let o = spt(
        &["sweep", "--ensemble", "4", "--seed", "20", "--out", "s"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for seed in 20..24 {
        assert!(dir
            .path()
            .join(format!("s/seed_{seed}/trace.csv"))
            .is_file());
    }
    let median = fs::read_to_string(dir.path().join("s/ensemble_median.csv")).unwrap();
    assert!(median.starts_with("t_s,wavelength_um,I_median_A\n"));
    assert_eq!(median.lines().count(), 802);
}

#[test]
fn flux_and_wkb_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = spt(&["flux", "--out", "f"], dir.path());
    assert!(o.status.success());
    let flux: toml::Table =
        toml::from_str(&fs::read_to_string(dir.path().join("f/flux.toml")).unwrap()).unwrap();
    assert_eq!(flux["optics"]["absorbed_rate_per_s"].as_float(), Some(1.0));

    let o = spt(&["wkb", "--energy-eV", "0.1", "--out", "w"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let w: toml::Table =
        toml::from_str(&fs::read_to_string(dir.path().join("w/wkb.toml")).unwrap()).unwrap();
    let at_state = w["wkb"]["transmission"].as_float().unwrap();
    let lower = w["wkb"]["override_transmission"].as_float().unwrap();
    assert!(lower < at_state);
}
