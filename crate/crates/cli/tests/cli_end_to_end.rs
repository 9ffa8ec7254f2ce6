use std::path::Path;
use std::process::{Command, Output};

const EXE: &str = env!("CARGO_BIN_EXE_magictrap");
const SUBCOMMANDS: [&str; 10] = [
    "polarizability",
    "magic",
    "trap",
    "clock-line",
    "zeeman",
    "sidebands",
    "aggregate",
    "cavity-spectrum",
    "blockade",
    "ladder",
];

fn magictrap(args: &[&str]) -> Output {
    Command::new(EXE).args(args).env_remove("MAGICTRAP_DATA").output().expect("spawn magictrap")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn ledger() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/measurements_illustrative.csv").display().to_string()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn help_exits_zero_and_lists_units_for_every_flag() {
    let top = magictrap(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    for cmd in SUBCOMMANDS {
        let out = magictrap(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let text = stdout(&out);
        let flags: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with('-')).collect();
        assert!(flags.len() >= 6, "{cmd}: {text}");
        for line in flags {
            assert!(line.contains("[units:"), "{cmd}: flag without units: {line}");
        }
    }
}

#[test]
fn usage_and_validation_errors_exit_one() {
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["ladder", "--g0", "1e6hz", "--bogus"],
        vec!["ladder", "--g0", "1e6"],
        vec!["ladder", "--g0", "1e6nm"],
        vec!["ladder"],
        vec!["magic", "--from", "900nm", "--to", "700nm"],
        vec!["magic", "--from", "700nm", "--to", "900nm", "--state2", "1S0"],
        vec!["magic", "--species", "no-such-atom", "--from", "700nm", "--to", "900nm"],
        vec!["polarizability", "--lambda", "689.4490984nm", "--state1", "1S0"],
        vec!["polarizability", "--lambda", "800nm", "--state2", "3P2(m=1)"],
        vec!["trap", "--waist", "30um"],
        vec!["zeeman", "--field", "1gauss"],
        vec!["sidebands", "--eta", "1.5", "--nu-z", "50khz"],
        vec!["aggregate", "/no/such/file.csv"],
        vec!["cavity-spectrum", "--g0", "13mhz", "--kappa", "-1mhz", "--gamma", "1mhz"],
        vec!["ladder", "--g0", "1e6hz", "--jobs", "0"],
    ];
    for args in cases {
        let out = magictrap(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_two() {
    // Zero drive leaves the cavity empty, so g2(0) is undefined.
    let out = magictrap(&["blockade", "--g0", "13mhz", "--kappa", "1mhz", "--gamma", "1mhz", "--drive", "0hz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cavityqed"));
}

#[test]
fn bundled_sr_magic_scan_matches_golden_files() {
    let out = magictrap(&["magic", "--species", "sr87.lines", "--state1", "1S0", "--state2", "3P0", "--from", "700nm", "--to", "900nm"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("sr87_magic_700_900nm.json"));
    let out = magictrap(&["magic", "--species", "sr87", "--from", "700nm", "--to", "900nm", "--calibrated", "--format", "csv"]);
    assert_eq!(stdout(&out), golden("sr87_magic_700_900nm_calibrated.csv"));
}

#[test]
fn magic_json_has_one_crossing_near_813() {
    let out = magictrap(&["magic", "--from", "700nm", "--to", "900nm", "--calibrated"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let l = rows[0]["lambda_nm"].as_f64().unwrap();
    assert!((l - 813.428).abs() < 0.5, "{l}");
    let bracket = rows[0]["bracket_nm"].as_array().unwrap();
    assert!(bracket[0].as_f64().unwrap() <= l && l <= bracket[1].as_f64().unwrap());
}

#[test]
fn ladder_and_aggregate_examples() {
    let out = magictrap(&["ladder", "--g0", "1e6hz", "--n", "2"]);
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["n", "lower_over_2pi_hz", "upper_over_2pi_hz"]);
    let lo: f64 = rows[0][1].parse().unwrap();
    let hi: f64 = rows[0][2].parse().unwrap();
    assert!((lo + 2f64.sqrt() * 1e6).abs() < 1e-6 && (hi - 2f64.sqrt() * 1e6).abs() < 1e-6);

    let out = magictrap(&["aggregate", &ledger()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header[1], "nu0_offset_hz");
    assert_eq!(rows[0][1], "429228004229800");
    assert!(String::from_utf8_lossy(&out.stderr).contains("429228004229800"));
}

#[test]
fn jobs_do_not_change_output() {
    let runs: [&[&str]; 3] = [
        &["magic", "--from", "500nm", "--to", "3um"],
        &["polarizability", "--from", "480nm", "--to", "1.2um", "--points", "500"],
        &["cavity-spectrum", "--g0", "10mhz", "--kappa", "1mhz", "--gamma", "2mhz", "--points", "41", "--delta-e", "3mhz"],
    ];
    for args in runs {
        let a = magictrap(&[args, &["--jobs", "1"]].concat());
        let b = magictrap(&[args, &["--jobs", "4"]].concat());
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("scan.csv");
    let data_s = data.to_str().unwrap();
    let out = magictrap(&["clock-line", "--pulse", "500ms", "--observed-width", "1.8hz", "--output", data_s]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("FWHM"));
    let first = std::fs::read(&data).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scan.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["argv"][1], "clock-line");
    assert!(meta["unix_time"].as_u64().is_some());
    magictrap(&["clock-line", "--pulse", "500ms", "--observed-width", "1.8hz", "--output", data_s, "--jobs", "2"]);
    assert_eq!(std::fs::read(&data).unwrap(), first);
}

#[test]
fn csv_and_json_carry_the_same_17_digits() {
    let args = ["polarizability", "--from", "700nm", "--to", "900nm", "--points", "3"];
    let csv_text = stdout(&magictrap(&[&args[..], &["--format", "csv"]].concat()));
    let json_text = stdout(&magictrap(&[&args[..], &["--format", "json"]].concat()));
    assert!(csv_text.starts_with("# magictrap v"));
    let (header, rows) = csv_rows(&csv_text);
    let v: serde_json::Value = serde_json::from_str(&json_text).unwrap();
    let records = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(records.len(), 3);
    for (row, rec) in rows.iter().zip(records) {
        for (name, field) in header.iter().zip(row) {
            let digits = field.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17, "{field}");
            let x: f64 = field.parse().unwrap();
            assert_eq!(x.to_bits(), rec[name.as_str()].as_f64().unwrap().to_bits(), "{name}");
        }
    }
}

#[test]
fn empty_result_is_header_only_csv() {
    let out = magictrap(&["magic", "--from", "850nm", "--to", "900nm", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "# magictrap v0.1.0\nlambda_nm,residual_au,bracket_nm_lo,bracket_nm_hi\n");
}

#[test]
fn config_values_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "format = \"json\"\n[cavity]\ng0_hz = 2e6\nn = 1\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let v: serde_json::Value = serde_json::from_str(&stdout(&magictrap(&["ladder", "--config", cfg_s]))).unwrap();
    assert_eq!(v["rows"][0]["upper_over_2pi_hz"].as_f64().unwrap(), 2e6);

    let out = magictrap(&["ladder", "--config", cfg_s, "--g0", "1e6hz", "--n", "2", "--format", "csv"]);
    let (_, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows[0][0], "2");
    assert!((rows[0][2].parse::<f64>().unwrap() - 2f64.sqrt() * 1e6).abs() < 1e-6);

    std::fs::write(&cfg, "[cavity]\ng0 = 2e6\n").unwrap();
    assert_eq!(magictrap(&["ladder", "--config", cfg_s]).status.code(), Some(1));
    std::fs::write(&cfg, "[lattice]\nwaist = \"30um\"\n").unwrap();
    assert_eq!(magictrap(&["ladder", "--g0", "1hz", "--config", cfg_s]).status.code(), Some(1));
}

#[test]
fn data_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sr87.lines");
    let text = std::fs::read_to_string(bundled).unwrap().replace("mass_kg 1.443155863e-25", "mass_kg 2.886311726e-25");
    std::fs::write(dir.path().join("sr87.lines"), text).unwrap();
    let args = ["trap", "--species", "sr87", "--waist", "30um", "--depth", "50erec"];
    let plain = magictrap(&args);
    let heavy = Command::new(EXE).args(args).env("MAGICTRAP_DATA", dir.path()).output().unwrap();
    assert_eq!(heavy.status.code(), Some(0), "{}", String::from_utf8_lossy(&heavy.stderr));
    let recoil = |o: &Output| -> f64 { csv_rows(&stdout(o)).1[0][3].parse().unwrap() };
    assert!((recoil(&plain) / recoil(&heavy) - 2.0).abs() < 1e-12);
}

#[test]
fn trap_from_power_uses_ground_state_polarizability() {
    let out = magictrap(&["trap", "--waist", "30um", "--power", "1w", "--linewidth", "1hz"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&stdout(&out));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let depth_erec: f64 = rows[0][col("depth_erec")].parse().unwrap();
    assert!(depth_erec > 0.0);
    assert_eq!(rows[0][col("resolved_sideband")], "yes");
}
