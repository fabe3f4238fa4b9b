use std::path::Path;
use std::process::{Command, Output};

fn ifdma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifdma")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_in(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![command, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ifdma(&args)
}

fn csv_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn verify_index_law_scope_passes() {
    let o = ifdma(&["verify", "prop2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS prop2/index-law-exhaustive"));
}

#[test]
fn verify_all_passes() {
    let o = ifdma(&["verify", "all", "--trials", "20"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("0 failed\n"));
}

#[test]
fn corrupted_twiddles_fail_by_name() {
    let o = ifdma(&["verify", "spectral", "--trials", "5", "--corrupt-twiddles"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL spectral/oracle-equivalence"));
    assert!(text.contains("counterexample: M="));
}

#[test]
fn unknown_scope_is_a_usage_error() {
    let o = ifdma(&["verify", "everything"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown scope"));
}

#[test]
fn allocate_eight_subcarriers() {
    let o = ifdma(&["allocate", "--M", "8", "4", "2", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("0 2 4 6"));
    assert!(text.contains("1 5"));
    assert!(text.contains("free: 7"));
}

#[test]
fn allocate_rejects_oversubscription() {
    let o = ifdma(&["allocate", "--M", "8", "A=5", "B=4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("9"));
}

#[test]
fn complexity_three_rows() {
    let o = ifdma(&["complexity", "16", "64", "1024", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("16,4,112,112,32,64,32,80,"));
    assert_eq!(ifdma(&["complexity", "12"]).status.code(), Some(2));
}

#[test]
fn empty_snr_grid_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "ber", "[ber]\nsnr_db_grid = []\n", &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("snr_db_grid"));
}

#[test]
fn unknown_keys_are_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "papr", "seed = 3\n[papr]\npakets = 10\nN = 4\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("seed") && err.contains("papr.pakets"), "{err}");
}

#[test]
fn single_packet_gives_a_one_point_ccdf() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "papr", "[papr]\nN = 4\npackets = 1\nschemes = [\"ofdma\"]\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("out/ccdf_ofdma_N4.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "threshold_db,prob");
    assert!(lines[1].ends_with(",1.000000e0"), "{csv}");
}

#[test]
fn default_sweep_writes_nine_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "papr", "[papr]\npackets = 50\n", &["--workers", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names = csv_names(&tmp.path().join("out"));
    assert_eq!(names.len(), 9);
    assert!(names.contains(&"ccdf_multi-ifdma_N7.csv".to_owned()));
}

#[test]
fn clipping_writes_both_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "papr", "[papr]\nM = 128\nN = 65\npackets = 20\nclipping_alpha = 2.0\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names = csv_names(&tmp.path().join("out"));
    assert_eq!(names.len(), 6);
    assert!(names.contains(&"ccdf_lfdma_N65_clipped.csv".to_owned()));
}

#[test]
fn manifest_echo_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "master_seed = 5\n[papr]\nN = [3]\npackets = 40\nclipping_alpha = 1.5\n[ber]\nM = 16\nN = 6\n";
    let o = run_in(tmp.path(), "papr", config, &["--workers", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 5);
    assert_eq!(manifest["command"], "papr");
    assert!(manifest["version"].as_str().unwrap().starts_with('v'));
    for entry in manifest["results"].as_array().unwrap() {
        for key in ["file", "clipped_file"] {
            let name = entry[key].as_str().unwrap();
            assert!(std::fs::metadata(out.join(name)).unwrap().len() > 0, "{name}");
        }
    }

    let echo = tmp.path().join("echo.json");
    std::fs::write(&echo, manifest["config"].to_string()).unwrap();
    let again = tmp.path().join("again");
    let o = ifdma(&["papr", "--config", echo.to_str().unwrap(), "--out", again.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(again.join("run.json")).unwrap()).unwrap();
    assert_eq!(second["config"], manifest["config"]);
    for name in csv_names(&out) {
        assert_eq!(std::fs::read(out.join(&name)).unwrap(), std::fs::read(again.join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn ber_writes_clipped_and_unclipped_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[ber]\nM = 16\nN = 5\nschemes = [\"ofdma\"]\nsnr_db_grid = [0.0, 3.0]\nclipping_alpha = 2.0\nber_min_errors = 50\n";
    let o = run_in(tmp.path(), "ber", config, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    assert_eq!(csv_names(&out), vec!["ber_ofdma.csv", "ber_ofdma_clipped.csv"]);
    let csv = std::fs::read_to_string(out.join("ber_ofdma.csv")).unwrap();
    assert!(csv.starts_with("snr_db,ber,bit_errors,bits\n0.000,"));
}
