use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use backflow_cli::scenario::{fmt_num, read_csv, SERIES_HEADER, SUMMARY_HEADER};

fn backflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_backflow")).args(args).output().unwrap()
}

fn run_config(dir: &Path, text: &str) -> Output {
    let cfg = dir.join("scenario.ini");
    fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    backflow(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn default_ck_sweep_writes_seven_series() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(tmp.path(), "[scenario]\nkind = ck-free\n[time]\nt_hi = 5\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let series: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.starts_with("series_ck-free_gamma"))
        .collect();
    assert_eq!(series.len(), 7, "{series:?}");

    let text = fs::read_to_string(out.join("series_ck-free_gamma0.025.csv")).unwrap();
    let (header, rows) = read_csv(&text).unwrap();
    assert_eq!(header.join(","), SERIES_HEADER);
    assert_eq!(rows.len(), 501);
    assert_eq!(rows.last().unwrap()[0], 5.0);
    for r in &rows {
        assert_eq!(r[3], (-r[2]).max(0.0));
    }
}

#[test]
fn summary_round_trips_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(tmp.path(), "[scenario]\nkind = cl-free\n[environment]\ngamma = 0.1\nkT = [1, 5]\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("out/summary_cl-free.csv")).unwrap();
    let (header, rows) = read_csv(&text).unwrap();
    assert_eq!(header.join(","), SUMMARY_HEADER);
    let rebuilt: String = std::iter::once(header.join(","))
        .chain(rows.iter().map(|r| r.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",")))
        .map(|l| l + "\n")
        .collect();
    assert_eq!(rebuilt, text);
}

#[test]
fn manifest_lists_every_file_and_comes_last() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(tmp.path(), "[scenario]\nkind = cl-force\n[environment]\nkT = 1\ng = [0, 0.03]\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(files.last(), Some(&"manifest.json"));
    let mut on_disk: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    on_disk.sort();
    let mut listed: Vec<String> = files.iter().map(|s| s.to_string()).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
    assert_eq!(manifest["config"]["kind"], "cl-force");
    assert_eq!(manifest["config"]["time"]["step"], 0.01);
    // Clipped intervals go to warnings.txt, never into the CSVs.
    let warnings = fs::read_to_string(out.join("warnings.txt")).unwrap();
    assert!(warnings.contains("window start"));
}

#[test]
fn config_errors_exit_with_two_and_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, needle) in [
        ("", "kind"),
        ("[scenario]\nkind = ck-free\n[state]\nalpah = 1\n", "line 4, column 1"),
        ("[scenario]\nkind = ck-free\n[state]\nalpha = 1.0\ntheta = pi\np0a = 0.3\n", "degenerate"),
        ("[scenario]\nkind = cl-free\nallow_negative_time = true\n", "allow_negative_time"),
        ("[scenario]\nkind = ck-free\n[time]\nstep = 0\n", "step"),
    ] {
        let o = run_config(tmp.path(), text);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let e = stderr(&o);
        assert_eq!(e.trim_end().lines().count(), 1, "{e}");
        assert!(e.contains(needle), "{e}");
    }
}

#[test]
fn eigen_command_and_non_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    let o = backflow(&["eigen", "--kind", "forced", "--xi", "-1", "--xi", "1", "--tol", "1e-3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&fs::read_to_string(out.join("summary_eigen-force.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1] < rows[1][1]);
    assert!(out.join("spectrum_eigen-force_xi-1.csv").exists());

    let o = backflow(&["eigen", "--kind", "free", "--tol", "1e-12", "--max-n", "128", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
}
