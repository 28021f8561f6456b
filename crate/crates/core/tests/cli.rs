use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EXAMPLE: &str = r#"{"n":1,"m":2,"A":[{"alpha":[2],"beta":[2],"value":1.0}],"B":[[{"alpha":[2],"value":1.0}]]}"#;

/// Runs the binary in `dir`; `cmd` is split on whitespace.
fn spde(dir: &Path, cmd: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spde"))
        .current_dir(dir)
        .args(cmd.split_whitespace())
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap_or_default()
        .to_string()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), EXAMPLE).unwrap();
    dir
}

#[test]
fn check_at_the_threshold() {
    let dir = workdir();
    let out = spde(dir.path(), "coercivity check --coeffs c.json --p 3 --mode pdep");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout).trim(), "lambda_star=0, holds=false");

    let out = spde(dir.path(), "coercivity check --coeffs c.json --p 2.5 --mode standard");
    assert_eq!(text(&out.stdout).trim(), "lambda_star=1, holds=true");
}

#[test]
fn check_writes_verdict_and_manifest_with_out() {
    let dir = workdir();
    let out = spde(
        dir.path(),
        "coercivity check --coeffs c.json --p 4 --out v.json --quiet",
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"]["lambda_star"], -1.0);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("v.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config"]["p"], 4.0);
}

#[test]
fn sweep_csv_and_manifest() {
    let dir = workdir();
    let args = "coercivity sweep --coeffs c.json --p-min 2 --p-max 10 --steps 81 --out sweep.csv --gnuplot-stub";
    let out = spde(dir.path(), args);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let body = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "p,c_p,lambda_star,holds");
    assert_eq!(lines.len(), 82);
    assert_eq!(lines[81], "10.0,9.0,-7.0,false");
    assert!(dir.path().join("sweep.manifest.json").exists());
    assert!(fs::read_to_string(dir.path().join("sweep.gp"))
        .unwrap()
        .contains("sweep.csv"));

    // second run is byte-identical
    let first = fs::read(dir.path().join("sweep.csv")).unwrap();
    spde(dir.path(), args);
    assert_eq!(first, fs::read(dir.path().join("sweep.csv")).unwrap());
}

#[test]
fn simulate_writes_snapshots_and_manifest() {
    let dir = workdir();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"m":2,"N":3,"T":1.0,"steps":32,"paths":5,"seed":1,"mu":1.0}"#,
    )
    .unwrap();
    let out = spde(dir.path(), "simulate --config cfg.json --out ens");
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let ens = dir.path().join("ens");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ens.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["config"]["N"], 3);
    let snaps = manifest["snapshots"].as_array().unwrap();
    // 32 steps recorded every 2 steps, plus t = 0
    assert_eq!(snaps.len(), 17);
    assert_eq!(snaps.last().unwrap()["t"], 1.0);
    for s in snaps {
        let path = ens.join(s["file"].as_str().unwrap());
        assert_eq!(header(&path), "path,n,re,im");
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1 + 5 * 7);
    }
    // t = 0 holds the example datum e^{-n^4}
    let first = fs::read_to_string(ens.join("snapshot_0000.csv")).unwrap();
    assert!(first.lines().any(|l| l == "0,0,1.0,0.0"));
}

#[test]
fn simulate_rejects_zero_steps() {
    let dir = workdir();
    fs::write(
        dir.path().join("bad.json"),
        r#"{"m":2,"N":16,"T":4.0,"steps":0,"paths":10,"seed":1,"mu":1.0}"#,
    )
    .unwrap();
    let out = spde(dir.path(), "simulate --config bad.json --out ens");
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("steps"));
    assert!(!dir.path().join("ens").exists());
}

#[test]
fn config_errors_are_validation_errors() {
    let dir = workdir();
    for (name, body) in [
        ("typo.json", r#"{"m":2,"mu":1.0,"stpes":4}"#),
        ("both.json", r#"{"m":2,"mu":1.0,"coeffs":{"n":1,"m":2}}"#),
        ("syntax.json", "{"),
    ] {
        fs::write(dir.path().join(name), body).unwrap();
        let out = spde(dir.path(), &format!("simulate --config {name} --out ens"));
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let out = spde(dir.path(), "simulate --config missing.json --out ens");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sharpness_odd_m_is_finite() {
    let dir = workdir();
    let out = spde(
        dir.path(),
        "sharpness --m 1 --mu 1.0 --p 6 --t-grid 0:4:1 --paths 1000 --seed 7 --out s.csv",
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("s.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        "t,p,criterion,verdict,closed_form_l2,mc_estimate,mc_stderr,paths"
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[3] == "finite"));
}

#[test]
fn sharpness_even_m_flips_and_includes_grid_end() {
    let dir = workdir();
    let out = spde(
        dir.path(),
        "sharpness --m 2 --mu 1.0 --p 4 --t-grid 0:4:0.25 --paths 100,1000 --out s.csv",
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("s.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 17 * 2);
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        assert_eq!(&r[3], if t > 2.0 { "infinite" } else { "finite" }, "t = {t}");
    }
    assert_eq!(&rows.last().unwrap()[0], "4.0");
    // smaller counts reuse the first paths of the larger run
    let alone = spde(
        dir.path(),
        "sharpness --m 2 --mu 1.0 --p 4 --t-grid 0:4:0.25 --paths 100 --out a.csv",
    );
    assert_eq!(alone.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("a.csv")).unwrap();
    let single: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    for (i, r) in single.iter().enumerate() {
        assert_eq!(r, &rows[2 * i]);
    }
}

#[test]
fn sharpness_rejects_bad_arguments() {
    let dir = workdir();
    for args in [
        "sharpness --m 2 --mu 1.5 --p 4 --t-grid 0:1:0.5 --out s.csv",
        "sharpness --m 2 --mu 1.0 --p 1 --t-grid 0:1:0.5 --out s.csv",
        "sharpness --m 2 --mu 1.0 --p 4 --t-grid 0:1 --out s.csv",
        "sharpness --m 2 --mu 1.0 --p 4 --t-grid 0:1:0.5",
        "sharpness --m 2 --mu 1.0 --p four --t-grid 0:1:0.5 --out s.csv",
    ] {
        let out = spde(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args}");
    }
}

#[test]
fn probe_csv_and_zero_forcing() {
    let dir = workdir();
    fs::write(
        dir.path().join("probe.json"),
        r#"{"m":1,"mu":1.0,"N":4,"T":1.0,"steps":32,"paths":20,"seed":2,
            "forcing":[{"kind":"sin","n":1,"amplitude":1.0}],"resolutions_x":[8,16],"resolution_t":4}"#,
    )
    .unwrap();
    let out = spde(
        dir.path(),
        "schauder-probe --config probe.json --delta 0.5 --p 2 --out probe.csv",
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let body = fs::read_to_string(dir.path().join("probe.csv")).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "resolution_x,resolution_t,paths,norm_u,norm_f,norm_g,ratio");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("8,4,20,"));

    fs::write(
        dir.path().join("zero.json"),
        r#"{"m":1,"mu":1.0,"N":4,"steps":32,"paths":5,"resolution_t":4}"#,
    )
    .unwrap();
    let out = spde(dir.path(), "schauder-probe --config zero.json --out z.csv");
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("identically zero"));
}

#[test]
fn unknown_command_prints_usage() {
    let dir = workdir();
    let out = spde(dir.path(), "frobnicate");
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("Usage"));
    let out = spde(dir.path(), "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = workdir();
    let out = spde(
        dir.path(),
        "coercivity sweep --coeffs c.json --out no/such/dir/sweep.csv",
    );
    assert_eq!(out.status.code(), Some(1));
}
