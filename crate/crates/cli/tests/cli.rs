use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("mcdimers-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcdimers"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn genus_zero_weights_are_angle_differences() {
    let out = scratch("w0");
    let o = run(&configs().join("genus0.toml"), &out, &["weights"]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(out.join("weights.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("w_id,b_id,re,im,alpha,beta,face,face_prime"));
    let mut n = 0;
    for line in lines {
        // labels are quoted, the numeric fields sit between them
        let f: Vec<&str> = line.split("\",").nth(2).unwrap().split(',').collect();
        let v: Vec<f64> = f[..4].iter().map(|x| x.parse().unwrap()).collect();
        assert!((v[0] - (v[3] - v[2])).abs() < 1e-14 && v[1] == 0.0, "{line}");
        n += 1;
    }
    assert_eq!(n, 36);
}

#[test]
fn malformed_angles_exit_with_config_error_and_no_output() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.toml");
    std::fs::write(
        &cfg,
        "schema = \"fock-dimer-config/1\"\n[curve]\ngenus = 0\n[graph]\ntype = \"square\"\n\
         width = 4\nheight = 4\nvertical = [0.0, 2.0, 1.0]\nhorizontal = [5.0]\n",
    )
    .unwrap();
    let out = dir.join("out");
    let o = run(&cfg, &out, &["weights"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn genus_one_periods_pass() {
    let out = scratch("p1");
    let o = run(&configs().join("genus1.toml"), &out, &["verify", "periods"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify_periods.json")).unwrap()).unwrap();
    let q = report["details"]["q"][0][0].as_f64().unwrap();
    assert!((q - 0.1).abs() < 1e-12);
    assert_eq!(report["pass"], true);
}

#[test]
fn crossing_on_an_angle_names_the_angle() {
    let dir = scratch("uc");
    let cfg = dir.join("uc.toml");
    std::fs::write(
        &cfg,
        "schema = \"fock-dimer-config/1\"\n[curve]\ngenus = 0\n[graph]\ntype = \"square\"\n\
         width = 2\nheight = 2\nvertical = [0.0]\nhorizontal = [1.0]\n[experiment]\ncrossing = 1.0\n",
    )
    .unwrap();
    let o = run(&cfg, &dir.join("out"), &["verify", "inverse"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("track angle 1"), "{err}");
}

#[test]
fn degenerate_validation_and_empty_index_set() {
    let out = scratch("deg");
    let cfg = configs().join("genus2.toml");
    let o = run(&cfg, &out, &["degenerate", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    // genus1.toml selects no generators to degenerate
    let o = run(&configs().join("genus1.toml"), &out, &["degenerate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("degenerate.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].split(',').nth(3), Some("0.0"));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = scratch("none");
    let o = run(&out.join("nope.toml"), &out, &["weights"]);
    assert_eq!(o.status.code(), Some(2));
}
