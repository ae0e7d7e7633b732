use std::process::{Command, Output};

fn k3lat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3lat"))
        .args(args)
        .env_remove("K3LAT_DATASET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = k3lat(&["--json", "verify"]);
    let b = k3lat(&["--json", "verify"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let ranks: Vec<u64> = rows.iter().take(6).map(|r| r["r"].as_u64().unwrap()).collect();
    assert_eq!(ranks, [13, 11, 7, 10, 9, 7]);
    assert!(stdout(&k3lat(&["verify"])).contains("12/12 rows pass"));
}

#[test]
fn missing_dataset_is_an_io_error() {
    let o = k3lat(&["verify", "--dataset", "/nonexistent/k3lat"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_k3lat"))
        .arg("verify")
        .env("K3LAT_DATASET", "/nonexistent/k3lat")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(k3lat(&["fqf", "iso", "u(1)+u(1)", "v(1)+v(1)"]).status.code(), Some(0));
    assert_eq!(k3lat(&["fqf", "iso", "u(1)", "v(1)"]).status.code(), Some(1));
    assert_eq!(k3lat(&["lattice", "info", "E9"]).status.code(), Some(2));
    assert_eq!(k3lat(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn lattice_and_form_commands() {
    let o = k3lat(&["lattice", "info", "T(2,5,6)"]);
    assert!(stdout(&o).contains("rank 11"));
    let o = k3lat(&["--json", "fqf", "sign", "w(2,3,-1)"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["signature_mod8"], 7);
}

#[test]
fn identify_from_gram_file() {
    let dir = std::env::temp_dir().join(format!("k3lat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ua2.json");
    std::fs::write(&path, "[[0,1,0,0],[1,0,0,0],[0,0,-2,1],[0,0,1,-2]]").unwrap();
    let p = path.to_str().unwrap();
    let o = k3lat(&["lattice", "identify", "--gram", p, "--menu", "U+A2", "U+A1+A1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("U+A2"));
    let o = k3lat(&["lattice", "identify", "--gram", p, "--menu", "U+A1+A1"]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_commands() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/");
    let x6 = format!("{data}x6_picard.json");
    let o = k3lat(&["config", "divisible", &x6, "--class", "C+E0+E4+E5+E6", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = k3lat(&["config", "divisible", &x6, "--class", "1*E0", "--k", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = k3lat(&["--json", "config", "invariant", &format!("{data}x6_sigma.json"), "--auto", "sigma"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rank"], 9);
    assert_eq!(v["identified"], "T(3,4,4)");
    let o = k3lat(&["config", "gram", &x6, "--subset", "E0,E1"]);
    assert!(stdout(&o).contains("-2  1"));
}

#[test]
fn fibration_command() {
    let o = k3lat(&["--json", "fibration", "classify", "--A", "1", "--B", "t^8", "--rho", "14"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["fibers"], "16 I1 + IV*");
    assert_eq!(v["mordell_weil_rank"], 6);
    let o = k3lat(&["fibration", "classify", "--A", "-t^7+t^3", "--B", "0"]);
    assert!(stdout(&o).contains("5 III + III*"));
    // t^4 A and t^6 B at 0: not minimal
    assert_eq!(k3lat(&["fibration", "classify", "--A", "t^4", "--B", "t^6"]).status.code(), Some(2));
}
