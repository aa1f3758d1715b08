use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdbubble")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PROFILE_HEADER: &str = "v1,v2,v3,x_u1,x_u2,I_m,grad_u1,grad_u2,hess_11,hess_12,hess_22,trace_residual";

#[test]
fn profile_table_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = run(&["profile", "--grid", "5", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# "));
    let header: Value = serde_json::from_str(&meta[2..]).unwrap();
    assert_eq!(header["command"], "profile");
    assert_eq!(header["config"]["grid"], 5);
    assert!(header["version"].is_string());
    assert_eq!(lines.next().unwrap(), PROFILE_HEADER);
    let mut saw_center = false;
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(f.len(), 12);
        rows += 1;
        assert!(f[..3].iter().all(|&v| v >= 0.1 - 1e-12));
        assert!(f[11] <= 1e-6);
        assert!(f[8] < 0.0 && f[8] * f[10] - f[9] * f[9] > 0.0);
        if f[..3].iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12) {
            saw_center = true;
            assert!((f[5] - 0.59841342).abs() < 1e-8);
            assert!(f[6].abs() < 1e-12 && f[7].abs() < 1e-12);
        }
    }
    assert!(saw_center);
    assert_eq!(stdout_json(&o)["rows"], rows);
}

#[test]
fn profile_edges_and_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = run(&["profile", "--grid", "5", "--out", path_str(&out), "--edges"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "v1,v2,v3,I_m");
    for line in text.lines().skip(2) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let m = f[..3].iter().cloned().fold(0.0, f64::max);
        let exact = if m >= 1.0 {
            0.0
        } else {
            let z = gdbubble::gauss1d::Phi_inv(m).unwrap();
            (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        assert!((f[3] - exact).abs() < 1e-12, "{line}");
    }
    assert_eq!(run(&["profile", "--grid", "2", "--out", path_str(&out)]).status.code(), Some(2));
    assert_eq!(run(&["profile", "--grid", "5", "--out", "/nonexistent/dir/p.csv"]).status.code(), Some(2));
}

#[test]
fn invert_and_bound() {
    let o = run(&["invert", "--v1", "0.5", "--v2", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let j = stdout_json(&o);
    assert!(j["residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(j["run"]["command"], "invert");
    assert!(j["run"].get("seed").is_some());
    assert_eq!(run(&["invert", "--v1", "0.8", "--v2", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["invert", "--v1", "0.5", "--v2", "0.3", "--tol", "1e-20"]).status.code(), Some(2));

    let o = run(&["bound", "--k", "4", "--v1", "0.5", "--v2", "0.3"]);
    let j = stdout_json(&o);
    assert_eq!(j["bound"].as_f64().unwrap(), 2.0 * j["modelProfile"].as_f64().unwrap());
    assert_eq!(run(&["bound", "--k", "-1", "--v1", "0.5", "--v2", "0.3"]).status.code(), Some(2));
}

#[test]
fn variation_report() {
    let o = run(&["variation", "--x-u1", "0.3", "--x-u2", "-0.2", "--w-u1", "1", "--w-u2", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let j = stdout_json(&o);
    let dv: Vec<f64> = j["variation"]["dV"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(dv.iter().sum::<f64>().abs() < 1e-15);
    assert!((j["variation"]["Q"].as_f64().unwrap() - j["qFromParts"].as_f64().unwrap()).abs() < 1e-14);
}

#[test]
fn unknown_flags_are_rejected() {
    assert_eq!(run(&["invert", "--v1", "0.5", "--v2", "0.3", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["search", "--v1", "0.3"]).status.code(), Some(2));
}

#[test]
fn verify_fast_and_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = run(&["verify", "--level", "fast", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let checks = report["report"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 40);
    assert!(checks.iter().all(|c| c["pass"] == true));
    for c in checks {
        for key in ["name", "residual", "tolerance", "pass"] {
            assert!(c.get(key).is_some());
        }
    }

    let bad = dir.path().join("t.json");
    let o = run(&["verify", "--level", "fast", "--out", path_str(&bad), "--jacobian-scale", "1.4142135623730951"]);
    assert_eq!(o.status.code(), Some(4));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&bad).unwrap()).unwrap();
    let checks = report["report"]["checks"].as_array().unwrap();
    let failed: Vec<&str> = checks.iter().filter(|c| c["pass"] == false).map(|c| c["name"].as_str().unwrap()).collect();
    let jacobian: Vec<&str> =
        checks.iter().map(|c| c["name"].as_str().unwrap()).filter(|n| n.starts_with("tripod.jacobian.")).collect();
    assert!(!jacobian.is_empty());
    assert_eq!(failed, jacobian);
}

#[test]
fn search_is_deterministic_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let third = "0.3333333333333333";
    let mut docs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["search", "--v1", third, "--v2", third, "--preset", "fast", "--seed", "1", "--out", path_str(&out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["result.json", "cluster.gbc", "cluster.csv"] {
            assert!(out.join(f).exists(), "{f}");
        }
        let g = gdbubble::grid::GridCluster::load_binary(out.join("cluster.gbc")).unwrap();
        assert_eq!(g.resolution(), 256);
        docs.push(std::fs::read(out.join("result.json")).unwrap());
    }
    assert_eq!(docs[0], docs[1]);
    let j: Value = serde_json::from_slice(&docs[0]).unwrap();
    let r = &j["result"];
    let gap = r["gapToModel"].as_f64().unwrap();
    let im = r["modelProfile"].as_f64().unwrap();
    assert!(gap.abs() <= 0.05 * im, "gap {gap}");
    for key in ["achievedPerimeter", "achievedMeasures", "tripleJunctionAngles", "interfaceFlatnessResidual", "areasVsModel", "history", "params"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(j["run"]["seed"], 1);
}

#[test]
fn search_rejects_small_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["search", "--v1", "0.9", "--v2", "0.09", "--preset", "fast", "--seed", "1", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}
