mod common;

use std::path::Path;
use std::process::Command;

use common::{golden_dir, nullcharge};
use nullcharge::catalog::{make_field, ExternalField, FieldSpec};
use nullcharge::eigen::{admissible_velocities, DEFAULT_DEG_TOL};
use nullcharge::minkowski::{FourVector, Vec3};
use serde_json::Value;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json(run: &common::Run) -> Value {
    serde_json::from_slice(&run.stdout).unwrap()
}

#[test]
fn eigen_degenerate_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "z.json", r#"{"E":[0,0,0],"B":[0,0,0]}"#);
    let v = json(&nullcharge(&["eigen", "--quiet", "--config", &zero]));
    assert_eq!(v["class"], "ZeroField");
    assert_eq!(v["velocities"], "unconstrained");

    let null = write(dir.path(), "n.json", r#"{"E":[1,0,0],"B":[0,1,0],"q":1}"#);
    let v = json(&nullcharge(&["eigen", "--quiet", "--config", &null]));
    assert_eq!(v["roots"], serde_json::json!([[0, 4]]));
    assert_eq!(v["class"], "NullField");
}

#[test]
fn malformed_or_invalid_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let out_s = out.to_str().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"E\": [1, 0");
    assert_eq!(nullcharge(&["eigen", "--config", &bad, "--out", out_s]).code, 2);
    assert!(!out.exists());

    let unknown = write(dir.path(), "u.json", r#"{"E":[0,0,0],"B":[0,0,0],"extra":1}"#);
    assert_eq!(nullcharge(&["eigen", "--config", &unknown]).code, 2);
    assert_eq!(nullcharge(&["eigen"]).code, 2);

    let flux = golden_dir().join("flux.json");
    let run = nullcharge(&["flux", "--config", flux.to_str().unwrap(), "--eps", "4", "--out", out_s]);
    assert_eq!(run.code, 2);
    assert!(!out.exists());
    let run = nullcharge(&["flux", "--config", flux.to_str().unwrap(), "--eps", "0"]);
    assert_eq!(run.code, 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eigen.json");
    let cfg = golden_dir().join("eigen.json");
    let run = nullcharge(&["eigen", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(golden_dir().join("eigen.out.json")).unwrap());
}

#[test]
fn flux_of_straight_line_is_zero_and_eps_sweep_scales() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"worldline":{"catalog":"straight","direction":[0,0.6,0.8],"t_min":-1,"t_max":3},"eps_sweep":[0.1,0.05,0.025]}"#,
    );
    let v = json(&nullcharge(&["flux", "--quiet", "--config", &cfg, "--eps", "0.3"]));
    assert_eq!(v["epsilon"], 0.3);
    for c in v["p_em"].as_array().unwrap() {
        assert_eq!(c.as_f64().unwrap(), 0.0);
    }
    for row in v["M_em"].as_array().unwrap() {
        assert!(row.as_array().unwrap().iter().all(|c| c.as_f64().unwrap() == 0.0));
    }
    let sweep = v["sweep"].as_array().unwrap();
    for entry in &sweep[1..] {
        let r = entry["ratio_to_previous"].as_f64().unwrap();
        assert!((r - 16.0).abs() < 0.1, "{r}");
    }
}

#[test]
fn flux_reads_sampled_worldline() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,zx,zy,zz\n");
    for i in 0..=400 {
        let t = 2.0 * std::f64::consts::PI * i as f64 / 400.0;
        csv.push_str(&format!("{t},{},{},0\n", t.cos(), t.sin()));
    }
    write(dir.path(), "circle.csv", &csv);
    let cfg = write(dir.path(), "f.json", r#"{"worldline":{"csv":"circle.csv"}}"#);
    let v = json(&nullcharge(&["flux", "--quiet", "--config", &cfg]));
    let p0 = v["p_em"][0].as_f64().unwrap();
    assert!((p0 - 3.0 * std::f64::consts::PI / 8.0).abs() < 1e-3, "{p0}");
}

#[test]
fn propagate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inadmissible = write(
        dir.path(),
        "i.json",
        r#"{"field":{"kind":"UniformB","params":{"b":[0,0,1]}},"initial":{"z":[0,0,0,0],"v":[1,0,0],"e":1},"t_end":1,"dt":0.1}"#,
    );
    let run = nullcharge(&["propagate", "--config", &inadmissible]);
    assert_eq!(run.code, 4);
    assert!(run.stdout.is_empty());

    // start on an admissible direction of the dipole snapshot; the field turns along the ray
    let spec = FieldSpec::RotatingDipole {
        moment: Vec3::Z,
        omega_star: 0.5,
        t_snap: 0.0,
        length_scale: 1.0,
        r_core: None,
    };
    let start = Vec3::new(1.0, 0.2, 0.3);
    let f = make_field(spec).unwrap().eval(FourVector::from_parts(0.0, start)).unwrap();
    let v = admissible_velocities(1.0, f, DEFAULT_DEG_TOL).velocities[0].v;
    let cfg = format!(
        r#"{{"field":{{"kind":"RotatingDipole","params":{{"moment":[0,0,1],"omega_star":0.5}}}},
            "initial":{{"z":[0,{},{},{}],"v":[{},{},{}],"e":1}},"t_end":2,"dt":0.05}}"#,
        start.x, start.y, start.z, v.x, v.y, v.z
    );
    let path = write(dir.path(), "d.json", &cfg);
    let run = nullcharge(&["propagate", "--config", &path]);
    assert_eq!(run.code, 5, "{}", run.stderr);
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("t,zx,zy,zz,e,px,py,pz\n0,"));
    assert!(text.lines().last().unwrap().starts_with("# error,RadiationDivergence,t="));
}

#[test]
fn propagate_pure_b_keeps_e() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"field":{"kind":"UniformB","params":{"b":[0,0,2]}},"initial":{"z":[0,0,0,0],"v":[0,0,-1],"e":1.5},"t_end":3,"dt":0.5}"#,
    );
    let run = nullcharge(&["propagate", "--quiet", "--config", &cfg]);
    assert_eq!(run.code, 0);
    let text = String::from_utf8(run.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(cells[4], "1.5");
        assert_eq!(cells[7], "-1.5");
    }
}

#[test]
fn map_uniform_b_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.json",
        r#"{"field":{"kind":"UniformB","params":{"b":[0,0,1]}},"grid":{"x":[0,1,3],"y":[0,1,3],"z":[0,1,3]}}"#,
    );
    let run = nullcharge(&["map", "--quiet", "--config", &cfg]);
    assert_eq!(run.code, 0);
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,z,Ex,Ey,Ez,Bx,By,Bz,class,capture,edot_plus,vpx,vpy,vpz,edot_minus,vmx,vmy,vmz");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 27);
    assert!(rows.iter().all(|r| r.split(',').nth(9) == Some("PureB")));
    assert!(rows[1].starts_with("0,0,0.5,"));
    assert!(rows[3].starts_with("0,0.5,0,"));
}

#[test]
fn map_zero_field_leaves_branches_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.json", r#"{"field":{"kind":"Zero"},"grid":{"x":[0,0,1],"y":[0,1,2],"z":[0,0,1]}}"#);
    let text = String::from_utf8(nullcharge(&["map", "--quiet", "--config", &cfg]).stdout).unwrap();
    for row in text.lines().skip(1) {
        assert!(row.ends_with("ZeroField,false,,,,,,,,"), "{row}");
    }
}

#[test]
fn map_capture_column_tracks_field_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"field":{"kind":"RotatingDipole","params":{"moment":[0,0,1],"omega_star":3.0}},"grid":{"x":[0.2,1.5,6],"y":[-1,1,5],"z":[-0.5,0.5,3]}}"#,
    );
    let text = String::from_utf8(nullcharge(&["map", "--quiet", "--config", &cfg]).stdout).unwrap();
    let mut seen = [false; 2];
    for row in text.lines().skip(1) {
        let c: Vec<&str> = row.split(',').collect();
        let n: Vec<f64> = c[3..9].iter().map(|s| s.parse().unwrap()).collect();
        let (e2, b2) = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2], n[3] * n[3] + n[4] * n[4] + n[5] * n[5]);
        let eb = n[0] * n[3] + n[1] * n[4] + n[2] * n[5];
        let s = e2 + b2;
        let expect = eb.abs() < DEFAULT_DEG_TOL * s && b2 - e2 >= DEFAULT_DEG_TOL * s;
        assert_eq!(c[10] == "true", expect, "{row}");
        seen[expect as usize] = true;
    }
    // the light cylinder at 1/3 splits the grid
    assert!(seen[0] && seen[1]);
}

#[test]
fn map_rejects_core_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"field":{"kind":"RotatingDipole","params":{"moment":[0,0,1],"omega_star":1}},"grid":{"x":[-1,1,3],"y":[-1,1,3],"z":[-1,1,3]}}"#,
    );
    assert_eq!(nullcharge(&["map", "--config", &cfg]).code, 2);
}

#[test]
fn conformal_check_failure_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"samples":10,"tolerances":{"omega_identity":1e-10,"field_round_trip":1e-10,"eom_invariance":1e-300,"dilatation_only":1e-12}}"#,
    );
    let run = nullcharge(&["conformal-check", "--config", &cfg]);
    assert_eq!(run.code, 6);
    assert_eq!(json(&run)["pass"], false);
}

#[test]
fn conformal_check_defaults_and_seed() {
    let a = nullcharge(&["conformal-check", "--quiet", "--seed", "7"]);
    assert_eq!(a.code, 0);
    let v = json(&a);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["max_residuals"]["identity"], 0.0);
    assert!(v["max_residuals"]["dilatation_only"].as_f64().unwrap() <= 1e-12);
    assert_ne!(a.stdout, nullcharge(&["conformal-check", "--quiet", "--seed", "8"]).stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = golden_dir().join("map.json");
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nullcharge"))
            .args(["map", "--quiet", "--config", cfg.to_str().unwrap()])
            .env("NULLCHARGE_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, auto) = (run("1"), run("0"));
    assert!(one.status.success() && auto.status.success());
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(run("many").status.code(), Some(2));
}
