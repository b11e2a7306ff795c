use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use gwv_core::curves::{ClosedCurve, CurveSystem};
use gwv_core::io;
use gwv_core::radial::{canonical_limit_young, CanonicalKind, PolarOpts};
use gwv_core::varifold::Varifold;
use gwv_core::Vec2;

fn gwv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwv"))
        .args(args)
        .env("GWV_THREADS", "2")
        .output()
        .expect("gwv runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output, quantity: &str) -> f64 {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let rec = r
        .records()
        .flatten()
        .find(|rec| &rec[0] == quantity)
        .unwrap_or_else(|| panic!("no row {quantity} in\n{}", stdout(o)));
    rec[1].parse().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn circle_file(dir: &Path) -> String {
    let c = ClosedCurve::circle(Vec2::ZERO, 1.0, 512, 1).unwrap();
    write(dir, "circle.json", &io::write_curve_system(&CurveSystem::new(vec![c])).unwrap())
}

#[test]
fn curve_energy_of_unit_circle() {
    let dir = tempfile::tempdir().unwrap();
    let f = circle_file(dir.path());
    let o = gwv(&["curve-energy", "--system", &f, "--p", "2", "--expect", &(4.0 * PI).to_string()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((value(&o, "G(Phi)") / (4.0 * PI) - 1.0).abs() < 0.005);
}

#[test]
fn failed_expectation_exits_one_with_detail() {
    let dir = tempfile::tempdir().unwrap();
    let f = circle_file(dir.path());
    let o = gwv(&["curve-energy", "--system", &f, "--p", "2", "--expect", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL G(Phi)"));
}

#[test]
fn bad_configuration_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = circle_file(dir.path());
    for args in [
        vec!["curve-energy", "--system", f.as_str(), "--p", "1"],
        vec!["curve-energy", "--system", "/nonexistent.json", "--p", "2"],
        vec!["scene", "run", "--name", "conc", "--samples", "8"],
        vec!["scene", "run", "--name", "osc", "--p", "2.5"],
        vec!["scene", "run", "--name", "no-such-scene"],
        vec!["ym-identify", "--kind", "weird"],
        vec!["f-energy", "--scene", "smooth", "--p", "2", "--grid", "16"],
        vec!["no-such-command"],
    ] {
        let o = gwv(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let bad = write(dir.path(), "bad.json", "{\"curves\": 3}");
    assert_eq!(gwv(&["curve-energy", "--system", &bad, "--p", "2"]).status.code(), Some(2));
}

#[test]
fn scene_report_columns_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = gwv(&["scene", "run", "--name", "conc", "--p", "1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("quantity,value,expected,provenance,tolerance,pass\n"));
    assert!(text.contains("W(V_nu),5.0265482457436690e1,"));
}

#[test]
fn emit_points_writes_sibling_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tri.csv");
    gwv(&["scene", "run", "--name", "triple", "--samples", "256", "--emit-points", "--out", out.to_str().unwrap()]);
    let pts = std::fs::read_to_string(dir.path().join("tri.points.csv")).unwrap();
    assert!(pts.starts_with("label,x,y,w\n"));
    assert_eq!(pts.lines().count(), 1 + 3 * 256);
}

#[test]
fn tolerance_override_changes_verdict() {
    let o = gwv(&["scene", "run", "--name", "conc", "--tol", "W(V_nu_h) h=8=1e-12"]);
    assert_eq!(o.status.code(), Some(0));
    let o = gwv(&["scene", "run", "--name", "conc", "--tol", "W(V_nu_h) h=8=0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gwv(&["scene", "run", "--name", "conc", "--tol", "W(V_nu)=-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cross_reports_strict_gap() {
    let o = gwv(&["scene", "run", "--name", "cross", "--p", "1.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&o, "minVu gap > 0.05"), 1.0);
}

#[test]
fn trisegment_residual_row_fails() {
    let o = gwv(&["scene", "run", "--name", "trisegment"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&o, "curvature residual / mu_V >= 0.1"), 0.0);
    assert_eq!(value(&o, "singular ratio growth per halving >= 1.8"), 1.0);
}

#[test]
fn list_plain_and_json() {
    let o = gwv(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["osc", "conc", "concdiff", "cusp", "cross", "triple", "trisegment"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{name} "))), "{name}");
    }
    assert!(text.contains("[PAPER]") && text.contains("[DERIVED]"));
    let o = gwv(&["list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 11);
    assert_eq!(v[1]["name"], "conc");
}

#[test]
fn young_measure_pairing() {
    let dir = tempfile::tempdir().unwrap();
    let nu = canonical_limit_young(CanonicalKind::Concentration, &PolarOpts::default());
    let f = write(dir.path(), "nu.json", &io::write_young(&nu).unwrap());
    let o = gwv(&["ym-pair", "--in", &f, "--f", "norm", "--expect", &(8.0 * PI).to_string()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(gwv(&["ym-pair", "--in", &f, "--f", "cubic"]).status.code(), Some(2));
}

#[test]
fn varifold_commands() {
    let dir = tempfile::tempdir().unwrap();
    let c = ClosedCurve::circle(Vec2::ZERO, 1.0, 628, 1).unwrap();
    let v = Varifold::new(Varifold::from_curve_system(&CurveSystem::new(vec![c])).particles).unwrap();
    let bare = write(dir.path(), "v.json", &io::write_varifold(&v).unwrap());
    assert_eq!(gwv(&["varifold-energy", "--in", &bare, "--p", "2"]).status.code(), Some(2));
    let with = dir.path().join("vh.json");
    let o = gwv(&["varifold-curvature", "--in", &bare, "--write", with.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = gwv(&["varifold-energy", "--in", with.to_str().unwrap(), "--p", "2", "--expect", &(4.0 * PI).to_string(), "--rtol", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = gwv(&["singular-ratio", "--in", &bare, "--center", "1,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&o, "ratio r=0.025") < 2.0);
}

#[test]
fn field_commands() {
    let o = gwv(&["f-energy", "--scene", "smooth", "--p", "2", "--grid", "256"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value(&o, "F(u)") / 15.5294 - 1.0).abs() < 0.01);
    let o = gwv(&["coarea-check", "--scene", "smoothdisk", "--p", "1.5", "--grid", "256", "--levels", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let u = gwv_core::registry::quadratic_field(128).unwrap();
    let f = write(dir.path(), "u.json", &io::write_field(&u).unwrap());
    let o = gwv(&["f-energy", "--field", &f, "--p", "2"]);
    assert!((value(&o, "F(u)") / 15.5294 - 1.0).abs() < 0.02);
}

#[test]
fn minvu_by_name_and_file() {
    let o = gwv(&["minvu", "--scene", "disk"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&o, "minVu F_bar >= min W"), 1.0);

    let dir = tempfile::tempdir().unwrap();
    let c = ClosedCurve::circle(Vec2::ZERO, 1.0, 512, 1).unwrap();
    let sys = CurveSystem::new(vec![c]);
    write(dir.path(), "phi.json", &io::write_curve_system(&sys).unwrap());
    let v = Varifold::from_curve_system(&sys).with_curvature_fn(|x| -x);
    write(dir.path(), "v.json", &io::write_varifold(&v).unwrap());
    let scene = write(
        dir.path(),
        "circle-scene.json",
        r#"{"p": 2, "family": "phi.json", "candidates": [{"name": "circle", "varifold": "v.json", "probes": [[1, 0]]}]}"#,
    );
    let o = gwv(&["minvu", "--scene", &scene]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!((value(&o, "W(circle)") / (4.0 * PI) - 1.0).abs() < 1e-3);

    let named = write(dir.path(), "named.json", r#"{"scene": "disk", "p": 2}"#);
    assert_eq!(gwv(&["minvu", "--scene", &named]).status.code(), Some(0));
}

#[test]
fn identification_writes_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.json");
    let o = gwv(&["ym-identify", "--kind", "osc", "--hmax", "7", "--estimate", est.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let nu = io::read_young(&std::fs::read_to_string(est).unwrap()).unwrap();
    assert!(!nu.cells.is_empty());
}
