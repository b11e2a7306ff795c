//! Acceptance criteria 1 to 14, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gwv_core::curves::{ClosedCurve, CurveSystem};
use gwv_core::identify::identify_canonical;
use gwv_core::measure::{lsc_probe, random_mollified_sequence, Integrand, Particle, ParticleMeasure, VParticle, VectorParticleMeasure};
use gwv_core::radial::CanonicalKind;
use gwv_core::registry::{identify_rows, run_scene, Row, SceneConfig, SceneReport};
use gwv_core::varifold::{estimate_curvature, CurvatureOpts, Varifold};
use gwv_core::Vec2;

struct Scenes(Vec<SceneReport>);

impl Scenes {
    fn get(&self, name: &str) -> &SceneReport {
        self.0.iter().find(|r| r.scene == name).expect("scene evaluated")
    }

    fn rows<'a>(&'a self, name: &str, pred: impl Fn(&str) -> bool + 'a) -> impl Iterator<Item = &'a Row> + 'a {
        self.get(name).rows.iter().filter(move |r| pred(&r.quantity))
    }

    fn row(&self, name: &str, quantity: &str) -> &Row {
        self.get(name)
            .rows
            .iter()
            .find(|r| r.quantity == quantity)
            .unwrap_or_else(|| panic!("{name}: no row {quantity}"))
    }
}

fn scene(name: &str, p: Option<f64>) -> SceneReport {
    run_scene(name, &SceneConfig { p, ..Default::default() }).unwrap()
}

fn gwv(args: &[&str], threads: &str) -> (i32, Vec<u8>, f64) {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_gwv"))
        .args(args)
        .env("GWV_THREADS", threads)
        .output()
        .expect("gwv runs");
    (out.status.code().unwrap_or(-1), out.stdout, t.elapsed().as_secs_f64())
}

fn csv_value(stdout: &[u8], quantity: &str) -> Option<(f64, bool)> {
    let mut r = csv::Reader::from_reader(stdout);
    r.records().flatten().find(|rec| &rec[0] == quantity).map(|rec| {
        (rec[1].parse().unwrap(), &rec[5] == "true")
    })
}

fn all_pass<'a>(rows: impl IntoIterator<Item = &'a Row>) -> (bool, usize) {
    let mut n = 0;
    let mut ok = true;
    for r in rows {
        n += 1;
        ok &= r.pass;
    }
    (ok && n > 0, n)
}

fn c1() -> (bool, String) {
    let (code, out, secs) = gwv(&["scene", "run", "--name", "conc", "--p", "1.5"], "4");
    let w = csv_value(&out, "W(V_nu)");
    let mu = csv_value(&out, "mu_V(Omega)");
    let (Some((w, _)), Some((mu, _))) = (w, mu) else {
        return (false, "missing rows".into());
    };
    let ew = (w / (16.0 * PI) - 1.0).abs();
    let em = (mu / (8.0 * PI) - 1.0).abs();
    (
        code == 0 && ew <= 0.01 && em <= 0.005 && secs < 5.0,
        format!("W rel err {ew:.2e}, mu rel err {em:.2e}, {secs:.2} s, exit {code}"),
    )
}

fn c2(s: &Scenes) -> (bool, String) {
    let fin = s.row("conc", "W(V_nu_h) relative error h=64");
    let mono = s.row("conc", "W(V_nu_h) tail monotone");
    (fin.pass && mono.pass, format!("final rel err {:.2e}, tail monotone {}", fin.value, mono.pass))
}

fn c3(s: &Scenes) -> (bool, String) {
    let mut ok = true;
    let mut worst = 0.0f64;
    for name in ["osc", "concdiff"] {
        for p in [1.25, 1.5, 1.75] {
            let r = s.row(name, &format!("W(V_nu) p={p}"));
            ok &= r.pass;
            worst = worst.max((r.value / r.expected - 1.0).abs());
        }
    }
    let five_pi = s.row("osc", "W(V_nu) p=1.5");
    ok &= (five_pi.value / (5.0 * PI) - 1.0).abs() <= 0.01;
    (ok, format!("worst rel err {worst:.2e} over osc/concdiff, p=1.5 value {:.6}", five_pi.value))
}

fn c4(s: &Scenes) -> (bool, String) {
    let gap = s.row("smooth", "W(V_nu_Du) gap");
    let f = s.row("smooth", "F(u)");
    let w = s.row("smooth", "W(V_nu_Du)");
    (
        gap.pass && f.pass && w.pass,
        format!("gap {:.2e}, F {:.6}, W {:.6}, oracle {:.6}", gap.value, f.value, w.value, f.expected),
    )
}

fn c5(s: &Scenes) -> (bool, String) {
    let mut ok = true;
    let mut msg = Vec::new();
    for name in ["smooth", "smoothdisk"] {
        let g = s.row(name, "coarea gap");
        let o = s.row(name, "coarea order under refinement >= 1");
        ok &= g.pass && g.value <= 0.02 && o.pass;
        msg.push(format!("{name} gap {:.2e} order ok {}", g.value, o.pass));
    }
    (ok, msg.join(", "))
}

fn c6() -> (bool, String) {
    let mut worst_rms = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let n = ((2.0 * PI * r / 0.01) as usize).max(256);
        let v = Varifold::from_curve_system(&CurveSystem::new(vec![ClosedCurve::circle(Vec2::ZERO, r, n, 1).unwrap()]));
        let est = estimate_curvature(&v, &CurvatureOpts::default()).unwrap();
        let num: f64 = v.particles.iter().zip(&est.h).map(|(p, h)| p.w * (h.norm() - 1.0 / r).powi(2)).sum();
        worst_rms = worst_rms.max((num / v.mass()).sqrt() * r);
    }
    let mut worst_sd = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let c = ClosedCurve::circle(Vec2::ZERO, r, 1024, 1).unwrap();
        for k in c.curvature() {
            worst_sd = worst_sd.max((k.norm() * r - 1.0).abs());
        }
    }
    (
        worst_rms <= 0.05 && worst_sd <= 1e-3,
        format!("weighted RMS rel err {worst_rms:.2e}, second-difference rel err {worst_sd:.2e}"),
    )
}

fn c7(s: &Scenes) -> (bool, String) {
    let mut ok = true;
    let mut worst = 0.0f64;
    for name in ["disk", "doubled", "cusp"] {
        let r = s.row(name, "W(V_nu)");
        ok &= r.pass;
        worst = worst.max((r.value / r.expected - 1.0).abs());
    }
    (ok, format!("worst |W/G - 1| {worst:.2e}"))
}

const INDICATOR: [&str; 4] = ["disk", "doubled", "cusp", "cross"];

fn c8(s: &Scenes) -> (bool, String) {
    let mut ok = true;
    let mut n = 0;
    for name in INDICATOR {
        for q in ["Bar_nu - Du residual", "lambda boundary band mass", "membership V_nu_Du", "membership V_nu sistema"] {
            ok &= s.row(name, q).pass;
            n += 1;
        }
    }
    ok &= s.row("smooth", "membership V_nu_Du").pass;
    (ok, format!("{} membership rows", n + 1))
}

const ALL: [&str; 11] = [
    "osc", "conc", "concdiff", "smooth", "smoothdisk", "disk", "doubled", "cusp", "cross", "triple", "trisegment",
];

fn c9(s: &Scenes) -> (bool, String) {
    let (ok, n) = all_pass(ALL.iter().flat_map(|name| s.rows(name, |q| q.starts_with("mass inequality"))));
    (ok, format!("{n} candidates"))
}

fn c10(s: &Scenes) -> (bool, String) {
    let (ok, n) = all_pass(ALL.iter().flat_map(|name| s.rows(name, |q| q == "minVu F_bar >= min W")));
    let gap = s.row("cross", "minVu gap");
    let strict = s.row("cross", "minVu gap > 0.05");
    (ok && strict.pass, format!("{n} scenes, cross gap {:.4}", gap.value))
}

fn c11(s: &Scenes) -> (bool, String) {
    let g = s.row("trisegment", "singular ratio growth per halving >= 1.8");
    let t = s.row("triple", "singular ratio max/min - 1");
    (g.pass && t.pass, format!("trisegment growth ok {}, triple variation {:.3}", g.pass, t.value))
}

fn c12(s: &Scenes) -> (bool, String) {
    let mut ok = true;
    let mut passed = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = 64;
        let mut mp = Vec::with_capacity(n);
        let mut np = Vec::with_capacity(n);
        for _ in 0..n {
            let pos = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let w = rng.gen_range(0.1..1.0);
            let d = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            mp.push(Particle { pos, w });
            np.push(VParticle { pos, w: d * w });
        }
        let mu = ParticleMeasure::new(mp).unwrap();
        let nu = VectorParticleMeasure::new(np).unwrap();
        let (nus, mus) = random_mollified_sequence(&nu, &mu, 12, seed);
        let f = match seed % 3 {
            0 => Integrand::norm(),
            1 => Integrand::power(1.5),
            _ => Integrand::area(),
        };
        let rep = lsc_probe(&nus, &mus, (&nu, &mu), &f, 0.0, 1e-9).unwrap();
        ok &= rep.liminf_ok;
        passed += rep.liminf_ok as usize;
    }
    let canon: Vec<bool> = ["osc", "conc", "concdiff"].iter().map(|n| s.row(n, "lsc liminf_ok").pass).collect();
    ok &= canon.iter().all(|&b| b);
    (ok, format!("{passed}/20 randomized, canonical {canon:?}"))
}

fn c13() -> (bool, String) {
    let mut ok = true;
    let mut msg = Vec::new();
    for kind in [CanonicalKind::Oscillation, CanonicalKind::Concentration, CanonicalKind::Diffuse] {
        let rep = identify_canonical(kind, 64).unwrap();
        let rows = identify_rows(kind, &rep);
        let pass = rows.iter().all(|r| r.pass);
        ok &= pass;
        msg.push(format!("{} {}", kind.name(), if pass { "ok" } else { "failed" }));
    }
    (ok, msg.join(", "))
}

fn c14() -> (bool, String) {
    let runs: [&[&str]; 5] = [
        &["scene", "run", "--name", "conc"],
        &["scene", "run", "--name", "osc"],
        &["scene", "run", "--name", "smooth", "--grid", "256", "--levels", "20"],
        &["scene", "run", "--name", "cross", "--samples", "1024", "--emit-points"],
        &["ym-identify", "--kind", "conc", "--hmax", "32"],
    ];
    let mut ok = true;
    for args in runs {
        let (c1, a, _) = gwv(args, "1");
        let (c4, b, _) = gwv(args, "4");
        ok &= c1 == c4 && a == b && !a.is_empty();
    }
    (ok, format!("{} commands compared under GWV_THREADS=1 and 4", runs.len()))
}

fn main() {
    let scenes = Scenes(ALL.iter().map(|n| scene(n, None)).collect());
    let results: Vec<(usize, &str, (bool, String))> = vec![
        (1, "concentration energy", c1()),
        (2, "concentration sequence convergence", c2(&scenes)),
        (3, "diffuse/oscillation energy", c3(&scenes)),
        (4, "smooth equality", c4(&scenes)),
        (5, "coarea identity", c5(&scenes)),
        (6, "curvature oracle", c6()),
        (7, "sistemaYoung identity", c7(&scenes)),
        (8, "barycenter/membership", c8(&scenes)),
        (9, "mass inequality", c9(&scenes)),
        (10, "minVu inequality", c10(&scenes)),
        (11, "singularity detection", c11(&scenes)),
        (12, "semicontinuity probes", c12(&scenes)),
        (13, "identification", c13()),
        (14, "determinism", c14()),
    ];
    let mut failed = Vec::new();
    for (k, name, (ok, detail)) in &results {
        println!("criterion {k:2} {}: {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(*k);
        }
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
