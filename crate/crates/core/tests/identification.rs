use std::f64::consts::PI;
use std::time::Instant;

use gwv_core::identify::{identify_limit, GeneratorSequence, IdentifyOpts};
use gwv_core::radial::CanonicalKind;

#[test]
fn oscillation_limit() {
    let t = Instant::now();
    let seq = GeneratorSequence::canonical(CanonicalKind::Oscillation, 1024);
    let rep = identify_limit(&seq, &[5, 6, 7], &IdentifyOpts { bump_spacing: 0.1, ..Default::default() }).unwrap();
    eprintln!("osc du={} lambda={} t={:?}", rep.du_mass, rep.lambda_mass, t.elapsed());
    let mut worst = 0.0f64;
    for c in &rep.estimate.cells {
        let r = c.center.norm();
        if r < 0.3 || r > 0.8 { continue; }
        let d = c.center / r;
        let plus: f64 = c.atoms.iter().filter(|a| a.z.dot(d) > 0.9).map(|a| a.p).sum();
        let minus: f64 = c.atoms.iter().filter(|a| a.z.dot(d) < -0.9).map(|a| a.p).sum();
        worst = worst.max((plus - 0.5).abs()).max((minus - 0.5).abs());
    }
    eprintln!("osc worst {worst}");
    assert!(rep.lambda_mass <= 0.01 * rep.du_mass);
    assert!(worst <= 0.05);
}

#[test]
fn concentration_limit() {
    let t = Instant::now();
    let seq = GeneratorSequence::canonical(CanonicalKind::Concentration, 1024);
    let rep = identify_limit(&seq, &[8, 16, 32, 64], &IdentifyOpts::default()).unwrap();
    let frac = rep.lambda_fraction_near(|x| (x.norm() - 1.0).abs(), 2.0 * rep.spacing);
    eprintln!("conc lambda={} (8pi={}) frac={frac} t={:?}", rep.lambda_mass, 8.0 * PI, t.elapsed());
    for r in &rep.table { eprintln!("{} {}", r.h, r.values[0]); }
    assert!((rep.lambda_mass - 8.0 * PI).abs() <= 0.02 * 8.0 * PI);
}

#[test]
fn diffuse_limit() {
    let t = Instant::now();
    let seq = GeneratorSequence::canonical(CanonicalKind::Diffuse, 2048);
    let rep = identify_limit(&seq, &[8, 10, 12], &IdentifyOpts { bump_spacing: 0.25, ..Default::default() }).unwrap();
    eprintln!("diff lambda={} t={:?}", rep.lambda_mass, t.elapsed());
    for r in &rep.table { eprintln!("{} {}", r.h, r.values[0]); }
    let mut worst = 0.0f64;
    for b in &rep.bumps {
        if b.center.norm() + 1.5 * 1.414 * rep.spacing >= 1.0 { continue; }
        let e = (b.lambda - b.area).abs() / b.area;
        worst = worst.max(e);
    }
    eprintln!("diff worst {worst}");
    assert!(worst <= 0.03);
}
