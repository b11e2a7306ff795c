use std::f64::consts::PI;

use gwv_core::measure::{
    g_functional, lsc_probe, recession_check, Integrand, ParticleMeasure, RecessionVerdict,
    VectorParticleMeasure,
};
use gwv_core::radial::circle_points;
use gwv_core::Vec2;

fn uniform_circle(r: f64, n: usize, mass: f64) -> ParticleMeasure {
    ParticleMeasure::from_pairs(circle_points(r, n).into_iter().map(|x| (x, mass / n as f64))).unwrap()
}

fn disk_grid(n: usize) -> ParticleMeasure {
    let h = 2.0 / n as f64;
    let pts = (0..n * n).filter_map(|k| {
        let x = Vec2::new(-1.0 + (k % n) as f64 * h + h / 2.0, -1.0 + (k / n) as f64 * h + h / 2.0);
        (x.norm() <= 1.0).then_some((x, h * h))
    });
    ParticleMeasure::from_pairs(pts).unwrap()
}

#[test]
fn total_mass_cases() {
    assert_eq!(ParticleMeasure::empty().total_mass(), 0.0);
    assert!((uniform_circle(1.0, 1024, 2.0 * PI).total_mass() - 2.0 * PI).abs() < 1e-12);
    assert!((uniform_circle(1.0, 4096, 8.0 * PI).total_mass() - 8.0 * PI).abs() < 1e-6);
}

#[test]
fn negative_or_nonfinite_weights_are_rejected() {
    assert!(ParticleMeasure::from_pairs([(Vec2::ZERO, -1.0)]).is_err());
    assert!(ParticleMeasure::from_pairs([(Vec2::new(f64::NAN, 0.0), 1.0)]).is_err());
}

#[test]
fn pairing_cases() {
    let dirac = ParticleMeasure::from_pairs([(Vec2::ZERO, 1.0)]).unwrap();
    assert_eq!(dirac.pair(|_| 1.0).unwrap(), 1.0);
    let c = uniform_circle(1.0, 1000, 2.0 * PI);
    assert!((c.pair(|x| x.norm2()).unwrap() - 2.0 * PI).abs() < 1e-9);
    let d = disk_grid(2000);
    let v = d.pair(|x| x.norm().powf(-1.5)).unwrap();
    assert!((v / (4.0 * PI) - 1.0).abs() < 0.02, "{v}");
}

#[test]
fn g_functional_cases() {
    let mu = disk_grid(200);
    let twice = VectorParticleMeasure::with_density(&mu, |_| Vec2::new(2.0, 0.0));
    let g = g_functional(&twice, &mu, &Integrand::power(2.0), 0.0).unwrap();
    assert!((g - 4.0 * mu.total_mass()).abs() < 1e-9);

    let unit = VectorParticleMeasure::with_density(&mu, |_| Vec2::E1);
    assert!((g_functional(&unit, &mu, &Integrand::norm(), 0.0).unwrap() - mu.total_mass()).abs() < 1e-9);

    let stray = unit.concat(&VectorParticleMeasure::from_pairs([(Vec2::new(5.0, 5.0), Vec2::E1)]).unwrap());
    assert_eq!(g_functional(&stray, &mu, &Integrand::power(2.0), 1e-3).unwrap(), f64::INFINITY);
}

#[test]
fn recession_cases() {
    let samples: Vec<(Vec2, Vec2)> = (0..12)
        .map(|k| {
            let a = k as f64 * PI / 6.0;
            (Vec2::ZERO, Vec2::new(a.cos(), a.sin()))
        })
        .collect();
    let ts = [1.0, 10.0, 100.0, 1e3, 1e4];
    let r = recession_check(&Integrand::norm(), &samples, &ts).unwrap();
    assert_eq!(r.deviation, 0.0);
    let r = recession_check(&Integrand::area(), &samples, &ts).unwrap();
    assert!(r.deviation <= 1.0 / 1e4);
    assert_eq!(r.verdict, RecessionVerdict::Consistent);
    let sq = Integrand::new("|z|^2", |_, z: Vec2| z.norm2()).with_recession(|_, _| 0.0);
    assert_eq!(recession_check(&sq, &samples, &ts).unwrap().verdict, RecessionVerdict::NoLinearGrowth);
}

#[test]
fn lsc_on_constant_sequence() {
    let mu = disk_grid(64);
    let nu = VectorParticleMeasure::with_density(&mu, |x| Vec2::new(x.y, 1.0));
    let f = Integrand::power(1.5);
    let r = lsc_probe(&vec![nu.clone(); 6], &vec![mu.clone(); 6], (&nu, &mu), &f, 0.0, 1e-12).unwrap();
    assert!(r.liminf_ok);
    assert!(r.g_h.iter().all(|&g| g == r.g_limit));
}
