use std::f64::consts::PI;

use gwv_core::curves::{resample_arclength, stadium, ClosedCurve, CurveSystem, LevelFamily};
use gwv_core::radial::circle_points;
use gwv_core::Vec2;

fn circle(r: f64, n: usize, m: u32) -> ClosedCurve {
    ClosedCurve::circle(Vec2::ZERO, r, n, m).unwrap()
}

#[test]
fn resampling() {
    let coarse = circle_points(2.0, 64);
    let c = resample_arclength(&coarse, 256).unwrap();
    assert!((c.length() / (4.0 * PI) - 1.0).abs() < 1e-3);
    assert!(resample_arclength(&[Vec2::ZERO, Vec2::E1], 64).is_err());
}

#[test]
fn circle_curvature() {
    for (r, tol) in [(1.0, 1e-3), (0.5, 2e-3)] {
        let k = circle(r, 1024, 1).curvature();
        assert!(k.iter().all(|k| (k.norm() - 1.0 / r).abs() <= tol));
    }
}

#[test]
fn stadium_flats_are_straight() {
    let c = stadium(1.0, 0.5, 1024).unwrap();
    let flat = c
        .samples()
        .iter()
        .zip(c.curvature())
        .filter(|(x, _)| x.x.abs() < 0.9)
        .map(|(_, k)| k.norm())
        .fold(0.0, f64::max);
    assert!(flat <= 1e-6, "{flat}");
}

#[test]
fn willmore_energy_of_circles() {
    let e = |r: f64, m: u32, p: f64| CurveSystem::new(vec![circle(r, 1024, m)]).willmore_energy(p).unwrap();
    assert!((e(1.0, 1, 2.0) / (4.0 * PI) - 1.0).abs() < 0.005);
    assert!((e(1.0, 2, 2.0) / (8.0 * PI) - 1.0).abs() < 0.005);
    let exact = 4.0 * PI * (1.0 + 2f64.powf(-1.5));
    assert!((e(2.0, 1, 1.5) / exact - 1.0).abs() < 0.005);
    assert!(CurveSystem::new(vec![circle(1.0, 64, 1)]).willmore_energy(1.0).is_err());
}

#[test]
fn interior_indicator_parity() {
    let single = CurveSystem::new(vec![circle(1.0, 256, 1)]);
    assert_eq!(single.interior_indicator(Vec2::ZERO).unwrap(), 1);
    assert_eq!(single.interior_indicator(Vec2::new(3.0, 0.0)).unwrap(), 0);
    let doubled = CurveSystem::new(vec![circle(1.0, 256, 2)]);
    assert_eq!(doubled.interior_indicator(Vec2::ZERO).unwrap(), 0);
}

#[test]
fn nestedness_of_concentric_and_crossing_circles() {
    let probes: Vec<Vec2> = (0..400)
        .map(|k| Vec2::new(-2.0 + (k % 20) as f64 * 0.2 + 0.05, -2.0 + (k / 20) as f64 * 0.2 + 0.05))
        .collect();
    let nested = LevelFamily::new(
        vec![0.0, 1.0],
        vec![CurveSystem::new(vec![circle(1.0, 256, 1)]), CurveSystem::new(vec![circle(0.5, 256, 1)])],
    )
    .unwrap();
    let r = nested.nestedness_check(&probes);
    assert!(r.no_crossing && r.inclusion && r.ghost_fraction_ok);

    let shifted = circle(1.0, 256, 1).translated(Vec2::new(1.0, 0.0));
    let crossing = LevelFamily::new(
        vec![0.0, 1.0],
        vec![CurveSystem::new(vec![circle(1.0, 256, 1)]), CurveSystem::new(vec![shifted])],
    )
    .unwrap();
    let r = crossing.nestedness_check(&probes);
    assert!(!r.no_crossing && r.crossings > 0);
}

#[test]
fn level_energy_cases() {
    let levels: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let constant = LevelFamily::constant(levels, CurveSystem::new(vec![circle(1.0, 1024, 1)])).unwrap();
    assert!((constant.level_energy(2.0).unwrap() / (4.0 * PI) - 1.0).abs() < 0.005);

    let ts: Vec<f64> = (0..=100).map(|k| k as f64 * 0.005).collect();
    let systems = ts.iter().map(|t| CurveSystem::new(vec![circle(1.0 - t, 512, 1)])).collect();
    let shrinking = LevelFamily::new(ts, systems).unwrap();
    let exact = 2.0 * PI * (0.375 + 2f64.ln());
    assert!((shrinking.level_energy(2.0).unwrap() / exact - 1.0).abs() < 0.01);

    let empty = LevelFamily::constant(vec![0.0, 0.5, 1.0], CurveSystem::new(vec![])).unwrap();
    assert_eq!(empty.level_energy(2.0).unwrap(), 0.0);
}
