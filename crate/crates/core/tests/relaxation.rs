use std::f64::consts::PI;

use gwv_core::field::{Grid, Region, ScalarField};
use gwv_core::relax::{coarea_check, f_energy, level_extract, radial_energy, smooth_equality_check, ExtractOpts};
use gwv_core::Vec2;

fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

fn quadratic(n: usize) -> ScalarField {
    ScalarField::sample(Grid::centered(1.0, n), Region::Disk { center: Vec2::ZERO, radius: 0.95 }, |x| 1.0 - x.norm2()).unwrap()
}

fn quadratic_levels(n: usize, r_min: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|k| {
        let r = 0.95 - (0.95 - r_min) * k as f64 / (n - 1) as f64;
        1.0 - r * r
    }).collect();
    t.dedup();
    t
}

fn smooth_disk(n: usize) -> ScalarField {
    ScalarField::sample(Grid::centered(1.0, n), Region::Disk { center: Vec2::ZERO, radius: 1.0 }, |x| smootherstep((0.9 - x.norm()) / 0.6)).unwrap()
}

fn smooth_levels(n: usize) -> Vec<f64> {
    (0..n).map(|k| smootherstep(0.02 + 0.96 * k as f64 / (n - 1) as f64)).collect()
}

#[test]
fn affine_energy_is_area() {
    let grid = Grid { nx: 100, ny: 100, origin: Vec2::new(0.005, 0.005), h: 0.01 };
    let region = Region::Box { rect: gwv_core::Rect::new(Vec2::new(0.2, 0.2), Vec2::new(0.8, 0.8)) };
    let u = ScalarField::sample(grid, region, |x| 0.3 * x.x + 0.4 * x.y).unwrap();
    let f = f_energy(&u, 1.5).unwrap();
    assert!((f - 0.18).abs() < 1e-9, "{f}");
}

#[test]
fn coarea_quadratic() {
    let oracle = radial_energy(|r| 2.0 * r, 2.0, 0.0, 0.95, 2000);
    let mut gaps = Vec::new();
    for n in [128, 256, 512] {
        let u = quadratic(n);
        let rep = coarea_check(&u, 2.0, &quadratic_levels(40 * n / 256, 2.0 * u.grid.h), &ExtractOpts::default()).unwrap();
        let se = smooth_equality_check(&u, 2.0).unwrap();
        assert!(se.gap < 1e-12);
        assert!((rep.f_direct / oracle - 1.0).abs() < 0.01);
        gaps.push(rep.gap);
    }
    assert!(gaps[2] < 0.02);
    assert!(gaps[0] > 1.8 * gaps[1] && gaps[1] > 1.8 * gaps[2], "{gaps:?}");
    let u = quadratic(512);
    let rep = coarea_check(&u, 2.0, &quadratic_levels(40, 0.01), &ExtractOpts::default()).unwrap();
    assert!(rep.gap < 0.02, "{rep:?}");
}

#[test]
fn coarea_smooth_disk() {
    let du = |r: f64| {
        let x = (0.9 - r) / 0.6;
        if x <= 0.0 || x >= 1.0 { 0.0 } else { 30.0 * x * x * (1.0 - x) * (1.0 - x) / 0.6 }
    };
    let oracle = radial_energy(du, 1.5, 0.0, 1.0, 2000);
    let mut gaps = Vec::new();
    for n in [128, 256, 512] {
        let u = smooth_disk(n);
        let rep = coarea_check(&u, 1.5, &smooth_levels(40 * n / 256), &ExtractOpts::default()).unwrap();
        assert!((rep.f_direct / oracle - 1.0).abs() < 0.01);
        gaps.push(rep.gap);
    }
    assert!(gaps[0] > 2.0 * gaps[1] && gaps[1] > 2.0 * gaps[2], "{gaps:?}");
    let u = smooth_disk(512);
    let rep = coarea_check(&u, 1.5, &smooth_levels(40), &ExtractOpts::default()).unwrap();
    assert!(rep.gap < 0.03, "{rep:?}");
}

#[test]
fn level_radii() {
    let u = quadratic(512);
    let fam = level_extract(&u, &[0.19, 0.36, 0.51], &ExtractOpts::default()).unwrap();
    for (sys, r) in fam.systems.iter().zip([0.9, 0.8, 0.7]) {
        assert_eq!(sys.curves.len(), 1);
        let l = sys.curves[0].length();
        assert!((l / (2.0 * PI) - r).abs() < u.grid.h, "{l}");
    }
}
