use std::f64::consts::PI;

use gwv_core::curves::{stadium, ClosedCurve, CurveSystem, LevelFamily};
use gwv_core::radial::{canonical_limit_young, radial_curvature, CanonicalKind, PolarOpts};
use gwv_core::varifold::{
    estimate_curvature, singular_ratio, ConstantPlateauField, CurvatureOpts, LineParticle,
    RadialPlateauField, Varifold,
};
use gwv_core::Vec2;

fn circle_varifold(r: f64, n: usize) -> Varifold {
    let c = ClosedCurve::circle(Vec2::ZERO, r, n, 1).unwrap();
    Varifold::from_curve_system(&CurveSystem::new(vec![c]))
}

#[test]
fn circle_first_variation_of_position_field() {
    let v = circle_varifold(1.0, 1024);
    let x = RadialPlateauField { center: Vec2::ZERO, r0: 1.5, r1: 1.9 };
    assert!((v.first_variation(&x) - 2.0 * PI).abs() < 0.005 * 2.0 * PI);
}

#[test]
fn segment_inside_plateau_has_no_variation() {
    let particles = (0..100)
        .map(|i| LineParticle { x: Vec2::new(-0.5 + i as f64 * 0.01, 0.1), theta: 0.3, w: 0.01 })
        .collect();
    let v = Varifold::new(particles).unwrap();
    let x = ConstantPlateauField { center: Vec2::ZERO, r0: 1.0, r1: 2.0, v: Vec2::new(0.3, -2.0) };
    assert!(v.first_variation(&x).abs() < 1e-9);
}

#[test]
fn concentration_limit_varifold_energy() {
    let nu = canonical_limit_young(CanonicalKind::Concentration, &PolarOpts::default());
    let v = Varifold::from_young(&nu).with_curvature_fn(radial_curvature);
    assert!((v.mass() - 8.0 * PI).abs() < 0.005 * 8.0 * PI);
    assert!((v.willmore(1.5, None).unwrap() - 16.0 * PI).abs() < 0.01 * 16.0 * PI);
    let x = RadialPlateauField { center: Vec2::ZERO, r0: 1.5, r1: 1.9 };
    assert!((v.first_variation(&x) - 8.0 * PI).abs() < 0.005 * 8.0 * PI);
}

#[test]
fn estimated_circle_curvature() {
    for r in [0.5, 1.0, 2.0] {
        let n = ((2.0 * PI * r / 0.01) as usize).max(256);
        let v = circle_varifold(r, n);
        let est = estimate_curvature(&v, &CurvatureOpts::default()).unwrap();
        let num: f64 = v.particles.iter().zip(&est.h).map(|(p, h)| p.w * (h.norm() - 1.0 / r).powi(2)).sum();
        let rms = (num / v.mass()).sqrt() * r;
        eprintln!("r={r} rms={rms} residual={} iters={}", est.residual, est.iterations);
        assert!(rms <= 0.05);
    }
}

#[test]
fn estimated_flat_curvature() {
    let particles = (0..400)
        .map(|i| LineParticle { x: Vec2::new(-2.0 + i as f64 * 0.01, 0.0), theta: 0.0, w: 0.01 })
        .collect();
    let v = Varifold::new(particles).unwrap();
    let opts = CurvatureOpts { window: Some(gwv_core::Rect::square(1.5)), ..Default::default() };
    let est = estimate_curvature(&v, &opts).unwrap();
    let inner = v.particles.iter().zip(&est.h).filter(|(p, _)| p.x.x.abs() < 1.0);
    let m = inner.map(|(_, h)| h.norm()).fold(0.0, f64::max);
    eprintln!("flat max {m}");
    assert!(m <= 1e-3);
}

#[test]
fn stadium_curvature_is_piecewise() {
    let c = stadium(1.0, 0.5, 2048).unwrap();
    let v = Varifold::from_curve_system(&CurveSystem::new(vec![c]));
    let h = v.curvature.as_ref().unwrap();
    for (p, k) in v.particles.iter().zip(h) {
        let k = k.norm();
        if (p.x.x.abs() - 1.0).abs() < 0.01 {
            continue;
        }
        assert!(k < 1e-2 || (k - 2.0).abs() < 1e-2, "{:?} {k}", p.x);
    }
}

#[test]
fn level_family_mass() {
    let levels: Vec<f64> = (0..=50).map(|i| 0.5 * i as f64 / 50.0).collect();
    let systems = levels
        .iter()
        .map(|t| CurveSystem::new(vec![ClosedCurve::circle(Vec2::ZERO, 1.0 - t, 512, 1).unwrap()]))
        .collect();
    let phi = LevelFamily::new(levels, systems).unwrap();
    let v = Varifold::from_level_family(&phi);
    assert!((v.mass() - 0.75 * PI).abs() < 0.01 * 0.75 * PI);
}

#[test]
fn trisegment_ratio_grows_and_triple_stays_bounded() {
    let ds = 1e-4;
    let mut particles = Vec::new();
    for deg in [0.0f64, 90.0, 225.0] {
        let d = Vec2::from_angle(deg.to_radians());
        let theta = gwv_core::geom::line_angle(d);
        for k in 0..10000 {
            particles.push(LineParticle { x: d * ((k as f64 + 0.5) * ds), theta, w: ds });
        }
    }
    let v = Varifold::new(particles).unwrap();
    let radii = [0.2, 0.1, 0.05, 0.025];
    let prof = singular_ratio(&v, Vec2::ZERO, &radii).unwrap();
    eprintln!("trisegment {prof:?}");
    for w in prof.windows(2) {
        assert!(w[1] / w[0] >= 1.8);
    }
    let mut particles = Vec::new();
    let branches = [
        (Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0), 0.0),
        (Vec2::new(-0.75f64.sqrt(), -0.5), Vec2::new(-0.5, 0.75f64.sqrt()), 1.0),
        (Vec2::new(0.75f64.sqrt(), -0.5), Vec2::new(0.5, 0.75f64.sqrt()), 1.0),
    ];
    for (d, n, kappa) in branches {
        for k in 0..10000 {
            let s = (k as f64 + 0.5) * ds;
            let (x, t) = if kappa == 0.0 {
                (d * s, d)
            } else {
                let a: f64 = kappa * s;
                (d * (a.sin() / kappa) + n * ((1.0 - a.cos()) / kappa), d * a.cos() + n * a.sin())
            };
            particles.push(LineParticle { x, theta: gwv_core::geom::line_angle(t), w: ds });
        }
    }
    let v = Varifold::new(particles).unwrap();
    let prof = singular_ratio(&v, Vec2::ZERO, &radii).unwrap();
    eprintln!("triple {prof:?}");
    let (lo, hi) = prof.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.2);
}
