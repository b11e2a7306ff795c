use std::f64::consts::PI;

use gwv_core::curves::ClosedCurve;
use gwv_core::field::{Grid, JumpSet, Region, ScalarField};
use gwv_core::measure::{Integrand, ParticleMeasure};
use gwv_core::radial::{canonical_field, canonical_limit_young, canonical_value, CanonicalKind, PolarOpts};
use gwv_core::young::{du_measure, from_bv, gy_membership_report, symmetric_atoms, YoungMeasure};
use gwv_core::Vec2;

fn limit(kind: CanonicalKind) -> YoungMeasure {
    canonical_limit_young(kind, &PolarOpts::default())
}

fn disk_indicator(gap: f64) -> (ScalarField, JumpSet) {
    let grid = Grid::centered(2.0, 257);
    let u = ScalarField::sample(grid, Region::All, |x| if x.norm() < 1.0 { gap } else { 0.0 }).unwrap();
    let c = ClosedCurve::circle(Vec2::ZERO, 1.0, 2048, 1).unwrap();
    (u, JumpSet::from_curve(&c, gap, true))
}

#[test]
fn pairing_of_limits() {
    let zero = YoungMeasure::zero(&[(Vec2::ZERO, 1.0), (Vec2::E1, 2.0)]);
    assert_eq!(zero.pairing(&Integrand::norm()).unwrap(), 0.0);
    let osc = limit(CanonicalKind::Oscillation).pairing(&Integrand::norm()).unwrap();
    assert!((osc / PI - 1.0).abs() < 0.01);
    let conc = limit(CanonicalKind::Concentration).pairing(&Integrand::norm()).unwrap();
    assert!((conc / (8.0 * PI) - 1.0).abs() < 0.005);
}

#[test]
fn barycenters() {
    for kind in [CanonicalKind::Oscillation, CanonicalKind::Concentration] {
        assert!(limit(kind).barycenter().total_variation() < 1e-9);
    }
    let u = ScalarField::sample(Grid::centered(0.5, 65), Region::All, |x| x.x).unwrap();
    let nu = from_bv(&u, None).unwrap();
    let bar = nu.barycenter();
    let area: f64 = nu.cells.iter().map(|c| c.area).sum();
    assert!((bar.total() - Vec2::new(area, 0.0)).norm() < 1e-9);
    assert!(nu.lambda.is_empty());
}

#[test]
fn from_bv_jump_mass() {
    for gap in [1.0, 2.0] {
        let (u, js) = disk_indicator(gap);
        let nu = from_bv(&u, Some(&js)).unwrap();
        let exact = 2.0 * PI * gap;
        assert!((nu.lambda.total_mass() / exact - 1.0).abs() < 0.005);
        for (p, ang) in nu.lambda.particles.iter().zip(&nu.angular) {
            let n = p.pos.normalized().unwrap();
            assert!(ang[0].z.dot(n).abs() > 0.999);
        }
    }
}

#[test]
fn canonical_profiles() {
    let amp = (0..32).map(|k| canonical_value(CanonicalKind::Oscillation, 6, (2 * k + 1) as f64 / 64.0)).fold(0.0, f64::max);
    assert!((amp - 2f64.powi(-6)).abs() < 1e-12);

    let tent = |r: f64| canonical_value(CanonicalKind::Concentration, 8, r);
    assert_eq!(tent(1.0 + 1.0 / 8.0), 1.0);
    assert_eq!(tent(1.0 - 1.0 / 8.0), 1.0);
    assert_eq!(tent(0.5), 0.0);
    assert_eq!(tent(1.2), 0.0);

    let rings: Vec<f64> = (0..8)
        .map(|k| canonical_value(CanonicalKind::Diffuse, 8, k as f64 / 8.0 + 1.0 / 128.0))
        .collect();
    assert!(rings.iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-12));
    assert_eq!(canonical_value(CanonicalKind::Diffuse, 8, 0.1), 0.0);
    assert!(canonical_field(CanonicalKind::Diffuse, 1, 64).is_err());
}

#[test]
fn add_concatenates_concentrations() {
    let a = limit(CanonicalKind::Concentration);
    let ghost = YoungMeasure::zero(&[]).with_lambda(
        ParticleMeasure::from_pairs([(Vec2::new(0.2, 0.0), 0.5)]).unwrap(),
        vec![symmetric_atoms(Vec2::E2)],
    );
    let s = a.add(&ghost).unwrap();
    assert_eq!(s.lambda.len(), a.lambda.len() + 1);
    let f = Integrand::norm();
    let split = a.pairing(&f).unwrap() + ghost.pairing(&f).unwrap();
    assert!((s.pairing(&f).unwrap() - split).abs() < 1e-12);
    let id = a.add(&YoungMeasure::zero(&[])).unwrap();
    assert_eq!(id, a);
}

#[test]
fn membership_reports() {
    let u = ScalarField::sample(Grid::centered(1.0, 129), Region::Disk { center: Vec2::ZERO, radius: 0.9 }, |x| {
        (1.3 * x.x).sin() + x.y * x.y
    })
    .unwrap();
    let nu = from_bv(&u, None).unwrap();
    let du = du_measure(&u, None).unwrap();
    assert!(gy_membership_report(&nu, &du, &u.region, 0.02, 1e-9).all_ok());

    let on_boundary = nu.clone().with_lambda(
        ParticleMeasure::from_pairs([(Vec2::new(0.9, 0.0), 1.0)]).unwrap(),
        vec![symmetric_atoms(Vec2::E1)],
    );
    let r = gy_membership_report(&on_boundary, &du, &u.region, 0.02, 1e-9);
    assert!(!r.boundary_ok);
}
