use gwv_core::curves::{ClosedCurve, CurveSystem, LevelFamily};
use gwv_core::field::{Grid, Region, ScalarField};
use gwv_core::io::{self, Curves, Measure};
use gwv_core::measure::{ParticleMeasure, VectorParticleMeasure};
use gwv_core::radial::{canonical_limit_young, CanonicalKind, PolarOpts};
use gwv_core::varifold::Varifold;
use gwv_core::Vec2;

#[test]
fn measures_round_trip() {
    let s = Measure::Scalar(ParticleMeasure::from_pairs([(Vec2::new(0.1, 1.0 / 3.0), 0.7)]).unwrap());
    assert_eq!(io::read_measure(&io::write_measure(&s).unwrap()).unwrap(), s);
    let v = Measure::Vector(VectorParticleMeasure::from_pairs([(Vec2::E1, Vec2::new(-0.2, 1e-17))]).unwrap());
    assert_eq!(io::read_measure(&io::write_measure(&v).unwrap()).unwrap(), v);
    assert!(io::read_measure(r#"{"kind":"scalar","particles":[[0,0]]}"#).is_err());
}

#[test]
fn curves_round_trip() {
    let c = ClosedCurve::circle(Vec2::new(0.3, 0.0), 0.7, 64, 2).unwrap();
    let sys = CurveSystem::new(vec![c]);
    let back = io::read_curves(&io::write_curve_system(&sys).unwrap()).unwrap();
    assert_eq!(back, Curves::System(sys.clone()));
    let phi = LevelFamily::constant(vec![0.0, 0.5], sys).unwrap();
    let back = io::read_curves(&io::write_level_family(&phi).unwrap()).unwrap();
    assert_eq!(back, Curves::Family(phi));
}

#[test]
fn young_and_varifold_round_trip() {
    let opts = PolarOpts { circle_samples: 64, n_theta: 8, max_dr: 0.1, ..PolarOpts::default() };
    let nu = canonical_limit_young(CanonicalKind::Concentration, &opts);
    assert_eq!(io::read_young(&io::write_young(&nu).unwrap()).unwrap(), nu);

    let c = ClosedCurve::circle(Vec2::ZERO, 1.0, 32, 1).unwrap();
    let v = Varifold::from_curve_system(&CurveSystem::new(vec![c]));
    let text = io::write_varifold(&v).unwrap();
    assert_eq!(io::write_varifold(&io::read_varifold(&text).unwrap()).unwrap(), text);
}

#[test]
fn field_round_trip_and_shape_check() {
    let u = ScalarField::sample(Grid::centered(1.0, 9), Region::Disk { center: Vec2::ZERO, radius: 0.8 }, |x| x.x * x.y)
        .unwrap();
    let back = io::read_field(&io::write_field(&u).unwrap()).unwrap();
    assert_eq!(back.values, u.values);
    assert_eq!(back.region, u.region);
    let bad = r#"{"grid":{"nx":2,"ny":2,"origin":[0,0],"h":1},"values":[1,2,3]}"#;
    assert!(io::read_field(bad).is_err());
}

#[test]
fn numbers_carry_seventeen_digits() {
    assert_eq!(io::fmt_f64(0.1), "1.0000000000000001e-1");
    assert_eq!(io::fmt_f64(f64::INFINITY), "inf");
}
