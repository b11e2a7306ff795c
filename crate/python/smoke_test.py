"""Smoke test for the gwv Python module. Run with pytest after `maturin develop -m crates/py/Cargo.toml`."""

import math

import pytest

import gwv


def test_circle_energy_and_indicator():
    c = gwv.CurveSystem.circle((0.0, 0.0), 1.0, n=1024)
    assert c.willmore_energy(2.0) == pytest.approx(4 * math.pi, rel=5e-3)
    assert c.interior_indicator((0.0, 0.0)) == 1
    doubled = gwv.CurveSystem.circle((0.0, 0.0), 1.0, n=256, multiplicity=2)
    assert doubled.interior_indicator((0.0, 0.0)) == 0
    with pytest.raises(ValueError):
        c.willmore_energy(1.0)


def test_measure_round_trip():
    m = gwv.ParticleMeasure([(0.0, 0.0), (1.0, 0.0)], [0.25, 0.5])
    assert m.total_mass() == 0.75
    back = gwv.ParticleMeasure.from_json(m.to_json())
    assert back.total_mass() == 0.75 and len(back) == 2


def test_concentration_limit():
    nu = gwv.YoungMeasure.canonical_limit("conc")
    assert nu.pairing("norm") == pytest.approx(8 * math.pi, rel=5e-3)
    assert abs(nu.barycenter_total()[0]) < 1e-9
    v = gwv.Varifold.from_young(nu)
    assert v.mass() == pytest.approx(8 * math.pi, rel=5e-3)


def test_varifold_curvature_and_energy():
    c = gwv.CurveSystem.circle((0.0, 0.0), 1.0, n=628)
    v = gwv.Varifold.from_curve_system(c)
    assert v.willmore(2.0) == pytest.approx(4 * math.pi, rel=5e-3)
    bare = gwv.Varifold.from_json(gwv.Varifold.from_curve_system(c).to_json())
    est, residual = bare.estimate_curvature()
    assert est.has_curvature() and residual >= 0.0
    assert max(bare.singular_ratio((1.0, 0.0))) < 2.0


def test_level_family():
    c = gwv.CurveSystem.circle((0.0, 0.0), 1.0, n=512)
    phi = gwv.LevelFamily([0.0, 0.5, 1.0], [c, c, c])
    assert phi.level_energy(2.0) == pytest.approx(4 * math.pi, rel=5e-3)
    assert gwv.LevelFamily.from_json(phi.to_json()).levels() == [0.0, 0.5, 1.0]


def test_registry():
    names = [s["name"] for s in gwv.list_scenes()]
    assert {"osc", "conc", "concdiff", "cusp", "cross", "triple", "trisegment"} <= set(names)
    rep = gwv.run_scene("conc", p=1.5)
    assert rep["all_pass"]
    assert {"quantity", "value", "expected", "provenance", "tolerance", "pass"} <= set(rep["rows"][0])
    with pytest.raises(ValueError):
        gwv.run_scene("no-such-scene")
