//! Python module `gwv`: measures, curve systems, Young measures, varifolds and the scene registry.
//! Structured results (scene reports, listings, identification summaries) come back as plain
//! dicts and lists.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use gwv_core::curves::{ClosedCurve, CurveSystem as CoreSystem, LevelFamily as CoreFamily};
use gwv_core::identify::identify_canonical;
use gwv_core::io::{self, Curves, Measure};
use gwv_core::measure::{Integrand, Particle, ParticleMeasure as CoreMeasure};
use gwv_core::radial::{canonical_limit_young, CanonicalKind, PolarOpts};
use gwv_core::registry::{self, SceneConfig, JUNCTION_RADII};
use gwv_core::varifold::{estimate_curvature, singular_ratio, CurvatureOpts, Varifold as CoreVarifold};
use gwv_core::young::YoungMeasure as CoreYoung;
use gwv_core::{GwvError, Vec2};

fn err(e: GwvError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = io::to_json(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn point(p: (f64, f64)) -> Vec2 {
    Vec2::new(p.0, p.1)
}

/// Positive measure carried by weighted points.
#[pyclass(module = "gwv", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct ParticleMeasure {
    inner: CoreMeasure,
}

#[pymethods]
impl ParticleMeasure {
    #[new]
    fn new(points: Vec<(f64, f64)>, weights: Vec<f64>) -> PyResult<Self> {
        if points.len() != weights.len() {
            return Err(PyValueError::new_err("points and weights differ in length"));
        }
        let ps = points.into_iter().zip(weights).map(|(p, w)| Particle { pos: point(p), w }).collect();
        Ok(Self { inner: CoreMeasure::new(ps).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match io::read_measure(text).map_err(err)? {
            Measure::Scalar(inner) => Ok(Self { inner }),
            Measure::Vector(_) => Err(PyValueError::new_err("expected a scalar measure")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        io::write_measure(&Measure::Scalar(self.inner.clone())).map_err(err)
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn mass_in_ball(&self, center: (f64, f64), r: f64) -> f64 {
        self.inner.mass_in_ball(point(center), r)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Finite union of closed curves with integer multiplicities.
#[pyclass(module = "gwv", frozen, from_py_object)]
#[derive(Clone)]
pub struct CurveSystem {
    inner: CoreSystem,
}

#[pymethods]
impl CurveSystem {
    /// Closed polylines sampled at uniform arclength, one multiplicity per curve.
    #[new]
    #[pyo3(signature = (curves, multiplicities = None))]
    fn new(curves: Vec<Vec<(f64, f64)>>, multiplicities: Option<Vec<u32>>) -> PyResult<Self> {
        let m = multiplicities.unwrap_or_else(|| vec![1; curves.len()]);
        if m.len() != curves.len() {
            return Err(PyValueError::new_err("one multiplicity per curve"));
        }
        let cs = curves
            .into_iter()
            .zip(m)
            .map(|(c, m)| ClosedCurve::new(c.into_iter().map(point).collect(), m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(Self { inner: CoreSystem::new(cs) })
    }

    #[staticmethod]
    #[pyo3(signature = (center, radius, n = 1024, multiplicity = 1))]
    fn circle(center: (f64, f64), radius: f64, n: usize, multiplicity: u32) -> PyResult<Self> {
        let c = ClosedCurve::circle(point(center), radius, n, multiplicity).map_err(err)?;
        Ok(Self { inner: CoreSystem::new(vec![c]) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match io::read_curves(text).map_err(err)? {
            Curves::System(inner) => Ok(Self { inner }),
            Curves::Family(_) => Err(PyValueError::new_err("file holds a level family")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        io::write_curve_system(&self.inner).map_err(err)
    }

    fn length(&self) -> f64 {
        self.inner.length()
    }

    fn willmore_energy(&self, p: f64) -> PyResult<f64> {
        self.inner.willmore_energy(p).map_err(err)
    }

    fn interior_indicator(&self, x: (f64, f64)) -> PyResult<u8> {
        self.inner.interior_indicator(point(x)).map_err(err)
    }

    /// Samples of each curve as `(x, y)` lists.
    fn curves(&self) -> Vec<Vec<(f64, f64)>> {
        self.inner
            .curves
            .iter()
            .map(|c| c.samples().iter().map(|p| (p.x, p.y)).collect())
            .collect()
    }
}

/// Curve systems indexed by increasing levels.
#[pyclass(module = "gwv", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct LevelFamily {
    inner: CoreFamily,
}

#[pymethods]
impl LevelFamily {
    #[new]
    fn new(levels: Vec<f64>, systems: Vec<CurveSystem>) -> PyResult<Self> {
        let systems = systems.into_iter().map(|s| s.inner).collect();
        Ok(Self { inner: CoreFamily::new(levels, systems).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match io::read_curves(text).map_err(err)? {
            Curves::Family(inner) => Ok(Self { inner }),
            Curves::System(_) => Err(PyValueError::new_err("file holds a single curve system")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        io::write_level_family(&self.inner).map_err(err)
    }

    fn levels(&self) -> Vec<f64> {
        self.inner.levels.clone()
    }

    fn level_energy(&self, p: f64) -> PyResult<f64> {
        self.inner.level_energy(p).map_err(err)
    }

    /// Nestedness conditions checked on the given probe points.
    fn nestedness<'py>(&self, py: Python<'py>, probes: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyAny>> {
        let probes: Vec<Vec2> = probes.into_iter().map(point).collect();
        let rep = py.detach(|| self.inner.nestedness_check(&probes));
        to_py(py, &rep)
    }
}

/// Generalized Young measure: per-cell atoms, concentration measure and angular atoms.
#[pyclass(module = "gwv", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct YoungMeasure {
    inner: CoreYoung,
}

#[pymethods]
impl YoungMeasure {
    /// Closed-form limit of `osc`, `conc` or `diffuse`.
    #[staticmethod]
    fn canonical_limit(py: Python<'_>, kind: &str) -> PyResult<Self> {
        let kind = CanonicalKind::parse(kind).map_err(err)?;
        let inner = py.detach(|| canonical_limit_young(kind, &PolarOpts::default()));
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::read_young(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        io::write_young(&self.inner).map_err(err)
    }

    /// `⟨⟨ν, f⟩⟩` for `f` given as `norm`, `area` or `power:P`.
    fn pairing(&self, py: Python<'_>, f: &str) -> PyResult<f64> {
        let f = Integrand::parse(f).map_err(err)?;
        py.detach(|| self.inner.pairing(&f)).map_err(err)
    }

    /// Total of the barycenter measure as `(x, y)`.
    fn barycenter_total(&self) -> (f64, f64) {
        let t = self.inner.barycenter().total();
        (t.x, t.y)
    }

    fn lambda_mass(&self) -> f64 {
        self.inner.lambda.total_mass()
    }

    fn first_moment(&self) -> f64 {
        self.inner.first_moment()
    }

    fn add(&self, other: &YoungMeasure) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(err)? })
    }
}

/// Particle varifold: weighted points carrying a line direction, optionally with curvature.
#[pyclass(module = "gwv", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Varifold {
    inner: CoreVarifold,
}

#[pymethods]
impl Varifold {
    #[staticmethod]
    fn from_curve_system(system: &CurveSystem) -> Self {
        Self { inner: CoreVarifold::from_curve_system(&system.inner) }
    }

    #[staticmethod]
    fn from_level_family(family: &LevelFamily) -> Self {
        Self { inner: CoreVarifold::from_level_family(&family.inner) }
    }

    #[staticmethod]
    fn from_young(nu: &YoungMeasure) -> Self {
        Self { inner: CoreVarifold::from_young(&nu.inner) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::read_varifold(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        io::write_varifold(&self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn has_curvature(&self) -> bool {
        self.inner.curvature.is_some()
    }

    fn willmore(&self, p: f64) -> PyResult<f64> {
        self.inner.willmore(p, None).map_err(err)
    }

    /// Curvature recovered from the first variation; returns the varifold carrying it and the
    /// first-variation residual.
    #[pyo3(signature = (reg = None))]
    fn estimate_curvature(&self, py: Python<'_>, reg: Option<f64>) -> PyResult<(Varifold, f64)> {
        let mut opts = CurvatureOpts::default();
        if let Some(r) = reg {
            opts.reg = r;
        }
        let est = py.detach(|| estimate_curvature(&self.inner, &opts)).map_err(err)?;
        let inner = self.inner.clone().with_curvature(est.h).map_err(err)?;
        Ok((Varifold { inner }, est.residual))
    }

    /// `‖δV‖(B_r)/μ_V(B_r)` over decreasing radii.
    #[pyo3(signature = (center, radii = None))]
    fn singular_ratio(&self, py: Python<'_>, center: (f64, f64), radii: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
        let radii = radii.unwrap_or_else(|| JUNCTION_RADII.to_vec());
        py.detach(|| singular_ratio(&self.inner, point(center), &radii)).map_err(err)
    }
}

/// Registered scenes with defaults and expected quantities.
#[pyfunction]
fn list_scenes(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &registry::list_scenes().map_err(err)?)
}

/// Runs a registered scene; returns `{"scene", "p", "rows", "all_pass"}`.
#[pyfunction]
#[pyo3(signature = (name, p = None, grid = None, levels = None, samples = None, tolerances = None))]
fn run_scene<'py>(
    py: Python<'py>,
    name: &str,
    p: Option<f64>,
    grid: Option<usize>,
    levels: Option<usize>,
    samples: Option<usize>,
    tolerances: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SceneConfig {
        p,
        grid,
        levels,
        samples,
        tolerances: tolerances.unwrap_or_default(),
        emit_points: false,
    };
    let rep = py.detach(|| registry::run_scene(name, &cfg)).map_err(err)?;
    #[derive(Serialize)]
    struct Out<'a> {
        scene: &'a str,
        p: f64,
        rows: &'a [registry::Row],
        all_pass: bool,
    }
    to_py(
        py,
        &Out {
            scene: &rep.scene,
            p: rep.p,
            rows: &rep.rows,
            all_pass: rep.all_pass(),
        },
    )
}

/// Identifies the limit of a canonical sequence; returns the estimate and a summary dict.
#[pyfunction]
fn identify<'py>(py: Python<'py>, kind: &str, h_max: usize) -> PyResult<(YoungMeasure, Bound<'py, PyAny>)> {
    let kind = CanonicalKind::parse(kind).map_err(err)?;
    let rep = py.detach(|| identify_canonical(kind, h_max)).map_err(err)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        du_mass: f64,
        lambda_mass: f64,
        columns: &'a [String],
        nonconverging: &'a [bool],
    }
    let summary = to_py(
        py,
        &Summary {
            du_mass: rep.du_mass,
            lambda_mass: rep.lambda_mass,
            columns: &rep.columns,
            nonconverging: &rep.nonconverging,
        },
    )?;
    Ok((YoungMeasure { inner: rep.estimate }, summary))
}

#[pymodule]
fn gwv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ParticleMeasure>()?;
    m.add_class::<CurveSystem>()?;
    m.add_class::<LevelFamily>()?;
    m.add_class::<YoungMeasure>()?;
    m.add_class::<Varifold>()?;
    m.add_function(wrap_pyfunction!(list_scenes, m)?)?;
    m.add_function(wrap_pyfunction!(run_scene, m)?)?;
    m.add_function(wrap_pyfunction!(identify, m)?)?;
    Ok(())
}
