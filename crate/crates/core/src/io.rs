//! JSON file formats for measures, curve systems, level families, Young measures, varifolds and
//! sampled fields. Floats are written with 17 significant digits.

use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::curves::{ClosedCurve, CurveSystem, LevelFamily};
use crate::error::{GwvError, Result};
use crate::field::{Grid, Region, ScalarField};
use crate::geom::Vec2;
use crate::measure::{Particle, ParticleMeasure, VParticle, VectorParticleMeasure};
use crate::varifold::{LineParticle, Varifold};
use crate::young::{Atom, Cell, Layout, YoungMeasure};

/// Formats every `f64` as `{:.16e}`, so values round-trip and output is byte-stable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(w, "{}", fmt_f64(value))
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Serializes `value` as compact JSON with [`Digits17`] numbers.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value
        .serialize(&mut ser)
        .map_err(|e| GwvError::Invalid(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| GwvError::Invalid(e.to_string()))
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| GwvError::Invalid(format!("malformed JSON: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MeasureKind {
    Scalar,
    Vector,
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    kind: MeasureKind,
    particles: Vec<Vec<f64>>,
}

/// A measure read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Scalar(ParticleMeasure),
    Vector(VectorParticleMeasure),
}

fn row<const N: usize>(r: &[f64], what: &str) -> Result<[f64; N]> {
    r.try_into()
        .map_err(|_| GwvError::Invalid(format!("{what} rows need {N} numbers, got {}", r.len())))
}

pub fn read_measure(text: &str) -> Result<Measure> {
    let f: MeasureFile = parse(text)?;
    match f.kind {
        MeasureKind::Scalar => {
            let ps = f
                .particles
                .iter()
                .map(|r| row::<3>(r, "scalar particle").map(|[x, y, w]| Particle { pos: Vec2::new(x, y), w }))
                .collect::<Result<Vec<_>>>()?;
            Ok(Measure::Scalar(ParticleMeasure::new(ps)?))
        }
        MeasureKind::Vector => {
            let ps = f
                .particles
                .iter()
                .map(|r| {
                    row::<4>(r, "vector particle").map(|[x, y, wx, wy]| VParticle {
                        pos: Vec2::new(x, y),
                        w: Vec2::new(wx, wy),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Measure::Vector(VectorParticleMeasure::new(ps)?))
        }
    }
}

pub fn write_measure(m: &Measure) -> Result<String> {
    let f = match m {
        Measure::Scalar(m) => MeasureFile {
            kind: MeasureKind::Scalar,
            particles: m.particles.iter().map(|p| vec![p.pos.x, p.pos.y, p.w]).collect(),
        },
        Measure::Vector(m) => MeasureFile {
            kind: MeasureKind::Vector,
            particles: m.particles.iter().map(|p| vec![p.pos.x, p.pos.y, p.w.x, p.w.y]).collect(),
        },
    };
    to_json(&f)
}

#[derive(Serialize, Deserialize)]
struct CurveFile {
    multiplicity: u32,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    curves: Vec<CurveFile>,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    levels: Vec<f64>,
    systems: Vec<SystemFile>,
}

/// Contents of a curve file: one system, or a level family.
#[derive(Debug, Clone, PartialEq)]
pub enum Curves {
    System(CurveSystem),
    Family(LevelFamily),
}

fn system_from(f: SystemFile) -> Result<CurveSystem> {
    let curves = f
        .curves
        .into_iter()
        .map(|c| ClosedCurve::new(c.points.into_iter().map(Vec2::from).collect(), c.multiplicity))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSystem::new(curves))
}

fn system_to(s: &CurveSystem) -> SystemFile {
    SystemFile {
        curves: s
            .curves
            .iter()
            .map(|c| CurveFile {
                multiplicity: c.multiplicity,
                points: c.samples().iter().map(|&p| p.into()).collect(),
            })
            .collect(),
    }
}

pub fn read_curves(text: &str) -> Result<Curves> {
    let v: serde_json::Value = parse(text)?;
    if v.get("levels").is_some() {
        let f: FamilyFile = serde_json::from_value(v).map_err(|e| GwvError::Invalid(format!("malformed level family: {e}")))?;
        let systems = f.systems.into_iter().map(system_from).collect::<Result<Vec<_>>>()?;
        Ok(Curves::Family(LevelFamily::new(f.levels, systems)?))
    } else {
        let f: SystemFile =
            serde_json::from_value(v).map_err(|e| GwvError::Invalid(format!("malformed curve system: {e}")))?;
        Ok(Curves::System(system_from(f)?))
    }
}

pub fn write_curve_system(s: &CurveSystem) -> Result<String> {
    to_json(&system_to(s))
}

pub fn write_level_family(phi: &LevelFamily) -> Result<String> {
    to_json(&FamilyFile {
        levels: phi.levels.clone(),
        systems: phi.systems.iter().map(system_to).collect(),
    })
}

/// `grid` object of a Young-measure file: the layout plus `[x, y, area]` per cell.
#[derive(Serialize, Deserialize)]
struct YoungGrid {
    #[serde(flatten)]
    layout: LayoutFile,
    cells: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LayoutFile {
    Cartesian { nx: usize, ny: usize, origin: [f64; 2], h: f64 },
    Free,
}

#[derive(Serialize, Deserialize)]
struct YoungFile {
    grid: YoungGrid,
    cells: Vec<Vec<[f64; 3]>>,
    lambda: Vec<[f64; 3]>,
    angular: Vec<Vec<[f64; 3]>>,
}

fn atoms_from(list: &[[f64; 3]]) -> Vec<Atom> {
    list.iter().map(|&[zx, zy, p]| Atom::new(Vec2::new(zx, zy), p)).collect()
}

fn atoms_to(list: &[Atom]) -> Vec<[f64; 3]> {
    list.iter().map(|a| [a.z.x, a.z.y, a.p]).collect()
}

pub fn read_young(text: &str) -> Result<YoungMeasure> {
    let f: YoungFile = parse(text)?;
    if f.grid.cells.len() != f.cells.len() {
        return Err(GwvError::Invalid(format!(
            "grid lists {} cells but {} atom lists were given",
            f.grid.cells.len(),
            f.cells.len()
        )));
    }
    let layout = match f.grid.layout {
        LayoutFile::Cartesian { nx, ny, origin, h } => Layout::Cartesian {
            nx,
            ny,
            origin: origin.into(),
            h,
        },
        LayoutFile::Free => Layout::Free,
    };
    let cells = f
        .grid
        .cells
        .iter()
        .zip(&f.cells)
        .map(|(&[x, y, area], atoms)| Cell {
            center: Vec2::new(x, y),
            area,
            atoms: atoms_from(atoms),
        })
        .collect();
    let lambda = ParticleMeasure::new(
        f.lambda
            .iter()
            .map(|&[x, y, w]| Particle { pos: Vec2::new(x, y), w })
            .collect(),
    )?;
    YoungMeasure::new(layout, cells, lambda, f.angular.iter().map(|a| atoms_from(a)).collect())
}

pub fn write_young(nu: &YoungMeasure) -> Result<String> {
    let layout = match &nu.layout {
        Layout::Cartesian { nx, ny, origin, h } => LayoutFile::Cartesian {
            nx: *nx,
            ny: *ny,
            origin: (*origin).into(),
            h: *h,
        },
        Layout::Free => LayoutFile::Free,
    };
    to_json(&YoungFile {
        grid: YoungGrid {
            layout,
            cells: nu.cells.iter().map(|c| [c.center.x, c.center.y, c.area]).collect(),
        },
        cells: nu.cells.iter().map(|c| atoms_to(&c.atoms)).collect(),
        lambda: nu.lambda.particles.iter().map(|p| [p.pos.x, p.pos.y, p.w]).collect(),
        angular: nu.angular.iter().map(|a| atoms_to(a)).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct VarifoldFile {
    particles: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    curvature: Option<Vec<[f64; 2]>>,
}

pub fn read_varifold(text: &str) -> Result<Varifold> {
    let f: VarifoldFile = parse(text)?;
    let v = Varifold::new(
        f.particles
            .iter()
            .map(|&[x, y, theta, w]| LineParticle {
                x: Vec2::new(x, y),
                theta,
                w,
            })
            .collect(),
    )?;
    match f.curvature {
        Some(h) => v.with_curvature(h.into_iter().map(Vec2::from).collect()),
        None => Ok(v),
    }
}

pub fn write_varifold(v: &Varifold) -> Result<String> {
    to_json(&VarifoldFile {
        particles: v.particles.iter().map(|p| [p.x.x, p.x.y, p.theta, p.w]).collect(),
        curvature: v.curvature.as_ref().map(|h| h.iter().map(|&k| k.into()).collect()),
    })
}

/// Sampled field: `{"grid":{"nx","ny","origin":[x,y],"h"},"region":{"kind":...},"values":[...]}`
/// with values in row-major order (`j · nx + i`).
#[derive(Serialize, Deserialize)]
struct FieldFile {
    grid: GridFile,
    #[serde(default = "all_region")]
    region: Region,
    values: Vec<f64>,
}

fn all_region() -> Region {
    Region::All
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    h: f64,
}

pub fn read_field(text: &str) -> Result<ScalarField> {
    let f: FieldFile = parse(text)?;
    let grid = Grid {
        nx: f.grid.nx,
        ny: f.grid.ny,
        origin: f.grid.origin.into(),
        h: f.grid.h,
    };
    ScalarField::new(grid, f.values, f.region)
}

pub fn write_field(u: &ScalarField) -> Result<String> {
    to_json(&FieldFile {
        grid: GridFile {
            nx: u.grid.nx,
            ny: u.grid.ny,
            origin: u.grid.origin.into(),
            h: u.grid.h,
        },
        region: u.region,
        values: u.values.clone(),
    })
}
