//! Scene files for `gwv minvu`: either a registered scene by name, or a custom candidate family
//! whose inputs are referenced by path relative to the scene file.

use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Deserialize;

use gwv_core::field::Region;
use gwv_core::io::{self, Curves, Measure};
use gwv_core::measure::VectorParticleMeasure;
use gwv_core::registry::{PointSet, Provenance, Row};
use gwv_core::relax::{minvu_gap, Candidate};
use gwv_core::Vec2;

use crate::{config, core, read, value_row, Check};

#[derive(Deserialize)]
#[serde(untagged)]
pub enum SceneFile {
    Registered { scene: String, p: Option<f64> },
    Custom(Custom),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Custom {
    p: Option<f64>,
    /// `F̄` estimate; defaults to `G(Φ)` of `family`.
    f_bar: Option<f64>,
    family: Option<PathBuf>,
    /// `Du` as a vector measure file.
    du: Option<PathBuf>,
    domain: Option<Region>,
    #[serde(default)]
    band: f64,
    /// Relative slack of the inequality.
    #[serde(default = "default_tol")]
    tol: f64,
    candidates: Vec<CandidateFile>,
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateFile {
    name: String,
    varifold: PathBuf,
    young: Option<PathBuf>,
    #[serde(default)]
    probes: Vec<[f64; 2]>,
}

pub fn load(path: &Path) -> Result<SceneFile> {
    serde_json::from_str(&read(path)?).map_err(|e| config(format!("malformed scene file {}: {e}", path.display())))
}

pub fn run(path: &Path, c: &Custom, p: Option<f64>, emit: bool) -> Result<(Vec<Row>, Vec<PointSet>)> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let p = p.or(c.p).ok_or_else(|| config("scene file needs p (or pass --p)"))?;
    crate::check_p(p)?;
    let f_bar = match (c.f_bar, &c.family) {
        (Some(f), _) => f,
        (None, Some(fam)) => match core(io::read_curves(&read(&dir.join(fam))?))? {
            Curves::System(s) => core(s.willmore_energy(p))?,
            Curves::Family(phi) => core(phi.level_energy(p))?,
        },
        (None, None) => return Err(config("scene file needs f_bar or family")),
    };
    let du = match &c.du {
        Some(d) => match core(io::read_measure(&read(&dir.join(d))?))? {
            Measure::Vector(m) => m,
            Measure::Scalar(_) => return Err(config("du must be a vector measure")),
        },
        None => VectorParticleMeasure::empty(),
    };
    let mut cands = Vec::with_capacity(c.candidates.len());
    for cf in &c.candidates {
        let varifold = core(io::read_varifold(&read(&dir.join(&cf.varifold))?))?;
        let nu = match &cf.young {
            Some(y) => Some(core(io::read_young(&read(&dir.join(y))?))?),
            None => None,
        };
        cands.push(Candidate {
            name: cf.name.clone(),
            varifold,
            nu,
            probes: cf.probes.iter().map(|&q| Vec2::from(q)).collect(),
        });
    }
    let domain = c.domain.unwrap_or(Region::All);
    let rep = core(minvu_gap(f_bar, &du, &domain, c.band, &cands, p, c.tol * f_bar.abs()))?;
    let unchecked = Check { expect: None, rtol: 0.0 };
    let du_mass = du.total_variation();
    let mut rows = vec![value_row("F_bar estimate", f_bar, &unchecked, Provenance::Derived)];
    for cr in &rep.candidates {
        rows.push(value_row(&format!("W({})", cr.name), cr.w, &unchecked, Provenance::Derived));
        rows.push(Row::verdict(format!("mass inequality {}", cr.name), cr.mass >= du_mass - 1e-6, Provenance::Paper));
        if let Some(m) = &cr.membership {
            rows.push(Row::verdict(format!("membership {}", cr.name), m.all_ok(), Provenance::Derived));
        }
        rows.push(value_row(&format!("singular-free {}", cr.name), if cr.singular_ok { 1.0 } else { 0.0 }, &unchecked, Provenance::Derived));
    }
    rows.push(Row::verdict("minVu F_bar >= min W", rep.inequality_ok, Provenance::Paper));
    rows.push(value_row("minVu gap", rep.gap, &unchecked, Provenance::Derived));
    let points = if emit {
        cands
            .iter()
            .map(|c| PointSet {
                label: c.name.clone(),
                points: c.varifold.particles.iter().map(|q| [q.x.x, q.x.y, q.w]).collect(),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok((rows, points))
}
