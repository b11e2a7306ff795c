//! The generalized Willmore functional `F(u)` on grid fields, level-set extraction and the
//! coarea identity, Young measures of level families and the `min W ≤ F̄` harness.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curves::{equal_chord_walk, polyline_point, ClosedCurve, CurveSystem, LevelFamily};
use crate::error::{GwvError, Result};
use crate::field::{JumpSet, Region, ScalarField};
use crate::geom::Vec2;
use crate::measure::{Particle, ParticleMeasure, VectorParticleMeasure};
use crate::spatial::ExactIndex;
use crate::sum::{fsum, par_fsum, par_map};
use crate::varifold::{growth_factors, singular_ratio, Source, Varifold};
use crate::young::{from_bv, gy_membership_report, symmetric_atoms, Atom, MembershipReport, YoungMeasure};

/// Per-node `(∇u, κ)` with `κ = div(∇u/|∇u|)`; `None` where a stencil leaves the grid.
fn node_curvature(u: &ScalarField) -> Vec<Option<(Vec2, f64)>> {
    let g = u.grid;
    let floor = u.gradient_floor;
    let normals: Vec<Option<Vec2>> = (0..g.len())
        .map(|k| {
            u.central_gradient(k % g.nx, k / g.nx).map(|d| {
                let n = d.norm();
                if n < floor || n == 0.0 {
                    Vec2::ZERO
                } else {
                    d / n
                }
            })
        })
        .collect();
    let idx: Vec<usize> = (0..g.len()).collect();
    par_map(&idx, |&k| {
        let (i, j) = (k % g.nx, k / g.nx);
        let d = u.central_gradient(i, j)?;
        if i < 2 || j < 2 || i + 2 >= g.nx || j + 2 >= g.ny {
            return None;
        }
        let e = normals[g.index(i + 1, j)]?;
        let w = normals[g.index(i - 1, j)]?;
        let nn = normals[g.index(i, j + 1)]?;
        let s = normals[g.index(i, j - 1)]?;
        let kappa = (e.x - w.x + nn.y - s.y) / (2.0 * g.h);
        Some((d, kappa))
    })
}

/// `F(u, Ω) = ∫_Ω |∇u| (1 + |div(∇u/|∇u|)|^p) dx`, zero where `|∇u|` is below the floor.
pub fn f_energy(u: &ScalarField, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(GwvError::BadExponent);
    }
    let area = u.cell_area();
    let nodes = u.domain_nodes();
    let data = node_curvature(u);
    let terms: Vec<f64> = par_map(&nodes, |&(i, j)| match data[u.grid.index(i, j)] {
        Some((d, kappa)) => {
            let n = d.norm();
            if n < u.gradient_floor || n == 0.0 {
                0.0
            } else {
                n * (1.0 + kappa.abs().powf(p)) * area
            }
        }
        None => 0.0,
    });
    Ok(fsum(terms))
}

/// Edge of the grid carrying a contour vertex: `(i, j, 0)` joins `(i,j)–(i+1,j)`, `(i, j, 1)`
/// joins `(i,j)–(i,j+1)`.
type EdgeKey = (usize, usize, u8);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOpts {
    /// Target sample spacing in grid spacings.
    pub spacing: f64,
    pub min_samples: usize,
    /// Newton steps projecting onto the level set of the cubic interpolant.
    pub newton_steps: usize,
}

impl Default for ExtractOpts {
    fn default() -> Self {
        Self {
            spacing: 0.5,
            min_samples: 64,
            newton_steps: 3,
        }
    }
}

/// Closed contour polylines `{u = t}` by marching squares; saddles are resolved by the cell
/// average. A contour reaching the edge of the grid is an error.
pub fn contour_polylines(u: &ScalarField, t: f64) -> Result<Vec<Vec<Vec2>>> {
    let g = u.grid;
    let above = |i: usize, j: usize| u.at(i, j) > t;
    let vertex = |e: EdgeKey| -> Vec2 {
        let (i, j, axis) = e;
        let (i1, j1) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (u.at(i, j), u.at(i1, j1));
        let f = ((t - a) / (b - a)).clamp(0.0, 1.0);
        let p0 = g.node(i, j);
        p0 + (g.node(i1, j1) - p0) * f
    };
    let mut adj: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    let mut link = |a: EdgeKey, b: EdgeKey| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for j in 0..g.ny.saturating_sub(1) {
        for i in 0..g.nx.saturating_sub(1) {
            let c = [above(i, j), above(i + 1, j), above(i + 1, j + 1), above(i, j + 1)];
            let code = c[0] as u8 | (c[1] as u8) << 1 | (c[2] as u8) << 2 | (c[3] as u8) << 3;
            if code == 0 || code == 15 {
                continue;
            }
            let bottom = (i, j, 0u8);
            let right = (i + 1, j, 1u8);
            let top = (i, j + 1, 0u8);
            let left = (i, j, 1u8);
            let center_above = 0.25 * (u.at(i, j) + u.at(i + 1, j) + u.at(i + 1, j + 1) + u.at(i, j + 1)) > t;
            match code {
                1 | 14 => link(left, bottom),
                2 | 13 => link(bottom, right),
                3 | 12 => link(left, right),
                4 | 11 => link(right, top),
                6 | 9 => link(bottom, top),
                7 | 8 => link(left, top),
                5 => {
                    if center_above {
                        link(left, top);
                        link(bottom, right);
                    } else {
                        link(left, bottom);
                        link(right, top);
                    }
                }
                10 => {
                    if center_above {
                        link(left, bottom);
                        link(right, top);
                    } else {
                        link(left, top);
                        link(bottom, right);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    if adj.values().any(|v| v.len() != 2) {
        return Err(GwvError::OpenContour(t));
    }
    let mut visited: BTreeMap<EdgeKey, bool> = adj.keys().map(|&k| (k, false)).collect();
    let mut loops = Vec::new();
    let keys: Vec<EdgeKey> = adj.keys().copied().collect();
    for start in keys {
        if visited[&start] {
            continue;
        }
        let mut poly = vec![vertex(start)];
        visited.insert(start, true);
        let mut prev = start;
        let mut cur = adj[&start][0];
        while cur != start && !visited[&cur] {
            visited.insert(cur, true);
            poly.push(vertex(cur));
            let nb = &adj[&cur];
            let next = if nb[0] != prev { nb[0] } else { nb[1] };
            prev = cur;
            cur = next;
        }
        loops.push(poly);
    }
    Ok(loops)
}

/// Densifies a marching-squares loop, projects it onto `{ũ = t}` for the cubic interpolant `ũ`
/// and walks equal chords.
fn contour_curve(u: &ScalarField, t: f64, poly: &[Vec2], opts: &ExtractOpts) -> Result<Option<ClosedCurve>> {
    let k = poly.len();
    let seg: Vec<f64> = (0..k).map(|i| poly[i].dist(poly[(i + 1) % k])).collect();
    let len = fsum(seg.iter().copied());
    if k < 3 || !(len > 0.0) {
        return Ok(None);
    }
    let n = ((len / (opts.spacing * u.grid.h)).ceil() as usize).max(opts.min_samples);
    let m = (16 * n).max(4 * k);
    let step = len / m as f64;
    let mut raw = Vec::with_capacity(m);
    let (mut j, mut acc) = (0usize, 0.0);
    for i in 0..m {
        let s = step * i as f64;
        while j + 1 < k && acc + seg[j] < s {
            acc += seg[j];
            j += 1;
        }
        let f = if seg[j] > 0.0 { ((s - acc) / seg[j]).clamp(0.0, 1.0) } else { 0.0 };
        raw.push(poly[j] + (poly[(j + 1) % k] - poly[j]) * f);
    }
    let projected: Option<Vec<Vec2>> = raw.iter().map(|&x| project_level(u, t, x, opts.newton_steps)).collect();
    if let Some(dense) = projected {
        if let Some(c) = equal_chord_curve(&dense, n)? {
            return Ok(Some(c));
        }
    }
    equal_chord_curve(&raw, n)
}

/// Newton projection onto `{ũ = t}`; `None` when a step leaves the cell neighbourhood.
fn project_level(u: &ScalarField, t: f64, x0: Vec2, steps: usize) -> Option<Vec2> {
    let mut x = x0;
    for _ in 0..steps {
        let (v, g) = u.interpolate(x);
        let g2 = g.norm2();
        if !(g2 > 0.0) {
            return None;
        }
        x = x + g * ((t - v) / g2);
        if x.dist(x0) > 0.5 * u.grid.h {
            return None;
        }
    }
    Some(x)
}

fn equal_chord_curve(dense: &[Vec2], n: usize) -> Result<Option<ClosedCurve>> {
    let params = match equal_chord_walk(dense, n) {
        Ok(p) => p,
        Err(GwvError::Degenerate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let samples = params.iter().map(|&s| polyline_point(dense, s)).collect();
    match ClosedCurve::new(samples, 1) {
        Ok(c) => Ok(Some(c)),
        Err(GwvError::Degenerate(_) | GwvError::Invalid(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Level sets `∂{u > t}` as curve systems, resampled to spacing at most `opts.spacing · h`.
pub fn level_extract(u: &ScalarField, t_grid: &[f64], opts: &ExtractOpts) -> Result<LevelFamily> {
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GwvError::Invalid("levels must be strictly increasing".into()));
    }
    let systems: Vec<Result<CurveSystem>> = par_map(t_grid, |&t| {
        let loops = contour_polylines(u, t)?;
        let mut curves = Vec::new();
        for poly in loops {
            if let Some(c) = contour_curve(u, t, &poly, opts)? {
                curves.push(c);
            }
        }
        Ok(CurveSystem::new(curves))
    });
    let systems = systems.into_iter().collect::<Result<Vec<_>>>()?;
    LevelFamily::new(t_grid.to_vec(), systems)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoareaReport {
    pub f_direct: f64,
    pub f_levels: f64,
    pub gap: f64,
}

/// Direct `F(u)` against `∫ W(∂{u > t}) dt` over the extracted levels.
pub fn coarea_check(u: &ScalarField, p: f64, t_grid: &[f64], opts: &ExtractOpts) -> Result<CoareaReport> {
    let f_direct = f_energy(u, p)?;
    let phi = level_extract(u, t_grid, opts)?;
    let f_levels = phi.level_energy(p)?;
    Ok(CoareaReport {
        f_direct,
        f_levels,
        gap: (f_direct - f_levels).abs() / f_direct.abs().max(f64::MIN_POSITIVE),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothEqualityReport {
    pub f: f64,
    pub w: f64,
    pub gap: f64,
    pub mass: f64,
}

/// `F(u)` against `W(V_{ν_{Du}})` with `H = −div(∇u/|∇u|) ∇u/|∇u|` at each node.
pub fn smooth_equality_check(u: &ScalarField, p: f64) -> Result<SmoothEqualityReport> {
    let f = f_energy(u, p)?;
    let nu = from_bv(u, None)?;
    let v = young_varifold(u, &nu, |_| Vec2::ZERO)?;
    let w = v.willmore(p, None)?;
    Ok(SmoothEqualityReport {
        f,
        w,
        gap: (f - w).abs() / f.abs().max(f64::MIN_POSITIVE),
        mass: v.mass(),
    })
}

/// `V_ν` with curvature `−div(∇u/|∇u|) ∇u/|∇u|` on cell particles and `lambda_h(k)` on the
/// particles of concentration particle `k`.
pub fn young_varifold(u: &ScalarField, nu: &YoungMeasure, lambda_h: impl Fn(usize) -> Vec2) -> Result<Varifold> {
    let data = node_curvature(u);
    let (v, sources) = Varifold::from_young_with_sources(nu);
    let h = sources
        .iter()
        .map(|s| match *s {
            Source::Cell { cell, .. } => {
                let (i, j) = u.grid.locate(nu.cells[cell].center);
                match data[u.grid.index(i, j)] {
                    Some((d, kappa)) if d.norm() > 0.0 => -(d / d.norm()) * kappa,
                    _ => Vec2::ZERO,
                }
            }
            Source::Lambda { particle, .. } => lambda_h(particle),
        })
        .collect();
    v.with_curvature(h)
}

/// `∫ |u'(r)| (1 + r^{−p}) 2πr dr` on `[r0, r1]`: `F(u)` of a radial profile (Gauss–Legendre).
pub fn radial_energy(du: impl Fn(f64) -> f64 + Sync, p: f64, r0: f64, r1: f64, n: usize) -> f64 {
    let gl = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let dr = (r1 - r0) / n as f64;
    par_fsum(n, |k| {
        let a = r0 + dr * k as f64;
        let mid = a + 0.5 * dr;
        fsum(gl.iter().map(|&(x, w)| {
            let r = mid + 0.5 * dr * x;
            let g = du(r).abs();
            if g == 0.0 {
                0.0
            } else {
                0.5 * dr * w * g * (1.0 + r.powf(-p)) * std::f64::consts::TAU * r
            }
        }))
    })
}


/// Output of [`sistema_young_build`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SistemaYoung {
    pub nu: YoungMeasure,
    /// `m`: level integral of trace mass off `∂*{u>t}` plus multiplicity excess on it.
    pub m: ParticleMeasure,
    pub varifold: Varifold,
    pub g_phi: f64,
    pub w_v: f64,
    pub gap: f64,
}

/// Young measure of a level family `Φ ∈ 𝒜(u)`: `ν_x = δ_{∇u(x)}`, `λ = |D^s u| + m`, with
/// `ν^∞ = δ_n` on jump samples and `½(δ_n + δ_{−n})` on `spt m`. Curve samples of `Φ` that
/// coincide with jump particles are the `∂*{u>t}` part.
pub fn sistema_young_build(
    u: &ScalarField,
    jumps: &JumpSet,
    phi: &LevelFamily,
    p: f64,
    band: f64,
) -> Result<SistemaYoung> {
    if !(p > 1.0) {
        return Err(GwvError::BadExponent);
    }
    let bounds = u.grid.bounds();
    for sys in &phi.systems {
        for c in &sys.curves {
            if c.samples().iter().any(|&x| {
                !bounds.contains(x) || !u.region.contains(x) || u.region.boundary_distance(x) <= band
            }) {
                return Err(GwvError::BoundaryContact);
            }
        }
    }
    let base = from_bv(u, Some(jumps))?;
    let index = ExactIndex::new(jumps.particles.iter().map(|j| j.pos));
    let mut lambda = Vec::new();
    let mut angular = Vec::new();
    let mut ghost = Vec::new();
    let mut lambda_h = Vec::new();
    for (sys, wt) in phi.systems.iter().zip(phi.weights()) {
        if wt <= 0.0 {
            continue;
        }
        for c in &sys.curves {
            let b = wt * c.spacing();
            let theta = c.multiplicity as f64;
            for ((&x, t), k) in c.samples().iter().zip(c.tangents()).zip(c.curvature()) {
                let n = t.perp();
                let excess = match index.get(x) {
                    Some(j) => {
                        lambda.push(Particle { pos: x, w: b });
                        angular.push(vec![Atom::new(jumps.particles[j].normal, 1.0)]);
                        lambda_h.push(k);
                        theta - 1.0
                    }
                    None => theta,
                };
                if excess > 0.0 {
                    lambda.push(Particle { pos: x, w: b * excess });
                    angular.push(symmetric_atoms(n));
                    lambda_h.push(k);
                    ghost.push(Particle { pos: x, w: b * excess });
                }
            }
        }
    }
    let nu = YoungMeasure::new(base.layout, base.cells, ParticleMeasure::new(lambda)?, angular)?;
    let varifold = young_varifold(u, &nu, |k| lambda_h[k])?;
    let w_v = varifold.willmore(p, None)?;
    let g_phi = phi.level_energy(p)?;
    Ok(SistemaYoung {
        nu,
        m: ParticleMeasure::new(ghost)?,
        varifold,
        g_phi,
        w_v,
        gap: (w_v - g_phi).abs() / g_phi.abs().max(f64::MIN_POSITIVE),
    })
}

/// A candidate `V ∈ 𝕍(u)` for [`minvu_gap`], with the points where its first variation should
/// be probed for singular parts.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub name: String,
    pub varifold: Varifold,
    pub nu: Option<YoungMeasure>,
    pub probes: Vec<Vec2>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateReport {
    pub name: String,
    pub w: f64,
    pub mass: f64,
    pub mass_ok: bool,
    pub membership: Option<MembershipReport>,
    /// Largest growth factor of the singular ratio per radius halving over all probes.
    pub max_growth: f64,
    /// Largest `r · ‖δV‖(B_r)/μ_V(B_r)` at the smallest probe radius.
    pub max_scaled_ratio: f64,
    pub singular_ok: bool,
}

impl CandidateReport {
    pub fn member(&self) -> bool {
        self.mass_ok && self.singular_ok && self.membership.as_ref().map_or(true, |m| m.all_ok())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinVuReport {
    pub f_bar: f64,
    pub candidates: Vec<CandidateReport>,
    /// Minimum of `W` over candidates passing the membership diagnostics.
    pub min_w: f64,
    pub argmin: String,
    pub inequality_ok: bool,
    /// `(F̄ − min W)/F̄`.
    pub gap: f64,
}

/// A probe is singular when its ratio grows by at least this factor at every halving and
/// `r · ratio` at the smallest radius reaches [`SINGULAR_SCALED_RATIO`].
pub const SINGULAR_GROWTH: f64 = 1.5;
pub const SINGULAR_SCALED_RATIO: f64 = 0.1;

/// Absolute tolerance on the `Bar_ν = Du` residual.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// Radii at which [`minvu_gap`] probes singular ratios.
pub const PROBE_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// `F̄ ≥ min {W(V)}` over a finite candidate family, with per-candidate membership diagnostics.
pub fn minvu_gap(
    f_bar: f64,
    du: &VectorParticleMeasure,
    domain: &Region,
    band: f64,
    candidates: &[Candidate],
    p: f64,
    tol: f64,
) -> Result<MinVuReport> {
    let du_mass = du.total_variation();
    let mut reports = Vec::with_capacity(candidates.len());
    for c in candidates {
        let w = c.varifold.willmore(p, None)?;
        let mass = c.varifold.mass();
        let membership = c
            .nu
            .as_ref()
            .map(|nu| gy_membership_report(nu, du, domain, band, MEMBERSHIP_TOL));
        let mut max_growth = 0.0f64;
        let mut max_scaled = 0.0f64;
        let mut singular = false;
        let r_last = PROBE_RADII[PROBE_RADII.len() - 1];
        for &x in &c.probes {
            let prof = singular_ratio(&c.varifold, x, &PROBE_RADII)?;
            let growth: Vec<f64> = growth_factors(&prof).into_iter().map(|g| if g.is_finite() { g } else { 0.0 }).collect();
            let scaled = prof[prof.len() - 1] * r_last;
            max_growth = growth.iter().copied().fold(max_growth, f64::max);
            max_scaled = max_scaled.max(scaled);
            singular |= scaled >= SINGULAR_SCALED_RATIO && growth.iter().all(|&g| g >= SINGULAR_GROWTH);
        }
        reports.push(CandidateReport {
            name: c.name.clone(),
            w,
            mass,
            mass_ok: mass >= du_mass - 1e-6,
            membership,
            max_growth,
            max_scaled_ratio: max_scaled,
            singular_ok: !singular,
        });
    }
    let best = reports
        .iter()
        .filter(|r| r.member())
        .min_by(|a, b| a.w.total_cmp(&b.w));
    let (min_w, argmin) = match best {
        Some(r) => (r.w, r.name.clone()),
        None => (f64::INFINITY, String::new()),
    };
    Ok(MinVuReport {
        f_bar,
        inequality_ok: f_bar + tol >= min_w,
        gap: (f_bar - min_w) / f_bar.abs().max(f64::MIN_POSITIVE),
        min_w,
        argmin,
        candidates: reports,
    })
}
