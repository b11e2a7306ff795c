//! Identification of the limit triplet of a sequence `ν_{Du_h}` from pairings against
//! localized test integrands `Φ_b(x) φ(z)`.

use serde::{Deserialize, Serialize};

use crate::error::{GwvError, Result};
use crate::field::{JumpSet, ScalarField};
use crate::geom::Vec2;
use crate::measure::{Particle, ParticleMeasure};
use crate::radial::{canonical_field, CanonicalKind};
use crate::sum::par_map;
use crate::young::{Atom, Cell, Layout, YoungMeasure};

pub type FieldBuilder = dyn Fn(usize) -> Result<(ScalarField, Option<JumpSet>)> + Sync + Send;

/// `h ↦ u_h`, optionally with the declared limit triplet.
pub struct GeneratorSequence {
    pub name: String,
    pub builder: Box<FieldBuilder>,
    /// Length scale `ε_h → 0` of the sequence, the variable of extrapolation.
    pub scale: fn(usize) -> f64,
    pub declared_limit: Option<YoungMeasure>,
}

impl GeneratorSequence {
    pub fn new(name: impl Into<String>, builder: Box<FieldBuilder>) -> Self {
        Self {
            name: name.into(),
            builder,
            scale: |h| 1.0 / h as f64,
            declared_limit: None,
        }
    }

    /// A canonical sequence sampled on an `n × n` grid.
    pub fn canonical(kind: CanonicalKind, n: usize) -> Self {
        let mut seq = Self::new(kind.name(), Box::new(move |h| canonical_field(kind, h, n)));
        match kind {
            CanonicalKind::Oscillation => seq.scale = |h| 0.5f64.powi(h as i32),
            CanonicalKind::Concentration => seq.scale = |h| 1.0 / (h * h) as f64,
            CanonicalKind::Diffuse => {}
        }
        seq
    }

    /// `u_h = u` for every `h`.
    pub fn constant(u: ScalarField, jumps: Option<JumpSet>) -> Self {
        Self::new("constant", Box::new(move |_| Ok((u.clone(), jumps.clone()))))
    }

    pub fn with_limit(mut self, limit: YoungMeasure) -> Self {
        self.declared_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentifyOpts {
    /// Lattice spacing of the quadratic B-spline partition of unity `Φ_b`.
    pub bump_spacing: f64,
    /// `χ(z) = 1` for `|z| ≤ z_cut`, `0` for `|z| ≥ 2 z_cut`.
    pub z_cut: f64,
    /// Relative tolerance of the convergence flag.
    pub tol: f64,
    /// Relative change below which a bump's `|Du_h|` mass counts as converged.
    pub settle: f64,
}

impl Default for IdentifyOpts {
    fn default() -> Self {
        Self {
            bump_spacing: 0.05,
            z_cut: 1.5,
            tol: 1e-2,
            settle: 1e-3,
        }
    }
}

pub const BOUNDED_TESTS: [&str; 8] = [
    "chi", "chi*z1", "chi*z2", "chi*|z|", "chi*z1^2", "chi*z1*z2", "chi*z2^2", "chi*|z|^2",
];
pub const RECESSION_TESTS: [&str; 8] = [
    "|z|", "z1", "z2", "z1^2/|z|", "z1*z2/|z|", "z2^2/|z|", "|z1|", "|z2|",
];
const N_ACC: usize = 1 + 8 + 8 + 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub h: usize,
    /// `|Du_h|(Ω)` followed by the global bounded and recession pairings.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpEstimate {
    pub center: Vec2,
    /// `∫_Ω Φ_b dx`.
    pub area: f64,
    pub lambda: f64,
    pub du_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub estimate: YoungMeasure,
    pub columns: Vec<String>,
    pub table: Vec<TableRow>,
    /// Per column: the last three values oscillate beyond tolerance.
    pub nonconverging: Vec<bool>,
    pub du_mass: f64,
    pub lambda_mass: f64,
    pub bumps: Vec<BumpEstimate>,
    pub spacing: f64,
}

impl IdentifyReport {
    /// Fraction of `λ` carried by bumps whose centre is within `dist` of the zero set of `g`.
    pub fn lambda_fraction_near(&self, dist: impl Fn(Vec2) -> f64, within: f64) -> f64 {
        let near: f64 = self
            .bumps
            .iter()
            .filter(|b| dist(b.center) <= within)
            .map(|b| b.lambda)
            .sum();
        if self.lambda_mass > 0.0 {
            near / self.lambda_mass
        } else {
            1.0
        }
    }
}

fn bspline2(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        0.75 - a * a
    } else if a < 1.5 {
        0.5 * (1.5 - a) * (1.5 - a)
    } else {
        0.0
    }
}

fn cutoff(r: f64, z_cut: f64) -> f64 {
    if r <= z_cut {
        1.0
    } else if r >= 2.0 * z_cut {
        0.0
    } else {
        let s = (r - z_cut) / z_cut;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Accumulator layout: `[|Du|, bounded × 8, recession × 8, area]`.
fn test_values(z: Vec2, weight: f64, z_cut: f64, out: &mut [f64; N_ACC]) {
    let r = z.norm();
    let chi = cutoff(r, z_cut);
    out[0] += weight * r;
    let b = [1.0, z.x, z.y, r, z.x * z.x, z.x * z.y, z.y * z.y, r * r];
    for (k, v) in b.iter().enumerate() {
        out[1 + k] += weight * chi * v;
    }
    if r > 0.0 && chi < 1.0 {
        let w = weight * (1.0 - chi);
        let rc = [
            r,
            z.x,
            z.y,
            z.x * z.x / r,
            z.x * z.y / r,
            z.y * z.y / r,
            z.x.abs(),
            z.y.abs(),
        ];
        for (k, v) in rc.iter().enumerate() {
            out[9 + k] += w * v;
        }
    }
}

struct Lattice {
    s: f64,
    i0: i64,
    j0: i64,
    ni: usize,
    nj: usize,
}

impl Lattice {
    fn center(&self, bi: usize, bj: usize) -> Vec2 {
        Vec2::new(
            (self.i0 + bi as i64) as f64 * self.s,
            (self.j0 + bj as i64) as f64 * self.s,
        )
    }
}

/// Per-bump accumulators for one member of the sequence.
fn accumulate(u: &ScalarField, jumps: Option<&JumpSet>, lat: &Lattice, z_cut: f64) -> Result<Vec<[f64; N_ACC]>> {
    let blocked = match jumps {
        Some(j) => Some(j.blocked_edges(&u.grid)?),
        None => None,
    };
    let grad = u.gradient(blocked.as_ref());
    let area = u.cell_area();
    let nodes = u.domain_nodes();
    let row_start: Vec<usize> = (0..=u.grid.ny)
        .map(|j| nodes.partition_point(|&(_, nj)| nj < j))
        .collect();
    let s = lat.s;
    let rows: Vec<usize> = (0..lat.nj).collect();
    let per_row: Vec<Vec<[f64; N_ACC]>> = par_map(&rows, |&bj| {
        let cy = lat.center(0, bj).y;
        let mut acc = vec![[0.0; N_ACC]; lat.ni];
        let mut add = |x: Vec2, f: &dyn Fn(f64, &mut [f64; N_ACC])| {
            let wy = bspline2((x.y - cy) / s);
            if wy == 0.0 {
                return;
            }
            let fi = (x.x / s).round() as i64 - lat.i0;
            for bi in (fi - 2).max(0)..=(fi + 2).min(lat.ni as i64 - 1) {
                let c = lat.center(bi as usize, bj);
                let w = wy * bspline2((x.x - c.x) / s);
                if w > 0.0 {
                    f(w, &mut acc[bi as usize]);
                }
            }
        };
        let gy = |y: f64| ((y - u.grid.origin.y) / u.grid.h).clamp(0.0, u.grid.ny as f64);
        let j_lo = gy(cy - 1.5 * s).floor() as usize;
        let j_hi = (gy(cy + 1.5 * s).ceil() as usize + 1).min(u.grid.ny);
        for &(i, j) in &nodes[row_start[j_lo]..row_start[j_hi]] {
            let x = u.grid.node(i, j);
            let mut g = grad.values[u.grid.index(i, j)];
            if g.norm() < u.gradient_floor {
                g = Vec2::ZERO;
            }
            add(x, &|w, a| {
                test_values(g, w * area, z_cut, a);
                a[N_ACC - 1] += w * area;
            });
        }
        if let Some(js) = jumps {
            for p in &js.particles {
                let z = p.normal * (p.gap * p.ds);
                add(p.pos, &|w, a| {
                    let r = z.norm();
                    a[0] += w * r;
                    if r > 0.0 {
                        let rc = [
                            r,
                            z.x,
                            z.y,
                            z.x * z.x / r,
                            z.x * z.y / r,
                            z.y * z.y / r,
                            z.x.abs(),
                            z.y.abs(),
                        ];
                        for (k, v) in rc.iter().enumerate() {
                            a[9 + k] += w * v;
                        }
                    }
                });
            }
        }
        acc
    });
    Ok(per_row.into_iter().flatten().collect())
}

/// Value at `ε = 0` of the least-squares line `a + b ε` through the last (up to three) points.
pub fn extrapolate(eps: &[f64], v: &[f64]) -> f64 {
    let n = eps.len().min(3);
    if n == 0 {
        return 0.0;
    }
    let xs = &eps[eps.len() - n..];
    let ys = &v[v.len() - n..];
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if n < 2 || sxx == 0.0 {
        return ys[n - 1];
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    ym - sxy / sxx * xm
}

/// Whether the last three values behave like `a + b ε`: successive increments in the ratio of
/// the `ε` steps (within a factor 2), or a last increment below `settle` relative.
fn asymptotic(eps: &[f64], v: &[f64], settle: f64) -> bool {
    let n = v.len();
    if n < 3 {
        return true;
    }
    let d1 = v[n - 2] - v[n - 3];
    let d2 = v[n - 1] - v[n - 2];
    if d2.abs() <= settle * v[n - 1].abs() {
        return true;
    }
    let rho = (eps[n - 3] - eps[n - 2]) / (eps[n - 2] - eps[n - 1]);
    let q = d1 / d2;
    q >= 0.5 * rho && q <= 2.0 * rho
}

fn fit_antipodal(m: Vec2, t: [f64; 3]) -> Vec2 {
    let (a, b, c) = (t[0], t[1], t[2]);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let n = Vec2::from_angle(theta);
    if n.dot(m) < 0.0 {
        -n
    } else {
        n
    }
}

/// `p₀δ₀ + p₊δ_{rn} + p₋δ_{−rn}` from the bounded moments `[1, z, |z|, z⊗z, |z|²]` per unit area.
fn fit_oscillation(mom: &[f64]) -> Vec<Atom> {
    let m = Vec2::new(mom[1], mom[2]);
    let abs1 = mom[3];
    let t = [mom[4], mom[5], mom[6]];
    if abs1 <= 1e-12 {
        return vec![Atom::new(Vec2::ZERO, 1.0)];
    }
    let n = fit_antipodal(m, t);
    let r = mom[7] / abs1;
    if !(r > 0.0) {
        return vec![Atom::new(Vec2::ZERO, 1.0)];
    }
    let total = (abs1 / r).clamp(0.0, 1.0);
    let diff = (m.dot(n) / r).clamp(-total, total);
    let pp = 0.5 * (total + diff);
    let pm = 0.5 * (total - diff);
    let mut atoms = Vec::new();
    let p0 = 1.0 - pp - pm;
    if p0 > 1e-12 {
        atoms.push(Atom::new(Vec2::ZERO, p0));
    }
    if pp > 1e-12 {
        atoms.push(Atom::new(n * r, pp));
    }
    if pm > 1e-12 {
        atoms.push(Atom::new(-n * r, pm));
    }
    normalise(atoms)
}

/// `q₊δ_n + q₋δ_{−n}` from the recession moments `[|z|, z, z⊗z/|z|]`.
fn fit_angular(rec: &[f64]) -> Vec<Atom> {
    let w = rec[0];
    if w <= 0.0 {
        return Vec::new();
    }
    let m = Vec2::new(rec[1], rec[2]) / w;
    let n = fit_antipodal(m, [rec[3], rec[4], rec[5]]);
    let diff = m.dot(n).clamp(-1.0, 1.0);
    let atoms: Vec<Atom> = [(n, 0.5 * (1.0 + diff)), (-n, 0.5 * (1.0 - diff))]
        .into_iter()
        .filter(|a| a.1 > 1e-12)
        .map(|(z, p)| Atom::new(z, p))
        .collect();
    normalise(atoms)
}

fn normalise(mut atoms: Vec<Atom>) -> Vec<Atom> {
    let s: f64 = atoms.iter().map(|a| a.p).sum();
    for a in &mut atoms {
        a.p /= s;
    }
    let s2: f64 = atoms.iter().map(|a| a.p).sum();
    if let Some(last) = atoms.last_mut() {
        last.p += 1.0 - s2;
    }
    atoms
}

/// Runs the sequence over `h_schedule`, tabulates the pairings and extrapolates per bump.
pub fn identify_limit(seq: &GeneratorSequence, h_schedule: &[usize], opts: &IdentifyOpts) -> Result<IdentifyReport> {
    if h_schedule.is_empty() || h_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GwvError::Invalid("h schedule must be increasing".into()));
    }
    let s = opts.bump_spacing;
    let mut lattice: Option<Lattice> = None;
    let mut per_h: Vec<Vec<[f64; N_ACC]>> = Vec::new();
    for &h in h_schedule {
        let (u, jumps) = (seq.builder)(h)?;
        let lat = lattice.get_or_insert_with(|| {
            let b = u.grid.bounds();
            let i0 = (b.min.x / s).floor() as i64 - 1;
            let j0 = (b.min.y / s).floor() as i64 - 1;
            let i1 = (b.max.x / s).ceil() as i64 + 1;
            let j1 = (b.max.y / s).ceil() as i64 + 1;
            Lattice {
                s,
                i0,
                j0,
                ni: (i1 - i0 + 1) as usize,
                nj: (j1 - j0 + 1) as usize,
            }
        });
        per_h.push(accumulate(&u, jumps.as_ref(), lat, opts.z_cut)?);
    }
    let lat = lattice.expect("non-empty schedule");
    let eps: Vec<f64> = h_schedule.iter().map(|&h| (seq.scale)(h)).collect();
    let nb = lat.ni * lat.nj;

    let mut columns = vec!["|Du|".to_string()];
    columns.extend(BOUNDED_TESTS.iter().map(|s| s.to_string()));
    columns.extend(RECESSION_TESTS.iter().map(|s| s.to_string()));
    let table: Vec<TableRow> = h_schedule
        .iter()
        .zip(&per_h)
        .map(|(&h, acc)| TableRow {
            h,
            values: (0..N_ACC - 1)
                .map(|k| acc.iter().map(|a| a[k]).sum())
                .collect(),
        })
        .collect();
    let nonconverging = (0..N_ACC - 1)
        .map(|k| {
            let v: Vec<f64> = table.iter().map(|r| r[k]).collect();
            if v.len() < 3 {
                return false;
            }
            let n = v.len();
            let (d1, d2) = (v[n - 2] - v[n - 3], v[n - 1] - v[n - 2]);
            let scale = v[n - 1].abs().max(table[0].values[0].abs()).max(1e-300);
            d1 * d2 < 0.0 && d1.abs().min(d2.abs()) > opts.tol * scale
        })
        .collect();

    let bump_ids: Vec<usize> = (0..nb).collect();
    let fitted: Vec<Option<(BumpEstimate, Cell, Option<(Particle, Vec<Atom>)>)>> = par_map(&bump_ids, |&b| {
        let area = per_h.last().expect("non-empty")[b][N_ACC - 1];
        if area <= 0.0 && per_h.iter().all(|acc| acc[b][0] == 0.0) {
            return None;
        }
        let du_series: Vec<f64> = per_h.iter().map(|acc| acc[b][0]).collect();
        let n = du_series.len();
        let settled = asymptotic(&eps, &du_series, opts.settle);
        let ex = |k: usize| -> f64 {
            let v: Vec<f64> = per_h.iter().map(|acc| acc[b][k]).collect();
            if settled {
                extrapolate(&eps, &v)
            } else {
                v[n - 1]
            }
        };
        let center = lat.center(b % lat.ni, b / lat.ni);
        let du = ex(0);
        let mom: Vec<f64> = (1..9).map(ex).collect();
        let atoms = if area > 0.0 {
            let per_area: Vec<f64> = mom.iter().map(|m| m / area).collect();
            fit_oscillation(&per_area)
        } else {
            vec![Atom::new(Vec2::ZERO, 1.0)]
        };
        let predicted: f64 = atoms.iter().map(|a| a.p * a.z.norm()).sum::<f64>() * area;
        let last_du = per_h.last().expect("non-empty")[b][0];
        let last_chi = per_h.last().expect("non-empty")[b][4];
        let vanishing = last_du - last_chi <= 1e-12 * last_du.max(1e-300);
        let mut lambda = (du - predicted).max(0.0);
        if vanishing || lambda <= 1e-12 * du.abs().max(1e-300) {
            lambda = 0.0;
        }
        let conc = if lambda > 0.0 {
            let rec: Vec<f64> = (9..17).map(ex).collect();
            let ang = fit_angular(&rec);
            (!ang.is_empty()).then(|| (Particle { pos: center, w: lambda }, ang))
        } else {
            None
        };
        let lambda = conc.as_ref().map_or(0.0, |c| c.0.w);
        Some((
            BumpEstimate {
                center,
                area,
                lambda,
                du_mass: du,
            },
            Cell {
                center,
                area: area.max(0.0),
                atoms,
            },
            conc,
        ))
    });

    let mut bumps = Vec::new();
    let mut cells = Vec::new();
    let mut lambda = Vec::new();
    let mut angular = Vec::new();
    for (be, cell, conc) in fitted.into_iter().flatten() {
        bumps.push(be);
        if cell.area > 0.0 {
            cells.push(cell);
        }
        if let Some((p, a)) = conc {
            lambda.push(p);
            angular.push(a);
        }
    }
    let du_series: Vec<f64> = table.iter().map(|r| r.values[0]).collect();
    let lambda_mass = bumps.iter().map(|b| b.lambda).sum();
    let estimate = YoungMeasure::new(
        Layout::Free,
        cells,
        ParticleMeasure::new(lambda)?,
        angular,
    )?;
    Ok(IdentifyReport {
        estimate,
        columns,
        table,
        nonconverging,
        du_mass: extrapolate(&eps, &du_series),
        lambda_mass,
        bumps,
        spacing: s,
    })
}

impl std::ops::Index<usize> for TableRow {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_is_exact_on_lines() {
        let eps = [0.5, 0.25, 0.125, 0.0625];
        let v: Vec<f64> = eps.iter().map(|e| 2.0 + 3.0 * e).collect();
        assert!((extrapolate(&eps, &v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bsplines_partition_unity() {
        for k in 0..20 {
            let x = -0.5 + k as f64 * 0.05;
            let s: f64 = (-3..=3).map(|i| bspline2(x - i as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}

/// Grid resolution, largest resolvable `h`, and bump spacing used by [`identify_canonical`].
pub fn canonical_setup(kind: CanonicalKind) -> (usize, usize, f64) {
    match kind {
        CanonicalKind::Oscillation => (1024, 7, 0.1),
        CanonicalKind::Concentration => (1024, 64, 0.05),
        CanonicalKind::Diffuse => (2048, 12, 0.25),
    }
}

/// Schedule ending at `min(h_max, cap)`: halvings for the concentration example, the last three
/// (oscillation) or every other (diffuse) index otherwise.
pub fn canonical_schedule(kind: CanonicalKind, h_max: usize) -> Result<Vec<usize>> {
    let (_, cap, _) = canonical_setup(kind);
    let h = h_max.min(cap);
    let s = match kind {
        CanonicalKind::Concentration => vec![h / 8, h / 4, h / 2, h],
        CanonicalKind::Oscillation => vec![h.saturating_sub(2), h.saturating_sub(1), h],
        CanonicalKind::Diffuse => vec![h.saturating_sub(4), h.saturating_sub(2), h],
    };
    if s[0] < 1 || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GwvError::Invalid(format!("hmax {h_max} too small for {}", kind.name())));
    }
    Ok(s)
}

/// [`identify_limit`] on a canonical sequence with the settings of [`canonical_setup`].
pub fn identify_canonical(kind: CanonicalKind, h_max: usize) -> Result<IdentifyReport> {
    let (n, _, spacing) = canonical_setup(kind);
    let seq = GeneratorSequence::canonical(kind, n);
    identify_limit(
        &seq,
        &canonical_schedule(kind, h_max)?,
        &IdentifyOpts {
            bump_spacing: spacing,
            ..Default::default()
        },
    )
}
