//! Scalar fields sampled on rectangular grids, and explicit jump sets with traces.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::curves::ClosedCurve;
use crate::error::{GwvError, Result};
use crate::geom::{segment_intersection, Rect, Vec2};
use crate::measure::{VParticle, VectorParticleMeasure};
use crate::sum::fsum;

/// Node lattice `origin + (i h, j h)`, `0 ≤ i < nx`, `0 ≤ j < ny`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub origin: Vec2,
    pub h: f64,
}

impl Grid {
    /// Square lattice with `n × n` nodes covering `[-half, half]²` at node-centred cells.
    pub fn centered(half: f64, n: usize) -> Self {
        let h = 2.0 * half / n as f64;
        Self {
            nx: n,
            ny: n,
            origin: Vec2::new(-half + 0.5 * h, -half + 0.5 * h),
            h,
        }
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Closed rectangle covered by the node cells.
    pub fn bounds(&self) -> Rect {
        let half = Vec2::new(0.5 * self.h, 0.5 * self.h);
        Rect::new(self.origin - half, self.node(self.nx - 1, self.ny - 1) + half)
    }

    /// Cell containing `p` (clamped).
    pub fn locate(&self, p: Vec2) -> (usize, usize) {
        let f = (p - self.origin) / self.h;
        let i = f.x.round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = f.y.round().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }
}

/// Subset of the plane used as the domain `Ω` of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    All,
    Disk { center: Vec2, radius: f64 },
    Annulus { center: Vec2, inner: f64, outer: f64 },
    Box { rect: Rect },
}

impl Region {
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Region::All => true,
            Region::Disk { center, radius } => p.dist(center) < radius,
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = p.dist(center);
                r > inner && r < outer
            }
            Region::Box { rect } => rect.contains(p),
        }
    }

    /// Distance from `p` to the boundary of the region (`∞` for the whole plane).
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        match *self {
            Region::All => f64::INFINITY,
            Region::Disk { center, radius } => (p.dist(center) - radius).abs(),
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = p.dist(center);
                (r - inner).abs().min((r - outer).abs())
            }
            Region::Box { rect } => {
                if rect.contains(p) {
                    rect.inner_distance(p)
                } else {
                    let dx = (rect.min.x - p.x).max(p.x - rect.max.x).max(0.0);
                    let dy = (rect.min.y - p.y).max(p.y - rect.max.y).max(0.0);
                    dx.hypot(dy)
                }
            }
        }
    }
}

/// Samples of `u` on a grid, restricted to `region`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub region: Region,
    /// Gradients with norm below this floor count as zero.
    pub gradient_floor: f64,
}

/// One-sided or centred differences chosen per node.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub values: Vec<Vec2>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>, region: Region) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GwvError::GridMismatch);
        }
        if !(grid.h > 0.0) {
            return Err(GwvError::Invalid("grid spacing must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GwvError::Invalid("field values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            region,
            gradient_floor: 0.0,
        })
    }

    pub fn sample(grid: Grid, region: Region, f: impl Fn(Vec2) -> f64 + Sync) -> Result<Self> {
        let values: Vec<f64> = {
            use rayon::prelude::*;
            (0..grid.len())
                .into_par_iter()
                .map(|k| f(grid.node(k % grid.nx, k / grid.nx)))
                .collect()
        };
        let mut s = Self::new(grid, values, region)?;
        s.gradient_floor = 1e-8 * s.max_gradient();
        Ok(s)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn in_domain(&self, i: usize, j: usize) -> bool {
        self.region.contains(self.grid.node(i, j))
    }

    /// Indices `(i, j)` of the nodes inside the domain.
    pub fn domain_nodes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                if self.in_domain(i, j) {
                    v.push((i, j));
                }
            }
        }
        v
    }

    pub fn cell_area(&self) -> f64 {
        self.grid.h * self.grid.h
    }

    fn max_gradient(&self) -> f64 {
        let g = self.grid;
        let mut m = 0.0f64;
        for j in 0..g.ny {
            for i in 0..g.nx.saturating_sub(1) {
                m = m.max((self.at(i + 1, j) - self.at(i, j)).abs() / g.h);
            }
        }
        for j in 0..g.ny.saturating_sub(1) {
            for i in 0..g.nx {
                m = m.max((self.at(i, j + 1) - self.at(i, j)).abs() / g.h);
            }
        }
        m
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            ..self.clone()
        }
    }

    /// Node gradients. Differences never cross `blocked` edges; isolated slope breaks are
    /// resolved with the one-sided difference from the smoother side.
    pub fn gradient(&self, blocked: Option<&BlockedEdges>) -> Gradient {
        use rayon::prelude::*;
        let g = self.grid;
        let values: Vec<Vec2> = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % g.nx, k / g.nx);
                Vec2::new(
                    self.directional(i, j, 0, blocked),
                    self.directional(i, j, 1, blocked),
                )
            })
            .collect();
        Gradient { values }
    }

    /// Value at offset `o` along axis `axis`, or `None` outside the grid or across a block.
    fn step(&self, i: usize, j: usize, axis: usize, o: isize, blocked: Option<&BlockedEdges>) -> Option<f64> {
        let (n, pos) = if axis == 0 { (self.grid.nx, i) } else { (self.grid.ny, j) };
        let target = pos as isize + o;
        if target < 0 || target >= n as isize {
            return None;
        }
        if let Some(b) = blocked {
            let (lo, hi) = if o > 0 { (pos as isize, target) } else { (target, pos as isize) };
            for e in lo..hi {
                let key = if axis == 0 {
                    (e as usize, j, 0u8)
                } else {
                    (i, e as usize, 1u8)
                };
                if b.edges.contains(&key) {
                    return None;
                }
            }
        }
        let (ti, tj) = if axis == 0 { (target as usize, j) } else { (i, target as usize) };
        Some(self.at(ti, tj))
    }

    fn directional(&self, i: usize, j: usize, axis: usize, blocked: Option<&BlockedEdges>) -> f64 {
        let h = self.grid.h;
        let u0 = self.at(i, j);
        let up = self.step(i, j, axis, 1, blocked);
        let um = self.step(i, j, axis, -1, blocked);
        match (um, up) {
            (None, None) => 0.0,
            (Some(a), None) => (u0 - a) / h,
            (None, Some(b)) => (b - u0) / h,
            (Some(a), Some(b)) => {
                let dm = (u0 - a) / h;
                let dp = (b - u0) / h;
                let d2 = (dp - dm).abs();
                let scale = dm.abs().max(dp.abs());
                if d2 <= 0.05 * scale || scale == 0.0 {
                    return 0.5 * (dm + dp);
                }
                let upp = self.step(i, j, axis, 2, blocked);
                let umm = self.step(i, j, axis, -2, blocked);
                let d2m = umm.map(|c| ((u0 - a) / h - (a - c) / h).abs());
                let d2p = upp.map(|c| ((c - b) / h - dp).abs());
                let neighbour_min = match (d2m, d2p) {
                    (Some(x), Some(y)) => x.min(y),
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => f64::INFINITY,
                };
                if d2 <= 4.0 * neighbour_min + 1e-12 * scale {
                    return 0.5 * (dm + dp);
                }
                match (d2m, d2p) {
                    (Some(x), Some(y)) if y < x => dp,
                    (None, Some(_)) => dp,
                    _ => dm,
                }
            }
        }
    }

    /// Cubic convolution interpolant (Keys, `a = −1/2`) and its gradient at `x`.
    pub fn interpolate(&self, x: Vec2) -> (f64, Vec2) {
        let g = self.grid;
        let f = (x - g.origin) / g.h;
        let (fi, fj) = (f.x.floor(), f.y.floor());
        let (tx, ty) = (f.x - fi, f.y - fj);
        let (wx, dx) = keys_weights(tx);
        let (wy, dy) = keys_weights(ty);
        let clamp = |k: f64, n: usize| k.clamp(0.0, (n - 1) as f64) as usize;
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for b in 0..4 {
            let j = clamp(fj + b as f64 - 1.0, g.ny);
            for a in 0..4 {
                let i = clamp(fi + a as f64 - 1.0, g.nx);
                let u = self.at(i, j);
                v += wx[a] * wy[b] * u;
                gx += dx[a] * wy[b] * u;
                gy += wx[a] * dy[b] * u;
            }
        }
        (v, Vec2::new(gx, gy) / g.h)
    }

    /// Centred second derivatives `(u_xx, u_xy, u_yy)` at a node.
    pub fn hessian(&self, i: usize, j: usize) -> Option<(f64, f64, f64)> {
        let g = self.grid;
        if i == 0 || j == 0 || i + 1 >= g.nx || j + 1 >= g.ny {
            return None;
        }
        let h2 = g.h * g.h;
        let u = |a: usize, b: usize| self.at(a, b);
        let uxx = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / h2;
        let uyy = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / h2;
        let uxy = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) / (4.0 * h2);
        Some((uxx, uxy, uyy))
    }

    /// Centred first derivatives at a node (no blocking, no slope-break handling).
    pub fn central_gradient(&self, i: usize, j: usize) -> Option<Vec2> {
        let g = self.grid;
        if i == 0 || j == 0 || i + 1 >= g.nx || j + 1 >= g.ny {
            return None;
        }
        Some(Vec2::new(
            (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * g.h),
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * g.h),
        ))
    }
}

fn keys_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let w = [
        ((-0.5 * t + 1.0) * t - 0.5) * t,
        (1.5 * t - 2.5) * t * t + 1.0,
        ((-1.5 * t + 2.0) * t + 0.5) * t,
        (0.5 * t - 0.5) * t * t,
    ];
    let d = [
        (-1.5 * t + 2.0) * t - 0.5,
        (4.5 * t - 5.0) * t,
        (-4.5 * t + 4.0) * t + 0.5,
        (1.5 * t - 1.0) * t,
    ];
    (w, d)
}

/// Grid edges crossed by jump polylines: `(i, j, 0)` joins `(i,j)`–`(i+1,j)`,
/// `(i, j, 1)` joins `(i,j)`–`(i,j+1)`.
#[derive(Debug, Clone, Default)]
pub struct BlockedEdges {
    pub edges: HashSet<(usize, usize, u8)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpParticle {
    pub pos: Vec2,
    /// Unit normal pointing from the `u⁻` side to the `u⁺` side.
    pub normal: Vec2,
    /// `u⁺ − u⁻ > 0`.
    pub gap: f64,
    /// Arclength element carried by the particle.
    pub ds: f64,
}

/// Jump set `J_u` as closed polylines with per-sample traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpSet {
    pub particles: Vec<JumpParticle>,
    pub polylines: Vec<Vec<Vec2>>,
}

impl JumpSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Jump of height `gap` across a closed curve whose inside carries the larger trace when
    /// `inside_high` holds.
    pub fn from_curve(c: &ClosedCurve, gap: f64, inside_high: bool) -> Self {
        let mut js = Self::new();
        js.add_curve(c, gap, inside_high);
        js
    }

    pub fn add_curve(&mut self, c: &ClosedCurve, gap: f64, inside_high: bool) {
        let signed_area = polygon_area(c.samples());
        for (x, t) in c.samples().iter().zip(c.tangents()) {
            let inward = if signed_area >= 0.0 { t.perp() } else { -t.perp() };
            let normal = if inside_high { inward } else { -inward };
            self.particles.push(JumpParticle {
                pos: *x,
                normal,
                gap: gap.abs(),
                ds: c.spacing(),
            });
        }
        self.polylines.push(c.samples().to_vec());
    }

    /// Adds selected samples of a curve (by mask) as jump particles with explicit normals.
    pub fn add_particles(&mut self, ps: impl IntoIterator<Item = JumpParticle>, polyline: Vec<Vec2>) {
        self.particles.extend(ps);
        if !polyline.is_empty() {
            self.polylines.push(polyline);
        }
    }

    /// `D^s u` as a vector measure: `(u⁺ − u⁻) n ds` per particle.
    pub fn measure(&self) -> VectorParticleMeasure {
        VectorParticleMeasure {
            particles: self
                .particles
                .iter()
                .map(|p| VParticle {
                    pos: p.pos,
                    w: p.normal * (p.gap * p.ds),
                })
                .collect(),
        }
    }

    pub fn total_variation(&self) -> f64 {
        fsum(self.particles.iter().map(|p| p.gap * p.ds))
    }

    /// Marks grid edges crossed by the polylines; errors if a polyline leaves the grid.
    pub fn blocked_edges(&self, grid: &Grid) -> Result<BlockedEdges> {
        let bounds = grid.bounds();
        let mut edges = HashSet::new();
        for poly in &self.polylines {
            if poly.iter().any(|p| !bounds.contains(*p)) {
                return Err(GwvError::JumpOutsideGrid);
            }
            let n = poly.len();
            for k in 0..n {
                let a = poly[k];
                let b = poly[(k + 1) % n];
                let lo = Vec2::new(a.x.min(b.x), a.y.min(b.y));
                let hi = Vec2::new(a.x.max(b.x), a.y.max(b.y));
                let i0 = (((lo.x - grid.origin.x) / grid.h).floor() as isize - 1).max(0) as usize;
                let j0 = (((lo.y - grid.origin.y) / grid.h).floor() as isize - 1).max(0) as usize;
                let i1 = (((hi.x - grid.origin.x) / grid.h).ceil() as usize + 1).min(grid.nx - 1);
                let j1 = (((hi.y - grid.origin.y) / grid.h).ceil() as usize + 1).min(grid.ny - 1);
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let p = grid.node(i, j);
                        if i + 1 < grid.nx && segment_intersection(a, b, p, grid.node(i + 1, j)).is_some() {
                            edges.insert((i, j, 0u8));
                        }
                        if j + 1 < grid.ny && segment_intersection(a, b, p, grid.node(i, j + 1)).is_some() {
                            edges.insert((i, j, 1u8));
                        }
                    }
                }
            }
        }
        Ok(BlockedEdges { edges })
    }
}

/// Signed polygon area (positive for counter-clockwise order).
pub fn polygon_area(p: &[Vec2]) -> f64 {
    let n = p.len();
    0.5 * fsum((0..n).map(|i| p[i].cross(p[(i + 1) % n])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinks_use_one_sided_differences() {
        let grid = Grid::centered(1.0, 64);
        let u = ScalarField::sample(grid, Region::All, |x| (x.x - 0.013).abs()).unwrap();
        let g = u.gradient(None);
        for k in 0..grid.len() {
            let gx = g.values[k].x;
            assert!((gx.abs() - 1.0).abs() < 1e-9, "node {k}: {gx}");
        }
    }

    #[test]
    fn smooth_extremum_stays_centred() {
        let grid = Grid::centered(1.0, 64);
        let u = ScalarField::sample(grid, Region::All, |x| 1.0 - x.norm2()).unwrap();
        let g = u.gradient(None);
        for j in 1..63 {
            for i in 1..63 {
                let exact = grid.node(i, j) * -2.0;
                assert!((g.values[grid.index(i, j)] - exact).norm() < 1e-12);
            }
        }
    }
}
