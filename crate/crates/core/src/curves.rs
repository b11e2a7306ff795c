//! Closed curves sampled at uniform arclength, systems of such curves with multiplicities, and
//! one-parameter level families of systems.

use serde::{Deserialize, Serialize};

use crate::error::{GwvError, Result};
use crate::geom::{line_angle, point_segment_distance, segment_intersection, Rect, Vec2};
use crate::spatial::PointIndex;
use crate::sum::{fsum, par_map};

const SPACING_RTOL: f64 = 1e-6;
pub const MIN_SAMPLES: usize = 16;

/// Closed polygon with equal chords between consecutive samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    samples: Vec<Vec2>,
    spacing: f64,
    pub multiplicity: u32,
}

impl ClosedCurve {
    /// Validates closure, sample count and uniform spacing.
    pub fn new(samples: Vec<Vec2>, multiplicity: u32) -> Result<Self> {
        let mut samples = samples;
        if samples.len() > 1 && samples.first() == samples.last() {
            samples.pop();
        }
        let n = samples.len();
        if n < MIN_SAMPLES {
            return Err(GwvError::Invalid(format!(
                "closed curve needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if multiplicity == 0 {
            return Err(GwvError::Invalid("multiplicity must be positive".into()));
        }
        if samples.iter().any(|p| !p.is_finite()) {
            return Err(GwvError::Invalid("non-finite sample".into()));
        }
        let d: Vec<f64> = (0..n).map(|i| samples[i].dist(samples[(i + 1) % n])).collect();
        let spacing = fsum(d.iter().copied()) / n as f64;
        if !(spacing > 0.0) {
            return Err(GwvError::Degenerate("zero-length curve".into()));
        }
        if d.iter().any(|&di| (di - spacing).abs() > SPACING_RTOL * spacing) {
            return Err(GwvError::Invalid(
                "samples are not at uniform arclength".into(),
            ));
        }
        Ok(Self {
            samples,
            spacing,
            multiplicity,
        })
    }

    pub fn samples(&self) -> &[Vec2] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Arclength step `Δs`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.spacing * self.samples.len() as f64
    }

    fn at(&self, i: isize) -> Vec2 {
        let n = self.samples.len() as isize;
        self.samples[i.rem_euclid(n) as usize]
    }

    /// Periodic second differences `(x_{i-1} − 2x_i + x_{i+1})/Δs²`.
    pub fn curvature(&self) -> Vec<Vec2> {
        let h2 = self.spacing * self.spacing;
        (0..self.samples.len() as isize)
            .map(|i| (self.at(i - 1) - self.at(i) * 2.0 + self.at(i + 1)) / h2)
            .collect()
    }

    /// Unit tangents from centred chords.
    pub fn tangents(&self) -> Vec<Vec2> {
        (0..self.samples.len() as isize)
            .map(|i| {
                (self.at(i + 1) - self.at(i - 1))
                    .normalized()
                    .unwrap_or(Vec2::E1)
            })
            .collect()
    }

    pub fn translated(&self, v: Vec2) -> Self {
        Self {
            samples: self.samples.iter().map(|&p| p + v).collect(),
            ..self.clone()
        }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&p| p.rotate(angle)).collect(),
            ..self.clone()
        }
    }

    pub fn with_multiplicity(&self, m: u32) -> Self {
        Self {
            multiplicity: m,
            ..self.clone()
        }
    }

    /// `Σ (1+|k|^p) Δs` for a single traversal.
    pub fn willmore_single(&self, p: f64) -> f64 {
        let ds = self.spacing;
        fsum(self.curvature().into_iter().map(|k| (1.0 + k.norm().powf(p)) * ds))
    }

    pub fn bounds(&self) -> Rect {
        Rect::bounding(self.samples.iter().copied()).expect("nonempty curve")
    }

    /// Number of signed crossings of the ray `{x + s e₁ : s > 0}`.
    pub fn winding_crossings(&self, x: Vec2) -> i64 {
        winding_crossings(&self.samples, x)
    }

    pub fn distance_to(&self, x: Vec2) -> f64 {
        let n = self.samples.len();
        (0..n)
            .map(|i| point_segment_distance(x, self.samples[i], self.samples[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Circle of radius `r` about `c` with `n` equally spaced samples.
    pub fn circle(c: Vec2, r: f64, n: usize, multiplicity: u32) -> Result<Self> {
        let samples = (0..n)
            .map(|i| c + Vec2::from_angle(std::f64::consts::TAU * i as f64 / n as f64) * r)
            .collect();
        Self::new(samples, multiplicity)
    }
}

/// Piecewise path made of segments and circular arcs with exact arclength parametrisation.
#[derive(Debug, Clone, Default)]
pub struct Path {
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Segment { a: Vec2, b: Vec2 },
    Arc { center: Vec2, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => a.dist(b),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn point(&self, s: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => {
                let l = a.dist(b);
                if l == 0.0 {
                    a
                } else {
                    a + (b - a) * (s / l)
                }
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => center + Vec2::from_angle(start + sweep.signum() * s / radius) * radius,
        }
    }
}

impl Path {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn segment(mut self, a: Vec2, b: Vec2) -> Self {
        self.pieces.push(Piece::Segment { a, b });
        self
    }

    /// Arc about `center` from polar angle `start`, sweeping `sweep` radians (signed).
    pub fn arc(mut self, center: Vec2, radius: f64, start: f64, sweep: f64) -> Self {
        self.pieces.push(Piece::Arc {
            center,
            radius,
            start,
            sweep,
        });
        self
    }

    pub fn length(&self) -> f64 {
        fsum(self.pieces.iter().map(Piece::length))
    }

    /// Point at arclength `s ∈ [0, L]` together with the index of the piece that holds it.
    pub fn point(&self, s: f64) -> (Vec2, usize) {
        let mut rest = s;
        for (k, p) in self.pieces.iter().enumerate() {
            let l = p.length();
            if rest <= l || k + 1 == self.pieces.len() {
                return (p.point(rest.min(l)), k);
            }
            rest -= l;
        }
        (Vec2::ZERO, 0)
    }

    /// Map every vertex through `f` (rigid motions only).
    pub fn transformed(&self, rot: f64, shift: Vec2) -> Path {
        Path {
            pieces: self
                .pieces
                .iter()
                .map(|p| match *p {
                    Piece::Segment { a, b } => Piece::Segment {
                        a: a.rotate(rot) + shift,
                        b: b.rotate(rot) + shift,
                    },
                    Piece::Arc {
                        center,
                        radius,
                        start,
                        sweep,
                    } => Piece::Arc {
                        center: center.rotate(rot) + shift,
                        radius,
                        start: start + rot,
                        sweep,
                    },
                })
                .collect(),
        }
    }

    pub fn then(mut self, other: &Path) -> Path {
        self.pieces.extend_from_slice(&other.pieces);
        self
    }

    /// Dense polyline at uniform arclength `L/m` with the piece index of each vertex.
    pub fn dense(&self, m: usize) -> (Vec<Vec2>, Vec<usize>) {
        let l = self.length();
        (0..m).map(|i| self.point(l * i as f64 / m as f64)).unzip()
    }

    /// Equal-chord closed curve with `n` samples and the piece index each sample lies on.
    pub fn sample(&self, n: usize, multiplicity: u32) -> Result<(ClosedCurve, Vec<usize>)> {
        let m = (n * 32).max(4096);
        let (dense, tags) = self.dense(m);
        let params = equal_chord_walk(&dense, n)?;
        let samples: Vec<Vec2> = params.iter().map(|&s| polyline_point(&dense, s)).collect();
        let labels = params
            .iter()
            .map(|&s| tags[(s.round() as usize) % m])
            .collect();
        Ok((ClosedCurve::new(samples, multiplicity)?, labels))
    }
}

/// Signed crossings of the ray `{x + s e₁ : s > 0}` with a closed polyline.
pub fn winding_crossings(poly: &[Vec2], x: Vec2) -> i64 {
    let n = poly.len();
    let mut count = 0i64;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > x.y) != (b.y > x.y) {
            let s = (x.y - a.y) / (b.y - a.y);
            let xc = a.x + s * (b.x - a.x);
            if xc > x.x {
                count += if b.y > a.y { 1 } else { -1 };
            }
        }
    }
    count
}

/// Point at vertex parameter `s` of a closed polyline.
pub fn polyline_point(poly: &[Vec2], s: f64) -> Vec2 {
    let m = poly.len();
    let i = s.floor();
    let f = s - i;
    let a = poly[(i as usize) % m];
    let b = poly[(i as usize + 1) % m];
    a + (b - a) * f
}

/// Compass walk on a closed polyline: returns `n` vertex parameters (in units of polyline
/// vertices, starting at 0) such that consecutive points are at one common chord distance and
/// the `n`-th step returns to the start.
pub fn equal_chord_walk(poly: &[Vec2], n: usize) -> Result<Vec<f64>> {
    let m = poly.len();
    if m < 3 || n < 3 {
        return Err(GwvError::Degenerate("polyline too short".into()));
    }
    let total = fsum((0..m).map(|i| poly[i].dist(poly[(i + 1) % m])));
    if !(total > 0.0) {
        return Err(GwvError::Degenerate("zero-length polyline".into()));
    }
    // Walk `n` steps of chord `d`, returning the parameter reached (may exceed `m`).
    let walk = |d: f64, out: Option<&mut Vec<f64>>| -> f64 {
        let mut params = out;
        let mut s = 0.0f64;
        for _ in 0..n {
            if let Some(v) = params.as_deref_mut() {
                v.push(s);
            }
            let q = polyline_point(poly, s);
            let mut seg = s.floor() as usize;
            let mut t0 = s - seg as f64;
            let mut found = None;
            for _ in 0..(2 * m) {
                let a = poly[seg % m];
                let b = poly[(seg + 1) % m];
                let ab = b - a;
                // Solve |a + t ab − q| = d for the largest root t in [t0, 1].
                let aq = a - q;
                let qa = ab.norm2();
                let qb = 2.0 * ab.dot(aq);
                let qc = aq.norm2() - d * d;
                if qa > 0.0 {
                    let disc = qb * qb - 4.0 * qa * qc;
                    if disc >= 0.0 {
                        let t = (-qb + disc.sqrt()) / (2.0 * qa);
                        if t >= t0 && t <= 1.0 {
                            found = Some(seg as f64 + t);
                            break;
                        }
                    }
                }
                seg += 1;
                t0 = 0.0;
            }
            match found {
                Some(v) => s = v,
                None => return f64::INFINITY,
            }
        }
        s
    };
    let target = m as f64;
    let mut lo = 0.25 * total / n as f64;
    let mut hi = total / n as f64 * (1.0 + 1e-12);
    if walk(hi, None) < target {
        hi = total / n as f64 * 1.01;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if walk(mid, None) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let d = 0.5 * (lo + hi);
    let mut params = Vec::with_capacity(n);
    walk(d, Some(&mut params));
    Ok(params)
}

/// Uniform-arclength resampling of a closed polyline: dense linear resampling, two smoothing
/// passes at scale `smoothing` (defaults to a fraction of the target spacing), rescaling about
/// the centroid to restore length, then an equal-chord walk from the first vertex.
pub fn resample_arclength(points: &[Vec2], n: usize) -> Result<ClosedCurve> {
    resample_arclength_smoothed(points, n, 0.0)
}

pub fn resample_arclength_smoothed(points: &[Vec2], n: usize, smoothing: f64) -> Result<ClosedCurve> {
    let mut pts: Vec<Vec2> = points.to_vec();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    let mut distinct = pts.clone();
    distinct.sort_by(|a, b| a.lex_cmp(b));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(GwvError::Degenerate("need at least 3 distinct points".into()));
    }
    let k = pts.len();
    let seg: Vec<f64> = (0..k).map(|i| pts[i].dist(pts[(i + 1) % k])).collect();
    let total = fsum(seg.iter().copied());
    if !(total > 0.0) {
        return Err(GwvError::Degenerate("zero-length polyline".into()));
    }
    let m = (n * 16).max(4 * k).max(1024);
    let step = total / m as f64;
    let mut dense = Vec::with_capacity(m);
    let mut j = 0usize;
    let mut acc = 0.0;
    for i in 0..m {
        let s = step * i as f64;
        while j + 1 < k && acc + seg[j] < s {
            acc += seg[j];
            j += 1;
        }
        let f = if seg[j] > 0.0 { ((s - acc) / seg[j]).clamp(0.0, 1.0) } else { 0.0 };
        dense.push(pts[j] + (pts[(j + 1) % k] - pts[j]) * f);
    }
    let stride = ((smoothing / step).round() as usize).max(1).min(m / 8);
    for _ in 0..2 {
        let prev = dense.clone();
        for i in 0..m {
            dense[i] = (prev[(i + m - stride) % m] + prev[i] * 2.0 + prev[(i + stride) % m]) * 0.25;
        }
    }
    let smooth_len = fsum((0..m).map(|i| dense[i].dist(dense[(i + 1) % m])));
    let centroid = crate::sum::fsum_vec(dense.iter().copied()) / m as f64;
    let scale = total / smooth_len;
    for p in dense.iter_mut() {
        *p = centroid + (*p - centroid) * scale;
    }
    let params = equal_chord_walk(&dense, n)?;
    let samples = params.iter().map(|&s| polyline_point(&dense, s)).collect();
    ClosedCurve::new(samples, 1)
}

/// Finite family of closed curves with multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveSystem {
    pub curves: Vec<ClosedCurve>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactReport {
    pub transversal_crossings: usize,
    pub tangential_contacts: usize,
}

impl CurveSystem {
    pub fn new(curves: Vec<ClosedCurve>) -> Self {
        Self { curves }
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        Rect::bounding(self.curves.iter().flat_map(|c| c.samples().iter().copied()))
            .map(|r| r.diameter())
            .unwrap_or(0.0)
    }

    /// Total length counted with multiplicity.
    pub fn length(&self) -> f64 {
        fsum(self.curves.iter().map(|c| c.length() * c.multiplicity as f64))
    }

    pub fn willmore_energy(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) {
            return Err(GwvError::BadExponent);
        }
        let parts = par_map(&self.curves, |c| c.willmore_single(p) * c.multiplicity as f64);
        Ok(fsum(parts))
    }

    /// Parity of the multiplicity-weighted winding index; errors on the trace.
    pub fn interior_indicator(&self, x: Vec2) -> Result<u8> {
        let tol = 1e-9 * (1.0 + self.diameter());
        self.interior_indicator_tol(x, tol)
    }

    pub fn interior_indicator_tol(&self, x: Vec2, tol: f64) -> Result<u8> {
        let mut total = 0i64;
        for c in &self.curves {
            if c.distance_to(x) <= tol {
                return Err(GwvError::PointOnTrace);
            }
            total += c.winding_crossings(x) * c.multiplicity as i64;
        }
        Ok(total.rem_euclid(2) as u8)
    }

    pub fn distance_to(&self, x: Vec2) -> f64 {
        self.curves
            .iter()
            .map(|c| c.distance_to(x))
            .fold(f64::INFINITY, f64::min)
    }

    fn segments(&self) -> Vec<(Vec2, Vec2)> {
        self.curves
            .iter()
            .flat_map(|c| {
                let s = c.samples();
                let n = s.len();
                (0..n).map(move |i| (s[i], s[(i + 1) % n]))
            })
            .collect()
    }

    /// Counts intersections between the segments of `self` and `other` (pass `self` for
    /// self-contacts), splitting them by angle into crossings and tangential contacts.
    pub fn contacts_with(&self, other: &CurveSystem, angle_tol: f64) -> ContactReport {
        let a = self.segments();
        let b = other.segments();
        let same = std::ptr::eq(self, other);
        let reach = b
            .iter()
            .map(|(p, q)| p.dist(*q))
            .fold(0.0, f64::max)
            .max(a.iter().map(|(p, q)| p.dist(*q)).fold(0.0, f64::max));
        let mids: Vec<Vec2> = b.iter().map(|(p, q)| (*p + *q) * 0.5).collect();
        let index = PointIndex::new(&mids, reach.max(1e-12));
        let mut transversal = 0;
        let mut tangential = 0;
        for (i, (p, q)) in a.iter().enumerate() {
            for j in index.within((*p + *q) * 0.5, reach * 1.01) {
                if same && j <= i + 1 && i <= j + 1 {
                    continue;
                }
                if same && j < i {
                    continue;
                }
                let (r, s) = b[j];
                if p == &r || p == &s || q == &r || q == &s {
                    continue;
                }
                if let Some((_, ang)) = segment_intersection(*p, *q, r, s) {
                    if ang > angle_tol {
                        transversal += 1;
                    } else {
                        tangential += 1;
                    }
                }
            }
        }
        ContactReport {
            transversal_crossings: transversal,
            tangential_contacts: tangential,
        }
    }
}

/// `t ↦ Φ(t)` sampled on strictly increasing levels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelFamily {
    pub levels: Vec<f64>,
    pub systems: Vec<CurveSystem>,
}

/// Trapezoid weights for the given abscissae.
pub fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
            let right = if i + 1 < n { t[i + 1] - t[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NestednessReport {
    pub no_crossing: bool,
    pub crossings: usize,
    pub inclusion: bool,
    pub inclusion_violations: usize,
    pub ghost_fraction_ok: bool,
    pub ghost_violations: usize,
    pub ghost_fraction: f64,
}

impl LevelFamily {
    pub fn new(levels: Vec<f64>, systems: Vec<CurveSystem>) -> Result<Self> {
        if levels.len() != systems.len() {
            return Err(GwvError::Invalid("one system per level required".into()));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GwvError::Invalid("levels must be strictly increasing".into()));
        }
        Ok(Self { levels, systems })
    }

    /// The same system at every level.
    pub fn constant(levels: Vec<f64>, system: CurveSystem) -> Result<Self> {
        let systems = vec![system; levels.len()];
        Self::new(levels, systems)
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.levels)
    }

    /// `G(Φ) = ∫ W(Φ(t)) dt` by the trapezoid rule.
    pub fn level_energy(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) {
            return Err(GwvError::BadExponent);
        }
        if self.levels.len() < 2 {
            return Ok(0.0);
        }
        let w = self.weights();
        let parts: Vec<f64> = self
            .systems
            .iter()
            .zip(&w)
            .flat_map(|(s, &wi)| {
                s.curves.iter().flat_map(move |c| {
                    let ds = c.spacing();
                    let m = c.multiplicity as f64;
                    c.curvature()
                        .into_iter()
                        .map(move |k| wi * m * (1.0 + k.norm().powf(p)) * ds)
                })
            })
            .collect();
        Ok(fsum(parts))
    }

    /// Checks the three nestedness conditions between consecutive levels.
    pub fn nestedness_check(&self, probes: &[Vec2]) -> NestednessReport {
        let angle_tol = 2f64.to_radians();
        let mut crossings = 0;
        let mut inclusion_violations = 0;
        let mut ghost_violations = 0;
        let mut ghost_total = 0usize;
        for k in 0..self.levels.len().saturating_sub(1) {
            let lo = &self.systems[k];
            let hi = &self.systems[k + 1];
            let tol = 1e-3 * lo.diameter().max(hi.diameter()).max(1e-12);
            crossings += lo.contacts_with(hi, angle_tol).transversal_crossings;
            for &x in probes {
                if lo.distance_to(x) <= tol || hi.distance_to(x) <= tol {
                    continue;
                }
                let ih = hi.interior_indicator_tol(x, 0.0).unwrap_or(0);
                let il = lo.interior_indicator_tol(x, 0.0).unwrap_or(0);
                if ih == 1 && il == 0 {
                    inclusion_violations += 1;
                }
            }
            for c in &hi.curves {
                for &x in c.samples() {
                    ghost_total += 1;
                    if lo.distance_to(x) <= tol {
                        continue;
                    }
                    if lo.interior_indicator_tol(x, 0.0).unwrap_or(0) == 0 {
                        ghost_violations += 1;
                    }
                }
            }
        }
        let ghost_fraction = if ghost_total > 0 {
            ghost_violations as f64 / ghost_total as f64
        } else {
            0.0
        };
        NestednessReport {
            no_crossing: crossings == 0,
            crossings,
            inclusion: inclusion_violations == 0,
            inclusion_violations,
            ghost_fraction_ok: ghost_fraction < 1e-3,
            ghost_violations,
            ghost_fraction,
        }
    }

    /// Total number of samples over all levels and curves.
    pub fn sample_count(&self) -> usize {
        self.systems
            .iter()
            .flat_map(|s| s.curves.iter().map(|c| c.len()))
            .sum()
    }
}

/// Line angle of each sample's tangent.
pub fn tangent_angles(c: &ClosedCurve) -> Vec<f64> {
    c.tangents().into_iter().map(line_angle).collect()
}

/// Stadium: two half-circles of radius `r` joined by straight sides of length `2a`.
pub fn stadium(a: f64, r: f64, n: usize) -> Result<ClosedCurve> {
    use std::f64::consts::PI;
    let path = Path::new()
        .segment(Vec2::new(-a, -r), Vec2::new(a, -r))
        .arc(Vec2::new(a, 0.0), r, -PI / 2.0, PI)
        .segment(Vec2::new(a, r), Vec2::new(-a, r))
        .arc(Vec2::new(-a, 0.0), r, PI / 2.0, PI);
    Ok(path.sample(n, 1)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_chords_on_square() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let c = resample_arclength(&sq, 64).unwrap();
        assert!((c.length() - 4.0).abs() <= 0.004, "{}", c.length());
    }

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let w = trapezoid_weights(&[0.0, 0.1, 0.5, 1.0]);
        assert!((fsum(w) - 1.0).abs() < 1e-15);
    }
}
