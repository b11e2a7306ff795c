//! Particle varifolds on `Ω × G(2,1)`: lines are stored as angles in `[0, π)`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::curves::{CurveSystem, LevelFamily};
use crate::error::{GwvError, Result};
use crate::geom::{line_angle, line_angle_gap, wrap_line_angle, Mat2, Rect, Vec2};
use crate::lsq::SparseRows;
use crate::measure::{Particle, ParticleMeasure, VParticle, VectorParticleMeasure};
use crate::spatial::PointIndex;
use crate::sum::{fsum, par_fsum, par_map};
use crate::young::YoungMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParticle {
    pub x: Vec2,
    /// Line angle in `[0, π)`.
    pub theta: f64,
    pub w: f64,
}

impl LineParticle {
    #[inline]
    pub fn tangent(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Varifold {
    pub particles: Vec<LineParticle>,
    /// Per-particle curvature vector, when the constructor knows it.
    pub curvature: Option<Vec<Vec2>>,
}

/// Where a particle of a Young varifold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Cell { cell: usize, atom: usize },
    Lambda { particle: usize, atom: usize },
}

/// Smooth compactly supported vector field with closed-form Jacobian.
pub trait VectorField: Sync {
    fn value(&self, x: Vec2) -> Vec2;
    /// `J[i][j] = ∂X_i/∂x_j`.
    fn jacobian(&self, x: Vec2) -> Mat2;
    /// `sup |X|`.
    fn sup_norm(&self) -> f64;
    /// Ball outside of which the field vanishes, if bounded.
    fn support(&self) -> Option<(Vec2, f64)>;
}

/// `X(x) = v (1 − |x−c|²/R²)³₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    pub center: Vec2,
    pub radius: f64,
    pub direction: Vec2,
}

impl TestField {
    /// Coordinate bump along `e₁` (`index = 1`) or `e₂` (`index = 2`).
    pub fn coordinate(center: Vec2, radius: f64, index: u8) -> Self {
        let direction = if index == 1 { Vec2::E1 } else { Vec2::E2 };
        Self {
            center,
            radius,
            direction,
        }
    }

    #[inline]
    pub fn profile(&self, x: Vec2) -> f64 {
        let s = 1.0 - (x - self.center).norm2() / (self.radius * self.radius);
        if s <= 0.0 {
            0.0
        } else {
            s * s * s
        }
    }

    #[inline]
    pub fn profile_gradient(&self, x: Vec2) -> Vec2 {
        let d = x - self.center;
        let r2 = self.radius * self.radius;
        let s = 1.0 - d.norm2() / r2;
        if s <= 0.0 {
            Vec2::ZERO
        } else {
            d * (-6.0 * s * s / r2)
        }
    }
}

impl VectorField for TestField {
    fn value(&self, x: Vec2) -> Vec2 {
        self.direction * self.profile(x)
    }
    fn jacobian(&self, x: Vec2) -> Mat2 {
        Mat2::outer(self.direction, self.profile_gradient(x))
    }
    fn sup_norm(&self) -> f64 {
        self.direction.norm()
    }
    fn support(&self) -> Option<(Vec2, f64)> {
        Some((self.center, self.radius))
    }
}

/// `C²` step equal to 1 on `[0, r0]` and 0 on `[r1, ∞)`, with derivative.
fn plateau(r: f64, r0: f64, r1: f64) -> (f64, f64) {
    if r <= r0 {
        (1.0, 0.0)
    } else if r >= r1 {
        (0.0, 0.0)
    } else {
        let l = r1 - r0;
        let s = (r - r0) / l;
        let smooth = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        let ds = 30.0 * s * s * (1.0 - s) * (1.0 - s) / l;
        (1.0 - smooth, -ds)
    }
}

/// `X(x) = (x − c) ψ(|x − c|)` with `ψ = 1` on `B(c, r0)` and `ψ = 0` outside `B(c, r1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPlateauField {
    pub center: Vec2,
    pub r0: f64,
    pub r1: f64,
}

impl VectorField for RadialPlateauField {
    fn value(&self, x: Vec2) -> Vec2 {
        let d = x - self.center;
        d * plateau(d.norm(), self.r0, self.r1).0
    }
    fn jacobian(&self, x: Vec2) -> Mat2 {
        let d = x - self.center;
        let r = d.norm();
        let (psi, dpsi) = plateau(r, self.r0, self.r1);
        let mut j = Mat2::IDENTITY.scale(psi);
        if r > 0.0 && dpsi != 0.0 {
            j = j + Mat2::outer(d, d).scale(dpsi / r);
        }
        j
    }
    fn sup_norm(&self) -> f64 {
        self.r1
    }
    fn support(&self) -> Option<(Vec2, f64)> {
        Some((self.center, self.r1))
    }
}

/// `X(x) = v ψ(|x − c|)`: constant on the plateau `B(c, r0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantPlateauField {
    pub center: Vec2,
    pub r0: f64,
    pub r1: f64,
    pub v: Vec2,
}

impl VectorField for ConstantPlateauField {
    fn value(&self, x: Vec2) -> Vec2 {
        self.v * plateau((x - self.center).norm(), self.r0, self.r1).0
    }
    fn jacobian(&self, x: Vec2) -> Mat2 {
        let d = x - self.center;
        let r = d.norm();
        let (_, dpsi) = plateau(r, self.r0, self.r1);
        if r > 0.0 && dpsi != 0.0 {
            Mat2::outer(self.v, d * (dpsi / r))
        } else {
            Mat2::ZERO
        }
    }
    fn sup_norm(&self) -> f64 {
        self.v.norm()
    }
    fn support(&self) -> Option<(Vec2, f64)> {
        Some((self.center, self.r1))
    }
}

impl Varifold {
    pub fn new(particles: Vec<LineParticle>) -> Result<Self> {
        for p in &particles {
            if !(p.w > 0.0) || !p.w.is_finite() || !p.x.is_finite() {
                return Err(GwvError::Invalid("varifold weights must be positive".into()));
            }
            if !(0.0..std::f64::consts::PI).contains(&p.theta) {
                return Err(GwvError::Invalid("line angle outside [0, π)".into()));
            }
        }
        Ok(Self {
            particles,
            curvature: None,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn with_curvature(mut self, h: Vec<Vec2>) -> Result<Self> {
        if h.len() != self.particles.len() {
            return Err(GwvError::Invalid("one curvature vector per particle required".into()));
        }
        self.curvature = Some(h);
        Ok(self)
    }

    pub fn with_curvature_fn(mut self, f: impl Fn(Vec2) -> Vec2) -> Self {
        self.curvature = Some(self.particles.iter().map(|p| f(p.x)).collect());
        self
    }

    /// Union of two varifolds; curvature is kept only if both carry it.
    pub fn union(&self, other: &Varifold) -> Varifold {
        let mut particles = self.particles.clone();
        particles.extend_from_slice(&other.particles);
        let curvature = match (&self.curvature, &other.curvature) {
            (Some(a), Some(b)) => {
                let mut c = a.clone();
                c.extend_from_slice(b);
                Some(c)
            }
            _ => None,
        };
        Varifold {
            particles,
            curvature,
        }
    }

    /// `μ_V`.
    pub fn weight_measure(&self) -> ParticleMeasure {
        ParticleMeasure {
            particles: self
                .particles
                .iter()
                .map(|p| Particle { pos: p.x, w: p.w })
                .collect(),
            closure: true,
        }
    }

    pub fn mass(&self) -> f64 {
        par_fsum(self.particles.len(), |i| self.particles[i].w)
    }

    /// `δV(X) = Σ w tᵀ ∇X t`.
    pub fn first_variation(&self, x: &dyn VectorField) -> f64 {
        par_fsum(self.particles.len(), |i| {
            let p = &self.particles[i];
            p.w * x.jacobian(p.x).quad(p.tangent())
        })
    }

    /// `−Σ w ⟨X, H⟩`, the first variation predicted by a curvature field.
    pub fn curvature_pairing(&self, x: &dyn VectorField, h: &[Vec2]) -> f64 {
        par_fsum(self.particles.len(), |i| {
            let p = &self.particles[i];
            -p.w * x.value(p.x).dot(h[i])
        })
    }

    /// `∫ g(x, θ) dV`.
    pub fn pair(&self, g: impl Fn(Vec2, f64) -> f64 + Sync + Send) -> f64 {
        par_fsum(self.particles.len(), |i| {
            let p = &self.particles[i];
            p.w * g(p.x, p.theta)
        })
    }

    /// `W(V) = Σ w (1 + |H|^p)` with `H` from `h_override`, else the stored curvature.
    pub fn willmore(&self, p: f64, h_override: Option<&[Vec2]>) -> Result<f64> {
        if !(p > 1.0) {
            return Err(GwvError::BadExponent);
        }
        let h = match h_override {
            Some(h) => h,
            None => self.curvature.as_deref().ok_or(GwvError::NoCurvature)?,
        };
        if h.len() != self.particles.len() {
            return Err(GwvError::Invalid("curvature length mismatch".into()));
        }
        Ok(par_fsum(self.particles.len(), |i| {
            self.particles[i].w * (1.0 + h[i].norm().powf(p))
        }))
    }

    /// `(H μ_V, μ_V)` with particles at a common position merged, for semicontinuity probes.
    pub fn curvature_measures(&self) -> Result<(VectorParticleMeasure, ParticleMeasure)> {
        let h = self.curvature.as_deref().ok_or(GwvError::NoCurvature)?;
        let mut slot: HashMap<(u64, u64), usize> = HashMap::new();
        let mut pos: Vec<Vec2> = Vec::new();
        let mut acc: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new();
        for (p, hk) in self.particles.iter().zip(h) {
            let i = *slot.entry((p.x.x.to_bits(), p.x.y.to_bits())).or_insert_with(|| {
                pos.push(p.x);
                acc.push(Default::default());
                pos.len() - 1
            });
            acc[i].0.push(p.w);
            acc[i].1.push(p.w * hk.x);
            acc[i].2.push(p.w * hk.y);
        }
        let mut vp = Vec::with_capacity(pos.len());
        let mut mp = Vec::with_capacity(pos.len());
        for (x, (w, hx, hy)) in pos.into_iter().zip(acc) {
            mp.push(Particle { pos: x, w: fsum(w) });
            vp.push(VParticle { pos: x, w: Vec2::new(fsum(hx), fsum(hy)) });
        }
        Ok((VectorParticleMeasure::new(vp)?, ParticleMeasure::new(mp)?))
    }

    /// `v(Γ, θ_Γ)` with curvature from second differences.
    pub fn from_curve_system(sys: &CurveSystem) -> Varifold {
        Self::from_curve_system_weighted(sys, 1.0)
    }

    fn from_curve_system_weighted(sys: &CurveSystem, scale: f64) -> Varifold {
        let mut particles = Vec::new();
        let mut h = Vec::new();
        for c in &sys.curves {
            let w = c.multiplicity as f64 * c.spacing() * scale;
            for ((x, t), k) in c.samples().iter().zip(c.tangents()).zip(c.curvature()) {
                particles.push(LineParticle {
                    x: *x,
                    theta: line_angle(t),
                    w,
                });
                h.push(k);
            }
        }
        Varifold {
            particles,
            curvature: Some(h),
        }
    }

    /// `∫ v(Φ(t), θ_{Φ(t)}) dt` with trapezoid weights.
    pub fn from_level_family(phi: &LevelFamily) -> Varifold {
        let mut out = Varifold {
            particles: Vec::new(),
            curvature: Some(Vec::new()),
        };
        for (sys, w) in phi.systems.iter().zip(phi.weights()) {
            if w > 0.0 {
                out = out.union(&Self::from_curve_system_weighted(sys, w));
            }
        }
        out
    }

    /// `V_ν`: each atom `z ≠ 0` of a cell gives a particle on the line `z^⊥` with weight
    /// `area·p·|z|`; each angular atom `d` of a concentration particle gives weight `w·q` on
    /// `d^⊥`. Atoms of one source that land on the same line are merged.
    pub fn from_young(nu: &YoungMeasure) -> Varifold {
        Self::from_young_with_sources(nu).0
    }

    pub fn from_young_with_sources(nu: &YoungMeasure) -> (Varifold, Vec<Source>) {
        let mut particles = Vec::new();
        let mut sources = Vec::new();
        let mut push_merged = |x: Vec2, items: Vec<(f64, f64, Source)>| {
            let mut merged: Vec<(f64, Vec<f64>, Source)> = Vec::new();
            for (theta, w, src) in items {
                if let Some(m) = merged.iter_mut().find(|m| line_angle_gap(m.0, theta) < 1e-12) {
                    m.1.push(w);
                } else {
                    merged.push((theta, vec![w], src));
                }
            }
            for (theta, ws, src) in merged {
                let w = fsum(ws);
                if w > 0.0 {
                    particles.push(LineParticle { x, theta, w });
                    sources.push(src);
                }
            }
        };
        for (ci, c) in nu.cells.iter().enumerate() {
            let items = c
                .atoms
                .iter()
                .enumerate()
                .filter(|(_, a)| a.z != Vec2::ZERO && a.p > 0.0)
                .map(|(ai, a)| {
                    (
                        wrap_line_angle(a.z.angle() + std::f64::consts::FRAC_PI_2),
                        c.area * a.p * a.z.norm(),
                        Source::Cell { cell: ci, atom: ai },
                    )
                })
                .collect();
            push_merged(c.center, items);
        }
        for (k, (p, list)) in nu.lambda.particles.iter().zip(&nu.angular).enumerate() {
            if p.w <= 0.0 {
                continue;
            }
            let items = list
                .iter()
                .enumerate()
                .filter(|(_, a)| a.p > 0.0)
                .map(|(ai, a)| {
                    (
                        wrap_line_angle(a.z.angle() + std::f64::consts::FRAC_PI_2),
                        p.w * a.p,
                        Source::Lambda { particle: k, atom: ai },
                    )
                })
                .collect();
            push_merged(p.pos, items);
        }
        (
            Varifold {
                particles,
                curvature: None,
            },
            sources,
        )
    }

    /// Median nearest-neighbour distance among distinct particle positions.
    pub fn particle_spacing(&self) -> f64 {
        let mut pos: Vec<Vec2> = self.particles.iter().map(|p| p.x).collect();
        pos.sort_by(|a, b| a.lex_cmp(b));
        pos.dedup();
        if pos.len() < 2 {
            return 0.0;
        }
        let diam = crate::geom::Rect::bounding(pos.iter().copied())
            .map(|r| r.diameter())
            .unwrap_or(1.0);
        let guess = diam / (pos.len() as f64).sqrt().max(1.0);
        let index = PointIndex::new(&pos, guess.max(1e-12));
        let mut d: Vec<f64> = par_map(&pos, |&x| {
            let mut r = guess;
            loop {
                let mut best = f64::INFINITY;
                index.for_each_within(x, r, |_, d2| {
                    if d2 > 0.0 && d2 < best {
                        best = d2;
                    }
                });
                if best.is_finite() {
                    return best.sqrt();
                }
                r *= 2.0;
                if r > 4.0 * diam + 1.0 {
                    return f64::INFINITY;
                }
            }
        });
        d.sort_by(f64::total_cmp);
        d[d.len() / 2]
    }
}

/// Parameters of the least-squares curvature inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureOpts {
    /// Battery lattice spacing in particle spacings.
    pub spacing_factor: f64,
    /// Bump radius in lattice spacings.
    pub radius_factor: f64,
    /// Tikhonov weight.
    pub reg: f64,
    /// Smoothing neighbourhood in particle spacings.
    pub neighbourhood: f64,
    pub max_iter: usize,
    /// Domain `Ω`: only bumps whose support lies inside are used.
    pub window: Option<Rect>,
}

impl Default for CurvatureOpts {
    fn default() -> Self {
        Self {
            spacing_factor: 4.0,
            radius_factor: 2.0,
            reg: 1e-3,
            neighbourhood: 3.0,
            max_iter: 4000,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureEstimate {
    pub h: Vec<Vec2>,
    /// `max_j |δV(X_j) + Σ w ⟨X_j, H⟩| / (1 + sup|X_j|)`.
    pub residual: f64,
    pub reg: f64,
    /// Number of bumps whose support contains each particle.
    pub coverage: Vec<usize>,
    pub equations: usize,
    pub iterations: usize,
}

/// Fits `H` so that `δV(X_j) = −Σ w_k ⟨X_j(x_k), H_k⟩` over a lattice of coordinate bumps, with
/// a Tikhonov penalty pulling each `H_k` toward its weighted neighbourhood mean.
pub fn estimate_curvature(v: &Varifold, opts: &CurvatureOpts) -> Result<CurvatureEstimate> {
    let n = v.len();
    if n == 0 {
        return Err(GwvError::Degenerate("empty varifold".into()));
    }
    let sp = v.particle_spacing();
    if !(sp > 0.0 && sp.is_finite()) {
        return Err(GwvError::Degenerate("particles have no spacing".into()));
    }
    let s = opts.spacing_factor * sp;
    let radius = opts.radius_factor * s;
    let pos: Vec<Vec2> = v.particles.iter().map(|p| p.x).collect();
    let index = PointIndex::new(&pos, radius);

    let reach = (radius / s).ceil() as i64 + 1;
    let mut centers: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut clusters: BTreeSet<(i64, i64)> = BTreeSet::new();
    for &x in &pos {
        let (ci, cj) = ((x.x / s).round() as i64, (x.y / s).round() as i64);
        clusters.insert(((x.x / s).floor() as i64, (x.y / s).floor() as i64));
        for di in -reach..=reach {
            for dj in -reach..=reach {
                let c = Vec2::new((ci + di) as f64 * s, (cj + dj) as f64 * s);
                let inside = opts.window.map_or(true, |w| w.inner_distance(c) >= radius);
                if inside && c.dist(x) < radius {
                    centers.insert((ci + di, cj + dj));
                }
            }
        }
    }
    let centers: Vec<Vec2> = centers
        .into_iter()
        .map(|(i, j)| Vec2::new(i as f64 * s, j as f64 * s))
        .collect();
    let equations = 2 * centers.len();
    if equations < 2 * clusters.len() {
        return Err(GwvError::Underdetermined {
            equations,
            clusters: clusters.len(),
        });
    }

    struct Row {
        idx: Vec<(usize, f64)>,
        dv: [f64; 2],
    }
    let rows: Vec<Row> = par_map(&centers, |&c| {
        let bump = TestField::coordinate(c, radius, 1);
        let mut idx = Vec::new();
        let mut terms0 = Vec::new();
        let mut terms1 = Vec::new();
        for k in index.within(c, radius) {
            let p = &v.particles[k];
            let phi = bump.profile(p.x);
            if phi <= 0.0 {
                continue;
            }
            let t = p.tangent();
            let g = bump.profile_gradient(p.x).dot(t);
            terms0.push(p.w * t.x * g);
            terms1.push(p.w * t.y * g);
            idx.push((k, p.w * phi));
        }
        Row {
            idx,
            dv: [fsum(terms0), fsum(terms1)],
        }
    });
    let mut coverage = vec![0usize; n];
    for r in &rows {
        for &(k, _) in &r.idx {
            coverage[k] += 1;
        }
    }

    let nb_radius = opts.neighbourhood * sp;
    let neighbours: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|k| {
            let list: Vec<usize> = index
                .within(pos[k], nb_radius)
                .into_iter()
                .filter(|&j| j != k)
                .collect();
            let total = fsum(list.iter().map(|&j| v.particles[j].w));
            if total > 0.0 {
                list.iter().map(|&j| (j, v.particles[j].w / total)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();

    let mut h = vec![Vec2::ZERO; n];
    let mut iterations = 0;
    for comp in 0..2 {
        let mut a = SparseRows::new(n);
        for r in &rows {
            if !r.idx.is_empty() {
                a.push(r.idx.clone(), -r.dv[comp]);
            }
        }
        for k in 0..n {
            let sw = (opts.reg * v.particles[k].w).sqrt();
            let mut row = vec![(k, sw)];
            for &(j, c) in &neighbours[k] {
                row.push((j, -sw * c));
            }
            a.push(row, 0.0);
        }
        let sol = a.solve(opts.max_iter, 1e-12);
        iterations = iterations.max(sol.iterations);
        for k in 0..n {
            if comp == 0 {
                h[k].x = sol.x[k];
            } else {
                h[k].y = sol.x[k];
            }
        }
    }

    let residual = rows
        .iter()
        .map(|r| {
            let mut out = 0.0f64;
            for comp in 0..2 {
                let pred = fsum(r.idx.iter().map(|&(k, c)| c * if comp == 0 { h[k].x } else { h[k].y }));
                out = out.max((r.dv[comp] + pred).abs() / 2.0);
            }
            out
        })
        .fold(0.0, f64::max);
    Ok(CurvatureEstimate {
        h,
        residual,
        reg: opts.reg,
        coverage,
        equations,
        iterations,
    })
}

/// `‖δV‖(B_r)/μ_V(B_r)` with `‖δV‖(B_r)` estimated as the supremum of `|δV(X)|` over unit bumps
/// centred at `center` (8 directions × radii `r, 2r/3, r/3`).
pub fn singular_ratio(v: &Varifold, center: Vec2, radii: &[f64]) -> Result<Vec<f64>> {
    if radii.len() < 4 || radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(GwvError::Invalid("need at least 4 decreasing radii".into()));
    }
    let mu = v.weight_measure();
    let pos: Vec<Vec2> = v.particles.iter().map(|p| p.x).collect();
    let index = PointIndex::new(&pos, radii[0] / 4.0);
    radii
        .iter()
        .map(|&r| {
            let local: Vec<usize> = index.within(center, r);
            let mass = fsum(local.iter().map(|&k| mu.particles[k].w));
            let mut best = 0.0f64;
            for scale in [1.0, 2.0 / 3.0, 1.0 / 3.0] {
                for d in 0..8 {
                    let dir = Vec2::from_angle(std::f64::consts::PI * d as f64 / 4.0);
                    let bump = TestField {
                        center,
                        radius: r * scale,
                        direction: dir,
                    };
                    let val = fsum(local.iter().map(|&k| {
                        let p = &v.particles[k];
                        p.w * bump.jacobian(p.x).quad(p.tangent())
                    }));
                    best = best.max(val.abs());
                }
            }
            Ok(if mass > 0.0 { best / mass } else { 0.0 })
        })
        .collect()
}

/// Ratios `profile[i+1]/profile[i]`.
pub fn growth_factors(profile: &[f64]) -> Vec<f64> {
    profile.windows(2).map(|w| w[1] / w[0]).collect()
}

/// Groups particles with identical position and line, summing weights.
pub fn canonicalize(v: &Varifold) -> Varifold {
    let mut map: HashMap<(u64, u64, u64), usize> = HashMap::new();
    let mut out: Vec<LineParticle> = Vec::new();
    for p in &v.particles {
        let key = (p.x.x.to_bits(), p.x.y.to_bits(), p.theta.to_bits());
        match map.get(&key) {
            Some(&i) => out[i].w += p.w,
            None => {
                map.insert(key, out.len());
                out.push(*p);
            }
        }
    }
    Varifold {
        particles: out,
        curvature: None,
    }
}
