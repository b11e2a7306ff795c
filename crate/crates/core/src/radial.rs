//! Radially symmetric fields: the oscillation, concentration and diffuse-concentration
//! sequences and their limits, discretised on polar quadrature cells aligned with every
//! breakpoint of the radial profile.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{GwvError, Result};
use crate::field::{Grid, JumpSet, Region, ScalarField};
use crate::curves::ClosedCurve;
use crate::geom::Vec2;
use crate::measure::{Particle, ParticleMeasure};
use crate::young::{symmetric_atoms, Atom, Cell, Layout, YoungMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalKind {
    Oscillation,
    Concentration,
    Diffuse,
}

impl CanonicalKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "osc" | "oscillation" => Ok(Self::Oscillation),
            "conc" | "concentration" => Ok(Self::Concentration),
            "concdiff" | "diffuse" => Ok(Self::Diffuse),
            _ => Err(GwvError::Invalid(format!("unknown example kind {s}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Oscillation => "osc",
            Self::Concentration => "conc",
            Self::Diffuse => "concdiff",
        }
    }

    /// Radius of the disk `Ω`.
    pub fn domain_radius(&self) -> f64 {
        match self {
            Self::Concentration => 2.0,
            _ => 1.0,
        }
    }
}

/// Piecewise-linear radial profile: `(r0, r1, du/dr)` pieces and jumps `(r, u(r⁺) − u(r⁻))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub pieces: Vec<(f64, f64, f64)>,
    pub jumps: Vec<(f64, f64)>,
    pub outer: f64,
}

/// Value of `u_h` at radius `r`.
pub fn canonical_value(kind: CanonicalKind, h: usize, r: f64) -> f64 {
    let hf = h as f64;
    match kind {
        CanonicalKind::Oscillation => {
            let step = 0.5f64.powi(h as i32);
            let k = (r / (2.0 * step)).floor();
            let base = 2.0 * k * step;
            if r - base <= step {
                r - base
            } else {
                base + 2.0 * step - r
            }
        }
        CanonicalKind::Concentration => {
            if (1.0..=1.0 + 1.0 / hf).contains(&r) {
                hf * (r - 1.0)
            } else if (1.0 - 1.0 / hf..1.0).contains(&r) {
                hf * (1.0 - r)
            } else {
                0.0
            }
        }
        CanonicalKind::Diffuse => {
            let k = (r * hf).floor();
            if k >= hf || r < 0.0 {
                return 0.0;
            }
            let s = r - k / hf;
            let w = 1.0 / (hf * hf);
            if s <= 0.5 * w {
                hf * s
            } else if s <= w {
                hf * (w - s)
            } else {
                0.0
            }
        }
    }
}

/// Exact piecewise description of `u_h`.
pub fn canonical_profile(kind: CanonicalKind, h: usize) -> Result<RadialProfile> {
    if h < 2 {
        return Err(GwvError::Invalid("h must be at least 2".into()));
    }
    let hf = h as f64;
    let mut pieces = Vec::new();
    let mut jumps = Vec::new();
    let outer = kind.domain_radius();
    match kind {
        CanonicalKind::Oscillation => {
            let step = 0.5f64.powi(h as i32);
            let n = 1usize << h;
            for i in 0..n {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                pieces.push((i as f64 * step, (i + 1) as f64 * step, s));
            }
        }
        CanonicalKind::Concentration => {
            let (a, b) = (1.0 - 1.0 / hf, 1.0 + 1.0 / hf);
            pieces.push((0.0, a, 0.0));
            pieces.push((a, 1.0, -hf));
            pieces.push((1.0, b, hf));
            pieces.push((b, outer, 0.0));
            jumps.push((a, 1.0));
            jumps.push((b, -1.0));
        }
        CanonicalKind::Diffuse => {
            let w = 1.0 / (hf * hf);
            for k in 0..h {
                let r0 = k as f64 / hf;
                pieces.push((r0, r0 + 0.5 * w, hf));
                pieces.push((r0 + 0.5 * w, r0 + w, -hf));
                pieces.push((r0 + w, (k + 1) as f64 / hf, 0.0));
            }
        }
    }
    Ok(RadialProfile {
        pieces,
        jumps,
        outer,
    })
}

/// Resolution of polar quadrature cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarOpts {
    pub n_theta: usize,
    /// Largest radial sub-interval away from the origin.
    pub max_dr: f64,
    /// Geometric ratio of sub-intervals adjacent to the origin.
    pub grade_ratio: f64,
    /// Innermost radius of graded intervals, relative to their outer radius.
    pub r_min_rel: f64,
    /// Particles per jump circle or concentration circle.
    pub circle_samples: usize,
    /// Resolution for pieces where the gradient vanishes.
    pub coarse_dr: f64,
    pub coarse_theta: usize,
}

impl Default for PolarOpts {
    fn default() -> Self {
        Self {
            n_theta: 64,
            max_dr: 2e-3,
            grade_ratio: 1.05,
            r_min_rel: 1e-16,
            circle_samples: 4096,
            coarse_dr: 0.05,
            coarse_theta: 32,
        }
    }
}

const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Radial quadrature `(r_q, ∫ r dr weight)` on `[r0, r1]`, graded toward the origin when `r0 = 0`.
pub fn radial_nodes(r0: f64, r1: f64, max_dr: f64, opts: &PolarOpts) -> Vec<(f64, f64)> {
    let mut breaks = Vec::new();
    if r0 == 0.0 {
        let mut r = r1;
        let r_min = r1 * opts.r_min_rel;
        // Uniform down to the scale where grading becomes finer than max_dr.
        let r_switch = (max_dr / (opts.grade_ratio - 1.0)).min(r1);
        let n_uniform = ((r1 - r_switch) / max_dr).ceil() as usize;
        for k in 0..n_uniform {
            breaks.push(r1 - (r1 - r_switch) * k as f64 / n_uniform as f64);
        }
        r = r.min(r_switch);
        while r > r_min {
            breaks.push(r);
            r /= opts.grade_ratio;
        }
        breaks.push(r_min);
        breaks.reverse();
    } else {
        let n = ((r1 - r0) / max_dr).ceil().max(1.0) as usize;
        for k in 0..=n {
            breaks.push(r0 + (r1 - r0) * k as f64 / n as f64);
        }
    }
    breaks.dedup();
    let mut out = Vec::with_capacity(4 * breaks.len());
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let r = mid + half * x;
            out.push((r, wt * half * r));
        }
    }
    out
}

/// Polar cells `(center, area)` covering the annulus `r0 < |x| < r1`.
pub fn polar_cells(r0: f64, r1: f64, max_dr: f64, n_theta: usize, opts: &PolarOpts) -> Vec<(Vec2, f64)> {
    let dtheta = TAU / n_theta as f64;
    let mut out = Vec::new();
    for (k, (r, wr)) in radial_nodes(r0, r1, max_dr, opts).into_iter().enumerate() {
        let shift = if k % 2 == 0 { 0.5 } else { 0.0 };
        for j in 0..n_theta {
            let th = dtheta * (j as f64 + shift);
            out.push((Vec2::from_angle(th) * r, wr * dtheta));
        }
    }
    out
}

/// `N` equally spaced points on the circle of radius `r` about the origin.
pub fn circle_points(r: f64, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| Vec2::from_angle(TAU * (i as f64 + 0.5) / n as f64) * r)
        .collect()
}

/// `ν_{Du}` of a radial profile on polar cells, with jump circles as concentration particles.
pub fn profile_young(profile: &RadialProfile, opts: &PolarOpts) -> YoungMeasure {
    let mut cells = Vec::new();
    for &(r0, r1, slope) in &profile.pieces {
        if slope == 0.0 {
            for (c, a) in polar_cells(r0, r1, opts.coarse_dr, opts.coarse_theta, opts) {
                cells.push(Cell {
                    center: c,
                    area: a,
                    atoms: vec![Atom::new(Vec2::ZERO, 1.0)],
                });
            }
        } else {
            for (c, a) in polar_cells(r0, r1, opts.max_dr, opts.n_theta, opts) {
                let dir = c.normalized().unwrap_or(Vec2::E1);
                cells.push(Cell {
                    center: c,
                    area: a,
                    atoms: vec![Atom::new(dir * slope, 1.0)],
                });
            }
        }
    }
    let mut lambda = Vec::new();
    let mut angular = Vec::new();
    for &(r, delta) in &profile.jumps {
        let n = opts.circle_samples;
        let w = delta.abs() * TAU * r / n as f64;
        for x in circle_points(r, n) {
            lambda.push(Particle { pos: x, w });
            angular.push(vec![Atom::new(x / r * delta.signum(), 1.0)]);
        }
    }
    YoungMeasure {
        layout: Layout::Free,
        cells,
        lambda: ParticleMeasure {
            particles: lambda,
            closure: true,
        },
        angular,
    }
}

/// `ν_{Du_h}` for the `h`-th member of a canonical sequence.
pub fn canonical_sequence_young(kind: CanonicalKind, h: usize, opts: &PolarOpts) -> Result<YoungMeasure> {
    Ok(profile_young(&canonical_profile(kind, h)?, opts))
}

/// The limit triplet of a canonical sequence.
pub fn canonical_limit_young(kind: CanonicalKind, opts: &PolarOpts) -> YoungMeasure {
    let outer = kind.domain_radius();
    let zero_cells = |r0: f64, r1: f64| -> Vec<Cell> {
        polar_cells(r0, r1, opts.coarse_dr, opts.coarse_theta, opts)
            .into_iter()
            .map(|(c, a)| Cell {
                center: c,
                area: a,
                atoms: vec![Atom::new(Vec2::ZERO, 1.0)],
            })
            .collect()
    };
    match kind {
        CanonicalKind::Oscillation => {
            let cells = polar_cells(0.0, 1.0, opts.max_dr, opts.n_theta, opts)
                .into_iter()
                .map(|(c, a)| {
                    let d = c.normalized().unwrap_or(Vec2::E1);
                    Cell {
                        center: c,
                        area: a,
                        atoms: symmetric_atoms(d),
                    }
                })
                .collect();
            YoungMeasure {
                layout: Layout::Free,
                cells,
                lambda: ParticleMeasure::empty(),
                angular: Vec::new(),
            }
        }
        CanonicalKind::Concentration => {
            let n = opts.circle_samples;
            let pts = circle_points(1.0, n);
            let w = 4.0 * TAU / n as f64;
            YoungMeasure {
                layout: Layout::Free,
                cells: zero_cells(0.0, outer),
                lambda: ParticleMeasure {
                    particles: pts.iter().map(|&pos| Particle { pos, w }).collect(),
                    closure: true,
                },
                angular: pts.iter().map(|&x| symmetric_atoms(x)).collect(),
            }
        }
        CanonicalKind::Diffuse => {
            let parts = polar_cells(0.0, 1.0, opts.max_dr, opts.n_theta, opts);
            YoungMeasure {
                layout: Layout::Free,
                cells: zero_cells(0.0, outer),
                lambda: ParticleMeasure {
                    particles: parts.iter().map(|&(pos, w)| Particle { pos, w }).collect(),
                    closure: true,
                },
                angular: parts
                    .iter()
                    .map(|&(x, _)| symmetric_atoms(x.normalized().unwrap_or(Vec2::E1)))
                    .collect(),
            }
        }
    }
}

/// Curvature of the circular level lines of a radial field, pointing toward the centre.
pub fn radial_curvature(x: Vec2) -> Vec2 {
    let r2 = x.norm2();
    if r2 == 0.0 {
        Vec2::ZERO
    } else {
        -x / r2
    }
}

/// A canonical sequence member sampled on a grid, with declared jumps and the closed-form limit.
#[derive(Debug, Clone)]
pub struct CanonicalExample {
    pub kind: CanonicalKind,
    pub h: usize,
    pub field: ScalarField,
    pub jumps: Option<JumpSet>,
    pub limit: YoungMeasure,
}

/// Grid sampling of `u_h` on `[-R, R]²` with `n × n` nodes, `Ω = B(0, R)`.
pub fn canonical_example(kind: CanonicalKind, h: usize, n: usize, opts: &PolarOpts) -> Result<CanonicalExample> {
    let (field, jumps) = canonical_field(kind, h, n)?;
    Ok(CanonicalExample {
        kind,
        h,
        field,
        jumps,
        limit: canonical_limit_young(kind, opts),
    })
}

/// The grid field and declared jump set of `u_h`.
pub fn canonical_field(kind: CanonicalKind, h: usize, n: usize) -> Result<(ScalarField, Option<JumpSet>)> {
    if h < 2 {
        return Err(GwvError::Invalid("h must be at least 2".into()));
    }
    let radius = kind.domain_radius();
    let grid = Grid::centered(radius * 1.02, n);
    let region = Region::Disk {
        center: Vec2::ZERO,
        radius,
    };
    let field = ScalarField::sample(grid, region, |x| canonical_value(kind, h, x.norm()))?;
    let jumps = match kind {
        CanonicalKind::Concentration => {
            let hf = h as f64;
            let samples = (8.0 * PI / grid.h).ceil() as usize;
            let inner = ClosedCurve::circle(Vec2::ZERO, 1.0 - 1.0 / hf, samples.max(64), 1)?;
            let outer = ClosedCurve::circle(Vec2::ZERO, 1.0 + 1.0 / hf, samples.max(64), 1)?;
            let mut js = JumpSet::from_curve(&inner, 1.0, false);
            js.add_curve(&outer, 1.0, true);
            Some(js)
        }
        _ => None,
    };
    Ok((field, jumps))
}

/// `W(V_{ν_h})` for the concentration sequence in closed form.
pub fn conc_energy_exact(h: usize, p: f64) -> f64 {
    let hf = h as f64;
    let (a, b) = (1.0 - 1.0 / hf, 1.0 + 1.0 / hf);
    let integral = (b.powf(2.0 - p) - a.powf(2.0 - p)) / (2.0 - p);
    8.0 * PI
        + TAU * hf * integral
        + TAU * ((hf / (hf + 1.0)).powf(p - 1.0) + (hf / (hf - 1.0)).powf(p - 1.0))
}

/// `π(4−p)/(2−p)`.
pub fn diffuse_limit_energy(p: f64) -> f64 {
    PI * (4.0 - p) / (2.0 - p)
}
