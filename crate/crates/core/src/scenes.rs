//! Parametric scene geometries: disk and doubled-circle indicators, the cusp figure, the
//! four-lobe cross, and the triple/tri-segment junction varifolds.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::curves::{winding_crossings, ClosedCurve, CurveSystem, LevelFamily, Path};
use crate::error::Result;
use crate::field::{Grid, JumpParticle, JumpSet, Region, ScalarField};
use crate::geom::{line_angle, Rect, Vec2};
use crate::varifold::{LineParticle, Varifold};

/// An indicator field `u = 1_E` with its jump set and a constant level family on `t ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct IndicatorScene {
    pub u: ScalarField,
    pub jumps: JumpSet,
    pub phi: LevelFamily,
    /// Second-difference curvature of each jump particle, taken from the curve that carries it.
    pub jump_curvature: Vec<Vec2>,
    pub band: f64,
}

/// Uniform levels `k/(n−1)` on `[0, 1]`.
pub fn unit_levels(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Samples on a path of length `len` at spacing close to `ds`.
fn count_for(len: f64, ds: f64) -> usize {
    ((len / ds).round() as usize).max(64)
}

/// Teardrop lobe of unit curvature with its cusp tip at `tip`, pointing toward `−e₁`: leaves
/// the tip along `+e₁`, turns around the circle centred at `tip + (√3, 0)` and returns along
/// `−e₁`. Traversed with the lobe on the left.
pub fn teardrop(tip: Vec2) -> Path {
    let s3 = 3f64.sqrt();
    Path::new()
        .arc(tip + Vec2::new(0.0, -1.0), 1.0, FRAC_PI_2, -PI / 3.0)
        .arc(tip + Vec2::new(s3, 0.0), 1.0, 7.0 * PI / 6.0, 5.0 * PI / 3.0)
        .arc(tip + Vec2::new(0.0, 1.0), 1.0, 11.0 * PI / 6.0, -PI / 3.0)
}

/// Length of [`teardrop`].
pub const TEARDROP_LENGTH: f64 = 7.0 * PI / 3.0;

/// Indicator scene for lobes listed as `(curve, mask)` pairs: masked samples bound `E` (on their
/// left), the rest is ghost trace.
fn lobes_scene(
    curves: Vec<(ClosedCurve, Vec<bool>)>,
    half: f64,
    grid_n: usize,
    levels: usize,
) -> Result<IndicatorScene> {
    let grid = Grid::centered(half, grid_n);
    let band = 2.0 * grid.h;
    let region = Region::Box {
        rect: Rect::square(half - 4.0 * grid.h),
    };
    let mut jumps = JumpSet::new();
    let mut jump_curvature = Vec::new();
    let mut boundaries: Vec<Vec<Vec2>> = Vec::new();
    for (c, mask) in &curves {
        let tangents = c.tangents();
        let kappa = c.curvature();
        let n = c.len();
        let start = (0..n).find(|&i| mask[i] && !mask[(i + n - 1) % n]);
        let Some(start) = start else { continue };
        let mut run: Vec<usize> = Vec::new();
        for k in 0..n {
            let i = (start + k) % n;
            if mask[i] {
                run.push(i);
            } else if !run.is_empty() {
                push_run(c, &tangents, &kappa, &run, &mut jumps, &mut jump_curvature, &mut boundaries);
                run.clear();
            }
        }
        if !run.is_empty() {
            push_run(c, &tangents, &kappa, &run, &mut jumps, &mut jump_curvature, &mut boundaries);
        }
    }
    let u = ScalarField::sample(grid, region, |x| {
        let inside = boundaries.iter().any(|b| winding_crossings(b, x) != 0);
        if inside {
            1.0
        } else {
            0.0
        }
    })?;
    let system = CurveSystem::new(curves.into_iter().map(|(c, _)| c).collect());
    let phi = LevelFamily::constant(unit_levels(levels), system)?;
    Ok(IndicatorScene {
        u,
        jumps,
        phi,
        jump_curvature,
        band,
    })
}

fn push_run(
    c: &ClosedCurve,
    tangents: &[Vec2],
    kappa: &[Vec2],
    run: &[usize],
    jumps: &mut JumpSet,
    jump_curvature: &mut Vec<Vec2>,
    boundaries: &mut Vec<Vec<Vec2>>,
) {
    let x = c.samples();
    let poly: Vec<Vec2> = run.iter().map(|&i| x[i]).collect();
    jumps.add_particles(
        run.iter().map(|&i| JumpParticle {
            pos: x[i],
            normal: tangents[i].perp(),
            gap: 1.0,
            ds: c.spacing(),
        }),
        poly.clone(),
    );
    jump_curvature.extend(run.iter().map(|&i| kappa[i]));
    boundaries.push(poly);
}

/// `u = 1_{B(0,1)}` on `[−2, 2]²` with `Φ(t) = ∂B(0,1)` of multiplicity `multiplicity`.
pub fn disk_scene(grid_n: usize, levels: usize, samples: usize, multiplicity: u32) -> Result<IndicatorScene> {
    let circle = ClosedCurve::circle(Vec2::ZERO, 1.0, samples, multiplicity)?;
    let grid = Grid::centered(2.0, grid_n);
    let region = Region::Disk {
        center: Vec2::ZERO,
        radius: 1.9,
    };
    let boundary = circle.with_multiplicity(1);
    let jumps = JumpSet::from_curve(&boundary, 1.0, true);
    let u = ScalarField::sample(grid, region, |x| {
        if boundary.winding_crossings(x) != 0 {
            1.0
        } else {
            0.0
        }
    })?;
    let jump_curvature = boundary.curvature();
    let phi = LevelFamily::constant(unit_levels(levels), CurveSystem::new(vec![circle]))?;
    Ok(IndicatorScene {
        u,
        jumps,
        phi,
        jump_curvature,
        band: 2.0 * grid.h,
    })
}

/// Cusp figure: two teardrop lobes whose tips `(±L/2, 0)` face each other, joined by the doubled
/// ghost segment between the tips. `Φ(t)` is the single `C¹` curve running segment, right lobe,
/// segment back, left lobe.
pub fn cusp_scene(l: f64, grid_n: usize, levels: usize, ds: f64) -> Result<IndicatorScene> {
    let a = Vec2::new(-0.5 * l, 0.0);
    let b = Vec2::new(0.5 * l, 0.0);
    let path = Path::new()
        .segment(a, b)
        .then(&teardrop(b))
        .segment(b, a)
        .then(&teardrop(b).transformed(PI, Vec2::ZERO));
    let (gamma, labels) = path.sample(count_for(path.length(), ds), 1)?;
    let mask = labels.iter().map(|&k| k != 0 && k != 4).collect();
    lobes_scene(vec![(gamma, mask)], 0.5 * l + 3f64.sqrt() + 1.6, grid_n, levels)
}

/// Four teardrop lobes with tips at distance `L/2` from the origin on the axes, spikes pointing
/// inward. `Φ(t)` joins neighbouring tips (right–top, left–bottom) by doubled quarter circles of
/// radius `L/2`.
pub fn cross_scene(l: f64, grid_n: usize, levels: usize, ds: f64) -> Result<IndicatorScene> {
    let r = 0.5 * l;
    let tip = Vec2::new(r, 0.0);
    let corner = Vec2::new(r, r);
    let pair = teardrop(tip)
        .arc(corner, r, -FRAC_PI_2, -FRAC_PI_2)
        .then(&teardrop(tip).transformed(FRAC_PI_2, Vec2::ZERO))
        .arc(corner, r, PI, FRAC_PI_2);
    let other = pair.transformed(PI, Vec2::ZERO);
    let mut curves = Vec::new();
    for p in [pair, other] {
        let (c, labels) = p.sample(count_for(p.length(), ds), 1)?;
        let mask = labels.iter().map(|&k| k != 3 && k != 7).collect();
        curves.push((c, mask));
    }
    lobes_scene(curves, r + 3f64.sqrt() + 1.6, grid_n, levels)
}

/// Ghost particles of the straight cross: doubled segments from the origin to the four tips at
/// distance `L/2`, spacing close to `ds`.
pub fn straight_cross(l: f64, ds: f64) -> Vec<(Vec2, Vec2, f64)> {
    let r = 0.5 * l;
    let n = ((r / ds).round() as usize).max(1);
    let step = r / n as f64;
    let mut out = Vec::new();
    for k in 0..4 {
        let d = Vec2::from_angle(FRAC_PI_2 * k as f64);
        for i in 0..n {
            out.push((d * ((i as f64 + 0.5) * step), d.perp(), 2.0 * step));
        }
    }
    out
}

/// Three unit segments from the origin along `0°, 90°, 225°`.
pub fn trisegment(n: usize) -> Result<Varifold> {
    let ds = 1.0 / n as f64;
    let mut particles = Vec::with_capacity(3 * n);
    for deg in [0.0f64, 90.0, 225.0] {
        let d = Vec2::from_angle(deg.to_radians());
        let theta = line_angle(d);
        for k in 0..n {
            particles.push(LineParticle {
                x: d * ((k as f64 + 0.5) * ds),
                theta,
                w: ds,
            });
        }
    }
    Ok(Varifold::new(particles)?.with_curvature_fn(|_| Vec2::ZERO))
}

/// Triple junction with branches leaving the origin at `90°, 210°, 330°`: the vertical branch is
/// straight, the other two are unit-curvature arcs bending toward `+e₂`, mirror images of each
/// other. Conormals at the junction sum to zero.
pub fn triple_junction(n: usize) -> Result<Varifold> {
    let ds = 1.0 / n as f64;
    let s = 0.75f64.sqrt();
    let branches = [
        (Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0), 0.0),
        (Vec2::new(-s, -0.5), Vec2::new(-0.5, s), 1.0),
        (Vec2::new(s, -0.5), Vec2::new(0.5, s), 1.0),
    ];
    let mut particles = Vec::with_capacity(3 * n);
    let mut h = Vec::with_capacity(3 * n);
    for (d, nrm, kappa) in branches {
        for k in 0..n {
            let t = (k as f64 + 0.5) * ds;
            let (x, tan) = if kappa == 0.0 {
                (d * t, d)
            } else {
                let a: f64 = kappa * t;
                (
                    d * (a.sin() / kappa) + nrm * ((1.0 - a.cos()) / kappa),
                    d * a.cos() + nrm * a.sin(),
                )
            };
            particles.push(LineParticle {
                x,
                theta: line_angle(tan),
                w: ds,
            });
            h.push(tan.perp() * kappa * if tan.perp().dot(nrm) >= 0.0 { 1.0 } else { -1.0 });
        }
    }
    Varifold::new(particles)?.with_curvature(h)
}
