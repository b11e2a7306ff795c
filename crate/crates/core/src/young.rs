//! Generalized Young measures `(ν_x, λ_ν, ν_x^∞)` in discrete form.

use serde::{Deserialize, Serialize};

use crate::error::{GwvError, Result};
use crate::field::{JumpSet, Region, ScalarField};
use crate::geom::Vec2;
use crate::measure::{Integrand, Particle, ParticleMeasure, VParticle, VectorParticleMeasure};
use crate::sum::{fsum, fsum_vec, par_map};

/// Probability atom `p δ_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: Vec2,
    pub p: f64,
}

impl Atom {
    pub fn new(z: Vec2, p: f64) -> Self {
        Self { z, p }
    }
}

/// A region of `Ω` of the given area over which `ν_x` is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub center: Vec2,
    pub area: f64,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    /// Cells are the in-domain nodes of a grid, in row-major order.
    Cartesian {
        nx: usize,
        ny: usize,
        origin: Vec2,
        h: f64,
    },
    /// Arbitrary cells (polar rings, quadrature nodes, coarse blocks).
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungMeasure {
    pub layout: Layout,
    pub cells: Vec<Cell>,
    pub lambda: ParticleMeasure,
    /// Angular atoms `ν^∞` for each particle of `lambda` (unit `z`).
    pub angular: Vec<Vec<Atom>>,
}

/// Symmetric angular measure `½δ_n + ½δ_{−n}`.
pub fn symmetric_atoms(n: Vec2) -> Vec<Atom> {
    vec![Atom::new(n, 0.5), Atom::new(-n, 0.5)]
}

impl YoungMeasure {
    pub fn new(
        layout: Layout,
        cells: Vec<Cell>,
        lambda: ParticleMeasure,
        angular: Vec<Vec<Atom>>,
    ) -> Result<Self> {
        let ym = Self {
            layout,
            cells,
            lambda,
            angular,
        };
        ym.validate()?;
        Ok(ym)
    }

    /// The trivial triplet `(δ₀, 0, ·)` on the given cells.
    pub fn zero(cells: &[(Vec2, f64)]) -> Self {
        Self {
            layout: Layout::Free,
            cells: cells
                .iter()
                .map(|&(center, area)| Cell {
                    center,
                    area,
                    atoms: vec![Atom::new(Vec2::ZERO, 1.0)],
                })
                .collect(),
            lambda: ParticleMeasure::empty(),
            angular: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            if c.atoms.is_empty() || c.atoms.len() > 8 {
                return Err(GwvError::Invalid("each cell needs 1 to 8 atoms".into()));
            }
            let s = fsum(c.atoms.iter().map(|a| a.p));
            if (s - 1.0).abs() > 1e-12 || c.atoms.iter().any(|a| a.p < 0.0 || !a.z.is_finite()) {
                return Err(GwvError::Invalid(format!("cell probabilities sum to {s}")));
            }
            if !(c.area >= 0.0) {
                return Err(GwvError::Invalid("negative cell area".into()));
            }
        }
        if self.angular.len() != self.lambda.len() {
            return Err(GwvError::Invalid(
                "one angular list per concentration particle required".into(),
            ));
        }
        for list in &self.angular {
            if list.is_empty() {
                continue;
            }
            let s = fsum(list.iter().map(|a| a.p));
            if (s - 1.0).abs() > 1e-12 {
                return Err(GwvError::Invalid(format!("angular probabilities sum to {s}")));
            }
            if list.iter().any(|a| (a.z.norm() - 1.0).abs() > 1e-9) {
                return Err(GwvError::Invalid("angular atoms must be unit vectors".into()));
            }
        }
        Ok(())
    }

    /// `Σ_cells area Σ p |z| + λ(Ω̄)`.
    pub fn first_moment(&self) -> f64 {
        fsum(
            self.cells
                .iter()
                .flat_map(|c| c.atoms.iter().map(move |a| c.area * a.p * a.z.norm())),
        ) + self.lambda.total_mass()
    }

    /// `⟨⟨ν, f⟩⟩`.
    pub fn pairing(&self, f: &Integrand) -> Result<f64> {
        let osc: Vec<f64> = par_map(&self.cells, |c| {
            fsum(c.atoms.iter().map(|a| c.area * a.p * f.eval(c.center, a.z)))
        });
        let mut terms = osc;
        let lm = self.lambda.total_mass();
        if lm > 0.0 {
            if !f.has_recession() {
                return Err(GwvError::MissingRecession);
            }
            for (p, list) in self.lambda.particles.iter().zip(&self.angular) {
                if p.w == 0.0 {
                    continue;
                }
                if list.is_empty() {
                    return Err(GwvError::MissingRecession);
                }
                for a in list {
                    terms.push(p.w * a.p * f.eval_inf(p.pos, a.z)?);
                }
            }
        }
        if terms.iter().any(|t| t.is_nan()) {
            return Err(GwvError::NonFiniteIntegrand);
        }
        Ok(fsum(terms))
    }

    /// `Bar_ν = (∫ z dν_x) ℒ² + (∫ d dν^∞_x) λ`.
    pub fn barycenter(&self) -> VectorParticleMeasure {
        let mut particles: Vec<VParticle> = self
            .cells
            .iter()
            .map(|c| VParticle {
                pos: c.center,
                w: fsum_vec(c.atoms.iter().map(|a| a.z * a.p)) * c.area,
            })
            .collect();
        for (p, list) in self.lambda.particles.iter().zip(&self.angular) {
            particles.push(VParticle {
                pos: p.pos,
                w: fsum_vec(list.iter().map(|a| a.z * a.p)) * p.w,
            });
        }
        particles.retain(|p| p.w != Vec2::ZERO);
        VectorParticleMeasure { particles }
    }

    /// `a + b` for `b` with `ν_x = δ₀`: oscillation part of `a`, concatenated concentrations.
    /// Pairing is additive for integrands with `f(x, 0) = 0`.
    pub fn add(&self, b: &YoungMeasure) -> Result<YoungMeasure> {
        if b.cells.iter().any(|c| c.atoms.iter().any(|a| a.z != Vec2::ZERO)) {
            return Err(GwvError::NotGyZero);
        }
        if !b.cells.is_empty() && b.cells.len() != self.cells.len() {
            return Err(GwvError::GridMismatch);
        }
        let mut angular = self.angular.clone();
        angular.extend(b.angular.iter().cloned());
        Ok(YoungMeasure {
            layout: self.layout.clone(),
            cells: self.cells.clone(),
            lambda: self.lambda.concat(&b.lambda),
            angular,
        })
    }

    pub fn with_lambda(mut self, lambda: ParticleMeasure, angular: Vec<Vec<Atom>>) -> Self {
        self.lambda = lambda;
        self.angular = angular;
        self
    }
}

/// `ν_{Du}` of a sampled field: one atom at the node gradient per in-domain node, and the
/// jump part `|u⁺ − u⁻| H¹⌞J_u` with `ν^∞ = δ_n`.
pub fn from_bv(u: &ScalarField, jumps: Option<&JumpSet>) -> Result<YoungMeasure> {
    let blocked = match jumps {
        Some(j) => Some(j.blocked_edges(&u.grid)?),
        None => None,
    };
    let grad = u.gradient(blocked.as_ref());
    let area = u.cell_area();
    let cells = u
        .domain_nodes()
        .into_iter()
        .map(|(i, j)| {
            let mut g = grad.values[u.grid.index(i, j)];
            if g.norm() < u.gradient_floor {
                g = Vec2::ZERO;
            }
            Cell {
                center: u.grid.node(i, j),
                area,
                atoms: vec![Atom::new(g, 1.0)],
            }
        })
        .collect();
    let (lambda, angular) = match jumps {
        Some(js) => {
            let parts: Vec<Particle> = js
                .particles
                .iter()
                .map(|p| Particle {
                    pos: p.pos,
                    w: p.gap * p.ds,
                })
                .collect();
            let ang = js.particles.iter().map(|p| vec![Atom::new(p.normal, 1.0)]).collect();
            (ParticleMeasure::new(parts)?, ang)
        }
        None => (ParticleMeasure::empty(), Vec::new()),
    };
    Ok(YoungMeasure {
        layout: Layout::Cartesian {
            nx: u.grid.nx,
            ny: u.grid.ny,
            origin: u.grid.origin,
            h: u.grid.h,
        },
        cells,
        lambda,
        angular,
    })
}

/// `Du` of a sampled field with declared jumps, using the same node stencils as [`from_bv`].
pub fn du_measure(u: &ScalarField, jumps: Option<&JumpSet>) -> Result<VectorParticleMeasure> {
    let blocked = match jumps {
        Some(j) => Some(j.blocked_edges(&u.grid)?),
        None => None,
    };
    let grad = u.gradient(blocked.as_ref());
    let area = u.cell_area();
    let mut particles: Vec<VParticle> = u
        .domain_nodes()
        .into_iter()
        .filter_map(|(i, j)| {
            let g = grad.values[u.grid.index(i, j)];
            (g.norm() >= u.gradient_floor && g != Vec2::ZERO).then(|| VParticle {
                pos: u.grid.node(i, j),
                w: g * area,
            })
        })
        .collect();
    if let Some(js) = jumps {
        particles.extend(js.measure().particles);
    }
    Ok(VectorParticleMeasure { particles })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipReport {
    pub moment_finite: bool,
    pub boundary_mass: f64,
    pub boundary_ok: bool,
    pub barycenter_residual: f64,
    pub barycenter_ok: bool,
}

impl MembershipReport {
    pub fn all_ok(&self) -> bool {
        self.moment_finite && self.boundary_ok && self.barycenter_ok
    }
}

/// Smooth vector witnesses used to compare `Bar_ν` with `Du`.
pub fn witness_fields() -> Vec<fn(Vec2) -> Vec2> {
    vec![
        |_| Vec2::E1,
        |_| Vec2::E2,
        |x| Vec2::new(x.x, 0.0),
        |x| Vec2::new(0.0, x.y),
        |x| Vec2::new(x.y, -x.x),
        |x| Vec2::new((2.0 * x.x).sin(), (1.5 * x.y).cos()),
        |x| x * (-x.norm2()).exp(),
        |x| Vec2::new(x.x * x.y, x.x * x.x - x.y * x.y),
        |x| Vec2::new((x.x + 0.3 * x.y).cos(), (x.x - x.y).sin()),
        |x| Vec2::new(1.0 / (1.0 + x.norm2()), x.x / (1.0 + x.norm2())),
    ]
}

/// The three conditions characterising gradient Young measures: finite first moment, no
/// concentration on `∂Ω` (mass in a `band`-wide strip at most `tol` of the total), and
/// `Bar_ν = Du` tested against [`witness_fields`].
pub fn gy_membership_report(
    nu: &YoungMeasure,
    du: &VectorParticleMeasure,
    domain: &Region,
    band: f64,
    tol: f64,
) -> MembershipReport {
    let moment = nu.first_moment();
    let total = nu.lambda.total_mass();
    let boundary_mass = fsum(
        nu.lambda
            .particles
            .iter()
            .filter(|p| domain.boundary_distance(p.pos) <= band || !domain.contains(p.pos))
            .map(|p| p.w),
    );
    let bar = nu.barycenter();
    let residual = witness_fields()
        .into_iter()
        .map(|g| {
            let a = bar.pair(g).unwrap_or(f64::NAN);
            let b = du.pair(g).unwrap_or(f64::NAN);
            (a - b).abs()
        })
        .fold(0.0, f64::max);
    MembershipReport {
        moment_finite: moment.is_finite(),
        boundary_mass,
        boundary_ok: boundary_mass <= 1e-6 * total.max(f64::MIN_POSITIVE) || boundary_mass == 0.0,
        barycenter_residual: residual,
        barycenter_ok: residual <= tol,
    }
}
