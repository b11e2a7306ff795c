//! Weighted point clouds standing in for positive and vector-valued Radon measures, and the
//! convex functional `G(ν, μ) = ∫ f(ν/μ) dμ + ∫ f^∞(ν^s/|ν^s|) d|ν^s|`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GwvError, Result};
use crate::geom::{Rect, Vec2};
use crate::spatial::{ExactIndex, PointIndex};
use crate::sum::{fsum, fsum_vec, par_fsum, ExactSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pos: Vec2,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VParticle {
    pub pos: Vec2,
    pub w: Vec2,
}

/// Positive measure carried by finitely many weighted points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParticleMeasure {
    pub particles: Vec<Particle>,
    /// Whether mass on the boundary of the ambient domain is permitted.
    pub closure: bool,
}

impl ParticleMeasure {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        for p in &particles {
            if !(p.w >= 0.0) || !p.w.is_finite() || !p.pos.is_finite() {
                return Err(GwvError::Invalid(format!(
                    "particle weight must be finite and nonnegative, got {}",
                    p.w
                )));
            }
        }
        Ok(Self {
            particles,
            closure: true,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(items: impl IntoIterator<Item = (Vec2, f64)>) -> Result<Self> {
        Self::new(items.into_iter().map(|(pos, w)| Particle { pos, w }).collect())
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.particles.iter().map(|p| p.pos).collect()
    }

    pub fn total_mass(&self) -> f64 {
        par_fsum(self.particles.len(), |i| self.particles[i].w)
    }

    pub fn concat(&self, other: &ParticleMeasure) -> ParticleMeasure {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut particles = self.particles.clone();
        particles.extend_from_slice(&other.particles);
        ParticleMeasure {
            particles,
            closure: self.closure && other.closure,
        }
    }

    pub fn scaled(&self, s: f64) -> ParticleMeasure {
        ParticleMeasure {
            particles: self
                .particles
                .iter()
                .map(|p| Particle { pos: p.pos, w: p.w * s })
                .collect(),
            closure: self.closure,
        }
    }

    /// `∫ g dμ`.
    pub fn pair<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(Vec2) -> f64 + Sync + Send,
    {
        let vals: Vec<f64> = crate::sum::par_map(&self.particles, |p| p.w * g(p.pos));
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(GwvError::NonFiniteIntegrand);
        }
        Ok(fsum(vals))
    }

    /// Mass of the particles inside the closed ball `B(c, r)`.
    pub fn mass_in_ball(&self, c: Vec2, r: f64) -> f64 {
        fsum(
            self.particles
                .iter()
                .filter(|p| p.pos.dist(c) <= r)
                .map(|p| p.w),
        )
    }

    pub fn inside(&self, rect: &Rect) -> bool {
        self.particles.iter().all(|p| rect.contains(p.pos))
    }
}

/// `ℝ²`-valued measure carried by finitely many points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VectorParticleMeasure {
    pub particles: Vec<VParticle>,
}

impl VectorParticleMeasure {
    pub fn new(particles: Vec<VParticle>) -> Result<Self> {
        if particles.iter().any(|p| !p.w.is_finite() || !p.pos.is_finite()) {
            return Err(GwvError::Invalid("vector weights must be finite".into()));
        }
        Ok(Self { particles })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(items: impl IntoIterator<Item = (Vec2, Vec2)>) -> Result<Self> {
        Self::new(items.into_iter().map(|(pos, w)| VParticle { pos, w }).collect())
    }

    /// `ν = d·μ` for a density `d` evaluated on the particles of `μ`.
    pub fn with_density(mu: &ParticleMeasure, d: impl Fn(Vec2) -> Vec2) -> Self {
        Self {
            particles: mu
                .particles
                .iter()
                .map(|p| VParticle {
                    pos: p.pos,
                    w: d(p.pos) * p.w,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        par_fsum(self.particles.len(), |i| self.particles[i].w.norm())
    }

    pub fn total(&self) -> Vec2 {
        fsum_vec(self.particles.iter().map(|p| p.w))
    }

    /// The variation measure `|ν|`.
    pub fn variation(&self) -> ParticleMeasure {
        ParticleMeasure {
            particles: self
                .particles
                .iter()
                .map(|p| Particle {
                    pos: p.pos,
                    w: p.w.norm(),
                })
                .collect(),
            closure: true,
        }
    }

    pub fn concat(&self, other: &VectorParticleMeasure) -> Self {
        let mut particles = self.particles.clone();
        particles.extend_from_slice(&other.particles);
        Self { particles }
    }

    /// `∫ ⟨g, dν⟩`.
    pub fn pair<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(Vec2) -> Vec2 + Sync + Send,
    {
        let vals: Vec<f64> = crate::sum::par_map(&self.particles, |p| p.w.dot(g(p.pos)));
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(GwvError::NonFiniteIntegrand);
        }
        Ok(fsum(vals))
    }
}

pub type ScalarFn = Arc<dyn Fn(Vec2, Vec2) -> f64 + Send + Sync>;

/// Integrand `f(x, z)` together with its recession function `f^∞(x, z)` on unit vectors.
///
/// Superlinear integrands report `f^∞ = +∞` for every direction.
#[derive(Clone)]
pub struct Integrand {
    pub name: String,
    f: ScalarFn,
    f_inf: Option<ScalarFn>,
    pub homogeneous: bool,
}

impl std::fmt::Debug for Integrand {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Integrand")
            .field("name", &self.name)
            .field("homogeneous", &self.homogeneous)
            .field("has_recession", &self.f_inf.is_some())
            .finish()
    }
}

impl Integrand {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(Vec2, Vec2) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
            f_inf: None,
            homogeneous: false,
        }
    }

    pub fn with_recession<F>(mut self, f_inf: F) -> Self
    where
        F: Fn(Vec2, Vec2) -> f64 + Send + Sync + 'static,
    {
        self.f_inf = Some(Arc::new(f_inf));
        self
    }

    /// Marks `f` as positively 1-homogeneous in `z`; its recession function is `f` itself.
    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        if self.f_inf.is_none() {
            self.f_inf = Some(self.f.clone());
        }
        self
    }

    /// `f(z) = |z|`.
    pub fn norm() -> Self {
        Self::new("|z|", |_, z| z.norm()).homogeneous()
    }

    /// `f(z) = |z|^p`; linear growth only for `p = 1`.
    pub fn power(p: f64) -> Self {
        if p == 1.0 {
            return Self::norm();
        }
        let f = Self::new(format!("|z|^{p}"), move |_, z: Vec2| z.norm().powf(p));
        if p > 1.0 {
            f.with_recession(|_, _| f64::INFINITY)
        } else {
            f.with_recession(|_, _| 0.0)
        }
    }

    /// `f(z) = √(1+|z|²)`, recession `|z|`.
    pub fn area() -> Self {
        Self::new("sqrt(1+|z|^2)", |_, z: Vec2| (1.0 + z.norm2()).sqrt())
            .with_recession(|_, z: Vec2| z.norm())
    }

    /// `norm`, `area` or `power:P` with `P >= 1`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "norm" => Ok(Self::norm()),
            "area" => Ok(Self::area()),
            _ => match s.strip_prefix("power:").and_then(|p| p.parse::<f64>().ok()) {
                Some(p) if p >= 1.0 => Ok(Self::power(p)),
                Some(_) => Err(GwvError::Invalid("power integrand needs P >= 1".into())),
                None => Err(GwvError::Invalid(format!("unknown integrand {s:?}; use norm, area or power:P"))),
            },
        }
    }

    #[inline]
    pub fn eval(&self, x: Vec2, z: Vec2) -> f64 {
        (self.f)(x, z)
    }

    pub fn has_recession(&self) -> bool {
        self.f_inf.is_some()
    }

    #[inline]
    pub fn eval_inf(&self, x: Vec2, d: Vec2) -> Result<f64> {
        self.f_inf
            .as_ref()
            .map(|g| g(x, d))
            .ok_or(GwvError::MissingRecession)
    }

    /// Verifies `f^∞ = f` on unit vectors for homogeneous integrands (to 1e-9).
    pub fn check_homogeneous(&self, samples: &[(Vec2, Vec2)]) -> bool {
        if !self.homogeneous {
            return true;
        }
        samples.iter().all(|&(x, z)| {
            let Some(d) = z.normalized() else { return true };
            match self.eval_inf(x, d) {
                Ok(v) => (v - self.eval(x, d)).abs() <= 1e-9 * (1.0 + v.abs()),
                Err(_) => false,
            }
        })
    }
}

/// Result of splitting `ν` against `μ`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Density `ν^a/μ` per particle of `μ`.
    pub density: Vec<Vec2>,
    /// Particles of `ν` with no partner in `μ`.
    pub singular: Vec<VParticle>,
}

/// Radon–Nikodym split of `ν` with respect to `μ`: exact-position matches first, otherwise the
/// nearest `μ` particle within `match_radius`. Matches onto zero-weight particles are singular.
pub fn decompose(
    nu: &VectorParticleMeasure,
    mu: &ParticleMeasure,
    match_radius: f64,
) -> Decomposition {
    let pos = mu.positions();
    let exact = ExactIndex::new(pos.iter().copied());
    let near = (match_radius > 0.0).then(|| PointIndex::new(&pos, match_radius));
    let mut acc_x: Vec<ExactSum> = vec![ExactSum::new(); mu.len()];
    let mut acc_y: Vec<ExactSum> = vec![ExactSum::new(); mu.len()];
    let mut singular = Vec::new();
    for q in &nu.particles {
        let j = exact
            .get(q.pos)
            .or_else(|| near.as_ref().and_then(|ix| ix.nearest_within(q.pos, match_radius)));
        match j {
            Some(j) if mu.particles[j].w > 0.0 => {
                acc_x[j].add(q.w.x);
                acc_y[j].add(q.w.y);
            }
            _ => {
                if q.w != Vec2::ZERO {
                    singular.push(*q);
                }
            }
        }
    }
    let density = mu
        .particles
        .iter()
        .enumerate()
        .map(|(j, p)| {
            if p.w > 0.0 {
                Vec2::new(acc_x[j].value(), acc_y[j].value()) / p.w
            } else {
                Vec2::ZERO
            }
        })
        .collect();
    Decomposition { density, singular }
}

/// `G(ν, μ)`. Returns `+∞` when a superlinear integrand meets singular mass.
pub fn g_functional(
    nu: &VectorParticleMeasure,
    mu: &ParticleMeasure,
    f: &Integrand,
    match_radius: f64,
) -> Result<f64> {
    let dec = decompose(nu, mu, match_radius);
    let mut terms: Vec<f64> = mu
        .particles
        .iter()
        .zip(&dec.density)
        .map(|(p, d)| if p.w > 0.0 { p.w * f.eval(p.pos, *d) } else { 0.0 })
        .collect();
    for s in &dec.singular {
        let n = s.w.norm();
        let v = f.eval_inf(s.pos, s.w / n)?;
        if v == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        terms.push(n * v);
    }
    if terms.iter().any(|t| t.is_nan()) {
        return Err(GwvError::NonFiniteIntegrand);
    }
    Ok(fsum(terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecessionVerdict {
    Consistent,
    NoLinearGrowth,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecessionReport {
    /// Max deviation `|f(x,tz)/t − f^∞(x,z)|` at each `t`.
    pub deviations: Vec<f64>,
    pub deviation: f64,
    pub verdict: RecessionVerdict,
}

/// Compares `f(x, t z)/t` with the declared recession function along increasing `t`.
pub fn recession_check(
    f: &Integrand,
    samples: &[(Vec2, Vec2)],
    t_values: &[f64],
) -> Result<RecessionReport> {
    if t_values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GwvError::Invalid("t values must increase".into()));
    }
    match t_values.last() {
        Some(&t) if t >= 1e4 => {}
        _ => return Err(GwvError::Invalid("largest t must be at least 1e4".into())),
    }
    let deviations: Vec<f64> = t_values
        .iter()
        .map(|&t| {
            samples
                .iter()
                .filter_map(|&(x, z)| z.normalized().map(|d| (x, d)))
                .map(|(x, d)| {
                    let lim = f.eval_inf(x, d).unwrap_or(f64::NAN);
                    let dev = (f.eval(x, d * t) / t - lim).abs();
                    if dev.is_nan() {
                        f64::INFINITY
                    } else {
                        dev
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let deviation = *deviations.last().unwrap_or(&0.0);
    let first = deviations.first().copied().unwrap_or(0.0);
    let verdict = if deviation.is_infinite() || (deviation > 1.0 && deviation > first) {
        RecessionVerdict::NoLinearGrowth
    } else {
        RecessionVerdict::Consistent
    };
    Ok(RecessionReport {
        deviations,
        deviation,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LscReport {
    pub g_h: Vec<f64>,
    pub g_limit: f64,
    pub tail_min: f64,
    pub tolerance: f64,
    pub liminf_ok: bool,
    /// `|∫ψ dμ_h − ∫ψ dμ| + |∫⟨ψe, dν_h⟩ − ∫⟨ψe, dν⟩|` for the last `h`, per witness `ψ`.
    pub witness_residuals: Vec<f64>,
}

fn witnesses() -> [fn(Vec2) -> f64; 5] {
    [
        |_| 1.0,
        |x| x.x,
        |x| x.y,
        |x| (-x.norm2()).exp(),
        |x| (1.3 * x.x - 0.7 * x.y).sin(),
    ]
}

/// Lower-semicontinuity probe: checks `G(ν, μ) ≤ min_{tail} G(ν_h, μ_h) + tol` where the tail is
/// the second half of the sequence.
pub fn lsc_probe(
    nu_h: &[VectorParticleMeasure],
    mu_h: &[ParticleMeasure],
    limit: (&VectorParticleMeasure, &ParticleMeasure),
    f: &Integrand,
    match_radius: f64,
    tol_scale: f64,
) -> Result<LscReport> {
    if nu_h.len() != mu_h.len() || nu_h.is_empty() {
        return Err(GwvError::Invalid("sequences must be nonempty and of equal length".into()));
    }
    let g_h = nu_h
        .iter()
        .zip(mu_h)
        .map(|(n, m)| g_functional(n, m, f, match_radius))
        .collect::<Result<Vec<_>>>()?;
    let g_limit = g_functional(limit.0, limit.1, f, match_radius)?;
    let tail = &g_h[g_h.len() / 2..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tolerance = tol_scale * g_limit.abs().max(1.0);
    let liminf_ok = g_limit <= tail_min + tolerance || (g_limit.is_infinite() && tail_min.is_infinite());
    let (nl, ml) = (nu_h.last().unwrap(), mu_h.last().unwrap());
    let witness_residuals = witnesses()
        .iter()
        .map(|psi| {
            let dm = ml.pair(psi).unwrap_or(f64::NAN) - limit.1.pair(psi).unwrap_or(f64::NAN);
            let g = |x: Vec2| Vec2::new(psi(x), psi(x));
            let dn = nl.pair(g).unwrap_or(f64::NAN) - limit.0.pair(g).unwrap_or(f64::NAN);
            dm.abs() + dn.abs()
        })
        .collect();
    Ok(LscReport {
        g_h,
        g_limit,
        tail_min,
        tolerance,
        liminf_ok,
        witness_residuals,
    })
}

/// Random sequence `(ν_h, μ_h) ⇀ (ν, μ)` built by spreading each particle of `μ` into antithetic
/// sub-particles with zero-mean density perturbations; amplitude and spread decay like `1/h`.
/// `ν` must be absolutely continuous with respect to `μ` on the same skeleton.
pub fn random_mollified_sequence(
    nu: &VectorParticleMeasure,
    mu: &ParticleMeasure,
    steps: usize,
    seed: u64,
) -> (Vec<VectorParticleMeasure>, Vec<ParticleMeasure>) {
    let dec = decompose(nu, mu, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nus = Vec::with_capacity(steps);
    let mut mus = Vec::with_capacity(steps);
    for h in 1..=steps {
        let scale = 1.0 / h as f64;
        let mut np = Vec::with_capacity(4 * mu.len());
        let mut mp = Vec::with_capacity(4 * mu.len());
        for (p, d) in mu.particles.iter().zip(&dec.density) {
            let amp = rng.gen_range(0.2..1.0) * scale * (1.0 + d.norm());
            for _ in 0..2 {
                let off = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (0.05 * scale);
                let xi = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
                for s in [1.0, -1.0] {
                    let pos = p.pos + off * s;
                    let w = p.w / 4.0;
                    mp.push(Particle { pos, w });
                    np.push(VParticle {
                        pos,
                        w: (*d + xi * s) * w,
                    });
                }
            }
        }
        nus.push(VectorParticleMeasure { particles: np });
        mus.push(ParticleMeasure {
            particles: mp,
            closure: mu.closure,
        });
    }
    (nus, mus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_mass_with_superlinear_integrand_is_infinite() {
        let mu = ParticleMeasure::from_pairs([(Vec2::ZERO, 1.0)]).unwrap();
        let nu = VectorParticleMeasure::from_pairs([(Vec2::new(3.0, 0.0), Vec2::E1)]).unwrap();
        let g = g_functional(&nu, &mu, &Integrand::power(2.0), 0.1).unwrap();
        assert_eq!(g, f64::INFINITY);
    }

    #[test]
    fn zero_weight_match_is_singular() {
        let mu = ParticleMeasure::from_pairs([(Vec2::ZERO, 0.0)]).unwrap();
        let nu = VectorParticleMeasure::from_pairs([(Vec2::ZERO, Vec2::E1 * 2.0)]).unwrap();
        let g = g_functional(&nu, &mu, &Integrand::norm(), 0.1).unwrap();
        assert_eq!(g, 2.0);
    }

    #[test]
    fn jensen_keeps_random_sequences_above_limit() {
        let mu = ParticleMeasure::from_pairs((0..50).map(|i| (Vec2::new(i as f64 * 0.1, 0.0), 0.02))).unwrap();
        let nu = VectorParticleMeasure::with_density(&mu, |x| Vec2::new(x.x, 1.0));
        let (nus, mus) = random_mollified_sequence(&nu, &mu, 8, 7);
        let r = lsc_probe(&nus, &mus, (&nu, &mu), &Integrand::power(1.5), 0.0, 1e-6).unwrap();
        assert!(r.liminf_ok);
        assert!(r.g_h.iter().all(|&g| g >= r.g_limit - 1e-12));
    }
}
