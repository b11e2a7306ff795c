//! Uniform bucket grid for radius queries over a fixed point set.

use std::collections::HashMap;

use crate::geom::Vec2;

#[derive(Debug, Clone)]
pub struct PointIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Vec2>,
}

impl PointIndex {
    pub fn new(points: &[Vec2], cell: f64) -> Self {
        let cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key_of(cell, *p)).or_default().push(i);
        }
        Self {
            cell,
            buckets,
            points: points.to_vec(),
        }
    }

    fn key_of(cell: f64, p: Vec2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Indices of all points with `|x - p| <= r`, in increasing index order.
    pub fn within(&self, p: Vec2, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(p, r, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn for_each_within(&self, p: Vec2, r: f64, mut f: impl FnMut(usize, f64)) {
        let (kx0, ky0) = Self::key_of(self.cell, p - Vec2::new(r, r));
        let (kx1, ky1) = Self::key_of(self.cell, p + Vec2::new(r, r));
        let r2 = r * r;
        for kx in kx0..=kx1 {
            for ky in ky0..=ky1 {
                if let Some(b) = self.buckets.get(&(kx, ky)) {
                    for &i in b {
                        let d2 = (self.points[i] - p).norm2();
                        if d2 <= r2 {
                            f(i, d2);
                        }
                    }
                }
            }
        }
    }

    /// Nearest point within `r`; ties are broken by lexicographic position, then index.
    pub fn nearest_within(&self, p: Vec2, r: f64) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        self.for_each_within(p, r, |i, d2| {
            let better = match best {
                None => true,
                Some((bd, bi)) => {
                    d2 < bd
                        || (d2 == bd
                            && self.points[i]
                                .lex_cmp(&self.points[bi])
                                .then(i.cmp(&bi))
                                .is_lt())
                }
            };
            if better {
                best = Some((d2, i));
            }
        });
        best.map(|b| b.1)
    }
}

/// Exact-position lookup keyed by the bit patterns of the coordinates.
#[derive(Debug, Clone, Default)]
pub struct ExactIndex {
    map: HashMap<(u64, u64), usize>,
}

impl ExactIndex {
    pub fn new(points: impl IntoIterator<Item = Vec2>) -> Self {
        let mut map = HashMap::new();
        for (i, p) in points.into_iter().enumerate() {
            map.entry(Self::key(p)).or_insert(i);
        }
        Self { map }
    }

    fn key(p: Vec2) -> (u64, u64) {
        // Normalise -0.0 so it coincides with +0.0.
        ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
    }

    pub fn get(&self, p: Vec2) -> Option<usize> {
        self.map.get(&Self::key(p)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_and_within_agree_with_brute_force() {
        let pts: Vec<Vec2> = (0..400)
            .map(|i| Vec2::new(((i * 37) % 101) as f64 * 0.01, ((i * 59) % 97) as f64 * 0.01))
            .collect();
        let idx = PointIndex::new(&pts, 0.05);
        let q = Vec2::new(0.503, 0.411);
        let brute: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist(q) <= 0.1).collect();
        assert_eq!(idx.within(q, 0.1), brute);
        let nb = brute
            .iter()
            .copied()
            .min_by(|&a, &b| pts[a].dist(q).total_cmp(&pts[b].dist(q)))
            .unwrap();
        assert_eq!(idx.nearest_within(q, 0.1), Some(nb));
        assert_eq!(idx.nearest_within(Vec2::new(5.0, 5.0), 0.1), None);
    }
}
