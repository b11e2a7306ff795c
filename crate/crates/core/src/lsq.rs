//! Sparse linear least squares by conjugate gradients on the normal equations (CGLS).

use rayon::prelude::*;

/// Row-sparse matrix with right-hand side.
#[derive(Debug, Clone, Default)]
pub struct SparseRows {
    pub cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LsqSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖Aᵀ(b − Ax)‖ / ‖Aᵀb‖` at exit.
    pub normal_residual: f64,
}

impl SparseRows {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .par_iter()
            .map(|r| r.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    pub fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &yi) in self.rows.iter().zip(y) {
            for &(j, a) in r {
                out[j] += a * yi;
            }
        }
        out
    }

    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
            .into_iter()
            .zip(&self.rhs)
            .map(|(ax, b)| ax - b)
            .collect()
    }

    /// Minimises `‖Ax − b‖²` from `x = 0`.
    pub fn solve(&self, max_iter: usize, rtol: f64) -> LsqSolution {
        let n = self.cols;
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let mut x = vec![0.0; n];
        let mut r = self.rhs.clone();
        let mut s = self.apply_t(&r);
        let s0 = dot(&s, &s).sqrt();
        if s0 == 0.0 {
            return LsqSolution {
                x,
                iterations: 0,
                normal_residual: 0.0,
            };
        }
        let mut p = s.clone();
        let mut gamma = dot(&s, &s);
        let mut it = 0;
        while it < max_iter {
            it += 1;
            let q = self.apply(&p);
            let qq = dot(&q, &q);
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            for (xi, pi) in x.iter_mut().zip(&p) {
                *xi += alpha * pi;
            }
            for (ri, qi) in r.iter_mut().zip(&q) {
                *ri -= alpha * qi;
            }
            s = self.apply_t(&r);
            let gamma_new = dot(&s, &s);
            if gamma_new.sqrt() <= rtol * s0 {
                gamma = gamma_new;
                break;
            }
            let beta = gamma_new / gamma;
            gamma = gamma_new;
            for (pi, si) in p.iter_mut().zip(&s) {
                *pi = si + beta * *pi;
            }
        }
        LsqSolution {
            x,
            iterations: it,
            normal_residual: gamma.sqrt() / s0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_overdetermined_solution() {
        let mut a = SparseRows::new(2);
        a.push(vec![(0, 1.0)], 1.0);
        a.push(vec![(1, 1.0)], 2.0);
        a.push(vec![(0, 1.0), (1, 1.0)], 3.0);
        let sol = a.solve(100, 1e-14);
        assert!((sol.x[0] - 1.0).abs() < 1e-10 && (sol.x[1] - 2.0).abs() < 1e-10);
    }
}
