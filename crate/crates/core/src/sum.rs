//! Order-independent floating-point reduction.
//!
//! Every sum in the library goes through [`fsum`], which returns the correctly rounded
//! value of the exact real sum of its inputs (Shewchuk's non-overlapping partials with a
//! final half-even correction). The result therefore does not depend on the order of the
//! terms, on how work was split across threads, or on the thread count.

use rayon::prelude::*;

use crate::geom::Vec2;

/// Exact-sum accumulator.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
    special: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        if x.is_infinite() {
            self.special += x;
        } else {
            self.partials.push(x);
        }
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
        self.special += other.special;
    }

    pub fn value(&self) -> f64 {
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            n -= 1;
            let x = hi;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<T: IntoIterator<Item = f64>>(&mut self, iter: T) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Correctly rounded sum of all terms.
pub fn fsum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = ExactSum::new();
    acc.extend(terms);
    acc.value()
}

/// Component-wise correctly rounded sum of vectors.
pub fn fsum_vec<I: IntoIterator<Item = Vec2>>(terms: I) -> Vec2 {
    let mut ax = ExactSum::new();
    let mut ay = ExactSum::new();
    for v in terms {
        ax.add(v.x);
        ay.add(v.y);
    }
    Vec2::new(ax.value(), ay.value())
}

/// Parallel exact sum of `f(i)` for `i in 0..n`; bit-identical for every thread count.
pub fn par_fsum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 4096;
    let chunks: Vec<ExactSum> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ExactSum::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc.add(f(i));
            }
            acc
        })
        .collect();
    let mut total = ExactSum::new();
    for c in &chunks {
        total.merge(c);
    }
    total.value()
}

/// Parallel map preserving input order.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Sizes the global worker pool; `None` keeps the available parallelism. Fails if the pool has
/// already been initialised.
pub fn init_threads(n: Option<usize>) -> crate::Result<()> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        if n == 0 {
            return Err(crate::GwvError::Invalid("thread count must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build_global()
        .map_err(|e| crate::GwvError::Invalid(format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation_is_exact() {
        assert_eq!(fsum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(fsum([0.1; 10]), 1.0);
        assert_eq!(fsum(std::iter::empty()), 0.0);
        assert_eq!(fsum([1.0, f64::INFINITY]), f64::INFINITY);
    }

    #[test]
    fn parallel_matches_serial() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let serial = fsum((0..100_000).map(f));
        assert_eq!(par_fsum(100_000, f), serial);
    }

    proptest! {
        #[test]
        fn order_independent(mut v in proptest::collection::vec(-1e6f64..1e6, 0..200), seed in 0u64..1000) {
            let a = fsum(v.iter().copied());
            let n = v.len();
            if n > 1 {
                let k = (seed as usize) % n;
                v.rotate_left(k);
                v.reverse();
            }
            prop_assert_eq!(a, fsum(v.iter().copied()));
        }
    }
}
