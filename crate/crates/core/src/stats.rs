//! Deterministic Monte-Carlo accumulation.
//!
//! Samples are grouped in fixed-size chunks. Chunks run in parallel, each
//! producing Welford moments, and the chunk results are merged along a fixed
//! pairwise tree. The reduction order depends only on the sample count, so
//! results are bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CHUNK: u64 = 1024;

/// A Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64) -> Self {
        Estimate { value, std_error }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
        }
    }

    /// Signed distance to `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.value - target;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }

    /// `|value - target| <= sigmas * std_error + slack`.
    pub fn agrees_with(&self, target: f64, sigmas: f64, slack: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.std_error + slack
    }
}

/// Running count, mean and centred second moment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let wb = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * wb,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * wb,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean(), self.std_error())
    }
}

fn merge_tree(items: &[Vec<Moments>], width: usize) -> Vec<Moments> {
    match items.len() {
        0 => vec![Moments::default(); width],
        1 => items[0].clone(),
        len => {
            let (left, right) = items.split_at(len / 2);
            let l = merge_tree(left, width);
            let r = merge_tree(right, width);
            l.iter().zip(&r).map(|(a, b)| a.merge(b)).collect()
        }
    }
}

/// Evaluates `f(index, out)` for `index in 0..n` and returns per-column moments.
///
/// `f` writes `width` observations into `out` for each sample.
pub fn accumulate<F>(n: u64, width: usize, f: F) -> Result<Vec<Moments>>
where
    F: Fn(u64, &mut [f64]) -> Result<()> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Moments::default(); width];
            let mut buf = vec![0.0; width];
            let end = ((c + 1) * CHUNK).min(n);
            for i in c * CHUNK..end {
                f(i, &mut buf)?;
                for (m, &x) in acc.iter_mut().zip(&buf) {
                    m.push(x);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(merge_tree(&partial, width))
}

/// Pairwise summation over a fixed binary tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        len => {
            let (l, r) = xs.split_at(len / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m.mean() - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let mut a = Moments::default();
        let mut b = Moments::default();
        let mut all = Moments::default();
        for i in 0..500 {
            let x = (i as f64 * 0.37).cos();
            if i < 123 {
                a.push(x)
            } else {
                b.push(x)
            }
            all.push(x);
        }
        let m = a.merge(&b);
        assert_eq!(m.count(), all.count());
        assert!((m.mean() - all.mean()).abs() < 1e-14);
        assert!((m.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn accumulate_is_thread_count_invariant() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                accumulate(10_000, 2, |i, out| {
                    out[0] = (i as f64).sqrt().sin();
                    out[1] = out[0] * out[0];
                    Ok(())
                })
                .unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn pairwise_sum_small() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }
}
