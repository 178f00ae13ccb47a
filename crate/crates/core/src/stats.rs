//! Monte Carlo accumulators, the `Estimate` result type, and the
//! deterministic worker fan-out used by every estimator.

use crate::rng::RngStream;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Running (count, sum, sum-of-squares) for one scalar statistic.
///
/// Merging is associative, so partial accumulators from independent workers
/// can be combined in any grouping (merge order is fixed by chunk index to
/// keep floating-point results reproducible).
#[derive(Debug, Clone, Copy, Default)]
pub struct Accum {
    pub n: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl Accum {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(&mut self, other: &Accum) {
        self.n += other.n;
        self.sum += other.sum;
        self.sumsq += other.sumsq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean (population-variance estimate).
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let var = (self.sumsq / n - (self.sum / n).powi(2)).max(0.0);
        (var / n).sqrt()
    }

    pub fn estimate(&self, stream: RngStream) -> Estimate {
        Estimate {
            value: self.mean(),
            stderr: self.stderr(),
            n_paths: self.n,
            master_seed: stream.master_seed,
        }
    }
}

/// A Monte Carlo result. Two estimates with the same master seed merge
/// associatively by reconstructing the underlying moment sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub master_seed: u64,
}

impl Estimate {
    pub fn accum(&self) -> Accum {
        let n = self.n_paths as f64;
        let sum = self.value * n;
        // stderr^2 * n = population variance; invert var = m2/n - mean^2.
        let var = self.stderr * self.stderr * n;
        let sumsq = (var + self.value * self.value) * n;
        Accum {
            n: self.n_paths,
            sum,
            sumsq,
        }
    }

    pub fn merge(&self, other: &Estimate) -> Estimate {
        let mut a = self.accum();
        a.merge(&other.accum());
        Estimate {
            value: a.mean(),
            stderr: a.stderr(),
            n_paths: a.n,
            master_seed: self.master_seed,
        }
    }
}

/// Per-grid-point accumulator for curve estimators.
#[derive(Debug, Clone)]
pub struct VecAccum {
    pub n: u64,
    pub sum: Vec<f64>,
    pub sumsq: Vec<f64>,
}

impl VecAccum {
    pub fn zeros(dim: usize) -> Self {
        Self {
            n: 0,
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, xs: &[f64]) {
        debug_assert_eq!(xs.len(), self.sum.len());
        self.n += 1;
        for (i, &x) in xs.iter().enumerate() {
            self.sum[i] += x;
            self.sumsq[i] += x * x;
        }
    }

    pub fn merge(&mut self, other: &VecAccum) {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.n as f64
    }

    pub fn stderr(&self, i: usize) -> f64 {
        let n = self.n as f64;
        let var = (self.sumsq[i] / n - (self.sum[i] / n).powi(2)).max(0.0);
        (var / n).sqrt()
    }
}

/// Where a survival curve's numbers came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DpExact,
    Mc,
    ImportanceSampling,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::DpExact => write!(f, "dp-exact"),
            Provenance::Mc => write!(f, "mc"),
            Provenance::ImportanceSampling => write!(f, "importance-sampling"),
        }
    }
}

/// A table n -> P(T > n), exact or estimated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub n: Vec<u64>,
    pub prob: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: u64,
    pub provenance: Provenance,
}

impl SurvivalCurve {
    pub fn is_nonincreasing(&self) -> bool {
        self.prob.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn value_at(&self, n: u64) -> Option<(f64, f64)> {
        self.n
            .iter()
            .position(|&m| m == n)
            .map(|i| (self.prob[i], self.stderr[i]))
    }
}

/// Number of paths assigned to each chunk; a pure function of the total so
/// the chunk layout (and hence every stream id) is independent of the
/// worker-pool size.
fn chunk_size_for(n_paths: u64) -> u64 {
    (n_paths / 256).max(1024).min(n_paths.max(1))
}

/// Fan `n_paths` out over fixed-size chunks, one derived substream per
/// chunk, and merge the partials in chunk order.
pub fn map_reduce_paths<T, F, M>(n_paths: u64, base: RngStream, chunk_fn: F, mut merge: M) -> T
where
    T: Send,
    F: Fn(&mut ChaCha12Rng, u64) -> T + Sync,
    M: FnMut(T, T) -> T,
{
    let chunk = chunk_size_for(n_paths);
    let n_chunks = n_paths.div_ceil(chunk);
    let mut partials: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let paths = chunk.min(n_paths - i * chunk);
            let mut rng = base.substream(i).rng();
            chunk_fn(&mut rng, paths)
        })
        .collect();
    let mut acc = partials.remove(0);
    for p in partials {
        acc = merge(acc, p);
    }
    acc
}

/// Scalar mean over independent paths.
pub fn mc_mean<F>(n_paths: u64, base: RngStream, per_path: F) -> Estimate
where
    F: Fn(&mut ChaCha12Rng) -> f64 + Sync,
{
    let acc = map_reduce_paths(
        n_paths,
        base,
        |rng, paths| {
            let mut a = Accum::default();
            for _ in 0..paths {
                a.push(per_path(rng));
            }
            a
        },
        |mut a, b| {
            a.merge(&b);
            a
        },
    );
    acc.estimate(base)
}

/// Vector mean over independent paths (curve estimators).
pub fn mc_mean_vec<F>(n_paths: u64, base: RngStream, dim: usize, per_path: F) -> VecAccum
where
    F: Fn(&mut ChaCha12Rng, &mut [f64]) + Sync,
{
    map_reduce_paths(
        n_paths,
        base,
        |rng, paths| {
            let mut acc = VecAccum::zeros(dim);
            let mut buf = vec![0.0; dim];
            for _ in 0..paths {
                buf.iter_mut().for_each(|x| *x = 0.0);
                per_path(rng, &mut buf);
                acc.push(&buf);
            }
            acc
        },
        |mut a, b| {
            a.merge(&b);
            a
        },
    )
}
