//! Strict descending ladder structure by simulation: the (tau, chi) law,
//! the Monte Carlo renewal function h, the tail of T_0, and the Spitzer
//! positivity diagnostic.

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, max_relative_residual};
use crate::increments::IncrementModel;
use crate::oracle::ExactRenewal;
use crate::rng::RngStream;
use crate::stats::{mc_mean, mc_mean_vec, map_reduce_paths, Estimate, Provenance, SurvivalCurve};
use rand_chacha::ChaCha12Rng;

/// One strict descending ladder pair (tau, chi) = (T_0, -S_{T_0}).
/// A censored record carries the horizon in `tau` and no height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRecord {
    pub tau: u64,
    pub chi: Option<f64>,
}

impl LadderRecord {
    pub fn is_censored(&self) -> bool {
        self.chi.is_none()
    }
}

/// Default episode horizon; E tau is infinite, so censoring is inevitable
/// and must be surfaced, never silently dropped.
pub const DEFAULT_LADDER_HORIZON: u64 = 10_000_000;

/// Run the walk until S_n < 0 or the horizon; the first strict descending
/// ladder pair or a censored record.
pub fn simulate_ladder(model: &IncrementModel, horizon: u64, rng: &mut ChaCha12Rng) -> LadderRecord {
    let mut s = 0.0;
    for n in 1..=horizon {
        s += model.sample(rng);
        if s < 0.0 {
            return LadderRecord {
                tau: n,
                chi: Some(-s),
            };
        }
    }
    LadderRecord {
        tau: horizon,
        chi: None,
    }
}

/// Monte Carlo estimate of the renewal function on a grid.
#[derive(Debug, Clone)]
pub struct RenewalTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: u64,
}

impl RenewalTable {
    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

const CENSOR_LIMIT: f64 = 1e-3;

/// h(x) = E sigma(x), sigma(x) the number of ladder heights needed for the
/// partial chi-sum to exceed x. One chi stream is shared across all grid
/// points per path, so the table is monotone by construction; h(0) is
/// pinned to 1 exactly.
pub fn estimate_renewal_h(
    model: &IncrementModel,
    grid: &[f64],
    n_paths: u64,
    horizon: u64,
    stream: RngStream,
) -> Result<RenewalTable> {
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::Precondition("grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone("renewal grid must be increasing".into()));
    }
    let dim = grid.len();
    let acc = map_reduce_paths(
        n_paths,
        stream,
        |rng, paths| {
            let mut acc = crate::stats::VecAccum::zeros(dim);
            let mut censored = 0u64;
            let mut episodes = 0u64;
            let mut buf = vec![0.0; dim];
            for _ in 0..paths {
                let mut sum = 0.0;
                let mut count = 0u64;
                let mut idx = 1;
                buf[0] = 1.0;
                while idx < dim {
                    let rec = simulate_ladder(model, horizon, rng);
                    episodes += 1;
                    count += 1;
                    match rec.chi {
                        Some(chi) => {
                            sum += chi;
                            while idx < dim && sum > grid[idx] {
                                buf[idx] = count as f64;
                                idx += 1;
                            }
                        }
                        None => {
                            // Censored episode: close out the path at the
                            // current count; the fraction is policed below.
                            censored += 1;
                            while idx < dim {
                                buf[idx] = count as f64;
                                idx += 1;
                            }
                        }
                    }
                }
                acc.push(&buf);
            }
            (acc, censored, episodes)
        },
        |(mut a, ca, ea), (b, cb, eb)| {
            a.merge(&b);
            (a, ca + cb, ea + eb)
        },
    );
    let (acc, censored, episodes) = acc;
    let fraction = censored as f64 / episodes.max(1) as f64;
    if fraction > CENSOR_LIMIT {
        return Err(Error::ExcessiveCensoring {
            fraction,
            limit: CENSOR_LIMIT,
        });
    }
    let mut values: Vec<f64> = (0..dim).map(|i| acc.mean(i)).collect();
    let mut stderr: Vec<f64> = (0..dim).map(|i| acc.stderr(i)).collect();
    values[0] = 1.0;
    stderr[0] = 0.0;
    Ok(RenewalTable {
        grid: grid.to_vec(),
        values,
        stderr,
        n_paths,
    })
}

/// Direct simulation of P(T_0 > n) on an increasing grid; the per-path
/// indicator vector is nonincreasing, so the curve is too.
pub fn survival_t0(
    model: &IncrementModel,
    n_grid: &[u64],
    n_paths: u64,
    stream: RngStream,
) -> Result<SurvivalCurve> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone("n_grid must be increasing".into()));
    }
    let n_max = *n_grid.last().unwrap();
    let dim = n_grid.len();
    let grid = n_grid.to_vec();
    let acc = mc_mean_vec(n_paths, stream, dim, |rng, out| {
        let mut s = 0.0;
        let mut idx = 0;
        for n in 1..=n_max {
            s += model.sample(rng);
            if s < 0.0 {
                break;
            }
            while idx < dim && grid[idx] == n {
                out[idx] = 1.0;
                idx += 1;
            }
        }
    });
    Ok(SurvivalCurve {
        n: grid,
        prob: (0..dim).map(|i| acc.mean(i)).collect(),
        stderr: (0..dim).map(|i| acc.stderr(i)).collect(),
        n_paths,
        provenance: Provenance::Mc,
    })
}

/// Power-law fit of a survival tail over a window.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    /// Fitted exponent (rho - 1 for T_0 tails).
    pub exponent: f64,
    /// Fitted level of the slowly varying factor over the window.
    pub amplitude: f64,
    pub window: (u64, u64),
    /// Max relative deviation of the fit over the window.
    pub residual: f64,
}

/// Least-squares log-log fit of a survival curve over [window.0, window.1].
pub fn fit_tail(curve: &SurvivalCurve, window: (u64, u64)) -> Result<TailFit> {
    // Tolerate rounding-level upticks from the compensated-f64 DP backend.
    let monotone = curve
        .prob
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-300));
    if !monotone {
        return Err(Error::NonMonotone("survival curve not nonincreasing".into()));
    }
    let pts: Vec<(f64, f64)> = curve
        .n
        .iter()
        .zip(&curve.prob)
        .filter(|&(&n, &p)| n >= window.0 && n <= window.1 && p > 0.0)
        .map(|(&n, &p)| (n as f64, p))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Precondition(
            "tail fit needs at least 4 positive points in the window".into(),
        ));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    if ys.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::Precondition("degenerate constant curve".into()));
    }
    let (slope, intercept) = loglog_fit(&xs, &ys);
    Ok(TailFit {
        exponent: slope,
        amplitude: intercept.exp(),
        window,
        residual: max_relative_residual(&xs, &ys, slope, intercept),
    })
}

/// Monte Carlo estimate of P(S_n >= 0).
pub fn spitzer_positivity(
    model: &IncrementModel,
    n: u64,
    n_paths: u64,
    stream: RngStream,
) -> Estimate {
    mc_mean(n_paths, stream, |rng| {
        let mut s = 0.0;
        for _ in 0..n {
            s += model.sample(rng);
        }
        if s >= 0.0 {
            1.0
        } else {
            0.0
        }
    })
}

/// E[h(x + X); x + X >= 0] - h(x) for a lattice model with oracle-exact h.
///
/// The survival set {x + X >= 0} matches T_0's strict down-crossing
/// S_n < 0; with that convention the residual vanishes.
pub fn harmonicity_residual(model: &IncrementModel, h: &ExactRenewal, x: u64) -> Result<f64> {
    let l = model.require_lattice()?;
    let mut e = 0.0;
    for (&s, &p) in l.support().iter().zip(l.probs()) {
        let y = x as i64 + s;
        if y >= 0 {
            e += p * h.value(y as u64);
        }
    }
    Ok(e - h.value(x))
}

/// Step-function evaluator for a renewal table with a fitted power tail
/// beyond the grid. Evaluations in the extended region are allowed up to
/// one decade past the grid.
#[derive(Debug, Clone)]
pub struct HFun {
    xs: Vec<f64>,
    ys: Vec<f64>,
    tail_index: f64,
}

impl HFun {
    pub fn from_exact(h: &ExactRenewal, tail_index: f64) -> Self {
        Self {
            xs: (0..h.values().len()).map(|x| x as f64).collect(),
            ys: h.values().to_vec(),
            tail_index,
        }
    }

    pub fn from_table(t: &RenewalTable, tail_index: f64) -> Self {
        Self {
            xs: t.grid.clone(),
            ys: t.values.clone(),
            tail_index,
        }
    }

    pub fn grid_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// h(x); 0 on the negative half line, step lookup on the grid, power
    /// extension with continuity matching beyond it.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        let max = self.grid_max();
        if x <= max {
            let idx = self.xs.partition_point(|&g| g <= x) - 1;
            return Ok(self.ys[idx]);
        }
        if x > 10.0 * max {
            return Err(Error::ExtrapolationTooFar { x, grid_max: max });
        }
        Ok(self.ys.last().unwrap() * (x / max).powf(self.tail_index))
    }
}
