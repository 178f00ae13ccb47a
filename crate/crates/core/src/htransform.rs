//! The Doob h-transform of a lattice walk killed on entering the negative
//! half line: exact transition kernel p^h(x, y) = h(y) p(y - x) / h(x),
//! simulation of the conditioned chain, and the importance-sampling
//! survival estimator it powers.

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::increments::{IncrementModel, LatticeModel};
use crate::oracle::ExactRenewal;
use crate::rng::RngStream;
use crate::stats::{mc_mean, mc_mean_vec, Estimate, Provenance, SurvivalCurve};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Lattice walk conditioned to stay nonnegative, driven by an oracle-exact
/// renewal function. Rows are verified to sum to one (harmonicity) at
/// construction.
#[derive(Debug, Clone)]
pub struct ConditionedKernel {
    model: LatticeModel,
    h: Vec<f64>,
    x_max: u64,
}

const ROW_SUM_TOL: f64 = 1e-9;

impl ConditionedKernel {
    pub fn new(model: &IncrementModel, h: &ExactRenewal) -> Result<Self> {
        let l = model.require_lattice()?.clone();
        let max_step = l.max_step().max(0) as u64;
        if (h.x_max() as i64) < l.max_step() {
            return Err(Error::Precondition(
                "renewal table shorter than one step".into(),
            ));
        }
        let kernel = Self {
            model: l,
            h: h.values().to_vec(),
            x_max: h.x_max() - max_step,
        };
        for x in 0..=kernel.x_max.min(64) {
            let s: f64 = kernel.row(x)?.iter().map(|&(_, p)| p).sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidModel(format!(
                    "h is not harmonic for this walk: row {x} sums to {s}"
                )));
            }
        }
        Ok(kernel)
    }

    /// Largest state with a fully tabulated row.
    pub fn x_max(&self) -> u64 {
        self.x_max
    }

    pub fn h_at(&self, x: u64) -> f64 {
        self.h[x as usize]
    }

    /// The row p^h(x, .) as (y, probability) pairs over y >= 0.
    pub fn row(&self, x: u64) -> Result<Vec<(i64, f64)>> {
        if x > self.x_max {
            return Err(Error::Precondition(format!(
                "state {x} beyond tabulated kernel range {}",
                self.x_max
            )));
        }
        let hx = self.h[x as usize];
        let mut out = Vec::with_capacity(self.model.support().len());
        for (&s, &p) in self.model.support().iter().zip(self.model.probs()) {
            let y = x as i64 + s;
            if y >= 0 {
                out.push((y, p * self.h[y as usize] / hx));
            }
        }
        Ok(out)
    }

    /// One step of the conditioned chain from state x.
    pub fn sample_step(&self, x: u64, rng: &mut ChaCha12Rng) -> u64 {
        debug_assert!(x <= self.x_max);
        let hx = self.h[x as usize];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = x as i64;
        for (&s, &p) in self.model.support().iter().zip(self.model.probs()) {
            let y = x as i64 + s;
            if y >= 0 {
                acc += p * self.h[y as usize] / hx;
                last = y;
                if u < acc {
                    return y as u64;
                }
            }
        }
        last as u64
    }
}

/// One conditioned path S_0 = 0, ..., S_n.
pub fn simulate_conditioned(
    kernel: &ConditionedKernel,
    n: u64,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<u64>> {
    let mut path = Vec::with_capacity(n as usize + 1);
    let mut x = 0u64;
    path.push(x);
    for _ in 0..n {
        if x > kernel.x_max() {
            return Err(Error::Precondition(format!(
                "conditioned chain left the tabulated range at state {x}"
            )));
        }
        x = kernel.sample_step(x, rng);
        path.push(x);
    }
    Ok(path)
}

/// P^h(the conditioned chain stays at or above g up to n) along an
/// increasing grid, coupled per path so the curve is nonincreasing.
///
/// Crossings are only counted from the first time the boundary is
/// reachable at all (k0 = min{k : g(k) <= k * max_step}): started at 0,
/// the chain sits below any boundary with g(1) > max_step for a deterministic
/// initial stretch, and counting those forced "crossings" would collapse
/// the plateau -- which estimates the probability of eventually staying
/// above g, the quantity the i.o. dichotomy is about -- to zero for every
/// constant boundary.
pub fn estimate_never_cross(
    kernel: &ConditionedKernel,
    g: &Boundary,
    n_grid: &[u64],
    n_paths: u64,
    stream: RngStream,
) -> Result<SurvivalCurve> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone("n_grid must be increasing".into()));
    }
    let n_max = *n_grid.last().unwrap();
    let gv = g.values_up_to(n_max)?;
    let dim = n_grid.len();
    let grid = n_grid.to_vec();
    let range_ok = probe_range(kernel, n_max)?;
    debug_assert!(range_ok);
    let max_step = kernel.model.max_step().max(0) as u64;
    let k0 = (1..=n_max)
        .find(|&k| gv[k as usize] <= (k * max_step) as f64)
        .unwrap_or(n_max + 1);
    let acc = mc_mean_vec(n_paths, stream, dim, |rng, out| {
        let mut x = 0u64;
        let mut idx = 0;
        for n in 1..=n_max {
            x = kernel.sample_step(x, rng);
            if n >= k0 && (x as f64) < gv[n as usize] {
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

/// The chain can climb at most max_step per step; refuse horizons that
/// could leave the tabulated kernel range.
fn probe_range(kernel: &ConditionedKernel, n_max: u64) -> Result<bool> {
    let reach = n_max.saturating_mul(kernel.model.max_step().max(0) as u64);
    if reach > kernel.x_max() {
        return Err(Error::Precondition(format!(
            "horizon {n_max} can reach state {reach}, kernel tabulated to {}",
            kernel.x_max()
        )));
    }
    Ok(true)
}

/// Unbiased importance-sampling estimate of P(T > n) under the original
/// walk, driven by the conditioned chain with weight h(0) / h(S_n).
///
/// `g = None` estimates P(T_0 > n); `Some(g)` with g >= 0 estimates the
/// survival of the shrinking-target passage time min{k : S_k < g(k)}.
pub fn importance_survival(
    kernel: &ConditionedKernel,
    g: Option<&Boundary>,
    n: u64,
    n_paths: u64,
    stream: RngStream,
) -> Result<Estimate> {
    let gv = match g {
        Some(g) => {
            let v = g.values_up_to(n)?;
            if v.iter().any(|&x| x < 0.0) {
                return Err(Error::Precondition(
                    "importance sampling needs g >= 0".into(),
                ));
            }
            Some(v)
        }
        None => None,
    };
    probe_range(kernel, n)?;
    let h0 = kernel.h_at(0);
    let est = mc_mean(n_paths, stream, |rng| {
        let mut x = 0u64;
        for k in 1..=n {
            x = kernel.sample_step(x, rng);
            if let Some(gv) = &gv {
                if (x as f64) < gv[k as usize] {
                    return 0.0;
                }
            }
        }
        h0 / kernel.h_at(x)
    });
    Ok(est)
}
