//! First passage over moving boundaries: T_g (first entry below -g(n)),
//! the shrinking-target variant (first entry below g(n)), the ladder
//! decomposition of T_g, survival and ratio curves, and the V(g) traces
//! E[h(S_n +/- g(n)); no crossing by n].

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::increments::IncrementModel;
use crate::ladder::HFun;
use crate::rng::RngStream;
use crate::stats::{map_reduce_paths, mc_mean_vec, Accum, Provenance, SurvivalCurve};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Which crossing event defines the passage time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassageKind {
    /// T_g = min{n >= 1 : S_n < -g(n)}.
    LowerCurve,
    /// min{n >= 1 : S_n < g(n)}, the walk started above a closing target.
    Shrinking,
    /// T_0: crossing below zero (LowerCurve with g identically 0).
    ConstantZero,
}

impl PassageKind {
    fn threshold(self, g: f64) -> f64 {
        match self {
            PassageKind::LowerCurve => -g,
            PassageKind::Shrinking => g,
            PassageKind::ConstantZero => 0.0,
        }
    }
}

/// Result of one passage simulation. `time` is `None` when the path was
/// censored at the horizon; `overshoot` = S_T - threshold(T) < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageOutcome {
    pub kind: PassageKind,
    pub time: Option<u64>,
    pub overshoot: Option<f64>,
}

impl PassageOutcome {
    pub fn is_censored(&self) -> bool {
        self.time.is_none()
    }
}

/// Scan a fixed increment sequence for the first crossing; `gv[n]` must
/// hold g(n) for n = 0..=steps.len(). Returns (time, overshoot).
pub fn passage_from_steps(steps: &[f64], gv: &[f64], kind: PassageKind) -> Option<(u64, f64)> {
    let mut s = 0.0;
    for (i, &dx) in steps.iter().enumerate() {
        let n = i + 1;
        s += dx;
        let thr = kind.threshold(gv[n]);
        if s < thr {
            return Some((n as u64, s - thr));
        }
    }
    None
}

/// Simulate one path up to `horizon`.
pub fn simulate_passage(
    model: &IncrementModel,
    g: &Boundary,
    kind: PassageKind,
    horizon: u64,
    rng: &mut ChaCha12Rng,
) -> Result<PassageOutcome> {
    let gv = g.values_up_to(horizon)?;
    let mut s = 0.0;
    for n in 1..=horizon {
        s += model.sample(rng);
        let thr = kind.threshold(gv[n as usize]);
        if s < thr {
            return Ok(PassageOutcome {
                kind,
                time: Some(n),
                overshoot: Some(s - thr),
            });
        }
    }
    Ok(PassageOutcome {
        kind,
        time: None,
        overshoot: None,
    })
}

/// The ladder decomposition of one path: T_g equals the cumulative epoch
/// sum over the first nu strict descending ladder epochs, where nu is the
/// first k at which the cumulative ladder height exceeds g evaluated at the
/// cumulative epoch time.
///
/// Valid for nondecreasing g >= 0 (the first crossing then happens at a
/// strict new minimum).
#[derive(Debug, Clone, PartialEq)]
pub struct LadderDecomposition {
    pub nu: u64,
    pub t_reconstructed: u64,
    /// (cumulative time, cumulative height) at each ladder epoch up to nu.
    pub epochs: Vec<(u64, f64)>,
}

/// Extract the decomposition from a fixed increment sequence; `None` when
/// the height sum never exceeds the boundary within the sequence.
pub fn ladder_decomposition(steps: &[f64], gv: &[f64]) -> Option<LadderDecomposition> {
    let mut s = 0.0;
    let mut min = 0.0;
    let mut epochs = Vec::new();
    for (i, &dx) in steps.iter().enumerate() {
        let n = (i + 1) as u64;
        s += dx;
        if s < min {
            min = s;
            epochs.push((n, -s));
            if -s > gv[n as usize] {
                return Some(LadderDecomposition {
                    nu: epochs.len() as u64,
                    t_reconstructed: n,
                    epochs,
                });
            }
        }
    }
    None
}

/// Monte Carlo estimate of E[nu] for T_g's ladder decomposition.
#[derive(Debug, Clone, Copy)]
pub struct NuEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub censored_fraction: f64,
    /// Mean of nu when the horizon is halved; a materially smaller value
    /// signals an estimate still growing with the horizon.
    pub mean_half_horizon: f64,
    pub growing_with_horizon: bool,
}

const NU_CENSOR_LIMIT: f64 = 0.01;

pub fn estimate_e_nu(
    model: &IncrementModel,
    g: &Boundary,
    horizon: u64,
    n_paths: u64,
    stream: RngStream,
) -> Result<NuEstimate> {
    let gv = g.values_up_to(horizon)?;
    if gv.windows(2).any(|w| w[0] > w[1]) || gv[0] < 0.0 {
        return Err(Error::Precondition(
            "ladder decomposition needs nondecreasing g >= 0".into(),
        ));
    }
    let half = horizon / 2;
    let (full, half_acc, censored) = map_reduce_paths(
        n_paths,
        stream,
        |rng, paths| {
            let mut full = Accum::default();
            let mut half_acc = Accum::default();
            let mut censored = 0u64;
            for _ in 0..paths {
                let mut s = 0.0;
                let mut min = 0.0;
                let mut k = 0u64;
                let mut done = false;
                for n in 1..=horizon {
                    s += model.sample(rng);
                    if s < min {
                        min = s;
                        k += 1;
                        if -s > gv[n as usize] {
                            full.push(k as f64);
                            if n <= half {
                                half_acc.push(k as f64);
                            }
                            done = true;
                            break;
                        }
                    }
                }
                if !done {
                    censored += 1;
                }
            }
            (full, half_acc, censored)
        },
        |(mut a, mut b, c), (a2, b2, c2)| {
            a.merge(&a2);
            b.merge(&b2);
            (a, b, c + c2)
        },
    );
    let fraction = censored as f64 / n_paths as f64;
    if fraction > NU_CENSOR_LIMIT {
        return Err(Error::ExcessiveCensoring {
            fraction,
            limit: NU_CENSOR_LIMIT,
        });
    }
    let mean = full.mean();
    let mean_half = half_acc.mean();
    let growing = half_acc.n > 0 && mean > mean_half * 1.05 + 3.0 * full.stderr();
    Ok(NuEstimate {
        mean,
        stderr: full.stderr(),
        n_paths: full.n,
        censored_fraction: fraction,
        mean_half_horizon: mean_half,
        growing_with_horizon: growing,
    })
}

/// Monte Carlo survival curve P(T > n) on an increasing grid; the per-path
/// indicators are nonincreasing so the curve is too.
pub fn survival_curve(
    model: &IncrementModel,
    g: &Boundary,
    kind: PassageKind,
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
    let acc = mc_mean_vec(n_paths, stream, dim, |rng, out| {
        let mut s = 0.0;
        let mut idx = 0;
        for n in 1..=n_max {
            s += model.sample(rng);
            if s < kind.threshold(gv[n as usize]) {
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

/// Pointwise ratio of two survival curves on a common grid.
#[derive(Debug, Clone)]
pub struct RatioCurve {
    pub n: Vec<u64>,
    pub ratio: Vec<f64>,
    pub stderr: Vec<f64>,
    /// True when both curves were driven by the same stream; the error bars
    /// then use the independent-stream formula, which is conservative.
    pub coupled: bool,
}

pub fn ratio_curve(num: &SurvivalCurve, den: &SurvivalCurve, coupled: bool) -> Result<RatioCurve> {
    if num.n != den.n {
        return Err(Error::GridMismatch(
            "ratio curves need identical n grids".into(),
        ));
    }
    let mut n = Vec::new();
    let mut ratio = Vec::new();
    let mut stderr = Vec::new();
    for i in 0..num.n.len() {
        if den.prob[i] <= 0.0 {
            continue;
        }
        let r = num.prob[i] / den.prob[i];
        let rel2 = if num.prob[i] > 0.0 {
            (num.stderr[i] / num.prob[i]).powi(2) + (den.stderr[i] / den.prob[i]).powi(2)
        } else {
            (den.stderr[i] / den.prob[i]).powi(2)
        };
        n.push(num.n[i]);
        ratio.push(r);
        stderr.push(r.abs() * rel2.sqrt());
    }
    Ok(RatioCurve {
        n,
        ratio,
        stderr,
        coupled,
    })
}

/// Which martingale-type trace to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VgVariant {
    /// E[h(S_n + g(n)); T_g > n] -- nondecreasing in n (submartingale side).
    Sub,
    /// E[h(S_n - g(n)); crossing of the shrinking target after n] --
    /// nonincreasing in n (supermartingale side).
    Super,
}

/// A Monte Carlo trace of the boundary functional V along an n grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VgTrace {
    pub variant: VgVariant,
    pub n: Vec<u64>,
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: u64,
}

impl VgTrace {
    pub fn final_value(&self) -> f64 {
        *self.value.last().unwrap()
    }

    /// True when the trace is monotone in the variant's direction up to
    /// `slack` standard errors per comparison.
    pub fn is_monotone_within(&self, slack: f64) -> bool {
        self.value
            .windows(2)
            .zip(self.stderr.windows(2))
            .all(|(v, e)| {
                let tol = slack * (e[0] * e[0] + e[1] * e[1]).sqrt();
                match self.variant {
                    VgVariant::Sub => v[1] >= v[0] - tol,
                    VgVariant::Super => v[1] <= v[0] + tol,
                }
            })
    }
}

/// Estimate V along `n_grid` using the renewal evaluator `h`. The dead
/// state contributes 0 (h vanishes on the negative half line).
pub fn estimate_v(
    model: &IncrementModel,
    g: &Boundary,
    variant: VgVariant,
    h: &HFun,
    n_grid: &[u64],
    n_paths: u64,
    stream: RngStream,
) -> Result<VgTrace> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone("n_grid must be increasing".into()));
    }
    let n_max = *n_grid.last().unwrap();
    let gv = g.values_up_to(n_max)?;
    let kind = match variant {
        VgVariant::Sub => PassageKind::LowerCurve,
        VgVariant::Super => PassageKind::Shrinking,
    };
    let dim = n_grid.len();
    let grid = n_grid.to_vec();
    let (acc, overflow) = map_reduce_paths(
        n_paths,
        stream,
        |rng, paths| {
            let mut acc = crate::stats::VecAccum::zeros(dim);
            let mut buf = vec![0.0; dim];
            let mut overflow = false;
            for _ in 0..paths {
                buf.iter_mut().for_each(|x| *x = 0.0);
                let mut s = 0.0;
                let mut idx = 0;
                for n in 1..=n_max {
                    s += model.sample(rng);
                    let gn = gv[n as usize];
                    if s < kind.threshold(gn) {
                        break;
                    }
                    while idx < dim && grid[idx] == n {
                        let arg = match variant {
                            VgVariant::Sub => s + gn,
                            VgVariant::Super => s - gn,
                        };
                        match h.eval(arg) {
                            Ok(v) => buf[idx] = v,
                            Err(_) => overflow = true,
                        }
                        idx += 1;
                    }
                }
                acc.push(&buf);
            }
            (acc, overflow)
        },
        |(mut a, oa), (b, ob)| {
            a.merge(&b);
            (a, oa || ob)
        },
    );
    if overflow {
        return Err(Error::ExtrapolationTooFar {
            x: f64::NAN,
            grid_max: h.grid_max(),
        });
    }
    Ok(VgTrace {
        variant,
        n: grid,
        value: (0..dim).map(|i| acc.mean(i)).collect(),
        stderr: (0..dim).map(|i| acc.stderr(i)).collect(),
        n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dp_survival, exact_h_for, simple_walk_survival_closed_form};

    fn simple() -> IncrementModel {
        IncrementModel::rademacher()
    }

    fn draw_steps(model: &IncrementModel, n: u64, rng: &mut ChaCha12Rng) -> Vec<f64> {
        (0..n).map(|_| model.sample(rng)).collect()
    }

    #[test]
    fn zero_boundary_matches_t0_closed_form() {
        let m = simple();
        let c = survival_curve(
            &m,
            &Boundary::zero(),
            PassageKind::LowerCurve,
            &[1, 2, 3, 8],
            300_000,
            RngStream::new(200, 0),
        )
        .unwrap();
        for i in 0..c.n.len() {
            let exact = simple_walk_survival_closed_form(c.n[i]);
            assert!(
                (c.prob[i] - exact).abs() < 3.0 * c.stderr[i] + 1e-12,
                "n = {}: {} vs {exact}",
                c.n[i],
                c.prob[i]
            );
        }
    }

    #[test]
    fn constant_boundary_matches_dp() {
        let m = IncrementModel::lattice(vec![-2, 1], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let g = Boundary::constant(1.0);
        let mc = survival_curve(
            &m,
            &g,
            PassageKind::LowerCurve,
            &[2, 5, 10],
            200_000,
            RngStream::new(201, 0),
        )
        .unwrap();
        let dp = dp_survival(m.as_lattice().unwrap(), &g, PassageKind::LowerCurve, 10).unwrap();
        for i in 0..mc.n.len() {
            let exact = dp.prob[mc.n[i] as usize];
            assert!(
                (mc.prob[i] - exact).abs() < 3.0 * mc.stderr[i] + 1e-12,
                "n = {}: {} vs {exact}",
                mc.n[i],
                mc.prob[i]
            );
        }
    }

    #[test]
    fn monotone_coupling_in_g() {
        // Pointwise larger boundaries delay the crossing on every path.
        let m = simple();
        let g0: Vec<f64> = vec![0.0; 201];
        let g2: Vec<f64> = vec![2.0; 201];
        let mut rng = RngStream::new(202, 0).rng();
        for _ in 0..500 {
            let steps = draw_steps(&m, 200, &mut rng);
            let t0 = passage_from_steps(&steps, &g0, PassageKind::LowerCurve);
            let t2 = passage_from_steps(&steps, &g2, PassageKind::LowerCurve);
            match (t0, t2) {
                (Some((a, _)), Some((b, _))) => assert!(a <= b),
                (None, Some(_)) => panic!("crossed the higher boundary only"),
                _ => {}
            }
        }
    }

    #[test]
    fn overshoot_is_negative_at_crossing() {
        let m = IncrementModel::lattice(vec![-3, 1], vec![0.25, 0.75]).unwrap();
        let mut rng = RngStream::new(203, 0).rng();
        let g = Boundary::constant(1.0);
        for _ in 0..200 {
            let out = simulate_passage(&m, &g, PassageKind::LowerCurve, 10_000, &mut rng).unwrap();
            if let Some(o) = out.overshoot {
                assert!(o < 0.0);
            }
        }
    }

    #[test]
    fn ladder_decomposition_reconstructs_passage_time() {
        let m = IncrementModel::lattice(vec![-2, 1], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let g = Boundary::power(1.0, 0.25, 1.0);
        let horizon = 4096;
        let gv = g.values_up_to(horizon).unwrap();
        let mut rng = RngStream::new(204, 0).rng();
        let mut verified = 0;
        for _ in 0..2000 {
            let steps = draw_steps(&m, horizon, &mut rng);
            let direct = passage_from_steps(&steps, &gv, PassageKind::LowerCurve);
            let dec = ladder_decomposition(&steps, &gv);
            match (direct, dec) {
                (Some((t, _)), Some(d)) => {
                    assert_eq!(d.t_reconstructed, t);
                    assert_eq!(d.epochs.len() as u64, d.nu);
                    // Height sum first exceeds g at epoch nu, not before.
                    let (un, hn) = *d.epochs.last().unwrap();
                    assert!(hn > gv[un as usize]);
                    for &(u, h) in &d.epochs[..d.epochs.len() - 1] {
                        assert!(h <= gv[u as usize]);
                    }
                    verified += 1;
                }
                (None, None) => {}
                other => panic!("decomposition disagrees with direct scan: {other:?}"),
            }
        }
        assert!(verified > 1000, "only {verified} uncensored paths");
    }

    #[test]
    fn e_nu_deterministic_cases() {
        // Simple walk: every ladder height is 1, so nu is determined by g.
        let m = simple();
        let e = estimate_e_nu(&m, &Boundary::zero(), 1 << 16, 2000, RngStream::new(205, 0)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        let e = estimate_e_nu(
            &m,
            &Boundary::constant(1.5),
            1 << 18,
            2000,
            RngStream::new(206, 0),
        )
        .unwrap();
        assert_eq!(e.mean, 2.0);
        assert!(!e.growing_with_horizon);
    }

    #[test]
    fn e_nu_censoring_refused() {
        let m = simple();
        let err = estimate_e_nu(&m, &Boundary::constant(3.0), 4, 1000, RngStream::new(207, 0));
        assert!(matches!(err, Err(Error::ExcessiveCensoring { .. })));
    }

    #[test]
    fn e_nu_rejects_decreasing_boundary() {
        let m = simple();
        let g = Boundary::Tabulated {
            grid: vec![0, 1, 2],
            values: vec![2.0, 1.0, 0.5],
        };
        assert!(matches!(
            estimate_e_nu(&m, &g, 2, 10, RngStream::new(0, 0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ratio_requires_matching_grids() {
        let m = simple();
        let a = survival_curve(
            &m,
            &Boundary::zero(),
            PassageKind::LowerCurve,
            &[1, 2],
            1000,
            RngStream::new(208, 0),
        )
        .unwrap();
        let b = survival_curve(
            &m,
            &Boundary::zero(),
            PassageKind::LowerCurve,
            &[1, 3],
            1000,
            RngStream::new(208, 1),
        )
        .unwrap();
        assert!(matches!(
            ratio_curve(&a, &b, false),
            Err(Error::GridMismatch(_))
        ));
        let r = ratio_curve(&a, &a, true).unwrap();
        assert!(r.ratio.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn v_trace_is_exactly_one_for_zero_boundary() {
        // h is harmonic for the killed walk, so E[h(S_n); T_0 > n] = 1.
        let m = simple();
        let h = exact_h_for(m.as_lattice().unwrap(), 300).unwrap();
        let hf = HFun::from_exact(&h, 1.0);
        let t = estimate_v(
            &m,
            &Boundary::zero(),
            VgVariant::Sub,
            &hf,
            &[1, 4, 16, 64],
            100_000,
            RngStream::new(209, 0),
        )
        .unwrap();
        for i in 0..t.n.len() {
            assert!(
                (t.value[i] - 1.0).abs() < 3.0 * t.stderr[i] + 1e-12,
                "n = {}: {}",
                t.n[i],
                t.value[i]
            );
        }
        assert!(t.is_monotone_within(3.0));
    }

    #[test]
    fn v_trace_refuses_deep_extrapolation() {
        let m = simple();
        let h = exact_h_for(m.as_lattice().unwrap(), 4).unwrap();
        let hf = HFun::from_exact(&h, 1.0);
        let err = estimate_v(
            &m,
            &Boundary::zero(),
            VgVariant::Sub,
            &hf,
            &[256],
            200,
            RngStream::new(210, 0),
        );
        assert!(matches!(err, Err(Error::ExtrapolationTooFar { .. })));
    }
}
