//! The factorization upper bound for boundary crossing: from the one-step
//! positivity sequence b_n = P(S_n >= -g(n)) the recursion
//! n q_n = sum_{k=1}^n b_k q_{n-k} produces a sequence dominating
//! P(T_g > n); for g identically 0 it reproduces P(T_0 > n) exactly, and
//! the correction sequence r_n = P(-g(n) <= S_n <= 0) controls the
//! constant R(1) = exp(sum r_n / n) sandwiching the ratio.

use crate::boundary::{additivity_check, AdditivityMode, AdditivityReport, Boundary};
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::increments::LatticeModel;
use crate::oracle::{dp_scan_unconstrained, dp_survival_rational, Weight};
use crate::passage::PassageKind;
use num_rational::BigRational;

/// b_n and r_n for n = 0..=n_max (index 0 is the trivial P(S_0 >= ...) = 1
/// and r_0 = 1; the recursion only consumes indices >= 1).
#[derive(Debug, Clone)]
pub struct PositivitySequence<W> {
    pub b: Vec<W>,
    pub r: Vec<W>,
}

/// Exact positivity sequences in one DP sweep over the unconstrained walk.
pub fn positivity_dp<W: Weight>(
    model: &LatticeModel,
    g: &Boundary,
    n_max: u64,
) -> Result<PositivitySequence<W>> {
    let gv = g.values_up_to(n_max)?;
    if gv.iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("positivity sequences need g >= 0".into()));
    }
    let mut b = vec![W::one(); n_max as usize + 1];
    let mut r = vec![W::one(); n_max as usize + 1];
    dp_scan_unconstrained::<W>(model, n_max, |n, marginal| {
        let gn = gv[n as usize];
        let mut bn = W::zero();
        let mut rn = W::zero();
        for (&pos, w) in marginal {
            let x = pos as f64;
            if x >= -gn {
                bn.add_assign_ref(w);
                if x <= 0.0 {
                    rn.add_assign_ref(w);
                }
            }
        }
        b[n as usize] = bn;
        r[n as usize] = rn;
    });
    Ok(PositivitySequence { b, r })
}

/// The dominating sequence: q_0 = 1, n q_n = sum_{k=1}^n b_k q_{n-k}.
pub fn qn_sequence<W: Weight>(b: &[W]) -> Vec<W> {
    let mut q = Vec::with_capacity(b.len());
    q.push(W::one());
    for n in 1..b.len() {
        let mut s = W::zero();
        for k in 1..=n {
            let t = b[k].mul_ref(&q[n - k]);
            s.add_assign_ref(&t);
        }
        q.push(s.div_n(n as u64));
    }
    q
}

/// Truncated estimate of R(1) = exp(sum_{n>=1} r_n / n) with a power-law
/// tail bound fitted to the last decade of r.
#[derive(Debug, Clone, Copy)]
pub struct R1Estimate {
    /// exp of the partial sum up to n_max.
    pub value: f64,
    /// Upper bound including the fitted tail; infinite when divergent.
    pub upper: f64,
    /// Fitted decay exponent of r_n over the last decade (NaN if r dies out).
    pub slope: f64,
    /// r_n is not decaying fast enough for the series to converge.
    pub divergent: bool,
}

pub fn r1_estimate(r: &[f64]) -> R1Estimate {
    let n_max = r.len() - 1;
    let partial: f64 = (1..=n_max).map(|n| r[n] / n as f64).sum();
    let lo = (n_max / 10).max(1);
    let pts: Vec<(f64, f64)> = (lo..=n_max)
        .filter(|&n| r[n] > 0.0)
        .map(|n| (n as f64, r[n]))
        .collect();
    if pts.len() < 4 {
        // The correction sequence died out; the truncation is exact.
        return R1Estimate {
            value: partial.exp(),
            upper: partial.exp(),
            slope: f64::NAN,
            divergent: false,
        };
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, _) = loglog_fit(&xs, &ys);
    if slope > -0.2 {
        return R1Estimate {
            value: partial.exp(),
            upper: f64::INFINITY,
            slope,
            divergent: true,
        };
    }
    // sum_{n > N} r_n / n <= r_N N^{-s-1} sum n^s ~ r_N / (-s).
    let tail = ys.last().unwrap() / (-slope);
    R1Estimate {
        value: partial.exp(),
        upper: (partial + tail).exp(),
        slope,
        divergent: false,
    }
}

/// One row of the sandwich report.
#[derive(Debug, Clone, Copy)]
pub struct BoundRow {
    pub n: u64,
    pub b: f64,
    pub r: f64,
    pub q: f64,
    pub p_tg: f64,
    pub p_t0: f64,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Indices n with q_n < P(T_g > n) under exact rational comparison.
    pub violations: Vec<u64>,
    /// max_n P(T_g > n) / P(T_0 > n).
    pub max_sandwich_ratio: f64,
    pub r1: R1Estimate,
    pub superadditivity: AdditivityReport,
}

const SUPERADD_TOL: f64 = 1e-9;

/// Exact rational verification that q dominates P(T_g > n), plus the
/// R(1) sandwich on P(T_g > n) / P(T_0 > n). Requires superadditive g.
pub fn bound_check(model: &LatticeModel, g: &Boundary, n_max: u64) -> Result<BoundReport> {
    let gv = g.values_up_to(n_max)?;
    let grid: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    let superadditivity = additivity_check(
        |x| gv[x as usize],
        &grid,
        AdditivityMode::Super,
    );
    if !superadditivity.passes(SUPERADD_TOL) {
        return Err(Error::Precondition(format!(
            "g is not superadditive: violation {} at {:?}",
            superadditivity.worst_violation, superadditivity.argmax
        )));
    }
    let seq = positivity_dp::<BigRational>(model, g, n_max)?;
    let q = qn_sequence(&seq.b);
    let p_tg = dp_survival_rational(model, g, PassageKind::LowerCurve, n_max)?;
    let p_t0 = dp_survival_rational(model, &Boundary::zero(), PassageKind::ConstantZero, n_max)?;
    let mut rows = Vec::with_capacity(n_max as usize + 1);
    let mut violations = Vec::new();
    let mut max_ratio = 1.0f64;
    for n in 0..=n_max as usize {
        if q[n] < p_tg[n] {
            violations.push(n as u64);
        }
        let row = BoundRow {
            n: n as u64,
            b: seq.b[n].to_f64(),
            r: seq.r[n].to_f64(),
            q: q[n].to_f64(),
            p_tg: p_tg[n].to_f64(),
            p_t0: p_t0[n].to_f64(),
        };
        if row.p_t0 > 0.0 {
            max_ratio = max_ratio.max(row.p_tg / row.p_t0);
        }
        rows.push(row);
    }
    let r_f64: Vec<f64> = seq.r.iter().map(|x| x.to_f64()).collect();
    Ok(BoundReport {
        rows,
        violations,
        max_sandwich_ratio: max_ratio,
        r1: r1_estimate(&r_f64),
        superadditivity,
    })
}
