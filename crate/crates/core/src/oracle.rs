//! Exact dynamic-programming ground truth for lattice models: survival
//! probabilities under any boundary, walk marginals, the ladder-height pmf
//! and the exact renewal function h.
//!
//! Two arithmetic backends share one forward-propagation core: exact big
//! rationals (acceptance-grade, n <= 512) and f64 with compensated
//! summation (curve-grade, n <= 2^14). Boundary values are never rounded;
//! the crossing test compares an integer position against the real g(n).

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::increments::LatticeModel;
use crate::passage::PassageKind;
use crate::stats::{Provenance, SurvivalCurve};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Arithmetic backend for the DP mass propagation.
pub trait Weight: Clone + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_prob(p: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    /// Exact (or best-effort) division by a positive integer.
    fn div_n(&self, n: u64) -> Self;
    /// Total mass of a slice; the f64 backend compensates the summation.
    fn total(slice: &[Self]) -> Self;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_prob(p: f64) -> Self {
        p
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += *other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_n(&self, n: u64) -> Self {
        self / n as f64
    }
    fn total(slice: &[Self]) -> Self {
        // Kahan-Neumaier compensated sum.
        let mut sum = 0.0;
        let mut c = 0.0;
        for &x in slice {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                c += (sum - t) + x;
            } else {
                c += (x - t) + sum;
            }
            sum = t;
        }
        sum + c
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_prob(p: f64) -> Self {
        // f64 probabilities are dyadic rationals; the conversion is exact.
        BigRational::from_float(p).expect("finite probability")
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_n(&self, n: u64) -> Self {
        self / BigRational::from_integer(BigInt::from(n))
    }
    fn total(slice: &[Self]) -> Self {
        let mut s: BigRational = Zero::zero();
        for x in slice {
            s += x;
        }
        s
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    // Scale down huge numerator/denominator pairs before converting.
    let numer = r.numer();
    let denom = r.denom();
    let nb = numer.bits() as i64;
    let db = denom.bits() as i64;
    let shift = (nb.max(db) - 900).max(0) as u64;
    let n = numer >> shift;
    let d = denom >> shift;
    let nf = bigint_f64(&n);
    let df = bigint_f64(&d);
    nf / df
}

fn bigint_f64(x: &BigInt) -> f64 {
    let (sign, digits) = x.to_u64_digits();
    let mut v = 0.0;
    for &d in digits.iter().rev() {
        v = v * 1.8446744073709552e19 + d as f64;
    }
    if sign == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// Kill threshold at time n: states with S_n strictly below it are absorbed.
fn kill_threshold(kind: PassageKind, g: &[f64], n: usize) -> f64 {
    match kind {
        PassageKind::LowerCurve => -g[n],
        PassageKind::Shrinking => g[n],
        PassageKind::ConstantZero => 0.0,
    }
}

struct DpCore<W: Weight> {
    lo: i64,
    cur: Vec<W>,
    next: Vec<W>,
    active: (i64, i64),
    steps: Vec<(i64, W)>,
}

impl<W: Weight> DpCore<W> {
    fn new(model: &LatticeModel, n_max: u64) -> Self {
        let n = n_max as i64;
        let lo = n * model.min_step().min(0) - 1;
        let hi = n * model.max_step().max(0) + 1;
        let len = (hi - lo + 1) as usize;
        let mut cur = vec![W::zero(); len];
        cur[(0 - lo) as usize] = W::one();
        let steps = model
            .support()
            .iter()
            .zip(model.probs())
            .map(|(&s, &p)| (s, W::from_prob(p)))
            .collect();
        Self {
            lo,
            cur,
            next: vec![W::zero(); len],
            active: (0, 0),
            steps,
        }
    }

    /// One propagation step; returns nothing, `self.active` tracks the
    /// surviving position window.
    fn step(&mut self) {
        let (alo, ahi) = self.active;
        let smin = self.steps.iter().map(|&(s, _)| s).min().unwrap();
        let smax = self.steps.iter().map(|&(s, _)| s).max().unwrap();
        let nlo = alo + smin;
        let nhi = ahi + smax;
        for pos in nlo..=nhi {
            self.next[(pos - self.lo) as usize] = W::zero();
        }
        for pos in alo..=ahi {
            let idx = (pos - self.lo) as usize;
            if self.cur[idx].is_zero() {
                continue;
            }
            let m = self.cur[idx].clone();
            for (s, p) in &self.steps {
                let t = m.mul_ref(p);
                self.next[(pos + s - self.lo) as usize].add_assign_ref(&t);
            }
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        self.active = (nlo, nhi);
    }

    /// Absorb states strictly below `threshold`; returns the absorbed mass
    /// grouped by position.
    fn kill_below(&mut self, threshold: f64) -> Vec<(i64, W)> {
        let (alo, ahi) = self.active;
        let mut absorbed = Vec::new();
        let mut new_lo = alo;
        for pos in alo..=ahi {
            if (pos as f64) < threshold {
                let idx = (pos - self.lo) as usize;
                if !self.cur[idx].is_zero() {
                    absorbed.push((pos, std::mem::replace(&mut self.cur[idx], W::zero())));
                }
                new_lo = pos + 1;
            } else {
                break;
            }
        }
        self.active = (new_lo.min(ahi), ahi);
        absorbed
    }

    fn surviving_mass(&self) -> W {
        let (alo, ahi) = self.active;
        if alo > ahi {
            return W::zero();
        }
        let a = (alo - self.lo) as usize;
        let b = (ahi - self.lo) as usize;
        W::total(&self.cur[a..=b])
    }

    fn mass_map(&self) -> BTreeMap<i64, W> {
        let (alo, ahi) = self.active;
        let mut out = BTreeMap::new();
        for pos in alo..=ahi {
            let w = &self.cur[(pos - self.lo) as usize];
            if !w.is_zero() {
                out.insert(pos, w.clone());
            }
        }
        out
    }
}

/// Exact survival probabilities P(T > n) for n = 0..=n_max under the given
/// passage kind, in the requested arithmetic backend.
pub fn dp_survival_weights<W: Weight>(
    model: &LatticeModel,
    g: &Boundary,
    kind: PassageKind,
    n_max: u64,
) -> Result<Vec<W>> {
    let gv = g.values_up_to(n_max)?;
    let mut core = DpCore::<W>::new(model, n_max);
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(W::one());
    for n in 1..=n_max as usize {
        core.step();
        core.kill_below(kill_threshold(kind, &gv, n));
        out.push(core.surviving_mass());
    }
    Ok(out)
}

/// Exact survival curve, f64 backend, provenance `dp-exact`.
pub fn dp_survival(
    model: &LatticeModel,
    g: &Boundary,
    kind: PassageKind,
    n_max: u64,
) -> Result<SurvivalCurve> {
    let w = dp_survival_weights::<f64>(model, g, kind, n_max)?;
    Ok(SurvivalCurve {
        n: (0..=n_max).collect(),
        prob: w,
        stderr: vec![0.0; n_max as usize + 1],
        n_paths: 0,
        provenance: Provenance::DpExact,
    })
}

/// Rational-exact survival sequence.
pub fn dp_survival_rational(
    model: &LatticeModel,
    g: &Boundary,
    kind: PassageKind,
    n_max: u64,
) -> Result<Vec<BigRational>> {
    dp_survival_weights::<BigRational>(model, g, kind, n_max)
}

/// Exact marginal law of S_n, optionally restricted to the survival event
/// of the given passage problem.
pub fn dp_marginal<W: Weight>(
    model: &LatticeModel,
    n: u64,
    constraint: Option<(&Boundary, PassageKind)>,
) -> Result<BTreeMap<i64, W>> {
    let mut core = DpCore::<W>::new(model, n);
    let gv = match constraint {
        Some((g, _)) => g.values_up_to(n)?,
        None => vec![0.0; n as usize + 1],
    };
    for m in 1..=n as usize {
        core.step();
        if let Some((_, kind)) = constraint {
            core.kill_below(kill_threshold(kind, &gv, m));
        }
    }
    Ok(core.mass_map())
}

/// Scan the unconstrained walk, calling `visit(n, marginal)` at each step.
/// Used by the Wiener-Hopf module to extract the positivity sequences in a
/// single O(n_max^2) pass.
pub fn dp_scan_unconstrained<W: Weight>(
    model: &LatticeModel,
    n_max: u64,
    mut visit: impl FnMut(u64, &BTreeMap<i64, W>),
) {
    let mut core = DpCore::<W>::new(model, n_max);
    for n in 1..=n_max {
        core.step();
        visit(n, &core.mass_map());
    }
}

/// The exact strict-descending ladder-height pmf.
#[derive(Debug, Clone)]
pub struct LadderPmf {
    /// P(chi = j) for j = 1..=|min step|.
    pub pmf: Vec<f64>,
    /// Mass not yet absorbed when the run stopped: truncation error plus,
    /// for drifting walks, the defect P(T_0 = infinity).
    pub residual: f64,
    pub steps: u64,
}

impl LadderPmf {
    pub fn prob(&self, height: u32) -> f64 {
        self.pmf.get(height as usize - 1).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }
}

const LADDER_STEP_CAP: u64 = 1 << 14;

/// Absorbed-walk DP for the law of chi = -S_{T_0}.
///
/// Skip-free-down oscillating walks have chi = 1 exactly. Drifting walks
/// converge geometrically; the stalled unabsorbed mass is reported as the
/// residual. Mean-zero walks with down-jumps deeper than 1 shed mass only
/// polynomially and cannot reach a tight tol: that case errors out.
pub fn exact_ladder_height_pmf(model: &LatticeModel, tol: f64) -> Result<LadderPmf> {
    if !(tol > 0.0 && tol <= 1e-10) {
        return Err(Error::Precondition(format!(
            "tol must lie in (0, 1e-10], got {tol}"
        )));
    }
    let depth = (-model.min_step()) as usize;
    if depth == 0 {
        return Err(Error::InvalidModel(
            "walk has no downward step; T_0 is infinite".into(),
        ));
    }
    if model.skip_free_down() && model.mean() <= 0.0 {
        return Ok(LadderPmf {
            pmf: vec![1.0],
            residual: 0.0,
            steps: 0,
        });
    }

    let mut core = DpCore::<f64>::new(model, LADDER_STEP_CAP);
    let mut pmf = vec![0.0; depth];
    let mut absorbed_total = 0.0;
    let mut window_absorbed = 0.0;
    let mut next_check = 64u64;
    for n in 1..=LADDER_STEP_CAP {
        core.step();
        for (pos, mass) in core.kill_below(0.0) {
            let height = (-pos) as usize;
            pmf[height - 1] += mass;
            absorbed_total += mass;
            window_absorbed += mass;
        }
        let residual = 1.0 - absorbed_total;
        if residual < tol {
            return Ok(LadderPmf {
                pmf,
                residual,
                steps: n,
            });
        }
        if n == next_check {
            if window_absorbed < tol * 1e-2 {
                // Stalled: geometric convergence has flattened out.
                return Ok(LadderPmf {
                    pmf,
                    residual,
                    steps: n,
                });
            }
            window_absorbed = 0.0;
            next_check *= 2;
        }
    }
    Err(Error::MassNotDecaying {
        tol,
        residual: 1.0 - absorbed_total,
        steps: LADDER_STEP_CAP,
    })
}

/// The exact renewal function of the ladder-height process on 0..=x_max.
#[derive(Debug, Clone)]
pub struct ExactRenewal {
    h: Vec<f64>,
    pub pmf_residual: f64,
}

impl ExactRenewal {
    pub fn value(&self, x: u64) -> f64 {
        self.h[x as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn x_max(&self) -> u64 {
        self.h.len() as u64 - 1
    }

    /// Crude interval half-width from the pmf truncation.
    pub fn uncertainty(&self, x: u64) -> f64 {
        self.pmf_residual * (x as f64 + 1.0) * self.h[x as usize]
    }
}

/// h(x) = sum over m of P(chi_1 + ... + chi_m <= x), by the renewal
/// recursion on the integers. h(0) = 1 exactly.
pub fn exact_renewal_h(pmf: &LadderPmf, x_max: u64) -> Result<ExactRenewal> {
    if pmf.residual >= 1e-10 {
        return Err(Error::Precondition(format!(
            "ladder pmf residual {} too large for exact renewal",
            pmf.residual
        )));
    }
    let len = x_max as usize + 1;
    let mut u = vec![0.0; len];
    u[0] = 1.0;
    for x in 1..len {
        let mut s = 0.0;
        for (j, &p) in pmf.pmf.iter().enumerate() {
            let step = j + 1;
            if step <= x {
                s += p * u[x - step];
            }
        }
        u[x] = s;
    }
    let mut h = Vec::with_capacity(len);
    let mut acc = 0.0;
    for v in u {
        acc += v;
        h.push(acc);
    }
    Ok(ExactRenewal {
        h,
        pmf_residual: pmf.residual,
    })
}

/// Convenience: exact h for a lattice model (pmf at tol 1e-12).
pub fn exact_h_for(model: &LatticeModel, x_max: u64) -> Result<ExactRenewal> {
    let pmf = exact_ladder_height_pmf(model, 1e-12)?;
    exact_renewal_h(&pmf, x_max)
}

/// C(n, floor(n/2)) 2^{-n}: the closed-form survival of T_0 for the simple
/// walk, exact in u128 arithmetic for n <= 120.
pub fn simple_walk_survival_closed_form(n: u64) -> f64 {
    assert!(n <= 120);
    let k = n / 2;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    (num as f64 / den as f64) / 2f64.powi(n as i32)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
