//! Step distributions attracted to stable laws: the admissible (alpha, beta)
//! region, the positivity index rho, the truncated second moment mu(u), the
//! norming sequence c(x) obtained by inverting mu on its eventually
//! decreasing branch, and reproducible samplers (inverse CDF for lattice
//! pmfs and tail mixtures, the exact trigonometric sampler for stable laws).

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

const MEAN_TOL: f64 = 1e-12;
const PROB_TOL: f64 = 1e-12;

/// Is (alpha, beta) in the admissible parameter region?
///
/// The region is the union of {0 < alpha < 1, |beta| < 1},
/// {1 < alpha < 2, |beta| <= 1}, {alpha = 1, beta = 0} and
/// {alpha = 2, beta = 0}.
pub fn admissible(alpha: f64, beta: f64) -> bool {
    if alpha > 0.0 && alpha < 1.0 {
        beta.abs() < 1.0
    } else if alpha > 1.0 && alpha < 2.0 {
        beta.abs() <= 1.0
    } else if alpha == 1.0 || alpha == 2.0 {
        beta == 0.0
    } else {
        false
    }
}

/// Positivity index rho = lim P(S_n >= 0).
///
/// Equals 1/2 at alpha = 1, otherwise
/// 1/2 + arctan(beta tan(pi alpha / 2)) / (pi alpha).
pub fn positivity_index(alpha: f64, beta: f64) -> Result<f64> {
    if !admissible(alpha, beta) {
        return Err(Error::Inadmissible { alpha, beta });
    }
    if alpha == 1.0 {
        return Ok(0.5);
    }
    Ok(0.5 + (beta * (PI * alpha / 2.0).tan()).atan() / (PI * alpha))
}

/// A finite-support integer step distribution.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    support: Vec<i64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
    second_moment: f64,
    drifted: bool,
}

impl LatticeModel {
    fn build(support: Vec<i64>, probs: Vec<f64>, allow_drift: bool) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(Error::InvalidModel(
                "lattice support/probs must be nonempty and of equal length".into(),
            ));
        }
        let mut pairs: Vec<(i64, f64)> = support.into_iter().zip(probs).collect();
        pairs.sort_by_key(|&(x, _)| x);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidModel(format!(
                    "duplicate support value {}",
                    w[0].0
                )));
            }
        }
        if pairs.iter().any(|&(_, p)| p < 0.0) {
            return Err(Error::InvalidModel("negative probability".into()));
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidModel(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mean: f64 = pairs.iter().map(|&(x, p)| x as f64 * p).sum();
        let drifted = mean.abs() > MEAN_TOL;
        if drifted && !allow_drift {
            return Err(Error::InvalidModel(format!(
                "lattice mean {mean} is not zero; use lattice_drifted for drifted walks"
            )));
        }
        let second_moment = pairs.iter().map(|&(x, p)| (x as f64).powi(2) * p).sum();
        let mut cdf = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for &(_, p) in &pairs {
            acc += p;
            cdf.push(acc);
        }
        *cdf.last_mut().unwrap() = 1.0;
        let (support, probs): (Vec<i64>, Vec<f64>) = pairs.into_iter().unzip();
        Ok(Self {
            support,
            probs,
            cdf,
            mean,
            second_moment,
            drifted,
        })
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn drifted(&self) -> bool {
        self.drifted
    }

    pub fn min_step(&self) -> i64 {
        self.support[0]
    }

    pub fn max_step(&self) -> i64 {
        *self.support.last().unwrap()
    }

    /// Walks whose only downward step is -1 never overshoot level 0.
    pub fn skip_free_down(&self) -> bool {
        self.min_step() >= -1
    }

    pub fn sample(&self, rng: &mut ChaCha12Rng) -> i64 {
        let r: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c < r);
        self.support[idx.min(self.support.len() - 1)]
    }

    /// Truncated second moment with the strict window |x| < u.
    fn mu(&self, u: f64) -> f64 {
        let mut s = 0.0;
        for (&x, &p) in self.support.iter().zip(&self.probs) {
            if (x.abs() as f64) < u {
                s += (x as f64).powi(2) * p;
            }
        }
        s / (u * u)
    }

    /// Invert mu on its eventually decreasing branch. Between support radii
    /// mu is a 1/u^2 piece, so the inversion is closed-form per segment.
    fn norming_c(&self, x: f64) -> Result<f64> {
        let target = 1.0 / x;
        // Distinct radii with cumulative second-moment mass (|x| <= a).
        let mut radii: Vec<f64> = self
            .support
            .iter()
            .filter(|&&s| s != 0)
            .map(|&s| s.abs() as f64)
            .collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup();
        if radii.is_empty() {
            return Err(Error::NormingFailed { threshold: target });
        }
        let masses: Vec<f64> = radii.iter().map(|&a| self.mu(a + 0.5) * (a + 0.5).powi(2)).collect();
        let mut c: f64 = 0.0;
        for (i, (&a, &m)) in radii.iter().zip(&masses).enumerate() {
            let next = radii.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let u = (m / target).sqrt().clamp(a, next);
            c = c.max(u);
        }
        Ok(c)
    }
}

/// A step-distribution specification carrying (alpha, beta).
#[derive(Debug, Clone)]
pub enum IncrementModel {
    Lattice(LatticeModel),
    StableExact { alpha: f64, beta: f64, scale: f64 },
    ParetoTails {
        alpha: f64,
        weight_right: f64,
        shift: f64,
    },
}

impl IncrementModel {
    /// Mean-zero lattice model (mean checked to 1e-12).
    pub fn lattice(support: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        Ok(Self::Lattice(LatticeModel::build(support, probs, false)?))
    }

    /// Lattice model with nonzero mean allowed. Drifted walks are outside
    /// the stable domain machinery (rho, c) but valid inputs for the DP
    /// oracle and the generating-function identities.
    pub fn lattice_drifted(support: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        Ok(Self::Lattice(LatticeModel::build(support, probs, true)?))
    }

    /// The simple symmetric walk (+-1 with probability 1/2).
    pub fn rademacher() -> Self {
        Self::lattice(vec![-1, 1], vec![0.5, 0.5]).unwrap()
    }

    pub fn stable(alpha: f64, beta: f64, scale: f64) -> Result<Self> {
        if !admissible(alpha, beta) {
            return Err(Error::Inadmissible { alpha, beta });
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidModel("stable scale must be positive".into()));
        }
        Ok(Self::StableExact { alpha, beta, scale })
    }

    /// Pareto-type tail mixture: +P with probability `weight_right`, -P
    /// otherwise, P standard Pareto(alpha) on [1, inf). When alpha > 1 the
    /// centering shift making the mean zero is solved in closed form.
    pub fn pareto(alpha: f64, weight_right: f64) -> Result<Self> {
        let beta = 2.0 * weight_right - 1.0;
        if !admissible(alpha, beta) {
            return Err(Error::Inadmissible { alpha, beta });
        }
        if !(0.0..=1.0).contains(&weight_right) {
            return Err(Error::InvalidModel("weight_right must lie in [0,1]".into()));
        }
        let shift = if alpha > 1.0 {
            beta * alpha / (alpha - 1.0)
        } else {
            0.0
        };
        Ok(Self::ParetoTails {
            alpha,
            weight_right,
            shift,
        })
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Self::Lattice(_) => 2.0,
            Self::StableExact { alpha, .. } | Self::ParetoTails { alpha, .. } => *alpha,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Self::Lattice(_) => 0.0,
            Self::StableExact { beta, .. } => *beta,
            Self::ParetoTails { weight_right, .. } => 2.0 * weight_right - 1.0,
        }
    }

    /// Positivity index of the attracting stable law.
    pub fn rho(&self) -> Result<f64> {
        if let Self::Lattice(l) = self {
            if l.drifted() {
                return Err(Error::InvalidModel(
                    "drifted lattice walk has no positivity index in (0,1)".into(),
                ));
            }
        }
        positivity_index(self.alpha(), self.beta())
    }

    /// Regular-variation index of the renewal function h: alpha (1 - rho).
    pub fn h_index(&self) -> Result<f64> {
        Ok(self.alpha() * (1.0 - self.rho()?))
    }

    pub fn as_lattice(&self) -> Option<&LatticeModel> {
        match self {
            Self::Lattice(l) => Some(l),
            _ => None,
        }
    }

    pub fn require_lattice(&self) -> Result<&LatticeModel> {
        self.as_lattice()
            .ok_or_else(|| Error::LatticeRequired(format!("{self:?}")))
    }

    /// mu(u) = u^{-2} E[X^2; |X| < u].
    ///
    /// Exact sum for lattice models, closed form for Pareto tails, closed
    /// form for the stable surrogate (Gaussian at alpha = 2, exact power
    /// tail with the stable tail constant for alpha < 2).
    pub fn truncated_second_moment(&self, u: f64) -> f64 {
        assert!(u > 0.0, "mu requires u > 0");
        match self {
            Self::Lattice(l) => l.mu(u),
            Self::StableExact { alpha, beta: _, scale } => stable_mu(*alpha, *scale, u),
            Self::ParetoTails {
                alpha,
                weight_right,
                shift,
            } => pareto_mu(*alpha, *weight_right, *shift, u),
        }
    }

    /// c(x): the smallest u on the eventually decreasing branch of mu with
    /// mu(v) <= 1/x for all v >= u. Nondecreasing in x.
    pub fn norming_c(&self, x: f64) -> Result<f64> {
        assert!(x >= 1.0, "norming_c requires x >= 1");
        let target = 1.0 / x;
        match self {
            Self::Lattice(l) => l.norming_c(x),
            _ => {
                let (u_peak, mu_peak) = self.mu_peak();
                if mu_peak <= target {
                    return Ok(u_peak);
                }
                // Double out to a point past the target, then bisect.
                let mut lo = u_peak;
                let mut hi = u_peak;
                let mut found = false;
                for _ in 0..2000 {
                    hi *= 2.0;
                    if self.truncated_second_moment(hi) <= target {
                        found = true;
                        break;
                    }
                    lo = hi;
                }
                if !found {
                    return Err(Error::NormingFailed { threshold: target });
                }
                for _ in 0..200 {
                    if (hi - lo) <= 1e-9 * hi {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if self.truncated_second_moment(mid) <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// Locate the maximum of mu by a geometric scan (continuous models).
    fn mu_peak(&self) -> (f64, f64) {
        let hint = match self {
            Self::Lattice(l) => l.max_step().abs().max(l.min_step().abs()) as f64,
            Self::StableExact { scale, .. } => *scale,
            Self::ParetoTails { shift, .. } => 1.0 + shift.abs(),
        };
        let mut best = (hint, self.truncated_second_moment(hint));
        let mut u = hint * 1e-3;
        let top = hint * 1e6;
        while u < top {
            let m = self.truncated_second_moment(u);
            if m > best.1 {
                best = (u, m);
            }
            u *= 1.07;
        }
        best
    }

    /// One draw from the model's law.
    pub fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            Self::Lattice(l) => l.sample(rng) as f64,
            Self::StableExact { alpha, beta, scale } => scale * sample_stable(*alpha, *beta, rng),
            Self::ParetoTails {
                alpha,
                weight_right,
                shift,
            } => {
                let branch: f64 = rng.gen();
                let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                let p = u.powf(-1.0 / alpha);
                if branch < *weight_right {
                    p - shift
                } else {
                    -p - shift
                }
            }
        }
    }
}

/// Exact trigonometric sampler for the standard stable law with
/// characteristic function exp{-|t|^alpha (1 - i beta tan(pi alpha/2) sgn t)}.
fn sample_stable(alpha: f64, beta: f64, rng: &mut ChaCha12Rng) -> f64 {
    let v = PI * (rng.gen::<f64>() - 0.5); // uniform on (-pi/2, pi/2)
    let w = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln(); // Exp(1)
    if alpha == 1.0 {
        // beta = 0 in the admissible set: standard Cauchy.
        return v.tan();
    }
    let t = beta * (PI * alpha / 2.0).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// mu(u) for the stable surrogate.
fn stable_mu(alpha: f64, scale: f64, u: f64) -> f64 {
    if alpha == 2.0 {
        // N(0, 2 scale^2) exactly.
        let v = 2.0 * scale * scale;
        let z = u / v.sqrt();
        let e = v * (erf(z / std::f64::consts::SQRT_2) - z * (2.0 / PI).sqrt() * (-0.5 * z * z).exp());
        return e / (u * u);
    }
    // Two-sided power tail P(|X| > x) = min(1, K x^{-alpha}) with the
    // stable tail constant; the sub-x* core carries no second moment.
    let k = scale.powf(alpha) * stable_tail_constant(alpha);
    let x_star = k.powf(1.0 / alpha);
    if u <= x_star {
        return 0.0;
    }
    (alpha / (2.0 - alpha)) * k * (u.powf(-alpha) - x_star * x_star * u.powi(-2))
}

/// Two-sided tail constant of the standard stable law.
fn stable_tail_constant(alpha: f64) -> f64 {
    if alpha == 1.0 {
        2.0 / PI
    } else {
        (1.0 - alpha) / (gamma(2.0 - alpha) * (PI * alpha / 2.0).cos())
    }
}

/// mu(u) for the centered Pareto mixture, exact piecewise integration.
fn pareto_mu(alpha: f64, weight_right: f64, shift: f64, u: f64) -> f64 {
    // Right branch: x = p - shift, p >= 1; left branch: x = -p - shift.
    let right = pareto_branch_integral(alpha, shift, (shift - u).max(1.0), shift + u);
    let left = pareto_branch_integral(alpha, -shift, (-shift - u).max(1.0), u - shift);
    (weight_right * right + (1.0 - weight_right) * left) / (u * u)
}

/// integral over p in [a, b) of (p - m)^2 alpha p^{-alpha-1} dp, 0 if b <= a.
fn pareto_branch_integral(alpha: f64, m: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let prim = |e: f64, p: f64| if e == 0.0 { p.ln() } else { p.powf(e) / e };
    alpha
        * ((prim(2.0 - alpha, b) - prim(2.0 - alpha, a))
            - 2.0 * m * (prim(1.0 - alpha, b) - prim(1.0 - alpha, a))
            + m * m * (prim(-alpha, b) - prim(-alpha, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn rho_reference_values() {
        assert_eq!(positivity_index(1.0, 0.0).unwrap(), 0.5);
        assert!((positivity_index(2.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        // tan(3 pi / 4) = -1, arctan(-1) = -pi/4: rho = 1/2 - 1/6 = 1/3.
        assert!((positivity_index(1.5, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rho_rejects_outside_admissible() {
        assert!(positivity_index(1.0, 0.5).is_err());
        assert!(positivity_index(2.0, 0.3).is_err());
        assert!(positivity_index(0.5, 1.0).is_err());
        assert!(positivity_index(2.5, 0.0).is_err());
    }

    #[test]
    fn rho_reflection_symmetry() {
        for &(a, b) in &[(1.5, 1.0), (0.8, 0.5)] {
            let plus = positivity_index(a, b).unwrap();
            let minus = positivity_index(a, -b).unwrap();
            assert!((plus + minus - 1.0).abs() < 1e-14, "alpha={a} beta={b}");
        }
    }

    #[test]
    fn rademacher_mu_values() {
        let m = IncrementModel::rademacher();
        assert!((m.truncated_second_moment(2.0) - 0.25).abs() < 1e-15);
        assert_eq!(m.truncated_second_moment(0.5), 0.0);
    }

    #[test]
    fn rademacher_norming_c() {
        let m = IncrementModel::rademacher();
        assert!((m.norming_c(4.0).unwrap() - 2.0).abs() < 1e-9);
        assert!((m.norming_c(1.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn norming_c_monotone() {
        let models = [
            IncrementModel::rademacher(),
            IncrementModel::pareto(1.5, 0.5).unwrap(),
            IncrementModel::stable(1.5, 1.0, 1.0).unwrap(),
        ];
        for m in &models {
            let mut prev = 0.0;
            for k in 0..20 {
                let x = 1.5f64.powi(k);
                let c = m.norming_c(x).unwrap();
                assert!(c >= prev - 1e-9, "c not monotone for {m:?} at x={x}");
                prev = c;
            }
        }
    }

    #[test]
    fn mu_log_log_slope_matches_alpha() {
        let cases = [
            (IncrementModel::rademacher(), 2.0),
            (IncrementModel::pareto(1.5, 0.5).unwrap(), 1.5),
            (IncrementModel::stable(1.5, 1.0, 1.0).unwrap(), 1.5),
            (IncrementModel::stable(2.0, 0.0, 1.0).unwrap(), 2.0),
        ];
        for (m, alpha) in &cases {
            let (u0, u1) = (1e2, 1e4);
            let slope = ((m.truncated_second_moment(u1)).ln() - (m.truncated_second_moment(u0)).ln())
                / (u1.ln() - u0.ln());
            assert!(
                (slope + alpha).abs() < 0.1,
                "slope {slope} vs -{alpha} for {m:?}"
            );
        }
    }

    #[test]
    fn norming_c_slowly_varying_ratio() {
        let models = [
            IncrementModel::rademacher(),
            IncrementModel::pareto(1.5, 0.5).unwrap(),
        ];
        for m in &models {
            let x = (1u64 << 20) as f64;
            let alpha = m.alpha();
            let ratio = m.norming_c(2.0 * x).unwrap() / m.norming_c(x).unwrap() / 2f64.powf(1.0 / alpha);
            assert!((ratio - 1.0).abs() < 0.05, "{m:?}: ratio {ratio}");
        }
    }

    #[test]
    fn pareto_mu_tail_slope() {
        let m = IncrementModel::pareto(1.5, 0.5).unwrap();
        let s = (m.truncated_second_moment(1e4).ln() - m.truncated_second_moment(1e2).ln())
            / (1e4f64.ln() - 1e2f64.ln());
        assert!((s + 1.5).abs() < 0.05);
    }

    #[test]
    fn pareto_centering_gives_zero_mean() {
        let m = IncrementModel::pareto(1.5, 1.0).unwrap();
        let mut rng = RngStream::new(11, 0).rng();
        let n = 2_000_000;
        let mean: f64 = (0..n).map(|_| m.sample(&mut rng)).sum::<f64>() / n as f64;
        // alpha = 1.5 has heavy tails; generous band.
        assert!(mean.abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn lattice_rejects_bad_input() {
        assert!(IncrementModel::lattice(vec![-1, -1], vec![0.5, 0.5]).is_err());
        assert!(IncrementModel::lattice(vec![-1, 1], vec![0.6, 0.6]).is_err());
        assert!(IncrementModel::lattice(vec![-2, 1], vec![0.25, 0.75]).is_err());
        assert!(IncrementModel::lattice_drifted(vec![-2, 1], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn drifted_lattice_has_no_rho() {
        let m = IncrementModel::lattice_drifted(vec![-2, 1], vec![0.25, 0.75]).unwrap();
        assert!(m.rho().is_err());
    }

    #[test]
    fn sampler_determinism() {
        let m = IncrementModel::stable(1.5, 1.0, 1.0).unwrap();
        let draw = |stream: RngStream| -> Vec<f64> {
            let mut rng = stream.rng();
            (0..64).map(|_| m.sample(&mut rng)).collect()
        };
        assert_eq!(draw(RngStream::new(5, 1)), draw(RngStream::new(5, 1)));
        assert_ne!(draw(RngStream::new(5, 1)), draw(RngStream::new(5, 2)));
    }

    #[test]
    fn stable_alpha2_matches_gaussian_ks() {
        let m = IncrementModel::stable(2.0, 0.0, 1.0).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // scale 1, alpha 2 is N(0, 2): CDF Phi(x / sqrt 2).
        let normal_cdf = |x: f64| 0.5 * (1.0 + erf(x / 2.0));
        let mut sup = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = normal_cdf(x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            sup = sup.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(sup < 0.01, "KS distance {sup}");
    }

    #[test]
    fn cauchy_median_near_zero() {
        let m = IncrementModel::stable(1.0, 0.0, 1.0).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let mut xs: Vec<f64> = (0..100_000).map(|_| m.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(xs[50_000].abs() < 0.05);
    }

    #[test]
    fn rademacher_empirical_mean() {
        let m = IncrementModel::rademacher();
        let mut rng = RngStream::new(6, 0).rng();
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| m.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3e-3);
    }
}
