//! Boundary functions g and the four integral tests deciding whether the
//! crossing time T_g shares the tail order of T_0.
//!
//! Classification runs in two modes. Symbolic mode does exponent arithmetic
//! on the regular-variation indices (slowly varying factors beyond explicit
//! log powers are ignored). Numeric mode integrates the composed integrand
//! over a finite window and extrapolates the tail from the local log-log
//! slope.

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::increments::IncrementModel;
use serde::{Deserialize, Serialize};

/// A nonnegative increasing boundary function, with regular-variation
/// metadata when the form is symbolic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Boundary {
    Constant {
        level: f64,
    },
    Power {
        amplitude: f64,
        gamma: f64,
        #[serde(default)]
        offset: f64,
    },
    PowerLog {
        amplitude: f64,
        gamma: f64,
        log_power: f64,
        #[serde(default)]
        offset: f64,
    },
    Tabulated {
        grid: Vec<u64>,
        values: Vec<f64>,
    },
}

impl Boundary {
    pub fn constant(level: f64) -> Self {
        Boundary::Constant { level }
    }

    pub fn power(amplitude: f64, gamma: f64, offset: f64) -> Self {
        Boundary::Power {
            amplitude,
            gamma,
            offset,
        }
    }

    pub fn power_log(amplitude: f64, gamma: f64, log_power: f64, offset: f64) -> Self {
        Boundary::PowerLog {
            amplitude,
            gamma,
            log_power,
            offset,
        }
    }

    pub fn zero() -> Self {
        Boundary::Constant { level: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Boundary::Constant { level } => {
                if *level < 0.0 {
                    return Err(Error::InvalidBoundary("negative constant level".into()));
                }
            }
            Boundary::Power {
                amplitude,
                gamma,
                offset,
            } => {
                if *amplitude < 0.0 || *gamma < 0.0 || *offset < 0.0 {
                    return Err(Error::InvalidBoundary(
                        "power boundary needs amplitude, gamma, offset >= 0".into(),
                    ));
                }
            }
            Boundary::PowerLog {
                amplitude, gamma, ..
            } => {
                if *amplitude < 0.0 || *gamma < 0.0 {
                    return Err(Error::InvalidBoundary(
                        "power-log boundary needs amplitude, gamma >= 0".into(),
                    ));
                }
            }
            Boundary::Tabulated { grid, values } => {
                if grid.len() != values.len() || grid.is_empty() {
                    return Err(Error::InvalidBoundary(
                        "tabulated boundary needs equal-length nonempty grid/values".into(),
                    ));
                }
                if grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::NonMonotone("tabulated grid not increasing".into()));
                }
                if values.windows(2).any(|w| w[0] > w[1]) || values[0] < 0.0 {
                    return Err(Error::NonMonotone(
                        "tabulated values must be nonnegative nondecreasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// g(t) at an integer time.
    pub fn eval(&self, t: u64) -> Result<f64> {
        let x = t as f64;
        match self {
            Boundary::Constant { level } => Ok(*level),
            Boundary::Power {
                amplitude,
                gamma,
                offset,
            } => Ok(offset + amplitude * x.powf(*gamma)),
            Boundary::PowerLog {
                amplitude,
                gamma,
                log_power,
                offset,
            } => {
                // Log factor floored at ln 2 so small times stay finite.
                let lf = x.max(2.0).ln();
                Ok(offset + amplitude * x.powf(*gamma) * lf.powf(*log_power))
            }
            Boundary::Tabulated { grid, values } => {
                let max = *grid.last().unwrap();
                if t < grid[0] || t > max {
                    return Err(Error::BoundaryOutOfRange { t, max });
                }
                let idx = grid.partition_point(|&u| u <= t) - 1;
                Ok(values[idx])
            }
        }
    }

    /// Same evaluation at a real argument (integral tests).
    pub fn eval_real(&self, x: f64) -> f64 {
        match self {
            Boundary::Constant { level } => *level,
            Boundary::Power {
                amplitude,
                gamma,
                offset,
            } => offset + amplitude * x.powf(*gamma),
            Boundary::PowerLog {
                amplitude,
                gamma,
                log_power,
                offset,
            } => offset + amplitude * x.powf(*gamma) * x.max(2.0).ln().powf(*log_power),
            Boundary::Tabulated { grid, values } => {
                let t = (x.max(0.0) as u64).min(*grid.last().unwrap());
                let idx = grid.partition_point(|&u| u <= t).saturating_sub(1).min(values.len() - 1);
                values[idx]
            }
        }
    }

    /// Precompute g(0..=n_max); simulation loops index this table.
    pub fn values_up_to(&self, n_max: u64) -> Result<Vec<f64>> {
        (0..=n_max).map(|t| self.eval(t)).collect()
    }

    /// Regular-variation index when symbolically known.
    pub fn rv_index(&self) -> Option<f64> {
        match self {
            Boundary::Constant { .. } => Some(0.0),
            Boundary::Power { gamma, .. } | Boundary::PowerLog { gamma, .. } => Some(*gamma),
            Boundary::Tabulated { .. } => None,
        }
    }

    /// Explicit log power carried by the symbolic form.
    pub fn log_power(&self) -> Option<f64> {
        match self {
            Boundary::Constant { .. } | Boundary::Power { .. } => Some(0.0),
            Boundary::PowerLog { log_power, .. } => Some(*log_power),
            Boundary::Tabulated { .. } => None,
        }
    }

    /// g(0) > 0 flag (hypothesis region of the shrinking-domain results).
    pub fn positive_at_zero(&self) -> bool {
        self.eval(0).map(|v| v > 0.0).unwrap_or(false)
    }
}

/// Which integral test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralTest {
    /// integral of h(g(x)) / (x h(c(x)))
    GC,
    /// integral of h(g(x)) / (x h(c(x / log x)))
    GC2,
    /// integral of g(x) / (x c(x))
    NEW,
    /// integral of g(x) / x^{3/2} (model-independent)
    HKK,
}

pub const ALL_TESTS: [IntegralTest; 4] = [
    IntegralTest::GC,
    IntegralTest::GC2,
    IntegralTest::NEW,
    IntegralTest::HKK,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestVerdict {
    pub test: IntegralTest,
    pub verdict: Verdict,
    /// Power exponent of the integrand in symbolic mode.
    pub symbolic_exponent: Option<f64>,
    /// Truncated numeric integral over [1, x_hi], numeric mode only.
    pub numeric_tail: Option<f64>,
    pub extrapolated: bool,
}

/// Where the renewal-function exponent comes from.
#[derive(Debug, Clone, Copy)]
pub enum HIndexSource {
    /// alpha (1 - rho) from the model parameters.
    ModelExponent,
    /// A fitted exponent (e.g. from a Monte Carlo renewal table).
    Fitted(f64),
}

impl HIndexSource {
    fn exponent(&self, model: &IncrementModel) -> Result<f64> {
        match self {
            HIndexSource::ModelExponent => model.h_index(),
            HIndexSource::Fitted(e) => Ok(*e),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ClassifyMode {
    Symbolic,
    Numeric { x_hi: f64 },
}

const EXPONENT_EPS: f64 = 1e-9;

/// Classify one integral test for boundary `g` under `model`.
pub fn classify(
    test: IntegralTest,
    g: &Boundary,
    model: &IncrementModel,
    h_source: HIndexSource,
    mode: ClassifyMode,
) -> Result<TestVerdict> {
    match mode {
        ClassifyMode::Symbolic => classify_symbolic(test, g, model, h_source),
        ClassifyMode::Numeric { x_hi } => classify_numeric(test, g, model, h_source, x_hi),
    }
}

fn classify_symbolic(
    test: IntegralTest,
    g: &Boundary,
    model: &IncrementModel,
    h_source: HIndexSource,
) -> Result<TestVerdict> {
    let gamma = g.rv_index().ok_or_else(|| {
        Error::Precondition("symbolic classification needs rv metadata for g".into())
    })?;
    let lambda = g.log_power().unwrap();
    let (power, log_exp) = match test {
        IntegralTest::HKK => (gamma - 1.5, lambda),
        IntegralTest::NEW => {
            let alpha = model.alpha();
            (gamma - 1.0 - 1.0 / alpha, lambda)
        }
        IntegralTest::GC | IntegralTest::GC2 => {
            let alpha = model.alpha();
            let eta = h_source.exponent(model)?;
            let power = eta * gamma - 1.0 - eta / alpha;
            let mut log_exp = eta * lambda;
            if test == IntegralTest::GC2 {
                // c(x / log x) shrinks the denominator by (log x)^{eta/alpha}.
                log_exp += eta / alpha;
            }
            (power, log_exp)
        }
    };
    let verdict = if power < -1.0 - EXPONENT_EPS {
        Verdict::Convergent
    } else if power > -1.0 + EXPONENT_EPS {
        Verdict::Divergent
    } else if log_exp < -1.0 - EXPONENT_EPS {
        Verdict::Convergent
    } else if log_exp > -1.0 + EXPONENT_EPS {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    Ok(TestVerdict {
        test,
        verdict,
        symbolic_exponent: Some(power),
        numeric_tail: None,
        extrapolated: false,
    })
}

fn classify_numeric(
    test: IntegralTest,
    g: &Boundary,
    model: &IncrementModel,
    h_source: HIndexSource,
    x_hi: f64,
) -> Result<TestVerdict> {
    let eta = h_source.exponent(model)?;
    // Power surrogate for h, consistent with the symbolic indices.
    let h = |x: f64| if x <= 0.0 { 0.0 } else { (1.0 + x).powf(eta) };
    let integrand = |x: f64| -> Result<f64> {
        let gx = g.eval_real(x);
        Ok(match test {
            IntegralTest::HKK => gx / x.powf(1.5),
            IntegralTest::NEW => gx / (x * model.norming_c(x.max(1.0))?),
            IntegralTest::GC => h(gx) / (x * h(model.norming_c(x.max(1.0))?)),
            IntegralTest::GC2 => {
                let arg = (x / x.max(2.0).ln()).max(1.0);
                h(gx) / (x * h(model.norming_c(arg)?))
            }
        })
    };

    // Trapezoid in log space over [1, x_hi].
    let decades = x_hi.log10();
    let per_decade = 64usize;
    let n = ((decades * per_decade as f64).ceil() as usize).max(8);
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for i in 0..=n {
        let x = 10f64.powf(decades * i as f64 / n as f64);
        let f = integrand(x)?;
        if let Some((x0, f0)) = prev {
            integral += 0.5 * (f + f0) * (x - x0);
        }
        prev = Some((x, f));
        samples.push((x, f));
    }

    // Local slope over the last decade decides the tail.
    let cut = x_hi / 10.0;
    let (xs, fs): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|&&(x, f)| x >= cut && f > 0.0)
        .cloned()
        .unzip();
    if xs.len() < 4 {
        // Integrand identically zero (e.g. g = 0): trivially convergent.
        return Ok(TestVerdict {
            test,
            verdict: Verdict::Convergent,
            symbolic_exponent: None,
            numeric_tail: Some(integral),
            extrapolated: false,
        });
    }
    let (slope, _) = loglog_fit(&xs, &fs);
    let has_log_meta = g.log_power().is_some();
    let verdict = if slope > -0.98 {
        Verdict::Divergent
    } else if slope >= -1.02 {
        if has_log_meta {
            // Fall back to the symbolic log-power rule at the critical index.
            classify_symbolic(test, g, model, h_source)?.verdict
        } else {
            Verdict::Inconclusive
        }
    } else {
        let f_hi = *fs.last().unwrap();
        let tail = f_hi * x_hi / (-1.0 - slope);
        if tail > 10.0 * integral {
            Verdict::Inconclusive
        } else {
            Verdict::Convergent
        }
    };
    Ok(TestVerdict {
        test,
        verdict,
        symbolic_exponent: None,
        numeric_tail: Some(integral),
        extrapolated: true,
    })
}

/// Sub/superadditivity probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdditivityMode {
    Sub,
    Super,
}

#[derive(Debug, Clone)]
pub struct AdditivityReport {
    pub mode: AdditivityMode,
    /// Worst signed violation: positive means the property failed there.
    pub worst_violation: f64,
    pub argmax: (f64, f64),
}

impl AdditivityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_violation <= tol
    }
}

/// Report the worst additivity violation of `f` over all grid pairs.
/// A report, not a proof.
pub fn additivity_check<F: Fn(f64) -> f64>(
    f: F,
    grid: &[f64],
    mode: AdditivityMode,
) -> AdditivityReport {
    let mut worst = f64::NEG_INFINITY;
    let mut argmax = (0.0, 0.0);
    let max = grid.last().copied().unwrap_or(0.0);
    for (i, &x) in grid.iter().enumerate() {
        for &y in &grid[i..] {
            if x + y > max {
                break;
            }
            let v = match mode {
                AdditivityMode::Sub => f(x + y) - f(x) - f(y),
                AdditivityMode::Super => f(x) + f(y) - f(x + y),
            };
            if v > worst {
                worst = v;
                argmax = (x, y);
            }
        }
    }
    AdditivityReport {
        mode,
        worst_violation: worst,
        argmax,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_walk() -> IncrementModel {
        IncrementModel::rademacher()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Boundary::constant(1.0).eval(999).unwrap(), 1.0);
        assert!((Boundary::power(1.0, 0.25, 0.0).eval(16).unwrap() - 2.0).abs() < 1e-12);
        let tab = Boundary::Tabulated {
            grid: vec![0, 1, 2],
            values: vec![0.0, 1.0, 1.0],
        };
        assert!(matches!(
            tab.eval(3),
            Err(Error::BoundaryOutOfRange { t: 3, max: 2 })
        ));
        assert_eq!(tab.eval(1).unwrap(), 1.0);
    }

    #[test]
    fn gc_exponent_arithmetic() {
        let m = simple_walk();
        // alpha = 2, rho = 1/2: h-index 1, c-index 1/2.
        let v = classify(
            IntegralTest::GC,
            &Boundary::power(1.0, 0.25, 0.0),
            &m,
            HIndexSource::ModelExponent,
            ClassifyMode::Symbolic,
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::Convergent);
        assert!((v.symbolic_exponent.unwrap() + 1.25).abs() < 1e-12);

        let v = classify(
            IntegralTest::GC,
            &Boundary::power(1.0, 0.6, 0.0),
            &m,
            HIndexSource::ModelExponent,
            ClassifyMode::Symbolic,
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::Divergent);
        assert!((v.symbolic_exponent.unwrap() + 0.9).abs() < 1e-12);
    }

    #[test]
    fn gc_vs_gc2_splitter() {
        // g = sqrt(x) (log x)^{-1.2}: GC converges, GC2 diverges.
        let m = simple_walk();
        let g = Boundary::power_log(1.0, 0.5, -1.2, 0.0);
        let gc = classify(
            IntegralTest::GC,
            &g,
            &m,
            HIndexSource::ModelExponent,
            ClassifyMode::Symbolic,
        )
        .unwrap();
        let gc2 = classify(
            IntegralTest::GC2,
            &g,
            &m,
            HIndexSource::ModelExponent,
            ClassifyMode::Symbolic,
        )
        .unwrap();
        assert_eq!(gc.verdict, Verdict::Convergent);
        assert_eq!(gc2.verdict, Verdict::Divergent);
    }

    #[test]
    fn gc_flips_at_inverse_alpha() {
        let m = simple_walk();
        let thr = 1.0 / m.alpha();
        for &(gamma, expect) in &[
            (thr - 0.05, Verdict::Convergent),
            (thr + 0.05, Verdict::Divergent),
        ] {
            let v = classify(
                IntegralTest::GC,
                &Boundary::power(1.0, gamma, 0.0),
                &m,
                HIndexSource::ModelExponent,
                ClassifyMode::Symbolic,
            )
            .unwrap();
            assert_eq!(v.verdict, expect, "gamma = {gamma}");
        }
    }

    #[test]
    fn hkk_is_model_independent() {
        let models = [
            simple_walk(),
            IncrementModel::pareto(1.5, 0.5).unwrap(),
            IncrementModel::stable(1.5, 1.0, 1.0).unwrap(),
        ];
        let g = Boundary::power(1.0, 0.25, 0.0);
        let verdicts: Vec<Verdict> = models
            .iter()
            .map(|m| {
                classify(
                    IntegralTest::HKK,
                    &g,
                    m,
                    HIndexSource::ModelExponent,
                    ClassifyMode::Symbolic,
                )
                .unwrap()
                .verdict
            })
            .collect();
        assert!(verdicts.iter().all(|&v| v == Verdict::Convergent));
    }

    #[test]
    fn symbolic_and_numeric_agree_on_powers() {
        let m = simple_walk();
        for test in ALL_TESTS {
            for k in 0..10 {
                let gamma = 0.1 * k as f64;
                let g = Boundary::power(1.0, gamma, 0.0);
                let sym = classify(test, &g, &m, HIndexSource::ModelExponent, ClassifyMode::Symbolic)
                    .unwrap();
                // Skip within-0.05 of the critical exponent.
                if (sym.symbolic_exponent.unwrap() + 1.0).abs() <= 0.05 {
                    continue;
                }
                let num = classify(
                    test,
                    &g,
                    &m,
                    HIndexSource::ModelExponent,
                    ClassifyMode::Numeric { x_hi: 1e6 },
                )
                .unwrap();
                assert_eq!(
                    sym.verdict, num.verdict,
                    "test {test:?} gamma {gamma}: sym {sym:?} vs num {num:?}"
                );
            }
        }
    }

    #[test]
    fn additivity_examples() {
        let grid: Vec<f64> = (1..=50).map(|k| k as f64).collect();
        let r = additivity_check(|x| x.sqrt(), &grid, AdditivityMode::Sub);
        assert!(r.worst_violation <= 1e-12);

        let r = additivity_check(|x| (x - 10.0).max(0.0), &grid, AdditivityMode::Super);
        assert!(r.worst_violation <= 1e-12);

        let grid: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        let r = additivity_check(|x| x.powf(1.2), &grid, AdditivityMode::Sub);
        assert!(r.worst_violation > 0.0);
        assert_eq!(r.argmax, (50.0, 50.0));
    }

    #[test]
    fn tabulated_numeric_only() {
        let m = simple_walk();
        let tab = Boundary::Tabulated {
            grid: vec![0, 1, 2],
            values: vec![0.0, 1.0, 1.0],
        };
        assert!(classify(
            IntegralTest::HKK,
            &tab,
            &m,
            HIndexSource::ModelExponent,
            ClassifyMode::Symbolic
        )
        .is_err());
    }
}
