//! Named scenarios and one-dimensional parameter sweeps.

use crate::plan::{
    make_fixed_guard_plan, make_unshielded_plan, make_variable_length_plan, output_alphabet_size,
    AlphabetSpec, DigitPlan, SystemConfig,
};
use crate::theory::{
    pe_shielded, pe_unshielded_floor, pe_unshielded_series, rate_shielded_lower,
    rate_unshielded_upper, rate_variable_lower, PropagationModel,
};
use crate::Error;

use super::{empirical_epsilon_rate, EstimateCI, Experiment, PrefixErrorStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Unshielded,
    FixedGuard { guard: u64 },
    VariableLength,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Unshielded => "unshielded",
            Scheme::FixedGuard { .. } => "fixed_guard",
            Scheme::VariableLength => "variable_length",
        }
    }
}

/// How the SNR of a scenario is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrSpec {
    Linear(f64),
    Db(f64),
    /// `SNR = B^(2G)`: `G` base-`B` digits survive the noise.
    DigitBudget(f64),
}

impl SnrSpec {
    pub fn linear(&self, base: u64) -> f64 {
        match *self {
            SnrSpec::Linear(s) => s,
            SnrSpec::Db(db) => 10f64.powf(db / 10.0),
            SnrSpec::DigitBudget(g) => (base as f64).powf(2.0 * g),
        }
    }
}

/// A complete simulation point: sources, scheme, SNR and Monte Carlo budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scheme: Scheme,
    pub alphabets: Vec<AlphabetSpec>,
    /// Information digits for the unshielded and fixed-guard schemes; total
    /// length `mu` for the variable-length scheme.
    pub block_len: usize,
    /// Digit base; defaults to the output alphabet size `L`.
    pub base: Option<u64>,
    pub snr: SnrSpec,
    pub epsilon: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
}

/// A closed-form rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryRate {
    pub name: &'static str,
    pub rate: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub epsilon: f64,
    pub empirical: usize,
    pub bound: Option<TheoryRate>,
}

/// Simulation and theory at one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub snr: f64,
    pub base: u64,
    pub plan: DigitPlan,
    pub stats: PrefixErrorStats,
    /// Index `R - 1` holds the estimate of `P_e(R)`.
    pub estimates: Vec<EstimateCI>,
    pub pe_theory: Vec<Option<f64>>,
    /// Carry-propagation floor; unshielded only.
    pub pe_floor: Vec<Option<f64>>,
    pub guard_flag_rate: Vec<f64>,
    pub rates: Vec<RatePoint>,
}

impl Scenario {
    pub fn base(&self) -> Result<u64, Error> {
        match self.base {
            Some(b) => Ok(b),
            None => output_alphabet_size(&self.alphabets),
        }
    }

    pub fn snr_linear(&self) -> Result<f64, Error> {
        Ok(self.snr.linear(self.base()?))
    }

    pub fn plan(&self) -> Result<DigitPlan, Error> {
        let base = self.base()?;
        match self.scheme {
            Scheme::Unshielded => make_unshielded_plan(base, self.block_len),
            Scheme::FixedGuard { guard } => make_fixed_guard_plan(base, self.block_len, guard),
            Scheme::VariableLength => make_variable_length_plan(base, self.block_len),
        }
    }

    pub fn system_config(&self) -> Result<SystemConfig, Error> {
        SystemConfig::new(
            self.alphabets.clone(),
            self.plan()?,
            self.snr_linear()?,
            self.master_seed,
            self.trials,
        )
    }

    /// Common alphabet size when all sources are uniform over the same size.
    fn uniform_q(&self) -> Option<usize> {
        let q = self.alphabets.first()?.size();
        self.alphabets
            .iter()
            .all(|a| a.size() == q && a.pmf().iter().all(|&p| (p - 1.0 / q as f64).abs() < 1e-12))
            .then_some(q)
    }

    /// Closed-form `P_e(R)` for `R = 1..=info_count`.
    pub fn theory_pe(&self) -> Result<Vec<Option<f64>>, Error> {
        let plan = self.plan()?;
        let snr = self.snr_linear()?;
        let base = self.base()?;
        let info = plan.information_count();
        match self.scheme {
            Scheme::Unshielded => {
                let model = PropagationModel::from_alphabets(&self.alphabets, base).ok();
                (1..=info)
                    .map(|r| match &model {
                        Some(m) => pe_unshielded_series(r, info, snr, base as f64, m).map(Some),
                        None => Ok(None),
                    })
                    .collect()
            }
            _ => (1..=info)
                .map(|r| pe_shielded(r, snr, &plan).map(Some))
                .collect(),
        }
    }

    /// Carry-propagation floor for the unshielded scheme; `None` otherwise.
    pub fn theory_floor(&self) -> Result<Vec<Option<f64>>, Error> {
        let info = self.plan()?.information_count();
        let model = match self.scheme {
            Scheme::Unshielded => {
                PropagationModel::from_alphabets(&self.alphabets, self.base()?).ok()
            }
            _ => None,
        };
        let snr = self.snr_linear()?;
        let base = self.base()? as f64;
        Ok((1..=info)
            .map(|r| {
                model
                    .as_ref()
                    .map(|m| pe_unshielded_floor(r, snr, base, m).value)
            })
            .collect())
    }

    /// Scheme-specific closed-form rate at `epsilon`.
    pub fn theory_rate(&self, epsilon: f64) -> Result<Option<TheoryRate>, Error> {
        let snr = self.snr_linear()?;
        let base = self.base()?;
        Ok(match self.scheme {
            Scheme::Unshielded => self.uniform_q().map(|q| {
                let b = rate_unshielded_upper(epsilon, snr, q, self.alphabets.len());
                TheoryRate {
                    name: "unshielded_upper",
                    rate: b.rate,
                    gap: b.gap,
                }
            }),
            Scheme::FixedGuard { guard } => {
                let b = rate_shielded_lower(epsilon, snr, base, guard);
                Some(TheoryRate {
                    name: "shielded_lower",
                    rate: b.rate,
                    gap: b.gap,
                })
            }
            Scheme::VariableLength => {
                let v = rate_variable_lower(epsilon, snr, base);
                Some(TheoryRate {
                    name: "variable_lower",
                    rate: v.rate as f64,
                    gap: v.gap,
                })
            }
        })
    }

    /// Runs the Monte Carlo experiment and attaches the theory.
    pub fn evaluate(&self) -> Result<PointResult, Error> {
        let config = self.system_config()?;
        let stats = Experiment::new(config.clone())?.run();
        let info = stats.info_count();
        let estimates = (1..=info)
            .map(|r| EstimateCI::wilson(stats.errors_within(r), stats.trials()))
            .collect();
        let guard_flag_rate = (1..=info)
            .map(|r| stats.guard_flags_within(r) as f64 / stats.trials() as f64)
            .collect();
        let rates = self
            .epsilon
            .iter()
            .map(|&epsilon| {
                Ok(RatePoint {
                    epsilon,
                    empirical: empirical_epsilon_rate(&stats, epsilon),
                    bound: self.theory_rate(epsilon)?,
                })
            })
            .collect::<Result<_, Error>>()?;
        Ok(PointResult {
            snr: config.snr(),
            base: self.base()?,
            plan: config.plan().clone(),
            pe_theory: self.theory_pe()?,
            pe_floor: self.theory_floor()?,
            stats,
            estimates,
            guard_flag_rate,
            rates,
        })
    }
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    /// Number of transmitters; every source copies the first alphabet.
    Transmitters,
    /// Guard width of the fixed-guard scheme.
    GuardWidth,
    Epsilon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub outcome: Result<PointResult, Error>,
}

impl Scenario {
    /// Copy of `self` with `axis` set to `value`.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Scenario, Error> {
        let mut s = self.clone();
        match axis {
            SweepAxis::SnrDb => s.snr = SnrSpec::Db(value),
            SweepAxis::Transmitters => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Scenario(format!(
                        "transmitter count {value} is not a positive integer"
                    )));
                }
                let first = s.alphabets.first().cloned().ok_or(Error::NoAlphabets)?;
                s.alphabets = vec![first; value as usize];
            }
            SweepAxis::GuardWidth => match s.scheme {
                Scheme::FixedGuard { .. } if value >= 0.0 && value.fract() == 0.0 => {
                    s.scheme = Scheme::FixedGuard {
                        guard: value as u64,
                    }
                }
                Scheme::FixedGuard { .. } => {
                    return Err(Error::Scenario(format!(
                        "guard width {value} is not a nonnegative integer"
                    )))
                }
                _ => {
                    return Err(Error::Scenario(
                        "guard sweep needs the fixed-guard scheme".into(),
                    ))
                }
            },
            SweepAxis::Epsilon => s.epsilon = vec![value],
        }
        Ok(s)
    }
}

/// Evaluates `template` at each value of `axis`. A failing point is
/// reported in its row and does not stop the sweep.
pub fn sweep(template: &Scenario, axis: SweepAxis, values: &[f64]) -> Vec<SweepRow> {
    values
        .iter()
        .map(|&axis_value| SweepRow {
            axis_value,
            outcome: template
                .with_axis(axis, axis_value)
                .and_then(|s| s.evaluate()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(scheme: Scheme) -> Scenario {
        Scenario {
            scheme,
            alphabets: vec![AlphabetSpec::uniform(2).unwrap(); 2],
            block_len: 3,
            base: None,
            snr: SnrSpec::Db(30.0),
            epsilon: vec![1e-2, 1e-1],
            trials: 2000,
            master_seed: 3,
        }
    }

    #[test]
    fn snr_specs() {
        assert_eq!(SnrSpec::Linear(5.0).linear(3), 5.0);
        assert!((SnrSpec::Db(20.0).linear(3) - 100.0).abs() < 1e-9);
        assert_eq!(SnrSpec::DigitBudget(2.0).linear(3), 81.0);
    }

    #[test]
    fn evaluate_fills_every_column() {
        for scheme in [
            Scheme::Unshielded,
            Scheme::FixedGuard { guard: 1 },
            Scheme::VariableLength,
        ] {
            let point = scenario(scheme).evaluate().unwrap();
            let info = point.plan.information_count();
            assert_eq!(point.estimates.len(), info);
            assert_eq!(point.pe_theory.len(), info);
            assert_eq!(point.guard_flag_rate.len(), info);
            assert_eq!(point.rates.len(), 2);
            assert!(point.pe_theory.iter().all(Option::is_some));
            assert!(point.rates.iter().all(|r| r.bound.is_some()));
            assert_eq!(point.base, 3);
        }
    }

    #[test]
    fn sweep_keeps_going_after_errors() {
        let rows = sweep(&scenario(Scheme::Unshielded), SweepAxis::GuardWidth, &[1.0]);
        assert!(rows[0].outcome.is_err());
        let rows = sweep(
            &scenario(Scheme::FixedGuard { guard: 1 }),
            SweepAxis::GuardWidth,
            &[0.0, 2.0],
        );
        assert!(matches!(rows[0].outcome, Err(Error::ZeroGuard)));
        assert!(rows[1].outcome.is_ok());
        let rows = sweep(
            &scenario(Scheme::Unshielded),
            SweepAxis::Transmitters,
            &[1.0, 3.0],
        );
        assert_eq!(rows[1].outcome.as_ref().unwrap().base, 4);
    }

    #[test]
    fn snr_sweep_improves_estimates() {
        let rows = sweep(
            &scenario(Scheme::FixedGuard { guard: 1 }),
            SweepAxis::SnrDb,
            &[10.0, 40.0],
        );
        let low = rows[0].outcome.as_ref().unwrap().estimates[2].p_hat;
        let high = rows[1].outcome.as_ref().unwrap().estimates[2].p_hat;
        assert!(high <= low);
    }
}
