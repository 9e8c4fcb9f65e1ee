//! Monte Carlo estimation of prefix-error probabilities.
//!
//! Every trial draws a fresh block for each transmitter, runs it through the
//! encoder, the channel and the decoder, and records the first information
//! digit that came back wrong. Because the prefix-error events are nested,
//! one first-error histogram yields the estimate for every prefix length.
//!
//! Trials are independent and seeded by index, so the histogram does not
//! depend on how trials are split across workers. With the `parallel` feature
//! [`run_experiment`] spreads trials over the current rayon pool;
//! [`run_experiment_sequential`] is always available.

mod roundtrip;
mod sweep;

pub use roundtrip::{exhaustive_roundtrip, exhaustive_roundtrip_with, RoundTripReport};
pub use sweep::{
    sweep, PointResult, RatePoint, Scenario, Scheme, SnrSpec, SweepAxis, SweepRow, TheoryRate,
};

use std::ops::Range;

use num_bigint::BigUint;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::channel::{derive_trial_rng, sample_noise, NoiseSpec, ReceivedSignal};
use crate::codec::{Codec, DecodeResult, Receiver};
use crate::plan::SystemConfig;
use crate::Error;

/// Two-sided 95% standard-normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// First-error and guard-flag histograms of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixErrorStats {
    trials: u64,
    /// `first_error[i]`: trials whose first wrong information digit is the
    /// `i`-th (zero-based); the last bucket counts error-free trials.
    first_error: Vec<u64>,
    /// `guard_flags[m]`: trials whose first guard violation is at slot `m`;
    /// the last bucket counts unflagged trials.
    guard_flags: Vec<u64>,
    /// Slot position of each information digit.
    info_positions: Vec<usize>,
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Zero-based information-digit index of the first decoding error.
    pub first_error: Option<usize>,
    /// Zero-based slot of the first guard violation.
    pub guard_flag: Option<usize>,
}

impl PrefixErrorStats {
    pub fn new(info_positions: Vec<usize>, slot_count: usize) -> Self {
        Self {
            trials: 0,
            first_error: vec![0; info_positions.len() + 1],
            guard_flags: vec![0; slot_count + 1],
            info_positions,
        }
    }

    pub fn record(&mut self, outcome: TrialOutcome) {
        self.trials += 1;
        let last = self.first_error.len() - 1;
        self.first_error[outcome.first_error.unwrap_or(last)] += 1;
        let last = self.guard_flags.len() - 1;
        self.guard_flags[outcome.guard_flag.unwrap_or(last)] += 1;
    }

    /// Adds another run's counts; both must come from the same plan.
    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        for (a, b) in self.first_error.iter_mut().zip(other.first_error) {
            *a += b;
        }
        for (a, b) in self.guard_flags.iter_mut().zip(other.guard_flags) {
            *a += b;
        }
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Number of information digits tracked.
    pub fn info_count(&self) -> usize {
        self.info_positions.len()
    }

    pub fn first_error_histogram(&self) -> &[u64] {
        &self.first_error
    }

    pub fn guard_flag_histogram(&self) -> &[u64] {
        &self.guard_flags
    }

    /// Trials with at least one error among the first `r` information
    /// digits.
    pub fn errors_within(&self, r: usize) -> u64 {
        self.first_error[..r.min(self.info_count())].iter().sum()
    }

    /// `P_e(r)` point estimate; `r = 0` gives 0.
    pub fn p_hat(&self, r: usize) -> f64 {
        self.errors_within(r) as f64 / self.trials.max(1) as f64
    }

    /// Trials flagged at or before the slot of the `r`-th information digit.
    pub fn guard_flags_within(&self, r: usize) -> u64 {
        match r {
            0 => 0,
            _ => {
                let pos = self.info_positions[r.min(self.info_count()) - 1];
                self.guard_flags[..=pos].iter().sum()
            }
        }
    }
}

/// Point estimate with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCI {
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
}

impl EstimateCI {
    /// Wilson score interval for `successes` out of `trials`.
    pub fn wilson(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                p_hat: 0.0,
                lo: 0.0,
                hi: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            p_hat: p,
            lo: (centre - half).clamp(0.0, p),
            hi: (centre + half).clamp(p, 1.0),
        }
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub fn standard_error(&self, trials: u64) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / trials.max(1) as f64).sqrt()
    }
}

/// `P_e(r)` with its Wilson interval, for `1 <= r <= info_count`.
pub fn estimate_pe(stats: &PrefixErrorStats, r: usize) -> Result<EstimateCI, Error> {
    if r == 0 || r > stats.info_count() {
        return Err(Error::PrefixOutOfRange {
            r,
            max: stats.info_count(),
        });
    }
    Ok(EstimateCI::wilson(stats.errors_within(r), stats.trials()))
}

/// Largest prefix length whose estimated error is at most `epsilon`.
pub fn empirical_epsilon_rate(stats: &PrefixErrorStats, epsilon: f64) -> usize {
    (1..=stats.info_count())
        .take_while(|&r| stats.p_hat(r) <= epsilon)
        .last()
        .unwrap_or(0)
}

/// Everything a single trial needs, precomputed once per configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: SystemConfig,
    codec: Codec,
    receiver: Receiver,
    sigma: f64,
    samplers: Vec<WeightedIndex<f64>>,
    /// Digit value of each symbol, per transmitter.
    digit_tables: Vec<Vec<u64>>,
}

/// Full record of one trial, for inspection and cross-checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Digit values `[k][i]` sent on the information slots.
    pub values: Vec<Vec<u64>>,
    /// True digit sums per information slot.
    pub sums: Vec<u64>,
    pub received: ReceivedSignal,
    pub decoded: DecodeResult,
    pub outcome: TrialOutcome,
}

impl Experiment {
    pub fn new(config: SystemConfig) -> Result<Self, Error> {
        let codec = Codec::from_config(&config)?;
        let receiver = codec.receiver();
        let sigma = NoiseSpec::from_snr(codec.eta(), config.snr()).sigma;
        let samplers = config
            .alphabets()
            .iter()
            .map(|a| WeightedIndex::new(a.pmf()).map_err(|e| Error::Scenario(e.to_string())))
            .collect::<Result<_, _>>()?;
        let digit_tables = config
            .alphabets()
            .iter()
            .map(|a| (0..a.size() as u64).map(|s| a.digit_value(s)).collect())
            .collect::<Result<_, _>>()?;
        Ok(Self {
            config,
            codec,
            receiver,
            sigma,
            samplers,
            digit_tables,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    pub fn receiver(&self) -> &Receiver {
        &self.receiver
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn empty_stats(&self) -> PrefixErrorStats {
        PrefixErrorStats::new(
            self.config.plan().information_positions(),
            self.config.plan().len(),
        )
    }

    /// Runs trial `index`. Draw order per trial: for each transmitter in
    /// turn, one symbol per information slot; then one Gaussian sample.
    pub fn run_trial(&self, index: u64) -> TrialOutcome {
        self.trial_record(index).outcome
    }

    pub fn trial_record(&self, index: u64) -> TrialRecord {
        let mut rng = derive_trial_rng(self.config.master_seed(), index);
        let info = self.codec.information_count();
        let values: Vec<Vec<u64>> = self
            .samplers
            .iter()
            .zip(&self.digit_tables)
            .map(|(sampler, table)| (0..info).map(|_| table[sampler.sample(&mut rng)]).collect())
            .collect();
        let noise = sample_noise(self.sigma, &mut rng);

        let mut sums = vec![0u64; info];
        for row in &values {
            for (acc, v) in sums.iter_mut().zip(row) {
                *acc += v;
            }
        }

        let fast: Option<u128> = values
            .iter()
            .map(|row| self.codec.fast_numerator(row))
            .sum();
        let (received, decoded) = match fast {
            Some(signal) => (
                ReceivedSignal {
                    signal: BigUint::from(signal),
                    noise,
                },
                self.receiver.decode_fast(signal, noise),
            ),
            None => {
                let received = ReceivedSignal {
                    signal: values
                        .iter()
                        .map(|row| self.codec.numerator_from_values(row))
                        .sum(),
                    noise,
                };
                let decoded = self.receiver.decode_exact(&received);
                (received, decoded)
            }
        };
        let outcome = TrialOutcome {
            first_error: decoded
                .estimates
                .iter()
                .zip(&sums)
                .position(|(a, b)| a != b),
            guard_flag: decoded.guard_violation,
        };
        TrialRecord {
            values,
            sums,
            received,
            decoded,
            outcome,
        }
    }

    /// Runs trials `range` in order on the calling thread.
    pub fn run_range(&self, range: Range<u64>) -> PrefixErrorStats {
        range.fold(self.empty_stats(), |mut stats, i| {
            stats.record(self.run_trial(i));
            stats
        })
    }

    pub fn run_sequential(&self) -> PrefixErrorStats {
        self.run_range(0..self.config.trials())
    }

    /// Runs all trials on the current rayon pool.
    #[cfg(feature = "parallel")]
    pub fn run_parallel(&self) -> PrefixErrorStats {
        use rayon::prelude::*;
        (0..self.config.trials())
            .into_par_iter()
            .fold(
                || self.empty_stats(),
                |mut stats, i| {
                    stats.record(self.run_trial(i));
                    stats
                },
            )
            .reduce(|| self.empty_stats(), PrefixErrorStats::merge)
    }

    pub fn run(&self) -> PrefixErrorStats {
        #[cfg(feature = "parallel")]
        {
            self.run_parallel()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.run_sequential()
        }
    }
}

/// Validates `config` and runs all of its trials, in parallel when the
/// `parallel` feature is enabled.
pub fn run_experiment(config: &SystemConfig) -> Result<PrefixErrorStats, Error> {
    Ok(Experiment::new(config.clone())?.run())
}

pub fn run_experiment_sequential(config: &SystemConfig) -> Result<PrefixErrorStats, Error> {
    Ok(Experiment::new(config.clone())?.run_sequential())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{make_fixed_guard_plan, make_unshielded_plan, AlphabetSpec};

    fn config(snr: f64, trials: u64) -> SystemConfig {
        SystemConfig::new(
            vec![AlphabetSpec::uniform(2).unwrap(); 2],
            make_unshielded_plan(3, 3).unwrap(),
            snr,
            11,
            trials,
        )
        .unwrap()
    }

    #[test]
    fn wilson_examples() {
        let ci = EstimateCI::wilson(12, 1000);
        assert_eq!(ci.p_hat, 0.012);
        assert!(ci.lo < 0.012 && ci.hi > 0.012);
        let zero = EstimateCI::wilson(0, 500);
        assert_eq!(zero.p_hat, 0.0);
        assert_eq!(zero.lo, 0.0);
        // z^2 / (n + z^2)
        let z2 = Z95 * Z95;
        assert!((zero.hi - z2 / (500.0 + z2)).abs() < 1e-15);
        let all = EstimateCI::wilson(500, 500);
        assert_eq!(all.hi, 1.0);
    }

    #[test]
    fn wilson_matches_reference_interval() {
        // 12 / 1000 at 95%: reference values from statsmodels proportion_confint(method="wilson")
        let ci = EstimateCI::wilson(12, 1000);
        assert!((ci.lo - 0.006877647806403521).abs() < 1e-12, "{}", ci.lo);
        assert!((ci.hi - 0.02085726847549828).abs() < 1e-12, "{}", ci.hi);
    }

    #[test]
    fn noiseless_run_has_no_errors() {
        let stats = run_experiment(&config(f64::INFINITY, 2000)).unwrap();
        assert_eq!(stats.trials(), 2000);
        assert_eq!(stats.first_error_histogram(), &[0, 0, 0, 2000]);
        assert_eq!(empirical_epsilon_rate(&stats, 1e-9), 3);
        for r in 1..=3 {
            assert_eq!(estimate_pe(&stats, r).unwrap().p_hat, 0.0);
        }
    }

    #[test]
    fn low_snr_saturates() {
        let mut last = 0.0;
        for snr in [1.0, 1e-2, 1e-4] {
            let p = run_experiment(&config(snr, 4000)).unwrap().p_hat(1);
            assert!(p >= last - 0.02);
            last = p;
        }
        assert!(last > 0.6, "{last}");
    }

    #[test]
    fn estimates_are_nested() {
        let stats = run_experiment(&config(200.0, 5000)).unwrap();
        for r in 1..3 {
            assert!(stats.p_hat(r) <= stats.p_hat(r + 1));
        }
        let p1 = stats.p_hat(1);
        assert_eq!(empirical_epsilon_rate(&stats, 1.0), 3);
        if p1 > 0.0 {
            assert_eq!(empirical_epsilon_rate(&stats, p1 / 2.0), 0);
        }
        assert!(estimate_pe(&stats, 0).is_err());
        assert!(estimate_pe(&stats, 4).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = config(300.0, 3000);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment_sequential(&cfg).unwrap();
        assert_eq!(a, b);
        let exp = Experiment::new(cfg).unwrap();
        let split = exp.run_range(0..1234).merge(exp.run_range(1234..3000));
        assert_eq!(split, b);
    }

    #[test]
    fn stats_invariants() {
        let cfg = SystemConfig::new(
            vec![AlphabetSpec::uniform(2).unwrap(); 2],
            make_fixed_guard_plan(3, 4, 1).unwrap(),
            2000.0,
            5,
            4000,
        )
        .unwrap();
        let stats = run_experiment(&cfg).unwrap();
        assert_eq!(stats.first_error_histogram().iter().sum::<u64>(), 4000);
        assert_eq!(stats.guard_flag_histogram().iter().sum::<u64>(), 4000);
        assert!(stats.guard_flags_within(4) <= 4000);
    }
}
