//! Experiment driver behind the `hoac` binary.
//!
//! Each subcommand reads one JSON [`ExperimentFile`] and writes CSV with a
//! header row and LF line endings. Floats are printed in shortest
//! round-trip form, so parsing a field gives back the exact value.
//!
//! `theory` columns: `scheme,snr_db,param,param_value,bound,value`.
//!
//! `simulate` columns: `scheme,snr_db,R,trials,errors,p_hat,ci_lo,ci_hi,
//! pe_theory,guard_flag_rate`, then one `r_hat@<eps>` column per epsilon.

mod config;

pub use config::{AlphabetSizes, ExperimentFile, SchemeName, SnrDb};

use std::fmt::Write as _;

use hoac::theory::{
    pe_shielded, pe_shielded_idealized, pe_unshielded_floor, pe_unshielded_series, q_function,
    rate_shielded_lower, rate_unshielded_upper, rate_variable_lower, PropagationModel,
};
use hoac::{exhaustive_roundtrip_with, DecodeResult, ReceivedSignal, Receiver, Scheme};

/// Upper limit on blocks visited by `roundtrip`.
pub const MAX_ROUNDTRIP_BLOCKS: u64 = 50_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<hoac::Error> for CliError {
    fn from(e: hoac::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    /// 1 for a failed check, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

/// Counts printed by `roundtrip`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTripSummary {
    pub blocks: u64,
    pub mismatches: u64,
    pub guard_flags: u64,
}

impl std::fmt::Display for RoundTripSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "blocks={} mismatches={} guard_flags={}",
            self.blocks, self.mismatches, self.guard_flags
        )
    }
}

pub fn cmd_roundtrip(file: &ExperimentFile) -> Result<RoundTripSummary, CliError> {
    cmd_roundtrip_with(file, |rx, s| rx.decode(s))
}

/// Exhaustive noiseless round trip with a caller-supplied decoder. Fails
/// with [`CliError::Failure`] on any mismatch or spurious guard flag.
pub fn cmd_roundtrip_with<F>(file: &ExperimentFile, decode: F) -> Result<RoundTripSummary, CliError>
where
    F: Fn(&Receiver, &ReceivedSignal) -> DecodeResult,
{
    let scenario = file.scenario(f64::INFINITY)?;
    let plan = scenario.plan()?;
    let blocks = scenario
        .alphabets
        .iter()
        .try_fold(1u64, |acc, a| {
            (0..plan.information_count()).try_fold(acc, |acc, _| acc.checked_mul(a.size() as u64))
        })
        .filter(|&n| n <= MAX_ROUNDTRIP_BLOCKS)
        .ok_or_else(|| {
            CliError::Config(format!(
                "more than {MAX_ROUNDTRIP_BLOCKS} blocks to enumerate"
            ))
        })?;
    let report = exhaustive_roundtrip_with(&scenario.alphabets, &plan, decode)?;
    debug_assert_eq!(report.blocks, blocks);
    let summary = RoundTripSummary {
        blocks: report.blocks,
        mismatches: report.mismatches,
        guard_flags: report.guard_flags,
    };
    if report.passed() {
        Ok(summary)
    } else {
        Err(CliError::Failure(format!("round trip failed: {summary}")))
    }
}

pub const THEORY_HEADER: &str = "scheme,snr_db,param,param_value,bound,value";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Closed-form error probabilities and rate bounds at every SNR.
pub fn cmd_theory(file: &ExperimentFile) -> Result<String, CliError> {
    let name = file.scheme().name();
    let mut out = String::new();
    writeln!(out, "{THEORY_HEADER}").unwrap();
    if file.sanity {
        writeln!(out, "{name},,x,0,q_function,{}", q_function(0.0)).unwrap();
    }
    for entry in &file.snr_db {
        let snr_db = entry.0;
        let scenario = file.scenario(snr_db)?;
        let plan = scenario.plan()?;
        let base = scenario.base()?;
        let snr = scenario.snr_linear()?;
        let mut row = |param: &str, value: String, bound: &str, v: f64| {
            writeln!(out, "{name},{snr_db},{param},{value},{bound},{v}").unwrap();
        };
        for &r in &file.r_values {
            let info = plan.information_count();
            if r == 0 || r > info {
                return Err(CliError::Config(format!(
                    "r_values entry {r} outside 1..={info}"
                )));
            }
            match scenario.scheme {
                Scheme::Unshielded => {
                    let model = PropagationModel::from_alphabets(&scenario.alphabets, base)?;
                    let series = pe_unshielded_series(r, info, snr, base as f64, &model)?;
                    let floor = pe_unshielded_floor(r, snr, base as f64, &model).value;
                    row("R", r.to_string(), "pe_unshielded_series", series);
                    row("R", r.to_string(), "pe_unshielded_floor", floor);
                }
                Scheme::FixedGuard { guard } => {
                    row(
                        "R",
                        r.to_string(),
                        "pe_shielded",
                        pe_shielded(r, snr, &plan)?,
                    );
                    row(
                        "R",
                        r.to_string(),
                        "pe_shielded_idealized",
                        pe_shielded_idealized(r, snr, base, guard),
                    );
                }
                Scheme::VariableLength => {
                    row(
                        "R",
                        r.to_string(),
                        "pe_shielded",
                        pe_shielded(r, snr, &plan)?,
                    );
                }
            }
        }
        for &eps in &file.epsilon {
            let e = eps.to_string();
            match scenario.scheme {
                Scheme::Unshielded => {
                    let q = scenario.alphabets[0].size();
                    if scenario.alphabets.iter().any(|a| a.size() != q) {
                        return Err(CliError::Config(
                            "the unshielded rate bound needs equal alphabet sizes".into(),
                        ));
                    }
                    let b = rate_unshielded_upper(eps, snr, q, scenario.alphabets.len());
                    row("epsilon", e.clone(), "rate_unshielded_upper", b.rate);
                    row("epsilon", e, "rate_unshielded_upper_gap", b.gap);
                }
                Scheme::FixedGuard { guard } => {
                    let b = rate_shielded_lower(eps, snr, base, guard);
                    row("epsilon", e.clone(), "rate_shielded_lower", b.rate);
                    row("epsilon", e, "rate_shielded_lower_gap", b.gap);
                }
                Scheme::VariableLength => {
                    let v = rate_variable_lower(eps, snr, base);
                    row("epsilon", e.clone(), "rate_variable_lower", v.rate as f64);
                    row("epsilon", e.clone(), "rate_variable_mu", v.mu as f64);
                    row("epsilon", e, "rate_variable_lower_gap", v.gap);
                }
            }
        }
    }
    Ok(out)
}

pub fn simulate_header(epsilon: &[f64]) -> String {
    let mut h =
        String::from("scheme,snr_db,R,trials,errors,p_hat,ci_lo,ci_hi,pe_theory,guard_flag_rate");
    for e in epsilon {
        write!(h, ",r_hat@{e}").unwrap();
    }
    h
}

/// Monte Carlo prefix-error estimates at every SNR, one row per prefix
/// length.
pub fn cmd_simulate(file: &ExperimentFile) -> Result<String, CliError> {
    let name = file.scheme().name();
    let mut out = String::new();
    writeln!(out, "{}", simulate_header(&file.epsilon)).unwrap();
    let scenarios = file
        .snr_db
        .iter()
        .map(|s| file.scenario(s.0).map(|sc| (s.0, sc)))
        .collect::<Result<Vec<_>, _>>()?;
    for (snr_db, scenario) in scenarios {
        let point = scenario.evaluate()?;
        let rates: String = point
            .rates
            .iter()
            .map(|r| format!(",{}", r.empirical))
            .collect();
        let trials = point.stats.trials();
        for (i, ci) in point.estimates.iter().enumerate() {
            writeln!(
                out,
                "{name},{snr_db},{},{trials},{},{},{},{},{},{}{rates}",
                i + 1,
                point.stats.errors_within(i + 1),
                ci.p_hat,
                ci.lo,
                ci.hi,
                opt(point.pe_theory[i]),
                point.guard_flag_rate[i],
            )
            .unwrap();
        }
    }
    Ok(out)
}
