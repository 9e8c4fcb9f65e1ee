//! JSON experiment files.

use std::path::{Path, PathBuf};

use hoac::{AlphabetSpec, Scenario, Scheme, SnrSpec};
use serde::Deserialize;

use crate::CliError;

/// One SNR entry in dB: a number, or `"inf"` for a noiseless channel.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "SnrValue")]
pub struct SnrDb(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum SnrValue {
    Number(f64),
    Text(String),
}

impl TryFrom<SnrValue> for SnrDb {
    type Error = String;

    fn try_from(v: SnrValue) -> Result<Self, String> {
        match v {
            SnrValue::Number(x) => Ok(SnrDb(x)),
            SnrValue::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(SnrDb(f64::INFINITY)),
                _ => Err(format!(
                    "snr_db entry {s:?} is neither a number nor \"inf\""
                )),
            },
        }
    }
}

/// Alphabet sizes: one size shared by all transmitters, or one per
/// transmitter.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AlphabetSizes {
    Shared(usize),
    PerTransmitter(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Unshielded,
    FixedGuard,
    VariableLength,
}

/// Experiment description.
///
/// `m` is the number of information digits for the unshielded and
/// fixed-guard schemes and the total length `mu` for the variable-length
/// scheme; `mu` is accepted as an alias.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub scheme: SchemeName,
    #[serde(default)]
    pub k: Option<usize>,
    pub q: AlphabetSizes,
    #[serde(alias = "mu")]
    pub m: usize,
    #[serde(default)]
    pub base: Option<u64>,
    #[serde(default)]
    pub guard: Option<u64>,
    #[serde(default)]
    pub snr_db: Vec<SnrDb>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Prefix lengths for the theory `P_e(R)` rows.
    #[serde(default)]
    pub r_values: Vec<usize>,
    /// Adds a `Q(0)` row to the theory output.
    #[serde(default)]
    pub sanity: bool,
}

fn default_trials() -> u64 {
    100_000
}

impl ExperimentFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        file.check()?;
        Ok(file)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let (Some(k), AlphabetSizes::PerTransmitter(qs)) = (self.k, &self.q) {
            if k != qs.len() {
                return bad(format!("k = {k} but q lists {} alphabets", qs.len()));
            }
        }
        if self.transmitters() == 0 {
            return bad("k must be at least 1".into());
        }
        if let Some(&e) = self.epsilon.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("epsilon {e} outside (0, 1)"));
        }
        if let Some(SnrDb(s)) = self
            .snr_db
            .iter()
            .find(|s| s.0.is_nan() || s.0 == f64::NEG_INFINITY)
        {
            return bad(format!("invalid snr_db {s}"));
        }
        if self.guard.is_some() && self.scheme != SchemeName::FixedGuard {
            return bad("guard is only meaningful for the fixed_guard scheme".into());
        }
        Ok(())
    }

    pub fn transmitters(&self) -> usize {
        match &self.q {
            AlphabetSizes::Shared(_) => self.k.unwrap_or(1),
            AlphabetSizes::PerTransmitter(qs) => qs.len(),
        }
    }

    pub fn alphabets(&self) -> Result<Vec<AlphabetSpec>, CliError> {
        let sizes = match &self.q {
            AlphabetSizes::Shared(q) => vec![*q; self.transmitters()],
            AlphabetSizes::PerTransmitter(qs) => qs.clone(),
        };
        Ok(sizes
            .into_iter()
            .map(AlphabetSpec::uniform)
            .collect::<Result<_, _>>()?)
    }

    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeName::Unshielded => Scheme::Unshielded,
            SchemeName::FixedGuard => Scheme::FixedGuard {
                guard: self.guard.unwrap_or(1),
            },
            SchemeName::VariableLength => Scheme::VariableLength,
        }
    }

    /// Scenario at one SNR; the plan is validated against the alphabets.
    pub fn scenario(&self, snr_db: f64) -> Result<Scenario, CliError> {
        let scenario = Scenario {
            scheme: self.scheme(),
            alphabets: self.alphabets()?,
            block_len: self.m,
            base: self.base,
            snr: SnrSpec::Db(snr_db),
            epsilon: self.epsilon.clone(),
            trials: self.trials,
            master_seed: self.master_seed,
        };
        scenario.system_config()?;
        Ok(scenario)
    }
}
