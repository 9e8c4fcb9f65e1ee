//! Over-the-air computation of sums with hierarchical PAM constellations.
//!
//! Each of `K` transmitters packs a block of source digits into one real
//! amplitude using a mixed-radix (shift-map) expansion. The Gaussian
//! multiple-access channel adds the amplitudes, so the receiver sees the
//! expansion of the digit-wise sums and reads them back by long division.
//! Optional guard levels keep noise-induced carries from reaching more
//! significant digits.
//!
//! Modules:
//!
//! * [`plan`]: alphabets, digit plans (unshielded, fixed-guard,
//!   variable-length) and their validation.
//! * [`codec`]: exact encoding, power normalisation, digit decoding and
//!   guard-violation detection.
//! * [`channel`]: reproducible per-trial random streams and the additive
//!   Gaussian channel.
//! * [`theory`]: closed-form error probabilities and rate bounds.
//! * [`sim`]: Monte Carlo prefix-error estimation, Wilson intervals,
//!   empirical rates and parameter sweeps.

pub mod channel;
pub mod codec;
pub mod plan;
pub mod sim;
pub mod theory;

pub use channel::{derive_trial_rng, sample_noise, transmit, NoiseSpec, ReceivedSignal, TrialRng};
pub use codec::{
    block_statistics, detect_guard_violation, postprocess, power_scale, preprocess, BlockStats,
    Codec, DecodeResult, EncodedSignal, Receiver, SourceBlock,
};
pub use plan::{
    guard_positions, make_fixed_guard_plan, make_unshielded_plan, make_variable_length_plan,
    output_alphabet_size, validate_plan, AlphabetSpec, DigitPlan, DigitSlot, PlanViolation,
    SlotRole, SystemConfig, ViolationKind,
};
pub use sim::{
    empirical_epsilon_rate, estimate_pe, exhaustive_roundtrip, exhaustive_roundtrip_with,
    run_experiment, run_experiment_sequential, sweep, EstimateCI, Experiment, PointResult,
    PrefixErrorStats, RatePoint, RoundTripReport, Scenario, Scheme, SnrSpec, SweepAxis, SweepRow,
    TheoryRate, TrialOutcome, TrialRecord,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("pmf has {got} entries for an alphabet of size {expected}")]
    PmfLength { expected: usize, got: usize },
    #[error("pmf entries must be nonnegative and sum to 1 (sum = {0})")]
    PmfNotNormalized(f64),
    #[error("pre-processing spacing must be nonzero")]
    ZeroSpacing,
    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: u64, size: usize },
    #[error("empty alphabet list")]
    NoAlphabets,
    #[error("block length must be at least 1")]
    EmptyBlock,
    #[error("effective radix {radix} < 2 at slot {}", .slot + 1)]
    RadixTooSmall { slot: usize, radix: u64 },
    #[error("guard width must be at least 1; use an unshielded plan instead")]
    ZeroGuard,
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error("SNR must be positive, got {0}")]
    InvalidSnr(f64),
    #[error("invalid plan: {0}")]
    InvalidPlan(#[from] PlanViolation),
    #[error("source block has {got} rows/columns, expected {expected}")]
    BlockShape { expected: usize, got: usize },
    #[error("all block variances are zero; power scale is undefined")]
    DegeneratePower,
    #[error("value {0} outside the post-processing table")]
    OutsideLookup(u64),
    #[error("prefix length {r} outside 1..={max}")]
    PrefixOutOfRange { r: usize, max: usize },
    #[error("propagation parameter must exceed 1, got {0}")]
    InvalidPropagation(f64),
    #[error("{0}")]
    Scenario(String),
}
