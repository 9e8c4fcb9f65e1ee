//! Source alphabets, mixed-radix digit plans and the system configuration
//! built from them.
//!
//! A [`DigitPlan`] is an ordered list of [`DigitSlot`]s. Slot `m` has an
//! information region of `base` levels, `guard_span` extra levels and a guard
//! offset `guard_low`, so its effective radix is `base + guard_span`. Slot
//! positions form a mixed-radix positional system with cumulative
//! denominators `D_m = radix_1 * ... * radix_m`; a block is the number
//! `sum_m digit_m / D_m` in `[0, 1)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::Error;

/// Tolerance on the pmf normalisation.
const PMF_TOLERANCE: f64 = 1e-12;

/// Per-transmitter source alphabet with an optional affine pre-processing
/// map `symbol -> offset + spacing * symbol`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphabetSpec {
    size: usize,
    pmf: Vec<f64>,
    offset: i64,
    spacing: i64,
}

impl AlphabetSpec {
    /// Uniform distribution over `{0, ..., size - 1}`.
    pub fn uniform(size: usize) -> Result<Self, Error> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        Ok(Self {
            size,
            pmf: vec![1.0 / size as f64; size],
            offset: 0,
            spacing: 1,
        })
    }

    pub fn with_pmf(size: usize, pmf: Vec<f64>) -> Result<Self, Error> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        if pmf.len() != size {
            return Err(Error::PmfLength {
                expected: size,
                got: pmf.len(),
            });
        }
        let sum: f64 = pmf.iter().sum();
        if pmf.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::PmfNotNormalized(sum));
        }
        Ok(Self {
            size,
            pmf,
            offset: 0,
            spacing: 1,
        })
    }

    /// Attaches the pre-processing map `symbol -> offset + spacing * symbol`.
    pub fn with_preprocessing(mut self, offset: i64, spacing: i64) -> Result<Self, Error> {
        if spacing == 0 {
            return Err(Error::ZeroSpacing);
        }
        self.offset = offset;
        self.spacing = spacing;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn spacing(&self) -> i64 {
        self.spacing
    }

    /// Pre-processed level of `symbol`.
    pub fn level(&self, symbol: u64) -> Result<i64, Error> {
        if symbol >= self.size as u64 {
            return Err(Error::SymbolOutOfRange {
                symbol,
                size: self.size,
            });
        }
        Ok(self.offset + self.spacing * symbol as i64)
    }

    /// Smallest pre-processed level.
    pub fn min_level(&self) -> i64 {
        let top = self.spacing * (self.size as i64 - 1);
        self.offset + top.min(0)
    }

    /// Number of integer levels between the smallest and largest
    /// pre-processed level, inclusive.
    pub fn span(&self) -> u64 {
        self.spacing.unsigned_abs() * (self.size as u64 - 1) + 1
    }

    /// Non-negative digit value carried on the channel: the level shifted so
    /// the smallest level maps to zero.
    pub fn digit_value(&self, symbol: u64) -> Result<u64, Error> {
        Ok((self.level(symbol)? - self.min_level()) as u64)
    }

    /// Distribution of [`digit_value`](Self::digit_value) over `0..span`.
    pub fn digit_pmf(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.span() as usize];
        for (s, p) in self.pmf.iter().enumerate() {
            // symbol is in range by construction
            let v = self.digit_value(s as u64).unwrap_or(0);
            out[v as usize] += p;
        }
        out
    }

    pub fn digit_mean(&self) -> f64 {
        self.digit_pmf()
            .iter()
            .enumerate()
            .map(|(v, p)| v as f64 * p)
            .sum()
    }

    pub fn digit_variance(&self) -> f64 {
        let mean = self.digit_mean();
        self.digit_pmf()
            .iter()
            .enumerate()
            .map(|(v, p)| (v as f64 - mean).powi(2) * p)
            .sum()
    }
}

/// Size of the superimposed output alphabet: the number of integer values
/// the per-slot digit sum can take, `sum_k (span_k - 1) + 1`.
///
/// With unit spacing this is `sum_k q_k - K + 1`, i.e. `K(q - 1) + 1` for
/// identical alphabets.
pub fn output_alphabet_size(alphabets: &[AlphabetSpec]) -> Result<u64, Error> {
    if alphabets.is_empty() {
        return Err(Error::NoAlphabets);
    }
    Ok(alphabets.iter().map(|a| a.span() - 1).sum::<u64>() + 1)
}

/// Whether a slot carries source digits or a fixed guard level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRole {
    Information,
    Guard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitSlot {
    pub base: u64,
    pub guard_low: u64,
    pub guard_span: u64,
    pub role: SlotRole,
}

impl DigitSlot {
    pub fn information(base: u64, guard_low: u64, guard_span: u64) -> Self {
        Self {
            base,
            guard_low,
            guard_span,
            role: SlotRole::Information,
        }
    }

    pub fn guard(base: u64) -> Self {
        Self {
            base,
            guard_low: 0,
            guard_span: 0,
            role: SlotRole::Guard,
        }
    }

    /// Effective radix `base + guard_span`.
    pub fn radix(&self) -> u64 {
        self.base + self.guard_span
    }

    pub fn is_information(&self) -> bool {
        self.role == SlotRole::Information
    }

    /// Level the superimposed digit sits on when every source digit is zero.
    ///
    /// Information slots use `guard_low`; guard slots sit mid-range at
    /// `floor((radix - 1) / 2)`. Each transmitter contributes `1/K` of it.
    pub fn level_offset(&self) -> u64 {
        match self.role {
            SlotRole::Information => self.guard_low,
            SlotRole::Guard => (self.radix() - 1) / 2,
        }
    }
}

/// Ordered digit slots with their exact cumulative denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitPlan {
    slots: Vec<DigitSlot>,
    denominators: Vec<BigUint>,
}

impl DigitPlan {
    /// Builds a plan from explicit slots. Only the structural requirements
    /// (non-empty, every radix at least 2) are enforced here; guard
    /// constraints that depend on the output alphabet are checked by
    /// [`validate_plan`].
    pub fn new(slots: Vec<DigitSlot>) -> Result<Self, Error> {
        if slots.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if let Some((slot, s)) = slots.iter().enumerate().find(|(_, s)| s.radix() < 2) {
            return Err(Error::RadixTooSmall {
                slot,
                radix: s.radix(),
            });
        }
        let mut denominators = Vec::with_capacity(slots.len());
        let mut acc = BigUint::one();
        for s in &slots {
            acc *= s.radix();
            denominators.push(acc.clone());
        }
        Ok(Self {
            slots,
            denominators,
        })
    }

    pub fn slots(&self) -> &[DigitSlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn radices(&self) -> Vec<u64> {
        self.slots.iter().map(DigitSlot::radix).collect()
    }

    /// `D_m` for each slot, as exact integers.
    pub fn denominators(&self) -> &[BigUint] {
        &self.denominators
    }

    /// `D_M`, the denominator of the finest slot.
    pub fn total_denominator(&self) -> &BigUint {
        // non-empty by construction
        &self.denominators[self.denominators.len() - 1]
    }

    /// Zero-based slot positions of the information slots, in order.
    pub fn information_positions(&self) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_information())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn information_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_information()).count()
    }

    pub fn guard_count(&self) -> usize {
        self.len() - self.information_count()
    }
}

/// `M` information slots of radix `base` without guards.
pub fn make_unshielded_plan(base: u64, block_len: usize) -> Result<DigitPlan, Error> {
    if block_len == 0 {
        return Err(Error::EmptyBlock);
    }
    DigitPlan::new(vec![DigitSlot::information(base, 0, 0); block_len])
}

/// Symmetric fixed guards: the first slot is bare, every later slot gets
/// `guard` levels below and `guard` above its information region.
pub fn make_fixed_guard_plan(base: u64, block_len: usize, guard: u64) -> Result<DigitPlan, Error> {
    if guard == 0 {
        return Err(Error::ZeroGuard);
    }
    if block_len == 0 {
        return Err(Error::EmptyBlock);
    }
    let slots = (0..block_len)
        .map(|m| match m {
            0 => DigitSlot::information(base, 0, 0),
            _ => DigitSlot::information(base, guard, 2 * guard),
        })
        .collect();
    DigitPlan::new(slots)
}

/// Progressive radices `base + m - 1` with guard slots at the 1-based
/// positions `j(j + 3) / 2`.
pub fn make_variable_length_plan(base: u64, len: usize) -> Result<DigitPlan, Error> {
    if len == 0 {
        return Err(Error::EmptyBlock);
    }
    let guards = guard_positions(len);
    let slots = (1..=len)
        .map(|m| {
            let b = base + m as u64 - 1;
            if guards.contains(&m) {
                DigitSlot::guard(b)
            } else {
                DigitSlot::information(b, 0, 0)
            }
        })
        .collect();
    DigitPlan::new(slots)
}

/// 1-based guard positions `j(j + 3) / 2 <= len` of a variable-length plan.
pub fn guard_positions(len: usize) -> Vec<usize> {
    (1..)
        .map(|j: usize| j * (j + 3) / 2)
        .take_while(|&m| m <= len)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Effective radix below 2.
    RadixTooSmall { radix: u64 },
    /// Information region narrower than the output alphabet (`B < L`).
    BaseBelowOutput { base: u64, output_size: u64 },
    /// `guard_low > guard_span + 1`: guard levels alias into the next digit.
    GuardAboveSpan { guard_low: u64, guard_span: u64 },
    /// `guard_low + L - 1` does not fit below the radix, so the largest
    /// superimposed digit would carry into the next slot.
    GuardOverflow {
        guard_low: u64,
        output_size: u64,
        radix: u64,
    },
}

/// First violated plan invariant, with its zero-based slot index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanViolation {
    pub slot: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = self.slot + 1;
        match self.kind {
            ViolationKind::RadixTooSmall { radix } => {
                write!(f, "radix {radix} < 2 at slot {slot}")
            }
            ViolationKind::BaseBelowOutput { base, output_size } => {
                write!(f, "B < L (B = {base}, L = {output_size}) at slot {slot}")
            }
            ViolationKind::GuardAboveSpan {
                guard_low,
                guard_span,
            } => write!(
                f,
                "guard offset {guard_low} exceeds guard span {guard_span} + 1 at slot {slot}"
            ),
            ViolationKind::GuardOverflow {
                guard_low,
                output_size,
                radix,
            } => write!(
                f,
                "guard offset {guard_low} + L - 1 (L = {output_size}) overflows radix {radix} at slot {slot}"
            ),
        }
    }
}

impl std::error::Error for PlanViolation {}

/// Checks `plan` against the output alphabet of `alphabets` and returns the
/// first violation in slot order.
pub fn validate_plan(plan: &DigitPlan, alphabets: &[AlphabetSpec]) -> Result<(), PlanViolation> {
    // an empty alphabet list makes every information slot unusable
    let output_size = output_alphabet_size(alphabets).unwrap_or(u64::MAX);
    for (slot, s) in plan.slots().iter().enumerate() {
        let radix = s.radix();
        let kind = if radix < 2 {
            Some(ViolationKind::RadixTooSmall { radix })
        } else if s.guard_low > s.guard_span + 1 {
            Some(ViolationKind::GuardAboveSpan {
                guard_low: s.guard_low,
                guard_span: s.guard_span,
            })
        } else if s.is_information() && s.base < output_size {
            Some(ViolationKind::BaseBelowOutput {
                base: s.base,
                output_size,
            })
        } else if s.is_information() && s.guard_low + output_size > radix {
            Some(ViolationKind::GuardOverflow {
                guard_low: s.guard_low,
                output_size,
                radix,
            })
        } else {
            None
        };
        if let Some(kind) = kind {
            return Err(PlanViolation { slot, kind });
        }
    }
    Ok(())
}

/// Everything needed to run the transmit/receive chain: the transmitters'
/// alphabets, the shared digit plan, the channel SNR and the Monte Carlo
/// trial budget.
///
/// `snr` is linear (`eta^2 / sigma^2`); `f64::INFINITY` means a noiseless
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    alphabets: Vec<AlphabetSpec>,
    plan: DigitPlan,
    snr: f64,
    master_seed: u64,
    trials: u64,
}

impl SystemConfig {
    pub fn new(
        alphabets: Vec<AlphabetSpec>,
        plan: DigitPlan,
        snr: f64,
        master_seed: u64,
        trials: u64,
    ) -> Result<Self, Error> {
        if alphabets.is_empty() {
            return Err(Error::NoAlphabets);
        }
        if trials == 0 {
            return Err(Error::ZeroTrials);
        }
        if snr.is_nan() || snr <= 0.0 {
            return Err(Error::InvalidSnr(snr));
        }
        validate_plan(&plan, &alphabets)?;
        Ok(Self {
            alphabets,
            plan,
            snr,
            master_seed,
            trials,
        })
    }

    pub fn transmitters(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabets(&self) -> &[AlphabetSpec] {
        &self.alphabets
    }

    pub fn plan(&self) -> &DigitPlan {
        &self.plan
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn output_size(&self) -> u64 {
        // non-empty by construction
        output_alphabet_size(&self.alphabets).unwrap_or(1)
    }

    pub fn with_snr(&self, snr: f64) -> Result<Self, Error> {
        Self::new(
            self.alphabets.clone(),
            self.plan.clone(),
            snr,
            self.master_seed,
            self.trials,
        )
    }

    pub fn with_seed(&self, master_seed: u64) -> Self {
        Self {
            master_seed,
            ..self.clone()
        }
    }

    pub fn with_trials(&self, trials: u64) -> Result<Self, Error> {
        if trials == 0 {
            return Err(Error::ZeroTrials);
        }
        Ok(Self {
            trials,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(q: usize, k: usize) -> Vec<AlphabetSpec> {
        vec![AlphabetSpec::uniform(q).unwrap(); k]
    }

    #[test]
    fn output_size_examples() {
        assert_eq!(output_alphabet_size(&uniform(4, 3)).unwrap(), 10);
        assert_eq!(output_alphabet_size(&uniform(2, 1)).unwrap(), 2);
        let mixed: Vec<_> = [2, 3, 4]
            .iter()
            .map(|&q| AlphabetSpec::uniform(q).unwrap())
            .collect();
        assert_eq!(output_alphabet_size(&mixed).unwrap(), 7);
        assert_eq!(output_alphabet_size(&[]), Err(Error::NoAlphabets));
    }

    #[test]
    fn alphabet_rejects_bad_input() {
        assert_eq!(AlphabetSpec::uniform(1), Err(Error::AlphabetTooSmall(1)));
        assert!(matches!(
            AlphabetSpec::with_pmf(2, vec![0.6, 0.6]),
            Err(Error::PmfNotNormalized(_))
        ));
        assert!(matches!(
            AlphabetSpec::with_pmf(2, vec![1.5, -0.5]),
            Err(Error::PmfNotNormalized(_))
        ));
        assert!(matches!(
            AlphabetSpec::with_pmf(3, vec![0.5, 0.5]),
            Err(Error::PmfLength { .. })
        ));
        assert_eq!(
            AlphabetSpec::uniform(2).unwrap().with_preprocessing(1, 0),
            Err(Error::ZeroSpacing)
        );
    }

    #[test]
    fn negative_spacing_digit_values() {
        let a = AlphabetSpec::uniform(3)
            .unwrap()
            .with_preprocessing(5, -2)
            .unwrap();
        assert_eq!(a.min_level(), 1);
        assert_eq!(a.span(), 5);
        assert_eq!(a.digit_value(0).unwrap(), 4);
        assert_eq!(a.digit_value(2).unwrap(), 0);
    }

    #[test]
    fn unshielded_plan() {
        let p = make_unshielded_plan(4, 2).unwrap();
        assert_eq!(
            p.denominators(),
            &[BigUint::from(4u32), BigUint::from(16u32)]
        );
        let p = make_unshielded_plan(10, 3).unwrap();
        assert!(p.radices().iter().all(|&r| r == 10));
        assert!(matches!(
            make_unshielded_plan(1, 2),
            Err(Error::RadixTooSmall { slot: 0, radix: 1 })
        ));
        assert_eq!(make_unshielded_plan(3, 0), Err(Error::EmptyBlock));
    }

    #[test]
    fn fixed_guard_plan() {
        assert_eq!(
            make_fixed_guard_plan(4, 3, 1).unwrap().radices(),
            vec![4, 6, 6]
        );
        assert_eq!(
            make_fixed_guard_plan(4, 1, 1).unwrap(),
            make_unshielded_plan(4, 1).unwrap()
        );
        let p = make_fixed_guard_plan(3, 2, 2).unwrap();
        assert_eq!(p.slots()[1], DigitSlot::information(3, 2, 4));
        assert_eq!(p.radices()[1], 7);
        assert_eq!(make_fixed_guard_plan(4, 3, 0), Err(Error::ZeroGuard));
    }

    #[test]
    fn variable_length_plan() {
        let p = make_variable_length_plan(3, 9).unwrap();
        let guards: Vec<usize> = p
            .slots()
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_information())
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(guards, vec![2, 5, 9]);
        assert_eq!(p.guard_count(), 3);
        assert!((p.guard_count() as f64) <= (18f64).sqrt());
        assert_eq!(p.radices(), (3..12).collect::<Vec<u64>>());

        let p = make_variable_length_plan(3, 1).unwrap();
        assert_eq!(p.information_count(), 1);
    }

    #[test]
    fn guard_slot_sits_mid_range() {
        assert_eq!(DigitSlot::guard(4).level_offset(), 1);
        assert_eq!(DigitSlot::guard(5).level_offset(), 2);
    }

    #[test]
    fn validate_examples() {
        let plan = make_unshielded_plan(3, 2).unwrap();
        assert_eq!(validate_plan(&plan, &uniform(2, 2)), Ok(()));

        let plan = make_unshielded_plan(2, 2).unwrap();
        let v = validate_plan(&plan, &uniform(2, 2)).unwrap_err();
        assert_eq!(v.slot, 0);
        assert!(matches!(
            v.kind,
            ViolationKind::BaseBelowOutput {
                base: 2,
                output_size: 3
            }
        ));
        assert!(v.to_string().contains("B < L"));
        assert!(v.to_string().contains("slot 1"));

        let plan = DigitPlan::new(vec![DigitSlot::information(4, 3, 1)]).unwrap();
        let v = validate_plan(&plan, &uniform(2, 2)).unwrap_err();
        assert!(matches!(v.kind, ViolationKind::GuardAboveSpan { .. }));

        // beta = alpha + 1 with B = L pushes the top digit into the next slot
        let plan = DigitPlan::new(vec![DigitSlot::information(3, 2, 1)]).unwrap();
        let v = validate_plan(&plan, &uniform(2, 2)).unwrap_err();
        assert!(matches!(v.kind, ViolationKind::GuardOverflow { .. }));
    }

    #[test]
    fn config_invariants() {
        let plan = make_unshielded_plan(3, 2).unwrap();
        assert_eq!(
            SystemConfig::new(vec![], plan.clone(), 1.0, 0, 1),
            Err(Error::NoAlphabets)
        );
        assert_eq!(
            SystemConfig::new(uniform(2, 2), plan.clone(), 1.0, 0, 0),
            Err(Error::ZeroTrials)
        );
        assert!(matches!(
            SystemConfig::new(uniform(2, 2), plan.clone(), 0.0, 0, 1),
            Err(Error::InvalidSnr(_))
        ));
        assert!(matches!(
            SystemConfig::new(uniform(2, 2), plan.clone(), f64::NAN, 0, 1),
            Err(Error::InvalidSnr(_))
        ));
        assert!(SystemConfig::new(uniform(2, 2), plan, f64::INFINITY, 0, 1).is_ok());
        let bad = make_unshielded_plan(2, 2).unwrap();
        assert!(matches!(
            SystemConfig::new(uniform(2, 2), bad, 1.0, 0, 1),
            Err(Error::InvalidPlan(_))
        ));
    }
}
