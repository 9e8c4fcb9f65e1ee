//! Exact shift-map encoding and mixed-radix decoding.
//!
//! Transmitter `k` maps its block to `b_k = N_k / (K * D_M)` where `N_k` is an
//! exact integer. The channel input is `x_k = eta * (b_k - gamma_k)`. The
//! receiver forms `d = gamma_bar + y / eta`, which equals
//! `sum_k N_k / (K * D_M) + z / eta`; the signal part stays an exact integer
//! and the noise part is rounded onto a grid [`GUARD_BITS`] bits finer than
//! the last digit. Digits are then read off by mixed-radix long division.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::channel::ReceivedSignal;
use crate::plan::{output_alphabet_size, validate_plan, AlphabetSpec, DigitPlan, SystemConfig};
use crate::Error;

/// Extra fractional bits carried below the finest digit when the noise is
/// added to the exact signal.
pub const GUARD_BITS: u32 = 64;

/// `K * D_M` must not exceed this for the 128-bit fast path.
const FAST_SCALE_LIMIT: u128 = 1 << 62;

/// Pre-processing map of one transmitter.
pub fn preprocess(symbol: u64, alphabet: &AlphabetSpec) -> Result<i64, Error> {
    alphabet.level(symbol)
}

/// Element-wise post-processing through a lookup table indexed by the
/// decoded digit sum.
pub fn postprocess<T: Clone>(estimates: &[u64], table: &[T]) -> Result<Vec<T>, Error> {
    estimates
        .iter()
        .map(|&u| {
            table
                .get(u as usize)
                .cloned()
                .ok_or(Error::OutsideLookup(u))
        })
        .collect()
}

/// Source symbols of all transmitters for the information slots of one block:
/// `rows[k][i]` is transmitter `k`'s symbol in the `i`-th information slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceBlock {
    rows: Vec<Vec<u64>>,
}

impl SourceBlock {
    pub fn new(
        rows: Vec<Vec<u64>>,
        alphabets: &[AlphabetSpec],
        info_count: usize,
    ) -> Result<Self, Error> {
        if rows.len() != alphabets.len() {
            return Err(Error::BlockShape {
                expected: alphabets.len(),
                got: rows.len(),
            });
        }
        for (row, a) in rows.iter().zip(alphabets) {
            if row.len() != info_count {
                return Err(Error::BlockShape {
                    expected: info_count,
                    got: row.len(),
                });
            }
            if let Some(&symbol) = row.iter().find(|&&s| s >= a.size() as u64) {
                return Err(Error::SymbolOutOfRange {
                    symbol,
                    size: a.size(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[u64] {
        &self.rows[k]
    }
}

/// Mean and variance of each transmitter's `b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub gamma: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Analytic mean and variance of `b_k` under independent symbols across
/// slots.
pub fn block_statistics(plan: &DigitPlan, alphabets: &[AlphabetSpec]) -> BlockStats {
    let k = alphabets.len() as f64;
    let inv_d: Vec<f64> = plan
        .denominators()
        .iter()
        .map(|d| d.to_f64().map_or(0.0, f64::recip))
        .collect();
    let mut gamma = Vec::with_capacity(alphabets.len());
    let mut variance = Vec::with_capacity(alphabets.len());
    for a in alphabets {
        let (mean, var) = (a.digit_mean(), a.digit_variance());
        let mut g = 0.0;
        let mut v = 0.0;
        for (slot, w) in plan.slots().iter().zip(&inv_d) {
            let offset = slot.level_offset() as f64 / k;
            if slot.is_information() {
                g += (mean + offset) * w;
                v += var * w * w;
            } else {
                g += offset * w;
            }
        }
        gamma.push(g);
        variance.push(v);
    }
    BlockStats { gamma, variance }
}

/// Common power scale `1 / sqrt(max_k Var(b_k))`.
pub fn power_scale(variances: &[f64]) -> Result<f64, Error> {
    let max = variances.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        Ok(max.sqrt().recip())
    } else {
        Err(Error::DegeneratePower)
    }
}

/// One transmitter's channel input together with its exact numerator.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSignal {
    /// `N_k`, with `b_k = N_k / (K * D_M)`.
    pub numerator: BigUint,
    pub gamma: f64,
    pub eta: f64,
    /// `eta * (b_k - gamma_k)`.
    pub x: f64,
}

/// Digits read off a received signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Raw mixed-radix digits `r[m]`, one per slot.
    pub raw_digits: Vec<u64>,
    /// `clamp(r[m] - guard_low, 0, L - 1)` for the information slots, in
    /// order; guard slots are skipped.
    pub estimates: Vec<u64>,
    /// Zero-based slot of the first information digit outside its admissible
    /// range.
    pub guard_violation: Option<usize>,
}

/// Smallest information slot whose raw digit falls outside
/// `[guard_low, guard_low + width - 1]`. `width` is normally `L`.
pub fn detect_guard_violation(
    result: &DecodeResult,
    plan: &DigitPlan,
    width: u64,
) -> Option<usize> {
    plan.slots()
        .iter()
        .zip(&result.raw_digits)
        .position(|(slot, &r)| {
            slot.is_information() && (r < slot.guard_low || r >= slot.guard_low + width)
        })
}

#[derive(Debug, Clone)]
struct FastPath {
    weights: Vec<u128>,
    scale: u128,
    total: u128,
    k: u128,
}

/// Transmit side of the scheme for a fixed set of alphabets and plan.
#[derive(Debug, Clone)]
pub struct Codec {
    alphabets: Vec<AlphabetSpec>,
    plan: DigitPlan,
    output_size: u64,
    info_positions: Vec<usize>,
    /// `D_M / D_m` per slot.
    weights: Vec<BigUint>,
    /// `K * D_M`.
    scale: BigUint,
    stats: BlockStats,
    eta: f64,
    fast: Option<FastPath>,
}

impl Codec {
    pub fn new(alphabets: &[AlphabetSpec], plan: &DigitPlan) -> Result<Self, Error> {
        let output_size = output_alphabet_size(alphabets)?;
        validate_plan(plan, alphabets)?;
        let total = plan.total_denominator();
        let weights: Vec<BigUint> = plan.denominators().iter().map(|d| total / d).collect();
        let scale = total * BigUint::from(alphabets.len());
        let stats = block_statistics(plan, alphabets);
        let eta = power_scale(&stats.variance)?;
        let fast = scale
            .to_u128()
            .filter(|&s| s <= FAST_SCALE_LIMIT)
            .map(|s| FastPath {
                // all weights divide D_M < scale, so they fit
                weights: weights.iter().map(|w| w.to_u128().unwrap_or(0)).collect(),
                scale: s,
                total: total.to_u128().unwrap_or(0),
                k: alphabets.len() as u128,
            });
        Ok(Self {
            alphabets: alphabets.to_vec(),
            plan: plan.clone(),
            output_size,
            info_positions: plan.information_positions(),
            weights,
            scale,
            stats,
            eta,
            fast,
        })
    }

    pub fn from_config(config: &SystemConfig) -> Result<Self, Error> {
        Self::new(config.alphabets(), config.plan())
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

    /// `L`.
    pub fn output_size(&self) -> u64 {
        self.output_size
    }

    pub fn information_count(&self) -> usize {
        self.info_positions.len()
    }

    pub fn stats(&self) -> &BlockStats {
        &self.stats
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma_bar(&self) -> f64 {
        self.stats.gamma.iter().sum()
    }

    /// `K * D_M`, the common denominator of every `b_k`.
    pub fn scale(&self) -> &BigUint {
        &self.scale
    }

    /// Whether the 128-bit arithmetic path is available for this plan.
    pub fn has_fast_path(&self) -> bool {
        self.fast.is_some()
    }

    fn digit_values(&self, k: usize, symbols: &[u64]) -> Result<Vec<u64>, Error> {
        let alphabet = self.alphabets.get(k).ok_or(Error::BlockShape {
            expected: self.alphabets.len(),
            got: k + 1,
        })?;
        if symbols.len() != self.info_positions.len() {
            return Err(Error::BlockShape {
                expected: self.info_positions.len(),
                got: symbols.len(),
            });
        }
        symbols.iter().map(|&s| alphabet.digit_value(s)).collect()
    }

    /// Exact numerator `N_k` of transmitter `k` for its information-slot
    /// symbols.
    pub fn encode_row(&self, k: usize, symbols: &[u64]) -> Result<BigUint, Error> {
        let values = self.digit_values(k, symbols)?;
        Ok(self.numerator_from_values(&values))
    }

    pub(crate) fn numerator_from_values(&self, values: &[u64]) -> BigUint {
        let k = self.alphabets.len() as u64;
        let mut values = values.iter();
        let mut n = BigUint::zero();
        for (slot, w) in self.plan.slots().iter().zip(&self.weights) {
            let level = if slot.is_information() {
                // caller passes one value per information slot
                k * values.next().copied().unwrap_or(0) + slot.level_offset()
            } else {
                slot.level_offset()
            };
            if level != 0 {
                n += w * level;
            }
        }
        n
    }

    /// 128-bit version of [`numerator_from_values`](Self::numerator_from_values).
    pub(crate) fn fast_numerator(&self, values: &[u64]) -> Option<u128> {
        let fast = self.fast.as_ref()?;
        let mut values = values.iter();
        let mut n = 0u128;
        for (slot, &w) in self.plan.slots().iter().zip(&fast.weights) {
            let level = if slot.is_information() {
                fast.k * values.next().copied().unwrap_or(0) as u128 + slot.level_offset() as u128
            } else {
                slot.level_offset() as u128
            };
            n += w * level;
        }
        Some(n)
    }

    /// Encodes and modulates transmitter `k`'s block.
    pub fn modulate(&self, k: usize, symbols: &[u64]) -> Result<EncodedSignal, Error> {
        let numerator = self.encode_row(k, symbols)?;
        let gamma = self.stats.gamma[k];
        let b = ratio_to_f64(&numerator, &self.scale);
        Ok(EncodedSignal {
            numerator,
            gamma,
            eta: self.eta,
            x: self.eta * (b - gamma),
        })
    }

    /// Exact per-slot digit sums `u[m] = sum_k digit_k[m]` of a block.
    pub fn digit_sums(&self, block: &SourceBlock) -> Result<Vec<u64>, Error> {
        let mut sums = vec![0u64; self.info_positions.len()];
        for (k, row) in block.rows().iter().enumerate() {
            for (acc, v) in sums.iter_mut().zip(self.digit_values(k, row)?) {
                *acc += v;
            }
        }
        Ok(sums)
    }

    /// Sum of pre-processed levels corresponding to a decoded digit sum.
    pub fn level_sum(&self, estimate: u64) -> i64 {
        estimate as i64
            + self
                .alphabets
                .iter()
                .map(AlphabetSpec::min_level)
                .sum::<i64>()
    }

    pub fn receiver(&self) -> Receiver {
        Receiver {
            plan: self.plan.clone(),
            radices: self.plan.radices(),
            output_size: self.output_size,
            detection_width: self.output_size,
            k: self.alphabets.len() as u64,
            total: self.plan.total_denominator().clone(),
            scale: self.scale.clone(),
            eta: self.eta,
            gamma_bar: self.gamma_bar(),
            fast: self.fast.clone(),
        }
    }
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    match (num.to_f64(), den.to_f64()) {
        (Some(n), Some(d)) if d.is_finite() => n / d,
        _ => {
            // shift both down until the denominator fits
            let shift = den.bits().saturating_sub(1000);
            let n = (num >> shift).to_f64().unwrap_or(0.0);
            let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
            n / d
        }
    }
}

/// Receive side: turns a superimposed signal back into digit sums.
#[derive(Debug, Clone)]
pub struct Receiver {
    plan: DigitPlan,
    radices: Vec<u64>,
    output_size: u64,
    detection_width: u64,
    k: u64,
    total: BigUint,
    scale: BigUint,
    eta: f64,
    gamma_bar: f64,
    fast: Option<FastPath>,
}

impl Receiver {
    /// Widens (or narrows) the admissible digit range used for guard
    /// detection from the default `L` to `width` levels above `guard_low`.
    pub fn with_detection_width(mut self, width: u64) -> Self {
        self.detection_width = width;
        self
    }

    pub fn plan(&self) -> &DigitPlan {
        &self.plan
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn output_size(&self) -> u64 {
        self.output_size
    }

    pub fn detection_width(&self) -> u64 {
        self.detection_width
    }

    /// Decodes a received signal, using 128-bit arithmetic when the plan
    /// allows it.
    pub fn decode(&self, received: &ReceivedSignal) -> DecodeResult {
        if let (Some(_), Some(signal)) = (&self.fast, received.signal.to_u128()) {
            return self.decode_fast(signal, received.noise);
        }
        self.decode_exact(received)
    }

    /// Arbitrary-precision reference decoder.
    pub fn decode_exact(&self, received: &ReceivedSignal) -> DecodeResult {
        let v = received.noise / self.eta;
        let top = &self.total - 1u32;
        let index = if v >= 1.0 {
            top
        } else if v <= -1.0 {
            BigUint::zero()
        } else {
            let t = (BigInt::from(received.signal.clone()) << GUARD_BITS)
                + scaled_noise_exact(v, &self.scale);
            let q = t.div_floor(&(BigInt::from(self.k) << GUARD_BITS));
            match q.to_biguint() {
                None => BigUint::zero(),
                Some(q) if q > top => top,
                Some(q) => q,
            }
        };
        let mut digits = vec![0u64; self.radices.len()];
        let mut q = index;
        for (digit, &radix) in digits.iter_mut().zip(&self.radices).rev() {
            let (rest, r) = q.div_rem(&BigUint::from(radix));
            *digit = r.to_u64().unwrap_or(0);
            q = rest;
        }
        self.finish(digits)
    }

    pub(crate) fn decode_fast(&self, signal: u128, noise: f64) -> DecodeResult {
        let Some(fast) = &self.fast else {
            return self.decode_exact(&ReceivedSignal {
                signal: BigUint::from(signal),
                noise,
            });
        };
        let v = noise / self.eta;
        let top = fast.total - 1;
        let index = if v >= 1.0 {
            top
        } else if v <= -1.0 {
            0
        } else {
            // |t| < 2 * K * D_M * 2^64 <= 2^127
            let t = ((signal as i128) << GUARD_BITS) + scaled_noise_fast(v, fast.scale);
            let q = t.div_euclid((fast.k as i128) << GUARD_BITS);
            q.clamp(0, top as i128) as u128
        };
        let mut digits = vec![0u64; self.radices.len()];
        let mut q = index;
        for (digit, &radix) in digits.iter_mut().zip(&self.radices).rev() {
            let radix = radix as u128;
            *digit = (q % radix) as u64;
            q /= radix;
        }
        self.finish(digits)
    }

    fn finish(&self, raw_digits: Vec<u64>) -> DecodeResult {
        let top = self.output_size - 1;
        let estimates = self
            .plan
            .slots()
            .iter()
            .zip(&raw_digits)
            .filter(|(s, _)| s.is_information())
            .map(|(s, &r)| r.saturating_sub(s.guard_low).min(top))
            .collect();
        let mut result = DecodeResult {
            raw_digits,
            estimates,
            guard_violation: None,
        };
        result.guard_violation = detect_guard_violation(&result, &self.plan, self.detection_width);
        result
    }
}

/// `round(v * scale * 2^GUARD_BITS)` for `|v| < 1`, exactly.
fn scaled_noise_exact(v: f64, scale: &BigUint) -> BigInt {
    let (mantissa, exponent, sign) = v.integer_decode();
    if mantissa == 0 {
        return BigInt::zero();
    }
    let product = BigUint::from(mantissa) * scale;
    let shift = exponent as i64 + GUARD_BITS as i64;
    let magnitude = if shift >= 0 {
        product << shift as u64
    } else {
        let s = shift.unsigned_abs();
        (product + (BigUint::one() << (s - 1))) >> s
    };
    let sign = if sign < 0 { Sign::Minus } else { Sign::Plus };
    BigInt::from_biguint(sign, magnitude)
}

/// 128-bit version of [`scaled_noise_exact`]; requires `scale <= 2^62`.
fn scaled_noise_fast(v: f64, scale: u128) -> i128 {
    let (mantissa, exponent, sign) = v.integer_decode();
    if mantissa == 0 {
        return 0;
    }
    // < 2^53 * 2^62
    let product = mantissa as u128 * scale;
    let shift = exponent as i32 + GUARD_BITS as i32;
    let magnitude = if shift >= 0 {
        product << shift
    } else if shift <= -120 {
        0
    } else {
        let s = shift.unsigned_abs();
        (product + (1u128 << (s - 1))) >> s
    };
    if sign < 0 {
        -(magnitude as i128)
    } else {
        magnitude as i128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{make_fixed_guard_plan, make_unshielded_plan};

    fn uniform(q: usize, k: usize) -> Vec<AlphabetSpec> {
        vec![AlphabetSpec::uniform(q).unwrap(); k]
    }

    fn noiseless(signal: BigUint) -> ReceivedSignal {
        ReceivedSignal { signal, noise: 0.0 }
    }

    #[test]
    fn preprocess_examples() {
        let id = AlphabetSpec::uniform(3).unwrap();
        assert_eq!(preprocess(2, &id).unwrap(), 2);
        let affine = AlphabetSpec::uniform(3)
            .unwrap()
            .with_preprocessing(3, 2)
            .unwrap();
        assert_eq!(preprocess(1, &affine).unwrap(), 5);
        let shifted = AlphabetSpec::uniform(2)
            .unwrap()
            .with_preprocessing(-1, 1)
            .unwrap();
        assert_eq!(preprocess(0, &shifted).unwrap(), -1);
        assert!(matches!(
            preprocess(3, &id),
            Err(Error::SymbolOutOfRange { .. })
        ));
    }

    #[test]
    fn postprocess_examples() {
        assert_eq!(
            postprocess(&[0, 3, 1], &[0u64, 1, 2, 3]).unwrap(),
            vec![0, 3, 1]
        );
        let mean = [0.0, 0.5, 1.0, 1.5, 2.0];
        assert_eq!(postprocess(&[2, 4], &mean).unwrap(), vec![1.0, 2.0]);
        assert_eq!(postprocess(&[5], &mean), Err(Error::OutsideLookup(5)));
    }

    #[test]
    fn unshielded_encoding_value() {
        // K = 1, B = 4, M = 2, s = [1, 2]: b = 1/4 + 2/16
        let codec = Codec::new(&uniform(4, 1), &make_unshielded_plan(4, 2).unwrap()).unwrap();
        let n = codec.encode_row(0, &[1, 2]).unwrap();
        assert_eq!(n, BigUint::from(6u32));
        assert_eq!(ratio_to_f64(&n, codec.scale()), 0.375);
        assert_eq!(codec.encode_row(0, &[0, 0]).unwrap(), BigUint::zero());
    }

    #[test]
    fn shielded_encoding_value() {
        // (beta, alpha) = (1, 2) on every slot, K = 2, B = 4, M = 1, s = [3]
        let plan = DigitPlan::new(vec![crate::DigitSlot::information(4, 1, 2)]).unwrap();
        let codec = Codec::new(&uniform(2, 2), &plan).unwrap();
        // s = 3 is outside the binary alphabet, so feed the digit value directly
        let n = codec.numerator_from_values(&[3]);
        assert_eq!(n, BigUint::from(7u32));
        let t = ratio_to_f64(&n, codec.scale());
        assert!((t - (3.0 + 0.5) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn block_statistics_examples() {
        let s = block_statistics(&make_unshielded_plan(2, 1).unwrap(), &uniform(2, 1));
        assert_eq!(s.gamma, vec![0.25]);
        assert_eq!(s.variance, vec![0.0625]);

        let point = AlphabetSpec::with_pmf(3, vec![0.0, 1.0, 0.0]).unwrap();
        let s = block_statistics(&make_unshielded_plan(3, 2).unwrap(), &[point]);
        assert_eq!(s.variance, vec![0.0]);

        // M = 2, B = 4, q = 2: enumerate the four blocks
        let s = block_statistics(&make_unshielded_plan(4, 2).unwrap(), &uniform(2, 1));
        let values = [0.0, 1.0 / 16.0, 1.0 / 4.0, 1.0 / 4.0 + 1.0 / 16.0];
        let mean = values.iter().sum::<f64>() / 4.0;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.variance[0] - var).abs() < 1e-15);
        assert!((var - 0.25 * (1.0 / 16.0 + 1.0 / 256.0)).abs() < 1e-15);
    }

    #[test]
    fn power_scale_examples() {
        assert_eq!(power_scale(&[1.0 / 16.0]).unwrap(), 4.0);
        assert_eq!(power_scale(&[1.0 / 16.0, 1.0 / 64.0]).unwrap(), 4.0);
        assert_eq!(power_scale(&[0.0]), Err(Error::DegeneratePower));

        // q = 2, B = 2, M = 1: x takes values -1 and +1
        let codec = Codec::new(&uniform(2, 1), &make_unshielded_plan(2, 1).unwrap()).unwrap();
        assert_eq!(codec.modulate(0, &[0]).unwrap().x, -1.0);
        assert_eq!(codec.modulate(0, &[1]).unwrap().x, 1.0);
    }

    #[test]
    fn decode_worked_example() {
        // K = 2, B = 5, M = 2, s1 = [1, 0], s2 = [1, 2]: sum 0.48 = 2/5 + 2/25
        let codec = Codec::new(&uniform(3, 2), &make_unshielded_plan(5, 2).unwrap()).unwrap();
        let s = codec.encode_row(0, &[1, 0]).unwrap() + codec.encode_row(1, &[1, 2]).unwrap();
        assert_eq!(ratio_to_f64(&s, codec.scale()), 0.48);
        let rx = codec.receiver();
        let out = rx.decode(&noiseless(s.clone()));
        assert_eq!(out.raw_digits, vec![2, 2]);
        assert_eq!(out.estimates, vec![2, 2]);
        assert_eq!(rx.decode_exact(&noiseless(s)), out);
    }

    #[test]
    fn decode_clamps() {
        let codec = Codec::new(&uniform(2, 2), &make_unshielded_plan(3, 3).unwrap()).unwrap();
        let rx = codec.receiver();
        let zero = rx.decode(&noiseless(BigUint::zero()));
        assert_eq!(zero.raw_digits, vec![0, 0, 0]);
        let below = ReceivedSignal {
            signal: BigUint::zero(),
            noise: -1e-6,
        };
        assert_eq!(rx.decode(&below).raw_digits, vec![0, 0, 0]);
        assert_eq!(rx.decode_exact(&below).raw_digits, vec![0, 0, 0]);
        let far_above = ReceivedSignal {
            signal: BigUint::zero(),
            noise: 1e9,
        };
        assert_eq!(rx.decode(&far_above).raw_digits, vec![2, 2, 2]);
        assert_eq!(rx.decode_exact(&far_above).raw_digits, vec![2, 2, 2]);
    }

    #[test]
    fn guard_violation_examples() {
        // B = 4, beta = 1, L = 3
        let plan = make_fixed_guard_plan(4, 3, 1).unwrap();
        let result = DecodeResult {
            raw_digits: vec![1, 0, 2],
            estimates: vec![1, 0, 1],
            guard_violation: None,
        };
        assert_eq!(detect_guard_violation(&result, &plan, 3), Some(1));
        let top = DecodeResult {
            raw_digits: vec![1, 4, 2],
            ..result.clone()
        };
        assert_eq!(detect_guard_violation(&top, &plan, 3), Some(1));
        let fine = DecodeResult {
            raw_digits: vec![2, 1, 3],
            ..result.clone()
        };
        assert_eq!(detect_guard_violation(&fine, &plan, 3), None);
        // the unguarded first slot still only admits 0..L-1
        let first = DecodeResult {
            raw_digits: vec![3, 1, 3],
            ..result
        };
        assert_eq!(detect_guard_violation(&first, &plan, 3), Some(0));
        assert_eq!(detect_guard_violation(&first, &plan, 4), None);
    }

    #[test]
    fn noiseless_shielded_never_flags() {
        let alphabets = uniform(2, 2);
        let plan = make_fixed_guard_plan(3, 3, 1).unwrap();
        let codec = Codec::new(&alphabets, &plan).unwrap();
        let rx = codec.receiver();
        for bits in 0u32..64 {
            let rows: Vec<Vec<u64>> = (0..2)
                .map(|k| (0..3).map(|m| ((bits >> (3 * k + m)) & 1) as u64).collect())
                .collect();
            let block = SourceBlock::new(rows, &alphabets, 3).unwrap();
            let s = (0..2)
                .map(|k| codec.encode_row(k, block.row(k)).unwrap())
                .sum::<BigUint>();
            let out = rx.decode(&noiseless(s));
            assert_eq!(out.estimates, codec.digit_sums(&block).unwrap());
            assert_eq!(out.guard_violation, None);
        }
    }

    #[test]
    fn source_block_validation() {
        let alphabets = uniform(2, 2);
        assert!(SourceBlock::new(vec![vec![0, 1], vec![1, 1]], &alphabets, 2).is_ok());
        assert!(matches!(
            SourceBlock::new(vec![vec![0, 2], vec![1, 1]], &alphabets, 2),
            Err(Error::SymbolOutOfRange { symbol: 2, .. })
        ));
        assert!(matches!(
            SourceBlock::new(vec![vec![0, 1]], &alphabets, 2),
            Err(Error::BlockShape { .. })
        ));
    }

    #[test]
    fn level_sum_adds_offsets() {
        let a = AlphabetSpec::uniform(3)
            .unwrap()
            .with_preprocessing(-1, 1)
            .unwrap();
        let codec = Codec::new(&[a.clone(), a], &make_unshielded_plan(5, 1).unwrap()).unwrap();
        assert_eq!(codec.level_sum(0), -2);
        assert_eq!(codec.level_sum(4), 2);
    }

    #[test]
    fn large_plans_use_exact_path() {
        let codec = Codec::new(&uniform(2, 2), &make_unshielded_plan(3, 60).unwrap()).unwrap();
        assert!(!codec.has_fast_path());
        let symbols: Vec<u64> = (0..60).map(|m| (m % 2) as u64).collect();
        let s = codec.encode_row(0, &symbols).unwrap() + codec.encode_row(1, &symbols).unwrap();
        let out = codec.receiver().decode(&noiseless(s));
        let expected: Vec<u64> = symbols.iter().map(|s| 2 * s).collect();
        assert_eq!(out.estimates, expected);
    }
}
