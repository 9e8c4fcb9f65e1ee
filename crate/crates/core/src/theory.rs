//! Closed-form prefix-error probabilities and computation-rate bounds.
//!
//! Noise is measured after normalisation: `z / eta ~ N(0, 1 / SNR)`, so digit
//! `m` of a base-`B` expansion is hit directly with probability
//! `2 Q(sqrt(SNR) / B^m)`. Without guards, a carry started at a less
//! significant digit reaches digit `R` only if every digit in between sits at
//! an extreme level; the propagation model captures that with `p_tilde`, the
//! reciprocal of the extreme-level probability.

use crate::plan::{AlphabetSpec, DigitPlan};
use crate::Error;
use num_traits::ToPrimitive;

/// Gaussian tail `Pr(N(0, 1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Carry-propagation statistics of the superimposed digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    p_tilde: f64,
    c0: f64,
}

impl PropagationModel {
    /// `p_tilde` must exceed 1; `f64::INFINITY` means carries never propagate.
    pub fn new(p_tilde: f64) -> Result<Self, Error> {
        if p_tilde.is_nan() || p_tilde <= 1.0 {
            return Err(Error::InvalidPropagation(p_tilde));
        }
        Ok(Self {
            p_tilde,
            c0: 2.0 * (1.0 - p_tilde.recip()),
        })
    }

    /// `p_tilde = q^K` for `K` independent uniform `q`-ary sources with
    /// `B = L`.
    pub fn uniform(q: usize, transmitters: usize) -> Self {
        let p_tilde = (q as f64).powi(transmitters as i32);
        Self {
            p_tilde,
            c0: 2.0 * (1.0 - p_tilde.recip()),
        }
    }

    /// Conservative model from the distribution of the superimposed digit:
    /// `1 / p_tilde = min(Pr(u = 0), Pr(u = B - 1))`.
    pub fn from_digit_pmf(pmf: &[f64], base: u64) -> Result<Self, Error> {
        let low = pmf.first().copied().unwrap_or(0.0);
        let high = pmf.get(base as usize - 1).copied().unwrap_or(0.0);
        Self::new(low.min(high).recip())
    }

    /// Model for the sum of independent sources with the given alphabets.
    pub fn from_alphabets(alphabets: &[AlphabetSpec], base: u64) -> Result<Self, Error> {
        Self::from_digit_pmf(&sum_pmf(alphabets), base)
    }

    pub fn p_tilde(&self) -> f64 {
        self.p_tilde
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `p_tilde^exponent`, with the infinite model handled explicitly.
    fn power(&self, exponent: i64) -> f64 {
        if exponent == 0 {
            1.0
        } else if self.p_tilde.is_infinite() {
            if exponent < 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.p_tilde.powf(exponent as f64)
        }
    }
}

/// Distribution of `sum_k digit_k` for independent transmitters.
pub fn sum_pmf(alphabets: &[AlphabetSpec]) -> Vec<f64> {
    alphabets.iter().fold(vec![1.0], |acc, a| {
        let digit = a.digit_pmf();
        let mut out = vec![0.0; acc.len() + digit.len() - 1];
        for (i, p) in acc.iter().enumerate() {
            for (j, r) in digit.iter().enumerate() {
                out[i + j] += p * r;
            }
        }
        out
    })
}

/// Probability that the first nonzero base-`base` digit of the normalised
/// noise is digit `m` (1-based).
pub fn first_nonzero_digit_prob(m: u32, snr: f64, base: f64) -> f64 {
    let s = snr.sqrt();
    2.0 * q_function(s / base.powi(m as i32)) - 2.0 * q_function(s / base.powi(m as i32 - 1))
}

/// Prefix-error probability of the unshielded scheme:
/// `c0 * sum_{m=R}^{M+1} Q(sqrt(SNR) / B^m) * p_tilde^-(m-R)`, clamped to
/// `[0, 1]`.
pub fn pe_unshielded_series(
    r: usize,
    block_len: usize,
    snr: f64,
    base: f64,
    model: &PropagationModel,
) -> Result<f64, Error> {
    if r == 0 || r > block_len {
        return Err(Error::PrefixOutOfRange { r, max: block_len });
    }
    let s = snr.sqrt();
    let sum: f64 = (r..=block_len + 1)
        .map(|m| q_function(s / base.powi(m as i32)) * model.power(-((m - r) as i64)))
        .sum();
    Ok((model.c0 * sum).clamp(0.0, 1.0))
}

/// `floor(log_B sqrt(SNR))`, computed with integer powers so exact powers
/// of `B` land on the right side. Saturates at `i32::MAX` for infinite SNR.
pub fn m_star(snr: f64, base: f64) -> i32 {
    if snr.is_infinite() {
        return i32::MAX;
    }
    let b2 = base * base;
    let mut m = 0i32;
    if snr >= 1.0 {
        while b2.powi(m + 1) <= snr {
            m += 1;
        }
    } else {
        while b2.powi(m) > snr {
            m -= 1;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorBound {
    pub value: f64,
    pub m_star: i32,
}

/// Carry-propagation floor of the unshielded prefix error,
/// `c0 * Q(1) * p_tilde^(R - m*)`, clamped to `[0, 1]`.
///
/// The digit at depth `m*` is hit with probability about `c0 Q(1)` and its
/// carry survives the `m* - R` extreme digits above it with probability
/// `p_tilde^-(m* - R)`; for `R > m*` the floor saturates.
pub fn pe_unshielded_floor(r: usize, snr: f64, base: f64, model: &PropagationModel) -> FloorBound {
    let m_star = m_star(snr, base);
    let exponent = r as i64 - m_star as i64;
    let value = model.c0 * q_function(1.0) * model.power(exponent);
    FloorBound {
        value: if value.is_nan() {
            1.0
        } else {
            value.clamp(0.0, 1.0)
        },
        m_star,
    }
}

/// A rate bound and its gap term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub rate: f64,
    pub gap: f64,
}

/// Upper bound on the unshielded epsilon-rate:
/// `0.5 log2 SNR / (log2 q + log2 K) - log2(c0 Q(1) / eps) / K`, with
/// `p_tilde = q^K`.
pub fn rate_unshielded_upper(epsilon: f64, snr: f64, q: usize, transmitters: usize) -> RateBound {
    let model = PropagationModel::uniform(q, transmitters);
    let gap = (model.c0 * q_function(1.0) / epsilon).log2() / transmitters as f64;
    let digits = 0.5 * snr.log2() / ((q as f64).log2() + (transmitters as f64).log2());
    RateBound {
        rate: digits - gap,
        gap,
    }
}

/// Prefix error with guards, `2 Q(sqrt(SNR) / D)`, where `D` is the plan's
/// cumulative denominator at the `R`-th information slot. `R = 0` gives
/// `2 Q(sqrt(SNR))`.
pub fn pe_shielded(r: usize, snr: f64, plan: &DigitPlan) -> Result<f64, Error> {
    let positions = plan.information_positions();
    let d = match r {
        0 => 1.0,
        _ => {
            let pos = positions.get(r - 1).ok_or(Error::PrefixOutOfRange {
                r,
                max: positions.len(),
            })?;
            plan.denominators()[*pos].to_f64().unwrap_or(f64::INFINITY)
        }
    };
    Ok((2.0 * q_function(snr.sqrt() / d)).min(1.0))
}

/// `2 Q(sqrt(SNR) / (B + 2 guard)^R)`: the constant-radix idealisation of
/// [`pe_shielded`].
pub fn pe_shielded_idealized(r: usize, snr: f64, base: u64, guard: u64) -> f64 {
    let radix = (base + 2 * guard) as f64;
    (2.0 * q_function(snr.sqrt() / radix.powi(r as i32))).min(1.0)
}

/// Lower bound on the fixed-guard epsilon-rate:
/// `(log2 SNR - log2(2 ln(1/eps))) / (2 log2(B + 2 guard))`, with gap
/// `log2(2 ln(1/eps)) / (2 log2(B + 2 guard))`.
pub fn rate_shielded_lower(epsilon: f64, snr: f64, base: u64, guard: u64) -> RateBound {
    let radix_bits = ((base + 2 * guard) as f64).log2();
    let slack = (2.0 * (-epsilon.ln())).log2();
    RateBound {
        rate: (snr.log2() - slack) / (2.0 * radix_bits),
        gap: slack / (2.0 * radix_bits),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableRate {
    /// Digits (information plus guard) that decode with error at most `eps`.
    pub mu: u64,
    /// Information digits among them, `mu - ceil(sqrt(2 mu))`.
    pub rate: u64,
    pub gap: f64,
}

/// Variable-length bound: `mu = ceil((0.5 log2 SNR - 0.5 log2(2 ln(1/eps))) / log2 B)`.
pub fn rate_variable_lower(epsilon: f64, snr: f64, base: u64) -> VariableRate {
    let base_bits = (base as f64).log2();
    let slack = 0.5 * (2.0 * (-epsilon.ln())).log2();
    let gap = slack / base_bits;
    let x = (0.5 * snr.log2() - slack) / base_bits;
    // absorb rounding noise so exact integers do not round up
    let mu = (x - 1e-12 * x.abs().max(1.0)).ceil().max(0.0);
    let mu = if mu.is_finite() { mu as u64 } else { u64::MAX };
    let guards = ((2 * mu) as f64).sqrt().ceil() as u64;
    VariableRate {
        mu,
        rate: mu.saturating_sub(guards),
        gap,
    }
}

/// All three bounds at one `(epsilon, SNR)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub epsilon: f64,
    pub unshielded: RateBound,
    pub shielded: RateBound,
    pub variable: VariableRate,
}

pub fn rate_report(
    epsilon: f64,
    snr: f64,
    q: usize,
    transmitters: usize,
    base: u64,
    guard: u64,
) -> RateReport {
    RateReport {
        epsilon,
        unshielded: rate_unshielded_upper(epsilon, snr, q, transmitters),
        shielded: rate_shielded_lower(epsilon, snr, base, guard),
        variable: rate_variable_lower(epsilon, snr, base),
    }
}
