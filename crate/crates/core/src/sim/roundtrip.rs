//! Exhaustive noiseless round trip over every source block.

use crate::channel::{transmit, ReceivedSignal};
use crate::codec::{Codec, DecodeResult, Receiver, SourceBlock};
use crate::plan::{AlphabetSpec, DigitPlan};
use crate::Error;

/// Result of [`exhaustive_roundtrip`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTripReport {
    pub blocks: u64,
    /// Blocks whose decoded digit sums differ from the true sums.
    pub mismatches: u64,
    /// Blocks for which the receiver raised a guard violation.
    pub guard_flags: u64,
    /// First mismatching block, as rows of symbols.
    pub first_mismatch: Option<Vec<Vec<u64>>>,
    /// `E[x_k^2]` per transmitter, averaged over all blocks under the pmfs.
    pub mean_power: Vec<f64>,
    /// `E[x_k]` per transmitter.
    pub mean_amplitude: Vec<f64>,
}

impl RoundTripReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.guard_flags == 0
    }
}

/// Runs every block of `K x R` symbols through encoder, noiseless channel and
/// the standard decoder.
pub fn exhaustive_roundtrip(
    alphabets: &[AlphabetSpec],
    plan: &DigitPlan,
) -> Result<RoundTripReport, Error> {
    exhaustive_roundtrip_with(alphabets, plan, |rx, signal| rx.decode(signal))
}

/// Like [`exhaustive_roundtrip`] with a caller-supplied decoder.
pub fn exhaustive_roundtrip_with<F>(
    alphabets: &[AlphabetSpec],
    plan: &DigitPlan,
    decode: F,
) -> Result<RoundTripReport, Error>
where
    F: Fn(&Receiver, &ReceivedSignal) -> DecodeResult,
{
    let codec = Codec::new(alphabets, plan)?;
    let receiver = codec.receiver();
    let k = alphabets.len();
    let info = codec.information_count();

    let mut rows: Vec<Vec<u64>> = vec![vec![0; info]; k];
    let mut report = RoundTripReport {
        blocks: 0,
        mismatches: 0,
        guard_flags: 0,
        first_mismatch: None,
        mean_power: vec![0.0; k],
        mean_amplitude: vec![0.0; k],
    };
    loop {
        let block = SourceBlock::new(rows.clone(), alphabets, info)?;
        let signals = (0..k)
            .map(|t| codec.modulate(t, &rows[t]))
            .collect::<Result<Vec<_>, _>>()?;
        let decoded = decode(&receiver, &transmit(&signals, 0.0));
        if decoded.estimates != codec.digit_sums(&block)? {
            report.mismatches += 1;
            report.first_mismatch.get_or_insert_with(|| rows.clone());
        }
        if decoded.guard_violation.is_some() {
            report.guard_flags += 1;
        }
        let p: f64 = rows
            .iter()
            .zip(alphabets)
            .flat_map(|(row, a)| row.iter().map(move |&sym| a.pmf()[sym as usize]))
            .product();
        for (t, s) in signals.iter().enumerate() {
            report.mean_power[t] += p * s.x * s.x;
            report.mean_amplitude[t] += p * s.x;
        }
        report.blocks += 1;

        // odometer over all K x R symbols
        let mut carried = true;
        'outer: for (t, row) in rows.iter_mut().enumerate() {
            for sym in row.iter_mut() {
                *sym += 1;
                if (*sym as usize) < alphabets[t].size() {
                    carried = false;
                    break 'outer;
                }
                *sym = 0;
            }
        }
        if carried {
            break;
        }
    }
    Ok(report)
}
