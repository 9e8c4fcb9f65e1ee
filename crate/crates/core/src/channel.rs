//! Synchronised real Gaussian multiple-access channel with unit gains.
//!
//! Randomness is reproducible per trial: [`derive_trial_rng`] keys a ChaCha8
//! generator with a SplitMix64 expansion of the master seed and selects the
//! ChaCha stream by trial index, so trial `i` draws the same numbers no matter
//! which worker runs it or in which order.
//!
//! Gaussian draws use the ziggurat sampler of `rand_distr::StandardNormal`,
//! which consumes 64-bit uniform words and fixed tables and is identical
//! across platforms.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codec::EncodedSignal;

pub type TrialRng = ChaCha8Rng;

const SPLITMIX_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream of trial `trial_index` under `master_seed`.
///
/// The 256-bit ChaCha key is four consecutive SplitMix64 outputs seeded with
/// `master_seed`; the 64-bit stream id is `trial_index`. Distinct
/// `(master_seed, trial_index)` pairs therefore never share a keystream.
pub fn derive_trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index);
    rng
}

/// Noise level of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
}

impl NoiseSpec {
    /// `sigma = eta / sqrt(snr)`; an infinite SNR gives a noiseless channel.
    pub fn from_snr(eta: f64, snr: f64) -> Self {
        Self {
            sigma: eta / snr.sqrt(),
        }
    }

    pub fn snr(&self, eta: f64) -> f64 {
        (eta / self.sigma).powi(2)
    }
}

/// One draw of `N(0, sigma^2)`. Always consumes one standard-normal sample
/// so stream positions do not depend on `sigma`.
pub fn sample_noise<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    if sigma == 0.0 {
        0.0
    } else {
        sigma * n
    }
}

/// Channel output with the superimposed signal kept exact.
///
/// `signal` is `sum_k N_k`, the sum of the transmitters' exact numerators; the
/// real received value is `y = eta * (signal / (K * D_M) - gamma_bar) + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub signal: BigUint,
    pub noise: f64,
}

impl ReceivedSignal {
    /// `y` as a float, given the common denominator `K * D_M`.
    pub fn value(&self, scale: &BigUint, eta: f64, gamma_bar: f64) -> f64 {
        use num_traits::ToPrimitive;
        let b =
            self.signal.to_f64().unwrap_or(f64::INFINITY) / scale.to_f64().unwrap_or(f64::INFINITY);
        eta * (b - gamma_bar) + self.noise
    }
}

/// `y = sum_k x_k + z`, with the signal part summed exactly.
pub fn transmit(inputs: &[EncodedSignal], noise: f64) -> ReceivedSignal {
    ReceivedSignal {
        signal: inputs.iter().map(|s| &s.numerator).sum(),
        noise,
    }
}

/// Float-only superposition `sum_k x_k + z`.
pub fn transmit_real(inputs: &[f64], noise: f64) -> f64 {
    inputs.iter().sum::<f64>() + noise
}
