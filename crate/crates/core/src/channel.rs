//! Binary-input channels and their LLR outputs.
//!
//! LLRs follow ln(W(x|0)/W(x|1)), so positive values favour bit 0. Every
//! entry is clamped to ±[`LLR_CLAMP`].

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rmcode::CodewordBits;

pub const LLR_CLAMP: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Bit 1 iff the LLR is negative; zero maps to bit 0.
    pub fn hard_decision(&self) -> CodewordBits {
        CodewordBits(hard_decision(&self.0))
    }

    /// Clamped LLRs of a noiseless transmission of `cw`.
    pub fn noiseless(cw: &CodewordBits) -> Self {
        Self(
            cw.0.iter()
                .map(|&b| if b == 0 { LLR_CLAMP } else { -LLR_CLAMP })
                .collect(),
        )
    }
}

pub fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| (l < 0.0) as u8).collect()
}

#[inline]
pub fn clamp_llr(l: f64) -> f64 {
    l.clamp(-LLR_CLAMP, LLR_CLAMP)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelParams {
    /// BPSK (0 → +1, 1 → −1) with additive Gaussian noise of std `sigma`.
    AwgnBpsk { sigma: f64 },
    /// Binary symmetric channel with crossover probability `p`.
    Bsc { p: f64 },
    /// Error-free channel reporting clamped LLRs (the σ → 0 limit).
    Noiseless,
}

impl ChannelParams {
    pub fn awgn(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidChannel(format!("sigma = {sigma}")));
        }
        Ok(Self::AwgnBpsk { sigma })
    }

    /// `p = 0.5` is accepted and yields all-zero LLRs.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(Error::InvalidChannel(format!("crossover p = {p}")));
        }
        Ok(Self::Bsc { p })
    }

    /// Hard-decision BPSK at the given Eb/N0: p = Q(1/σ).
    pub fn bsc_from_ebn0(ebn0_db: f64, rate: f64) -> Result<Self> {
        let sigma = ebn0_to_sigma(ebn0_db, rate)?;
        Self::bsc(q_function(1.0 / sigma).max(f64::MIN_POSITIVE))
    }
}

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// σ = sqrt(1 / (2 · rate · 10^(Eb/N0 / 10))) for unit-energy BPSK.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidChannel(format!("rate = {rate}")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// LLR of one AWGN observation `y`: 2y/σ².
pub fn awgn_llr(y: f64, sigma: f64) -> f64 {
    clamp_llr(2.0 * y / (sigma * sigma))
}

/// LLR of one BSC output bit.
pub fn bsc_llr(received: u8, p: f64) -> f64 {
    let mag = ((1.0 - p) / p).ln();
    clamp_llr(if received == 0 { mag } else { -mag })
}

pub fn transmit<R: Rng + ?Sized>(cw: &CodewordBits, ch: &ChannelParams, rng: &mut R) -> LlrVector {
    match *ch {
        ChannelParams::AwgnBpsk { sigma } => LlrVector(
            cw.0.iter()
                .map(|&b| {
                    let s = 1.0 - 2.0 * b as f64;
                    let noise: f64 = rng.sample(StandardNormal);
                    awgn_llr(s + sigma * noise, sigma)
                })
                .collect(),
        ),
        ChannelParams::Bsc { p } => LlrVector(
            cw.0.iter()
                .map(|&b| {
                    let flip = rng.random_bool(p) as u8;
                    bsc_llr(b ^ flip, p)
                })
                .collect(),
        ),
        ChannelParams::Noiseless => LlrVector::noiseless(cw),
    }
}
