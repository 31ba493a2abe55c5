//! CRC-3-GSM, generator x³ + x + 1.
//!
//! Bit strings are read MSB-first (the first bit is the highest-degree
//! coefficient). The register starts at zero; no reflection, no final XOR.

use crate::error::{Error, Result};

/// Generator polynomial without the implicit x³ term.
const POLY_LOW: u8 = 0b011;

pub const WIDTH: usize = 3;

/// Generator x³ + x + 1 as coefficient bits, highest degree first.
pub const GENERATOR: [u8; 4] = [1, 0, 1, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CrcSpec;

impl CrcSpec {
    pub fn width(&self) -> usize {
        WIDTH
    }

    pub fn append(&self, payload: &[u8]) -> Vec<u8> {
        crc_append(payload)
    }

    pub fn check(&self, frame: &[u8]) -> Result<bool> {
        crc_check(frame)
    }
}

/// Remainder of payload(x)·x³ mod g(x), MSB first.
pub fn crc_remainder(payload: &[u8]) -> [u8; 3] {
    let mut reg = 0u8;
    for &bit in payload {
        let feedback = ((reg >> 2) & 1) ^ (bit & 1);
        reg = (reg << 1) & 0b111;
        if feedback == 1 {
            reg ^= POLY_LOW;
        }
    }
    [(reg >> 2) & 1, (reg >> 1) & 1, reg & 1]
}

pub fn crc_append(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + WIDTH);
    out.extend_from_slice(payload);
    out.extend_from_slice(&crc_remainder(payload));
    out
}

/// True iff frame(x) is divisible by x³ + x + 1.
pub fn crc_check(frame: &[u8]) -> Result<bool> {
    if frame.len() < WIDTH {
        return Err(Error::FrameTooShort(frame.len()));
    }
    // Plain division of the frame polynomial (no augmentation).
    let mut reg = 0u8;
    for &bit in frame {
        reg = (reg << 1) | (bit & 1);
        if reg & 0b1000 != 0 {
            reg ^= 0b1011;
        }
    }
    Ok(reg == 0)
}
