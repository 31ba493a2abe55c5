//! Fast Hadamard transform and ML decoding of first-order RM codes.

use crate::channel::LlrVector;
use crate::error::{Error, Result};
use crate::rmcode::{CodewordBits, RmCode};

/// In-place unnormalised Walsh–Hadamard transform:
/// out[w] = Σ_z (−1)^{⟨w,z⟩} v[z].
pub fn fht_in_place(v: &mut [f64]) -> Result<()> {
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn fht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fht_in_place(&mut out)?;
    Ok(out)
}

/// Scratch buffer reused across first-order decodes.
#[derive(Debug, Default, Clone)]
pub struct FhtWorkspace {
    scratch: Vec<f64>,
}

impl FhtWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            scratch: Vec::with_capacity(n),
        }
    }

    /// ML first-order decode of `llr` into `out`.
    ///
    /// The winner is the transform index with the largest magnitude; ties go
    /// to the smallest index and a zero coefficient is read as non-complemented.
    pub fn decode_into(&mut self, llr: &[f64], out: &mut [u8]) -> Result<()> {
        if out.len() != llr.len() {
            return Err(Error::LengthMismatch {
                expected: llr.len(),
                actual: out.len(),
            });
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(llr);
        fht_in_place(&mut self.scratch)?;
        let (mut best, mut best_abs) = (0usize, self.scratch[0].abs());
        for (w, &t) in self.scratch.iter().enumerate().skip(1) {
            if t.abs() > best_abs {
                best = w;
                best_abs = t.abs();
            }
        }
        let complement = (self.scratch[best] < 0.0) as u8;
        for (z, bit) in out.iter_mut().enumerate() {
            *bit = ((best & z).count_ones() & 1) as u8 ^ complement;
        }
        Ok(())
    }
}

pub fn decode_first_order(code: &RmCode, llr: &LlrVector) -> Result<CodewordBits> {
    if code.r() != 1 {
        return Err(Error::WrongOrder {
            expected: 1,
            actual: code.r(),
        });
    }
    if llr.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: llr.len(),
        });
    }
    let mut out = vec![0u8; code.n()];
    FhtWorkspace::new(code.n()).decode_into(&llr.0, &mut out)?;
    Ok(CodewordBits(out))
}
