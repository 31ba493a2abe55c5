//! Reed-Muller codes RM(m, r) built from monomial evaluations.
//!
//! Generator rows are the evaluation vectors v_m(A) of the monomials
//! Π_{i∈A} Z_i with |A| ≤ r, ordered by degree and then lexicographically
//! on A. That order is also the message-bit layout.

use crate::bitspace::MAX_DIMENSION;
use crate::error::{Error, Result};

/// Hard bits indexed by [`crate::bitspace::IndexPoint`]; each entry is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodewordBits(pub Vec<u8>);

/// Information bits in canonical monomial order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MessageBits(pub Vec<u8>);

impl CodewordBits {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

impl MessageBits {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

type BitRow = Vec<u64>;

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
fn get(row: &[u64], i: usize) -> bool {
    (row[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
fn set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[derive(Debug, Clone)]
pub struct RmCode {
    m: u32,
    r: u32,
    /// Monomial supports A (1-based variable indices, ascending).
    monomials: Vec<Vec<u32>>,
    rows: Vec<BitRow>,
    info_set: Vec<usize>,
    /// Row i is the message contribution of codeword bit `info_set[i]`.
    info_inverse: Vec<BitRow>,
}

/// Σ_{i≤r} C(m, i).
pub fn dimension(m: u32, r: u32) -> usize {
    let mut binom = 1usize;
    let mut total = 0usize;
    for i in 0..=r.min(m) as usize {
        total += binom;
        binom = binom * (m as usize - i) / (i + 1);
    }
    total
}

fn subsets_of_size(m: u32, size: u32) -> Vec<Vec<u32>> {
    fn go(start: u32, m: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=m {
            if m - i + 1 < left {
                break;
            }
            cur.push(i);
            go(i + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, m, size, &mut Vec::new(), &mut out);
    out
}

fn support_mask(a: &[u32]) -> usize {
    a.iter().fold(0, |acc, &i| acc | 1 << (i - 1))
}

impl RmCode {
    pub fn new(m: u32, r: u32) -> Result<Self> {
        if m > MAX_DIMENSION || r > m {
            return Err(Error::InvalidCode { m, r });
        }
        let n = 1usize << m;
        let monomials: Vec<Vec<u32>> = (0..=r).flat_map(|d| subsets_of_size(m, d)).collect();
        let rows: Vec<BitRow> = monomials
            .iter()
            .map(|a| {
                let mask = support_mask(a);
                let mut row = vec![0u64; words(n)];
                for z in (0..n).filter(|z| z & mask == mask) {
                    set(&mut row, z);
                }
                row
            })
            .collect();
        let (info_set, info_inverse) = information_set(&rows, n);
        Ok(Self {
            m,
            r,
            monomials,
            rows,
            info_set,
            info_inverse,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Evaluation vector v_m(A) of the i-th monomial.
    pub fn generator_row(&self, i: usize) -> CodewordBits {
        CodewordBits(
            (0..self.n())
                .map(|z| get(&self.rows[i], z) as u8)
                .collect(),
        )
    }

    /// Classical minimum distance 2^(m−r).
    pub fn min_distance(&self) -> usize {
        1 << (self.m - self.r)
    }

    pub fn encode(&self, msg: &MessageBits) -> Result<CodewordBits> {
        if msg.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                actual: msg.len(),
            });
        }
        let mut acc = vec![0u64; words(self.n())];
        for (row, _) in self.rows.iter().zip(&msg.0).filter(|(_, &b)| b != 0) {
            xor_into(&mut acc, row);
        }
        Ok(CodewordBits(
            (0..self.n()).map(|z| get(&acc, z) as u8).collect(),
        ))
    }

    /// Inverts [`RmCode::encode`]; fails if `cw` is not a codeword.
    pub fn recover_message(&self, cw: &CodewordBits) -> Result<MessageBits> {
        if cw.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: cw.len(),
            });
        }
        let mut acc = vec![0u64; words(self.k())];
        for (&col, inv_row) in self.info_set.iter().zip(&self.info_inverse) {
            if cw.0[col] != 0 {
                xor_into(&mut acc, inv_row);
            }
        }
        let msg = MessageBits((0..self.k()).map(|j| get(&acc, j) as u8).collect());
        if self.encode(&msg)? != *cw {
            return Err(Error::NotACodeword);
        }
        Ok(msg)
    }

    pub fn is_codeword(&self, cw: &CodewordBits) -> bool {
        self.recover_message(cw).is_ok()
    }
}

/// Picks k pivot columns of the generator matrix and inverts the k×k
/// submatrix on them.
fn information_set(rows: &[BitRow], n: usize) -> (Vec<usize>, Vec<BitRow>) {
    let k = rows.len();
    let mut work: Vec<BitRow> = rows.to_vec();
    let mut pivots = Vec::with_capacity(k);
    let mut rank = 0;
    for col in 0..n {
        if rank == k {
            break;
        }
        let Some(p) = (rank..k).find(|&i| get(&work[i], col)) else {
            continue;
        };
        work.swap(rank, p);
        let pivot_row = work[rank].clone();
        for (i, row) in work.iter_mut().enumerate() {
            if i != rank && get(row, col) {
                xor_into(row, &pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    assert_eq!(rank, k, "generator rows must be independent");

    // Gauss-Jordan on [G_I | I] where G_I is k×k.
    let kw = words(k);
    let mut left: Vec<BitRow> = rows
        .iter()
        .map(|row| {
            let mut r = vec![0u64; kw];
            for (j, &col) in pivots.iter().enumerate() {
                if get(row, col) {
                    set(&mut r, j);
                }
            }
            r
        })
        .collect();
    let mut right: Vec<BitRow> = (0..k)
        .map(|i| {
            let mut r = vec![0u64; kw];
            set(&mut r, i);
            r
        })
        .collect();
    for col in 0..k {
        let p = (col..k)
            .find(|&i| get(&left[i], col))
            .expect("information set submatrix is invertible");
        left.swap(col, p);
        right.swap(col, p);
        let (pl, pr) = (left[col].clone(), right[col].clone());
        for i in 0..k {
            if i != col && get(&left[i], col) {
                xor_into(&mut left[i], &pl);
                xor_into(&mut right[i], &pr);
            }
        }
    }
    // right = G_I^{-1}: message u = c_I · G_I^{-1}, so row i of the inverse is
    // the contribution of information position i.
    (pivots, right)
}
