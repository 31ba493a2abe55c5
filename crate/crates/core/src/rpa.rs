//! Recursive projection aggregation.
//!
//! A received LLR vector of RM(m, r) is projected onto the cosets of every
//! one-dimensional subspace, each projection is decoded as an RM(m−1, r−1)
//! word, and the decoded projections vote on a new estimate of every
//! coordinate. The recursion bottoms out at first-order codes, which are
//! decoded exactly with the fast Hadamard transform.

use crate::bitspace::{CosetTable, Subspace1D};
use crate::budget::BudgetReport;
use crate::channel::{hard_decision, LlrVector};
use crate::error::{Error, Result};
use crate::fhtdec::FhtWorkspace;
use crate::rmcode::{CodewordBits, RmCode};

/// LLR of the XOR of two independent bits, ln((1 + e^{a+b}) / (e^a + e^b)).
///
/// Evaluated as sign(a)·sign(b)·min(|a|,|b|) plus two correction terms so
/// that nothing is exponentiated with a positive argument.
#[inline]
pub fn box_plus(a: f64, b: f64) -> f64 {
    let core = a.abs().min(b.abs());
    let signed = if (a < 0.0) != (b < 0.0) { -core } else { core };
    signed + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Direct evaluation of ln(e^{a+b} + 1) − ln(e^a + e^b). Overflows for large
/// inputs; kept as a reference for [`box_plus`].
pub fn box_plus_literal(a: f64, b: f64) -> f64 {
    ((a + b).exp() + 1.0).ln() - (a.exp() + b.exp()).ln()
}

/// Coset-ordered XOR of the two members of each coset.
pub fn project_hard(y: &CodewordBits, b: Subspace1D) -> Result<CodewordBits> {
    check_len(y.len(), b)?;
    let table = b.coset_table();
    Ok(CodewordBits(
        table.pairs().map(|(z, w)| y.0[z] ^ y.0[w]).collect(),
    ))
}

/// Coset-ordered box-plus of the two members of each coset.
pub fn project_soft(llr: &LlrVector, b: Subspace1D) -> Result<LlrVector> {
    check_len(llr.len(), b)?;
    let mut out = vec![0.0; llr.len() / 2];
    project_soft_into(&llr.0, &b.coset_table(), &mut out);
    Ok(LlrVector(out))
}

fn check_len(len: usize, b: Subspace1D) -> Result<()> {
    let n = 1usize << b.dimension();
    if len != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: len,
        });
    }
    Ok(())
}

#[inline]
fn project_soft_into(llr: &[f64], table: &CosetTable, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let (z, w) = table.pair(j);
        *o = box_plus(llr[z], llr[w]);
    }
}

/// Adds one decoded projection's votes: acc(z) += (1 − 2ŷ([z])) · L(z ⊕ g).
#[inline]
fn add_votes(acc: &mut [f64], llr: &[f64], table: &CosetTable, decoded: &[u8]) {
    for (j, &bit) in decoded.iter().enumerate() {
        let (z, w) = table.pair(j);
        if bit == 0 {
            acc[z] += llr[w];
            acc[w] += llr[z];
        } else {
            acc[z] -= llr[w];
            acc[w] -= llr[z];
        }
    }
}

/// Scale applied to the vote sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// 1/n with n − 1 votes, as in the full-RPA voting rule.
    #[default]
    BlockLength,
    /// 1/q for q votes, as in the sparse voting rule.
    VoteCount,
}

impl Normalization {
    fn scale(self, n: usize, votes: usize) -> f64 {
        match self {
            Normalization::BlockLength => 1.0 / n as f64,
            Normalization::VoteCount => 1.0 / votes as f64,
        }
    }
}

/// Aggregates decoded projections into a new LLR estimate.
pub fn aggregate(
    llr: &LlrVector,
    votes: &[(Subspace1D, CodewordBits)],
    normalization: Normalization,
) -> Result<LlrVector> {
    if votes.is_empty() {
        return Err(Error::EmptyVotes);
    }
    let n = llr.len();
    let mut acc = vec![0.0; n];
    for (b, decoded) in votes {
        check_len(n, *b)?;
        if decoded.len() != n / 2 {
            return Err(Error::LengthMismatch {
                expected: n / 2,
                actual: decoded.len(),
            });
        }
        add_votes(&mut acc, &llr.0, &b.coset_table(), &decoded.0);
    }
    let scale = normalization.scale(n, votes.len());
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(LlrVector(acc))
}

/// Iteration cap ⌊m/2⌋ at a level of dimension m (at least one).
pub fn max_iterations(m: u32) -> usize {
    (m as usize / 2).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RpaConfig {
    /// Stop once every entry moves by at most this much in one iteration.
    pub epsilon: f64,
    /// When false, every level runs the full ⌊m/2⌋ iterations.
    pub early_stop: bool,
    pub normalization: Normalization,
}

impl Default for RpaConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            early_stop: true,
            normalization: Normalization::BlockLength,
        }
    }
}

impl RpaConfig {
    /// Fixed ⌊m/2⌋ iterations everywhere ("full rounds").
    pub fn full_rounds() -> Self {
        Self {
            early_stop: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Result of one decode with its final soft estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RpaOutcome {
    pub codeword: CodewordBits,
    pub llr: LlrVector,
    /// Iterations run at the top level.
    pub iterations: usize,
}

/// Runs one voting round at a level: for each generator, project the
/// current estimate, decode the projection with `decode_sub`, and add its
/// votes. Returns the unscaled vote sum.
pub(crate) fn vote_round<I, F>(
    current: &[f64],
    m: u32,
    generators: I,
    acc: &mut [f64],
    budget: &mut BudgetReport,
    mut decode_sub: F,
) -> Result<usize>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(&[f64], &mut BudgetReport) -> Result<Vec<u8>>,
{
    acc.fill(0.0);
    let mut proj = vec![0.0; current.len() / 2];
    let mut votes = 0;
    for g in generators {
        let table = CosetTable::new(Subspace1D::new(g, m)?);
        project_soft_into(current, &table, &mut proj);
        budget.projections += 1;
        let decoded = decode_sub(&proj, budget)?;
        add_votes(acc, current, &table, &decoded);
        budget.aggregations += 1;
        votes += 1;
    }
    Ok(votes)
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// First-order base case shared by every decoder.
pub(crate) fn decode_base(llr: &[f64], budget: &mut BudgetReport) -> Result<Vec<u8>> {
    let mut out = vec![0u8; llr.len()];
    FhtWorkspace::new(llr.len()).decode_into(llr, &mut out)?;
    budget.fht_calls += 1;
    Ok(out)
}

fn decode_level(
    llr: &[f64],
    m: u32,
    r: u32,
    cfg: &RpaConfig,
    budget: &mut BudgetReport,
) -> Result<(Vec<f64>, usize)> {
    let n = llr.len();
    let mut current = llr.to_vec();
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    for _ in 0..max_iterations(m) {
        let votes = vote_round(&current, m, 1..n, &mut next, budget, |proj, budget| {
            if r == 2 {
                decode_base(proj, budget)
            } else {
                let (sub, _) = decode_level(proj, m - 1, r - 1, cfg, budget)?;
                Ok(hard_decision(&sub))
            }
        })?;
        let scale = cfg.normalization.scale(n, votes);
        next.iter_mut().for_each(|v| *v *= scale);
        iterations += 1;
        let converged = cfg.early_stop && max_abs_diff(&current, &next) <= cfg.epsilon;
        std::mem::swap(&mut current, &mut next);
        if converged {
            break;
        }
    }
    Ok((current, iterations))
}

/// Full RPA decoder for RM(m, r), r ≥ 1.
pub fn rpa_decode_detailed(
    code: &RmCode,
    llr: &LlrVector,
    cfg: &RpaConfig,
    budget: &mut BudgetReport,
) -> Result<RpaOutcome> {
    cfg.validate()?;
    if llr.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: llr.len(),
        });
    }
    match code.r() {
        0 => Err(Error::Unsupported(
            "RPA needs order ≥ 1; repetition codes are not decoded recursively".into(),
        )),
        1 => Ok(RpaOutcome {
            codeword: CodewordBits(decode_base(&llr.0, budget)?),
            llr: llr.clone(),
            iterations: 0,
        }),
        r => {
            let (est, iterations) = decode_level(&llr.0, code.m(), r, cfg, budget)?;
            Ok(RpaOutcome {
                codeword: CodewordBits(hard_decision(&est)),
                llr: LlrVector(est),
                iterations,
            })
        }
    }
}

pub fn rpa_decode(
    code: &RmCode,
    llr: &LlrVector,
    cfg: &RpaConfig,
    budget: &mut BudgetReport,
) -> Result<CodewordBits> {
    rpa_decode_detailed(code, llr, cfg, budget).map(|o| o.codeword)
}
