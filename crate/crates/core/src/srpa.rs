//! Sparse multi-decoder RPA (k-SRPA).
//!
//! A sparse decoder keeps only q randomly chosen projections in each of its
//! t iterations and averages their votes with weight 1/q. Several sparse
//! decoders run on the same input; the final codeword is the most likely
//! candidate, optionally restricted to candidates whose message passes the
//! CRC. Below the top level only most-likely selection is available.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::BudgetReport;
use crate::channel::{hard_decision, LlrVector};
use crate::crc3;
use crate::error::{Error, Result};
use crate::rmcode::{CodewordBits, MessageBits, RmCode};
use crate::rng::{self, StreamRng};
use crate::rpa::{decode_base, max_iterations, vote_round};

/// Per-iteration projection sets of one sparse decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePlan {
    m: u32,
    sets: Vec<Vec<usize>>,
}

impl SparsePlan {
    /// Builds a plan from explicit generator sets (sorted, distinct, nonzero).
    pub fn new(m: u32, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = 1usize << m;
        if sets.is_empty() {
            return Err(Error::Config("plan needs at least one iteration".into()));
        }
        let q = sets[0].len();
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
            if set.len() != q || q == 0 || set.iter().any(|&g| g == 0 || g >= n) {
                return Err(Error::Config(format!(
                    "plan sets must hold {q} distinct nonzero generators below {n}"
                )));
            }
        }
        Ok(Self { m, sets })
    }

    /// Every generator in every one of `t` iterations.
    pub fn full(m: u32, t: usize) -> Self {
        Self {
            m,
            sets: vec![(1..1usize << m).collect(); t],
        }
    }

    pub fn dimension(&self) -> u32 {
        self.m
    }

    pub fn iterations(&self) -> usize {
        self.sets.len()
    }

    pub fn projections(&self) -> usize {
        self.sets[0].len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
}

/// Draws q of the 2^m − 1 generators uniformly without replacement for each
/// of t iterations. Sets are returned sorted.
pub fn sample_plan<R: Rng + ?Sized>(m: u32, q: usize, t: usize, rng: &mut R) -> Result<SparsePlan> {
    let total = (1usize << m) - 1;
    if q == 0 || q > total {
        return Err(Error::Config(format!("q = {q} outside 1..={total}")));
    }
    if t == 0 {
        return Err(Error::Config("t must be at least 1".into()));
    }
    let sets = (0..t)
        .map(|_| {
            let mut set: Vec<usize> = index::sample(rng, total, q).into_iter().map(|i| i + 1).collect();
            set.sort_unstable();
            set
        })
        .collect();
    Ok(SparsePlan { m, sets })
}

/// Decoders, iterations and projections used for the sub-code RM(m−i, r−i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelParams {
    pub decoders: usize,
    pub iterations: usize,
    pub projections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    #[default]
    MostLikely,
    /// CRC-3-GSM screening on the recovered message, then most likely.
    CrcThenMostLikely,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMetric {
    /// Σ (1 − 2ĉ(z))·L(z) of the hard candidate.
    #[default]
    Hard,
    /// Σ L̂(z)·L(z) of the candidate's final soft estimate.
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    /// New plans for every decode call.
    #[default]
    Fresh,
    /// Plans depend only on the master seed, so every call reuses them.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrpaConfig {
    /// Level 0 is the code itself; one entry per level of order ≥ 2.
    pub levels: Vec<LevelParams>,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub metric: CorrelationMetric,
    #[serde(default)]
    pub plan_mode: PlanMode,
    #[serde(default)]
    pub master_seed: u64,
}

/// Default projections at a level of dimension m: one eighth, 2^(m−3).
pub fn default_projections(m: u32) -> usize {
    clamp_q(1usize << m.saturating_sub(3), m)
}

fn clamp_q(q: usize, m: u32) -> usize {
    q.clamp(1, (1usize << m) - 1)
}

/// Decoders used below the top level by default.
pub const DEFAULT_INNER_DECODERS: usize = 4;

impl SrpaConfig {
    /// k-SRPA with the default parameters: ⌊m′/2⌋ iterations and 2^(m′−3)
    /// projections at every level, k decoders on top and
    /// [`DEFAULT_INNER_DECODERS`] below.
    pub fn k_srpa(code: &RmCode, k: usize, crc: bool) -> Self {
        let levels = (0..code.r().saturating_sub(1))
            .map(|i| {
                let m = code.m() - i;
                LevelParams {
                    decoders: if i == 0 { k } else { DEFAULT_INNER_DECODERS },
                    iterations: max_iterations(m),
                    projections: default_projections(m),
                }
            })
            .collect();
        Self {
            levels,
            selection: if crc {
                Selection::CrcThenMostLikely
            } else {
                Selection::MostLikely
            },
            metric: CorrelationMetric::Hard,
            plan_mode: PlanMode::Fresh,
            master_seed: 0,
        }
    }

    /// A single sparse decoder keeping `ratio` of the 2^m′ recursions at every level.
    pub fn sparse_ratio(code: &RmCode, ratio: f64) -> Self {
        let levels = (0..code.r().saturating_sub(1))
            .map(|i| {
                let m = code.m() - i;
                LevelParams {
                    decoders: 1,
                    iterations: max_iterations(m),
                    projections: clamp_q((ratio * (1usize << m) as f64).round() as usize, m),
                }
            })
            .collect();
        Self {
            levels,
            selection: Selection::MostLikely,
            metric: CorrelationMetric::Hard,
            plan_mode: PlanMode::Fresh,
            master_seed: 0,
        }
    }

    /// One decoder using every projection: fixed-iteration RPA with 1/(n−1) votes.
    pub fn full_plan(code: &RmCode) -> Self {
        Self::sparse_ratio(code, 1.0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn k(&self) -> usize {
        self.levels.first().map_or(0, |l| l.decoders)
    }

    pub fn validate(&self, code: &RmCode) -> Result<()> {
        if code.r() < 2 {
            return Err(Error::Unsupported(format!(
                "sparse decoding needs order ≥ 2, got RM({},{})",
                code.m(),
                code.r()
            )));
        }
        if self.levels.len() != code.r() as usize - 1 {
            return Err(Error::Config(format!(
                "RM({},{}) needs {} level entries, got {}",
                code.m(),
                code.r(),
                code.r() - 1,
                self.levels.len()
            )));
        }
        for (i, level) in self.levels.iter().enumerate() {
            let total = (1usize << (code.m() - i as u32)) - 1;
            if level.decoders == 0 {
                return Err(Error::Config(format!("level {i}: decoders must be ≥ 1")));
            }
            if level.iterations == 0 {
                return Err(Error::Config(format!("level {i}: iterations must be ≥ 1")));
            }
            if level.projections == 0 || level.projections > total {
                return Err(Error::Config(format!(
                    "level {i}: projections must lie in 1..={total}"
                )));
            }
        }
        if self.selection == Selection::CrcThenMostLikely && code.k() < crc3::WIDTH {
            return Err(Error::Config("code too small to carry a CRC".into()));
        }
        Ok(())
    }
}

/// Message with the CRC in its last three positions: payload ∥ CRC-3.
pub fn crc_message(payload: &[u8]) -> MessageBits {
    MessageBits(crc3::crc_append(payload))
}

/// Whether a candidate codeword carries a CRC-valid message. Vectors that
/// are not codewords fail.
pub fn passes_crc(code: &RmCode, cw: &CodewordBits) -> bool {
    code.recover_message(cw)
        .ok()
        .and_then(|u| crc3::crc_check(&u.0).ok())
        .unwrap_or(false)
}

/// One candidate produced by a sparse decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub codeword: Vec<u8>,
    pub estimate: Vec<f64>,
}

fn correlation(metric: CorrelationMetric, cand: &Candidate, llr: &[f64]) -> f64 {
    match metric {
        CorrelationMetric::Hard => cand
            .codeword
            .iter()
            .zip(llr)
            .map(|(&b, l)| if b == 0 { *l } else { -*l })
            .sum(),
        CorrelationMetric::Soft => cand.estimate.iter().zip(llr).map(|(a, b)| a * b).sum(),
    }
}

/// Index of the best candidate among `allowed`; ties go to the lowest index.
fn most_likely(
    candidates: &[Candidate],
    llr: &[f64],
    metric: CorrelationMetric,
    allowed: impl Fn(usize) -> bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate().filter(|(i, _)| allowed(*i)) {
        let score = correlation(metric, c, llr);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Selects among top-level candidates according to `cfg.selection`.
pub fn select_candidate(
    code: &RmCode,
    candidates: &[Candidate],
    llr: &[f64],
    cfg: &SrpaConfig,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidates to select from".into()));
    }
    let chosen = match cfg.selection {
        Selection::MostLikely => most_likely(candidates, llr, cfg.metric, |_| true),
        Selection::CrcThenMostLikely => {
            let valid: Vec<bool> = candidates
                .iter()
                .map(|c| passes_crc(code, &CodewordBits(c.codeword.clone())))
                .collect();
            most_likely(candidates, llr, cfg.metric, |i| valid[i])
                .or_else(|| most_likely(candidates, llr, cfg.metric, |_| true))
        }
    };
    Ok(chosen.expect("candidates are non-empty"))
}

fn single_level(
    llr: &[f64],
    r: u32,
    level: usize,
    plan: &SparsePlan,
    cfg: &SrpaConfig,
    rng: &mut StreamRng,
    budget: &mut BudgetReport,
) -> Result<Candidate> {
    let m = plan.m;
    let mut current = llr.to_vec();
    let mut next = vec![0.0; llr.len()];
    for set in &plan.sets {
        let votes = vote_round(&current, m, set.iter().copied(), &mut next, budget, |proj, budget| {
            if r == 2 {
                decode_base(proj, budget)
            } else {
                inner_multi(proj, m - 1, r - 1, level + 1, cfg, rng, budget)
            }
        })?;
        let scale = 1.0 / votes as f64;
        next.iter_mut().for_each(|v| *v *= scale);
        std::mem::swap(&mut current, &mut next);
    }
    Ok(Candidate {
        codeword: hard_decision(&current),
        estimate: current,
    })
}

/// Level ≥ 1: d sparse decoders with fresh plans, most-likely selection.
fn inner_multi(
    llr: &[f64],
    m: u32,
    r: u32,
    level: usize,
    cfg: &SrpaConfig,
    rng: &mut StreamRng,
    budget: &mut BudgetReport,
) -> Result<Vec<u8>> {
    let params = cfg.levels[level];
    let mut candidates = Vec::with_capacity(params.decoders);
    for _ in 0..params.decoders {
        let plan = sample_plan(m, params.projections, params.iterations, rng)?;
        candidates.push(single_level(llr, r, level, &plan, cfg, rng, budget)?);
    }
    let best = most_likely(&candidates, llr, cfg.metric, |_| true).expect("at least one decoder");
    Ok(candidates.swap_remove(best).codeword)
}

/// Runs one sparse decoder with an explicit top-level plan. Inner levels
/// draw their plans from `rng`.
pub fn srpa_single_decode(
    code: &RmCode,
    llr: &LlrVector,
    plan: &SparsePlan,
    cfg: &SrpaConfig,
    rng: &mut StreamRng,
    budget: &mut BudgetReport,
) -> Result<Candidate> {
    cfg.validate(code)?;
    if llr.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: llr.len(),
        });
    }
    if plan.m != code.m() {
        return Err(Error::Config(format!(
            "plan dimension {} does not match code dimension {}",
            plan.m,
            code.m()
        )));
    }
    single_level(&llr.0, code.r(), 0, plan, cfg, rng, budget)
}

/// Outcome of a k-SRPA decode.
#[derive(Debug, Clone, PartialEq)]
pub struct SrpaOutcome {
    pub codeword: CodewordBits,
    pub chosen: usize,
    pub candidates: Vec<Candidate>,
}

/// RNG stream of top-level decoder `j`. In [`PlanMode::Frozen`] the trial
/// index is ignored.
pub fn decoder_stream(cfg: &SrpaConfig, trial: u64, j: usize) -> StreamRng {
    match cfg.plan_mode {
        PlanMode::Fresh => rng::stream(cfg.master_seed, &[rng::LABEL_PLAN, trial, j as u64]),
        PlanMode::Frozen => rng::stream(cfg.master_seed, &[rng::LABEL_PLAN, u64::MAX, j as u64]),
    }
}

/// k independent sparse decoders followed by candidate selection.
///
/// Deterministic in (`cfg.master_seed`, `trial`). Decoder j always uses the
/// same stream, so the first k decoders of a k′-SRPA (k′ > k) reproduce the
/// k-SRPA candidates exactly.
pub fn srpa_multi_decode(
    code: &RmCode,
    llr: &LlrVector,
    cfg: &SrpaConfig,
    trial: u64,
    budget: &mut BudgetReport,
) -> Result<SrpaOutcome> {
    cfg.validate(code)?;
    if llr.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: llr.len(),
        });
    }
    let top = cfg.levels[0];
    let results: Vec<Result<(Candidate, BudgetReport)>> = (0..top.decoders)
        .into_par_iter()
        .map(|j| {
            let mut rng = decoder_stream(cfg, trial, j);
            let mut local = BudgetReport::new();
            let plan = sample_plan(code.m(), top.projections, top.iterations, &mut rng)?;
            let cand = single_level(&llr.0, code.r(), 0, &plan, cfg, &mut rng, &mut local)?;
            Ok((cand, local))
        })
        .collect();
    let mut candidates = Vec::with_capacity(results.len());
    for res in results {
        let (cand, local) = res?;
        *budget += local;
        candidates.push(cand);
    }
    let chosen = select_candidate(code, &candidates, &llr.0, cfg)?;
    Ok(SrpaOutcome {
        codeword: CodewordBits(candidates[chosen].codeword.clone()),
        chosen,
        candidates,
    })
}

/// Which decoder a budget prediction is for.
#[derive(Debug, Clone, Copy)]
pub enum BudgetTarget<'a> {
    /// RPA with no early stopping.
    FullRpa,
    Sparse(&'a SrpaConfig),
}

/// Closed-form operation counts.
///
/// With per-level products P_l = Π_{i≤l} d_i·t_i·q_i: FHTs = P_last and
/// projections = aggregations = Σ_l P_l. Full RPA uses d_i = 1,
/// q_i = 2^(m−i) − 1, t_i = ⌊(m−i)/2⌋.
pub fn budget_formula(code: &RmCode, target: BudgetTarget<'_>) -> Result<BudgetReport> {
    if !(2..=3).contains(&code.r()) {
        return Err(Error::Unsupported(format!(
            "budget formula covers orders 2 and 3, got {}",
            code.r()
        )));
    }
    let levels: Vec<LevelParams> = match target {
        BudgetTarget::FullRpa => (0..code.r() - 1)
            .map(|i| {
                let m = code.m() - i;
                LevelParams {
                    decoders: 1,
                    iterations: max_iterations(m),
                    projections: (1usize << m) - 1,
                }
            })
            .collect(),
        BudgetTarget::Sparse(cfg) => {
            cfg.validate(code)?;
            cfg.levels.clone()
        }
    };
    let mut product = 1u64;
    let mut projections = 0u64;
    for l in &levels {
        product *= (l.decoders * l.iterations * l.projections) as u64;
        projections += product;
    }
    Ok(BudgetReport {
        fht_calls: product,
        projections,
        aggregations: projections,
    })
}
