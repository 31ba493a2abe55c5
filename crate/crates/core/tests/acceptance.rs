//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p rm-rpa --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rm_rpa::bitspace::all_subspaces;
use rm_rpa::channel::{ebn0_to_sigma, ChannelParams, LlrVector, LLR_CLAMP};
use rm_rpa::crc3::{crc_append, crc_check};
use rm_rpa::fhtdec::decode_first_order;
use rm_rpa::harness::{savings_percent, wilson_interval, Decoder, DecoderSpec, PointRunner};
use rm_rpa::rmcode::{CodewordBits, MessageBits, RmCode};
use rm_rpa::rpa::{box_plus, box_plus_literal, project_hard, rpa_decode, RpaConfig};
use rm_rpa::srpa::{budget_formula, srpa_multi_decode, BudgetTarget, SrpaConfig};
use rm_rpa::BudgetReport;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn all_messages(k: usize) -> impl Iterator<Item = MessageBits> {
    (0..1u64 << k).map(move |x| MessageBits((0..k).map(|j| ((x >> j) & 1) as u8).collect()))
}

fn pack(bits: &[u8]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

/// 1. Table budget rows: formula and one instrumented decode per decoder.
fn budget_exactness() -> Outcome {
    // (m, r, full rounds, 2-SRPA, savings %)
    let rows = [
        (7, 2, 381u64, 96u64, 75i64),
        (8, 2, 1020, 256, 75),
        (9, 2, 2044, 512, 75),
        (8, 3, 388620, 49152, 87),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (m, r, full, sparse, savings) in rows {
        let code = RmCode::new(m, r).unwrap();
        let cfg = SrpaConfig::k_srpa(&code, 2, true).with_seed(5);
        let f_full = budget_formula(&code, BudgetTarget::FullRpa).unwrap().fht_calls;
        let f_sparse = budget_formula(&code, BudgetTarget::Sparse(&cfg)).unwrap().fht_calls;

        // High-SNR AWGN input (6 dB, code rate).
        let u = MessageBits((0..code.k()).map(|_| rng.random_range(0..2u8)).collect());
        let cw = code.encode(&u).unwrap();
        let sigma = ebn0_to_sigma(6.0, code.k() as f64 / code.n() as f64).unwrap();
        let llr = rm_rpa::channel::transmit(&cw, &ChannelParams::awgn(sigma).unwrap(), &mut rng);
        let mut b_full = BudgetReport::new();
        let d_full = rpa_decode(&code, &llr, &RpaConfig::full_rounds(), &mut b_full).unwrap();
        let mut b_sparse = BudgetReport::new();
        let d_sparse = srpa_multi_decode(&code, &llr, &cfg, 0, &mut b_sparse).unwrap();
        let s = savings_percent(f_sparse as f64, f_full);
        let row_ok = f_full == full
            && f_sparse == sparse
            && b_full.fht_calls == full
            && b_sparse.fht_calls == sparse
            && s == savings;
        ok &= row_ok;
        details.push(format!(
            "RM({m},{r}) full {f_full}/{} sparse {f_sparse}/{} savings {s}% (decoded ok: {}/{})",
            b_full.fht_calls,
            b_sparse.fht_calls,
            d_full == cw,
            d_sparse.codeword == cw
        ));
    }
    check(ok, details.join("; "))
}

fn results_readme() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../results/README.md")
}

/// 2. RM(7,3): the formula gives 72009 / 9216 and the results README records the mismatch.
fn rm73_discrepancy() -> Outcome {
    let code = RmCode::new(7, 3).unwrap();
    let full = budget_formula(&code, BudgetTarget::FullRpa).unwrap().fht_calls;
    let cfg = SrpaConfig::k_srpa(&code, 2, true);
    let sparse = budget_formula(&code, BudgetTarget::Sparse(&cfg)).unwrap().fht_calls;
    let text = std::fs::read_to_string(results_readme()).unwrap_or_default();
    let documented = ["72009", "9216", "73728", "13824"].iter().all(|s| text.contains(s));
    check(
        full == 72009 && sparse == 9216 && documented,
        format!("formula {full}/{sparse}; README documents mismatch: {documented}"),
    )
}

/// 3. Hard projections of every codeword land in the reduced code (m ≤ 5, r ≤ 3).
fn projection_closure() -> Outcome {
    let mut checked = 0u64;
    for m in 1..=5u32 {
        for r in 1..=3u32.min(m) {
            let code = RmCode::new(m, r).unwrap();
            let sub = RmCode::new(m - 1, r - 1).unwrap();
            // Membership table of the reduced code, built from its encoder.
            let mut member = vec![false; 1 << sub.n()];
            for u in all_messages(sub.k()) {
                member[pack(&sub.encode(&u).unwrap().0) as usize] = true;
            }
            let subspaces = all_subspaces(m).unwrap();
            if code.k() <= 16 {
                for u in all_messages(code.k()) {
                    let cw = code.encode(&u).unwrap();
                    for &b in &subspaces {
                        let p = project_hard(&cw, b).unwrap();
                        if !member[pack(&p.0) as usize] {
                            return Err(format!("RM({m},{r}) generator {}", b.generator()));
                        }
                        checked += 1;
                    }
                }
            } else {
                // Gray-code walk over all 2^k codewords; projections are
                // updated by XOR with the projected generator rows.
                let proj_rows: Vec<Vec<u64>> = (0..code.k())
                    .map(|i| {
                        let row = code.generator_row(i);
                        subspaces
                            .iter()
                            .map(|&b| pack(&project_hard(&row, b).unwrap().0))
                            .collect()
                    })
                    .collect();
                let mut current = vec![0u64; subspaces.len()];
                for step in 1u64..1 << code.k() {
                    let flip = step.trailing_zeros() as usize;
                    for (c, p) in current.iter_mut().zip(&proj_rows[flip]) {
                        *c ^= p;
                        if !member[*c as usize] {
                            return Err(format!("RM({m},{r}) gray step {step}"));
                        }
                    }
                    checked += subspaces.len() as u64;
                }
            }
        }
    }
    Ok(format!("{checked} (codeword, subspace) pairs"))
}

/// 4. FHT decoding equals brute-force ML for m ≤ 5 whenever the ML codeword is unique.
fn fht_ml_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut compared = 0;
    for m in 1..=5u32 {
        let code = RmCode::new(m, 1).unwrap();
        let words: Vec<CodewordBits> = all_messages(code.k()).map(|u| code.encode(&u).unwrap()).collect();
        for _ in 0..1000 {
            let llr = LlrVector((0..code.n()).map(|_| rng.random_range(-5.0..5.0)).collect());
            let scores: Vec<f64> = words
                .iter()
                .map(|c| c.0.iter().zip(&llr.0).map(|(&b, l)| if b == 0 { *l } else { -*l }).sum())
                .collect();
            let best = scores.iter().cloned().fold(f64::MIN, f64::max);
            let winners: Vec<usize> = (0..words.len()).filter(|&i| scores[i] == best).collect();
            let decoded = decode_first_order(&code, &llr).unwrap();
            if winners.len() == 1 {
                if decoded != words[winners[0]] {
                    return Err(format!("mismatch at m = {m}"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} unique-ML draws matched"))
}

struct Tally {
    trials: u64,
    errors: u64,
}

impl Tally {
    fn bler(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }
    fn ci(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials)
    }
    fn show(&self) -> String {
        let (lo, hi) = self.ci();
        format!("{:.4e} [{:.4e}, {:.4e}] ({}/{})", self.bler(), lo, hi, self.errors, self.trials)
    }
}

fn overlap(a: &Tally, b: &Tally) -> bool {
    let (al, ah) = a.ci();
    let (bl, bh) = b.ci();
    al <= bh && bl <= ah
}

/// BLER of `spec` on AWGN at `ebn0_db`, σ from the code rate k/n.
fn bler(code: &RmCode, spec: &DecoderSpec, ebn0_db: f64, trials: u64, seed: u64) -> Tally {
    let decoder: Decoder = spec.resolve(code, seed).unwrap();
    let sigma = ebn0_to_sigma(ebn0_db, code.k() as f64 / code.n() as f64).unwrap();
    let runner = PointRunner {
        code,
        decoder: &decoder,
        channel: ChannelParams::awgn(sigma).unwrap(),
        seed,
        point: 0,
    };
    let (trials, errors, _) = runner.run(trials, u64::MAX).unwrap();
    Tally { trials, errors }
}

/// 5. RM(4,2) at 3 dB: RPA BLER inside the 95% CI of exhaustive ML BLER.
fn near_ml() -> Outcome {
    let code = RmCode::new(4, 2).unwrap();
    let trials = 10_000;
    let seed = 55;
    let words: Vec<CodewordBits> = all_messages(code.k()).map(|u| code.encode(&u).unwrap()).collect();
    let decoder = DecoderSpec::rpa().resolve(&code, seed).unwrap();
    let sigma = ebn0_to_sigma(3.0, code.k() as f64 / code.n() as f64).unwrap();
    let runner = PointRunner {
        code: &code,
        decoder: &decoder,
        channel: ChannelParams::awgn(sigma).unwrap(),
        seed,
        point: 0,
    };
    let (mut rpa_err, mut ml_err) = (0u64, 0u64);
    for t in 0..trials {
        let cw = code.encode(&runner.message(t)).unwrap();
        let llr = runner.received(&cw, t);
        let ml = words
            .iter()
            .map(|c| {
                let s: f64 = c.0.iter().zip(&llr.0).map(|(&b, l)| if b == 0 { *l } else { -*l }).sum();
                (s, c)
            })
            .fold((f64::MIN, &words[0]), |best, x| if x.0 > best.0 { x } else { best })
            .1;
        ml_err += (*ml != cw) as u64;
        rpa_err += runner.run_trial(t).unwrap().error as u64;
    }
    let rpa = Tally { trials, errors: rpa_err };
    let ml = Tally { trials, errors: ml_err };
    let (lo, hi) = ml.ci();
    check(
        rpa.bler() >= lo && rpa.bler() <= hi,
        format!("RPA {} vs ML {}", rpa.show(), ml.show()),
    )
}

/// 6. RM(7,2) at 2 dB: BLER(full) ≤ BLER(q = n/2) ≤ BLER(q = n/4) unless CIs overlap.
fn sparsity_ordering() -> Outcome {
    let code = RmCode::new(7, 2).unwrap();
    let trials = 10_000;
    let full = bler(&code, &DecoderSpec::rpa(), 2.0, trials, 6);
    let half = bler(&code, &DecoderSpec::sparse(0.5), 2.0, trials, 6);
    let quarter = bler(&code, &DecoderSpec::sparse(0.25), 2.0, trials, 6);
    let first = full.bler() <= half.bler() || overlap(&full, &half);
    let second = half.bler() <= quarter.bler() || overlap(&half, &quarter);
    check(
        first && second,
        format!("full {}; n/2 {}; n/4 {}", full.show(), half.show(), quarter.show()),
    )
}

/// 7. RM(7,2) at 2.5 dB: 2-SRPA+CRC ≤ 2× RPA, 8-SRPA ≤ 2-SRPA within CI.
fn multi_decoder_proximity() -> Outcome {
    let code = RmCode::new(7, 2).unwrap();
    let trials = 30_000;
    let full = bler(&code, &DecoderSpec::rpa(), 2.5, trials, 7);
    let two = bler(&code, &DecoderSpec::srpa(2, true), 2.5, trials, 7);
    let eight = bler(&code, &DecoderSpec::srpa(8, true), 2.5, trials, 7);
    let first = two.bler() <= 2.0 * full.bler();
    let second = eight.bler() <= two.bler() || overlap(&eight, &two);
    check(
        first && second,
        format!("RPA {}; 2-SRPA {}; 8-SRPA {}", full.show(), two.show(), eight.show()),
    )
}

/// 8. CRC-3: all payloads up to 16 bits pass; every single flip and burst ≤ 3 is caught.
fn crc_properties() -> Outcome {
    let mut frames = 0u64;
    for len in 0..=16usize {
        for x in 0..1u32 << len {
            let payload: Vec<u8> = (0..len).map(|i| ((x >> i) & 1) as u8).collect();
            let frame = crc_append(&payload);
            if !crc_check(&frame).unwrap() {
                return Err(format!("payload {x:b} of length {len} fails"));
            }
            for start in 0..frame.len() {
                for pattern in [0b1u8, 0b11, 0b101, 0b111] {
                    let blen = 8 - pattern.leading_zeros() as usize;
                    if start + blen > frame.len() {
                        continue;
                    }
                    let mut bad = frame.clone();
                    for j in 0..blen {
                        bad[start + j] ^= (pattern >> j) & 1;
                    }
                    if crc_check(&bad).unwrap() {
                        return Err(format!("undetected burst {pattern:b} at {start}"));
                    }
                }
            }
            frames += 1;
        }
    }
    Ok(format!("{frames} frames, all flips and bursts ≤ 3 detected"))
}

/// 9. `simulate` output is byte-identical for 1 and 8 workers.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        r#"
[code]
m = 6
r = 2

[channel]
kind = "awgn"
ebn0_db = [1.0, 2.0]

[run]
max_trials = 600
min_block_errors = 40

[[decoders]]
kind = "rpa"

[[decoders]]
kind = "srpa"
k = 2
crc = true

[[decoders]]
kind = "sparse"
ratio = 0.25
"#,
    )
    .unwrap();
    let run = |workers: &str, name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_rm-rpa"))
            .args(["simulate", config.to_str().unwrap(), "--seed", "99", "--workers", workers])
            .arg("--output")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let a = run("1", "a.csv")?;
    let b = run("8", "b.csv")?;
    let c = run("1", "c.csv")?;
    check(
        a == b && a == c && !a.is_empty(),
        format!("{} bytes, identical: {}", a.len(), a == b && a == c),
    )
}

/// 10. Stable box-plus agrees with the literal form and stays finite at the clamp.
fn box_plus_stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..1_000_000 {
        let a = rng.random_range(-30.0..=30.0);
        let b = rng.random_range(-30.0..=30.0);
        worst = worst.max((box_plus(a, b) - box_plus_literal(a, b)).abs());
    }
    let clamp = [LLR_CLAMP, -LLR_CLAMP, 0.0, 1.0, -1.0];
    let finite = clamp
        .iter()
        .all(|&a| clamp.iter().all(|&b| box_plus(a, b).is_finite()));
    check(worst <= 1e-9 && finite, format!("max |Δ| = {worst:.3e}, finite at clamp: {finite}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 budget exactness", budget_exactness),
        ("2 RM(7,3) discrepancy documented", rm73_discrepancy),
        ("3 projection closure", projection_closure),
        ("4 FHT-ML equivalence", fht_ml_equivalence),
        ("5 near-ML on RM(4,2)", near_ml),
        ("6 sparsity ordering on RM(7,2)", sparsity_ordering),
        ("7 multi-decoder proximity on RM(7,2)", multi_decoder_proximity),
        ("8 CRC properties", crc_properties),
        ("9 simulate determinism", determinism),
        ("10 box-plus stability", box_plus_stability),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {name}: {detail} ({:.1?})", start.elapsed());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
