use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rm_rpa::channel::LlrVector;
use rm_rpa::harness::{
    compare_budget, completed_points, emit_results, format_budget_table, read_csv, render_svg,
    run_sweep_skipping, write_config_echo, DecoderSpec, OutputFormat, SimConfig, WORKERS_ENV,
};
use rm_rpa::rmcode::{MessageBits, RmCode};
use rm_rpa::srpa::crc_message;
use rm_rpa::BudgetReport;

#[derive(Parser)]
#[command(name = "rm-rpa", version, about = "RPA / k-SRPA decoding of Reed-Muller codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum DecoderKind {
    Rpa,
    RpaFullRounds,
    Srpa,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message (string of 0/1) into a codeword.
    Encode {
        #[arg(short)]
        m: u32,
        #[arg(short)]
        r: u32,
        /// Message bits in canonical monomial order.
        message: String,
        /// Treat MESSAGE as a payload of k−3 bits and append CRC-3.
        #[arg(long)]
        crc: bool,
    },
    /// Decode an LLR vector read from a file (whitespace or comma separated).
    Decode {
        #[arg(short)]
        m: u32,
        #[arg(short)]
        r: u32,
        llr_file: PathBuf,
        #[arg(long, value_enum, default_value = "rpa")]
        decoder: DecoderKind,
        /// Number of sparse decoders.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        crc: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print FHT/projection counts to stderr.
        #[arg(long)]
        budget: bool,
    },
    /// Run a BLER sweep described by a TOML config.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        max_trials: Option<u64>,
        #[arg(long)]
        min_errors: Option<u64>,
        /// Also write an SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print predicted and measured FHT budgets for full RPA and k-SRPA.
    Budget {
        #[arg(short)]
        m: u32,
        #[arg(short)]
        r: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3.0)]
        ebn0: f64,
        #[arg(long, default_value_t = 4)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Render a results CSV as an SVG BLER plot.
    Plot { input: PathBuf, output: PathBuf },
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("invalid bit {other:?}"),
        })
        .collect()
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Encode { m, r, message, crc } => {
            let code = RmCode::new(m, r)?;
            let bits = parse_bits(&message)?;
            let msg = if crc { crc_message(&bits) } else { MessageBits(bits) };
            let cw = code.encode(&msg)?;
            println!("{}", bits_to_string(&cw.0));
        }
        Command::Decode {
            m,
            r,
            llr_file,
            decoder,
            k,
            crc,
            seed,
            budget,
        } => {
            let code = RmCode::new(m, r)?;
            let text = std::fs::read_to_string(&llr_file)
                .with_context(|| format!("reading {}", llr_file.display()))?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().with_context(|| format!("bad LLR {s:?}")))
                .collect::<Result<Vec<f64>>>()?;
            let llr = LlrVector(values.into_iter().map(rm_rpa::channel::clamp_llr).collect());
            let spec = match decoder {
                DecoderKind::Rpa => DecoderSpec::rpa(),
                DecoderKind::RpaFullRounds => DecoderSpec::rpa_full_rounds(),
                DecoderKind::Srpa => DecoderSpec::srpa(k, crc),
            };
            let mut report = BudgetReport::new();
            let cw = spec.resolve(&code, seed)?.decode(&code, &llr, 0, &mut report)?;
            println!("{}", bits_to_string(&cw.0));
            if budget {
                eprintln!(
                    "fht_calls={} projections={} aggregations={}",
                    report.fht_calls, report.projections, report.aggregations
                );
            }
        }
        Command::Simulate {
            config,
            seed,
            workers,
            output,
            max_trials,
            min_errors,
            svg,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = SimConfig::from_toml(&text)?;
            cfg.run.seed = Some(seed);
            if workers.is_some() {
                cfg.run.workers = workers;
            }
            if output.is_some() {
                cfg.run.output = output;
            }
            if let Some(t) = max_trials {
                cfg.run.max_trials = t;
            }
            if let Some(e) = min_errors {
                cfg.run.min_block_errors = e;
            }
            cfg.validate()?;
            let out = cfg
                .run
                .output
                .clone()
                .context("no output path (set run.output or --output)")?;
            let existing = if out.exists() { read_csv(&out)? } else { Vec::new() };
            let done = completed_points(&cfg, &existing);
            let res = run_sweep_skipping(&cfg, &done)?;
            for p in &res.points {
                let (lo, hi) = p.ci95();
                eprintln!(
                    "{:<20} {:>6.2} dB  {:>8}/{:<8} bler={:.3e} [{:.3e}, {:.3e}] fht={:.1} ({:.1?})",
                    p.decoder,
                    p.ebn0_db,
                    p.block_errors,
                    p.trials,
                    p.bler(),
                    lo,
                    hi,
                    p.mean_fht(),
                    p.wall_time
                );
            }
            if !res.points.is_empty() {
                emit_results(&res, OutputFormat::Csv, &out)
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            write_config_echo(&cfg, &out)?;
            if let Some(svg) = svg {
                std::fs::write(&svg, render_svg(&read_csv(&out)?))
                    .with_context(|| format!("writing {}", svg.display()))?;
            }
        }
        Command::Budget {
            m,
            r,
            k,
            ebn0,
            trials,
            seed,
        } => {
            let code = RmCode::new(m, r)?;
            let decoders = [DecoderSpec::rpa_full_rounds(), DecoderSpec::rpa(), DecoderSpec::srpa(k, true)];
            let rows = compare_budget(&code, &decoders, ebn0, trials, seed)?;
            print!("{}", format_budget_table(&code, &rows));
        }
        Command::Plot { input, output } => {
            let rows = read_csv(&input)?;
            if rows.is_empty() {
                bail!("{} has no data rows", input.display());
            }
            std::fs::write(&output, render_svg(&rows))
                .with_context(|| format!("writing {}", output.display()))?;
        }
    }
    Ok(())
}
