use clap::{Args, Subcommand};
use serde::Serialize;

use egalitarian::argon2m::MemParams;
use egalitarian::costmodel::*;

use crate::util::{emit, usage, CliResult, Table};

#[derive(Subcommand, Debug)]
pub enum CostCommand {
    /// Relative time-area product of running with less memory.
    At(AtArgs),
    /// Expected compression calls of a cheating strategy.
    Calls(CallsArgs),
    /// Smallest number of openings for a tolerated advantage.
    #[command(name = "optimal-l", alias = "optimal-L")]
    OptimalL(OptimalArgs),
    /// Low-memory attack on Itsuku.
    Itsuku(ItsukuArgs),
    /// Inconsistent blocks produced by a parallel fill.
    Parallel(ParallelArgs),
    /// Last-block grinding against a naive scheme and against MTP.
    Grinding(GrindingArgs),
    /// Escape rate of forged blocks under random openings.
    Detection(DetectionArgs),
    /// The tradeoff penalties and the openings table.
    Table,
}

#[derive(Args, Debug)]
pub struct AtArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Args, Debug)]
pub struct CallsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(short = 'L', long = "length", default_value_t = 70)]
    pub length: u32,
    #[arg(short = 'd', long, default_value_t = 10)]
    pub difficulty: u32,
    #[arg(long, default_value_t = 1 << 21)]
    pub blocks: u64,
    /// Search time over fill time.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
}

#[derive(Args, Debug)]
pub struct OptimalArgs {
    /// Search time over fill time; several values give a sweep.
    #[arg(long, num_args = 1.., required = true)]
    pub ratio: Vec<f64>,
    /// Tolerated time-area advantage.
    #[arg(long)]
    pub advantage: f64,
}

#[derive(Args, Debug)]
pub struct ItsukuArgs {
    /// Report the minimising ε.
    #[arg(long)]
    pub minimize: bool,
    /// Evaluate at this ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ParallelArgs {
    /// Core counts.
    #[arg(long, num_args = 1.., default_values_t = [2u64, 4, 8, 16])]
    pub cores: Vec<u64>,
    #[arg(long, default_value_t = 1 << 16)]
    pub blocks: u64,
    #[arg(long, default_value_t = 4)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GrindingArgs {
    #[arg(long, default_value_t = 1 << 10)]
    pub blocks: u64,
    #[arg(short = 'L', long = "length", default_value_t = 16)]
    pub length: u32,
    #[arg(short = 'd', long, default_value_t = 8)]
    pub difficulty: u32,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1000)]
    pub mtp_trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct DetectionArgs {
    #[arg(long, default_value_t = 1 << 10)]
    pub blocks: u64,
    #[arg(long, default_value_t = 4)]
    pub lanes: u32,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(short = 'L', long = "length", default_value_t = 8)]
    pub length: u32,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn fmt(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e7 || x.abs() < 1e-3) {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

pub fn run(cmd: &CostCommand, json: bool, csv: bool) -> CliResult {
    let table = TradeoffTable::published();
    match cmd {
        CostCommand::At(a) => {
            let p = CheatParams { alpha: a.alpha, beta: a.beta, ..CheatParams::honest(1, 0, 0) };
            let v = at_ratio(&p, &table)?;
            emit(json, &serde_json::json!({ "alpha": a.alpha, "beta": a.beta, "at_ratio": v }), || fmt(v));
        }
        CostCommand::Calls(a) => {
            let p = CheatParams {
                alpha: a.alpha,
                epsilon: a.epsilon,
                delta: a.delta,
                beta: a.beta,
                length: a.length,
                difficulty: a.difficulty,
                blocks: a.blocks,
                ratio: a.ratio,
            };
            let r = cheater_calls(&p, &table)?;
            let skew = per_chunk_skew(a.alpha, a.epsilon, a.delta)?;
            let extrapolated = table.interpolate(p.available().min(1.0))?.extrapolated;
            if extrapolated {
                eprintln!("warning: α+ε+δ lies below the smallest tabulated fraction; penalties are extrapolated");
            }
            let mut t = Table::new(&["quantity", "value"]);
            for (k, v) in [
                ("calls_honest", r.calls_honest),
                ("calls_cheater", r.calls_cheater),
                ("at_ratio", r.at_ratio),
                ("gamma", r.gamma),
                ("depth_fill", r.depth_penalty),
                ("depth_search", r.depth_penalty_search),
                ("per_chunk_skew", skew),
            ] {
                t.push(vec![k.into(), fmt(v)]);
            }
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                report: CostReport,
                per_chunk_skew: f64,
                extrapolated: bool,
            }
            emit(json, &Out { report: r, per_chunk_skew: skew, extrapolated }, || t.render(csv));
        }
        CostCommand::OptimalL(a) => {
            let grid = StrategyGrid::new(&table, DEFAULT_BETA);
            let mut t = Table::new(&["ratio", "advantage", "L"]);
            let mut rows = Vec::new();
            for &r in &a.ratio {
                let l = grid.optimal_length(r, a.advantage)?;
                t.push(vec![r.to_string(), a.advantage.to_string(), l.to_string()]);
                rows.push(serde_json::json!({ "ratio": r, "advantage": a.advantage, "length": l }));
            }
            emit(json, &rows, || t.render(csv));
        }
        CostCommand::Itsuku(a) => {
            if let Some(e) = a.epsilon {
                let o = itsuku_overhead(e)?;
                let s = itsuku_search_overhead(e)?;
                emit(json, &serde_json::json!({ "epsilon": e, "overhead": o, "search_overhead": s }), || {
                    format!("ε={e}, overhead≈{o:.1}, search overhead {s:.2}")
                });
            }
            if a.minimize || a.epsilon.is_none() {
                let m = itsuku_minimize();
                emit(json, &m, || {
                    format!(
                        "e*={:.2}, overhead≈{:.0} (ε*={:.4}, {:.1}); search overhead 2/ε*²={:.2}",
                        m.epsilon, m.overhead, m.epsilon, m.overhead, m.search_overhead
                    )
                });
            }
        }
        CostCommand::Parallel(a) => {
            let mut t = Table::new(&["cores", "formula", "limit", "simulated"]);
            let mut rows = Vec::new();
            for &r in &a.cores {
                let formula = parallel_inconsistency(r)?;
                let limit = parallel_inconsistency_limit(r)?;
                let sim = simulate_parallel_fill(r, a.blocks, a.trials, a.seed)?;
                t.push(vec![r.to_string(), fmt(formula), fmt(limit), fmt(sim)]);
                rows.push(serde_json::json!({ "cores": r, "formula": formula, "limit": limit, "simulated": sim }));
            }
            emit(json, &rows, || t.render(csv));
        }
        CostCommand::Grinding(a) => {
            let r = simulate_grinding(a.blocks, a.length, a.difficulty, a.trials, a.mtp_trials, a.seed)?;
            emit(json, &r, || {
                format!(
                    "naive scheme: {} of {} forged proofs accepted ({:.4}, expected {:.4}), {:.0} hashes per forgery\nMTP: {} of {} accepted",
                    r.naive_escapes, r.naive_trials, r.naive_escape_rate, r.expected_escape, r.grind_calls, r.mtp_accepted, r.mtp_trials
                )
            });
        }
        CostCommand::Detection(a) => {
            let mem = MemParams::new_pow2(a.blocks, a.lanes, 1)?;
            let r = simulate_detection(&mem, a.epsilon, a.length, a.trials, a.seed)?;
            emit(json, &r, || {
                format!(
                    "{} forged blocks: {} of {} proofs escaped ({:.4}, expected {:.4})",
                    r.forged, r.escapes, r.trials, r.escape_rate, r.expected
                )
            });
        }
        CostCommand::Table => {
            let lengths = length_table(&table)?;
            let mut t1 = Table::new(&["alpha", "C", "D"]);
            for p in table.points() {
                t1.push(vec![format!("1/{}", p.alpha_inv), p.c.to_string(), p.d.to_string()]);
            }
            let mut header = vec!["advantage\\ratio".to_string()];
            header.extend(lengths.ratios.iter().map(|r| r.to_string()));
            let mut t3 = Table { header, rows: Vec::new() };
            for (adv, row) in lengths.advantages.iter().zip(&lengths.rows) {
                t3.push(std::iter::once(adv.to_string()).chain(row.iter().map(|l| l.to_string())).collect());
            }
            emit(json, &serde_json::json!({ "tradeoff": table, "lengths": lengths }), || {
                format!("{}\n\n{}", t1.render(csv), t3.render(csv))
            });
        }
    }
    Ok(())
}

/// Rejects non-finite numbers early with a usage error.
pub fn check_finite(cmd: &CostCommand) -> CliResult {
    let values: Vec<f64> = match cmd {
        CostCommand::At(a) => vec![a.alpha, a.beta],
        CostCommand::Calls(a) => vec![a.alpha, a.epsilon, a.delta, a.beta, a.ratio],
        CostCommand::OptimalL(a) => a.ratio.iter().copied().chain([a.advantage]).collect(),
        CostCommand::Itsuku(a) => a.epsilon.into_iter().collect(),
        CostCommand::Detection(a) => vec![a.epsilon],
        _ => vec![],
    };
    if values.iter().any(|v| !v.is_finite()) {
        return usage("numeric arguments must be finite");
    }
    Ok(())
}
