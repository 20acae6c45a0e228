use std::time::Instant;

use clap::Args;
use serde::Serialize;

use egalitarian::argon2m::{fill_memory_with, initial_digest, FillOptions, MemParams};
use egalitarian::merkle::MerkleTree;
use egalitarian::mtp::{proof_size, PowParams};

use crate::util::{emit, CliResult};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Blocks to fill (a power of two).
    #[arg(long, default_value_t = 1 << 18)]
    pub blocks: u64,
    #[arg(long, default_value_t = 4)]
    pub lanes: u32,
}

#[derive(Serialize)]
struct BenchReport {
    blocks: u64,
    lanes: u32,
    threads: usize,
    fill_seconds: f64,
    fill_ns_per_byte: f64,
    cycles_per_byte: Option<f64>,
    fill_2gib_seconds: f64,
    tree_seconds: f64,
    proof_bytes_2gib: usize,
    reference_cycles_per_byte: f64,
    reference_fill_2gib_seconds: f64,
    reference_proof_kib: f64,
}

/// Clock rate in MHz of the first core listed in /proc/cpuinfo.
fn cpu_mhz() -> Option<f64> {
    let info = std::fs::read_to_string("/proc/cpuinfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("cpu MHz"))?;
    line.split(':').nth(1)?.trim().parse().ok()
}

pub fn run(args: &BenchArgs, threads: usize, json: bool) -> CliResult {
    let mem = MemParams::new_pow2(args.blocks, args.lanes, 1)?;
    let h0 = initial_digest(b"egal bench")?;
    let start = Instant::now();
    let memory = fill_memory_with(&h0, &mem, FillOptions { threads: Some(threads), replace: None })?;
    let fill_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let tree = MerkleTree::build(&memory)?;
    let tree_seconds = start.elapsed().as_secs_f64();
    std::hint::black_box(tree.root());

    let bytes = (mem.blocks() * 1024) as f64;
    let ns = fill_seconds * 1e9 / bytes;
    let report = BenchReport {
        blocks: mem.blocks(),
        lanes: args.lanes,
        threads,
        fill_seconds,
        fill_ns_per_byte: ns,
        cycles_per_byte: cpu_mhz().map(|mhz| ns * mhz * 1e-3),
        fill_2gib_seconds: fill_seconds * (2u64 << 30) as f64 / bytes,
        tree_seconds,
        proof_bytes_2gib: proof_size(&PowParams::preset_2gib(0), 32),
        reference_cycles_per_byte: 0.7,
        reference_fill_2gib_seconds: 0.4,
        reference_proof_kib: 187.0,
    };
    emit(json, &report, || {
        let cpb = report.cycles_per_byte.map_or("n/a".into(), |c| format!("{c:.2}"));
        format!(
            "fill: {} blocks on {} thread(s) in {:.3} s, {:.2} ns/byte, {cpb} cycles/byte (reference 0.7)\n\
             2 GiB fill extrapolated: {:.2} s (reference 0.4 s)\n\
             merkle tree: {:.3} s\n\
             proof at 2 GiB, L=70: {:.1} KiB (reference ~187 KiB with shared paths)",
            report.blocks,
            threads,
            fill_seconds,
            ns,
            report.fill_2gib_seconds,
            tree_seconds,
            report.proof_bytes_2gib as f64 / 1024.0
        )
    });
    Ok(())
}
