use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use egalitarian::argon2m::{fill_memory_with, initial_digest, FillOptions, MemParams};
use egalitarian::mtp::{verify, PowParams, Proof, Prover};

use crate::util::{emit, peak_memory_kib, read_file, usage, write_atomic, CliError, CliResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Preset {
    /// 2 GiB of memory: T = 2^21, p = 4, L = 70.
    #[value(name = "mtp-argon2-2gib")]
    MtpArgon2_2gib,
}

/// Memory and proof parameters shared by `prove` and `verify`.
#[derive(Args, Debug)]
pub struct PowArgs {
    /// Memory size in 1 KiB blocks (a power of two).
    #[arg(long, default_value_t = 4096)]
    pub blocks: u64,
    #[arg(long, default_value_t = 4)]
    pub lanes: u32,
    /// Number of openings.
    #[arg(short = 'L', long = "length", default_value_t = 70)]
    pub length: u8,
    /// Required trailing zero bits.
    #[arg(short = 'd', long, default_value_t = 8)]
    pub difficulty: u8,
    /// Overrides blocks, lanes and length.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

impl PowArgs {
    pub fn params(&self) -> CliResult<PowParams> {
        if let Some(Preset::MtpArgon2_2gib) = self.preset {
            return Ok(PowParams::preset_2gib(self.difficulty));
        }
        let mem = MemParams::new_pow2(self.blocks, self.lanes, 1)?;
        Ok(PowParams::new(mem, self.length, self.difficulty)?)
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct ChallengeArgs {
    /// Challenge as hex.
    #[arg(long)]
    pub challenge: Option<String>,
    /// Challenge read from a file.
    #[arg(long)]
    pub challenge_file: Option<PathBuf>,
}

impl ChallengeArgs {
    pub fn bytes(&self) -> CliResult<Vec<u8>> {
        match (&self.challenge, &self.challenge_file) {
            (Some(h), _) => hex::decode(h.trim()).map_err(|e| CliError::Usage(format!("bad challenge hex: {e}"))),
            (None, Some(p)) => read_file(p),
            (None, None) => usage("no challenge given"),
        }
    }
}

#[derive(Args, Debug)]
pub struct ProveArgs {
    #[command(flatten)]
    pub pow: PowArgs,
    #[command(flatten)]
    pub challenge: ChallengeArgs,
    /// First nonce to try.
    #[arg(long, default_value_t = 0)]
    pub nonce_start: u64,
    /// Number of nonces to try before giving up.
    #[arg(long, default_value_t = 1 << 32)]
    pub nonce_limit: u64,
    /// Proof output file.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Serialize)]
struct ProveReport {
    nonce: u64,
    nonces_tried: u64,
    fill_seconds: f64,
    search_seconds: f64,
    proof_bytes: usize,
    output: PathBuf,
}

pub fn prove(args: &ProveArgs, threads: usize, json: bool) -> CliResult {
    let params = args.pow.params()?;
    let challenge = args.challenge.bytes()?;
    let start = Instant::now();
    let prover = Prover::new(&challenge, &params, Some(threads))?;
    let fill_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let outcome = prover.search(args.nonce_start, args.nonce_limit, threads);
    let search_seconds = start.elapsed().as_secs_f64();
    let Some(proof) = outcome.proof else {
        return Err(CliError::Exhausted(format!(
            "no proof among {} nonces from {}",
            args.nonce_limit, args.nonce_start
        )));
    };
    let bytes = proof.to_bytes(&params);
    write_atomic(&args.output, &bytes)?;
    let report = ProveReport {
        nonce: proof.nonce,
        nonces_tried: outcome.nonces_tried,
        fill_seconds,
        search_seconds,
        proof_bytes: bytes.len(),
        output: args.output.clone(),
    };
    emit(json, &report, || {
        format!(
            "nonce {} after {} tries; fill {:.3} s, search {:.3} s; {} bytes written to {}",
            report.nonce,
            report.nonces_tried,
            fill_seconds,
            search_seconds,
            report.proof_bytes,
            args.output.display()
        )
    });
    Ok(())
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub pow: PowArgs,
    /// Proof file.
    pub proof: PathBuf,
}

#[derive(Serialize)]
struct VerifyReport {
    valid: bool,
    reason: Option<String>,
    seconds: f64,
    peak_memory_kib: Option<u64>,
}

pub fn verify_cmd(args: &VerifyArgs, json: bool) -> CliResult {
    let params = args.pow.params()?;
    let bytes = read_file(&args.proof)?;
    let start = Instant::now();
    let proof = Proof::from_bytes(&bytes, &params).map_err(|r| CliError::Usage(r.to_string()))?;
    let verdict = verify(&proof, &params);
    let report = VerifyReport {
        valid: verdict.is_ok(),
        reason: verdict.as_ref().err().map(|r| r.to_string()),
        seconds: start.elapsed().as_secs_f64(),
        peak_memory_kib: peak_memory_kib(),
    };
    let peak = report.peak_memory_kib.map_or("unknown".to_string(), |k| format!("{k} KiB"));
    match verdict {
        Ok(()) => {
            emit(json, &report, || format!("valid ({:.3} ms, peak memory {peak})", report.seconds * 1e3));
            Ok(())
        }
        Err(reason) => {
            if json {
                emit(true, &report, String::new);
            }
            Err(CliError::Rejected(format!("rejected: {reason}")))
        }
    }
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[command(flatten)]
    pub pow: PowArgs,
    #[command(flatten)]
    pub challenge: ChallengeArgs,
    /// Block index.
    #[arg(long)]
    pub index: u64,
}

#[derive(Serialize)]
struct BlockDump {
    index: u64,
    lane: u64,
    column: u64,
    hex: String,
}

pub fn dump_block(args: &DumpArgs, threads: usize, json: bool) -> CliResult {
    let params = args.pow.params()?;
    let mem = params.mem();
    let pos = mem.psi(args.index)?;
    let h0 = initial_digest(&args.challenge.bytes()?)?;
    let memory = fill_memory_with(&h0, mem, FillOptions { threads: Some(threads), replace: None })?;
    let dump = BlockDump {
        index: args.index,
        lane: pos.lane,
        column: pos.column,
        hex: hex::encode(memory.get(args.index).to_bytes()),
    };
    emit(json, &dump, || format!("block {} (lane {}, column {})\n{}", dump.index, dump.lane, dump.column, dump.hex));
    Ok(())
}
