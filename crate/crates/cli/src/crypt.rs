use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rand::rngs::StdRng;
use rand::{RngCore, SeedableRng};
use serde::Serialize;

use egalitarian::blake2b;
use egalitarian::mhe::{
    decrypt_chunk, encrypt_chunk, Container, HeaderMode, MheHeader, MheParams, SessionKeys,
};

use crate::util::{emit, read_file, read_password, usage, write_atomic, CliError, CliResult};

const SALT_BYTES: usize = 16;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    /// Refill the header for every chunk.
    PerChunk,
    /// Fill the header once per file.
    Shared,
}

#[derive(Args, Debug)]
pub struct EncryptArgs {
    /// Plaintext file.
    pub input: PathBuf,
    /// Container output file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Total memory `M` in 1 KiB blocks.
    #[arg(long, default_value_t = 1088)]
    pub memory: u64,
    /// Chunk length `q` in blocks.
    #[arg(long, default_value_t = 64)]
    pub chunk_blocks: u32,
    /// Passes over the header.
    #[arg(long, default_value_t = 1)]
    pub passes: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::PerChunk)]
    pub mode: ModeArg,
    /// Hash body blocks before encrypting them.
    #[arg(long)]
    pub hash_blocks: bool,
    /// Omit the integrity tag.
    #[arg(long)]
    pub no_tag: bool,
    /// Read the password from the first line of stdin.
    #[arg(long)]
    pub password_stdin: bool,
    /// Deterministic session keys and salt, for tests only.
    #[arg(long, hide = true)]
    pub insecure_seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct DecryptArgs {
    /// Container file.
    pub input: PathBuf,
    /// Plaintext output file.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub password_stdin: bool,
}

#[derive(Serialize)]
struct CryptReport {
    chunks: usize,
    input_bytes: usize,
    output_bytes: usize,
    seconds: f64,
    tagged: bool,
    verified: Option<bool>,
}

/// Keyed integrity tag over one plaintext chunk.
fn tag(k1: &[u8; 32], plaintext: &[u8]) -> [u8; 32] {
    blake2b::hash256(&[b"egal-tag", k1, plaintext])
}

fn chunk_assoc(salt: &[u8], index: u64) -> Vec<u8> {
    [salt, &index.to_le_bytes()].concat()
}

/// Plaintext, zero padding and the original length as a little-endian u64,
/// filling a whole number of chunks.
fn pad(data: &[u8], chunk: usize) -> Vec<u8> {
    let total = (data.len() + 8).div_ceil(chunk) * chunk;
    let mut out = data.to_vec();
    out.resize(total - 8, 0);
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    out
}

/// Original length recorded by [`pad`], if it is consistent.
fn unpadded_len(data: &[u8]) -> Option<usize> {
    let n = data.len().checked_sub(8)?;
    let len = u64::from_le_bytes(data[n..].try_into().ok()?);
    (len <= n as u64).then_some(len as usize)
}

/// Headers for successive chunks: a fresh fill per chunk, or one shared fill.
struct Headers<'a> {
    password: &'a [u8],
    params: MheParams,
    shared: Option<MheHeader>,
}

impl Headers<'_> {
    fn for_chunk(&mut self, assoc: &[u8], threads: usize) -> CliResult<MheHeader> {
        if self.params.header_mode == HeaderMode::PerChunk {
            return Ok(MheHeader::fill(self.password, assoc, &self.params, Some(threads))?);
        }
        match &self.shared {
            Some(h) => Ok(h.for_assoc(assoc)?),
            None => {
                let h = MheHeader::fill(self.password, assoc, &self.params, Some(threads))?;
                self.shared = Some(h.clone());
                Ok(h)
            }
        }
    }
}

pub fn encrypt(args: &EncryptArgs, threads: usize, json: bool) -> CliResult {
    let mode = match args.mode {
        ModeArg::PerChunk => HeaderMode::PerChunk,
        ModeArg::Shared => HeaderMode::Shared,
    };
    let mut params = MheParams::new(args.memory, args.chunk_blocks, args.passes, mode)?;
    params.hash_blocks = args.hash_blocks;
    let data = read_file(&args.input)?;
    let password = read_password(args.password_stdin)?;
    let mut rng = match args.insecure_seed {
        Some(seed) => StdRng::seed_from_u64(seed),
        None => StdRng::from_entropy(),
    };
    let mut salt = [0u8; SALT_BYTES];
    rng.fill_bytes(&mut salt);

    let start = Instant::now();
    let padded = pad(&data, params.chunk_bytes());
    let mut headers = Headers { password: &password, params, shared: None };
    let mut out = Vec::new();
    let mut chunks = 0;
    for (index, plain) in padded.chunks(params.chunk_bytes()).enumerate() {
        let assoc = chunk_assoc(&salt, index as u64);
        let header = headers.for_chunk(&assoc, threads)?;
        let keys = SessionKeys::generate(&mut rng);
        let chunk = encrypt_chunk(&header, &keys, plain, &params)?;
        let tag = (!args.no_tag).then(|| tag(&keys.k1, plain));
        Container { params, chunk, tag }.write_to(&mut out);
        chunks += 1;
    }
    write_atomic(&args.output, &out)?;
    let report = CryptReport {
        chunks,
        input_bytes: data.len(),
        output_bytes: out.len(),
        seconds: start.elapsed().as_secs_f64(),
        tagged: !args.no_tag,
        verified: None,
    };
    emit(json, &report, || {
        format!("{} bytes in {} chunk(s) -> {} bytes ({:.3} s)", data.len(), chunks, out.len(), report.seconds)
    });
    Ok(())
}

pub fn decrypt(args: &DecryptArgs, threads: usize, json: bool) -> CliResult {
    let bytes = read_file(&args.input)?;
    let password = read_password(args.password_stdin)?;
    let start = Instant::now();
    let mut rest = &bytes[..];
    let mut headers: Option<Headers> = None;
    let mut plain = Vec::new();
    let (mut chunks, mut tagged, mut untagged) = (0, 0, 0);
    while !rest.is_empty() {
        let (c, tail) = Container::read_from(rest)?;
        rest = tail;
        let h = headers.get_or_insert_with(|| Headers { password: &password, params: c.params, shared: None });
        if h.params != c.params {
            return usage("chunks disagree on parameters");
        }
        let header = h.for_chunk(&c.chunk.assoc, threads)?;
        let out = decrypt_chunk(&header, &c.chunk, &c.params)?;
        match c.tag {
            Some(t) if t != tag(&out.session_key, &out.plaintext) => {
                return Err(CliError::Rejected(format!("integrity failure in chunk {chunks}: wrong password or corrupted file")));
            }
            Some(_) => tagged += 1,
            None => untagged += 1,
        }
        plain.extend_from_slice(&out.plaintext);
        chunks += 1;
    }
    if chunks == 0 {
        return usage("empty container");
    }
    if untagged > 0 {
        eprintln!("warning: {untagged} chunk(s) carry no integrity tag; a wrong password yields garbage");
    }
    let data = match unpadded_len(&plain) {
        Some(n) => {
            plain.truncate(n);
            plain
        }
        None if tagged == 0 => {
            eprintln!("warning: padding is invalid; writing the raw decryption");
            plain
        }
        None => return Err(CliError::Rejected("integrity failure: bad padding".into())),
    };
    write_atomic(&args.output, &data)?;
    let report = CryptReport {
        chunks,
        input_bytes: bytes.len(),
        output_bytes: data.len(),
        seconds: start.elapsed().as_secs_f64(),
        tagged: untagged == 0,
        verified: (untagged == 0).then_some(true),
    };
    emit(json, &report, || format!("{} chunk(s) -> {} bytes ({:.3} s)", chunks, data.len(), report.seconds));
    Ok(())
}
