use serde::Serialize;

use crate::error::Result;

use super::chunk::decrypt_chunk_traced;
use super::header::MheHeader;
use super::{HeaderMode, MheChunk, MheParams};

/// Observable steps of decryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceEvent {
    /// The header was available before decryption started. It depends on the
    /// associated data only in per-chunk mode, and never on the ciphertext.
    HeaderFilled { depends_on_assoc: bool },
    CiphertextRead { pass: u8, block: usize },
    SessionKeyRecovered,
    PlaintextEmitted { block: usize },
}

/// Data-dependency facts extracted from one instrumented decryption.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub trace: Vec<TraceEvent>,
    /// How often each ciphertext block was read.
    pub reads_per_block: Vec<u32>,
    /// Every ciphertext block was read before `K_1` became available.
    pub ciphertext_before_key: bool,
    /// No plaintext left the decryptor before the whole ciphertext was read.
    pub plaintext_after_full_read: bool,
    /// Every block was read in exactly two passes.
    pub two_passes: bool,
    pub header_depends_on_assoc: bool,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.ciphertext_before_key && self.plaintext_after_full_read && self.two_passes
    }
}

/// Decrypts `chunk` with instrumentation and checks that the session key, and
/// hence any plaintext, depends on every ciphertext block.
pub fn delegation_resistance_audit(header: &MheHeader, chunk: &MheChunk, params: &MheParams) -> Result<AuditReport> {
    let header_depends_on_assoc = params.header_mode == HeaderMode::PerChunk;
    let mut trace = vec![TraceEvent::HeaderFilled { depends_on_assoc: header_depends_on_assoc }];
    decrypt_chunk_traced(header, chunk, params, &mut trace)?;

    let q = params.chunk_blocks() as usize;
    let mut reads_per_block = vec![0u32; q];
    let mut first_pass_seen = vec![false; q];
    let mut key_at = None;
    let mut first_plain = None;
    let mut last_read = 0;
    let mut passes_ok = true;
    for (at, e) in trace.iter().enumerate() {
        match *e {
            TraceEvent::CiphertextRead { pass, block } => {
                reads_per_block[block] += 1;
                passes_ok &= pass as u32 == reads_per_block[block];
                if pass == 1 {
                    first_pass_seen[block] = true;
                    last_read = last_read.max(at);
                }
            }
            TraceEvent::SessionKeyRecovered => key_at = key_at.or(Some(at)),
            TraceEvent::PlaintextEmitted { .. } => first_plain = first_plain.or(Some(at)),
            TraceEvent::HeaderFilled { .. } => {}
        }
    }
    let all_read = first_pass_seen.iter().all(|&s| s);
    Ok(AuditReport {
        ciphertext_before_key: all_read && key_at.is_some_and(|k| k > last_read),
        plaintext_after_full_read: all_read && first_plain.is_some_and(|p| p > last_read),
        two_passes: passes_ok && reads_per_block.iter().all(|&r| r == 2),
        reads_per_block,
        header_depends_on_assoc,
        trace,
    })
}
