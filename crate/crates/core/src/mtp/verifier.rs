use std::fmt;

use serde::Serialize;

use crate::argon2m::{compress, initial_digest, phi_index};
use crate::merkle::verify_opening;

use super::proof::Proof;
use super::{chain_start, chain_step, difficulty_check, select_index, PowParams};

/// Why a proof was rejected. Entry numbers are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    BadEntryCount { expected: usize, found: usize },
    PositionMismatch { entry: usize, expected: u64, found: u64 },
    PhiMismatch { entry: usize, expected: u64, found: u64 },
    OpeningInvalid { entry: usize, opening: Opening },
    DifficultyFailed,
    Malformed(String),
}

/// Which of the three openings of an entry failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Opening {
    Prev,
    Ref,
    Cur,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadEntryCount { expected, found } => write!(f, "bad entry count: expected {expected}, found {found}"),
            Self::PositionMismatch { entry, expected, found } => {
                write!(f, "position mismatch in entry {entry}: expected block {expected}, found {found}")
            }
            Self::PhiMismatch { entry, expected, found } => {
                write!(f, "reference mismatch in entry {entry}: expected block {expected}, found {found}")
            }
            Self::OpeningInvalid { entry, opening } => write!(f, "invalid {opening:?} opening in entry {entry}"),
            Self::DifficultyFailed => write!(f, "difficulty test failed"),
            Self::Malformed(msg) => write!(f, "malformed proof: {msg}"),
        }
    }
}

impl std::error::Error for RejectReason {}

use RejectReason::*;

/// Checks a proof using only the proof itself: no memory is filled.
/// Returns the first failing check.
pub fn verify(proof: &Proof, params: &PowParams) -> Result<(), RejectReason> {
    let expected = params.length() as usize;
    if proof.entries.len() != expected {
        return Err(BadEntryCount { expected, found: proof.entries.len() });
    }
    let h0 = initial_digest(&proof.challenge).map_err(|e| Malformed(e.to_string()))?;
    let mem = params.mem();
    let leaves = mem.blocks();
    let mut y = chain_start(&proof.challenge, &proof.root, proof.nonce);
    for (j, e) in proof.entries.iter().enumerate() {
        let i = select_index(&y, params);
        if e.index != i {
            return Err(PositionMismatch { entry: j, expected: i, found: e.index });
        }
        let phi = phi_index(&e.block_prev, i, mem).map_err(|err| Malformed(err.to_string()))?;
        if e.phi != phi {
            return Err(PhiMismatch { entry: j, expected: phi, found: e.phi });
        }
        let cur = compress(&e.block_prev, &e.block_ref, i, &h0, mem).map_err(|err| Malformed(err.to_string()))?;
        let checks = [
            (Opening::Prev, i - 1, &e.block_prev, &e.path_prev),
            (Opening::Ref, phi, &e.block_ref, &e.path_ref),
            (Opening::Cur, i, &cur, &e.path_cur),
        ];
        for (opening, position, block, path) in checks {
            if !verify_opening(&proof.root, position, block, path, leaves) {
                return Err(OpeningInvalid { entry: j, opening });
            }
        }
        y = chain_step(&y, &cur);
    }
    if !difficulty_check(&y, params.difficulty()) {
        return Err(DifficultyFailed);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argon2m::MemParams;
    use crate::mtp::{proof_size, Prover};

    fn small() -> PowParams {
        PowParams::new(MemParams::new(1 << 8, 4, 1).unwrap(), 8, 4).unwrap()
    }

    #[test]
    fn honest_proof_roundtrips_through_bytes() {
        let params = small();
        let proof = Prover::new(b"roundtrip", &params, None).unwrap().search(0, 1 << 12, 1).proof.unwrap();
        assert_eq!(verify(&proof, &params), Ok(()));
        let bytes = proof.to_bytes(&params);
        assert_eq!(bytes.len(), proof_size(&params, 9));
        assert_eq!(Proof::from_bytes(&bytes, &params).unwrap(), proof);
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(Proof::from_bytes(&longer, &params), Err(Malformed(_))));
        for cut in [1, 100, bytes.len() - 1] {
            assert!(matches!(Proof::from_bytes(&bytes[..cut], &params), Err(Malformed(_))));
        }
        let other = PowParams::new(*params.mem(), 8, 5).unwrap();
        assert!(matches!(Proof::from_bytes(&bytes, &other), Err(Malformed(_))));
    }

    #[test]
    fn reasons_pinpoint_the_first_failure() {
        let params = small();
        let prover = Prover::new(b"reasons", &params, None).unwrap();
        let proof = prover.search(0, 1 << 12, 1).proof.unwrap();

        let mut p = proof.clone();
        p.entries.pop();
        assert_eq!(verify(&p, &params), Err(BadEntryCount { expected: 8, found: 7 }));

        let mut p = proof.clone();
        p.entries[2].index ^= 1;
        assert!(matches!(verify(&p, &params), Err(PositionMismatch { entry: 2, .. })));

        let mut p = proof.clone();
        p.entries[1].phi += 1;
        assert!(matches!(verify(&p, &params), Err(PhiMismatch { entry: 1, .. })));

        let mut p = proof.clone();
        p.entries[3].block_ref.0[100] ^= 1;
        assert_eq!(verify(&p, &params), Err(OpeningInvalid { entry: 3, opening: Opening::Ref }));

        let mut p = proof.clone();
        p.entries[0].path_cur.siblings[0].0[0] ^= 1;
        assert_eq!(verify(&p, &params), Err(OpeningInvalid { entry: 0, opening: Opening::Cur }));

        let mut p = proof.clone();
        p.challenge.clear();
        assert!(matches!(verify(&p, &params), Err(Malformed(_))));

        let failing = (0..).find(|&n| !difficulty_check(&prover.chain(n).0, 4)).unwrap();
        assert_eq!(verify(&prover.assemble(failing), &params), Err(DifficultyFailed));
    }
}
