use crate::argon2m::{compress_at, Block, ChallengeDigest, Position, BLOCK_BYTES};
use crate::blake2b;
use crate::error::{invalid, Result};

use super::audit::TraceEvent;
use super::cipher::{cbc_decrypt, cbc_encrypt, ecb_decrypt, ecb_encrypt, BlockCipher};
use super::header::MheHeader;
use super::{MheChunk, MheParams, SessionKeys};

/// Output of decryption. The plaintext is meaningless if the password was
/// wrong; the scheme itself carries no integrity check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Decrypted {
    pub plaintext: Vec<u8>,
    /// The recovered `K_1`.
    pub session_key: [u8; 32],
}

/// Generates body block `X_i` (`i ≥ 1`) from the already modified `X_{i-1}`.
///
/// The header and body form one sequence `header[0..H-1], X_0, X_1, ..`, with
/// `X_0` in place of the last header block. The reference is drawn uniformly
/// from every block before `X_{i-1}` in that sequence.
pub(crate) fn next_body_block(
    header_block: &mut impl FnMut(u64) -> Block,
    body: &[Block],
    i: usize,
    header_len: u64,
    lane: u64,
    h0: &ChallengeDigest,
) -> Block {
    let prev = &body[i - 1];
    let window = header_len + i as u64 - 2;
    let r = prev.0[0] % window;
    let pos = Position { lane, column: i as u64 };
    if r < header_len - 1 {
        compress_at(prev, &header_block(r), pos, h0)
    } else {
        compress_at(prev, &body[(r - (header_len - 1)) as usize], pos, h0)
    }
}

fn ecb_input(block: &Block, hash: bool) -> [u8; BLOCK_BYTES] {
    if hash {
        blake2b::expand_1024(&[&block.to_bytes()])
    } else {
        block.to_bytes()
    }
}

fn xor_into(dst: &mut [u8], src: &[u8]) {
    dst.iter_mut().zip(src).for_each(|(a, b)| *a ^= b);
}

fn check_header(header: &MheHeader, params: &MheParams) -> Result<()> {
    if header.params() != params {
        return invalid("header was derived for different parameters");
    }
    Ok(())
}

/// Encrypts one chunk of exactly `q·1024` bytes.
pub fn encrypt_chunk(header: &MheHeader, keys: &SessionKeys, plaintext: &[u8], params: &MheParams) -> Result<MheChunk> {
    check_header(header, params)?;
    if plaintext.len() != params.chunk_bytes() {
        return invalid(format!("chunk must be {} bytes, got {}", params.chunk_bytes(), plaintext.len()));
    }
    let k0 = params.cipher.keyed(header.k0());
    let k1 = params.cipher.keyed(&keys.k1);
    let q = params.chunk_blocks() as usize;
    let h = params.header_blocks();
    let lane = params.header_lanes() as u64;
    let mut lookup = |r: u64| header.blocks()[r as usize].clone();

    let mut body = Vec::with_capacity(q + 1);
    body.push(header.x0().clone());
    let mut chain = keys.iv;
    let mut ct = Vec::with_capacity(params.chunk_bytes());
    for (i, m) in (1..=q).zip(plaintext.chunks_exact(BLOCK_BYTES)) {
        let mut c = ecb_input(&body[i - 1], params.hash_blocks);
        ecb_encrypt(&*k1, &mut c);
        xor_into(&mut c, m);
        body[i - 1] ^= &Block::from_bytes(&c);
        cbc_encrypt(&*k0, &mut chain, &mut c);
        ct.extend_from_slice(&c);
        let next = next_body_block(&mut lookup, &body, i, h, lane, header.digest());
        body.push(next);
    }
    let key_wrap = wrap_key(&*k0, &body[q], &keys.k1);
    Ok(MheChunk { assoc: header.assoc().to_vec(), iv: keys.iv, body: ct, key_wrap })
}

fn wrap_key(k0: &dyn BlockCipher, last: &Block, k1: &[u8; 32]) -> [u8; 32] {
    let mut w = blake2b::hash256(&[&last.to_bytes()]);
    xor_into(&mut w, k1);
    ecb_encrypt(k0, &mut w);
    w
}

fn unwrap_key(k0: &dyn BlockCipher, last: &Block, wrapped: &[u8; 32]) -> [u8; 32] {
    let mut w = *wrapped;
    ecb_decrypt(k0, &mut w);
    xor_into(&mut w, &blake2b::hash256(&[&last.to_bytes()]));
    w
}

/// Decrypts a chunk in two passes over its ciphertext.
pub fn decrypt_chunk(header: &MheHeader, chunk: &MheChunk, params: &MheParams) -> Result<Decrypted> {
    decrypt_chunk_traced(header, chunk, params, &mut Vec::new())
}

/// [`decrypt_chunk`] recording every ciphertext read and key event.
pub fn decrypt_chunk_traced(
    header: &MheHeader,
    chunk: &MheChunk,
    params: &MheParams,
    trace: &mut Vec<TraceEvent>,
) -> Result<Decrypted> {
    check_header(header, params)?;
    if chunk.assoc != header.assoc() {
        return invalid("chunk and header were bound to different associated data");
    }
    let mut lookup = |r: u64| header.blocks()[r as usize].clone();
    decrypt_with(&mut lookup, header.x0(), header.k0(), header.digest(), chunk, params, trace)
}

/// Decryption against an arbitrary source of header blocks.
pub(crate) fn decrypt_with(
    header_block: &mut impl FnMut(u64) -> Block,
    x0: &Block,
    k0: &[u8; 32],
    h0: &ChallengeDigest,
    chunk: &MheChunk,
    params: &MheParams,
    trace: &mut Vec<TraceEvent>,
) -> Result<Decrypted> {
    if chunk.body.len() != params.chunk_bytes() {
        return invalid(format!("ciphertext must be {} bytes, got {}", params.chunk_bytes(), chunk.body.len()));
    }
    let k0 = params.cipher.keyed(k0);
    let q = params.chunk_blocks() as usize;
    let h = params.header_blocks();
    let lane = params.header_lanes() as u64;
    let read = |i: usize, pass: u8, trace: &mut Vec<TraceEvent>| -> [u8; BLOCK_BYTES] {
        trace.push(TraceEvent::CiphertextRead { pass, block: i - 1 });
        chunk.body[(i - 1) * BLOCK_BYTES..i * BLOCK_BYTES].try_into().unwrap()
    };

    // Pass 1: recover every C'' and replay the body to obtain K_1.
    let mut body = Vec::with_capacity(q + 1);
    body.push(x0.clone());
    let mut chain = chunk.iv;
    for i in 1..=q {
        let mut c = read(i, 1, trace);
        cbc_decrypt(&*k0, &mut chain, &mut c);
        body[i - 1] ^= &Block::from_bytes(&c);
        let next = next_body_block(header_block, &body, i, h, lane, h0);
        body.push(next);
    }
    let session_key = unwrap_key(&*k0, &body[q], &chunk.key_wrap);
    trace.push(TraceEvent::SessionKeyRecovered);
    let k1 = params.cipher.keyed(&session_key);

    // Pass 2: undo the memory modification and strip the K_1 layer.
    let mut plaintext = Vec::with_capacity(params.chunk_bytes());
    let mut chain = chunk.iv;
    for i in 1..=q {
        let mut c2 = read(i, 2, trace);
        cbc_decrypt(&*k0, &mut chain, &mut c2);
        let before = &body[i - 1] ^ &Block::from_bytes(&c2);
        let mut m = ecb_input(&before, params.hash_blocks);
        ecb_encrypt(&*k1, &mut m);
        xor_into(&mut m, &c2);
        plaintext.extend_from_slice(&m);
        trace.push(TraceEvent::PlaintextEmitted { block: i - 1 });
    }
    Ok(Decrypted { plaintext, session_key })
}

/// The body blocks `X_1..X_q` as generated during encryption.
#[cfg(test)]
fn body_blocks(header: &MheHeader, chunk: &MheChunk, params: &MheParams) -> Result<Vec<Block>> {
    let k0 = params.cipher.keyed(header.k0());
    let q = params.chunk_blocks() as usize;
    let mut lookup = |r: u64| header.blocks()[r as usize].clone();
    let mut body = vec![header.x0().clone()];
    let mut chain = chunk.iv;
    for i in 1..=q {
        let mut c: [u8; BLOCK_BYTES] = chunk.body[(i - 1) * BLOCK_BYTES..i * BLOCK_BYTES].try_into().unwrap();
        cbc_decrypt(&*k0, &mut chain, &mut c);
        body[i - 1] ^= &Block::from_bytes(&c);
        let next = next_body_block(&mut lookup, &body, i, params.header_blocks(), params.header_lanes() as u64, header.digest());
        body.push(next);
    }
    body.remove(0);
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhe::{init_header, HeaderMode};
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    fn bit_diff(a: &[u8], b: &[u8]) -> f64 {
        let d: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
        d as f64 / (8 * a.len()) as f64
    }

    #[test]
    fn zero_chunk_roundtrip() {
        let p = MheParams::new(9, 1, 1, HeaderMode::PerChunk).unwrap();
        let header = init_header(b"pw", b"s", &p).unwrap();
        let keys = SessionKeys { k1: [1; 32], iv: [2; 16] };
        let a = encrypt_chunk(&header, &keys, &[0; 1024], &p).unwrap();
        assert_eq!(a, encrypt_chunk(&header, &keys, &[0; 1024], &p).unwrap());
        let d = decrypt_chunk(&header, &a, &p).unwrap();
        assert_eq!(d.plaintext, vec![0; 1024]);
        assert_eq!(d.session_key, [1; 32]);
    }

    #[test]
    fn fresh_session_keys_change_the_ciphertext() {
        let p = MheParams::new(20, 4, 1, HeaderMode::PerChunk).unwrap();
        let header = init_header(b"pw", b"s", &p).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let pt = vec![7u8; p.chunk_bytes()];
        let a = encrypt_chunk(&header, &SessionKeys::generate(&mut rng), &pt, &p).unwrap();
        let b = encrypt_chunk(&header, &SessionKeys::generate(&mut rng), &pt, &p).unwrap();
        assert!(bit_diff(&a.body, &b.body) > 0.45);
        assert_ne!(a.key_wrap, b.key_wrap);
    }

    #[test]
    fn random_roundtrips_in_both_modes() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for trial in 0..40 {
            let q = [1u32, 2, 8][trial % 3];
            let h = [8u64, 64][trial % 2];
            let mode = if trial % 4 < 2 { HeaderMode::PerChunk } else { HeaderMode::Shared };
            let mut p = MheParams::new(h + q as u64, q, 1 + (trial % 2) as u32, mode).unwrap();
            p.hash_blocks = trial % 5 == 0;
            let pw: [u8; 8] = rng.gen();
            let s: [u8; 12] = rng.gen();
            let mut pt = vec![0u8; p.chunk_bytes()];
            rng.fill_bytes(&mut pt);
            let header = init_header(&pw, &s, &p).unwrap();
            let ct = encrypt_chunk(&header, &SessionKeys::generate(&mut rng), &pt, &p).unwrap();
            assert_eq!(decrypt_chunk(&header, &ct, &p).unwrap().plaintext, pt);
        }
    }

    #[test]
    fn wrong_password_garbles_everything() {
        let p = MheParams::new(24, 8, 1, HeaderMode::PerChunk).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut pt = vec![0u8; p.chunk_bytes()];
        rng.fill_bytes(&mut pt);
        let ct = encrypt_chunk(&init_header(b"right", b"s", &p).unwrap(), &SessionKeys::generate(&mut rng), &pt, &p)
            .unwrap();
        let wrong = decrypt_chunk(&init_header(b"wrong", b"s", &p).unwrap(), &ct, &p).unwrap();
        let f = bit_diff(&wrong.plaintext, &pt);
        assert!((0.45..0.55).contains(&f), "{f}");
    }

    #[test]
    fn one_ciphertext_bit_garbles_every_block() {
        let p = MheParams::new(24, 8, 1, HeaderMode::PerChunk).unwrap();
        let header = init_header(b"pw", b"s", &p).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut pt = vec![0u8; p.chunk_bytes()];
        rng.fill_bytes(&mut pt);
        let mut ct = encrypt_chunk(&header, &SessionKeys::generate(&mut rng), &pt, &p).unwrap();
        ct.body[5] ^= 0x10;
        let out = decrypt_chunk(&header, &ct, &p).unwrap().plaintext;
        for (a, b) in out.chunks(1024).zip(pt.chunks(1024)) {
            let f = bit_diff(a, b);
            assert!((0.4..0.6).contains(&f), "{f}");
        }
    }

    #[test]
    fn body_blocks_are_distinct() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = MheParams::new(16, 8, 1, HeaderMode::PerChunk).unwrap();
            let pw: [u8; 4] = rng.gen();
            let header = init_header(&pw, b"s", &p).unwrap();
            let pt = vec![0u8; p.chunk_bytes()];
            let ct = encrypt_chunk(&header, &SessionKeys::generate(&mut rng), &pt, &p).unwrap();
            let body = body_blocks(&header, &ct, &p).unwrap();
            let all: HashSet<_> = header.blocks().iter().chain(body.iter()).collect();
            assert_eq!(all.len(), header.blocks().len() + body.len());
        }
    }

    #[test]
    fn length_and_header_mismatches_are_rejected() {
        let p = MheParams::new(12, 4, 1, HeaderMode::PerChunk).unwrap();
        let other = MheParams::new(12, 4, 2, HeaderMode::PerChunk).unwrap();
        let header = init_header(b"pw", b"s", &p).unwrap();
        let keys = SessionKeys { k1: [0; 32], iv: [0; 16] };
        assert!(encrypt_chunk(&header, &keys, &[0; 1024], &p).is_err());
        assert!(encrypt_chunk(&header, &keys, &[0; 4096], &other).is_err());
        let mut ct = encrypt_chunk(&header, &keys, &[0; 4096], &p).unwrap();
        ct.body.pop();
        assert!(decrypt_chunk(&header, &ct, &p).is_err());
    }
}
