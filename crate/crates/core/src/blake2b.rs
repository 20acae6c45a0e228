//! Blake2b with a configurable number of rounds.
//!
//! Three instantiations are used throughout the crate:
//!
//! * `H`: full 12-round Blake2b-256, for challenge digests and the proof chain;
//! * `H'`: the Argon2-style variable-length expansion built on Blake2b-512;
//! * `G`: 4-round Blake2b with a 16-byte digest, for the Merkle tree.
//!
//! The reduced variant runs rounds `0..rounds` of the standard message schedule
//! and is otherwise identical to Blake2b (same parameter block, same padding).

const IV: [u64; 8] = [
    0x6a09_e667_f3bc_c908,
    0xbb67_ae85_84ca_a73b,
    0x3c6e_f372_fe94_f82b,
    0xa54f_f53a_5f1d_36f1,
    0x510e_527f_ade6_82d1,
    0x9b05_688c_2b3e_6c1f,
    0x1f83_d9ab_fb41_bd6b,
    0x5be0_cd19_137e_2179,
];

const SIGMA: [[usize; 16]; 12] = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15],
    [14, 10, 4, 8, 9, 15, 13, 6, 1, 12, 0, 2, 11, 7, 5, 3],
    [11, 8, 12, 0, 5, 2, 15, 13, 10, 14, 3, 6, 7, 1, 9, 4],
    [7, 9, 3, 1, 13, 12, 11, 14, 2, 6, 5, 10, 4, 0, 15, 8],
    [9, 0, 5, 7, 2, 4, 10, 15, 14, 1, 11, 12, 6, 8, 3, 13],
    [2, 12, 6, 10, 0, 11, 8, 3, 4, 13, 7, 5, 15, 14, 1, 9],
    [12, 5, 1, 15, 14, 13, 4, 10, 0, 7, 6, 3, 9, 2, 8, 11],
    [13, 11, 7, 14, 12, 1, 3, 9, 5, 0, 15, 4, 8, 6, 2, 10],
    [6, 15, 14, 9, 11, 3, 0, 8, 12, 2, 13, 7, 1, 4, 10, 5],
    [10, 2, 8, 4, 7, 6, 1, 5, 15, 11, 9, 14, 3, 12, 13, 0],
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15],
    [14, 10, 4, 8, 9, 15, 13, 6, 1, 12, 0, 2, 11, 7, 5, 3],
];

const BLOCK_BYTES: usize = 128;

/// Number of rounds of the full hash.
pub const FULL_ROUNDS: usize = 12;
/// Number of rounds of the Merkle tree hash.
pub const TREE_ROUNDS: usize = 4;

#[inline(always)]
fn mix(v: &mut [u64; 16], a: usize, b: usize, c: usize, d: usize, x: u64, y: u64) {
    v[a] = v[a].wrapping_add(v[b]).wrapping_add(x);
    v[d] = (v[d] ^ v[a]).rotate_right(32);
    v[c] = v[c].wrapping_add(v[d]);
    v[b] = (v[b] ^ v[c]).rotate_right(24);
    v[a] = v[a].wrapping_add(v[b]).wrapping_add(y);
    v[d] = (v[d] ^ v[a]).rotate_right(16);
    v[c] = v[c].wrapping_add(v[d]);
    v[b] = (v[b] ^ v[c]).rotate_right(63);
}

/// Incremental Blake2b state.
#[derive(Clone)]
pub struct Blake2b {
    h: [u64; 8],
    buf: [u8; BLOCK_BYTES],
    buf_len: usize,
    counter: u128,
    out_len: usize,
    rounds: usize,
}

impl Blake2b {
    /// Unkeyed Blake2b with `out_len` bytes of output (1..=64) and `rounds` rounds (1..=12).
    pub fn new(out_len: usize, rounds: usize) -> Self {
        assert!((1..=64).contains(&out_len), "blake2b output length must be 1..=64");
        assert!((1..=FULL_ROUNDS).contains(&rounds), "blake2b rounds must be 1..=12");
        let mut h = IV;
        h[0] ^= 0x0101_0000 ^ out_len as u64;
        Self {
            h,
            buf: [0; BLOCK_BYTES],
            buf_len: 0,
            counter: 0,
            out_len,
            rounds,
        }
    }

    pub fn update(&mut self, mut data: &[u8]) -> &mut Self {
        while !data.is_empty() {
            // Keep the last block buffered: it must be compressed with the final flag.
            if self.buf_len == BLOCK_BYTES {
                self.counter += BLOCK_BYTES as u128;
                let block = self.buf;
                self.compress(&block, false);
                self.buf_len = 0;
            }
            let take = (BLOCK_BYTES - self.buf_len).min(data.len());
            self.buf[self.buf_len..self.buf_len + take].copy_from_slice(&data[..take]);
            self.buf_len += take;
            data = &data[take..];
        }
        self
    }

    pub fn finalize_into(mut self, out: &mut [u8]) {
        assert_eq!(out.len(), self.out_len);
        self.counter += self.buf_len as u128;
        self.buf[self.buf_len..].fill(0);
        let block = self.buf;
        self.compress(&block, true);
        let mut bytes = [0u8; 64];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip(self.h.iter()) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        out.copy_from_slice(&bytes[..self.out_len]);
    }

    fn compress(&mut self, block: &[u8; BLOCK_BYTES], last: bool) {
        let mut m = [0u64; 16];
        for (word, chunk) in m.iter_mut().zip(block.chunks_exact(8)) {
            *word = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        let mut v = [0u64; 16];
        v[..8].copy_from_slice(&self.h);
        v[8..].copy_from_slice(&IV);
        v[12] ^= self.counter as u64;
        v[13] ^= (self.counter >> 64) as u64;
        if last {
            v[14] = !v[14];
        }
        for s in SIGMA.iter().take(self.rounds) {
            mix(&mut v, 0, 4, 8, 12, m[s[0]], m[s[1]]);
            mix(&mut v, 1, 5, 9, 13, m[s[2]], m[s[3]]);
            mix(&mut v, 2, 6, 10, 14, m[s[4]], m[s[5]]);
            mix(&mut v, 3, 7, 11, 15, m[s[6]], m[s[7]]);
            mix(&mut v, 0, 5, 10, 15, m[s[8]], m[s[9]]);
            mix(&mut v, 1, 6, 11, 12, m[s[10]], m[s[11]]);
            mix(&mut v, 2, 7, 8, 13, m[s[12]], m[s[13]]);
            mix(&mut v, 3, 4, 9, 14, m[s[14]], m[s[15]]);
        }
        for i in 0..8 {
            self.h[i] ^= v[i] ^ v[i + 8];
        }
    }
}

/// Full Blake2b-256 over the concatenation of `parts`.
pub fn hash256(parts: &[&[u8]]) -> [u8; 32] {
    let mut state = Blake2b::new(32, FULL_ROUNDS);
    for part in parts {
        state.update(part);
    }
    let mut out = [0u8; 32];
    state.finalize_into(&mut out);
    out
}

/// Full Blake2b-512 over the concatenation of `parts`.
pub fn hash512(parts: &[&[u8]]) -> [u8; 64] {
    let mut state = Blake2b::new(64, FULL_ROUNDS);
    for part in parts {
        state.update(part);
    }
    let mut out = [0u8; 64];
    state.finalize_into(&mut out);
    out
}

/// 4-round Blake2b with a 128-bit digest over the concatenation of `parts`.
pub fn tree_hash(parts: &[&[u8]]) -> [u8; 16] {
    let mut state = Blake2b::new(16, TREE_ROUNDS);
    for part in parts {
        state.update(part);
    }
    let mut out = [0u8; 16];
    state.finalize_into(&mut out);
    out
}

/// Variable-length expansion `H'` producing exactly 1024 bytes.
///
/// `V_0 = Blake2b-512(le32(1024) || parts)`, `V_k = Blake2b-512(V_{k-1})`; the
/// output is the first 32 bytes of `V_0..V_29` followed by all of `V_30`.
pub fn expand_1024(parts: &[&[u8]]) -> [u8; 1024] {
    let mut out = [0u8; 1024];
    let mut state = Blake2b::new(64, FULL_ROUNDS);
    state.update(&1024u32.to_le_bytes());
    for part in parts {
        state.update(part);
    }
    let mut v = [0u8; 64];
    state.finalize_into(&mut v);
    for k in 0..30 {
        out[k * 32..k * 32 + 32].copy_from_slice(&v[..32]);
        v = hash512(&[&v]);
    }
    out[960..].copy_from_slice(&v);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(bytes: &[u8]) -> String {
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    #[test]
    fn rfc7693_abc_vector() {
        assert_eq!(
            hex(&hash512(&[b"abc"])),
            "ba80a53f981c4d0d6a2797b69f12f6e94c212f14685ac4b74b12bb6fdbffa2d1\
             7d87c5392aab792dc252d5de4533cc9518d38aa8dbf1925ab92386edd4009923"
        );
    }

    #[test]
    fn split_updates_match_one_shot() {
        let data: Vec<u8> = (0..1000u32).map(|i| (i * 7 + 3) as u8).collect();
        for split in [0, 1, 127, 128, 129, 256, 999, 1000] {
            assert_eq!(hash256(&[&data[..split], &data[split..]]), hash256(&[&data]));
        }
    }

    #[test]
    fn reduced_rounds_change_the_output() {
        let mut full = Blake2b::new(16, FULL_ROUNDS);
        full.update(b"x");
        let mut a = [0u8; 16];
        full.finalize_into(&mut a);
        assert_ne!(a, tree_hash(&[b"x"]));
    }

    #[test]
    fn expansion_tail_is_a_full_digest() {
        let out = expand_1024(&[b"seed"]);
        let mut v = {
            let mut s = Blake2b::new(64, FULL_ROUNDS);
            s.update(&1024u32.to_le_bytes()).update(b"seed");
            let mut v = [0u8; 64];
            s.finalize_into(&mut v);
            v
        };
        assert_eq!(&out[..32], &v[..32]);
        for _ in 0..30 {
            v = hash512(&[&v]);
        }
        assert_eq!(&out[960..], &v[..]);
    }
}
