use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockDecrypt, BlockEncrypt, KeyInit};
use aes::Aes256;
use serde::{Deserialize, Serialize};

use crate::argon2m::BLOCK_BYTES;

/// A 128-bit block cipher keyed with 32 bytes.
pub trait BlockCipher: Send + Sync {
    fn encrypt(&self, block: &mut [u8; 16]);
    fn decrypt(&self, block: &mut [u8; 16]);
}

/// Cipher identifiers stored in containers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CipherId {
    Aes256 = 1,
}

impl CipherId {
    pub fn from_u8(v: u8) -> Option<Self> {
        (v == 1).then_some(Self::Aes256)
    }

    pub fn keyed(self, key: &[u8; 32]) -> Box<dyn BlockCipher> {
        match self {
            Self::Aes256 => Box::new(Aes(Aes256::new(GenericArray::from_slice(key)))),
        }
    }
}

struct Aes(Aes256);

impl BlockCipher for Aes {
    fn encrypt(&self, block: &mut [u8; 16]) {
        self.0.encrypt_block(GenericArray::from_mut_slice(block));
    }

    fn decrypt(&self, block: &mut [u8; 16]) {
        self.0.decrypt_block(GenericArray::from_mut_slice(block));
    }
}

fn sub_blocks(data: &mut [u8]) -> impl Iterator<Item = &mut [u8; 16]> {
    data.chunks_exact_mut(16).map(|c| c.try_into().unwrap())
}

pub(crate) fn ecb_encrypt(cipher: &dyn BlockCipher, data: &mut [u8]) {
    sub_blocks(data).for_each(|b| cipher.encrypt(b));
}

pub(crate) fn ecb_decrypt(cipher: &dyn BlockCipher, data: &mut [u8]) {
    sub_blocks(data).for_each(|b| cipher.decrypt(b));
}

/// CBC encryption of one 1024-byte block, continuing the chain in `chain`.
pub(crate) fn cbc_encrypt(cipher: &dyn BlockCipher, chain: &mut [u8; 16], data: &mut [u8; BLOCK_BYTES]) {
    for b in sub_blocks(data) {
        b.iter_mut().zip(chain.iter()).for_each(|(x, c)| *x ^= c);
        cipher.encrypt(b);
        *chain = *b;
    }
}

pub(crate) fn cbc_decrypt(cipher: &dyn BlockCipher, chain: &mut [u8; 16], data: &mut [u8; BLOCK_BYTES]) {
    for b in sub_blocks(data) {
        let ct = *b;
        cipher.decrypt(b);
        b.iter_mut().zip(chain.iter()).for_each(|(x, c)| *x ^= c);
        *chain = ct;
    }
}
