//! 128-EEA2 confidentiality (AES-128 in CTR mode, NIST SP 800-38A) and the
//! EEA0 null ciphering algorithm.
//!
//! The first counter block packs `COUNT ‖ BEARER ‖ DIRECTION ‖ 0^26` into
//! its high 64 bits and zeros into the low 64; subsequent blocks increment
//! the low half mod 2^64. Data is ciphered by XOR with the keystream, so a
//! single operation performs both encryption and decryption. Each call is
//! stateless: COUNT management belongs to the PDU layer.

use crate::aes::{AesKey128, Block128, KeySchedule};
use crate::bits::BitString;
use crate::params::{pack_frame_header, Bearer, Direction};

/// The (key, COUNT, BEARER, DIRECTION) tuple parameterizing one ciphering
/// invocation. The key schedule is expanded once at construction; the
/// context is immutable afterwards.
#[derive(Clone)]
pub struct CipherContext {
    schedule: KeySchedule,
    count: u32,
    bearer: Bearer,
    direction: Direction,
}

impl CipherContext {
    pub fn new(key: &AesKey128, count: u32, bearer: Bearer, direction: Direction) -> Self {
        CipherContext {
            schedule: KeySchedule::expand(key),
            count,
            bearer,
            direction,
        }
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn bearer(&self) -> Bearer {
        self.bearer
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// The first counter block T1: `COUNT ‖ BEARER ‖ DIRECTION ‖ 0^26 ‖ 0^64`.
    pub fn initial_counter(&self) -> CounterBlock {
        let mut bytes = [0u8; 16];
        bytes[..8].copy_from_slice(&pack_frame_header(self.count, self.bearer, self.direction));
        CounterBlock(Block128::from_bytes(bytes))
    }

    /// Infinite sequence of enciphered counter blocks, generated on demand.
    pub fn keystream_blocks(&self) -> KeystreamBlocks<'_> {
        KeystreamBlocks {
            schedule: &self.schedule,
            counter: self.initial_counter(),
        }
    }

    /// Bulk-generates the first `len_bits` bits of keystream, consuming
    /// `ceil(len_bits / 128)` counter blocks. Stream ciphering permits
    /// producing the mask before the data arrives; this is that entry point.
    pub fn keystream(&self, len_bits: usize) -> BitString {
        let mut bytes = Vec::with_capacity(len_bits.div_ceil(8));
        for block in self.keystream_blocks().take(len_bits.div_ceil(128)) {
            bytes.extend_from_slice(block.as_bytes());
        }
        BitString::from_bits_masked(bytes, len_bits)
    }

    /// Applies 128-EEA2 to `data`: XOR with the keystream, slack bits
    /// re-zeroed. The same call enciphers and deciphers.
    pub fn apply_keystream(&self, data: &BitString) -> BitString {
        let mut out = Vec::with_capacity(data.as_bytes().len());
        let mut blocks = self.keystream_blocks();
        for chunk in data.as_bytes().chunks(16) {
            let ks = blocks.next().expect("keystream is infinite");
            out.extend(chunk.iter().zip(ks.as_bytes()).map(|(d, k)| d ^ k));
        }
        BitString::from_bits_masked(out, data.len_bits())
    }
}

/// EEA0 null ciphering: behaves as XOR with an all-zero keystream of
/// LENGTH bits, i.e. returns the message unchanged.
pub fn apply_eea0(data: &BitString) -> BitString {
    data.clone()
}

/// A CTR counter block. The high 64 bits are fixed per invocation; the low
/// 64 bits form the block counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterBlock(Block128);

impl CounterBlock {
    pub fn block(&self) -> Block128 {
        self.0
    }

    pub fn high_half(&self) -> [u8; 8] {
        self.0.as_bytes()[..8].try_into().unwrap()
    }

    /// The standard incrementing function: low 64 bits + 1 mod 2^64, high
    /// 64 bits untouched.
    pub fn increment(self) -> CounterBlock {
        let mut bytes = self.0.to_bytes();
        let low = u64::from_be_bytes(bytes[8..].try_into().unwrap());
        bytes[8..].copy_from_slice(&low.wrapping_add(1).to_be_bytes());
        CounterBlock(Block128::from_bytes(bytes))
    }
}

/// Iterator of keystream blocks: AES of T1, T2, ...
pub struct KeystreamBlocks<'a> {
    schedule: &'a KeySchedule,
    counter: CounterBlock,
}

impl Iterator for KeystreamBlocks<'_> {
    type Item = Block128;

    fn next(&mut self) -> Option<Block128> {
        let out = self.schedule.encrypt_block(self.counter.block());
        self.counter = self.counter.increment();
        Some(out)
    }
}
