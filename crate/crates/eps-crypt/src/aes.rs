//! AES-128 forward block cipher per FIPS 197, the kernel under both
//! 128-EEA2 (CTR) and 128-EIA2 (CMAC).
//!
//! Only encryption is implemented: CTR and CMAC never invoke the inverse
//! cipher. The key schedule is exposed because conformance checks compare
//! individual round keys against the published expansion example. The S-box
//! is a precomputed table; constant-time hardening is out of scope for a
//! conformance tool.

use std::fmt;

use crate::bits::{parse_fixed_hex, to_lower_hex, FixedHexError};

/// A 128-bit AES cipher key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct AesKey128([u8; 16]);

impl AesKey128 {
    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        AesKey128(bytes)
    }

    /// Parses exactly 32 hex digits.
    pub fn from_hex(text: &str) -> Result<Self, FixedHexError> {
        parse_fixed_hex(text).map(AesKey128)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Debug for AesKey128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keys stay out of debug output
        f.write_str("AesKey128(..)")
    }
}

/// A 128-bit value with bit 0 the most significant bit of byte 0; the unit
/// of AES state, CTR counter blocks and CMAC chaining values.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block128([u8; 16]);

impl Block128 {
    pub const ZERO: Block128 = Block128([0; 16]);

    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        Block128(bytes)
    }

    /// Parses exactly 32 hex digits.
    pub fn from_hex(text: &str) -> Result<Self, FixedHexError> {
        parse_fixed_hex(text).map(Block128)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0
    }

    pub fn xor(self, other: Block128) -> Block128 {
        let mut out = [0u8; 16];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a ^ b;
        }
        Block128(out)
    }

    pub fn msb(self) -> bool {
        self.0[0] & 0x80 != 0
    }

    /// Shifts the whole 128-bit value left by one bit, inserting a zero
    /// least significant bit; returns the shifted value and the dropped MSB.
    pub fn shl1(self) -> (Block128, bool) {
        let mut out = [0u8; 16];
        let mut carry = 0u8;
        for i in (0..16).rev() {
            out[i] = (self.0[i] << 1) | carry;
            carry = self.0[i] >> 7;
        }
        (Block128(out), carry == 1)
    }

    pub fn to_hex(self) -> String {
        to_lower_hex(&self.0)
    }

    /// The two-halves display used for 128-bit trace values:
    /// 16 hex digits, a space, 16 hex digits.
    pub fn to_halves_hex(self) -> String {
        format!(
            "{} {}",
            to_lower_hex(&self.0[..8]),
            to_lower_hex(&self.0[8..])
        )
    }
}

impl fmt::Debug for Block128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block128({})", self.to_hex())
    }
}

impl fmt::Display for Block128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// Round constants for the key schedule, as the leading byte of each word.
const RCON: [u8; 10] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36];

/// The 11 round keys of the AES-128 key schedule. Immutable after
/// expansion; round key 0 is the cipher key itself.
#[derive(Clone)]
pub struct KeySchedule {
    round_keys: [Block128; 11],
}

impl KeySchedule {
    /// Expands a 128-bit key into 44 words / 11 round keys per FIPS 197 §5.2.
    pub fn expand(key: &AesKey128) -> KeySchedule {
        let mut w = [0u32; 44];
        for (i, chunk) in key.as_bytes().chunks_exact(4).enumerate() {
            w[i] = u32::from_be_bytes(chunk.try_into().unwrap());
        }
        for i in 4..44 {
            let mut t = w[i - 1];
            if i % 4 == 0 {
                t = sub_word(t.rotate_left(8)) ^ (u32::from(RCON[i / 4 - 1]) << 24);
            }
            w[i] = w[i - 4] ^ t;
        }
        let mut round_keys = [Block128::ZERO; 11];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            let mut bytes = [0u8; 16];
            for c in 0..4 {
                bytes[4 * c..4 * c + 4].copy_from_slice(&w[4 * r + c].to_be_bytes());
            }
            *rk = Block128::from_bytes(bytes);
        }
        KeySchedule { round_keys }
    }

    pub fn round_keys(&self) -> &[Block128; 11] {
        &self.round_keys
    }

    /// The AES-128 forward cipher: 10 rounds over a single 16-byte state.
    pub fn encrypt_block(&self, input: Block128) -> Block128 {
        let mut state = input.to_bytes();
        add_round_key(&mut state, &self.round_keys[0]);
        for round in 1..10 {
            sub_bytes(&mut state);
            shift_rows(&mut state);
            mix_columns(&mut state);
            add_round_key(&mut state, &self.round_keys[round]);
        }
        sub_bytes(&mut state);
        shift_rows(&mut state);
        add_round_key(&mut state, &self.round_keys[10]);
        Block128::from_bytes(state)
    }
}

fn sub_word(w: u32) -> u32 {
    let b = w.to_be_bytes();
    u32::from_be_bytes([
        SBOX[b[0] as usize],
        SBOX[b[1] as usize],
        SBOX[b[2] as usize],
        SBOX[b[3] as usize],
    ])
}

fn add_round_key(state: &mut [u8; 16], rk: &Block128) {
    for (s, k) in state.iter_mut().zip(rk.as_bytes()) {
        *s ^= k;
    }
}

fn sub_bytes(state: &mut [u8; 16]) {
    for s in state.iter_mut() {
        *s = SBOX[*s as usize];
    }
}

// state[4*col + row]; row r rotates left by r columns
fn shift_rows(state: &mut [u8; 16]) {
    let old = *state;
    for row in 1..4 {
        for col in 0..4 {
            state[4 * col + row] = old[4 * ((col + row) % 4) + row];
        }
    }
}

/// Multiplication by x in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
fn xtime(b: u8) -> u8 {
    (b << 1) ^ (if b & 0x80 != 0 { 0x1b } else { 0 })
}

fn mix_columns(state: &mut [u8; 16]) {
    for col in state.chunks_exact_mut(4) {
        let [a0, a1, a2, a3] = [col[0], col[1], col[2], col[3]];
        col[0] = xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3;
        col[1] = a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3;
        col[2] = a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3);
        col[3] = (xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3);
    }
}
