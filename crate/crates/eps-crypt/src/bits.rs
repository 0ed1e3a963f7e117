//! Bit-exact message buffers.
//!
//! LTE security algorithms are specified over bit strings whose LENGTH is
//! not necessarily a multiple of eight. [`BitString`] stores such a message
//! as a byte buffer plus an exact bit length, with bit 0 being the most
//! significant bit of byte 0 (the 3GPP numbering). Values are kept in
//! normalized form: the buffer holds exactly `ceil(len_bits / 8)` bytes and
//! every slack bit past `len_bits` in the final byte is zero, so structural
//! equality is semantic equality.
//!
//! The text form is lowercase hex with a mandatory `/bits` suffix
//! (`d3c5…a6dc/383`); hex digits are nibbles, so odd digit counts are legal.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitStringError {
    #[error("invalid hex digit {ch:?} at position {position}")]
    InvalidHexDigit { position: usize, ch: char },
    #[error("invalid bit-length suffix {0:?}")]
    InvalidLengthSuffix(String),
    #[error("bit length {bits} exceeds the {digits} supplied hex digits")]
    LengthExceedsDigits { bits: usize, digits: usize },
    #[error("buffer of {bytes} bytes cannot hold exactly {bits} bits")]
    LengthMismatch { bits: usize, bytes: usize },
    #[error("bits past the stated length are not zero")]
    NonzeroSlackBits,
}

/// A message of an exact bit length, normalized (zero slack bits).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len_bits: usize,
}

const fn byte_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

/// Mask with the top `sig` bits of a byte set (`sig` in 0..=8).
const fn high_mask(sig: usize) -> u8 {
    if sig == 0 {
        0
    } else {
        0xffu8 << (8 - sig)
    }
}

impl BitString {
    pub fn empty() -> Self {
        BitString {
            bytes: Vec::new(),
            len_bits: 0,
        }
    }

    /// A byte-aligned message; the bit length is eight times the byte count.
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        let bytes = bytes.into();
        let len_bits = bytes.len() * 8;
        BitString { bytes, len_bits }
    }

    /// Builds a message of exactly `len_bits` bits. The buffer must already
    /// be in normalized form: exactly `ceil(len_bits / 8)` bytes with zero
    /// slack bits. Rejecting nonzero slack instead of masking it keeps
    /// transcription errors visible.
    pub fn from_bits(bytes: impl Into<Vec<u8>>, len_bits: usize) -> Result<Self, BitStringError> {
        let bytes = bytes.into();
        if bytes.len() != byte_len(len_bits) {
            return Err(BitStringError::LengthMismatch {
                bits: len_bits,
                bytes: bytes.len(),
            });
        }
        if !len_bits.is_multiple_of(8) {
            let last = bytes[bytes.len() - 1];
            if last & !high_mask(len_bits % 8) != 0 {
                return Err(BitStringError::NonzeroSlackBits);
            }
        }
        Ok(BitString { bytes, len_bits })
    }

    /// Builds a message of `len_bits` bits from an arbitrarily sized buffer,
    /// truncating or zero-extending to the normalized byte count and zeroing
    /// slack bits. Used where the producer controls the surplus (keystream
    /// truncation, XOR output).
    pub fn from_bits_masked(bytes: impl Into<Vec<u8>>, len_bits: usize) -> Self {
        let mut bytes = bytes.into();
        bytes.resize(byte_len(len_bits), 0);
        if !len_bits.is_multiple_of(8) {
            let last = bytes.len() - 1;
            bytes[last] &= high_mask(len_bits % 8);
        }
        BitString { bytes, len_bits }
    }

    pub fn len_bits(&self) -> usize {
        self.len_bits
    }

    pub fn is_empty(&self) -> bool {
        self.len_bits == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Bit `index`, with bit 0 the most significant bit of byte 0.
    pub fn bit(&self, index: usize) -> bool {
        assert!(
            index < self.len_bits,
            "bit index {index} out of range {}",
            self.len_bits
        );
        self.bytes[index / 8] >> (7 - index % 8) & 1 == 1
    }

    pub fn flip_bit(&mut self, index: usize) {
        assert!(
            index < self.len_bits,
            "bit index {index} out of range {}",
            self.len_bits
        );
        self.bytes[index / 8] ^= 1 << (7 - index % 8);
    }

    /// Bitwise XOR of two messages of identical bit length.
    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len_bits, other.len_bits, "xor of unequal bit lengths");
        let bytes: Vec<u8> = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        // equal lengths and zero slack on both sides keep the result normalized
        BitString {
            bytes,
            len_bits: self.len_bits,
        }
    }

    /// `self` followed by `other`, at the bit level.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = Writer::with_capacity(self.len_bits + other.len_bits);
        out.push_str(self);
        out.push_str(other);
        out.finish()
    }

    /// Splits into the first `at` bits and the remainder.
    pub fn split_at_bit(&self, at: usize) -> (BitString, BitString) {
        assert!(
            at <= self.len_bits,
            "split index {at} out of range {}",
            self.len_bits
        );
        let mut head = Writer::with_capacity(at);
        let mut tail = Writer::with_capacity(self.len_bits - at);
        for i in 0..at {
            head.push_bit(self.bit(i));
        }
        for i in at..self.len_bits {
            tail.push_bit(self.bit(i));
        }
        (head.finish(), tail.finish())
    }

    /// Parses `hexdigits[/bits]`. Without a suffix the bit length is four
    /// times the digit count. With a suffix, everything past the stated
    /// length must be zero; surplus digits are then dropped.
    pub fn parse_hex(text: &str) -> Result<Self, BitStringError> {
        let (digits, suffix) = match text.split_once('/') {
            Some((d, s)) => (d, Some(s)),
            None => (text, None),
        };
        let mut nibbles = Vec::with_capacity(digits.len());
        for (position, ch) in digits.char_indices() {
            let nib = ch
                .to_digit(16)
                .ok_or(BitStringError::InvalidHexDigit { position, ch })?;
            nibbles.push(nib as u8);
        }
        let len_bits = match suffix {
            None => nibbles.len() * 4,
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| BitStringError::InvalidLengthSuffix(s.to_string()))?,
        };
        if len_bits > nibbles.len() * 4 {
            return Err(BitStringError::LengthExceedsDigits {
                bits: len_bits,
                digits: nibbles.len(),
            });
        }
        let mut bytes = vec![0u8; nibbles.len().div_ceil(2)];
        for (i, nib) in nibbles.iter().enumerate() {
            bytes[i / 2] |= nib << (if i % 2 == 0 { 4 } else { 0 });
        }
        // everything past len_bits must already be zero
        let kept = byte_len(len_bits);
        if bytes[kept..].iter().any(|&b| b != 0) {
            return Err(BitStringError::NonzeroSlackBits);
        }
        bytes.truncate(kept);
        Self::from_bits(bytes, len_bits)
    }

    /// Lowercase hex with the mandatory `/bits` suffix; `ceil(bits / 4)`
    /// digits, so non-byte-aligned values round-trip exactly.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len_bits.div_ceil(4);
        let mut out = String::with_capacity(nibbles + 12);
        for i in 0..nibbles {
            let byte = self.bytes[i / 2];
            let nib = if i % 2 == 0 { byte >> 4 } else { byte & 0x0f };
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        out.push('/');
        out.push_str(&self.len_bits.to_string());
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixedHexError {
    #[error("expected exactly {expected} hex digits, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid hex digit {ch:?} at position {position}")]
    InvalidHexDigit { position: usize, ch: char },
}

/// Parses exactly `2 * N` hex digits into `N` bytes.
pub(crate) fn parse_fixed_hex<const N: usize>(text: &str) -> Result<[u8; N], FixedHexError> {
    if text.chars().count() != 2 * N {
        return Err(FixedHexError::WrongLength {
            expected: 2 * N,
            got: text.chars().count(),
        });
    }
    let mut out = [0u8; N];
    for (position, ch) in text.char_indices() {
        let nib = ch
            .to_digit(16)
            .ok_or(FixedHexError::InvalidHexDigit { position, ch })? as u8;
        out[position / 2] |= nib << (if position % 2 == 0 { 4 } else { 0 });
    }
    Ok(out)
}

pub(crate) fn to_lower_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
pub(crate) fn random_bits(rng: &mut impl rand::Rng, len_bits: usize) -> BitString {
    let mut bytes = vec![0u8; len_bits.div_ceil(8)];
    rng.fill(&mut bytes[..]);
    BitString::from_bits_masked(bytes, len_bits)
}

/// MSB-first bit accumulator for concat/split.
struct Writer {
    bytes: Vec<u8>,
    len_bits: usize,
}

impl Writer {
    fn with_capacity(bits: usize) -> Self {
        Writer {
            bytes: Vec::with_capacity(byte_len(bits)),
            len_bits: 0,
        }
    }

    fn push_bit(&mut self, bit: bool) {
        if self.len_bits.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 1 << (7 - self.len_bits % 8);
        }
        self.len_bits += 1;
    }

    fn push_str(&mut self, s: &BitString) {
        if self.len_bits.is_multiple_of(8) {
            // byte-aligned fast path
            self.bytes.extend_from_slice(s.as_bytes());
            self.len_bits += s.len_bits();
        } else {
            for i in 0..s.len_bits() {
                self.push_bit(s.bit(i));
            }
        }
    }

    fn finish(self) -> BitString {
        BitString {
            bytes: self.bytes,
            len_bits: self.len_bits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_form_is_enforced() {
        assert!(BitString::from_bits(vec![0xde, 0xad], 16).is_ok());
        // 13 bits need exactly 2 bytes
        assert_eq!(
            BitString::from_bits(vec![0xde], 13),
            Err(BitStringError::LengthMismatch { bits: 13, bytes: 1 })
        );
        // 0xad = 1010_1101: bits 13..15 are 101, not slack-clean
        assert_eq!(
            BitString::from_bits(vec![0xde, 0xad], 13),
            Err(BitStringError::NonzeroSlackBits)
        );
        assert!(BitString::from_bits(vec![0xde, 0xa8], 13).is_ok());
    }

    #[test]
    fn masked_constructor_zeroes_slack() {
        let s = BitString::from_bits_masked(vec![0xde, 0xad, 0xff], 13);
        assert_eq!(s.as_bytes(), &[0xde, 0xa8]);
        assert_eq!(s.len_bits(), 13);
    }

    #[test]
    fn bit_numbering_is_msb_first() {
        let s = BitString::from_bytes(vec![0x80, 0x01]);
        assert!(s.bit(0));
        assert!(!s.bit(1));
        assert!(s.bit(15));
    }

    #[test]
    fn flip_bit_round_trips() {
        let mut s = BitString::from_bytes(vec![0x00, 0x00]);
        s.flip_bit(9);
        assert_eq!(s.as_bytes(), &[0x00, 0x40]);
        s.flip_bit(9);
        assert_eq!(s.as_bytes(), &[0x00, 0x00]);
    }

    #[test]
    fn hex_round_trip() {
        for text in [
            "/0",
            "deadbeef/32",
            "abc/12",
            "deadbee8/29",
            "0123456789abcdef0123456789abcdef8/129",
        ] {
            let s = BitString::parse_hex(text).unwrap();
            assert_eq!(s.to_hex(), text);
        }
        // no suffix: four bits per digit
        let s = BitString::parse_hex("abc").unwrap();
        assert_eq!(s.len_bits(), 12);
        assert_eq!(s.to_hex(), "abc/12");
    }

    #[test]
    fn hex_parse_rejects_bad_input() {
        assert!(matches!(
            BitString::parse_hex("dexd"),
            Err(BitStringError::InvalidHexDigit {
                position: 2,
                ch: 'x'
            })
        ));
        assert!(matches!(
            BitString::parse_hex("ab/x"),
            Err(BitStringError::InvalidLengthSuffix(_))
        ));
        assert!(matches!(
            BitString::parse_hex("ab/9"),
            Err(BitStringError::LengthExceedsDigits { bits: 9, digits: 2 })
        ));
        // stated length 16 but a third nonzero byte follows
        assert_eq!(
            BitString::parse_hex("deadbe/16"),
            Err(BitStringError::NonzeroSlackBits)
        );
        assert_eq!(
            BitString::parse_hex("deadbeef/29"),
            Err(BitStringError::NonzeroSlackBits)
        );
        // zero surplus is legal and dropped
        let s = BitString::parse_hex("dead00/16").unwrap();
        assert_eq!(s.to_hex(), "dead/16");
    }

    #[test]
    fn xor_is_an_involution() {
        let a = BitString::parse_hex("deadbee8/29").unwrap();
        let b = BitString::parse_hex("12345678/29").unwrap();
        assert_eq!(a.xor(&b).xor(&b), a);
        assert_eq!(a.xor(&a).as_bytes(), &[0, 0, 0, 0]);
    }

    #[test]
    fn concat_then_split_round_trips() {
        let a = BitString::parse_hex("ab4/11").unwrap();
        let b = BitString::parse_hex("deadbee8/29").unwrap();
        let joined = a.concat(&b);
        assert_eq!(joined.len_bits(), 40);
        let (head, tail) = joined.split_at_bit(11);
        assert_eq!(head, a);
        assert_eq!(tail, b);
    }

    #[test]
    fn concat_with_empty_is_identity() {
        let a = BitString::parse_hex("deadbee8/29").unwrap();
        assert_eq!(a.concat(&BitString::empty()), a);
        assert_eq!(BitString::empty().concat(&a), a);
    }

    #[test]
    fn random_concat_split_round_trips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let la = rng.gen_range(0..64);
            let lb = rng.gen_range(0..64);
            let a = random_bits(&mut rng, la);
            let b = random_bits(&mut rng, lb);
            let joined = a.concat(&b);
            assert_eq!(joined.len_bits(), la + lb);
            let (h, t) = joined.split_at_bit(la);
            assert_eq!((h, t), (a.clone(), b));
            // hex round-trip on the joined value
            assert_eq!(BitString::parse_hex(&joined.to_hex()).unwrap(), joined);
        }
    }
}
