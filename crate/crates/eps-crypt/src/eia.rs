//! 128-EIA2 integrity (AES-128 in CMAC mode, NIST SP 800-38B) and the EIA0
//! null integrity algorithm.
//!
//! The CMAC input is `COUNT ‖ BEARER ‖ DIRECTION ‖ 0^26 ‖ MESSAGE`, so the
//! frame parameters are authenticated together with the message. The final
//! chaining value is truncated to the 32-bit MAC-I.

use std::fmt;

use crate::aes::{AesKey128, Block128, KeySchedule};
use crate::bits::{parse_fixed_hex, to_lower_hex, BitString, FixedHexError};
use crate::params::{pack_frame_header, Bearer, Direction};

/// R_128 = 0^120 10000111, the subkey-derivation constant for a 128-bit
/// block cipher.
const R128_LAST_BYTE: u8 = 0x87;

/// The CMAC subkeys K1 and K2, fixed for any invocation with a given key.
/// Precomputed once and stored with the key for repeated use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subkeys {
    pub k1: Block128,
    pub k2: Block128,
}

impl Subkeys {
    /// L = AES_K(0^128); K1 = L≪1, XORed with R_128 when MSB(L) = 1;
    /// K2 derived from K1 the same way.
    pub fn derive(schedule: &KeySchedule) -> Subkeys {
        let l = schedule.encrypt_block(Block128::ZERO);
        let k1 = shift_subkey(l);
        let k2 = shift_subkey(k1);
        Subkeys { k1, k2 }
    }
}

fn shift_subkey(value: Block128) -> Block128 {
    let (shifted, dropped_msb) = value.shl1();
    if dropped_msb {
        let mut bytes = shifted.to_bytes();
        bytes[15] ^= R128_LAST_BYTE;
        Block128::from_bytes(bytes)
    } else {
        shifted
    }
}

/// The 32-bit MAC-I / NAS-MAC, MACT[0] most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacTag32([u8; 4]);

impl MacTag32 {
    pub const ZERO: MacTag32 = MacTag32([0; 4]);

    pub fn from_bytes(bytes: [u8; 4]) -> Self {
        MacTag32(bytes)
    }

    /// Parses exactly 8 hex digits.
    pub fn from_hex(text: &str) -> Result<Self, FixedHexError> {
        parse_fixed_hex(text).map(MacTag32)
    }

    pub fn as_bytes(&self) -> &[u8; 4] {
        &self.0
    }

    pub fn to_hex(self) -> String {
        to_lower_hex(&self.0)
    }

    /// Fixed-duration comparison: every bit is examined regardless of where
    /// the first mismatch sits, so the verdict leaks nothing through timing.
    pub fn ct_eq(&self, other: &MacTag32) -> bool {
        let mut diff = 0u8;
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            diff |= a ^ b;
        }
        diff == 0
    }
}

impl fmt::Display for MacTag32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// The (key, COUNT, BEARER, DIRECTION) tuple parameterizing one integrity
/// invocation, with the key schedule and subkeys cached at construction.
#[derive(Clone)]
pub struct IntegrityContext {
    schedule: KeySchedule,
    subkeys: Subkeys,
    count: u32,
    bearer: Bearer,
    direction: Direction,
}

impl IntegrityContext {
    pub fn new(key: &AesKey128, count: u32, bearer: Bearer, direction: Direction) -> Self {
        let schedule = KeySchedule::expand(key);
        let subkeys = Subkeys::derive(&schedule);
        IntegrityContext {
            schedule,
            subkeys,
            count,
            bearer,
            direction,
        }
    }

    pub fn subkeys(&self) -> &Subkeys {
        &self.subkeys
    }

    /// The CMAC input M of Mlen = LENGTH + 64 bits:
    /// `COUNT ‖ BEARER ‖ DIRECTION ‖ 0^26 ‖ MESSAGE`.
    pub fn build_mac_input(&self, message: &BitString) -> BitString {
        let header = BitString::from_bytes(
            pack_frame_header(self.count, self.bearer, self.direction).to_vec(),
        );
        header.concat(message)
    }

    /// MAC-I over the message: MSB_32 of the final CMAC chaining value.
    pub fn generate_mac(&self, message: &BitString) -> MacTag32 {
        let full = cmac(
            &self.schedule,
            &self.subkeys,
            &self.build_mac_input(message),
        );
        MacTag32(full.as_bytes()[..4].try_into().unwrap())
    }

    /// Like [`generate_mac`](Self::generate_mac), additionally recording
    /// every intermediate of the computation.
    pub fn generate_mac_traced(&self, message: &BitString) -> (MacTag32, MacTrace) {
        let m = self.build_mac_input(message);
        let layout = BlockLayout::of(&m);
        let l = self.schedule.encrypt_block(Block128::ZERO);

        let mut m_blocks = Vec::with_capacity(layout.n);
        let mut c_blocks = vec![Block128::ZERO];
        let mut chain = Block128::ZERO;
        for i in 0..layout.n {
            let block = layout.chained_block(&m, &self.subkeys, i);
            chain = self.schedule.encrypt_block(chain.xor(block));
            m_blocks.push(block);
            c_blocks.push(chain);
        }
        let tag = MacTag32(chain.as_bytes()[..4].try_into().unwrap());
        let trace = MacTrace {
            mlen: m.len_bits(),
            l,
            k1: self.subkeys.k1,
            k2: self.subkeys.k2,
            n: layout.n,
            mn_star: layout.final_block_unpadded(&m),
            mn: m_blocks[layout.n - 1],
            m_blocks,
            c_blocks,
            tag,
        };
        (tag, trace)
    }

    /// Recomputes XMAC-I and compares it to the received MAC-I. The verdict
    /// is a comparison outcome, not an error.
    #[must_use]
    pub fn verify_mac(&self, message: &BitString, received: &MacTag32) -> bool {
        self.generate_mac(message).ct_eq(received)
    }
}

/// EIA0 null integrity: the all-zero 32-bit tag regardless of inputs.
/// Its use is restricted to unauthenticated emergency calls; the PDU layer
/// enforces that at configuration time.
pub fn generate_mac_eia0(_ctx: &IntegrityContext, _message: &BitString) -> MacTag32 {
    MacTag32::ZERO
}

/// How an Mlen-bit input splits into CMAC blocks.
struct BlockLayout {
    n: usize,
    /// Bits in the final block, 0..=128 (0 only when Mlen = 0).
    last_bits: usize,
}

impl BlockLayout {
    fn of(m: &BitString) -> BlockLayout {
        let mlen = m.len_bits();
        let n = if mlen == 0 { 1 } else { mlen.div_ceil(128) };
        BlockLayout {
            n,
            last_bits: mlen - 128 * (n - 1),
        }
    }

    fn is_final_complete(&self) -> bool {
        self.last_bits == 128
    }

    /// Block `i` (0-based) as fed to the CBC chain: raw for i < n-1, masked
    /// with K1 (complete) or padded with `1 ‖ 0^j` and masked with K2
    /// (incomplete) for the final block.
    fn chained_block(&self, m: &BitString, subkeys: &Subkeys, i: usize) -> Block128 {
        if i + 1 < self.n {
            return self.raw_block(m, i);
        }
        if self.is_final_complete() {
            subkeys.k1.xor(self.raw_block(m, i))
        } else {
            let mut bytes = self.final_block_unpadded(m).to_bytes();
            bytes[self.last_bits / 8] |= 0x80 >> (self.last_bits % 8);
            subkeys.k2.xor(Block128::from_bytes(bytes))
        }
    }

    fn raw_block(&self, m: &BitString, i: usize) -> Block128 {
        Block128::from_bytes(m.as_bytes()[16 * i..16 * (i + 1)].try_into().unwrap())
    }

    /// The final block's significant bits zero-extended to 128, before the
    /// padding bit — the Mn* form conformance traces display.
    fn final_block_unpadded(&self, m: &BitString) -> Block128 {
        let mut bytes = [0u8; 16];
        let tail = &m.as_bytes()[16 * (self.n - 1)..];
        bytes[..tail.len()].copy_from_slice(tail);
        Block128::from_bytes(bytes)
    }
}

/// CMAC over an arbitrary bit string per NIST SP 800-38B, returning the
/// full 128-bit final chaining value.
pub fn cmac(schedule: &KeySchedule, subkeys: &Subkeys, m: &BitString) -> Block128 {
    let layout = BlockLayout::of(m);
    let mut chain = Block128::ZERO;
    for i in 0..layout.n {
        chain = schedule.encrypt_block(chain.xor(layout.chained_block(m, subkeys, i)));
    }
    chain
}

/// Every intermediate of one MAC-I computation, for conformance traces.
#[derive(Debug, Clone)]
pub struct MacTrace {
    pub mlen: usize,
    pub l: Block128,
    pub k1: Block128,
    pub k2: Block128,
    pub n: usize,
    /// Final block zero-extended, before padding and subkey masking.
    pub mn_star: Block128,
    /// Final block as chained (subkey-masked, padded when incomplete).
    pub mn: Block128,
    /// M[1]..M[n] as chained.
    pub m_blocks: Vec<Block128>,
    /// C[0]..C[n].
    pub c_blocks: Vec<Block128>,
    pub tag: MacTag32,
}

impl MacTrace {
    /// Renders the trace in the two-halves-per-128-bit-value layout used by
    /// published conformance traces.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("Mlen = {}\n", self.mlen));
        out.push_str(&format!("L = {}\n", self.l.to_halves_hex()));
        out.push_str(&format!("K1 = {}\n", self.k1.to_halves_hex()));
        out.push_str(&format!("K2 = {}\n", self.k2.to_halves_hex()));
        out.push_str(&format!("n = {}\n", self.n));
        out.push_str(&format!("Mn* = {}\n", self.mn_star.to_halves_hex()));
        out.push_str(&format!("Mn = {}\n", self.mn.to_halves_hex()));
        out.push_str(&format!("C[0] = {}\n", self.c_blocks[0].to_halves_hex()));
        for i in 0..self.n {
            out.push_str(&format!(
                "M[{}] = {}\n",
                i + 1,
                self.m_blocks[i].to_halves_hex()
            ));
            out.push_str(&format!(
                "C[{}] = {}\n",
                i + 1,
                self.c_blocks[i + 1].to_halves_hex()
            ));
        }
        out.push_str(&format!("MAC-I = {}\n", self.tag.to_hex()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::bits::random_bits;
    use crate::eea::CipherContext;

    // 383-bit 128-EIA2 conformance vector (3GPP test data).
    const VEC_KEY: &str = "6832a65cff4473621ebdd4ba26a921fe";
    const VEC_COUNT: u32 = 0x36af6144;
    const VEC_BEARER: u8 = 0x18;
    const VEC_MESSAGE: &str = "d3c53839626820717765667620323837636240981ba6824c1bfb1ab485472029b71d808ce33e2cc3c0b5fc1f3de8a6dc/383";
    const VEC_MAC: &str = "f0668c1e";

    fn vec_ctx() -> IntegrityContext {
        IntegrityContext::new(
            &AesKey128::from_hex(VEC_KEY).unwrap(),
            VEC_COUNT,
            Bearer::new(VEC_BEARER).unwrap(),
            Direction::Uplink,
        )
    }

    fn vec_message() -> BitString {
        BitString::parse_hex(VEC_MESSAGE).unwrap()
    }

    fn random_ctx(rng: &mut ChaCha8Rng) -> IntegrityContext {
        let mut key = [0u8; 16];
        rng.fill(&mut key);
        IntegrityContext::new(
            &AesKey128::from_bytes(key),
            rng.gen(),
            Bearer::new(rng.gen_range(0..32)).unwrap(),
            if rng.gen() {
                Direction::Downlink
            } else {
                Direction::Uplink
            },
        )
    }

    #[test]
    fn subkeys_for_conformance_key() {
        let ctx = vec_ctx();
        assert_eq!(
            ctx.subkeys().k1.to_hex(),
            "ca0247870fc27fad1b17e1a148b02d8d"
        );
        assert_eq!(
            ctx.subkeys().k2.to_hex(),
            "94048f0e1f84ff5a362fc34291605b9d"
        );

        // L has MSB 1 here, so K1 = (L≪1) ⊕ R_128; on the last byte that is
        // (0x85 ≪ 1) ⊕ 0x87 = 0x8d.
        let schedule = KeySchedule::expand(&AesKey128::from_hex(VEC_KEY).unwrap());
        let l = schedule.encrypt_block(Block128::ZERO);
        assert!(l.msb());
        assert_eq!(l.as_bytes()[15], 0x85);
        assert_eq!(ctx.subkeys().k1.as_bytes()[15], 0x8d);
    }

    #[test]
    fn subkeys_when_l_has_zero_msb() {
        // under the all-zero key, L = 66e9... has MSB 0, so K1 is the plain
        // shift with no R_128 term
        let schedule = KeySchedule::expand(&AesKey128::from_bytes([0; 16]));
        let l = schedule.encrypt_block(Block128::ZERO);
        assert_eq!(l.to_hex(), "66e94bd4ef8a2c3b884cfa59ca342b2e");
        assert!(!l.msb());

        let subkeys = Subkeys::derive(&schedule);
        assert_eq!(subkeys.k1, l.shl1().0);
        assert_eq!(subkeys.k1.to_hex(), "cdd297a9df1458771099f4b39468565c");
        // K1 has MSB 1, so K2 takes the R_128 branch
        assert_eq!(subkeys.k2.to_hex(), "9ba52f53be28b0ee2133e96728d0ac3f");
    }

    #[test]
    fn subkey_shift_relation_holds_for_random_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut key = [0u8; 16];
            rng.fill(&mut key);
            let subkeys = Subkeys::derive(&KeySchedule::expand(&AesKey128::from_bytes(key)));
            let (shifted, msb) = subkeys.k1.shl1();
            let expected = if msb {
                let mut b = shifted.to_bytes();
                b[15] ^= R128_LAST_BYTE;
                Block128::from_bytes(b)
            } else {
                shifted
            };
            assert_eq!(subkeys.k2, expected);
        }
    }

    #[test]
    fn mac_input_construction() {
        let m = vec_ctx().build_mac_input(&vec_message());
        assert_eq!(m.len_bits(), 447);
        assert_eq!(
            &m.as_bytes()[..16],
            Block128::from_hex("36af6144c0000000d3c5383962682071")
                .unwrap()
                .as_bytes()
        );

        // empty message, all-zero context: M is the 64-bit header alone
        let ctx = IntegrityContext::new(
            &AesKey128::from_bytes([0; 16]),
            0,
            Bearer::new(0).unwrap(),
            Direction::Uplink,
        );
        let m = ctx.build_mac_input(&BitString::empty());
        assert_eq!(m.len_bits(), 64);
        assert_eq!(m.as_bytes(), &[0u8; 8]);
    }

    #[test]
    fn mac_input_header_matches_counter_block_high_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let mut key = [0u8; 16];
            rng.fill(&mut key);
            let key = AesKey128::from_bytes(key);
            let count = rng.gen();
            let bearer = Bearer::new(rng.gen_range(0..32)).unwrap();
            let dir = if rng.gen() {
                Direction::Downlink
            } else {
                Direction::Uplink
            };

            let len = rng.gen_range(0..256);
            let msg = random_bits(&mut rng, len);
            let m = IntegrityContext::new(&key, count, bearer, dir).build_mac_input(&msg);
            let t1 = CipherContext::new(&key, count, bearer, dir).initial_counter();
            assert_eq!(&m.as_bytes()[..8], &t1.high_half());
        }
    }

    #[test]
    fn conformance_vector_with_intermediates() {
        let (tag, trace) = vec_ctx().generate_mac_traced(&vec_message());
        assert_eq!(tag.to_hex(), VEC_MAC);

        assert_eq!(trace.mlen, 447);
        assert_eq!(trace.l.to_hex(), "e50123c387e13fd68d8bf0d0a4581685");
        assert_eq!(trace.n, 4);
        assert_eq!(trace.mn_star.to_hex(), "c0b5fc1f3de8a6dc0000000000000000");
        assert_eq!(trace.mn.to_hex(), "54b17311226c5987362fc34291605b9d");

        let expected_m = [
            "36af6144c0000000d3c5383962682071",
            "7765667620323837636240981ba6824c",
            "1bfb1ab485472029b71d808ce33e2cc3",
            "54b17311226c5987362fc34291605b9d",
        ];
        let expected_c = [
            "263dd98fbeccb69a428e92d421fbed9e",
            "1838cb78cb2d32dcec486c79d9007a19",
            "5ebf1009f663be7b683730724c20271f",
            "f0668c1e4197300b1243f83425d06c25",
        ];
        assert_eq!(trace.c_blocks[0], Block128::ZERO);
        for i in 0..4 {
            assert_eq!(trace.m_blocks[i].to_hex(), expected_m[i], "M[{}]", i + 1);
            assert_eq!(
                trace.c_blocks[i + 1].to_hex(),
                expected_c[i],
                "C[{}]",
                i + 1
            );
        }

        // the lean path agrees with the traced path
        assert_eq!(vec_ctx().generate_mac(&vec_message()), tag);
    }

    #[test]
    fn final_block_padding_bit_is_applied() {
        // K2 ⊕ M[4] recovers the padded final block: the 63 message bits
        // followed by the mandatory '1' at position 63
        let (_, trace) = vec_ctx().generate_mac_traced(&vec_message());
        let padded = trace.k2.xor(trace.mn);
        assert_eq!(padded.to_hex(), "c0b5fc1f3de8a6dd0000000000000000");
    }

    #[test]
    fn cmac_of_the_empty_string() {
        // Mlen = 0: n = 1 and the chain runs over K2 ⊕ (1 ‖ 0^127)
        let schedule = KeySchedule::expand(&AesKey128::from_hex(VEC_KEY).unwrap());
        let subkeys = Subkeys::derive(&schedule);
        let full = cmac(&schedule, &subkeys, &BitString::empty());
        assert_eq!(full.to_hex(), "4800eb05db28212b11898e5a31aeee0a");

        let by_hand = schedule.encrypt_block(
            subkeys
                .k2
                .xor(Block128::from_hex("80000000000000000000000000000000").unwrap()),
        );
        assert_eq!(full, by_hand);
    }

    #[test]
    fn empty_message_is_legal() {
        // M is then the 64-bit header alone: n = 1, incomplete-block path
        let ctx = IntegrityContext::new(
            &AesKey128::from_hex(VEC_KEY).unwrap(),
            0,
            Bearer::new(0).unwrap(),
            Direction::Uplink,
        );
        let (tag, trace) = ctx.generate_mac_traced(&BitString::empty());
        assert_eq!(trace.mlen, 64);
        assert_eq!(trace.n, 1);
        assert_eq!(tag.to_hex(), "5c1fc737");
    }

    #[test]
    fn complete_final_block_takes_the_k1_branch() {
        // 64-bit message makes Mlen exactly 128: one complete block, K1 mask.
        // Tag frozen from an independent computation; the same tuple appears
        // in published AES-CMAC integrity test data.
        let ctx = IntegrityContext::new(
            &AesKey128::from_hex("d3c5d592327fb11c4035c6680af8c6d1").unwrap(),
            0x398a59b4,
            Bearer::new(0x1a).unwrap(),
            Direction::Downlink,
        );
        let message = BitString::parse_hex("484583d5afe082ae").unwrap();
        let (tag, trace) = ctx.generate_mac_traced(&message);
        assert_eq!(tag.to_hex(), "b93787e6");
        assert_eq!(trace.n, 1);
        assert_eq!(trace.mn, ctx.subkeys().k1.xor(trace.mn_star));
    }

    #[test]
    fn multi_block_partial_tail() {
        // 129-bit message: Mlen = 193, two blocks, 65-bit tail
        let ctx = IntegrityContext::new(
            &AesKey128::from_hex(VEC_KEY).unwrap(),
            0xc0ffee00,
            Bearer::new(0x05).unwrap(),
            Direction::Downlink,
        );
        let message = BitString::parse_hex("0123456789abcdef0123456789abcdef8/129").unwrap();
        let (tag, trace) = ctx.generate_mac_traced(&message);
        assert_eq!(trace.n, 2);
        assert_eq!(tag.to_hex(), "5ae6cda9");
    }

    #[test]
    fn block_count_law() {
        let ctx = vec_ctx();
        for len in 0usize..=300 {
            let message = random_bits(&mut ChaCha8Rng::seed_from_u64(len as u64), len);
            let (_, trace) = ctx.generate_mac_traced(&message);
            let mlen = len + 64;
            assert_eq!(trace.n, std::cmp::max(1, mlen.div_ceil(128)));

            let complete = mlen % 128 == 0;
            if complete {
                assert_eq!(trace.mn, trace.k1.xor(trace.mn_star), "len {len}");
            } else {
                let mut padded = trace.mn_star.to_bytes();
                let tail_bits = mlen - 128 * (trace.n - 1);
                padded[tail_bits / 8] |= 0x80 >> (tail_bits % 8);
                assert_eq!(
                    trace.mn,
                    trace.k2.xor(Block128::from_bytes(padded)),
                    "len {len}"
                );
            }
        }
    }

    #[test]
    fn verify_accepts_only_the_right_tag() {
        let ctx = vec_ctx();
        let message = vec_message();
        assert!(ctx.verify_mac(&message, &MacTag32::from_hex(VEC_MAC).unwrap()));
        assert!(!ctx.verify_mac(&message, &MacTag32::from_hex("f0668c1f").unwrap()));

        // a single flipped message bit invalidates the stored tag
        let mut mutated = message.clone();
        mutated.flip_bit(0);
        assert!(!ctx.verify_mac(&mutated, &MacTag32::from_hex(VEC_MAC).unwrap()));
    }

    #[test]
    fn verdict_is_independent_of_mismatch_position() {
        let ctx = vec_ctx();
        let message = vec_message();
        let good = ctx.generate_mac(&message);
        for bit in [0usize, 7, 8, 15, 16, 31] {
            let mut bad = *good.as_bytes();
            bad[bit / 8] ^= 0x80 >> (bit % 8);
            assert!(!ctx.verify_mac(&message, &MacTag32::from_bytes(bad)));
        }
    }

    #[test]
    fn generate_verify_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let ctx = random_ctx(&mut rng);
            let len = rng.gen_range(0..=512);
            let message = random_bits(&mut rng, len);
            let tag = ctx.generate_mac(&message);
            assert!(ctx.verify_mac(&message, &tag));
        }
    }

    #[test]
    fn single_bit_changes_move_the_mac() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut unchanged = 0u32;
        for _ in 0..200 {
            let ctx = random_ctx(&mut rng);
            let len = rng.gen_range(1..=512);
            let message = random_bits(&mut rng, len);
            let original = ctx.generate_mac(&message);

            let mut mutated = message.clone();
            mutated.flip_bit(rng.gen_range(0..message.len_bits()));
            if ctx.generate_mac(&mutated) == original {
                unchanged += 1;
            }
        }
        // a 32-bit tag collides with probability ~2^-32 per trial
        assert_eq!(unchanged, 0);
    }

    #[test]
    fn eia0_always_returns_zero() {
        let ctx = vec_ctx();
        assert_eq!(generate_mac_eia0(&ctx, &vec_message()), MacTag32::ZERO);
        assert_eq!(generate_mac_eia0(&ctx, &BitString::empty()), MacTag32::ZERO);
        assert_eq!(
            generate_mac_eia0(&ctx, &BitString::parse_hex("deadbeef/32").unwrap()).to_hex(),
            "00000000"
        );
    }

    #[test]
    fn trace_renders_the_published_layout() {
        let (_, trace) = vec_ctx().generate_mac_traced(&vec_message());
        let text = trace.render();
        assert!(text.contains("L = e50123c387e13fd6 8d8bf0d0a4581685"));
        assert!(text.contains("K1 = ca0247870fc27fad 1b17e1a148b02d8d"));
        assert!(text.contains("K2 = 94048f0e1f84ff5a 362fc34291605b9d"));
        assert!(text.contains("MAC-I = f0668c1e"));
    }
}
