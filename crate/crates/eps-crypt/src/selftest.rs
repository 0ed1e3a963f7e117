//! Embedded self-test: the published conformance vectors, frozen regression
//! vectors, and the behavioral property suites at reduced sample counts.
//! The CLI `selftest` subcommand runs these; the full-size property runs
//! live in the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aes::{AesKey128, Block128, KeySchedule};
use crate::bits::BitString;
use crate::eea::{apply_eea0, CipherContext};
use crate::eia::{generate_mac_eia0, IntegrityContext, MacTag32, Subkeys};
use crate::link::{Scenario, Verdict};
use crate::params::{Bearer, Direction};
use crate::pdcp::{BearerConfig, KeyRole, RoleKey};
use crate::registry::{self, code, AlgoId, AlgoKind};

/// 383-bit 128-EIA2 conformance vector (3GPP test data).
pub const VECTOR_KEY: &str = "6832a65cff4473621ebdd4ba26a921fe";
pub const VECTOR_COUNT: u32 = 0x36af6144;
pub const VECTOR_BEARER: u8 = 0x18;
pub const VECTOR_MESSAGE: &str = "d3c53839626820717765667620323837636240981ba6824c1bfb1ab485472029b71d808ce33e2cc3c0b5fc1f3de8a6dc/383";
pub const VECTOR_MAC: &str = "f0668c1e";

/// The full intermediate trace for the vector above, in the two-halves
/// layout. Every line was verified against an independent implementation.
pub const VECTOR_TRACE: &str = "\
Mlen = 447
L = e50123c387e13fd6 8d8bf0d0a4581685
K1 = ca0247870fc27fad 1b17e1a148b02d8d
K2 = 94048f0e1f84ff5a 362fc34291605b9d
n = 4
Mn* = c0b5fc1f3de8a6dc 0000000000000000
Mn = 54b17311226c5987 362fc34291605b9d
C[0] = 0000000000000000 0000000000000000
M[1] = 36af6144c0000000 d3c5383962682071
C[1] = 263dd98fbeccb69a 428e92d421fbed9e
M[2] = 7765667620323837 636240981ba6824c
C[2] = 1838cb78cb2d32dc ec486c79d9007a19
M[3] = 1bfb1ab485472029 b71d808ce33e2cc3
C[3] = 5ebf1009f663be7b 683730724c20271f
M[4] = 54b17311226c5987 362fc34291605b9d
C[4] = f0668c1e4197300b 1243f83425d06c25
MAC-I = f0668c1e
";

/// One self-test item: a stable name and a pass/fail outcome.
pub struct SelfTestOutcome {
    pub name: &'static str,
    pub result: Result<(), String>,
}

type Item = (&'static str, fn() -> Result<(), String>);

const ITEMS: &[Item] = &[
    ("aes-fips197-c1", aes_fips197_c1),
    ("aes-fips197-appendix-b", aes_fips197_appendix_b),
    ("cmac-subkey-derivation", cmac_subkey_derivation),
    ("eia2-conformance-383bit", eia2_conformance_383bit),
    ("eia2-regression-64bit", eia2_regression_64bit),
    ("eia2-regression-129bit", eia2_regression_129bit),
    ("eia2-empty-message", eia2_empty_message),
    ("eea2-keystream-block", eea2_keystream_block),
    ("eea2-regression-253bit", eea2_regression_253bit),
    ("null-algorithm-semantics", null_algorithm_semantics),
    ("algo-registry", algo_registry),
    ("prop-ctr-involution", prop_ctr_involution),
    ("prop-keystream-linearity", prop_keystream_linearity),
    ("prop-mac-generate-verify", prop_mac_generate_verify),
    ("prop-mac-avalanche", prop_mac_avalanche),
    ("prop-link-tamper-replay", prop_link_tamper_replay),
];

/// The names of every self-test item, in execution order.
pub fn test_names() -> Vec<&'static str> {
    ITEMS.iter().map(|(name, _)| *name).collect()
}

/// Runs the whole embedded suite.
pub fn run_all() -> Vec<SelfTestOutcome> {
    ITEMS
        .iter()
        .map(|(name, run)| SelfTestOutcome {
            name,
            result: run(),
        })
        .collect()
}

fn ensure(cond: bool, message: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message.into())
    }
}

fn eq<T: PartialEq + std::fmt::Display>(got: T, want: T, label: &str) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want}"))
    }
}

fn vector_context() -> IntegrityContext {
    IntegrityContext::new(
        &AesKey128::from_hex(VECTOR_KEY).unwrap(),
        VECTOR_COUNT,
        Bearer::new(VECTOR_BEARER).unwrap(),
        Direction::Uplink,
    )
}

fn random_bits(rng: &mut ChaCha8Rng, len_bits: usize) -> BitString {
    let mut bytes = vec![0u8; len_bits.div_ceil(8)];
    rng.fill(&mut bytes[..]);
    BitString::from_bits_masked(bytes, len_bits)
}

fn random_key(rng: &mut ChaCha8Rng) -> AesKey128 {
    let mut key = [0u8; 16];
    rng.fill(&mut key);
    AesKey128::from_bytes(key)
}

fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    if rng.gen() {
        Direction::Downlink
    } else {
        Direction::Uplink
    }
}

fn aes_fips197_c1() -> Result<(), String> {
    let ks = KeySchedule::expand(&AesKey128::from_hex("000102030405060708090a0b0c0d0e0f").unwrap());
    eq(
        ks.round_keys()[10].to_hex(),
        "13111d7fe3944a17f307a78b4d2b30c5".into(),
        "final round key",
    )?;
    let out = ks.encrypt_block(Block128::from_hex("00112233445566778899aabbccddeeff").unwrap());
    eq(
        out.to_hex(),
        "69c4e0d86a7b0430d8cdb78070b4c55a".into(),
        "ciphertext",
    )
}

fn aes_fips197_appendix_b() -> Result<(), String> {
    let ks = KeySchedule::expand(&AesKey128::from_hex("2b7e151628aed2a6abf7158809cf4f3c").unwrap());
    let out = ks.encrypt_block(Block128::from_hex("3243f6a8885a308d313198a2e0370734").unwrap());
    eq(
        out.to_hex(),
        "3925841d02dc09fbdc118597196a0b32".into(),
        "ciphertext",
    )
}

fn cmac_subkey_derivation() -> Result<(), String> {
    let subkeys = Subkeys::derive(&KeySchedule::expand(
        &AesKey128::from_hex(VECTOR_KEY).unwrap(),
    ));
    eq(
        subkeys.k1.to_hex(),
        "ca0247870fc27fad1b17e1a148b02d8d".into(),
        "K1",
    )?;
    eq(
        subkeys.k2.to_hex(),
        "94048f0e1f84ff5a362fc34291605b9d".into(),
        "K2",
    )?;

    // under the all-zero key L has MSB 0, exercising the unmasked branch
    let subkeys = Subkeys::derive(&KeySchedule::expand(&AesKey128::from_bytes([0; 16])));
    eq(
        subkeys.k1.to_hex(),
        "cdd297a9df1458771099f4b39468565c".into(),
        "K1 (zero key)",
    )?;
    eq(
        subkeys.k2.to_hex(),
        "9ba52f53be28b0ee2133e96728d0ac3f".into(),
        "K2 (zero key)",
    )
}

fn eia2_conformance_383bit() -> Result<(), String> {
    let message = BitString::parse_hex(VECTOR_MESSAGE).unwrap();
    let (tag, trace) = vector_context().generate_mac_traced(&message);
    eq(tag.to_hex(), VECTOR_MAC.into(), "MAC-I")?;
    ensure(
        trace.render() == VECTOR_TRACE,
        "intermediate trace deviates from the stored golden trace",
    )
}

fn eia2_regression_64bit() -> Result<(), String> {
    let ctx = IntegrityContext::new(
        &AesKey128::from_hex("d3c5d592327fb11c4035c6680af8c6d1").unwrap(),
        0x398a59b4,
        Bearer::new(0x1a).unwrap(),
        Direction::Downlink,
    );
    let tag = ctx.generate_mac(&BitString::parse_hex("484583d5afe082ae").unwrap());
    eq(tag.to_hex(), "b93787e6".into(), "MAC-I")
}

fn eia2_regression_129bit() -> Result<(), String> {
    let ctx = IntegrityContext::new(
        &AesKey128::from_hex(VECTOR_KEY).unwrap(),
        0xc0ffee00,
        Bearer::new(0x05).unwrap(),
        Direction::Downlink,
    );
    let tag =
        ctx.generate_mac(&BitString::parse_hex("0123456789abcdef0123456789abcdef8/129").unwrap());
    eq(tag.to_hex(), "5ae6cda9".into(), "MAC-I")
}

fn eia2_empty_message() -> Result<(), String> {
    let ctx = IntegrityContext::new(
        &AesKey128::from_hex(VECTOR_KEY).unwrap(),
        0,
        Bearer::new(0).unwrap(),
        Direction::Uplink,
    );
    let tag = ctx.generate_mac(&BitString::empty());
    eq(
        tag.to_hex(),
        "5c1fc737".into(),
        "MAC-I over the 64-bit header alone",
    )
}

fn eea2_keystream_block() -> Result<(), String> {
    let ctx = CipherContext::new(
        &AesKey128::from_hex(VECTOR_KEY).unwrap(),
        VECTOR_COUNT,
        Bearer::new(VECTOR_BEARER).unwrap(),
        Direction::Uplink,
    );
    eq(
        ctx.initial_counter().block().to_hex(),
        "36af6144c00000000000000000000000".into(),
        "T1",
    )?;
    eq(
        ctx.keystream(128).to_hex(),
        "371faf99a0f41e18746c95d7e81744e8/128".into(),
        "first keystream block",
    )
}

fn eea2_regression_253bit() -> Result<(), String> {
    let ctx = CipherContext::new(
        &AesKey128::from_hex("d3c5d592327fb11c4035c6680af8c6d1").unwrap(),
        0x398a59b4,
        Bearer::new(0x15).unwrap(),
        Direction::Downlink,
    );
    let plain = BitString::parse_hex(
        "981ba6824c1bfb1ab485472029b71d808ce33e2cc3c0b5fc1f3de8a6dc66b1f0/253",
    )
    .unwrap();
    let cipher = ctx.apply_keystream(&plain);
    eq(
        cipher.to_hex(),
        "e9fed8a63d155304d71df20bf3e82214b20ed7dad2f233dc3c22d7bdeeed8e78/253".into(),
        "ciphertext",
    )?;
    ensure(
        ctx.apply_keystream(&cipher) == plain,
        "deciphering did not restore the plaintext",
    )
}

fn null_algorithm_semantics() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e0a);
    for i in 0..100 {
        let len = rng.gen_range(0..=512);
        let message = random_bits(&mut rng, len);
        ensure(
            apply_eea0(&message) == message,
            format!("EEA0 altered message {i}"),
        )?;
    }

    let ctx = vector_context();
    let message = BitString::parse_hex(VECTOR_MESSAGE).unwrap();
    eq(
        generate_mac_eia0(&ctx, &message).to_hex(),
        "00000000".into(),
        "EIA0 tag",
    )?;

    // a non-emergency bearer must not configure EIA0
    let rejected = BearerConfig::control_plane(
        Bearer::new(1).unwrap(),
        AlgoId::new(AlgoKind::Confidentiality, code::AES).unwrap(),
        RoleKey::new(KeyRole::RrcEnc, AesKey128::from_bytes([1; 16])),
        AlgoId::new(AlgoKind::Integrity, code::NULL).unwrap(),
        RoleKey::new(KeyRole::RrcInt, AesKey128::from_bytes([2; 16])),
        false,
    );
    ensure(rejected.is_err(), "EIA0 accepted outside emergency mode")
}

fn algo_registry() -> Result<(), String> {
    let mut implemented = 0;
    for kind in [AlgoKind::Confidentiality, AlgoKind::Integrity] {
        for c in 0..16u8 {
            let cap = registry::resolve(AlgoId::new(kind, c).unwrap());
            if cap.is_implemented() {
                implemented += 1;
            }
        }
    }
    eq(implemented, 4, "implemented algorithm count")
}

fn prop_ctr_involution() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e1a);
    for i in 0..500 {
        let ctx = CipherContext::new(
            &random_key(&mut rng),
            rng.gen(),
            Bearer::new(rng.gen_range(0..32)).unwrap(),
            random_direction(&mut rng),
        );
        let len = rng.gen_range(0..=1024);
        let message = random_bits(&mut rng, len);
        ensure(
            ctx.apply_keystream(&ctx.apply_keystream(&message)) == message,
            format!("involution failed at trial {i}"),
        )?;
    }
    Ok(())
}

fn prop_keystream_linearity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2e2a);
    for i in 0..200 {
        let ctx = CipherContext::new(
            &random_key(&mut rng),
            rng.gen(),
            Bearer::new(rng.gen_range(0..32)).unwrap(),
            random_direction(&mut rng),
        );
        let len = rng.gen_range(0..=512);
        let m1 = random_bits(&mut rng, len);
        let m2 = random_bits(&mut rng, len);
        ensure(
            ctx.apply_keystream(&m1).xor(&ctx.apply_keystream(&m2)) == m1.xor(&m2),
            format!("linearity failed at trial {i}"),
        )?;
    }
    Ok(())
}

fn prop_mac_generate_verify() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e3a);
    for i in 0..200 {
        let ctx = IntegrityContext::new(
            &random_key(&mut rng),
            rng.gen(),
            Bearer::new(rng.gen_range(0..32)).unwrap(),
            random_direction(&mut rng),
        );
        let len = rng.gen_range(0..=512);
        let message = random_bits(&mut rng, len);
        let tag = ctx.generate_mac(&message);
        ensure(
            ctx.verify_mac(&message, &tag),
            format!("round trip failed at trial {i}"),
        )?;
        let wrong = MacTag32::from_bytes([
            tag.as_bytes()[0] ^ 0x80,
            tag.as_bytes()[1],
            tag.as_bytes()[2],
            tag.as_bytes()[3],
        ]);
        ensure(
            !ctx.verify_mac(&message, &wrong),
            format!("corrupt tag accepted at trial {i}"),
        )?;
    }
    Ok(())
}

fn prop_mac_avalanche() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e4a);
    let mut unchanged = 0u32;
    let trials = 300;
    for _ in 0..trials {
        let key = random_key(&mut rng);
        let count = rng.gen::<u32>();
        let bearer = rng.gen_range(0..32u8);
        let direction = random_direction(&mut rng);
        let len = rng.gen_range(1..=256);
        let message = random_bits(&mut rng, len);
        let original = IntegrityContext::new(&key, count, Bearer::new(bearer).unwrap(), direction)
            .generate_mac(&message);

        // flip one bit somewhere in message, COUNT, BEARER or DIRECTION
        let mutated = match rng.gen_range(0..4) {
            0 => {
                let mut m = message.clone();
                m.flip_bit(rng.gen_range(0..m.len_bits()));
                IntegrityContext::new(&key, count, Bearer::new(bearer).unwrap(), direction)
                    .generate_mac(&m)
            }
            1 => IntegrityContext::new(
                &key,
                count ^ (1 << rng.gen_range(0..32)),
                Bearer::new(bearer).unwrap(),
                direction,
            )
            .generate_mac(&message),
            2 => IntegrityContext::new(
                &key,
                count,
                Bearer::new(bearer ^ (1 << rng.gen_range(0..5))).unwrap(),
                direction,
            )
            .generate_mac(&message),
            _ => IntegrityContext::new(
                &key,
                count,
                Bearer::new(bearer).unwrap(),
                direction.opposite(),
            )
            .generate_mac(&message),
        };
        if mutated == original {
            unchanged += 1;
        }
    }
    // one 2^-32 collision is tolerated
    ensure(
        unchanged <= 1,
        format!("{unchanged} of {trials} single-bit changes left the MAC unchanged"),
    )
}

fn prop_link_tamper_replay() -> Result<(), String> {
    let mut script = String::from(
        "link bearer=0a plane=control cipher=eea2 integrity=eia2 \
         enc-key=6832a65cff4473621ebdd4ba26a921fe int-key=d3c5d592327fb11c4035c6680af8c6d1\n",
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e5a);
    for i in 0..10 {
        let dir = if i % 2 == 0 { "ul" } else { "dl" };
        let len = rng.gen_range(8..=128);
        let payload = random_bits(&mut rng, len);
        script.push_str(&format!("send {dir} {} expect accept\n", payload.to_hex()));
        // replay right after the accepted send, so the stale copy is clean
        if i % 5 == 0 {
            script.push_str(&format!("replay {dir} expect replay-detected\n"));
        }
        if i % 3 == 0 {
            let len = rng.gen_range(8..=128);
            let payload = random_bits(&mut rng, len);
            let bit = rng.gen_range(0..payload.len_bits() + 32);
            script.push_str(&format!(
                "tamper {dir} {bit} {} expect mac-mismatch\n",
                payload.to_hex()
            ));
        }
    }
    let scenario = Scenario::parse(&script).map_err(|e| e.to_string())?;
    let transcript = scenario.run();
    ensure(
        transcript.all_as_expected(),
        "a link event missed its expected verdict",
    )?;
    eq(transcript.count_verdict(Verdict::Accept), 10, "accepts")?;
    eq(
        transcript.count_verdict(Verdict::MacMismatch),
        4,
        "mac mismatches",
    )?;
    eq(
        transcript.count_verdict(Verdict::ReplayDetected),
        2,
        "replays",
    )
}
