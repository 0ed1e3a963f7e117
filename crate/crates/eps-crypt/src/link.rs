//! Deterministic two-endpoint link simulator with tamper and replay
//! injection, driven by a line-oriented script.
//!
//! Script format — one directive per line, fields space-separated, `#`
//! starts a comment, binary payloads are lowercase hex with a mandatory
//! `/bits` suffix:
//!
//! ```text
//! link bearer=12 plane=control cipher=eea2 integrity=eia2 enc-key=<32 hex> int-key=<32 hex> [emergency]
//! send <ul|dl> <payload/bits> expect <verdict>
//! tamper <ul|dl> <bit-index> <payload/bits> expect <verdict>
//! replay <ul|dl> expect <verdict>
//! reorder <ul|dl> <payload/bits> <payload/bits> expect <verdict> <verdict>
//! ```
//!
//! Exactly one `link` line configures both endpoints (the UE sends uplink,
//! the network downlink). `send` protects and delivers a payload. `tamper`
//! flips one body bit in transit. `replay` re-delivers the last PDU seen on
//! that direction. `reorder` protects two payloads and delivers them in
//! swapped order; the two verdicts are in delivery order. Verdicts are
//! `accept`, `mac-mismatch`, `replay-detected`, `malformed` and
//! `bearer-mismatch`. User-plane links take `integrity=-` and `int-key=-`.
//!
//! A transcript records one line per delivered PDU. Execution is fully
//! deterministic: every payload and fault is spelled out in the script.

use std::fmt;

use thiserror::Error;

use crate::aes::AesKey128;
use crate::bits::BitString;
use crate::params::{Bearer, Direction};
use crate::pdcp::{BearerConfig, EndpointState, KeyRole, PdcpError, Plane, ProtectedPdu, RoleKey};
use crate::registry::{code, AlgoId, AlgoKind};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Outcome of delivering one PDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    MacMismatch,
    ReplayDetected,
    Malformed,
    BearerMismatch,
}

impl Verdict {
    fn from_result(result: &Result<BitString, PdcpError>) -> Verdict {
        match result {
            Ok(_) => Verdict::Accept,
            Err(PdcpError::MacMismatch) => Verdict::MacMismatch,
            Err(PdcpError::ReplayDetected { .. }) => Verdict::ReplayDetected,
            Err(PdcpError::Malformed { .. }) => Verdict::Malformed,
            Err(PdcpError::BearerMismatch { .. }) => Verdict::BearerMismatch,
            Err(PdcpError::CountExhausted) => unreachable!("receive path never exhausts COUNT"),
        }
    }

    fn parse(token: &str) -> Option<Verdict> {
        match token {
            "accept" => Some(Verdict::Accept),
            "mac-mismatch" => Some(Verdict::MacMismatch),
            "replay-detected" => Some(Verdict::ReplayDetected),
            "malformed" => Some(Verdict::Malformed),
            "bearer-mismatch" => Some(Verdict::BearerMismatch),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::MacMismatch => "mac-mismatch",
            Verdict::ReplayDetected => "replay-detected",
            Verdict::Malformed => "malformed",
            Verdict::BearerMismatch => "bearer-mismatch",
        })
    }
}

fn parse_direction(token: &str) -> Option<Direction> {
    match token {
        "ul" => Some(Direction::Uplink),
        "dl" => Some(Direction::Downlink),
        _ => None,
    }
}

fn direction_token(direction: Direction) -> &'static str {
    match direction {
        Direction::Uplink => "ul",
        Direction::Downlink => "dl",
    }
}

/// The link configuration from the script's `link` line.
#[derive(Debug, Clone)]
pub struct LinkSpec {
    pub bearer: Bearer,
    pub plane: Plane,
    pub cipher: AlgoId,
    pub integrity: Option<AlgoId>,
    pub enc_key: AesKey128,
    pub int_key: Option<AesKey128>,
    pub emergency: bool,
}

impl LinkSpec {
    fn build_config(&self) -> Result<BearerConfig, String> {
        let result = match self.plane {
            Plane::User => BearerConfig::user_plane(
                self.bearer,
                self.cipher,
                RoleKey::new(KeyRole::UpEnc, self.enc_key),
            ),
            Plane::Control => BearerConfig::control_plane(
                self.bearer,
                self.cipher,
                RoleKey::new(KeyRole::RrcEnc, self.enc_key),
                self.integrity.ok_or("control plane requires integrity=")?,
                RoleKey::new(
                    KeyRole::RrcInt,
                    self.int_key.ok_or("control plane requires int-key=")?,
                ),
                self.emergency,
            ),
        };
        result.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone)]
pub enum ScriptEvent {
    Send {
        direction: Direction,
        payload: BitString,
        expect: Verdict,
    },
    Tamper {
        direction: Direction,
        bit: usize,
        payload: BitString,
        expect: Verdict,
    },
    Replay {
        direction: Direction,
        expect: Verdict,
    },
    /// Two payloads protected in order, delivered swapped; the expected
    /// verdicts are in delivery order.
    Reorder {
        direction: Direction,
        first: BitString,
        second: BitString,
        expect: [Verdict; 2],
    },
}

impl ScriptEvent {
    fn direction(&self) -> Direction {
        match self {
            ScriptEvent::Send { direction, .. }
            | ScriptEvent::Tamper { direction, .. }
            | ScriptEvent::Replay { direction, .. }
            | ScriptEvent::Reorder { direction, .. } => *direction,
        }
    }

    fn delivers(&self) -> bool {
        !matches!(self, ScriptEvent::Replay { .. })
    }

    fn name(&self) -> &'static str {
        match self {
            ScriptEvent::Send { .. } => "send",
            ScriptEvent::Tamper { .. } => "tamper",
            ScriptEvent::Replay { .. } => "replay",
            ScriptEvent::Reorder { .. } => "reorder",
        }
    }
}

/// A parsed, validated scenario.
#[derive(Debug)]
pub struct Scenario {
    pub link: LinkSpec,
    pub events: Vec<ScriptEvent>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScriptError> {
        let mut link: Option<LinkSpec> = None;
        let mut events = Vec::new();

        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let err = |message: String| ScriptError { line, message };
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            match tokens[0] {
                "link" => {
                    if link.is_some() {
                        return Err(err("duplicate link line".into()));
                    }
                    if !events.is_empty() {
                        return Err(err("link line must precede events".into()));
                    }
                    link = Some(parse_link(&tokens[1..]).map_err(err)?);
                }
                "send" | "tamper" | "replay" | "reorder" => {
                    let spec = link
                        .as_ref()
                        .ok_or_else(|| err("event before the link line".into()))?;
                    let event = parse_event(&tokens, spec).map_err(err)?;
                    if let ScriptEvent::Replay { direction, .. } = event {
                        let seen = events
                            .iter()
                            .any(|e: &ScriptEvent| e.delivers() && e.direction() == direction);
                        if !seen {
                            return Err(err(format!(
                                "replay {} before any PDU on that direction",
                                direction_token(direction)
                            )));
                        }
                    }
                    events.push(event);
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }

        let link = link.ok_or(ScriptError {
            line: 0,
            message: "missing link line".into(),
        })?;
        // surface configuration problems at parse time
        link.build_config()
            .map_err(|message| ScriptError { line: 0, message })?;
        Ok(Scenario { link, events })
    }

    /// Executes every event over an in-memory channel between the two
    /// endpoints, recording one transcript line per delivered PDU.
    pub fn run(&self) -> Transcript {
        let config = self.link.build_config().expect("validated at parse time");
        let mut ue = EndpointState::new(config.clone(), Direction::Uplink);
        let mut network = EndpointState::new(config, Direction::Downlink);
        let mut last_seen: [Option<ProtectedPdu>; 2] = [None, None];
        let mut records = Vec::new();

        for (seq, event) in self.events.iter().enumerate() {
            let direction = event.direction();
            let sender = match direction {
                Direction::Uplink => &mut ue,
                Direction::Downlink => &mut network,
            };
            let deliveries: Vec<(ProtectedPdu, Verdict)> = match event {
                ScriptEvent::Send {
                    payload, expect, ..
                } => {
                    vec![(
                        sender.protect(payload).expect("COUNT space exhausted"),
                        *expect,
                    )]
                }
                ScriptEvent::Tamper {
                    bit,
                    payload,
                    expect,
                    ..
                } => {
                    let mut pdu = sender.protect(payload).expect("COUNT space exhausted");
                    pdu.body.flip_bit(*bit);
                    vec![(pdu, *expect)]
                }
                ScriptEvent::Replay { expect, .. } => {
                    let pdu = last_seen[direction.bit() as usize]
                        .clone()
                        .expect("validated at parse time");
                    vec![(pdu, *expect)]
                }
                ScriptEvent::Reorder {
                    first,
                    second,
                    expect,
                    ..
                } => {
                    let p1 = sender.protect(first).expect("COUNT space exhausted");
                    let p2 = sender.protect(second).expect("COUNT space exhausted");
                    vec![(p2, expect[0]), (p1, expect[1])]
                }
            };

            for (pdu, expected) in deliveries {
                let receiver = match direction {
                    Direction::Uplink => &mut network,
                    Direction::Downlink => &mut ue,
                };
                let result = receiver.unprotect(&pdu);
                let verdict = Verdict::from_result(&result);
                records.push(TranscriptRecord {
                    seq,
                    event: event.name(),
                    direction,
                    count: pdu.count,
                    bearer: pdu.bearer,
                    body: pdu.body.clone(),
                    verdict,
                    expected,
                    payload: result.ok(),
                });
                last_seen[direction.bit() as usize] = Some(pdu);
            }
        }
        Transcript { records }
    }
}

fn parse_link(tokens: &[&str]) -> Result<LinkSpec, String> {
    let mut bearer = None;
    let mut plane = None;
    let mut cipher = None;
    let mut integrity = None;
    let mut enc_key = None;
    let mut int_key = None;
    let mut emergency = false;

    for token in tokens {
        if *token == "emergency" {
            emergency = true;
            continue;
        }
        let (field, value) = token
            .split_once('=')
            .ok_or_else(|| format!("expected field=value, got {token:?}"))?;
        match field {
            "bearer" => {
                let raw =
                    u8::from_str_radix(value, 16).map_err(|_| format!("bad bearer {value:?}"))?;
                bearer = Some(Bearer::new(raw).map_err(|e| e.to_string())?);
            }
            "plane" => {
                plane = Some(match value {
                    "user" => Plane::User,
                    "control" => Plane::Control,
                    _ => return Err(format!("bad plane {value:?}")),
                });
            }
            "cipher" => cipher = Some(parse_algo(value, AlgoKind::Confidentiality)?),
            "integrity" => {
                integrity = match value {
                    "-" => None,
                    _ => Some(parse_algo(value, AlgoKind::Integrity)?),
                };
            }
            "enc-key" => enc_key = Some(parse_key(value)?),
            "int-key" => {
                int_key = match value {
                    "-" => None,
                    _ => Some(parse_key(value)?),
                };
            }
            _ => return Err(format!("unknown link field {field:?}")),
        }
    }

    Ok(LinkSpec {
        bearer: bearer.ok_or("missing bearer=")?,
        plane: plane.ok_or("missing plane=")?,
        cipher: cipher.ok_or("missing cipher=")?,
        integrity,
        enc_key: enc_key.ok_or("missing enc-key=")?,
        int_key,
        emergency,
    })
}

fn parse_algo(token: &str, kind: AlgoKind) -> Result<AlgoId, String> {
    let codes = match kind {
        AlgoKind::Confidentiality => [
            ("eea0", code::NULL),
            ("eea1", code::SNOW3G),
            ("eea2", code::AES),
        ],
        AlgoKind::Integrity => [
            ("eia0", code::NULL),
            ("eia1", code::SNOW3G),
            ("eia2", code::AES),
        ],
    };
    for (name, c) in codes {
        if token == name {
            return Ok(AlgoId::new(kind, c).unwrap());
        }
    }
    Err(format!("unknown algorithm {token:?}"))
}

fn parse_key(token: &str) -> Result<AesKey128, String> {
    AesKey128::from_hex(token).map_err(|e| format!("bad key: {e}"))
}

fn parse_payload(token: &str) -> Result<BitString, String> {
    BitString::parse_hex(token).map_err(|e| format!("bad payload {token:?}: {e}"))
}

fn parse_event(tokens: &[&str], link: &LinkSpec) -> Result<ScriptEvent, String> {
    let direction = tokens
        .get(1)
        .and_then(|t| parse_direction(t))
        .ok_or("expected direction ul|dl")?;
    let expect_at = |i: usize| -> Result<Verdict, String> {
        tokens
            .get(i)
            .and_then(|t| Verdict::parse(t))
            .ok_or_else(|| "expected a verdict".to_string())
    };
    let keyword_at = |i: usize| -> Result<(), String> {
        match tokens.get(i) {
            Some(&"expect") => Ok(()),
            _ => Err("expected keyword 'expect'".to_string()),
        }
    };
    let body_bits = |payload: &BitString| match link.plane {
        Plane::User => payload.len_bits(),
        Plane::Control => payload.len_bits() + 32,
    };

    match tokens[0] {
        "send" => {
            let payload = parse_payload(tokens.get(2).ok_or("missing payload")?)?;
            keyword_at(3)?;
            let expect = expect_at(4)?;
            expect_len(tokens, 5)?;
            Ok(ScriptEvent::Send {
                direction,
                payload,
                expect,
            })
        }
        "tamper" => {
            let bit: usize = tokens
                .get(2)
                .and_then(|t| t.parse().ok())
                .ok_or("missing or bad bit index")?;
            let payload = parse_payload(tokens.get(3).ok_or("missing payload")?)?;
            if bit >= body_bits(&payload) {
                return Err(format!(
                    "tamper bit {bit} out of range for a {}-bit body",
                    body_bits(&payload)
                ));
            }
            keyword_at(4)?;
            let expect = expect_at(5)?;
            expect_len(tokens, 6)?;
            Ok(ScriptEvent::Tamper {
                direction,
                bit,
                payload,
                expect,
            })
        }
        "replay" => {
            keyword_at(2)?;
            let expect = expect_at(3)?;
            expect_len(tokens, 4)?;
            Ok(ScriptEvent::Replay { direction, expect })
        }
        "reorder" => {
            let first = parse_payload(tokens.get(2).ok_or("missing first payload")?)?;
            let second = parse_payload(tokens.get(3).ok_or("missing second payload")?)?;
            keyword_at(4)?;
            let expect = [expect_at(5)?, expect_at(6)?];
            expect_len(tokens, 7)?;
            Ok(ScriptEvent::Reorder {
                direction,
                first,
                second,
                expect,
            })
        }
        _ => unreachable!("dispatched on the same token"),
    }
}

fn expect_len(tokens: &[&str], len: usize) -> Result<(), String> {
    if tokens.len() == len {
        Ok(())
    } else {
        Err(format!("trailing tokens after {:?}", tokens[len - 1]))
    }
}

/// One delivered PDU and its verdict.
#[derive(Debug, Clone)]
pub struct TranscriptRecord {
    pub seq: usize,
    pub event: &'static str,
    pub direction: Direction,
    pub count: u32,
    pub bearer: Bearer,
    pub body: BitString,
    pub verdict: Verdict,
    pub expected: Verdict,
    /// Recovered payload when the PDU was accepted.
    pub payload: Option<BitString>,
}

impl TranscriptRecord {
    pub fn matched(&self) -> bool {
        self.verdict == self.expected
    }

    pub fn render(&self) -> String {
        format!(
            "{} {} {} count={:08x} bearer={:02x} body={} verdict={} expect={} payload={}",
            self.seq,
            self.event,
            direction_token(self.direction),
            self.count,
            self.bearer.value(),
            self.body.to_hex(),
            self.verdict,
            self.expected,
            self.payload
                .as_ref()
                .map_or_else(|| "-".to_string(), |p| p.to_hex()),
        )
    }
}

/// The full run record: one line per delivered PDU.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn all_as_expected(&self) -> bool {
        self.records.iter().all(TranscriptRecord::matched)
    }

    pub fn count_verdict(&self, verdict: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == verdict).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&record.render());
            out.push('\n');
        }
        out
    }
}
