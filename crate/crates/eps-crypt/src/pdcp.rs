//! PDCP-style PDU protection.
//!
//! User-plane PDUs are ciphered only; control-plane PDUs carry a 32-bit
//! MAC-I computed over the plaintext payload, and the payload together with
//! the MAC-I is ciphered as one unit. The receiver deciphers, recomputes
//! XMAC-I the same way as the sender, and enforces COUNT freshness
//! (strict monotonic increase) on the control plane.
//!
//! COUNT is carried in clear in the frame header so the link is
//! self-describing; tampering with it still trips XMAC-I because COUNT,
//! BEARER and DIRECTION all enter the MAC through the CMAC input header.
//! The MAC therefore covers the payload only. COUNT wrap signals
//! count-exhausted: rekeying is an upper-layer concern.

use thiserror::Error;

use crate::aes::AesKey128;
use crate::bits::BitString;
use crate::eea::{apply_eea0, CipherContext};
use crate::eia::{IntegrityContext, MacTag32};
use crate::params::{Bearer, Direction};
use crate::registry::{code, resolve, AlgoId, AlgoKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{algo} is a {kind} algorithm, not valid in this position")]
    AlgorithmKindMismatch {
        algo: &'static str,
        kind: &'static str,
    },
    #[error("{algo} is not available here ({status})")]
    AlgorithmUnavailable {
        algo: &'static str,
        status: &'static str,
    },
    #[error("key role {role:?} cannot be bound to a {purpose} algorithm")]
    KeyRoleMismatch {
        role: KeyRole,
        purpose: &'static str,
    },
    #[error("EIA0 null integrity is allowed only for unauthenticated emergency calls")]
    NullIntegrityRequiresEmergency,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PdcpError {
    #[error("send COUNT exhausted; the bearer must be rekeyed")]
    CountExhausted,
    #[error("XMAC-I does not match the received MAC-I")]
    MacMismatch,
    #[error("replay detected: COUNT {count:#010x} not above {highest:#010x}")]
    ReplayDetected { count: u32, highest: u32 },
    #[error("malformed control-plane PDU: body of {bits} bits cannot carry a MAC-I")]
    Malformed { bits: usize },
    #[error("PDU for bearer {got:#04x} delivered to bearer {expected:#04x}")]
    BearerMismatch { expected: u8, got: u8 },
}

/// The role a key plays in the hierarchy. Encryption roles bind only to
/// confidentiality algorithms, integrity roles only to integrity
/// algorithms; [`BearerConfig`] checks the binding at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyRole {
    UpEnc,
    RrcEnc,
    RrcInt,
    NasEnc,
    NasInt,
}

impl KeyRole {
    pub fn is_encryption(self) -> bool {
        matches!(self, KeyRole::UpEnc | KeyRole::RrcEnc | KeyRole::NasEnc)
    }

    pub fn is_integrity(self) -> bool {
        matches!(self, KeyRole::RrcInt | KeyRole::NasInt)
    }
}

/// A 128-bit key tagged with its role.
#[derive(Debug, Clone, Copy)]
pub struct RoleKey {
    pub role: KeyRole,
    pub key: AesKey128,
}

impl RoleKey {
    pub fn new(role: KeyRole, key: AesKey128) -> Self {
        RoleKey { role, key }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    User,
    Control,
}

/// Per-bearer protection parameters: plane, algorithms and role-tagged
/// keys, as configured by upper layers.
#[derive(Debug, Clone)]
pub struct BearerConfig {
    bearer: Bearer,
    plane: Plane,
    cipher_algo: AlgoId,
    cipher_key: RoleKey,
    integrity_algo: Option<AlgoId>,
    integrity_key: Option<RoleKey>,
    emergency_mode: bool,
}

impl BearerConfig {
    /// A user-plane bearer: ciphering only, no integrity protection.
    pub fn user_plane(
        bearer: Bearer,
        cipher_algo: AlgoId,
        cipher_key: RoleKey,
    ) -> Result<Self, ConfigError> {
        check_cipher(cipher_algo, &cipher_key)?;
        Ok(BearerConfig {
            bearer,
            plane: Plane::User,
            cipher_algo,
            cipher_key,
            integrity_algo: None,
            integrity_key: None,
            emergency_mode: false,
        })
    }

    /// A control-plane bearer: ciphering plus mandatory integrity
    /// protection. EIA0 is accepted only in emergency mode.
    pub fn control_plane(
        bearer: Bearer,
        cipher_algo: AlgoId,
        cipher_key: RoleKey,
        integrity_algo: AlgoId,
        integrity_key: RoleKey,
        emergency_mode: bool,
    ) -> Result<Self, ConfigError> {
        check_cipher(cipher_algo, &cipher_key)?;
        check_integrity(integrity_algo, &integrity_key)?;
        if integrity_algo.code() == code::NULL && !emergency_mode {
            return Err(ConfigError::NullIntegrityRequiresEmergency);
        }
        Ok(BearerConfig {
            bearer,
            plane: Plane::Control,
            cipher_algo,
            cipher_key,
            integrity_algo: Some(integrity_algo),
            integrity_key: Some(integrity_key),
            emergency_mode,
        })
    }

    pub fn bearer(&self) -> Bearer {
        self.bearer
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn emergency_mode(&self) -> bool {
        self.emergency_mode
    }

    fn apply_cipher(&self, count: u32, direction: Direction, data: &BitString) -> BitString {
        match self.cipher_algo.code() {
            code::NULL => apply_eea0(data),
            code::AES => CipherContext::new(&self.cipher_key.key, count, self.bearer, direction)
                .apply_keystream(data),
            _ => unreachable!("validated at construction"),
        }
    }

    fn compute_mac(&self, count: u32, direction: Direction, payload: &BitString) -> MacTag32 {
        let algo = self.integrity_algo.expect("control plane only");
        match algo.code() {
            code::NULL => MacTag32::ZERO,
            code::AES => {
                let key = &self.integrity_key.as_ref().expect("control plane only").key;
                IntegrityContext::new(key, count, self.bearer, direction).generate_mac(payload)
            }
            _ => unreachable!("validated at construction"),
        }
    }

    /// EIA0 provides no protection: verification always accepts.
    fn integrity_is_null(&self) -> bool {
        self.integrity_algo.map(|a| a.code()) == Some(code::NULL)
    }
}

fn check_cipher(algo: AlgoId, key: &RoleKey) -> Result<(), ConfigError> {
    let cap = resolve(algo);
    if algo.kind() != AlgoKind::Confidentiality {
        return Err(ConfigError::AlgorithmKindMismatch {
            algo: cap.name,
            kind: "integrity",
        });
    }
    if !cap.is_implemented() {
        return Err(ConfigError::AlgorithmUnavailable {
            algo: cap.name,
            status: status_name(&cap),
        });
    }
    if !key.role.is_encryption() {
        return Err(ConfigError::KeyRoleMismatch {
            role: key.role,
            purpose: "confidentiality",
        });
    }
    Ok(())
}

fn check_integrity(algo: AlgoId, key: &RoleKey) -> Result<(), ConfigError> {
    let cap = resolve(algo);
    if algo.kind() != AlgoKind::Integrity {
        return Err(ConfigError::AlgorithmKindMismatch {
            algo: cap.name,
            kind: "confidentiality",
        });
    }
    if !cap.is_implemented() {
        return Err(ConfigError::AlgorithmUnavailable {
            algo: cap.name,
            status: status_name(&cap),
        });
    }
    if !key.role.is_integrity() {
        return Err(ConfigError::KeyRoleMismatch {
            role: key.role,
            purpose: "integrity",
        });
    }
    Ok(())
}

fn status_name(cap: &crate::registry::AlgoCapability) -> &'static str {
    match cap.status {
        crate::registry::AlgoStatus::Implemented => "implemented",
        crate::registry::AlgoStatus::UnsupportedExternal => {
            "standardized externally, not implemented"
        }
        crate::registry::AlgoStatus::Reserved => "reserved for future use",
    }
}

/// A framed PDU: clear header (bearer, direction, COUNT) plus the ciphered
/// body. On the control plane the body is the ciphered payload ‖ MAC-I and
/// is therefore exactly 32 bits longer than the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectedPdu {
    pub bearer: Bearer,
    pub direction: Direction,
    pub count: u32,
    pub body: BitString,
}

/// One endpoint of a protected link: the bearer configuration, the next
/// COUNT for the sending direction, and the highest COUNT accepted so far
/// on the receiving direction.
pub struct EndpointState {
    config: BearerConfig,
    send_direction: Direction,
    /// Held one wider than COUNT so exhaustion is distinguishable from wrap.
    send_count: u64,
    highest_accepted: Option<u32>,
}

impl EndpointState {
    pub fn new(config: BearerConfig, send_direction: Direction) -> Self {
        Self::with_initial_count(config, send_direction, 0)
    }

    /// Resumes sending at a given COUNT, as after re-establishment with a
    /// synchronized counter.
    pub fn with_initial_count(config: BearerConfig, send_direction: Direction, count: u32) -> Self {
        EndpointState {
            config,
            send_direction,
            send_count: u64::from(count),
            highest_accepted: None,
        }
    }

    pub fn config(&self) -> &BearerConfig {
        &self.config
    }

    pub fn send_direction(&self) -> Direction {
        self.send_direction
    }

    pub fn highest_accepted(&self) -> Option<u32> {
        self.highest_accepted
    }

    /// Protects one payload into a PDU, consuming the next send COUNT.
    pub fn protect(&mut self, payload: &BitString) -> Result<ProtectedPdu, PdcpError> {
        if self.send_count > u64::from(u32::MAX) {
            return Err(PdcpError::CountExhausted);
        }
        let count = self.send_count as u32;
        let direction = self.send_direction;

        let plain_body = match self.config.plane {
            Plane::User => payload.clone(),
            Plane::Control => {
                let mac = self.config.compute_mac(count, direction, payload);
                payload.concat(&BitString::from_bytes(mac.as_bytes().to_vec()))
            }
        };
        let body = self.config.apply_cipher(count, direction, &plain_body);
        self.send_count += 1;
        Ok(ProtectedPdu {
            bearer: self.config.bearer,
            direction,
            count,
            body,
        })
    }

    /// Deciphers a received PDU and, on the control plane, verifies XMAC-I
    /// and COUNT freshness before releasing the payload.
    pub fn unprotect(&mut self, pdu: &ProtectedPdu) -> Result<BitString, PdcpError> {
        if pdu.bearer != self.config.bearer {
            return Err(PdcpError::BearerMismatch {
                expected: self.config.bearer.value(),
                got: pdu.bearer.value(),
            });
        }
        match self.config.plane {
            Plane::User => Ok(self
                .config
                .apply_cipher(pdu.count, pdu.direction, &pdu.body)),
            Plane::Control => {
                if pdu.body.len_bits() < 33 {
                    return Err(PdcpError::Malformed {
                        bits: pdu.body.len_bits(),
                    });
                }
                let deciphered = self
                    .config
                    .apply_cipher(pdu.count, pdu.direction, &pdu.body);
                let (payload, mac_bits) = deciphered.split_at_bit(deciphered.len_bits() - 32);
                let received = MacTag32::from_bytes(mac_bits.as_bytes().try_into().unwrap());

                let authentic = self.config.integrity_is_null()
                    || self
                        .config
                        .compute_mac(pdu.count, pdu.direction, &payload)
                        .ct_eq(&received);
                if !authentic {
                    return Err(PdcpError::MacMismatch);
                }
                if let Some(highest) = self.highest_accepted {
                    if pdu.count <= highest {
                        return Err(PdcpError::ReplayDetected {
                            count: pdu.count,
                            highest,
                        });
                    }
                }
                self.highest_accepted = Some(pdu.count);
                Ok(payload)
            }
        }
    }
}
