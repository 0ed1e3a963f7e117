//! EPS algorithm identifiers. Each EEA/EIA algorithm carries a 4-bit
//! identifier; this registry maps every (kind, code) pair to a capability,
//! distinguishing algorithms implemented here, SNOW-3G-based algorithms
//! that are standardized but external to this crate, and codes reserved
//! for future use.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgoIdError {
    #[error("algorithm code {0:#x} out of range (4-bit field, must be < 16)")]
    CodeOutOfRange(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    Confidentiality,
    Integrity,
}

/// A (kind, 4-bit code) algorithm identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgoId {
    kind: AlgoKind,
    code: u8,
}

impl AlgoId {
    pub fn new(kind: AlgoKind, code: u8) -> Result<Self, AlgoIdError> {
        if code < 16 {
            Ok(AlgoId { kind, code })
        } else {
            Err(AlgoIdError::CodeOutOfRange(code))
        }
    }

    pub fn kind(self) -> AlgoKind {
        self.kind
    }

    pub fn code(self) -> u8 {
        self.code
    }
}

/// Identifier codes defined for both algorithm families.
pub mod code {
    /// Null algorithm (EEA0 / EIA0).
    pub const NULL: u8 = 0b0000;
    /// SNOW 3G based (128-EEA1 / 128-EIA1).
    pub const SNOW3G: u8 = 0b0001;
    /// AES based (128-EEA2 / 128-EIA2).
    pub const AES: u8 = 0b0010;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoStatus {
    /// Implemented by this crate.
    Implemented,
    /// Standardized but not implemented here (the SNOW 3G set).
    UnsupportedExternal,
    /// Reserved for future use.
    Reserved,
}

/// What a given identifier resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgoCapability {
    pub id: AlgoId,
    pub status: AlgoStatus,
    pub name: &'static str,
}

impl AlgoCapability {
    pub fn is_implemented(&self) -> bool {
        self.status == AlgoStatus::Implemented
    }
}

impl fmt::Display for AlgoCapability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// Resolves any of the 32 (kind, code) pairs to its capability.
pub fn resolve(id: AlgoId) -> AlgoCapability {
    let (status, name) = match (id.kind(), id.code()) {
        (AlgoKind::Confidentiality, code::NULL) => (AlgoStatus::Implemented, "EEA0"),
        (AlgoKind::Confidentiality, code::SNOW3G) => (AlgoStatus::UnsupportedExternal, "128-EEA1"),
        (AlgoKind::Confidentiality, code::AES) => (AlgoStatus::Implemented, "128-EEA2"),
        (AlgoKind::Integrity, code::NULL) => (AlgoStatus::Implemented, "EIA0"),
        (AlgoKind::Integrity, code::SNOW3G) => (AlgoStatus::UnsupportedExternal, "128-EIA1"),
        (AlgoKind::Integrity, code::AES) => (AlgoStatus::Implemented, "128-EIA2"),
        (AlgoKind::Confidentiality, _) => (AlgoStatus::Reserved, "reserved"),
        (AlgoKind::Integrity, _) => (AlgoStatus::Reserved, "reserved"),
    };
    AlgoCapability { id, status, name }
}
