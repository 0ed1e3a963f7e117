//! Frame-dependent inputs shared by the confidentiality and integrity
//! algorithms: the 32-bit COUNT, the 5-bit BEARER identity and the 1-bit
//! DIRECTION, packed as `COUNT[0..31] ‖ BEARER[0..4] ‖ DIRECTION ‖ 0^26`
//! into the high 64 bits of both the CTR counter block and the CMAC input.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("bearer identity {0:#04x} out of range (5-bit field, must be < 32)")]
    BearerOutOfRange(u8),
}

/// A 5-bit service bearer identity. Construction rejects values >= 32
/// instead of masking them; silent truncation hides caller bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bearer(u8);

impl Bearer {
    pub fn new(value: u8) -> Result<Self, ParamError> {
        if value < 32 {
            Ok(Bearer(value))
        } else {
            Err(ParamError::BearerOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// Transmission direction: 0 for uplink, 1 for downlink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn bit(self) -> u8 {
        match self {
            Direction::Uplink => 0,
            Direction::Downlink => 1,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Uplink => Direction::Downlink,
            Direction::Downlink => Direction::Uplink,
        }
    }
}

/// Packs `COUNT ‖ BEARER ‖ DIRECTION ‖ 0^26`, most significant bit first:
/// COUNT[0] lands in bit 0, BEARER[0] in bit 32, DIRECTION in bit 37,
/// bits 38..63 are zero.
pub fn pack_frame_header(count: u32, bearer: Bearer, direction: Direction) -> [u8; 8] {
    let mut header = [0u8; 8];
    header[..4].copy_from_slice(&count.to_be_bytes());
    header[4] = (bearer.value() << 3) | (direction.bit() << 2);
    header
}
