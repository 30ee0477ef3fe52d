//! Storage overhead of what the DC keeps until a slot closes.
//!
//! Each submission carries `<U, V, m, SN'>`. Unbatched, the DC keeps all four
//! for every participant. Batched, `U` and `V` are folded into one running
//! pair as submissions arrive, so only the messages grow with `n`:
//! `SO = u + v + n * m + sn`.

use serde::{Deserialize, Serialize};

use crate::envelope::{SerialPlaintext, TAG_BYTES};
use crate::error::{Error, Result};
use crate::group::PairingBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageMode {
    /// 512-bit points, 160-bit serial number and message.
    Paper,
    /// Sizes taken from the serializer of a concrete backend.
    Actual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageModel {
    pub u_bits: u64,
    pub v_bits: u64,
    pub sn_bits: u64,
    pub m_bits: u64,
    pub mode: StorageMode,
}

impl StorageModel {
    pub const fn paper() -> Self {
        StorageModel {
            u_bits: 512,
            v_bits: 512,
            sn_bits: 160,
            m_bits: 160,
            mode: StorageMode::Paper,
        }
    }

    /// Compressed point sizes and the full sealed serial-number length for `B`.
    pub fn actual<B: PairingBackend>(message_bits: u64) -> Self {
        StorageModel {
            u_bits: 8 * B::G1_BYTES as u64,
            v_bits: 8 * B::G1_BYTES as u64,
            sn_bits: 8 * sealed_serial_bytes::<B>() as u64,
            m_bits: message_bits,
            mode: StorageMode::Actual,
        }
    }

    pub fn per_submission(&self) -> u64 {
        self.u_bits + self.v_bits + self.m_bits + self.sn_bits
    }
}

/// Bytes of `SN'` on the wire: ephemeral point, tag, and the fixed-width plaintext.
pub fn sealed_serial_bytes<B: PairingBackend>() -> usize {
    B::G1_BYTES + TAG_BYTES + SerialPlaintext::<B>::LEN
}

pub fn storage_batch(n: u64, model: &StorageModel) -> Result<u64> {
    if n == 0 {
        return Err(Error::NonPositiveN);
    }
    Ok(model.u_bits + model.v_bits + n * model.m_bits + model.sn_bits)
}

pub fn storage_unbatched(n: u64, model: &StorageModel) -> Result<u64> {
    if n == 0 {
        return Err(Error::NonPositiveN);
    }
    Ok(n * model.per_submission())
}
