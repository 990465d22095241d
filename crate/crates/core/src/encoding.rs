//! Length-prefixed tuple encoding: every field is `u32_be(len) || bytes`.
//!
//! Used for transcript-hash inputs, `CTX_2`/`CTX_3` and the fields of wire
//! frames, so variable-length fields never run into each other.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("empty input")]
    Empty,
    #[error("input truncated inside a length prefix or field")]
    Truncated,
    #[error("unknown message kind {0:#04x}")]
    UnknownKind(u8),
    #[error("expected message kind {expected:#04x}, found {found:#04x}")]
    UnexpectedKind { expected: u8, found: u8 },
    #[error("message kind {kind:#04x} cannot carry {fields} fields")]
    FieldCount { kind: u8, fields: usize },
}

pub fn push_field(out: &mut Vec<u8>, field: &[u8]) {
    out.extend_from_slice(&(field.len() as u32).to_be_bytes());
    out.extend_from_slice(field);
}

pub fn encode_tuple(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(fields.iter().map(|f| f.len() + 4).sum());
    for field in fields {
        push_field(&mut out, field);
    }
    out
}

/// Splits a concatenation of length-prefixed fields. Fails unless the input
/// is consumed exactly.
pub fn decode_fields(mut input: &[u8]) -> Result<Vec<&[u8]>, DecodeError> {
    let mut fields = Vec::new();
    while !input.is_empty() {
        let (len, rest) = input.split_first_chunk::<4>().ok_or(DecodeError::Truncated)?;
        let len = u32::from_be_bytes(*len) as usize;
        if rest.len() < len {
            return Err(DecodeError::Truncated);
        }
        let (field, rest) = rest.split_at(len);
        fields.push(field);
        input = rest;
    }
    Ok(fields)
}
