//! Wire codec: one kind byte, then each field as `u32_be(len) || bytes`.

use crate::encoding::{decode_fields, push_field, DecodeError};

pub const KIND_MSG1: u8 = 1;
pub const KIND_MSG2: u8 = 2;
pub const KIND_MSG3: u8 = 3;
pub const KIND_MSG4: u8 = 4;

/// `m_1 = (X_e, C_I, EAD_1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message1 {
    pub x_e: Vec<u8>,
    pub c_i: Vec<u8>,
    pub ead1: Vec<u8>,
}

/// `(Y_e, c_2, C_R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message2 {
    pub y_e: Vec<u8>,
    pub c2: Vec<u8>,
    pub c_r: Vec<u8>,
}

/// Baseline: `c_3` only. Improved: `c_3` plus the cleartext `m'_3 = t_3 || EAD_3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message3 {
    pub c3: Vec<u8>,
    pub m3_prime: Option<Vec<u8>>,
}

/// Improved variant only: `(c_4, m'_4 = EAD_4)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message4 {
    pub c4: Vec<u8>,
    pub m4_prime: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireMessage {
    Msg1(Message1),
    Msg2(Message2),
    Msg3(Message3),
    Msg4(Message4),
}

impl WireMessage {
    pub fn kind(&self) -> u8 {
        match self {
            WireMessage::Msg1(_) => KIND_MSG1,
            WireMessage::Msg2(_) => KIND_MSG2,
            WireMessage::Msg3(_) => KIND_MSG3,
            WireMessage::Msg4(_) => KIND_MSG4,
        }
    }

    fn fields(&self) -> Vec<&[u8]> {
        match self {
            WireMessage::Msg1(m) => vec![&m.x_e, &m.c_i, &m.ead1],
            WireMessage::Msg2(m) => vec![&m.y_e, &m.c2, &m.c_r],
            WireMessage::Msg3(m) => match &m.m3_prime {
                None => vec![&m.c3],
                Some(m3p) => vec![&m.c3, m3p],
            },
            WireMessage::Msg4(m) => vec![&m.c4, &m.m4_prime],
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let fields = self.fields();
        let mut out = Vec::with_capacity(1 + fields.iter().map(|f| f.len() + 4).sum::<usize>());
        out.push(self.kind());
        for field in fields {
            push_field(&mut out, field);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let (&kind, body) = bytes.split_first().ok_or(DecodeError::Empty)?;
        if !(KIND_MSG1..=KIND_MSG4).contains(&kind) {
            return Err(DecodeError::UnknownKind(kind));
        }
        let fields = decode_fields(body)?;
        let own = |i: usize| fields[i].to_vec();
        let msg = match (kind, fields.len()) {
            (KIND_MSG1, 3) => WireMessage::Msg1(Message1 { x_e: own(0), c_i: own(1), ead1: own(2) }),
            (KIND_MSG2, 3) => WireMessage::Msg2(Message2 { y_e: own(0), c2: own(1), c_r: own(2) }),
            (KIND_MSG3, 1) => WireMessage::Msg3(Message3 { c3: own(0), m3_prime: None }),
            (KIND_MSG3, 2) => WireMessage::Msg3(Message3 { c3: own(0), m3_prime: Some(own(1)) }),
            (KIND_MSG4, 2) => WireMessage::Msg4(Message4 { c4: own(0), m4_prime: own(1) }),
            (kind, fields) => return Err(DecodeError::FieldCount { kind, fields }),
        };
        Ok(msg)
    }

    /// Protocol-level size: the sum of field contents, without framing.
    pub fn payload_len(&self) -> usize {
        self.fields().iter().map(|f| f.len()).sum()
    }
}

macro_rules! impl_message {
    ($ty:ident, $variant:ident, $kind:expr) => {
        impl $ty {
            pub fn encode(&self) -> Vec<u8> {
                WireMessage::$variant(self.clone()).encode()
            }

            pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
                match WireMessage::decode(bytes)? {
                    WireMessage::$variant(m) => Ok(m),
                    other => Err(DecodeError::UnexpectedKind { expected: $kind, found: other.kind() }),
                }
            }
        }

        impl From<$ty> for WireMessage {
            fn from(m: $ty) -> Self {
                WireMessage::$variant(m)
            }
        }
    };
}

impl_message!(Message1, Msg1, KIND_MSG1);
impl_message!(Message2, Msg2, KIND_MSG2);
impl_message!(Message3, Msg3, KIND_MSG3);
impl_message!(Message4, Msg4, KIND_MSG4);
