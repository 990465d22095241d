//! Cipher-suite parameters.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::crypto::Curve;

/// Which protocol flavour a suite runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Three messages; `m_3` sealed with AES-CCM under `sk_3`/`IV_3`.
    Baseline,
    /// Four messages; `ID_I` one-time-padded under `sk_3`, `t_3` widened to
    /// `lSEC` bits and sent in the clear, `TH_2` salts `PRK_2e`, and the
    /// responder answers with an AEAD-protected fourth flow.
    Improved,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Baseline => "baseline",
            Variant::Improved => "improved",
        })
    }
}

impl FromStr for Variant {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "improved" => Ok(Variant::Improved),
            other => Err(ParamError::Unknown(format!("variant `{other}`"))),
        }
    }
}

impl FromStr for Curve {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x25519" => Ok(Curve::X25519),
            "p256" => Ok(Curve::P256),
            other => Err(ParamError::Unknown(format!("curve `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("unknown {0}")]
    Unknown(String),
    #[error("{field} = {value} is invalid: {reason}")]
    Invalid { field: &'static str, value: usize, reason: &'static str },
}

/// All length and algorithm parameters of a suite instance. Bit lengths
/// throughout, matching the protocol description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SuiteParams {
    pub curve: Curve,
    pub variant: Variant,
    /// Hash digest length (SHA-256).
    pub hash_bits: usize,
    /// Tag length of `t_2`, and of `t_3` in the baseline.
    pub mac_bits: usize,
    /// Tag length of `t_3` in the improved variant.
    pub sec_bits: usize,
    pub key_bits: usize,
    pub iv_bits: usize,
    /// Encoded identity length, equal for every identity of a deployment.
    pub id_bits: usize,
    /// Connection identifier length.
    pub conn_id_bits: usize,
}

impl SuiteParams {
    /// Cipher suites 0 (X25519) and 2 (P-256): AES-CCM-16-64-128, SHA-256,
    /// 64-bit MACs.
    pub fn new(curve: Curve, variant: Variant) -> Self {
        SuiteParams {
            curve,
            variant,
            hash_bits: 256,
            mac_bits: 64,
            sec_bits: 128,
            key_bits: 128,
            iv_bits: 104,
            id_bits: 32,
            conn_id_bits: 32,
        }
    }

    pub fn baseline(curve: Curve) -> Self {
        Self::new(curve, Variant::Baseline)
    }

    pub fn improved(curve: Curve) -> Self {
        Self::new(curve, Variant::Improved)
    }

    pub fn with_mac_bits(mut self, bits: usize) -> Self {
        self.mac_bits = bits;
        self
    }

    pub fn with_sec_bits(mut self, bits: usize) -> Self {
        self.sec_bits = bits;
        self
    }

    pub fn with_conn_id_bits(mut self, bits: usize) -> Self {
        self.conn_id_bits = bits;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let invalid = |field, value, reason| Err(ParamError::Invalid { field, value, reason });
        if self.hash_bits != 256 {
            return invalid("lH", self.hash_bits, "SHA-256 digests are 256 bits");
        }
        if self.key_bits != 128 {
            return invalid("lkey", self.key_bits, "AES-128 keys are 128 bits");
        }
        if self.iv_bits != 104 {
            return invalid("lIV", self.iv_bits, "CCM-16 nonces are 13 bytes");
        }
        if self.mac_bits == 0 || self.mac_bits > self.hash_bits {
            return invalid("lMAC", self.mac_bits, "must be in 1..=256");
        }
        if self.sec_bits == 0 || self.sec_bits > self.hash_bits {
            return invalid("lSEC", self.sec_bits, "must be in 1..=256");
        }
        if self.variant == Variant::Improved && self.sec_bits < self.mac_bits {
            return invalid("lSEC", self.sec_bits, "must be at least lMAC");
        }
        if self.id_bits == 0 || !self.id_bits.is_multiple_of(8) || self.id_bits > 1024 {
            return invalid("lid", self.id_bits, "must be a positive whole number of bytes, at most 128");
        }
        if self.conn_id_bits == 0 || !self.conn_id_bits.is_multiple_of(8) || self.conn_id_bits > 256 {
            return invalid("nl", self.conn_id_bits, "must be a positive whole number of bytes, at most 32");
        }
        Ok(())
    }

    pub fn id_len(&self) -> usize {
        self.id_bits / 8
    }

    pub fn conn_id_len(&self) -> usize {
        self.conn_id_bits / 8
    }

    /// Bytes used to carry `t_2`.
    pub fn t2_len(&self) -> usize {
        self.mac_bits.div_ceil(8)
    }

    /// Length of `t_3` in bits: `lMAC` in the baseline, `lSEC` when improved.
    pub fn t3_bits(&self) -> usize {
        match self.variant {
            Variant::Baseline => self.mac_bits,
            Variant::Improved => self.sec_bits,
        }
    }

    pub fn t3_len(&self) -> usize {
        self.t3_bits().div_ceil(8)
    }

    /// CCM tag length. Equals `lMAC` whenever `lMAC` is a legal CCM tag size
    /// (32, 48, ..., 128); otherwise rounded up to the next legal size.
    pub fn aead_tag_bits(&self) -> usize {
        (self.mac_bits.div_ceil(16) * 16).clamp(32, 128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_suite_zero() {
        let s = SuiteParams::baseline(Curve::X25519);
        s.validate().unwrap();
        assert_eq!((s.hash_bits, s.mac_bits, s.key_bits, s.iv_bits), (256, 64, 128, 104));
        assert_eq!(s.t2_len(), 8);
        assert_eq!(s.t3_len(), 8);
        assert_eq!(s.aead_tag_bits(), 64);
        assert_eq!(SuiteParams::improved(Curve::P256).t3_len(), 16);
    }

    #[test]
    fn rejects_inconsistent_parameters() {
        let s = SuiteParams::improved(Curve::X25519).with_mac_bits(64).with_sec_bits(32);
        assert!(s.validate().is_err());
        assert!(SuiteParams::baseline(Curve::X25519).with_mac_bits(0).validate().is_err());
        let mut s = SuiteParams::baseline(Curve::X25519);
        s.iv_bits = 96;
        assert!(s.validate().is_err());
    }

    #[test]
    fn aead_tag_rounds_to_ccm_sizes() {
        let tag = |m| SuiteParams::baseline(Curve::X25519).with_mac_bits(m).aead_tag_bits();
        assert_eq!(tag(8), 32);
        assert_eq!(tag(40), 48);
        assert_eq!(tag(64), 64);
        assert_eq!(tag(200), 128);
    }

    #[test]
    fn parses_names() {
        assert_eq!("improved".parse::<Variant>().unwrap(), Variant::Improved);
        assert_eq!("p256".parse::<Curve>().unwrap(), Curve::P256);
        assert!("p384".parse::<Curve>().is_err());
    }
}
