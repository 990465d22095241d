//! The STAT/STAT derivation pipeline.
//!
//! ```text
//! g^(xe ye) --Ext(salt_2e)--> PRK_2e   --Exp 0--> sk_2,  --Exp 1--> salt_3e2m
//! g^(xe ys) --Ext(salt_3e2m)-> PRK_3e2m --Exp 2--> t_2,   --Exp 3/4--> sk_3/IV_3, --Exp 5--> salt_4e3m
//! g^(xs ye) --Ext(salt_4e3m)-> PRK_4e3m --Exp 6--> t_3,   --Exp 8/9--> sk_4/IV_4, --Exp 7--> PRK_out
//! ```
//!
//! `salt_2e` is empty in the baseline and `TH_2` in the improved variant.
//! The improved variant also sizes `sk_3` to the identity length and drops
//! `IV_3`.

use thiserror::Error;

use crate::crypto::{self, CryptoError, Digest, Prk, AEAD_KEY_LEN, AEAD_NONCE_LEN, HASH_LEN};
use crate::encoding::encode_tuple;
use crate::suite::{SuiteParams, Variant};

/// Expand labels.
pub mod label {
    pub const SK_2: u8 = 0;
    pub const SALT_3E2M: u8 = 1;
    pub const MAC_2: u8 = 2;
    pub const SK_3: u8 = 3;
    pub const IV_3: u8 = 4;
    pub const SALT_4E3M: u8 = 5;
    pub const MAC_3: u8 = 6;
    pub const PRK_OUT: u8 = 7;
    pub const SK_4: u8 = 8;
    pub const IV_4: u8 = 9;
    /// Smallest label available to exporter callers.
    pub const FIRST_EXPORTER: u8 = 16;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyScheduleError {
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("derivation exists only in the {0} variant")]
    VariantMismatch(Variant),
    #[error("exporter label {0} collides with protocol labels (must be >= 16)")]
    ReservedLabel(u8),
}

/// Final session key, `SK = PRK_out`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionKey(pub [u8; HASH_LEN]);

impl SessionKey {
    pub fn fingerprint(&self) -> String {
        crypto::fingerprint(&self.0)
    }
}

impl std::fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SessionKey({})", self.fingerprint())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranscriptState {
    pub th2: Option<Digest>,
    pub th3: Option<Digest>,
    pub th4: Option<Digest>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrkChain {
    pub prk2e: Option<Prk>,
    pub salt3e2m: Option<Digest>,
    pub prk3e2m: Option<Prk>,
    pub salt4e3m: Option<Digest>,
    pub prk4e3m: Option<Prk>,
    pub prk_out: Option<Prk>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerivedMaterial {
    pub sk2: Option<Vec<u8>>,
    pub t2: Option<Vec<u8>>,
    pub sk3: Option<Vec<u8>>,
    pub iv3: Option<[u8; AEAD_NONCE_LEN]>,
    pub t3: Option<Vec<u8>>,
    pub sk4: Option<[u8; AEAD_KEY_LEN]>,
    pub iv4: Option<[u8; AEAD_NONCE_LEN]>,
}

fn digest(bytes: Vec<u8>) -> Digest {
    bytes.try_into().expect("expand returned one hash length")
}

// Fixed-length derivations cannot overflow the HKDF limit.
fn expand_fixed(prk: &Prk, label: u8, context: &[u8], bits: usize) -> Vec<u8> {
    crypto::expand(prk, label, context, bits).expect("fixed output length within HKDF limit")
}

/// `TH_2 = H(Y_e, C_R, H(m_1))`.
pub fn compute_th2(y_e: &[u8], c_r: &[u8], m1: &[u8]) -> Digest {
    crypto::hash(&encode_tuple(&[y_e, c_r, &crypto::hash(m1)]))
}

/// `TH_3 = H(TH_2, m_2)` with `m_2` the plaintext of `c_2`.
pub fn compute_th3(th2: &Digest, m2: &[u8]) -> Digest {
    crypto::hash(&encode_tuple(&[th2, m2]))
}

/// `TH_4 = H(TH_3, m_3)` in the baseline, `H(TH_3, m_3, m'_3)` when improved.
pub fn compute_th4(th3: &Digest, m3: &[u8], m3_prime: Option<&[u8]>) -> Digest {
    match m3_prime {
        None => crypto::hash(&encode_tuple(&[th3, m3])),
        Some(m3p) => crypto::hash(&encode_tuple(&[th3, m3, m3p])),
    }
}

pub fn derive_prk2e(suite: &SuiteParams, th2: &Digest, gxy: &[u8]) -> Prk {
    match suite.variant {
        Variant::Baseline => crypto::extract(b"", gxy),
        Variant::Improved => crypto::extract(th2, gxy),
    }
}

/// `(sk_2, salt_3e2m)`; `sk_2` is `pt_bits` long to pad the whole of `m_2`.
pub fn derive_message2_material(prk2e: &Prk, th2: &Digest, pt_bits: usize) -> Result<(Vec<u8>, Digest), CryptoError> {
    let sk2 = crypto::expand(prk2e, label::SK_2, th2, pt_bits)?;
    let salt = digest(expand_fixed(prk2e, label::SALT_3E2M, th2, 8 * HASH_LEN));
    Ok((sk2, salt))
}

/// `PRK_3e2m = Ext(salt_3e2m, g^(xe ys))`, and likewise `PRK_4e3m`.
pub fn derive_chained_prk(salt: &Digest, shared: &[u8]) -> Prk {
    crypto::extract(salt, shared)
}

/// `CTX_2 = (ID_R, TH_2, Y_s, EAD_2)`.
pub fn ctx2(id_r: &[u8], th2: &Digest, y_s: &[u8], ead2: &[u8]) -> Vec<u8> {
    encode_tuple(&[id_r, th2, y_s, ead2])
}

/// `CTX_3 = (ID_I, TH_3, X_s, EAD_3)`.
pub fn ctx3(id_i: &[u8], th3: &Digest, x_s: &[u8], ead3: &[u8]) -> Vec<u8> {
    encode_tuple(&[id_i, th3, x_s, ead3])
}

pub fn derive_t2(prk3e2m: &Prk, ctx2: &[u8], mac_bits: usize) -> Vec<u8> {
    expand_fixed(prk3e2m, label::MAC_2, ctx2, mac_bits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message3Material {
    /// AEAD key (baseline) or one-time pad of identity length (improved).
    pub sk3: Vec<u8>,
    /// Baseline only.
    pub iv3: Option<[u8; AEAD_NONCE_LEN]>,
    pub salt4e3m: Digest,
}

pub fn derive_message3_material(prk3e2m: &Prk, th3: &Digest, suite: &SuiteParams) -> Message3Material {
    let (sk3, iv3) = match suite.variant {
        Variant::Baseline => {
            let sk3 = expand_fixed(prk3e2m, label::SK_3, th3, suite.key_bits);
            let iv3 = expand_fixed(prk3e2m, label::IV_3, th3, suite.iv_bits);
            (sk3, Some(iv3.try_into().expect("IV is 13 bytes")))
        }
        Variant::Improved => (expand_fixed(prk3e2m, label::SK_3, th3, suite.id_bits), None),
    };
    let salt4e3m = digest(expand_fixed(prk3e2m, label::SALT_4E3M, th3, 8 * HASH_LEN));
    Message3Material { sk3, iv3, salt4e3m }
}

pub fn derive_t3(prk4e3m: &Prk, ctx3: &[u8], suite: &SuiteParams) -> Vec<u8> {
    expand_fixed(prk4e3m, label::MAC_3, ctx3, suite.t3_bits())
}

/// `(sk_4, IV_4)` for the fourth flow.
pub fn derive_message4_material(
    prk4e3m: &Prk,
    th4: &Digest,
    suite: &SuiteParams,
) -> Result<([u8; AEAD_KEY_LEN], [u8; AEAD_NONCE_LEN]), KeyScheduleError> {
    if suite.variant != Variant::Improved {
        return Err(KeyScheduleError::VariantMismatch(Variant::Improved));
    }
    let sk4 = expand_fixed(prk4e3m, label::SK_4, th4, suite.key_bits);
    let iv4 = expand_fixed(prk4e3m, label::IV_4, th4, suite.iv_bits);
    Ok((sk4.try_into().expect("16 bytes"), iv4.try_into().expect("13 bytes")))
}

/// `SK = PRK_out = Exp(PRK_4e3m, 7, TH_4, lH)`.
pub fn derive_session_key(prk4e3m: &Prk, th4: &Digest) -> SessionKey {
    SessionKey(digest(expand_fixed(prk4e3m, label::PRK_OUT, th4, 8 * HASH_LEN)))
}

/// Application key export: `Exp(PRK_4e3m, label, TH_4 || context, bits)`.
/// `TH_4` has fixed length, so the plain concatenation is unambiguous.
pub fn exporter(
    prk4e3m: &Prk,
    th4: &Digest,
    label: u8,
    context: &[u8],
    out_bits: usize,
) -> Result<Vec<u8>, KeyScheduleError> {
    if label < label::FIRST_EXPORTER {
        return Err(KeyScheduleError::ReservedLabel(label));
    }
    let mut info_ctx = th4.to_vec();
    info_ctx.extend_from_slice(context);
    Ok(crypto::expand(prk4e3m, label, &info_ctx, out_bits)?)
}

/// Key update: `PRK_4e3m' = Ext(nonce, PRK_4e3m)`.
pub fn key_update(prk4e3m: &Prk, nonce: &[u8]) -> Prk {
    crypto::extract(nonce, prk4e3m.as_bytes())
}
