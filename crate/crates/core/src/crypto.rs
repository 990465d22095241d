//! Cryptographic building blocks: Diffie-Hellman over X25519 or P-256,
//! SHA-256, HKDF extract/expand, the XOR one-time pad and AES-CCM.
//!
//! Tag lengths are runtime parameters so that the forgery experiments can
//! shrink them to a few bits.

use std::fmt;

use aes::Aes128;
use ccm::aead::generic_array::GenericArray;
use ccm::aead::{Aead, KeyInit, Payload};
use ccm::consts::{U10, U12, U13, U14, U16, U4, U6, U8};
use ccm::Ccm;
use hkdf::Hkdf;
use p256::elliptic_curve::sec1::ToEncodedPoint;
use rand::RngCore;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// Digest length of SHA-256 in bytes.
pub const HASH_LEN: usize = 32;
/// AES-CCM key length in bytes (AES-128).
pub const AEAD_KEY_LEN: usize = 16;
/// AES-CCM nonce length in bytes (CCM-16: two-byte length field).
pub const AEAD_NONCE_LEN: usize = 13;
/// Largest plaintext accepted by CCM with a two-byte length field.
pub const AEAD_MAX_PLAINTEXT: usize = (1 << 16) - 1;

pub type Digest = [u8; HASH_LEN];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("public key is not a valid {0:?} group element")]
    InvalidPoint(Curve),
    #[error("secret scalar is out of range for {0:?}")]
    InvalidScalar(Curve),
    #[error("Diffie-Hellman output is the all-zero value")]
    LowOrderPoint,
    #[error("key curve {secret:?} does not match peer curve {public:?}")]
    CurveMismatch { secret: Curve, public: Curve },
    #[error("requested {requested} bits exceeds the HKDF limit of {max} bits")]
    LengthOverflow { requested: usize, max: usize },
    #[error("one-time pad key is {key} bytes but message is {msg} bytes")]
    LengthMismatch { key: usize, msg: usize },
    #[error("invalid AEAD parameter: {0}")]
    AeadParameter(&'static str),
    #[error("AEAD authentication failed")]
    Authentication,
}

/// Elliptic curve of the Diffie-Hellman group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curve {
    X25519,
    P256,
}

impl Curve {
    /// Encoded public-key length: raw u-coordinate for X25519, compressed
    /// SEC1 point for P-256.
    pub fn public_len(self) -> usize {
        match self {
            Curve::X25519 => 32,
            Curve::P256 => 33,
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curve::X25519 => "x25519",
            Curve::P256 => "p256",
        })
    }
}

/// Private scalar of a Diffie-Hellman key pair.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    curve: Curve,
    bytes: [u8; 32],
}

impl SecretKey {
    /// Wraps raw scalar bytes. P-256 scalars must lie in `[1, n-1]`
    /// (big-endian); X25519 scalars are clamped at use, as usual.
    pub fn from_bytes(curve: Curve, bytes: [u8; 32]) -> Result<Self, CryptoError> {
        if curve == Curve::P256 {
            p256::SecretKey::from_slice(&bytes).map_err(|_| CryptoError::InvalidScalar(curve))?;
        }
        Ok(SecretKey { curve, bytes })
    }

    pub fn curve(&self) -> Curve {
        self.curve
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.bytes
    }

    /// The public element `g^secret`.
    pub fn public_key(&self) -> PublicKey {
        let bytes = match self.curve {
            Curve::X25519 => {
                let secret = x25519_dalek::StaticSecret::from(self.bytes);
                x25519_dalek::PublicKey::from(&secret).as_bytes().to_vec()
            }
            Curve::P256 => {
                let secret = p256::SecretKey::from_slice(&self.bytes)
                    .expect("scalar range checked at construction");
                secret.public_key().to_encoded_point(true).as_bytes().to_vec()
            }
        };
        PublicKey { curve: self.curve, bytes }
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey").field("curve", &self.curve).finish_non_exhaustive()
    }
}

/// Encoded public group element.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PublicKey {
    curve: Curve,
    bytes: Vec<u8>,
}

impl PublicKey {
    /// Wraps an encoded element. Validity is checked when the element is
    /// used in [`dh_shared`], not here, so malformed wire input can be
    /// carried around and rejected at the point of use.
    pub fn from_bytes(curve: Curve, bytes: impl Into<Vec<u8>>) -> Self {
        PublicKey { curve, bytes: bytes.into() }
    }

    pub fn curve(&self) -> Curve {
        self.curve
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({}, {})", self.curve, hex(&self.bytes))
    }
}

/// A long-term or ephemeral Diffie-Hellman key pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub secret: SecretKey,
    pub public: PublicKey,
}

impl KeyPair {
    pub fn from_secret(secret: SecretKey) -> Self {
        let public = secret.public_key();
        KeyPair { secret, public }
    }

    pub fn curve(&self) -> Curve {
        self.secret.curve
    }
}

/// Samples a fresh key pair on `curve`.
pub fn dh_keygen<R: RngCore + ?Sized>(rng: &mut R, curve: Curve) -> KeyPair {
    loop {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        // Rejection sampling for P-256; X25519 accepts every string.
        if let Ok(secret) = SecretKey::from_bytes(curve, bytes) {
            return KeyPair::from_secret(secret);
        }
    }
}

/// Shared secret `peer^secret`: the u-coordinate for X25519, the affine
/// x-coordinate for P-256.
pub fn dh_shared(secret: &SecretKey, peer: &PublicKey) -> Result<[u8; 32], CryptoError> {
    if secret.curve != peer.curve {
        return Err(CryptoError::CurveMismatch { secret: secret.curve, public: peer.curve });
    }
    match secret.curve {
        Curve::X25519 => {
            let point: [u8; 32] = peer
                .bytes
                .as_slice()
                .try_into()
                .map_err(|_| CryptoError::InvalidPoint(Curve::X25519))?;
            let shared = x25519_dalek::StaticSecret::from(secret.bytes)
                .diffie_hellman(&x25519_dalek::PublicKey::from(point));
            if !shared.was_contributory() {
                return Err(CryptoError::LowOrderPoint);
            }
            Ok(shared.to_bytes())
        }
        Curve::P256 => {
            // Only the compressed encoding the suite puts on the wire.
            if peer.bytes.len() != Curve::P256.public_len() || !matches!(peer.bytes[0], 0x02 | 0x03) {
                return Err(CryptoError::InvalidPoint(Curve::P256));
            }
            let public = p256::PublicKey::from_sec1_bytes(&peer.bytes)
                .map_err(|_| CryptoError::InvalidPoint(Curve::P256))?;
            let scalar = p256::SecretKey::from_slice(&secret.bytes)
                .map_err(|_| CryptoError::InvalidScalar(Curve::P256))?
                .to_nonzero_scalar();
            let shared = p256::ecdh::diffie_hellman(scalar, public.as_affine());
            Ok((*shared.raw_secret_bytes()).into())
        }
    }
}

pub fn hash(data: &[u8]) -> Digest {
    Sha256::digest(data).into()
}

/// A pseudorandom key produced by HKDF-Extract.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prk([u8; HASH_LEN]);

impl Prk {
    pub fn from_bytes(bytes: [u8; HASH_LEN]) -> Self {
        Prk(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; HASH_LEN] {
        &self.0
    }
}

impl fmt::Debug for Prk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prk({})", fingerprint(&self.0))
    }
}

/// HKDF-Extract with SHA-256. An empty salt is the zero-filled key, as in
/// HMAC's key padding.
pub fn extract(salt: &[u8], ikm: &[u8]) -> Prk {
    let (prk, _) = Hkdf::<Sha256>::extract(Some(salt), ikm);
    Prk(prk.into())
}

/// Upper bound on expand output, in bits.
pub const MAX_EXPAND_BITS: usize = 255 * HASH_LEN * 8;

/// `info = u8(label) || u32_be(|context|) || context || u16_be(out_len_bits)`.
pub fn encode_info(label: u8, context: &[u8], out_len_bits: u16) -> Vec<u8> {
    let mut info = Vec::with_capacity(context.len() + 7);
    info.push(label);
    info.extend_from_slice(&(context.len() as u32).to_be_bytes());
    info.extend_from_slice(context);
    info.extend_from_slice(&out_len_bits.to_be_bytes());
    info
}

/// HKDF-Expand over the labelled info encoding.
///
/// Output is `ceil(out_len_bits / 8)` bytes. When the bit length is not a
/// multiple of 8 the unused low-order bits of the last byte are zero, so a
/// tag of `n` bits has exactly `2^n` possible encodings.
pub fn expand(prk: &Prk, label: u8, context: &[u8], out_len_bits: usize) -> Result<Vec<u8>, CryptoError> {
    if out_len_bits > MAX_EXPAND_BITS {
        return Err(CryptoError::LengthOverflow { requested: out_len_bits, max: MAX_EXPAND_BITS });
    }
    let info = encode_info(label, context, out_len_bits as u16);
    let mut out = expand_raw(prk, &info, out_len_bits.div_ceil(8))?;
    mask_trailing_bits(&mut out, out_len_bits);
    Ok(out)
}

/// Plain HKDF-Expand with caller-supplied `info`.
pub fn expand_raw(prk: &Prk, info: &[u8], out_len: usize) -> Result<Vec<u8>, CryptoError> {
    let hk = Hkdf::<Sha256>::from_prk(&prk.0).expect("PRK is exactly one hash length");
    let mut out = vec![0u8; out_len];
    hk.expand(info, &mut out)
        .map_err(|_| CryptoError::LengthOverflow { requested: out_len * 8, max: MAX_EXPAND_BITS })?;
    Ok(out)
}

/// Zeroes the bits past `bits` in a `ceil(bits/8)`-byte string.
pub fn mask_trailing_bits(bytes: &mut [u8], bits: usize) {
    let rem = bits % 8;
    if rem != 0 {
        if let Some(last) = bytes.last_mut() {
            *last &= 0xffu8 << (8 - rem);
        }
    }
}

pub fn otp_encrypt(key: &[u8], msg: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if key.len() != msg.len() {
        return Err(CryptoError::LengthMismatch { key: key.len(), msg: msg.len() });
    }
    Ok(key.iter().zip(msg).map(|(k, m)| k ^ m).collect())
}

pub fn otp_decrypt(key: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>, CryptoError> {
    otp_encrypt(key, ciphertext)
}

fn check_aead_params(key: &[u8], nonce: &[u8], tag_len_bits: usize) -> Result<(), CryptoError> {
    if key.len() != AEAD_KEY_LEN {
        return Err(CryptoError::AeadParameter("key must be 16 bytes"));
    }
    if nonce.len() != AEAD_NONCE_LEN {
        return Err(CryptoError::AeadParameter("nonce must be 13 bytes"));
    }
    if !(32..=128).contains(&tag_len_bits) || !tag_len_bits.is_multiple_of(16) {
        return Err(CryptoError::AeadParameter("tag length must be one of 32, 48, ..., 128 bits"));
    }
    Ok(())
}

macro_rules! with_ccm {
    ($tag_bytes:expr, $key:expr, |$cipher:ident| $body:expr) => {
        match $tag_bytes {
            4 => { let $cipher = Ccm::<Aes128, U4, U13>::new(GenericArray::from_slice($key)); $body }
            6 => { let $cipher = Ccm::<Aes128, U6, U13>::new(GenericArray::from_slice($key)); $body }
            8 => { let $cipher = Ccm::<Aes128, U8, U13>::new(GenericArray::from_slice($key)); $body }
            10 => { let $cipher = Ccm::<Aes128, U10, U13>::new(GenericArray::from_slice($key)); $body }
            12 => { let $cipher = Ccm::<Aes128, U12, U13>::new(GenericArray::from_slice($key)); $body }
            14 => { let $cipher = Ccm::<Aes128, U14, U13>::new(GenericArray::from_slice($key)); $body }
            16 => { let $cipher = Ccm::<Aes128, U16, U13>::new(GenericArray::from_slice($key)); $body }
            _ => unreachable!("tag length validated"),
        }
    };
}

/// AES-CCM encryption; returns `ciphertext || tag`.
pub fn aead_seal(
    key: &[u8],
    nonce: &[u8],
    plaintext: &[u8],
    aad: &[u8],
    tag_len_bits: usize,
) -> Result<Vec<u8>, CryptoError> {
    check_aead_params(key, nonce, tag_len_bits)?;
    if plaintext.len() > AEAD_MAX_PLAINTEXT {
        return Err(CryptoError::AeadParameter("plaintext exceeds 2^16 - 1 bytes"));
    }
    let nonce = GenericArray::from_slice(nonce);
    let payload = Payload { msg: plaintext, aad };
    with_ccm!(tag_len_bits / 8, key, |cipher| cipher.encrypt(nonce, payload))
        .map_err(|_| CryptoError::AeadParameter("encryption rejected by CCM"))
}

/// AES-CCM decryption. Any tag or associated-data mismatch yields
/// [`CryptoError::Authentication`].
pub fn aead_open(
    key: &[u8],
    nonce: &[u8],
    ciphertext: &[u8],
    aad: &[u8],
    tag_len_bits: usize,
) -> Result<Vec<u8>, CryptoError> {
    check_aead_params(key, nonce, tag_len_bits)?;
    if ciphertext.len() < tag_len_bits / 8 {
        return Err(CryptoError::Authentication);
    }
    let nonce = GenericArray::from_slice(nonce);
    let payload = Payload { msg: ciphertext, aad };
    with_ccm!(tag_len_bits / 8, key, |cipher| cipher.decrypt(nonce, payload))
        .map_err(|_| CryptoError::Authentication)
}

/// Short printable digest of secret material, safe to log.
pub fn fingerprint(secret: &[u8]) -> String {
    hex(&hash(secret)[..4])
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
