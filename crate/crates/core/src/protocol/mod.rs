//! The STAT/STAT handshake: per-party session state machine and wire codec.
//!
//! Baseline flows: `m_1`, `(Y_e, c_2, C_R)`, `c_3`. The improved variant
//! sends `(c_3, m'_3)` in flow three and adds `(c_4, m'_4)` from the
//! responder, which the initiator must verify before it terminates.

mod session;
pub mod wire;

use std::collections::HashMap;
use std::fmt;

pub use session::{ProtocolError, Role, SessionState, Sid, Status};
pub use wire::{Message1, Message2, Message3, Message4, WireMessage};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::crypto::{self, KeyPair, PublicKey};
use crate::suite::SuiteParams;

/// Identity label (the credential identifier `ID_I`/`ID_R`). Every identity
/// in a deployment has the same length, `lid / 8` bytes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity(Vec<u8>);

impl Identity {
    pub fn new(label: impl Into<Vec<u8>>) -> Self {
        Identity(label.into())
    }

    /// Deterministic label for a numbered user: the first `len` bytes of
    /// `SHA-256("edhoc-lab identity" || u32_be(n))`.
    pub fn for_user(n: u32, len: usize) -> Self {
        let mut input = b"edhoc-lab identity".to_vec();
        input.extend_from_slice(&n.to_be_bytes());
        let digest = crypto::hash(&input);
        assert!(len <= digest.len(), "identity labels longer than 32 bytes are not derived");
        Identity(digest[..len].to_vec())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({})", crypto::hex(&self.0))
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crypto::hex(&self.0))
    }
}

/// An identity bound to its static public key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential {
    pub id: Identity,
    pub public: PublicKey,
}

/// `peerpk`: resolves a received identity to its static public key.
pub trait PeerDirectory {
    fn lookup(&self, id: &Identity) -> Option<&PublicKey>;
}

impl PeerDirectory for HashMap<Identity, PublicKey> {
    fn lookup(&self, id: &Identity) -> Option<&PublicKey> {
        self.get(id)
    }
}

impl PeerDirectory for [Credential] {
    fn lookup(&self, id: &Identity) -> Option<&PublicKey> {
        self.iter().find(|c| &c.id == id).map(|c| &c.public)
    }
}

/// External authorization data carried by each flow. Empty by default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ead {
    pub ead1: Vec<u8>,
    pub ead2: Vec<u8>,
    pub ead3: Vec<u8>,
    pub ead4: Vec<u8>,
}

/// Result of [`run_handshake`]: both final states and every message sent,
/// in order.
#[derive(Debug, Clone)]
pub struct HandshakeOutcome {
    pub initiator: SessionState,
    pub responder: SessionState,
    pub initiator_keys: KeyPair,
    pub responder_keys: KeyPair,
    pub messages: Vec<WireMessage>,
}

/// Runs one honest handshake between two fresh parties with deterministic
/// randomness from `seed`.
pub fn run_handshake(suite: SuiteParams, seed: u64) -> Result<HandshakeOutcome, ProtocolError> {
    run_handshake_with_ead(suite, seed, Ead::default(), Ead::default())
}

pub fn run_handshake_with_ead(
    suite: SuiteParams,
    seed: u64,
    initiator_ead: Ead,
    responder_ead: Ead,
) -> Result<HandshakeOutcome, ProtocolError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ik = crypto::dh_keygen(&mut rng, suite.curve);
    let rk = crypto::dh_keygen(&mut rng, suite.curve);
    let (id_i, id_r) = (Identity::for_user(1, suite.id_len()), Identity::for_user(2, suite.id_len()));
    let directory = [Credential { id: id_i.clone(), public: ik.public.clone() }];

    let mut init = SessionState::initiator(suite, id_i, Credential { id: id_r.clone(), public: rk.public.clone() })
        .with_ead(initiator_ead);
    let mut resp = SessionState::responder(suite, id_r).with_ead(responder_ead);

    let m1 = init.initrun1(&mut rng)?;
    let m2 = resp.resprun1(&rk, &m1.encode(), &mut rng)?;
    let m3 = init.initrun2(&ik, &m2.encode())?;
    let m4 = resp.resprun2(&directory[..], &m3.encode())?;
    let mut messages = vec![m1.into(), m2.into(), m3.into()];
    if let Some(m4) = m4 {
        init.initrun3(&m4.encode())?;
        messages.push(m4.into());
    }
    Ok(HandshakeOutcome { initiator: init, responder: resp, initiator_keys: ik, responder_keys: rk, messages })
}
