use std::fmt;

use rand::RngCore;
use thiserror::Error;

use super::wire::{Message1, Message2, Message3, Message4};
use super::{Credential, Ead, Identity, PeerDirectory};
use crate::crypto::{self, dh_keygen, dh_shared, CryptoError, Digest, KeyPair, PublicKey};
use crate::encoding::DecodeError;
use crate::key_schedule::{
    self as ks, DerivedMaterial, KeyScheduleError, PrkChain, SessionKey, TranscriptState,
};
use crate::suite::{SuiteParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Initiator,
    Responder,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Initiator => "initiator",
            Role::Responder => "responder",
        })
    }
}

/// Session status. `Running -> Accepted -> Terminated`, or `Rejected`, which
/// is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    Accepted,
    Terminated,
    Rejected,
}

impl Status {
    /// Accepted or Terminated.
    pub fn has_accepted(self) -> bool {
        matches!(self, Status::Accepted | Status::Terminated)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Running => "running",
            Status::Accepted => "accepted",
            Status::Terminated => "terminated",
            Status::Rejected => "rejected",
        })
    }
}

/// Session identifier `(C_I, C_R, X_e, Y_e)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sid {
    pub c_i: Vec<u8>,
    pub c_r: Vec<u8>,
    pub x_e: Vec<u8>,
    pub y_e: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("{step} is not allowed for a {role} session in status {status}")]
    InvalidState { step: &'static str, role: Role, status: Status },
    #[error("malformed message: {0}")]
    Decode(#[from] DecodeError),
    #[error("malformed plaintext: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    KeySchedule(#[from] KeyScheduleError),
    #[error("responder identity does not match the intended peer")]
    UnexpectedPeer,
    #[error("initiator identity is not registered")]
    UnknownIdentity,
    #[error("MAC tag mismatch")]
    TagMismatch,
    #[error("session has not terminated")]
    NotTerminated,
}

/// One party's view of a handshake.
///
/// Step methods mirror the four protocol blocks (`initrun1`, `resprun1`,
/// `initrun2`, `resprun2`) plus `initrun3` for the improved fourth flow.
/// Each step is atomic: it either completes or moves the session to
/// [`Status::Rejected`]. Calling a step out of order returns
/// [`ProtocolError::InvalidState`] and leaves the session untouched.
#[derive(Debug, Clone)]
pub struct SessionState {
    suite: SuiteParams,
    role: Role,
    status: Status,
    own: Identity,
    peer: Option<Credential>,
    ead: Ead,
    peer_ead: Ead,
    conn_id: Option<Vec<u8>>,
    sid: Option<Sid>,
    ephemeral: Option<KeyPair>,
    m1: Option<Vec<u8>>,
    m2: Option<Vec<u8>>,
    m3: Option<Vec<u8>>,
    m3_prime: Option<Vec<u8>>,
    transcript: TranscriptState,
    chain: PrkChain,
    material: DerivedMaterial,
    sk: Option<SessionKey>,
}

impl SessionState {
    fn new(suite: SuiteParams, role: Role, own: Identity, peer: Option<Credential>) -> Self {
        SessionState {
            suite,
            role,
            status: Status::Running,
            own,
            peer,
            ead: Ead::default(),
            peer_ead: Ead::default(),
            conn_id: None,
            sid: None,
            ephemeral: None,
            m1: None,
            m2: None,
            m3: None,
            m3_prime: None,
            transcript: TranscriptState::default(),
            chain: PrkChain::default(),
            material: DerivedMaterial::default(),
            sk: None,
        }
    }

    /// Initiator session that intends to talk to `peer`.
    pub fn initiator(suite: SuiteParams, own: Identity, peer: Credential) -> Self {
        Self::new(suite, Role::Initiator, own, Some(peer))
    }

    /// Responder session; the peer is learnt from `ID_I` in message 3.
    pub fn responder(suite: SuiteParams, own: Identity) -> Self {
        Self::new(suite, Role::Responder, own, None)
    }

    /// Sets the EAD values this party sends.
    pub fn with_ead(mut self, ead: Ead) -> Self {
        self.ead = ead;
        self
    }

    pub fn suite(&self) -> &SuiteParams {
        &self.suite
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn own_identity(&self) -> &Identity {
        &self.own
    }

    pub fn peer(&self) -> Option<&Credential> {
        self.peer.as_ref()
    }

    pub fn sid(&self) -> Option<&Sid> {
        self.sid.as_ref()
    }

    pub fn session_key(&self) -> Option<&SessionKey> {
        self.sk.as_ref()
    }

    pub fn ephemeral_public(&self) -> Option<&PublicKey> {
        self.ephemeral.as_ref().map(|kp| &kp.public)
    }

    pub fn transcript(&self) -> &TranscriptState {
        &self.transcript
    }

    pub fn chain(&self) -> &PrkChain {
        &self.chain
    }

    pub fn material(&self) -> &DerivedMaterial {
        &self.material
    }

    /// EAD values received from the peer.
    pub fn peer_ead(&self) -> &Ead {
        &self.peer_ead
    }

    fn require(&self, step: &'static str, role: Role, status: Status, ok: bool) -> Result<(), ProtocolError> {
        if self.role == role && self.status == status && ok {
            Ok(())
        } else {
            Err(ProtocolError::InvalidState { step, role: self.role, status: self.status })
        }
    }

    fn guarded<T>(&mut self, step: impl FnOnce(&mut Self) -> Result<T, ProtocolError>) -> Result<T, ProtocolError> {
        let out = step(self);
        if out.is_err() {
            self.status = Status::Rejected;
            self.sk = None;
        }
        out
    }

    fn ephemeral(&self) -> &KeyPair {
        self.ephemeral.as_ref().expect("ephemeral generated in the first step")
    }

    fn th(slot: Option<Digest>) -> Digest {
        slot.expect("transcript hash computed by an earlier step")
    }

    fn random_conn_id<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let mut c = vec![0u8; self.suite.conn_id_len()];
        rng.fill_bytes(&mut c);
        c
    }

    /// Initiator, flow 1: fresh `x_e` and `C_I`, `m_1 = (X_e, C_I, EAD_1)`.
    pub fn initrun1<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Message1, ProtocolError> {
        self.require("initrun1", Role::Initiator, Status::Running, self.m1.is_none())?;
        let eph = dh_keygen(rng, self.suite.curve);
        let c_i = self.random_conn_id(rng);
        let msg = Message1 { x_e: eph.public.as_bytes().to_vec(), c_i: c_i.clone(), ead1: self.ead.ead1.clone() };
        self.m1 = Some(msg.encode());
        self.ephemeral = Some(eph);
        self.conn_id = Some(c_i);
        Ok(msg)
    }

    /// Responder, flow 2. `msg1` must be the exact bytes received, since
    /// `TH_2` hashes them.
    pub fn resprun1<R: RngCore + ?Sized>(
        &mut self,
        static_key: &KeyPair,
        msg1: &[u8],
        rng: &mut R,
    ) -> Result<Message2, ProtocolError> {
        self.require("resprun1", Role::Responder, Status::Running, self.sid.is_none())?;
        self.guarded(|s| {
            let m1 = Message1::decode(msg1)?;
            let curve = s.suite.curve;
            let x_e = PublicKey::from_bytes(curve, m1.x_e.clone());

            let eph = dh_keygen(rng, curve);
            let c_r = s.random_conn_id(rng);
            let y_e = eph.public.as_bytes().to_vec();

            let th2 = ks::compute_th2(&y_e, &c_r, msg1);
            let gxy = dh_shared(&eph.secret, &x_e)?;
            let prk2e = ks::derive_prk2e(&s.suite, &th2, &gxy);

            let pt_len = s.suite.id_len() + s.suite.t2_len() + s.ead.ead2.len();
            let (sk2, salt3e2m) = ks::derive_message2_material(&prk2e, &th2, 8 * pt_len)?;
            let prk3e2m = ks::derive_chained_prk(&salt3e2m, &dh_shared(&static_key.secret, &x_e)?);

            let ctx2 = ks::ctx2(s.own.as_bytes(), &th2, static_key.public.as_bytes(), &s.ead.ead2);
            let t2 = ks::derive_t2(&prk3e2m, &ctx2, s.suite.mac_bits);

            let mut m2 = Vec::with_capacity(pt_len);
            m2.extend_from_slice(s.own.as_bytes());
            m2.extend_from_slice(&t2);
            m2.extend_from_slice(&s.ead.ead2);
            let c2 = crypto::otp_encrypt(&sk2, &m2)?;

            s.sid = Some(Sid { c_i: m1.c_i.clone(), c_r: c_r.clone(), x_e: m1.x_e.clone(), y_e: y_e.clone() });
            s.peer_ead.ead1 = m1.ead1;
            s.m1 = Some(msg1.to_vec());
            s.m2 = Some(m2);
            s.transcript.th2 = Some(th2);
            s.chain.prk2e = Some(prk2e);
            s.chain.salt3e2m = Some(salt3e2m);
            s.chain.prk3e2m = Some(prk3e2m);
            s.material.sk2 = Some(sk2);
            s.material.t2 = Some(t2);
            s.ephemeral = Some(eph);
            s.conn_id = Some(c_r.clone());
            Ok(Message2 { y_e, c2, c_r })
        })
    }

    /// Initiator, flow 3: verify `t_2`, accept, and answer with message 3.
    /// Baseline sessions terminate here; improved ones wait for message 4.
    pub fn initrun2(&mut self, static_key: &KeyPair, msg2: &[u8]) -> Result<Message3, ProtocolError> {
        self.require("initrun2", Role::Initiator, Status::Running, self.m1.is_some() && self.sid.is_none())?;
        self.guarded(|s| {
            let msg = Message2::decode(msg2)?;
            let suite = s.suite;
            let peer = s.peer.clone().expect("initiator sessions have an intended peer");
            let y_e = PublicKey::from_bytes(suite.curve, msg.y_e.clone());

            let th2 = ks::compute_th2(&msg.y_e, &msg.c_r, s.m1.as_deref().expect("m1 cached"));
            let gxy = dh_shared(&s.ephemeral().secret, &y_e)?;
            let prk2e = ks::derive_prk2e(&suite, &th2, &gxy);
            let (sk2, salt3e2m) = ks::derive_message2_material(&prk2e, &th2, 8 * msg.c2.len())?;
            let m2 = crypto::otp_decrypt(&sk2, &msg.c2)?;

            let (id_len, t_len) = (suite.id_len(), suite.t2_len());
            if m2.len() < id_len + t_len {
                return Err(ProtocolError::Malformed("m_2 shorter than ID_R || t_2"));
            }
            let (id_r, rest) = m2.split_at(id_len);
            let (t2, ead2) = rest.split_at(t_len);
            if id_r != peer.id.as_bytes() {
                return Err(ProtocolError::UnexpectedPeer);
            }

            let prk3e2m = ks::derive_chained_prk(&salt3e2m, &dh_shared(&s.ephemeral().secret, &peer.public)?);
            let ctx2 = ks::ctx2(id_r, &th2, peer.public.as_bytes(), ead2);
            let t2_check = ks::derive_t2(&prk3e2m, &ctx2, suite.mac_bits);
            if t2_check != t2 {
                return Err(ProtocolError::TagMismatch);
            }

            let th3 = ks::compute_th3(&th2, &m2);
            let mat3 = ks::derive_message3_material(&prk3e2m, &th3, &suite);
            let prk4e3m = ks::derive_chained_prk(&mat3.salt4e3m, &dh_shared(&static_key.secret, &y_e)?);

            s.sid = Some(Sid {
                c_i: s.conn_id.clone().expect("C_I chosen in initrun1"),
                c_r: msg.c_r.clone(),
                x_e: s.ephemeral().public.as_bytes().to_vec(),
                y_e: msg.y_e.clone(),
            });
            s.status = Status::Accepted;
            s.peer_ead.ead2 = ead2.to_vec();

            let ctx3 = ks::ctx3(s.own.as_bytes(), &th3, static_key.public.as_bytes(), &s.ead.ead3);
            let t3 = ks::derive_t3(&prk4e3m, &ctx3, &suite);

            let out = match suite.variant {
                Variant::Baseline => {
                    let mut m3 = s.own.as_bytes().to_vec();
                    m3.extend_from_slice(&t3);
                    m3.extend_from_slice(&s.ead.ead3);
                    let iv3 = mat3.iv3.expect("baseline derives IV_3");
                    let c3 = crypto::aead_seal(&mat3.sk3, &iv3, &m3, b"", suite.aead_tag_bits())?;
                    let th4 = ks::compute_th4(&th3, &m3, None);
                    s.finish(&prk4e3m, th4);
                    s.m3 = Some(m3);
                    Message3 { c3, m3_prime: None }
                }
                Variant::Improved => {
                    let m3 = s.own.as_bytes().to_vec();
                    let mut m3_prime = t3.clone();
                    m3_prime.extend_from_slice(&s.ead.ead3);
                    let c3 = crypto::otp_encrypt(&mat3.sk3, &m3)?;
                    s.m3 = Some(m3);
                    s.m3_prime = Some(m3_prime.clone());
                    Message3 { c3, m3_prime: Some(m3_prime) }
                }
            };

            s.m2 = Some(m2);
            s.transcript.th2 = Some(th2);
            s.transcript.th3 = Some(th3);
            s.chain.prk2e = Some(prk2e);
            s.chain.salt3e2m = Some(salt3e2m);
            s.chain.prk3e2m = Some(prk3e2m);
            s.chain.salt4e3m = Some(mat3.salt4e3m);
            s.chain.prk4e3m = Some(prk4e3m);
            s.material.sk2 = Some(sk2);
            s.material.t2 = Some(t2_check);
            s.material.sk3 = Some(mat3.sk3);
            s.material.iv3 = mat3.iv3;
            s.material.t3 = Some(t3);
            Ok(out)
        })
    }

    /// Responder, final step: recover `ID_I`, look up `X_s`, verify `t_3`.
    /// Returns message 4 in the improved variant.
    pub fn resprun2<D: PeerDirectory + ?Sized>(
        &mut self,
        peerpk: &D,
        msg3: &[u8],
    ) -> Result<Option<Message4>, ProtocolError> {
        self.require("resprun2", Role::Responder, Status::Running, self.sid.is_some())?;
        self.guarded(|s| {
            let msg = Message3::decode(msg3)?;
            let suite = s.suite;
            let th2 = Self::th(s.transcript.th2);
            let th3 = ks::compute_th3(&th2, s.m2.as_deref().expect("m2 cached"));
            let prk3e2m = s.chain.prk3e2m.expect("PRK_3e2m derived in resprun1");
            let mat3 = ks::derive_message3_material(&prk3e2m, &th3, &suite);
            let (id_len, t_len) = (suite.id_len(), suite.t3_len());

            // (m_3, m'_3, ID_I, t_3, EAD_3)
            let (m3, m3_prime, id_i, t3, ead3) = match (suite.variant, msg.m3_prime) {
                (Variant::Baseline, None) => {
                    let iv3 = mat3.iv3.expect("baseline derives IV_3");
                    let m3 = crypto::aead_open(&mat3.sk3, &iv3, &msg.c3, b"", suite.aead_tag_bits())?;
                    if m3.len() < id_len + t_len {
                        return Err(ProtocolError::Malformed("m_3 shorter than ID_I || t_3"));
                    }
                    let id_i = m3[..id_len].to_vec();
                    let t3 = m3[id_len..id_len + t_len].to_vec();
                    let ead3 = m3[id_len + t_len..].to_vec();
                    (m3, None, id_i, t3, ead3)
                }
                (Variant::Improved, Some(m3_prime)) => {
                    if msg.c3.len() != id_len {
                        return Err(ProtocolError::Malformed("c_3 is not one identity long"));
                    }
                    if m3_prime.len() < t_len {
                        return Err(ProtocolError::Malformed("m'_3 shorter than t_3"));
                    }
                    let id_i = crypto::otp_decrypt(&mat3.sk3, &msg.c3)?;
                    let (t3, ead3) = (m3_prime[..t_len].to_vec(), m3_prime[t_len..].to_vec());
                    (id_i.clone(), Some(m3_prime), id_i, t3, ead3)
                }
                _ => return Err(ProtocolError::Malformed("message 3 layout does not match the suite variant")),
            };

            let id_i = Identity::new(id_i);
            let x_s = peerpk.lookup(&id_i).cloned().ok_or(ProtocolError::UnknownIdentity)?;
            let y_e = s.ephemeral().secret.clone();
            let prk4e3m = ks::derive_chained_prk(&mat3.salt4e3m, &dh_shared(&y_e, &x_s)?);
            s.status = Status::Accepted;

            let ctx3 = ks::ctx3(id_i.as_bytes(), &th3, x_s.as_bytes(), &ead3);
            let t3_check = ks::derive_t3(&prk4e3m, &ctx3, &suite);
            if t3_check != t3 {
                return Err(ProtocolError::TagMismatch);
            }

            let th4 = ks::compute_th4(&th3, &m3, m3_prime.as_deref());
            let reply = match suite.variant {
                Variant::Baseline => None,
                Variant::Improved => {
                    let (sk4, iv4) = ks::derive_message4_material(&prk4e3m, &th4, &suite)?;
                    let m4_prime = s.ead.ead4.clone();
                    let c4 = crypto::aead_seal(&sk4, &iv4, b"", &m4_prime, suite.aead_tag_bits())?;
                    s.material.sk4 = Some(sk4);
                    s.material.iv4 = Some(iv4);
                    Some(Message4 { c4, m4_prime })
                }
            };

            s.peer = Some(Credential { id: id_i, public: x_s });
            s.peer_ead.ead3 = ead3;
            s.m3 = Some(m3);
            s.m3_prime = m3_prime;
            s.transcript.th3 = Some(th3);
            s.chain.salt4e3m = Some(mat3.salt4e3m);
            s.chain.prk4e3m = Some(prk4e3m);
            s.material.sk3 = Some(mat3.sk3);
            s.material.iv3 = mat3.iv3;
            s.material.t3 = Some(t3_check);
            s.finish(&prk4e3m, th4);
            Ok(reply)
        })
    }

    /// Initiator, improved variant only: verify `c_4` before terminating.
    pub fn initrun3(&mut self, msg4: &[u8]) -> Result<(), ProtocolError> {
        let improved = self.suite.variant == Variant::Improved;
        self.require("initrun3", Role::Initiator, Status::Accepted, improved)?;
        self.guarded(|s| {
            let msg = Message4::decode(msg4)?;
            let suite = s.suite;
            let th3 = Self::th(s.transcript.th3);
            let th4 = ks::compute_th4(&th3, s.m3.as_deref().expect("m3 cached"), s.m3_prime.as_deref());
            let prk4e3m = s.chain.prk4e3m.expect("PRK_4e3m derived in initrun2");
            let (sk4, iv4) = ks::derive_message4_material(&prk4e3m, &th4, &suite)?;
            crypto::aead_open(&sk4, &iv4, &msg.c4, &msg.m4_prime, suite.aead_tag_bits())?;
            s.material.sk4 = Some(sk4);
            s.material.iv4 = Some(iv4);
            s.peer_ead.ead4 = msg.m4_prime;
            s.finish(&prk4e3m, th4);
            Ok(())
        })
    }

    fn finish(&mut self, prk4e3m: &crypto::Prk, th4: Digest) {
        let sk = ks::derive_session_key(prk4e3m, &th4);
        self.transcript.th4 = Some(th4);
        self.chain.prk_out = Some(crypto::Prk::from_bytes(sk.0));
        self.sk = Some(sk);
        self.status = Status::Terminated;
    }

    #[cfg(test)]
    pub(crate) fn force_session_key(&mut self, sk: SessionKey) {
        self.sk = Some(sk);
    }

    /// Exports application keying material from a terminated session.
    pub fn exporter(&self, label: u8, context: &[u8], out_bits: usize) -> Result<Vec<u8>, ProtocolError> {
        match (self.status, self.chain.prk4e3m, self.transcript.th4) {
            (Status::Terminated, Some(prk), Some(th4)) => Ok(ks::exporter(&prk, &th4, label, context, out_bits)?),
            _ => Err(ProtocolError::NotTerminated),
        }
    }

    /// Replaces `PRK_4e3m` with `Ext(nonce, PRK_4e3m)`. Both parties must use
    /// the same nonce.
    pub fn key_update(&mut self, nonce: &[u8]) -> Result<(), ProtocolError> {
        match (self.status, self.chain.prk4e3m) {
            (Status::Terminated, Some(prk)) => {
                self.chain.prk4e3m = Some(ks::key_update(&prk, nonce));
                Ok(())
            }
            _ => Err(ProtocolError::NotTerminated),
        }
    }
}
