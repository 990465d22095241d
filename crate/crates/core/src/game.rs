//! Key-privacy and explicit-authentication security games.
//!
//! The adversary drives a [`GameState`] through the usual queries
//! (`new_user`, `send`, `rev_ltk`, `rev_sk`, `test`) and the game decides
//! the outcome with the `sound`/`fresh` predicates and the two finalize
//! functions. Every query appends one line to a text trace.
//!
//! Corruption is weak: `rev_ltk` only ever returns the long-term secret.
//! Each protocol step runs atomically inside `send`, so corruptions can
//! only fall between steps.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::crypto::{dh_keygen, KeyPair, PublicKey, SecretKey, HASH_LEN};
use crate::key_schedule::SessionKey;
use crate::protocol::{Credential, Identity, PeerDirectory, Role, SessionState, Sid, Status};
use crate::suite::SuiteParams;

/// User index, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Session handle `pi_u^i`.
pub type SessionRef = (UserId, u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("no session {1} at user {0}")]
    NoSession(UserId, u32),
    #[error("session {1} at user {0} is already active")]
    AlreadyActive(UserId, u32),
}

#[derive(Debug, Clone)]
pub struct User {
    pub identity: Identity,
    keys: KeyPair,
    /// Time of the first `rev_ltk`; `None` stands for infinity.
    pub revltk: Option<u64>,
}

impl User {
    pub fn public(&self) -> &PublicKey {
        &self.keys.public
    }
}

/// A session oracle: protocol state plus game bookkeeping.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub state: SessionState,
    pub peerid: Option<UserId>,
    pub t_acc: u64,
    pub tested: bool,
    pub revealed: bool,
}

/// First contact with a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Initiator { peer: UserId },
    /// The responder's peer is fixed later by the identity in message 3.
    Responder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SendInput {
    Activate(Activation),
    Deliver(Vec<u8>),
}

#[derive(Debug, Clone)]
struct Directory(HashMap<Identity, (UserId, PublicKey)>);

impl PeerDirectory for Directory {
    fn lookup(&self, id: &Identity) -> Option<&PublicKey> {
        self.0.get(id).map(|(_, pk)| pk)
    }
}

#[derive(Debug, Clone)]
pub struct GameState {
    suite: SuiteParams,
    time: u64,
    users: Vec<User>,
    peerpk: Directory,
    sessions: BTreeMap<SessionRef, Oracle>,
    tested: BTreeSet<SessionRef>,
    b: bool,
    rng: ChaCha20Rng,
    trace: Vec<String>,
}

impl GameState {
    pub fn new(suite: SuiteParams, seed: u64) -> Self {
        Self::with_rng(suite, ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn with_rng(suite: SuiteParams, mut rng: ChaCha20Rng) -> Self {
        let b = rng.gen();
        GameState {
            suite,
            time: 0,
            users: Vec::new(),
            peerpk: Directory(HashMap::new()),
            sessions: BTreeMap::new(),
            tested: BTreeSet::new(),
            b,
            rng,
            trace: Vec::new(),
        }
    }

    /// Same users and keys, no sessions, clock reset, fresh randomness.
    pub fn fork(&self, seed: u64) -> Self {
        self.fork_with_rng(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn fork_with_rng(&self, rng: ChaCha20Rng) -> Self {
        let mut game = GameState::with_rng(self.suite, rng);
        game.users = self.users.iter().cloned().map(|u| User { revltk: None, ..u }).collect();
        game.peerpk = self.peerpk.clone();
        game
    }

    pub fn suite(&self) -> &SuiteParams {
        &self.suite
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn challenge_bit(&self) -> bool {
        self.b
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn users(&self) -> impl Iterator<Item = (UserId, &User)> {
        self.users.iter().enumerate().map(|(i, u)| (UserId(i as u32 + 1), u))
    }

    pub fn user(&self, u: UserId) -> Result<&User, GameError> {
        (u.0 as usize).checked_sub(1).and_then(|i| self.users.get(i)).ok_or(GameError::UnknownUser(u))
    }

    pub fn user_by_identity(&self, id: &Identity) -> Option<UserId> {
        self.peerpk.0.get(id).map(|(u, _)| *u)
    }

    /// `peerpk[ID]`.
    pub fn peerpk(&self, id: &Identity) -> Option<&PublicKey> {
        self.peerpk.lookup(id)
    }

    pub fn session(&self, u: UserId, i: u32) -> Option<&Oracle> {
        self.sessions.get(&(u, i))
    }

    pub fn sessions(&self) -> impl Iterator<Item = (&SessionRef, &Oracle)> {
        self.sessions.iter()
    }

    fn log(&mut self, line: String) {
        self.trace.push(format!("[{:04}] {line}", self.time));
    }

    /// Registers a user with a fresh static key pair.
    pub fn new_user(&mut self) -> (UserId, PublicKey) {
        let u = UserId(self.users.len() as u32 + 1);
        let keys = dh_keygen(&mut self.rng, self.suite.curve);
        let identity = Identity::for_user(u.0, self.suite.id_len());
        let public = keys.public.clone();
        self.peerpk.0.insert(identity.clone(), (u, public.clone()));
        self.users.push(User { identity, keys, revltk: None });
        self.log(format!("new_user u={u}"));
        (u, public)
    }

    /// Activates `pi_u^i` or delivers a message to it. Returns the outgoing
    /// message, or `None` for bottom (nothing to send, or the session
    /// rejected / was not running).
    pub fn send(&mut self, u: UserId, i: u32, input: SendInput) -> Result<Option<Vec<u8>>, GameError> {
        let user = self.user(u)?.clone();
        match input {
            SendInput::Activate(activation) => {
                if self.sessions.contains_key(&(u, i)) {
                    return Err(GameError::AlreadyActive(u, i));
                }
                let (oracle, out) = match activation {
                    Activation::Initiator { peer } => {
                        let peer_user = self.user(peer)?;
                        let cred = Credential { id: peer_user.identity.clone(), public: peer_user.keys.public.clone() };
                        let mut state = SessionState::initiator(self.suite, user.identity.clone(), cred);
                        let m1 = state.initrun1(&mut self.rng).expect("fresh initiator accepts initrun1");
                        let oracle = Oracle { state, peerid: Some(peer), t_acc: 0, tested: false, revealed: false };
                        (oracle, Some(m1.encode()))
                    }
                    Activation::Responder => {
                        let state = SessionState::responder(self.suite, user.identity.clone());
                        (Oracle { state, peerid: None, t_acc: 0, tested: false, revealed: false }, None)
                    }
                };
                let role = oracle.state.role();
                self.sessions.insert((u, i), oracle);
                self.log(format!("send u={u} i={i} activate {role} -> running"));
                Ok(out)
            }
            SendInput::Deliver(bytes) => {
                let mut oracle = self.sessions.remove(&(u, i)).ok_or(GameError::NoSession(u, i))?;
                let before = oracle.state.status();
                let out = self.run(&user, &mut oracle, &bytes);
                let after = oracle.state.status();
                if before == Status::Running && after.has_accepted() {
                    self.time += 1;
                    oracle.t_acc = self.time;
                }
                if oracle.peerid.is_none() {
                    oracle.peerid = oracle.state.peer().and_then(|c| self.user_by_identity(&c.id));
                }
                self.sessions.insert((u, i), oracle);
                self.log(format!("send u={u} i={i} {before} -> {after}"));
                Ok(out)
            }
        }
    }

    fn run(&mut self, user: &User, oracle: &mut Oracle, msg: &[u8]) -> Option<Vec<u8>> {
        let state = &mut oracle.state;
        let result = match (state.role(), state.status(), state.sid().is_some()) {
            (Role::Initiator, Status::Running, false) => state.initrun2(&user.keys, msg).map(|m| Some(m.encode())),
            (Role::Initiator, Status::Accepted, _) => state.initrun3(msg).map(|()| None),
            (Role::Responder, Status::Running, false) => {
                state.resprun1(&user.keys, msg, &mut self.rng).map(|m| Some(m.encode()))
            }
            (Role::Responder, Status::Running, true) => {
                state.resprun2(&self.peerpk, msg).map(|m| m.map(|m| m.encode()))
            }
            _ => return None,
        };
        result.ok().flatten()
    }

    /// Corrupts `u`. The first call stamps `revltk_u`; later calls return
    /// the same key without moving the stamp.
    pub fn rev_ltk(&mut self, u: UserId) -> Result<SecretKey, GameError> {
        self.user(u)?;
        let idx = u.0 as usize - 1;
        if self.users[idx].revltk.is_none() {
            self.time += 1;
            self.users[idx].revltk = Some(self.time);
            self.log(format!("rev_ltk u={u}"));
        } else {
            self.log(format!("rev_ltk u={u} repeat"));
        }
        Ok(self.users[idx].keys.secret.clone())
    }

    pub fn rev_sk(&mut self, u: UserId, i: u32) -> Option<SessionKey> {
        let key = self.sessions.get_mut(&(u, i)).and_then(|o| {
            let sk = o.state.session_key().copied()?;
            o.revealed = true;
            Some(sk)
        });
        self.log(format!("rev_sk u={u} i={i} -> {}", if key.is_some() { "key" } else { "bot" }));
        key
    }

    /// Real-or-random challenge: the session key when `b = 0`, a uniformly
    /// random key when `b = 1`.
    pub fn test(&mut self, u: UserId, i: u32) -> Option<SessionKey> {
        let b = self.b;
        let random = {
            let mut k = [0u8; HASH_LEN];
            self.rng.fill_bytes(&mut k);
            SessionKey(k)
        };
        let key = match self.sessions.get_mut(&(u, i)) {
            Some(o) if !o.tested => o.state.session_key().copied().map(|real| {
                o.tested = true;
                if b { random } else { real }
            }),
            _ => None,
        };
        if key.is_some() {
            self.tested.insert((u, i));
        }
        self.log(format!("test u={u} i={i} -> {}", if key.is_some() { "key" } else { "bot" }));
        key
    }

    fn revltk_of(&self, u: Option<UserId>) -> Option<u64> {
        u.and_then(|u| self.user(u).ok()).and_then(|user| user.revltk)
    }

    fn partnered(a: &Oracle, a_ref: SessionRef, b: &Oracle, b_ref: SessionRef) -> bool {
        a.peerid == Some(b_ref.0) && b.peerid == Some(a_ref.0) && a.state.role() != b.state.role()
    }

    /// At most two sessions per sid; every pair of accepted sessions sharing
    /// a sid must be reciprocal peers with opposite roles and equal keys.
    pub fn sound(&self) -> bool {
        let mut by_sid: HashMap<&Sid, Vec<(SessionRef, &Oracle)>> = HashMap::new();
        for (r, o) in &self.sessions {
            if let Some(sid) = o.state.sid() {
                by_sid.entry(sid).or_default().push((*r, o));
            }
        }
        by_sid.values().all(|group| match group.as_slice() {
            [_] => true,
            [(ar, a), (br, b)] => {
                if !(a.state.status().has_accepted() && b.state.status().has_accepted()) {
                    return true;
                }
                let keys_agree = match (a.state.session_key(), b.state.session_key()) {
                    (Some(x), Some(y)) => x == y,
                    _ => true,
                };
                Self::partnered(a, *ar, b, *br) && keys_agree
            }
            _ => false,
        })
    }

    /// No tested session is revealed, had its peer corrupted before
    /// acceptance, or has a tested/revealed partner.
    pub fn fresh(&self) -> bool {
        self.tested.iter().all(|r| {
            let o = &self.sessions[r];
            if o.revealed {
                return false;
            }
            if matches!(self.revltk_of(o.peerid), Some(t) if t < o.t_acc) {
                return false;
            }
            let sid = o.state.sid();
            !self
                .sessions
                .iter()
                .any(|(other, p)| other != r && sid.is_some() && p.state.sid() == sid && (p.tested || p.revealed))
        })
    }

    /// Key-privacy outcome for the adversary's guess `b'`.
    pub fn finalize_kp(&self, guess: bool) -> bool {
        if !self.sound() {
            return true;
        }
        let guess = if self.fresh() { guess } else { false };
        guess == self.b
    }

    /// Explicit authentication: every terminated session whose peer was
    /// uncorrupted at acceptance has an accepted partner.
    pub fn finalize_explicit_auth(&self) -> bool {
        self.sessions.iter().all(|(r, o)| {
            if o.state.status() != Status::Terminated {
                return true;
            }
            let uncorrupted = self.revltk_of(o.peerid).is_none_or(|t| o.t_acc < t);
            if !uncorrupted {
                return true;
            }
            self.sessions.iter().any(|(pr, p)| {
                Self::partnered(o, *r, p, *pr) && p.state.sid().is_some() && p.state.sid() == o.state.sid()
                    && p.state.status().has_accepted()
            })
        })
    }
}
