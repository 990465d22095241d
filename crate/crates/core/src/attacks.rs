//! Tag-guessing attacks on explicit authentication, wire-cost accounting and
//! identity-exposure scenarios.
//!
//! Each attack runs `trials` independent games forked from one victim
//! configuration (initiator = user 1, responder = user 2). Trial `k` draws
//! all randomness from ChaCha20 keyed by the master seed, stream `2k` for
//! the game and `2k + 1` for the adversary, so reports are reproducible
//! regardless of how rayon schedules the trials.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::crypto::{self, dh_keygen, dh_shared, mask_trailing_bits, PublicKey};
use crate::game::{Activation, GameState, SendInput, UserId};
use crate::key_schedule as ks;
use crate::protocol::{
    run_handshake_with_ead, Ead, Message1, Message2, Message3, Message4, ProtocolError, Status, WireMessage,
};
use crate::suite::{ParamError, SuiteParams, Variant};

/// |z| above this fails a statistical gate.
pub const Z_THRESHOLD: f64 = 4.0;

const INITIATOR: UserId = UserId(1);
const RESPONDER: UserId = UserId(2);

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("{attack} needs the {expected} variant")]
    WrongVariant { attack: &'static str, expected: Variant },
    #[error("honest reference run failed: {0}")]
    Reference(#[from] ProtocolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// Impersonate the responder to an honest initiator by guessing `t_2`.
    ResponderAuth,
    /// Impersonate the initiator to an honest responder by guessing `t_3`.
    InitiatorAuth,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::ResponderAuth => "responder-auth",
            Target::InitiatorAuth => "initiator-auth",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "responder-auth" | "responder" => Ok(Target::ResponderAuth),
            "initiator-auth" | "initiator" => Ok(Target::InitiatorAuth),
            other => Err(ParamError::Unknown(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub variant: Variant,
    pub target: Target,
    /// Total guessed tag bits per trial; a trial succeeds with `2^-tag_bits`.
    pub tag_bits: usize,
    pub trials: u64,
    /// Victim reached Terminated.
    pub successes: u64,
    /// Victim reached Accepted (or further).
    pub accepted: u64,
    /// Successful trials where the adversary's SK candidate equalled the
    /// victim's SK. Only tracked for initiator-auth.
    pub sk_matches: u64,
    /// Trials that ended with `finalize_explicit_auth = false`.
    pub auth_violations: u64,
    /// Trials that ended with `sound = false`.
    pub unsound: u64,
}

fn z(observed: u64, trials: u64, p: f64) -> f64 {
    let n = trials as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    let diff = observed as f64 - n * p;
    if sd == 0.0 {
        if diff == 0.0 { 0.0 } else { f64::INFINITY.copysign(diff) }
    } else {
        diff / sd
    }
}

impl AttackReport {
    pub fn empirical_rate(&self) -> f64 {
        if self.trials == 0 { 0.0 } else { self.successes as f64 / self.trials as f64 }
    }

    pub fn expected_rate(&self) -> f64 {
        (-(self.tag_bits as f64)).exp2()
    }

    pub fn expected_successes(&self) -> f64 {
        self.trials as f64 * self.expected_rate()
    }

    pub fn z_score(&self) -> f64 {
        z(self.successes, self.trials, self.expected_rate())
    }

    /// z-score of the acceptance count against `2^-lMAC` (the `t_2` guess
    /// alone). Meaningful for responder-auth.
    pub fn accepted_z_score(&self, mac_bits: usize) -> f64 {
        z(self.accepted, self.trials, (-(mac_bits as f64)).exp2())
    }

    pub fn within_threshold(&self) -> bool {
        self.z_score().abs() <= Z_THRESHOLD
    }
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "target={} variant={} ltag={} trials={} successes={} accepted={} rate={:.6e} expected={:.6e} z={:.3} sk_matches={} auth_violations={} unsound={}",
            self.target,
            self.variant,
            self.tag_bits,
            self.trials,
            self.successes,
            self.accepted,
            self.empirical_rate(),
            self.expected_rate(),
            self.z_score(),
            self.sk_matches,
            self.auth_violations,
            self.unsound,
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialOutcome {
    accepted: bool,
    success: bool,
    sk_match: bool,
    auth_violation: bool,
    unsound: bool,
}

/// The two-user victim configuration every trial is forked from.
pub fn victim_template(suite: SuiteParams, seed: u64) -> GameState {
    let mut game = GameState::new(suite, seed);
    game.new_user();
    game.new_user();
    game
}

fn trial_rngs(seed: u64, trial: u64) -> (ChaCha20Rng, ChaCha20Rng) {
    let mut game = ChaCha20Rng::seed_from_u64(seed);
    game.set_stream(2 * trial);
    let mut adversary = ChaCha20Rng::seed_from_u64(seed);
    adversary.set_stream(2 * trial + 1);
    (game, adversary)
}

fn random_tag<R: RngCore>(rng: &mut R, bits: usize) -> Vec<u8> {
    let mut tag = vec![0u8; bits.div_ceil(8)];
    rng.fill_bytes(&mut tag);
    mask_trailing_bits(&mut tag, bits);
    tag
}

fn run_trials(
    suite: SuiteParams,
    target: Target,
    tag_bits: usize,
    trials: u64,
    seed: u64,
    trial: impl Fn(&GameState, ChaCha20Rng, ChaCha20Rng) -> TrialOutcome + Sync,
) -> AttackReport {
    let template = victim_template(suite, seed);
    let empty = || AttackReport::empty(suite.variant, target, tag_bits);
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let (game_rng, adv_rng) = trial_rngs(seed, k);
            trial(&template, game_rng, adv_rng)
        })
        .fold(empty, |mut acc, o| {
            acc.add(o);
            acc
        })
        .reduce(empty, AttackReport::merge)
}

impl AttackReport {
    fn empty(variant: Variant, target: Target, tag_bits: usize) -> Self {
        AttackReport {
            variant,
            target,
            tag_bits,
            trials: 0,
            successes: 0,
            accepted: 0,
            sk_matches: 0,
            auth_violations: 0,
            unsound: 0,
        }
    }

    fn add(&mut self, o: TrialOutcome) {
        self.trials += 1;
        self.successes += o.success as u64;
        self.accepted += o.accepted as u64;
        self.sk_matches += o.sk_match as u64;
        self.auth_violations += o.auth_violation as u64;
        self.unsound += o.unsound as u64;
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.successes += other.successes;
        self.accepted += other.accepted;
        self.sk_matches += other.sk_matches;
        self.auth_violations += other.auth_violations;
        self.unsound += other.unsound;
        self
    }
}

/// Plays the responder with a genuine ephemeral: PRK_2e and sk_2 are
/// computable, PRK_3e2m (needs y_s) is not, so `t_2` is a random guess.
pub fn forged_message2<R: RngCore>(suite: &SuiteParams, id_r: &[u8], m1: &[u8], adv: &mut R) -> Option<Vec<u8>> {
    let msg1 = Message1::decode(m1).ok()?;
    let eph = dh_keygen(adv, suite.curve);
    let mut c_r = vec![0u8; suite.conn_id_len()];
    adv.fill_bytes(&mut c_r);
    let y_e = eph.public.as_bytes().to_vec();
    let th2 = ks::compute_th2(&y_e, &c_r, m1);
    let gxy = dh_shared(&eph.secret, &PublicKey::from_bytes(suite.curve, msg1.x_e)).ok()?;
    let prk2e = ks::derive_prk2e(suite, &th2, &gxy);
    let mut pt = id_r.to_vec();
    pt.extend(random_tag(adv, suite.mac_bits));
    let (sk2, _) = ks::derive_message2_material(&prk2e, &th2, 8 * pt.len()).ok()?;
    let c2 = crypto::otp_encrypt(&sk2, &pt).ok()?;
    Some(Message2 { y_e, c2, c_r }.encode())
}

/// Responder-auth forgery, one trial. Returns the initiator's status right
/// after the forged message 2 and its final status.
pub fn forge_responder_trial<R: RngCore>(game: &mut GameState, adv: &mut R) -> Option<(Status, Status)> {
    let suite = *game.suite();
    let id_r = game.user(RESPONDER).ok()?.identity.clone();
    let m1 = game.send(INITIATOR, 0, SendInput::Activate(Activation::Initiator { peer: RESPONDER })).ok()??;
    let m2 = forged_message2(&suite, id_r.as_bytes(), &m1, adv)?;
    let m3 = game.send(INITIATOR, 0, SendInput::Deliver(m2)).ok()?;
    let after_m2 = game.session(INITIATOR, 0)?.state.status();
    if m3.is_some() && suite.variant == Variant::Improved {
        // No PRK_4e3m either, so c_4 is a blind guess.
        let mut c4 = vec![0u8; suite.aead_tag_bits() / 8];
        adv.fill_bytes(&mut c4);
        game.send(INITIATOR, 0, SendInput::Deliver(Message4 { c4, m4_prime: Vec::new() }.encode())).ok()?;
    }
    game.session(INITIATOR, 0).map(|o| (after_m2, o.state.status()))
}

/// Initiator-auth forgery, one trial. Returns the responder's final status
/// and whether the adversary's best SK candidate matched.
pub fn forge_initiator_trial<R: RngCore>(game: &mut GameState, adv: &mut R) -> Option<(Status, bool)> {
    let suite = *game.suite();
    let id_i = game.user(INITIATOR).ok()?.identity.clone();
    let y_s = game.user(RESPONDER).ok()?.public().clone();

    let eph = dh_keygen(adv, suite.curve);
    let mut c_i = vec![0u8; suite.conn_id_len()];
    adv.fill_bytes(&mut c_i);
    let m1 = Message1 { x_e: eph.public.as_bytes().to_vec(), c_i, ead1: Vec::new() }.encode();

    game.send(RESPONDER, 0, SendInput::Activate(Activation::Responder)).ok()?;
    let m2 = game.send(RESPONDER, 0, SendInput::Deliver(m1.clone())).ok()??;
    let msg2 = Message2::decode(&m2).ok()?;

    // Knowing x_e gives PRK_2e and PRK_3e2m = Ext(salt, Y_s^x_e), hence
    // sk_3 (and IV_3); t_3 needs PRK_4e3m = Ext(salt, Y_e^x_s).
    let y_e = PublicKey::from_bytes(suite.curve, msg2.y_e.clone());
    let th2 = ks::compute_th2(&msg2.y_e, &msg2.c_r, &m1);
    let prk2e = ks::derive_prk2e(&suite, &th2, &dh_shared(&eph.secret, &y_e).ok()?);
    let (sk2, salt3e2m) = ks::derive_message2_material(&prk2e, &th2, 8 * msg2.c2.len()).ok()?;
    let pt2 = crypto::otp_decrypt(&sk2, &msg2.c2).ok()?;
    let prk3e2m = ks::derive_chained_prk(&salt3e2m, &dh_shared(&eph.secret, &y_s).ok()?);
    let th3 = ks::compute_th3(&th2, &pt2);
    let mat3 = ks::derive_message3_material(&prk3e2m, &th3, &suite);
    let guess = random_tag(adv, suite.t3_bits());

    let (msg3, m3, m3_prime) = match suite.variant {
        Variant::Baseline => {
            let mut m3 = id_i.as_bytes().to_vec();
            m3.extend_from_slice(&guess);
            let iv3 = mat3.iv3?;
            let c3 = crypto::aead_seal(&mat3.sk3, &iv3, &m3, b"", suite.aead_tag_bits()).ok()?;
            (Message3 { c3, m3_prime: None }, m3, None)
        }
        Variant::Improved => {
            let m3 = id_i.as_bytes().to_vec();
            let c3 = crypto::otp_encrypt(&mat3.sk3, &m3).ok()?;
            (Message3 { c3, m3_prime: Some(guess.clone()) }, m3, Some(guess))
        }
    };
    game.send(RESPONDER, 0, SendInput::Deliver(msg3.encode())).ok()?;
    let oracle = game.session(RESPONDER, 0)?;

    // Best SK attempt without x_s: substitute the only DH value involving
    // Y_e that the adversary can compute. Only a terminated victim has an
    // SK to compare against.
    let matched = match oracle.state.session_key() {
        Some(sk) => {
            let th4 = ks::compute_th4(&th3, &m3, m3_prime.as_deref());
            let fake = ks::derive_chained_prk(&mat3.salt4e3m, &dh_shared(&eph.secret, &y_e).ok()?);
            ks::derive_session_key(&fake, &th4) == *sk
        }
        None => false,
    };
    Some((oracle.state.status(), matched))
}

fn judge(game: &GameState, accepted: bool, success: bool, sk_match: bool) -> TrialOutcome {
    TrialOutcome {
        accepted,
        success,
        sk_match,
        auth_violation: !game.finalize_explicit_auth(),
        unsound: !game.sound(),
    }
}

fn checked(suite: &SuiteParams) -> Result<(), AttackError> {
    suite.validate()?;
    Ok(())
}

/// Guesses `t_2` (and, against the improved variant, `c_4`). Success is the
/// initiator terminating; `accepted` counts initiators that got past `t_2`.
pub fn attack_responder_auth(suite: SuiteParams, trials: u64, seed: u64) -> Result<AttackReport, AttackError> {
    checked(&suite)?;
    let tag_bits = match suite.variant {
        Variant::Baseline => suite.mac_bits,
        Variant::Improved => suite.mac_bits + suite.aead_tag_bits(),
    };
    Ok(run_trials(suite, Target::ResponderAuth, tag_bits, trials, seed, |template, game_rng, mut adv| {
        let mut game = template.fork_with_rng(game_rng);
        let (after_m2, last) = forge_responder_trial(&mut game, &mut adv).unwrap_or((Status::Rejected, Status::Rejected));
        judge(&game, after_m2.has_accepted(), last == Status::Terminated, false)
    }))
}

fn initiator_auth(suite: SuiteParams, trials: u64, seed: u64) -> AttackReport {
    run_trials(suite, Target::InitiatorAuth, suite.t3_bits(), trials, seed, |template, game_rng, mut adv| {
        let mut game = template.fork_with_rng(game_rng);
        let (status, matched) = forge_initiator_trial(&mut game, &mut adv).unwrap_or((Status::Rejected, false));
        let success = status == Status::Terminated;
        judge(&game, status.has_accepted(), success, success && matched)
    })
}

/// Baseline: guesses the `lMAC`-bit `t_3` inside an AEAD the adversary can
/// seal itself.
pub fn attack_initiator_auth(suite: SuiteParams, trials: u64, seed: u64) -> Result<AttackReport, AttackError> {
    checked(&suite)?;
    if suite.variant != Variant::Baseline {
        return Err(AttackError::WrongVariant { attack: "attack_initiator_auth", expected: Variant::Baseline });
    }
    Ok(initiator_auth(suite, trials, seed))
}

/// Improved: `ID_I` is OTP-encrypted under the computable `sk_3`; the
/// `lSEC`-bit `t_3` travels in `m'_3` and must be guessed.
pub fn attack_initiator_auth_improved(suite: SuiteParams, trials: u64, seed: u64) -> Result<AttackReport, AttackError> {
    checked(&suite)?;
    if suite.variant != Variant::Improved {
        return Err(AttackError::WrongVariant { attack: "attack_initiator_auth_improved", expected: Variant::Improved });
    }
    Ok(initiator_auth(suite, trials, seed))
}

/// Dispatches on target and variant.
pub fn run_attack(suite: SuiteParams, target: Target, trials: u64, seed: u64) -> Result<AttackReport, AttackError> {
    match (target, suite.variant) {
        (Target::ResponderAuth, _) => attack_responder_auth(suite, trials, seed),
        (Target::InitiatorAuth, Variant::Baseline) => attack_initiator_auth(suite, trials, seed),
        (Target::InitiatorAuth, Variant::Improved) => attack_initiator_auth_improved(suite, trials, seed),
    }
}

/// Message-3 sizes in bytes. `*_formula` comes from the cost formulas,
/// `*_measured` from an actual handshake (field contents, no framing),
/// `*_framed` includes the kind byte and length prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireCost {
    pub baseline_formula: usize,
    pub improved_formula: usize,
    pub baseline_measured: usize,
    pub improved_measured: usize,
    pub baseline_framed: usize,
    pub improved_framed: usize,
}

impl WireCost {
    /// `improved - baseline` on the measured payloads.
    pub fn difference(&self) -> isize {
        self.improved_measured as isize - self.baseline_measured as isize
    }
}

impl fmt::Display for WireCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "msg3 baseline={} improved={} (formula {}/{}, framed {}/{})",
            self.baseline_measured,
            self.improved_measured,
            self.baseline_formula,
            self.improved_formula,
            self.baseline_framed,
            self.improved_framed,
        )
    }
}

/// Baseline `|c_3| = |ID_I| + lMAC/8 + |EAD_3| + tag`; improved
/// `|c_3| + |m'_3| = |ID_I| + lSEC/8 + |EAD_3|`. Both are also measured on
/// a real handshake with an `ead3_len`-byte `EAD_3`.
pub fn wire_cost_accounting(baseline: SuiteParams, improved: SuiteParams, ead3_len: usize) -> Result<WireCost, AttackError> {
    if baseline.variant != Variant::Baseline {
        return Err(AttackError::WrongVariant { attack: "wire_cost_accounting", expected: Variant::Baseline });
    }
    if improved.variant != Variant::Improved {
        return Err(AttackError::WrongVariant { attack: "wire_cost_accounting", expected: Variant::Improved });
    }
    checked(&baseline)?;
    checked(&improved)?;
    let baseline_formula = baseline.id_len() + baseline.t3_len() + ead3_len + baseline.aead_tag_bits() / 8;
    let improved_formula = improved.id_len() + improved.t3_len() + ead3_len;

    let ead = Ead { ead3: vec![0xa5; ead3_len], ..Ead::default() };
    let msg3 = |suite| -> Result<WireMessage, AttackError> {
        let out = run_handshake_with_ead(suite, 0, ead.clone(), Ead::default())?;
        Ok(out.messages[2].clone())
    };
    let (b, i) = (msg3(baseline)?, msg3(improved)?);
    Ok(WireCost {
        baseline_formula,
        improved_formula,
        baseline_measured: b.payload_len(),
        improved_measured: i.payload_len(),
        baseline_framed: b.encode().len(),
        improved_framed: i.encode().len(),
    })
}

/// Where, if anywhere, an identity label showed up in cleartext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exposure {
    /// Flow number (1-based).
    pub flow: usize,
    pub identity: crate::protocol::Identity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityScenario {
    /// Encoded messages the adversary observed.
    pub captured: Vec<Vec<u8>>,
    pub exposures: Vec<Exposure>,
    /// Final initiator status.
    pub initiator_status: Status,
}

fn scan(captured: &[Vec<u8>], ids: &[crate::protocol::Identity]) -> Vec<Exposure> {
    let mut out = Vec::new();
    for (n, bytes) in captured.iter().enumerate() {
        for id in ids {
            if bytes.windows(id.as_bytes().len()).any(|w| w == id.as_bytes()) {
                out.push(Exposure { flow: n + 1, identity: id.clone() });
            }
        }
    }
    out
}

/// Passive adversary: records every flow of an honest handshake and scans
/// it for either identity.
pub fn passive_identity_capture(suite: SuiteParams, seed: u64) -> Result<IdentityScenario, AttackError> {
    checked(&suite)?;
    let mut game = victim_template(suite, seed);
    let ids: Vec<_> = game.users().map(|(_, u)| u.identity.clone()).collect();
    let mut captured = Vec::new();
    let m1 = game.send(INITIATOR, 0, SendInput::Activate(Activation::Initiator { peer: RESPONDER })).ok().flatten();
    game.send(RESPONDER, 0, SendInput::Activate(Activation::Responder)).ok();
    let mut next = m1;
    let mut to_responder = true;
    while let Some(msg) = next.take() {
        captured.push(msg.clone());
        let (u, i) = if to_responder { (RESPONDER, 0) } else { (INITIATOR, 0) };
        next = game.send(u, i, SendInput::Deliver(msg)).ok().flatten();
        to_responder = !to_responder;
    }
    let initiator_status = game.session(INITIATOR, 0).map_or(Status::Rejected, |o| o.state.status());
    Ok(IdentityScenario { exposures: scan(&captured, &ids), captured, initiator_status })
}

/// Active adversary: answers the initiator's message 1 with its own
/// message 2 (own ephemeral, guessed `t_2`) to make the initiator reveal
/// `ID_I`. Everything the initiator sends back is scanned.
pub fn active_msg2_injection(suite: SuiteParams, seed: u64) -> Result<IdentityScenario, AttackError> {
    checked(&suite)?;
    let mut game = victim_template(suite, seed);
    let id_i = game.user(INITIATOR).map(|u| u.identity.clone()).expect("template has two users");
    let mut adv = ChaCha20Rng::seed_from_u64(seed);
    adv.set_stream(u64::MAX);
    let m1 = game
        .send(INITIATOR, 0, SendInput::Activate(Activation::Initiator { peer: RESPONDER }))
        .ok()
        .flatten()
        .into_iter();
    let mut captured: Vec<Vec<u8>> = m1.collect();

    let id_r = game.user(RESPONDER).map(|u| u.identity.clone()).expect("template has two users");
    let m2 = forged_message2(game.suite(), id_r.as_bytes(), &captured[0], &mut adv).expect("initiator emits a valid message 1");
    if let Ok(Some(reply)) = game.send(INITIATOR, 0, SendInput::Deliver(m2)) {
        captured.push(reply);
    }
    let initiator_status = game.session(INITIATOR, 0).map_or(Status::Rejected, |o| o.state.status());
    Ok(IdentityScenario { exposures: scan(&captured[1..], &[id_i]), captured, initiator_status })
}
