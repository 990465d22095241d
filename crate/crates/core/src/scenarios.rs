//! Named game scenarios, replayable from the command line.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::attacks::{forge_initiator_trial, forge_responder_trial, victim_template};
use crate::game::{Activation, GameState, SendInput, UserId};
use crate::protocol::Status;
use crate::suite::{ParamError, SuiteParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// `n` honest sessions between random user pairs, randomly interleaved.
    Honest(usize),
    /// Guess `t_2` until the initiator terminates.
    ForgeResponder,
    /// Guess `t_3` until the responder terminates.
    ForgeInitiator,
    /// Honest run, both long-term keys revealed after acceptance, then Test.
    CorruptAfterAccept,
    /// Responder's key revealed before the run, then Test at the initiator.
    CorruptBeforeAccept,
}

impl FromStr for Scenario {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forge-responder" => Ok(Scenario::ForgeResponder),
            "forge-initiator" => Ok(Scenario::ForgeInitiator),
            "corrupt-after-accept" => Ok(Scenario::CorruptAfterAccept),
            "corrupt-before-accept" => Ok(Scenario::CorruptBeforeAccept),
            "honest" => Ok(Scenario::Honest(4)),
            _ => s
                .strip_prefix("honest-")
                .and_then(|n| n.parse().ok())
                .filter(|&n| n > 0)
                .map(Scenario::Honest)
                .ok_or_else(|| ParamError::Unknown(s.to_string())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Honest(n) => write!(f, "honest-{n}"),
            Scenario::ForgeResponder => f.write_str("forge-responder"),
            Scenario::ForgeInitiator => f.write_str("forge-initiator"),
            Scenario::CorruptAfterAccept => f.write_str("corrupt-after-accept"),
            Scenario::CorruptBeforeAccept => f.write_str("corrupt-before-accept"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub game: GameState,
    /// Forgery scenarios: attempts used, and whether one succeeded.
    pub attempts: u64,
    pub forged: Option<bool>,
}

impl ScenarioOutcome {
    pub fn sound(&self) -> bool {
        self.game.sound()
    }

    pub fn fresh(&self) -> bool {
        self.game.fresh()
    }

    pub fn explicit_auth(&self) -> bool {
        self.game.finalize_explicit_auth()
    }
}

/// `n` honest sessions over `max(2, n / 2)` users. Each session pair is a
/// little message queue; at every tick a random pair with a pending flow
/// advances, so flows of different sessions interleave arbitrarily.
pub fn honest_schedule(suite: SuiteParams, sessions: usize, seed: u64) -> GameState {
    let mut game = GameState::new(suite, seed);
    let mut sched = ChaCha20Rng::seed_from_u64(seed);
    sched.set_stream(1);
    let users: Vec<UserId> = (0..(sessions / 2).max(2)).map(|_| game.new_user().0).collect();
    let mut next_index = vec![0u32; users.len() + 1];

    struct Pending {
        to: (UserId, u32),
        back: (UserId, u32),
        msg: Vec<u8>,
    }
    let mut queue: Vec<Pending> = Vec::new();
    for _ in 0..sessions {
        let pair: Vec<_> = users.choose_multiple(&mut sched, 2).copied().collect();
        let (u, v) = (pair[0], pair[1]);
        let (i, j) = (next_index[u.0 as usize], next_index[v.0 as usize]);
        next_index[u.0 as usize] += 1;
        next_index[v.0 as usize] += 1;
        let m1 = game
            .send(u, i, SendInput::Activate(Activation::Initiator { peer: v }))
            .expect("fresh session")
            .expect("initiator emits message 1");
        game.send(v, j, SendInput::Activate(Activation::Responder)).expect("fresh session");
        queue.push(Pending { to: (v, j), back: (u, i), msg: m1 });
    }
    while !queue.is_empty() {
        let k = sched.gen_range(0..queue.len());
        let p = queue.swap_remove(k);
        if let Ok(Some(reply)) = game.send(p.to.0, p.to.1, SendInput::Deliver(p.msg)) {
            queue.push(Pending { to: p.back, back: p.to, msg: reply });
        }
    }
    game
}

fn forge_until_success(
    template: &GameState,
    seed: u64,
    max_attempts: u64,
    mut trial: impl FnMut(&mut GameState, &mut ChaCha20Rng) -> bool,
) -> ScenarioOutcome {
    let mut adv = ChaCha20Rng::seed_from_u64(seed);
    adv.set_stream(u64::MAX);
    let mut last = template.clone();
    for attempt in 1..=max_attempts {
        let mut game = template.fork(seed.wrapping_add(attempt));
        if trial(&mut game, &mut adv) {
            return ScenarioOutcome { game, attempts: attempt, forged: Some(true) };
        }
        last = game;
    }
    ScenarioOutcome { game: last, attempts: max_attempts, forged: Some(false) }
}

/// Budget for repeat-until-success forgeries: `10 * 2^bits`.
pub fn forgery_budget(bits: usize) -> u64 {
    10u64.saturating_mul(1u64.checked_shl(bits as u32).unwrap_or(u64::MAX))
}

pub fn run_scenario(suite: SuiteParams, scenario: Scenario, seed: u64) -> ScenarioOutcome {
    let (a, b) = (UserId(1), UserId(2));
    match scenario {
        Scenario::Honest(n) => ScenarioOutcome { game: honest_schedule(suite, n, seed), attempts: 0, forged: None },
        Scenario::ForgeResponder => {
            let budget = forgery_budget(suite.mac_bits);
            forge_until_success(&victim_template(suite, seed), seed, budget, |g, adv| {
                matches!(forge_responder_trial(g, adv), Some((_, Status::Terminated)))
            })
        }
        Scenario::ForgeInitiator => {
            let budget = forgery_budget(suite.t3_bits());
            forge_until_success(&victim_template(suite, seed), seed, budget, |g, adv| {
                matches!(forge_initiator_trial(g, adv), Some((Status::Terminated, _)))
            })
        }
        Scenario::CorruptAfterAccept | Scenario::CorruptBeforeAccept => {
            let mut game = victim_template(suite, seed);
            if scenario == Scenario::CorruptBeforeAccept {
                game.rev_ltk(b).expect("user exists");
            }
            relay(&mut game, (a, 0), (b, 0));
            if scenario == Scenario::CorruptAfterAccept {
                game.rev_ltk(a).expect("user exists");
                game.rev_ltk(b).expect("user exists");
            }
            game.test(a, 0);
            ScenarioOutcome { game, attempts: 0, forged: None }
        }
    }
}

/// Delivers every flow between an initiator and a responder session.
pub fn relay(game: &mut GameState, init: (UserId, u32), resp: (UserId, u32)) {
    let mut next = game.send(init.0, init.1, SendInput::Activate(Activation::Initiator { peer: resp.0 })).ok().flatten();
    let _ = game.send(resp.0, resp.1, SendInput::Activate(Activation::Responder));
    let mut to = resp;
    while let Some(msg) = next.take() {
        next = game.send(to.0, to.1, SendInput::Deliver(msg)).ok().flatten();
        to = if to == resp { init } else { resp };
    }
}
