//! Plays the key-privacy game: honest run, test query, and two adversaries.

use edhoc_lab::crypto::Curve;
use edhoc_lab::game::GameState;
use edhoc_lab::scenarios::relay;
use edhoc_lab::suite::SuiteParams;

fn play(seed: u64, reveal_partner: bool) -> bool {
    let mut g = GameState::new(SuiteParams::baseline(Curve::X25519), seed);
    let (a, _) = g.new_user();
    let (b, _) = g.new_user();
    relay(&mut g, (a, 0), (b, 0));
    let challenge = g.test(a, 0).expect("terminated session");
    let guess = if reveal_partner {
        // Trivial: compare against the partner's key. Not fresh.
        g.rev_sk(b, 0).unwrap() != challenge
    } else {
        seed.is_multiple_of(2)
    };
    g.finalize_kp(guess)
}

fn main() {
    let n = 400;
    for (name, reveal) in [("random guess", false), ("reveal partner", true)] {
        let wins = (0..n).filter(|&s| play(s, reveal)).count();
        println!("{name}: won {wins} of {n}");
    }
    let mut g = GameState::new(SuiteParams::improved(Curve::X25519), 3);
    let (a, _) = g.new_user();
    let (b, _) = g.new_user();
    relay(&mut g, (a, 0), (b, 0));
    g.rev_ltk(a).unwrap();
    g.test(b, 0);
    for line in g.trace() {
        println!("{line}");
    }
    println!("sound={} fresh={} explicit_auth={}", g.sound(), g.fresh(), g.finalize_explicit_auth());
}
