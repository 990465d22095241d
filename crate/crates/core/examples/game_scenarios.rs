//! Every named scenario with its predicate verdicts.

use edhoc_lab::crypto::Curve;
use edhoc_lab::scenarios::{run_scenario, Scenario};
use edhoc_lab::suite::SuiteParams;

fn main() {
    let suite = SuiteParams::baseline(Curve::X25519).with_mac_bits(6).with_sec_bits(6);
    for scenario in [
        Scenario::Honest(10),
        Scenario::ForgeResponder,
        Scenario::ForgeInitiator,
        Scenario::CorruptAfterAccept,
        Scenario::CorruptBeforeAccept,
    ] {
        let o = run_scenario(suite, scenario, 1);
        println!(
            "{scenario}: sound={} fresh={} explicit_auth={} forged={:?} attempts={}",
            o.sound(),
            o.fresh(),
            o.explicit_auth(),
            o.forged,
            o.attempts
        );
    }
}
