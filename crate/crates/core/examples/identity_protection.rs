//! Where identities show up on the wire, passively and under an injected
//! message 2.

use edhoc_lab::attacks::{active_msg2_injection, passive_identity_capture};
use edhoc_lab::crypto::Curve;
use edhoc_lab::suite::SuiteParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for suite in [SuiteParams::baseline(Curve::X25519), SuiteParams::improved(Curve::X25519)] {
        let passive = passive_identity_capture(suite, 1)?;
        println!("{} passive: {} flows, exposures {:?}", suite.variant, passive.captured.len(), passive.exposures);
        let active = active_msg2_injection(suite, 1)?;
        println!(
            "{} active: initiator {}, {} flows seen, exposures {:?}",
            suite.variant,
            active.initiator_status,
            active.captured.len(),
            active.exposures
        );
    }
    Ok(())
}
