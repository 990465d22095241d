//! Guessing t_3: lMAC bits in the baseline, lSEC bits in the improved variant.

use edhoc_lab::attacks::{attack_initiator_auth, attack_initiator_auth_improved};
use edhoc_lab::crypto::Curve;
use edhoc_lab::suite::SuiteParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = attack_initiator_auth(SuiteParams::baseline(Curve::X25519).with_mac_bits(6), 10_000, 2)?;
    println!("{base}");
    for sec in [6, 10] {
        let suite = SuiteParams::improved(Curve::X25519).with_mac_bits(6).with_sec_bits(sec);
        println!("{}", attack_initiator_auth_improved(suite, 10_000, 2)?);
    }
    Ok(())
}
