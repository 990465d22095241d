//! Guessing t_2 at small lMAC, against both variants.

use edhoc_lab::attacks::attack_responder_auth;
use edhoc_lab::crypto::Curve;
use edhoc_lab::suite::SuiteParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for bits in [4, 6, 8] {
        let r = attack_responder_auth(SuiteParams::baseline(Curve::X25519).with_mac_bits(bits), 10_000, 1)?;
        println!("{r}");
    }
    // The fourth flow: getting past t_2 is not enough, c_4 still has to verify.
    let suite = SuiteParams::improved(Curve::X25519).with_mac_bits(6);
    let r = attack_responder_auth(suite, 10_000, 1)?;
    println!("{r}");
    Ok(())
}
