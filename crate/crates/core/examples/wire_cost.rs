//! Message 3 sizes: baseline AEAD versus improved OTP plus cleartext tag.

use edhoc_lab::attacks::wire_cost_accounting;
use edhoc_lab::crypto::Curve;
use edhoc_lab::suite::SuiteParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = SuiteParams::baseline(Curve::X25519);
    for (mac, sec) in [(64, 64), (64, 128), (64, 136), (32, 64)] {
        let cost = wire_cost_accounting(base.with_mac_bits(mac), SuiteParams::improved(Curve::X25519).with_mac_bits(mac).with_sec_bits(sec), 0)?;
        println!("lmac={mac} lsec={sec}: {cost} diff={:+}", cost.difference());
    }
    Ok(())
}
