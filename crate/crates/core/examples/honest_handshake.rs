//! One honest baseline handshake per curve: flow sizes and key fingerprints.

use edhoc_lab::crypto::Curve;
use edhoc_lab::protocol::run_handshake;
use edhoc_lab::suite::SuiteParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for curve in [Curve::X25519, Curve::P256] {
        let out = run_handshake(SuiteParams::baseline(curve), 1)?;
        println!("{curve}:");
        for (n, msg) in out.messages.iter().enumerate() {
            println!("  flow {}: {} bytes", n + 1, msg.encode().len());
        }
        let (i, r) = (out.initiator.session_key().unwrap(), out.responder.session_key().unwrap());
        println!("  initiator sk={} responder sk={} agree={}", i.fingerprint(), r.fingerprint(), i == r);
    }
    Ok(())
}
