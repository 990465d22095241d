//! Exporter output and key update after a handshake.

use edhoc_lab::crypto::{fingerprint, Curve};
use edhoc_lab::protocol::run_handshake;
use edhoc_lab::suite::SuiteParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = run_handshake(SuiteParams::improved(Curve::P256), 5)?;
    let (mut i, mut r) = (out.initiator, out.responder);
    let a = i.exporter(16, b"oscore master secret", 128)?;
    let b = r.exporter(16, b"oscore master secret", 128)?;
    println!("exported {} / {}", fingerprint(&a), fingerprint(&b));
    i.key_update(b"nonce")?;
    r.key_update(b"nonce")?;
    let a = i.exporter(16, b"oscore master secret", 128)?;
    let b = r.exporter(16, b"oscore master secret", 128)?;
    println!("after update {} / {}", fingerprint(&a), fingerprint(&b));
    match i.exporter(3, b"", 128) {
        Err(e) => println!("label 3: {e}"),
        Ok(_) => println!("label 3 unexpectedly accepted"),
    }
    Ok(())
}
