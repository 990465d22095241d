//! The four-message variant driven step by step.

use edhoc_lab::crypto::{dh_keygen, Curve};
use edhoc_lab::protocol::{Credential, Identity, SessionState};
use edhoc_lab::suite::SuiteParams;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite = SuiteParams::improved(Curve::X25519);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let alice_keys = dh_keygen(&mut rng, suite.curve);
    let bob_keys = dh_keygen(&mut rng, suite.curve);
    let alice = Identity::new(*b"alic");
    let bob = Identity::new(*b"bob_");
    let directory = [Credential { id: alice.clone(), public: alice_keys.public.clone() }];

    let mut init = SessionState::initiator(suite, alice, Credential { id: bob.clone(), public: bob_keys.public.clone() });
    let mut resp = SessionState::responder(suite, bob);

    let m1 = init.initrun1(&mut rng)?.encode();
    println!("m1 {} bytes; responder {}", m1.len(), resp.status());
    let m2 = resp.resprun1(&bob_keys, &m1, &mut rng)?.encode();
    println!("m2 {} bytes; initiator {}", m2.len(), init.status());
    let m3 = init.initrun2(&alice_keys, &m2)?.encode();
    println!("m3 {} bytes; initiator {} (no key until message 4)", m3.len(), init.status());
    let m4 = resp.resprun2(&directory[..], &m3)?.expect("the improved variant answers").encode();
    println!("m4 {} bytes; responder {}", m4.len(), resp.status());
    init.initrun3(&m4)?;
    println!("initiator {}", init.status());
    println!("sk {} / {}", init.session_key().unwrap().fingerprint(), resp.session_key().unwrap().fingerprint());
    Ok(())
}
