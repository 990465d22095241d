mod common;

use common::*;
use edhoc_lab::crypto::{self, Curve, PublicKey, SecretKey};
use proptest::prelude::*;

#[test]
fn sha256_oracle_matches_published_digests() {
    let empty = unhex("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    let abc = unhex("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    assert_eq!(sha256(b"").to_vec(), empty);
    assert_eq!(sha256(b"abc").to_vec(), abc);
    assert_eq!(crypto::hash(b"").to_vec(), empty);
    assert_eq!(crypto::hash(b"abc").to_vec(), abc);
}

#[test]
fn hkdf_rfc5869_vectors() {
    for v in rfc5869_vectors() {
        assert_eq!(hkdf_extract(&v.salt, &v.ikm).to_vec(), v.prk, "oracle extract");
        assert_eq!(hkdf_expand(&v.prk, &v.info, v.okm.len()), v.okm, "oracle expand");
        let prk = crypto::extract(&v.salt, &v.ikm);
        assert_eq!(prk.as_bytes().to_vec(), v.prk);
        assert_eq!(crypto::expand_raw(&prk, &v.info, v.okm.len()).unwrap(), v.okm);
    }
}

#[test]
fn x25519_rfc7748_vectors() {
    for (k, u, out) in rfc7748_scalar_mult() {
        assert_eq!(x25519(&k, &u), out, "oracle ladder");
        let secret = SecretKey::from_bytes(Curve::X25519, k).unwrap();
        assert_eq!(crypto::dh_shared(&secret, &PublicKey::from_bytes(Curve::X25519, u)).unwrap(), out);
    }
    let v = rfc7748_dh();
    assert_eq!(x25519_base(&v.alice_sk), v.alice_pk);
    assert_eq!(x25519_base(&v.bob_sk), v.bob_pk);
    assert_eq!(x25519(&v.alice_sk, &v.bob_pk), v.shared);
    let alice = SecretKey::from_bytes(Curve::X25519, v.alice_sk).unwrap();
    let bob = SecretKey::from_bytes(Curve::X25519, v.bob_sk).unwrap();
    assert_eq!(alice.public_key().as_bytes(), v.alice_pk);
    assert_eq!(bob.public_key().as_bytes(), v.bob_pk);
    assert_eq!(crypto::dh_shared(&alice, &bob.public_key()).unwrap(), v.shared);
    assert_eq!(crypto::dh_shared(&bob, &alice.public_key()).unwrap(), v.shared);
}

#[test]
fn ccm_rfc3610_vectors() {
    for v in rfc3610_vectors() {
        assert_eq!(ccm_seal(&v.key, &v.nonce, &v.aad, &v.pt, v.tag_len), v.ct, "oracle seal");
        assert_eq!(ccm_open(&v.key, &v.nonce, &v.aad, &v.ct, v.tag_len), Some(v.pt.clone()));
        let ct = crypto::aead_seal(&v.key, &v.nonce, &v.pt, &v.aad, 8 * v.tag_len).unwrap();
        assert_eq!(ct, v.ct);
        assert_eq!(crypto::aead_open(&v.key, &v.nonce, &v.ct, &v.aad, 8 * v.tag_len).unwrap(), v.pt);
    }
}

#[test]
fn labelled_expand_matches_oracle_layout() {
    let prk = crypto::extract(b"salt", b"ikm");
    for (label, bits) in [(0u8, 8usize), (2, 12), (6, 128), (7, 256), (9, 104), (3, 1000)] {
        let ctx = vec![label; 3 * label as usize];
        assert_eq!(
            crypto::expand(&prk, label, &ctx, bits).unwrap(),
            expand_bits(prk.as_bytes(), label, &ctx, bits),
            "label {label} bits {bits}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hkdf_composition_matches_oracle(
        salt in proptest::collection::vec(any::<u8>(), 0..80),
        ikm in proptest::collection::vec(any::<u8>(), 0..80),
        label in any::<u8>(),
        ctx in proptest::collection::vec(any::<u8>(), 0..64),
        bits in 1usize..2048,
    ) {
        let prk = crypto::extract(&salt, &ikm);
        prop_assert_eq!(prk.as_bytes(), &hkdf_extract(&salt, &ikm));
        prop_assert_eq!(crypto::expand(&prk, label, &ctx, bits).unwrap(), expand_bits(prk.as_bytes(), label, &ctx, bits));
    }

    #[test]
    fn ccm_matches_oracle(
        key in any::<[u8; 16]>(),
        nonce in any::<[u8; 13]>(),
        aad in proptest::collection::vec(any::<u8>(), 0..40),
        pt in proptest::collection::vec(any::<u8>(), 0..70),
        tag_bytes in prop::sample::select(vec![4usize, 6, 8, 10, 12, 14, 16]),
    ) {
        let ct = crypto::aead_seal(&key, &nonce, &pt, &aad, 8 * tag_bytes).unwrap();
        prop_assert_eq!(&ct, &ccm_seal(&key, &nonce, &aad, &pt, tag_bytes));
        prop_assert_eq!(ccm_open(&key, &nonce, &aad, &ct, tag_bytes), Some(pt));
    }

    #[test]
    fn x25519_matches_oracle(a in any::<[u8; 32]>(), b in any::<[u8; 32]>()) {
        let (sa, sb) = (SecretKey::from_bytes(Curve::X25519, a).unwrap(), SecretKey::from_bytes(Curve::X25519, b).unwrap());
        let pa = sa.public_key();
        prop_assert_eq!(pa.as_bytes(), &x25519_base(&a));
        let shared = crypto::dh_shared(&sa, &sb.public_key()).unwrap();
        prop_assert_eq!(shared, x25519(&a, &x25519_base(&b)));
    }
}
