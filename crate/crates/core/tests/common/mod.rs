//! Test-only reference implementations. None of these touch the crate's
//! crypto backends: SHA-256 is written out from FIPS 180-4, HMAC/HKDF sit on
//! top of it, X25519 is a big-integer Montgomery ladder, and CCM is built
//! from the raw AES block function.

#![allow(dead_code)]

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;
use num_bigint::BigUint;

pub fn unhex(s: &str) -> Vec<u8> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
}

pub fn unhex32(s: &str) -> [u8; 32] {
    unhex(s).try_into().unwrap()
}

// SHA-256

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

pub fn sha256(msg: &[u8]) -> [u8; 32] {
    let mut h: [u32; 8] =
        [0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19];
    let mut data = msg.to_vec();
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&((msg.len() as u64) * 8).to_be_bytes());
    for block in data.chunks(64) {
        let mut w = [0u32; 64];
        for t in 0..16 {
            w[t] = u32::from_be_bytes(block[4 * t..4 * t + 4].try_into().unwrap());
        }
        for t in 16..64 {
            let s0 = w[t - 15].rotate_right(7) ^ w[t - 15].rotate_right(18) ^ (w[t - 15] >> 3);
            let s1 = w[t - 2].rotate_right(17) ^ w[t - 2].rotate_right(19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for t in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(K[t]).wrapping_add(w[t]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (x, y) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *x = x.wrapping_add(y);
        }
    }
    let mut out = [0u8; 32];
    for (i, word) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

// HMAC / HKDF (RFC 2104, RFC 5869)

pub fn hmac_sha256(key: &[u8], msg: &[u8]) -> [u8; 32] {
    let mut k = [0u8; 64];
    if key.len() > 64 {
        k[..32].copy_from_slice(&sha256(key));
    } else {
        k[..key.len()].copy_from_slice(key);
    }
    let mut inner: Vec<u8> = k.iter().map(|b| b ^ 0x36).collect();
    inner.extend_from_slice(msg);
    let mut outer: Vec<u8> = k.iter().map(|b| b ^ 0x5c).collect();
    outer.extend_from_slice(&sha256(&inner));
    sha256(&outer)
}

pub fn hkdf_extract(salt: &[u8], ikm: &[u8]) -> [u8; 32] {
    hmac_sha256(salt, ikm)
}

pub fn hkdf_expand(prk: &[u8], info: &[u8], len: usize) -> Vec<u8> {
    let mut okm = Vec::new();
    let mut prev = Vec::new();
    let mut counter = 1u8;
    while okm.len() < len {
        let mut input = prev.clone();
        input.extend_from_slice(info);
        input.push(counter);
        prev = hmac_sha256(prk, &input).to_vec();
        okm.extend_from_slice(&prev);
        counter += 1;
    }
    okm.truncate(len);
    okm
}

/// Labelled expand with the suite's info layout and bit-granular output.
pub fn expand_bits(prk: &[u8], label: u8, ctx: &[u8], bits: usize) -> Vec<u8> {
    let mut info = vec![label];
    info.extend_from_slice(&(ctx.len() as u32).to_be_bytes());
    info.extend_from_slice(ctx);
    info.extend_from_slice(&(bits as u16).to_be_bytes());
    let mut out = hkdf_expand(prk, &info, bits.div_ceil(8));
    if !bits.is_multiple_of(8) {
        let last = out.len() - 1;
        out[last] &= 0xffu8 << (8 - bits % 8);
    }
    out
}

pub fn tuple(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in fields {
        out.extend_from_slice(&(f.len() as u32).to_be_bytes());
        out.extend_from_slice(f);
    }
    out
}

// X25519 (RFC 7748 section 5)

fn p25519() -> BigUint {
    (BigUint::from(1u8) << 255u32) - BigUint::from(19u8)
}

fn le_to_int(bytes: &[u8; 32]) -> BigUint {
    BigUint::from_bytes_le(bytes)
}

fn int_to_le(x: &BigUint) -> [u8; 32] {
    let mut v = x.to_bytes_le();
    v.resize(32, 0);
    v.try_into().unwrap()
}

pub fn x25519(scalar: &[u8; 32], u: &[u8; 32]) -> [u8; 32] {
    let p = p25519();
    let mut k = *scalar;
    k[0] &= 248;
    k[31] &= 127;
    k[31] |= 64;
    let k = le_to_int(&k);
    let mut u_bytes = *u;
    u_bytes[31] &= 127;
    let x1 = le_to_int(&u_bytes) % &p;

    let a24 = BigUint::from(121665u32);
    let (mut x2, mut z2) = (BigUint::from(1u8), BigUint::from(0u8));
    let (mut x3, mut z3) = (x1.clone(), BigUint::from(1u8));
    let mut swap = false;
    let sub = |a: &BigUint, b: &BigUint| (a + &p - (b % &p)) % &p;
    for t in (0..255u64).rev() {
        let bit = k.bit(t);
        if swap ^ bit {
            std::mem::swap(&mut x2, &mut x3);
            std::mem::swap(&mut z2, &mut z3);
        }
        swap = bit;
        let a = (&x2 + &z2) % &p;
        let aa = (&a * &a) % &p;
        let b = sub(&x2, &z2);
        let bb = (&b * &b) % &p;
        let e = sub(&aa, &bb);
        let c = (&x3 + &z3) % &p;
        let d = sub(&x3, &z3);
        let da = (&d * &a) % &p;
        let cb = (&c * &b) % &p;
        let s = (&da + &cb) % &p;
        x3 = (&s * &s) % &p;
        let diff = sub(&da, &cb);
        z3 = (&x1 * &diff * &diff) % &p;
        x2 = (&aa * &bb) % &p;
        z2 = (&e * ((&aa + &a24 * &e) % &p)) % &p;
    }
    if swap {
        std::mem::swap(&mut x2, &mut x3);
        std::mem::swap(&mut z2, &mut z3);
    }
    let inv = z2.modpow(&(&p - BigUint::from(2u8)), &p);
    int_to_le(&((x2 * inv) % &p))
}

pub fn x25519_base(scalar: &[u8; 32]) -> [u8; 32] {
    let mut nine = [0u8; 32];
    nine[0] = 9;
    x25519(scalar, &nine)
}

// AES-CCM (RFC 3610), 13-byte nonce so L = 2

fn aes_block(key: &[u8; 16], block: [u8; 16]) -> [u8; 16] {
    let cipher = Aes128::new(key.into());
    let mut b = block.into();
    cipher.encrypt_block(&mut b);
    b.into()
}

fn ccm_mac(key: &[u8; 16], nonce: &[u8; 13], aad: &[u8], pt: &[u8], tag_len: usize) -> Vec<u8> {
    let mut b0 = [0u8; 16];
    b0[0] = (if aad.is_empty() { 0 } else { 0x40 }) | ((((tag_len - 2) / 2) as u8) << 3) | 1;
    b0[1..14].copy_from_slice(nonce);
    b0[14..16].copy_from_slice(&(pt.len() as u16).to_be_bytes());
    let mut blocks = b0.to_vec();
    if !aad.is_empty() {
        let mut a = (aad.len() as u16).to_be_bytes().to_vec();
        a.extend_from_slice(aad);
        while !a.len().is_multiple_of(16) {
            a.push(0);
        }
        blocks.extend(a);
    }
    let mut m = pt.to_vec();
    while !m.len().is_multiple_of(16) {
        m.push(0);
    }
    blocks.extend(m);
    let mut x = [0u8; 16];
    for chunk in blocks.chunks(16) {
        for (xi, ci) in x.iter_mut().zip(chunk) {
            *xi ^= ci;
        }
        x = aes_block(key, x);
    }
    x[..tag_len].to_vec()
}

fn ctr_block(key: &[u8; 16], nonce: &[u8; 13], i: u16) -> [u8; 16] {
    let mut a = [0u8; 16];
    a[0] = 1;
    a[1..14].copy_from_slice(nonce);
    a[14..16].copy_from_slice(&i.to_be_bytes());
    aes_block(key, a)
}

pub fn ccm_seal(key: &[u8; 16], nonce: &[u8; 13], aad: &[u8], pt: &[u8], tag_len: usize) -> Vec<u8> {
    let t = ccm_mac(key, nonce, aad, pt, tag_len);
    let mut out: Vec<u8> = pt
        .chunks(16)
        .enumerate()
        .flat_map(|(i, c)| {
            let s = ctr_block(key, nonce, i as u16 + 1);
            c.iter().zip(s).map(|(a, b)| a ^ b).collect::<Vec<_>>()
        })
        .collect();
    let s0 = ctr_block(key, nonce, 0);
    out.extend(t.iter().zip(s0).map(|(a, b)| a ^ b));
    out
}

pub fn ccm_open(key: &[u8; 16], nonce: &[u8; 13], aad: &[u8], ct: &[u8], tag_len: usize) -> Option<Vec<u8>> {
    let (body, tag) = ct.split_at(ct.len().checked_sub(tag_len)?);
    let pt: Vec<u8> = body
        .chunks(16)
        .enumerate()
        .flat_map(|(i, c)| {
            let s = ctr_block(key, nonce, i as u16 + 1);
            c.iter().zip(s).map(|(a, b)| a ^ b).collect::<Vec<_>>()
        })
        .collect();
    let expect = ccm_seal(key, nonce, aad, &pt, tag_len);
    (expect[body.len()..] == *tag).then_some(pt)
}

// Published vectors

pub struct HkdfVector {
    pub ikm: Vec<u8>,
    pub salt: Vec<u8>,
    pub info: Vec<u8>,
    pub prk: Vec<u8>,
    pub okm: Vec<u8>,
}

/// RFC 5869 Appendix A, test cases 1 and 3.
pub fn rfc5869_vectors() -> Vec<HkdfVector> {
    vec![
        HkdfVector {
            ikm: vec![0x0b; 22],
            salt: unhex("000102030405060708090a0b0c"),
            info: unhex("f0f1f2f3f4f5f6f7f8f9"),
            prk: unhex("077709362c2e32df0ddc3f0dc47bba6390b6c73bb50f9c3122ec844ad7c2b3e5"),
            okm: unhex("3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865"),
        },
        HkdfVector {
            ikm: vec![0x0b; 22],
            salt: Vec::new(),
            info: Vec::new(),
            prk: unhex("19ef24a32c717b167f33a91d6f648bdf96596776afdb6377ac434c1c293ccb04"),
            okm: unhex("8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d9d201395faa4b61a96c8"),
        },
    ]
}

/// RFC 7748 section 5.2 single scalar multiplications: (scalar, u, out).
pub fn rfc7748_scalar_mult() -> Vec<([u8; 32], [u8; 32], [u8; 32])> {
    vec![
        (
            unhex32("a546e36bf0527c9d3b16154b82465edd62144c0ac1fc5a18506a2244ba449ac4"),
            unhex32("e6db6867583030db3594c1a424b15f7c726624ec26b3353b10a903a6d0ab1c4c"),
            unhex32("c3da55379de9c6908e94ea4df28d084f32eccf03491c71f754b4075577a28552"),
        ),
        (
            unhex32("4b66e9d4d1b4673c5ad22691957d6af5c11b6421e0ea01d42ca4169e7918ba0d"),
            unhex32("e5210f12786811d3f4b7959d0538ae2c31dbe7106fc03c3efc4cd549c715a493"),
            unhex32("95cbde9476e8907d7aade45cb4b873f88b595a68799fa152e6f8f7647aac7957"),
        ),
    ]
}

pub struct DhVector {
    pub alice_sk: [u8; 32],
    pub alice_pk: [u8; 32],
    pub bob_sk: [u8; 32],
    pub bob_pk: [u8; 32],
    pub shared: [u8; 32],
}

/// RFC 7748 section 6.1.
pub fn rfc7748_dh() -> DhVector {
    DhVector {
        alice_sk: unhex32("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a"),
        alice_pk: unhex32("8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a"),
        bob_sk: unhex32("5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb"),
        bob_pk: unhex32("de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f"),
        shared: unhex32("4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742"),
    }
}

pub struct CcmVector {
    pub key: [u8; 16],
    pub nonce: [u8; 13],
    pub aad: Vec<u8>,
    pub pt: Vec<u8>,
    pub ct: Vec<u8>,
    pub tag_len: usize,
}

/// RFC 3610 section 8, packet vectors 1 and 2 (M = 8, L = 2).
pub fn rfc3610_vectors() -> Vec<CcmVector> {
    let key: [u8; 16] = unhex("c0c1c2c3c4c5c6c7c8c9cacbcccdcecf").try_into().unwrap();
    vec![
        CcmVector {
            key,
            nonce: unhex("00000003020100a0a1a2a3a4a5").try_into().unwrap(),
            aad: unhex("0001020304050607"),
            pt: unhex("08090a0b0c0d0e0f101112131415161718191a1b1c1d1e"),
            ct: unhex("588c979a61c663d2f066d0c2c0f989806d5f6b61dac38417e8d12cfdf926e0"),
            tag_len: 8,
        },
        CcmVector {
            key,
            nonce: unhex("00000004030201a0a1a2a3a4a5").try_into().unwrap(),
            aad: unhex("0001020304050607"),
            pt: unhex("08090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"),
            ct: unhex("72c91a36e135f8cf291ca894085c87e3cc15c439c9e43a3ba091d56e10400916"),
            tag_len: 8,
        },
    ]
}
