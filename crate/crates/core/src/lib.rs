//! EDHOC-style STAT/STAT handshake lab.
//!
//! Runs the three-message baseline handshake and the four-message improved
//! variant over X25519 or P-256, and ships the tooling to probe them: a
//! Bellare-Rogaway style security game ([`game`]), tag-forgery and
//! wire-cost experiments ([`attacks`]) and a small command line ([`cli`]).
//!
//! ```
//! use edhoc_lab::crypto::Curve;
//! use edhoc_lab::protocol::run_handshake;
//! use edhoc_lab::suite::SuiteParams;
//!
//! let out = run_handshake(SuiteParams::improved(Curve::X25519), 7).unwrap();
//! assert_eq!(out.initiator.session_key(), out.responder.session_key());
//! ```

pub mod attacks;
pub mod cli;
pub mod crypto;
pub mod encoding;
pub mod game;
pub mod key_schedule;
pub mod protocol;
pub mod scenarios;
pub mod suite;
