//! Command-line front end: `handshake`, `attack` and `game`.
//!
//! Output is fully determined by the flags. Keys are only ever shown as
//! fingerprints.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::attacks::{run_attack, AttackError, Target};
use crate::crypto::{dh_keygen, Curve};
use crate::protocol::{Credential, Identity, ProtocolError, SessionState, WireMessage};
use crate::scenarios::{run_scenario, Scenario};
use crate::suite::{ParamError, SuiteParams, Variant};

/// Largest tag an attack campaign may have to guess.
pub const MAX_ATTACK_TAG_BITS: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "edhoc-lab", version, about = "STAT/STAT handshake, forgery campaigns and security games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one honest handshake and print sizes and key fingerprints.
    Handshake {
        #[command(flatten)]
        config: RunConfig,
        /// Run the responder with a different variant than the initiator.
        #[arg(long)]
        responder_variant: Option<Variant>,
    },
    /// Run a tag-guessing campaign and print its report.
    Attack {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, default_value = "responder-auth")]
        target: Target,
    },
    /// Replay a named game scenario and print the trace and verdicts.
    Game {
        #[command(flatten)]
        config: RunConfig,
        /// honest-N, forge-responder, forge-initiator, corrupt-after-accept,
        /// corrupt-before-accept
        #[arg(long)]
        scenario: Scenario,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, default_value = "baseline")]
    pub variant: Variant,
    #[arg(long, default_value = "x25519")]
    pub curve: Curve,
    /// Tag bits of t_2 (and t_3 in the baseline). Defaults to 64, or to
    /// lSEC when that is smaller.
    #[arg(long)]
    pub lmac: Option<usize>,
    /// Tag bits of t_3 in the improved variant.
    #[arg(long, default_value_t = 128)]
    pub lsec: usize,
    /// Connection identifier bits.
    #[arg(long, default_value_t = 32)]
    pub nl: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20000)]
    pub trials: u64,
    /// Also write machine-readable records here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn suite(&self) -> Result<SuiteParams, ParamError> {
        let lmac = self.lmac.unwrap_or(64.min(self.lsec));
        let suite = SuiteParams::new(self.curve, self.variant)
            .with_mac_bits(lmac)
            .with_sec_bits(self.lsec)
            .with_conn_id_bits(self.nl);
        suite.validate()?;
        Ok(suite)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("refusing to guess a {bits}-bit tag; campaigns are limited to {MAX_ATTACK_TAG_BITS} bits")]
    TagTooLong { bits: usize },
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Runs a parsed command. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Handshake { config, responder_variant } => cmd_handshake(config, *responder_variant, out),
        Command::Attack { config, target } => cmd_attack(config, *target, out),
        Command::Game { config, scenario } => cmd_game(config, *scenario, out),
    }
}

fn write_records(config: &RunConfig, records: &[String]) -> Result<(), CliError> {
    if let Some(path) = &config.out {
        let mut body = records.join("\n");
        body.push('\n');
        fs::write(path, body)?;
    }
    Ok(())
}

pub fn cmd_handshake(config: &RunConfig, responder_variant: Option<Variant>, out: &mut dyn Write) -> Result<u8, CliError> {
    let init_suite = config.suite()?;
    let resp_suite = init_suite.with_variant(responder_variant.unwrap_or(init_suite.variant));
    resp_suite.validate()?;

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let ik = dh_keygen(&mut rng, init_suite.curve);
    let rk = dh_keygen(&mut rng, init_suite.curve);
    let (id_i, id_r) = (Identity::for_user(1, init_suite.id_len()), Identity::for_user(2, init_suite.id_len()));
    let directory = [Credential { id: id_i.clone(), public: ik.public.clone() }];
    let mut init = SessionState::initiator(init_suite, id_i, Credential { id: id_r.clone(), public: rk.public.clone() });
    let mut resp = SessionState::responder(resp_suite, id_r);

    writeln!(
        out,
        "handshake initiator={} responder={} curve={} lmac={} lsec={} nl={} seed={}",
        init_suite.variant, resp_suite.variant, init_suite.curve, init_suite.mac_bits, init_suite.sec_bits,
        init_suite.conn_id_bits, config.seed
    )?;
    let mut flows: Vec<WireMessage> = Vec::new();
    let rejection = (|| {
        let m1 = init.initrun1(&mut rng)?;
        flows.push(m1.into());
        let m2 = resp.resprun1(&rk, &flows[0].encode(), &mut rng)?;
        flows.push(m2.into());
        let m3 = init.initrun2(&ik, &flows[1].encode())?;
        flows.push(m3.into());
        if let Some(m4) = resp.resprun2(&directory[..], &flows[2].encode())? {
            flows.push(m4.into());
            init.initrun3(&flows[3].encode())?;
        }
        Ok::<(), ProtocolError>(())
    })()
    .err();

    let mut records = Vec::new();
    for (n, msg) in flows.iter().enumerate() {
        let (bytes, payload) = (msg.encode().len(), msg.payload_len());
        writeln!(out, "flow {}: {bytes} bytes (payload {payload})", n + 1)?;
        records.push(format!("flow={} bytes={bytes} payload={payload}", n + 1));
    }
    for (name, s) in [("initiator", &init), ("responder", &resp)] {
        let sk = s.session_key().map_or_else(|| "-".to_string(), |k| k.fingerprint());
        let prk = s.chain().prk4e3m.map_or_else(|| "-".to_string(), |p| crate::crypto::fingerprint(p.as_bytes()));
        writeln!(out, "{name}: status={} sk={sk} prk4e3m={prk}", s.status())?;
        records.push(format!("party={name} status={} sk={sk}", s.status()));
    }
    let agreed = matches!((init.session_key(), resp.session_key()), (Some(a), Some(b)) if a == b);
    let code = match rejection {
        Some(e) => {
            writeln!(out, "rejected: {e}")?;
            1
        }
        None if agreed => {
            writeln!(out, "SK match")?;
            0
        }
        None => {
            writeln!(out, "SK mismatch")?;
            1
        }
    };
    records.push(format!("verdict={}", if code == 0 { "match" } else { "fail" }));
    write_records(config, &records)?;
    Ok(code)
}

pub fn cmd_attack(config: &RunConfig, target: Target, out: &mut dyn Write) -> Result<u8, CliError> {
    let suite = config.suite()?;
    let guessed = match target {
        Target::ResponderAuth => suite.mac_bits,
        Target::InitiatorAuth => suite.t3_bits(),
    };
    if guessed > MAX_ATTACK_TAG_BITS {
        return Err(CliError::TagTooLong { bits: guessed });
    }
    let report = run_attack(suite, target, config.trials, config.seed)?;
    writeln!(
        out,
        "{target} against {} ({}): {} of {} trials succeeded, expected {:.1}",
        suite.variant,
        suite.curve,
        report.successes,
        report.trials,
        report.expected_successes()
    )?;
    writeln!(out, "{report}")?;
    let ok = report.within_threshold();
    writeln!(out, "{}", if ok { "consistent with 2^-ltag" } else { "outside the 4-sigma band" })?;
    write_records(config, &[report.to_string()])?;
    Ok(if ok { 0 } else { 1 })
}

pub fn cmd_game(config: &RunConfig, scenario: Scenario, out: &mut dyn Write) -> Result<u8, CliError> {
    let suite = config.suite()?;
    let outcome = run_scenario(suite, scenario, config.seed);
    for line in outcome.game.trace() {
        writeln!(out, "{line}")?;
    }
    let mut verdict = format!(
        "scenario={scenario} sound={} fresh={} explicit_auth={}",
        outcome.sound(),
        outcome.fresh(),
        outcome.explicit_auth()
    );
    if let Some(forged) = outcome.forged {
        verdict.push_str(&format!(" forged={forged} attempts={}", outcome.attempts));
    }
    writeln!(out, "{verdict}")?;
    let mut records = outcome.game.trace().to_vec();
    records.push(verdict);
    write_records(config, &records)?;
    Ok(0)
}
