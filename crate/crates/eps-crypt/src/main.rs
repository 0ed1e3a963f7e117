//! Conformance CLI for the EPS second-set security algorithms.

use std::path::PathBuf;
use std::process;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use eps_crypt::bits::BitString;
use eps_crypt::eea::{apply_eea0, CipherContext};
use eps_crypt::eia::{IntegrityContext, MacTag32};
use eps_crypt::link::Scenario;
use eps_crypt::params::{Bearer, Direction};
use eps_crypt::selftest;
use eps_crypt::AesKey128;

#[derive(Parser)]
#[command(
    name = "eps-crypt",
    version,
    about = "128-EEA2 / 128-EIA2 conformance tool: ciphering, MAC-I, self-test, link scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply EEA ciphering to a message (the same operation deciphers)
    Eea2(Eea2Args),
    /// Compute or verify an EIA MAC-I over a message
    Eia2(Eia2Args),
    /// Run the embedded conformance vectors and property suites
    Selftest(SelftestArgs),
    /// Execute a link scenario script and print the transcript
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct Eea2Args {
    /// Cipher key, 32 hex digits
    #[arg(long, env = "EPS_CRYPT_KEY")]
    key: Option<String>,
    /// 32-bit COUNT, hex by default, 0d prefix for decimal
    #[arg(long)]
    count: Option<String>,
    /// 5-bit BEARER, hex by default, 0d prefix for decimal
    #[arg(long)]
    bearer: Option<String>,
    /// DIRECTION bit: 0 for uplink, 1 for downlink
    #[arg(long)]
    direction: Option<String>,
    /// Message as hex digits with an optional /bits suffix
    #[arg(long)]
    message: String,
    /// Algorithm: eea2 or eea0
    #[arg(long, default_value = "eea2")]
    algo: String,
    /// Apply the cipher twice and echo the input back
    #[arg(long)]
    roundtrip: bool,
}

#[derive(Args)]
struct Eia2Args {
    /// Integrity key, 32 hex digits
    #[arg(long, env = "EPS_CRYPT_KEY")]
    key: Option<String>,
    /// 32-bit COUNT, hex by default, 0d prefix for decimal
    #[arg(long)]
    count: Option<String>,
    /// 5-bit BEARER, hex by default, 0d prefix for decimal
    #[arg(long)]
    bearer: Option<String>,
    /// DIRECTION bit: 0 for uplink, 1 for downlink
    #[arg(long)]
    direction: Option<String>,
    /// Message as hex digits with an optional /bits suffix
    #[arg(long)]
    message: String,
    /// Algorithm: eia2 or eia0
    #[arg(long, default_value = "eia2")]
    algo: String,
    /// Print L, K1, K2 and every M[i]/C[i] intermediate
    #[arg(long)]
    trace: bool,
    /// Compare the computed MAC-I against this tag (8 hex digits)
    #[arg(long)]
    verify: Option<String>,
}

#[derive(Args)]
struct SelftestArgs {
    /// List the vector and property names without running them
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario script file
    script: PathBuf,
}

fn main() {
    match run(Cli::parse()) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Eea2(args) => cmd_eea2(args),
        Command::Eia2(args) => cmd_eia2(args),
        Command::Selftest(args) => cmd_selftest(args),
        Command::Scenario(args) => cmd_scenario(args),
    }
}

/// Parses a hex integer; a `0d` prefix switches to decimal
/// (`--count 0d1234` is decimal 1234, `--count 1234` is hex).
fn parse_uint(field: &str, text: &str) -> Result<u64> {
    let parsed = match text.strip_prefix("0d") {
        Some(dec) => dec.parse::<u64>().ok(),
        None => u64::from_str_radix(text, 16).ok(),
    };
    parsed.ok_or_else(|| anyhow!("invalid {field}: {text:?} is not a valid number"))
}

fn parse_count(text: Option<&str>) -> Result<u32> {
    let text = text.ok_or_else(|| anyhow!("--count is required for this algorithm"))?;
    let value = parse_uint("--count", text)?;
    u32::try_from(value).map_err(|_| anyhow!("invalid --count: {text:?} exceeds 32 bits"))
}

fn parse_bearer(text: Option<&str>) -> Result<Bearer> {
    let text = text.ok_or_else(|| anyhow!("--bearer is required for this algorithm"))?;
    let value = parse_uint("--bearer", text)?;
    u8::try_from(value)
        .ok()
        .and_then(|v| Bearer::new(v).ok())
        .ok_or_else(|| anyhow!("invalid --bearer: {text:?} is not a 5-bit bearer identity"))
}

fn parse_direction(text: Option<&str>) -> Result<Direction> {
    match text {
        Some("0") => Ok(Direction::Uplink),
        Some("1") => Ok(Direction::Downlink),
        Some(other) => bail!("invalid --direction: {other:?} must be 0 (uplink) or 1 (downlink)"),
        None => bail!("--direction is required for this algorithm"),
    }
}

fn parse_key(text: Option<&str>) -> Result<AesKey128> {
    let text =
        text.ok_or_else(|| anyhow!("--key is required for this algorithm (or set EPS_CRYPT_KEY)"))?;
    AesKey128::from_hex(text).map_err(|e| anyhow!("invalid --key: {e}"))
}

fn parse_message(text: &str) -> Result<BitString> {
    BitString::parse_hex(text).map_err(|e| anyhow!("invalid --message: {e}"))
}

fn cmd_eea2(args: Eea2Args) -> Result<i32> {
    let message = parse_message(&args.message)?;
    let output = match args.algo.as_str() {
        "eea0" => {
            let once = apply_eea0(&message);
            if args.roundtrip {
                apply_eea0(&once)
            } else {
                once
            }
        }
        "eea2" => {
            let ctx = CipherContext::new(
                &parse_key(args.key.as_deref())?,
                parse_count(args.count.as_deref())?,
                parse_bearer(args.bearer.as_deref())?,
                parse_direction(args.direction.as_deref())?,
            );
            let once = ctx.apply_keystream(&message);
            if args.roundtrip {
                ctx.apply_keystream(&once)
            } else {
                once
            }
        }
        other => bail!("invalid --algo: {other:?} must be eea2 or eea0"),
    };
    println!("{output}");
    Ok(0)
}

fn cmd_eia2(args: Eia2Args) -> Result<i32> {
    let message = parse_message(&args.message)?;
    let tag = match args.algo.as_str() {
        "eia0" => {
            if args.trace {
                bail!("--trace requires --algo eia2; EIA0 has no intermediates");
            }
            MacTag32::ZERO
        }
        "eia2" => {
            let ctx = IntegrityContext::new(
                &parse_key(args.key.as_deref())?,
                parse_count(args.count.as_deref())?,
                parse_bearer(args.bearer.as_deref())?,
                parse_direction(args.direction.as_deref())?,
            );
            if args.trace {
                let (tag, trace) = ctx.generate_mac_traced(&message);
                print!("{}", trace.render());
                tag
            } else {
                ctx.generate_mac(&message)
            }
        }
        other => bail!("invalid --algo: {other:?} must be eia2 or eia0"),
    };

    match args.verify {
        Some(expected) => {
            let expected =
                MacTag32::from_hex(&expected).map_err(|e| anyhow!("invalid --verify: {e}"))?;
            if tag.ct_eq(&expected) {
                println!("accept");
                Ok(0)
            } else {
                println!("reject");
                Ok(1)
            }
        }
        None => {
            if !args.trace {
                println!("{tag}");
            }
            Ok(0)
        }
    }
}

fn cmd_selftest(args: SelftestArgs) -> Result<i32> {
    if args.list {
        for name in selftest::test_names() {
            println!("{name}");
        }
        return Ok(0);
    }
    let outcomes = selftest::run_all();
    let mut failures = 0;
    for outcome in &outcomes {
        match &outcome.result {
            Ok(()) => println!("[PASS] {}", outcome.name),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {}: {detail}", outcome.name);
            }
        }
    }
    println!(
        "{} of {} items passed",
        outcomes.len() - failures,
        outcomes.len()
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_scenario(args: ScenarioArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.script)
        .with_context(|| format!("cannot read script {}", args.script.display()))?;
    let scenario = Scenario::parse(&text).map_err(|e| anyhow!("{e}"))?;
    let transcript = scenario.run();
    print!("{}", transcript.render());
    let matched = transcript.records.iter().filter(|r| r.matched()).count();
    println!(
        "# result: {matched}/{} verdicts as expected",
        transcript.records.len()
    );
    Ok(if transcript.all_as_expected() { 0 } else { 1 })
}
