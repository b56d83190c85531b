mod commands;
mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use commands::Options;

const DEFAULT_SEED: u64 = 0x5eed_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// SK1, CK1 and SH1 of graded division algebras, and the constructive machinery behind them.
#[derive(Parser, Debug)]
#[command(name = "gradsk", version)]
struct Cli {
    /// One of: classify, sk1, sk1-brute, ck1, sh1, nondegenerate, skew-divisor, skew-reduce,
    /// hensel, norm-preimage, wedderburn, congruence-check
    command: String,
    /// JSON input file
    input: PathBuf,
    /// p-adic working precision (series and tower commands)
    #[arg(long)]
    precision: Option<i64>,
    /// Orbit or enumeration cap
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Force an SK1 strategy by name (sk1 only)
    #[arg(long)]
    method: Option<String>,
}

fn fail(code: i32, msg: &str) -> ExitCode {
    eprintln!("gradsk: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let registry = commands::registry();
    let Some(cmd) = registry.get(&cli.command) else {
        let mut names: Vec<&String> = registry.keys().collect();
        names.sort();
        let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        return fail(1, &format!("unknown command '{}'; expected one of {}", cli.command, names.join(", ")));
    };
    let bytes = match fs::read(&cli.input) {
        Ok(b) => b,
        Err(e) => return fail(1, &format!("cannot read {}: {e}", cli.input.display())),
    };
    let digest = hex::encode(Sha256::digest(&bytes));
    let value: Value = match serde_json::from_slice(&bytes) {
        Ok(v) => v,
        Err(e) => return fail(1, &format!("schema error: {e}")),
    };
    let opts = Options { precision: cli.precision, budget: cli.budget, seed: cli.seed, method: cli.method.clone() };
    let outcome = match cmd.run(&value, &opts) {
        Ok(o) => o,
        Err(e) => return fail(e.exit_code(), &e.to_string()),
    };
    let text = match cli.format {
        Format::Json => {
            let mut report = Map::new();
            report.insert("command".into(), Value::from(cmd.name()));
            report.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
            report.insert("input_sha256".into(), Value::from(digest));
            report.insert("seed".into(), Value::from(cli.seed));
            match outcome.report {
                Value::Object(m) => report.extend(m),
                other => {
                    report.insert("result".into(), other);
                }
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => format!(
            "{}\n{} {} | input sha256 {}\n",
            outcome.summary.trim_end(),
            cmd.name(),
            env!("CARGO_PKG_VERSION"),
            digest
        ),
    };
    match &cli.out {
        Some(p) => {
            if let Err(e) = fs::write(p, text) {
                return fail(1, &format!("cannot write {}: {e}", p.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
