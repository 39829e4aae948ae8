use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use selectis::crosscheck::{self, VerifyConfig};
use selectis::schema::{self, InstanceInput, ProblemInput, SchemaError};
use selectis::SizeGuards;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "selectis", version, about = "Optimal embeddings and selectivity over truncated local rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input JSON file; standard input when omitted or "-"
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,

    /// Output file; standard output when omitted
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Seed for randomized suites
    #[arg(long, global = true, env = "SELECTIS_SEED", default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, default_value_t = 5)]
    max_q: u64,

    #[arg(long, global = true, default_value_t = 3)]
    max_n: usize,

    #[arg(long, global = true, default_value_t = 2)]
    max_k: u32,

    #[arg(long, global = true, default_value_t = 1 << 32)]
    max_group_order: u64,

    /// Spaces per indentation level; 0 writes compact JSON
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether an embedding is optimal and print a witness
    OptimalCheck,
    /// Print the regular representation of an order
    Regrep,
    /// Count conjugacy classes of optimal embeddings of a monogenic order
    Count,
    /// Decide selectivity of a global instance
    Decide,
    /// Print the three norm groups of the selectivity sandwich
    Sandwich,
    /// Run the seeded property suite
    Verify {
        /// Perturb the minor criterion's input; the suite must then fail
        #[arg(long)]
        mutant: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        let code = match &e {
            e if e.is_size_guard() => EXIT_GUARD,
            SchemaError::CriteriaDisagree(_) => EXIT_NEGATIVE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let guards = SizeGuards {
        max_q: cli.max_q,
        max_n: cli.max_n,
        max_k: cli.max_k,
        max_group_order: cli.max_group_order,
        ..SizeGuards::default()
    };
    match &cli.command {
        Command::OptimalCheck => {
            let emb = ProblemInput::parse(&read_input(cli)?)?.embedding()?;
            let report = schema::optimal_report(&emb)?;
            emit(cli, &report)?;
            Ok(if report.optimal { 0 } else { EXIT_NEGATIVE })
        }
        Command::Regrep => {
            let order = ProblemInput::parse(&read_input(cli)?)?.order()?;
            emit(cli, &schema::regrep_report(&order)?)?;
            Ok(0)
        }
        Command::Count => {
            let order = ProblemInput::parse(&read_input(cli)?)?.order()?;
            emit(cli, &schema::count_report(&order, &guards)?)?;
            Ok(0)
        }
        Command::Decide => {
            let inst = InstanceInput::parse(&read_input(cli)?)?.to_instance(guards.max_group_order)?;
            emit(cli, &schema::decide_report(&inst)?)?;
            Ok(0)
        }
        Command::Sandwich => {
            let inst = InstanceInput::parse(&read_input(cli)?)?.to_instance(guards.max_group_order)?;
            emit(cli, &schema::sandwich_json(&inst)?)?;
            Ok(0)
        }
        Command::Verify { mutant } => {
            let config = VerifyConfig { guards, mutant: *mutant, ..VerifyConfig::new(cli.seed) };
            let summary = crosscheck::run(&config).map_err(SchemaError::from)?;
            emit(cli, &summary)?;
            match summary.first_failure() {
                None => Ok(0),
                Some(f) => {
                    let example = f.counterexample.as_ref().map(|v| v.to_string()).unwrap_or_default();
                    eprintln!("property {} failed: {example}", f.name);
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
    }
}

fn read_input(cli: &Cli) -> io::Result<String> {
    match &cli.input {
        Some(path) if path.as_os_str() != "-" => fs::read_to_string(path),
        _ => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
    }
}

fn emit<T: Serialize>(cli: &Cli, value: &T) -> Result<(), Failure> {
    let mut text = if cli.json_indent == 0 {
        serde_json::to_vec(value)
    } else {
        let indent = " ".repeat(cli.json_indent);
        let mut buf = Vec::new();
        let formatter = serde_json::ser::PrettyFormatter::with_indent(indent.as_bytes());
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
        value.serialize(&mut ser).map(|()| buf)
    }
    .map_err(|e| Failure { code: EXIT_INPUT, message: e.to_string() })?;
    text.push(b'\n');
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(&text)?,
    }
    Ok(())
}
