use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hkcert_core::certificate::{construct, verify, Certificate};
use hkcert_core::construction::Budgets;
use hkcert_core::instance::{random_instance, validate_instance, HkInstance};
use num_bigint::BigInt;
use hkcert_core::Error;
use rayon::prelude::*;

const EXIT_OK: u8 = 0;
const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "hkcert", version, about = "Construct and verify K3^[n] lattice certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the construction on an instance and write a certificate.
    Construct {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Largest multiplier u tried for D = A + u*omega.
        #[arg(long, default_value_t = Budgets::default().u)]
        budget_u: u64,
        /// Largest t tried.
        #[arg(long, default_value_t = Budgets::default().t)]
        budget_t: u64,
        /// Transvection budget for the transport isometry.
        #[arg(long, default_value_t = Budgets::default().isometry)]
        budget_isometry: u64,
        /// Coefficient bound for the Picard class searches.
        #[arg(long, default_value_t = Budgets::default().coeff_bound)]
        coeff_bound: u64,
    },
    /// Re-check certificates without searching.
    Verify {
        #[arg(required = true)]
        certificates: Vec<PathBuf>,
        /// Verify this many certificates in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write seeded random instances.
    Random {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        pic_rank: usize,
        #[arg(long)]
        c0: u64,
        #[arg(long, default_value_t = 3)]
        d_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Construct {
            input,
            output,
            budget_u,
            budget_t,
            budget_isometry,
            coeff_bound,
        } => {
            let budgets = Budgets {
                coeff_bound,
                u: budget_u,
                t: budget_t,
                isometry: budget_isometry,
            };
            cmd_construct(&input, &output, &budgets)
        }
        Command::Verify { certificates, jobs } => cmd_verify(&certificates, jobs),
        Command::Random {
            n,
            pic_rank,
            c0,
            d_max,
            seed,
            count,
            output,
        } => cmd_random(n, pic_rank, c0, d_max, seed, count, &output),
    };
    ExitCode::from(code)
}

fn cmd_construct(input: &Path, output: &Path, budgets: &Budgets) -> u8 {
    let text = match fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return EXIT_INPUT;
        }
    };
    let inst = match HkInstance::from_json(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {} is not an instance: {e}", input.display());
            return EXIT_INPUT;
        }
    };
    // A non-positive B² is repaired by the construction; anything else is fatal.
    let report = validate_instance(&inst);
    if let Some(bad) = report.failures().find(|c| c.name != "b-field-positive-norm") {
        eprintln!("error: invalid instance: {}: {}", bad.name, bad.details);
        return EXIT_INPUT;
    }
    let cert = match construct(&inst, budgets) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::SearchExhausted { .. } => EXIT_BUDGET,
                Error::InvalidParameter(_) | Error::InvalidArgument(_) => EXIT_INPUT,
                Error::NoIsometryAttempted(_) | Error::InvariantViolated(_) => EXIT_VERIFY,
            };
        }
    };
    if let Err(e) = fs::write(output, cert.to_json() + "\n") {
        eprintln!("error: cannot write {}: {e}", output.display());
        return EXIT_INPUT;
    }
    let r = &cert.record;
    println!(
        "{}: g = {}, t = {}, H2 = {}, v0 = ({}, {}, {}), epsilon = {}, {} checks passed",
        output.display(),
        r.g,
        r.t,
        r.h2,
        r.v0.r,
        r.v0.m,
        r.v0.s,
        r.epsilon,
        cert.checks.checks.len()
    );
    EXIT_OK
}

fn verify_one(path: &Path) -> (u8, String) {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return (EXIT_INPUT, format!("{}: error: {e}", path.display())),
    };
    let cert = match Certificate::from_json(&text) {
        Ok(c) => c,
        Err(e) => return (EXIT_INPUT, format!("{}: malformed certificate: {e}", path.display())),
    };
    let report = verify(&cert);
    if report.all_pass() {
        return (EXIT_OK, format!("{}: OK ({} checks)", path.display(), report.checks.len()));
    }
    let mut out = format!("{}: FAILED", path.display());
    for c in report.failures() {
        out.push_str(&format!("\n  {}: {}", c.name, c.details));
    }
    (EXIT_VERIFY, out)
}

fn cmd_verify(paths: &[PathBuf], jobs: usize) -> u8 {
    let results: Vec<(u8, String)> = if jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| paths.par_iter().map(|p| verify_one(p)).collect()),
            Err(e) => {
                eprintln!("error: cannot start {jobs} workers: {e}");
                return EXIT_INPUT;
            }
        }
    } else {
        paths.iter().map(|p| verify_one(p)).collect()
    };
    for (_, line) in &results {
        println!("{line}");
    }
    if results.iter().any(|(c, _)| *c == EXIT_INPUT) {
        EXIT_INPUT
    } else if results.iter().any(|(c, _)| *c == EXIT_VERIFY) {
        EXIT_VERIFY
    } else {
        EXIT_OK
    }
}

fn cmd_random(n: u32, pic_rank: usize, c0: u64, d_max: u64, seed: u64, count: u64, out: &Path) -> u8 {
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_INPUT;
    }
    let c0 = BigInt::from(c0);
    let mut failed = Vec::new();
    for i in 0..count {
        let s = seed.wrapping_add(i);
        match random_instance(n, pic_rank, &c0, d_max, s) {
            Ok(inst) => {
                let path = out.join(format!("instance_{s}.json"));
                if let Err(e) = fs::write(&path, inst.to_json() + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_INPUT;
                }
                println!("{}", path.display());
            }
            Err(Error::SearchExhausted { .. }) => failed.push(s),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        }
    }
    if failed.is_empty() {
        EXIT_OK
    } else {
        let seeds: Vec<String> = failed.iter().map(u64::to_string).collect();
        eprintln!("error: generation exhausted for seeds {}", seeds.join(", "));
        EXIT_BUDGET
    }
}
