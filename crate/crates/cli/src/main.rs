mod bench;
mod cost;
mod crypt;
mod pow;
mod util;

use clap::{Parser, Subcommand};

use util::CliResult;

/// Memory-hard proof-of-work and encryption.
#[derive(Parser, Debug)]
#[command(name = "egal", version)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Comma-separated tables instead of tab-separated.
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a proof of work for a challenge.
    Prove(pow::ProveArgs),
    /// Check a proof of work.
    Verify(pow::VerifyArgs),
    /// Print one block of the filled memory.
    DumpBlock(pow::DumpArgs),
    /// Encrypt a file.
    Encrypt(crypt::EncryptArgs),
    /// Decrypt a file.
    Decrypt(crypt::DecryptArgs),
    /// Cost model of memory-saving adversaries.
    #[command(subcommand)]
    Cost(cost::CostCommand),
    /// Measure fill and tree speed.
    Bench(bench::BenchArgs),
}

fn run(cli: &Cli) -> CliResult {
    let threads = match cli.threads {
        Some(0) => return util::usage("--threads must be positive"),
        Some(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            n
        }
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    match &cli.command {
        Command::Prove(a) => pow::prove(a, threads, cli.json),
        Command::Verify(a) => pow::verify_cmd(a, cli.json),
        Command::DumpBlock(a) => pow::dump_block(a, threads, cli.json),
        Command::Encrypt(a) => crypt::encrypt(a, threads, cli.json),
        Command::Decrypt(a) => crypt::decrypt(a, threads, cli.json),
        Command::Cost(c) => {
            cost::check_finite(c)?;
            cost::run(c, cli.json, cli.csv)
        }
        Command::Bench(a) => bench::run(a, threads, cli.json),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("egal: {e}");
        std::process::exit(e.exit_code());
    }
}
