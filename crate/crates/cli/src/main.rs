use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod files;

#[derive(Parser, Debug)]
#[command(
    name = "wehler",
    version,
    about = "Dynamics and point counts of Wehler K3 surfaces"
)]
struct Cli {
    /// Worker threads for counting and cycle computations.
    #[arg(long, global = true, env = "WEHLER_THREADS")]
    threads: Option<usize>,

    /// Directory for cached cycle tables and counts files.
    #[arg(
        long,
        global = true,
        env = "WEHLER_CACHE_DIR",
        default_value = ".wehler-cache"
    )]
    cache_dir: PathBuf,

    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    no_cache: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    /// JSON, one document per line.
    Machine,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report degenerate fibers of the reductions modulo several primes.
    Check {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5, 7, 11, 13])]
        primes: Vec<u64>,
    },
    /// Count points over F_{p^m} for m = 1..mmax.
    Count {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        mmax: u32,
        /// Counts file to write (default: inside the cache directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cycle decomposition of phi on S(F_p).
    Cycles {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        p: u64,
    },
    /// Search for rational points of period n.
    Search(SearchArgs),
    /// Zeta function and Picard bound from 11 point counts.
    Zeta(ZetaArgs),
    /// Verify that a rational point is periodic.
    Verify {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        period: usize,
    },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub period: usize,
    /// Number of odd primes to use.
    #[arg(long, default_value_t = 30)]
    pub primes: usize,
    /// Random coefficients are drawn from [-R, R].
    #[arg(long, default_value_t = 1)]
    pub coeff_range: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random surfaces to search.
    #[arg(long, conflicts_with = "surface")]
    pub surfaces: Option<usize>,
    #[arg(long)]
    pub surface: Option<PathBuf>,
    /// Use every point of period dividing n, not only single-cycle primes.
    #[arg(long)]
    pub exhaustive: bool,
    /// Maximum residue combinations tried per surface.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
pub struct ZetaSource {
    #[arg(long)]
    pub surface: Option<PathBuf>,
    #[arg(long)]
    pub counts: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    #[command(flatten)]
    pub source: ZetaSource,
    #[arg(long)]
    pub p: u64,
    /// Number of counts computed in live mode; at least 11.
    #[arg(long, default_value_t = 11)]
    pub mmax: u32,
}

pub struct Context {
    pub threads: usize,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<wehler_k3::Error>() {
        Some(e) if e.is_mathematical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let ctx = Context {
        threads,
        cache_dir: (!cli.no_cache).then_some(cli.cache_dir),
        format: cli.format,
    };
    let result = match cli.command {
        Command::Check { surface, primes } => commands::check(&ctx, &surface, &primes),
        Command::Count {
            surface,
            p,
            mmax,
            out,
        } => commands::count(&ctx, &surface, p, mmax, out.as_deref()),
        Command::Cycles { surface, p } => commands::cycles(&ctx, &surface, p),
        Command::Search(args) => commands::search(&ctx, &args),
        Command::Zeta(args) => commands::zeta(&ctx, &args),
        Command::Verify {
            surface,
            point,
            period,
        } => commands::verify(&ctx, &surface, &point, period),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
