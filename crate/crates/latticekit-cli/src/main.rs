use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use latticekit::error::Result;
use latticekit_cli::{
    cmd_approximate, cmd_bounds, cmd_construct, cmd_construct_embedded, cmd_criterion,
    cmd_experiment_rates, cmd_experiment_xratio, default_rate_grid, exit_code_for, RunConfig,
    WeightSpec, PRIME_POINT_COUNTS,
};

#[derive(Parser)]
#[command(name = "latticekit", version, about = "Rank-1 lattice construction and approximation")]
struct Cli {
    /// Worker threads (default: available cores; 1 forces serial).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct WeightArgs {
    /// product-paper | pod-paper | spod-paper | `file:<path>`
    #[arg(long)]
    weights: String,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

impl WeightArgs {
    fn resolve(&self) -> Result<latticekit::io::WeightConfig> {
        WeightSpec::parse(&self.weights)?.resolve(self.d, self.alpha)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a generating vector for a fixed number of points.
    Construct {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value = "lattice-vector.txt")]
        out: PathBuf,
    },
    /// Construct an embedded lattice sequence over n = p^m, m1 ≤ m ≤ m2.
    ConstructEmbedded {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m1: u32,
        #[arg(long)]
        m2: u32,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value = "lattice-embedded.txt")]
        out: PathBuf,
    },
    /// Evaluate the search criterion for a stored vector.
    Criterion {
        #[arg(long)]
        vector: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value = "criterion.csv")]
        out: PathBuf,
    },
    /// Worst-case error bound report for a stored vector.
    Bounds {
        #[arg(long)]
        vector: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value = "bounds.csv")]
        out: PathBuf,
    },
    /// Extract approximated Fourier coefficients from lattice samples.
    Approximate {
        #[arg(long)]
        vector: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Index-set threshold M for A_d(M).
        #[arg(long)]
        m: f64,
        /// Samples file: one real value per line, k = 0..n-1.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value = "approximant.csv")]
        out: PathBuf,
    },
    /// Experiment harnesses producing CSV for plotting.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Criterion decay rates: construct across an n-grid and fit the slope.
    Rates {
        #[command(flatten)]
        weights: WeightArgs,
        /// Comma-separated n values (default: powers of two, desk scale).
        #[arg(long)]
        n_list: Option<String>,
        /// Use the prime point-count list instead of powers of two.
        #[arg(long)]
        primes: bool,
        /// Full reference scale (n up to 2^17). Slow.
        #[arg(long)]
        full_scale: bool,
        #[arg(long, default_value = "rates.csv")]
        out: PathBuf,
    },
    /// Embedded penalty ratios X_s against s.
    Xratio {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m1: u32,
        #[arg(long)]
        m2: u32,
        #[command(flatten)]
        weights: WeightArgs,
        /// Full reference scale (m up to 17, d = 100). Slow.
        #[arg(long)]
        full_scale: bool,
        #[arg(long, default_value = "xratio.csv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Construct { n, weights, out } => {
            let cfg = RunConfig {
                weights: weights.resolve()?,
                n: Some(n),
                embedded: None,
                out,
                tau: None,
                lambda: None,
                full_scale: false,
            };
            let res = cmd_construct(&cfg)?;
            println!(
                "constructed z for n={} d={}; vector -> {}; criterion -> {}",
                res.vector.n,
                res.vector.d,
                res.vector_path.display(),
                res.csv_path.display()
            );
            println!("S = {:.6e}", res.vector.s_value());
        }
        Cmd::ConstructEmbedded { p, m1, m2, weights, out } => {
            let cfg = RunConfig {
                weights: weights.resolve()?,
                n: None,
                embedded: Some((p, m1, m2)),
                out,
                tau: None,
                lambda: None,
                full_scale: false,
            };
            let res = cmd_construct_embedded(&cfg)?;
            println!(
                "embedded sequence for p={p}, m={m1}..{m2}; file -> {}; X -> {}; per-m S -> {}",
                res.file_path.display(),
                res.x_csv_path.display(),
                res.s_csv_path.display()
            );
            println!("max_s X_s = {:.6}", res.result.max_x());
        }
        Cmd::Criterion { vector, weights, out } => {
            let s = cmd_criterion(&vector, &weights.resolve()?, &out)?;
            println!("S = {s:.17e}; report -> {}", out.display());
        }
        Cmd::Bounds { vector, weights, lambda, tau, out } => {
            cmd_bounds(&vector, &weights.resolve()?, lambda, tau, &out)?;
            println!("bound report -> {}", out.display());
        }
        Cmd::Approximate { vector, weights, m, samples, out } => {
            let kept = cmd_approximate(&vector, &weights.resolve()?, m, &samples, &out)?;
            println!("retained {kept} coefficients; approximant -> {}", out.display());
        }
        Cmd::Experiment { which } => match which {
            ExperimentCmd::Rates { weights, n_list, primes, full_scale, out } => {
                if full_scale {
                    eprintln!(
                        "warning: full-scale run constructs up to n = 2^17; this takes a while"
                    );
                }
                let grid: Vec<usize> = match n_list {
                    Some(list) => list
                        .split(',')
                        .map(|t| {
                            t.trim().parse::<usize>().map_err(|_| {
                                latticekit::LatticeError::InvalidParameter(format!(
                                    "bad n value {t:?}"
                                ))
                            })
                        })
                        .collect::<Result<_>>()?,
                    None if primes => PRIME_POINT_COUNTS.to_vec(),
                    None => default_rate_grid(full_scale),
                };
                let cfg = RunConfig {
                    weights: weights.resolve()?,
                    n: Some(grid[0]),
                    embedded: None,
                    out,
                    tau: None,
                    lambda: None,
                    full_scale,
                };
                let res = cmd_experiment_rates(&cfg, &grid)?;
                println!(
                    "rate fit over {} points: slope = {:.4}, intercept = {:.4}, residual = {:.3e}",
                    res.pairs.len(),
                    res.fit.slope,
                    res.fit.intercept,
                    res.fit.residual
                );
                println!("points -> {}", res.csv_path.display());
            }
            ExperimentCmd::Xratio { p, m1, m2, weights, full_scale, out } => {
                if full_scale {
                    eprintln!("warning: full-scale xratio (m2 = 17, d = 100) takes a while");
                }
                let cfg = RunConfig {
                    weights: weights.resolve()?,
                    n: None,
                    embedded: Some((p, m1, m2)),
                    out,
                    tau: None,
                    lambda: None,
                    full_scale,
                };
                let res = cmd_experiment_xratio(&cfg)?;
                println!("max_s X_s = {:.6}; ratios -> {}", res.max_x, res.csv_path.display());
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
