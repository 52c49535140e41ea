//! `slepian` - command-line front end for the moving-window process toolkit.
//!
//! Exit codes: 0 on success, 2 on any precondition violation or malformed
//! input, with a one-line diagnostic on stderr.

// doc comments below double as clap help text; they are not rustdoc
#![allow(rustdoc::broken_intra_doc_links, rustdoc::invalid_html_tags)]

mod commands;
mod inputs;
mod report;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "slepian", version, about = "Moving-window Gaussian process toolkit")]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true, env = "SLEPIAN_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads for Monte Carlo (0 = library default). Results are
    /// identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample window paths and write them as CSV.
    Simulate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        n_paths: usize,
        /// diff | exact
        #[arg(long, default_value = "diff")]
        sampler: String,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Squared kernel norm of a shift.
    Norm {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        /// paper | corrected | both
        #[arg(long, default_value = "corrected")]
        variant: String,
        /// Shift on [p,1]: const:<c>, linear:<slope>, or a CSV path file.
        #[arg(long, conflicts_with = "source")]
        shift: Option<String>,
        /// Generator on [0,1]: const:<v>, linear:<slope>, or a CSV function file.
        #[arg(long)]
        source: Option<String>,
    },
    /// Minimal-norm generator of a source, with diagnostics.
    Fstar {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        source: String,
        /// Write the generator as a function CSV.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Log density of the shifted law at an observed path.
    Density {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "corrected")]
        variant: String,
        #[arg(long)]
        shift: String,
        /// Observed window path (CSV with nodes p..1).
        #[arg(long)]
        path: std::path::PathBuf,
    },
    /// Monte Carlo verification reports.
    Verify {
        /// condition-a | isometry | density-norm | qp
        check: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "corrected")]
        variant: String,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long)]
        shift: Option<String>,
        #[arg(long)]
        source: Option<String>,
    },
    /// Boundary-crossing probability of the window maximum.
    Cross {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Optional tilting shift for importance sampling.
        #[arg(long)]
        tilt: Option<String>,
        #[arg(long, default_value = "corrected")]
        variant: String,
    },
    /// Power of the level-alpha shift test.
    Power {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        /// supNorm | endpoint
        #[arg(long, default_value = "supNorm")]
        stat: String,
        #[arg(long)]
        shift: String,
        /// direct | reweighted | both
        #[arg(long, default_value = "both")]
        method: String,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value = "corrected")]
        variant: String,
    },
    /// Sample unit-lag paths on [1, 1/p] and map them onto the window.
    Scale {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        n_paths: usize,
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<()> {
        match &cli.command {
            Command::Simulate {
                m,
                p,
                n_paths,
                sampler,
                out,
            } => commands::simulate(*m, *p, *n_paths, sampler, out, cli.seed),
            Command::Norm {
                m,
                p,
                variant,
                shift,
                source,
            } => commands::norm(*m, *p, variant, shift.as_deref(), source.as_deref(), cli.seed),
            Command::Fstar { m, p, source, out } => {
                commands::fstar(*m, *p, source, out.as_deref(), cli.seed)
            }
            Command::Density {
                m,
                p,
                variant,
                shift,
                path,
            } => commands::density(*m, *p, variant, shift, path, cli.seed),
            Command::Verify {
                check,
                m,
                p,
                variant,
                n,
                shift,
                source,
            } => commands::verify(
                check,
                *m,
                *p,
                variant,
                *n,
                shift.as_deref(),
                source.as_deref(),
                cli.seed,
            ),
            Command::Cross {
                m,
                p,
                u,
                n,
                tilt,
                variant,
            } => commands::cross(*m, *p, *u, *n, tilt.as_deref(), variant, cli.seed),
            Command::Power {
                m,
                p,
                alpha,
                stat,
                shift,
                method,
                n,
                variant,
            } => commands::power(*m, *p, *alpha, stat, shift, method, *n, variant, cli.seed),
            Command::Scale { m, p, n_paths, out } => {
                commands::scale(*m, *p, *n_paths, out, cli.seed)
            }
        }
    };

    let outcome = if cli.workers > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(e) => Err(anyhow::anyhow!("failed to build worker pool: {e}")),
        }
    } else {
        run()
    };

    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
