use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kadets_cli::commands::{self, CmdOutput, ExtendOptions, Lemma};
use kadets_cli::error::EXIT_PASS;
use kadets_cli::CliError;
use kadets_core::verify::InstanceKind;

#[derive(Parser)]
#[command(
    name = "kadets",
    version,
    about = "Relative inradii of convex partitions, extensions and non-Euclidean checks"
)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sum of relative inradii of the cells of an instance.
    Inradius {
        instance: PathBuf,
        /// Allowed negative margin.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Extend a planar partition of B to the plane.
    Extend2d {
        instance: PathBuf,
        /// Write the extended partition as an instance file.
        #[arg(long)]
        extended: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Picture margin around B, in diameters of B.
        #[arg(long = "box", default_value_t = 0.6)]
        pad: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = "KADETS_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Generate and check a batch of random instances.
    Verify {
        #[arg(long)]
        kind: InstanceKind,
        /// Half-open range `a..b` or a single seed.
        #[arg(long, value_parser = commands::parse_seeds, default_value = "0..10")]
        seeds: std::ops::Range<u64>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Extension-check samples per planar extended instance.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Monte-Carlo checks on the sphere.
    Sphere {
        #[arg(long)]
        lemma: Lemma,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, env = "KADETS_SEED", default_value_t = 0)]
        seed: u64,
        /// JSON star body, point set or convex set replacing the built-in cases.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Dimension for a star body read from `--input`.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Two-set convex cover of a hyperbolic disk.
    Hyperbolic {
        #[arg(long, default_value_t = 5.0)]
        rho: f64,
        #[arg(long, default_value_t = 10)]
        grid: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write a random instance file.
    Gen {
        #[arg(long)]
        kind: InstanceKind,
        #[arg(long, env = "KADETS_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Write a hand-built fixture: slabs, square-split, quadrants, pinwheel, slanted.
    Fixture {
        name: String,
        /// Slab count.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

fn run(cli: &Cli) -> Result<CmdOutput, CliError> {
    let text = |report: String| CmdOutput {
        report,
        code: EXIT_PASS,
    };
    match &cli.cmd {
        Cmd::Inradius { instance, tol } => commands::inradius(instance, *tol),
        Cmd::Extend2d {
            instance,
            extended,
            svg,
            pad,
            samples,
            seed,
        } => commands::extend2d(
            instance,
            &ExtendOptions {
                out: extended.as_deref(),
                svg: svg.as_deref(),
                pad: *pad,
                samples: *samples,
                seed: *seed,
            },
        ),
        Cmd::Verify {
            kind,
            seeds,
            k,
            d,
            jobs,
            samples,
        } => commands::verify(*kind, seeds.clone(), *k, *d, *jobs, *samples),
        Cmd::Sphere {
            lemma,
            samples,
            seed,
            input,
            dim,
        } => commands::sphere(*lemma, *samples, *seed, input.as_deref(), *dim),
        Cmd::Hyperbolic { rho, grid, svg } => commands::hyperbolic(*rho, *grid, svg.as_deref()),
        Cmd::Gen { kind, seed, k, d } => commands::gen(*kind, *seed, *k, *d).map(text),
        Cmd::Fixture { name, k } => commands::fixture(name, *k).map(text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(p) => commands::write_file(p, &out.report),
                None => std::io::stdout()
                    .write_all(out.report.as_bytes())
                    .map_err(|e| CliError::io("stdout", e)),
            };
            match written {
                Ok(()) => ExitCode::from(out.code),
                Err(e) => {
                    eprintln!("kadets: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Err(e) => {
            eprintln!("kadets: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
