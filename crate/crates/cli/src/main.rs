//! `bep`: symbol verification, linear decay studies and nonlinear runs.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or a numerical
//! breakdown, 2 on usage, configuration or I/O errors. Each subcommand writes
//! `manifest.json` into its output directory, also on failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use bipolar_ep::propagators::SymbolKind;

use commands::{DecayArgs, FormChoice, VerifyArgs};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "bep", version, about = "Damped bipolar Euler-Poisson spectral laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Euler,
    EulerPoisson,
}

impl From<KindArg> for SymbolKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Euler => SymbolKind::EulerDamped,
            KindArg::EulerPoisson => SymbolKind::EulerPoissonDamped,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Sumdiff,
    Primitive,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Check closed-form eigenvalues and Green matrices against identities
    /// and an RK4 oracle.
    VerifySymbols {
        /// Number of log-spaced frequencies in [1e-3, 1e2].
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Comma-separated check times.
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        times: Vec<f64>,
        #[arg(long, default_value_t = 1e-4)]
        oracle_dt: f64,
        /// Test hook: use r - 2/r as the Euler-Poisson coupling entry.
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
        #[arg(long, default_value = "bep-out")]
        out: PathBuf,
    },
    /// Whole-space decay of a Gaussian density bump under one linear block.
    LinearDecay {
        #[arg(long, value_enum, default_value = "euler")]
        kind: KindArg,
        /// Derivative order, 0 or 1.
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        t_lo: Option<f64>,
        #[arg(long)]
        t_hi: Option<f64>,
        /// Number of fit samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = "bep-out")]
        out: PathBuf,
    },
    /// Nonlinear periodic-box simulation from a JSON configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the form given in the configuration.
        #[arg(long, value_enum)]
        form: Option<FormArg>,
        #[arg(long, default_value = "bep-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let (mut manifest, outcome) = match cli.command {
        Command::VerifySymbols {
            samples,
            times,
            oracle_dt,
            inject_sign_flip,
            out,
        } => {
            let mut m = RunManifest::new("verify-symbols", &out);
            let args = VerifyArgs {
                samples,
                times,
                oracle_dt,
                flip_sign: inject_sign_flip,
            };
            let r = commands::verify_symbols_cmd(&args, &mut m);
            (m, r)
        }
        Command::LinearDecay {
            kind,
            k,
            amplitude,
            sigma,
            t_lo,
            t_hi,
            samples,
            out,
        } => {
            let mut m = RunManifest::new("linear-decay", &out);
            let args = DecayArgs {
                kind: kind.into(),
                k,
                amplitude,
                sigma,
                t_lo,
                t_hi,
                samples,
            };
            let r = commands::linear_decay_cmd(&args, &mut m);
            (m, r)
        }
        Command::Simulate { config, form, out } => {
            let mut m = RunManifest::new("simulate", &out);
            let form = form.map(|f| match f {
                FormArg::Sumdiff => FormChoice::Sumdiff,
                FormArg::Primitive => FormChoice::Primitive,
                FormArg::Both => FormChoice::Both,
            });
            let r = commands::simulate_cmd(&config, form, &mut m);
            (m, r)
        }
    };
    manifest.outputs.sort();
    ExitCode::from(manifest.finish(outcome, started.elapsed().as_secs_f64()))
}
