//! Command-line driver: reproduces the Gaussian and α-stable divergence
//! experiments and exposes the point-wise pipelines on serialized tensors.

mod config;
mod experiments;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::GaussianKld(args) => experiments::gaussian_kld(&cli, args),
        Command::GaussianHellinger(args) => experiments::gaussian_hellinger(&cli, args),
        Command::AlphaKld(args) => experiments::alpha_experiment(&cli, args, false),
        Command::AlphaHellinger(args) => experiments::alpha_experiment(&cli, args, true),
        Command::PointwiseBench(args) => experiments::pointwise_bench(&cli, args),
        Command::Func(args) => experiments::func(&cli, args),
    };
    match outcome {
        Ok(converged) => {
            if converged {
                ExitCode::SUCCESS
            } else {
                // finished, but some result missed its tolerance
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
