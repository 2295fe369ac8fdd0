//! `lcstrat`: itineraries, transversal sections, the word poset and group tables from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lcstrat::curvelab::CurveError;
use lcstrat::polysect::SectError;
use lcstrat::poset::PosetError;
use lcstrat::spinalg::SpinError;
use lcstrat::symgrp::SymError;
use lcstrat::triang::TriError;
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical resolution failed: {0}")]
    Numeric(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SymError> for CliError {
    fn from(e: SymError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> Self {
        match e {
            SpinError::IdentityLetter | SpinError::RankMismatch => CliError::Usage(e.to_string()),
            SpinError::NoRootInInterval => CliError::Numeric(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SectError> for CliError {
    fn from(e: SectError) -> Self {
        match e {
            SectError::IdentityLetter | SectError::NotQuat | SectError::BadPoint { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<TriError> for CliError {
    fn from(e: TriError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::Spin(s) => s.into(),
            CurveError::Sect(s) => s.into(),
            CurveError::Tri(t) => t.into(),
            CurveError::NonPositiveCurvature { .. }
            | CurveError::IdentityLetter
            | CurveError::BadSpec(_)
            | CurveError::BadTimes
            | CurveError::BadTransform
            | CurveError::NotAnAcbEvent => CliError::Usage(e.to_string()),
            CurveError::UnresolvedCluster { .. }
            | CurveError::UnrecognizedMultPattern { .. }
            | CurveError::PathNotAccessible
            | CurveError::SingularPresentation(_)
            | CurveError::DegenerateJet(_) => CliError::Numeric(e.to_string()),
            CurveError::Discontinuous(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PosetError> for CliError {
    fn from(e: PosetError) -> Self {
        match e {
            PosetError::Sect(s) => s.into(),
            PosetError::RankMismatch(..) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lcstrat", version, about = "Itinerary stratification of locally convex curves")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Singular set and itinerary of a curve.
    Iti(commands::ItiArgs),
    /// Transversal section of a letter: polynomials, point labels, stratum maps.
    Section(commands::SectionArgs),
    /// Certificates for `w0 ⪯ w1`, or the Hasse diagram below a letter.
    Poset(commands::PosetArgs),
    /// Group-theoretic queries.
    Group(GroupArgs),
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    /// Rank `n` (permutations of `1..=n+1`); inferred from the letters when absent.
    #[arg(short, long, global = true)]
    n: Option<usize>,
    #[command(subcommand)]
    query: commands::GroupQuery,
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { Ok(()) } else { Err(CliError::Usage(String::new())) };
        }
    };
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply(&std::fs::read_to_string(path)?)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.dump_config {
        commands::out(&cfg.dump());
        return Ok(());
    }
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.cmd {
        None => Err(CliError::Usage("no command given (try --help)".into())),
        Some(Cmd::Iti(a)) => commands::iti(&a, &cfg),
        Some(Cmd::Section(a)) => commands::section(&a, &cfg),
        Some(Cmd::Poset(a)) => commands::poset(&a, &cfg),
        Some(Cmd::Group(g)) => commands::group(&g.query, g.n),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(CliError::from(CurveError::UnresolvedCluster { minor: 1, time: 0.5 }).code(), 2);
        assert_eq!(CliError::from(CurveError::PathNotAccessible).code(), 2);
        assert_eq!(CliError::from(CurveError::BadSpec("x".into())).code(), 1);
        assert_eq!(CliError::from(CurveError::Sect(SectError::IdentityLetter)).code(), 1);
        assert_eq!(CliError::from(SectError::ZeroPolynomial(1)).code(), 3);
        let e = PosetError::NotAPartialOrder { a: "a".into(), b: "b".into(), reason: "not transitive" };
        assert_eq!(CliError::from(e).code(), 3);
    }
}
