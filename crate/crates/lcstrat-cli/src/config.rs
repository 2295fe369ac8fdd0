//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use lcstrat::poly::{fmt_rat, parse_rat};
use lcstrat::Rat;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads for grid commands; 0 lets the pool decide.
    pub threads: usize,
    /// Subintervals of the sampling grid of CSV minor traces and JSON frame dumps.
    pub samples: usize,
    /// Bits of precision of printed exact roots.
    pub root_bits: u32,
    pub grid_radius: Rat,
    pub grid_steps: usize,
    pub oracle_k_max: u32,
    pub oracle_steps: usize,
    pub oracle_max_points: usize,
    pub prec_max_l0: usize,
    pub prec_max_l1: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: 0,
            samples: 200,
            root_bits: 50,
            grid_radius: Rat::new(1.into(), 2.into()),
            grid_steps: 100,
            oracle_k_max: 8,
            oracle_steps: 17,
            oracle_max_points: 4096,
            prec_max_l0: 12,
            prec_max_l1: 6,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("config: bad value {v:?} for {key}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "seed" => self.seed = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            "samples" => self.samples = num(key, v)?,
            "roots.bits" => self.root_bits = num(key, v)?,
            "grid.radius" => self.grid_radius = parse_rat(v).map_err(|e| CliError::Usage(format!("config: {key}: {e}")))?,
            "grid.steps" => self.grid_steps = num(key, v)?,
            "oracle.k_max" => self.oracle_k_max = num(key, v)?,
            "oracle.steps" => self.oracle_steps = num(key, v)?,
            "oracle.max_points" => self.oracle_max_points = num(key, v)?,
            "prec.max_l0" => self.prec_max_l0 = num(key, v)?,
            "prec.max_l1" => self.prec_max_l1 = num(key, v)?,
            _ => return Err(CliError::Usage(format!("config: unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "roots.bits = {}", self.root_bits);
        let _ = writeln!(s, "grid.radius = {}", fmt_rat(&self.grid_radius));
        let _ = writeln!(s, "grid.steps = {}", self.grid_steps);
        let _ = writeln!(s, "oracle.k_max = {}", self.oracle_k_max);
        let _ = writeln!(s, "oracle.steps = {}", self.oracle_steps);
        let _ = writeln!(s, "oracle.max_points = {}", self.oracle_max_points);
        let _ = writeln!(s, "prec.max_l0 = {}", self.prec_max_l0);
        let _ = writeln!(s, "prec.max_l1 = {}", self.prec_max_l1);
        s
    }
}
