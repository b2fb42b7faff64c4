use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nni_validity::CriterionKind;

const RANGE_HELP: &str = "Ranges are written start:stop:step (step defaults to 1) and include \
stop when it lies on the grid; a single value is a one-point range.";

#[derive(Debug, Parser)]
#[command(
    name = "nni-validity",
    version,
    about = "Checks when nearest-neighbour coupling reproduces all-neighbour spin-chain dynamics",
    after_help = RANGE_HELP
)]
pub struct Cli {
    /// Worker threads for sweeps (0 picks one per core).
    #[arg(long, env = "NNI_VALIDITY_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulates transition amplitudes or an evolving state over time.
    Evolve(EvolveArgs),
    /// Relative discrepancy between the two models over a range of chain lengths (JSON lines).
    #[command(after_help = RANGE_HELP)]
    Deltaj(DeltaJArgs),
    /// Critical exponent versus chain length, optionally with a logarithmic fit.
    #[command(after_help = RANGE_HELP)]
    Alphac(AlphaCArgs),
    /// Critical exponent versus time horizon at fixed chain length.
    #[command(after_help = RANGE_HELP)]
    AlphacVsT(AlphaCVsTArgs),
    /// Transition that binds the full-matrix criterion for each chain length.
    #[command(after_help = RANGE_HELP)]
    ArgmaxMap(ArgmaxMapArgs),
    /// Fitted slope `a` as the largest chain in the fit grows.
    #[command(after_help = RANGE_HELP)]
    AVsNmax(AVsNmaxArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepOptions {
    /// Tolerance the discrepancy must stay below.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Quadrature step in dimensionless time.
    #[arg(long, default_value_t = 0.05)]
    pub tau_step: f64,
    /// Resolution of the exponent scan.
    #[arg(long, default_value_t = 0.01)]
    pub alpha_step: f64,
    /// Directory for cached sweep cells.
    #[arg(long, env = "NNI_VALIDITY_CACHE")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// nni, ani, or m=K for a K-neighbour truncation.
    #[arg(long, default_value = "ani", conflicts_with = "both_models")]
    pub model: Model,
    /// Emit nearest- and all-neighbour columns side by side.
    #[arg(long)]
    pub both_models: bool,
    /// Source and target sites, 1-based, as j,k.
    #[arg(
        long,
        required_unless_present = "initial_state",
        conflicts_with = "initial_state"
    )]
    pub pair: Option<Pair>,
    /// File of N amplitudes, one `re im` (or `re,im`) per line.
    #[arg(long)]
    pub initial_state: Option<PathBuf>,
    #[arg(long)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tau_step: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DeltaJArgs {
    #[arg(long)]
    pub n_range: IntRange,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Target::P1n)]
    pub target: Target,
    /// Horizon as a multiple of N (defaults: 2 for p1n, 4 for full).
    #[arg(long)]
    pub horizon_factor: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub tau_step: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AlphaCArgs {
    #[arg(long)]
    pub n_range: IntRange,
    /// One or more of p1n, full (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "p1n")]
    pub target: Vec<Target>,
    /// Horizon as a multiple of N (defaults: 2 for p1n, 4 for full).
    #[arg(long)]
    pub horizon_factor: Option<f64>,
    /// Append a fit of alpha_c = a ln(N - b) + c per target.
    #[arg(long)]
    pub fit: bool,
    #[command(flatten)]
    pub sweep: SweepOptions,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AlphaCVsTArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long)]
    pub t_range: FloatRange,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "p1n,full")]
    pub target: Vec<Target>,
    #[command(flatten)]
    pub sweep: SweepOptions,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ArgmaxMapArgs {
    #[arg(long)]
    pub n_range: IntRange,
    #[command(flatten)]
    pub sweep: SweepOptions,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AVsNmaxArgs {
    /// CSV written by `alphac`; without it the sweep is run (or read from the cache).
    #[arg(long, conflicts_with = "n_range")]
    pub input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    pub n_range: Option<IntRange>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "p1n,full")]
    pub target: Vec<Target>,
    /// Largest chain lengths to cut the data at.
    #[arg(long)]
    pub nmax_range: IntRange,
    #[command(flatten)]
    pub sweep: SweepOptions,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Target {
    /// End-to-end amplitude over T = 2N.
    P1n,
    /// Every transition amplitude over T = 4N.
    Full,
}

impl Target {
    pub fn kind(self) -> CriterionKind {
        match self {
            Target::P1n => CriterionKind::EndToEnd,
            Target::Full => CriterionKind::FullMatrix,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::P1n => "p1n",
            Target::Full => "full",
        }
    }

    pub fn parse_name(name: &str) -> Option<Self> {
        match name {
            "p1n" => Some(Target::P1n),
            "full" => Some(Target::Full),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Nearest,
    All,
    Range(usize),
}

impl Model {
    pub fn neighbor_range(self, n: usize) -> usize {
        match self {
            Model::Nearest => 1,
            Model::All => n.saturating_sub(1),
            Model::Range(m) => m,
        }
    }

    pub fn label(self) -> String {
        match self {
            Model::Nearest => "nni".into(),
            Model::All => "ani".into(),
            Model::Range(m) => format!("m{m}"),
        }
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nni" => Ok(Model::Nearest),
            "ani" => Ok(Model::All),
            _ => s
                .strip_prefix("m=")
                .and_then(|k| k.parse().ok())
                .map(Model::Range)
                .ok_or_else(|| format!("expected nni, ani or m=K, got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pair(pub usize, pub usize);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (j, k) = s
            .split_once(',')
            .ok_or_else(|| format!("expected j,k, got `{s}`"))?;
        let site = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid site `{t}`"))
        };
        Ok(Pair(site(j)?, site(k)?))
    }
}

/// Inclusive integer range `start:stop:step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    start: usize,
    stop: usize,
    step: usize,
}

impl IntRange {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.stop).step_by(self.step).collect()
    }
}

fn split_range(s: &str) -> Result<(&str, &str, Option<&str>), String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => Ok((single, single, None)),
        [start, stop] => Ok((start, stop, None)),
        [start, stop, step] => Ok((start, stop, Some(step))),
        _ => Err(format!("expected start:stop:step, got `{s}`")),
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (start, stop, step) = split_range(s)?;
        let int = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid integer `{t}` in range `{s}`"))
        };
        let range = IntRange {
            start: int(start)?,
            stop: int(stop)?,
            step: step.map(int).transpose()?.unwrap_or(1),
        };
        if range.step == 0 {
            return Err("range step must be positive".into());
        }
        if range.stop < range.start {
            return Err(format!("empty range `{s}`"));
        }
        Ok(range)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Inclusive real range `start:stop:step`, generated as `start + i * step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatRange {
    start: f64,
    stop: f64,
    step: f64,
}

impl FloatRange {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

impl FromStr for FloatRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (start, stop, step) = split_range(s)?;
        let real = |t: &str| match t.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("invalid number `{t}` in range `{s}`")),
        };
        let range = FloatRange {
            start: real(start)?,
            stop: real(stop)?,
            step: step.map(real).transpose()?.unwrap_or(1.0),
        };
        if range.step <= 0.0 {
            return Err("range step must be positive".into());
        }
        if range.stop < range.start {
            return Err(format!("empty range `{s}`"));
        }
        Ok(range)
    }
}

impl fmt::Display for FloatRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_ranges_include_aligned_stop() {
        assert_eq!("10:100:10".parse::<IntRange>().unwrap().values().len(), 10);
        assert_eq!("5:12:5".parse::<IntRange>().unwrap().values(), vec![5, 10]);
        assert_eq!("2:2".parse::<IntRange>().unwrap().values(), vec![2]);
        assert_eq!("7".parse::<IntRange>().unwrap().values(), vec![7]);
        assert!("5:4".parse::<IntRange>().is_err());
        assert!("1:4:0".parse::<IntRange>().is_err());
        assert!("1:2:3:4".parse::<IntRange>().is_err());
    }

    #[test]
    fn real_ranges_absorb_rounding() {
        let values = "10:120:5".parse::<FloatRange>().unwrap().values();
        assert_eq!(values.len(), 23);
        assert_eq!(values[22], 120.0);
        assert_eq!("0:0.3:0.1".parse::<FloatRange>().unwrap().values().len(), 4);
    }

    #[test]
    fn models_and_pairs() {
        assert_eq!("nni".parse::<Model>().unwrap().neighbor_range(9), 1);
        assert_eq!("ani".parse::<Model>().unwrap().neighbor_range(9), 8);
        assert_eq!("m=3".parse::<Model>().unwrap().neighbor_range(9), 3);
        assert!("m=x".parse::<Model>().is_err());
        assert_eq!("1, 5".parse::<Pair>().unwrap(), Pair(1, 5));
        assert!("1".parse::<Pair>().is_err());
    }
}
