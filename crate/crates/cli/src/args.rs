//! Command-line parsing and validation.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use isic_core::detectors::Scheme;

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub n_tx: usize,
    pub n_rx: usize,
    pub order: usize,
    pub iterations: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub count_flops: bool,
    pub out_path: PathBuf,
    pub plot_path: Option<PathBuf>,
}

/// Parse failures that should terminate with the usage exit code.
#[derive(Debug)]
pub enum ParseError {
    /// Produced by the argument parser itself (also covers --help and
    /// --version, which exit successfully).
    Clap(clap::Error),
    /// Post-parse validation failure.
    Usage(String),
}

impl From<clap::Error> for ParseError {
    fn from(e: clap::Error) -> Self {
        ParseError::Clap(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "isic-sim",
    version,
    about = "Monte-Carlo BER experiments for iterative soft interference cancellation detectors",
    after_help = "SNR convention: receive-antenna SNR, sigma2 = N / 10^(snr/10).\n\
                  The CSV states it in a leading comment line."
)]
struct RawArgs {
    /// Transmit streams N
    #[arg(long)]
    n: usize,

    /// Receive antennas M (must be >= N)
    #[arg(long)]
    m: usize,

    /// Modulation: 4qam, 16qam or 64qam
    #[arg(long = "mod")]
    modulation: String,

    /// Detection iterations K
    #[arg(long = "iters", default_value_t = 3)]
    iters: usize,

    /// SNR grid in dB, start:step:stop (stop inclusive when on-grid)
    #[arg(long)]
    snr: String,

    /// Monte-Carlo trials per (scheme, SNR) point
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    /// Master seed for the per-trial random streams
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Schemes to run, comma separated: conv, alg1, alg2, hdosic
    #[arg(long = "scheme", value_delimiter = ',', required = true)]
    scheme: Vec<String>,

    /// Record measured flop counts in the output
    #[arg(long = "count-flops")]
    count_flops: bool,

    /// CSV output path
    #[arg(long)]
    out: PathBuf,

    /// Base path for SVG plots (optional)
    #[arg(long)]
    plot: Option<PathBuf>,
}

/// Grid `start:step:stop`, inclusive of `stop` when it lands on the
/// grid to within 1e-9.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("--snr expects start:step:stop, got `{text}`"));
    }
    let parse = |s: &str, what: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("--snr {what} `{s}` is not a number"))
    };
    let start = parse(parts[0], "start")?;
    let step = parse(parts[1], "step")?;
    let stop = parse(parts[2], "stop")?;
    if !step.is_finite() || step <= 0.0 {
        return Err(format!("--snr step must be positive, got {step}"));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let value = start + step * k as f64;
        if value > stop + 1e-9 {
            break;
        }
        grid.push(value);
        k += 1;
        if k > 1_000_000 {
            return Err("--snr grid has more than a million points".into());
        }
    }
    if grid.is_empty() {
        return Err(format!("--snr grid `{text}` is empty (start > stop)"));
    }
    Ok(grid)
}

fn parse_modulation(text: &str) -> Result<usize, String> {
    match text {
        "4qam" => Ok(4),
        "16qam" => Ok(16),
        "64qam" => Ok(64),
        other => Err(format!(
            "--mod `{other}` is not supported; use 4qam, 16qam or 64qam"
        )),
    }
}

/// Parse and validate a full command line (element 0 is the program
/// name).
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentConfig, ParseError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw = RawArgs::try_parse_from(argv)?;

    if raw.n == 0 {
        return Err(ParseError::Usage("--n must be at least 1".into()));
    }
    if raw.m < raw.n {
        return Err(ParseError::Usage(format!(
            "M must be >= N (got --m {} < --n {})",
            raw.m, raw.n
        )));
    }
    if raw.iters == 0 {
        return Err(ParseError::Usage("--iters must be at least 1".into()));
    }
    if raw.trials == 0 {
        return Err(ParseError::Usage("--trials must be at least 1".into()));
    }
    let order = parse_modulation(&raw.modulation).map_err(ParseError::Usage)?;
    let snr_grid_db = parse_snr_grid(&raw.snr).map_err(ParseError::Usage)?;

    let mut schemes = Vec::new();
    for name in &raw.scheme {
        let scheme = Scheme::parse(name).ok_or_else(|| {
            ParseError::Usage(format!(
                "--scheme `{name}` is unknown; use conv, alg1, alg2 or hdosic"
            ))
        })?;
        if !schemes.contains(&scheme) {
            schemes.push(scheme);
        }
    }

    Ok(ExperimentConfig {
        schemes,
        n_tx: raw.n,
        n_rx: raw.m,
        order,
        iterations: raw.iters,
        snr_grid_db,
        trials: raw.trials,
        seed: raw.seed,
        count_flops: raw.count_flops,
        out_path: raw.out,
        plot_path: raw.plot,
    })
}
