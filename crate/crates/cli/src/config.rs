//! Run configuration, assembled from defaults, an optional `key=value`
//! file and command-line flags (in increasing priority).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::weight_spec::{parse_weight, WeightSpecError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Eigen,
    Sweep,
    Branch,
    Compare,
    Extend,
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as clap::ValueEnum>::from_str(s, false)
            .map_err(|_| ConfigError::Invalid(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    File { path: PathBuf, line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Weight(#[from] WeightSpecError),
    #[error("{0}")]
    Invalid(String),
}

/// Inclusive grid `min, min + step, …, max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        // snap to 12 decimals so that 0.4 + 3*0.05 prints as 0.55
        (0..=n).map(|i| ((self.min + i as f64 * self.step) * 1e12).round() / 1e12).collect()
    }
}

impl FromStr for SGrid {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts[..] else {
            return Err(ConfigError::Invalid(format!("s-grid must be min:max:step, got {s:?}")));
        };
        let num =
            |t: &str| t.trim().parse::<f64>().map_err(|_| ConfigError::Invalid(format!("bad number {t:?} in s-grid")));
        Ok(Self { min: num(min)?, max: num(max)?, step: num(step)? })
    }
}

impl fmt::Display for SGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.step)
    }
}

/// Every setting optional; one layer per source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub command: Option<Command>,
    pub lengths: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub s_grid: Option<SGrid>,
    pub weights: Option<Vec<String>>,
    pub k: Option<usize>,
    pub lambda_max: Option<f64>,
    pub out: Option<PathBuf>,
    pub oracle_nx: Option<usize>,
    pub oracle_ny: Option<usize>,
    pub oracle_y: Option<f64>,
}

fn parse_list(value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| ConfigError::Invalid(format!("bad number {t:?}"))))
        .collect()
}

impl ConfigLayer {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    /// Repeated `weight` keys accumulate, other keys keep the last value.
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut layer = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| ConfigError::File { path: path.to_owned(), line: idx + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| at("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            layer.set(key, value).map_err(|e| at(e.to_string()))?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::parse(&text, path)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let int =
            |v: &str| v.parse::<usize>().map_err(|_| ConfigError::Invalid(format!("bad integer {v:?} for {key}")));
        let float = |v: &str| v.parse::<f64>().map_err(|_| ConfigError::Invalid(format!("bad number {v:?} for {key}")));
        match key {
            "command" => self.command = Some(value.parse()?),
            "L" => self.lengths = Some(parse_list(value)?),
            "s" => self.s = Some(float(value)?),
            "s-grid" => self.s_grid = Some(value.parse()?),
            "weight" => self.weights.get_or_insert_with(Vec::new).push(value.to_owned()),
            "K" => self.k = Some(int(value)?),
            "lambda-max" => self.lambda_max = Some(float(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "oracle-nx" => self.oracle_nx = Some(int(value)?),
            "oracle-ny" => self.oracle_ny = Some(int(value)?),
            "oracle-Y" => self.oracle_y = Some(float(value)?),
            other => return Err(ConfigError::Invalid(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Values set in `over` win.
    pub fn overlay(self, over: Self) -> Self {
        Self {
            command: over.command.or(self.command),
            lengths: over.lengths.or(self.lengths),
            s: over.s.or(self.s),
            s_grid: over.s_grid.or(self.s_grid),
            weights: over.weights.or(self.weights),
            k: over.k.or(self.k),
            lambda_max: over.lambda_max.or(self.lambda_max),
            out: over.out.or(self.out),
            oracle_nx: over.oracle_nx.or(self.oracle_nx),
            oracle_ny: over.oracle_ny.or(self.oracle_ny),
            oracle_y: over.oracle_y.or(self.oracle_y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub lengths: Vec<f64>,
    pub s: Option<f64>,
    pub s_grid: Option<SGrid>,
    /// Weight specs as written; parsed on use so output can echo them.
    pub weights: Vec<String>,
    pub k: usize,
    pub lambda_max: f64,
    pub out: Option<PathBuf>,
    pub oracle_nx: usize,
    pub oracle_ny: usize,
    /// `None` means `8/√μ_1` for each `L`.
    pub oracle_y: Option<f64>,
}

fn check_s(s: f64) -> Result<f64, ConfigError> {
    if s > 0.0 && s <= 1.0 {
        Ok(s)
    } else {
        Err(ConfigError::Invalid(format!("s must lie in (0, 1], got {s}")))
    }
}

impl RunConfig {
    pub const DEFAULT_K: usize = 64;
    pub const DEFAULT_LAMBDA_MAX: f64 = 6.0;
    pub const DEFAULT_ORACLE_NX: usize = 128;
    pub const DEFAULT_ORACLE_NY: usize = 256;

    pub fn new(command: Command) -> Self {
        Self::resolve(ConfigLayer { command: Some(command), ..ConfigLayer::default() }).expect("defaults are valid")
    }

    pub fn resolve(layer: ConfigLayer) -> Result<Self, ConfigError> {
        let command = layer.command.ok_or_else(|| ConfigError::Invalid("no command given".into()))?;
        let lengths = layer.lengths.unwrap_or_else(|| vec![5.0]);
        if lengths.is_empty() || lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(ConfigError::Invalid(format!("interval lengths must be positive, got {lengths:?}")));
        }
        let s = layer.s.map(check_s).transpose()?;
        if let Some(g) = layer.s_grid {
            if !g.step.is_finite() || g.step <= 0.0 {
                return Err(ConfigError::Invalid(format!("s-grid step must be positive, got {}", g.step)));
            }
            if g.min > g.max {
                return Err(ConfigError::Invalid(format!("s-grid {g} is empty")));
            }
            check_s(g.min)?;
            check_s(g.max)?;
        }
        let weights = layer.weights.unwrap_or_else(|| vec!["m1".into()]);
        if weights.is_empty() {
            return Err(ConfigError::Invalid("no weight given".into()));
        }
        for w in &weights {
            parse_weight(w)?;
        }
        let k = layer.k.unwrap_or(Self::DEFAULT_K);
        if k == 0 {
            return Err(ConfigError::Invalid("K must be at least 1".into()));
        }
        let lambda_max = layer.lambda_max.unwrap_or(Self::DEFAULT_LAMBDA_MAX);
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(ConfigError::Invalid(format!("lambda-max must be positive, got {lambda_max}")));
        }
        if let Some(y) = layer.oracle_y {
            if !(y > 0.0 && y.is_finite()) {
                return Err(ConfigError::Invalid(format!("oracle-Y must be positive, got {y}")));
            }
        }
        let config = Self {
            command,
            lengths,
            s,
            s_grid: layer.s_grid,
            weights,
            k,
            lambda_max,
            out: layer.out,
            oracle_nx: layer.oracle_nx.unwrap_or(Self::DEFAULT_ORACLE_NX),
            oracle_ny: layer.oracle_ny.unwrap_or(Self::DEFAULT_ORACLE_NY),
            oracle_y: layer.oracle_y,
        };
        if matches!(command, Command::Branch | Command::Extend)
            && (config.lengths.len() != 1 || config.weights.len() != 1)
        {
            return Err(ConfigError::Invalid(format!("{command:?} takes exactly one L and one weight").to_lowercase()));
        }
        Ok(config)
    }

    /// `s` values for eigen and sweep runs: the grid if given, else `--s`,
    /// else `1/2`.
    pub fn s_values(&self) -> Vec<f64> {
        match (self.s_grid, self.s) {
            (Some(g), _) => g.values(),
            (None, Some(s)) => vec![s],
            (None, None) => vec![0.5],
        }
    }
}
