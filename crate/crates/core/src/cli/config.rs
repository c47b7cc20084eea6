//! Experiment configuration: command-line flags over an optional flat
//! `key = value` file over built-in defaults.
//!
//! Config file example:
//!
//! ```text
//! # fermion sweep
//! M = 6
//! N-max = 8
//! mode = both
//! format = json
//! ```
//!
//! Keys are the long flag names; case and `-`/`_` are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use super::table::Format;
use crate::error::{AlfError, Result};
use crate::quantum_core::Caps;

/// Directory for output files when `--out` is absent.
pub const OUT_DIR_ENV: &str = "ALF_ENTROPY_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Spin,
    Fermion,
    Verify,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Spin => "spin",
            Mode::Fermion => "fermion",
            Mode::Verify => "verify",
        }
    }
}

/// Which route the fermion report runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    #[default]
    Symbolic,
    Dense,
    Both,
}

impl FromStr for OracleMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "symbolic" => Ok(OracleMode::Symbolic),
            "dense" => Ok(OracleMode::Dense),
            "both" => Ok(OracleMode::Both),
            other => Err(format!("unknown mode {other:?} (symbolic | dense | both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSource {
    Fourier,
    File(PathBuf),
}

impl FromStr for PartitionSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("fourier") {
            Ok(PartitionSource::Fourier)
        } else if s.is_empty() {
            Err("empty partition source".into())
        } else {
            Ok(PartitionSource::File(PathBuf::from(s)))
        }
    }
}

/// Flags shared by all subcommands. Every flag is optional so that the
/// config file and defaults can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat key = value config file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Site dimension
    #[arg(long)]
    pub d: Option<usize>,
    /// Site-state eigenvalues, comma separated (default: maximally mixed)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub spectrum: Option<Vec<f64>>,
    /// `fourier` or the path of an operator-list JSON file
    #[arg(long)]
    pub partition: Option<String>,
    /// Window size M (fermion: the sweep runs M = 2..=M)
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Largest refinement depth N
    #[arg(long = "N-max")]
    pub n_max: Option<usize>,
    /// symbolic | dense | both
    #[arg(long)]
    pub mode: Option<String>,
    /// Largest dense Hilbert-space dimension
    #[arg(long = "cap-dense")]
    pub cap_dense: Option<usize>,
    /// Largest number of enumerated paths / index tuples
    #[arg(long = "cap-paths")]
    pub cap_paths: Option<usize>,
    /// Largest correlation-matrix dimension
    #[arg(long = "cap-correlation")]
    pub cap_correlation: Option<usize>,
    /// Tolerance for floating-point equalities in the report
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed of the randomized suites
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (default: $ALF_ENTROPY_OUT_DIR/<command>.<format>, else stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub d: usize,
    pub site_spectrum: Vec<f64>,
    pub partition: PartitionSource,
    /// `None` leaves the choice to the command.
    pub m: Option<usize>,
    pub n_max: usize,
    pub oracle: OracleMode,
    pub caps: Caps,
    pub tol: f64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

const KEYS: &[&str] = &[
    "d",
    "spectrum",
    "partition",
    "m",
    "n_max",
    "mode",
    "cap_dense",
    "cap_paths",
    "cap_correlation",
    "tol",
    "seed",
    "out",
    "format",
];

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| AlfError::Parse(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(AlfError::Parse(format!(
                "config line {}: unknown key {:?}",
                lineno + 1,
                k.trim()
            )));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| AlfError::Parse(format!("config key {key}: {e}")))
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key).map(|v| parse_value(key, v)).transpose(),
    }
}

impl ExperimentConfig {
    pub fn resolve(mode: Mode, flags: &Flags, env_out_dir: Option<&Path>) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| AlfError::Io(format!("{}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };

        let spectrum: Option<Vec<f64>> = match &flags.spectrum {
            Some(s) => Some(s.clone()),
            None => file
                .get("spectrum")
                .map(|v| v.split(',').map(|x| parse_value::<f64>("spectrum", x.trim())).collect())
                .transpose()?,
        };
        let d: Option<usize> = pick(flags.d, &file, "d")?;
        let d = match (d, &spectrum) {
            (Some(d), _) => d,
            (None, Some(s)) => s.len(),
            (None, None) => 2,
        };
        if d < 2 {
            return Err(AlfError::InvalidArgument(format!(
                "site dimension d = {d}, need d >= 2"
            )));
        }
        let site_spectrum = spectrum.unwrap_or_else(|| vec![1.0 / d as f64; d]);
        if site_spectrum.len() != d {
            return Err(AlfError::InvalidArgument(format!(
                "spectrum has {} entries but d = {d}",
                site_spectrum.len()
            )));
        }
        if site_spectrum.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(AlfError::InvalidArgument("spectrum entries must be >= 0".into()));
        }
        let total: f64 = site_spectrum.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(AlfError::Validation {
                invariant: "spectrum sums to 1",
                deviation: (total - 1.0).abs(),
                tolerance: 1e-12,
            });
        }

        let partition = pick::<PartitionSource>(
            flags
                .partition
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(AlfError::Parse)?,
            &file,
            "partition",
        )?
        .unwrap_or(PartitionSource::Fourier);
        let oracle = pick::<OracleMode>(
            flags
                .mode
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(AlfError::Parse)?,
            &file,
            "mode",
        )?
        .unwrap_or_default();
        let format = pick::<Format>(
            flags
                .format
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(AlfError::Parse)?,
            &file,
            "format",
        )?
        .unwrap_or_default();

        let defaults = Caps::default();
        let caps = Caps {
            dense_dim: pick(flags.cap_dense, &file, "cap_dense")?.unwrap_or(defaults.dense_dim),
            correlation_dim: pick(flags.cap_correlation, &file, "cap_correlation")?.unwrap_or(defaults.correlation_dim),
            paths: pick(flags.cap_paths, &file, "cap_paths")?.unwrap_or(defaults.paths),
        };
        if caps.dense_dim < 2 || caps.correlation_dim < 1 || caps.paths < 1 {
            return Err(AlfError::InvalidArgument(format!(
                "caps too small to run anything: {caps:?}"
            )));
        }

        let m: Option<usize> = pick(flags.m, &file, "m")?;
        let n_max: usize = pick(flags.n_max, &file, "n_max")?.unwrap_or(4);
        if n_max == 0 {
            return Err(AlfError::InvalidArgument("N-max must be >= 1".into()));
        }
        let tol: f64 = pick(flags.tol, &file, "tol")?.unwrap_or(1e-8);
        if tol.is_nan() || tol <= 0.0 {
            return Err(AlfError::InvalidArgument("tol must be positive".into()));
        }
        let seed: u64 = pick(flags.seed, &file, "seed")?.unwrap_or(0);
        let format_ext = format.extension();
        let output_path = match pick::<PathBuf>(flags.out.clone(), &file, "out")? {
            Some(p) => Some(p),
            None => env_out_dir.map(|dir| dir.join(format!("{}.{format_ext}", mode.name()))),
        };

        Ok(ExperimentConfig {
            mode,
            d,
            site_spectrum,
            partition,
            m,
            n_max,
            oracle,
            caps,
            tol,
            seed,
            output_path,
            format,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::resolve(Mode::Spin, &Flags::default(), None).unwrap();
        assert_eq!(c.d, 2);
        assert_eq!(c.site_spectrum, vec![0.5, 0.5]);
        assert_eq!(c.partition, PartitionSource::Fourier);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.output_path, None);
    }

    #[test]
    fn spectrum_infers_d_and_is_validated() {
        let flags = Flags {
            spectrum: Some(vec![0.2, 0.3, 0.5]),
            ..Flags::default()
        };
        assert_eq!(ExperimentConfig::resolve(Mode::Spin, &flags, None).unwrap().d, 3);
        let bad = Flags {
            spectrum: Some(vec![0.2, 0.3]),
            ..Flags::default()
        };
        assert!(ExperimentConfig::resolve(Mode::Spin, &bad, None).is_err());
        let neg = Flags {
            spectrum: Some(vec![1.5, -0.5]),
            ..Flags::default()
        };
        assert!(ExperimentConfig::resolve(Mode::Spin, &neg, None).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# sweep\nM = 5\nN-max = 7\nformat = json\nspectrum = 0.3, 0.7\n").unwrap();
        let flags = Flags {
            config: Some(path),
            m: Some(3),
            ..Flags::default()
        };
        let c = ExperimentConfig::resolve(Mode::Fermion, &flags, None).unwrap();
        assert_eq!(c.m, Some(3));
        assert_eq!(c.n_max, 7);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.site_spectrum, vec![0.3, 0.7]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config_file("colour = red").is_err());
        assert!(parse_config_file("just text").is_err());
        assert_eq!(parse_config_file("CAP_DENSE = 8 # small").unwrap()["cap_dense"], "8");
    }

    #[test]
    fn env_directory_supplies_the_output_path() {
        let c = ExperimentConfig::resolve(Mode::Verify, &Flags::default(), Some(Path::new("/tmp/x"))).unwrap();
        assert_eq!(c.output_path, Some(PathBuf::from("/tmp/x/verify.csv")));
        let flags = Flags {
            out: Some(PathBuf::from("here.json")),
            ..Flags::default()
        };
        let c = ExperimentConfig::resolve(Mode::Verify, &flags, Some(Path::new("/tmp/x"))).unwrap();
        assert_eq!(c.output_path, Some(PathBuf::from("here.json")));
    }
}
