//! Run configuration: command-line flags layered over a flat `key = value`
//! file layered over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use casimir_core::em3d::{EhCouplings, DEFAULT_ALPHA, DEFAULT_MASS};
use casimir_core::limits::{Clustering, GridSpec};
use casimir_core::scalar1d::Couplings;
use casimir_core::{Geometry, RegScheme};
use clap::{Args, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    #[value(alias = "scalar1d")]
    Scalar,
    #[value(alias = "em3d")]
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Zeta,
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClusterKind {
    Uniform,
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Settings shared by every subcommand. All optional so that unset flags
/// fall through to the config file and then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Field model
    #[arg(long, global = true)]
    pub model: Option<ModelKind>,
    /// Plate or interval separation L (natural units)
    #[arg(long, global = true)]
    pub length: Option<f64>,
    /// Coupling α; enables the interaction correction
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Heavy mass m; enables the interaction correction
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// Regularization scheme
    #[arg(long, global = true)]
    pub scheme: Option<SchemeKind>,
    /// Cutoff parameter ε (cutoff scheme only)
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Number of interior grid points
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Grid clustering
    #[arg(long, global = true)]
    pub cluster: Option<ClusterKind>,
    /// Output format
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key = value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the unit conventions to standard error
    #[arg(long, global = true)]
    pub units_note: bool,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub geometry: Geometry,
    /// `(α, m)` when either was given.
    pub couplings: Option<(f64, f64)>,
    pub scheme: RegScheme,
    pub grid: GridSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn length(&self) -> f64 {
        self.geometry.length()
    }

    pub fn scalar_couplings(&self) -> Result<Option<Couplings>, CliError> {
        self.couplings
            .map(|(a, m)| Couplings::new(a, m).map_err(|e| CliError::config("alpha", e.to_string())))
            .transpose()
    }

    pub fn em_couplings(&self) -> Result<Option<EhCouplings>, CliError> {
        self.couplings
            .map(|(a, m)| EhCouplings::new(a, m).map_err(|e| CliError::config("alpha", e.to_string())))
            .transpose()
    }
}

const KEYS: [&str; 10] = [
    "model", "length", "alpha", "mass", "scheme", "epsilon", "grid", "cluster", "format", "out",
];

pub const DEFAULT_LENGTH: f64 = 1.0;
pub const DEFAULT_GRID: usize = 101;

/// Parses a flat `key = value` document. `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config("config", format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let canonical = key.trim().replace('-', "_");
        if !KEYS.contains(&canonical.as_str()) {
            return Err(CliError::config(&canonical, format!("line {}: unknown key", lineno + 1)));
        }
        if map.insert(canonical.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::config(&canonical, format!("line {}: duplicate key", lineno + 1)));
        }
    }
    Ok(map)
}

fn load_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn file_value<T>(file: &BTreeMap<String, String>, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|s| parse(s).ok_or_else(|| CliError::config(key, format!("cannot parse `{s}`"))))
        .transpose()
}

fn enum_value<T: ValueEnum>(s: &str) -> Option<T> {
    T::from_str(s, true).ok()
}

impl CommonArgs {
    /// Applies precedence flags > file > defaults and validates the result.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        self.resolve_with_default_format(Format::Csv)
    }

    pub fn resolve_with_default_format(&self, default_format: Format) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => load_file(p)?,
            None => BTreeMap::new(),
        };
        let num = |s: &str| s.parse::<f64>().ok();
        let model = self
            .model
            .or(file_value(&file, "model", enum_value)?)
            .unwrap_or(ModelKind::Scalar);
        let length = self.length.or(file_value(&file, "length", num)?).unwrap_or(DEFAULT_LENGTH);
        let alpha = self.alpha.or(file_value(&file, "alpha", num)?);
        let mass = self.mass.or(file_value(&file, "mass", num)?);
        let scheme = self
            .scheme
            .or(file_value(&file, "scheme", enum_value)?)
            .unwrap_or(SchemeKind::Zeta);
        let epsilon = self.epsilon.or(file_value(&file, "epsilon", num)?);
        let grid = self
            .grid
            .or(file_value(&file, "grid", |s| s.parse::<usize>().ok())?)
            .unwrap_or(DEFAULT_GRID);
        let cluster = self
            .cluster
            .or(file_value(&file, "cluster", enum_value)?)
            .unwrap_or(ClusterKind::Uniform);
        let format = self
            .format
            .or(file_value(&file, "format", enum_value)?)
            .unwrap_or(default_format);
        let out = self.out.clone().or(file.get("out").map(PathBuf::from));

        let geometry = Geometry::new(length).map_err(|e| CliError::config("length", e.to_string()))?;
        let scheme = match (scheme, epsilon) {
            (SchemeKind::Zeta, None) => RegScheme::ZetaContinuation,
            (SchemeKind::Zeta, Some(_)) => {
                return Err(CliError::config("epsilon", "only valid with --scheme cutoff"));
            }
            (SchemeKind::Cutoff, None) => {
                return Err(CliError::config("epsilon", "required with --scheme cutoff"));
            }
            (SchemeKind::Cutoff, Some(e)) => {
                RegScheme::cutoff(e).map_err(|err| CliError::config("epsilon", err.to_string()))?
            }
        };
        if model == ModelKind::Em && scheme != RegScheme::ZetaContinuation {
            return Err(CliError::config("scheme", "the em model is only available in the zeta scheme"));
        }
        let couplings = match (alpha, mass) {
            (None, None) => None,
            (a, m) => Some((a.unwrap_or(DEFAULT_ALPHA), m.unwrap_or(DEFAULT_MASS))),
        };
        if let Some((a, m)) = couplings {
            if !(a.is_finite() && a >= 0.0) {
                return Err(CliError::config("alpha", "must be finite and non-negative"));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(CliError::config("mass", "must be finite and positive"));
            }
        }
        let clustering = match cluster {
            ClusterKind::Uniform => Clustering::Uniform,
            ClusterKind::Endpoints => Clustering::Endpoints,
        };
        let grid = GridSpec::new(grid, clustering).map_err(|e| CliError::config("grid", e.to_string()))?;
        Ok(RunConfig {
            model,
            geometry,
            couplings,
            scheme,
            grid,
            format,
            out,
        })
    }
}

pub const UNITS_NOTE: &str = "\
units: natural units with hbar = c = 1
  lengths (L, z) and 1/mass share one unit; energies carry inverse length
  scalar model: total energy in 1/length, densities in 1/length^2
  em model: energy per plate area in 1/length^3, densities and force per area in 1/length^4
  to convert, multiply by hbar*c = 197.3269804 MeV fm raised to the matching power";

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> CommonArgs {
        CommonArgs::default()
    }

    #[test]
    fn defaults() {
        let c = args().resolve().unwrap();
        assert_eq!(c.model, ModelKind::Scalar);
        assert_eq!(c.length(), 1.0);
        assert_eq!(c.scheme, RegScheme::ZetaContinuation);
        assert_eq!(c.grid.count, DEFAULT_GRID);
        assert_eq!(c.format, Format::Csv);
        assert!(c.couplings.is_none());
    }

    #[test]
    fn file_parsing() {
        let m = parse_config_text("# comment\nlength = 2.5\n\nscheme=cutoff # trailing\nunits-note = x\n");
        assert!(matches!(m, Err(CliError::Config { ref field, .. }) if field == "units_note"));
        let m = parse_config_text("length = 2.5\nscheme=cutoff # trailing\n").unwrap();
        assert_eq!(m["length"], "2.5");
        assert_eq!(m["scheme"], "cutoff");
        assert!(parse_config_text("length 2").is_err());
        assert!(matches!(
            parse_config_text("grid = 3\ngrid = 4"),
            Err(CliError::Config { ref field, .. }) if field == "grid"
        ));
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "length = 3\ngrid = 7\nmodel = em\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        a.length = Some(2.0);
        let c = a.resolve().unwrap();
        assert_eq!(c.length(), 2.0);
        assert_eq!(c.grid.count, 7);
        assert_eq!(c.model, ModelKind::Em);
    }

    fn field_of(a: CommonArgs) -> String {
        match a.resolve() {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_field() {
        let mut a = args();
        a.scheme = Some(SchemeKind::Cutoff);
        assert_eq!(field_of(a.clone()), "epsilon");
        a.epsilon = Some(-1.0);
        assert_eq!(field_of(a.clone()), "epsilon");
        a.epsilon = Some(0.1);
        a.model = Some(ModelKind::Em);
        assert_eq!(field_of(a), "scheme");

        let mut a = args();
        a.epsilon = Some(0.1);
        assert_eq!(field_of(a), "epsilon");
        let mut a = args();
        a.length = Some(0.0);
        assert_eq!(field_of(a), "length");
        let mut a = args();
        a.grid = Some(1);
        assert_eq!(field_of(a), "grid");
        let mut a = args();
        a.mass = Some(0.0);
        assert_eq!(field_of(a), "mass");
        let mut a = args();
        a.alpha = Some(-0.1);
        assert_eq!(field_of(a), "alpha");
    }

    #[test]
    fn bad_file_value_names_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "cluster = sideways\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        assert_eq!(field_of(a), "cluster");
    }

    #[test]
    fn couplings_fill_defaults() {
        let mut a = args();
        a.alpha = Some(0.01);
        assert_eq!(a.resolve().unwrap().couplings, Some((0.01, DEFAULT_MASS)));
        let mut a = args();
        a.mass = Some(10.0);
        assert_eq!(a.resolve().unwrap().couplings, Some((DEFAULT_ALPHA, 10.0)));
    }
}
