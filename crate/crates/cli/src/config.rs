//! The run configuration file: one `section.key = value` per line, `#`
//! starts a comment. Every key is checked against [`KEYS`]; anything else is
//! rejected by name.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use threshold_core::potentials::{PotentialKind, PotentialSpec};
use threshold_core::solver::SolverOptions;
use threshold_core::Dimension;

/// `(key, description)` for every accepted key.
pub const KEYS: &[(&str, &str)] = &[
    ("potential.kind", "square | gaussian | exponential | tabulated (required)"),
    ("potential.dimension", "1 | 2 | 3 (required)"),
    ("potential.amplitude", "depth multiplier, > 0 (default 1)"),
    ("potential.width", "length scale: half-width or radius, > 0 (default 1)"),
    (
        "potential.table_path",
        "CSV of radius,value rows in units of width; required for tabulated, relative to the config file",
    ),
    ("grid.points", "Simpson points on the grid, odd, >= 5 (default 2001)"),
    ("grid.padding", "grid extent as a multiple of the support radius, >= 1 (default 1.05)"),
    ("solver.tol", "convergence tolerance in (0, 1e-6] (default 1e-12)"),
    ("solver.max_iter", "iteration cap, >= 10 (default 500)"),
    ("solver.ref_index", "normalization node index, or auto (default auto)"),
    ("sweep.eps_min", "smallest epsilon of a sweep / inversion bracket"),
    ("sweep.eps_max", "largest epsilon of a sweep / inversion bracket"),
    ("sweep.points", "number of sweep points (default 9)"),
    ("sweep.spacing", "log | linear (default log)"),
    ("output.path", "sweep output file (default: standard output)"),
    ("output.format", "csv | json, sweep output format (default csv)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config error")?;
        if let Some(line) = self.line {
            write!(f, " (line {line})")?;
        }
        if let Some(key) = &self.key {
            write!(f, " in key '{key}'")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn key_error(key: &str, line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepKeys {
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub solver: SolverOptions,
    pub sweep: SweepKeys,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

struct Entry {
    value: String,
    line: usize,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            key: None,
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses config text; `base_dir` resolves a relative `potential.table_path`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    key: None,
                    line: Some(line_no),
                    message: format!("expected 'section.key = value', got '{line}'"),
                });
            };
            let key = key.trim();
            let Some(&(known, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
                return Err(key_error(key, Some(line_no), "unknown key"));
            };
            let value = value.trim();
            if value.is_empty() {
                return Err(key_error(key, Some(line_no), "missing value"));
            }
            if entries.contains_key(known) {
                return Err(key_error(key, Some(line_no), "duplicate key"));
            }
            entries.insert(known, Entry { value: value.to_string(), line: line_no });
        }

        let kind: PotentialKind = parse_required(&entries, "potential.kind", |s| s.parse().map_err(|e| format!("{e}")))?;
        let dim: u32 = parse_required(&entries, "potential.dimension", parse_num)?;
        let dimension = Dimension::new(dim).map_err(|e| key_error("potential.dimension", line_of(&entries, "potential.dimension"), e.to_string()))?;
        let amplitude = parse_optional(&entries, "potential.amplitude", parse_num)?.unwrap_or(1.0);
        let width = parse_optional(&entries, "potential.width", parse_num)?.unwrap_or(1.0);
        let table_path: Option<String> = parse_optional(&entries, "potential.table_path", |s| Ok(s.to_string()))?;

        let mut potential = PotentialSpec::new(kind, dimension, amplitude, width);
        match (kind, table_path) {
            (PotentialKind::Tabulated, Some(p)) => {
                let path = base_dir.join(p);
                let table = read_table(&path).map_err(|m| key_error("potential.table_path", line_of(&entries, "potential.table_path"), m))?;
                potential.table = Some(table);
            }
            (PotentialKind::Tabulated, None) => {
                return Err(key_error("potential.table_path", None, "required when potential.kind = tabulated"));
            }
            (_, Some(_)) => {
                return Err(key_error(
                    "potential.table_path",
                    line_of(&entries, "potential.table_path"),
                    "only allowed when potential.kind = tabulated",
                ));
            }
            (_, None) => {}
        }

        let defaults = SolverOptions::default();
        let solver = SolverOptions {
            points: parse_optional(&entries, "grid.points", parse_num)?.unwrap_or(defaults.points),
            padding: parse_optional(&entries, "grid.padding", parse_num)?.unwrap_or(defaults.padding),
            tol: parse_optional(&entries, "solver.tol", parse_num)?.unwrap_or(defaults.tol),
            max_iter: parse_optional(&entries, "solver.max_iter", parse_num)?.unwrap_or(defaults.max_iter),
            ref_index: parse_optional(&entries, "solver.ref_index", |s| {
                if s == "auto" {
                    Ok(None)
                } else {
                    parse_num::<usize>(s).map(Some)
                }
            })?
            .flatten(),
        };

        let sweep = SweepKeys {
            eps_min: parse_optional(&entries, "sweep.eps_min", parse_num)?,
            eps_max: parse_optional(&entries, "sweep.eps_max", parse_num)?,
            points: parse_optional(&entries, "sweep.points", parse_num)?,
            spacing: parse_optional(&entries, "sweep.spacing", |s| match s {
                "log" => Ok(Spacing::Log),
                "linear" => Ok(Spacing::Linear),
                _ => Err(format!("expected log or linear, got '{s}'")),
            })?
            .unwrap_or_default(),
        };
        let output_path = parse_optional(&entries, "output.path", |s| Ok(PathBuf::from(s)))?;
        let output_format = parse_optional(&entries, "output.format", |s| match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("expected csv or json, got '{s}'")),
        })?
        .unwrap_or_default();

        Ok(Self {
            potential,
            solver,
            sweep,
            output_path,
            output_format,
        })
    }
}

fn line_of(entries: &BTreeMap<&'static str, Entry>, key: &str) -> Option<usize> {
    entries.get(key).map(|e| e.line)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("cannot parse '{s}': {e}"))
}

fn parse_optional<T>(
    entries: &BTreeMap<&'static str, Entry>,
    key: &'static str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, ConfigError> {
    entries
        .get(key)
        .map(|e| parse(&e.value).map_err(|m| key_error(key, Some(e.line), m)))
        .transpose()
}

fn parse_required<T>(
    entries: &BTreeMap<&'static str, Entry>,
    key: &'static str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<T, ConfigError> {
    parse_optional(entries, key, parse)?.ok_or_else(|| key_error(key, None, "required key is missing"))
}

/// `radius,value` rows; blank lines, `#` comments and a non-numeric header are skipped.
fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [r, v] => r.parse::<f64>().ok().zip(v.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(row) => rows.push(row),
            None if rows.is_empty() && i == 0 => continue,
            None => return Err(format!("{}:{}: expected 'radius,value', got '{line}'", path.display(), i + 1)),
        }
    }
    Ok(rows)
}

/// The key reference printed by `--help`.
pub fn keys_help() -> String {
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config file keys (one 'section.key = value' per line, '#' comments):\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<width$}  {d}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(text, Path::new("."))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse("potential.kind = gaussian\npotential.dimension = 2\n").unwrap();
        assert_eq!(c.potential, PotentialSpec::gaussian(Dimension::Two, 1.0, 1.0));
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(c.sweep, SweepKeys::default());
        assert_eq!(c.output_format, OutputFormat::Csv);
        assert!(c.output_path.is_none());
    }

    #[test]
    fn full_config() {
        let text = "# comment\n\
            potential.kind = square   # trailing\n\
            potential.dimension = 3\n\
            potential.amplitude = 2.5\n\
            potential.width = 0.5\n\
            grid.points = 801\n\
            grid.padding = 1.2\n\
            solver.tol = 1e-10\n\
            solver.max_iter = 50\n\
            solver.ref_index = 7\n\
            sweep.eps_min = 1e-6\n\
            sweep.eps_max = 1e-2\n\
            sweep.points = 5\n\
            sweep.spacing = linear\n\
            output.path = out.json\n\
            output.format = json\n";
        let c = parse(text).unwrap();
        assert_eq!(c.potential, PotentialSpec::square(Dimension::Three, 2.5, 0.5));
        assert_eq!(c.solver.points, 801);
        assert_eq!(c.solver.padding, 1.2);
        assert_eq!(c.solver.tol, 1e-10);
        assert_eq!(c.solver.max_iter, 50);
        assert_eq!(c.solver.ref_index, Some(7));
        assert_eq!(c.sweep.eps_min, Some(1e-6));
        assert_eq!(c.sweep.points, Some(5));
        assert_eq!(c.sweep.spacing, Spacing::Linear);
        assert_eq!(c.output_path, Some(PathBuf::from("out.json")));
        assert_eq!(c.output_format, OutputFormat::Json);
        assert_eq!(parse("potential.kind = square\npotential.dimension = 1\nsolver.ref_index = auto\n").unwrap().solver.ref_index, None);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse("potential.kind = square\npotential.dimension = 1\ngrid.pionts = 5\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid.pionts"));
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().contains("grid.pionts"));

        let e = parse("potential.dimension = 1\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("potential.kind"));

        let e = parse("potential.kind = square\npotential.dimension = 4\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("potential.dimension"));

        let e = parse("potential.kind = blob\npotential.dimension = 1\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("potential.kind"));

        let e = parse("potential.kind = square\npotential.kind = square\npotential.dimension = 1\n").unwrap_err();
        assert!(e.message.contains("duplicate"));

        let e = parse("potential.kind = square\npotential.dimension = 1\ngrid.points = many\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid.points"));

        let e = parse("potential.kind = square\npotential.dimension = 1\nsweep.spacing = cubic\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("sweep.spacing"));

        let e = parse("just text\n").unwrap_err();
        assert_eq!(e.line, Some(1));

        let e = parse("potential.kind = tabulated\npotential.dimension = 1\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("potential.table_path"));

        let e = parse("potential.kind = square\npotential.dimension = 1\npotential.table_path = t.csv\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("potential.table_path"));
    }

    #[test]
    fn help_lists_every_key() {
        let help = keys_help();
        for (k, _) in KEYS {
            assert!(help.contains(k));
        }
    }
}
