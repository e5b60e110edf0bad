//! Sweep configuration: defaults, then a flat `key=value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use fockbench::{FockCutoff, JointStrategyId, SimpleStrategy, SqueezingParam};
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::output::fmt_num;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    SweepSimple,
    SweepJoint,
    LossScan,
    Verify,
    VerifyAppendix,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::SweepSimple => "sweep-simple",
            Self::SweepJoint => "sweep-joint",
            Self::LossScan => "loss-scan",
            Self::Verify => "verify",
            Self::VerifyAppendix => "verify-appendix",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CutoffChoice {
    Auto,
    Fixed(usize),
}

impl CutoffChoice {
    pub fn resolve(self) -> Result<Option<FockCutoff>, CliError> {
        match self {
            Self::Auto => Ok(None),
            Self::Fixed(n) => Ok(Some(FockCutoff::new(n)?)),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Unparsed settings, every field optional. Filled from a config file or
/// from command-line flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub lambda: Option<String>,
    pub t2_min: Option<String>,
    pub t2_max: Option<String>,
    pub t2_steps: Option<String>,
    pub cutoff: Option<String>,
    pub strategies: Option<String>,
    pub eta_grid: Option<String>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub n_max: Option<String>,
}

impl RawConfig {
    /// Parses `key=value` lines. Blank lines and `#` comments are skipped;
    /// keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("config line {}: expected key=value, got '{line}'", i + 1)));
            };
            let value = Some(value.trim().to_string());
            match key.trim().replace('_', "-").as_str() {
                "lambda" => raw.lambda = value,
                "t2-min" => raw.t2_min = value,
                "t2-max" => raw.t2_max = value,
                "t2-steps" => raw.t2_steps = value,
                "cutoff" => raw.cutoff = value,
                "strategies" => raw.strategies = value,
                "eta-grid" => raw.eta_grid = value,
                "out" => raw.out = value,
                "format" => raw.format = value,
                "n-max" => raw.n_max = value,
                other => return Err(CliError::Config(format!("config line {}: unknown key '{other}'", i + 1))),
            }
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RawConfig) -> Self {
        Self {
            lambda: over.lambda.or(self.lambda),
            t2_min: over.t2_min.or(self.t2_min),
            t2_max: over.t2_max.or(self.t2_max),
            t2_steps: over.t2_steps.or(self.t2_steps),
            cutoff: over.cutoff.or(self.cutoff),
            strategies: over.strategies.or(self.strategies),
            eta_grid: over.eta_grid.or(self.eta_grid),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            n_max: over.n_max.or(self.n_max),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub command: Command,
    pub lambda: SqueezingParam,
    pub t2_min: f64,
    pub t2_max: f64,
    pub t2_steps: usize,
    pub cutoff: CutoffChoice,
    pub strategies: Vec<String>,
    pub eta_grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub n_max: u32,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

/// Splits a strategy list. Entries are separated by `;` or whitespace;
/// simple labels may also be separated by commas.
pub fn split_strategies(list: &str) -> Vec<String> {
    list.split(|c: char| c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .flat_map(|tok| {
            if tok.contains('/') {
                tok.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect()
            } else {
                vec![tok.to_string()]
            }
        })
        .collect()
}

fn default_strategies(command: Command) -> Vec<String> {
    match command {
        Command::SweepSimple | Command::LossScan => SimpleStrategy::DEFAULT_SET.iter().map(|s| s.label()).collect(),
        Command::SweepJoint => JointStrategyId::ALL.iter().map(|s| s.label().to_string()).collect(),
        _ => Vec::new(),
    }
}

impl SweepConfig {
    pub const DEFAULT_LAMBDA: f64 = 0.5;
    pub const DEFAULT_T2_MIN: f64 = 0.5;
    pub const DEFAULT_T2_MAX: f64 = 0.99;
    pub const DEFAULT_T2_STEPS: usize = 50;
    pub const DEFAULT_N_MAX: u32 = 12;

    pub fn resolve(command: Command, raw: RawConfig) -> Result<Self, CliError> {
        let lambda = match &raw.lambda {
            Some(v) => parse_num::<f64>("lambda", v)?,
            None => Self::DEFAULT_LAMBDA,
        };
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(CliError::Config(format!("lambda = {lambda} must lie in (0, 1)")));
        }
        let lambda = SqueezingParam::new(lambda)?;
        let t2_min = raw.t2_min.as_deref().map_or(Ok(Self::DEFAULT_T2_MIN), |v| parse_num("t2-min", v))?;
        let t2_max = raw.t2_max.as_deref().map_or(Ok(Self::DEFAULT_T2_MAX), |v| parse_num("t2-max", v))?;
        let t2_steps = raw.t2_steps.as_deref().map_or(Ok(Self::DEFAULT_T2_STEPS), |v| parse_num("t2-steps", v))?;
        for (k, v) in [("t2-min", t2_min), ("t2-max", t2_max)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Config(format!("{k} = {v} must lie in (0, 1)")));
            }
        }
        if !(t2_min < t2_max) {
            return Err(CliError::Config(format!("t2-min = {t2_min} must be below t2-max = {t2_max}")));
        }
        if t2_steps == 0 {
            return Err(CliError::Config("t2-steps must be positive".into()));
        }
        let cutoff = match raw.cutoff.as_deref().map(str::trim) {
            None | Some("auto") => CutoffChoice::Auto,
            Some(v) => {
                let n: usize = parse_num("cutoff", v)?;
                FockCutoff::new(n)?;
                CutoffChoice::Fixed(n)
            }
        };
        let strategies = match &raw.strategies {
            Some(v) => split_strategies(v),
            None => default_strategies(command),
        };
        let eta_grid = match &raw.eta_grid {
            Some(v) => {
                let etas = v
                    .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num::<f64>("eta-grid", s))
                    .collect::<Result<Vec<_>, _>>()?;
                if etas.is_empty() {
                    return Err(CliError::Config("eta-grid is empty".into()));
                }
                if let Some(bad) = etas.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
                    return Err(CliError::Config(format!("eta-grid value {bad} must lie in (0, 1]")));
                }
                Some(etas)
            }
            None => None,
        };
        let format = match raw.format.as_deref().map(str::trim) {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => return Err(CliError::Config(format!("unknown output format '{other}'"))),
        };
        let n_max = raw.n_max.as_deref().map_or(Ok(Self::DEFAULT_N_MAX), |v| parse_num("n-max", v))?;
        Ok(Self {
            command,
            lambda,
            t2_min,
            t2_max,
            t2_steps,
            cutoff,
            strategies,
            eta_grid,
            out: raw.out.map(PathBuf::from),
            format,
            n_max,
        })
    }

    /// The settings that determine the output, in a fixed order. The output
    /// path is left out so that identical runs agree byte for byte.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let cutoff = match self.cutoff {
            CutoffChoice::Auto => "auto".to_string(),
            CutoffChoice::Fixed(n) => n.to_string(),
        };
        let mut out = vec![
            ("command", self.command.name().to_string()),
            ("lambda", fmt_num(self.lambda.value())),
            ("t2-min", fmt_num(self.t2_min)),
            ("t2-max", fmt_num(self.t2_max)),
            ("t2-steps", self.t2_steps.to_string()),
            ("cutoff", cutoff),
            ("strategies", self.strategies.join(";")),
        ];
        let etas = match &self.eta_grid {
            Some(g) => g.iter().map(|&e| fmt_num(e)).collect::<Vec<_>>().join(","),
            None => "none".into(),
        };
        out.push(("eta-grid", etas));
        out.push((
            "format",
            match self.format {
                OutputFormat::Csv => "csv".into(),
                OutputFormat::Json => "json".into(),
            },
        ));
        out.push(("n-max", self.n_max.to_string()));
        out
    }

    pub fn to_json(&self) -> Value {
        let cutoff = match self.cutoff {
            CutoffChoice::Auto => Value::from("auto"),
            CutoffChoice::Fixed(n) => Value::from(n),
        };
        let mut m = Map::new();
        m.insert("command".into(), self.command.name().into());
        m.insert("lambda".into(), crate::output::json_num(self.lambda.value()));
        m.insert("t2-min".into(), crate::output::json_num(self.t2_min));
        m.insert("t2-max".into(), crate::output::json_num(self.t2_max));
        m.insert("t2-steps".into(), self.t2_steps.into());
        m.insert("cutoff".into(), cutoff);
        m.insert("strategies".into(), self.strategies.clone().into());
        m.insert(
            "eta-grid".into(),
            match &self.eta_grid {
                Some(g) => g.iter().map(|&e| crate::output::json_num(e)).collect(),
                None => Value::Null,
            },
        );
        m.insert(
            "format".into(),
            match self.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            }
            .into(),
        );
        m.insert("n-max".into(), self.n_max.into());
        Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = RawConfig::parse("# sweep\nlambda = 0.3\nt2_steps=7\n\ncutoff=20\n").unwrap();
        let flags = RawConfig { lambda: Some("0.4".into()), ..Default::default() };
        let cfg = SweepConfig::resolve(Command::SweepSimple, file.overlay(flags)).unwrap();
        assert_eq!(cfg.lambda.value(), 0.4);
        assert_eq!(cfg.t2_steps, 7);
        assert_eq!(cfg.cutoff, CutoffChoice::Fixed(20));
        assert_eq!(cfg.strategies.len(), 5);
    }

    #[test]
    fn bad_lines_are_config_errors() {
        assert!(matches!(RawConfig::parse("lambda"), Err(CliError::Config(_))));
        assert!(matches!(RawConfig::parse("colour=red"), Err(CliError::Config(_))));
        let raw = RawConfig { t2_min: Some("0.9".into()), t2_max: Some("0.5".into()), ..Default::default() };
        assert!(SweepConfig::resolve(Command::SweepSimple, raw).is_err());
        let raw = RawConfig { eta_grid: Some("1.0,1.2".into()), ..Default::default() };
        assert!(SweepConfig::resolve(Command::LossScan, raw).is_err());
    }

    #[test]
    fn strategy_lists() {
        assert_eq!(split_strategies("1/0,2/2"), ["1/0", "2/2"]);
        assert_eq!(split_strategies("1,0,0,1; 1,1,1,1"), ["1,0,0,1", "1,1,1,1"]);
        assert_eq!(split_strategies("1/0 (1,0,~0,0)"), ["1/0", "(1,0,~0,0)"]);
    }
}
