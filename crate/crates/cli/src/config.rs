//! Plain-text problem configuration: one `key = value` pair per line,
//! `#` comments, explicit keys only.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use birisk::risk::RiskSpec;

#[derive(Debug)]
pub enum ConfigError {
    Io(String, std::io::Error),
    Syntax { line: usize, message: String },
    Missing(&'static str),
    Invalid { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(path, e) => write!(f, "cannot read {}: {}", path, e),
            ConfigError::Syntax { line, message } => {
                write!(f, "config line {}: {}", line, message)
            }
            ConfigError::Missing(key) => write!(f, "config key `{}` is required", key),
            ConfigError::Invalid { key, message } => {
                write!(f, "config key `{}`: {}", key, message)
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Gaussian,
    Scenario,
}

/// How a risk measure enters a Gaussian problem: a named spec whose
/// coefficient is computed, or a raw coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskInput {
    Spec(RiskSpec),
    Coefficient(f64),
}

impl RiskInput {
    pub fn gaussian_coefficient(&self) -> f64 {
        match self {
            RiskInput::Spec(s) => s.gaussian_coefficient(),
            RiskInput::Coefficient(c) => *c,
        }
    }

    pub fn spec(&self) -> Option<&RiskSpec> {
        match self {
            RiskInput::Spec(s) => Some(s),
            RiskInput::Coefficient(_) => None,
        }
    }
}

/// One market source, exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum MarketSource {
    Inline { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    MarketFile(PathBuf),
    ReturnsCsv(PathBuf),
    ScenarioCsv(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub mode: Mode,
    pub source: MarketSource,
    pub rho1: Option<RiskInput>,
    pub rho2: Option<RiskInput>,
    pub r: Option<f64>,
    pub long_only: bool,
    pub out: Option<PathBuf>,
    // Frontier / verify tuning.
    pub mu_lo: Option<f64>,
    pub mu_hi: Option<f64>,
    pub count: Option<usize>,
    pub resolution: Option<f64>,
    pub bridge_samples: Option<usize>,
    pub seed: Option<u64>,
    pub returns_csv_for_estimate: Option<PathBuf>,
}

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: format!("expected `key = value`, got `{}`", line),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: "empty key or value".into(),
            });
        }
        if map.insert(key.clone(), (idx + 1, value)).is_some() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: format!("duplicate key `{}`", key),
            });
        }
    }
    Ok(map)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Invalid {
        key: key.into(),
        message: format!("`{}` is not a number", value),
    })
}

fn parse_vector(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Result<Vec<f64>, _> = value
        .split_whitespace()
        .map(|tok| tok.trim_end_matches(',').parse::<f64>())
        .collect();
    v.map_err(|_| ConfigError::Invalid {
        key: key.into(),
        message: format!("`{}` is not a whitespace-separated vector", value),
    })
}

fn parse_matrix(key: &str, value: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    value.split(';').map(|row| parse_vector(key, row)).collect()
}

pub fn parse_risk(key: &str, value: &str) -> Result<RiskInput, ConfigError> {
    let bad = |message: String| ConfigError::Invalid { key: key.into(), message };
    if value == "neg_expectation" {
        return Ok(RiskInput::Spec(RiskSpec::neg_expectation()));
    }
    if let Some(theta) = value.strip_prefix("avar:") {
        let theta = parse_f64(key, theta)?;
        return RiskSpec::avar(theta)
            .map(RiskInput::Spec)
            .map_err(|e| bad(e.to_string()));
    }
    if let Some(theta) = value.strip_prefix("var:") {
        let theta = parse_f64(key, theta)?;
        return RiskSpec::var(theta)
            .map(RiskInput::Spec)
            .map_err(|e| bad(e.to_string()));
    }
    if let Some(c) = value.strip_prefix("coeff:") {
        let c = parse_f64(key, c)?;
        if !c.is_finite() || c < 0.0 {
            return Err(bad(format!("coefficient must be a nonnegative number, got {}", c)));
        }
        return Ok(RiskInput::Coefficient(c));
    }
    Err(bad(format!(
        "`{}` is not one of neg_expectation | avar:THETA | var:THETA | coeff:VALUE",
        value
    )))
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let map = parse_key_values(text)?;
        let get = |key: &str| map.get(key).map(|(_, v)| v.as_str());

        let mode = match get("mode") {
            Some("gaussian") => Mode::Gaussian,
            Some("scenario") => Mode::Scenario,
            Some(other) => {
                return Err(ConfigError::Invalid {
                    key: "mode".into(),
                    message: format!("`{}` is not gaussian|scenario", other),
                })
            }
            None => return Err(ConfigError::Missing("mode")),
        };

        let mut sources = Vec::new();
        if let (Some(mean), Some(cov)) = (get("mean"), get("cov")) {
            sources.push(MarketSource::Inline {
                mean: parse_vector("mean", mean)?,
                cov: parse_matrix("cov", cov)?,
            });
        } else if get("mean").is_some() || get("cov").is_some() {
            return Err(ConfigError::Invalid {
                key: "mean/cov".into(),
                message: "inline markets need both `mean` and `cov`".into(),
            });
        }
        if let Some(p) = get("market_file") {
            sources.push(MarketSource::MarketFile(PathBuf::from(p)));
        }
        if let Some(p) = get("returns_csv") {
            sources.push(MarketSource::ReturnsCsv(PathBuf::from(p)));
        }
        if let Some(p) = get("scenario_csv") {
            sources.push(MarketSource::ScenarioCsv(PathBuf::from(p)));
        }
        if sources.len() != 1 {
            return Err(ConfigError::Invalid {
                key: "market source".into(),
                message: format!(
                    "exactly one of mean/cov, market_file, returns_csv, scenario_csv required, found {}",
                    sources.len()
                ),
            });
        }
        let source = sources.pop().unwrap();

        // Mode consistency.
        match (mode, &source) {
            (Mode::Scenario, MarketSource::ScenarioCsv(_)) => {}
            (Mode::Scenario, _) => {
                return Err(ConfigError::Invalid {
                    key: "market source".into(),
                    message: "scenario mode requires `scenario_csv`".into(),
                })
            }
            (Mode::Gaussian, MarketSource::ScenarioCsv(_)) => {
                return Err(ConfigError::Invalid {
                    key: "market source".into(),
                    message: "gaussian mode cannot use `scenario_csv`".into(),
                })
            }
            (Mode::Gaussian, _) => {}
        }

        let rho1 = get("rho1").map(|v| parse_risk("rho1", v)).transpose()?;
        let rho2 = get("rho2").map(|v| parse_risk("rho2", v)).transpose()?;
        let r = get("r").map(|v| parse_f64("r", v)).transpose()?;
        let long_only = match get("long_only") {
            None => false,
            Some("true") => true,
            Some("false") => false,
            Some(other) => {
                return Err(ConfigError::Invalid {
                    key: "long_only".into(),
                    message: format!("`{}` is not true|false", other),
                })
            }
        };
        if mode == Mode::Scenario {
            for (key, input) in [("rho1", &rho1), ("rho2", &rho2)] {
                if let Some(input) = input {
                    if input.spec().is_none() {
                        return Err(ConfigError::Invalid {
                            key: key.into(),
                            message: "scenario mode needs a named measure, not a raw coefficient"
                                .into(),
                        });
                    }
                }
            }
        }

        let count = get("count")
            .map(|v| {
                v.parse::<usize>().map_err(|_| ConfigError::Invalid {
                    key: "count".into(),
                    message: format!("`{}` is not a count", v),
                })
            })
            .transpose()?;
        let bridge_samples = get("bridge_samples")
            .map(|v| {
                v.parse::<usize>().map_err(|_| ConfigError::Invalid {
                    key: "bridge_samples".into(),
                    message: format!("`{}` is not a count", v),
                })
            })
            .transpose()?;
        let seed = get("seed")
            .map(|v| {
                v.parse::<u64>().map_err(|_| ConfigError::Invalid {
                    key: "seed".into(),
                    message: format!("`{}` is not a seed", v),
                })
            })
            .transpose()?;

        Ok(ProblemConfig {
            mode,
            source,
            rho1,
            rho2,
            r,
            long_only,
            out: get("out").map(PathBuf::from),
            mu_lo: get("mu_lo").map(|v| parse_f64("mu_lo", v)).transpose()?,
            mu_hi: get("mu_hi").map(|v| parse_f64("mu_hi", v)).transpose()?,
            count,
            resolution: get("resolution").map(|v| parse_f64("resolution", v)).transpose()?,
            bridge_samples,
            seed,
            returns_csv_for_estimate: get("returns_csv").map(PathBuf::from),
        })
    }

    pub fn require_rho1(&self) -> Result<&RiskInput, ConfigError> {
        self.rho1.as_ref().ok_or(ConfigError::Missing("rho1"))
    }

    pub fn require_rho2(&self) -> Result<&RiskInput, ConfigError> {
        self.rho2.as_ref().ok_or(ConfigError::Missing("rho2"))
    }

    pub fn require_r(&self) -> Result<f64, ConfigError> {
        self.r.ok_or(ConfigError::Missing("r"))
    }
}
