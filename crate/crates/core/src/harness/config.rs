//! Flat `key = value` experiment configuration.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored; lists are comma separated. Unknown keys are errors.
//!
//! | key | values | default |
//! |---|---|---|
//! | `grid_points` | odd-or-even integer ≥ 3 | 257 |
//! | `background` | `cos`, `exp`, `constant` | `cos` |
//! | `offset` | real | 1 |
//! | `gamma` | real > 0 | 1 |
//! | `bursts` | `fixture`, `none` | `fixture` |
//! | `t_end` | real, end of the record | 3.5 |
//! | `sweep` | `beta`, `L`, `sigma` | none |
//! | `values` | increasing positive reals | none |
//! | `beta`, `L`, `sigma` | reals | 0.01, 0.01, 1e-4 |
//! | `algorithm` | `direct`, `prony`, `both` | `both` |
//! | `K`, `C` | reals | 2, 1 |
//! | `rule` | `proof`, `pseudocode` | `proof` |
//! | `threshold` | `theorem`, `lower-bound` | `lower-bound` |
//! | `seed` | integer | 0 |
//! | `steps_per_beta` | even integer ≥ 64 | 128 |
//! | `output_dir` | path | `out` |

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::detect_direct::DirectRule;
use crate::detect_prony::ThresholdRule;
use crate::error::{Error, Result};
use crate::sensing::DEFAULT_STEPS_PER_BETA;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackgroundKind {
    Cos,
    Exp,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurstSet {
    Fixture,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepVar {
    Beta,
    L,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Direct,
    Prony,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    Direct,
    Prony,
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            Self::Direct => vec![Algorithm::Direct],
            Self::Prony => vec![Algorithm::Prony],
            Self::Both => vec![Algorithm::Direct, Algorithm::Prony],
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Beta => "beta",
            Self::L => "L",
            Self::Sigma => "sigma",
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Prony => "prony",
        })
    }
}

impl fmt::Display for BackgroundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Constant => "constant",
        })
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Invalid(format!("invalid value {value:?} for {key}"))
}

impl FromStr for BackgroundKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cos" => Ok(Self::Cos),
            "exp" => Ok(Self::Exp),
            "constant" => Ok(Self::Constant),
            _ => Err(bad("background", s)),
        }
    }
}

impl FromStr for SweepVar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Self::Beta),
            "L" => Ok(Self::L),
            "sigma" => Ok(Self::Sigma),
            _ => Err(bad("sweep", s)),
        }
    }
}

impl FromStr for AlgorithmChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "prony" => Ok(Self::Prony),
            "both" => Ok(Self::Both),
            _ => Err(bad("algorithm", s)),
        }
    }
}

pub fn parse_rule(s: &str) -> Result<DirectRule> {
    match s {
        "proof" => Ok(DirectRule::Proof),
        "pseudocode" => Ok(DirectRule::Pseudocode),
        _ => Err(bad("rule", s)),
    }
}

pub fn parse_threshold(s: &str) -> Result<ThresholdRule> {
    match s {
        "theorem" => Ok(ThresholdRule::Theorem),
        "lower-bound" => Ok(ThresholdRule::LowerBound),
        _ => Err(bad("threshold", s)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid_points: usize,
    pub background: BackgroundKind,
    pub offset: f64,
    pub gamma: f64,
    pub bursts: BurstSet,
    pub t_end: f64,
    pub sweep: Option<Sweep>,
    pub beta: f64,
    pub l: f64,
    pub sigma: f64,
    pub algorithm: AlgorithmChoice,
    pub k: f64,
    pub c: f64,
    pub rule: DirectRule,
    pub threshold: ThresholdRule,
    pub seed: u64,
    pub steps_per_beta: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid_points: 257,
            background: BackgroundKind::Cos,
            offset: 1.0,
            gamma: 1.0,
            bursts: BurstSet::Fixture,
            t_end: 3.5,
            sweep: None,
            beta: 0.01,
            l: 0.01,
            sigma: 1e-4,
            algorithm: AlgorithmChoice::Both,
            k: 2.0,
            c: 1.0,
            rule: DirectRule::Proof,
            threshold: ThresholdRule::LowerBound,
            seed: 0,
            steps_per_beta: DEFAULT_STEPS_PER_BETA,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, v))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut sweep_var = None;
        let mut values = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, v) = (key.trim(), v.trim());
            match key {
                "grid_points" => cfg.grid_points = num(key, v)?,
                "background" => cfg.background = v.parse()?,
                "offset" => cfg.offset = num(key, v)?,
                "gamma" => cfg.gamma = num(key, v)?,
                "bursts" => {
                    cfg.bursts = match v {
                        "fixture" => BurstSet::Fixture,
                        "none" => BurstSet::None,
                        _ => return Err(bad(key, v)),
                    }
                }
                "t_end" => cfg.t_end = num(key, v)?,
                "sweep" => sweep_var = Some(v.parse()?),
                "values" => {
                    values = Some(v.split(',').map(|s| num(key, s.trim())).collect::<Result<Vec<f64>>>()?);
                }
                "beta" => cfg.beta = num(key, v)?,
                "L" => cfg.l = num(key, v)?,
                "sigma" => cfg.sigma = num(key, v)?,
                "algorithm" => cfg.algorithm = v.parse()?,
                "K" => cfg.k = num(key, v)?,
                "C" => cfg.c = num(key, v)?,
                "rule" => cfg.rule = parse_rule(v)?,
                "threshold" => cfg.threshold = parse_threshold(v)?,
                "seed" => cfg.seed = num(key, v)?,
                "steps_per_beta" => cfg.steps_per_beta = num(key, v)?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                _ => return Err(Error::Invalid(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        cfg.sweep = match (sweep_var, values) {
            (Some(var), Some(values)) => Some(Sweep { var, values }),
            (None, None) => None,
            _ => return Err(Error::Invalid("sweep and values must be given together".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} must be positive, got {x}")))
            }
        };
        let finite_nonneg = |name: &str, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} must be non-negative, got {x}")))
            }
        };
        if self.grid_points < 3 {
            return Err(Error::Invalid(format!("grid_points must be at least 3, got {}", self.grid_points)));
        }
        finite_pos("gamma", self.gamma)?;
        finite_pos("t_end", self.t_end)?;
        finite_pos("beta", self.beta)?;
        finite_nonneg("L", self.l)?;
        finite_nonneg("sigma", self.sigma)?;
        if !self.offset.is_finite() {
            return Err(Error::Invalid("offset must be finite".into()));
        }
        if !(self.k > 1.0) || !self.k.is_finite() {
            return Err(Error::Invalid(format!("K must exceed 1, got {}", self.k)));
        }
        finite_pos("C", self.c)?;
        if self.steps_per_beta < 64 || self.steps_per_beta % 2 != 0 {
            return Err(Error::Invalid(format!("steps_per_beta must be even and >= 64, got {}", self.steps_per_beta)));
        }
        if self.bursts == BurstSet::Fixture && self.t_end <= 2.75 {
            return Err(Error::Invalid(format!("t_end = {} ends before the last fixture burst", self.t_end)));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(Error::Invalid("sweep values are empty".into()));
            }
            for &v in &sw.values {
                finite_pos("sweep value", v)?;
            }
            if sw.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Invalid("sweep values must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// `(β, L, σ)` with the swept variable set to `value`.
    pub fn point(&self, var: SweepVar, value: f64) -> (f64, f64, f64) {
        match var {
            SweepVar::Beta => (value, self.l, self.sigma),
            SweepVar::L => (self.beta, value, self.sigma),
            SweepVar::Sigma => (self.beta, self.l, value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
# beta sweep
background = exp
offset = 0.5
sweep = beta
values = 0.01, 0.02,0.05
L = 0.02
sigma = 0   # noiseless
algorithm = prony
threshold = theorem
rule = pseudocode
seed = 7
output_dir = /tmp/x
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.background, BackgroundKind::Exp);
        assert_eq!(cfg.offset, 0.5);
        assert_eq!(cfg.sweep, Some(Sweep { var: SweepVar::Beta, values: vec![0.01, 0.02, 0.05] }));
        assert_eq!(cfg.l, 0.02);
        assert_eq!(cfg.sigma, 0.0);
        assert_eq!(cfg.algorithm, AlgorithmChoice::Prony);
        assert_eq!(cfg.threshold, ThresholdRule::Theorem);
        assert_eq!(cfg.rule, DirectRule::Pseudocode);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.point(SweepVar::Beta, 0.05), (0.05, 0.02, 0.0));
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "nonsense",
            "colour = red",
            "beta = -1",
            "beta = abc",
            "sweep = beta",
            "sweep = beta\nvalues = 0.02, 0.01",
            "sweep = beta\nvalues = 0, 0.01",
            "sweep = gamma\nvalues = 0.1",
            "K = 1",
            "steps_per_beta = 63",
            "t_end = 2",
            "background = sin",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Invalid(_))), "{text}");
        }
    }
}
