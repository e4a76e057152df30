use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::galerkin::ModelParams;

/// Largest degree and subdivision count accepted; dense solves beyond this
/// are no longer desk-scale.
pub const MAX_DEGREE: usize = 6;
pub const MAX_SUBDIVISIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Ellipticity,
    Korn,
    Constants,
    Solve,
    Limit,
    Bc,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Ellipticity,
        Suite::Korn,
        Suite::Constants,
        Suite::Solve,
        Suite::Limit,
        Suite::Bc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ellipticity => "ellipticity",
            Suite::Korn => "korn",
            Suite::Constants => "constants",
            Suite::Solve => "solve",
            Suite::Limit => "limit",
            Suite::Bc => "bc",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config {
                field: "suites".into(),
                reason: format!("unknown suite `{s}`"),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kn: f64,
    pub chi_tilde: f64,
    pub epsilon_w: f64,
    pub degree: usize,
    pub subdivisions: usize,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kn: 1.0,
            chi_tilde: 1.0,
            epsilon_w: 0.0,
            degree: 1,
            subdivisions: 1,
            suites: Suite::ALL.to_vec(),
            seed: 0x005e_ed13,
            output_dir: None,
        }
    }
}

fn field<T: DeserializeOwned>(key: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Config {
        field: key.into(),
        reason: e.to_string(),
    })
}

impl RunConfig {
    /// Parses a JSON document whose keys are a subset of the config fields.
    /// Missing keys take their defaults; unknown keys are rejected.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config {
            field: "<document>".into(),
            reason: e.to_string(),
        })?;
        let Value::Object(map) = value else {
            return Err(Error::Config {
                field: "<document>".into(),
                reason: "expected a JSON object".into(),
            });
        };
        let mut cfg = RunConfig::default();
        for (key, v) in map {
            match key.as_str() {
                "kn" => cfg.kn = field(&key, v)?,
                "chi_tilde" => cfg.chi_tilde = field(&key, v)?,
                "epsilon_w" => cfg.epsilon_w = field(&key, v)?,
                "degree" => cfg.degree = field(&key, v)?,
                "subdivisions" => cfg.subdivisions = field(&key, v)?,
                "suites" => cfg.suites = field(&key, v)?,
                "seed" => cfg.seed = field(&key, v)?,
                "output_dir" => cfg.output_dir = field(&key, v)?,
                _ => {
                    return Err(Error::Config {
                        field: key,
                        reason: "unknown key".into(),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.kn, self.chi_tilde, self.epsilon_w).map_err(|e| match e {
            Error::InvalidParameter { field, reason } => Error::Config {
                field: field.into(),
                reason,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let bad = |field: &str, reason: String| {
            Err(Error::Config {
                field: field.into(),
                reason,
            })
        };
        if !(1..=MAX_DEGREE).contains(&self.degree) {
            return bad(
                "degree",
                format!("must lie in 1..={MAX_DEGREE}, got {}", self.degree),
            );
        }
        if !(1..=MAX_SUBDIVISIONS).contains(&self.subdivisions) {
            return bad(
                "subdivisions",
                format!(
                    "must lie in 1..={MAX_SUBDIVISIONS}, got {}",
                    self.subdivisions
                ),
            );
        }
        if self.suites.is_empty() {
            return bad("suites", "at least one suite is required".into());
        }
        Ok(())
    }

    /// Requested suites, deduplicated, in dependency order.
    pub fn ordered_suites(&self) -> Vec<Suite> {
        let mut s = self.suites.clone();
        s.sort();
        s.dedup();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_documents() {
        let cfg = RunConfig::from_json_str(r#"{"kn": 0.5, "suites": ["bc", "ellipticity", "bc"]}"#)
            .unwrap();
        assert_eq!(cfg.kn, 0.5);
        assert_eq!(cfg.degree, 1);
        assert_eq!(cfg.ordered_suites(), vec![Suite::Ellipticity, Suite::Bc]);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"{"kn": 1.0, "typo": 3}"#, "typo"),
            (r#"{"kn": -1.0}"#, "kn"),
            (r#"{"epsilon_w": "x"}"#, "epsilon_w"),
            (r#"{"suites": []}"#, "suites"),
            (r#"{"suites": ["nope"]}"#, "suites"),
            (r#"{"degree": 0}"#, "degree"),
            (r#"{"subdivisions": 9}"#, "subdivisions"),
            (r#"[1, 2]"#, "<document>"),
        ];
        for (text, name) in cases {
            match RunConfig::from_json_str(text) {
                Err(Error::Config { field, .. }) => assert_eq!(field, name, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(
                serde_json::to_string(&s).unwrap(),
                format!("\"{}\"", s.name())
            );
        }
    }
}
