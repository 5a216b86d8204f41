//! Benchmark environments and the JSON instance format.

pub mod car;
pub mod file;
pub mod flappy;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_compatible, AdherenceModel, HumanPolicy, TabularMdp};

pub use car::{build_car, CarConfig};
pub use file::{load_env_spec, save_env_spec, EnvSpec};
pub use flappy::{build_flappy, policy_greedy, policy_safe, FlappyConfig, GridMap};

/// An environment together with the human acting in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub mdp: TabularMdp,
    pub pi: HumanPolicy,
    pub theta: AdherenceModel,
}

impl Instance {
    pub fn new(mdp: TabularMdp, pi: HumanPolicy, theta: AdherenceModel) -> Result<Self> {
        check_compatible(&mdp, &pi, &theta)?;
        Ok(Instance { mdp, pi, theta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HumanPolicyKind {
    /// Heads for stars in the next column.
    Greedy,
    /// Avoids walls in the next column.
    Safe,
}

impl FromStr for HumanPolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(HumanPolicyKind::Greedy),
            "safe" => Ok(HumanPolicyKind::Safe),
            other => Err(format!(
                "unknown human policy `{other}` (expected greedy|safe)"
            )),
        }
    }
}

/// `flappy`, `car` or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EnvSelector {
    Flappy,
    Car,
    File(PathBuf),
}

impl FromStr for EnvSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "flappy" => Ok(EnvSelector::Flappy),
            "car" => Ok(EnvSelector::Car),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(EnvSelector::File(PathBuf::from(p))),
                _ => Err(format!(
                    "unknown environment `{s}` (expected flappy|car|file:<path>)"
                )),
            },
        }
    }
}

impl TryFrom<String> for EnvSelector {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<EnvSelector> for String {
    fn from(e: EnvSelector) -> String {
        e.to_string()
    }
}

impl std::fmt::Display for EnvSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvSelector::Flappy => f.write_str("flappy"),
            EnvSelector::Car => f.write_str("car"),
            EnvSelector::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Builds the selected instance. `map` replaces the default Flappy map.
pub fn load_instance(
    env: &EnvSelector,
    map: Option<&std::path::Path>,
    human: HumanPolicyKind,
) -> Result<Instance> {
    match env {
        EnvSelector::Flappy => {
            let map = match map {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    GridMap::parse(&text).map_err(|e| match e {
                        Error::Parse { message, .. } => Error::Parse {
                            context: p.display().to_string(),
                            message,
                        },
                        other => other,
                    })?
                }
                None => GridMap::default_map(),
            };
            build_flappy(&FlappyConfig::new(map, human))
        }
        EnvSelector::Car => build_car(&CarConfig::default()),
        EnvSelector::File(p) => load_env_spec(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_round_trip() {
        for s in ["flappy", "car", "file:some/env.json"] {
            let e: EnvSelector = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert!("file:".parse::<EnvSelector>().is_err());
        assert!("grid".parse::<EnvSelector>().is_err());
    }
}
