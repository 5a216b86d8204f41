//! Dense JSON instance files.
//!
//! Keys: `S`, `A`, `H`, `s1`, `p[h][s][a][s']`, `r[h][s][a]`, `pi[h][s][a]`,
//! `theta[s][a]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{Error, Result};
use crate::kernel::KernelBuilder;
use crate::model::{AdherenceModel, HumanPolicy, TabularMdp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub num_actions: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    pub s1: usize,
    pub p: Vec<Vec<Vec<Vec<f64>>>>,
    pub r: Vec<Vec<Vec<f64>>>,
    pub pi: Vec<Vec<Vec<f64>>>,
    pub theta: Vec<Vec<f64>>,
}

fn check_len(what: &'static str, index: String, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::invalid(
            what,
            index,
            format!("expected length {expected}, found {actual}"),
        ));
    }
    Ok(())
}

impl EnvSpec {
    pub fn from_instance(inst: &Instance) -> Self {
        let mdp = &inst.mdp;
        let (horizon, num_states, num_actions) =
            (mdp.horizon(), mdp.num_states(), mdp.num_actions());
        let kernel = mdp.kernel();
        let grid = |f: &dyn Fn(usize, usize) -> Vec<f64>| -> Vec<Vec<Vec<f64>>> {
            (0..horizon)
                .map(|h| (0..num_states).map(|s| f(h, s)).collect())
                .collect()
        };
        EnvSpec {
            num_states,
            num_actions,
            horizon,
            s1: mdp.initial_state(),
            p: (0..horizon)
                .map(|h| {
                    (0..num_states)
                        .map(|s| {
                            (0..num_actions)
                                .map(|a| kernel.dense_row(h, s, a))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            r: grid(&|h, s| (0..num_actions).map(|a| mdp.reward(h, s, a)).collect()),
            pi: grid(&|h, s| inst.pi.row(h, s).to_vec()),
            theta: (0..num_states)
                .map(|s| (0..num_actions).map(|a| inst.theta.get(s, a)).collect())
                .collect(),
        }
    }

    /// Checks every nested length, then builds and validates the instance.
    pub fn to_instance(&self) -> Result<Instance> {
        let (hh, ss, aa) = (self.horizon, self.num_states, self.num_actions);
        check_len("p", "p".into(), hh, self.p.len())?;
        check_len("r", "r".into(), hh, self.r.len())?;
        check_len("pi", "pi".into(), hh, self.pi.len())?;
        check_len("theta", "theta".into(), ss, self.theta.len())?;
        for h in 0..hh {
            check_len("p", format!("p[{h}]"), ss, self.p[h].len())?;
            check_len("r", format!("r[{h}]"), ss, self.r[h].len())?;
            check_len("pi", format!("pi[{h}]"), ss, self.pi[h].len())?;
            for s in 0..ss {
                check_len("p", format!("p[{h}][{s}]"), aa, self.p[h][s].len())?;
                check_len("r", format!("r[{h}][{s}]"), aa, self.r[h][s].len())?;
                check_len("pi", format!("pi[{h}][{s}]"), aa, self.pi[h][s].len())?;
                for a in 0..aa {
                    check_len("p", format!("p[{h}][{s}][{a}]"), ss, self.p[h][s][a].len())?;
                }
            }
        }
        for s in 0..ss {
            check_len("theta", format!("theta[{s}]"), aa, self.theta[s].len())?;
        }

        let mut b = KernelBuilder::new(hh, ss, aa);
        for layer in &self.p {
            for state in layer {
                for row in state {
                    b.push_dense(row)?;
                }
            }
        }
        let flat3 =
            |t: &Vec<Vec<Vec<f64>>>| t.iter().flatten().flatten().copied().collect::<Vec<f64>>();
        let mdp = TabularMdp::new(b.finish()?, flat3(&self.r), self.s1)?;
        let pi = HumanPolicy::new(hh, ss, aa, flat3(&self.pi))?;
        let theta = AdherenceModel::new(ss, aa, self.theta.iter().flatten().copied().collect())?;
        Instance::new(mdp, pi, theta)
    }
}

pub fn parse_env_spec(json: &str, context: &str) -> Result<Instance> {
    let spec: EnvSpec = serde_json::from_str(json).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    spec.to_instance()
}

pub fn load_env_spec(path: &Path) -> Result<Instance> {
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_env_spec(&json, &path.display().to_string())
}

pub fn env_spec_json(inst: &Instance) -> String {
    serde_json::to_string(&EnvSpec::from_instance(inst)).expect("finite floats serialize")
}

pub fn save_env_spec(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, env_spec_json(inst)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{"S":2,"A":1,"H":1,"s1":0,
        "p":[[[[0.5,0.5]],[[0.0,1.0]]]],
        "r":[[[0.25],[1.0]]],
        "pi":[[[1.0],[1.0]]],
        "theta":[[0.5],[1.0]]}"#;

    #[test]
    fn tiny_spec_loads() {
        let inst = parse_env_spec(TINY, "tiny").unwrap();
        assert_eq!(inst.mdp.kernel().dense_row(0, 0, 0), vec![0.5, 0.5]);
        assert_eq!(inst.theta.get(0, 0), 0.5);
        let again = parse_env_spec(&env_spec_json(&inst), "again").unwrap();
        assert_eq!(env_spec_json(&again), env_spec_json(&inst));
    }

    #[test]
    fn missing_theta_is_a_parse_error() {
        let mut value: serde_json::Value = serde_json::from_str(TINY).unwrap();
        value.as_object_mut().unwrap().remove("theta");
        let json = value.to_string();
        let err = parse_env_spec(&json, "tiny").unwrap_err().to_string();
        assert!(err.contains("theta"), "{err}");
    }

    #[test]
    fn negative_probability_names_its_index() {
        let json = TINY.replace("[[0.0,1.0]]", "[[-0.5,1.5]]");
        let err = parse_env_spec(&json, "tiny").unwrap_err().to_string();
        assert!(err.contains("h=0, s=1, a=0, s'=0"), "{err}");
    }

    #[test]
    fn ragged_arrays_name_their_index() {
        let json = TINY.replace("[[0.0,1.0]]", "[[1.0]]");
        let err = parse_env_spec(&json, "tiny").unwrap_err().to_string();
        assert!(err.contains("p[0][1][0]"), "{err}");
    }
}
