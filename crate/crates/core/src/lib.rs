//! Adherence-aware advice over episodic tabular MDPs.
//!
//! A human acts in an episodic MDP with a fixed policy. A machine may advise
//! an action at each step, and the human follows the advice with a
//! state-action dependent probability (the adherence level), or defers to the
//! human entirely. This crate builds the machine's induced MDP, plans optimal,
//! penalized ("pertinent") and budget-constrained advice policies, and learns
//! them online: with optimistic adherence estimates when the environment is
//! known, and with reward-free exploration when it is not.

pub mod cli;
pub mod envs;
pub mod error;
pub mod kernel;
pub mod machine;
pub mod model;
pub mod pertinence;
pub mod planning;
pub mod policy;
pub mod rfe;
pub mod sim;
pub mod ucb;

pub use error::{Error, Result};
pub use machine::{build_machine_mdp, human_action_distribution, MachineMdp};
pub use model::{AdherenceModel, HumanPolicy, TabularMdp};
pub use policy::{
    AdvicePolicy, DeterministicPolicy, MixturePolicy, OccupancyMeasure, QTable, ValueTable,
};
