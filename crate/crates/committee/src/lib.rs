//! Weighted majority voting for committees of independent experts.
//!
//! A committee of `n` experts answers a binary question; expert `i` is
//! correct with its own probability `p_i`, independently of the others. The
//! crate covers the resulting decision theory end to end:
//!
//! - [`rules`] builds weight vectors: the error-optimal log-odds weights for
//!   known competences, the unit majority weights, and empirical weights
//!   estimated from observed track records (centered, plug-in log-odds,
//!   gated adaptive and Bayesian posterior variants).
//! - [`registry`] puts every rule behind one object-safe trait so simulation
//!   configs and the command line can pick rules by name at runtime.
//! - [`exact`] computes exact error probabilities and score moments by
//!   enumerating all `2^n` correctness patterns of small committees.
//! - [`bounds`] evaluates the analytic machinery: the committee potential,
//!   upper and lower bounds on the optimal error, sub-Gaussian constants,
//!   and feasibility checks for the empirical rules.
//! - [`sim`] runs seeded, thread-count-independent Monte Carlo experiments
//!   comparing the rules, plus a search for committees where the centered
//!   rule is measurably suboptimal.
//!
//! Votes live on `{+1, -1}`. A weighted vote answers with the sign of
//! `sum_i w_i x_i`; exact ties and conflicting infinite weights abstain,
//! and an abstention is always scored as an error.

pub mod bounds;
pub mod exact;
pub mod registry;
pub mod rules;
pub mod sim;
pub mod types;

pub use types::{
    BetaPriorSet, Committee, CommitteeProfile, CorrectnessAtom, Decision, Error, Sign,
    TrackRecord, WeightVector,
};
