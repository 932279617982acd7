//! Monte Carlo experiment drivers.
//!
//! A run draws, per trial, whatever the configuration leaves random (the
//! committee under a Beta source, the track records, and for the plain
//! Monte Carlo estimator the vote itself) and scores every selected rule on
//! the same draws. Each trial gets its own counter-derived RNG stream, so
//! results are bit-identical no matter how many threads execute the trials.

pub mod gap;
pub mod rng;
pub mod sample;

use rayon::prelude::*;

use crate::bounds::adaptive_gate;
use crate::exact::{exact_error, ErrorEstimate, PairwiseAccumulator, ENUMERATION_CAP};
use crate::registry::{RuleContext, RulePlan, RuleRegistry};
use crate::rules::{decide, hc_weights, AdaptiveFallback};
use crate::types::{check_same_length, BetaPriorSet, Committee, Error};

use self::rng::{derive_seed, stream_rng};
use self::sample::{sample_competences, sample_outcome, sample_profile};

/// Where each trial's competences come from: a fixed committee, or a fresh
/// draw from independent Beta priors.
#[derive(Debug, Clone, PartialEq)]
pub enum CompetenceSource {
    Fixed(Committee),
    BetaDraw(BetaPriorSet),
}

impl CompetenceSource {
    pub fn experts(&self) -> usize {
        match self {
            CompetenceSource::Fixed(c) => c.len(),
            CompetenceSource::BetaDraw(p) => p.len(),
        }
    }
}

/// How per-trial errors are scored.
///
/// `MonteCarlo` samples one vote per trial and counts mistakes.
/// `RaoBlackwell` replaces the sampled vote by the exact conditional error
/// of the planned weights given the trial's committee and records, which
/// estimates the same mean at equal or lower variance but needs the
/// committee small enough to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    MonteCarlo,
    RaoBlackwell,
}

/// Full description of one experiment.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub source: CompetenceSource,
    /// Past queries `m_i` observed for each expert.
    pub queries: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    /// Registry names of the rules to score, e.g. `"opt"`, `"bayes"`.
    pub rules: Vec<String>,
    /// Priors for the Bayes rule. When absent, a Beta competence source
    /// doubles as the prior set.
    pub priors: Option<BetaPriorSet>,
    pub fallback: AdaptiveFallback,
    pub estimator: Estimator,
    /// Rayon thread count; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// At most this many rules can be scored in one run.
pub const MAX_RULES: usize = 32;

impl SimConfig {
    pub fn experts(&self) -> usize {
        self.source.experts()
    }

    /// The prior set the Bayes rule should weight with: an explicit override
    /// first, otherwise the priors the committee is drawn from.
    pub fn effective_priors(&self) -> Option<&BetaPriorSet> {
        self.priors.as_ref().or(match &self.source {
            CompetenceSource::BetaDraw(p) => Some(p),
            CompetenceSource::Fixed(_) => None,
        })
    }

    /// Checks every cross-field requirement. `run` calls this first, so a
    /// bad configuration never burns trials before failing.
    pub fn validate(&self) -> Result<(), Error> {
        if self.rules.is_empty() {
            return Err(Error::ParameterOutOfRange {
                name: "rules",
                value: 0.0,
                constraint: "select at least one rule",
            });
        }
        if self.rules.len() > MAX_RULES {
            return Err(Error::ParameterOutOfRange {
                name: "rules",
                value: self.rules.len() as f64,
                constraint: "at most 32 rules per run",
            });
        }
        if self.trials == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "trials",
                value: 0.0,
                constraint: "at least one trial",
            });
        }
        if self.threads == Some(0) {
            return Err(Error::ParameterOutOfRange {
                name: "threads",
                value: 0.0,
                constraint: "at least one thread",
            });
        }
        let n = self.experts();
        check_same_length(n, self.queries.len())?;
        if self.estimator == Estimator::RaoBlackwell && n > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                n,
                cap: ENUMERATION_CAP,
            });
        }
        if let Some(priors) = self.effective_priors() {
            check_same_length(n, priors.len())?;
        }
        let registry = RuleRegistry::with_fallback(self.fallback);
        for rule in registry.resolve(&self.rules)? {
            if rule.requires_queries() && self.queries.contains(&0) {
                return Err(Error::MissingRuleInput {
                    rule: rule.name(),
                    what: "at least one past query per expert",
                });
            }
            if rule.requires_priors() && self.effective_priors().is_none() {
                return Err(Error::MissingRuleInput {
                    rule: rule.name(),
                    what: "a Beta prior set",
                });
            }
        }
        Ok(())
    }
}

/// One rule's estimated error probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleEstimate {
    pub rule: &'static str,
    pub estimate: ErrorEstimate,
}

/// Runs the configured experiment and returns one estimate per rule, in the
/// order the rules were selected.
pub fn run(config: &SimConfig) -> Result<Vec<RuleEstimate>, Error> {
    config.validate()?;
    with_pool(config.threads, || match config.estimator {
        Estimator::MonteCarlo => mc_error(config),
        Estimator::RaoBlackwell => rb_error(config),
    })
}

/// Runs `f` inside a dedicated pool of `threads` workers, or on the global
/// pool when unspecified. Thread count never changes results, only speed.
fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool construction")
            .install(f),
        None => f(),
    }
}

/// Turns per-trial outcomes into a mean and standard error using a fixed
/// pairwise reduction, so the result is independent of how the trials were
/// scheduled across threads.
fn summarize(values: &[f64], seed: u64) -> ErrorEstimate {
    let trials = values.len() as f64;
    let mut sum = PairwiseAccumulator::default();
    let mut sum_sq = PairwiseAccumulator::default();
    for &x in values {
        sum.push(x);
        sum_sq.push(x * x);
    }
    let mean = sum.total() / trials;
    let variance = if values.len() > 1 {
        ((sum_sq.total() - trials * mean * mean) / (trials - 1.0)).max(0.0)
    } else {
        0.0
    };
    ErrorEstimate::monte_carlo(mean, (variance / trials).sqrt(), seed, values.len() as u64)
}

fn collect_trials<T: Send, F: Fn(u64) -> Result<T, Error> + Sync + Send>(
    trials: u64,
    per_trial: F,
) -> Result<Vec<T>, Error> {
    let results: Vec<Result<T, Error>> = (0..trials).into_par_iter().map(per_trial).collect();
    results.into_iter().collect()
}

fn mc_error(config: &SimConfig) -> Result<Vec<RuleEstimate>, Error> {
    let registry = RuleRegistry::with_fallback(config.fallback);
    let rules = registry.resolve(&config.rules)?;
    let priors = config.effective_priors();
    // One bit per rule marks whether it erred on the trial's sampled vote.
    let masks = collect_trials(config.trials, |trial| {
        let mut rng = stream_rng(config.seed, trial);
        let drawn;
        let committee = match &config.source {
            CompetenceSource::Fixed(c) => c,
            CompetenceSource::BetaDraw(p) => {
                drawn = sample_competences(p, &mut rng);
                &drawn
            }
        };
        let profile = sample_profile(committee, &config.queries, &mut rng)?;
        let (truth, votes) = sample_outcome(committee, &mut rng);
        let ctx = RuleContext {
            committee: Some(committee),
            profile: Some(&profile),
            priors,
        };
        let mut mask = 0u32;
        for (j, rule) in rules.iter().enumerate() {
            let errored = match rule.plan(&ctx)? {
                RulePlan::Weights(w) => !decide(&w, &votes)?.matches(truth),
                RulePlan::Declined => true,
            };
            if errored {
                mask |= 1 << j;
            }
        }
        Ok(mask)
    })?;
    Ok(rules
        .iter()
        .enumerate()
        .map(|(j, rule)| {
            let count = masks.iter().filter(|&&m| m & (1 << j) != 0).count();
            let value = count as f64 / config.trials as f64;
            let stderr = (value * (1.0 - value) / config.trials as f64).sqrt();
            RuleEstimate {
                rule: rule.name(),
                estimate: ErrorEstimate::monte_carlo(value, stderr, config.seed, config.trials),
            }
        })
        .collect())
}

fn rb_error(config: &SimConfig) -> Result<Vec<RuleEstimate>, Error> {
    let n = config.experts();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let registry = RuleRegistry::with_fallback(config.fallback);
    let rules = registry.resolve(&config.rules)?;
    let priors = config.effective_priors();
    // Each trial contributes every rule's exact conditional error given the
    // drawn committee and records; a declined plan always errs.
    let rows = collect_trials(config.trials, |trial| {
        let mut rng = stream_rng(config.seed, trial);
        let drawn;
        let committee = match &config.source {
            CompetenceSource::Fixed(c) => c,
            CompetenceSource::BetaDraw(p) => {
                drawn = sample_competences(p, &mut rng);
                &drawn
            }
        };
        let profile = sample_profile(committee, &config.queries, &mut rng)?;
        let ctx = RuleContext {
            committee: Some(committee),
            profile: Some(&profile),
            priors,
        };
        rules
            .iter()
            .map(|rule| match rule.plan(&ctx)? {
                RulePlan::Weights(w) => Ok(exact_error(committee, &w)?.value()),
                RulePlan::Declined => Ok(1.0),
            })
            .collect::<Result<Vec<f64>, Error>>()
    })?;
    Ok(rules
        .iter()
        .enumerate()
        .map(|(j, rule)| {
            let values: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            RuleEstimate {
                rule: rule.name(),
                estimate: summarize(&values, config.seed),
            }
        })
        .collect())
}

/// An experiment repeated over a grid of history lengths, every expert
/// observed for the same `m` at each grid point.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub source: CompetenceSource,
    pub m_grid: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub rules: Vec<String>,
    pub priors: Option<BetaPriorSet>,
    pub fallback: AdaptiveFallback,
    pub estimator: Estimator,
    pub threads: Option<usize>,
}

/// One grid point of a sweep: the rule's error after `m` queries per expert.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: u64,
    pub rule: &'static str,
    pub estimate: ErrorEstimate,
}

/// Sweeps the history length over `m_grid`. Within a grid point all rules
/// score the same draws; each point gets its own seed derived from the grid
/// index, so extending the grid never changes earlier rows.
///
/// Rules that ignore the profile have a deterministic error under a fixed
/// committee; those rows are computed exactly (when the committee fits the
/// enumeration cap) instead of sampled.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, Error> {
    if config.m_grid.is_empty() {
        return Err(Error::ParameterOutOfRange {
            name: "m_grid",
            value: 0.0,
            constraint: "at least one grid point",
        });
    }
    let n = config.source.experts();
    let registry = RuleRegistry::with_fallback(config.fallback);
    let rules = registry.resolve(&config.rules)?;

    let mut fixed_rows: Vec<Option<ErrorEstimate>> = vec![None; rules.len()];
    if let CompetenceSource::Fixed(committee) = &config.source {
        if committee.len() <= ENUMERATION_CAP {
            let ctx = RuleContext {
                committee: Some(committee),
                profile: None,
                priors: config.priors.as_ref(),
            };
            for (j, rule) in rules.iter().enumerate() {
                if !rule.uses_profile() {
                    fixed_rows[j] = Some(match rule.plan(&ctx)? {
                        RulePlan::Weights(w) => exact_error(committee, &w)?,
                        RulePlan::Declined => ErrorEstimate::exact(1.0),
                    });
                }
            }
        }
    }
    let sampled: Vec<String> = rules
        .iter()
        .zip(&fixed_rows)
        .filter(|(_, fixed)| fixed.is_none())
        .map(|(rule, _)| rule.name().to_string())
        .collect();

    let mut rows = Vec::with_capacity(config.m_grid.len() * rules.len());
    for (g, &m) in config.m_grid.iter().enumerate() {
        let estimates = if sampled.is_empty() {
            Vec::new()
        } else {
            run(&SimConfig {
                source: config.source.clone(),
                queries: vec![m; n],
                trials: config.trials,
                seed: derive_seed(config.seed, g as u64),
                rules: sampled.clone(),
                priors: config.priors.clone(),
                fallback: config.fallback,
                estimator: config.estimator,
                threads: config.threads,
            })?
        };
        let mut estimates = estimates.into_iter();
        for (rule, fixed) in rules.iter().zip(&fixed_rows) {
            let estimate = match fixed {
                Some(exact) => exact.clone(),
                None => {
                    estimates
                        .next()
                        .expect("run returns one estimate per sampled rule")
                        .estimate
                }
            };
            rows.push(SweepRow {
                m,
                rule: rule.name(),
                estimate,
            });
        }
    }
    Ok(rows)
}

/// Sweep comparing the optimal and majority baselines against the empirical
/// rules on one fixed committee, with flat priors for the Bayes rule and the
/// conditional-error estimator throughout.
pub fn contrast_sweep(
    committee: &Committee,
    m_grid: &[u64],
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>, Error> {
    let priors = BetaPriorSet::uniform(committee.len())?;
    sweep(&SweepConfig {
        source: CompetenceSource::Fixed(committee.clone()),
        m_grid: m_grid.to_vec(),
        trials,
        seed,
        rules: ["opt", "maj", "lc", "hc", "bayes"]
            .map(String::from)
            .to_vec(),
        priors: Some(priors),
        fallback: AdaptiveFallback::Decline,
        estimator: Estimator::RaoBlackwell,
        threads,
    })
}

/// Sweep in the well-specified Bayesian setting: competences drawn from flat
/// priors each trial, the empirical rules scored against the majority
/// baseline. The Bayes rule weights with the same priors the committee is
/// drawn from.
pub fn bayes_sweep(
    n: usize,
    m_grid: &[u64],
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>, Error> {
    let priors = BetaPriorSet::uniform(n)?;
    sweep(&SweepConfig {
        source: CompetenceSource::BetaDraw(priors),
        m_grid: m_grid.to_vec(),
        trials,
        seed,
        rules: ["maj", "lc", "hc", "bayes"].map(String::from).to_vec(),
        priors: None,
        fallback: AdaptiveFallback::Decline,
        estimator: Estimator::RaoBlackwell,
        threads,
    })
}

/// The adaptive rule's joint risk on one committee: the probability that the
/// confidence gate admits the plug-in weights and their vote then errs.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveJointReport {
    /// The budget `sum_i 1 / sqrt(m_i)` the joint risk is guaranteed to stay
    /// under.
    pub delta: f64,
    pub estimate: ErrorEstimate,
}

/// Estimates the joint probability that the adaptive gate holds and the
/// plug-in vote errs, by conditioning on each trial's records: given a
/// profile, the gate is determined and the vote's error is exact.
pub fn adaptive_joint_error(
    committee: &Committee,
    queries: &[u64],
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<AdaptiveJointReport, Error> {
    check_same_length(committee.len(), queries.len())?;
    if committee.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n: committee.len(),
            cap: ENUMERATION_CAP,
        });
    }
    if queries.contains(&0) {
        return Err(Error::MissingRuleInput {
            rule: "adapt",
            what: "at least one past query per expert",
        });
    }
    if trials == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "trials",
            value: 0.0,
            constraint: "at least one trial",
        });
    }
    let delta: f64 = queries.iter().map(|&m| 1.0 / (m as f64).sqrt()).sum();
    let estimate = with_pool(threads, || -> Result<ErrorEstimate, Error> {
        let joint = collect_trials(trials, |trial| {
            let mut rng = stream_rng(seed, trial);
            let profile = sample_profile(committee, queries, &mut rng)?;
            if !adaptive_gate(&profile)?.holds {
                return Ok(0.0);
            }
            Ok(exact_error(committee, &hc_weights(&profile)?)?.value())
        })?;
        Ok(summarize(&joint, seed))
    })?;
    Ok(AdaptiveJointReport { delta, estimate })
}
