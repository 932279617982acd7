//! Runtime selection of voting rules.
//!
//! Every rule is an object behind [`VotingRule`]: given whatever inputs are
//! on hand (true competences, an observed profile, priors), it either plans
//! a weight vector or declines to answer. Rules are registered by name in a
//! [`RuleRegistry`], so simulation configs and the command line can select
//! them as plain strings.

use crate::rules::{
    bayes_weights, hc_weights, lc_weights, majority_weights, np_weights, AdaptiveFallback,
};
use crate::types::{BetaPriorSet, Committee, CommitteeProfile, Error, WeightVector};
use crate::bounds::adaptive_gate;

/// Everything a rule might consult when planning its weights. Absent pieces
/// are rejected by the rules that need them.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleContext<'a> {
    pub committee: Option<&'a Committee>,
    pub profile: Option<&'a CommitteeProfile>,
    pub priors: Option<&'a BetaPriorSet>,
}

impl<'a> RuleContext<'a> {
    fn experts(&self, rule: &'static str) -> Result<usize, Error> {
        self.committee
            .map(Committee::len)
            .or_else(|| self.profile.map(CommitteeProfile::len))
            .ok_or(Error::MissingRuleInput {
                rule,
                what: "a committee or a profile to size the vote",
            })
    }

    fn committee(&self, rule: &'static str) -> Result<&'a Committee, Error> {
        self.committee.ok_or(Error::MissingRuleInput {
            rule,
            what: "known competences",
        })
    }

    fn profile(&self, rule: &'static str) -> Result<&'a CommitteeProfile, Error> {
        self.profile.ok_or(Error::MissingRuleInput {
            rule,
            what: "an observed profile",
        })
    }

    fn priors(&self, rule: &'static str) -> Result<&'a BetaPriorSet, Error> {
        self.priors.ok_or(Error::MissingRuleInput {
            rule,
            what: "a Beta prior set",
        })
    }
}

/// A rule's plan for one vote: weights to apply, or a refusal.
#[derive(Debug, Clone, PartialEq)]
pub enum RulePlan {
    Weights(WeightVector),
    Declined,
}

/// A weighting strategy selectable at runtime.
pub trait VotingRule: Send + Sync {
    /// Registry key, also used in result rows and CSV output.
    fn name(&self) -> &'static str;

    /// Whether the rule reads the observed profile at all.
    fn uses_profile(&self) -> bool;

    /// Whether every profile entry must have at least one query.
    fn requires_queries(&self) -> bool {
        false
    }

    /// Whether the rule needs a Beta prior set in its context.
    fn requires_priors(&self) -> bool {
        false
    }

    /// Plans the weights for one vote from the available inputs.
    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error>;
}

/// Log-odds weights from known competences; the error-optimal rule.
pub struct OptimalRule;

impl VotingRule for OptimalRule {
    fn name(&self) -> &'static str {
        "opt"
    }

    fn uses_profile(&self) -> bool {
        false
    }

    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error> {
        Ok(RulePlan::Weights(np_weights(ctx.committee(self.name())?)))
    }
}

/// Unit weights; the simple majority rule.
pub struct MajorityRule;

impl VotingRule for MajorityRule {
    fn name(&self) -> &'static str {
        "maj"
    }

    fn uses_profile(&self) -> bool {
        false
    }

    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error> {
        Ok(RulePlan::Weights(majority_weights(
            ctx.experts(self.name())?,
        )?))
    }
}

/// Centered empirical estimates `k/m - 1/2`.
pub struct LowConfidenceRule;

impl VotingRule for LowConfidenceRule {
    fn name(&self) -> &'static str {
        "lc"
    }

    fn uses_profile(&self) -> bool {
        true
    }

    fn requires_queries(&self) -> bool {
        true
    }

    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error> {
        Ok(RulePlan::Weights(lc_weights(ctx.profile(self.name())?)?))
    }
}

/// Plug-in log-odds of the empirical estimates, infinities included.
pub struct HighConfidenceRule;

impl VotingRule for HighConfidenceRule {
    fn name(&self) -> &'static str {
        "hc"
    }

    fn uses_profile(&self) -> bool {
        true
    }

    fn requires_queries(&self) -> bool {
        true
    }

    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error> {
        Ok(RulePlan::Weights(hc_weights(ctx.profile(self.name())?)?))
    }
}

/// Gate-checked plug-in rule: answers with the high-confidence weights only
/// when the confidence gate holds, otherwise declines or falls back.
pub struct AdaptiveRule {
    pub fallback: AdaptiveFallback,
}

impl VotingRule for AdaptiveRule {
    fn name(&self) -> &'static str {
        "adapt"
    }

    fn uses_profile(&self) -> bool {
        true
    }

    fn requires_queries(&self) -> bool {
        true
    }

    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error> {
        let profile = ctx.profile(self.name())?;
        let gate = adaptive_gate(profile)?;
        if gate.holds {
            return Ok(RulePlan::Weights(hc_weights(profile)?));
        }
        match self.fallback {
            AdaptiveFallback::Decline => Ok(RulePlan::Declined),
            AdaptiveFallback::LowConfidence => Ok(RulePlan::Weights(lc_weights(profile)?)),
        }
    }
}

/// Posterior log-odds under Beta priors; finite even with empty records.
pub struct BayesRule;

impl VotingRule for BayesRule {
    fn name(&self) -> &'static str {
        "bayes"
    }

    fn uses_profile(&self) -> bool {
        true
    }

    fn requires_priors(&self) -> bool {
        true
    }

    fn plan(&self, ctx: &RuleContext<'_>) -> Result<RulePlan, Error> {
        Ok(RulePlan::Weights(bayes_weights(
            ctx.profile(self.name())?,
            ctx.priors(self.name())?,
        )?))
    }
}

/// Name-indexed collection of voting rules.
pub struct RuleRegistry {
    rules: Vec<Box<dyn VotingRule>>,
}

impl RuleRegistry {
    /// The six standard rules, with the adaptive rule declining on gate
    /// failure.
    pub fn standard() -> Self {
        Self::with_fallback(AdaptiveFallback::Decline)
    }

    /// The standard rules with a configured adaptive fallback.
    pub fn with_fallback(fallback: AdaptiveFallback) -> Self {
        let mut registry = Self { rules: Vec::new() };
        registry.register(Box::new(OptimalRule));
        registry.register(Box::new(MajorityRule));
        registry.register(Box::new(LowConfidenceRule));
        registry.register(Box::new(HighConfidenceRule));
        registry.register(Box::new(AdaptiveRule { fallback }));
        registry.register(Box::new(BayesRule));
        registry
    }

    /// Adds a rule, replacing any registered rule of the same name.
    pub fn register(&mut self, rule: Box<dyn VotingRule>) {
        self.rules.retain(|r| r.name() != rule.name());
        self.rules.push(rule);
    }

    pub fn get(&self, name: &str) -> Result<&dyn VotingRule, Error> {
        self.rules
            .iter()
            .find(|r| r.name() == name)
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::UnknownRule(name.to_string()))
    }

    /// Registered names in registration order.
    pub fn names(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.name()).collect()
    }

    /// Resolves a list of names, preserving order.
    pub fn resolve(&self, names: &[String]) -> Result<Vec<&dyn VotingRule>, Error> {
        names.iter().map(|n| self.get(n)).collect()
    }
}

impl Default for RuleRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
