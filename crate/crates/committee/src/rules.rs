//! Weighting rules and the weighted-majority decision.
//!
//! A committee votes on a binary question; the aggregate answers
//! `sign(sum_i w_i x_i)` for votes `x_i` in {+1, -1}. With known
//! competences the error-minimizing weights are the log-odds
//!
//! ```text
//! w_i = log(p_i / (1 - p_i))
//! ```
//!
//! When competences are only estimated from track records, the empirical
//! counterparts are the low-confidence rule `k/m - 1/2` (usable after a
//! single query), the high-confidence plug-in `log(phat / (1 - phat))`
//! (infinite on perfect or zero records), and the Bayesian posterior
//! log-odds `log((alpha + k) / (beta + m - k))` (always finite).

use crate::bounds;
use crate::types::{
    check_same_length, BetaPriorSet, Committee, CommitteeProfile, Decision, Error, Sign,
    WeightVector,
};

/// Log-odds weights `w_i = log(p_i / (1 - p_i))` for known competences.
/// Finite because competences are strictly inside (0, 1).
pub fn np_weights(committee: &Committee) -> WeightVector {
    let weights = committee
        .competences()
        .iter()
        .map(|&p| (p / (1.0 - p)).ln())
        .collect();
    WeightVector::new(weights).expect("log-odds of interior probabilities are never NaN")
}

/// Unit weights: the simple majority rule over `n` experts.
pub fn majority_weights(n: usize) -> Result<WeightVector, Error> {
    if n == 0 {
        return Err(Error::EmptyCommittee);
    }
    Ok(WeightVector::new(vec![1.0; n]).expect("unit weights are finite"))
}

/// First-order weights `p_i - 1/2` computed from known competences. This is
/// the infinite-sample limit of [`lc_weights`] and the reference rule in the
/// optimality-gap search.
pub fn lc_known_weights(committee: &Committee) -> WeightVector {
    let weights = committee.competences().iter().map(|&p| p - 0.5).collect();
    WeightVector::new(weights).expect("shifted interior probabilities are never NaN")
}

/// Low-confidence empirical weights `k_i / m_i - 1/2`, each in [-1/2, 1/2].
/// Every expert needs at least one recorded query.
pub fn lc_weights(profile: &CommitteeProfile) -> Result<WeightVector, Error> {
    profile.require_positive_queries()?;
    let weights = profile
        .records()
        .iter()
        .map(|r| r.estimate() - 0.5)
        .collect();
    Ok(WeightVector::new(weights).expect("empirical estimates are never NaN"))
}

/// High-confidence plug-in weights `log(phat_i / (1 - phat_i))`. A perfect
/// record maps to +inf and an all-wrong record to -inf, explicitly; these are
/// honored downstream by [`decide`].
pub fn hc_weights(profile: &CommitteeProfile) -> Result<WeightVector, Error> {
    profile.require_positive_queries()?;
    let weights = profile
        .records()
        .iter()
        .map(|r| {
            let failures = r.queries - r.successes;
            if r.successes == 0 {
                f64::NEG_INFINITY
            } else if failures == 0 {
                f64::INFINITY
            } else {
                // log(k / (m - k)); equals the plug-in log-odds exactly.
                (r.successes as f64).ln() - (failures as f64).ln()
            }
        })
        .collect();
    Ok(WeightVector::new(weights).expect("plug-in log-odds are never NaN"))
}

/// Bayesian posterior log-odds weights `log((alpha_i + k_i) / (beta_i + m_i - k_i))`
/// under independent Beta(alpha_i, beta_i) priors. Finite for any record,
/// including `m_i = 0`, where the weight is the prior log-odds.
pub fn bayes_weights(
    profile: &CommitteeProfile,
    priors: &BetaPriorSet,
) -> Result<WeightVector, Error> {
    check_same_length(profile.len(), priors.len())?;
    let weights = profile
        .records()
        .iter()
        .zip(priors.params())
        .map(|(r, &(alpha, beta))| {
            let failures = (r.queries - r.successes) as f64;
            (alpha + r.successes as f64).ln() - (beta + failures).ln()
        })
        .collect();
    Ok(WeightVector::new(weights).expect("posterior log-odds are never NaN"))
}

/// Signed verdict of a weighted vote over signs supplied per index.
///
/// Infinite weights are resolved first: infinities pulling in both directions
/// are irreducible and abstain, a single direction of infinity decides, and
/// otherwise the finite total decides with an exact zero abstaining.
pub(crate) fn weighted_verdict<F>(weights: &[f64], sign_at: F) -> Decision
where
    F: Fn(usize) -> Sign,
{
    let mut pos_inf = false;
    let mut neg_inf = false;
    let mut total = 0.0_f64;
    for (i, &w) in weights.iter().enumerate() {
        let s = sign_at(i);
        if w.is_infinite() {
            let positive = (w > 0.0) == matches!(s, Sign::Plus);
            if positive {
                pos_inf = true;
            } else {
                neg_inf = true;
            }
        } else {
            total += w * s.as_f64();
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Decision::Abstain,
        (true, false) => Decision::Plus,
        (false, true) => Decision::Minus,
        (false, false) => {
            if total > 0.0 {
                Decision::Plus
            } else if total < 0.0 {
                Decision::Minus
            } else {
                Decision::Abstain
            }
        }
    }
}

/// Weighted majority decision `sign(sum_i w_i x_i)` over votes in {+1, -1}.
pub fn decide(weights: &WeightVector, votes: &[Sign]) -> Result<Decision, Error> {
    check_same_length(weights.len(), votes.len())?;
    Ok(weighted_verdict(weights.as_slice(), |i| votes[i]))
}

/// What the adaptive rule does when its confidence gate fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdaptiveFallback {
    /// Refuse to answer; scored as an error wherever a score is needed.
    #[default]
    Decline,
    /// Fall back to the low-confidence rule.
    LowConfidence,
}

/// Outcome of the adaptive rule: either a vote decision or a refusal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveOutcome {
    Decided(Decision),
    Declined,
}

/// The adaptive empirical rule: consult the confidence gate on the observed
/// profile; when it holds, decide with the high-confidence weights, otherwise
/// decline (or, if configured, fall back to the low-confidence rule).
pub fn adaptive_rule(
    profile: &CommitteeProfile,
    votes: &[Sign],
    fallback: AdaptiveFallback,
) -> Result<AdaptiveOutcome, Error> {
    check_same_length(profile.len(), votes.len())?;
    let gate = bounds::adaptive_gate(profile)?;
    if gate.holds {
        let weights = hc_weights(profile)?;
        return Ok(AdaptiveOutcome::Decided(decide(&weights, votes)?));
    }
    match fallback {
        AdaptiveFallback::Decline => Ok(AdaptiveOutcome::Declined),
        AdaptiveFallback::LowConfidence => {
            let weights = lc_weights(profile)?;
            Ok(AdaptiveOutcome::Decided(decide(&weights, votes)?))
        }
    }
}
