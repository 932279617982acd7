//! Analytic error bounds and confidence machinery for weighted majority
//! votes.
//!
//! The central quantity is the committee potential
//!
//! ```text
//! phi = sum_i (p_i - 1/2) log(p_i / (1 - p_i))
//! ```
//!
//! a nonnegative measure of how much systematic signal the committee
//! carries. With the optimal log-odds weights, the vote's error probability
//! is sandwiched by
//!
//! ```text
//! 3 / (4 (1 + exp(2 phi + 4 sqrt(phi))))  <=  P(error)  <=  exp(-phi / 2)
//! ```
//!
//! The remaining items are companions to that estimate: a (weaker) Hoeffding
//! upper bound for comparison, a sample-free bound for the low-confidence
//! rule, the sharpened exponential-moment inequality behind the upper bound,
//! finite-sample guarantees for the plug-in rule, and the confidence gate of
//! the adaptive rule.

use crate::rules::{hc_weights, np_weights};
use crate::types::{check_same_length, Committee, CommitteeProfile, Error};

/// Committee potential `sum_i (p_i - 1/2) log(p_i / (1 - p_i))`. Every
/// summand is nonnegative, so the total is too; it is zero exactly when all
/// competences equal 1/2.
pub fn committee_potential(committee: &Committee) -> f64 {
    committee
        .competences()
        .iter()
        .map(|&p| (p - 0.5) * (p / (1.0 - p)).ln())
        .sum()
}

fn check_phi(phi: f64) -> Result<(), Error> {
    if phi.is_nan() || phi < 0.0 {
        return Err(Error::ParameterOutOfRange {
            name: "phi",
            value: phi,
            constraint: "phi >= 0",
        });
    }
    Ok(())
}

/// Upper bound `exp(-phi / 2)` on the optimal rule's error probability.
pub fn upper_bound_opt(phi: f64) -> Result<f64, Error> {
    check_phi(phi)?;
    Ok((-phi / 2.0).exp())
}

/// Lower bound `3 / (4 (1 + exp(2 phi + 4 sqrt(phi))))` on the optimal
/// rule's error probability. Equals 3/8 at `phi = 0` and decays to zero;
/// together with [`upper_bound_opt`] it pins the error rate to within the
/// constants in the exponent.
pub fn lower_bound_opt(phi: f64) -> Result<f64, Error> {
    check_phi(phi)?;
    Ok(3.0 / (4.0 * (1.0 + (2.0 * phi + 4.0 * phi.sqrt()).exp())))
}

/// Hoeffding-style upper bound `exp(-2 phi^2 / sum_i w_i^2)` with the
/// log-odds weights. Defined as 1 (vacuous) for the all-half committee,
/// where both numerator and denominator vanish. Kept for comparison: it is
/// dominated by [`upper_bound_opt`] and can be far cruder for strong experts.
pub fn hoeffding_bound(committee: &Committee) -> f64 {
    let weights = np_weights(committee);
    let sum_sq: f64 = weights.as_slice().iter().map(|w| w * w).sum();
    if sum_sq == 0.0 {
        return 1.0;
    }
    let phi = committee_potential(committee);
    (-2.0 * phi * phi / sum_sq).exp()
}

/// Upper bound `exp(-(8/n) (sum_i (p_i - 1/2)^2)^2)` on the low-confidence
/// rule's error probability. Holds for any record sizes, even a single query
/// per expert.
pub fn lc_error_bound(committee: &Committee) -> f64 {
    let n = committee.len() as f64;
    let s: f64 = committee
        .competences()
        .iter()
        .map(|&p| (p - 0.5) * (p - 0.5))
        .sum();
    (-(8.0 / n) * s * s).exp()
}

fn check_open_unit(name: &'static str, x: f64) -> Result<(), Error> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name,
            value: x,
            constraint: "strictly inside (0, 1)",
        });
    }
    Ok(())
}

/// Coefficient `c(p) = (1 - 2p) / (4 log((1 - p) / p))` of the sharpened
/// exponential-moment bound, extended by continuity to `c(1/2) = 1/8`.
/// Always in (0, 1/8]: numerator and denominator share their sign.
pub fn kearns_saul_coefficient(p: f64) -> Result<f64, Error> {
    check_open_unit("p", p)?;
    let u = p - 0.5;
    if u.abs() < 1e-5 {
        // Series around the removable singularity:
        // c(1/2 + u) = (1/8) (1 - (4/3) u^2 + O(u^4)).
        return Ok(0.125 * (1.0 - (4.0 / 3.0) * u * u));
    }
    Ok((1.0 - 2.0 * p) / (4.0 * ((1.0 - p) / p).ln()))
}

/// Both sides of the Kearns-Saul inequality
///
/// ```text
/// (1 - p) exp(-t p) + p exp(t (1 - p))  <=  exp(c(p) t^2)
/// ```
///
/// as `(lhs, rhs)`. The left side is the exponential moment of a centered
/// Bernoulli(p); the right side improves on Hoeffding's `exp(t^2 / 8)` for
/// biased `p` and this sharpening is what drives [`upper_bound_opt`].
pub fn kearns_saul_gap(p: f64, t: f64) -> Result<(f64, f64), Error> {
    check_open_unit("p", p)?;
    if !t.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "t",
            value: t,
            constraint: "finite",
        });
    }
    let lhs = (1.0 - p) * (-t * p).exp() + p * (t * (1.0 - p)).exp();
    let rhs = (kearns_saul_coefficient(p)? * t * t).exp();
    Ok((lhs, rhs))
}

/// The ratio `x (1 - x) log(x / (1 - x)) / (2x - 1)`, extended by continuity
/// to 1/2 at `x = 1/2`, where it attains its supremum.
///
/// For an expert with competence `p` and log-odds weight `w`, the score
/// variance term `4 p q w^2` and the potential term `(p - 1/2) w` satisfy
/// `4 p q w^2 = 8 F(p) (p - 1/2) w`, so `F <= 1/2` is exactly the statement
/// that the score variance is at most four times the potential.
pub fn variance_potential_ratio(x: f64) -> Result<f64, Error> {
    check_open_unit("x", x)?;
    let u = x - 0.5;
    if u.abs() < 1e-5 {
        // Series around the removable singularity:
        // F(1/2 + u) = 1/2 - (4/3) u^2 - (16/15) u^4 + O(u^6).
        return Ok(0.5 - (4.0 / 3.0) * u * u - (16.0 / 15.0) * u * u * u * u);
    }
    Ok(x * (1.0 - x) * (x.ln() - (1.0 - x).ln()) / (2.0 * x - 1.0))
}

/// The unique positive solution of `2 e + 4 e^2 = eps`, namely
/// `(sqrt(4 eps + 1) - 1) / 4`. This is the relative estimation accuracy
/// that translates into an additive weight error of `eps`; valid for
/// `0 < eps <= 5`.
pub fn eps_tilde(eps: f64) -> Result<f64, Error> {
    if !(eps > 0.0 && eps <= 5.0) {
        return Err(Error::ParameterOutOfRange {
            name: "eps",
            value: eps,
            constraint: "0 < eps <= 5",
        });
    }
    Ok(((4.0 * eps + 1.0).sqrt() - 1.0) / 4.0)
}

/// Checks one expert's weight-perturbation implication: if both `phat / p`
/// and `qhat / q` lie within `1 -+ eps_tilde(eps)`, then the plug-in log-odds
/// weight differs from the true one by at most `eps`. Returns true when the
/// implication holds (vacuously so when the hypothesis fails). The estimate
/// may sit on the closed interval [0, 1]; boundary estimates always fail the
/// hypothesis.
pub fn weight_perturbation_check(p: f64, p_hat: f64, eps: f64) -> Result<bool, Error> {
    check_open_unit("p", p)?;
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::ParameterOutOfRange {
            name: "p_hat",
            value: p_hat,
            constraint: "within [0, 1]",
        });
    }
    let et = eps_tilde(eps)?;
    let q = 1.0 - p;
    let q_hat = 1.0 - p_hat;
    let in_band = |est: f64, truth: f64| est >= (1.0 - et) * truth && est <= (1.0 + et) * truth;
    if !(in_band(p_hat, p) && in_band(q_hat, q)) {
        return Ok(true);
    }
    let w = (p / q).ln();
    let w_hat = (p_hat / q_hat).ln();
    Ok((w - w_hat).abs() <= eps)
}

/// Result of the fixed-sampling-plan check for the plug-in rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonadaptiveReport {
    /// Whether every expert's record satisfies
    /// `m_i min(p_i, q_i) >= 3 eps_tilde(eps)^{-2} log(4 n / delta)`.
    pub condition_met: bool,
    /// The per-expert sample threshold on `m_i min(p_i, q_i)`.
    pub sample_threshold: f64,
    /// Error bound `delta + exp(-(2 phi - eps n)^2 / (8 phi))` for the
    /// plug-in rule under the sampling condition.
    pub bound: f64,
}

/// Finite-sample guarantee for the plug-in rule under a fixed sampling plan:
/// with record sizes `m`, accuracy `eps` and confidence `delta`, reports
/// whether the records are large enough and the resulting error bound.
/// Requires `0 < eps < min(5, 2 phi / n)`; beyond `2 phi / n` the exponent
/// loses its meaning and the request is rejected.
pub fn nonadaptive_report(
    committee: &Committee,
    m: &[u64],
    eps: f64,
    delta: f64,
) -> Result<NonadaptiveReport, Error> {
    check_same_length(committee.len(), m.len())?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "delta",
            value: delta,
            constraint: "0 < delta < 1",
        });
    }
    let n = committee.len() as f64;
    let phi = committee_potential(committee);
    let eps_cap = (2.0 * phi / n).min(5.0);
    if !(eps > 0.0 && eps < eps_cap) {
        return Err(Error::ParameterOutOfRange {
            name: "eps",
            value: eps,
            constraint: "0 < eps < min(5, 2 phi / n)",
        });
    }
    let et = eps_tilde(eps)?;
    let sample_threshold = 3.0 / (et * et) * (4.0 * n / delta).ln();
    let condition_met = committee
        .competences()
        .iter()
        .zip(m)
        .all(|(&p, &mi)| (mi as f64) * p.min(1.0 - p) >= sample_threshold);
    let excess = 2.0 * phi - eps * n;
    let bound = delta + (-(excess * excess) / (8.0 * phi)).exp();
    Ok(NonadaptiveReport {
        condition_met,
        sample_threshold,
        bound,
    })
}

/// The adaptive rule's confidence gate evaluated on a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateReport {
    /// Confidence budget `delta = sum_i 1 / sqrt(m_i)`.
    pub delta: f64,
    /// Gate statistic `exp(-1/2 sum_i (phat_i - 1/2) what_i)` with the
    /// plug-in weights; always in [0, 1] because every summand is
    /// nonnegative. Infinite weights push the statistic to zero.
    pub gate_value: f64,
    /// Whether `gate_value <= delta / 2`, i.e. the observed records are
    /// confident enough for the plug-in rule to answer.
    pub holds: bool,
}

/// Evaluates the adaptive confidence gate: the plug-in rule may answer only
/// when its empirical potential is large relative to the records' intrinsic
/// uncertainty `delta = sum_i 1 / sqrt(m_i)`. Every expert needs at least
/// one recorded query. On the gate event, the joint probability that the
/// gate holds and the plug-in rule errs is at most `delta`.
pub fn adaptive_gate(profile: &CommitteeProfile) -> Result<GateReport, Error> {
    profile.require_positive_queries()?;
    let delta: f64 = profile
        .records()
        .iter()
        .map(|r| 1.0 / (r.queries as f64).sqrt())
        .sum();
    let weights = hc_weights(profile)?;
    let mut exponent = 0.0_f64;
    for (r, &w) in profile.records().iter().zip(weights.as_slice()) {
        if w.is_infinite() {
            // A perfect or zero record has phat on {0, 1}, so the summand
            // (phat - 1/2) w is +inf of either factor's sign pairing.
            exponent = f64::INFINITY;
            break;
        }
        exponent += (r.estimate() - 0.5) * w;
    }
    let gate_value = (-0.5 * exponent).exp();
    Ok(GateReport {
        delta,
        gate_value,
        holds: gate_value <= delta / 2.0,
    })
}

/// Bundle of the analytic bounds for one committee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub phi: f64,
    pub upper: f64,
    pub lower: f64,
    /// Hoeffding comparison bound; absent when built from `phi` alone.
    pub hoeffding: Option<f64>,
    /// Low-confidence rule bound; absent when built from `phi` alone.
    pub lc_bound: Option<f64>,
}

impl BoundReport {
    /// All bounds for a committee with known competences.
    pub fn for_committee(committee: &Committee) -> Self {
        let phi = committee_potential(committee);
        Self {
            phi,
            upper: upper_bound_opt(phi).expect("potential is nonnegative"),
            lower: lower_bound_opt(phi).expect("potential is nonnegative"),
            hoeffding: Some(hoeffding_bound(committee)),
            lc_bound: Some(lc_error_bound(committee)),
        }
    }

    /// The potential-only bounds, without the committee-specific extras.
    pub fn from_phi(phi: f64) -> Result<Self, Error> {
        Ok(Self {
            phi,
            upper: upper_bound_opt(phi)?,
            lower: lower_bound_opt(phi)?,
            hoeffding: None,
            lc_bound: None,
        })
    }
}
