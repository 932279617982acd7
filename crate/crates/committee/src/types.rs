//! Domain types shared by every module: committees of independent experts,
//! observed track records, Beta priors, weight vectors and vote outcomes.

use thiserror::Error;

/// Errors produced by constructors and operations across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a committee must contain at least one expert")]
    EmptyCommittee,
    #[error("competence p[{index}] = {value} must lie strictly inside (0, 1)")]
    CompetenceOutOfRange { index: usize, value: f64 },
    #[error("profile entry {index} has k = {successes} successes out of m = {queries} queries")]
    ProfileCountExceedsQueries {
        index: usize,
        successes: u64,
        queries: u64,
    },
    #[error("profile entry {index} has m = 0 queries; the empirical estimate is undefined")]
    EmptyProfileEntry { index: usize },
    #[error("prior {index} has (alpha, beta) = ({alpha}, {beta}); both must be positive and finite")]
    InvalidPrior { index: usize, alpha: f64, beta: f64 },
    #[error("weight[{index}] is NaN")]
    NanWeight { index: usize },
    #[error("weight[{index}] is infinite, which this operation cannot accept")]
    InfiniteWeight { index: usize },
    #[error("length mismatch: {left} experts vs {right} entries")]
    LengthMismatch { left: usize, right: usize },
    #[error("committee size {n} exceeds the exact-enumeration cap of {cap}; use the Monte Carlo estimators instead")]
    EnumerationCap { n: usize, cap: usize },
    #[error("parameter {name} = {value} is outside its valid range ({constraint})")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("unknown rule {0:?}; registered rules: opt, maj, lc, hc, adapt, bayes")]
    UnknownRule(String),
    #[error("rule {rule} requires {what}")]
    MissingRuleInput { rule: &'static str, what: &'static str },
}

/// A committee of `n` independent experts. Expert `i` answers a binary
/// question correctly with probability `p_i`, independently of the others.
///
/// Competences are held strictly inside (0, 1): deterministic experts make
/// the log-odds weight infinite and are representable only as estimated
/// profiles, never as true competences.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    competences: Vec<f64>,
}

impl Committee {
    pub fn new(competences: Vec<f64>) -> Result<Self, Error> {
        if competences.is_empty() {
            return Err(Error::EmptyCommittee);
        }
        for (index, &value) in competences.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::CompetenceOutOfRange { index, value });
            }
        }
        Ok(Self { competences })
    }

    /// Test-only escape hatch that admits the closed interval [0, 1], so
    /// degenerate samplers (an expert that is always right or always wrong)
    /// can be exercised. Not constructible outside the crate.
    #[cfg(test)]
    pub(crate) fn new_saturated(competences: Vec<f64>) -> Self {
        assert!(!competences.is_empty());
        assert!(competences.iter().all(|p| (0.0..=1.0).contains(p)));
        Self { competences }
    }

    pub fn len(&self) -> usize {
        self.competences.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn competences(&self) -> &[f64] {
        &self.competences
    }

    pub fn competence(&self, i: usize) -> f64 {
        self.competences[i]
    }
}

/// The observed track record of one expert: `successes` correct answers out
/// of `queries` independent past questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackRecord {
    pub queries: u64,
    pub successes: u64,
}

impl TrackRecord {
    /// Empirical competence estimate `k / m`. Requires at least one query.
    pub fn estimate(&self) -> f64 {
        debug_assert!(self.queries > 0);
        self.successes as f64 / self.queries as f64
    }
}

/// Per-expert track records for a whole committee. Invariant: `k_i <= m_i`
/// for every entry (`m_i = 0` is allowed; rules that need an estimate reject
/// it at use time).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitteeProfile {
    records: Vec<TrackRecord>,
}

impl CommitteeProfile {
    /// Builds a profile from `(m_i, k_i)` pairs.
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self, Error> {
        if pairs.is_empty() {
            return Err(Error::EmptyCommittee);
        }
        let mut records = Vec::with_capacity(pairs.len());
        for (index, &(queries, successes)) in pairs.iter().enumerate() {
            if successes > queries {
                return Err(Error::ProfileCountExceedsQueries {
                    index,
                    successes,
                    queries,
                });
            }
            records.push(TrackRecord { queries, successes });
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn records(&self) -> &[TrackRecord] {
        &self.records
    }

    /// Errors with the index of the first entry that has no queries.
    pub fn require_positive_queries(&self) -> Result<(), Error> {
        match self.records.iter().position(|r| r.queries == 0) {
            Some(index) => Err(Error::EmptyProfileEntry { index }),
            None => Ok(()),
        }
    }
}

/// Independent Beta(alpha_i, beta_i) priors over each expert's competence.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPriorSet {
    params: Vec<(f64, f64)>,
}

impl BetaPriorSet {
    pub fn new(params: Vec<(f64, f64)>) -> Result<Self, Error> {
        if params.is_empty() {
            return Err(Error::EmptyCommittee);
        }
        for (index, &(alpha, beta)) in params.iter().enumerate() {
            let ok = alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite();
            if !ok {
                return Err(Error::InvalidPrior { index, alpha, beta });
            }
        }
        Ok(Self { params })
    }

    /// The uninformative uniform prior Beta(1, 1) for every expert.
    pub fn uniform(n: usize) -> Result<Self, Error> {
        Self::new(vec![(1.0, 1.0); n])
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn params(&self) -> &[(f64, f64)] {
        &self.params
    }
}

/// A vote or truth value in the +/-1 convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A correctness pattern: entry `i` is `Plus` when expert `i` answers
/// correctly and `Minus` when it errs. With votes `x_i` and truth `y`,
/// the pattern is `eta_i = x_i * y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessAtom {
    entries: Vec<Sign>,
}

impl CorrectnessAtom {
    pub fn new(entries: Vec<Sign>) -> Result<Self, Error> {
        if entries.is_empty() {
            return Err(Error::EmptyCommittee);
        }
        Ok(Self { entries })
    }

    /// Decodes a bitmask: bit `i` set means expert `i` is correct (`Plus`).
    /// Masks enumerate all `2^n` atoms as `0..2^n`.
    pub fn from_bitmask(mask: u64, n: usize) -> Self {
        debug_assert!(n >= 1 && n <= 63);
        let entries = (0..n)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[Sign] {
        &self.entries
    }

    /// The antipodal atom with every entry flipped.
    pub fn antipode(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|s| s.flip()).collect(),
        }
    }
}

/// Per-expert voting weights on the extended real line: finite values plus
/// explicit positive or negative infinity. NaN is rejected at construction,
/// so downstream arithmetic never has to consider it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, Error> {
        if weights.is_empty() {
            return Err(Error::EmptyCommittee);
        }
        for (index, w) in weights.iter().enumerate() {
            if w.is_nan() {
                return Err(Error::NanWeight { index });
            }
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    /// Errors with the index of the first infinite weight.
    pub fn require_finite(&self) -> Result<(), Error> {
        match self.weights.iter().position(|w| w.is_infinite()) {
            Some(index) => Err(Error::InfiniteWeight { index }),
            None => Ok(()),
        }
    }
}

/// The outcome of a weighted vote. `Abstain` covers an exact zero score and
/// the irreducible case of infinite weights pulling in both directions; it is
/// always scored as an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Plus,
    Minus,
    Abstain,
}

impl Decision {
    /// Whether the decision matches the true label. `Abstain` never does.
    pub fn matches(self, truth: Sign) -> bool {
        matches!(
            (self, truth),
            (Decision::Plus, Sign::Plus) | (Decision::Minus, Sign::Minus)
        )
    }
}

pub(crate) fn check_same_length(left: usize, right: usize) -> Result<(), Error> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}
