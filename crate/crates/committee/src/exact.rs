//! Exact error evaluation by enumerating correctness patterns.
//!
//! For independent experts, the pattern `eta` in {+1, -1}^n in which exactly
//! the experts with `eta_i = +1` answer correctly has probability
//!
//! ```text
//! P(eta) = prod_{i: eta_i = +1} p_i * prod_{i: eta_i = -1} (1 - p_i)
//! ```
//!
//! A weighted vote errs exactly on the patterns whose score `sum_i w_i eta_i`
//! fails to be positive (ties and infinite conflicts included), so its error
//! probability is a sum of pattern masses. The optimal rule can be evaluated
//! without weights at all: among each antipodal pair {eta, -eta} it gets the
//! likelier pattern right, so its error is the sum of the smaller mass over
//! all pairs.
//!
//! Enumeration is capped at 24 experts; larger committees must use the Monte
//! Carlo estimators. All accumulation is pairwise over the natural mask
//! order, which keeps results independent of any internal partitioning.

use crate::rules::weighted_verdict;
use crate::types::{
    check_same_length, Committee, CorrectnessAtom, Decision, Error, Sign, WeightVector,
};

/// Largest committee the exact enumerators accept.
pub const ENUMERATION_CAP: usize = 24;

fn check_cap(n: usize) -> Result<(), Error> {
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Summation with a fixed pairwise reduction tree: each pushed value joins
/// its neighbor, pairs join pairs, and so on, a binary-counter walk over the
/// input order. For the `2^n` pattern masses this is the classic balanced
/// tree, with error growth O(log n) instead of O(n).
#[derive(Debug, Default)]
pub(crate) struct PairwiseAccumulator {
    // levels[k] holds a pending partial sum of 2^k consecutive inputs.
    levels: Vec<Option<f64>>,
}

impl PairwiseAccumulator {
    pub(crate) fn push(&mut self, x: f64) {
        let mut carry = x;
        let mut k = 0;
        loop {
            if k == self.levels.len() {
                self.levels.push(Some(carry));
                return;
            }
            match self.levels[k].take() {
                None => {
                    self.levels[k] = Some(carry);
                    return;
                }
                Some(pending) => {
                    carry = pending + carry;
                    k += 1;
                }
            }
        }
    }

    /// Folds the pending partial sums from the smallest block upward.
    pub(crate) fn total(&self) -> f64 {
        self.levels.iter().flatten().sum()
    }
}

/// The distribution of correctness patterns of one committee, indexed by
/// bitmask (bit `i` set means expert `i` answers correctly). Masses are
/// positive and sum to 1 up to rounding.
#[derive(Debug, Clone)]
pub struct AtomDistribution<'a> {
    committee: &'a Committee,
}

impl<'a> AtomDistribution<'a> {
    pub fn new(committee: &'a Committee) -> Result<Self, Error> {
        check_cap(committee.len())?;
        Ok(Self { committee })
    }

    /// Number of patterns, `2^n`.
    pub fn atom_count(&self) -> u64 {
        1u64 << self.committee.len()
    }

    /// Mass of the pattern encoded by `mask`.
    pub fn mass(&self, mask: u64) -> f64 {
        let mut product = 1.0;
        for (i, &p) in self.committee.competences().iter().enumerate() {
            product *= if mask & (1 << i) != 0 { p } else { 1.0 - p };
        }
        product
    }

    /// All `(mask, mass)` pairs in natural mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        (0..self.atom_count()).map(move |mask| (mask, self.mass(mask)))
    }
}

/// Probability that exactly the experts marked `Plus` in `atom` answer
/// correctly.
pub fn atom_probability(committee: &Committee, atom: &CorrectnessAtom) -> Result<f64, Error> {
    check_same_length(committee.len(), atom.len())?;
    let mut product = 1.0;
    for (&p, &sign) in committee.competences().iter().zip(atom.entries()) {
        product *= match sign {
            Sign::Plus => p,
            Sign::Minus => 1.0 - p,
        };
    }
    Ok(product)
}

/// How an error figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
}

/// An error probability together with its provenance. Exact figures carry
/// no sampling metadata; Monte Carlo figures always carry their standard
/// error, seed and trial count.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    value: f64,
    method: EstimateMethod,
    stderr: Option<f64>,
    seed: Option<u64>,
    trials: Option<u64>,
}

impl ErrorEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            method: EstimateMethod::Exact,
            stderr: None,
            seed: None,
            trials: None,
        }
    }

    pub fn monte_carlo(value: f64, stderr: f64, seed: u64, trials: u64) -> Self {
        Self {
            value,
            method: EstimateMethod::MonteCarlo,
            stderr: Some(stderr),
            seed: Some(seed),
            trials: Some(trials),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> EstimateMethod {
        self.method
    }

    pub fn stderr(&self) -> Option<f64> {
        self.stderr
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn trials(&self) -> Option<u64> {
        self.trials
    }
}

fn sign_of_bit(mask: u64, i: usize) -> Sign {
    if mask & (1 << i) != 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Exact error probability of the weighted vote `sign(sum_i w_i eta_i)` on
/// `committee`, ties and infinite conflicts scored as errors. Weights may
/// contain explicit infinities. The committee must fit the enumeration cap.
pub fn exact_error(committee: &Committee, weights: &WeightVector) -> Result<ErrorEstimate, Error> {
    check_same_length(committee.len(), weights.len())?;
    check_cap(committee.len())?;
    let dist = AtomDistribution::new(committee)?;
    let w = weights.as_slice();
    let mut errors = PairwiseAccumulator::default();
    for mask in 0..dist.atom_count() {
        let verdict = weighted_verdict(w, |i| sign_of_bit(mask, i));
        if verdict != Decision::Plus {
            errors.push(dist.mass(mask));
        }
    }
    Ok(ErrorEstimate::exact(errors.total()))
}

/// Exact error probability of the optimal rule, evaluated without weights:
/// the sum over antipodal pattern pairs of the smaller mass. On committees
/// where the optimal score never ties, this equals
/// `exact_error(committee, np_weights(committee))`; on tying committees it is
/// smaller, because a tied pair is counted once here but twice under the
/// tie-as-error convention.
pub fn exact_error_optimal(committee: &Committee) -> Result<ErrorEstimate, Error> {
    check_cap(committee.len())?;
    let dist = AtomDistribution::new(committee)?;
    let n = committee.len();
    let mut errors = PairwiseAccumulator::default();
    if n == 0 {
        return Err(Error::EmptyCommittee);
    }
    let full: u64 = (1u64 << n) - 1;
    // Masks with the top expert correct enumerate each antipodal pair once.
    for mask in 0..(1u64 << (n - 1)) {
        let mask = mask | (1 << (n - 1));
        let pair_min = dist.mass(mask).min(dist.mass(!mask & full));
        errors.push(pair_min);
    }
    Ok(ErrorEstimate::exact(errors.total()))
}

/// First two moments of the vote score `sum_i w_i eta_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreMoments {
    /// `sum_i (p_i - q_i) w_i`; equals twice the committee potential for the
    /// log-odds weights.
    pub mean: f64,
    /// `4 sum_i p_i q_i w_i^2`.
    pub variance: f64,
}

/// Mean and variance of the vote score in closed form. Requires finite
/// weights.
pub fn exact_moments(
    committee: &Committee,
    weights: &WeightVector,
) -> Result<ScoreMoments, Error> {
    check_same_length(committee.len(), weights.len())?;
    weights.require_finite()?;
    let mut mean = 0.0;
    let mut variance = 0.0;
    for (&p, &w) in committee.competences().iter().zip(weights.as_slice()) {
        let q = 1.0 - p;
        mean += (p - q) * w;
        variance += 4.0 * p * q * w * w;
    }
    Ok(ScoreMoments { mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::committee_potential;
    use crate::rules::np_weights;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn committee(p: &[f64]) -> Committee {
        Committee::new(p.to_vec()).unwrap()
    }

    #[test]
    fn atom_probability_multiplies_marginals() {
        let c = committee(&[0.8, 0.7, 0.6]);
        let all_right = CorrectnessAtom::from_bitmask(0b111, 3);
        assert!((atom_probability(&c, &all_right).unwrap() - 0.336).abs() < TOL);
        let all_wrong = CorrectnessAtom::from_bitmask(0b000, 3);
        assert!((atom_probability(&c, &all_wrong).unwrap() - 0.024).abs() < TOL);
        // 0.8 * 0.3 * 0.6, middle expert wrong.
        let mixed = CorrectnessAtom::from_bitmask(0b101, 3);
        assert!((atom_probability(&c, &mixed).unwrap() - 0.144).abs() < TOL);
        let short = CorrectnessAtom::from_bitmask(0b1, 1);
        assert!(atom_probability(&c, &short).is_err());
    }

    #[test]
    fn exact_error_follows_the_dominant_expert() {
        // log 4 > log(7/3) + log(3/2): the vote always tracks expert 1, so
        // it errs exactly when expert 1 does.
        let c = committee(&[0.8, 0.7, 0.6]);
        let e = exact_error(&c, &np_weights(&c)).unwrap();
        assert_eq!(e.method(), EstimateMethod::Exact);
        assert_eq!(e.stderr(), None);
        assert!((e.value() - 0.2).abs() < TOL);
    }

    #[test]
    fn exact_error_of_majority_counts_split_patterns() {
        // P(at least 2 of 3 wrong) = 0.212 for (0.8, 0.7, 0.6).
        let c = committee(&[0.8, 0.7, 0.6]);
        let maj = WeightVector::new(vec![1.0; 3]).unwrap();
        assert!((exact_error(&c, &maj).unwrap().value() - 0.212).abs() < TOL);
    }

    #[test]
    fn all_zero_weights_tie_every_pattern() {
        let c = committee(&[0.5, 0.5]);
        let w = np_weights(&c);
        assert_eq!(w.as_slice(), &[0.0, 0.0]);
        assert_eq!(exact_error(&c, &w).unwrap().value(), 1.0);
    }

    #[test]
    fn infinite_weights_resolve_per_pattern() {
        // w = (+inf, -inf): the vote is correct only when expert 1 is right
        // and expert 2 wrong; conflicts and double-negatives are errors.
        let c = committee(&[0.9, 0.8]);
        let w = WeightVector::new(vec![f64::INFINITY, f64::NEG_INFINITY]).unwrap();
        let e = exact_error(&c, &w).unwrap();
        assert!((e.value() - (1.0 - 0.9 * 0.2)).abs() < TOL);
    }

    #[test]
    fn optimal_error_sums_smaller_pair_masses() {
        let c = committee(&[0.8, 0.7, 0.6]);
        assert!((exact_error_optimal(&c).unwrap().value() - 0.2).abs() < TOL);
        let single = committee(&[0.9]);
        assert!((exact_error_optimal(&single).unwrap().value() - 0.1).abs() < TOL);
    }

    #[test]
    fn tie_conventions_differ_on_uninformative_committees() {
        // Every pattern of (0.5, 0.5) ties: per pair the smaller mass is
        // 0.25, twice, while the tie-as-error convention scores everything.
        let c = committee(&[0.5, 0.5]);
        assert!((exact_error_optimal(&c).unwrap().value() - 0.5).abs() < TOL);
        assert_eq!(exact_error(&c, &np_weights(&c)).unwrap().value(), 1.0);
    }

    #[test]
    fn moments_match_closed_forms() {
        let c = committee(&[0.8, 0.7, 0.6]);
        let m = exact_moments(&c, &np_weights(&c)).unwrap();
        assert!((m.mean - 1.2517887824484486).abs() < TOL);
        assert!((m.mean - 2.0 * committee_potential(&c)).abs() < TOL);
        assert!((m.variance - 1.9908330693100902).abs() < TOL);

        let c = committee(&[0.5]);
        let m = exact_moments(&c, &WeightVector::new(vec![1.0]).unwrap()).unwrap();
        assert_eq!(m.mean, 0.0);
        assert!((m.variance - 1.0).abs() < TOL);

        // 4 * 0.09 * (log 9)^2
        let c = committee(&[0.9]);
        let m = exact_moments(&c, &WeightVector::new(vec![9.0_f64.ln()]).unwrap()).unwrap();
        assert!((m.variance - 1.738006503570118).abs() < TOL);

        let w = WeightVector::new(vec![f64::INFINITY]).unwrap();
        assert_eq!(
            exact_moments(&c, &w),
            Err(Error::InfiniteWeight { index: 0 })
        );
    }

    #[test]
    fn enumeration_cap_is_enforced_before_any_work() {
        let c = committee(&vec![0.6; ENUMERATION_CAP + 1]);
        let w = np_weights(&c);
        assert_eq!(
            exact_error(&c, &w),
            Err(Error::EnumerationCap { n: 25, cap: 24 })
        );
        assert!(exact_error_optimal(&c).is_err());
        assert!(AtomDistribution::new(&c).is_err());
    }

    #[test]
    fn pairwise_accumulator_matches_reference_sums() {
        let mut acc = PairwiseAccumulator::default();
        for i in 0..1000 {
            acc.push(i as f64);
        }
        assert_eq!(acc.total(), 499500.0);
        assert_eq!(PairwiseAccumulator::default().total(), 0.0);
    }

    fn arb_committee(max_n: usize) -> impl Strategy<Value = Committee> {
        proptest::collection::vec(0.05..=0.95_f64, 1..=max_n)
            .prop_map(|p| Committee::new(p).unwrap())
    }

    proptest! {
        // Pattern masses are a probability distribution.
        #[test]
        fn masses_sum_to_one(c in arb_committee(10)) {
            let dist = AtomDistribution::new(&c).unwrap();
            let mut acc = PairwiseAccumulator::default();
            for (_, mass) in dist.iter() {
                prop_assert!(mass > 0.0);
                acc.push(mass);
            }
            prop_assert!((acc.total() - 1.0).abs() < 1e-12);
        }

        // The two optimal-error routes agree when no pattern ties.
        #[test]
        fn weightful_and_weightless_optimal_errors_agree(c in arb_committee(10)) {
            let w = np_weights(&c);
            let dist = AtomDistribution::new(&c).unwrap();
            let tie_free = (0..dist.atom_count()).all(|mask| {
                let score: f64 = w
                    .as_slice()
                    .iter()
                    .enumerate()
                    .map(|(i, wi)| if mask & (1 << i) != 0 { *wi } else { -wi })
                    .sum();
                score.abs() > 1e-9
            });
            prop_assume!(tie_free);
            let via_weights = exact_error(&c, &w).unwrap().value();
            let via_pairs = exact_error_optimal(&c).unwrap().value();
            prop_assert!((via_weights - via_pairs).abs() < 1e-12);
        }

        // No weight vector beats the log-odds weights.
        #[test]
        fn log_odds_weights_are_optimal(
            c in arb_committee(6),
            raw in proptest::collection::vec(-5.0..=5.0_f64, 6),
        ) {
            let n = c.len();
            let rival = WeightVector::new(raw[..n].to_vec()).unwrap();
            let best = exact_error(&c, &np_weights(&c)).unwrap().value();
            let other = exact_error(&c, &rival).unwrap().value();
            prop_assert!(best <= other + 1e-12);
        }

        // The score mean under log-odds weights is twice the potential, and
        // the variance never exceeds four times the potential.
        #[test]
        fn score_moments_track_the_potential(c in arb_committee(12)) {
            let m = exact_moments(&c, &np_weights(&c)).unwrap();
            let phi = committee_potential(&c);
            prop_assert!((m.mean - 2.0 * phi).abs() < 1e-12);
            prop_assert!(m.variance <= 4.0 * phi + 1e-12);
        }

        // At least three quarters of the mass lies within two standard
        // score widths of the mean: [2 phi - 4 sqrt(phi), 2 phi + 4 sqrt(phi)].
        #[test]
        fn three_quarters_of_mass_is_central(c in arb_committee(10)) {
            let w = np_weights(&c);
            let phi = committee_potential(&c);
            let (lo, hi) = (2.0 * phi - 4.0 * phi.sqrt(), 2.0 * phi + 4.0 * phi.sqrt());
            let dist = AtomDistribution::new(&c).unwrap();
            let mut acc = PairwiseAccumulator::default();
            for (mask, mass) in dist.iter() {
                let score: f64 = w
                    .as_slice()
                    .iter()
                    .enumerate()
                    .map(|(i, wi)| if mask & (1 << i) != 0 { *wi } else { -wi })
                    .sum();
                if score >= lo && score <= hi {
                    acc.push(mass);
                }
            }
            prop_assert!(acc.total() >= 0.75 - 1e-12);
        }
    }
}
