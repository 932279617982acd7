//! Search for committees where the infinite-history centered rule is
//! measurably worse than the optimal rule.
//!
//! The centered weights `p_i - 1/2` are what the empirical centered rule
//! converges to as histories grow, so the error gap between them and the
//! optimal rule is the rule's irreducible cost on a given committee. The
//! search maximizes that gap over a box of competences by coordinate descent
//! from random starts.

use crate::exact::{exact_error, exact_error_optimal};
use crate::rules::lc_known_weights;
use crate::sim::rng::stream_rng;
use crate::types::{Committee, Error};
use rand::Rng;

/// Error of the centered rule in its infinite-history limit minus the error
/// of the optimal rule, both exact. Nonnegative up to the tie convention:
/// a committee where the centered score can tie pays the full tied mass.
pub fn optimality_gap(committee: &Committee) -> Result<f64, Error> {
    let centered = exact_error(committee, &lc_known_weights(committee))?.value();
    let optimal = exact_error_optimal(committee)?.value();
    Ok(centered - optimal)
}

/// The best committee a gap search found.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSearchResult {
    pub committee: Committee,
    pub gap: f64,
}

/// Competences are searched inside this box, far enough from the boundary
/// that the optimal weights stay moderate.
pub const GAP_BOX: (f64, f64) = (0.05, 0.95);

const INITIAL_STEP: f64 = 0.2;
const FINAL_STEP: f64 = 1e-6;
const EVAL_BUDGET: u32 = 4000;

/// Maximizes [`optimality_gap`] over committees of `n` experts inside
/// [`GAP_BOX`] by coordinate descent with a halving step, restarted from
/// `restarts` random interior points. Deterministic in `seed`.
pub fn gap_search(n: usize, restarts: u64, seed: u64) -> Result<GapSearchResult, Error> {
    if n == 0 {
        return Err(Error::EmptyCommittee);
    }
    if restarts == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "restarts",
            value: 0.0,
            constraint: "at least one restart",
        });
    }
    let (lo, hi) = GAP_BOX;
    let objective = |p: &[f64]| -> Result<f64, Error> {
        optimality_gap(&Committee::new(p.to_vec())?)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for restart in 0..restarts {
        let mut rng = stream_rng(seed, restart);
        let mut point: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
        let mut value = objective(&point)?;
        let mut evals = 1u32;
        let mut step = INITIAL_STEP;
        while step >= FINAL_STEP && evals < EVAL_BUDGET {
            let mut improved = false;
            'sweep: for i in 0..n {
                for direction in [step, -step] {
                    let moved = (point[i] + direction).clamp(lo, hi);
                    if moved == point[i] {
                        continue;
                    }
                    let previous = point[i];
                    point[i] = moved;
                    let candidate = objective(&point)?;
                    evals += 1;
                    if candidate > value {
                        value = candidate;
                        improved = true;
                    } else {
                        point[i] = previous;
                    }
                    if evals >= EVAL_BUDGET {
                        break 'sweep;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((point, value));
        }
    }
    let (point, gap) = best.expect("at least one restart ran");
    Ok(GapSearchResult {
        committee: Committee::new(point)?,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_at_a_lopsided_committee_matches_enumeration() {
        // One strong expert against four mediocre ones: the centered rule
        // lets the mediocre majority outvote the strong expert on patterns
        // the log-odds weights decide the other way.
        let c = Committee::new(vec![0.99, 0.65, 0.65, 0.65, 0.65]).unwrap();
        let gap = optimality_gap(&c).unwrap();
        assert!((gap - 0.013071124999999989).abs() < 1e-12);
    }

    #[test]
    fn single_expert_has_no_gap() {
        for p in [0.1, 0.4, 0.7, 0.95] {
            let c = Committee::new(vec![p]).unwrap();
            assert_eq!(optimality_gap(&c).unwrap(), 0.0);
        }
        let found = gap_search(1, 50, 3).unwrap();
        assert!(found.gap.abs() < 1e-9);
    }

    #[test]
    fn search_finds_the_known_ridge() {
        let found = gap_search(5, 200, 0).unwrap();
        assert!(
            found.gap >= 0.013,
            "search under-performed: {:?}",
            found
        );
        assert!(found.gap < 0.07, "implausibly large gap: {:?}", found);
        let all_in_box = found
            .committee
            .competences()
            .iter()
            .all(|&p| (GAP_BOX.0..=GAP_BOX.1).contains(&p));
        assert!(all_in_box);
    }

    #[test]
    fn search_is_deterministic_in_the_seed() {
        let a = gap_search(3, 20, 42).unwrap();
        let b = gap_search(3, 20, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_rejects_degenerate_requests() {
        assert!(matches!(gap_search(0, 10, 0), Err(Error::EmptyCommittee)));
        assert!(matches!(
            gap_search(3, 0, 0),
            Err(Error::ParameterOutOfRange { name: "restarts", .. })
        ));
    }
}
