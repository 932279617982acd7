//! Samplers for the three random layers of an experiment: the committee's
//! competences (Bayesian setting), the observed track records, and the vote
//! itself.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution};

use crate::types::{BetaPriorSet, Committee, CommitteeProfile, Error, Sign};

/// Samples one question: the truth uniform on {+1, -1}, then each expert's
/// vote agreeing with it with probability `p_i`, independently.
pub fn sample_outcome<R: Rng + ?Sized>(committee: &Committee, rng: &mut R) -> (Sign, Vec<Sign>) {
    let truth = if rng.gen::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    };
    let votes = committee
        .competences()
        .iter()
        .map(|&p| if rng.gen_bool(p) { truth } else { truth.flip() })
        .collect();
    (truth, votes)
}

/// Samples a track record `k_i ~ Binomial(m_i, p_i)` for each expert.
/// `m_i = 0` yields the empty record `(0, 0)`.
pub fn sample_profile<R: Rng + ?Sized>(
    committee: &Committee,
    m: &[u64],
    rng: &mut R,
) -> Result<CommitteeProfile, Error> {
    crate::types::check_same_length(committee.len(), m.len())?;
    let pairs = committee
        .competences()
        .iter()
        .zip(m)
        .map(|(&p, &mi)| {
            let k = Binomial::new(mi, p)
                .expect("competences are valid probabilities")
                .sample(rng);
            (mi, k)
        })
        .collect();
    CommitteeProfile::new(pairs)
}

/// Draws a committee from independent Beta priors. Beta(1, 1) is sampled as
/// the plain uniform (the inverse-CDF identity); other shapes use the
/// library's Beta sampler. Draws that round onto the boundary are redrawn,
/// keeping every competence strictly inside (0, 1).
pub fn sample_competences<R: Rng + ?Sized>(priors: &BetaPriorSet, rng: &mut R) -> Committee {
    let competences = priors
        .params()
        .iter()
        .map(|&(alpha, beta)| {
            if alpha == 1.0 && beta == 1.0 {
                loop {
                    let u = rng.gen::<f64>();
                    if u > 0.0 {
                        return u;
                    }
                }
            }
            let dist = Beta::new(alpha, beta).expect("prior parameters are positive and finite");
            loop {
                let x: f64 = dist.sample(rng);
                if x > 0.0 && x < 1.0 {
                    return x;
                }
            }
        })
        .collect();
    Committee::new(competences).expect("rejection sampling keeps competences interior")
}
