//! The generic hidden-structure sampling subroutine (one oracle call,
//! one measured dual label) and full subgroup recovery for finite
//! abelian domains by intersecting character kernels.

use alloc::vec::Vec;
use core::fmt;

// Float supplies log2/ceil on f64 in isolated no_std builds; redundant
// whenever std is linked anywhere in the crate graph (tests, the CLI).
#[allow(unused_imports)]
use num_traits::Float;

use crate::groups::{subgroup_from_character_samples, Character, GroupError, Subgroup};
use crate::qsim::{
    apply_fourier_left, apply_inverse_fourier_left, apply_oracle, init_state,
    measure_left_distribution, sample, HsOracle, MeasurementOutcome, OracleDomain, OutcomeLabel,
    SimError,
};

#[derive(Debug, Clone, PartialEq)]
pub enum HspError {
    Sim(SimError),
    Group(GroupError),
    /// Subgroup recovery is defined for finite abelian domains only.
    NotAbelian,
    /// Round budget ran out before the candidate stabilized.
    Inconclusive { best: Subgroup, rounds: u32 },
    BadParameter(&'static str),
}

impl fmt::Display for HspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HspError::Sim(e) => write!(f, "{e}"),
            HspError::Group(e) => write!(f, "{e}"),
            HspError::NotAbelian => write!(f, "recovery needs a finite abelian domain"),
            HspError::Inconclusive { best, rounds } => write!(
                f,
                "no stable candidate after {rounds} rounds (best has order {})",
                best.order()
            ),
            HspError::BadParameter(why) => write!(f, "bad parameter: {why}"),
        }
    }
}

impl From<SimError> for HspError {
    fn from(e: SimError) -> Self {
        HspError::Sim(e)
    }
}

impl From<GroupError> for HspError {
    fn from(e: GroupError) -> Self {
        HspError::Group(e)
    }
}

/// One run of the sampling subroutine: the measured dual label, the full
/// exact distribution it was drawn from, and the oracle query count
/// (always 1; the blackbox is applied once per run).
#[derive(Debug, Clone, PartialEq)]
pub struct QrandResult {
    pub sampled: OutcomeLabel,
    pub distribution: Vec<MeasurementOutcome>,
    pub queries: u32,
}

/// Runs init -> inverse transform -> oracle -> forward transform ->
/// measure, sampling one dual label from the exact distribution.
pub fn qrand(oracle: &HsOracle, rng: &mut impl rand::Rng) -> Result<QrandResult, SimError> {
    let state = init_state(oracle)?;
    let state = apply_inverse_fourier_left(&state)?;
    let state = apply_oracle(&state, oracle)?;
    let state = apply_fourier_left(&state)?;
    let distribution = measure_left_distribution(&state)?;
    let sampled = sample(&distribution, rng)?.label.clone();
    Ok(QrandResult { sampled, distribution, queries: 1 })
}

/// A recovered hidden subgroup with the cost of finding it.
#[derive(Debug, Clone, PartialEq)]
pub struct HspSolution {
    pub subgroup: Subgroup,
    /// Oracle queries = sampling rounds used.
    pub queries: u32,
}

/// Number of consecutive unchanged rounds required before the candidate
/// is accepted: ceil(log2(1/(1-confidence))) + 2.
///
/// Rationale: while the sampled characters span a proper subgroup of the
/// annihilator, each fresh sample leaves the candidate unchanged with
/// probability at most 1/2, so r unchanged rounds bound the error
/// probability by 2^-r <= (1-confidence)/4.
pub fn stability_rounds(confidence: f64) -> Result<u32, HspError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(HspError::BadParameter("confidence must lie in (0, 1)"));
    }
    let inv = 1.0 / (1.0 - confidence);
    Ok(inv.log2().ceil() as u32 + 2)
}

/// Recovers the subgroup an exactly-hiding oracle is constant on, by
/// repeated sampling and kernel intersection.
///
/// Precondition: phi(x) = phi(y) iff x - y lies in the hidden subgroup.
/// Oracles that only approximately hide a subgroup (e.g. a period pushed
/// through a non-divisible modulus) need dedicated post-processing and
/// are out of scope here.
pub fn solve_abelian_hsp(
    oracle: &HsOracle,
    max_rounds: u32,
    confidence: f64,
    rng: &mut impl rand::Rng,
) -> Result<HspSolution, HspError> {
    let OracleDomain::Abelian(group) = oracle.domain() else {
        return Err(HspError::NotAbelian);
    };
    let needed = stability_rounds(confidence)?;
    if max_rounds == 0 {
        return Err(HspError::BadParameter("max_rounds must be at least 1"));
    }

    let mut samples: Vec<Character> = Vec::new();
    let mut candidate = Subgroup::full(group)?;
    let mut stable = 0u32;
    for round in 1..=max_rounds {
        let result = qrand(oracle, rng)?;
        let OutcomeLabel::Character(chi) = result.sampled else {
            return Err(HspError::NotAbelian);
        };
        samples.push(chi);
        let next = subgroup_from_character_samples(group, &samples)?;
        if next == candidate {
            stable += 1;
        } else {
            stable = 1;
            candidate = next;
        }
        // The sampled characters always span the annihilator of the
        // candidate they carve out, so a span-cardinality check adds
        // nothing beyond this identity; the stability count is the
        // actual stopping rule.
        debug_assert!({
            let span_gens: Vec<_> = samples
                .iter()
                .map(|c| group.element(c.freqs()).expect("freqs are in range"))
                .collect();
            let span = Subgroup::generated(group, &span_gens).expect("desk scale");
            span.order() * candidate.order() == group.cardinality()
        });
        if stable >= needed {
            return Ok(HspSolution { subgroup: candidate, queries: round });
        }
    }
    Err(HspError::Inconclusive { best: candidate, rounds: max_rounds })
}
