//! The period-finding family: the classic order-finding pipeline over
//! Z_Q with continued-fraction post-processing and factor extraction,
//! its reciprocal "dual" with GCD post-processing, and the wandering
//! variant that walks random cyclic summands of Z^n to assemble the
//! exponent of a hidden finite quotient.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::groups::{random_primitive_vector, FiniteAbelianGroup, GroupError};
use crate::numtheory::{convergents, gcd, lcm, modpow, Convergent, NumTheoryError};
use crate::qsim::{
    apply_fourier_left, apply_inverse_fourier_left, apply_oracle, init_state,
    measure_left_distribution, sample, HsOracle, MeasurementOutcome, OracleDomain, OutcomeLabel,
    SimError,
};

/// Coordinate range for the random summand directions the wandering
/// search draws from.
const WANDER_COORD_BOUND: u64 = 8;

/// Probability below this is treated as an empty support slot.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ShorError {
    Num(NumTheoryError),
    Group(GroupError),
    Sim(SimError),
    BadParameter(&'static str),
    /// gcd(a, N) > 1: the base itself hands over a factor, no quantum
    /// step needed.
    SharedFactor { a: u64, gcd: u64 },
    /// Factoring pre-checks failed; carries the classification.
    NotFactorable(FactorRejection),
    /// Every attempt failed; the trace records what each one did.
    AttemptsExhausted { trace: Vec<AttemptRecord> },
    /// The supplied oracle does not hide a subgroup of the stated shape.
    PreconditionViolated(&'static str),
    /// Dual pipeline drew only zeros; consistent with the constant
    /// oracle (a = Q) but not provable from samples.
    AllSamplesZero { samples: u32 },
    /// Wandering round budget ran out before the accumulated order
    /// stabilized.
    RoundBudget { best: u64, rounds: u32, failures: u32 },
}

impl fmt::Display for ShorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShorError::Num(e) => write!(f, "{e}"),
            ShorError::Group(e) => write!(f, "{e}"),
            ShorError::Sim(e) => write!(f, "{e}"),
            ShorError::BadParameter(why) => write!(f, "bad parameter: {why}"),
            ShorError::SharedFactor { a, gcd } => {
                write!(f, "gcd({a}, N) = {gcd} is already a nontrivial factor")
            }
            ShorError::NotFactorable(r) => write!(f, "not factorable here: {r}"),
            ShorError::AttemptsExhausted { trace } => {
                write!(f, "no factor found in {} attempts", trace.len())
            }
            ShorError::PreconditionViolated(why) => write!(f, "precondition violated: {why}"),
            ShorError::AllSamplesZero { samples } => write!(
                f,
                "all {samples} samples were zero; consistent with the constant oracle (a = Q) \
                 but inconclusive"
            ),
            ShorError::RoundBudget { best, rounds, failures } => write!(
                f,
                "order did not stabilize in {rounds} rounds ({failures} failed); best so far {best}"
            ),
        }
    }
}

impl From<NumTheoryError> for ShorError {
    fn from(e: NumTheoryError) -> Self {
        ShorError::Num(e)
    }
}

impl From<GroupError> for ShorError {
    fn from(e: GroupError) -> Self {
        ShorError::Group(e)
    }
}

impl From<SimError> for ShorError {
    fn from(e: SimError) -> Self {
        ShorError::Sim(e)
    }
}

/// Why an integer was refused by [`factor`] before any quantum work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorRejection {
    TooSmall,
    Even,
    Prime,
    PrimePower { base: u64, exponent: u32 },
}

impl fmt::Display for FactorRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorRejection::TooSmall => write!(f, "N must be at least 3"),
            FactorRejection::Even => write!(f, "N is even; divide out 2 first"),
            FactorRejection::Prime => write!(f, "N is prime"),
            FactorRejection::PrimePower { base, exponent } => {
                write!(f, "N = {base}^{exponent} is a prime power; take roots classically")
            }
        }
    }
}

/// Problem parameters for the classic pipeline: the modulus N, the base
/// a, and the transform size Q, the unique power of two with
/// N^2 <= Q < 2 N^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShorConfig {
    n: u64,
    a: u64,
    q: u64,
}

impl ShorConfig {
    /// Validates N >= 3 and 2 <= a <= N-2 and derives Q. Coprimality of
    /// a and N is deliberately not required here: [`shor_oracle`] turns
    /// a shared divisor into the [`ShorError::SharedFactor`] shortcut.
    pub fn new(n: u64, a: u64) -> Result<Self, ShorError> {
        if n < 3 {
            return Err(ShorError::BadParameter("N must be at least 3"));
        }
        if a < 2 || a > n - 2 {
            return Err(ShorError::BadParameter("a must lie in [2, N-2]"));
        }
        let n_sq = n.checked_mul(n).ok_or(ShorError::BadParameter("N^2 overflows"))?;
        let q = n_sq
            .checked_next_power_of_two()
            .ok_or(ShorError::BadParameter("Q overflows"))?;
        debug_assert!(n_sq <= q && q < 2 * n_sq);
        Ok(ShorConfig { n, a, q })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

/// The modular power table x -> a^x mod N for x in 0..Q, built with one
/// modular multiplication per entry.
pub fn shor_powers(config: &ShorConfig) -> Result<Vec<u64>, ShorError> {
    let g = gcd(config.a, config.n)?;
    if g != 1 {
        return Err(ShorError::SharedFactor { a: config.a, gcd: g });
    }
    let mut table = Vec::with_capacity(config.q as usize);
    let mut cur: u64 = 1;
    for _ in 0..config.q {
        table.push(cur);
        cur = ((cur as u128 * config.a as u128) % config.n as u128) as u64;
    }
    Ok(table)
}

/// The order-finding oracle over Z_Q: phi(x) = a^x mod N, targets
/// interned in first-occurrence order (so x = 0 maps to target 0).
pub fn shor_oracle(config: &ShorConfig) -> Result<HsOracle, ShorError> {
    let table = shor_powers(config)?;
    let group = FiniteAbelianGroup::cyclic(config.q)?;
    Ok(HsOracle::from_labels(OracleDomain::Abelian(group), &table)?)
}

/// The exact measurement distribution over y in 0..Q-1 for the classic
/// pipeline on `config`.
pub fn shor_distribution(config: &ShorConfig) -> Result<Vec<MeasurementOutcome>, ShorError> {
    let oracle = shor_oracle(config)?;
    let state = init_state(&oracle)?;
    let state = apply_inverse_fourier_left(&state)?;
    let state = apply_oracle(&state, &oracle)?;
    let state = apply_fourier_left(&state)?;
    Ok(measure_left_distribution(&state)?)
}

/// Where a period candidate came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateSource {
    /// A convergent denominator of sample/Q.
    Single { sample: u64, convergent: Convergent },
    /// The lcm of convergent denominators taken from two different
    /// samples.
    LcmPair { first: (u64, Convergent), second: (u64, Convergent) },
}

/// A candidate period r with its provenance; verified means
/// a^r = 1 mod N was checked and holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodCandidate {
    pub period: u64,
    pub verified: bool,
    pub source: CandidateSource,
}

/// Recovers a verified period from measurement samples.
///
/// A convergent d/r of y/Q enters the candidate pool only when r < N
/// and the sample sits within half a grid step of the rational, that
/// is |y/Q - d/r| < 1/(2Q). Convergents outside that window appear in
/// the expansion but do not correspond to a measurement peak, and
/// admitting them overstates the recovery rate. The pool is extended
/// with the lcm of each pair of denominators drawn from two different
/// samples (capped at N). Each candidate is tested with
/// modpow(a, r, N) = 1 and the smallest verified one is returned.
/// Within-sample lcm combinations are deliberately not taken: a single
/// sample recovers the period only when its own convergent list shows
/// it.
pub fn recover_period(
    samples: &[u64],
    config: &ShorConfig,
) -> Result<Option<PeriodCandidate>, ShorError> {
    if samples.is_empty() {
        return Err(ShorError::BadParameter("need at least one sample"));
    }
    // (sample, convergent) candidate pool, one entry per denominator
    let mut pool: Vec<(u64, Convergent)> = Vec::new();
    for &y in samples {
        if y >= config.q {
            return Err(ShorError::BadParameter("sample out of range [0, Q)"));
        }
        for c in convergents(y, config.q)? {
            if c.den < 1 || c.den >= config.n {
                continue;
            }
            // Half-step gate in integers: |y/Q - num/den| < 1/(2Q)
            // rearranges to 2*|y*den - num*Q| < den.
            let err = (y as i128 * c.den as i128 - c.num as i128 * config.q as i128).abs();
            if 2 * err < c.den as i128 {
                pool.push((y, c));
            }
        }
    }
    let mut best: Option<PeriodCandidate> = None;
    let mut consider = |cand: PeriodCandidate| {
        if cand.verified && best.as_ref().map_or(true, |b| cand.period < b.period) {
            best = Some(cand);
        }
    };
    for &(y, c) in &pool {
        let verified = modpow(config.a, c.den, config.n)? == 1;
        consider(PeriodCandidate {
            period: c.den,
            verified,
            source: CandidateSource::Single { sample: y, convergent: c },
        });
    }
    for (i, &(y1, c1)) in pool.iter().enumerate() {
        for &(y2, c2) in &pool[i + 1..] {
            if y1 == y2 {
                continue;
            }
            let m = lcm(c1.den, c2.den)?;
            if m >= config.n || m == c1.den || m == c2.den {
                continue;
            }
            let verified = modpow(config.a, m, config.n)? == 1;
            consider(PeriodCandidate {
                period: m,
                verified,
                source: CandidateSource::LcmPair { first: (y1, c1), second: (y2, c2) },
            });
        }
    }
    Ok(best)
}

/// One factoring attempt as recorded in the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttemptRecord {
    pub a: u64,
    pub sample: Option<u64>,
    pub period: Option<u64>,
    pub note: &'static str,
}

/// A successful factorization: both cofactors, with the per-attempt
/// trace that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// Sorted nontrivial pair (d, N/d).
    pub factors: Vec<u64>,
    pub trace: Vec<AttemptRecord>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Some((p, k)) when n = p^k for prime p and k >= 2.
fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 4 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut m = n;
            let mut k = 0u32;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            return if m == 1 && k >= 2 { Some((p, k)) } else { None };
        }
        p += 1;
    }
    None
}

/// Splits an odd composite non-prime-power N into two nontrivial
/// factors. Each attempt draws a fresh random base, runs the full
/// quantum pipeline for one sample, recovers a period, and tries the
/// even-period square-root split gcd(a^{P/2} +- 1, N).
pub fn factor(
    n: u64,
    max_attempts: u32,
    rng: &mut impl rand::Rng,
) -> Result<Factorization, ShorError> {
    if n < 3 {
        return Err(ShorError::NotFactorable(FactorRejection::TooSmall));
    }
    if n % 2 == 0 {
        return Err(ShorError::NotFactorable(FactorRejection::Even));
    }
    if is_prime(n) {
        return Err(ShorError::NotFactorable(FactorRejection::Prime));
    }
    if let Some((base, exponent)) = prime_power(n) {
        return Err(ShorError::NotFactorable(FactorRejection::PrimePower { base, exponent }));
    }
    if max_attempts == 0 {
        return Err(ShorError::BadParameter("max_attempts must be at least 1"));
    }

    let mut trace: Vec<AttemptRecord> = Vec::new();
    for _ in 0..max_attempts {
        let a = rng.gen_range(2..=n - 2);
        let g = gcd(a, n)?;
        if g != 1 {
            trace.push(AttemptRecord { a, sample: None, period: None, note: "shared factor" });
            let (lo, hi) = (g.min(n / g), g.max(n / g));
            return Ok(Factorization { factors: vec![lo, hi], trace });
        }
        let config = ShorConfig::new(n, a)?;
        let dist = shor_distribution(&config)?;
        let outcome = sample(&dist, rng)?;
        let OutcomeLabel::Character(chi) = &outcome.label else {
            return Err(ShorError::PreconditionViolated("expected a cyclic character label"));
        };
        let y = chi.freqs()[0];
        let Some(cand) = recover_period(&[y], &config)? else {
            trace.push(AttemptRecord { a, sample: Some(y), period: None, note: "no period" });
            continue;
        };
        let p = cand.period;
        if p % 2 != 0 {
            trace.push(AttemptRecord { a, sample: Some(y), period: Some(p), note: "odd period" });
            continue;
        }
        let half = modpow(a, p / 2, n)?;
        if half == n - 1 {
            trace.push(AttemptRecord {
                a,
                sample: Some(y),
                period: Some(p),
                note: "a^(P/2) = -1",
            });
            continue;
        }
        let d1 = gcd(half + 1, n)?;
        let d2 = gcd(if half == 0 { n - 1 } else { half - 1 }, n)?;
        let d = [d1, d2].into_iter().find(|&d| d > 1 && d < n);
        match d {
            Some(d) => {
                trace.push(AttemptRecord { a, sample: Some(y), period: Some(p), note: "split" });
                let (lo, hi) = (d.min(n / d), d.max(n / d));
                return Ok(Factorization { factors: vec![lo, hi], trace });
            }
            None => {
                trace.push(AttemptRecord {
                    a,
                    sample: Some(y),
                    period: Some(p),
                    note: "trivial gcd",
                });
            }
        }
    }
    Err(ShorError::AttemptsExhausted { trace })
}

/// The canonical dual instance: the oracle on Z_Q hiding the order-a
/// subgroup generated by Q/a, i.e. with exact period Q/a.
pub fn dual_shor_instance(q: u64, a: u64) -> Result<HsOracle, ShorError> {
    if a == 0 || q == 0 || q % a != 0 {
        return Err(ShorError::BadParameter("need a dividing Q"));
    }
    let group = FiniteAbelianGroup::cyclic(q)?;
    let period = q / a;
    let labels: Vec<u64> = (0..q).map(|x| x % period).collect();
    Ok(HsOracle::from_labels(OracleDomain::Abelian(group), &labels)?)
}

/// Result of the dual pipeline: the recovered a and the raw samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualShorOutcome {
    pub a: u64,
    pub samples: Vec<u64>,
}

/// Recovers a from an oracle on Z_Q with exact period Q/a by sampling
/// k times and taking the gcd of the nonzero samples.
///
/// The measurement distribution is computed exactly first and its
/// support checked to be a subgroup of Z_Q carrying uniform weight;
/// anything else means the oracle is not exactly periodic and is
/// rejected before any sampling.
pub fn dual_shor(
    q: u64,
    oracle: &HsOracle,
    k_samples: u32,
    rng: &mut impl rand::Rng,
) -> Result<DualShorOutcome, ShorError> {
    if k_samples == 0 {
        return Err(ShorError::BadParameter("k_samples must be at least 1"));
    }
    let OracleDomain::Abelian(g) = oracle.domain() else {
        return Err(ShorError::PreconditionViolated("domain must be Z_Q"));
    };
    if g.orders() != [q] {
        return Err(ShorError::PreconditionViolated("domain must be Z_Q for the given Q"));
    }

    let state = init_state(oracle)?;
    let state = apply_inverse_fourier_left(&state)?;
    let state = apply_oracle(&state, oracle)?;
    let state = apply_fourier_left(&state)?;
    let dist = measure_left_distribution(&state)?;

    let support: Vec<u64> =
        dist.iter()
            .enumerate()
            .filter(|(_, o)| o.probability > SUPPORT_TOL)
            .map(|(y, _)| y as u64)
            .collect();
    // exact period <=> support is a subgroup <d> with uniform weight
    let valid = match support.split_first() {
        Some((&0, rest)) => match rest.first() {
            None => true,
            Some(&d) => {
                q % d == 0
                    && support == (0..q).step_by(d as usize).collect::<Vec<_>>()
                    && dist
                        .iter()
                        .enumerate()
                        .all(|(y, o)| {
                            let expect =
                                if y as u64 % d == 0 { d as f64 / q as f64 } else { 0.0 };
                            (o.probability - expect).abs() <= SUPPORT_TOL
                        })
            }
        },
        _ => false,
    };
    if !valid {
        return Err(ShorError::PreconditionViolated(
            "oracle is not exactly periodic: support is not a uniform subgroup",
        ));
    }

    let mut samples = Vec::with_capacity(k_samples as usize);
    for _ in 0..k_samples {
        let outcome = sample(&dist, rng)?;
        let OutcomeLabel::Character(chi) = &outcome.label else {
            return Err(ShorError::PreconditionViolated("expected a cyclic character label"));
        };
        samples.push(chi.freqs()[0]);
    }
    let mut acc: Option<u64> = None;
    for &s in samples.iter().filter(|&&s| s != 0) {
        acc = Some(match acc {
            None => s,
            Some(g0) => gcd(g0, s)?,
        });
    }
    match acc {
        Some(a) => Ok(DualShorOutcome { a, samples }),
        None => Err(ShorError::AllSamplesZero { samples: k_samples }),
    }
}

/// A full-rank sublattice K of Z^n held in triangular (Hermite) form,
/// acting as the canonical oracle for the coset map Z^n -> Z^n / K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeOracle {
    rank: usize,
    /// Lower-triangular column basis: cols[j][i] = entry in row i, zero
    /// for i < j, positive diagonal.
    cols: Vec<Vec<i64>>,
    index: u64,
}

impl LatticeOracle {
    /// Builds the oracle from any finite generating set of the
    /// sublattice (each generator one vector of length rank). The
    /// generators must span a finite-index (full-rank) sublattice.
    pub fn new(rank: usize, generators: &[Vec<i64>]) -> Result<Self, ShorError> {
        if rank == 0 {
            return Err(ShorError::BadParameter("rank must be at least 1"));
        }
        if generators.is_empty() {
            return Err(ShorError::BadParameter("need at least one lattice generator"));
        }
        if generators.iter().any(|v| v.len() != rank) {
            return Err(ShorError::BadParameter("generator length must equal rank"));
        }
        // columns of the generator matrix, in i128 while eliminating
        let mut cols: Vec<Vec<i128>> = generators
            .iter()
            .map(|v| v.iter().map(|&x| x as i128).collect())
            .collect();
        // column-style triangularization: for each row, gcd-reduce all
        // later columns into the pivot column
        for row in 0..rank {
            loop {
                let mut nonzero: Vec<usize> =
                    (row..cols.len()).filter(|&j| cols[j][row] != 0).collect();
                match nonzero.len() {
                    0 => {
                        return Err(ShorError::BadParameter(
                            "generators do not span a finite-index sublattice",
                        ))
                    }
                    1 => {
                        let j = nonzero[0];
                        cols.swap(row, j);
                        break;
                    }
                    _ => {
                        // subtract the column with smaller |entry| from
                        // the one with larger, Euclid-style
                        nonzero.sort_by_key(|&j| cols[j][row].unsigned_abs());
                        let (small, big) = (nonzero[0], *nonzero.last().unwrap());
                        let q = cols[big][row] / cols[small][row];
                        for i in 0..rank {
                            let s = cols[small][i];
                            cols[big][i] -= q * s;
                        }
                    }
                }
            }
            if cols[row][row] < 0 {
                for x in cols[row].iter_mut() {
                    *x = -*x;
                }
            }
        }
        cols.truncate(rank);
        let mut index: u64 = 1;
        let mut out: Vec<Vec<i64>> = Vec::with_capacity(rank);
        for (j, col) in cols.iter().enumerate() {
            index = index
                .checked_mul(col[j] as u64)
                .ok_or(ShorError::BadParameter("quotient order overflows"))?;
            let mut fixed = Vec::with_capacity(rank);
            for &x in col {
                if x > i64::MAX as i128 || x < i64::MIN as i128 {
                    return Err(ShorError::BadParameter("lattice entries overflow"));
                }
                fixed.push(x as i64);
            }
            out.push(fixed);
        }
        Ok(LatticeOracle { rank, cols: out, index })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// |Z^n / K|, the product of the triangular diagonal.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Canonical coset representative: coordinate i reduced into
    /// [0, diag_i) by subtracting triangular basis columns.
    pub fn reduce(&self, x: &[i64]) -> Result<Vec<i64>, ShorError> {
        if x.len() != self.rank {
            return Err(ShorError::BadParameter("vector length must equal rank"));
        }
        let mut v: Vec<i128> = x.iter().map(|&c| c as i128).collect();
        for j in 0..self.rank {
            let d = self.cols[j][j] as i128;
            let q = v[j].div_euclid(d);
            for i in j..self.rank {
                v[i] -= q * self.cols[j][i] as i128;
            }
        }
        Ok(v.into_iter().map(|c| c as i64).collect())
    }

    pub fn contains(&self, x: &[i64]) -> Result<bool, ShorError> {
        Ok(self.reduce(x)?.iter().all(|&c| c == 0))
    }

    /// Mixed-radix label of the canonical representative; equal labels
    /// exactly characterize equal cosets.
    pub fn label(&self, x: &[i64]) -> Result<u64, ShorError> {
        let rep = self.reduce(x)?;
        let mut idx: u64 = 0;
        for (j, &c) in rep.iter().enumerate() {
            idx = idx * self.cols[j][j] as u64 + c as u64;
        }
        Ok(idx)
    }
}

/// Result of the wandering exponent search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WanderingOutcome {
    /// lcm of the summand orders found: the exponent of Z^n / K once
    /// enough directions have been tried.
    pub exponent: u64,
    pub rounds: u32,
    pub failures: u32,
    /// Accumulated value after each successful round.
    pub history: Vec<u64>,
}

/// Finds the exponent of the hidden finite quotient Z^n / K given only
/// the coset oracle phi (phi(x) = phi(y) iff x - y in K).
///
/// Each round draws a random primitive direction v, restricts phi to
/// the line through v (an exact period-P_v problem on Z with
/// P_v = ord(v + K)), pushes it onto Z_Q with 2 B^2 <= Q < 4 B^2 for
/// the caller-supplied period bound B, and recovers P_v with the
/// classic convergent walk. A verified denominator is then minimized
/// over its divisors with direct oracle checks, so the recovered value
/// is exactly P_v and the running lcm always divides the true exponent.
/// Stops once the lcm has survived `stability_rounds` consecutive
/// successful rounds unchanged.
pub fn wandering_shor_exponent<F>(
    phi: &F,
    rank: usize,
    period_bound: u64,
    stability_rounds: u32,
    max_rounds: u32,
    rng: &mut impl rand::Rng,
) -> Result<WanderingOutcome, ShorError>
where
    F: Fn(&[i64]) -> u64,
{
    if rank == 0 {
        return Err(ShorError::BadParameter("rank must be at least 1"));
    }
    if period_bound == 0 {
        return Err(ShorError::BadParameter("period bound must be at least 1"));
    }
    if stability_rounds == 0 || max_rounds == 0 {
        return Err(ShorError::BadParameter("round counts must be at least 1"));
    }
    let b_sq = period_bound
        .checked_mul(period_bound)
        .and_then(|s| s.checked_mul(2))
        .ok_or(ShorError::BadParameter("period bound overflows"))?;
    let q = b_sq
        .checked_next_power_of_two()
        .ok_or(ShorError::BadParameter("Q overflows"))?;
    debug_assert!(b_sq <= q && q < 2 * b_sq);

    let zero = vec![0i64; rank];
    let base_label = phi(&zero);
    let group = FiniteAbelianGroup::cyclic(q)?;
    group.check_dense()?;

    let mut acc: u64 = 1;
    let mut stable = 0u32;
    let mut failures = 0u32;
    let mut history: Vec<u64> = Vec::new();
    for round in 1..=max_rounds {
        let v = random_primitive_vector(rank, WANDER_COORD_BOUND, rng)?;
        let line = |m: i64| -> Vec<i64> { v.iter().map(|&c| c * m).collect() };

        // pushed one-line oracle over Z_Q
        let labels: Vec<u64> = (0..q as i64).map(|m| phi(&line(m))).collect();
        let oracle = HsOracle::from_labels(OracleDomain::Abelian(group.clone()), &labels)?;
        let state = init_state(&oracle)?;
        let state = apply_inverse_fourier_left(&state)?;
        let state = apply_oracle(&state, &oracle)?;
        let state = apply_fourier_left(&state)?;
        let dist = measure_left_distribution(&state)?;
        let outcome = sample(&dist, rng)?;
        let OutcomeLabel::Character(chi) = &outcome.label else {
            return Err(ShorError::PreconditionViolated("expected a cyclic character label"));
        };
        let y = chi.freqs()[0];

        // verified convergent denominator, then exact order by divisor
        // minimization: the smallest divisor d with phi(d v) = phi(0)
        // is ord(v + K) itself
        let mut found: Option<u64> = None;
        for c in convergents(y, q)? {
            if c.den < 1 || c.den > period_bound {
                continue;
            }
            if phi(&line(c.den as i64)) == base_label {
                found = Some(c.den);
                break;
            }
        }
        let Some(verified) = found else {
            failures += 1;
            continue;
        };
        let mut order = verified;
        for d in 1..=verified {
            if verified % d == 0 && phi(&line(d as i64)) == base_label {
                order = d;
                break;
            }
        }

        let next = lcm(acc, order)?;
        if next == acc {
            stable += 1;
        } else {
            acc = next;
            stable = 1;
        }
        history.push(acc);
        if stable >= stability_rounds {
            return Ok(WanderingOutcome { exponent: acc, rounds: round, failures, history });
        }
    }
    Err(ShorError::RoundBudget { best: acc, rounds: max_rounds, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn config_21() -> ShorConfig {
        ShorConfig::new(21, 2).unwrap()
    }

    #[test]
    fn config_picks_unique_power_of_two() {
        assert_eq!(config_21().q(), 512);
        for n in 3u64..200 {
            let c = match ShorConfig::new(n, 2) {
                Ok(c) => c,
                Err(_) => continue,
            };
            // brute force: exactly one power of two lies in [N^2, 2N^2)
            let mut hits = Vec::new();
            let mut p = 1u64;
            while p < 2 * n * n {
                if p >= n * n {
                    hits.push(p);
                }
                p *= 2;
            }
            assert_eq!(hits, [c.q()], "N={n}");
        }
        assert!(ShorConfig::new(2, 2).is_err());
        assert!(ShorConfig::new(21, 1).is_err());
        assert!(ShorConfig::new(21, 20).is_err());
    }

    #[test]
    fn power_table_matches_modpow_oracle() {
        let table = shor_powers(&config_21()).unwrap();
        assert_eq!(table[0], 1);
        assert_eq!(table[9], 8);
        for (x, &t) in table.iter().enumerate() {
            assert_eq!(t, modpow(2, x as u64, 21).unwrap());
        }
        let mut distinct = table.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn shared_divisor_is_reported_as_factor() {
        let config = ShorConfig::new(21, 6).unwrap();
        assert_eq!(
            shor_oracle(&config).unwrap_err(),
            ShorError::SharedFactor { a: 6, gcd: 3 }
        );
    }

    #[test]
    fn distribution_shape_for_n21() {
        let dist = shor_distribution(&config_21()).unwrap();
        let p: Vec<f64> = dist.iter().map(|o| o.probability).collect();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);

        // Prob(0) by direct residue counting: Q = 6*85 + 2, so classes
        // 0 and 1 mod 6 occur 86 times and the rest 85
        let expect0 = (2.0 * 86.0 * 86.0 + 4.0 * 85.0 * 85.0) / (512.0 * 512.0);
        assert!((p[0] - expect0).abs() < 1e-12);

        let peaks = [0usize, 85, 171, 256, 341, 427];
        for &y in &peaks {
            assert!(p[y] > p[(y + 511) % 512] && p[y] > p[(y + 1) % 512], "y={y}");
        }
        let mass: f64 = peaks.iter().map(|&y| p[y]).sum();
        assert!((0.77..=0.80).contains(&mass), "peak mass {mass}");
    }

    #[test]
    fn distribution_has_conjugate_symmetry() {
        for (n, a) in [(21u64, 2u64), (15, 2), (15, 7)] {
            let config = ShorConfig::new(n, a).unwrap();
            let dist = shor_distribution(&config).unwrap();
            let q = config.q() as usize;
            for y in 0..q {
                let neg = (q - y) % q;
                assert!(
                    (dist[y].probability - dist[neg].probability).abs() < 1e-9,
                    "N={n} a={a} y={y}"
                );
            }
        }
    }

    #[test]
    fn recover_period_examples() {
        let config = config_21();
        let c = recover_period(&[85], &config).unwrap().unwrap();
        assert_eq!(c.period, 6);
        assert!(c.verified);
        match c.source {
            CandidateSource::Single { sample, convergent } => {
                assert_eq!(sample, 85);
                assert_eq!((convergent.num, convergent.den), (1, 6));
            }
            other => panic!("unexpected source {other:?}"),
        }

        // 256 alone only offers denominators 1 and 2
        assert!(recover_period(&[256], &config).unwrap().is_none());
        // 0 carries no information
        assert!(recover_period(&[0], &config).unwrap().is_none());
        // 171 offers 1, 2, 3; the within-sample lcm is deliberately not taken
        assert!(recover_period(&[171], &config).unwrap().is_none());
        // 86 expands to 1/6 but sits 2/3 of a step away from it, past the
        // half-step gate, so nothing is recovered
        assert!(recover_period(&[86], &config).unwrap().is_none());
        // same on the mirrored side of the peak at 426.67
        assert!(recover_period(&[426], &config).unwrap().is_none());

        // combined, 256 and 427 recover the period
        let c = recover_period(&[256, 427], &config).unwrap().unwrap();
        assert_eq!(c.period, 6);

        // 256 and 171 only combine through the cross-sample lcm path
        let c = recover_period(&[256, 171], &config).unwrap().unwrap();
        assert_eq!(c.period, 6);
        assert!(matches!(c.source, CandidateSource::LcmPair { .. }));
    }

    #[test]
    fn recovered_period_is_minimal_verified() {
        let config = config_21();
        for samples in [&[85u64, 427][..], &[86, 341], &[256, 427, 171]] {
            let Some(c) = recover_period(samples, &config).unwrap() else { continue };
            assert_eq!(modpow(2, c.period, 21).unwrap(), 1);
            // re-derive every smaller candidate and check none verifies
            for r in 1..c.period {
                let from_single = samples
                    .iter()
                    .flat_map(|&y| convergents(y, 512).unwrap())
                    .any(|cv| cv.den == r);
                if from_single {
                    assert_ne!(modpow(2, r, 21).unwrap(), 1, "missed smaller r={r}");
                }
            }
        }
    }

    #[test]
    fn factor_small_semiprimes() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let f = factor(21, 32, &mut rng).unwrap();
        assert_eq!(f.factors, [3, 7]);
        assert_eq!(f.factors.iter().product::<u64>(), 21);

        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let f = factor(15, 32, &mut rng).unwrap();
        assert_eq!(f.factors, [3, 5]);

        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let f = factor(33, 32, &mut rng).unwrap();
        assert_eq!(f.factors, [3, 11]);
    }

    #[test]
    fn factor_rejects_bad_inputs() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(
            factor(9, 8, &mut rng).unwrap_err(),
            ShorError::NotFactorable(FactorRejection::PrimePower { base: 3, exponent: 2 })
        );
        assert_eq!(
            factor(17, 8, &mut rng).unwrap_err(),
            ShorError::NotFactorable(FactorRejection::Prime)
        );
        assert_eq!(
            factor(22, 8, &mut rng).unwrap_err(),
            ShorError::NotFactorable(FactorRejection::Even)
        );
        assert_eq!(
            factor(1, 8, &mut rng).unwrap_err(),
            ShorError::NotFactorable(FactorRejection::TooSmall)
        );
    }

    #[test]
    fn factor_trace_records_attempts() {
        // with one attempt some seeds fail; the trace must then hold
        // exactly that attempt, and successes must multiply back
        let mut exhausted = 0u32;
        for seed in 0..20 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            match factor(21, 1, &mut rng) {
                Ok(f) => {
                    assert_eq!(f.factors.iter().product::<u64>(), 21);
                    assert!(!f.trace.is_empty());
                }
                Err(ShorError::AttemptsExhausted { trace }) => {
                    exhausted += 1;
                    assert_eq!(trace.len(), 1);
                }
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert!(exhausted > 0, "every single-attempt run succeeded, test is vacuous");
    }

    #[test]
    fn dual_instance_distribution_is_uniform_on_multiples() {
        let oracle = dual_shor_instance(12, 3).unwrap();
        let state = init_state(&oracle).unwrap();
        let state = apply_inverse_fourier_left(&state).unwrap();
        let state = apply_oracle(&state, &oracle).unwrap();
        let state = apply_fourier_left(&state).unwrap();
        let dist = measure_left_distribution(&state).unwrap();
        for (y, o) in dist.iter().enumerate() {
            let expect = if y % 3 == 0 { 0.25 } else { 0.0 };
            assert!((o.probability - expect).abs() < 1e-9, "y={y}");
        }
    }

    #[test]
    fn dual_pipeline_recovers_a() {
        for (q, a) in [(12u64, 3u64), (12, 4), (512, 8), (16, 1)] {
            let oracle = dual_shor_instance(q, a).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            let out = dual_shor(q, &oracle, 8, &mut rng).unwrap();
            assert_eq!(out.a, a, "q={q} a={a}");
            assert_eq!(out.samples.len(), 8);
            for &s in &out.samples {
                assert_eq!(s % a.max(1), 0, "sample {s} not a multiple of {a}");
            }
        }
    }

    #[test]
    fn dual_pipeline_constant_oracle_is_inconclusive() {
        let oracle = dual_shor_instance(12, 12).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        assert_eq!(
            dual_shor(12, &oracle, 8, &mut rng).unwrap_err(),
            ShorError::AllSamplesZero { samples: 8 }
        );
    }

    #[test]
    fn dual_pipeline_rejects_non_periodic_oracle() {
        // blocks of four: constant on intervals, not on subgroup cosets
        let group = FiniteAbelianGroup::cyclic(12).unwrap();
        let labels: Vec<u64> = (0..12).map(|x| x / 4).collect();
        let oracle = HsOracle::from_labels(OracleDomain::Abelian(group), &labels).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        assert!(matches!(
            dual_shor(12, &oracle, 8, &mut rng).unwrap_err(),
            ShorError::PreconditionViolated(_)
        ));
    }

    #[test]
    fn lattice_oracle_shapes() {
        let lat = LatticeOracle::new(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(lat.index(), 6);
        // sheared and redundant generating sets give the same lattice
        let sheared = LatticeOracle::new(2, &[vec![2, 1], vec![0, 3]]).unwrap();
        assert_eq!(sheared.index(), 6);
        let redundant =
            LatticeOracle::new(2, &[vec![2, 0], vec![0, 3], vec![2, 3], vec![4, 6]]).unwrap();
        assert_eq!(redundant.index(), 6);
        for x0 in -5i64..=5 {
            for x1 in -5i64..=5 {
                assert_eq!(
                    redundant.label(&[x0, x1]).unwrap(),
                    lat.label(&[x0, x1]).unwrap()
                );
            }
        }

        assert!(LatticeOracle::new(2, &[vec![1, 1]]).is_err());
        assert!(LatticeOracle::new(2, &[vec![2, 0], vec![4, 0]]).is_err());
    }

    #[test]
    fn lattice_labels_are_coset_invariants() {
        let lat = LatticeOracle::new(2, &[vec![2, 1], vec![0, 3]]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..500 {
            let x = [rng.gen_range(-50i64..50), rng.gen_range(-50i64..50)];
            let k0 = rng.gen_range(-5i64..5);
            let k1 = rng.gen_range(-5i64..5);
            let shifted = [x[0] + 2 * k0, x[1] + k0 + 3 * k1];
            assert_eq!(lat.label(&x).unwrap(), lat.label(&shifted).unwrap());
        }
        // distinct canonical representatives get distinct labels
        let mut seen = alloc::collections::BTreeSet::new();
        for x0 in 0..2i64 {
            for x1 in 0..3i64 {
                seen.insert(lat.label(&[x0, x1]).unwrap());
            }
        }
        assert_eq!(seen.len(), 6);
        assert!(lat.contains(&[2, 1]).unwrap());
        assert!(!lat.contains(&[1, 0]).unwrap());
    }

    #[test]
    fn wandering_finds_exponent_of_z2_by_z3() {
        let lat = LatticeOracle::new(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        let phi = |x: &[i64]| lat.label(x).unwrap();
        for seed in 0..10 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let out = wandering_shor_exponent(&phi, 2, 8, 5, 200, &mut rng).unwrap();
            assert_eq!(out.exponent, 6, "seed {seed}");
            // the accumulated order only ever grows through divisors
            for &p in &out.history {
                assert_eq!(6 % p, 0, "intermediate {p} does not divide 6");
            }
        }
    }

    #[test]
    fn wandering_degenerates_to_classic_on_rank_one() {
        let lat = LatticeOracle::new(1, &[vec![6]]).unwrap();
        let phi = |x: &[i64]| lat.label(x).unwrap();
        for bound in [8u64, 21] {
            let mut rng = ChaCha12Rng::seed_from_u64(1);
            let out = wandering_shor_exponent(&phi, 1, bound, 4, 100, &mut rng).unwrap();
            assert_eq!(out.exponent, 6, "bound {bound}");
        }
    }

    #[test]
    fn wandering_trivial_quotient_returns_one() {
        let lat = LatticeOracle::new(2, &[vec![1, 0], vec![0, 1]]).unwrap();
        let phi = |x: &[i64]| lat.label(x).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let out = wandering_shor_exponent(&phi, 2, 4, 3, 50, &mut rng).unwrap();
        assert_eq!(out.exponent, 1);
        assert_eq!(out.rounds, 3);
        assert_eq!(out.failures, 0);
    }

    #[test]
    fn wandering_budget_exhaustion_is_inconclusive() {
        let lat = LatticeOracle::new(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        let phi = |x: &[i64]| lat.label(x).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        match wandering_shor_exponent(&phi, 2, 8, 50, 3, &mut rng) {
            Err(ShorError::RoundBudget { best, rounds, .. }) => {
                assert_eq!(rounds, 3);
                assert_eq!(6 % best, 0);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }
}
