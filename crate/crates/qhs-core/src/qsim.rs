//! Dense bipartite state-vector engine: a left register over a finite
//! group (abelian product of cyclic factors, or a small nonabelian group
//! with a validated irrep table) and a right register over an interned
//! target set.
//!
//! The pipeline convention is fixed once: with omega = exp(2 pi i / Q),
//! the forward transform on a cyclic factor sends |x> to
//! (1/sqrt Q) sum_y omega^{+xy} |y> and the inverse uses omega^{-uy}.
//! Nonabelian domains use the unitary weighted-irrep transform with
//! entries sqrt(|rep|/|G|) * conj(rep(g)[j][i]) at row (rep, i, j).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
// Float supplies cos/sin/sqrt on f64 in isolated no_std builds; redundant
// whenever std is linked anywhere in the crate graph (tests, the CLI).
#[allow(unused_imports)]
use num_traits::Float;

use crate::groups::{Character, FiniteAbelianGroup, GroupError, IrrepTable, Subgroup};

/// Hard cap on dense state size (amplitude count |G| * |S|).
pub const MAX_STATE_AMPLITUDES: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Group(GroupError),
    /// Oracle table length must equal the domain size.
    TableLength { expected: usize, got: usize },
    /// Target indices must be dense: every index below |S| occurs.
    TargetsNotDense,
    /// The dense state would exceed the amplitude cap.
    StateTooLarge { amplitudes: u64, limit: u64 },
    /// Squared norm was not 1 within tolerance.
    NotNormalized,
    /// Operation applied in the wrong left-register basis.
    WrongBasis { expected: LeftBasis, got: LeftBasis },
    /// State and oracle disagree about the domain or target count.
    DomainMismatch,
    /// Oracle application needs right-register support on s0 only.
    OracleSupport,
    /// A supplied distribution failed validation.
    BadDistribution(&'static str),
    /// Nonabelian domains need a trivial irrep to define |1^>.
    NoTrivialIrrep,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Group(e) => write!(f, "{e}"),
            SimError::TableLength { expected, got } => {
                write!(f, "oracle table has {got} entries, domain has {expected}")
            }
            SimError::TargetsNotDense => write!(f, "target indices must be dense 0..|S|-1"),
            SimError::StateTooLarge { amplitudes, limit } => {
                write!(f, "state needs {amplitudes} amplitudes, cap is {limit}")
            }
            SimError::NotNormalized => write!(f, "state is not normalized"),
            SimError::WrongBasis { expected, got } => {
                write!(f, "expected left basis {expected:?}, state is in {got:?}")
            }
            SimError::DomainMismatch => write!(f, "state and oracle domains differ"),
            SimError::OracleSupport => {
                write!(f, "oracle needs right-register support on s0 only")
            }
            SimError::BadDistribution(why) => write!(f, "bad distribution: {why}"),
            SimError::NoTrivialIrrep => write!(f, "irrep table has no trivial irrep"),
        }
    }
}

impl From<GroupError> for SimError {
    fn from(e: GroupError) -> Self {
        SimError::Group(e)
    }
}

/// The left-register domain.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleDomain {
    Abelian(FiniteAbelianGroup),
    Nonabelian(IrrepTable),
}

impl OracleDomain {
    pub fn size(&self) -> usize {
        match self {
            OracleDomain::Abelian(g) => g.cardinality() as usize,
            OracleDomain::Nonabelian(t) => t.size(),
        }
    }

    pub fn identity_index(&self) -> usize {
        match self {
            OracleDomain::Abelian(_) => 0,
            OracleDomain::Nonabelian(t) => t.identity(),
        }
    }
}

/// A hidden-structure oracle: a dense map from domain element indices to
/// interned target indices 0..|S|-1.
#[derive(Debug, Clone, PartialEq)]
pub struct HsOracle {
    domain: OracleDomain,
    table: Vec<u32>,
    num_targets: u32,
    s0: u32,
}

impl HsOracle {
    /// Wraps a pre-interned dense table.
    pub fn new(domain: OracleDomain, table: Vec<u32>) -> Result<Self, SimError> {
        let n = domain.size();
        if table.len() != n {
            return Err(SimError::TableLength { expected: n, got: table.len() });
        }
        let num_targets = table.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_targets as usize];
        for &t in &table {
            seen[t as usize] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(SimError::TargetsNotDense);
        }
        let s0 = table[domain.identity_index()];
        Ok(HsOracle { domain, table, num_targets, s0 })
    }

    /// Interns arbitrary labels to dense target indices in first-seen
    /// order, then wraps them.
    pub fn from_labels(domain: OracleDomain, labels: &[u64]) -> Result<Self, SimError> {
        let n = domain.size();
        if labels.len() != n {
            return Err(SimError::TableLength { expected: n, got: labels.len() });
        }
        let mut interned: Vec<u64> = Vec::new();
        let mut table = Vec::with_capacity(n);
        for &l in labels {
            let idx = match interned.iter().position(|&x| x == l) {
                Some(i) => i,
                None => {
                    interned.push(l);
                    interned.len() - 1
                }
            };
            table.push(idx as u32);
        }
        Self::new(domain, table)
    }

    /// The canonical coset-labeling oracle of a subgroup: phi(x) = the
    /// index of the coset x + K. Hides exactly K.
    pub fn coset_labeling(group: &FiniteAbelianGroup, k: &Subgroup) -> Result<Self, SimError> {
        group.check_dense()?;
        let n = group.cardinality() as usize;
        let mut coset_of = vec![u64::MAX; n];
        let mut next_label = 0u64;
        for idx in 0..n {
            if coset_of[idx] != u64::MAX {
                continue;
            }
            let x = group.element_at(idx)?;
            for h in k.elements() {
                let y = group.add(&x, h)?;
                coset_of[group.index_of(&y)?] = next_label;
            }
            next_label += 1;
        }
        Self::from_labels(OracleDomain::Abelian(group.clone()), &coset_of)
    }

    pub fn domain(&self) -> &OracleDomain {
        &self.domain
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn num_targets(&self) -> u32 {
        self.num_targets
    }

    pub fn s0(&self) -> u32 {
        self.s0
    }
}

/// Which basis the left register is currently expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftBasis {
    /// Group element basis |g>.
    Element,
    /// Character basis (abelian) or irrep-entry basis (nonabelian).
    Dual,
}

/// Dense two-register state, amplitudes row-major over (left, right).
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    domain: OracleDomain,
    basis: LeftBasis,
    right_dim: usize,
    amps: Vec<Complex64>,
}

pub const NORM_TOL: f64 = 1e-9;

impl BipartiteState {
    /// Wraps explicit amplitudes; must be normalized within 1e-9.
    pub fn from_amplitudes(
        domain: OracleDomain,
        basis: LeftBasis,
        right_dim: usize,
        amps: Vec<Complex64>,
    ) -> Result<Self, SimError> {
        let left = domain.size() as u64;
        let need = left * right_dim as u64;
        if need > MAX_STATE_AMPLITUDES {
            return Err(SimError::StateTooLarge { amplitudes: need, limit: MAX_STATE_AMPLITUDES });
        }
        if amps.len() as u64 != need {
            return Err(SimError::BadDistribution("amplitude count mismatch"));
        }
        let state = BipartiteState { domain, basis, right_dim, amps };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn domain(&self) -> &OracleDomain {
        &self.domain
    }

    pub fn basis(&self) -> LeftBasis {
        self.basis
    }

    pub fn left_dim(&self) -> usize {
        self.domain.size()
    }

    pub fn right_dim(&self) -> usize {
        self.right_dim
    }

    pub fn amp(&self, left: usize, right: usize) -> Complex64 {
        self.amps[left * self.right_dim + right]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_normalized(&self) -> Result<(), SimError> {
        if (self.norm_sqr() - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized);
        }
        Ok(())
    }
}

/// |psi0> = |1^>|s0>: the trivial character (or trivial irrep entry) on
/// the left, the interned index of phi(identity) on the right.
pub fn init_state(oracle: &HsOracle) -> Result<BipartiteState, SimError> {
    let left = oracle.domain.size() as u64;
    let right = oracle.num_targets as u64;
    let need = left * right;
    if need > MAX_STATE_AMPLITUDES {
        return Err(SimError::StateTooLarge { amplitudes: need, limit: MAX_STATE_AMPLITUDES });
    }
    if let OracleDomain::Abelian(g) = &oracle.domain {
        g.check_dense()?;
    }
    let trivial_index = match &oracle.domain {
        OracleDomain::Abelian(_) => 0,
        OracleDomain::Nonabelian(t) => {
            let rep = t.trivial_irrep().ok_or(SimError::NoTrivialIrrep)?;
            t.entry_index(rep, 0, 0)
        }
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); need as usize];
    amps[trivial_index * oracle.num_targets as usize + oracle.s0 as usize] = Complex64::new(1.0, 0.0);
    Ok(BipartiteState {
        domain: oracle.domain.clone(),
        basis: LeftBasis::Dual,
        right_dim: oracle.num_targets as usize,
        amps,
    })
}

/// Forward transform on the left register (element basis to dual basis).
pub fn apply_fourier_left(state: &BipartiteState) -> Result<BipartiteState, SimError> {
    transform_left(state, Direction::Forward)
}

/// Inverse transform on the left register (dual basis to element basis).
pub fn apply_inverse_fourier_left(state: &BipartiteState) -> Result<BipartiteState, SimError> {
    transform_left(state, Direction::Inverse)
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Forward,
    Inverse,
}

fn transform_left(state: &BipartiteState, dir: Direction) -> Result<BipartiteState, SimError> {
    state.check_normalized()?;
    let (need, produces) = match dir {
        Direction::Forward => (LeftBasis::Element, LeftBasis::Dual),
        Direction::Inverse => (LeftBasis::Dual, LeftBasis::Element),
    };
    if state.basis != need {
        return Err(SimError::WrongBasis { expected: need, got: state.basis });
    }
    let mut amps = state.amps.clone();
    match &state.domain {
        OracleDomain::Abelian(g) => {
            let sign = match dir {
                Direction::Forward => 1.0,
                Direction::Inverse => -1.0,
            };
            abelian_transform(&mut amps, g, state.right_dim, sign);
        }
        OracleDomain::Nonabelian(t) => {
            let u = weighted_irrep_matrix(t);
            let conj = dir == Direction::Inverse;
            amps = dense_left_mul(&u, &state.amps, t.size(), state.right_dim, conj);
        }
    }
    Ok(BipartiteState {
        domain: state.domain.clone(),
        basis: produces,
        right_dim: state.right_dim,
        amps,
    })
}

/// Per-factor 1D transforms along the left axis; sign +1 is the forward
/// convention omega^{+xy}.
fn abelian_transform(amps: &mut [Complex64], g: &FiniteAbelianGroup, right_dim: usize, sign: f64) {
    let orders = g.orders();
    // suffix[i] = product of orders after factor i
    let rank = orders.len();
    let mut scratch: Vec<Complex64> = Vec::new();
    let mut suffix = 1usize;
    for i in (0..rank).rev() {
        let q = orders[i] as usize;
        let step = suffix * right_dim;
        let outer = amps.len() / (q * step);
        scratch.resize(q, Complex64::new(0.0, 0.0));
        for o in 0..outer {
            for rem in 0..step {
                let base = o * q * step + rem;
                for t in 0..q {
                    scratch[t] = amps[base + t * step];
                }
                line_dft(&mut scratch, sign);
                for t in 0..q {
                    amps[base + t * step] = scratch[t];
                }
            }
        }
        suffix *= q;
    }
}

/// 1D DFT with kernel omega^{sign * xy} and 1/sqrt(q) normalization.
/// Power-of-two lengths take the fast path; everything else goes through
/// the direct quadratic evaluation.
fn line_dft(buf: &mut [Complex64], sign: f64) {
    let q = buf.len();
    if q == 1 {
        return;
    }
    if q.is_power_of_two() {
        fft_pow2(buf, sign);
    } else {
        direct_dft(buf, sign);
    }
    let scale = 1.0 / (q as f64).sqrt();
    for a in buf.iter_mut() {
        *a *= scale;
    }
}

fn fft_pow2(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    // bit reversal
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2usize;
    while len <= n {
        let ang = sign * core::f64::consts::TAU / len as f64;
        let half = len / 2;
        let mut i = 0;
        while i < n {
            for k in 0..half {
                // fresh twiddle per butterfly keeps error flat in n
                let w = Complex64::new((ang * k as f64).cos(), (ang * k as f64).sin());
                let u = buf[i + k];
                let v = buf[i + k + half] * w;
                buf[i + k] = u + v;
                buf[i + k + half] = u - v;
            }
            i += len;
        }
        len <<= 1;
    }
}

fn direct_dft(buf: &mut [Complex64], sign: f64) {
    let q = buf.len();
    let mut tw = Vec::with_capacity(q);
    for k in 0..q {
        let ang = sign * core::f64::consts::TAU * k as f64 / q as f64;
        tw.push(Complex64::new(ang.cos(), ang.sin()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); q];
    for (y, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &v) in buf.iter().enumerate() {
            acc += v * tw[x * y % q];
        }
        *slot = acc;
    }
    buf.copy_from_slice(&out);
}

/// Unitary weighted-irrep transform matrix: row (rep,i,j), column g,
/// entry sqrt(deg/|G|) * conj(rep(g)[j][i]).
fn weighted_irrep_matrix(t: &IrrepTable) -> Vec<Complex64> {
    let n = t.size();
    let mut u = vec![Complex64::new(0.0, 0.0); n * n];
    let mut row = 0usize;
    for rep in t.irreps() {
        let w = (rep.degree as f64 / n as f64).sqrt();
        for i in 0..rep.degree {
            for j in 0..rep.degree {
                for g in 0..n {
                    u[row * n + g] = rep.mats[g].at(j, i).conj() * w;
                }
                row += 1;
            }
        }
    }
    debug_assert_eq!(row, n);
    u
}

/// out = M * in (or conj-transpose(M) * in) applied to the left axis.
fn dense_left_mul(
    m: &[Complex64],
    amps: &[Complex64],
    n: usize,
    right_dim: usize,
    conj_transpose: bool,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for row in 0..n {
        for col in 0..n {
            let entry = if conj_transpose { m[col * n + row].conj() } else { m[row * n + col] };
            if entry == Complex64::new(0.0, 0.0) {
                continue;
            }
            let src = col * right_dim;
            let dst = row * right_dim;
            for s in 0..right_dim {
                out[dst + s] += entry * amps[src + s];
            }
        }
    }
    out
}

/// The oracle unitary: on the slice right = s0 it swaps |g>|s0> with
/// |g>|phi(g)>; the completion is the identity elsewhere, so the input
/// must be supported on right = s0 only.
pub fn apply_oracle(state: &BipartiteState, oracle: &HsOracle) -> Result<BipartiteState, SimError> {
    state.check_normalized()?;
    if state.basis != LeftBasis::Element {
        return Err(SimError::WrongBasis { expected: LeftBasis::Element, got: state.basis });
    }
    if state.domain != oracle.domain || state.right_dim != oracle.num_targets as usize {
        return Err(SimError::DomainMismatch);
    }
    let s0 = oracle.s0 as usize;
    let rd = state.right_dim;
    for (i, a) in state.amps.iter().enumerate() {
        if i % rd != s0 && a.norm_sqr() > 1e-24 {
            return Err(SimError::OracleSupport);
        }
    }
    let mut amps = state.amps.clone();
    for (g, &t) in oracle.table.iter().enumerate() {
        let t = t as usize;
        if t != s0 {
            amps.swap(g * rd + s0, g * rd + t);
        }
    }
    Ok(BipartiteState {
        domain: state.domain.clone(),
        basis: state.basis,
        right_dim: rd,
        amps,
    })
}

/// Index permutation realized by [`apply_oracle`] on the full basis,
/// exposed so the permutation property is structurally checkable.
pub fn oracle_permutation(oracle: &HsOracle) -> Vec<usize> {
    let rd = oracle.num_targets as usize;
    let s0 = oracle.s0 as usize;
    let mut perm: Vec<usize> = (0..oracle.domain.size() * rd).collect();
    for (g, &t) in oracle.table.iter().enumerate() {
        let t = t as usize;
        if t != s0 {
            perm.swap(g * rd + s0, g * rd + t);
        }
    }
    perm
}

/// Measurement label of a left basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutcomeLabel {
    /// Dual basis over an abelian domain.
    Character(Character),
    /// Dual basis over a nonabelian domain: entry (i, j) of an irrep.
    IrrepEntry { irrep: usize, row: usize, col: usize },
    /// Element basis.
    RawLeft(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: OutcomeLabel,
    pub probability: f64,
    /// The right-register amplitude slice at this label, unnormalized:
    /// probability = squared norm of residual.
    pub residual: Vec<Complex64>,
}

/// Full measurement distribution of the left register, one outcome per
/// left basis label, in left index order.
pub fn measure_left_distribution(state: &BipartiteState) -> Result<Vec<MeasurementOutcome>, SimError> {
    state.check_normalized()?;
    let rd = state.right_dim;
    let mut out = Vec::with_capacity(state.left_dim());
    for l in 0..state.left_dim() {
        let residual: Vec<Complex64> = state.amps[l * rd..(l + 1) * rd].to_vec();
        let probability: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
        let label = match (&state.domain, state.basis) {
            (_, LeftBasis::Element) => OutcomeLabel::RawLeft(l),
            (OracleDomain::Abelian(g), LeftBasis::Dual) => {
                OutcomeLabel::Character(g.character_at(l)?)
            }
            (OracleDomain::Nonabelian(t), LeftBasis::Dual) => {
                let (irrep, row, col) = t.entry_at(l);
                OutcomeLabel::IrrepEntry { irrep, row, col }
            }
        };
        out.push(MeasurementOutcome { label, probability, residual });
    }
    Ok(out)
}

/// Draws one outcome index from a measurement distribution. Validates
/// the distribution (nonnegative, sums to 1 within 1e-6) and is
/// deterministic for a fixed RNG stream.
pub fn sample<'a>(
    dist: &'a [MeasurementOutcome],
    rng: &mut impl rand::Rng,
) -> Result<&'a MeasurementOutcome, SimError> {
    if dist.is_empty() {
        return Err(SimError::BadDistribution("empty distribution"));
    }
    let mut total = 0.0f64;
    for o in dist {
        if !(o.probability >= -1e-12) || !o.probability.is_finite() {
            return Err(SimError::BadDistribution("negative or non-finite probability"));
        }
        total += o.probability;
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(SimError::BadDistribution("probabilities do not sum to 1"));
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0f64;
    for o in dist {
        acc += o.probability;
        if u < acc {
            return Ok(o);
        }
    }
    Ok(dist.last().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{annihilator, FiniteAbelianGroup, IrrepTable, Subgroup};
    use crate::numtheory::modpow;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cyclic_oracle(q: u64, labels: impl Fn(u64) -> u64) -> HsOracle {
        let g = FiniteAbelianGroup::cyclic(q).unwrap();
        let table: Vec<u64> = (0..q).map(labels).collect();
        HsOracle::from_labels(OracleDomain::Abelian(g), &table).unwrap()
    }

    /// Runs the full four-step pipeline and returns the measured
    /// distribution.
    fn pipeline(oracle: &HsOracle) -> Vec<MeasurementOutcome> {
        let s = init_state(oracle).unwrap();
        let s = apply_inverse_fourier_left(&s).unwrap();
        let s = apply_oracle(&s, oracle).unwrap();
        let s = apply_fourier_left(&s).unwrap();
        measure_left_distribution(&s).unwrap()
    }

    fn random_state(
        domain: OracleDomain,
        basis: LeftBasis,
        right_dim: usize,
        rng: &mut impl Rng,
    ) -> BipartiteState {
        let n = domain.size() * right_dim;
        let mut amps: Vec<Complex64> = (0..n)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        BipartiteState::from_amplitudes(domain, basis, right_dim, amps).unwrap()
    }

    #[test]
    fn init_state_examples() {
        let oracle = cyclic_oracle(2, |x| x);
        let s = init_state(&oracle).unwrap();
        assert_eq!(s.amp(0, 0), c(1.0, 0.0));
        assert_eq!(s.amp(1, 0), c(0.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);

        // the classic factoring instance: phi(x) = 2^x mod 21 over Z_512
        let oracle = cyclic_oracle(512, |x| modpow(2, x, 21).unwrap());
        let s = init_state(&oracle).unwrap();
        // 1 mod 21 is the image of x = 0, so it interns to target 0
        assert_eq!(oracle.s0(), 0);
        assert_eq!(s.amp(0, 0), c(1.0, 0.0));
        assert_eq!(s.basis(), LeftBasis::Dual);
    }

    #[test]
    fn inverse_fourier_gives_uniform_superposition() {
        let oracle = cyclic_oracle(4, |x| x % 2);
        let s = apply_inverse_fourier_left(&init_state(&oracle).unwrap()).unwrap();
        for g in 0..4 {
            assert!((s.amp(g, oracle.s0() as usize) - c(0.5, 0.0)).norm() < 1e-12);
        }

        // Z2 x Z2 looks like a double Hadamard
        let g22 = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let oracle =
            HsOracle::from_labels(OracleDomain::Abelian(g22), &[0, 1, 2, 3]).unwrap();
        let s = apply_inverse_fourier_left(&init_state(&oracle).unwrap()).unwrap();
        for g in 0..4 {
            assert!((s.amp(g, 0) - c(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_of_uniform_is_point_mass() {
        let g = FiniteAbelianGroup::cyclic(12).unwrap();
        let amps: Vec<Complex64> =
            (0..12).map(|_| c(1.0 / (12.0f64).sqrt(), 0.0)).collect();
        let s = BipartiteState::from_amplitudes(
            OracleDomain::Abelian(g),
            LeftBasis::Element,
            1,
            amps,
        )
        .unwrap();
        let s = apply_fourier_left(&s).unwrap();
        assert!((s.amp(0, 0) - c(1.0, 0.0)).norm() < 1e-9);
        for y in 1..12 {
            assert!(s.amp(y, 0).norm() < 1e-9);
        }
    }

    #[test]
    fn fourier_inverse_roundtrip_random_states() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let shapes: [&[u64]; 5] = [&[4], &[6], &[2, 2], &[8, 3], &[2, 3, 5]];
        for orders in shapes {
            let g = FiniteAbelianGroup::new(orders.to_vec()).unwrap();
            for _ in 0..100 {
                let s = random_state(OracleDomain::Abelian(g.clone()), LeftBasis::Element, 2, &mut rng);
                let t = apply_inverse_fourier_left(&apply_fourier_left(&s).unwrap()).unwrap();
                let dev: f64 = s
                    .amplitudes()
                    .iter()
                    .zip(t.amplitudes())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-9, "roundtrip deviation {dev} on {orders:?}");
            }
        }
    }

    #[test]
    fn fast_and_direct_dft_agree() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for q in [2usize, 4, 8, 16, 64, 256] {
            let mut buf: Vec<Complex64> =
                (0..q).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let mut direct = buf.clone();
            fft_pow2(&mut buf, 1.0);
            direct_dft(&mut direct, 1.0);
            let dev: f64 =
                buf.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(dev < 1e-9, "q={q} dev={dev}");
        }
    }

    #[test]
    fn forward_convention_is_positive_exponent() {
        // F|1> on Z_4 must have amplitude omega^{+y} at |y>, omega = i.
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[1] = c(1.0, 0.0);
        let s = BipartiteState::from_amplitudes(OracleDomain::Abelian(g), LeftBasis::Element, 1, amps)
            .unwrap();
        let s = apply_fourier_left(&s).unwrap();
        let expect = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        for (y, e) in expect.iter().enumerate() {
            assert!((s.amp(y, 0) - e).norm() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn oracle_moves_column_and_preserves_norm() {
        let oracle = cyclic_oracle(512, |x| modpow(2, x, 21).unwrap());
        let s = apply_inverse_fourier_left(&init_state(&oracle).unwrap()).unwrap();
        let s = apply_oracle(&s, &oracle).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        let inv_sqrt = 1.0 / (512.0f64).sqrt();
        for x in 0..512usize {
            let t = oracle.table()[x] as usize;
            assert!((s.amp(x, t) - c(inv_sqrt, 0.0)).norm() < 1e-12);
        }

        // constant oracle keeps the right register on s0
        let oracle = cyclic_oracle(8, |_| 7);
        let s = apply_oracle(
            &apply_inverse_fourier_left(&init_state(&oracle).unwrap()).unwrap(),
            &oracle,
        )
        .unwrap();
        for x in 0..8 {
            assert!((s.amp(x, 0).norm() - 1.0 / (8.0f64).sqrt()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn oracle_rejects_support_outside_s0() {
        let oracle = cyclic_oracle(2, |x| x);
        let amps = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let s = BipartiteState::from_amplitudes(
            oracle.domain().clone(),
            LeftBasis::Element,
            2,
            amps,
        )
        .unwrap();
        // support is on right=1 but s0=0
        assert_eq!(apply_oracle(&s, &oracle).unwrap_err(), SimError::OracleSupport);
    }

    #[test]
    fn oracle_is_structurally_a_permutation() {
        for q in [6u64, 12, 16] {
            let oracle = cyclic_oracle(q, |x| x % 3);
            let perm = oracle_permutation(&oracle);
            let mut seen = vec![false; perm.len()];
            for &p in &perm {
                assert!(!seen[p]);
                seen[p] = true;
            }
        }
    }

    /// Direct Step-3/Step-4 evaluation: residual(y) = (1/Q) sum_x
    /// omega^{xy} e_{phi(x)} and Prob(y) = its squared norm.
    fn brute_distribution(oracle: &HsOracle) -> Vec<(Vec<Complex64>, f64)> {
        let q = oracle.domain().size();
        let rd = oracle.num_targets() as usize;
        let mut out = Vec::with_capacity(q);
        for y in 0..q {
            let mut residual = vec![c(0.0, 0.0); rd];
            for (x, &t) in oracle.table().iter().enumerate() {
                let ang = core::f64::consts::TAU * (x * y % q) as f64 / q as f64;
                residual[t as usize] += c(ang.cos(), ang.sin());
            }
            for r in residual.iter_mut() {
                *r /= q as f64;
            }
            let p: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
            out.push((residual, p));
        }
        out
    }

    #[test]
    fn composite_pipeline_matches_brute_force_on_shor_instance() {
        let oracle = cyclic_oracle(512, |x| modpow(2, x, 21).unwrap());
        let dist = pipeline(&oracle);
        let brute = brute_distribution(&oracle);
        let total: f64 = dist.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for (y, o) in dist.iter().enumerate() {
            assert!((o.probability - brute[y].1).abs() < 1e-9, "y={y}");
            for (a, b) in o.residual.iter().zip(&brute[y].0) {
                assert!((a - b).norm() < 1e-9);
            }
        }
        // Prob(85) is a peak: strictly larger than its neighbors
        assert!(dist[85].probability > dist[84].probability);
        assert!(dist[85].probability > dist[86].probability);
    }

    #[test]
    fn constant_oracle_measures_trivial_character() {
        let oracle = cyclic_oracle(8, |_| 3);
        let dist = pipeline(&oracle);
        assert!((dist[0].probability - 1.0).abs() < 1e-9);
        for o in &dist[1..] {
            assert!(o.probability < 1e-12);
        }
    }

    #[test]
    fn exact_period_three_on_z6() {
        let oracle = cyclic_oracle(6, |x| x % 3);
        let dist = pipeline(&oracle);
        for (y, o) in dist.iter().enumerate() {
            let expect = if y % 2 == 0 { 1.0 / 3.0 } else { 0.0 };
            assert!((o.probability - expect).abs() < 1e-9, "y={y}");
        }
    }

    #[test]
    fn exact_period_uniform_on_annihilator_all_divisors() {
        for q in [4u64, 6, 8, 12, 16, 30] {
            for r in (1..=q).filter(|r| q % r == 0) {
                let oracle = cyclic_oracle(q, |x| x % r);
                let dist = pipeline(&oracle);
                let brute = brute_distribution(&oracle);
                for (y, o) in dist.iter().enumerate() {
                    assert!((o.probability - brute[y].1).abs() < 1e-9);
                    let expect = if (y as u64) % (q / r) == 0 { 1.0 / r as f64 } else { 0.0 };
                    assert!((o.probability - expect).abs() < 1e-9, "q={q} r={r} y={y}");
                }
            }
        }
    }

    #[test]
    fn measured_labels_are_characters_in_the_annihilator() {
        let g = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let k = Subgroup::generated(&g, &[g.element(&[1, 1]).unwrap()]).unwrap();
        let oracle = HsOracle::coset_labeling(&g, &k).unwrap();
        let dist = pipeline(&oracle);
        let ann = annihilator(&g, &k).unwrap();
        let mut support = 0;
        for o in &dist {
            if o.probability > 1e-12 {
                support += 1;
                match &o.label {
                    OutcomeLabel::Character(chi) => {
                        let as_elem = g.element(chi.freqs()).unwrap();
                        assert!(ann.contains(&as_elem));
                        assert!((o.probability - 0.5).abs() < 1e-9);
                    }
                    other => panic!("unexpected label {other:?}"),
                }
            }
        }
        assert_eq!(support, 2);
    }

    #[test]
    fn unitarity_across_transforms() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let g = FiniteAbelianGroup::new(vec![4, 3]).unwrap();
        let s = random_state(OracleDomain::Abelian(g), LeftBasis::Element, 3, &mut rng);
        let t = apply_fourier_left(&s).unwrap();
        assert!((t.norm_sqr() - s.norm_sqr()).abs() < 1e-9);

        let t3 = IrrepTable::s3();
        let s = random_state(OracleDomain::Nonabelian(t3), LeftBasis::Element, 2, &mut rng);
        let t = apply_fourier_left(&s).unwrap();
        assert!((t.norm_sqr() - s.norm_sqr()).abs() < 1e-9);
        let back = apply_inverse_fourier_left(&t).unwrap();
        let dev: f64 = s
            .amplitudes()
            .iter()
            .zip(back.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9);
    }

    #[test]
    fn s3_kernel_a3_pipeline() {
        let t = IrrepTable::s3();
        // phi labels the A3 cosets: even permutations 0, odd 1
        let labels = [0u64, 0, 0, 1, 1, 1];
        let oracle = HsOracle::from_labels(OracleDomain::Nonabelian(t.clone()), &labels).unwrap();
        let dist = pipeline(&oracle);
        let total: f64 = dist.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);

        // direct inner products: Phi(rep_ij^t) = sum_g conj(rep(g)[j][i]) e_{phi(g)};
        // sim probability must equal deg * <Phi|Phi> / |G|^2
        for o in &dist {
            let OutcomeLabel::IrrepEntry { irrep, row, col } = o.label else {
                panic!("wrong label kind")
            };
            let rep = &t.irreps()[irrep];
            let mut phi_vec = [c(0.0, 0.0); 2];
            for g in 0..6 {
                phi_vec[labels[g] as usize] += rep.mats[g].at(col, row).conj();
            }
            let inner: f64 = phi_vec.iter().map(|a| a.norm_sqr()).sum();
            let direct = rep.degree as f64 * inner / 36.0;
            assert!((o.probability - direct).abs() < 1e-9);
            // only irreps trivial on A3 may carry probability
            let trivial_on_a3 = (0..3).all(|g| {
                let m = &rep.mats[g];
                let mut dev = 0.0f64;
                for i in 0..rep.degree {
                    for j in 0..rep.degree {
                        let want = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                        dev = dev.max((m.at(i, j) - want).norm());
                    }
                }
                dev < 1e-9
            });
            if !trivial_on_a3 {
                assert!(o.probability < 1e-12, "irrep {irrep} entry ({row},{col})");
            }
        }
        // the two degree-1 irreps each carry probability 1/2
        assert!((dist[0].probability - 0.5).abs() < 1e-9);
        assert!((dist[1].probability - 0.5).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_and_correct() {
        let oracle = cyclic_oracle(2, |x| x);
        let dist = pipeline(&oracle);
        // uniform over the two characters
        assert!((dist[0].probability - 0.5).abs() < 1e-9);

        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let first: Vec<usize> = (0..20)
            .map(|_| match sample(&dist, &mut rng).unwrap().label {
                OutcomeLabel::Character(ref chi) => chi.freqs()[0] as usize,
                _ => unreachable!(),
            })
            .collect();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let second: Vec<usize> = (0..20)
            .map(|_| match sample(&dist, &mut rng).unwrap().label {
                OutcomeLabel::Character(ref chi) => chi.freqs()[0] as usize,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(first, second);

        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut counts = [0u32; 2];
        for _ in 0..100_000 {
            let o = sample(&dist, &mut rng).unwrap();
            if let OutcomeLabel::Character(ref chi) = o.label {
                counts[chi.freqs()[0] as usize] += 1;
            }
        }
        let freq0 = counts[0] as f64 / 100_000.0;
        assert!((freq0 - 0.5).abs() < 0.01);

        // point mass always yields its label
        let point = vec![
            MeasurementOutcome {
                label: OutcomeLabel::RawLeft(0),
                probability: 0.0,
                residual: vec![],
            },
            MeasurementOutcome {
                label: OutcomeLabel::RawLeft(1),
                probability: 1.0,
                residual: vec![],
            },
        ];
        for _ in 0..10 {
            assert_eq!(sample(&point, &mut rng).unwrap().label, OutcomeLabel::RawLeft(1));
        }

        // malformed distributions are rejected
        let bad = vec![MeasurementOutcome {
            label: OutcomeLabel::RawLeft(0),
            probability: 0.5,
            residual: vec![],
        }];
        assert!(sample(&bad, &mut rng).is_err());
    }

    #[test]
    fn basis_tracking_rejects_misuse() {
        let oracle = cyclic_oracle(4, |x| x % 2);
        let s = init_state(&oracle).unwrap();
        // oracle before F^-1: state is still in the dual basis
        assert!(matches!(
            apply_oracle(&s, &oracle).unwrap_err(),
            SimError::WrongBasis { .. }
        ));
        assert!(matches!(
            apply_fourier_left(&s).unwrap_err(),
            SimError::WrongBasis { .. }
        ));
    }
}
