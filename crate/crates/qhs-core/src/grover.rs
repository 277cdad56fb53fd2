//! Grover search on an n-qubit register, together with the structural
//! facts that place it inside the hidden-subgroup frame: coset
//! representatives of a point stabilizer in the symmetric group, the
//! oracle pushed onto coset labels, and the normal core of the
//! stabilizer.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
// Float supplies sqrt/asin/sin/round on f64 in isolated no_std builds;
// redundant whenever std is linked anywhere in the crate graph.
#[allow(unused_imports)]
use num_traits::Float;

/// Explicit enumeration of the symmetric group is capped at this
/// degree (8! = 40320 permutations).
pub const MAX_PERMUTATION_DEGREE: usize = 8;

/// Register sizes are capped to keep dense states desk-sized.
pub const MAX_QUBITS: u32 = 24;

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GroverError {
    IndexOutOfRange { index: usize, size: usize },
    /// The register length must be a power of two for the tensor
    /// Hadamard to exist.
    NotPowerOfTwo { size: usize },
    NotNormalized,
    TooManyQubits { qubits: u32 },
    /// Symmetric-group enumeration requested past the cap.
    DegreeTooLarge { degree: usize },
    NotBijective,
    BadParameter(&'static str),
}

impl fmt::Display for GroverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroverError::IndexOutOfRange { index, size } => {
                write!(f, "index {index} out of range for size {size}")
            }
            GroverError::NotPowerOfTwo { size } => {
                write!(f, "register length {size} is not a power of two")
            }
            GroverError::NotNormalized => write!(f, "state is not normalized"),
            GroverError::TooManyQubits { qubits } => {
                write!(f, "{qubits} qubits exceed the cap of {MAX_QUBITS}")
            }
            GroverError::DegreeTooLarge { degree } => {
                write!(f, "degree {degree} exceeds the enumeration cap {MAX_PERMUTATION_DEGREE}")
            }
            GroverError::NotBijective => write!(f, "image array is not a permutation"),
            GroverError::BadParameter(why) => write!(f, "bad parameter: {why}"),
        }
    }
}

/// Dense state of an n-qubit register: 2^n amplitudes, unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GroverState {
    amps: Vec<Complex64>,
}

impl GroverState {
    /// Wraps an amplitude vector; the length must be a power of two
    /// (at least 2) and the norm must be 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, GroverError> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(GroverError::NotPowerOfTwo { size: amps.len() });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(GroverError::NotNormalized);
        }
        Ok(GroverState { amps })
    }

    /// The uniform superposition W|0> on the given number of qubits.
    pub fn uniform(n_qubits: u32) -> Result<Self, GroverError> {
        if n_qubits == 0 {
            return Err(GroverError::BadParameter("at least one qubit required"));
        }
        if n_qubits > MAX_QUBITS {
            return Err(GroverError::TooManyQubits { qubits: n_qubits });
        }
        let n = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Ok(GroverState { amps: vec![a; n] })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probability(&self, index: usize) -> Result<f64, GroverError> {
        self.amps
            .get(index)
            .map(|a| a.norm_sqr())
            .ok_or(GroverError::IndexOutOfRange { index, size: self.amps.len() })
    }
}

/// Reflection about the target: negates the amplitude at j0.
pub fn oracle_reflection(state: &GroverState, j0: usize) -> Result<GroverState, GroverError> {
    if j0 >= state.amps.len() {
        return Err(GroverError::IndexOutOfRange { index: j0, size: state.amps.len() });
    }
    let mut amps = state.amps.clone();
    amps[j0] = -amps[j0];
    Ok(GroverState { amps })
}

/// The n-fold tensor Hadamard. Self-inverse.
pub fn hadamard_all(state: &GroverState) -> GroverState {
    let mut amps = state.amps.clone();
    let n = amps.len();
    let scale = 1.0 / (2.0f64).sqrt();
    let mut bit = 1usize;
    while bit < n {
        for i in 0..n {
            if i & bit == 0 {
                let a = amps[i];
                let b = amps[i | bit];
                amps[i] = (a + b) * scale;
                amps[i | bit] = (a - b) * scale;
            }
        }
        bit <<= 1;
    }
    GroverState { amps }
}

/// The diffusion operator -W I_{|0>} W, where I_{|0>} negates the
/// amplitude of the all-zero word.
pub fn diffusion(state: &GroverState) -> GroverState {
    let mut s = hadamard_all(state);
    s.amps[0] = -s.amps[0];
    let mut s = hadamard_all(&s);
    for a in &mut s.amps {
        *a = -*a;
    }
    s
}

/// One Grover iteration: the reflection about the target followed by
/// diffusion. The state stays in the plane spanned by the target and
/// the uniform superposition of the rest.
pub fn grover_iterate(state: &GroverState, j0: usize) -> Result<GroverState, GroverError> {
    Ok(diffusion(&oracle_reflection(state, j0)?))
}

/// Success probability after k iterations from uniform, in closed
/// form: sin^2((2k+1) asin(1/sqrt(N))).
pub fn closed_form_probability(n: usize, k: u32) -> Result<f64, GroverError> {
    if n < 2 {
        return Err(GroverError::BadParameter("register needs at least two states"));
    }
    let theta = (1.0 / (n as f64).sqrt()).asin();
    let s = ((2 * k + 1) as f64 * theta).sin();
    Ok(s * s)
}

/// Iteration count close to the pi/4 sqrt(N) optimum: the rounded
/// value, stepped down by one when that raises the exact success
/// probability (small registers are sensitive to rounding; N = 4 is
/// exact at a single iteration).
pub fn optimal_iterations(n: usize) -> Result<u32, GroverError> {
    if n < 2 {
        return Err(GroverError::BadParameter("register needs at least two states"));
    }
    let k = (core::f64::consts::PI * (n as f64).sqrt() / 4.0).round() as u32;
    let k = k.max(1);
    if k >= 2 && closed_form_probability(n, k - 1)? > closed_form_probability(n, k)? {
        return Ok(k - 1);
    }
    Ok(k)
}

/// Result of a full search run.
#[derive(Debug, Clone, PartialEq)]
pub struct GroverRun {
    pub iterations: u32,
    pub success_probability: f64,
    pub sampled: usize,
}

/// Runs the search: uniform start, the optimal number of iterations,
/// then the exact target probability and one sampled measurement of
/// the final state.
pub fn grover_run(
    n_qubits: u32,
    j0: usize,
    rng: &mut impl rand::Rng,
) -> Result<GroverRun, GroverError> {
    let mut state = GroverState::uniform(n_qubits)?;
    if j0 >= state.len() {
        return Err(GroverError::IndexOutOfRange { index: j0, size: state.len() });
    }
    let iterations = optimal_iterations(state.len())?;
    for _ in 0..iterations {
        state = grover_iterate(&state, j0)?;
    }
    let success_probability = state.probability(j0)?;
    // one measurement in the computational basis
    let total: f64 = state.amps.iter().map(|a| a.norm_sqr()).sum();
    let draw = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut sampled = state.len() - 1;
    for (i, a) in state.amps.iter().enumerate() {
        acc += a.norm_sqr();
        if draw < acc {
            sampled = i;
            break;
        }
    }
    Ok(GroverRun { iterations, success_probability, sampled })
}

/// A permutation of {0..n-1}, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, GroverError> {
        let n = image.len();
        if n == 0 {
            return Err(GroverError::BadParameter("empty permutation"));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(GroverError::NotBijective);
            }
            seen[v] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Result<Self, GroverError> {
        if n == 0 {
            return Err(GroverError::BadParameter("empty permutation"));
        }
        Ok(Permutation { image: (0..n).collect() })
    }

    /// The transposition (i j); i == j gives the identity.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self, GroverError> {
        if i >= n {
            return Err(GroverError::IndexOutOfRange { index: i, size: n });
        }
        if j >= n {
            return Err(GroverError::IndexOutOfRange { index: j, size: n });
        }
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(i, j);
        Ok(Permutation { image })
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Composition acting right to left: (f.compose(g))(x) = f(g(x)).
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, GroverError> {
        if self.degree() != other.degree() {
            return Err(GroverError::BadParameter("permutation degrees differ"));
        }
        let image = other.image.iter().map(|&x| self.image[x]).collect();
        Ok(Permutation { image })
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0usize; self.image.len()];
        for (x, &y) in self.image.iter().enumerate() {
            image[y] = x;
        }
        Permutation { image }
    }
}

/// Every permutation of {0..n-1} in lexicographic order of image
/// arrays. Capped at degree 8.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>, GroverError> {
    if n == 0 {
        return Err(GroverError::BadParameter("empty permutation"));
    }
    if n > MAX_PERMUTATION_DEGREE {
        return Err(GroverError::DegreeTooLarge { degree: n });
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(Permutation { image: cur.clone() });
        // next lexicographic image array
        let Some(i) = (0..n - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    Ok(out)
}

/// The transpositions {(0 j0), (1 j0), ..., (n-1 j0)}, verified by
/// brute force to represent every left coset of the stabilizer of j0
/// exactly once: g and h lie in the same coset exactly when
/// g(j0) = h(j0).
pub fn stab_coset_representatives(n: usize, j0: usize) -> Result<Vec<Permutation>, GroverError> {
    if j0 >= n {
        return Err(GroverError::IndexOutOfRange { index: j0, size: n });
    }
    let reps: Vec<Permutation> = (0..n)
        .map(|i| Permutation::transposition(n, i, j0))
        .collect::<Result<_, _>>()?;
    // distinctness: the representatives send j0 to pairwise different
    // points, hence lie in pairwise different cosets
    for (a, ra) in reps.iter().enumerate() {
        for rb in reps.iter().skip(a + 1) {
            if ra.apply(j0) == rb.apply(j0) {
                return Err(GroverError::BadParameter("representatives collide"));
            }
        }
    }
    // completeness: every group element matches exactly one representative
    for g in all_permutations(n)? {
        let matches = reps.iter().filter(|r| r.apply(j0) == g.apply(j0)).count();
        if matches != 1 {
            return Err(GroverError::BadParameter("coset not covered exactly once"));
        }
    }
    Ok(reps)
}

/// The search oracle pushed onto the coset labels of the stabilizer of
/// the zero point: label j carries the coset of (j 0) relative to the
/// stabilizer of j0, identified by where j0 is sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushedOracle {
    table: Vec<usize>,
    degenerate: bool,
}

impl PushedOracle {
    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// True exactly when j0 = 0, where the push is the identity
    /// labeling (injective, one value per label) instead of the
    /// two-valued search oracle.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// Builds the pushed oracle table and verifies it against explicit
/// coset arithmetic: labels agree exactly when the corresponding
/// transversal elements lie in the same left coset of the stabilizer
/// of j0. For j0 != 0 the table is two-valued with the rare value
/// exactly at label j0; the j0 = 0 case degenerates to the identity
/// labeling and is flagged.
pub fn grover_pushed_oracle(n: usize, j0: usize) -> Result<PushedOracle, GroverError> {
    if n > MAX_PERMUTATION_DEGREE {
        return Err(GroverError::DegreeTooLarge { degree: n });
    }
    if j0 >= n {
        return Err(GroverError::IndexOutOfRange { index: j0, size: n });
    }
    let transversal: Vec<Permutation> = (0..n)
        .map(|j| Permutation::transposition(n, j, 0))
        .collect::<Result<_, _>>()?;
    let table: Vec<usize> = transversal.iter().map(|t| t.apply(j0)).collect();
    // cross-check against coset membership: same label exactly when
    // t_k^-1 t_j stabilizes j0
    for j in 0..n {
        for k in 0..n {
            let rel = transversal[k].inverse().compose(&transversal[j])?;
            let same_coset = rel.apply(j0) == j0;
            if same_coset != (table[j] == table[k]) {
                return Err(GroverError::BadParameter("pushed labels disagree with cosets"));
            }
        }
    }
    let degenerate = j0 == 0;
    if degenerate {
        // the transversal is a transversal of the stabilizer of 0
        // itself, so the push is injective
        for (j, &l) in table.iter().enumerate() {
            debug_assert_eq!(l, j);
        }
    } else {
        // two-valued with the rare value at j0
        for (j, &l) in table.iter().enumerate() {
            if j == j0 {
                debug_assert_eq!(l, 0);
            } else {
                debug_assert_eq!(l, j0);
            }
        }
    }
    Ok(PushedOracle { table, degenerate })
}

/// The largest normal subgroup of the full symmetric group contained
/// in the stabilizer of j0, by brute force: elements whose entire
/// conjugacy class stays inside the stabilizer.
pub fn stabilizer_normal_core(n: usize, j0: usize) -> Result<Vec<Permutation>, GroverError> {
    if j0 >= n {
        return Err(GroverError::IndexOutOfRange { index: j0, size: n });
    }
    let all = all_permutations(n)?;
    let mut core = Vec::new();
    'next: for h in &all {
        for g in &all {
            let conj = g.compose(h)?.compose(&g.inverse())?;
            if conj.apply(j0) != j0 {
                continue 'next;
            }
        }
        core.push(h.clone());
    }
    Ok(core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_state(n: usize, rng: &mut ChaCha12Rng) -> GroverState {
        let mut amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        GroverState::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn reflection_examples() {
        let u = GroverState::uniform(2).unwrap();
        let r = oracle_reflection(&u, 2).unwrap();
        let expect = [0.5, 0.5, -0.5, 0.5];
        for (a, e) in r.amplitudes().iter().zip(expect) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
        // involution
        let rr = oracle_reflection(&r, 2).unwrap();
        for (a, b) in rr.amplitudes().iter().zip(u.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        // zero amplitude at the target: reflection does nothing
        let point = GroverState::from_amplitudes(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let r = oracle_reflection(&point, 1).unwrap();
        assert_eq!(r, point);
        assert!(matches!(
            oracle_reflection(&u, 4),
            Err(GroverError::IndexOutOfRange { index: 4, size: 4 })
        ));
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            GroverState::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]),
            Err(GroverError::NotPowerOfTwo { size: 3 })
        ));
        assert!(matches!(
            GroverState::from_amplitudes(vec![Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.0)]),
            Err(GroverError::NotNormalized)
        ));
        assert!(GroverState::uniform(25).is_err());
    }

    #[test]
    fn hadamard_is_involutive_and_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        for n in [2usize, 4, 8, 64] {
            let s = random_state(n, &mut rng);
            let ws = hadamard_all(&s);
            let norm: f64 = ws.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-9);
            let wws = hadamard_all(&ws);
            for (a, b) in wws.amplitudes().iter().zip(s.amplitudes()) {
                assert!((a - b).norm() < 1e-9);
            }
        }
        // W|0> is the uniform superposition
        let mut zero = vec![Complex64::new(0.0, 0.0); 8];
        zero[0] = Complex64::new(1.0, 0.0);
        let w = hadamard_all(&GroverState::from_amplitudes(zero).unwrap());
        for a in w.amplitudes() {
            assert!((a - Complex64::new(1.0 / 8.0f64.sqrt(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn diffusion_preserves_norm_and_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..10 {
            let s = random_state(16, &mut rng);
            let d = diffusion(&s);
            let norm: f64 = d.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-9);
            // diffusion squared is the identity (product of reflections)
            let dd = diffusion(&d);
            for (a, b) in dd.amplitudes().iter().zip(s.amplitudes()) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn single_iteration_is_exact_for_four_states() {
        for j0 in 0..4 {
            let s = grover_iterate(&GroverState::uniform(2).unwrap(), j0).unwrap();
            assert!((s.probability(j0).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn iteration_keeps_non_target_amplitudes_equal() {
        let mut s = GroverState::uniform(4).unwrap();
        let j0 = 11;
        for _ in 0..5 {
            s = grover_iterate(&s, j0).unwrap();
            let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-9);
            let others: Vec<Complex64> = s
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j0)
                .map(|(_, &a)| a)
                .collect();
            for w in others.windows(2) {
                assert!((w[0] - w[1]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(optimal_iterations(4).unwrap(), 1);
        assert_eq!(optimal_iterations(16).unwrap(), 3);
        assert_eq!(optimal_iterations(64).unwrap(), 6);
        assert_eq!(optimal_iterations(1024).unwrap(), 25);
        assert!(optimal_iterations(1).is_err());
    }

    #[test]
    fn simulation_matches_closed_form() {
        for n_qubits in [2u32, 4, 6, 10] {
            let n = 1usize << n_qubits;
            let k = optimal_iterations(n).unwrap();
            let mut s = GroverState::uniform(n_qubits).unwrap();
            for step in 1..=k {
                s = grover_iterate(&s, 0).unwrap();
                let sim = s.probability(0).unwrap();
                let formula = closed_form_probability(n, step).unwrap();
                assert!(
                    (sim - formula).abs() < 1e-9,
                    "N={n} k={step}: {sim} vs {formula}"
                );
            }
        }
    }

    #[test]
    fn run_meets_success_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let run = grover_run(10, 37, &mut rng).unwrap();
        assert_eq!(run.iterations, 25);
        assert!(run.success_probability >= 1.0 - 1.0 / 1024.0);
        // overwhelming probability: the sample is the target
        assert_eq!(run.sampled, 37);

        let run = grover_run(2, 3, &mut rng).unwrap();
        assert_eq!(run.iterations, 1);
        assert!((run.success_probability - 1.0).abs() < 1e-12);
        assert_eq!(run.sampled, 3);
    }

    #[test]
    fn run_is_target_independent_and_deterministic() {
        let probs: Vec<f64> = (0..16)
            .map(|j0| {
                let mut rng = ChaCha12Rng::seed_from_u64(9);
                grover_run(4, j0, &mut rng).unwrap().success_probability
            })
            .collect();
        for p in &probs {
            assert!((p - probs[0]).abs() < 1e-9);
        }
        let mut a = ChaCha12Rng::seed_from_u64(5);
        let mut b = ChaCha12Rng::seed_from_u64(5);
        assert_eq!(grover_run(6, 17, &mut a).unwrap(), grover_run(6, 17, &mut b).unwrap());
        assert!(grover_run(2, 4, &mut a).is_err());
    }

    #[test]
    fn permutation_basics() {
        let id = Permutation::identity(4).unwrap();
        let t = Permutation::transposition(4, 1, 3).unwrap();
        assert_eq!(t.image(), &[0, 3, 2, 1]);
        assert_eq!(t.compose(&t).unwrap(), id);
        assert_eq!(t.inverse(), t);
        let c = Permutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(c.inverse().image(), &[2, 0, 1]);
        // compose acts right to left
        let d = Permutation::transposition(3, 0, 1).unwrap();
        assert_eq!(d.compose(&c).unwrap().apply(0), 0);
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3]).is_err());
    }

    #[test]
    fn permutation_enumeration() {
        let s3 = all_permutations(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert_eq!(s3[0].image(), &[0, 1, 2]);
        assert_eq!(s3[5].image(), &[2, 1, 0]);
        for w in s3.windows(2) {
            assert!(w[0].image() < w[1].image(), "lexicographic order");
        }
        assert_eq!(all_permutations(6).unwrap().len(), 720);
        assert!(all_permutations(9).is_err());
    }

    #[test]
    fn coset_representatives_small() {
        let reps = stab_coset_representatives(3, 1).unwrap();
        assert_eq!(reps.len(), 3);
        // the representative at index j0 is the identity
        assert_eq!(reps[1], Permutation::identity(3).unwrap());

        // N=4, j0=0: 4 cosets of a 6-element stabilizer in a group of 24
        let reps = stab_coset_representatives(4, 0).unwrap();
        assert_eq!(reps.len(), 4);
        let stab = all_permutations(4)
            .unwrap()
            .into_iter()
            .filter(|g| g.apply(0) == 0)
            .count();
        assert_eq!(stab, 6);

        for n in 2..=5 {
            for j0 in 0..n {
                stab_coset_representatives(n, j0).unwrap();
            }
        }
    }

    #[test]
    fn pushed_oracle_two_valued() {
        let p = grover_pushed_oracle(3, 2).unwrap();
        assert!(!p.is_degenerate());
        let mut values: Vec<usize> = p.table().to_vec();
        values.sort_unstable();
        values.dedup();
        assert_eq!(values.len(), 2);
        // the rare value sits exactly at the target label
        assert_eq!(p.table(), &[2, 2, 0]);
        for (j, &l) in p.table().iter().enumerate() {
            if j != 2 {
                assert_ne!(l, p.table()[2]);
            }
        }
    }

    #[test]
    fn pushed_oracle_degenerate_at_zero() {
        for n in 2..=6 {
            let p = grover_pushed_oracle(n, 0).unwrap();
            assert!(p.is_degenerate());
            // the push is the identity labeling, not a two-valued table
            let expect: Vec<usize> = (0..n).collect();
            assert_eq!(p.table(), expect.as_slice());
        }
    }

    #[test]
    fn pushed_oracle_formula_all_small_cases() {
        for n in 2..=6 {
            for j0 in 0..n {
                let p = grover_pushed_oracle(n, j0).unwrap();
                // target label always distinguishable
                for (j, &l) in p.table().iter().enumerate() {
                    if j != j0 {
                        assert_ne!(l, p.table()[j0], "n={n} j0={j0} j={j}");
                    }
                }
                if j0 != 0 {
                    for (j, &l) in p.table().iter().enumerate() {
                        let expect = if j == j0 { 0 } else { j0 };
                        assert_eq!(l, expect, "n={n} j0={j0} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn stabilizer_core_is_trivial() {
        for j0 in 0..5 {
            let core = stabilizer_normal_core(5, j0).unwrap();
            assert_eq!(core.len(), 1);
            assert_eq!(core[0], Permutation::identity(5).unwrap());
        }
        // small degrees for completeness
        for n in 2..=4 {
            let core = stabilizer_normal_core(n, 0).unwrap();
            assert_eq!(core.len(), 1);
        }
    }
}
