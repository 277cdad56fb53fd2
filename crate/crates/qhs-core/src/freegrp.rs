//! Free groups of finite rank: reduced words, finite presentations,
//! coset enumeration to an explicit finite realization, shortlex
//! Schreier transversals, lifting of hidden-structure oracles along the
//! evaluation epimorphism, and a generalized period-finding search that
//! reconstructs a presentation of the hidden quotient from a membership
//! oracle.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::groups::{FiniteAbelianGroup, GroupError};
use crate::numtheory;
use crate::qrand::qrand;
use crate::qsim::{HsOracle, OracleDomain, OutcomeLabel, SimError};

/// Presentations with more generators than this are out of scope.
pub const MAX_RANK: usize = 8;

/// Upper bound on the coset budget a single enumeration may request.
pub const MAX_ENUM_COSETS: usize = 10_000;

/// Largest group order for which a dense multiplication table is
/// materialized.
pub const MAX_REALIZATION: usize = 2_048;

#[derive(Debug, Clone, PartialEq)]
pub enum FreeGroupError {
    /// Letters are signed 1-based generator indices; 0 or out-of-range
    /// values are invalid.
    LetterOutOfRange { letter: i32, rank: usize },
    RankMismatch { expected: usize, got: usize },
    RankTooLarge { rank: usize },
    /// The word is not freely reduced where a reduced word is required.
    NotReduced,
    /// Coset enumeration hit its budget without closing; the group may
    /// be infinite or may need a larger budget.
    CapExceeded { cosets: usize },
    /// The enumerated group is too large to hold as a dense table.
    TooLargeToRealize { order: usize },
    /// A transversal invariant failed verification. This indicates an
    /// internal bug, not a caller error.
    TransversalInvariant(&'static str),
    /// Relator search budget exhausted; carries the partial relator set.
    Inconclusive { relators: Vec<ReducedWord>, rounds: u32 },
    BadParameter(&'static str),
    Group(GroupError),
    Sim(SimError),
}

impl fmt::Display for FreeGroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreeGroupError::LetterOutOfRange { letter, rank } => {
                write!(f, "letter {letter} out of range for rank {rank}")
            }
            FreeGroupError::RankMismatch { expected, got } => {
                write!(f, "expected rank {expected}, got {got}")
            }
            FreeGroupError::RankTooLarge { rank } => {
                write!(f, "rank {rank} exceeds the supported maximum {MAX_RANK}")
            }
            FreeGroupError::NotReduced => write!(f, "word is not freely reduced"),
            FreeGroupError::CapExceeded { cosets } => {
                write!(f, "enumeration did not close within {cosets} cosets")
            }
            FreeGroupError::TooLargeToRealize { order } => {
                write!(f, "group of order {order} exceeds the dense-table bound {MAX_REALIZATION}")
            }
            FreeGroupError::TransversalInvariant(why) => {
                write!(f, "transversal verification failed: {why}")
            }
            FreeGroupError::Inconclusive { relators, rounds } => write!(
                f,
                "no presentation of the target order after {rounds} rounds ({} relators found)",
                relators.len()
            ),
            FreeGroupError::BadParameter(why) => write!(f, "bad parameter: {why}"),
            FreeGroupError::Group(e) => write!(f, "{e}"),
            FreeGroupError::Sim(e) => write!(f, "{e}"),
        }
    }
}

impl From<GroupError> for FreeGroupError {
    fn from(e: GroupError) -> Self {
        FreeGroupError::Group(e)
    }
}

impl From<SimError> for FreeGroupError {
    fn from(e: SimError) -> Self {
        FreeGroupError::Sim(e)
    }
}

fn check_letters(rank: usize, letters: &[i32]) -> Result<(), FreeGroupError> {
    for &l in letters {
        if l == 0 || l.unsigned_abs() as usize > rank {
            return Err(FreeGroupError::LetterOutOfRange { letter: l, rank });
        }
    }
    Ok(())
}

/// A word in the free group of the given rank: a string of signed
/// 1-based generator indices, +j for x_j and -j for its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    rank: usize,
    letters: Vec<i32>,
}

impl Word {
    pub fn new(rank: usize, letters: Vec<i32>) -> Result<Self, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::BadParameter("rank must be at least 1"));
        }
        check_letters(rank, &letters)?;
        Ok(Word { rank, letters })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// A freely reduced word: no adjacent letter pair cancels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    rank: usize,
    letters: Vec<i32>,
}

/// Shortlex key of a letter under the generator order
/// x_1 < x_1^-1 < x_2 < x_2^-1 < ...
fn letter_key(l: i32) -> usize {
    let j = l.unsigned_abs() as usize;
    2 * (j - 1) + usize::from(l < 0)
}

impl ReducedWord {
    pub fn empty(rank: usize) -> Result<Self, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::BadParameter("rank must be at least 1"));
        }
        Ok(ReducedWord { rank, letters: Vec::new() })
    }

    /// Wraps letters that must already be reduced.
    pub fn new(rank: usize, letters: Vec<i32>) -> Result<Self, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::BadParameter("rank must be at least 1"));
        }
        check_letters(rank, &letters)?;
        if letters.windows(2).any(|p| p[0] == -p[1]) {
            return Err(FreeGroupError::NotReduced);
        }
        Ok(ReducedWord { rank, letters })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn as_word(&self) -> Word {
        Word { rank: self.rank, letters: self.letters.clone() }
    }

    /// The inverse word: letters reversed and negated. Reduced words
    /// stay reduced under this.
    pub fn inverse(&self) -> ReducedWord {
        let letters = self.letters.iter().rev().map(|&l| -l).collect();
        ReducedWord { rank: self.rank, letters }
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| {
                let a = self.letters.iter().map(|&l| letter_key(l));
                let b = other.letters.iter().map(|&l| letter_key(l));
                a.cmp(b)
            })
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    /// Letters with collapsed powers: `x1^3 x2^-1`. The empty word
    /// prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut i = 0;
        let mut first = true;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let j = l.unsigned_abs();
            let e = if l > 0 { run as i64 } else { -(run as i64) };
            if e == 1 {
                write!(f, "x{j}")?;
            } else {
                write!(f, "x{j}^{e}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Full free reduction by stack cancellation.
pub fn reduce(w: &Word) -> ReducedWord {
    let mut stack: Vec<i32> = Vec::with_capacity(w.letters.len());
    for &l in &w.letters {
        if stack.last() == Some(&-l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    ReducedWord { rank: w.rank, letters: stack }
}

/// Product in the free group: concatenation followed by reduction.
pub fn multiply(u: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord, FreeGroupError> {
    if u.rank != v.rank {
        return Err(FreeGroupError::RankMismatch { expected: u.rank, got: v.rank });
    }
    let mut stack = u.letters.clone();
    for &l in &v.letters {
        if stack.last() == Some(&-l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    Ok(ReducedWord { rank: u.rank, letters: stack })
}

/// A finite presentation (x_1..x_n : r_1, ..., r_m). An empty relator
/// list presents the free group itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    rank: usize,
    relators: Vec<ReducedWord>,
}

impl Presentation {
    pub fn new(rank: usize, relators: Vec<ReducedWord>) -> Result<Self, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::BadParameter("rank must be at least 1"));
        }
        if rank > MAX_RANK {
            return Err(FreeGroupError::RankTooLarge { rank });
        }
        for r in &relators {
            if r.rank != rank {
                return Err(FreeGroupError::RankMismatch { expected: rank, got: r.rank });
            }
        }
        Ok(Presentation { rank, relators })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn relators(&self) -> &[ReducedWord] {
        &self.relators
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank={}; relators=", self.rank)?;
        for (i, r) in self.relators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// An explicit finite group with a chosen epimorphism from the free
/// group: dense multiplication and inverse tables, generator images,
/// and word evaluation. Element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRealization {
    rank: usize,
    size: usize,
    /// Row-major m*m table.
    mul: Vec<usize>,
    inv: Vec<usize>,
    gen_images: Vec<usize>,
}

impl FiniteRealization {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn gen_images(&self) -> &[usize] {
        &self.gen_images
    }

    /// Image of a single letter.
    fn letter_image(&self, l: i32) -> usize {
        let g = self.gen_images[(l.unsigned_abs() as usize) - 1];
        if l > 0 {
            g
        } else {
            self.inv[g]
        }
    }

    /// Evaluates a word through the epimorphism.
    pub fn eval(&self, w: &Word) -> Result<usize, FreeGroupError> {
        if w.rank != self.rank {
            return Err(FreeGroupError::RankMismatch { expected: self.rank, got: w.rank });
        }
        let mut cur = 0usize;
        for &l in &w.letters {
            cur = self.mul(cur, self.letter_image(l));
        }
        Ok(cur)
    }

    pub fn eval_reduced(&self, w: &ReducedWord) -> Result<usize, FreeGroupError> {
        self.eval(&w.as_word())
    }

    pub fn is_abelian(&self) -> bool {
        for a in 0..self.size {
            for b in (a + 1)..self.size {
                if self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
            }
        }
        true
    }

    /// Order of a single element.
    pub fn element_order(&self, e: usize) -> usize {
        let mut cur = e;
        let mut n = 1;
        while cur != 0 {
            cur = self.mul(cur, e);
            n += 1;
        }
        n
    }
}

/// Undefined slot marker in the coset table.
const UNDEF: usize = usize::MAX;

/// Systematic coset enumeration of the trivial subgroup: realizes the
/// presented group as a dense table when it closes within the budget.
///
/// Strategy: keep the table fully deduced (scan every relator from
/// every live coset, processing coincidences with a union-find), and
/// when quiescent define a new coset at the smallest undefined slot.
/// Deterministic by construction.
pub fn coset_enumerate(
    p: &Presentation,
    max_cosets: usize,
) -> Result<FiniteRealization, FreeGroupError> {
    if max_cosets == 0 || max_cosets > MAX_ENUM_COSETS {
        return Err(FreeGroupError::BadParameter("coset budget out of range"));
    }
    let degree = 2 * p.rank;
    let mut enumerator = Enumerator {
        degree,
        relators: p.relators.iter().map(|r| r.letters.clone()).collect(),
        table: vec![vec![UNDEF; degree]],
        parent: vec![0],
        queue: VecDeque::new(),
    };
    loop {
        enumerator.run_to_quiescence();
        match enumerator.smallest_undefined() {
            None => break,
            Some((c, e)) => {
                if enumerator.table.len() >= max_cosets {
                    return Err(FreeGroupError::CapExceeded { cosets: max_cosets });
                }
                let fresh = enumerator.table.len();
                enumerator.table.push(vec![UNDEF; degree]);
                enumerator.parent.push(fresh);
                enumerator.deduce(c, e, fresh);
            }
        }
    }
    enumerator.realize(p.rank)
}

struct Enumerator {
    degree: usize,
    relators: Vec<Vec<i32>>,
    table: Vec<Vec<usize>>,
    parent: Vec<usize>,
    queue: VecDeque<(usize, usize)>,
}

impl Enumerator {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Resolved table entry, or UNDEF.
    fn entry(&mut self, c: usize, e: usize) -> usize {
        let t = self.table[c][e];
        if t == UNDEF {
            UNDEF
        } else {
            let r = self.find(t);
            self.table[c][e] = r;
            r
        }
    }

    /// Records c.e = d (and d.e^-1 = c), queueing a coincidence on
    /// conflict.
    fn deduce(&mut self, c: usize, e: usize, d: usize) {
        let c = self.find(c);
        let d = self.find(d);
        for (from, via, to) in [(c, e, d), (d, e ^ 1, c)] {
            let cur = self.entry(from, via);
            if cur == UNDEF {
                self.table[from][via] = to;
            } else if cur != to {
                self.queue.push_back((cur, to));
            }
        }
    }

    fn process_coincidences(&mut self) {
        while let Some((a, b)) = self.queue.pop_front() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            // keep the smaller index alive for determinism
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.parent[drop] = keep;
            for e in 0..self.degree {
                let t = self.table[drop][e];
                if t != UNDEF {
                    self.table[drop][e] = UNDEF;
                    let t = self.find(t);
                    self.deduce(keep, e, t);
                }
            }
        }
    }

    /// Walks every relator from every live coset, deducing the last
    /// missing edge wherever exactly one is missing. Repeats until a
    /// full pass makes no progress.
    fn run_to_quiescence(&mut self) {
        loop {
            self.process_coincidences();
            let mut progress = false;
            for c in 0..self.table.len() {
                if self.find(c) != c {
                    continue;
                }
                for ri in 0..self.relators.len() {
                    let relator = self.relators[ri].clone();
                    if self.scan_relator(c, &relator) {
                        progress = true;
                    }
                    self.process_coincidences();
                }
            }
            if !progress && self.queue.is_empty() {
                return;
            }
        }
    }

    /// Scans one relator from one coset: forward while defined, then
    /// backward while defined. A zero-width gap checks consistency, a
    /// one-edge gap is a deduction. Returns true when it deduced or
    /// queued something.
    fn scan_relator(&mut self, c: usize, relator: &[i32]) -> bool {
        let c = self.find(c);
        if relator.is_empty() {
            return false;
        }
        let edges: Vec<usize> = relator.iter().map(|&l| letter_key(l)).collect();
        let mut front = c;
        let mut i = 0;
        while i < edges.len() {
            let next = self.entry(front, edges[i]);
            if next == UNDEF {
                break;
            }
            front = next;
            i += 1;
        }
        if i == edges.len() {
            // fully traced: must close back to c
            if front != c {
                self.queue.push_back((front, c));
                return true;
            }
            return false;
        }
        let mut back = c;
        let mut j = edges.len();
        while j > i + 1 {
            let prev = self.entry(back, edges[j - 1] ^ 1);
            if prev == UNDEF {
                break;
            }
            back = prev;
            j -= 1;
        }
        if j == i + 1 {
            // exactly one missing edge: deduce it
            self.deduce(front, edges[i], back);
            return true;
        }
        false
    }

    fn smallest_undefined(&mut self) -> Option<(usize, usize)> {
        for c in 0..self.table.len() {
            if self.find(c) != c {
                continue;
            }
            for e in 0..self.degree {
                if self.entry(c, e) == UNDEF {
                    return Some((c, e));
                }
            }
        }
        None
    }

    /// Compacts the closed table into a realization.
    fn realize(mut self, rank: usize) -> Result<FiniteRealization, FreeGroupError> {
        let mut roots: Vec<usize> = Vec::new();
        for c in 0..self.table.len() {
            if self.find(c) == c {
                roots.push(c);
            }
        }
        let id_root = self.find(0);
        roots.retain(|&c| c != id_root);
        roots.insert(0, id_root);
        let size = roots.len();
        if size > MAX_REALIZATION {
            return Err(FreeGroupError::TooLargeToRealize { order: size });
        }
        let mut compact = vec![UNDEF; self.table.len()];
        for (i, &c) in roots.iter().enumerate() {
            compact[c] = i;
        }
        // edges[c][e] over compact indices
        let mut edges = vec![vec![UNDEF; self.degree]; size];
        for (i, &c) in roots.iter().enumerate() {
            for e in 0..self.degree {
                let t = self.entry(c, e);
                debug_assert_ne!(t, UNDEF, "closed table has no undefined entries");
                edges[i][e] = compact[t];
            }
        }
        // one generator-letter path per element, found breadth-first
        let mut path: Vec<Option<(usize, usize)>> = vec![None; size]; // (parent, edge)
        let mut dist = vec![usize::MAX; size];
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            for e in 0..self.degree {
                let t = edges[c][e];
                if dist[t] == usize::MAX {
                    dist[t] = dist[c] + 1;
                    path[t] = Some((c, e));
                    queue.push_back(t);
                }
            }
        }
        if dist.iter().any(|&d| d == usize::MAX) {
            return Err(FreeGroupError::TransversalInvariant(
                "generator images do not reach every element",
            ));
        }
        let mut words: Vec<Vec<usize>> = vec![Vec::new(); size];
        for v in 1..size {
            let (p, e) = path[v].expect("non-root has a parent");
            let mut w = words[p].clone();
            w.push(e);
            words[v] = w;
        }
        let mut mul = vec![0usize; size * size];
        for a in 0..size {
            for b in 0..size {
                let mut cur = a;
                for &e in &words[b] {
                    cur = edges[cur][e];
                }
                mul[a * size + b] = cur;
            }
        }
        let mut inv = vec![UNDEF; size];
        for a in 0..size {
            for b in 0..size {
                if mul[a * size + b] == 0 {
                    inv[a] = b;
                    break;
                }
            }
        }
        let gen_images: Vec<usize> = (0..rank).map(|j| edges[0][2 * j]).collect();
        Ok(FiniteRealization { rank, size, mul, inv, gen_images })
    }
}

/// One reduced representative word per element of a realization,
/// indexed by element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchreierTransversal {
    words: Vec<ReducedWord>,
}

impl SchreierTransversal {
    pub fn representatives(&self) -> &[ReducedWord] {
        &self.words
    }

    pub fn representative(&self, element: usize) -> &ReducedWord {
        &self.words[element]
    }

    /// Checks the four structural invariants against the realization:
    /// the empty word represents the identity, representatives are
    /// closed under dropping the last letter and the first letter, and
    /// each has minimal length in its coset.
    pub fn verify(&self, r: &FiniteRealization) -> Result<(), FreeGroupError> {
        if self.words.len() != r.size() {
            return Err(FreeGroupError::TransversalInvariant("wrong representative count"));
        }
        if !self.words[0].is_empty() {
            return Err(FreeGroupError::TransversalInvariant(
                "identity representative is not the empty word",
            ));
        }
        for w in &self.words {
            let l = w.letters();
            if !l.is_empty() {
                let prefix = ReducedWord::new(w.rank(), l[..l.len() - 1].to_vec())?;
                let pe = r.eval_reduced(&prefix)?;
                if self.words[pe] != prefix {
                    return Err(FreeGroupError::TransversalInvariant(
                        "prefix of a representative is not a representative",
                    ));
                }
                let suffix = ReducedWord::new(w.rank(), l[1..].to_vec())?;
                let se = r.eval_reduced(&suffix)?;
                if self.words[se] != suffix {
                    return Err(FreeGroupError::TransversalInvariant(
                        "suffix of a representative is not a representative",
                    ));
                }
            }
        }
        // minimality: representative length equals Cayley-graph distance,
        // computed here by an independent breadth-first pass
        let mut dist = vec![usize::MAX; r.size()];
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            for e in 0..2 * r.rank() {
                let l = edge_letter(e);
                let t = r.mul(c, r.letter_image(l));
                if dist[t] == usize::MAX {
                    dist[t] = dist[c] + 1;
                    queue.push_back(t);
                }
            }
        }
        for (v, w) in self.words.iter().enumerate() {
            if w.len() != dist[v] {
                return Err(FreeGroupError::TransversalInvariant(
                    "representative is longer than its coset minimum",
                ));
            }
        }
        // representatives must actually evaluate to their index
        for (v, w) in self.words.iter().enumerate() {
            if r.eval_reduced(w)? != v {
                return Err(FreeGroupError::TransversalInvariant(
                    "representative evaluates to the wrong element",
                ));
            }
        }
        Ok(())
    }
}

/// Letter for an edge index: even edges are positive generators.
fn edge_letter(e: usize) -> i32 {
    let j = (e / 2 + 1) as i32;
    if e % 2 == 0 {
        j
    } else {
        -j
    }
}

/// The shortlex-least reduced representative of every element, by
/// breadth-first search over the Cayley graph with the fixed generator
/// order x_1 < x_1^-1 < x_2 < x_2^-1 < ...
///
/// Because the queue dequeues parents in shortlex order of their own
/// representatives and scans edges ascending, the first word reaching
/// an element is its shortlex minimum; minimal representatives are
/// automatically prefix-closed, and for normal kernels suffix-closed
/// as well. The verification pass stays on as a guard.
pub fn shortlex_transversal(r: &FiniteRealization) -> Result<SchreierTransversal, FreeGroupError> {
    let mut words: Vec<Option<ReducedWord>> = vec![None; r.size()];
    words[0] = Some(ReducedWord::empty(r.rank())?);
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for e in 0..2 * r.rank() {
            let l = edge_letter(e);
            let t = r.mul(c, r.letter_image(l));
            if words[t].is_none() {
                let mut letters = words[c].as_ref().expect("dequeued").letters().to_vec();
                letters.push(l);
                words[t] = Some(ReducedWord::new(r.rank(), letters)?);
                queue.push_back(t);
            }
        }
    }
    let words: Vec<ReducedWord> = words
        .into_iter()
        .map(|w| w.ok_or(FreeGroupError::TransversalInvariant("unreached element")))
        .collect::<Result<_, _>>()?;
    let t = SchreierTransversal { words };
    t.verify(r)?;
    Ok(t)
}

/// A hidden-structure oracle evaluated on free-group words.
pub trait WordOracle {
    fn rank(&self) -> usize;

    /// Label of a reduced word.
    fn label(&self, w: &ReducedWord) -> Result<u64, FreeGroupError>;

    /// Label of an arbitrary word, through free reduction.
    fn label_word(&self, w: &Word) -> Result<u64, FreeGroupError> {
        self.label(&reduce(w))
    }
}

/// A word oracle obtained by composing an element labeling with the
/// evaluation epimorphism of a realization: label(w) = labels[eval(w)].
/// Words are evaluated lazily; nothing is tabulated per word.
#[derive(Debug, Clone)]
pub struct LiftedOracle<'a> {
    realization: &'a FiniteRealization,
    labels: Vec<u64>,
}

/// Lifts an element labeling on a realization to a word oracle. The
/// hidden structure is preserved: the lift is constant exactly on
/// kernel cosets of elements the labeling cannot separate.
pub fn lift_hsp<'a>(
    realization: &'a FiniteRealization,
    labels: &[u64],
) -> Result<LiftedOracle<'a>, FreeGroupError> {
    if labels.len() != realization.size() {
        return Err(FreeGroupError::BadParameter("one label per element required"));
    }
    Ok(LiftedOracle { realization, labels: labels.to_vec() })
}

impl WordOracle for LiftedOracle<'_> {
    fn rank(&self) -> usize {
        self.realization.rank()
    }

    fn label(&self, w: &ReducedWord) -> Result<u64, FreeGroupError> {
        Ok(self.labels[self.realization.eval_reduced(w)?])
    }
}

/// All reduced words of length <= radius in shortlex order, the empty
/// word first.
fn reduced_words_up_to(rank: usize, radius: usize) -> Result<Vec<ReducedWord>, FreeGroupError> {
    let mut all: Vec<ReducedWord> = vec![ReducedWord::empty(rank)?];
    let mut layer: Vec<ReducedWord> = all.clone();
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &layer {
            for e in 0..2 * rank {
                let l = edge_letter(e);
                if w.letters().last() == Some(&-l) {
                    continue;
                }
                let mut letters = w.letters().to_vec();
                letters.push(l);
                next.push(ReducedWord::new(rank, letters)?);
            }
        }
        all.extend(next.iter().cloned());
        if all.len() > 1_000_000 {
            return Err(FreeGroupError::BadParameter("search radius too large"));
        }
        layer = next;
    }
    Ok(all)
}

/// Canonical form of a relator up to the symmetries that keep its
/// normal closure fixed: cyclic reduction, then the shortlex-least
/// among all rotations of the word and of its inverse.
fn relator_normal_form(w: &ReducedWord) -> ReducedWord {
    let mut letters = w.letters().to_vec();
    while letters.len() >= 2 && letters[0] == -letters[letters.len() - 1] {
        letters.pop();
        letters.remove(0);
    }
    if letters.is_empty() {
        return ReducedWord { rank: w.rank(), letters };
    }
    let mut best: Option<ReducedWord> = None;
    let inv: Vec<i32> = letters.iter().rev().map(|&l| -l).collect();
    for base in [&letters, &inv] {
        for s in 0..base.len() {
            let mut rot: Vec<i32> = base[s..].to_vec();
            rot.extend_from_slice(&base[..s]);
            // a cyclically reduced word stays reduced under rotation
            let cand = ReducedWord { rank: w.rank(), letters: rot };
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.expect("nonempty")
}

/// Maps a commutative realization onto an explicit product of cyclic
/// groups. Returns the group and the element of the realization at each
/// group index, or None when the realization is not commutative.
///
/// The basis is grown greedily: at each step take the element whose
/// coset order modulo the current span is maximal and whose full order
/// equals that coset order (such an element exists by the structure
/// theorem), giving a direct summand.
fn abelian_structure(
    r: &FiniteRealization,
) -> Result<Option<(FiniteAbelianGroup, Vec<usize>)>, FreeGroupError> {
    if !r.is_abelian() {
        return Ok(None);
    }
    let m = r.size();
    let mut in_span = vec![false; m];
    in_span[0] = true;
    let mut basis: Vec<(usize, usize)> = Vec::new(); // (element, order)
    loop {
        let coset_order = |e: usize, in_span: &[bool]| -> usize {
            let mut cur = e;
            let mut t = 1;
            while !in_span[cur] {
                cur = r.mul(cur, e);
                t += 1;
            }
            t
        };
        let max_t = (0..m).map(|e| coset_order(e, &in_span)).max().expect("nonempty");
        if max_t == 1 {
            break;
        }
        let pick = (0..m)
            .find(|&e| coset_order(e, &in_span) == max_t && r.element_order(e) == max_t)
            .ok_or(FreeGroupError::TransversalInvariant(
                "no clean direct summand generator found",
            ))?;
        basis.push((pick, max_t));
        // extend the span with all multiples of the new generator
        let mut extended = vec![false; m];
        for s in 0..m {
            if in_span[s] {
                let mut cur = s;
                for _ in 0..max_t {
                    extended[cur] = true;
                    cur = r.mul(cur, pick);
                }
            }
        }
        in_span = extended;
    }
    let orders: Vec<u64> =
        if basis.is_empty() { vec![1] } else { basis.iter().map(|&(_, o)| o as u64).collect() };
    let group = FiniteAbelianGroup::new(orders)?;
    let mut at_index = vec![usize::MAX; m];
    for idx in 0..group.cardinality() as usize {
        let coords = group.element_at(idx)?;
        let mut elem = 0usize;
        for (&(b, _), &c) in basis.iter().zip(coords.coords()) {
            for _ in 0..c {
                elem = r.mul(elem, b);
            }
        }
        at_index[idx] = elem;
    }
    // the exponent map must be a bijection for a genuine direct sum
    let mut seen = vec![false; m];
    for &e in &at_index {
        if e == usize::MAX || seen[e] {
            return Err(FreeGroupError::TransversalInvariant("summand map is not bijective"));
        }
        seen[e] = true;
    }
    Ok(Some((group, at_index)))
}

/// Reconstructs a presentation of the hidden quotient F/K from a
/// membership oracle (w is in K iff its label equals the empty word's).
///
/// Words are proposed by pushing the oracle onto the finite probe
/// through its shortlex transversal: when the probe is commutative the
/// probe element is drawn from the sampling subroutine's left-register
/// distribution (its dual labels reinterpreted as exponent vectors);
/// otherwise it is drawn uniformly. Around each proposed word s', the
/// products s'u over all reduced u with |u| <= radius are tested for
/// membership, and each hit becomes a relator (normalized up to
/// rotation and inversion). Relators accumulate until the presented
/// group closes at exactly `target_order` elements, then a greedy pass
/// minimizes the relator list.
pub fn generalized_shor_free<W: WordOracle>(
    oracle: &W,
    probe: &Presentation,
    target_order: u64,
    radius: usize,
    max_relators: usize,
    rng: &mut impl rand::Rng,
) -> Result<Presentation, FreeGroupError> {
    let rank = oracle.rank();
    if probe.rank() != rank {
        return Err(FreeGroupError::RankMismatch { expected: rank, got: probe.rank() });
    }
    if target_order == 0 {
        return Err(FreeGroupError::BadParameter("target order must be at least 1"));
    }
    if max_relators == 0 {
        return Err(FreeGroupError::BadParameter("max_relators must be at least 1"));
    }
    let realization = coset_enumerate(probe, MAX_ENUM_COSETS.min(4096))?;
    let transversal = shortlex_transversal(&realization)?;
    let base_label = oracle.label(&ReducedWord::empty(rank)?)?;

    // pushed oracle: label of each probe element through its
    // transversal representative
    let mut pushed = Vec::with_capacity(realization.size());
    for w in transversal.representatives() {
        pushed.push(oracle.label(w)?);
    }
    // abelian probes sample from the exact dual distribution
    let abelian = abelian_structure(&realization)?;
    let sampler = match &abelian {
        Some((group, at_index)) => {
            let hs = HsOracle::from_labels(OracleDomain::Abelian(group.clone()), &pushed)?;
            Some((group.clone(), at_index.clone(), hs))
        }
        None => None,
    };

    let u_words = reduced_words_up_to(rank, radius)?;
    let mut relators: BTreeSet<ReducedWord> = BTreeSet::new();
    let enum_cap = ((target_order as usize).saturating_mul(4) + 64).min(MAX_ENUM_COSETS);
    let check = |relators: &BTreeSet<ReducedWord>| -> Result<Option<FiniteRealization>, FreeGroupError> {
        let p = Presentation::new(rank, relators.iter().cloned().collect())?;
        match coset_enumerate(&p, enum_cap) {
            Ok(r) => Ok(Some(r)),
            Err(FreeGroupError::CapExceeded { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let max_rounds = (max_relators as u32).saturating_mul(16).max(64);
    for round in 1..=max_rounds {
        // propose a probe element
        let elem = match &sampler {
            Some((group, at_index, hs)) => {
                let res = qrand(hs, rng)?;
                let OutcomeLabel::Character(chi) = res.sampled else {
                    return Err(FreeGroupError::BadParameter("abelian sampler yielded a non-character"));
                };
                let ge = group.element(chi.freqs())?;
                at_index[group.index_of(&ge)?]
            }
            None => rng.gen_range(0..realization.size()),
        };
        let s_prime = transversal.representative(elem).clone();

        // bounded search around the proposal for one new relator
        let mut added = false;
        for u in &u_words {
            let w = multiply(&s_prime, u)?;
            if w.is_empty() {
                continue;
            }
            if oracle.label(&w)? != base_label {
                continue;
            }
            let canon = relator_normal_form(&w);
            if canon.is_empty() || relators.contains(&canon) {
                continue;
            }
            relators.insert(canon);
            added = true;
            break;
        }
        if !added {
            continue;
        }
        if relators.len() > max_relators {
            return Err(FreeGroupError::Inconclusive {
                relators: relators.into_iter().collect(),
                rounds: round,
            });
        }
        let Some(result) = check(&relators)? else { continue };
        match (result.size() as u64).cmp(&target_order) {
            Ordering::Greater => continue,
            Ordering::Less => {
                return Err(FreeGroupError::BadParameter(
                    "relators collapse the group below the target order",
                ))
            }
            Ordering::Equal => {
                return minimize_presentation(rank, &relators, target_order, enum_cap);
            }
        }
    }
    Err(FreeGroupError::Inconclusive {
        relators: relators.into_iter().collect(),
        rounds: max_rounds,
    })
}

/// Shrinks a sufficient relator set: rank 1 collapses to the single
/// power x^gcd; higher ranks take the shortest sufficient shortlex
/// prefix and then drop individually redundant relators.
fn minimize_presentation(
    rank: usize,
    relators: &BTreeSet<ReducedWord>,
    target_order: u64,
    enum_cap: usize,
) -> Result<Presentation, FreeGroupError> {
    let closes = |rels: &[ReducedWord]| -> Result<bool, FreeGroupError> {
        let p = Presentation::new(rank, rels.to_vec())?;
        match coset_enumerate(&p, enum_cap) {
            Ok(r) => Ok(r.size() as u64 == target_order),
            Err(FreeGroupError::CapExceeded { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if rank == 1 {
        // every rank-1 relator is a power of x; their consequence is
        // the gcd power
        let mut g: u64 = 0;
        for r in relators {
            let e = r.letters().iter().map(|&l| l as i64).sum::<i64>().unsigned_abs();
            if e != 0 {
                g = if g == 0 { e } else { numtheory::gcd(g, e).expect("nonzero") };
            }
        }
        debug_assert_eq!(g, target_order);
        let power = ReducedWord::new(1, vec![1i32; g as usize])?;
        debug_assert!(closes(core::slice::from_ref(&power))?);
        return Presentation::new(1, vec![power]);
    }
    let sorted: Vec<ReducedWord> = relators.iter().cloned().collect();
    let mut prefix_len = sorted.len();
    for k in 1..=sorted.len() {
        if closes(&sorted[..k])? {
            prefix_len = k;
            break;
        }
    }
    let mut kept: Vec<ReducedWord> = sorted[..prefix_len].to_vec();
    // drop redundant relators, longest first
    let mut i = kept.len();
    while i > 0 {
        i -= 1;
        if kept.len() == 1 {
            break;
        }
        let mut trial = kept.clone();
        trial.remove(i);
        if closes(&trial)? {
            kept = trial;
        }
    }
    Presentation::new(rank, kept)
}
