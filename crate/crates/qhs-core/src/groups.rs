//! Finite abelian groups as explicit products of cyclic groups, their
//! characters and subgroups, annihilator computations, push/lift plumbing
//! between groups, and validated unitary representation tables for small
//! nonabelian groups.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
// Float supplies cos/sin/sqrt on f64 in isolated no_std builds; redundant
// whenever std is linked anywhere in the crate graph (tests, the CLI).
#[allow(unused_imports)]
use num_traits::Float;

use crate::numtheory;

/// Largest group cardinality for which exhaustive element iteration
/// (closures, annihilators, dense simulation index maps) is permitted.
pub const MAX_DENSE_GROUP: u64 = 1 << 20;

/// Largest element count for which irrep tables are validated; validation
/// is cubic in the element count.
pub const MAX_IRREP_TABLE: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupError {
    /// A group needs at least one cyclic factor.
    EmptyRank,
    /// Cyclic factor orders must be at least 1.
    ZeroOrder,
    /// The product of the factor orders does not fit in 64 bits.
    CardinalityOverflow,
    /// An element or character has the wrong number of coordinates.
    RankMismatch { expected: usize, got: usize },
    /// The group is too large for an exhaustive operation.
    TooLarge { cardinality: u64, limit: u64 },
    /// An explicit element list is not closed under the group operations.
    NotClosed,
    /// A nonempty input was required.
    EmptyInput,
    /// The zero vector cannot generate a direct summand.
    ZeroVector,
    InvalidParameter(&'static str),
    InvalidTable(&'static str),
    InvalidPush(&'static str),
    InvalidLift(&'static str),
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::EmptyRank => write!(f, "group needs at least one cyclic factor"),
            GroupError::ZeroOrder => write!(f, "cyclic factor orders must be >= 1"),
            GroupError::CardinalityOverflow => write!(f, "group cardinality overflows u64"),
            GroupError::RankMismatch { expected, got } => {
                write!(f, "expected {expected} coordinates, got {got}")
            }
            GroupError::TooLarge { cardinality, limit } => {
                write!(f, "cardinality {cardinality} exceeds desk-scale limit {limit}")
            }
            GroupError::NotClosed => write!(f, "element list is not closed under the group law"),
            GroupError::EmptyInput => write!(f, "input list must be nonempty"),
            GroupError::ZeroVector => write!(f, "zero vector is not allowed here"),
            GroupError::InvalidParameter(why) => write!(f, "invalid parameter: {why}"),
            GroupError::InvalidTable(why) => write!(f, "invalid representation table: {why}"),
            GroupError::InvalidPush(why) => write!(f, "invalid push data: {why}"),
            GroupError::InvalidLift(why) => write!(f, "invalid lift data: {why}"),
        }
    }
}

/// A finite abelian group presented as Z_{Q1} x ... x Z_{Qk}.
///
/// Elements and characters are indexed in mixed radix with the last factor
/// varying fastest, so for a single factor the index of an element is its
/// value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    orders: Vec<u64>,
    cardinality: u64,
}

/// An element of a [`FiniteAbelianGroup`], coordinates reduced mod the
/// factor orders.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A character of a [`FiniteAbelianGroup`]: frequencies y with evaluation
/// chi(x) = exp(2 pi i sum_i x_i y_i / Q_i).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Character {
    freqs: Vec<u64>,
}

impl Character {
    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    pub fn is_trivial(&self) -> bool {
        self.freqs.iter().all(|&y| y == 0)
    }
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u64>) -> Result<Self, GroupError> {
        if orders.is_empty() {
            return Err(GroupError::EmptyRank);
        }
        if orders.iter().any(|&q| q == 0) {
            return Err(GroupError::ZeroOrder);
        }
        let mut card: u64 = 1;
        for &q in &orders {
            card = card.checked_mul(q).ok_or(GroupError::CardinalityOverflow)?;
        }
        Ok(FiniteAbelianGroup { orders, cardinality: card })
    }

    /// The cyclic group Z_q.
    pub fn cyclic(q: u64) -> Result<Self, GroupError> {
        Self::new(vec![q])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    fn check_rank(&self, len: usize) -> Result<(), GroupError> {
        if len != self.orders.len() {
            return Err(GroupError::RankMismatch { expected: self.orders.len(), got: len });
        }
        Ok(())
    }

    /// Guard for operations that iterate every element.
    pub fn check_dense(&self) -> Result<(), GroupError> {
        if self.cardinality > MAX_DENSE_GROUP {
            return Err(GroupError::TooLarge {
                cardinality: self.cardinality,
                limit: MAX_DENSE_GROUP,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { coords: vec![0; self.orders.len()] }
    }

    /// Builds an element, reducing each coordinate mod its factor order.
    pub fn element(&self, coords: &[u64]) -> Result<GroupElement, GroupError> {
        self.check_rank(coords.len())?;
        let coords = coords.iter().zip(&self.orders).map(|(&c, &q)| c % q).collect();
        Ok(GroupElement { coords })
    }

    /// Builds an element from signed coordinates (reduced Euclidean-style,
    /// so -1 maps to Q-1).
    pub fn element_from_signed(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        self.check_rank(coords.len())?;
        let coords = coords
            .iter()
            .zip(&self.orders)
            .map(|(&c, &q)| (c.rem_euclid(q as i64)) as u64)
            .collect();
        Ok(GroupElement { coords })
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_rank(a.coords.len())?;
        self.check_rank(b.coords.len())?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.orders)
            .map(|((&x, &y), &q)| {
                // both < q <= 2^63 is not guaranteed; widen to avoid wrap
                ((x as u128 + y as u128) % q as u128) as u64
            })
            .collect();
        Ok(GroupElement { coords })
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_rank(a.coords.len())?;
        let coords = a
            .coords
            .iter()
            .zip(&self.orders)
            .map(|(&x, &q)| if x == 0 { 0 } else { q - x })
            .collect();
        Ok(GroupElement { coords })
    }

    /// Mixed-radix index of an element, last factor fastest.
    pub fn index_of(&self, a: &GroupElement) -> Result<usize, GroupError> {
        self.check_rank(a.coords.len())?;
        let mut idx: u64 = 0;
        for (&c, &q) in a.coords.iter().zip(&self.orders) {
            debug_assert!(c < q);
            idx = idx * q + c;
        }
        Ok(idx as usize)
    }

    pub fn element_at(&self, idx: usize) -> Result<GroupElement, GroupError> {
        if (idx as u64) >= self.cardinality {
            return Err(GroupError::InvalidParameter("element index out of range"));
        }
        let mut rem = idx as u64;
        let mut coords = vec![0u64; self.orders.len()];
        for (slot, &q) in coords.iter_mut().zip(&self.orders).rev() {
            *slot = rem % q;
            rem /= q;
        }
        Ok(GroupElement { coords })
    }

    /// Iterates all elements in index order. Requires desk scale.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.cardinality as usize).map(move |i| self.element_at(i).expect("index in range"))
    }

    pub fn character(&self, freqs: &[u64]) -> Result<Character, GroupError> {
        self.check_rank(freqs.len())?;
        let freqs = freqs.iter().zip(&self.orders).map(|(&y, &q)| y % q).collect();
        Ok(Character { freqs })
    }

    pub fn trivial_character(&self) -> Character {
        Character { freqs: vec![0; self.orders.len()] }
    }

    /// Character with the given mixed-radix index (same scheme as elements).
    pub fn character_at(&self, idx: usize) -> Result<Character, GroupError> {
        let e = self.element_at(idx)?;
        Ok(Character { freqs: e.coords })
    }

    pub fn index_of_character(&self, chi: &Character) -> Result<usize, GroupError> {
        self.index_of(&GroupElement { coords: chi.freqs.clone() })
    }

    /// chi(x) as a unit complex number.
    pub fn eval_character(&self, chi: &Character, x: &GroupElement) -> Result<Complex64, GroupError> {
        self.check_rank(chi.freqs.len())?;
        self.check_rank(x.coords.len())?;
        let mut frac = 0.0f64;
        for ((&y, &c), &q) in chi.freqs.iter().zip(&x.coords).zip(&self.orders) {
            let t = (y as u128 * c as u128 % q as u128) as u64;
            frac += t as f64 / q as f64;
        }
        let angle = core::f64::consts::TAU * frac;
        Ok(Complex64::new(angle.cos(), angle.sin()))
    }

    /// Exact rational test of chi(x) = 1, with no floating point.
    /// Requires desk scale (the lcm of the orders must stay small).
    pub fn character_kills(&self, chi: &Character, x: &GroupElement) -> Result<bool, GroupError> {
        self.check_rank(chi.freqs.len())?;
        self.check_rank(x.coords.len())?;
        let mut l: u64 = 1;
        for &q in &self.orders {
            l = numtheory::lcm(l, q).map_err(|_| GroupError::CardinalityOverflow)?;
        }
        let mut acc: u128 = 0;
        for ((&y, &c), &q) in chi.freqs.iter().zip(&x.coords).zip(&self.orders) {
            let t = y as u128 * c as u128 % q as u128;
            acc = (acc + t * (l / q) as u128) % l as u128;
        }
        Ok(acc == 0)
    }
}

/// A subgroup held with its full element closure, sorted by coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>,
}

impl Subgroup {
    /// Closure of the given generators. Desk scale: the ambient group must
    /// be exhaustively indexable.
    pub fn generated(
        group: &FiniteAbelianGroup,
        gens: &[GroupElement],
    ) -> Result<Subgroup, GroupError> {
        group.check_dense()?;
        for g in gens {
            group.check_rank(g.coords().len())?;
        }
        let mut member = vec![false; group.cardinality() as usize];
        let mut elems: Vec<GroupElement> = Vec::new();
        member[group.index_of(&group.zero())?] = true;
        elems.push(group.zero());
        for g in gens {
            if member[group.index_of(g)?] {
                continue;
            }
            // extend by cosets: new subgroup = union of (current + j*g)
            let base = elems.clone();
            let mut step = g.clone();
            loop {
                if member[group.index_of(&step)?] {
                    break;
                }
                for h in &base {
                    let e = group.add(h, &step)?;
                    let idx = group.index_of(&e)?;
                    if !member[idx] {
                        member[idx] = true;
                        elems.push(e);
                    }
                }
                step = group.add(&step, g)?;
            }
        }
        elems.sort();
        Ok(Subgroup { generators: gens.to_vec(), elements: elems })
    }

    /// Wraps an explicit element list, verifying identity membership and
    /// closure under addition and negation.
    pub fn from_elements(
        group: &FiniteAbelianGroup,
        mut elems: Vec<GroupElement>,
    ) -> Result<Subgroup, GroupError> {
        if elems.is_empty() {
            return Err(GroupError::EmptyInput);
        }
        for e in &elems {
            group.check_rank(e.coords().len())?;
        }
        elems.sort();
        elems.dedup();
        if elems.binary_search(&group.zero()).is_err() {
            return Err(GroupError::NotClosed);
        }
        for a in &elems {
            if elems.binary_search(&group.neg(a)?).is_err() {
                return Err(GroupError::NotClosed);
            }
            for b in &elems {
                if elems.binary_search(&group.add(a, b)?).is_err() {
                    return Err(GroupError::NotClosed);
                }
            }
        }
        let generators = minimal_generators(group, &elems)?;
        Ok(Subgroup { generators, elements: elems })
    }

    /// Internal constructor for element sets that are closed by
    /// construction (kernels, annihilators).
    fn from_closed_unchecked(
        group: &FiniteAbelianGroup,
        mut elems: Vec<GroupElement>,
    ) -> Result<Subgroup, GroupError> {
        elems.sort();
        let generators = minimal_generators(group, &elems)?;
        Ok(Subgroup { generators, elements: elems })
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// The whole group as a subgroup of itself.
    pub fn full(group: &FiniteAbelianGroup) -> Result<Subgroup, GroupError> {
        group.check_dense()?;
        let gens: Vec<GroupElement> = (0..group.rank())
            .map(|i| {
                let mut c = vec![0u64; group.rank()];
                c[i] = 1 % group.orders()[i];
                GroupElement { coords: c }
            })
            .collect();
        Subgroup::generated(group, &gens)
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Subgroup {
        Subgroup { generators: Vec::new(), elements: vec![group.zero()] }
    }
}

/// Greedy small generating set for a sorted closed element list.
fn minimal_generators(
    group: &FiniteAbelianGroup,
    elems: &[GroupElement],
) -> Result<Vec<GroupElement>, GroupError> {
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut span = Subgroup::trivial(group);
    for e in elems {
        if !span.contains(e) {
            gens.push(e.clone());
            span = Subgroup::generated(group, &gens)?;
            if span.order() as usize == elems.len() {
                break;
            }
        }
    }
    Ok(gens)
}

/// All characters chi with chi(x) = 1 for every x in `k`, returned as a
/// subgroup of the (canonically identified) dual group. The result has
/// cardinality |G| / |K|.
pub fn annihilator(group: &FiniteAbelianGroup, k: &Subgroup) -> Result<Subgroup, GroupError> {
    group.check_dense()?;
    // A character kills K iff it kills a generating set of K.
    let gens = k.generators();
    for g in gens {
        group.check_rank(g.coords().len())?;
    }
    let mut kept: Vec<GroupElement> = Vec::new();
    for idx in 0..group.cardinality() as usize {
        let chi = group.character_at(idx)?;
        let mut kills = true;
        for g in gens {
            if !group.character_kills(&chi, g)? {
                kills = false;
                break;
            }
        }
        if kills {
            kept.push(GroupElement { coords: chi.freqs().to_vec() });
        }
    }
    Subgroup::from_closed_unchecked(group, kept)
}

/// K = intersection of the kernels of the sampled characters, by
/// exhaustion over the group.
pub fn subgroup_from_character_samples(
    group: &FiniteAbelianGroup,
    chars: &[Character],
) -> Result<Subgroup, GroupError> {
    if chars.is_empty() {
        return Err(GroupError::EmptyInput);
    }
    group.check_dense()?;
    for chi in chars {
        group.check_rank(chi.freqs().len())?;
    }
    let mut kept: Vec<GroupElement> = Vec::new();
    for x in group.elements() {
        let mut killed = true;
        for chi in chars {
            if !group.character_kills(chi, &x)? {
                killed = false;
                break;
            }
        }
        if killed {
            kept.push(x);
        }
    }
    Subgroup::from_closed_unchecked(group, kept)
}

/// Exhaustive list of all subgroups, found by closing each known subgroup
/// with each outside element. Desk scale.
pub fn all_subgroups(group: &FiniteAbelianGroup) -> Result<Vec<Subgroup>, GroupError> {
    group.check_dense()?;
    use alloc::collections::BTreeSet;
    let mut seen: BTreeSet<Vec<GroupElement>> = BTreeSet::new();
    let mut queue: Vec<Subgroup> = vec![Subgroup::trivial(group)];
    seen.insert(queue[0].elements.clone());
    let mut out: Vec<Subgroup> = Vec::new();
    while let Some(h) = queue.pop() {
        for g in group.elements() {
            if h.contains(&g) {
                continue;
            }
            let mut gens = h.generators().to_vec();
            gens.push(g.clone());
            let bigger = Subgroup::generated(group, &gens)?;
            if seen.insert(bigger.elements.clone()) {
                queue.push(bigger.clone());
                out.push(bigger);
            }
        }
        out.push(h);
    }
    // `out` accumulated duplicates of nothing, but order is search order;
    // sort by (order, elements) for stable downstream iteration.
    out.sort_by(|a, b| a.order().cmp(&b.order()).then(a.elements.cmp(&b.elements)));
    out.dedup_by(|a, b| a.elements == b.elements);
    Ok(out)
}

/// The source group of a push or the covering group of a lift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceGroup {
    /// Z^rank with free integer coordinates.
    FreeAbelian { rank: usize },
    Finite(FiniteAbelianGroup),
}

impl SourceGroup {
    pub fn rank(&self) -> usize {
        match self {
            SourceGroup::FreeAbelian { rank } => *rank,
            SourceGroup::Finite(g) => g.rank(),
        }
    }
}

/// A push of a hidden-structure domain: an epimorphism nu from the source
/// onto a finite probe together with a transversal tau picking one source
/// representative per probe element, with nu . tau = id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushData {
    source: SourceGroup,
    probe: FiniteAbelianGroup,
    nu_gens: Vec<GroupElement>,
    tau_reps: Vec<Vec<i64>>,
}

impl PushData {
    pub fn new(
        source: SourceGroup,
        probe: FiniteAbelianGroup,
        nu_gens: Vec<GroupElement>,
        tau_reps: Vec<Vec<i64>>,
    ) -> Result<Self, GroupError> {
        probe.check_dense()?;
        if nu_gens.len() != source.rank() {
            return Err(GroupError::InvalidPush("nu needs one probe image per source generator"));
        }
        for img in &nu_gens {
            probe.check_rank(img.coords().len())?;
        }
        if tau_reps.len() != probe.cardinality() as usize {
            return Err(GroupError::InvalidPush("tau needs one representative per probe element"));
        }
        for rep in &tau_reps {
            if rep.len() != source.rank() {
                return Err(GroupError::InvalidPush("tau representative has wrong rank"));
            }
        }
        if let SourceGroup::Finite(src) = &source {
            // well-definedness: the order of each source generator must
            // kill its image in the probe
            for (i, img) in nu_gens.iter().enumerate() {
                let killed = apply_generator_images(&probe, &nu_gens, &unit_vector(src.rank(), i, src.orders()[i] as i64))?;
                let _ = img;
                if killed != probe.zero() {
                    return Err(GroupError::InvalidPush("nu is not well-defined on the source"));
                }
            }
        }
        let push = PushData { source, probe, nu_gens, tau_reps };
        // nu . tau = id, exhaustively over the probe
        for idx in 0..push.probe.cardinality() as usize {
            let g = push.probe.element_at(idx)?;
            if push.nu(&push.tau_reps[idx])? != g {
                return Err(GroupError::InvalidPush("nu(tau(g)) != g"));
            }
        }
        Ok(push)
    }

    /// The classical period-finding push Z -> Z_q with tau(m) = m.
    pub fn shor_line(q: u64) -> Result<Self, GroupError> {
        let probe = FiniteAbelianGroup::cyclic(q)?;
        probe.check_dense()?;
        let nu_gens = vec![probe.element(&[1])?];
        let tau_reps = (0..q).map(|m| vec![m as i64]).collect();
        PushData::new(SourceGroup::FreeAbelian { rank: 1 }, probe, nu_gens, tau_reps)
    }

    pub fn source(&self) -> &SourceGroup {
        &self.source
    }

    pub fn probe(&self) -> &FiniteAbelianGroup {
        &self.probe
    }

    pub fn nu_generator_images(&self) -> &[GroupElement] {
        &self.nu_gens
    }

    pub fn tau_representatives(&self) -> &[Vec<i64>] {
        &self.tau_reps
    }

    /// nu applied to a source vector.
    pub fn nu(&self, v: &[i64]) -> Result<GroupElement, GroupError> {
        if v.len() != self.source.rank() {
            return Err(GroupError::RankMismatch { expected: self.source.rank(), got: v.len() });
        }
        apply_generator_images(&self.probe, &self.nu_gens, v)
    }

    /// tau applied to a probe element.
    pub fn tau(&self, g: &GroupElement) -> Result<Vec<i64>, GroupError> {
        let idx = self.probe.index_of(g)?;
        Ok(self.tau_reps[idx].clone())
    }
}

fn unit_vector(rank: usize, at: usize, scale: i64) -> Vec<i64> {
    let mut v = vec![0i64; rank];
    v[at] = scale;
    v
}

/// sum_i v_i * images[i] computed in the target group.
fn apply_generator_images(
    target: &FiniteAbelianGroup,
    images: &[GroupElement],
    v: &[i64],
) -> Result<GroupElement, GroupError> {
    let mut acc = vec![0i128; target.rank()];
    for (&vi, img) in v.iter().zip(images) {
        for (a, &c) in acc.iter_mut().zip(img.coords()) {
            *a += vi as i128 * c as i128;
        }
    }
    let coords: Vec<u64> = acc
        .iter()
        .zip(target.orders())
        .map(|(&a, &q)| a.rem_euclid(q as i128) as u64)
        .collect();
    target.element(&coords)
}

/// A lift of a hidden-structure domain: a morphism eta from a covering
/// group onto the source, so oracles compose as phi . eta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftData {
    source: FiniteAbelianGroup,
    covering: SourceGroup,
    eta_gens: Vec<GroupElement>,
}

impl LiftData {
    pub fn new(
        source: FiniteAbelianGroup,
        covering: SourceGroup,
        eta_gens: Vec<GroupElement>,
        rng: &mut impl rand::Rng,
    ) -> Result<Self, GroupError> {
        if eta_gens.len() != covering.rank() {
            return Err(GroupError::InvalidLift("eta needs one image per covering generator"));
        }
        for img in &eta_gens {
            source.check_rank(img.coords().len())?;
        }
        if let SourceGroup::Finite(cov) = &covering {
            for i in 0..cov.rank() {
                let image =
                    apply_generator_images(&source, &eta_gens, &unit_vector(cov.rank(), i, cov.orders()[i] as i64))?;
                if image != source.zero() {
                    return Err(GroupError::InvalidLift("eta is not well-defined on the covering"));
                }
            }
        }
        let lift = LiftData { source, covering, eta_gens };
        // spot-check additivity on random products
        let rank = lift.covering.rank();
        for _ in 0..100 {
            let u: Vec<i64> = (0..rank).map(|_| rng.gen_range(-64..=64i64)).collect();
            let v: Vec<i64> = (0..rank).map(|_| rng.gen_range(-64..=64i64)).collect();
            let sum: Vec<i64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let lhs = lift.eta(&sum)?;
            let rhs = lift.source.add(&lift.eta(&u)?, &lift.eta(&v)?)?;
            if lhs != rhs {
                return Err(GroupError::InvalidLift("eta failed an additivity spot check"));
            }
        }
        Ok(lift)
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn covering(&self) -> &SourceGroup {
        &self.covering
    }

    /// eta applied to a covering vector.
    pub fn eta(&self, v: &[i64]) -> Result<GroupElement, GroupError> {
        if v.len() != self.covering.rank() {
            return Err(GroupError::RankMismatch { expected: self.covering.rank(), got: v.len() });
        }
        apply_generator_images(&self.source, &self.eta_gens, v)
    }
}

/// A square complex matrix stored row-major; small degrees only.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl SmallMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        SmallMatrix { dim, data }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn mul(&self, other: &SmallMatrix) -> SmallMatrix {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.at(k, j);
                }
            }
        }
        SmallMatrix { dim: n, data }
    }

    pub fn conj_transpose(&self) -> SmallMatrix {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.at(i, j).conj();
            }
        }
        SmallMatrix { dim: n, data }
    }

    fn max_abs_diff(&self, other: &SmallMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// One irreducible unitary representation: a matrix per group element.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    pub degree: usize,
    pub mats: Vec<SmallMatrix>,
}

/// A finite (possibly nonabelian) group given by its multiplication table
/// together with a complete list of irreducible unitary representations.
/// Validation is exhaustive: group axioms, per-irrep homomorphism and
/// unitarity (within 1e-9), and sum of squared degrees = group order.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepTable {
    size: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    identity: usize,
    irreps: Vec<Irrep>,
}

pub const IRREP_TOL: f64 = 1e-9;

impl IrrepTable {
    pub fn new(mul_table: Vec<Vec<usize>>, irreps: Vec<Irrep>) -> Result<Self, GroupError> {
        let n = mul_table.len();
        if n == 0 {
            return Err(GroupError::InvalidTable("empty multiplication table"));
        }
        if n > MAX_IRREP_TABLE {
            return Err(GroupError::TooLarge { cardinality: n as u64, limit: MAX_IRREP_TABLE as u64 });
        }
        let mut mul = Vec::with_capacity(n * n);
        for row in &mul_table {
            if row.len() != n {
                return Err(GroupError::InvalidTable("multiplication table is not square"));
            }
            for &v in row {
                if v >= n {
                    return Err(GroupError::InvalidTable("product index out of range"));
                }
                mul.push(v);
            }
        }
        let at = |a: usize, b: usize| mul[a * n + b];
        // identity
        let mut identity = None;
        for e in 0..n {
            if (0..n).all(|x| at(e, x) == x && at(x, e) == x) {
                identity = Some(e);
                break;
            }
        }
        let identity = identity.ok_or(GroupError::InvalidTable("no identity element"))?;
        // associativity
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(GroupError::InvalidTable("multiplication is not associative"));
                    }
                }
            }
        }
        // inverses
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| at(a, b) == identity && at(b, a) == identity) {
                Some(b) => inv[a] = b,
                None => return Err(GroupError::InvalidTable("an element has no inverse")),
            }
        }
        // irreps
        let degree_sq: usize = irreps.iter().map(|r| r.degree * r.degree).sum();
        if degree_sq != n {
            return Err(GroupError::InvalidTable("squared degrees do not sum to the group order"));
        }
        for rep in &irreps {
            if rep.degree == 0 {
                return Err(GroupError::InvalidTable("irrep of degree zero"));
            }
            if rep.mats.len() != n {
                return Err(GroupError::InvalidTable("irrep needs one matrix per element"));
            }
            for m in &rep.mats {
                if m.dim != rep.degree || m.data.len() != rep.degree * rep.degree {
                    return Err(GroupError::InvalidTable("irrep matrix has wrong shape"));
                }
                let prod = m.mul(&m.conj_transpose());
                if prod.max_abs_diff(&SmallMatrix::identity(rep.degree)) > IRREP_TOL {
                    return Err(GroupError::InvalidTable("irrep matrix is not unitary"));
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let prod = rep.mats[a].mul(&rep.mats[b]);
                    if prod.max_abs_diff(&rep.mats[at(a, b)]) > IRREP_TOL {
                        return Err(GroupError::InvalidTable("irrep is not a homomorphism"));
                    }
                }
            }
        }
        Ok(IrrepTable { size: n, mul, inv, identity, irreps })
    }

    /// The symmetric group on three symbols with its three irreps
    /// (degrees 1, 1, 2; the degree-2 irrep uses real orthogonal
    /// matrices). Elements are indexed e, r, r2, s, rs, r2s where r is the
    /// 3-cycle 0->1->2->0 and s swaps symbols 1 and 2; the alternating
    /// subgroup is indices {0, 1, 2}.
    pub fn s3() -> IrrepTable {
        // permutations as images: perm[i] = where symbol i goes
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2], // e
            [1, 2, 0], // r
            [2, 0, 1], // r2
            [0, 2, 1], // s
            [1, 0, 2], // rs
            [2, 1, 0], // r2s
        ];
        let compose = |g: &[usize; 3], h: &[usize; 3]| {
            // (g*h)(x) = g(h(x))
            [g[h[0]], g[h[1]], g[h[2]]]
        };
        let index_of = |p: &[usize; 3]| perms.iter().position(|q| q == p).expect("closed");
        let mul_table: Vec<Vec<usize>> = perms
            .iter()
            .map(|g| perms.iter().map(|h| index_of(&compose(g, h))).collect())
            .collect();
        let parity = |p: &[usize; 3]| {
            let mut inversions = 0;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            inversions % 2
        };
        let one = |v: f64| SmallMatrix { dim: 1, data: vec![Complex64::new(v, 0.0)] };
        let trivial = Irrep { degree: 1, mats: perms.iter().map(|_| one(1.0)).collect() };
        let sign = Irrep {
            degree: 1,
            mats: perms.iter().map(|p| one(if parity(p) == 0 { 1.0 } else { -1.0 })).collect(),
        };
        // standard 2-dim irrep: action on the plane x0+x1+x2 = 0 in the
        // orthonormal basis u1 = (1,-1,0)/sqrt2, u2 = (1,1,-2)/sqrt6
        let s2 = 2.0f64.sqrt();
        let s6 = 6.0f64.sqrt();
        let basis = [[1.0 / s2, -1.0 / s2, 0.0], [1.0 / s6, 1.0 / s6, -2.0 / s6]];
        let standard_mat = |p: &[usize; 3]| {
            let mut data = vec![Complex64::new(0.0, 0.0); 4];
            for i in 0..2 {
                for j in 0..2 {
                    // entry (i,j) = u_i . P(u_j) where P permutes coordinates
                    let mut permuted = [0.0f64; 3];
                    for (x, &px) in p.iter().enumerate() {
                        permuted[px] = basis[j][x];
                    }
                    let dot: f64 = (0..3).map(|x| basis[i][x] * permuted[x]).sum();
                    data[i * 2 + j] = Complex64::new(dot, 0.0);
                }
            }
            SmallMatrix { dim: 2, data }
        };
        let standard = Irrep { degree: 2, mats: perms.iter().map(standard_mat).collect() };
        IrrepTable::new(mul_table, vec![trivial, sign, standard])
            .expect("built-in S3 table is valid")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    /// Index of the trivial irrep (all matrices the 1x1 identity).
    pub fn trivial_irrep(&self) -> Option<usize> {
        self.irreps.iter().position(|rep| {
            rep.degree == 1
                && rep
                    .mats
                    .iter()
                    .all(|m| (m.at(0, 0) - Complex64::new(1.0, 0.0)).norm() <= IRREP_TOL)
        })
    }

    /// Flat basis index of entry (i, j) of irrep `rep`, enumerating
    /// irreps in table order and entries row-major. The sum-of-squares
    /// identity makes this a bijection onto 0..size-1.
    pub fn entry_index(&self, rep: usize, i: usize, j: usize) -> usize {
        let mut base = 0usize;
        for r in &self.irreps[..rep] {
            base += r.degree * r.degree;
        }
        base + i * self.irreps[rep].degree + j
    }

    /// Inverse of [`entry_index`](Self::entry_index): (rep, i, j) at a
    /// flat basis index.
    pub fn entry_at(&self, mut idx: usize) -> (usize, usize, usize) {
        for (rep, r) in self.irreps.iter().enumerate() {
            let block = r.degree * r.degree;
            if idx < block {
                return (rep, idx / r.degree, idx % r.degree);
            }
            idx -= block;
        }
        panic!("entry index out of range");
    }
}

/// Uniformly samples a vector in [-bound, bound]^rank whose coordinate gcd
/// is 1, by rejection. The gcd is accumulated with the extended Euclidean
/// algorithm.
pub fn random_primitive_vector(
    rank: usize,
    bound: u64,
    rng: &mut impl rand::Rng,
) -> Result<Vec<i64>, GroupError> {
    if rank == 0 {
        return Err(GroupError::InvalidParameter("rank must be at least 1"));
    }
    if bound == 0 {
        return Err(GroupError::InvalidParameter("bound must be at least 1"));
    }
    let b = bound as i64;
    loop {
        let v: Vec<i64> = (0..rank).map(|_| rng.gen_range(-b..=b)).collect();
        if v.iter().all(|&c| c == 0) {
            continue;
        }
        let mut g: u64 = 0;
        for &c in &v {
            let (gg, _, _) = numtheory::egcd(g, c.unsigned_abs()).unwrap_or((g.max(c.unsigned_abs()), 0, 0));
            g = gg;
        }
        if g == 1 {
            return Ok(v);
        }
    }
}

/// True iff the coordinates are coprime, i.e. the vector generates a free
/// direct summand of Z^rank and so extends to a linear transversal.
pub fn is_shor_transversal_generator(v: &[i64]) -> Result<bool, GroupError> {
    if v.is_empty() || v.iter().all(|&c| c == 0) {
        return Err(GroupError::ZeroVector);
    }
    let mut g: u64 = 0;
    for &c in v {
        if c != 0 || g != 0 {
            let (gg, _, _) =
                numtheory::egcd(g, c.unsigned_abs()).map_err(|_| GroupError::ZeroVector)?;
            g = gg;
        }
    }
    Ok(g == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn z(q: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(q).unwrap()
    }

    fn grp(orders: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(orders.to_vec()).unwrap()
    }

    #[test]
    fn element_reduction_and_indexing() {
        let g = grp(&[2, 3]);
        let e = g.element(&[5, 7]).unwrap();
        assert_eq!(e.coords(), &[1, 1]);
        assert_eq!(g.index_of(&e).unwrap(), 4);
        assert_eq!(g.element_at(4).unwrap(), e);
        let m = g.element_from_signed(&[-1, -2]).unwrap();
        assert_eq!(m.coords(), &[1, 1]);
        assert!(g.element(&[0]).is_err());
    }

    #[test]
    fn character_multiplicativity_exhaustive() {
        for orders in [&[4][..], &[2, 3][..], &[2, 2, 2][..], &[6][..]] {
            let g = grp(orders);
            for chi_idx in 0..g.cardinality() as usize {
                let chi = g.character_at(chi_idx).unwrap();
                for a in g.elements() {
                    for b in g.elements() {
                        let lhs = g.eval_character(&chi, &g.add(&a, &b).unwrap()).unwrap();
                        let rhs = g.eval_character(&chi, &a).unwrap() * g.eval_character(&chi, &b).unwrap();
                        assert!((lhs - rhs).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_character_is_one_everywhere() {
        let g = grp(&[3, 4]);
        let chi = g.trivial_character();
        for x in g.elements() {
            assert!((g.eval_character(&chi, &x).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(g.character_kills(&chi, &x).unwrap());
        }
    }

    #[test]
    fn character_kills_matches_eval() {
        let g = grp(&[4, 6]);
        for chi_idx in 0..g.cardinality() as usize {
            let chi = g.character_at(chi_idx).unwrap();
            for x in g.elements() {
                let exact = g.character_kills(&chi, &x).unwrap();
                let approx = (g.eval_character(&chi, &x).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-9;
                assert_eq!(exact, approx);
            }
        }
    }

    #[test]
    fn subgroup_closure_and_membership() {
        let g = z(12);
        let k = Subgroup::generated(&g, &[g.element(&[8]).unwrap()]).unwrap();
        // <8> = <4> in Z12
        assert_eq!(k.order(), 3);
        assert!(k.contains(&g.element(&[4]).unwrap()));
        assert!(!k.contains(&g.element(&[2]).unwrap()));
    }

    #[test]
    fn from_elements_verifies_closure() {
        let g = z(4);
        let ok = Subgroup::from_elements(&g, vec![g.element(&[0]).unwrap(), g.element(&[2]).unwrap()]);
        assert!(ok.is_ok());
        let bad = Subgroup::from_elements(&g, vec![g.element(&[0]).unwrap(), g.element(&[1]).unwrap()]);
        assert_eq!(bad.unwrap_err(), GroupError::NotClosed);
        let no_id = Subgroup::from_elements(&g, vec![g.element(&[2]).unwrap()]);
        assert_eq!(no_id.unwrap_err(), GroupError::NotClosed);
    }

    #[test]
    fn annihilator_examples() {
        // Z4, K = {0,2} -> {0,2}
        let g = z(4);
        let k = Subgroup::generated(&g, &[g.element(&[2]).unwrap()]).unwrap();
        let ann = annihilator(&g, &k).unwrap();
        let freqs: Vec<u64> = ann.elements().iter().map(|e| e.coords()[0]).collect();
        assert_eq!(freqs, vec![0, 2]);

        // Z2 x Z2, K = {00,11} -> {00,11}
        let g = grp(&[2, 2]);
        let k = Subgroup::generated(&g, &[g.element(&[1, 1]).unwrap()]).unwrap();
        let ann = annihilator(&g, &k).unwrap();
        let elems: Vec<&[u64]> = ann.elements().iter().map(|e| e.coords()).collect();
        assert_eq!(elems, vec![&[0, 0][..], &[1, 1][..]]);

        // K = G -> only the trivial character
        let g = grp(&[6]);
        let k = Subgroup::full(&g).unwrap();
        let ann = annihilator(&g, &k).unwrap();
        assert_eq!(ann.order(), 1);
        assert_eq!(ann.elements()[0], g.zero());
    }

    #[test]
    fn annihilator_brute_force_agreement() {
        // independent oracle: keep exactly the characters that evaluate to
        // 1 on every element of K
        let g = grp(&[2, 4]);
        for k in all_subgroups(&g).unwrap() {
            let ann = annihilator(&g, &k).unwrap();
            let mut brute: Vec<GroupElement> = Vec::new();
            for idx in 0..g.cardinality() as usize {
                let chi = g.character_at(idx).unwrap();
                if k.elements()
                    .iter()
                    .all(|x| (g.eval_character(&chi, x).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-9)
                {
                    brute.push(g.element(chi.freqs()).unwrap());
                }
            }
            brute.sort();
            assert_eq!(ann.elements(), &brute[..]);
        }
    }

    #[test]
    fn annihilator_cardinality_and_involution() {
        for orders in [&[4][..], &[6][..], &[2, 2][..], &[2, 4][..], &[12][..], &[2, 3][..]] {
            let g = grp(orders);
            for k in all_subgroups(&g).unwrap() {
                let ann = annihilator(&g, &k).unwrap();
                assert_eq!(k.order() * ann.order(), g.cardinality(), "orders {orders:?}");
                let back = annihilator(&g, &ann).unwrap();
                assert_eq!(back.elements(), k.elements(), "orders {orders:?}");
            }
        }
    }

    #[test]
    fn subgroup_from_samples_examples() {
        let g = grp(&[2, 2]);
        let k = subgroup_from_character_samples(&g, &[g.character(&[1, 1]).unwrap()]).unwrap();
        let elems: Vec<&[u64]> = k.elements().iter().map(|e| e.coords()).collect();
        assert_eq!(elems, vec![&[0, 0][..], &[1, 1][..]]);

        let g = z(6);
        let k = subgroup_from_character_samples(&g, &[g.trivial_character()]).unwrap();
        assert_eq!(k.order(), 6);

        let k = subgroup_from_character_samples(&g, &[g.character(&[1]).unwrap()]).unwrap();
        assert_eq!(k.order(), 1);

        assert_eq!(subgroup_from_character_samples(&g, &[]).unwrap_err(), GroupError::EmptyInput);
    }

    #[test]
    fn all_subgroups_counts() {
        assert_eq!(all_subgroups(&z(4)).unwrap().len(), 3);
        assert_eq!(all_subgroups(&z(6)).unwrap().len(), 4);
        assert_eq!(all_subgroups(&grp(&[2, 2])).unwrap().len(), 5);
        assert_eq!(all_subgroups(&grp(&[2, 4])).unwrap().len(), 8);
        // number of subspaces of F_2^3: 1 + 7 + 7 + 1
        assert_eq!(all_subgroups(&grp(&[2, 2, 2])).unwrap().len(), 16);
    }

    #[test]
    fn push_data_shor_line() {
        let push = PushData::shor_line(8).unwrap();
        assert_eq!(push.probe().cardinality(), 8);
        let g = push.probe().element(&[5]).unwrap();
        assert_eq!(push.tau(&g).unwrap(), vec![5]);
        assert_eq!(push.nu(&[13]).unwrap(), push.probe().element(&[5]).unwrap());
        assert_eq!(push.nu(&[-3]).unwrap(), push.probe().element(&[5]).unwrap());
    }

    #[test]
    fn push_data_rejects_bad_tau() {
        let probe = z(4);
        let nu = vec![probe.element(&[1]).unwrap()];
        // tau(2) maps to the wrong element
        let tau = vec![vec![0], vec![1], vec![3], vec![3]];
        let err = PushData::new(SourceGroup::FreeAbelian { rank: 1 }, probe, nu, tau).unwrap_err();
        assert_eq!(err, GroupError::InvalidPush("nu(tau(g)) != g"));
    }

    #[test]
    fn push_data_finite_source_well_defined() {
        // Z2 -> Z4 via 1 -> 1 is not well defined (2*1 = 2 != 0)
        let probe = z(4);
        let nu = vec![probe.element(&[1]).unwrap()];
        let tau = vec![vec![0], vec![1], vec![0], vec![1]];
        let src = SourceGroup::Finite(z(2));
        assert!(PushData::new(src, probe, nu, tau).is_err());
    }

    #[test]
    fn lift_data_homomorphism() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let g = z(6);
        let lift = LiftData::new(
            g.clone(),
            SourceGroup::FreeAbelian { rank: 1 },
            vec![g.element(&[1]).unwrap()],
            &mut rng,
        )
        .unwrap();
        assert_eq!(lift.eta(&[9]).unwrap(), g.element(&[3]).unwrap());
        assert_eq!(lift.eta(&[-1]).unwrap(), g.element(&[5]).unwrap());

        // Z3 covering Z6 via 1 -> 2 is well defined
        let lift = LiftData::new(
            g.clone(),
            SourceGroup::Finite(z(3)),
            vec![g.element(&[2]).unwrap()],
            &mut rng,
        );
        assert!(lift.is_ok());

        // Z3 covering Z6 via 1 -> 1 is not
        let lift = LiftData::new(
            g.clone(),
            SourceGroup::Finite(z(3)),
            vec![g.element(&[1]).unwrap()],
            &mut rng,
        );
        assert!(lift.is_err());
    }

    #[test]
    fn s3_table_validates() {
        let t = IrrepTable::s3();
        assert_eq!(t.size(), 6);
        assert_eq!(t.identity(), 0);
        assert_eq!(t.trivial_irrep(), Some(0));
        let degrees: Vec<usize> = t.irreps().iter().map(|r| r.degree).collect();
        assert_eq!(degrees, vec![1, 1, 2]);
        // spot-check the table: r * r2 = e, s * s = e, r * s = rs
        assert_eq!(t.mul(1, 2), 0);
        assert_eq!(t.mul(3, 3), 0);
        assert_eq!(t.mul(1, 3), 4);
        // A3 = {0,1,2} is closed
        for a in 0..3 {
            for b in 0..3 {
                assert!(t.mul(a, b) < 3);
            }
        }
    }

    #[test]
    fn irrep_table_rejects_wrong_degree_sum() {
        let t = IrrepTable::s3();
        let mul: Vec<Vec<usize>> = (0..6).map(|a| (0..6).map(|b| t.mul(a, b)).collect()).collect();
        let only_two = t.irreps()[..2].to_vec();
        assert!(IrrepTable::new(mul, only_two).is_err());
    }

    #[test]
    fn irrep_table_rejects_non_homomorphism() {
        let t = IrrepTable::s3();
        let mul: Vec<Vec<usize>> = (0..6).map(|a| (0..6).map(|b| t.mul(a, b)).collect()).collect();
        let mut reps = t.irreps().to_vec();
        // corrupt one sign entry
        reps[1].mats[3] = SmallMatrix { dim: 1, data: vec![Complex64::new(1.0, 0.0)] };
        assert!(IrrepTable::new(mul, reps).is_err());
    }

    #[test]
    fn primitive_vectors() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let v = random_primitive_vector(3, 5, &mut rng).unwrap();
            assert!(is_shor_transversal_generator(&v).unwrap());
            assert!(v.iter().any(|&c| c != 0));
            assert!(v.iter().all(|&c| c.abs() <= 5));
        }
        // rank 1 forces +-1
        for _ in 0..50 {
            let v = random_primitive_vector(1, 9, &mut rng).unwrap();
            assert_eq!(v[0].abs(), 1);
        }
        assert_eq!(is_shor_transversal_generator(&[2, 3]).unwrap(), true);
        assert_eq!(is_shor_transversal_generator(&[2, 4]).unwrap(), false);
        assert_eq!(is_shor_transversal_generator(&[1]).unwrap(), true);
        assert!(is_shor_transversal_generator(&[0, 0]).is_err());
    }
}
