//! Permutation groups acting on coordinates.
//!
//! Indices are 0-based internally. Cycle notation in and out of this module
//! is 1-based, e.g. `(1,2,5,3)(6,10,11)`. A permutation `p` acts on a vector
//! by moving the entry in position `i` to position `p(i)`, so the 5-cycle
//! `(1,2,3,4,5)` sends `(c0,c1,c2,c3,c4)` to `(c4,c0,c1,c2,c3)`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on the number of points an orbit may contain.
pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;

/// Default maximal word length for the non-disjoint subgroup search.
pub const DEFAULT_MAX_WORD_LEN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("index {index} appears twice in one permutation")]
    DuplicateIndex { index: usize },
    #[error("malformed cycle notation: {0}")]
    Malformed(String),
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("orbit exceeds cap of {0} points")]
    OrbitCapExceeded(usize),
}

/// A bijection on `{0..n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self, GroupError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &img in &images {
            if img >= n {
                return Err(GroupError::IndexOutOfRange { index: img + 1, n });
            }
            if seen[img] {
                return Err(GroupError::DuplicateIndex { index: img + 1 });
            }
            seen[img] = true;
        }
        Ok(Self { images })
    }

    /// Builds the permutation of `{0..n-1}` whose only moved points form `cycle`.
    pub fn from_cycle(n: usize, cycle: &Cycle) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        let k = cycle.len();
        for (pos, &i) in cycle.support().iter().enumerate() {
            images[i] = cycle.support()[(pos + 1) % k];
        }
        Self { images }
    }

    /// Parses cycle notation such as `(1,2,3)(4,5)` or `()`.
    pub fn parse(text: &str, n: usize) -> Result<Self, GroupError> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let body_end = rest
                .find(')')
                .ok_or_else(|| GroupError::Malformed(text.to_string()))?;
            if !rest.starts_with('(') {
                return Err(GroupError::Malformed(text.to_string()));
            }
            let body = &rest[1..body_end];
            rest = &rest[body_end + 1..];
            if body.is_empty() {
                continue;
            }
            let mut cycle = Vec::new();
            for tok in body.split(',') {
                let index: usize = tok
                    .parse()
                    .map_err(|_| GroupError::Malformed(text.to_string()))?;
                if index == 0 || index > n {
                    return Err(GroupError::IndexOutOfRange { index, n });
                }
                if used[index - 1] {
                    return Err(GroupError::DuplicateIndex { index });
                }
                used[index - 1] = true;
                cycle.push(index - 1);
            }
            for (pos, &i) in cycle.iter().enumerate() {
                images[i] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Product applying `self` first, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&i| other.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    /// Moves entry `i` of `x` to position `self(i)`.
    pub fn apply<T: Clone>(&self, x: &[T]) -> Vec<T> {
        let mut out = x.to_vec();
        for (i, v) in x.iter().enumerate() {
            out[self.images[i]] = v.clone();
        }
        out
    }

    pub fn cycles(&self) -> Vec<Cycle> {
        cycle_decomposition(self)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A nontrivial cycle, stored as its support in cycle order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    support: Vec<usize>,
}

impl Cycle {
    /// `support` is 0-based and must have distinct entries.
    pub fn new(support: Vec<usize>) -> Result<Self, GroupError> {
        let mut seen = HashSet::new();
        for &i in &support {
            if !seen.insert(i) {
                return Err(GroupError::DuplicateIndex { index: i + 1 });
            }
        }
        Ok(Self { support })
    }

    /// The cycle `(1,2,...,k)` in 1-based notation.
    pub fn full(k: usize) -> Self {
        Self {
            support: (0..k).collect(),
        }
    }

    /// Parses a single cycle like `(1,15,7,5,12)`.
    pub fn parse(text: &str, n: usize) -> Result<Self, GroupError> {
        let p = Permutation::parse(text, n)?;
        let mut cycles = p.cycles();
        if cycles.len() != 1 {
            return Err(GroupError::Malformed(text.to_string()));
        }
        // keep the orientation and starting point the user wrote
        let first: usize = text
            .trim()
            .trim_start_matches('(')
            .split(',')
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| GroupError::Malformed(text.to_string()))?;
        let mut c = cycles.remove(0);
        let pos = c.position(first - 1).expect("first index lies on the cycle");
        c.support.rotate_left(pos);
        Ok(c)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// The period `k` of the cycle.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.contains(&i)
    }

    pub fn position(&self, i: usize) -> Option<usize> {
        self.support.iter().position(|&j| j == i)
    }

    pub fn is_disjoint(&self, other: &Cycle) -> bool {
        self.support.iter().all(|i| !other.contains(*i))
    }

    /// Restricts `x` to the support, in cycle order.
    pub fn restrict<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.support.iter().map(|&i| x[i].clone()).collect()
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (pos, i) in self.support.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Cycle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Classification of a generating set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorClass {
    DisjointCycles,
    ProductOfDisjointCycles,
    MixedDisjoint,
    NonDisjoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub n: usize,
    pub generators: Vec<Permutation>,
    pub class: Option<GeneratorClass>,
    pub selected_cycles: Vec<Cycle>,
}

impl GroupSpec {
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            generators: Vec::new(),
            class: None,
            selected_cycles: Vec::new(),
        }
    }

    /// The group generated by pairwise disjoint cycles, already analyzed.
    pub fn from_cycles(n: usize, cycles: Vec<Cycle>) -> Self {
        let generators = cycles.iter().map(|c| Permutation::from_cycle(n, c)).collect();
        Self {
            n,
            generators,
            class: Some(GeneratorClass::DisjointCycles),
            selected_cycles: cycles,
        }
    }

    /// Generators that move at least one point.
    pub fn nontrivial_generators(&self) -> impl Iterator<Item = &Permutation> {
        self.generators.iter().filter(|g| !g.is_identity())
    }

    /// Classifies and selects working cycles in one step.
    pub fn analyzed(mut self, max_word_len: usize) -> Self {
        self.class = Some(classify(&self));
        select_working_cycles(self, max_word_len)
    }

    /// Coordinate orbits of the generated group, each sorted.
    pub fn coordinate_orbits(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            let mut j = i;
            while parent[j] != r {
                let next = parent[j];
                parent[j] = r;
                j = next;
            }
            r
        }
        for g in &self.generators {
            for i in 0..self.n {
                let (a, b) = (find(&mut parent, i), find(&mut parent, g.image(i)));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n];
        for i in 0..self.n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[r]].push(i);
        }
        classes
    }

    /// Coordinates not covered by any selected cycle.
    pub fn non_active(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| !self.selected_cycles.iter().any(|c| c.contains(i)))
            .collect()
    }
}

/// Parses a list of generator strings over `{1..n}`.
pub fn parse_generators<S: AsRef<str>>(texts: &[S], n: usize) -> Result<GroupSpec, GroupError> {
    let generators = texts
        .iter()
        .map(|t| Permutation::parse(t.as_ref(), n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroupSpec {
        n,
        generators,
        class: None,
        selected_cycles: Vec::new(),
    })
}

/// Disjoint cycles of `p` ordered by smallest moved point; fixed points omitted.
pub fn cycle_decomposition(p: &Permutation) -> Vec<Cycle> {
    let n = p.degree();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || p.image(start) == start {
            seen[start] = true;
            continue;
        }
        let mut support = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            support.push(i);
            i = p.image(i);
        }
        out.push(Cycle { support });
    }
    out
}

pub fn classify(gs: &GroupSpec) -> GeneratorClass {
    let decomposed: Vec<Vec<Cycle>> = gs.nontrivial_generators().map(cycle_decomposition).collect();
    let all: Vec<&Cycle> = decomposed.iter().flatten().collect();
    let disjoint = all
        .iter()
        .enumerate()
        .all(|(a, x)| all[a + 1..].iter().all(|y| x.is_disjoint(y)));
    if !disjoint {
        return GeneratorClass::NonDisjoint;
    }
    if decomposed.iter().all(|cs| cs.len() == 1) {
        GeneratorClass::DisjointCycles
    } else if decomposed.len() == 1 {
        GeneratorClass::ProductOfDisjointCycles
    } else {
        GeneratorClass::MixedDisjoint
    }
}

/// Chooses pairwise disjoint cycles to build constraints on.
///
/// Disjoint classes use every generator cycle. For overlapping generators a
/// breadth-first search over words of length `1..=max_word_len` picks the
/// element whose longest cycle is longest (first found wins ties) and selects
/// all its cycles. An empty selection means no usable symmetry was found.
pub fn select_working_cycles(mut gs: GroupSpec, max_word_len: usize) -> GroupSpec {
    let class = gs.class.unwrap_or_else(|| classify(&gs));
    gs.class = Some(class);
    let mut selected: Vec<Cycle> = match class {
        GeneratorClass::NonDisjoint => longest_cycle_element(&gs, max_word_len)
            .map(|p| cycle_decomposition(&p))
            .unwrap_or_default(),
        _ => gs.nontrivial_generators().flat_map(cycle_decomposition).collect(),
    };
    // longest first, stable on discovery order
    selected.sort_by_key(|c| std::cmp::Reverse(c.len()));
    gs.selected_cycles = selected;
    gs
}

fn longest_cycle_element(gs: &GroupSpec, max_word_len: usize) -> Option<Permutation> {
    let gens: Vec<&Permutation> = gs.nontrivial_generators().collect();
    if gens.is_empty() {
        return None;
    }
    let longest = |p: &Permutation| cycle_decomposition(p).iter().map(Cycle::len).max().unwrap_or(0);
    let mut best: Option<(usize, Permutation)> = None;
    let mut seen: HashSet<Permutation> = HashSet::new();
    let mut frontier: VecDeque<Permutation> = VecDeque::new();
    for g in &gens {
        if seen.insert((*g).clone()) {
            frontier.push_back((*g).clone());
        }
    }
    for depth in 1..=max_word_len.max(1) {
        let mut next = VecDeque::new();
        for p in frontier.drain(..) {
            let l = longest(&p);
            if best.as_ref().is_none_or(|(bl, _)| l > *bl) {
                best = Some((l, p.clone()));
            }
            if depth < max_word_len {
                for g in &gens {
                    let q = p.then(g);
                    if seen.insert(q.clone()) {
                        next.push_back(q);
                    }
                }
            }
        }
        frontier = next;
    }
    best.filter(|(l, _)| *l >= 2).map(|(_, p)| p)
}

/// Orbit of `z` under the generated group, sorted lexicographically.
pub fn orbit(gs: &GroupSpec, z: &[i64]) -> Result<Vec<Vec<i64>>, GroupError> {
    orbit_capped(gs, z, DEFAULT_ORBIT_CAP)
}

pub fn orbit_capped(gs: &GroupSpec, z: &[i64], cap: usize) -> Result<Vec<Vec<i64>>, GroupError> {
    if z.len() != gs.n {
        return Err(GroupError::LengthMismatch {
            expected: gs.n,
            got: z.len(),
        });
    }
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(z.to_vec());
    queue.push_back(z.to_vec());
    while let Some(p) = queue.pop_front() {
        for g in &gs.generators {
            let q = g.apply(&p);
            if !seen.contains(&q) {
                if seen.len() >= cap {
                    return Err(GroupError::OrbitCapExceeded(cap));
                }
                seen.insert(q.clone());
                queue.push_back(q);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Orthogonal integer basis of the space fixed by the selected cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedSpaceBasis {
    pub vectors: Vec<Vec<i64>>,
}

pub fn fixed_space_basis(gs: &GroupSpec) -> FixedSpaceBasis {
    let mut vectors = Vec::new();
    for c in &gs.selected_cycles {
        let mut v = vec![0; gs.n];
        for &i in c.support() {
            v[i] = 1;
        }
        vectors.push(v);
    }
    for i in gs.non_active() {
        let mut v = vec![0; gs.n];
        v[i] = 1;
        vectors.push(v);
    }
    FixedSpaceBasis { vectors }
}

/// Index of the layer containing `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LayerIndex(pub i64);

pub fn layer_of(z: &[i64]) -> LayerIndex {
    LayerIndex(z.iter().sum())
}
