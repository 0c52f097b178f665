//! Pairings, partitions, the noncrossing lattice and free cumulants.
//!
//! Elements are stored 0-based; the text forms (`(1,6)(2,3)(4,5)` for
//! pairings, `{1}{2,3}` for partitions) are 1-based.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Num;

use crate::{Error, Result};

/// Largest `m` for which all `m!` bipartite pairings are enumerated.
pub const PAIRING_CAP: usize = 8;
/// Largest `m` for which `NC(m)` is enumerated.
pub const NC_CAP: usize = 10;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn count_sets(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }

    pub fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

/// A partition of `[n]` in canonical form: elements ascending within blocks,
/// blocks ordered by their least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::domain("partition blocks must be nonempty"));
            }
            for &x in block {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::domain(format!("blocks do not partition [{n}]")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::domain(format!("blocks do not cover [{n}]")));
        }
        Ok(Self::canonical(n, blocks))
    }

    fn canonical(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { n, blocks }
    }

    /// Partition whose blocks are the classes of `labels[x]`.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (x, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(x);
        }
        Self::canonical(labels.len(), map.into_values().collect())
    }

    pub fn one(n: usize) -> Self {
        Self { n, blocks: if n == 0 { vec![] } else { vec![(0..n).collect()] } }
    }

    pub fn singletons(n: usize) -> Self {
        Self { n, blocks: (0..n).map(|x| vec![x]).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (k, b) in self.blocks.iter().enumerate() {
            for &x in b {
                labels[x] = k;
            }
        }
        labels
    }

    /// Least common coarsening.
    pub fn join(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut uf = UnionFind::new(self.n);
        for b in self.blocks.iter().chain(&other.blocks) {
            for w in b.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        Ok(Self::from_labels(&uf.labels()))
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let labels = other.labels();
        self.blocks.iter().all(|b| b.iter().all(|&x| labels[x] == labels[b[0]]))
    }

    pub fn is_crossing(&self) -> bool {
        let labels = self.labels();
        let n = self.n;
        // a < b < c < d with a, c in one block and b, d in another
        for a in 0..n {
            for b in a + 1..n {
                if labels[b] == labels[a] {
                    continue;
                }
                for c in b + 1..n {
                    if labels[c] != labels[a] {
                        continue;
                    }
                    if (c + 1..n).any(|d| labels[d] == labels[b]) {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn is_noncrossing(&self) -> bool {
        !self.is_crossing()
    }

    /// Blocks made of consecutive integers.
    pub fn segments(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().filter(|b| b.windows(2).all(|w| w[1] == w[0] + 1)).cloned().collect()
    }

    /// Blocks that are consecutive modulo `n` (e.g. `{n, 1, 2}` counts).
    pub fn cyclic_segments(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        self.blocks
            .iter()
            .filter(|b| {
                if b.len() == n {
                    return true;
                }
                // consecutive mod n iff exactly one cyclic gap is larger than one
                let gaps = b
                    .iter()
                    .zip(b.iter().cycle().skip(1))
                    .filter(|(x, y)| (**y + n - **x) % n != 1)
                    .count();
                gaps == 1
            })
            .cloned()
            .collect()
    }

    /// Restriction of a word to one block, preserving order.
    pub fn restrict<T: Clone>(word: &[T], block: &[usize]) -> Vec<T> {
        block.iter().map(|&x| word[x].clone()).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let items: Vec<String> = b.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('{')
                .and_then(|r| r.split_once('}'))
                .ok_or_else(|| Error::parse(format!("bad partition literal {s:?}")))?;
            let block = body
                .0
                .split(',')
                .map(|t| t.trim().parse::<usize>().ok().filter(|&x| x >= 1).map(|x| x - 1))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::parse(format!("bad block in {s:?}")))?;
            blocks.push(block);
            rest = body.1.trim_start();
        }
        let n = blocks.iter().map(|b| b.len()).sum();
        Partition::from_blocks(n, blocks)
    }
}

/// A fixed-point-free involution of `[2m]` pairing odd with even positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    partner: Vec<usize>,
}

impl Pairing {
    pub fn new(partner: Vec<usize>) -> Result<Self> {
        let n = partner.len();
        if n == 0 || n % 2 == 1 {
            return Err(Error::domain("pairing needs an even, nonzero ground set"));
        }
        for (k, &p) in partner.iter().enumerate() {
            if p >= n || p == k || partner[p] != k {
                return Err(Error::domain("partner map is not a fixed-point-free involution"));
            }
            if (k + p) % 2 == 0 {
                return Err(Error::domain(format!(
                    "pair ({}, {}) does not join an odd and an even position",
                    k + 1,
                    p + 1
                )));
            }
        }
        Ok(Self { partner })
    }

    /// From 1-based pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![usize::MAX; n];
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::domain(format!("pair ({a}, {b}) outside [{n}]")));
            }
            if partner[a - 1] != usize::MAX || partner[b - 1] != usize::MAX {
                return Err(Error::domain("element paired twice"));
            }
            partner[a - 1] = b - 1;
            partner[b - 1] = a - 1;
        }
        if partner.contains(&usize::MAX) {
            return Err(Error::domain("pairs do not cover the ground set"));
        }
        Self::new(partner)
    }

    /// Number of factors; the ground set is `[2m]`.
    pub fn m(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn partner(&self, k: usize) -> usize {
        self.partner[k]
    }

    pub fn partners(&self) -> &[usize] {
        &self.partner
    }

    /// 1-based pairs `(a, b)` with `a < b`, ordered by `a`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len()).filter(|&k| k < self.partner[k]).map(|k| (k + 1, self.partner[k] + 1)).collect()
    }

    /// 0-based factor pairs `(t, s)`: the `g` of factor `t` pairs with the `ḡ` of factor `s`.
    pub fn factor_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.m()).map(|t| (t, self.partner[2 * t] / 2)).collect()
    }

    pub fn to_partition(&self) -> Partition {
        let blocks = (0..self.len())
            .filter(|&k| k < self.partner[k])
            .map(|k| vec![k, self.partner[k]])
            .collect();
        Partition::canonical(self.len(), blocks)
    }

    /// Closure of a subset under the pairing.
    pub fn is_closed(&self, subset: &[usize]) -> bool {
        subset.iter().all(|&x| subset.contains(&self.partner[x]))
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.pairs() {
            write!(f, "({a},{b})")?;
        }
        Ok(())
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let (body, tail) = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| Error::parse(format!("bad pairing literal {s:?}")))?;
            let (a, b) = body.split_once(',').ok_or_else(|| Error::parse(format!("bad pair {body:?}")))?;
            let a = a.trim().parse().map_err(|_| Error::parse(format!("bad pair {body:?}")))?;
            let b = b.trim().parse().map_err(|_| Error::parse(format!("bad pair {body:?}")))?;
            pairs.push((a, b));
            rest = tail.trim_start();
        }
        Pairing::from_pairs(2 * pairs.len(), &pairs)
    }
}

/// A bipartite pairing of `[a + b]` with at least one pair crossing between
/// `[a]` and `{a+1, …, a+b}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiPairing {
    a: usize,
    b: usize,
    pairing: Pairing,
}

impl BiPairing {
    pub fn new(a: usize, b: usize, pairing: Pairing) -> Result<Self> {
        if pairing.len() != a + b {
            return Err(Error::DimensionMismatch { expected: a + b, found: pairing.len() });
        }
        if !(0..a).any(|s| pairing.partner(s) >= a) {
            return Err(Error::domain("pairing splits as a direct sum"));
        }
        Ok(Self { a, b, pairing })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }
}

/// Next permutation in lexicographic order; false once the last one is reached.
fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All `m!` bipartite pairings of `[2m]`, in lexicographic order of
/// `(π(1), π(3), …, π(2m−1))`.
pub fn enumerate_bipartite_pairings(m: usize) -> Result<Vec<Pairing>> {
    if m == 0 {
        return Err(Error::domain("m must be positive"));
    }
    if m > PAIRING_CAP {
        let cost = (1..=m as u128).product();
        return Err(Error::Budget { what: format!("pairings of [{}]", 2 * m), cost, limit: 40320 });
    }
    let mut evens: Vec<usize> = (0..m).map(|s| 2 * s + 1).collect();
    let mut out = Vec::new();
    loop {
        let mut partner = vec![0; 2 * m];
        for (t, &e) in evens.iter().enumerate() {
            partner[2 * t] = e;
            partner[e] = 2 * t;
        }
        out.push(Pairing { partner });
        if !next_permutation(&mut evens) {
            break;
        }
    }
    Ok(out)
}

/// Connected bipartite pairings of `[a + b]` (both `a` and `b` even).
pub fn enumerate_bipairings(a: usize, b: usize) -> Result<Vec<BiPairing>> {
    if a == 0 || b == 0 || a % 2 == 1 || b % 2 == 1 {
        return Err(Error::domain("both trace lengths must be even and positive"));
    }
    Ok(enumerate_bipartite_pairings((a + b) / 2)?
        .into_iter()
        .filter_map(|p| BiPairing::new(a, b, p).ok())
        .collect())
}

/// The interval pairing `(1,2)(3,4)…(2m−1,2m)` as a partition of `[2m]`.
pub fn delta(m: usize) -> Partition {
    Partition::canonical(2 * m, (0..m).map(|k| vec![2 * k, 2 * k + 1]).collect())
}

/// `ν₁(2k) = 2k + 1` (indices mod `2m`): `(1,2m)(2,3)(4,5)…`.
pub fn nu1(m: usize) -> Result<Pairing> {
    if m == 0 {
        return Err(Error::domain("m must be positive"));
    }
    let n = 2 * m;
    let mut partner = vec![0; n];
    for k in 1..=m {
        let (a, b) = (2 * k - 1, (2 * k) % n);
        partner[a] = b;
        partner[b] = a;
    }
    Pairing::new(partner)
}

/// `ν₂(2k − 1) = 2k + 2` (indices mod `2m`), defined for `m ≥ 3`.
pub fn nu2(m: usize) -> Result<Pairing> {
    if m < 3 {
        return Err(Error::domain(format!("nu2 is defined for m >= 3, got m = {m}")));
    }
    let n = 2 * m;
    let mut partner = vec![0; n];
    for k in 1..=m {
        let (a, b) = (2 * k - 2, (2 * k + 1) % n);
        partner[a] = b;
        partner[b] = a;
    }
    Pairing::new(partner)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoncrossingPartition(Partition);

impl NoncrossingPartition {
    pub fn as_partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        self.0.blocks()
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }
}

impl TryFrom<Partition> for NoncrossingPartition {
    type Error = Error;

    fn try_from(p: Partition) -> Result<Self> {
        if p.is_crossing() {
            Err(Error::domain(format!("{p} is crossing")))
        } else {
            Ok(Self(p))
        }
    }
}

impl fmt::Display for NoncrossingPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Noncrossing partitions of the interval `[lo, hi)`, as block lists.
fn nc_interval(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
    if lo == hi {
        return vec![vec![]];
    }
    // The block of `lo` picks a subset of later elements; the gaps between
    // consecutive chosen elements (and after the last) are filled independently.
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<Vec<usize>>)> = vec![(vec![lo], vec![])];
    while let Some((block, rest)) = stack.pop() {
        let last = *block.last().unwrap();
        // close the block here: fill the tail (last, hi)
        for tail in nc_interval(last + 1, hi) {
            let mut blocks = rest.clone();
            blocks.push(block.clone());
            blocks.extend(tail);
            out.push(blocks);
        }
        // or extend it with some `next`, filling (last, next) in between
        for next in last + 1..hi {
            for gap in nc_interval(last + 1, next) {
                let mut b = block.clone();
                b.push(next);
                let mut r = rest.clone();
                r.extend(gap);
                stack.push((b, r));
            }
        }
    }
    out
}

pub fn enumerate_nc(m: usize) -> Result<Vec<NoncrossingPartition>> {
    if m > NC_CAP {
        return Err(Error::Budget {
            what: format!("NC({m})"),
            cost: catalan(m as u64) as u128,
            limit: catalan(NC_CAP as u64) as u128,
        });
    }
    let mut all: Vec<NoncrossingPartition> = nc_interval(0, m)
        .into_iter()
        .map(|blocks| NoncrossingPartition(Partition::canonical(m, blocks)))
        .collect();
    all.sort_by(|a, b| a.0.cmp(&b.0));
    all.dedup();
    Ok(all)
}

pub fn catalan(n: u64) -> u64 {
    (0..n).fold(1u64, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

/// `γ̂`: each block `(t₁, …, t_q)` becomes `(2t₁−1, 2t₁, …, 2t_q−1, 2t_q)`.
pub fn hat(gamma: &NoncrossingPartition) -> Partition {
    let blocks = gamma.blocks().iter().map(|b| b.iter().flat_map(|&t| [2 * t, 2 * t + 1]).collect()).collect();
    Partition::canonical(2 * gamma.n(), blocks)
}

/// Access to mixed moments `φ(a_{w₁} ⋯ a_{wₙ})` keyed by the word of variable ids.
pub trait MomentFunctional<T> {
    fn moment(&mut self, word: &[usize]) -> Result<T>;
}

impl<T, F> MomentFunctional<T> for F
where
    F: FnMut(&[usize]) -> Result<T>,
{
    fn moment(&mut self, word: &[usize]) -> Result<T> {
        self(word)
    }
}

/// Explicit table of words to values; missing words are an error.
#[derive(Debug, Clone, Default)]
pub struct MomentTable<T> {
    values: HashMap<Vec<usize>, T>,
}

impl<T: Clone> MomentTable<T> {
    pub fn new() -> Self {
        Self { values: HashMap::new() }
    }

    pub fn insert(&mut self, word: Vec<usize>, value: T) {
        self.values.insert(word, value);
    }

    pub fn get(&self, word: &[usize]) -> Option<&T> {
        self.values.get(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.values.keys()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Clone> MomentFunctional<T> for MomentTable<T> {
    fn moment(&mut self, word: &[usize]) -> Result<T> {
        self.values.get(word).cloned().ok_or_else(|| Error::MissingMoment(word.to_vec()))
    }
}

#[derive(Debug, Default)]
struct NcCache {
    by_size: HashMap<usize, Arc<Vec<NoncrossingPartition>>>,
}

impl NcCache {
    fn get(&mut self, n: usize) -> Result<Arc<Vec<NoncrossingPartition>>> {
        if let Some(all) = self.by_size.get(&n) {
            return Ok(all.clone());
        }
        let all = Arc::new(enumerate_nc(n)?);
        self.by_size.insert(n, all.clone());
        Ok(all)
    }
}

/// Multivariate free cumulants from a moment functional:
/// `κₙ(w) = φ(w) − Σ_{γ ∈ NC(n), γ ≠ 1ₙ} Π_{B ∈ γ} κ_{|B|}(w|_B)`,
/// memoised on subwords.
pub struct FreeCumulants<T, F> {
    moments: F,
    memo: HashMap<Vec<usize>, T>,
    nc: NcCache,
}

impl<T, F> FreeCumulants<T, F>
where
    T: Clone + Num,
    F: MomentFunctional<T>,
{
    pub fn new(moments: F) -> Self {
        Self { moments, memo: HashMap::new(), nc: NcCache::default() }
    }

    pub fn cumulant(&mut self, word: &[usize]) -> Result<T> {
        if word.is_empty() {
            return Err(Error::domain("cumulants are indexed by nonempty words"));
        }
        if let Some(v) = self.memo.get(word) {
            return Ok(v.clone());
        }
        let mut value = self.moments.moment(word)?;
        let n = word.len();
        for gamma in self.nc.get(n)?.iter() {
            if gamma.blocks().len() == 1 {
                continue;
            }
            let mut term = T::one();
            for block in gamma.blocks() {
                term = term * self.cumulant(&Partition::restrict(word, block))?;
            }
            value = value - term;
        }
        self.memo.insert(word.to_vec(), value.clone());
        Ok(value)
    }

    pub fn into_moments(self) -> F {
        self.moments
    }
}

/// Moments from a cumulant functional: `φ(w) = Σ_{γ ∈ NC(n)} Π_{B ∈ γ} κ(w|_B)`.
pub struct FreeMoments<T, K> {
    cumulants: K,
    memo: HashMap<Vec<usize>, T>,
    nc: NcCache,
}

impl<T, K> FreeMoments<T, K>
where
    T: Clone + Num,
    K: MomentFunctional<T>,
{
    pub fn new(cumulants: K) -> Self {
        Self { cumulants, memo: HashMap::new(), nc: NcCache::default() }
    }

    pub fn moment(&mut self, word: &[usize]) -> Result<T> {
        if let Some(v) = self.memo.get(word) {
            return Ok(v.clone());
        }
        let mut value = T::zero();
        for gamma in self.nc.get(word.len())?.iter() {
            let mut term = T::one();
            for block in gamma.blocks() {
                term = term * self.cumulants.moment(&Partition::restrict(word, block))?;
            }
            value = value + term;
        }
        self.memo.insert(word.to_vec(), value.clone());
        Ok(value)
    }
}

/// Converts every word of a moment table into its free cumulant.
pub fn moments_to_free_cumulants<T: Clone + Num>(moments: &MomentTable<T>) -> Result<MomentTable<T>> {
    let words: Vec<Vec<usize>> = moments.words().cloned().collect();
    let mut calc = FreeCumulants::new(moments.clone());
    let mut out = MomentTable::new();
    for w in words {
        let k = calc.cumulant(&w)?;
        out.insert(w, k);
    }
    Ok(out)
}

/// Inverse of [`moments_to_free_cumulants`].
pub fn free_cumulants_to_moments<T: Clone + Num>(cumulants: &MomentTable<T>) -> Result<MomentTable<T>> {
    let words: Vec<Vec<usize>> = cumulants.words().cloned().collect();
    let mut calc = FreeMoments::new(cumulants.clone());
    let mut out = MomentTable::new();
    for w in words {
        let m = calc.moment(&w)?;
        out.insert(w, m);
    }
    Ok(out)
}

/// One-variable moments `m₁..mₙ` from cumulants `κ₁..κₙ`.
pub fn univariate_moments<T: Clone + Num>(cumulants: &[T]) -> Result<Vec<T>> {
    let ks = cumulants.to_vec();
    let mut calc = FreeMoments::new(move |w: &[usize]| -> Result<T> { Ok(ks[w.len() - 1].clone()) });
    (1..=cumulants.len()).map(|n| calc.moment(&vec![0; n])).collect()
}

/// One-variable cumulants `κ₁..κₙ` from moments `m₁..mₙ`.
pub fn univariate_cumulants<T: Clone + Num>(moments: &[T]) -> Result<Vec<T>> {
    let ms = moments.to_vec();
    let mut calc = FreeCumulants::new(move |w: &[usize]| -> Result<T> { Ok(ms[w.len() - 1].clone()) });
    (1..=moments.len()).map(|n| calc.cumulant(&vec![0; n])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat, Rational};

    #[test]
    fn pairing_enumeration_small() {
        let p1 = enumerate_bipartite_pairings(1).unwrap();
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].to_string(), "(1,2)");
        let p2: Vec<String> = enumerate_bipartite_pairings(2).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(p2, ["(1,2)(3,4)", "(1,4)(2,3)"]);
        assert_eq!(enumerate_bipartite_pairings(3).unwrap().len(), 6);
        assert!(matches!(enumerate_bipartite_pairings(9), Err(Error::Budget { .. })));
        assert!(enumerate_bipartite_pairings(0).is_err());
    }

    #[test]
    fn pairing_counts_and_invariants() {
        let mut fact = 1;
        for m in 1..=7 {
            fact *= m;
            let all = enumerate_bipartite_pairings(m).unwrap();
            assert_eq!(all.len(), fact);
            let mut sorted = all.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), fact);
            for p in &all {
                assert!(Pairing::new(p.partners().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn pairing_validation() {
        assert!(Pairing::new(vec![2, 3, 0, 1]).is_err()); // (1,3) pairs two odd positions
        assert!(Pairing::new(vec![0, 1]).is_err());
        assert!(Pairing::new(vec![1, 0, 2]).is_err());
        assert!("(1,2)(2,3)".parse::<Pairing>().is_err());
        assert!("(1,2".parse::<Pairing>().is_err());
    }

    #[test]
    fn pairing_text_round_trip() {
        let p: Pairing = "(1,6)(2,3)(4,5)".parse().unwrap();
        assert_eq!(p, nu1(3).unwrap());
        assert_eq!(p.to_string(), "(1,6)(2,3)(4,5)");
        let q: Partition = "{1}{2,3}".parse().unwrap();
        assert_eq!(q.to_string(), "{1}{2,3}");
        assert!("{1}{1,2}".parse::<Partition>().is_err());
    }

    #[test]
    fn nu_pairings() {
        assert_eq!(nu1(3).unwrap().pairs(), vec![(1, 6), (2, 3), (4, 5)]);
        assert_eq!(nu2(3).unwrap().pairs(), vec![(1, 4), (2, 5), (3, 6)]);
        assert_eq!(nu1(1).unwrap().pairs(), vec![(1, 2)]);
        assert!(nu2(2).is_err());
        assert!(nu2(1).is_err());
        for m in 3..=7 {
            let n2 = nu2(m).unwrap();
            for k in 1..=m {
                assert_eq!(n2.partner(2 * k - 2), (2 * k + 1) % (2 * m));
            }
        }
    }

    #[test]
    fn join_examples() {
        for m in 1..=6 {
            let joined = nu1(m).unwrap().to_partition().join(&delta(m)).unwrap();
            assert_eq!(joined, Partition::one(2 * m));
            if m >= 3 {
                let joined = nu2(m).unwrap().to_partition().join(&delta(m)).unwrap();
                assert_eq!(joined, Partition::one(2 * m));
            }
        }
        let p: Partition = "{1,2}{3,4}".parse().unwrap();
        assert_eq!(p.join(&p).unwrap(), p);
        assert_eq!(p.join(&delta(2)).unwrap(), p);
        assert!(p.join(&Partition::one(3)).is_err());
    }

    #[test]
    fn crossing_and_segments() {
        let c: Partition = "{1,3}{2,4}".parse().unwrap();
        assert!(c.is_crossing());
        let nc: Partition = "{1,4}{2,3}".parse().unwrap();
        assert!(!nc.is_crossing());
        assert_eq!(nc.segments(), vec![vec![1, 2]]);
        assert_eq!(nc.cyclic_segments(), vec![vec![0, 3], vec![1, 2]]);
        let wrap: Partition = "{1,2,6}{3,4,5}".parse().unwrap();
        assert_eq!(wrap.segments(), vec![vec![2, 3, 4]]);
        assert_eq!(wrap.cyclic_segments().len(), 2);
    }

    #[test]
    fn every_noncrossing_partition_has_a_segment() {
        for n in 1..=8 {
            for g in enumerate_nc(n).unwrap() {
                assert!(!g.as_partition().segments().is_empty(), "{g}");
            }
        }
    }

    #[test]
    fn nc_counts_are_catalan() {
        for m in 0..=10 {
            let all = enumerate_nc(m).unwrap();
            assert_eq!(all.len() as u64, catalan(m as u64), "m = {m}");
            assert!(all.iter().all(|g| g.as_partition().is_noncrossing()));
        }
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert!(enumerate_nc(11).is_err());
    }

    #[test]
    fn hat_examples() {
        let g = NoncrossingPartition::try_from("{1}{2,3}".parse::<Partition>().unwrap()).unwrap();
        assert_eq!(hat(&g).to_string(), "{1,2}{3,4,5,6}");
        let full = NoncrossingPartition::try_from(Partition::one(4)).unwrap();
        assert_eq!(hat(&full), Partition::one(8));
        assert!(NoncrossingPartition::try_from("{1,3}{2,4}".parse::<Partition>().unwrap()).is_err());
    }

    #[test]
    fn hat_image_is_delta_closed_nc() {
        for m in 1..=5 {
            let d = delta(m);
            let images: Vec<Partition> = enumerate_nc(m).unwrap().iter().map(hat).collect();
            for h in &images {
                assert_eq!(h.join(&d).unwrap(), *h);
            }
            let mut dedup = images.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), images.len(), "hat is injective");
            let closed = enumerate_nc(2 * m)
                .unwrap()
                .into_iter()
                .map(|r| r.into_partition())
                .filter(|r| r.join(&d).unwrap() == *r)
                .count();
            assert_eq!(closed, images.len());
        }
    }

    #[test]
    fn bipairings_are_connected() {
        let all = enumerate_bipairings(2, 2).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].pairing().to_string(), "(1,4)(2,3)");
        // 3! pairings of [6], minus the 2 that split as [2] ⊕ [4]
        assert_eq!(enumerate_bipairings(2, 4).unwrap().len(), 4);
        assert!(enumerate_bipairings(1, 2).is_err());
    }

    #[test]
    fn catalan_moments_from_unit_cumulants() {
        let ks = vec![int(1); 4];
        let ms = univariate_moments(&ks).unwrap();
        assert_eq!(ms, vec![int(1), int(2), int(5), int(14)]);
        assert_eq!(univariate_cumulants(&ms).unwrap(), ks);
    }

    #[test]
    fn two_term_mobius() {
        let c = rat(3, 7);
        let ms = vec![c.clone(), &c * &c + &c];
        let ks = univariate_cumulants(&ms).unwrap();
        assert_eq!(ks, vec![c.clone(), c]);
    }

    #[test]
    fn missing_moment_is_reported() {
        let mut table: MomentTable<Rational> = MomentTable::new();
        table.insert(vec![0, 1], int(1));
        let err = moments_to_free_cumulants(&table).unwrap_err();
        assert!(matches!(err, Error::MissingMoment(_)));
    }

    #[test]
    fn multivariate_second_cumulant() {
        let mut table: MomentTable<Rational> = MomentTable::new();
        table.insert(vec![0], rat(1, 2));
        table.insert(vec![1], rat(2, 3));
        table.insert(vec![0, 1], int(1));
        let ks = moments_to_free_cumulants(&table).unwrap();
        assert_eq!(ks.get(&[0, 1]).unwrap(), &(int(1) - rat(1, 3)));
    }
}
