//! Exact Wick expansion of `E∘tr(W^σ1 ⋯ W^σm)` for `W = GG*`.
//!
//! Factor `k` contributes `W_{σ_k(i_k, i_{k+1})} = Σ_j g_{l_k j} ḡ_{l_{−k} j}`
//! with `(l_k, l_{−k}) = σ_k(i_k, i_{k+1})`. In a bipartite pairing `π` of
//! `[2m]` the `g` of factor `t` sits at position `2t−1`, the `ḡ` at `2t`; a
//! pair `(2t−1, 2s)` survives iff `l_t = l_{−s}` and `j_t = j_s`, and then
//! contributes `1/M`.
//!
//! The `j` constraints only identify indices, so they split `[m]` into orbits
//! independently of `i`; the fast path counts `i`-tuples by a pruned search
//! and multiplies by `P^{#orbits}`.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::partitions::{
    enumerate_bipairings, enumerate_bipartite_pairings, nu1, nu2, FreeCumulants, Pairing, UnionFind,
};
use crate::perms::{EntryPermutation, MatrixShape, PermKind, Side};
use crate::rational::{self, from_u128, Rational};
use crate::{Error, Result};

/// Default cap on `M^{#free i}` (fast path) and `(MP)^m` (naive path).
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 32;
/// Default largest word length for full moment expansions.
pub const DEFAULT_MAX_ORDER: usize = 6;
/// Default cap on the number of distinct tuples held by restricted counting.
pub const DEFAULT_PROJECTION_CAP: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub enumeration: u128,
    pub max_order: usize,
    pub projection_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            enumeration: DEFAULT_ENUMERATION_BUDGET,
            max_order: DEFAULT_MAX_ORDER,
            projection_cap: DEFAULT_PROJECTION_CAP,
        }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Self { enumeration: u128::MAX, max_order: crate::partitions::PAIRING_CAP, projection_cap: usize::MAX }
    }
}

/// An ordered tuple of symmetric entry permutations on a common shape.
#[derive(Debug, Clone)]
pub struct WickWord {
    shape: MatrixShape,
    perms: Vec<EntryPermutation>,
    limits: Limits,
}

impl WickWord {
    pub fn new(shape: MatrixShape, perms: Vec<EntryPermutation>) -> Result<Self> {
        if perms.is_empty() {
            return Err(Error::domain("a word needs at least one factor"));
        }
        for p in &perms {
            if p.m() != shape.m {
                return Err(Error::DimensionMismatch { expected: shape.m, found: p.m() });
            }
            if !p.is_symmetric() {
                return Err(Error::domain(format!("{} is not symmetric", p.label())));
            }
        }
        Ok(Self { shape, perms, limits: Limits::default() })
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn shape(&self) -> MatrixShape {
        self.shape
    }

    pub fn perms(&self) -> &[EntryPermutation] {
        &self.perms
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn label(&self) -> String {
        self.perms.iter().map(|p| p.label()).collect::<Vec<_>>().join(",")
    }

    /// The sub-word at the given positions.
    pub fn subword(&self, positions: &[usize]) -> Result<Self> {
        let perms = positions.iter().map(|&k| self.perms[k].clone()).collect();
        Ok(Self::new(self.shape, perms)?.with_limits(self.limits))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::domain("words have different shapes"));
        }
        Ok(())
    }
}

/// `(i₁, …, i_m)` over `[M]` and `(j₁, …, j_m)` over `[P]`, 0-based; the
/// remaining components of `u⃗` follow from `i_{−k} = i_{k+1}`, `j_{−k} = j_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexTuple {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl IndexTuple {
    pub fn new(i: Vec<usize>, j: Vec<usize>) -> Self {
        Self { i, j }
    }
}

fn check_pairing(pi: &Pairing, m: usize) -> Result<()> {
    if pi.m() != m {
        return Err(Error::DimensionMismatch { expected: 2 * m, found: pi.len() });
    }
    Ok(())
}

/// Whether `v(π, σ⃗, u⃗) ≠ 0`.
pub fn weight_support(pi: &Pairing, word: &WickWord, u: &IndexTuple) -> Result<bool> {
    let m = word.len();
    check_pairing(pi, m)?;
    let (mm, pp) = (word.shape.m, word.shape.p);
    if u.i.len() != m || u.j.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: u.i.len().min(u.j.len()) });
    }
    if u.i.iter().any(|&x| x >= mm) || u.j.iter().any(|&x| x >= pp) {
        return Err(Error::domain("index tuple outside the shape"));
    }
    let images: Vec<(usize, usize)> =
        (0..m).map(|k| word.perms[k].image(u.i[k], u.i[(k + 1) % m])).collect();
    Ok(pi.factor_pairs().iter().all(|&(t, s)| images[t].0 == images[s].1 && u.j[t] == u.j[s]))
}

/// `v(π, σ⃗, u⃗)`: `M^{−m}` on the support, zero elsewhere.
pub fn weight(pi: &Pairing, word: &WickWord, u: &IndexTuple) -> Result<Rational> {
    Ok(if weight_support(pi, word, u)? {
        rational::pow(&rational::int(word.shape.m as u64), -(word.len() as i64))
    } else {
        rational::zero()
    })
}

/// A contraction of factors `W^{σ_f}_{v(row f), v(col f)}` over index variables,
/// some of which may be pinned, under a bipartite pairing of the factors' `g`/`ḡ`.
struct Contraction<'a> {
    side: usize,
    perms: Vec<&'a EntryPermutation>,
    row: Vec<usize>,
    col: Vec<usize>,
    init: Vec<usize>,
    order: Vec<usize>,
    factors_at: Vec<Vec<usize>>,
    checks_at: Vec<Vec<(usize, usize)>>,
    last_check: usize,
    pairs: Vec<(usize, usize)>,
}

#[derive(Clone)]
struct State {
    vals: Vec<usize>,
    first: Vec<usize>,
    second: Vec<usize>,
}

impl<'a> Contraction<'a> {
    fn new(
        side: usize,
        perms: Vec<&'a EntryPermutation>,
        row: Vec<usize>,
        col: Vec<usize>,
        fixed: &[Option<usize>],
        pairing: &Pairing,
    ) -> Self {
        let nvars = fixed.len();
        let order: Vec<usize> = (0..nvars).filter(|&v| fixed[v].is_none()).collect();
        let mut level_of = vec![0usize; nvars];
        for (pos, &v) in order.iter().enumerate() {
            level_of[v] = pos + 1;
        }
        let levels = order.len() + 1;
        let nf = perms.len();
        let factor_level: Vec<usize> = (0..nf).map(|f| level_of[row[f]].max(level_of[col[f]])).collect();
        let mut factors_at = vec![Vec::new(); levels];
        for (f, &l) in factor_level.iter().enumerate() {
            factors_at[l].push(f);
        }
        let pairs: Vec<(usize, usize)> = (0..nf).map(|t| (t, pairing.partner(2 * t) / 2)).collect();
        let mut checks_at = vec![Vec::new(); levels];
        let mut last_check = 0;
        for &(t, s) in &pairs {
            let l = factor_level[t].max(factor_level[s]);
            checks_at[l].push((t, s));
            last_check = last_check.max(l);
        }
        let init = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        Self { side, perms, row, col, init, order, factors_at, checks_at, last_check, pairs }
    }

    /// A single cyclic trace `tr(W^σ1 ⋯ W^σm)`.
    fn cyclic(word: &'a WickWord, pairing: &Pairing) -> Self {
        let m = word.len();
        let row = (0..m).collect();
        let col = (0..m).map(|k| (k + 1) % m).collect();
        Self::new(word.shape.m, word.perms.iter().collect(), row, col, &vec![None; m], pairing)
    }

    /// `Tr(W^σ1 ⋯ W^σm) · Tr(W^τ1 ⋯ W^τr)`, two independent cycles.
    fn two_cycles(w1: &'a WickWord, w2: &'a WickWord, pairing: &Pairing) -> Self {
        let (m, r) = (w1.len(), w2.len());
        let mut row: Vec<usize> = (0..m).collect();
        let mut col: Vec<usize> = (0..m).map(|k| (k + 1) % m).collect();
        row.extend((0..r).map(|k| m + k));
        col.extend((0..r).map(|k| m + (k + 1) % r));
        let perms = w1.perms.iter().chain(&w2.perms).collect();
        Self::new(w1.shape.m, perms, row, col, &vec![None; m + r], pairing)
    }

    /// The open chain `(a, u⃗, b)`: `i₁ = a`, `i_{−m} = b`.
    fn open_chain(word: &'a WickWord, pairing: &Pairing, a: usize, b: usize) -> Self {
        let m = word.len();
        let row = (0..m).collect();
        let col = (1..=m).collect();
        let mut fixed = vec![None; m + 1];
        fixed[0] = Some(a);
        fixed[m] = Some(b);
        Self::new(word.shape.m, word.perms.iter().collect(), row, col, &fixed, pairing)
    }

    fn free_vars(&self) -> usize {
        self.order.len()
    }

    fn cost(&self) -> u128 {
        (self.side as u128).checked_pow(self.free_vars() as u32).unwrap_or(u128::MAX)
    }

    fn j_orbits(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.perms.len());
        for &(t, s) in &self.pairs {
            uf.union(t, s);
        }
        uf
    }

    fn fresh_state(&self) -> State {
        let nf = self.perms.len();
        State { vals: self.init.clone(), first: vec![0; nf], second: vec![0; nf] }
    }

    fn enter(&self, level: usize, st: &mut State) -> bool {
        for &f in &self.factors_at[level] {
            let (a, b) = self.perms[f].image(st.vals[self.row[f]], st.vals[self.col[f]]);
            st.first[f] = a;
            st.second[f] = b;
        }
        self.checks_at[level].iter().all(|&(t, s)| st.first[t] == st.second[s])
    }

    fn count_from(&self, level: usize, st: &mut State) -> u128 {
        let nfree = self.free_vars();
        if level == nfree {
            return 1;
        }
        if level >= self.last_check {
            return (self.side as u128).pow((nfree - level) as u32);
        }
        let var = self.order[level];
        let mut total = 0;
        for v in 0..self.side {
            st.vals[var] = v;
            if self.enter(level + 1, st) {
                total += self.count_from(level + 1, st);
            }
        }
        total
    }

    /// Number of `i`-assignments satisfying every `l`-equality.
    fn count_i(&self) -> u128 {
        let mut st = self.fresh_state();
        if !self.enter(0, &mut st) {
            return 0;
        }
        if self.free_vars() == 0 || self.last_check == 0 {
            return self.count_from(0, &mut st);
        }
        let var = self.order[0];
        (0..self.side)
            .into_par_iter()
            .map_init(
                || st.clone(),
                |local, v| {
                    local.vals[var] = v;
                    if self.enter(1, local) {
                        self.count_from(1, local)
                    } else {
                        0
                    }
                },
            )
            .sum()
    }

    fn for_each_from(&self, level: usize, st: &mut State, visit: &mut dyn FnMut(&State) -> Result<()>) -> Result<()> {
        if level == self.free_vars() {
            return visit(st);
        }
        let var = self.order[level];
        for v in 0..self.side {
            st.vals[var] = v;
            if self.enter(level + 1, st) {
                self.for_each_from(level + 1, st, visit)?;
            }
        }
        Ok(())
    }

    fn for_each_admissible_i(&self, visit: &mut dyn FnMut(&State) -> Result<()>) -> Result<()> {
        let mut st = self.fresh_state();
        if !self.enter(0, &mut st) {
            return Ok(());
        }
        self.for_each_from(0, &mut st, visit)
    }
}

fn budget_error(what: &str, cost: u128, limit: u128) -> Error {
    Error::Budget { what: what.to_string(), cost, limit }
}

fn checked_count(c: &Contraction<'_>, p: usize, limits: Limits) -> Result<u128> {
    let cost = c.cost();
    if cost > limits.enumeration {
        return Err(budget_error("index enumeration", cost, limits.enumeration));
    }
    let icount = c.count_i();
    let orbits = c.j_orbits().count_sets() as u32;
    let pf = (p as u128).checked_pow(orbits).ok_or_else(|| budget_error("count overflow", u128::MAX, u128::MAX))?;
    icount.checked_mul(pf).ok_or_else(|| budget_error("count overflow", u128::MAX, u128::MAX))
}

/// `#𝒜(π, σ⃗)` by the orbit-factorised search.
pub fn count_admissible(pi: &Pairing, word: &WickWord) -> Result<u128> {
    check_pairing(pi, word.len())?;
    checked_count(&Contraction::cyclic(word, pi), word.shape.p, word.limits)
}

/// `#𝒜(π, σ⃗)` by enumerating every `(i⃗, j⃗) ∈ [M]^m × [P]^m`.
pub fn count_admissible_naive(pi: &Pairing, word: &WickWord) -> Result<u128> {
    let m = word.len();
    check_pairing(pi, m)?;
    let (mm, pp) = (word.shape.m, word.shape.p);
    let cost = ((mm * pp) as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if cost > word.limits.enumeration {
        return Err(budget_error("naive index enumeration", cost, word.limits.enumeration));
    }
    let pairs = pi.factor_pairs();
    let mut i = vec![0usize; m];
    let mut count = 0u128;
    let mut images = vec![(0, 0); m];
    loop {
        for k in 0..m {
            images[k] = word.perms[k].image(i[k], i[(k + 1) % m]);
        }
        let mut j = vec![0usize; m];
        loop {
            if pairs.iter().all(|&(t, s)| images[t].0 == images[s].1 && j[t] == j[s]) {
                count += 1;
            }
            if !odometer(&mut j, pp) {
                break;
            }
        }
        if !odometer(&mut i, mm) {
            break;
        }
    }
    Ok(count)
}

pub(crate) fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// One term of the Wick expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingTerm {
    pub pairing: Pairing,
    pub count: u128,
    pub value: Rational,
}

#[derive(Debug, Clone)]
pub struct RationalMomentReport {
    pub word: String,
    pub shape: MatrixShape,
    pub per_pairing: Vec<PairingTerm>,
    pub total: Rational,
}

impl RationalMomentReport {
    pub fn term(&self, pi: &Pairing) -> Option<&PairingTerm> {
        self.per_pairing.iter().find(|t| &t.pairing == pi)
    }
}

/// `E∘tr(W^σ1 ⋯ W^σm) = Σ_π M^{−m−1} #𝒜(π, σ⃗)`, pairings in canonical order.
pub fn exact_mixed_moment(word: &WickWord) -> Result<RationalMomentReport> {
    let m = word.len();
    if m > word.limits.max_order {
        return Err(budget_error("word length", m as u128, word.limits.max_order as u128));
    }
    let scale = rational::pow(&rational::int(word.shape.m as u64), -(m as i64 + 1));
    let mut per_pairing = Vec::new();
    let mut total = rational::zero();
    for pairing in enumerate_bipartite_pairings(m)? {
        let count = count_admissible(&pairing, word)?;
        let value = from_u128(count) * &scale;
        total += &value;
        per_pairing.push(PairingTerm { pairing, count, value });
    }
    Ok(RationalMomentReport { word: word.label(), shape: word.shape, per_pairing, total })
}

/// `κ_n(W^σ1, …, W^σn)` at finite size, by Möbius inversion of exact moments.
pub fn exact_mixed_cumulant(word: &WickWord) -> Result<Rational> {
    // repeated factors share a letter so that equal subwords are computed once
    let perms = word.perms();
    let letters: Vec<usize> =
        (0..perms.len()).map(|k| (0..=k).find(|&r| perms[r].same_representation(&perms[k])).unwrap()).collect();
    let mut calc = FreeCumulants::new(|w: &[usize]| -> Result<Rational> {
        Ok(exact_mixed_moment(&word.subword(w)?)?.total)
    });
    calc.cumulant(&letters)
}

/// Parses a 1- or 0-based position set into 0-based positions of `[2m]`.
fn positions(d: &[usize], m: usize, one_based: bool) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(d.len());
    for &x in d {
        let p = if one_based {
            x.checked_sub(1).ok_or_else(|| Error::domain("position 0 in a 1-based set"))?
        } else {
            x
        };
        if p >= 2 * m {
            return Err(Error::domain(format!("position {x} outside [2m]")));
        }
        out.push(p);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `#𝒜_{π,σ⃗}(D)`: distinct projections `σ⃗(u⃗)[D]` over admissible `u⃗`.
///
/// Position `2k−1` of `D` (1-based) selects `(l_k, j_k)` and position `2k`
/// selects `(j_{−k}, l_{−k})`. Image tuples are counted, not preimages.
pub fn count_admissible_restricted(pi: &Pairing, word: &WickWord, d: &[usize]) -> Result<u128> {
    let m = word.len();
    check_pairing(pi, m)?;
    let d = positions(d, m, true)?;
    let c = Contraction::cyclic(word, pi);
    let cost = c.cost();
    if cost > word.limits.enumeration {
        return Err(budget_error("index enumeration", cost, word.limits.enumeration));
    }
    if d.is_empty() {
        return Ok(u128::from(c.count_i() > 0));
    }
    let mut uf = c.j_orbits();
    let mut touched: Vec<usize> = d.iter().map(|&p| uf.find(p / 2)).collect();
    touched.sort_unstable();
    touched.dedup();
    let cap = word.limits.projection_cap;
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    c.for_each_admissible_i(&mut |st| {
        let key = d
            .iter()
            .map(|&p| if p % 2 == 0 { st.first[p / 2] as u32 } else { st.second[p / 2] as u32 })
            .collect();
        seen.insert(key);
        if seen.len() > cap {
            return Err(budget_error("projected tuple set", seen.len() as u128, cap as u128));
        }
        Ok(())
    })?;
    Ok(seen.len() as u128 * (word.shape.p as u128).pow(touched.len() as u32))
}

/// `Cov(Tr Π W^{σ}, Tr Π W^{τ}) = Σ_{connected π} M^{−(m+r)} #𝒜^{m,r}(π)`.
pub fn exact_trace_covariance(w1: &WickWord, w2: &WickWord) -> Result<Rational> {
    w1.check_shape(w2)?;
    let (m, r) = (w1.len(), w2.len());
    let scale = rational::pow(&rational::int(w1.shape.m as u64), -((m + r) as i64));
    let mut total = rational::zero();
    for bp in enumerate_bipairings(2 * m, 2 * r)? {
        let c = Contraction::two_cycles(w1, w2, bp.pairing());
        total += from_u128(checked_count(&c, w1.shape.p, w1.limits)?) * &scale;
    }
    Ok(total)
}

/// `E[Tr Π W^{σ} · Tr Π W^{τ}]`, summing over every bipartite pairing.
pub fn exact_trace_product_expectation(w1: &WickWord, w2: &WickWord) -> Result<Rational> {
    w1.check_shape(w2)?;
    let (m, r) = (w1.len(), w2.len());
    let scale = rational::pow(&rational::int(w1.shape.m as u64), -((m + r) as i64));
    let mut total = rational::zero();
    for pairing in enumerate_bipartite_pairings(m + r)? {
        let c = Contraction::two_cycles(w1, w2, &pairing);
        total += from_u128(checked_count(&c, w1.shape.p, w1.limits)?) * &scale;
    }
    Ok(total)
}

/// `Σ_{u⃗ ∈ 𝓙(m)} v(π, σ⃗, (a, u⃗, b))` for any word and pairing; `a`, `b` 1-based.
pub fn open_chain_sum(pi: &Pairing, word: &WickWord, a: usize, b: usize) -> Result<Rational> {
    let m = word.len();
    check_pairing(pi, m)?;
    let side = word.shape.m;
    if a == 0 || b == 0 || a > side || b > side {
        return Err(Error::domain(format!("endpoints ({a}, {b}) outside [{side}]")));
    }
    let c = Contraction::open_chain(word, pi, a - 1, b - 1);
    let count = checked_count(&c, word.shape.p, word.limits)?;
    Ok(from_u128(count) * rational::pow(&rational::int(side as u64), -(m as i64)))
}

/// [`open_chain_sum`] restricted to a constant `Γ(b,d)` word and `π ∈ {ν₁, ν₂}`.
pub fn segment_sum_endpoints(pi: &Pairing, word: &WickWord, a: usize, b: usize) -> Result<Rational> {
    let m = word.len();
    let spec = match word.perms[0].kind() {
        PermKind::PartialTranspose(s) if s.side == Side::Right => *s,
        _ => return Err(Error::domain("segment sums need a constant Γ(b,d) word")),
    };
    if word.perms.iter().any(|p| !matches!(p.kind(), PermKind::PartialTranspose(s) if *s == spec)) {
        return Err(Error::domain("segment sums need a constant Γ(b,d) word"));
    }
    let is_nu = *pi == nu1(m)? || (m >= 3 && *pi == nu2(m)?);
    if !is_nu {
        return Err(Error::domain(format!("{pi} is neither nu1 nor nu2")));
    }
    open_chain_sum(pi, word, a, b)
}

/// `Σ_{u⃗ ∈ 𝓙(m)} v(π, σ⃗, (a, u⃗, a))`.
pub fn segment_sum(pi: &Pairing, word: &WickWord, a: usize) -> Result<Rational> {
    segment_sum_endpoints(pi, word, a, a)
}

/// Closed form of [`segment_sum`]: `(P/M)·d^{1−m}` / `(P/M)·b^{1−m}` for odd
/// `m` (ν₁ / ν₂), exponent `2−m` for even `m`.
pub fn segment_sum_formula(nu: u8, m: usize, b: usize, d: usize, shape: MatrixShape) -> Rational {
    let base = if nu == 1 { d } else { b };
    let exp = if m % 2 == 1 { 1 - m as i64 } else { 2 - m as i64 };
    rational::rat(shape.p as i64, shape.m as i64) * rational::pow(&rational::int(base as u64), exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perms::EntryPermutation as E;
    use crate::rational::{int, rat};

    fn word(m: usize, p: usize, perms: Vec<E>) -> WickWord {
        WickWord::new(MatrixShape::new(m, p).unwrap(), perms).unwrap()
    }

    fn pairing(s: &str) -> Pairing {
        s.parse().unwrap()
    }

    #[test]
    fn word_validation() {
        let shape = MatrixShape::square(4).unwrap();
        assert!(WickWord::new(shape, vec![]).is_err());
        assert!(WickWord::new(shape, vec![E::identity(3).unwrap()]).is_err());
        let bad = E::from_table(2, &[(0, 0), (1, 1), (1, 0), (0, 1)]).unwrap();
        assert!(!bad.is_symmetric());
        assert!(WickWord::new(MatrixShape::square(2).unwrap(), vec![bad]).is_err());
    }

    #[test]
    fn support_examples() {
        let w = word(3, 2, vec![E::identity(3).unwrap()]);
        for i in 0..3 {
            assert!(weight_support(&pairing("(1,2)"), &w, &IndexTuple::new(vec![i], vec![1])).unwrap());
        }
        let w2 = word(3, 2, vec![E::identity(3).unwrap(), E::identity(3).unwrap()]);
        let u = IndexTuple::new(vec![1, 1], vec![0, 1]);
        assert!(!weight_support(&pairing("(1,4)(2,3)"), &w2, &u).unwrap());
        let u = IndexTuple::new(vec![1, 2], vec![1, 1]);
        assert!(weight_support(&pairing("(1,4)(2,3)"), &w2, &u).unwrap());
        assert_eq!(weight(&pairing("(1,4)(2,3)"), &w2, &u).unwrap(), rat(1, 9));
    }

    #[test]
    fn hand_counts() {
        for m in [2, 3, 5] {
            let w = word(m, m, vec![E::identity(m).unwrap(), E::identity(m).unwrap()]);
            let c = m as u128;
            assert_eq!(count_admissible(&pairing("(1,2)(3,4)"), &w).unwrap(), c * c * c);
            assert_eq!(count_admissible(&pairing("(1,4)(2,3)"), &w).unwrap(), c * c * c);
        }
        let w = word(4, 3, vec![E::identity(4).unwrap(), E::identity(4).unwrap()]);
        assert_eq!(count_admissible(&pairing("(1,2)(3,4)"), &w).unwrap(), 4 * 9);
        assert_eq!(count_admissible(&pairing("(1,4)(2,3)"), &w).unwrap(), 16 * 3);
        let w = word(6, 5, vec![E::gamma(2, 3).unwrap()]);
        assert_eq!(count_admissible(&pairing("(1,2)"), &w).unwrap(), 30);
    }

    #[test]
    fn support_sum_matches_count() {
        let w = word(4, 2, vec![E::gamma(2, 2).unwrap(), E::transpose(4).unwrap(), E::identity(4).unwrap()]);
        for pi in enumerate_bipartite_pairings(3).unwrap() {
            let mut n = 0u128;
            let mut i = vec![0; 3];
            loop {
                let mut j = vec![0; 3];
                loop {
                    if weight_support(&pi, &w, &IndexTuple::new(i.clone(), j.clone())).unwrap() {
                        n += 1;
                    }
                    if !odometer(&mut j, 2) {
                        break;
                    }
                }
                if !odometer(&mut i, 4) {
                    break;
                }
            }
            assert_eq!(n, count_admissible(&pi, &w).unwrap(), "{pi}");
        }
    }

    #[test]
    fn moment_examples() {
        let w = word(5, 5, vec![E::identity(5).unwrap()]);
        assert_eq!(exact_mixed_moment(&w).unwrap().total, int(1));
        let w = word(3, 7, vec![E::identity(3).unwrap()]);
        assert_eq!(exact_mixed_moment(&w).unwrap().total, rat(7, 3));
        let w = word(4, 4, vec![E::identity(4).unwrap(), E::identity(4).unwrap()]);
        assert_eq!(exact_mixed_moment(&w).unwrap().total, int(2));
        let w = word(12, 12, vec![E::gamma(6, 2).unwrap(), E::gamma(4, 3).unwrap()]);
        let r = exact_mixed_moment(&w).unwrap();
        assert_eq!(r.total, rat(23, 18));
        assert_eq!(r.per_pairing.len(), 2);
        assert_eq!(r.per_pairing.iter().map(|t| t.value.clone()).sum::<Rational>(), r.total);
    }

    #[test]
    fn wishart_moments_are_narayana() {
        // E tr W³ = 5 + 1/M² at M = P
        let w = word(3, 3, vec![E::identity(3).unwrap(); 3]);
        let direct: u128 = enumerate_bipartite_pairings(3)
            .unwrap()
            .iter()
            .map(|pi| count_admissible_naive(pi, &w).unwrap())
            .sum();
        assert_eq!(exact_mixed_moment(&w).unwrap().total, from_u128(direct) * rat(1, 81));
        assert_eq!(exact_mixed_moment(&w).unwrap().total, int(5) + rat(1, 9));
    }

    #[test]
    fn cumulant_examples() {
        let g = E::gamma(2, 3).unwrap();
        let w = word(6, 4, vec![g.clone()]);
        assert_eq!(exact_mixed_cumulant(&w).unwrap(), rat(4, 6));
        let w = word(6, 4, vec![E::identity(6).unwrap(), E::transpose(6).unwrap()]);
        assert_eq!(exact_mixed_cumulant(&w).unwrap(), rat(4, 36));
    }

    #[test]
    fn fast_and_naive_agree() {
        let m = 4;
        let perms = [E::identity(m).unwrap(), E::transpose(m).unwrap(), E::gamma(2, 2).unwrap()];
        for p in 1..=3 {
            for a in &perms {
                for b in &perms {
                    for c in &perms {
                        let w = word(m, p, vec![a.clone(), b.clone(), c.clone()]);
                        for pi in enumerate_bipartite_pairings(3).unwrap() {
                            assert_eq!(
                                count_admissible(&pi, &w).unwrap(),
                                count_admissible_naive(&pi, &w).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn budget_refusal_reports_cost() {
        let w = word(16, 16, vec![E::identity(16).unwrap(); 3]).with_limits(Limits {
            enumeration: 1000,
            ..Limits::default()
        });
        match count_admissible(&nu1(3).unwrap(), &w) {
            Err(Error::Budget { cost, limit, .. }) => {
                assert_eq!(cost, 4096);
                assert_eq!(limit, 1000);
            }
            other => panic!("{other:?}"),
        }
        assert!(count_admissible_naive(&nu1(3).unwrap(), &w).is_err());
    }

    #[test]
    fn restricted_counts() {
        let w = word(4, 3, vec![E::gamma(2, 2).unwrap(), E::transpose(4).unwrap(), E::identity(4).unwrap()]);
        for pi in enumerate_bipartite_pairings(3).unwrap() {
            let full: Vec<usize> = (1..=6).collect();
            let all = count_admissible(&pi, &w).unwrap();
            assert_eq!(count_admissible_restricted(&pi, &w, &full).unwrap(), all);
            assert_eq!(count_admissible_restricted(&pi, &w, &[]).unwrap(), u128::from(all > 0));
        }
        assert!(count_admissible_restricted(&nu1(3).unwrap(), &w, &[7]).is_err());
        assert!(count_admissible_restricted(&nu1(3).unwrap(), &w, &[0]).is_err());
    }

    #[test]
    fn covariance_examples() {
        for m in [3, 5, 8] {
            let w = word(m, m, vec![E::identity(m).unwrap()]);
            assert_eq!(exact_trace_covariance(&w, &w).unwrap(), int(1));
        }
        let w = word(4, 6, vec![E::identity(4).unwrap()]);
        assert_eq!(exact_trace_covariance(&w, &w).unwrap(), rat(6, 4));
    }

    #[test]
    fn covariance_is_product_expectation_minus_means() {
        let m = 4;
        let a = word(m, 3, vec![E::gamma(2, 2).unwrap(), E::identity(m).unwrap()]);
        let b = word(m, 3, vec![E::transpose(m).unwrap(), E::gamma(2, 2).unwrap(), E::gamma(2, 2).unwrap()]);
        let mm = int(m as u64);
        let ea = exact_mixed_moment(&a).unwrap().total * &mm;
        let eb = exact_mixed_moment(&b).unwrap().total * &mm;
        let joint = exact_trace_product_expectation(&a, &b).unwrap();
        assert_eq!(exact_trace_covariance(&a, &b).unwrap(), joint - ea * eb);
    }

    #[test]
    fn segment_sum_examples() {
        let g = E::gamma(2, 2).unwrap();
        let w = word(4, 4, vec![g.clone(); 3]);
        assert_eq!(segment_sum(&nu1(3).unwrap(), &w, 1).unwrap(), rat(1, 4));
        let g = E::gamma(2, 3).unwrap();
        let w = word(6, 6, vec![g.clone(); 4]);
        assert_eq!(segment_sum(&nu2(4).unwrap(), &w, 3).unwrap(), rat(1, 4));
        assert_eq!(segment_sum_endpoints(&nu2(4).unwrap(), &w, 1, 2).unwrap(), int(0));
        let other = enumerate_bipartite_pairings(4).unwrap()[0].clone();
        assert!(segment_sum(&other, &w, 1).is_err());
        let mixed = word(6, 6, vec![g.clone(), E::identity(6).unwrap(), g.clone()]);
        assert!(segment_sum(&nu1(3).unwrap(), &mixed, 1).is_err());
        assert!(segment_sum(&nu1(4).unwrap(), &w, 7).is_err());
    }

    #[test]
    fn segment_sum_times_side_is_pairing_value() {
        let g = E::gamma(3, 2).unwrap();
        let w = word(6, 6, vec![g; 3]);
        let report = exact_mixed_moment(&w).unwrap();
        for nu in [nu1(3).unwrap(), nu2(3).unwrap()] {
            assert_eq!(report.term(&nu).unwrap().value, segment_sum(&nu, &w, 1).unwrap());
        }
    }
}
