//! Entry permutations of `[M]²` and the exact counting statistics built on them.
//!
//! Public evaluation ([`EntryPermutation::eval`], [`index_decompose`]) uses
//! 1-based indices, matching the matrix notation. The hot counting loops use
//! [`EntryPermutation::image`], which takes and returns 0-based indices.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::ComplexMatrix;
use crate::{Error, Result};

/// Largest matrix side for which a [`PermKind::Table`] may be materialised.
pub const DEFAULT_TABLE_CAP: usize = 4096;

/// Below this side the joint counters use a plain triple loop.
const TRIPLE_LOOP_MAX_SIDE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatrixShape {
    /// Matrix side.
    pub m: usize,
    /// Inner dimension of the Ginibre factor.
    pub p: usize,
}

impl MatrixShape {
    pub fn new(m: usize, p: usize) -> Result<Self> {
        if m == 0 || p == 0 {
            return Err(Error::domain(format!("matrix shape needs M, P >= 1, got ({m}, {p})")));
        }
        Ok(Self { m, p })
    }

    pub fn square(m: usize) -> Result<Self> {
        Self::new(m, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// The partial transpose: each `d × d` block is transposed in place.
    Right,
    /// The left partial transpose: blocks are swapped, their contents are not transposed.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpec {
    pub b: usize,
    pub d: usize,
    pub side: Side,
}

impl BlockSpec {
    pub fn new(b: usize, d: usize, side: Side) -> Result<Self> {
        if b == 0 || d == 0 {
            return Err(Error::domain(format!("block spec needs b, d >= 1, got ({b}, {d})")));
        }
        Ok(Self { b, d, side })
    }

    pub fn m(&self) -> usize {
        self.b * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Projection {
    First,
    Second,
}

impl Projection {
    #[inline]
    fn pick(self, (a, b): (usize, usize)) -> usize {
        match self {
            Projection::First => a,
            Projection::Second => b,
        }
    }
}

/// Which coordinates are shared between the two sides of a triple count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    /// Triples `(i, j, l)` comparing `σ(i, j)` with `τ(i, l)`.
    ShareFirst,
    /// Triples `(i, j, l)` comparing `σ(i, j)` with `τ(j, l)`.
    ShareMiddle,
    /// Triples `(i, j, k)` comparing `σ(i, j)` with `τ(k, j)`.
    ShareSecondSlot,
}

#[derive(Clone)]
pub enum PermKind {
    Identity,
    Transpose,
    PartialTranspose(BlockSpec),
    /// `(i, j) ↦ (θ(i), θ(j))` for a point permutation `θ` of `[M]` (0-based images).
    InducedDiagonal(Arc<[u32]>),
    /// Flat table: entry `i·M + j` holds `i'·M + j'`.
    Table(Arc<[u32]>),
    /// `[f, g, h]` evaluates as `f ∘ g ∘ h`.
    Composition(Vec<EntryPermutation>),
}

/// A bijection of `[M] × [M]`, acting on matrices by `[A^σ]_{ij} = A_{σ(i,j)}`.
#[derive(Clone)]
pub struct EntryPermutation {
    m: usize,
    kind: PermKind,
    label: Option<Arc<str>>,
}

impl fmt::Debug for EntryPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntryPermutation({}, M={})", self.label(), self.m)
    }
}

impl fmt::Display for EntryPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl EntryPermutation {
    fn from_kind(m: usize, kind: PermKind) -> Self {
        Self { m, kind, label: None }
    }

    pub fn identity(m: usize) -> Result<Self> {
        check_side(m)?;
        Ok(Self::from_kind(m, PermKind::Identity))
    }

    pub fn transpose(m: usize) -> Result<Self> {
        check_side(m)?;
        Ok(Self::from_kind(m, PermKind::Transpose))
    }

    /// The `(b, d)` partial transpose `Γ(b, d)` on `M = b·d`.
    pub fn gamma(b: usize, d: usize) -> Result<Self> {
        Self::partial_transpose(BlockSpec::new(b, d, Side::Right)?)
    }

    /// The left partial transpose: `(i, j) ↦ Γ(b, d)(j, i)`.
    pub fn left_gamma(b: usize, d: usize) -> Result<Self> {
        Self::partial_transpose(BlockSpec::new(b, d, Side::Left)?)
    }

    pub fn partial_transpose(spec: BlockSpec) -> Result<Self> {
        Ok(Self::from_kind(spec.m(), PermKind::PartialTranspose(spec)))
    }

    /// `σ(i, j) = (θ(i), θ(j))` from 0-based images of a point permutation.
    pub fn induced_diagonal(theta: &[usize]) -> Result<Self> {
        let m = theta.len();
        check_side(m)?;
        let mut seen = vec![false; m];
        for &t in theta {
            if t >= m || std::mem::replace(&mut seen[t], true) {
                return Err(Error::domain("point map is not a permutation of [M]"));
            }
        }
        let images: Vec<u32> = theta.iter().map(|&t| t as u32).collect();
        Ok(Self::from_kind(m, PermKind::InducedDiagonal(images.into())))
    }

    /// Tabulated bijection from 0-based image pairs listed in row-major order of `(i, j)`.
    pub fn from_table(m: usize, images: &[(usize, usize)]) -> Result<Self> {
        Self::from_table_with_cap(m, images, DEFAULT_TABLE_CAP)
    }

    pub fn from_table_with_cap(m: usize, images: &[(usize, usize)], cap: usize) -> Result<Self> {
        check_side(m)?;
        if m > cap {
            return Err(Error::Budget {
                what: "entry permutation table".into(),
                cost: (m as u128) * (m as u128),
                limit: (cap as u128) * (cap as u128),
            });
        }
        if images.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, found: images.len() });
        }
        let mut seen = vec![false; m * m];
        let mut flat = Vec::with_capacity(m * m);
        for &(a, b) in images {
            if a >= m || b >= m {
                return Err(Error::domain(format!("table image ({a}, {b}) outside [M]^2")));
            }
            let idx = a * m + b;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::domain("table is not a bijection of [M]^2"));
            }
            flat.push(idx as u32);
        }
        Ok(Self::from_kind(m, PermKind::Table(flat.into())))
    }

    /// Attaches the literal used when printing this permutation.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(Arc::from(label.into()));
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &PermKind {
        &self.kind
    }

    pub fn block_spec(&self) -> Option<BlockSpec> {
        match self.kind {
            PermKind::PartialTranspose(spec) => Some(spec),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.to_string();
        }
        match &self.kind {
            PermKind::Identity => "I".into(),
            PermKind::Transpose => "T".into(),
            PermKind::PartialTranspose(BlockSpec { b, d, side: Side::Right }) => format!("G({b},{d})"),
            PermKind::PartialTranspose(BlockSpec { b, d, side: Side::Left }) => format!("LG({b},{d})"),
            PermKind::InducedDiagonal(_) => "D(*)".into(),
            PermKind::Table(_) => "P(*)".into(),
            PermKind::Composition(parts) => {
                parts.iter().map(|p| p.label()).collect::<Vec<_>>().join("∘")
            }
        }
    }

    /// Image of a 0-based pair. Callers guarantee `i, j < M`.
    #[inline]
    pub fn image(&self, i: usize, j: usize) -> (usize, usize) {
        debug_assert!(i < self.m && j < self.m);
        match &self.kind {
            PermKind::Identity => (i, j),
            PermKind::Transpose => (j, i),
            PermKind::PartialTranspose(spec) => {
                let (r, c) = match spec.side {
                    Side::Right => (i, j),
                    Side::Left => (j, i),
                };
                let d = spec.d;
                let (a1, b1) = (r / d, r % d);
                let (a2, b2) = (c / d, c % d);
                (a1 * d + b2, a2 * d + b1)
            }
            PermKind::InducedDiagonal(theta) => (theta[i] as usize, theta[j] as usize),
            PermKind::Table(flat) => {
                let v = flat[i * self.m + j] as usize;
                (v / self.m, v % self.m)
            }
            PermKind::Composition(parts) => {
                parts.iter().rev().fold((i, j), |(a, b), p| p.image(a, b))
            }
        }
    }

    /// Image of a 1-based pair.
    pub fn eval(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        if i == 0 || j == 0 || i > self.m || j > self.m {
            return Err(Error::domain(format!("index ({i}, {j}) outside [{}]^2", self.m)));
        }
        let (a, b) = self.image(i - 1, j - 1);
        Ok((a + 1, b + 1))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        check_same_side(outer, inner)?;
        let mut parts = Vec::new();
        for p in [outer, inner] {
            match &p.kind {
                PermKind::Composition(inner_parts) if p.label.is_none() => {
                    parts.extend(inner_parts.iter().cloned())
                }
                _ => parts.push(p.clone()),
            }
        }
        Ok(Self::from_kind(outer.m, PermKind::Composition(parts)))
    }

    pub fn invert(&self) -> Self {
        let m = self.m;
        match &self.kind {
            // Γ and its left variant are involutions.
            PermKind::Identity | PermKind::Transpose | PermKind::PartialTranspose(_) => self.clone(),
            PermKind::InducedDiagonal(theta) => {
                let mut inv = vec![0u32; m];
                for (i, &t) in theta.iter().enumerate() {
                    inv[t as usize] = i as u32;
                }
                Self::from_kind(m, PermKind::InducedDiagonal(inv.into()))
            }
            PermKind::Table(flat) => {
                let mut inv = vec![0u32; m * m];
                for (idx, &v) in flat.iter().enumerate() {
                    inv[v as usize] = idx as u32;
                }
                Self::from_kind(m, PermKind::Table(inv.into()))
            }
            PermKind::Composition(parts) => {
                let inv_parts = parts.iter().rev().map(|p| p.invert()).collect();
                Self::from_kind(m, PermKind::Composition(inv_parts))
            }
        }
    }

    /// Tabulated copy of this permutation.
    pub fn materialize(&self) -> Result<Self> {
        let m = self.m;
        let images: Vec<(usize, usize)> =
            (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| self.image(i, j)).collect();
        Self::from_table(m, &images)
    }

    /// Whether `σ ∘ t = t ∘ σ`.
    ///
    /// Partial transposes (both sides), the identity, the transpose and induced
    /// diagonal maps commute with `t` by construction; tables and compositions
    /// are checked on every pair.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            PermKind::Identity
            | PermKind::Transpose
            | PermKind::PartialTranspose(_)
            | PermKind::InducedDiagonal(_) => true,
            PermKind::Table(_) | PermKind::Composition(_) => self.is_symmetric_exhaustive(),
        }
    }

    pub fn is_symmetric_exhaustive(&self) -> bool {
        let m = self.m;
        (0..m).all(|i| {
            (0..m).all(|j| {
                let (a, b) = self.image(j, i);
                self.image(i, j) == (b, a)
            })
        })
    }

    pub fn extensionally_equal(&self, other: &Self) -> bool {
        self.m == other.m
            && (0..self.m).all(|i| (0..self.m).all(|j| self.image(i, j) == other.image(i, j)))
    }

    /// Equality of representations (same kind, same parameters); implies
    /// extensional equality but not conversely.
    pub fn same_representation(&self, other: &Self) -> bool {
        if self.m != other.m {
            return false;
        }
        match (&self.kind, &other.kind) {
            (PermKind::Identity, PermKind::Identity) | (PermKind::Transpose, PermKind::Transpose) => true,
            (PermKind::PartialTranspose(a), PermKind::PartialTranspose(b)) => a == b,
            (PermKind::InducedDiagonal(a), PermKind::InducedDiagonal(b)) => a == b,
            (PermKind::Table(a), PermKind::Table(b)) => a == b,
            (PermKind::Composition(a), PermKind::Composition(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_representation(y))
            }
            _ => false,
        }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| self.image(i, j) == (i, j)))
    }

    pub fn fixed_points(&self) -> u64 {
        let m = self.m;
        (0..m).map(|i| (0..m).filter(|&j| self.image(i, j) == (i, j)).count() as u64).sum()
    }

    /// `[A^σ]_{ij} = A_{σ(i,j)}`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !a.is_square() || a.rows() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: a.rows() });
        }
        Ok(ComplexMatrix::from_fn(self.m, self.m, |i, j| {
            let (r, c) = self.image(i, j);
            a.get(r, c)
        }))
    }
}

fn check_side(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::domain("matrix side must be positive"))
    } else {
        Ok(())
    }
}

fn check_same_side(a: &EntryPermutation, b: &EntryPermutation) -> Result<()> {
    if a.m != b.m {
        Err(Error::DimensionMismatch { expected: a.m, found: b.m })
    } else {
        Ok(())
    }
}

/// Uniformly random symmetric bijection of `[M]²`: the diagonal is permuted
/// and off-diagonal swap orbits `{(i,j), (j,i)}` are mapped onto each other
/// with a random orientation.
pub fn random_symmetric_table<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<EntryPermutation> {
    check_side(m)?;
    let mut images = vec![(0usize, 0usize); m * m];
    let mut diag: Vec<usize> = (0..m).collect();
    diag.shuffle(rng);
    for (i, &t) in diag.iter().enumerate() {
        images[i * m + i] = (t, t);
    }
    let orbits: Vec<(usize, usize)> =
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut targets = orbits.clone();
    targets.shuffle(rng);
    for (&(i, j), &(a, b)) in orbits.iter().zip(&targets) {
        let (a, b) = if rng.gen::<bool>() { (a, b) } else { (b, a) };
        images[i * m + j] = (a, b);
        images[j * m + i] = (b, a);
    }
    EntryPermutation::from_table(m, &images)
}

/// Splits a 1-based index `i = (α−1)·d + β` into its 1-based block row `α` and offset `β`.
pub fn index_decompose(i: usize, d: usize) -> Result<(usize, usize)> {
    if d == 0 {
        return Err(Error::domain("block size must be positive"));
    }
    if i == 0 {
        return Err(Error::domain("indices are 1-based"));
    }
    Ok(((i - 1) / d + 1, (i - 1) % d + 1))
}

/// Like [`index_decompose`] but also rejects `i > b·d`.
pub fn index_decompose_in(i: usize, b: usize, d: usize) -> Result<(usize, usize)> {
    if i > b * d {
        return Err(Error::domain(format!("index {i} outside [{}]", b * d)));
    }
    index_decompose(i, d)
}

/// `𝔠(σ, τ)`: number of pairs on which the two permutations agree.
pub fn count_agreements(sigma: &EntryPermutation, tau: &EntryPermutation) -> Result<u64> {
    check_same_side(sigma, tau)?;
    let m = sigma.m;
    Ok((0..m)
        .into_par_iter()
        .map(|i| (0..m).filter(|&j| sigma.image(i, j) == tau.image(i, j)).count() as u64)
        .sum())
}

/// `𝔧(σ, τ)`: number of triples with `σ(i, j) = τ(i, l)`.
pub fn count_joint(sigma: &EntryPermutation, tau: &EntryPermutation) -> Result<u64> {
    check_same_side(sigma, tau)?;
    if sigma.m <= TRIPLE_LOOP_MAX_SIDE {
        Ok(count_joint_direct(sigma, tau))
    } else {
        Ok(count_joint_indexed(sigma, tau))
    }
}

/// Triple loop form of [`count_joint`].
pub fn count_joint_direct(sigma: &EntryPermutation, tau: &EntryPermutation) -> u64 {
    let m = sigma.m;
    (0..m)
        .into_par_iter()
        .map(|i| {
            let row: Vec<(usize, usize)> = (0..m).map(|l| tau.image(i, l)).collect();
            (0..m)
                .map(|j| {
                    let s = sigma.image(i, j);
                    row.iter().filter(|&&t| t == s).count() as u64
                })
                .sum::<u64>()
        })
        .sum()
}

/// Indexed form of [`count_joint`]: for each `i`, the cells `τ(i, ·)` are
/// stamped in a dense `M²` marker array, then `σ(i, ·)` is looked up.
pub fn count_joint_indexed(sigma: &EntryPermutation, tau: &EntryPermutation) -> u64 {
    let m = sigma.m;
    (0..m)
        .into_par_iter()
        .map_init(
            || vec![u32::MAX; m * m],
            |stamp, i| {
                for l in 0..m {
                    let (a, b) = tau.image(i, l);
                    stamp[a * m + b] = i as u32;
                }
                (0..m)
                    .filter(|&j| {
                        let (a, b) = sigma.image(i, j);
                        stamp[a * m + b] == i as u32
                    })
                    .count() as u64
            },
        )
        .sum()
}

/// Triples `(i, j, k)` with `σ(i, j) = τ(k, j)`.
pub fn count_joint_second_slot(sigma: &EntryPermutation, tau: &EntryPermutation) -> Result<u64> {
    check_same_side(sigma, tau)?;
    let m = sigma.m;
    Ok((0..m)
        .into_par_iter()
        .map_init(
            || vec![u32::MAX; m * m],
            |stamp, j| {
                for k in 0..m {
                    let (a, b) = tau.image(k, j);
                    stamp[a * m + b] = j as u32;
                }
                (0..m)
                    .filter(|&i| {
                        let (a, b) = sigma.image(i, j);
                        stamp[a * m + b] == j as u32
                    })
                    .count() as u64
            },
        )
        .sum())
}

/// Number of triples for which `left_proj(σ(·)) = right_proj(τ(·))` under the
/// given sharing pattern. Runs in `O(M²)` through per-row histograms.
pub fn count_projection_agreement(
    sigma: &EntryPermutation,
    tau: &EntryPermutation,
    left_proj: Projection,
    right_proj: Projection,
    pattern: Pattern,
) -> Result<u64> {
    check_same_side(sigma, tau)?;
    let m = sigma.m;
    Ok((0..m)
        .into_par_iter()
        .map_init(
            || vec![0u64; m],
            |hist, shared| {
                hist.iter_mut().for_each(|h| *h = 0);
                // `shared` is the coordinate common to both sides; the histogram
                // runs over τ's free coordinate, the sum over σ's.
                for free in 0..m {
                    let t = match pattern {
                        Pattern::ShareFirst => tau.image(shared, free),
                        Pattern::ShareMiddle => tau.image(shared, free),
                        Pattern::ShareSecondSlot => tau.image(free, shared),
                    };
                    hist[right_proj.pick(t)] += 1;
                }
                (0..m)
                    .map(|other| {
                        let s = match pattern {
                            Pattern::ShareFirst => sigma.image(shared, other),
                            Pattern::ShareMiddle => sigma.image(other, shared),
                            Pattern::ShareSecondSlot => sigma.image(other, shared),
                        };
                        hist[left_proj.pick(s)]
                    })
                    .sum::<u64>()
            },
        )
        .sum())
}

/// `Q = lcm(d, D) = d·L = D·l`, with `d ≤ D` after an optional swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcmData {
    pub q: u64,
    /// `Q / min(d, D)`.
    pub big_l: u64,
    /// `Q / max(d, D)`.
    pub small_l: u64,
    /// True when the inputs arrived with `d > D`.
    pub swapped: bool,
}

pub fn gamma_lcm_data(d: u64, big_d: u64) -> Result<LcmData> {
    if d == 0 || big_d == 0 {
        return Err(Error::domain("block sizes must be positive"));
    }
    let swapped = d > big_d;
    let (lo, hi) = if swapped { (big_d, d) } else { (d, big_d) };
    let q = num_integer::lcm(lo, hi);
    Ok(LcmData { q, big_l: q / lo, small_l: q / hi, swapped })
}

/// All factorisations `(b, d)` with `b·d = m`, ordered by increasing `d`.
pub fn factorizations(m: usize) -> Vec<(usize, usize)> {
    (1..=m).filter(|d| m.is_multiple_of(*d)).map(|d| (m / d, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(b: usize, d: usize) -> EntryPermutation {
        EntryPermutation::gamma(b, d).unwrap()
    }

    fn lg(b: usize, d: usize) -> EntryPermutation {
        EntryPermutation::left_gamma(b, d).unwrap()
    }

    fn random_matrix(m: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(m, m, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    fn brute_triples(
        s: &EntryPermutation,
        t: &EntryPermutation,
        lp: Projection,
        rp: Projection,
        pattern: Pattern,
    ) -> u64 {
        let m = s.m();
        let mut n = 0;
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    let (a, b) = match pattern {
                        Pattern::ShareFirst => (s.image(x, y), t.image(x, z)),
                        Pattern::ShareMiddle => (s.image(x, y), t.image(y, z)),
                        Pattern::ShareSecondSlot => (s.image(x, y), t.image(z, y)),
                    };
                    if lp.pick(a) == rp.pick(b) {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn index_decompose_examples() {
        assert_eq!(index_decompose(7, 3).unwrap(), (3, 1));
        assert_eq!(index_decompose(1, 5).unwrap(), (1, 1));
        assert_eq!(index_decompose_in(12, 4, 3).unwrap(), (4, 3));
        assert!(index_decompose_in(13, 4, 3).is_err());
        assert!(index_decompose(0, 3).is_err());
        assert!(index_decompose(3, 0).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(g(2, 2).eval(1, 2).unwrap(), (2, 1));
        let m = 5;
        for i in 1..=m {
            for j in 1..=m {
                assert_eq!(g(m, 1).eval(i, j).unwrap(), (i, j));
                assert_eq!(g(1, m).eval(i, j).unwrap(), (j, i));
            }
        }
        assert!(g(2, 2).eval(0, 1).is_err());
        assert!(g(2, 2).eval(5, 1).is_err());
    }

    #[test]
    fn degenerate_gammas_match_identity_and_transpose() {
        for m in 1..8 {
            assert!(g(m, 1).extensionally_equal(&EntryPermutation::identity(m).unwrap()));
            assert!(g(1, m).extensionally_equal(&EntryPermutation::transpose(m).unwrap()));
        }
    }

    #[test]
    fn apply_examples() {
        let a = random_matrix(6, 1);
        assert_eq!(EntryPermutation::identity(6).unwrap().apply(&a).unwrap(), a);
        assert_eq!(g(1, 6).apply(&a).unwrap(), a.transpose());
        // Γ(2, 3) transposes each 3×3 block in place.
        let pt = g(2, 3).apply(&a).unwrap();
        for (br, bc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for x in 0..3 {
                for y in 0..3 {
                    assert_eq!(pt.get(br * 3 + x, bc * 3 + y), a.get(br * 3 + y, bc * 3 + x));
                }
            }
        }
        assert!(g(2, 2).apply(&a).is_err());
    }

    #[test]
    fn left_gamma_is_transpose_of_gamma() {
        for (b, d) in factorizations(12) {
            let a = random_matrix(12, (b * 31 + d) as u64);
            let left = lg(b, d).apply(&a).unwrap();
            let right_t = g(b, d).apply(&a).unwrap().transpose();
            assert_eq!(left, right_t);
            // Blocks are swapped without transposing their contents.
            for x in 0..d {
                for y in 0..d {
                    for p in 0..b {
                        for q in 0..b {
                            assert_eq!(left.get(p * d + x, q * d + y), a.get(q * d + x, p * d + y));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn compose_and_invert() {
        for m in [4, 6, 12] {
            for (b, d) in factorizations(m) {
                assert!(EntryPermutation::compose(&g(b, d), &g(b, d)).unwrap().is_identity());
                assert!(EntryPermutation::compose(&lg(b, d), &lg(b, d)).unwrap().is_identity());
            }
        }
        let t = EntryPermutation::transpose(5).unwrap();
        assert!(EntryPermutation::compose(&t, &t).unwrap().is_identity());

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cells: Vec<(usize, usize)> = (0..5).flat_map(|i| (0..5).map(move |j| (i, j))).collect();
        cells.shuffle(&mut rng);
        let table = EntryPermutation::from_table(5, &cells).unwrap();
        assert!(EntryPermutation::compose(&table, &table.invert()).unwrap().is_identity());
        assert!(EntryPermutation::compose(&table.invert(), &table).unwrap().is_identity());
        assert!(EntryPermutation::compose(&table, &g(2, 2)).is_err());
    }

    #[test]
    fn composition_evaluates_outer_after_inner() {
        let s = g(2, 3);
        let t = EntryPermutation::transpose(6).unwrap();
        let st = EntryPermutation::compose(&s, &t).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let (a, b) = t.image(i, j);
                assert_eq!(st.image(i, j), s.image(a, b));
            }
        }
    }

    #[test]
    fn table_validation() {
        assert!(EntryPermutation::from_table(2, &[(0, 0), (0, 0), (1, 0), (1, 1)]).is_err());
        assert!(EntryPermutation::from_table(2, &[(0, 0)]).is_err());
        assert!(EntryPermutation::from_table(2, &[(0, 0), (0, 1), (1, 0), (2, 1)]).is_err());
        let err = EntryPermutation::from_table_with_cap(3, &[(0, 0); 9], 2).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
        assert!(EntryPermutation::induced_diagonal(&[0, 0, 1]).is_err());
    }

    #[test]
    fn symmetry_structural_agrees_with_exhaustive() {
        for m in 1..=12 {
            for (b, d) in factorizations(m) {
                for p in [g(b, d), lg(b, d)] {
                    assert!(p.is_symmetric());
                    assert!(p.is_symmetric_exhaustive());
                    // symmetric σ maps (a, b) onto the diagonal iff a = b
                    for i in 0..m {
                        for j in 0..m {
                            let (x, y) = p.image(i, j);
                            assert_eq!(x == y, i == j);
                        }
                    }
                }
            }
        }
        let theta = EntryPermutation::induced_diagonal(&[2, 0, 1, 3]).unwrap();
        assert!(theta.is_symmetric() && theta.is_symmetric_exhaustive());
    }

    #[test]
    fn non_symmetric_table_detected() {
        // Swap (1,2) with (2,2) (1-based), everything else fixed.
        let m = 3;
        let mut images: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
        images.swap(1, 4);
        let p = EntryPermutation::from_table(m, &images).unwrap();
        assert_eq!(p.eval(1, 2).unwrap(), (2, 2));
        assert!(!p.is_symmetric());
    }

    #[test]
    fn random_symmetric_tables_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..10 {
            let p = random_symmetric_table(m, &mut rng).unwrap();
            assert!(p.is_symmetric_exhaustive());
        }
    }

    #[test]
    fn agreement_examples() {
        assert_eq!(count_agreements(&g(4, 1), &g(1, 4)).unwrap(), 4);
        assert_eq!(count_agreements(&g(2, 2), &g(2, 2)).unwrap(), 16);
        assert_eq!(count_agreements(&g(6, 2), &g(4, 3)).unwrap(), 40);
        assert_eq!(count_joint(&g(4, 1), &g(1, 4)).unwrap(), 4);
        assert_eq!(count_joint(&g(6, 2), &g(4, 3)).unwrap(), 40);
        assert!(count_agreements(&g(2, 2), &g(3, 3)).is_err());
    }

    #[test]
    fn joint_of_a_bijection_with_itself_is_m_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [3, 5, 8] {
            let p = random_symmetric_table(m, &mut rng).unwrap();
            assert_eq!(count_joint(&p, &p).unwrap(), (m * m) as u64);
        }
    }

    #[test]
    fn joint_paths_agree() {
        for m in [6, 8, 12, 16] {
            for (b, d) in factorizations(m) {
                for (bb, dd) in factorizations(m) {
                    for (s, t) in [(g(b, d), g(bb, dd)), (g(b, d), lg(bb, dd))] {
                        assert_eq!(count_joint_direct(&s, &t), count_joint_indexed(&s, &t));
                    }
                }
            }
        }
    }

    #[test]
    fn projection_counts_match_brute_force() {
        use Pattern::*;
        use Projection::*;
        let perms = [g(6, 2), g(4, 3), lg(4, 3), lg(2, 6), EntryPermutation::identity(12).unwrap()];
        for s in &perms {
            for t in &perms {
                for pat in [ShareFirst, ShareMiddle, ShareSecondSlot] {
                    for lp in [First, Second] {
                        for rp in [First, Second] {
                            assert_eq!(
                                count_projection_agreement(s, t, lp, rp, pat).unwrap(),
                                brute_triples(s, t, lp, rp, pat),
                                "{s} {t} {pat:?} {lp:?} {rp:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let id = EntryPermutation::identity(7).unwrap();
        assert_eq!(
            count_projection_agreement(&id, &id, Projection::Second, Projection::First, Pattern::ShareMiddle)
                .unwrap(),
            49 * 7
        );
        let m = 12u64;
        for (b, d) in factorizations(12) {
            let c = count_projection_agreement(
                &g(b, d),
                &g(b, d),
                Projection::Second,
                Projection::Second,
                Pattern::ShareSecondSlot,
            )
            .unwrap();
            assert!(c <= m * m * m / d as u64);
        }
        let c = count_projection_agreement(&g(6, 2), &lg(4, 3), Projection::First, Projection::First, Pattern::ShareSecondSlot)
            .unwrap();
        assert!(c <= 288);
        assert_eq!(c, 160);
    }

    #[test]
    fn second_slot_joint_equals_first_slot_for_symmetric_pairs() {
        for (b, d) in factorizations(12) {
            for (bb, dd) in factorizations(12) {
                let (s, t) = (g(b, d), lg(bb, dd));
                assert_eq!(count_joint_second_slot(&s, &t).unwrap(), count_joint(&s, &t).unwrap());
            }
        }
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(gamma_lcm_data(2, 3).unwrap(), LcmData { q: 6, big_l: 3, small_l: 2, swapped: false });
        assert_eq!(gamma_lcm_data(4, 4).unwrap(), LcmData { q: 4, big_l: 1, small_l: 1, swapped: false });
        assert_eq!(gamma_lcm_data(1, 12).unwrap(), LcmData { q: 12, big_l: 12, small_l: 1, swapped: false });
        assert!(gamma_lcm_data(3, 2).unwrap().swapped);
        assert!(gamma_lcm_data(0, 2).is_err());
    }

    #[test]
    fn trace_and_self_adjointness_preserved_by_symmetric_perms() {
        let a = random_matrix(8, 5);
        let h = ComplexMatrix::from_fn(8, 8, |i, j| a.get(i, j) + a.get(j, i).conj());
        for (b, d) in factorizations(8) {
            for p in [g(b, d), lg(b, d)] {
                let hp = p.apply(&h).unwrap();
                assert!(hp.is_hermitian(1e-12));
                assert!((hp.trace() - h.trace()).norm() < 1e-12);
                assert!((p.apply(&a).unwrap().trace() - a.trace()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_points_of_inverse_composition_match_agreements() {
        for (b, d) in factorizations(12) {
            for (bb, dd) in factorizations(12) {
                let (s, t) = (g(b, d), lg(bb, dd));
                let comp = EntryPermutation::compose(&s.invert(), &t).unwrap();
                assert_eq!(comp.fixed_points(), count_agreements(&s, &t).unwrap());
            }
        }
    }
}
