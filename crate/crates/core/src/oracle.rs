//! Brute-force reference computations.
//!
//! These work directly from the definitions with 1-based indices and plain
//! odometers, sharing no code with the counting engines they check.

use crate::rational::{self, from_u128, Rational};

/// An entry map on 1-based indices.
pub type EntryMap<'a> = &'a dyn Fn(usize, usize) -> (usize, usize);

/// `Γ(b,d)(i,j) = ((α₁−1)d + β₂, (α₂−1)d + β₁)`.
pub fn gamma_image(b: usize, d: usize, i: usize, j: usize) -> (usize, usize) {
    assert!(i >= 1 && j >= 1 && i <= b * d && j <= b * d);
    let (a1, b1) = ((i - 1) / d + 1, (i - 1) % d + 1);
    let (a2, b2) = ((j - 1) / d + 1, (j - 1) % d + 1);
    ((a1 - 1) * d + b2, (a2 - 1) * d + b1)
}

/// The left partial transpose, `Γ(b,d)(j,i)`.
pub fn left_gamma_image(b: usize, d: usize, i: usize, j: usize) -> (usize, usize) {
    gamma_image(b, d, j, i)
}

/// `#{(i,j) : σ(i,j) = τ(i,j)}`.
pub fn agreements(m: usize, s: EntryMap, t: EntryMap) -> u64 {
    let mut n = 0;
    for i in 1..=m {
        for j in 1..=m {
            n += u64::from(s(i, j) == t(i, j));
        }
    }
    n
}

/// `#{(i,j,l) : σ(i,j) = τ(i,l)}`.
pub fn joint(m: usize, s: EntryMap, t: EntryMap) -> u64 {
    let mut n = 0;
    for i in 1..=m {
        for j in 1..=m {
            let a = s(i, j);
            for l in 1..=m {
                n += u64::from(a == t(i, l));
            }
        }
    }
    n
}

/// `#{(i,j,l) : σ(i,j) = τ(l,j)}`.
pub fn second_slot_joint(m: usize, s: EntryMap, t: EntryMap) -> u64 {
    let mut n = 0;
    for i in 1..=m {
        for j in 1..=m {
            let a = s(i, j);
            for l in 1..=m {
                n += u64::from(a == t(l, j));
            }
        }
    }
    n
}

fn coord(p: (usize, usize), which: usize) -> usize {
    if which == 1 {
        p.0
    } else {
        p.1
    }
}

/// `#{(i,j,l) : π_x σ(i,j) = π_y τ(l,j)}` with `x, y ∈ {1, 2}`.
pub fn second_slot_projection(m: usize, s: EntryMap, t: EntryMap, x: usize, y: usize) -> u64 {
    let mut n = 0;
    for i in 1..=m {
        for j in 1..=m {
            let a = coord(s(i, j), x);
            for l in 1..=m {
                n += u64::from(a == coord(t(l, j), y));
            }
        }
    }
    n
}

/// `#{(i,j,l) : π_x σ(i,j) = π_y τ(j,l)}`.
pub fn middle_projection(m: usize, s: EntryMap, t: EntryMap, x: usize, y: usize) -> u64 {
    let mut n = 0;
    for i in 1..=m {
        for j in 1..=m {
            let a = coord(s(i, j), x);
            for l in 1..=m {
                n += u64::from(a == coord(t(j, l), y));
            }
        }
    }
    n
}

/// All bipartite pairings of `[2m]` as 1-based partner arrays (index 0 unused).
pub fn bipartite_pairings(m: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, m: usize, used: &mut Vec<bool>, partner: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k > m {
            out.push(partner.clone());
            return;
        }
        for e in 1..=m {
            if !used[e] {
                used[e] = true;
                partner[2 * k - 1] = 2 * e;
                partner[2 * e] = 2 * k - 1;
                go(k + 1, m, used, partner, out);
                used[e] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(1, m, &mut vec![false; m + 1], &mut vec![0; 2 * m + 1], &mut out);
    out
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        if *d < base {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}

/// Whether `(l_t, j_t)` and `(l_{−s}, j_{−s})` agree for every pair `(2t−1, 2s)`.
fn supported(partner: &[usize], images: &[(usize, usize)], j: &[usize]) -> bool {
    let m = images.len();
    (1..=m).all(|t| {
        let s = partner[2 * t - 1] / 2;
        images[t - 1].0 == images[s - 1].1 && j[t - 1] == j[s - 1]
    })
}

/// `#𝒜(π, σ⃗)` by enumerating every `(i⃗, j⃗)`.
pub fn admissible(side: usize, p: usize, perms: &[EntryMap], partner: &[usize]) -> u128 {
    let m = perms.len();
    let mut i = vec![1; m];
    let mut n = 0u128;
    loop {
        let images: Vec<(usize, usize)> = (0..m).map(|k| perms[k](i[k], i[(k + 1) % m])).collect();
        let mut j = vec![1; m];
        loop {
            n += u128::from(supported(partner, &images, &j));
            if !advance(&mut j, p) {
                break;
            }
        }
        if !advance(&mut i, side) {
            break;
        }
    }
    n
}

/// `E∘tr(W^σ1 ⋯ W^σm)` by the full Wick sum.
pub fn moment(side: usize, p: usize, perms: &[EntryMap]) -> Rational {
    let m = perms.len();
    let total: u128 = bipartite_pairings(m).iter().map(|pi| admissible(side, p, perms, pi)).sum();
    from_u128(total) * rational::pow(&rational::int(side as u64), -(m as i64) - 1)
}

/// `κ₂(W^σ, W^τ) = E tr(W^σ W^τ) − E tr W^σ · E tr W^τ`.
pub fn second_cumulant(side: usize, p: usize, s: EntryMap, t: EntryMap) -> Rational {
    moment(side, p, &[s, t]) - moment(side, p, &[s]) * moment(side, p, &[t])
}

/// Number of `j⃗ ∈ [P]^m` with `j_t = j_s` for every pair `(2t−1, 2s)`.
fn j_count(p: usize, partner: &[usize]) -> u128 {
    let m = (partner.len() - 1) / 2;
    let mut j = vec![1; m];
    let mut n = 0u128;
    loop {
        n += u128::from((1..=m).all(|t| j[t - 1] == j[partner[2 * t - 1] / 2 - 1]));
        if !advance(&mut j, p) {
            break;
        }
    }
    n
}

/// `Σ_{u⃗ ∈ 𝓙(m)} v(π, σ⃗, (a, u⃗, b))` with `i₁ = a`, `i_{−m} = b`.
///
/// The `i`- and `j`-conditions are independent, so the sum factors into an
/// `i`-count times a `j`-count; both are enumerated exhaustively.
pub fn open_chain_sum(side: usize, p: usize, perms: &[EntryMap], partner: &[usize], a: usize, b: usize) -> Rational {
    let m = perms.len();
    let mut inner = vec![1; m - 1];
    let mut icount = 0u128;
    loop {
        let mut chain = Vec::with_capacity(m + 1);
        chain.push(a);
        chain.extend_from_slice(&inner);
        chain.push(b);
        let images: Vec<(usize, usize)> = (0..m).map(|k| perms[k](chain[k], chain[k + 1])).collect();
        icount += u128::from(
            (1..=m).all(|t| images[t - 1].0 == images[partner[2 * t - 1] / 2 - 1].1),
        );
        if inner.is_empty() || !advance(&mut inner, side) {
            break;
        }
    }
    from_u128(icount * j_count(p, partner)) * rational::pow(&rational::int(side as u64), -(m as i64))
}

/// `ν₁` and `ν₂` as 1-based partner arrays.
pub fn nu_partner(which: u8, m: usize) -> Vec<usize> {
    let n = 2 * m;
    let wrap = |x: usize| (x - 1) % n + 1;
    let mut partner = vec![0; n + 1];
    for k in 1..=m {
        let (x, y) = if which == 1 { (2 * k, wrap(2 * k + 1)) } else { (2 * k - 1, wrap(2 * k + 2)) };
        partner[x] = y;
        partner[y] = x;
    }
    partner
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_image(2, 2, 1, 2), (2, 1));
        assert_eq!(gamma_image(4, 1, 3, 2), (3, 2));
        assert_eq!(gamma_image(1, 4, 3, 2), (2, 3));
    }

    #[test]
    fn known_counts() {
        let s = |i, j| gamma_image(6, 2, i, j);
        let t = |i, j| gamma_image(4, 3, i, j);
        assert_eq!(agreements(12, &s, &t), 40);
        assert_eq!(joint(12, &s, &t), 40);
        let lt = |i, j| left_gamma_image(4, 3, i, j);
        assert_eq!(second_slot_projection(12, &s, &lt, 1, 1), 160);
    }

    #[test]
    fn known_moments() {
        let id = |i, j| (i, j);
        assert_eq!(moment(4, 4, &[&id, &id]), int(2));
        let s = |i, j| gamma_image(6, 2, i, j);
        let t = |i, j| gamma_image(4, 3, i, j);
        assert_eq!(moment(12, 12, &[&s, &t]), rat(23, 18));
        assert_eq!(bipartite_pairings(4).len(), 24);
    }

    #[test]
    fn nu_partners() {
        assert_eq!(nu_partner(1, 3), vec![0, 6, 3, 2, 5, 4, 1]);
        assert_eq!(nu_partner(2, 3), vec![0, 4, 5, 6, 1, 2, 3]);
    }
}
