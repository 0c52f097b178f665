//! Verification suite: each check recomputes a finite-size identity or bound
//! and reports pass/fail with a one-line detail.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{limit_cumulant_gamma, LimitValue};
use crate::montecarlo::{fit_variance_scaling, mc_mixed_moments, variance_scaling_probe, SamplerConfig, ScalingPoint};
use crate::oracle;
use crate::partitions::{nu1, nu2};
use crate::perms::{
    count_agreements, count_joint, count_joint_second_slot, count_projection_agreement, factorizations,
    gamma_lcm_data, random_symmetric_table, EntryPermutation as E, MatrixShape, Pattern, Projection,
};
use crate::rational::{self, int, rat, Rational};
use crate::wick::{
    count_admissible, count_admissible_naive, exact_mixed_cumulant, exact_mixed_moment, exact_trace_covariance, open_chain_sum,
    segment_sum, segment_sum_formula, WickWord,
};
use crate::{literal, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u8, name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    match body() {
        Ok((passed, detail)) => CheckOutcome { id, name, passed, detail },
        Err(e) => CheckOutcome { id, name, passed: false, detail: format!("error: {e}") },
    }
}

/// Collects failures, keeping the first few messages.
#[derive(Default)]
struct Failures {
    count: usize,
    first: Vec<String>,
}

impl Failures {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.count += 1;
            if self.first.len() < 3 {
                self.first.push(msg());
            }
        }
    }

    fn finish(self, checked: usize, what: &str) -> (bool, String) {
        if self.count == 0 {
            (true, format!("{checked} {what}"))
        } else {
            (false, format!("{} of {checked} {what} failed; {}", self.count, self.first.join("; ")))
        }
    }
}

type Map = Box<dyn Fn(usize, usize) -> (usize, usize)>;

fn gamma_map(b: usize, d: usize) -> Map {
    Box::new(move |i, j| oracle::gamma_image(b, d, i, j))
}

fn left_gamma_map(b: usize, d: usize) -> Map {
    Box::new(move |i, j| oracle::left_gamma_image(b, d, i, j))
}

pub const SANDWICH_SIDES: [usize; 7] = [4, 6, 8, 12, 16, 24, 36];

/// Brute-force `𝔠 = 𝔧` and `M²/L² ≤ 𝔠 ≤ M²/L` for every pair with `d ≤ D`.
pub fn check_lcm_sandwich() -> CheckOutcome {
    outcome(1, "lcm sandwich and c = j", || {
        let mut fails = Failures::default();
        let mut checked = 0;
        for &m in &SANDWICH_SIDES {
            let fs = factorizations(m);
            for &(b, d) in &fs {
                for &(bb, dd) in &fs {
                    if d > dd {
                        continue;
                    }
                    checked += 1;
                    let (s, t) = (gamma_map(b, d), gamma_map(bb, dd));
                    let c = oracle::agreements(m, &*s, &*t);
                    let j = oracle::joint(m, &*s, &*t);
                    let (gs, gt) = (E::gamma(b, d)?, E::gamma(bb, dd)?);
                    let lib = (count_agreements(&gs, &gt)?, count_joint(&gs, &gt)?);
                    let l = gamma_lcm_data(d as u64, dd as u64)?.big_l;
                    let m2 = (m * m) as u64;
                    let ok = c == j && lib == (c, j) && c * l * l >= m2 && c * l <= m2;
                    fails.check(ok, || format!("M={m} G({b},{d}) G({bb},{dd}): c={c} j={j} L={l} lib={lib:?}"));
                }
            }
        }
        Ok(fails.finish(checked, "factorization pairs"))
    })
}

/// The permutation pool of the second-cumulant identity at side `m`.
pub fn kappa2_pool(m: usize, seed: u64) -> Result<Vec<E>> {
    let mut pool = vec![E::identity(m)?, E::transpose(m)?];
    for (b, d) in factorizations(m) {
        pool.push(E::gamma(b, d)?);
        pool.push(E::left_gamma(b, d)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..3 {
        pool.push(random_symmetric_table(m, &mut rng)?.with_label(format!("R{}", k + 1)));
    }
    Ok(pool)
}

pub const KAPPA2_SHAPES: [(usize, usize); 3] = [(8, 8), (12, 12), (12, 8)];

/// `κ₂(W^σ, W^τ) = (P/M)·𝔠(σ,τ)/M²` with rational equality.
pub fn check_kappa2_identity() -> CheckOutcome {
    outcome(2, "exact second cumulant identity", || {
        let mut fails = Failures::default();
        let mut checked = 0;
        for &(m, p) in &KAPPA2_SHAPES {
            let shape = MatrixShape::new(m, p)?;
            let pool = kappa2_pool(m, 0x5eed + m as u64)?;
            for s in &pool {
                for t in &pool {
                    checked += 1;
                    let k2 = exact_mixed_cumulant(&WickWord::new(shape, vec![s.clone(), t.clone()])?)?;
                    let c = count_agreements(s, t)?;
                    let expected = rat(p as i64, m as i64) * rat(c as i64, (m * m) as i64);
                    fails.check(k2 == expected, || {
                        format!("M={m} P={p} ({s},{t}): {} vs {}", rational::format(&k2), rational::format(&expected))
                    });
                }
            }
        }
        Ok(fails.finish(checked, "pairs"))
    })
}

pub const SEGMENT_ORDERS: [usize; 3] = [3, 4, 5];
pub const SEGMENT_BLOCKS: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (2, 4)];

/// Brute-force open-chain sums for `(Γ(b,d))^m` under `ν₁`, `ν₂`.
pub fn check_segment_sums() -> CheckOutcome {
    outcome(3, "segment sums for constant partial transposes", || {
        let mut fails = Failures::default();
        let mut checked = 0;
        for &m in &SEGMENT_ORDERS {
            for &(b, d) in &SEGMENT_BLOCKS {
                let side = b * d;
                let shape = MatrixShape::square(side)?;
                let g = gamma_map(b, d);
                let maps: Vec<&dyn Fn(usize, usize) -> (usize, usize)> = vec![&*g; m];
                let word = WickWord::new(shape, vec![E::gamma(b, d)?; m])?;
                for (which, nu) in [(1u8, nu1(m)?), (2u8, nu2(m)?)] {
                    let partner = oracle::nu_partner(which, m);
                    let expected = segment_sum_formula(which, m, b, d, shape);
                    for a in 1..=side {
                        for e in 1..=side {
                            checked += 1;
                            let brute = oracle::open_chain_sum(side, side, &maps, &partner, a, e);
                            let want = if a == e { expected.clone() } else { int(0) };
                            fails.check(brute == want, || {
                                format!("m={m} G({b},{d}) nu{which} a={a} b={e}: {}", rational::format(&brute))
                            });
                        }
                        let lib = segment_sum(&nu, &word, a)?;
                        fails.check(lib == expected, || format!("m={m} G({b},{d}) nu{which} a={a}: library sum"));
                    }
                }
            }
        }
        Ok(fails.finish(checked, "endpoint sums"))
    })
}

/// Fast-path and naive-path `#𝒜` agree on the small exhaustive grid.
pub fn check_fast_vs_naive() -> CheckOutcome {
    outcome(4, "fast and naive admissible counts", || {
        let mut fails = Failures::default();
        let mut checked = 0;
        for side in [2usize, 4, 6] {
            let pool = [E::identity(side)?, E::transpose(side)?, E::gamma(2, side / 2)?, E::gamma(side / 2, 2)?];
            for p in 1..=6 {
                let shape = MatrixShape::new(side, p)?;
                for m in 1..=3usize {
                    let pairings = crate::partitions::enumerate_bipartite_pairings(m)?;
                    let mut idx = vec![0usize; m];
                    loop {
                        let word = WickWord::new(shape, idx.iter().map(|&k| pool[k].clone()).collect())?;
                        for pi in &pairings {
                            checked += 1;
                            let (fast, naive) = (count_admissible(pi, &word)?, count_admissible_naive(pi, &word)?);
                            fails.check(fast == naive, || format!("M={side} P={p} {} {pi}: {fast} vs {naive}", word.label()));
                        }
                        if !crate::wick::odometer(&mut idx, pool.len()) {
                            break;
                        }
                    }
                }
            }
        }
        Ok(fails.finish(checked, "(word, pairing) cases"))
    })
}

pub const MC_WORDS: [&str; 10] = [
    "I",
    "G(2,4),G(4,2)",
    "G(2,4),G(2,4),G(2,4)",
    "I,T",
    "G(4,2),LG(4,2)",
    "T,G(2,4),I",
    "G(2,4),G(4,2),G(2,4),G(4,2)",
    "LG(2,4),LG(2,4),LG(2,4)",
    "I,I,I,I",
    "G(1,8),G(8,1),G(2,4),LG(2,4)",
];

/// Monte Carlo means within `5·SE` of the exact moments.
pub fn check_mc_agreement(samples: usize, seed: u64) -> CheckOutcome {
    outcome(5, "Monte Carlo agrees with exact moments", || {
        let shape = MatrixShape::square(8)?;
        let words: Vec<WickWord> = MC_WORDS
            .iter()
            .map(|w| WickWord::new(shape, literal::parse_word(w, 8, None)?))
            .collect::<Result<_>>()?;
        let estimates = mc_mixed_moments(&words, &SamplerConfig::new(shape, samples, seed)?)?;
        let mut fails = Failures::default();
        let mut worst = 0.0f64;
        for (w, est) in words.iter().zip(&estimates) {
            let exact = rational::to_f64(&exact_mixed_moment(w)?.total);
            let z = (est.mean - exact).abs() / est.std_error;
            worst = worst.max(z);
            fails.check(z <= 5.0, || format!("{}: mc {} exact {exact} se {}", w.label(), est.mean, est.std_error));
        }
        let (ok, detail) = fails.finish(words.len(), "words");
        Ok((ok, format!("{detail}; max |z| = {worst:.2}")))
    })
}

pub const TREND_SIDES: [usize; 4] = [8, 16, 32, 64];

/// `κ₂` decays for `Γ(M/2,2)` vs `Γ(2,M/2)` and stays `P/M` for a repeated family.
pub fn check_freeness_trend() -> CheckOutcome {
    outcome(6, "second cumulant decay along M", || {
        let mut free = Vec::new();
        let mut tied = Vec::new();
        for &m in &TREND_SIDES {
            let shape = MatrixShape::square(m)?;
            let (a, b) = (E::gamma(m / 2, 2)?, E::gamma(2, m / 2)?);
            free.push(exact_mixed_cumulant(&WickWord::new(shape, vec![a, b.clone()])?)?);
            tied.push(exact_mixed_cumulant(&WickWord::new(shape, vec![b.clone(), b])?)?);
        }
        let decreasing = free.windows(2).all(|w| w[1] < w[0]);
        let quarter = free[free.len() - 1] < &free[0] / int(4);
        let flat = tied.iter().all(|k| *k == int(1));
        let text: Vec<String> = free.iter().map(rational::format).collect();
        Ok((decreasing && quarter && flat, format!("kappa2 = [{}], repeated family flat = {flat}", text.join(", "))))
    })
}

pub const LTR_SIDES: [usize; 3] = [12, 16, 24];

/// Case-split triple-count bounds for `Γ` against the left partial transpose,
/// and the lower bound `𝔠 ≥ d·e²`.
pub fn check_left_partial_bounds() -> CheckOutcome {
    outcome(7, "left partial transpose count bounds", || {
        let mut fails = Failures::default();
        let mut checked = 0;
        for &m in &LTR_SIDES {
            let fs = factorizations(m);
            let (m2, m3) = ((m * m) as u64, (m * m * m) as u64);
            for &(b, d) in &fs {
                for &(bb, dd) in &fs {
                    checked += 1;
                    let (s, t) = (gamma_map(b, d), left_gamma_map(bb, dd));
                    let (gs, lt) = (E::gamma(b, d)?, E::left_gamma(bb, dd)?);
                    let x = oracle::second_slot_joint(m, &*s, &*t);
                    let y1 = oracle::second_slot_projection(m, &*s, &*t, 1, 1);
                    let y2 = oracle::second_slot_projection(m, &*s, &*t, 2, 2);
                    let lib = (
                        count_joint_second_slot(&gs, &lt)?,
                        count_projection_agreement(&gs, &lt, Projection::First, Projection::First, Pattern::ShareSecondSlot)?,
                        count_projection_agreement(&gs, &lt, Projection::Second, Projection::Second, Pattern::ShareSecondSlot)?,
                    );
                    let (b64, d64, bb64, dd64) = (b as u64, d as u64, bb as u64, dd as u64);
                    let mut ok = lib == (x, y1, y2);
                    if d >= dd {
                        ok &= x * b64 <= m2 && x * dd64 <= m2;
                    }
                    if dd >= d {
                        ok &= x * d64 <= m2 && x * bb64 <= m2;
                    }
                    ok &= y1 * dd64 <= m3 && y1 * b64 <= m3;
                    ok &= y2 * bb64 <= m3 && y2 * d64 <= m3;
                    if d <= dd {
                        let c = oracle::agreements(m, &*s, &*t);
                        for e in 1..=dd / d {
                            if 2 * d * e >= dd {
                                ok &= c >= d64 * (e * e) as u64;
                            }
                        }
                    }
                    fails.check(ok, || format!("M={m} G({b},{d}) LG({bb},{dd}): x={x} y1={y1} y2={y2} lib={lib:?}"));
                }
            }
        }
        Ok(fails.finish(checked, "factorization pairs"))
    })
}

pub const SCALING_SIDES: [usize; 4] = [8, 16, 32, 64];

/// Log-log variance slope of `tr(W^{Γ(2,M/2)} W^{Γ(M/2,2)})` and the band of
/// the unnormalised trace covariance.
pub fn check_variance_scaling(samples: usize, seed: u64) -> CheckOutcome {
    outcome(8, "variance scaling of normalised traces", || {
        let words: Vec<WickWord> = SCALING_SIDES
            .iter()
            .map(|&m| WickWord::new(MatrixShape::square(m)?, vec![E::gamma(2, m / 2)?, E::gamma(m / 2, 2)?]))
            .collect::<Result<_>>()?;
        let fit = variance_scaling_probe(&words, samples, seed)?;
        let slope = fit.slope.unwrap_or(f64::NAN);
        let covs: Vec<f64> = fit.points.iter().map(|p| p.trace_variance).collect();
        let band = covs.iter().cloned().fold(f64::MIN, f64::max) / covs.iter().cloned().fold(f64::MAX, f64::min);
        let ok = (-2.3..=-1.7).contains(&slope) && band < 3.0;
        let exact_points = words
            .iter()
            .map(|w| {
                let cov = rational::to_f64(&exact_trace_covariance(w, w)?);
                let m = w.shape().m;
                Ok(ScalingPoint { m, variance: cov / (m * m) as f64, trace_variance: cov })
            })
            .collect::<Result<Vec<_>>>()?;
        let exact_slope = fit_variance_scaling(exact_points)?.slope.unwrap_or(f64::NAN);
        Ok((ok, format!("slope = {slope:.4} (exact {exact_slope:.4}), Cov(Tr,Tr) max/min = {band:.3}")))
    })
}

pub const LIMIT_SIDES: [usize; 3] = [2, 4, 8];

/// Special values of the limit cumulant and decay of exact cumulants at `b = d`.
pub fn check_limit_special_cases() -> CheckOutcome {
    outcome(9, "limit cumulant special cases", || {
        let mut fails = Failures::default();
        let mut checked = 0;
        let vals = [LimitValue::Finite(1), LimitValue::Finite(3), LimitValue::Infinite];
        for c in [rat(1, 1), rat(1, 2), rat(7, 3)] {
            for &b in &vals {
                for &d in &vals {
                    for m in 1..=2 {
                        checked += 1;
                        fails.check(limit_cumulant_gamma(m, b, d, &c)? == c, || format!("kappa{m}({b},{d})"));
                    }
                }
            }
            for m in 3..=8 {
                checked += 1;
                let k = limit_cumulant_gamma(m, LimitValue::Infinite, LimitValue::Infinite, &c)?;
                fails.check(k == int(0), || format!("kappa{m}(inf,inf) = {}", rational::format(&k)));
            }
        }
        let mut series = Vec::new();
        for m in [3usize, 4] {
            let mut ks: Vec<Rational> = Vec::new();
            for &k in &LIMIT_SIDES {
                let shape = MatrixShape::square(k * k)?;
                ks.push(exact_mixed_cumulant(&WickWord::new(shape, vec![E::gamma(k, k)?; m])?)?);
            }
            checked += 1;
            let abs: Vec<Rational> = ks.iter().map(num_traits::Signed::abs).collect();
            fails.check(abs.windows(2).all(|w| w[1] < w[0]), || {
                format!("kappa{m} at b=d={LIMIT_SIDES:?} not decreasing: {:?}", ks.iter().map(rational::format).collect::<Vec<_>>())
            });
            series.push(format!("kappa{m} = [{}]", ks.iter().map(rational::format).collect::<Vec<_>>().join(", ")));
        }
        let (ok, detail) = fails.finish(checked, "cases");
        Ok((ok, format!("{detail}; {}", series.join("; "))))
    })
}

/// Whether the library open-chain sum of an arbitrary word
/// equals the brute-force one.
pub fn open_chain_matches_oracle(word: &WickWord, pi: &crate::partitions::Pairing, a: usize, b: usize) -> Result<bool> {
    let side = word.shape().m;
    let perms = word.perms().to_vec();
    let maps: Vec<Map> = perms
        .iter()
        .map(|p| {
            let p = p.clone();
            Box::new(move |i: usize, j: usize| {
                let (x, y) = p.image(i - 1, j - 1);
                (x + 1, y + 1)
            }) as Map
        })
        .collect();
    let refs: Vec<&dyn Fn(usize, usize) -> (usize, usize)> = maps.iter().map(|m| &**m).collect();
    let mut partner = vec![0];
    partner.extend(pi.partners().iter().map(|x| x + 1));
    Ok(open_chain_sum(pi, word, a, b)? == oracle::open_chain_sum(side, word.shape().p, &refs, &partner, a, b))
}

/// The deterministic exact suite: checks 1–4, 6, 7, 9.
pub fn run_exact_suite() -> Vec<CheckOutcome> {
    vec![
        check_lcm_sandwich(),
        check_kappa2_identity(),
        check_segment_sums(),
        check_fast_vs_naive(),
        check_freeness_trend(),
        check_left_partial_bounds(),
        check_limit_special_cases(),
    ]
}

/// The statistical checks 5 and 8 at their reference sizes.
pub fn run_mc_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![check_mc_agreement(100_000, seed), check_variance_scaling(10_000, seed)]
}
