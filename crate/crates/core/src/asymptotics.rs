//! Limit cumulants of partial transposes and the freeness verdict engine.
//!
//! Verdicts are decided on declared limits of the block parameters. Finite
//! samples of the sequences only corroborate, except for the one case where
//! the freeness criterion depends on more than the limits: two inner block
//! sizes that both diverge, where the lcm ratio is evaluated on the samples.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::Serialize;

use crate::partitions::univariate_moments;
use crate::perms::{count_agreements, EntryPermutation, Side};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Declared limit of a positive integer sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LimitValue {
    Finite(u64),
    Infinite,
}

impl LimitValue {
    pub fn finite(v: u64) -> Result<Self> {
        if v == 0 {
            return Err(Error::domain("finite limits are positive integers"));
        }
        Ok(Self::Finite(v))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// `∞·x = ∞`.
    pub fn times(self, other: Self) -> Self {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a.saturating_mul(b)),
            _ => Self::Infinite,
        }
    }

    /// `x^{exp}` for `exp < 0`, with `∞^{exp} = 0`.
    pub fn neg_power(self, exp: i64) -> Rational {
        debug_assert!(exp < 0);
        match self {
            Self::Finite(v) => rational::pow(&rational::int(v), exp),
            Self::Infinite => rational::zero(),
        }
    }
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for LimitValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Self::Infinite);
        }
        let v = s.parse::<u64>().map_err(|_| Error::parse(format!("bad limit {s:?}")))?;
        Self::finite(v).map_err(|_| Error::parse(format!("limits must be >= 1, got {s:?}")))
    }
}

/// `κ_m` of the limit distribution of `W^{Γ(b,d)}` with `P/M → c`.
///
/// `m = 1, 2` give `c`; for `m ≥ 3` the odd case is `c(d^{1−m} + b^{1−m})` and
/// the even case `c(d^{2−m} + b^{2−m})`.
pub fn limit_cumulant_gamma(m: usize, b: LimitValue, d: LimitValue, c: &Rational) -> Result<Rational> {
    if m == 0 {
        return Err(Error::domain("cumulant orders start at 1"));
    }
    if m <= 2 {
        return Ok(c.clone());
    }
    let exp = if m % 2 == 1 { 1 - m as i64 } else { 2 - m as i64 };
    Ok(c * (d.neg_power(exp) + b.neg_power(exp)))
}

/// Limit cumulants `κ₁..κ_orders`.
pub fn limit_cumulants_gamma(orders: usize, b: LimitValue, d: LimitValue, c: &Rational) -> Result<Vec<Rational>> {
    (1..=orders).map(|m| limit_cumulant_gamma(m, b, d, c)).collect()
}

/// Limit moments `m_k = Σ_{γ ∈ NC(k)} Π_{B ∈ γ} κ_{|B|}`, `k ≤ orders`.
pub fn limit_moments_gamma(orders: usize, b: LimitValue, d: LimitValue, c: &Rational) -> Result<Vec<Rational>> {
    univariate_moments(&limit_cumulants_gamma(orders, b, d, c)?)
}

/// The grid variable: either an abstract index `N` or the matrix side `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridVar {
    N,
    M,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub var: GridVar,
    pub values: Vec<u64>,
}

impl Grid {
    pub fn new(var: GridVar, values: Vec<u64>) -> Result<Self> {
        if values.is_empty() || values.contains(&0) {
            return Err(Error::domain("grids need positive values"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid values must be strictly increasing"));
        }
        Ok(Self { var, values })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.values.iter().map(|x| x.to_string()).collect();
        write!(f, "{}={}", if self.var == GridVar::N { "N" } else { "M" }, v.join(","))
    }
}

/// Block-parameter expressions over the grid variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GridExpr {
    Const(u64),
    /// The grid variable raised to a positive power.
    Power(u32),
    /// `2^N`.
    TwoPow,
    /// `M/k`.
    SideOver(u64),
    /// `inf`: whatever completes the product to `M`.
    Complement,
}

impl GridExpr {
    pub fn declared_limit(self) -> LimitValue {
        match self {
            Self::Const(k) => LimitValue::Finite(k),
            _ => LimitValue::Infinite,
        }
    }

    fn eval(self, var: GridVar, n: u64) -> Result<Option<u64>> {
        let overflow = || Error::domain(format!("grid expression {self} overflows at {n}"));
        Ok(match self {
            Self::Const(k) => Some(k),
            Self::Power(p) => Some(n.checked_pow(p).ok_or_else(overflow)?),
            Self::TwoPow => Some(1u64.checked_shl(n as u32).filter(|_| n < 64).ok_or_else(overflow)?),
            Self::SideOver(k) => {
                if var != GridVar::M {
                    return Err(Error::domain("M/k needs a grid over M"));
                }
                if !n.is_multiple_of(k) {
                    return Err(Error::domain(format!("M/{k} is not an integer at M = {n}")));
                }
                Some(n / k)
            }
            Self::Complement => None,
        })
    }
}

impl fmt::Display for GridExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(k) => write!(f, "{k}"),
            Self::Power(1) => f.write_str("N"),
            Self::Power(p) => write!(f, "N^{p}"),
            Self::TwoPow => f.write_str("2^N"),
            Self::SideOver(k) => write!(f, "M/{k}"),
            Self::Complement => f.write_str("inf"),
        }
    }
}

impl FromStr for GridExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::parse(format!("bad grid expression {s:?}"));
        let positive = |t: &str| t.trim().parse::<u64>().ok().filter(|&v| v > 0).ok_or_else(bad);
        let is_var = |t: &str| matches!(t.trim(), "N" | "M" | "k" | "n");
        if s == "inf" {
            return Ok(Self::Complement);
        }
        if let Some(k) = s.strip_prefix("const:") {
            return Ok(Self::Const(positive(k)?));
        }
        if let Ok(k) = s.parse::<u64>() {
            return if k > 0 { Ok(Self::Const(k)) } else { Err(bad()) };
        }
        if is_var(s) {
            return Ok(Self::Power(1));
        }
        if let Some((base, exp)) = s.split_once('^') {
            if base.trim() == "2" && is_var(exp) {
                return Ok(Self::TwoPow);
            }
            if base.trim() == "2" {
                let e = exp.trim().parse::<u32>().map_err(|_| bad())?;
                return 1u64.checked_shl(e).filter(|_| e < 64).map(Self::Const).ok_or_else(bad);
            }
            if is_var(base) {
                let p = exp.trim().parse::<u32>().ok().filter(|&p| p > 0).ok_or_else(bad)?;
                return Ok(Self::Power(p));
            }
            return Err(bad());
        }
        if let Some((num, den)) = s.split_once('/') {
            if num.trim() == "M" {
                return Ok(Self::SideOver(positive(den)?));
            }
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilySample {
    pub n: u64,
    pub b: u64,
    pub d: u64,
    pub m: u64,
}

/// A declared sequence `(b_N, d_N)` with a side and sampled values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeFamily {
    pub side: Side,
    pub b_limit: LimitValue,
    pub d_limit: LimitValue,
    pub b_expr: Option<GridExpr>,
    pub d_expr: Option<GridExpr>,
    pub samples: Vec<FamilySample>,
}

impl ShapeFamily {
    /// A family given directly by declared limits and samples.
    pub fn new(side: Side, b_limit: LimitValue, d_limit: LimitValue, samples: Vec<FamilySample>) -> Result<Self> {
        let f = Self { side, b_limit, d_limit, b_expr: None, d_expr: None, samples };
        f.validate()?;
        Ok(f)
    }

    /// A family from grid expressions, sampled along `grid`.
    pub fn from_exprs(side: Side, b: GridExpr, d: GridExpr, grid: &Grid) -> Result<Self> {
        if b == GridExpr::Complement && d == GridExpr::Complement {
            return Err(Error::domain("at most one of b, d may be inf"));
        }
        let mut samples = Vec::with_capacity(grid.values.len());
        for &n in &grid.values {
            let side_m = (grid.var == GridVar::M).then_some(n);
            let (bv, dv) = (b.eval(grid.var, n)?, d.eval(grid.var, n)?);
            let complete = |known: u64| -> Result<u64> {
                let m = side_m.ok_or_else(|| Error::domain("inf needs a grid over M"))?;
                if m % known != 0 {
                    return Err(Error::domain(format!("{known} does not divide M = {m}")));
                }
                Ok(m / known)
            };
            let (bv, dv) = match (bv, dv) {
                (Some(x), Some(y)) => (x, y),
                (Some(x), None) => (x, complete(x)?),
                (None, Some(y)) => (complete(y)?, y),
                (None, None) => unreachable!(),
            };
            let m = bv.checked_mul(dv).ok_or_else(|| Error::domain("b·d overflows"))?;
            if let Some(sm) = side_m {
                if sm != m {
                    return Err(Error::domain(format!("b·d = {m} differs from M = {sm}")));
                }
            }
            samples.push(FamilySample { n, b: bv, d: dv, m });
        }
        let f = Self {
            side,
            b_limit: b.declared_limit(),
            d_limit: d.declared_limit(),
            b_expr: Some(b),
            d_expr: Some(d),
            samples,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn label(&self) -> String {
        let prefix = if self.side == Side::Right { "G" } else { "LG" };
        match (self.b_expr, self.d_expr) {
            (Some(b), Some(d)) => format!("{prefix}({b},{d})"),
            _ => format!("{prefix}({},{})", self.b_limit, self.d_limit),
        }
    }

    fn validate(&self) -> Result<()> {
        for s in &self.samples {
            if s.b == 0 || s.d == 0 || s.b.checked_mul(s.d) != Some(s.m) {
                return Err(Error::domain(format!("sample at N = {} violates b·d = M", s.n)));
            }
        }
        if self.samples.windows(2).any(|w| w[1].m <= w[0].m) {
            return Err(Error::domain("sampled M_N must be strictly increasing"));
        }
        for (lim, vals) in [
            (self.b_limit, self.samples.iter().map(|s| s.b).collect::<Vec<_>>()),
            (self.d_limit, self.samples.iter().map(|s| s.d).collect()),
        ] {
            match lim {
                LimitValue::Finite(k) => {
                    if vals.last().is_some_and(|&v| v != k) {
                        return Err(Error::domain(format!("samples do not settle at the declared limit {k}")));
                    }
                }
                LimitValue::Infinite => {
                    if vals.windows(2).any(|w| w[1] < w[0]) {
                        return Err(Error::domain("samples of a divergent parameter must be nondecreasing"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The entry permutation at sample index `k`.
    pub fn permutation(&self, k: usize) -> Result<EntryPermutation> {
        let s = self.samples.get(k).ok_or_else(|| Error::domain("sample index out of range"))?;
        let (b, d) = (s.b as usize, s.d as usize);
        match self.side {
            Side::Right => EntryPermutation::gamma(b, d),
            Side::Left => EntryPermutation::left_gamma(b, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    /// lcm ratio of inner block sizes diverges.
    W1,
    /// Cross products `d·B`, `b·D` diverge (right against left).
    LTR,
    /// Agreement density vanishes.
    #[serde(rename = "C49-density")]
    AgreementDensity,
    /// Fixed-point density of an induced point permutation vanishes.
    SN,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::W1 => "W1",
            Self::LTR => "LTR",
            Self::AgreementDensity => "C49-density",
            Self::SN => "SN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub free: bool,
    pub rule: Rule,
    pub witness: String,
    /// Set when the decision rests on a finite-sample trend.
    pub weak: bool,
}

fn check_same_sampler(f: &ShapeFamily, g: &ShapeFamily) -> Result<()> {
    let key = |x: &ShapeFamily| x.samples.iter().map(|s| (s.n, s.m)).collect::<Vec<_>>();
    if key(f) != key(g) {
        return Err(Error::domain("families are sampled on different M_N sequences"));
    }
    Ok(())
}

fn lcm_ratio(d1: u64, d2: u64) -> u64 {
    d1.lcm(&d2) / d1.min(d2)
}

fn right_right(f: &ShapeFamily, g: &ShapeFamily) -> Verdict {
    match (f.d_limit, g.d_limit) {
        (LimitValue::Finite(a), LimitValue::Finite(b)) => {
            let l = lcm_ratio(a, b);
            Verdict { free: false, rule: Rule::W1, witness: format!("lim L = {l}"), weak: false }
        }
        (LimitValue::Finite(_), LimitValue::Infinite) | (LimitValue::Infinite, LimitValue::Finite(_)) => {
            Verdict { free: true, rule: Rule::W1, witness: "lim L = inf".into(), weak: false }
        }
        (LimitValue::Infinite, LimitValue::Infinite) => {
            if f.d_expr.is_some() && f.d_expr == g.d_expr {
                return Verdict { free: false, rule: Rule::W1, witness: "L = 1 identically".into(), weak: false };
            }
            let series: Vec<u64> = f.samples.iter().zip(&g.samples).map(|(x, y)| lcm_ratio(x.d, y.d)).collect();
            let text = series.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let (first, last) = (series.first().copied().unwrap_or(1), series.last().copied().unwrap_or(1));
            let nondecreasing = series.windows(2).all(|w| w[1] >= w[0]);
            if nondecreasing && last > first {
                Verdict {
                    free: true,
                    rule: Rule::W1,
                    witness: format!("L_N = [{text}]"),
                    weak: last < 2 * first,
                }
            } else {
                Verdict { free: false, rule: Rule::W1, witness: format!("L_N = [{text}]"), weak: true }
            }
        }
    }
}

fn right_left(right: &ShapeFamily, left: &ShapeFamily) -> Verdict {
    let db = right.d_limit.times(left.b_limit);
    let bd = right.b_limit.times(left.d_limit);
    Verdict {
        free: db.is_infinite() && bd.is_infinite(),
        rule: Rule::LTR,
        witness: format!("lim d·B = {db}, lim b·D = {bd}"),
        weak: false,
    }
}

/// Pairwise freeness verdict for two families of (left) partial transposes.
pub fn verdict_pair(f: &ShapeFamily, g: &ShapeFamily) -> Result<Verdict> {
    check_same_sampler(f, g)?;
    Ok(match (f.side, g.side) {
        (Side::Right, Side::Right) | (Side::Left, Side::Left) => right_right(f, g),
        (Side::Right, Side::Left) => right_left(f, g),
        (Side::Left, Side::Right) => right_left(g, f),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyVerdict {
    pub labels: Vec<String>,
    /// Upper triangle `(k, l, verdict)` with `k < l`.
    pub pairs: Vec<(usize, usize, Verdict)>,
    pub free: bool,
}

pub fn verdict_family(families: &[ShapeFamily]) -> Result<FamilyVerdict> {
    if families.len() < 2 {
        return Err(Error::domain("a family verdict needs at least two families"));
    }
    let mut pairs = Vec::new();
    for k in 0..families.len() {
        for l in k + 1..families.len() {
            pairs.push((k, l, verdict_pair(&families[k], &families[l])?));
        }
    }
    let free = pairs.iter().all(|(_, _, v)| v.free);
    Ok(FamilyVerdict { labels: families.iter().map(|f| f.label()).collect(), pairs, free })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Decreasing,
    Constant,
    Increasing,
    Mixed,
}

/// Strict monotone trend of a series.
pub fn trend<T: PartialOrd>(series: &[T]) -> Trend {
    if series.windows(2).all(|w| w[1] == w[0]) {
        Trend::Constant
    } else if series.windows(2).all(|w| w[1] < w[0]) {
        Trend::Decreasing
    } else if series.windows(2).all(|w| w[1] > w[0]) {
        Trend::Increasing
    } else {
        Trend::Mixed
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityPoint {
    pub n: u64,
    pub m: u64,
    pub agreements: u64,
    /// Fixed points of `σ⁻¹∘τ`; equal to `agreements`.
    pub fixed_points: u64,
    #[serde(with = "rational::serde_str")]
    pub density: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityProbe {
    pub points: Vec<DensityPoint>,
    pub trend: Trend,
    /// Density-based corroboration; never replaces [`verdict_pair`].
    pub corroboration: Verdict,
}

/// Exact `𝔠(σ_N, τ_N)/M_N²` along the sampler grid.
pub fn empirical_density_probe(f: &ShapeFamily, g: &ShapeFamily) -> Result<DensityProbe> {
    check_same_sampler(f, g)?;
    let mut points = Vec::new();
    for k in 0..f.samples.len() {
        let (s, t) = (f.permutation(k)?, g.permutation(k)?);
        let agreements = count_agreements(&s, &t)?;
        let fixed_points = EntryPermutation::compose(&s.invert(), &t)?.fixed_points();
        let m = f.samples[k].m;
        points.push(DensityPoint {
            n: f.samples[k].n,
            m,
            agreements,
            fixed_points,
            density: rational::rat(agreements as i64, 1) / rational::int(m * m),
        });
    }
    let densities: Vec<Rational> = points.iter().map(|p| p.density.clone()).collect();
    let tr = trend(&densities);
    let text = densities.iter().map(rational::format).collect::<Vec<_>>().join(",");
    let corroboration = Verdict {
        free: tr == Trend::Decreasing || densities.iter().all(|d| *d == rational::zero()),
        rule: Rule::AgreementDensity,
        witness: format!("density = [{text}]"),
        weak: true,
    };
    Ok(DensityProbe { points, trend: tr, corroboration })
}

/// Fixed-point counts of point permutations `θ_N ∈ S(N)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaFamily {
    /// `(N, #fixed points of θ_N)`.
    pub samples: Vec<(u64, u64)>,
    /// Declared `lim #fix/N = 0`, if known.
    pub declared_vanishing: Option<bool>,
}

impl ThetaFamily {
    pub fn from_permutations(thetas: &[Vec<usize>]) -> Result<Self> {
        let mut samples = Vec::new();
        for t in thetas {
            let n = t.len();
            let mut seen = vec![false; n];
            for &x in t {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::domain("not a permutation"));
                }
            }
            let fixed = t.iter().enumerate().filter(|(k, &x)| *k == x).count();
            samples.push((n as u64, fixed as u64));
        }
        Ok(Self { samples, declared_vanishing: None })
    }
}

/// Freeness of `W` and `W^σ` for `σ(i,j) = (θ(i), θ(j))`.
pub fn induced_perm_verdict(theta: &ThetaFamily) -> Result<Verdict> {
    if let Some(v) = theta.declared_vanishing {
        return Ok(Verdict {
            free: v,
            rule: Rule::SN,
            witness: format!("declared lim fix/N {} 0", if v { "=" } else { ">" }),
            weak: false,
        });
    }
    if theta.samples.is_empty() || theta.samples.iter().any(|&(n, f)| n == 0 || f > n) {
        return Err(Error::domain("fixed-point samples need 0 <= fix <= N, N >= 1"));
    }
    let densities: Vec<Rational> =
        theta.samples.iter().map(|&(n, f)| rational::rat(f as i64, 1) / rational::int(n)).collect();
    let text = densities.iter().map(rational::format).collect::<Vec<_>>().join(",");
    let all_zero = densities.iter().all(|d| *d == rational::zero());
    let free = all_zero || trend(&densities) == Trend::Decreasing;
    Ok(Verdict { free, rule: Rule::SN, witness: format!("fix/N = [{text}]"), weak: !all_zero })
}
