use ptlab_core::asymptotics::{
    empirical_density_probe, limit_cumulants_gamma, limit_moments_gamma, verdict_family, GridVar, LimitValue,
};
use ptlab_core::checks::{self, CheckOutcome};
use ptlab_core::literal::{parse_families, parse_grid, parse_permutation, parse_word_template};
use ptlab_core::montecarlo::{
    as_convergence_path, mc_covariance, mc_mixed_cumulant, mc_mixed_moments, EstimateReport, SamplerConfig,
};
use ptlab_core::perms::{
    count_agreements, count_joint, count_joint_second_slot, count_projection_agreement, gamma_lcm_data,
    EntryPermutation, MatrixShape, PermKind, Pattern, Projection,
};
use ptlab_core::rational::{self, int, Rational};
use ptlab_core::wick::{exact_mixed_cumulant, exact_mixed_moment, exact_trace_covariance, Limits, WickWord};
use serde_json::{json, Value};

use crate::output::{exact, float, float_text, Report};
use crate::{CliError, CliResult, ExactLimits, McArgs, ShapeArgs};

pub fn shape_of(args: &ShapeArgs) -> CliResult<MatrixShape> {
    Ok(MatrixShape::new(args.m, args.p.unwrap_or(args.m))?)
}

pub fn limits_of(args: &ExactLimits) -> Limits {
    let mut l = Limits::default();
    if let Some(b) = args.budget {
        l.enumeration = b;
    }
    if let Some(m) = args.max_order {
        l.max_order = m;
    }
    l
}

pub fn word_at(literal: &str, shape: MatrixShape, limits: Limits) -> CliResult<WickWord> {
    Ok(WickWord::new(shape, parse_word_template(literal, shape.m, None)?)?.with_limits(limits))
}

pub fn require_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage("Monte Carlo runs need an explicit --seed".into()))
}

fn sampler(shape: MatrixShape, mc: &McArgs) -> CliResult<Option<SamplerConfig>> {
    if !mc.mc {
        return Ok(None);
    }
    Ok(Some(SamplerConfig::new(shape, mc.samples, require_seed(mc.seed)?)?))
}

pub fn estimate_json(e: &EstimateReport) -> Value {
    json!({ "mean": float(e.mean), "std_error": float(e.std_error), "samples": e.samples, "seed": e.seed })
}

pub fn estimate_cells(e: Option<&EstimateReport>) -> Vec<String> {
    match e {
        Some(e) => vec![float_text(e.mean), float_text(e.std_error), e.samples.to_string(), e.seed.to_string()],
        None => vec![String::new(); 4],
    }
}

pub fn exact_cells(x: Option<&Rational>) -> Vec<String> {
    match x {
        Some(x) => vec![rational::format(x), float_text(rational::to_f64(x))],
        None => vec![String::new(); 2],
    }
}

fn block(p: &EntryPermutation) -> Option<(ptlab_core::perms::Side, usize)> {
    match p.kind() {
        PermKind::PartialTranspose(spec) => Some((spec.side, spec.d)),
        _ => None,
    }
}

pub fn count_json(m: usize, a: &str, b: &str, all: bool) -> CliResult<(Value, Vec<String>)> {
    let (s, t) = (parse_permutation(a, m, None)?, parse_permutation(b, m, None)?);
    let c = count_agreements(&s, &t)?;
    let j = count_joint(&s, &t)?;
    let fixed = EntryPermutation::compose(&s.invert(), &t)?.fixed_points();
    let mut doc = json!({ "M": m, "a": s.label(), "b": t.label(), "c": c, "j": j, "fixed_points": fixed });
    let mut row = vec![m.to_string(), s.label(), t.label(), c.to_string(), j.to_string()];
    match (block(&s), block(&t)) {
        (Some((side1, d1)), Some((side2, d2))) if side1 == side2 => {
            let lcm = gamma_lcm_data(d1 as u64, d2 as u64)?;
            let m2 = int((m * m) as u64);
            let big_l = int(lcm.big_l);
            let (lower, upper) = (&m2 / (&big_l * &big_l), &m2 / &big_l);
            doc["lcm"] = json!({ "Q": lcm.q, "L": lcm.big_l, "l": lcm.small_l, "swapped": lcm.swapped });
            doc["bounds"] = json!({ "lower": exact(&lower), "upper": exact(&upper) });
            row.extend([lcm.q.to_string(), lcm.big_l.to_string(), lcm.small_l.to_string()]);
            row.extend([rational::format(&lower), rational::format(&upper)]);
        }
        _ => {
            doc["lcm"] = Value::Null;
            doc["bounds"] = Value::Null;
            row.extend(vec![String::new(); 5]);
        }
    }
    if all {
        use Projection::{First, Second};
        let c2 = count_projection_agreement(&s, &t, Second, First, Pattern::ShareMiddle)?;
        let c3 = count_projection_agreement(&s, &t, First, Second, Pattern::ShareMiddle)?;
        doc["c1"] = json!(j);
        doc["c2"] = json!(c2);
        doc["c3"] = json!(c3);
        let joint = count_joint_second_slot(&s, &t)?;
        let ff = count_projection_agreement(&s, &t, First, First, Pattern::ShareSecondSlot)?;
        let ss = count_projection_agreement(&s, &t, Second, Second, Pattern::ShareSecondSlot)?;
        doc["second_slot"] = json!({ "joint": joint, "first_first": ff, "second_second": ss });
        row.extend([j, c2, c3, joint, ff, ss].iter().map(u64::to_string));
    } else {
        row.extend(vec![String::new(); 6]);
    }
    Ok((doc, row))
}

pub const COUNT_HEADER: [&str; 16] = [
    "M", "a", "b", "c", "j", "Q", "L", "l", "lower", "upper", "c1", "c2", "c3", "ss_joint", "ss_first_first",
    "ss_second_second",
];

pub fn count(m: usize, a: &str, b: &str, all: bool) -> CliResult<Report> {
    let (json, row) = count_json(m, a, b, all)?;
    Ok(Report { json, header: COUNT_HEADER.to_vec(), rows: vec![row] })
}

pub const VALUE_HEADER: [&str; 9] = ["word", "M", "P", "exact", "exact_float", "mc_mean", "mc_std_error", "samples", "seed"];

pub fn value_report(
    label: String,
    shape: MatrixShape,
    ex: Option<Rational>,
    est: Option<EstimateReport>,
    extra: Option<(&str, Value)>,
) -> Report {
    let mut doc = json!({ "word": label, "M": shape.m, "P": shape.p });
    if let Some(x) = &ex {
        doc["exact"] = json!({ "value": exact(x), "float": float(rational::to_f64(x)) });
    }
    if let Some(e) = &est {
        doc["mc"] = estimate_json(e);
    }
    if let Some((k, v)) = extra {
        doc["exact"][k] = v;
    }
    let mut row = vec![label, shape.m.to_string(), shape.p.to_string()];
    row.extend(exact_cells(ex.as_ref()));
    row.extend(estimate_cells(est.as_ref()));
    Report { json: doc, header: VALUE_HEADER.to_vec(), rows: vec![row] }
}

pub fn moment(
    shape: &ShapeArgs,
    word: &str,
    exact_flag: bool,
    breakdown: bool,
    limits: &ExactLimits,
    mc: &McArgs,
) -> CliResult<Report> {
    let shape = shape_of(shape)?;
    let w = word_at(word, shape, limits_of(limits))?;
    let cfg = sampler(shape, mc)?;
    let report = if exact_flag || !mc.mc { Some(exact_mixed_moment(&w)?) } else { None };
    let est = match cfg {
        Some(c) => Some(mc_mixed_moments(std::slice::from_ref(&w), &c)?[0]),
        None => None,
    };
    let terms = report.as_ref().filter(|_| breakdown).map(|r| {
        Value::Array(
            r.per_pairing
                .iter()
                .map(|t| {
                    json!({ "pairing": t.pairing.to_string(), "count": t.count, "value": exact(&t.value) })
                })
                .collect(),
        )
    });
    let mut out = value_report(w.label(), shape, report.as_ref().map(|r| r.total.clone()), est, terms.map(|t| ("pairings", t)));
    if let (true, Some(r)) = (breakdown, &report) {
        out.header = vec!["pairing", "count", "value", "float"];
        out.rows = r
            .per_pairing
            .iter()
            .map(|t| vec![t.pairing.to_string(), t.count.to_string(), rational::format(&t.value), float_text(rational::to_f64(&t.value))])
            .collect();
    }
    Ok(out)
}

pub fn cumulant(shape: &ShapeArgs, word: &str, exact_flag: bool, limits: &ExactLimits, mc: &McArgs) -> CliResult<Report> {
    let shape = shape_of(shape)?;
    let w = word_at(word, shape, limits_of(limits))?;
    let cfg = sampler(shape, mc)?;
    let ex = if exact_flag || !mc.mc { Some(exact_mixed_cumulant(&w)?) } else { None };
    let est = match cfg {
        Some(c) => Some(mc_mixed_cumulant(&w, &c)?),
        None => None,
    };
    Ok(value_report(w.label(), shape, ex, est, None))
}

pub fn covariance(
    shape: &ShapeArgs,
    word1: &str,
    word2: &str,
    exact_flag: bool,
    limits: &ExactLimits,
    mc: &McArgs,
) -> CliResult<Report> {
    let shape = shape_of(shape)?;
    let lim = limits_of(limits);
    let (w1, w2) = (word_at(word1, shape, lim)?, word_at(word2, shape, lim)?);
    let cfg = sampler(shape, mc)?;
    let ex = if exact_flag || !mc.mc { Some(exact_trace_covariance(&w1, &w2)?) } else { None };
    let est = match cfg {
        Some(c) => Some(mc_covariance(&w1, &w2, &c)?),
        None => None,
    };
    Ok(value_report(format!("{};{}", w1.label(), w2.label()), shape, ex, est, None))
}

pub fn limit(b: &str, d: &str, c: &str, orders: usize) -> CliResult<Report> {
    let (b, d): (LimitValue, LimitValue) = (b.parse()?, d.parse()?);
    let c = rational::parse(c).ok_or_else(|| CliError::Usage(format!("bad rational {c:?}")))?;
    let ks = limit_cumulants_gamma(orders, b, d, &c)?;
    let ms = limit_moments_gamma(orders, b, d, &c)?;
    let entry = |k: usize, x: &Rational| json!({ "order": k + 1, "value": exact(x), "float": float(rational::to_f64(x)) });
    let doc = json!({
        "b": b.to_string(),
        "d": d.to_string(),
        "c": exact(&c),
        "cumulants": ks.iter().enumerate().map(|(k, x)| entry(k, x)).collect::<Vec<_>>(),
        "moments": ms.iter().enumerate().map(|(k, x)| entry(k, x)).collect::<Vec<_>>(),
    });
    let rows = ks
        .iter()
        .zip(&ms)
        .enumerate()
        .map(|(k, (x, y))| {
            let mut r = vec![(k + 1).to_string()];
            r.extend(exact_cells(Some(x)));
            r.extend(exact_cells(Some(y)));
            r
        })
        .collect();
    Ok(Report { json: doc, header: vec!["order", "cumulant", "cumulant_float", "moment", "moment_float"], rows })
}

pub fn verdict(families: &str, grid: &str, probe: bool) -> CliResult<Report> {
    let grid = parse_grid(grid)?;
    let fams = parse_families(families, &grid)?;
    let v = verdict_family(&fams)?;
    let mut doc = json!({ "grid": grid.to_string(), "families": v.labels, "free": v.free });
    doc["pairs"] = Value::Array(
        v.pairs
            .iter()
            .map(|(k, l, x)| {
                json!({ "k": k, "l": l, "free": x.free, "rule": x.rule.to_string(), "witness": x.witness, "weak": x.weak })
            })
            .collect(),
    );
    if probe {
        let mut probes = Vec::new();
        for (k, l, _) in &v.pairs {
            let p = empirical_density_probe(&fams[*k], &fams[*l])?;
            probes.push(json!({
                "k": k,
                "l": l,
                "trend": format!("{:?}", p.trend),
                "corroboration": {
                    "free": p.corroboration.free,
                    "rule": p.corroboration.rule.to_string(),
                    "witness": p.corroboration.witness,
                    "weak": p.corroboration.weak,
                },
                "points": p.points.iter().map(|q| json!({
                    "n": q.n, "M": q.m, "agreements": q.agreements, "fixed_points": q.fixed_points, "density": exact(&q.density), "density_float": float(rational::to_f64(&q.density))
                })).collect::<Vec<_>>(),
            }));
        }
        doc["probes"] = Value::Array(probes);
    }
    let rows = v
        .pairs
        .iter()
        .map(|(k, l, x)| {
            vec![
                k.to_string(),
                l.to_string(),
                v.labels[*k].clone(),
                v.labels[*l].clone(),
                x.free.to_string(),
                x.rule.to_string(),
                x.weak.to_string(),
                x.witness.clone(),
            ]
        })
        .collect();
    Ok(Report { json: doc, header: vec!["k", "l", "family_k", "family_l", "free", "rule", "weak", "witness"], rows })
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    words: &[String],
    m: Option<usize>,
    p: Option<usize>,
    grid: Option<&str>,
    samples: usize,
    seed: Option<u64>,
    with_exact: bool,
    path: bool,
) -> CliResult<Report> {
    let seed = require_seed(seed)?;
    let shapes: Vec<MatrixShape> = match (grid, m) {
        (Some(g), _) => {
            let g = parse_grid(g)?;
            if g.var != GridVar::M {
                return Err(CliError::Usage("simulate grids range over M, e.g. M=8,16,32".into()));
            }
            g.values.iter().map(|&v| MatrixShape::new(v as usize, p.unwrap_or(v as usize))).collect::<Result<_, _>>()?
        }
        (None, Some(m)) => vec![MatrixShape::new(m, p.unwrap_or(m))?],
        (None, None) => return Err(CliError::Usage("simulate needs --M or --grid".into())),
    };
    if path {
        let mut rows = Vec::new();
        let mut docs = Vec::new();
        for lit in words {
            let ws = shapes.iter().map(|&s| word_at(lit, s, Limits::default())).collect::<CliResult<Vec<_>>>()?;
            let pts = as_convergence_path(&ws, seed)?;
            for (w, pt) in ws.iter().zip(&pts) {
                rows.push(vec![w.label(), pt.m.to_string(), w.shape().p.to_string(), float_text(pt.value)]);
            }
            docs.push(json!({
                "word": lit,
                "points": pts.iter().zip(&ws).map(|(pt, w)| json!({ "M": pt.m, "P": w.shape().p, "value": float(pt.value) })).collect::<Vec<_>>(),
            }));
        }
        return Ok(Report { json: json!({ "seed": seed, "paths": docs }), header: vec!["word", "M", "P", "value"], rows });
    }
    let mut rows = Vec::new();
    let mut docs = Vec::new();
    for &shape in &shapes {
        let ws = words.iter().map(|lit| word_at(lit, shape, Limits::default())).collect::<CliResult<Vec<_>>>()?;
        let ests = mc_mixed_moments(&ws, &SamplerConfig::new(shape, samples, seed)?)?;
        for (w, e) in ws.iter().zip(&ests) {
            let ex = if with_exact { Some(exact_mixed_moment(w)?.total) } else { None };
            let mut doc = json!({ "word": w.label(), "M": shape.m, "P": shape.p, "mc": estimate_json(e) });
            if let Some(x) = &ex {
                doc["exact"] = json!({ "value": exact(x), "float": float(rational::to_f64(x)) });
            }
            docs.push(doc);
            let mut row = vec![w.label(), shape.m.to_string(), shape.p.to_string()];
            row.extend(exact_cells(ex.as_ref()));
            row.extend(estimate_cells(Some(e)));
            rows.push(row);
        }
    }
    Ok(Report { json: Value::Array(docs), header: VALUE_HEADER.to_vec(), rows })
}

fn outcome_json(o: &CheckOutcome) -> Value {
    json!({ "id": o.id, "name": o.name, "passed": o.passed, "detail": o.detail })
}

pub fn selftest(mc: bool, seed: Option<u64>) -> CliResult<Report> {
    let mut outcomes = checks::run_exact_suite();
    if mc {
        outcomes.extend(checks::run_mc_suite(require_seed(seed)?));
        outcomes.sort_by_key(|o| o.id);
    }
    for o in &outcomes {
        eprintln!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let failed = outcomes.len() - passed;
    eprintln!("selftest: {passed} passed, {failed} failed");
    let report = Report {
        json: json!({ "passed": passed, "failed": failed, "checks": outcomes.iter().map(outcome_json).collect::<Vec<_>>() }),
        header: vec!["id", "name", "passed", "detail"],
        rows: outcomes
            .iter()
            .map(|o| vec![o.id.to_string(), o.name.to_string(), o.passed.to_string(), o.detail.clone()])
            .collect(),
    };
    if failed > 0 {
        Err(CliError::SelftestFailed(report))
    } else {
        Ok(report)
    }
}
