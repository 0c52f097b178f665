//! Text syntax for permutations, words, families and grids.
//!
//! * permutations: `I`, `T`, `G(b,d)`, `LG(b,d)`, `D(file)`, `P(file)`
//! * words: permutation literals separated by top-level commas
//! * families: `G(x,y)` / `LG(x,y)` separated by `;`, with `x`, `y` grid expressions
//! * grids: `N=2,4,8` or `M=8,16,32`

use std::fs;
use std::path::{Path, PathBuf};

use crate::asymptotics::{Grid, GridExpr, GridVar, ShapeFamily};
use crate::perms::{EntryPermutation, Side};
use crate::{Error, Result};

/// Splits on `sep` outside parentheses.
pub fn split_top_level(s: &str, sep: char) -> Result<Vec<String>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::parse(format!("unbalanced parentheses in {s:?}")));
                }
            }
            _ => {}
        }
        if ch == sep && depth == 0 {
            parts.push(std::mem::take(&mut cur).trim().to_string());
        } else {
            cur.push(ch);
        }
    }
    if depth != 0 {
        return Err(Error::parse(format!("unbalanced parentheses in {s:?}")));
    }
    parts.push(cur.trim().to_string());
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::parse(format!("empty item in {s:?}")));
    }
    Ok(parts)
}

/// `NAME(a,b)` → `("NAME", ["a", "b"])`.
fn call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    Some((s[..open].trim(), inner.split(',').map(str::trim).collect()))
}

fn resolve(file: &str, base: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(file);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}

fn read_numbers(path: &Path) -> Result<Vec<Vec<usize>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::parse(format!("bad number {t:?} in {}", path.display()))))
                .collect()
        })
        .collect()
}

/// A point permutation of `[M]`, one 1-based image per line.
pub fn read_point_permutation(path: &Path) -> Result<Vec<usize>> {
    read_numbers(path)?
        .into_iter()
        .map(|row| match row.as_slice() {
            [x] if *x >= 1 => Ok(x - 1),
            _ => Err(Error::parse(format!("{}: expected one 1-based image per line", path.display()))),
        })
        .collect()
}

/// An entry table, `M²` lines `i j i' j'` (1-based).
pub fn read_entry_table(path: &Path, m: usize) -> Result<EntryPermutation> {
    let rows = read_numbers(path)?;
    if rows.len() != m * m {
        return Err(Error::parse(format!("{}: expected {} lines, found {}", path.display(), m * m, rows.len())));
    }
    let mut images = vec![None; m * m];
    for row in rows {
        let [i, j, a, b] = row[..] else {
            return Err(Error::parse(format!("{}: expected `i j i' j'` lines", path.display())));
        };
        if [i, j, a, b].iter().any(|&x| x == 0 || x > m) {
            return Err(Error::domain(format!("{}: index outside [{m}]", path.display())));
        }
        let slot = &mut images[(i - 1) * m + (j - 1)];
        if slot.is_some() {
            return Err(Error::domain(format!("{}: ({i}, {j}) listed twice", path.display())));
        }
        *slot = Some((a - 1, b - 1));
    }
    let images: Vec<(usize, usize)> = images.into_iter().map(|x| x.unwrap()).collect();
    EntryPermutation::from_table(m, &images)
}

fn positive(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(|| Error::parse(format!("bad {what} {s:?}")))
}

/// Parses one permutation literal on `[M]²`; relative files resolve against `base`.
pub fn parse_permutation(s: &str, m: usize, base: Option<&Path>) -> Result<EntryPermutation> {
    let s = s.trim();
    match s {
        "I" => return EntryPermutation::identity(m),
        "T" => return EntryPermutation::transpose(m),
        _ => {}
    }
    let (name, args) = call(s).ok_or_else(|| Error::parse(format!("bad permutation literal {s:?}")))?;
    let perm = match (name, args.as_slice()) {
        ("G" | "LG", [b, d]) => {
            let (b, d) = (positive(b, "block count")?, positive(d, "block size")?);
            if b * d != m {
                return Err(Error::domain(format!("{s}: b·d = {} but M = {m}", b * d)));
            }
            if name == "G" {
                EntryPermutation::gamma(b, d)?
            } else {
                EntryPermutation::left_gamma(b, d)?
            }
        }
        ("D", [file]) => {
            let theta = read_point_permutation(&resolve(file, base))?;
            if theta.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: theta.len() });
            }
            EntryPermutation::induced_diagonal(&theta)?
        }
        ("P", [file]) => read_entry_table(&resolve(file, base), m)?,
        _ => return Err(Error::parse(format!("bad permutation literal {s:?}"))),
    };
    Ok(perm)
}

/// Parses a comma-separated word of permutation literals.
pub fn parse_word(s: &str, m: usize, base: Option<&Path>) -> Result<Vec<EntryPermutation>> {
    split_top_level(s, ',')?.iter().map(|p| parse_permutation(p, m, base)).collect()
}

/// A word whose `G`/`LG` arguments may be grid expressions in `M`, such as
/// `G(2,M/2),G(M/2,2)`, instantiated at side `m`.
pub fn parse_word_template(s: &str, m: usize, base: Option<&Path>) -> Result<Vec<EntryPermutation>> {
    let grid = Grid::new(GridVar::M, vec![m as u64])?;
    split_top_level(s, ',')?
        .iter()
        .map(|item| match call(item) {
            Some((name @ ("G" | "LG"), args)) if args.len() == 2 => {
                let side = if name == "G" { Side::Right } else { Side::Left };
                let fam = ShapeFamily::from_exprs(side, args[0].parse()?, args[1].parse()?, &grid)?;
                fam.permutation(0)
            }
            _ => parse_permutation(item, m, base),
        })
        .collect()
}

/// `N=2,4,8` or `M=8,16`.
pub fn parse_grid(s: &str) -> Result<Grid> {
    let (var, values) = s.split_once('=').ok_or_else(|| Error::parse(format!("bad grid {s:?}")))?;
    let var = match var.trim() {
        "N" | "k" | "n" => GridVar::N,
        "M" => GridVar::M,
        other => return Err(Error::parse(format!("unknown grid variable {other:?}"))),
    };
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|_| Error::parse(format!("bad grid value {v:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(var, values)
}

/// One family literal `G(x,y)` / `LG(x,y)`.
pub fn parse_family(s: &str, grid: &Grid) -> Result<ShapeFamily> {
    let s = s.trim();
    let (name, args) = call(s).ok_or_else(|| Error::parse(format!("bad family literal {s:?}")))?;
    let side = match name {
        "G" => Side::Right,
        "LG" => Side::Left,
        _ => return Err(Error::parse(format!("bad family literal {s:?}"))),
    };
    let [b, d] = args.as_slice() else {
        return Err(Error::parse(format!("bad family literal {s:?}")));
    };
    ShapeFamily::from_exprs(side, b.parse::<GridExpr>()?, d.parse::<GridExpr>()?, grid)
}

/// A `;`-separated family list.
pub fn parse_families(s: &str, grid: &Grid) -> Result<Vec<ShapeFamily>> {
    split_top_level(s, ';')?.iter().map(|f| parse_family(f, grid)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perms::PermKind;

    fn scratch(name: &str, body: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("ptlab-literal-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn structured_literals() {
        assert!(parse_permutation("I", 4, None).unwrap().is_identity());
        assert_eq!(parse_permutation("T", 3, None).unwrap().eval(1, 2).unwrap(), (2, 1));
        let g = parse_permutation("G(2,3)", 6, None).unwrap();
        assert!(matches!(g.kind(), PermKind::PartialTranspose(_)));
        assert_eq!(parse_permutation("LG(3,2)", 6, None).unwrap().label(), "LG(3,2)");
        assert!(matches!(parse_permutation("G(2,3)", 5, None), Err(Error::Domain(_))));
        for bad in ["X", "G(2)", "G(a,2)", "G(0,4)", "G(2,2", "Q(1,1)"] {
            assert!(parse_permutation(bad, 4, None).is_err(), "{bad}");
        }
    }

    #[test]
    fn word_splitting() {
        let w = parse_word("G(2,4), G(4,2),I", 8, None).unwrap();
        assert_eq!(w.len(), 3);
        assert!(split_top_level("G(1,2", ',').is_err());
        assert!(split_top_level("I,,T", ',').is_err());
    }

    #[test]
    fn file_literals() {
        let d = scratch("theta.txt", "2\n3\n1\n");
        let p = parse_permutation(&format!("D({})", d.display()), 3, None).unwrap();
        assert_eq!(p.eval(1, 3).unwrap(), (2, 1));
        assert!(p.is_symmetric());
        let rel = parse_permutation("D(theta.txt)", 3, d.parent()).unwrap();
        assert!(rel.extensionally_equal(&p));
        assert!(parse_permutation(&format!("D({})", d.display()), 4, None).is_err());

        let mut body = String::new();
        for i in 1..=2 {
            for j in 1..=2 {
                body.push_str(&format!("{i} {j} {j} {i}\n"));
            }
        }
        let t = scratch("table.txt", &body);
        let p = parse_permutation(&format!("P({})", t.display()), 2, None).unwrap();
        assert!(p.extensionally_equal(&EntryPermutation::transpose(2).unwrap()));
        let short = scratch("short.txt", "1 1 1 1\n");
        assert!(parse_permutation(&format!("P({})", short.display()), 2, None).is_err());
        assert!(matches!(parse_permutation("D(/nonexistent/x)", 2, None), Err(Error::Io(_))));
    }

    #[test]
    fn families_and_grids() {
        let g = parse_grid("N=2,4,8,16").unwrap();
        let fs = parse_families("G(N,N);LG(N,N);G(N^2,1)", &g).unwrap();
        assert_eq!(fs.len(), 3);
        assert_eq!(fs[1].side, Side::Left);
        assert_eq!(fs[2].samples[3].m, 256);
        assert!(parse_grid("N=4,2").is_err());
        assert!(parse_grid("Z=1").is_err());
        assert!(parse_families("G(N,N);H(N,N)", &g).is_err());
        let gm = parse_grid("M=8,16").unwrap();
        let f = parse_family("G(M/2,2)", &gm).unwrap();
        assert_eq!(f.samples[0].b, 4);
    }

    #[test]
    fn word_templates() {
        let w = parse_word_template("G(2,M/2),G(M/2,2),I", 16, None).unwrap();
        assert_eq!(w[0].label(), "G(2,8)");
        assert_eq!(w[1].label(), "G(8,2)");
        assert!(w[2].is_identity());
        assert_eq!(parse_word_template("LG(4,inf)", 12, None).unwrap()[0].label(), "LG(4,3)");
        assert!(parse_word_template("G(M/3,2)", 16, None).is_err());
    }
}
