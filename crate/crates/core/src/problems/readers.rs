//! Readers for Biq Mac, QAPLIB and DIMACS edge files.
//!
//! Whitespace is handled leniently; counts are checked strictly.

use std::path::Path;

use nalgebra::DVector;

use super::{BiqData, Graph};
use crate::error::{Error, Result};
use crate::linalg::SymMat;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| parse_err(line, format!("cannot parse '{tok}'")))
}

/// Non-empty lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
}

/// Biq Mac sparse format: a header `n m`, then `m` lines `i j v`
/// (1-based). The entries define a symmetric `F` and the objective
/// `xᵀFx`, so `Q = 2F` and `c = 0`.
pub fn parse_biqmac(text: &str) -> Result<BiqData> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| parse_err(0, "empty file"))?;
    if header.len() != 2 {
        return Err(parse_err(hl, "expected header 'n m'"));
    }
    let n: usize = num(header[0], hl)?;
    let m: usize = num(header[1], hl)?;
    let mut f = SymMat::zeros(n);
    let mut count = 0;
    for (ln, t) in it {
        if t.len() != 3 {
            return Err(parse_err(ln, "expected 'i j value'"));
        }
        let i: usize = num(t[0], ln)?;
        let j: usize = num(t[1], ln)?;
        let v: f64 = num(t[2], ln)?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(parse_err(ln, format!("index ({i}, {j}) outside 1..={n}")));
        }
        f.set(i - 1, j - 1, f.get(i - 1, j - 1) + v);
        count += 1;
    }
    if count != m {
        return Err(parse_err(0, format!("header announces {m} entries, found {count}")));
    }
    BiqData::new(f.scale(2.0), DVector::zeros(n))
}

/// QAPLIB format: `n`, then the `n × n` matrices `A` and `B` (values may
/// wrap across lines). Both matrices must be symmetric.
pub fn parse_qaplib(text: &str) -> Result<(SymMat, SymMat)> {
    let toks: Vec<(usize, &str)> = lines(text).flat_map(|(l, t)| t.into_iter().map(move |s| (l, s))).collect();
    let (l0, t0) = *toks.first().ok_or_else(|| parse_err(0, "empty file"))?;
    let n: usize = num(t0, l0)?;
    if toks.len() != 1 + 2 * n * n {
        return Err(parse_err(0, format!("expected {} numbers after n = {n}, found {}", 2 * n * n, toks.len() - 1)));
    }
    let read = |offset: usize| -> Result<SymMat> {
        let mut v = vec![0.0; n * n];
        for (k, slot) in v.iter_mut().enumerate() {
            let (l, t) = toks[offset + k];
            *slot = num(t, l)?;
        }
        for i in 0..n {
            for j in 0..i {
                if v[i * n + j] != v[j * n + i] {
                    return Err(parse_err(toks[offset + i * n + j].0, "matrix is not symmetric"));
                }
            }
        }
        Ok(SymMat::from_fn(n, |i, j| v[i * n + j]))
    };
    Ok((read(1)?, read(1 + n * n)?))
}

/// DIMACS edge format: `c` comment lines, `p edge n m`, then `m` lines
/// `e i j` (1-based). Edges listed twice (in either direction) are merged.
pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut m = 0;
    let mut edges = std::collections::BTreeSet::new();
    let mut count = 0;
    for (ln, t) in lines(text) {
        match t[0] {
            "c" => {}
            "p" => {
                if t.len() != 4 || n.is_some() {
                    return Err(parse_err(ln, "expected a single 'p edge n m' line"));
                }
                n = Some(num::<usize>(t[2], ln)?);
                m = num(t[3], ln)?;
            }
            "e" => {
                let nv = n.ok_or_else(|| parse_err(ln, "edge before the 'p' line"))?;
                if t.len() != 3 {
                    return Err(parse_err(ln, "expected 'e i j'"));
                }
                let i: usize = num(t[1], ln)?;
                let j: usize = num(t[2], ln)?;
                if i == 0 || j == 0 || i > nv || j > nv || i == j {
                    return Err(parse_err(ln, format!("invalid edge ({i}, {j})")));
                }
                edges.insert(((i - 1).min(j - 1), (i - 1).max(j - 1)));
                count += 1;
            }
            other => return Err(parse_err(ln, format!("unknown line type '{other}'"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(0, "missing 'p edge n m' line"))?;
    if count != m {
        return Err(parse_err(0, format!("header announces {m} edges, found {count}")));
    }
    Graph::new(n, edges)
}

pub fn read_biqmac(path: impl AsRef<Path>) -> Result<BiqData> {
    parse_biqmac(&std::fs::read_to_string(path)?)
}

pub fn read_qaplib(path: impl AsRef<Path>) -> Result<(SymMat, SymMat)> {
    parse_qaplib(&std::fs::read_to_string(path)?)
}

pub fn read_dimacs(path: impl AsRef<Path>) -> Result<Graph> {
    parse_dimacs(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biqmac_doubles_the_matrix() {
        let d = parse_biqmac("3 2\n1 2 -4\n3 3 5\n").unwrap();
        assert_eq!(d.q.get(0, 1), -8.0);
        assert_eq!(d.q.get(1, 0), -8.0);
        assert_eq!(d.q.get(2, 2), 10.0);
        // xᵀFx at x = (1,1,1): 2·(−4) + 5
        assert_eq!(d.value(&[1.0, 1.0, 1.0]), -3.0);
    }

    #[test]
    fn biqmac_counts_are_strict() {
        assert!(matches!(parse_biqmac("3 2\n1 2 -4\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_biqmac("3 1\n1 4 1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn qaplib_reads_wrapped_rows() {
        let (a, b) = parse_qaplib("2\n\n0 1\n1 0\n0 2 2\n0\n").unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(b.get(1, 0), 2.0);
        assert!(parse_qaplib("2\n0 1 2 0\n0 1 1 0\n").is_err());
        assert!(parse_qaplib("2\n0 1 1 0\n0 1 1\n").is_err());
    }

    #[test]
    fn dimacs_merges_duplicates() {
        let g = parse_dimacs("c test\np edge 3 3\ne 1 2\ne 2 1\ne 2 3\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(parse_dimacs("p edge 3 2\ne 1 2\n").is_err());
        assert!(parse_dimacs("p edge 3 1\ne 1 1\n").is_err());
    }
}
