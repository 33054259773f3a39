//! Text formats for graphs, group assignments and numeric matrices.
//!
//! Edge-list format: a header line `n=<N> kind=<adjacency|laplacian>`
//! followed by one line per undirected edge `i j w` with 1-based node ids
//! and a float weight. Weights are the (positive) edge weights of the
//! underlying adjacency for both kinds.
//!
//! Group file: one line per node carrying the node's group id in `[1, G]`.
//!
//! Matrix CSV: headerless rows of comma-separated floats; used for
//! covariance and signal matrices.

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoKind};
use crate::groups::GroupAssignment;
use crate::scalar::Scalar;
use crate::vectorize::{half_vectorize, lift, n_pairs, pair_list};
use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;
use std::path::Path;

/// Serialize a GSO to the edge-list format.
pub fn edge_list_to_string<T: Scalar>(gso: &Gso<T>) -> String {
    let n = gso.n();
    let w = half_vectorize(gso);
    let mut out = format!("n={} kind={}\n", n, gso.kind().as_str());
    for (k, &(i, j)) in pair_list(n).iter().enumerate() {
        if w[k] != T::zero() {
            let _ = writeln!(out, "{} {} {}", i + 1, j + 1, w[k].to_f64());
        }
    }
    out
}

/// Parse the edge-list format.
pub fn edge_list_from_str<T: Scalar>(text: &str) -> Result<Gso<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge-list file".into()))?;
    let mut n: Option<usize> = None;
    let mut kind: Option<GsoKind> = None;
    for field in header.split_whitespace() {
        if let Some(v) = field.strip_prefix("n=") {
            n = Some(
                v.parse()
                    .map_err(|_| Error::Parse(format!("bad node count `{v}`")))?,
            );
        } else if let Some(v) = field.strip_prefix("kind=") {
            kind = Some(v.parse()?);
        } else {
            return Err(Error::Parse(format!("unexpected header field `{field}`")));
        }
    }
    let n = n.ok_or_else(|| Error::Parse("header missing n=<N>".into()))?;
    let kind = kind.ok_or_else(|| Error::Parse("header missing kind=".into()))?;
    if n < 2 {
        return Err(Error::Parse("need at least 2 nodes".into()));
    }
    let mut s = DVector::<T>::zeros(n_pairs(n));
    let offset = |i: usize, j: usize| -> usize {
        // index of pair (i, j), i < j, in half-vector order
        i * n - i * (i + 1) / 2 + (j - i - 1)
    };
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad edge line `{line}`")));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad node id `{}`", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad node id `{}`", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad weight `{}`", fields[2])))?;
        if i == j || i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Parse(format!("edge ({i}, {j}) out of range")));
        }
        let (a, b) = if i < j { (i - 1, j - 1) } else { (j - 1, i - 1) };
        s[offset(a, b)] = T::of(w);
    }
    lift(&s, kind)
}

pub fn write_edge_list<T: Scalar>(path: &Path, gso: &Gso<T>) -> Result<()> {
    std::fs::write(path, edge_list_to_string(gso))?;
    Ok(())
}

pub fn read_edge_list<T: Scalar>(path: &Path) -> Result<Gso<T>> {
    edge_list_from_str(&std::fs::read_to_string(path)?)
}

/// One 1-based group id per line.
pub fn groups_to_string(groups: &GroupAssignment) -> String {
    let mut out = String::new();
    for i in 0..groups.n() {
        let _ = writeln!(out, "{}", groups.label(i) + 1);
    }
    out
}

pub fn groups_from_str(text: &str) -> Result<GroupAssignment> {
    let mut labels = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let id: usize = line
            .parse()
            .map_err(|_| Error::Parse(format!("bad group id `{line}`")))?;
        if id == 0 {
            return Err(Error::Parse("group ids are 1-based".into()));
        }
        labels.push(id - 1);
    }
    GroupAssignment::new(labels)
}

pub fn write_groups(path: &Path, groups: &GroupAssignment) -> Result<()> {
    std::fs::write(path, groups_to_string(groups))?;
    Ok(())
}

pub fn read_groups(path: &Path) -> Result<GroupAssignment> {
    groups_from_str(&std::fs::read_to_string(path)?)
}

/// Write a matrix as headerless CSV, one row per line.
pub fn write_matrix_csv<T: Scalar>(path: &Path, m: &DMatrix<T>) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| m[(r, c)].to_f64().to_string()).collect();
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Read a headerless CSV of floats into a matrix.
pub fn read_matrix_csv<T: Scalar>(path: &Path) -> Result<DMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<T>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row: Result<Vec<T>> = record
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map(T::of)
                    .map_err(|_| Error::Parse(format!("bad number `{f}`")))
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}
