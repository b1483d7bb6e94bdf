//! Plain-text tables: one HVT marked with `•`, entries with
//! `sigma_ij < d_j - c_i` in brackets, `-` for `-inf`.

use std::fmt::Write;

use crate::doc::{JacobianDoc, OffsetsDoc, SigmaDoc, StageDoc};

fn width(s: &str) -> usize {
    s.chars().count()
}

/// Left-aligned columns separated by two spaces.
fn grid(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| width(s)).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            line.push_str(cell);
            if c + 1 < r.len() {
                line.push_str(&" ".repeat(widths[c] - width(cell) + 2));
            }
        }
        let _ = writeln!(out, "  {}", line.trim_end());
    }
    out
}

pub fn sigma_table(sigma: &SigmaDoc, pair: Option<&OffsetsDoc>, vars: &[String], eqs: &[String]) -> String {
    let n = sigma.entries.len();
    let mut rows = Vec::with_capacity(n + 2);
    let mut head = vec![String::new()];
    head.extend(vars.iter().cloned());
    if pair.is_some() {
        head.push("c_i".into());
    }
    rows.push(head);
    for i in 0..n {
        let mut row = vec![eqs[i].clone()];
        for j in 0..n {
            let cell = match sigma.entries[i][j] {
                None => "-".to_string(),
                Some(s) => {
                    let mark = if sigma.hvt.contains(&[i + 1, j + 1]) { "•" } else { "" };
                    let shaded = pair.is_some_and(|p| s < p.d[j] - p.c[i]);
                    if shaded {
                        format!("[{s}]{mark}")
                    } else {
                        format!("{s}{mark}")
                    }
                }
            };
            row.push(cell);
        }
        if let Some(p) = pair {
            row.push(p.c[i].to_string());
        }
        rows.push(row);
    }
    if let Some(p) = pair {
        let mut row = vec!["d_j".to_string()];
        row.extend(p.d.iter().map(|d| d.to_string()));
        rows.push(row);
    }
    grid(&rows)
}

pub fn jacobian_table(j: &JacobianDoc) -> String {
    let mut rows = Vec::with_capacity(j.rows.len() + 1);
    let mut head = vec![String::new()];
    head.extend(j.cols.iter().cloned());
    rows.push(head);
    for (name, entries) in j.rows.iter().zip(&j.entries) {
        let mut row = vec![name.clone()];
        row.extend(entries.iter().cloned());
        rows.push(row);
    }
    grid(&rows)
}

pub fn scheme_table(stages: &[StageDoc]) -> String {
    let mut rows = vec![vec!["k".to_string(), "solve".into(), "for".into(), "using".into()]];
    for s in stages {
        let using = if s.using.is_empty() { "-".to_string() } else { s.using.join(", ") };
        rows.push(vec![s.k.clone(), s.solve.join(", "), s.unknowns.join(", "), using]);
    }
    grid(&rows)
}

/// `{1, 2}` with 1-based indices already applied.
pub fn set(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}
