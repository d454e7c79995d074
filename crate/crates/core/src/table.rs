//! Classification tables: running the pipeline over a dataset, and CSV or
//! markdown serialization with the columns
//! `group, h2, div, m, T, K3, invariant, mode, lift`.
//!
//! Gram matrices are written row by row as `a b; c d`. The `lift` column is
//! `yes`, `no` or `-` when no lift search ran.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::classify::{classify, gram_to_inline, ClassificationRow, ClassifyOptions, K3Flag};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::glue::Mode;

pub const COLUMNS: [&str; 9] = ["group", "h2", "div", "m", "T", "K3", "invariant", "mode", "lift"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Markdown => "markdown",
        })
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableOutput {
    pub rows: Vec<ClassificationRow>,
    pub warnings: Vec<String>,
}

/// Classifies every group of the dataset, in dataset order.
pub fn run_table(ds: &Dataset, opts: &ClassifyOptions) -> Result<TableOutput> {
    let mut out = TableOutput::default();
    for g in &ds.groups {
        if g.coinv_disc.is_none() && g.coinv_gram.is_none() {
            out.warnings.push(format!("{}: no coinvariant data; group skipped", g.name));
            continue;
        }
        let res = classify(&g.invariant_lattices()?, &g.coinvariant_data()?, &g.name, opts)?;
        out.rows.extend(res.rows);
        out.warnings.extend(res.warnings);
    }
    Ok(out)
}

fn fields(r: &ClassificationRow) -> [String; 9] {
    [
        r.group_name.clone(),
        r.h_sq.to_string(),
        r.h_div.to_string(),
        r.m.to_string(),
        gram_to_inline(&r.t_gram),
        r.k3_flag.to_string(),
        gram_to_inline(&r.invariant_gram),
        r.mode.to_string(),
        match r.lift_improved {
            Some(true) => "yes".into(),
            Some(false) => "no".into(),
            None => "-".into(),
        },
    ]
}

pub fn emit_table(rows: &[ClassificationRow], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&COLUMNS.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&fields(r).join(","));
                out.push('\n');
            }
        }
        Format::Markdown => {
            out.push_str(&format!("| {} |\n", COLUMNS.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(COLUMNS.len())));
            for r in rows {
                out.push_str(&format!("| {} |\n", fields(r).join(" | ")));
            }
        }
    }
    out
}

fn parse_inline_gram(s: &str, line: usize) -> Result<IntMatrix> {
    let rows = s
        .split(';')
        .map(|row| {
            row.split_whitespace()
                .map(|t| t.parse::<BigInt>().map_err(|_| Error::Parse { line, msg: format!("bad integer '{t}'") }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::from_rows(rows).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

fn parse_row(cells: &[&str], line: usize) -> Result<ClassificationRow> {
    if cells.len() != COLUMNS.len() {
        return Err(Error::Parse { line, msg: format!("expected {} columns, got {}", COLUMNS.len(), cells.len()) });
    }
    let int = |s: &str| s.parse::<BigInt>().map_err(|_| Error::Parse { line, msg: format!("bad integer '{s}'") });
    let wrap = |e: Error| Error::Parse { line, msg: e.to_string() };
    Ok(ClassificationRow {
        group_name: cells[0].to_string(),
        h_sq: int(cells[1])?,
        h_div: int(cells[2])?,
        m: cells[3].parse().map_err(|_| Error::Parse { line, msg: format!("bad order '{}'", cells[3]) })?,
        t_gram: parse_inline_gram(cells[4], line)?,
        k3_flag: K3Flag::from_str(cells[5]).map_err(wrap)?,
        invariant_gram: parse_inline_gram(cells[6], line)?,
        mode: Mode::from_str(cells[7]).map_err(wrap)?,
        lift_improved: match cells[8] {
            "yes" => Some(true),
            "no" => Some(false),
            "-" => None,
            other => return Err(Error::Parse { line, msg: format!("bad lift value '{other}'") }),
        },
    })
}

/// Parses a table written by [`emit_table`].
pub fn parse_table(text: &str, format: Format) -> Result<Vec<ClassificationRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let split = |l: &str| -> Vec<String> {
        match format {
            Format::Csv => l.split(',').map(|c| c.trim().to_string()).collect(),
            Format::Markdown => {
                let inner = l.trim().trim_start_matches('|').trim_end_matches('|');
                inner.split('|').map(|c| c.trim().to_string()).collect()
            }
        }
    };
    let (i, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    if split(header) != COLUMNS {
        return Err(Error::Parse { line: i + 1, msg: "unexpected header".into() });
    }
    if format == Format::Markdown {
        match lines.next() {
            Some((_, l)) if l.trim().starts_with("|---") => {}
            Some((i, _)) => return Err(Error::Parse { line: i + 1, msg: "missing separator row".into() }),
            None => return Ok(Vec::new()),
        }
    }
    lines
        .map(|(i, l)| {
            let cells = split(l);
            parse_row(&cells.iter().map(String::as_str).collect::<Vec<_>>(), i + 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ClassificationRow {
        ClassificationRow {
            group_name: "3^4:A6".into(),
            h_sq: 6.into(),
            h_div: 2.into(),
            m: 6,
            t_gram: IntMatrix::from_i64(&[vec![6, 3], vec![3, 6]]),
            k3_flag: K3Flag::Unknown,
            invariant_gram: IntMatrix::from_i64(&[vec![6, 3, 0], vec![3, 6, 0], vec![0, 0, 6]]),
            mode: Mode::Permissive,
            lift_improved: None,
        }
    }

    #[test]
    fn round_trips() {
        let rows = vec![row(), ClassificationRow { lift_improved: Some(true), k3_flag: K3Flag::Excluded, ..row() }];
        for f in [Format::Csv, Format::Markdown] {
            let text = emit_table(&rows, f);
            assert_eq!(parse_table(&text, f).unwrap(), rows);
            assert_eq!(emit_table(&parse_table(&text, f).unwrap(), f), text);
        }
    }

    #[test]
    fn empty_dataset() {
        let out = run_table(&Dataset::default(), &ClassifyOptions::default()).unwrap();
        assert!(out.rows.is_empty() && out.warnings.is_empty());
        assert!(parse_table(&emit_table(&[], Format::Markdown), Format::Markdown).unwrap().is_empty());
    }

    #[test]
    fn malformed_rows() {
        assert!(parse_table("group,h2\n", Format::Csv).is_err());
        let text = format!("{}\nx,6,2,6,6 3; 3 6,unknown,1 0 0; 0 1 0; 0 0 1,weird,-\n", COLUMNS.join(","));
        assert!(matches!(parse_table(&text, Format::Csv), Err(Error::Parse { line: 2, .. })));
    }
}
