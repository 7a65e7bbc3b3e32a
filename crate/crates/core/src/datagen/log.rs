//! Comma-separated exposure logs.
//!
//! ```text
//! user_id,item_id,hour,weekday,page,connection,age,gender,occupation,cat1,cat2,cat3,business,y_t,y_s1,y_s2
//! 17,203,12,2,0,1,3,0,2,0,1,3,5,1,0,1
//! ```
//!
//! The number of `y_s*` columns in the header declares how many source
//! domains the log carries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::record::{Field, InteractionRecord, NUM_FIELDS};
use crate::{Error, Result};

fn header(n_sources: usize) -> String {
    let mut cols: Vec<String> = Field::ALL.iter().map(|f| f.name().to_string()).collect();
    cols.push("y_t".into());
    cols.extend((1..=n_sources).map(|k| format!("y_s{k}")));
    cols.join(",")
}

pub fn write_log_to<W: Write>(mut out: W, records: &[InteractionRecord], n_sources: usize) -> std::io::Result<()> {
    writeln!(out, "{}", header(n_sources))?;
    let mut line = String::new();
    for r in records {
        line.clear();
        for v in &r.features {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push(char::from(b'0' + r.y_target));
        for y in &r.y_sources {
            line.push(',');
            line.push(char::from(b'0' + y));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn write_log(path: &Path, records: &[InteractionRecord], n_sources: usize) -> Result<()> {
    if let Some(bad) = records.iter().find(|r| r.y_sources.len() != n_sources) {
        return Err(Error::Contract(format!(
            "record carries {} source labels, log declares {n_sources}",
            bad.y_sources.len()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_log_to(BufWriter::new(file), records, n_sources).map_err(|e| Error::io(path, e))
}

/// Parses a log; `origin` only labels error messages.
pub fn read_log_from<R: BufRead>(input: R, origin: &Path) -> Result<Vec<InteractionRecord>> {
    let mut records = Vec::new();
    let mut n_sources = None;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(n) = n_sources else {
            n_sources = Some(parse_header(&line, origin, lineno)?);
            continue;
        };
        records.push(parse_row(&line, n, origin, lineno)?);
    }
    Ok(records)
}

pub fn read_log(path: &Path) -> Result<Vec<InteractionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_log_from(BufReader::new(file), path)
}

fn parse_header(line: &str, origin: &Path, lineno: usize) -> Result<usize> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    let fixed = NUM_FIELDS + 1;
    if cols.len() <= fixed {
        return Err(Error::parse(origin, lineno, "header needs feature columns, y_t and at least one y_s column"));
    }
    for (col, field) in cols.iter().zip(Field::ALL) {
        if *col != field.name() {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected column `{}`, found `{col}`", field.name()),
            ));
        }
    }
    if cols[NUM_FIELDS] != "y_t" {
        return Err(Error::parse(origin, lineno, "expected column `y_t`"));
    }
    for (k, col) in cols[fixed..].iter().enumerate() {
        if *col != format!("y_s{}", k + 1) {
            return Err(Error::parse(origin, lineno, format!("expected column `y_s{}`", k + 1)));
        }
    }
    Ok(cols.len() - fixed)
}

fn parse_row(line: &str, n_sources: usize, origin: &Path, lineno: usize) -> Result<InteractionRecord> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    let expected = NUM_FIELDS + 1 + n_sources;
    if cols.len() != expected {
        return Err(Error::parse(
            origin,
            lineno,
            format!("expected {expected} columns, found {}", cols.len()),
        ));
    }
    let mut features = [0u32; NUM_FIELDS];
    for (slot, (col, field)) in features.iter_mut().zip(cols.iter().zip(Field::ALL)) {
        *slot = col.parse().map_err(|_| {
            Error::parse(origin, lineno, format!("bad {} id `{col}`", field.name()))
        })?;
    }
    let label = |col: &str, name: &str| -> Result<u8> {
        match col {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(Error::parse(
                origin,
                lineno,
                format!("label {name} must be 0 or 1, found `{other}`"),
            )),
        }
    };
    let y_target = label(cols[NUM_FIELDS], "y_t")?;
    let y_sources = cols[NUM_FIELDS + 1..]
        .iter()
        .enumerate()
        .map(|(k, c)| label(c, &format!("y_s{}", k + 1)))
        .collect::<Result<_>>()?;
    Ok(InteractionRecord {
        features,
        y_target,
        y_sources,
    })
}

/// Dataset statistics in the roles of a usual dataset table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogStats {
    pub records: usize,
    pub users: usize,
    pub items: usize,
    pub target_purchases: usize,
    pub source_purchases: Vec<usize>,
}

impl LogStats {
    pub fn of(records: &[InteractionRecord]) -> Self {
        let users: std::collections::BTreeSet<u32> = records.iter().map(|r| r.user_id()).collect();
        let items: std::collections::BTreeSet<u32> = records.iter().map(|r| r.item_id()).collect();
        let n_sources = records.first().map_or(0, |r| r.y_sources.len());
        let mut source_purchases = vec![0; n_sources];
        for r in records {
            for (acc, &y) in source_purchases.iter_mut().zip(&r.y_sources) {
                *acc += y as usize;
            }
        }
        Self {
            records: records.len(),
            users: users.len(),
            items: items.len(),
            target_purchases: records.iter().map(|r| r.y_target as usize).sum(),
            source_purchases,
        }
    }
}
