//! CSV readers and writers for tracking, transactions and sample datasets.
//!
//! Formats:
//! - tracking:     `match_id,player_id,team_id,t,x,y` (t fractional seconds)
//! - transactions: `match_id,t,kind,player_id,team_id` (t integer seconds)
//! - samples:      `x,y,v,t,c` (six fractional digits, c in {0, 1})

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{TrackingSample, Vec2};

use super::{CommitmentSample, TrackingSet, TransactionEvent, TransactionKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub rows: usize,
    pub duplicates_dropped: usize,
}

const TRACKING_HEADER: &str = "match_id,player_id,team_id,t,x,y";
const TRANSACTIONS_HEADER: &str = "match_id,t,kind,player_id,team_id";
const SAMPLES_HEADER: &str = "x,y,v,t,c";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(field: &str, name: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid {name} value '{}'", field.trim())))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("non-finite {name} value")))
            }
        })
}

fn split_row(line: &str, expected: usize, line_no: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(parse_err(
            line_no,
            format!("expected {expected} fields, got {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn check_header(line: Option<std::io::Result<String>>, want: &str) -> Result<()> {
    let got = match line {
        Some(l) => l?,
        None => return Err(parse_err(1, "empty file, missing header")),
    };
    if got.trim_end_matches('\r') != want {
        return Err(parse_err(1, format!("expected header '{want}', got '{got}'")));
    }
    Ok(())
}

/// Parse a tracking CSV and group it into a [`TrackingSet`].
pub fn load_tracking<R: Read>(reader: R) -> Result<(TrackingSet, LoadStats)> {
    let mut lines = BufReader::new(reader).lines();
    check_header(lines.next(), TRACKING_HEADER)?;
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let f = split_row(line, 6, line_no)?;
        samples.push(TrackingSample {
            match_id: f[0].trim().to_string(),
            player_id: f[1].trim().to_string(),
            team_id: f[2].trim().to_string(),
            t: parse_f64(f[3], "t", line_no)?,
            pos: Vec2::new(parse_f64(f[4], "x", line_no)?, parse_f64(f[5], "y", line_no)?),
        });
    }
    let rows = samples.len();
    let (set, duplicates_dropped) = TrackingSet::from_samples(samples);
    Ok((
        set,
        LoadStats {
            rows,
            duplicates_dropped,
        },
    ))
}

pub fn load_tracking_path(path: &Path) -> Result<(TrackingSet, LoadStats)> {
    load_tracking(std::fs::File::open(path)?)
}

/// Parse a transactions CSV. Row order is preserved.
pub fn load_transactions<R: Read>(reader: R) -> Result<Vec<TransactionEvent>> {
    let mut lines = BufReader::new(reader).lines();
    check_header(lines.next(), TRANSACTIONS_HEADER)?;
    let mut events = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let f = split_row(line, 5, line_no)?;
        let kind = TransactionKind::parse(f[2].trim())
            .ok_or_else(|| parse_err(line_no, format!("unknown transaction kind '{}'", f[2].trim())))?;
        events.push(TransactionEvent {
            match_id: f[0].trim().to_string(),
            t: parse_f64(f[1], "t", line_no)?,
            kind,
            player_id: f[3].trim().to_string(),
            team_id: f[4].trim().to_string(),
        });
    }
    Ok(events)
}

pub fn load_transactions_path(path: &Path) -> Result<Vec<TransactionEvent>> {
    load_transactions(std::fs::File::open(path)?)
}

pub fn write_tracking_csv<W: Write>(mut out: W, rows: &[TrackingSample]) -> Result<()> {
    writeln!(out, "{TRACKING_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.3},{:.6},{:.6}",
            r.match_id, r.player_id, r.team_id, r.t, r.pos.x, r.pos.y
        )?;
    }
    Ok(())
}

pub fn write_transactions_csv<W: Write>(mut out: W, events: &[TransactionEvent]) -> Result<()> {
    writeln!(out, "{TRANSACTIONS_HEADER}")?;
    for e in events {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.match_id,
            e.t as i64,
            e.kind.as_str(),
            e.player_id,
            e.team_id
        )?;
    }
    Ok(())
}

/// Write the step-5 dataset with bit-exact six-fractional-digit rendering.
pub fn write_samples_csv<'a, W, I>(mut out: W, samples: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a CommitmentSample>,
{
    writeln!(out, "{SAMPLES_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{}",
            s.x,
            s.y,
            s.v,
            s.t,
            if s.committed { 1 } else { 0 }
        )?;
    }
    Ok(())
}

pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<CommitmentSample>> {
    let mut lines = BufReader::new(reader).lines();
    check_header(lines.next(), SAMPLES_HEADER)?;
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let f = split_row(line, 5, line_no)?;
        let committed = match f[4].trim() {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(line_no, format!("invalid c value '{other}'"))),
        };
        samples.push(CommitmentSample {
            x: parse_f64(f[0], "x", line_no)?,
            y: parse_f64(f[1], "y", line_no)?,
            v: parse_f64(f[2], "v", line_no)?,
            t: parse_f64(f[3], "t", line_no)?,
            committed,
        });
    }
    Ok(samples)
}

pub fn read_samples_csv_path(path: &Path) -> Result<Vec<CommitmentSample>> {
    read_samples_csv(std::fs::File::open(path)?)
}
