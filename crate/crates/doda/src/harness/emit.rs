//! Deterministic CSV/JSON emission and CSV ingestion for trial records and
//! summaries. Field order, float formatting and row order are canonical, so
//! identical inputs produce byte-identical files.

use std::io::Write;

use crate::error::{Error, Result};
use crate::time::Time;

use super::{SummaryStats, TrialRecord};

/// CSV schema for trial records. The duration and cost cells are empty when
/// not terminated / not computed.
pub const RECORDS_HEADER: [&str; 7] =
    ["algo", "n", "seed", "trial", "duration", "terminated", "cost"];

pub fn write_records_csv<W: Write>(writer: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        let duration = match r.duration {
            Time::Finite(d) => d.to_string(),
            Time::Infinite => String::new(),
        };
        let cost = r.cost.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            r.algo.as_str(),
            &r.n.to_string(),
            &r.seed.to_string(),
            &r.trial.to_string(),
            &duration,
            if r.terminated { "true" } else { "false" },
            &cost,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_json<W: Write>(mut writer: W, records: &[TrialRecord]) -> Result<()> {
    serde_json::to_writer(&mut writer, records)
        .map_err(|e| Error::Config(format!("json write failed: {e}")))?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Reads back a records CSV produced by [`write_records_csv`].
pub fn read_records_csv<R: std::io::Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    {
        let headers = r.headers()?;
        let expected: Vec<&str> = RECORDS_HEADER.to_vec();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Config(format!(
                "unexpected CSV header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
    }
    let mut records = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let field = |idx: usize| row.get(idx).unwrap_or_default();
        let line = i + 2;
        let parse_u = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid {what} `{s}`"),
            })
        };
        let duration = match field(4) {
            "" => Time::Infinite,
            s => Time::Finite(parse_u(s, "duration")? as usize),
        };
        let terminated = match field(5) {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("invalid terminated flag `{other}`"),
                })
            }
        };
        let cost = match field(6) {
            "" => None,
            s => Some(parse_u(s, "cost")? as usize),
        };
        records.push(TrialRecord {
            algo: field(0).to_string(),
            n: parse_u(field(1), "n")? as u32,
            seed: parse_u(field(2), "seed")?,
            trial: parse_u(field(3), "trial")? as u32,
            duration,
            terminated,
            terminated_by_tau: None,
            cost,
        });
    }
    Ok(records)
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const STATS_HEADER: [&str; 10] = [
    "algo",
    "n",
    "trials",
    "terminated",
    "termination_fraction",
    "mean",
    "variance",
    "p50",
    "p95",
    "p99",
];

pub fn write_stats_csv<W: Write>(writer: W, stats: &[SummaryStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STATS_HEADER)?;
    for s in stats {
        w.write_record([
            s.algo.as_str(),
            &s.n.to_string(),
            &s.trials.to_string(),
            &s.terminated.to_string(),
            &format!("{:.6}", s.termination_fraction),
            &fmt_opt_f64(s.mean),
            &fmt_opt_f64(s.variance),
            &fmt_opt_usize(s.p50),
            &fmt_opt_usize(s.p95),
            &fmt_opt_usize(s.p99),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stats_json<W: Write>(mut writer: W, stats: &[SummaryStats]) -> Result<()> {
    serde_json::to_writer(&mut writer, stats)
        .map_err(|e| Error::Config(format!("json write failed: {e}")))?;
    writer.write_all(b"\n")?;
    Ok(())
}
