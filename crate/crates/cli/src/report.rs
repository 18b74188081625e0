//! CSV report schemas. Header rows and column order are part of the
//! interface; fields never contain the delimiter (block ids are restricted
//! at collection level, members cells join ids with `;`).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// One estimator-vs-oracle measurement from the slack benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackRecord {
    pub trial: usize,
    pub cluster_size: usize,
    pub estimator: String,
    pub predicted: f64,
    pub exact: f64,
    pub slack: f64,
}

pub const SLACK_HEADER: &str = "trial,cluster_size,estimator,predicted,exact,slack";

pub fn slack_csv(records: &[SlackRecord]) -> String {
    let mut out = String::from(SLACK_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.trial, r.cluster_size, r.estimator, r.predicted, r.exact, r.slack
        ));
    }
    out
}

pub fn parse_slack_csv(text: &str) -> Result<Vec<SlackRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(SLACK_HEADER) {
        bail!("bad slack report header");
    }
    let mut records = Vec::new();
    for line in lines {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            bail!("bad slack row `{line}`");
        }
        records.push(SlackRecord {
            trial: fields[0].parse()?,
            cluster_size: fields[1].parse()?,
            estimator: fields[2].to_string(),
            predicted: fields[3].parse()?,
            exact: fields[4].parse()?,
            slack: fields[5].parse()?,
        });
    }
    Ok(records)
}

/// One (epsilon, rank) cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub rank: usize,
    pub algorithm: String,
    pub sort_mode: String,
    pub compression_ratio: f64,
    pub relative_error: f64,
    pub wall_time_ms: f64,
}

pub const SWEEP_HEADER: &str =
    "epsilon,rank,algorithm,sort_mode,compression_ratio,relative_error,wall_time_ms";

pub fn sweep_csv(records: &[SweepRecord], warnings: &[String]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epsilon,
            r.rank,
            r.algorithm,
            r.sort_mode,
            r.compression_ratio,
            r.relative_error,
            r.wall_time_ms
        ));
    }
    for warning in warnings {
        out.push_str(&format!("# warning: {warning}\n"));
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_HEADER) {
        bail!("bad sweep report header");
    }
    let mut records = Vec::new();
    for line in lines {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            bail!("bad sweep row `{line}`");
        }
        records.push(SweepRecord {
            epsilon: fields[0].parse()?,
            rank: fields[1].parse()?,
            algorithm: fields[2].to_string(),
            sort_mode: fields[3].to_string(),
            compression_ratio: fields[4].parse()?,
            relative_error: fields[5].parse()?,
            wall_time_ms: fields[6].parse()?,
        });
    }
    Ok(records)
}

/// One cluster row of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub cluster_id: String,
    pub members: Vec<String>,
    pub rank: usize,
    pub exact_error: f64,
    pub relative_error: f64,
    pub predicted_error: f64,
    pub slack: f64,
}

pub const VERIFY_HEADER: &str =
    "cluster_id,members,r_c,exact_error,relative_error,predicted_error,slack";

/// Whole-store verification metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub global_relative_error: f64,
    pub memory_footprint: u64,
    pub compression_ratio: f64,
}

pub fn verify_csv(rows: &[VerifyRow]) -> String {
    let mut out = String::from(VERIFY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.cluster_id,
            r.members.join(";"),
            r.rank,
            r.exact_error,
            r.relative_error,
            r.predicted_error,
            r.slack
        ));
    }
    out
}

pub fn parse_verify_csv(text: &str) -> Result<Vec<VerifyRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(VERIFY_HEADER) {
        bail!("bad verify report header");
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            bail!("bad verify row `{line}`");
        }
        rows.push(VerifyRow {
            cluster_id: fields[0].to_string(),
            members: fields[1].split(';').map(str::to_string).collect(),
            rank: fields[2].parse()?,
            exact_error: fields[3].parse()?,
            relative_error: fields[4].parse()?,
            predicted_error: fields[5].parse()?,
            slack: fields[6].parse()?,
        });
    }
    Ok(rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing report to {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_csv_round_trips() {
        let records = vec![SlackRecord {
            trial: 3,
            cluster_size: 8,
            estimator: "weyl".into(),
            predicted: 1.25,
            exact: 1.0,
            slack: 0.25,
        }];
        let text = slack_csv(&records);
        assert_eq!(parse_slack_csv(&text).unwrap(), records);
    }

    #[test]
    fn sweep_csv_skips_warnings() {
        let records = vec![SweepRecord {
            epsilon: 0.05,
            rank: 4,
            algorithm: "approx".into(),
            sort_mode: "residual".into(),
            compression_ratio: 2.5,
            relative_error: 0.04,
            wall_time_ms: 12.5,
        }];
        let text = sweep_csv(&records, &["something odd".into()]);
        assert!(text.contains("# warning: something odd"));
        assert_eq!(parse_sweep_csv(&text).unwrap(), records);
    }

    #[test]
    fn verify_csv_round_trips_members() {
        let rows = vec![VerifyRow {
            cluster_id: "c0".into(),
            members: vec!["b00000".into(), "b00002".into()],
            rank: 2,
            exact_error: 0.5,
            relative_error: 0.1,
            predicted_error: 0.6,
            slack: 0.1,
        }];
        let text = verify_csv(&rows);
        assert_eq!(parse_verify_csv(&text).unwrap(), rows);
    }
}
