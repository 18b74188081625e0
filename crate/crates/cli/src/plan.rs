//! Text plan documents: the serialized form of a partition.
//!
//! Line-oriented, whitespace-separated fields with the free-form id as the
//! final token of `cluster` and `member` lines. Absent optional header
//! fields are written as `-`. Floats round-trip exactly through the default
//! formatting.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use mcsvd_core::bounds::{BoundKind, BoundValue};
use mcsvd_core::cluster::{AlgorithmKind, Partition, PlannedCluster, SortMode};

const HEADER: &str = "mcsvd-plan v1";

fn opt_field<T: ToString>(value: &Option<T>) -> String {
    value.as_ref().map_or_else(|| "-".into(), T::to_string)
}

pub fn render(partition: &Partition) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("algorithm {}\n", partition.algorithm));
    out.push_str(&format!("epsilon {}\n", opt_field(&partition.epsilon)));
    out.push_str(&format!("rank {}\n", partition.rank));
    out.push_str(&format!("sort {}\n", opt_field(&partition.sort_mode)));
    out.push_str(&format!("seed {}\n", opt_field(&partition.seed)));
    out.push_str(&format!("k {}\n", opt_field(&partition.k)));
    out.push_str(&format!("m {}\n", partition.m));
    out.push_str(&format!("clusters {}\n", partition.clusters.len()));
    for cluster in &partition.clusters {
        let p = &cluster.predicted;
        out.push_str(&format!(
            "cluster {} {} {} {} {} {} {}\n",
            cluster.rank,
            p.kind,
            p.error,
            p.error_sq,
            p.relative,
            cluster.members.len(),
            cluster.id,
        ));
        for (id, cols) in &cluster.members {
            out.push_str(&format!("member {cols} {id}\n"));
        }
    }
    out
}

pub fn write(partition: &Partition, path: &Path) -> Result<()> {
    fs::write(path, render(partition))
        .with_context(|| format!("writing plan to {}", path.display()))
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.line_no += 1;
        self.inner
            .next()
            .with_context(|| format!("plan truncated, expected {what} at line {}", self.line_no))
    }
}

fn keyed<'a>(line: &'a str, key: &str, line_no: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .with_context(|| format!("expected `{key} ...` at line {line_no}"))
}

fn parse_opt<T: FromStr>(field: &str, what: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if field == "-" {
        return Ok(None);
    }
    match field.parse() {
        Ok(v) => Ok(Some(v)),
        Err(e) => bail!("bad {what} `{field}`: {e}"),
    }
}

fn parse_req<T: FromStr>(field: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    parse_opt(field, what)?.with_context(|| format!("{what} is required"))
}

pub fn parse(text: &str) -> Result<Partition> {
    let mut lines = Lines {
        inner: text.lines(),
        line_no: 0,
    };
    let header = lines.next("header")?;
    if header != HEADER {
        bail!("not a plan file (bad header `{header}`)");
    }
    let algorithm: AlgorithmKind =
        parse_req(keyed(lines.next("algorithm")?, "algorithm", lines.line_no)?, "algorithm")?;
    let epsilon: Option<f64> =
        parse_opt(keyed(lines.next("epsilon")?, "epsilon", lines.line_no)?, "epsilon")?;
    let rank: usize = parse_req(keyed(lines.next("rank")?, "rank", lines.line_no)?, "rank")?;
    let sort_mode: Option<SortMode> =
        parse_opt(keyed(lines.next("sort")?, "sort", lines.line_no)?, "sort mode")?;
    let seed: Option<u64> = parse_opt(keyed(lines.next("seed")?, "seed", lines.line_no)?, "seed")?;
    let k: Option<usize> = parse_opt(keyed(lines.next("k")?, "k", lines.line_no)?, "k")?;
    let m: usize = parse_req(keyed(lines.next("m")?, "m", lines.line_no)?, "m")?;
    let cluster_count: usize = parse_req(
        keyed(lines.next("clusters")?, "clusters", lines.line_no)?,
        "cluster count",
    )?;

    let mut clusters = Vec::with_capacity(cluster_count);
    for _ in 0..cluster_count {
        let line = keyed(lines.next("cluster")?, "cluster", lines.line_no)?;
        let mut fields = line.splitn(7, ' ');
        let mut take = |what: &str| -> Result<&str> {
            fields
                .next()
                .with_context(|| format!("cluster line missing {what}"))
        };
        let cluster_rank: usize = parse_req(take("rank")?, "cluster rank")?;
        let kind: BoundKind = take("bound kind")?
            .parse()
            .context("bad predicted bound kind")?;
        let error: f64 = parse_req(take("error")?, "predicted error")?;
        let error_sq: f64 = parse_req(take("error_sq")?, "predicted squared error")?;
        let relative: f64 = parse_req(take("relative")?, "predicted relative error")?;
        let member_count: usize = parse_req(take("member count")?, "member count")?;
        let id = take("cluster id")?.to_string();
        if id.is_empty() {
            bail!("empty cluster id");
        }
        if !(error.is_finite() && error_sq.is_finite() && relative.is_finite()) {
            bail!("non-finite predicted error in cluster `{id}`");
        }
        let mut members = Vec::with_capacity(member_count);
        for _ in 0..member_count {
            let line = keyed(lines.next("member")?, "member", lines.line_no)?;
            let (cols_field, member_id) = line
                .split_once(' ')
                .with_context(|| format!("member line needs `cols id` at line {}", lines.line_no))?;
            let cols: usize = parse_req(cols_field, "member columns")?;
            if member_id.is_empty() {
                bail!("empty member id at line {}", lines.line_no);
            }
            members.push((member_id.to_string(), cols));
        }
        if members.is_empty() {
            bail!("cluster `{id}` has no members");
        }
        clusters.push(PlannedCluster {
            id,
            members,
            rank: cluster_rank,
            predicted: BoundValue {
                kind,
                error,
                error_sq,
                relative,
            },
        });
    }
    if lines.inner.next().is_some() {
        bail!("trailing lines after the last cluster");
    }
    Ok(Partition {
        m,
        algorithm,
        epsilon,
        rank,
        sort_mode,
        seed,
        k,
        clusters,
    })
}

pub fn read(path: &Path) -> Result<Partition> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing plan {}", path.display()))
}
