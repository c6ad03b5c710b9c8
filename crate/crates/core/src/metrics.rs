//! Interference and fairness metrics over an assignment.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::assignment::{
    check_shape, validate, Channel, ChannelAssignment, ChannelSet, ValidityReport,
};
use crate::conflict::{active_conflicts, ConflictGraph};
use crate::error::{Error, Result};
use crate::topology::Topology;

/// Radios per channel for channels `1..=cs_max`; unused channels count 0.
pub fn usage_histogram(sets: &[ChannelSet], cs_max: u8) -> Vec<usize> {
    let mut usage = vec![0; cs_max as usize];
    for set in sets {
        for ch in set.iter() {
            usage[ch as usize - 1] += 1;
        }
    }
    usage
}

/// Max minus min of the usage histogram.
pub fn spread_of(sets: &[ChannelSet], cs_max: u8) -> usize {
    let usage = usage_histogram(sets, cs_max);
    let max = usage.iter().copied().max().unwrap_or(0);
    let min = usage.iter().copied().min().unwrap_or(0);
    max - min
}

/// Usage in `x:y:z` form, two digits minimum per channel.
pub fn format_usage(usage: &[usize]) -> String {
    usage
        .iter()
        .map(|u| format!("{u:02}"))
        .collect::<Vec<_>>()
        .join(":")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
    pub channels: u8,
}

impl GridShape {
    pub fn of(topology: &Topology) -> Self {
        GridShape {
            rows: topology.rows(),
            cols: topology.cols(),
            channels: topology.channels(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricReport {
    pub grid: GridShape,
    pub tid: usize,
    pub usage: BTreeMap<Channel, usize>,
    pub spread: usize,
    pub validity: ValidityReport,
}

impl MetricReport {
    pub fn usage_vec(&self) -> Vec<usize> {
        self.usage.values().copied().collect()
    }
}

pub fn evaluate(
    topology: &Topology,
    ca: &ChannelAssignment,
    cg: &ConflictGraph,
) -> Result<MetricReport> {
    let validity = validate(topology, ca)?;
    let tid = active_conflicts(cg, ca)?;
    let hist = usage_histogram(ca.sets(), topology.channels());
    let spread = spread_of(ca.sets(), topology.channels());
    Ok(MetricReport {
        grid: GridShape::of(topology),
        tid,
        usage: hist
            .into_iter()
            .enumerate()
            .map(|(i, n)| (i as Channel + 1, n))
            .collect(),
        spread,
        validity,
    })
}

/// A scoring function over an assignment, for metrics beyond the built-ins.
pub trait Metric {
    fn name(&self) -> &str;

    /// Lower is better unless [`Metric::higher_is_better`] says otherwise.
    fn score(&self, topology: &Topology, ca: &ChannelAssignment, cg: &ConflictGraph)
        -> Result<f64>;

    fn higher_is_better(&self) -> bool {
        false
    }
}

pub struct Tid;

impl Metric for Tid {
    fn name(&self) -> &str {
        "tid"
    }

    fn score(&self, _: &Topology, ca: &ChannelAssignment, cg: &ConflictGraph) -> Result<f64> {
        Ok(active_conflicts(cg, ca)? as f64)
    }
}

pub struct Spread;

impl Metric for Spread {
    fn name(&self) -> &str {
        "spread"
    }

    fn score(&self, topology: &Topology, ca: &ChannelAssignment, _: &ConflictGraph) -> Result<f64> {
        check_shape(topology, ca)?;
        Ok(spread_of(ca.sets(), topology.channels()) as f64)
    }
}

/// Adjacent pairs sharing two or more channels.
pub struct MultiCommon;

impl Metric for MultiCommon {
    fn name(&self) -> &str {
        "multi_common"
    }

    fn score(&self, topology: &Topology, ca: &ChannelAssignment, _: &ConflictGraph) -> Result<f64> {
        Ok(validate(topology, ca)?.multi_common_pairs.len() as f64)
    }
}

pub fn score_all(
    metrics: &[&dyn Metric],
    topology: &Topology,
    ca: &ChannelAssignment,
    cg: &ConflictGraph,
) -> Result<Vec<(String, f64)>> {
    metrics
        .iter()
        .map(|m| Ok((m.name().to_string(), m.score(topology, ca, cg)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankingRow {
    pub rank: usize,
    pub label: String,
    pub tid: usize,
    pub spread: usize,
    pub usage: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankingTable {
    pub grid: GridShape,
    pub rows: Vec<RankingRow>,
}

/// Ranks reports by TID, then spread; equal keys keep their input order.
pub fn compare(reports: &[(String, MetricReport)]) -> Result<RankingTable> {
    let Some((_, first)) = reports.first() else {
        return Err(Error::InvalidInput("nothing to compare".into()));
    };
    let grid = first.grid;
    if let Some((label, r)) = reports.iter().find(|(_, r)| r.grid != grid) {
        return Err(Error::MismatchedTopology(format!(
            "{label} is over {} with {} channels, expected {} with {}",
            r.grid.label(),
            r.grid.channels,
            grid.label(),
            grid.channels
        )));
    }
    let mut sorted: Vec<&(String, MetricReport)> = reports.iter().collect();
    sorted.sort_by_key(|(_, r)| (r.tid, r.spread));
    let rows = sorted
        .into_iter()
        .enumerate()
        .map(|(i, (label, r))| RankingRow {
            rank: i + 1,
            label: label.clone(),
            tid: r.tid,
            spread: r.spread,
            usage: r.usage_vec(),
        })
        .collect();
    Ok(RankingTable { grid, rows })
}

impl RankingTable {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "| Rank | CA | TID | Spread | Usage ({}) |",
            self.grid.label()
        )
        .unwrap();
        writeln!(out, "|---:|---|---:|---:|:---:|").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.rank,
                r.label,
                r.tid,
                r.spread,
                format_usage(&r.usage)
            )
            .unwrap();
        }
        out
    }

    /// Columns `algo,grid,tid,spread,usage_1..usage_c`.
    pub fn to_csv(&self) -> String {
        let entries: Vec<(&str, String, usize, usize, &[usize])> = self
            .rows
            .iter()
            .map(|r| {
                (
                    r.label.as_str(),
                    self.grid.label(),
                    r.tid,
                    r.spread,
                    r.usage.as_slice(),
                )
            })
            .collect();
        report_csv(self.grid.channels, &entries)
    }
}

/// CSV with columns `algo,grid,tid,spread,usage_1..usage_c`.
pub fn report_csv(channels: u8, rows: &[(&str, String, usize, usize, &[usize])]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "algo".to_string(),
        "grid".into(),
        "tid".into(),
        "spread".into(),
    ];
    header.extend((1..=channels).map(|c| format!("usage_{c}")));
    w.write_record(&header).expect("in-memory write");
    for (algo, grid, tid, spread, usage) in rows {
        let mut rec = vec![
            algo.to_string(),
            grid.clone(),
            tid.to_string(),
            spread.to_string(),
        ];
        rec.extend(usage.iter().map(|u| u.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
