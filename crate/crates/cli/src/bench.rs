use std::fmt::Write as _;
use std::thread;

use serde::Serialize;

use meshca::metrics::format_usage;
use meshca::{
    build_conflict_graph, build_scenario, evaluate, make_grid, upper_bound, BfcaOutcome, GridSpec,
};

use crate::error::CliError;
use crate::{emit, run_algo, with_newline, BenchArgs, Format};

/// Search statistics printed next to an exhaustive-search assignment.
#[derive(Debug, Serialize)]
pub struct SummaryRecord {
    pub states_explored: u64,
    pub optimal_metric: usize,
    pub exhausted: bool,
}

impl From<&BfcaOutcome> for SummaryRecord {
    fn from(o: &BfcaOutcome) -> Self {
        SummaryRecord {
            states_explored: o.states_explored,
            optimal_metric: o.optimal_metric,
            exhausted: o.exhausted,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub grid: String,
    pub algo: &'static str,
    pub tid: usize,
    pub spread: usize,
    pub usage: Vec<usize>,
    pub bound_mbps: meshca::Rate,
    /// Only set for the exhaustive search.
    pub states_explored: Option<u64>,
    pub exhausted: Option<bool>,
}

fn bench_grid(args: &BenchArgs, n: usize) -> Result<Vec<BenchRow>, CliError> {
    let topology = make_grid(
        &GridSpec::square(n)
            .radios(args.radios)
            .channels(args.channels),
    )?;
    let cg = build_conflict_graph(&topology, args.radius)?;
    let bound = upper_bound(&topology, &build_scenario(&topology)?)?.aggregate;
    let budget = args.search.budget()?;
    let mut rows = Vec::with_capacity(args.algos.len());
    for &algo in &args.algos {
        let run = run_algo(algo, &topology, &cg, budget)?;
        let report = evaluate(&topology, &run.assignment, &cg)?;
        rows.push(BenchRow {
            grid: format!("{n}x{n}"),
            algo: algo.label(),
            tid: report.tid,
            spread: report.spread,
            usage: report.usage_vec(),
            bound_mbps: bound,
            states_explored: run.search.as_ref().map(|s| s.states_explored),
            exhausted: run.search.as_ref().map(|s| s.exhausted),
        });
    }
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.from < 2 || args.from > args.to {
        return Err(CliError::Usage(format!(
            "need 2 <= --from <= --to, got {}..{}",
            args.from, args.to
        )));
    }
    if args.algos.is_empty() {
        return Err(CliError::Usage("--algos is empty".into()));
    }
    // Sizes run on their own threads; joining in order keeps rows sorted.
    let results: Vec<Result<Vec<BenchRow>, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = (args.from..=args.to)
            .map(|n| s.spawn(move || bench_grid(args, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let body = match args.format {
        Format::Markdown => markdown(&rows),
        Format::Csv => csv_table(&rows, args.channels),
        Format::Json => with_newline(serde_json::to_string_pretty(&rows).expect("rows serialize")),
    };
    emit(args.out.as_deref(), &body)
}

fn markdown(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "| Grid | CA | TID | Spread | Usage | Bound (Mbps) | States | Exhausted |"
    )
    .unwrap();
    writeln!(out, "|---|---|---:|---:|:---:|---:|---:|:---:|").unwrap();
    for r in rows {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.grid,
            r.algo,
            r.tid,
            r.spread,
            format_usage(&r.usage),
            r.bound_mbps,
            r.states_explored.map(|s| s.to_string()).unwrap_or_default(),
            r.exhausted.map(|e| e.to_string()).unwrap_or_default(),
        )
        .unwrap();
    }
    out
}

fn csv_table(rows: &[BenchRow], channels: u8) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["grid", "algo", "tid", "spread"].map(String::from).to_vec();
    header.extend((1..=channels).map(|c| format!("usage_{c}")));
    header.extend(["bound_mbps", "states_explored", "exhausted"].map(String::from));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![
            r.grid.clone(),
            r.algo.to_string(),
            r.tid.to_string(),
            r.spread.to_string(),
        ];
        rec.extend(r.usage.iter().map(|u| u.to_string()));
        rec.push(r.bound_mbps.to_string());
        rec.push(r.states_explored.map(|s| s.to_string()).unwrap_or_default());
        rec.push(r.exhausted.map(|e| e.to_string()).unwrap_or_default());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
