use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meshca::baselines::{assign_bfca_with, assign_cca_with, DEFAULT_MAX_STATES};
use meshca::capacity::{bound_csv, build_scenario_rect};
use meshca::conflict::DEFAULT_RADIUS_HOPS;
use meshca::nocag::assign_nocag_with;
use meshca::{
    build_conflict_graph, compare, evaluate, load_topology, make_grid, save_topology, upper_bound,
    ChannelAssignment, ConflictGraph, GridSpec, SearchBudget, Topology,
};

mod bench;
mod error;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "meshca", version)]
#[command(about = "Plan and evaluate channel assignments for grid wireless mesh networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a grid topology as JSON
    Generate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign channels to every radio of a topology
    Assign(AssignArgs),
    /// Rank assignments over one topology by interference, then fairness
    Compare(CompareArgs),
    /// Run algorithms over a range of square grids
    Bench(BenchArgs),
    /// Interference-free throughput bound for the row/column flow pattern
    Bound {
        /// Grid side `n`, or `RxC`
        #[arg(long, value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Grid size as `RxC`, or `n` for a square grid
    #[arg(long, value_parser = parse_grid)]
    grid: (usize, usize),
    /// Radios per node
    #[arg(long, default_value_t = 2)]
    radios: u8,
    /// Number of orthogonal channels
    #[arg(long, default_value_t = 3)]
    channels: u8,
}

impl GridArgs {
    fn build(&self) -> meshca::Result<Topology> {
        let (rows, cols) = self.grid;
        make_grid(
            &GridSpec::new(rows, cols)
                .radios(self.radios)
                .channels(self.channels),
        )
    }
}

/// Either a generated grid or a topology file.
#[derive(Args, Debug)]
struct Source {
    #[arg(long, value_parser = parse_grid, conflicts_with = "topology", required_unless_present = "topology")]
    grid: Option<(usize, usize)>,
    #[arg(long, default_value_t = 2)]
    radios: u8,
    #[arg(long, default_value_t = 3)]
    channels: u8,
    /// Topology JSON written by `generate`
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Conflict radius in hops
    #[arg(long, default_value_t = DEFAULT_RADIUS_HOPS)]
    radius: usize,
}

impl Source {
    fn load(&self) -> Result<(Topology, ConflictGraph), CliError> {
        let topology = match (&self.topology, self.grid) {
            (Some(path), _) => load_topology(&read(path)?)?,
            (None, Some(grid)) => GridArgs {
                grid,
                radios: self.radios,
                channels: self.channels,
            }
            .build()?,
            (None, None) => unreachable!("clap requires --grid or --topology"),
        };
        let cg = build_conflict_graph(&topology, self.radius)?;
        Ok((topology, cg))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algo {
    Nocag,
    Bfca,
    Cca,
}

impl Algo {
    fn label(self) -> &'static str {
        match self {
            Algo::Nocag => "NOCAG",
            Algo::Bfca => "BFCA",
            Algo::Cca => "CCA",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Args, Debug, Clone, Copy)]
struct SearchArgs {
    /// State budget for the exhaustive search
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    budget: u64,
    /// Search every labelling instead of fixing node 0
    #[arg(long)]
    no_prune: bool,
}

impl SearchArgs {
    fn budget(self) -> meshca::Result<SearchBudget> {
        let budget = SearchBudget::new(self.budget)?;
        Ok(if self.no_prune {
            budget.without_pruning()
        } else {
            budget
        })
    }
}

#[derive(Args, Debug)]
struct AssignArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = Algo::Nocag)]
    algo: Algo,
    #[command(flatten)]
    search: SearchArgs,
    /// `json` (default) or `csv`
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Print the NOCAG decision trace as JSON lines after the assignment
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    source: Source,
    /// Assignment files, optionally labelled as `LABEL=PATH`
    #[arg(long = "ca")]
    cas: Vec<String>,
    /// Algorithms to run and include
    #[arg(long, value_enum, value_delimiter = ',')]
    algos: Vec<Algo>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Smallest grid side
    #[arg(long, default_value_t = 3)]
    from: usize,
    /// Largest grid side
    #[arg(long, default_value_t = 7)]
    to: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algo::Nocag, Algo::Cca])]
    algos: Vec<Algo>,
    #[arg(long, default_value_t = 2)]
    radios: u8,
    #[arg(long, default_value_t = 3)]
    channels: u8,
    #[arg(long, default_value_t = DEFAULT_RADIUS_HOPS)]
    radius: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let parse = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{s}` is not a grid size; expected RxC or n"))
    };
    match s.split_once(['x', 'X']) {
        Some((r, c)) => Ok((parse(r)?, parse(c)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_newline(mut text: String) -> String {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text
}

/// Result of running one algorithm.
pub(crate) struct Run {
    pub assignment: ChannelAssignment,
    pub trace: Option<meshca::NocagTrace>,
    pub search: Option<meshca::BfcaOutcome>,
}

pub(crate) fn run_algo(
    algo: Algo,
    topology: &Topology,
    cg: &ConflictGraph,
    budget: SearchBudget,
) -> meshca::Result<Run> {
    let cs = topology.channels();
    Ok(match algo {
        Algo::Nocag => {
            let (assignment, trace) = assign_nocag_with(topology, cs, cg)?;
            Run {
                assignment,
                trace: Some(trace),
                search: None,
            }
        }
        Algo::Cca => Run {
            assignment: assign_cca_with(topology, cs, cg)?,
            trace: None,
            search: None,
        },
        Algo::Bfca => {
            let outcome = assign_bfca_with(topology, cs, budget, cg)?;
            Run {
                assignment: outcome.assignment.clone(),
                trace: None,
                search: Some(outcome),
            }
        }
    })
}

fn cmd_generate(grid: &GridArgs, out: Option<&Path>) -> Result<(), CliError> {
    let topology = grid.build()?;
    emit(out, &with_newline(save_topology(&topology)))
}

fn cmd_assign(args: &AssignArgs) -> Result<(), CliError> {
    let (topology, cg) = args.source.load()?;
    let run = run_algo(args.algo, &topology, &cg, args.search.budget()?)?;
    let body = match args.format {
        Format::Json => with_newline(run.assignment.to_json()),
        Format::Csv => run.assignment.to_csv(),
        Format::Markdown => return Err(CliError::Usage("assign supports json or csv".into())),
    };
    emit(args.out.as_deref(), &body)?;
    if let Some(outcome) = &run.search {
        println!(
            "{}",
            serde_json::to_string(&bench::SummaryRecord::from(outcome))
                .expect("summary serializes")
        );
    }
    if args.trace {
        match &run.trace {
            Some(trace) => print!("{}", trace.to_json_lines()),
            None => eprintln!("note: --trace only applies to nocag"),
        }
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let (topology, cg) = args.source.load()?;
    if args.cas.is_empty() && args.algos.is_empty() {
        return Err(CliError::Usage(
            "give at least one --ca file or --algos".into(),
        ));
    }
    let mut reports = Vec::new();
    for entry in &args.cas {
        let (label, path) = match entry.split_once('=') {
            Some((label, path)) => (label.to_string(), PathBuf::from(path)),
            None => {
                let path = PathBuf::from(entry);
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| entry.clone());
                (label, path)
            }
        };
        let ca = ChannelAssignment::from_json(&read(&path)?)?;
        let report = evaluate(&topology, &ca, &cg).map_err(|e| match e {
            meshca::Error::NodeCountMismatch { .. } | meshca::Error::ChannelOutOfRange { .. } => {
                meshca::Error::MismatchedTopology(format!("{label}: {e}"))
            }
            other => other,
        })?;
        reports.push((label, report));
    }
    let budget = args.search.budget()?;
    for &algo in &args.algos {
        let run = run_algo(algo, &topology, &cg, budget)?;
        reports.push((
            algo.label().to_string(),
            evaluate(&topology, &run.assignment, &cg)?,
        ));
    }
    let table = compare(&reports)?;
    let body = match args.format {
        Format::Markdown => table.to_markdown(),
        Format::Csv => table.to_csv(),
        Format::Json => {
            with_newline(serde_json::to_string_pretty(&table).expect("table serializes"))
        }
    };
    emit(args.out.as_deref(), &body)
}

fn cmd_bound(grid: (usize, usize), format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let (rows, cols) = grid;
    let topology = make_grid(&GridSpec::new(rows, cols))?;
    let scenario = if topology.is_square() {
        meshca::build_scenario(&topology)?
    } else {
        eprintln!("note: {rows}x{cols} is not square; using {cols} column and {rows} row flows");
        build_scenario_rect(&topology)?
    };
    let bound = upper_bound(&topology, &scenario)?;
    let body = match format {
        Format::Csv => bound_csv(&scenario, &bound),
        Format::Json => with_newline(
            serde_json::to_string_pretty(&serde_json::json!({
                "grid": format!("{rows}x{cols}"),
                "flows": scenario.flows,
                "per_flow_mbps": bound.per_flow,
                "aggregate_mbps": bound.aggregate,
            }))
            .expect("bound serializes"),
        ),
        Format::Markdown => {
            let mut s = String::from(
                "| Flow | Direction | Src | Dst | Bound (Mbps) |\n|---:|---|---:|---:|---:|\n",
            );
            for (flow, rate) in scenario.flows.iter().zip(&bound.per_flow) {
                let dir = serde_json::to_value(flow.direction).expect("direction serializes");
                s.push_str(&format!(
                    "| {} | {} | {} | {} | {} |\n",
                    flow.id,
                    dir.as_str().unwrap_or_default(),
                    flow.src,
                    flow.dst,
                    rate
                ));
            }
            s.push_str(&format!("| total | | | | {} |\n", bound.aggregate));
            s
        }
    };
    emit(out, &body)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate { grid, out } => cmd_generate(grid, out.as_deref()),
        Command::Assign(args) => cmd_assign(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => bench::cmd_bench(args),
        Command::Bound { grid, format, out } => cmd_bound(*grid, *format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
