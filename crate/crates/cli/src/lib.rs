//! Command-line surface: clustering runs, comparisons against a reference
//! partition, worked-example tables, and hierarchy exports.

mod args;
mod output;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use cogrid_core::counting::InstanceStore;
use cogrid_core::eval::{pairwise_agreement, AgreementReport};
use cogrid_core::grid::CountMatrix;
use cogrid_core::hierarchy::HierarchyStore;
use cogrid_core::ingest::{self, load_fixture, parse_transactions, Fixture};
use cogrid_core::model::{Dataset, Diagnostic, LabeledPartition};
use cogrid_core::reinforce::ReinforceState;
use cogrid_core::{render, Error};

pub use args::{
    Cli, ClusterArgs, Coherence, Command, CompareArgs, EngineArgs, Format, GapTie, HierarchyArgs,
    InputArgs, Method, Singletons,
};
pub use output::Timing;

/// Process exit status for a failed command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Unreadable or unparseable input; exit 1.
    Input(String),
    /// Invalid flags or parameters; exit 2.
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Config(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidWeights(_)
            | Error::InvalidParameter(_)
            | Error::UnknownFixture(_) => CliError::Config(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

/// What a command writes: `stdout` is deterministic, `stderr` carries
/// diagnostics and timing.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Cluster(args) => cmd_cluster(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Tables => Ok(Output {
            stdout: cmd_tables(),
            stderr: String::new(),
        }),
        Command::Hierarchy(args) => cmd_hierarchy(args),
    }
}

pub(crate) struct Loaded {
    pub dataset: Dataset,
    pub diagnostics: Vec<Diagnostic>,
    pub source: String,
}

pub(crate) fn load_input(input: &InputArgs) -> Result<Loaded, CliError> {
    if let Some(name) = &input.fixture {
        return match load_fixture(name)? {
            Fixture::Events(dataset) => Ok(Loaded {
                dataset,
                diagnostics: Vec::new(),
                source: format!("fixture {name}"),
            }),
            Fixture::Reference(_) => Err(CliError::Config(format!(
                "fixture `{name}` is a reference partition, not an event set"
            ))),
        };
    }
    let path = input
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("one of --input or --fixture is required".into()))?;
    let file = File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let outcome = parse_transactions(BufReader::new(file), &input.format())
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        dataset: outcome.dataset,
        diagnostics: outcome.diagnostics,
        source: path.display().to_string(),
    })
}

fn load_reference(spec: &str) -> Result<LabeledPartition, CliError> {
    if let Ok(Fixture::Reference(p)) = load_fixture(spec) {
        return Ok(p);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read reference {spec}: {e}")))?;
    ingest::parse_reference(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))
}

/// One clustering run, kept whole so every output format renders from it.
pub(crate) enum Engine {
    Reinforce(ReinforceState),
    Counting(InstanceStore),
    Grid(CountMatrix, cogrid_core::GridClusterResult),
}

pub(crate) struct Run {
    pub engine: Engine,
    pub partition: cogrid_core::Partition,
    pub timing: Timing,
}

pub(crate) fn run_method(
    method: Method,
    args: &EngineArgs,
    dataset: &Dataset,
    mut timing: Timing,
) -> Result<Run, CliError> {
    let weights = args.weights()?;
    let n = dataset.vocabulary.len();
    let events = &dataset.events;
    let shards = args.shards;

    let count_start = Instant::now();
    let run = match method {
        Method::Reinforce => {
            let state = ReinforceState::count_sharded(n, events, &weights, shards)?;
            timing.count = count_start.elapsed();
            let extract_start = Instant::now();
            let partition = state.band_partition();
            timing.extract = extract_start.elapsed();
            Run {
                engine: Engine::Reinforce(state),
                partition,
                timing,
            }
        }
        Method::Cm => {
            let mut store = InstanceStore::new(n);
            store.present_all(events, &weights)?;
            timing.count = count_start.elapsed();
            let extract_start = Instant::now();
            let partition = store.select_clusters(args.coherence.into());
            timing.extract = extract_start.elapsed();
            Run {
                engine: Engine::Counting(store),
                partition,
                timing,
            }
        }
        Method::Grid => {
            let grid = CountMatrix::count_sharded(&dataset.vocabulary, events, shards)?;
            timing.count = count_start.elapsed();
            let extract_start = Instant::now();
            let result = grid.extract_clusters(&args.extract_options()?)?;
            timing.extract = extract_start.elapsed();
            let partition = result.partition.clone();
            Run {
                engine: Engine::Grid(grid, result),
                partition,
                timing,
            }
        }
    };
    Ok(run)
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<Output, CliError> {
    args.engine.validate()?;
    let parse_start = Instant::now();
    let loaded = load_input(&args.input)?;
    let timing = Timing {
        parse: parse_start.elapsed(),
        ..Timing::default()
    };
    let run = run_method(args.method, &args.engine, &loaded.dataset, timing)?;
    let stdout = output::render_cluster(args, &loaded, &run);
    let mut stderr = output::render_diagnostics(&loaded.diagnostics);
    stderr.push_str(&run.timing.line());
    Ok(Output { stdout, stderr })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Output, CliError> {
    args.engine.validate()?;
    let reference = load_reference(&args.reference)?;
    let loaded = load_input(&args.input)?;
    let methods = if args.methods.is_empty() {
        vec![Method::Grid, Method::Cm, Method::Reinforce]
    } else {
        args.methods.clone()
    };
    let mut reports: Vec<(Method, AgreementReport)> = Vec::new();
    let mut stderr = output::render_diagnostics(&loaded.diagnostics);
    for method in methods {
        let run = run_method(method, &args.engine, &loaded.dataset, Timing::default())?;
        let produced = run.partition.labeled(&loaded.dataset.vocabulary);
        let report = pairwise_agreement(&produced, &reference)
            .map_err(|e| CliError::Input(format!("{}: {e}", method.name())))?;
        stderr.push_str(&format!("{}: {}", method.name(), run.timing.line()));
        reports.push((method, report));
    }
    let stdout = output::render_compare(args, &loaded, &reports);
    Ok(Output { stdout, stderr })
}

/// The three worked-example tables from the bundled seven-event fixture.
pub fn cmd_tables() -> String {
    let ds = ingest::seven_event();
    let weights = cogrid_core::Weights::default();
    let mut reinforce = ReinforceState::new(ds.vocabulary.len());
    reinforce.update_all(&ds.events, &weights).expect("fixture is valid");
    let mut store = InstanceStore::new(ds.vocabulary.len());
    store.present_all(&ds.events, &weights).expect("fixture is valid");
    let mut grid = CountMatrix::new(&ds.vocabulary);
    grid.update_all(&ds.events).expect("fixture is valid");

    let mut out = String::new();
    out.push_str("Single-variable reinforcement counts\n");
    out.push_str(&render::reinforce_table(&ds.vocabulary, &reinforce));
    out.push_str("\nLocal (I) and global (G) counts per unique instance\n");
    out.push_str(&render::instance_table(&ds.vocabulary, &store));
    out.push_str("\nCross-referenced co-occurrence grid\n");
    out.push_str(&render::grid_table(&grid));
    out
}

pub fn cmd_hierarchy(args: &HierarchyArgs) -> Result<Output, CliError> {
    let config = args.config();
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let loaded = load_input(&args.input)?;
    let mut store = HierarchyStore::new(loaded.dataset.vocabulary.len(), config)?;
    store.present_all(&loaded.dataset.events)?;
    if !args.no_consolidate {
        store.consolidate();
    }
    let vocab = &loaded.dataset.vocabulary;
    let stdout = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&store.to_json(vocab)).expect("json");
            s.push('\n');
            s
        }
        Format::Text => store.render_tree(vocab),
        Format::Csv => {
            return Err(CliError::Config("hierarchy output supports text or json".into()))
        }
    };
    Ok(Output {
        stdout,
        stderr: output::render_diagnostics(&loaded.diagnostics),
    })
}
