use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use cogrid_core::counting::CoherenceMeasure;
use cogrid_core::grid::{ExtractOptions, GapTieBreak, SingletonPolicy};
use cogrid_core::hierarchy::HierarchyConfig;
use cogrid_core::ingest::{LabelPolicy, TransactionFormat};
use cogrid_core::Weights;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Parser)]
#[command(name = "cogrid", version, about = "Count-reinforcement clustering for categorical events")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Cluster one input with one counting method.
    Cluster(ClusterArgs),
    /// Score one or more methods against a reference partition.
    Compare(CompareArgs),
    /// Print the three count tables of the seven-event example.
    Tables,
    /// Build and consolidate a pattern hierarchy.
    Hierarchy(HierarchyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Reinforce,
    Cm,
    Grid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Reinforce => "reinforce",
            Method::Cm => "cm",
            Method::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coherence {
    #[default]
    Difference,
    Ratio,
}

impl From<Coherence> for CoherenceMeasure {
    fn from(c: Coherence) -> Self {
        match c {
            Coherence::Difference => CoherenceMeasure::Difference,
            Coherence::Ratio => CoherenceMeasure::Ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapTie {
    #[default]
    Larger,
    Smaller,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Singletons {
    #[default]
    Unassigned,
    Attach,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "fixture"])))]
pub struct InputArgs {
    /// Transaction file, one record per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in event set (`seven_event`).
    #[arg(long)]
    pub fixture: Option<String>,
    /// Field delimiter of the input file.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Treat every field as a member instead of dropping the record label.
    #[arg(long)]
    pub no_label: bool,
    /// Cluster record labels by the members they share.
    #[arg(long, conflicts_with = "no_label")]
    pub transpose: bool,
}

impl InputArgs {
    pub fn format(&self) -> TransactionFormat {
        TransactionFormat {
            delimiter: self.delimiter,
            label_policy: if self.no_label {
                LabelPolicy::AllFieldsAreMembers
            } else {
                LabelPolicy::FirstFieldIsRecordLabel
            },
            transpose: self.transpose,
        }
    }
}

/// Counting and extraction parameters shared by `cluster` and `compare`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct EngineArgs {
    /// Per-variable increment.
    #[arg(long, default_value_t = 1.0)]
    pub omega_i: f64,
    /// Group increment of the counting mechanism.
    #[arg(long, default_value_t = 1.0)]
    pub omega_g: f64,
    /// Absence decrement of single-variable reinforcement.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Minimum cell count for a cross-cluster link.
    #[arg(long, default_value_t = 2)]
    pub tau_link: u64,
    /// Which widest gap cuts a grid row when several tie.
    #[arg(long, value_enum, default_value_t = GapTie::Larger)]
    pub gap_tie: GapTie,
    /// Handling of variables left outside every grid cluster.
    #[arg(long, value_enum, default_value_t = Singletons::Unassigned)]
    pub singletons: Singletons,
    /// Coherence measure for instance selection.
    #[arg(long, value_enum, default_value_t = Coherence::Difference)]
    pub coherence: Coherence,
    /// Worker threads for grid and reinforce counting.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
}

impl EngineArgs {
    pub fn weights(&self) -> Result<Weights, CliError> {
        Weights::new(self.omega_i, self.omega_g, self.delta).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn extract_options(&self) -> Result<ExtractOptions, CliError> {
        if self.tau_link == 0 {
            return Err(CliError::Config("--tau-link must be at least 1".into()));
        }
        Ok(ExtractOptions {
            tau_link: self.tau_link,
            gap_tie: match self.gap_tie {
                GapTie::Larger => GapTieBreak::Larger,
                GapTie::Smaller => GapTieBreak::Smaller,
            },
            singletons: match self.singletons {
                Singletons::Unassigned => SingletonPolicy::Unassigned,
                Singletons::Attach => SingletonPolicy::Attach,
            },
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.weights()?;
        self.extract_options()?;
        if self.shards == 0 {
            return Err(CliError::Config("--shards must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Include per-phase timings in JSON output.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Methods to score; repeat the flag for several. Defaults to all three.
    #[arg(long = "method", value_enum)]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub input: InputArgs,
    /// Reference partition: a JSON list of label lists, or `appendix_a_reference`.
    #[arg(long)]
    pub reference: String,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct HierarchyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2.0)]
    pub theta_merge: f64,
    #[arg(long, default_value_t = 2.0)]
    pub theta_split: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta_new: f64,
    /// Report the hierarchy as presented, without merges or splits.
    #[arg(long)]
    pub no_consolidate: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl HierarchyArgs {
    pub fn config(&self) -> HierarchyConfig {
        HierarchyConfig {
            theta_merge: self.theta_merge,
            theta_split: self.theta_split,
            theta_new: self.theta_new,
        }
    }
}
