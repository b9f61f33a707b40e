//! Tab-separated renderings of count tables.

use std::fmt::Write as _;

use crate::counting::InstanceStore;
use crate::grid::CountMatrix;
use crate::model::{VarId, Vocabulary};
use crate::reinforce::ReinforceState;

/// Whole numbers print without a fractional part.
pub fn fmt_count(c: f64) -> String {
    format!("{c}")
}

pub fn labels_of(vocab: &Vocabulary, ids: &[VarId]) -> Vec<String> {
    ids.iter().map(|&v| vocab.label(v).to_owned()).collect()
}

/// One header row of labels, one row `I` of counts.
pub fn reinforce_table(vocab: &Vocabulary, state: &ReinforceState) -> String {
    let mut out = String::new();
    for label in vocab.labels() {
        let _ = write!(out, "\t{label}");
    }
    out.push_str("\nI");
    for &c in state.counts() {
        let _ = write!(out, "\t{}", fmt_count(c));
    }
    out.push('\n');
    out
}

/// One column per instance in creation order, rows `I` and `G`.
pub fn instance_table(vocab: &Vocabulary, store: &InstanceStore) -> String {
    let mut out = String::new();
    for r in store.instances() {
        let _ = write!(out, "\t{}", labels_of(vocab, &r.pattern).join(", "));
    }
    out.push_str("\nI");
    for r in store.instances() {
        let _ = write!(out, "\t{}", fmt_count(r.local_count));
    }
    out.push_str("\nG");
    for r in store.instances() {
        let _ = write!(out, "\t{}", fmt_count(r.global_count));
    }
    out.push('\n');
    out
}

/// Full matrix with label header row and column; the diagonal prints `x`.
pub fn grid_table(grid: &CountMatrix) -> String {
    let mut out = String::new();
    for label in grid.labels() {
        let _ = write!(out, "\t{label}");
    }
    out.push('\n');
    for (i, label) in grid.labels().iter().enumerate() {
        out.push_str(label);
        for (j, c) in grid.row(VarId(i)).iter().enumerate() {
            if i == j {
                out.push_str("\tx");
            } else {
                let _ = write!(out, "\t{c}");
            }
        }
        out.push('\n');
    }
    out
}
