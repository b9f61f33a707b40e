//! Pair-counting agreement between two partitions of the same labels.
//!
//! A pair of labels is positive when both land in the same block.
//! Unassigned labels count as singleton blocks. With no positive pairs on a
//! side, the matching ratio (precision for `produced`, recall for
//! `reference`) is taken as 1.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LabeledPartition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMatch {
    pub produced: Vec<String>,
    /// Reference block sharing the most labels; earliest block on ties.
    pub best_reference: Vec<String>,
    pub overlap: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub pairwise_precision: f64,
    pub pairwise_recall: f64,
    pub pairwise_f1: f64,
    pub rand_index: f64,
    pub produced_pairs: u64,
    pub reference_pairs: u64,
    pub shared_pairs: u64,
    pub total_pairs: u64,
    /// Blocks (singletons included) identical in both partitions.
    pub exact_cluster_matches: usize,
    pub per_cluster: Vec<ClusterMatch>,
}

fn pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

pub fn pairwise_agreement(
    produced: &LabeledPartition,
    reference: &LabeledPartition,
) -> Result<AgreementReport> {
    let universe = produced.universe();
    let other = reference.universe();
    if universe != other {
        let missing: Vec<_> = other.difference(&universe).take(5).cloned().collect();
        let extra: Vec<_> = universe.difference(&other).take(5).cloned().collect();
        return Err(Error::VocabularyMismatch(format!(
            "produced lacks {missing:?}, reference lacks {extra:?}"
        )));
    }

    let produced_blocks = produced.blocks();
    let reference_blocks = reference.blocks();
    let mut ref_of: HashMap<&str, usize> = HashMap::new();
    for (i, block) in reference_blocks.iter().enumerate() {
        for label in block {
            ref_of.insert(label.as_str(), i);
        }
    }

    let produced_pairs: u64 = produced_blocks.iter().map(|b| pairs(b.len())).sum();
    let reference_pairs: u64 = reference_blocks.iter().map(|b| pairs(b.len())).sum();
    let mut shared_pairs = 0;
    let mut per_cluster = Vec::with_capacity(produced_blocks.len());
    for block in &produced_blocks {
        // contingency row of this block against the reference blocks
        let mut row: HashMap<usize, usize> = HashMap::new();
        for label in block {
            *row.entry(ref_of[label.as_str()]).or_default() += 1;
        }
        shared_pairs += row.values().map(|&c| pairs(c)).sum::<u64>();
        let (best, overlap) = row
            .iter()
            .map(|(&i, &c)| (i, c))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("blocks are non-empty");
        let exact = overlap == block.len() && overlap == reference_blocks[best].len();
        per_cluster.push(ClusterMatch {
            produced: block.clone(),
            best_reference: reference_blocks[best].clone(),
            overlap,
            exact,
        });
    }

    let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let precision = ratio(shared_pairs, produced_pairs);
    let recall = ratio(shared_pairs, reference_pairs);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let total_pairs = pairs(universe.len());
    let disagreements = produced_pairs + reference_pairs - 2 * shared_pairs;
    let rand_index = ratio(total_pairs - disagreements, total_pairs);

    Ok(AgreementReport {
        pairwise_precision: precision,
        pairwise_recall: recall,
        pairwise_f1: f1,
        rand_index,
        produced_pairs,
        reference_pairs,
        shared_pairs,
        total_pairs,
        exact_cluster_matches: per_cluster.iter().filter(|m| m.exact).count(),
        per_cluster,
    })
}

impl AgreementReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pairwise precision  {:.4}", self.pairwise_precision);
        let _ = writeln!(out, "pairwise recall     {:.4}", self.pairwise_recall);
        let _ = writeln!(out, "pairwise f1         {:.4}", self.pairwise_f1);
        let _ = writeln!(out, "rand index          {:.4}", self.rand_index);
        let _ = writeln!(
            out,
            "pairs               produced {} / reference {} / shared {} / total {}",
            self.produced_pairs, self.reference_pairs, self.shared_pairs, self.total_pairs
        );
        let _ = writeln!(out, "exact block matches {}", self.exact_cluster_matches);
        let _ = writeln!(out, "(a side with no positive pairs scores 1 on its ratio)");
        for m in self.per_cluster.iter().filter(|m| m.produced.len() > 1) {
            let _ = writeln!(
                out,
                "  {{{}}} -> {{{}}} overlap {}{}",
                m.produced.join(", "),
                m.best_reference.join(", "),
                m.overlap,
                if m.exact { " exact" } else { "" }
            );
        }
        out
    }
}

/// Canonical label-set view of the positive pairs, for tests and audits.
pub fn positive_pairs(partition: &LabeledPartition) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for block in partition.blocks() {
        for (i, a) in block.iter().enumerate() {
            for b in &block[i + 1..] {
                let pair = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                out.insert(pair);
            }
        }
    }
    out
}
