//! Cross-referenced co-occurrence grid.
//!
//! Every variable is both a row and a column. Presenting an event bumps the
//! cell of every unordered pair of its members, in both triangles; the
//! diagonal is never written. Clusters are read out row by row: each row
//! nominates its head set (the counts above the widest gap in its sorted
//! values), two variables are joined only when each nominates the other, and
//! clusters are the connected components of that agreement graph.
//! Cross-cluster cells at or above a threshold are reported as links.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Event, InterPatternLink, Partition, VarId, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    labels: Vec<String>,
    cells: Vec<u64>,
    increments: u64,
}

/// Which cut wins when several gaps share the maximal width.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapTieBreak {
    /// The earliest cut, keeping the head set small.
    #[default]
    Larger,
    /// The latest cut, keeping the head set large.
    Smaller,
}

/// What happens to variables that end up in no cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingletonPolicy {
    #[default]
    Unassigned,
    /// Join the cluster of the strongest clustered partner, if any.
    Attach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub tau_link: u64,
    pub gap_tie: GapTieBreak,
    pub singletons: SingletonPolicy,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            tau_link: 2,
            gap_tie: GapTieBreak::Larger,
            singletons: SingletonPolicy::Unassigned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridClusterResult {
    pub partition: Partition,
    pub links: Vec<InterPatternLink>,
    /// Head set of every row, ascending by id.
    pub head_sets: Vec<Vec<VarId>>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    labels: Vec<String>,
    cells: Vec<Vec<u64>>,
}

impl CountMatrix {
    pub fn new(vocab: &Vocabulary) -> Self {
        Self::from_labels(vocab.labels().to_vec())
    }

    pub fn from_labels(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            cells: vec![0; n * n],
            increments: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of cell writes performed by updates so far.
    pub fn increments(&self) -> u64 {
        self.increments
    }

    pub fn cell(&self, a: VarId, b: VarId) -> u64 {
        self.cells[a.0 * self.len() + b.0]
    }

    pub fn row(&self, v: VarId) -> &[u64] {
        let n = self.len();
        &self.cells[v.0 * n..(v.0 + 1) * n]
    }

    pub fn update(&mut self, event: &Event) -> Result<()> {
        let n = self.len();
        event.check_against(n)?;
        let members = event.members();
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                self.cells[a.0 * n + b.0] += 1;
                self.cells[b.0 * n + a.0] += 1;
            }
        }
        let k = members.len() as u64;
        self.increments += k * k.saturating_sub(1);
        Ok(())
    }

    pub fn update_all<'a, I>(&mut self, events: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a Event>,
    {
        for event in events {
            self.update(event)?;
        }
        Ok(())
    }

    /// Counts `events` in `shards` contiguous chunks on scoped threads and
    /// merges the shard grids in chunk order.
    pub fn count_sharded(vocab: &Vocabulary, events: &[Event], shards: usize) -> Result<Self> {
        let shards = shards.max(1);
        if shards == 1 || events.len() < 2 {
            let mut grid = Self::new(vocab);
            grid.update_all(events)?;
            return Ok(grid);
        }
        let chunk = events.len().div_ceil(shards);
        let parts: Vec<Result<Self>> = thread::scope(|s| {
            let handles: Vec<_> = events
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        let mut grid = Self::new(vocab);
                        grid.update_all(part).map(|_| grid)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("counting shard panicked"))
                .collect()
        });
        let mut total = Self::new(vocab);
        for part in parts {
            total.merge(&part?)?;
        }
        Ok(total)
    }

    /// Cellwise sum of two grids over the same labels.
    pub fn merge(&mut self, other: &CountMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::VocabularyMismatch(format!(
                "grid over {} labels cannot absorb grid over {} labels",
                self.len(),
                other.len()
            )));
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a += b;
        }
        self.increments += other.increments;
        Ok(())
    }

    /// Appends a zero row and column for a new label.
    pub fn add_variable(&mut self, label: &str) -> Result<VarId> {
        if self.labels.iter().any(|l| l == label) {
            return Err(Error::DuplicateVariable(label.to_owned()));
        }
        let n = self.len();
        let m = n + 1;
        let mut cells = vec![0; m * m];
        for i in 0..n {
            cells[i * m..i * m + n].copy_from_slice(&self.cells[i * n..(i + 1) * n]);
        }
        self.cells = cells;
        self.labels.push(label.to_owned());
        Ok(VarId(n))
    }

    /// Variables above the widest gap in row `v`'s sorted nonzero counts.
    ///
    /// A row whose nonzero counts are all equal keeps all of them; an
    /// all-zero row has an empty head set.
    pub fn head_set(&self, v: VarId, tie: GapTieBreak) -> Vec<VarId> {
        let mut entries: Vec<(u64, VarId)> = self
            .row(v)
            .iter()
            .enumerate()
            .filter(|&(j, &c)| j != v.0 && c > 0)
            .map(|(j, &c)| (c, VarId(j)))
            .collect();
        if entries.is_empty() {
            return Vec::new();
        }
        entries.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut cut = entries.len();
        let mut widest = 0;
        for k in 0..entries.len() - 1 {
            let gap = entries[k].0 - entries[k + 1].0;
            let better = match tie {
                GapTieBreak::Larger => gap > widest,
                GapTieBreak::Smaller => gap >= widest && gap > 0,
            };
            if better {
                widest = gap;
                cut = k + 1;
            }
        }
        let mut head: Vec<VarId> = entries[..cut].iter().map(|&(_, id)| id).collect();
        head.sort_unstable();
        head
    }

    pub fn extract_clusters(&self, opts: &ExtractOptions) -> Result<GridClusterResult> {
        if opts.tau_link == 0 {
            return Err(Error::InvalidParameter("tau_link must be at least 1".into()));
        }
        let n = self.len();
        let head_sets: Vec<Vec<VarId>> = (0..n)
            .map(|v| self.head_set(VarId(v), opts.gap_tie))
            .collect();

        let mut components = DisjointSet::new(n);
        for (v, head) in head_sets.iter().enumerate() {
            for &w in head {
                if w.0 > v && head_sets[w.0].binary_search(&VarId(v)).is_ok() {
                    components.union(v, w.0);
                }
            }
        }
        let mut groups: Vec<Vec<VarId>> = vec![Vec::new(); n];
        for v in 0..n {
            groups[components.find(v)].push(VarId(v));
        }
        let mut clusters: Vec<Vec<VarId>> = groups.into_iter().filter(|g| g.len() > 1).collect();

        if opts.singletons == SingletonPolicy::Attach {
            self.attach_singletons(&mut clusters);
        }

        let partition = Partition::new(clusters, n)?;
        let owner = partition.assignment();
        let mut links = Vec::new();
        for a in 0..n {
            let Some(ca) = owner[a] else { continue };
            for b in a + 1..n {
                let strength = self.cells[a * n + b];
                match owner[b] {
                    Some(cb) if cb != ca && strength >= opts.tau_link => {
                        links.push(InterPatternLink {
                            a: VarId(a),
                            b: VarId(b),
                            strength,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(GridClusterResult {
            partition,
            links,
            head_sets,
        })
    }

    fn attach_singletons(&self, clusters: &mut [Vec<VarId>]) {
        let n = self.len();
        let mut owner = vec![None; n];
        for (ci, c) in clusters.iter().enumerate() {
            for v in c {
                owner[v.0] = Some(ci);
            }
        }
        let mut moves = Vec::new();
        for v in 0..n {
            if owner[v].is_some() {
                continue;
            }
            let best = (0..n)
                .filter_map(|w| owner[w].map(|ci| (self.cells[v * n + w], w, ci)))
                .filter(|&(c, _, _)| c > 0)
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            if let Some((_, _, ci)) = best {
                moves.push((VarId(v), ci));
            }
        }
        for (v, ci) in moves {
            clusters[ci].push(v);
        }
    }

    /// Matrix as CSV with a label header row and column; the diagonal is `x`.
    pub fn to_csv(&self) -> String {
        let n = self.len();
        let mut out = String::new();
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&self.labels[i]);
            for j in 0..n {
                out.push(',');
                if i == j {
                    out.push('x');
                } else {
                    out.push_str(&self.cells[i * n + j].to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Matrix as `{"labels": [...], "cells": [[...]]}` with a zero diagonal.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.len();
        let json = MatrixJson {
            labels: self.labels.clone(),
            cells: (0..n).map(|i| self.cells[i * n..(i + 1) * n].to_vec()).collect(),
        };
        serde_json::to_value(json).expect("matrix serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let json: MatrixJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidParameter(format!("matrix json: {e}")))?;
        let n = json.labels.len();
        if json.cells.len() != n || json.cells.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix json is not square".into()));
        }
        let mut grid = Self::from_labels(json.labels);
        for (i, row) in json.cells.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if i != j {
                    grid.cells[i * n + j] = c;
                }
            }
        }
        Ok(grid)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so component roots are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
