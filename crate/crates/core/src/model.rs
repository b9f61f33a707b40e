//! Shared vocabulary, event, dataset and partition types.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a variable inside a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub label: String,
}

/// Label table with ids assigned in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, VarId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from labels in order; fails on a repeated label.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for label in labels {
            let label = label.into();
            if vocab.index.contains_key(&label) {
                return Err(Error::DuplicateVariable(label));
            }
            vocab.intern(&label);
        }
        Ok(vocab)
    }

    /// Returns the id for `label`, allocating the next dense id if unseen.
    pub fn intern(&mut self, label: &str) -> VarId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = VarId(self.labels.len());
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<VarId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: VarId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, id: VarId) -> bool {
        id.0 < self.labels.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = Variable> + '_ {
        self.labels.iter().enumerate().map(|(i, label)| Variable {
            id: VarId(i),
            label: label.clone(),
        })
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.labels.len()).map(VarId)
    }
}

/// One presentation of co-occurring variables. The first member is the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    members: Vec<VarId>,
}

impl Event {
    pub fn new(members: Vec<VarId>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyEvent);
        }
        let mut seen = HashSet::with_capacity(members.len());
        for &m in &members {
            if !seen.insert(m) {
                return Err(Error::DuplicateMember(m.to_string()));
            }
        }
        Ok(Self { members })
    }

    /// Members in presentation order.
    pub fn members(&self) -> &[VarId] {
        &self.members
    }

    pub fn source(&self) -> VarId {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: VarId) -> bool {
        self.members.contains(&id)
    }

    /// Members sorted by id; the order-free identity of the event.
    pub fn sorted_members(&self) -> Vec<VarId> {
        let mut sorted = self.members.clone();
        sorted.sort_unstable();
        sorted
    }

    pub(crate) fn check_against(&self, size: usize) -> Result<()> {
        match self.members.iter().find(|m| m.0 >= size) {
            Some(m) => Err(Error::UnknownVariable { id: m.0, size }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub vocabulary: Vocabulary,
    pub events: Vec<Event>,
}

impl Dataset {
    /// Builds a dataset from already-encoded events, checking every member.
    pub fn new(vocabulary: Vocabulary, events: Vec<Event>) -> Result<Self> {
        for event in &events {
            event.check_against(vocabulary.len())?;
        }
        Ok(Self { vocabulary, events })
    }

    /// Decodes every event back to its labels in presentation order.
    pub fn decode(&self) -> Vec<Vec<String>> {
        self.events
            .iter()
            .map(|e| {
                e.members()
                    .iter()
                    .map(|&m| self.vocabulary.label(m).to_owned())
                    .collect()
            })
            .collect()
    }

    pub fn event_labels(&self, event: &Event) -> Vec<&str> {
        event
            .members()
            .iter()
            .map(|&m| self.vocabulary.label(m))
            .collect()
    }
}

/// A rejected input record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Zero-based record index (event position or file line).
    pub record: usize,
    pub reason: String,
}

/// Encodes raw token lists over a fresh vocabulary.
///
/// Events with a repeated token, or with no tokens at all, are rejected with
/// a diagnostic and contribute nothing to the vocabulary.
pub fn build_vocabulary<S: AsRef<str>>(raw: &[Vec<S>]) -> (Dataset, Vec<Diagnostic>) {
    let mut vocabulary = Vocabulary::new();
    let mut events = Vec::with_capacity(raw.len());
    let mut diagnostics = Vec::new();
    for (record, tokens) in raw.iter().enumerate() {
        if let Err(reason) = check_tokens(tokens) {
            diagnostics.push(Diagnostic { record, reason });
            continue;
        }
        let members = tokens
            .iter()
            .map(|t| vocabulary.intern(t.as_ref()))
            .collect();
        events.push(Event { members });
    }
    (Dataset { vocabulary, events }, diagnostics)
}

pub(crate) fn check_tokens<S: AsRef<str>>(tokens: &[S]) -> std::result::Result<(), String> {
    if tokens.is_empty() {
        return Err("event has no members".to_owned());
    }
    let mut seen = HashSet::with_capacity(tokens.len());
    for t in tokens {
        if !seen.insert(t.as_ref()) {
            return Err(format!("duplicate member `{}`", t.as_ref()));
        }
    }
    Ok(())
}

/// Per-variable, group, and absence weights used by the counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub omega_i: f64,
    pub omega_g: f64,
    pub delta: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            omega_i: 1.0,
            omega_g: 1.0,
            delta: 0.0,
        }
    }
}

impl Weights {
    pub fn new(omega_i: f64, omega_g: f64, delta: f64) -> Result<Self> {
        let w = Self {
            omega_i,
            omega_g,
            delta,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_i.is_finite() && self.omega_i > 0.0) {
            return Err(Error::InvalidWeights(format!(
                "omega_i must be positive, got {}",
                self.omega_i
            )));
        }
        if !(self.omega_g.is_finite() && self.omega_g > 0.0) {
            return Err(Error::InvalidWeights(format!(
                "omega_g must be positive, got {}",
                self.omega_g
            )));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidWeights(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Disjoint clusters over a vocabulary plus the variables left unassigned.
///
/// Stored canonically: members ascending within each cluster, clusters
/// ordered by their smallest member.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    clusters: Vec<Vec<VarId>>,
    unassigned: Vec<VarId>,
}

impl Partition {
    /// Validates `clusters` against a universe of `universe` variables and
    /// puts every uncovered variable into `unassigned`.
    pub fn new(clusters: Vec<Vec<VarId>>, universe: usize) -> Result<Self> {
        let mut owner = vec![false; universe];
        let mut canonical = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            if cluster.is_empty() {
                return Err(Error::InvalidPartition("empty cluster".into()));
            }
            let mut cluster = cluster;
            cluster.sort_unstable();
            for &v in &cluster {
                if v.0 >= universe {
                    return Err(Error::UnknownVariable {
                        id: v.0,
                        size: universe,
                    });
                }
                if owner[v.0] {
                    return Err(Error::InvalidPartition(format!(
                        "variable {v} appears in more than one cluster"
                    )));
                }
                owner[v.0] = true;
            }
            canonical.push(cluster);
        }
        canonical.sort_unstable_by_key(|c| c[0]);
        let unassigned = (0..universe)
            .filter(|&i| !owner[i])
            .map(VarId)
            .collect();
        Ok(Self {
            clusters: canonical,
            unassigned,
        })
    }

    pub fn clusters(&self) -> &[Vec<VarId>] {
        &self.clusters
    }

    pub fn unassigned(&self) -> &[VarId] {
        &self.unassigned
    }

    pub fn universe(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum::<usize>() + self.unassigned.len()
    }

    /// Cluster index of every variable, `None` for unassigned ones.
    pub fn assignment(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.universe()];
        for (ci, cluster) in self.clusters.iter().enumerate() {
            for v in cluster {
                out[v.0] = Some(ci);
            }
        }
        out
    }

    pub fn labeled(&self, vocab: &Vocabulary) -> LabeledPartition {
        let names = |ids: &[VarId]| ids.iter().map(|&v| vocab.label(v).to_owned()).collect();
        LabeledPartition {
            clusters: self.clusters.iter().map(|c| names(c)).collect(),
            unassigned: names(&self.unassigned),
        }
    }
}

/// A partition expressed over labels, used for comparison and output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPartition {
    pub clusters: Vec<Vec<String>>,
    pub unassigned: Vec<String>,
}

impl LabeledPartition {
    /// Treats every block as a cluster; single-label blocks are kept as given.
    pub fn from_blocks(blocks: Vec<Vec<String>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty cluster".into()));
            }
            for label in block {
                if !seen.insert(label.as_str()) {
                    return Err(Error::InvalidPartition(format!(
                        "label `{label}` appears more than once"
                    )));
                }
            }
        }
        Ok(Self {
            clusters: blocks,
            unassigned: Vec::new(),
        })
    }

    /// Clusters followed by each unassigned label as its own block.
    pub fn blocks(&self) -> Vec<Vec<String>> {
        self.clusters
            .iter()
            .cloned()
            .chain(self.unassigned.iter().map(|u| vec![u.clone()]))
            .collect()
    }

    pub fn universe(&self) -> BTreeSet<String> {
        self.clusters
            .iter()
            .flatten()
            .chain(self.unassigned.iter())
            .cloned()
            .collect()
    }

    /// Clusters with two or more members as order-free label sets.
    pub fn canonical(&self) -> BTreeSet<BTreeSet<String>> {
        self.clusters
            .iter()
            .filter(|c| c.len() > 1)
            .map(|c| c.iter().cloned().collect())
            .collect()
    }
}

/// Residual co-occurrence between two variables in different clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterPatternLink {
    pub a: VarId,
    pub b: VarId,
    pub strength: u64,
}
