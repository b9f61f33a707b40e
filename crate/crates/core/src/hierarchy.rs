//! Incremental pattern-instance hierarchy.
//!
//! Presented patterns become root nodes. A later presentation that adds
//! variables to an existing root is stored as an extension of it; one that
//! is a proper subset of a root is tracked against that root; one that
//! barely overlaps any root spawns a fresh root of its own. Consolidation
//! folds a dominant extension into its parent and splits a parent whose
//! subset is presented far more often than the whole.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Event, VarId, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    /// Extension count over parent-only count at which the two merge.
    pub theta_merge: f64,
    /// Subset count over full-pattern count at which the pattern splits.
    pub theta_split: f64,
    /// Minimum overlap fraction for a presentation to attach to a root.
    pub theta_new: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            theta_merge: 2.0,
            theta_split: 2.0,
            theta_new: 0.5,
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_new > 0.0 && self.theta_new <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta_new must lie in (0, 1], got {}",
                self.theta_new
            )));
        }
        if !(self.theta_merge.is_finite() && self.theta_merge > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta_merge must exceed 1, got {}",
                self.theta_merge
            )));
        }
        if !(self.theta_split.is_finite() && self.theta_split > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta_split must exceed 1, got {}",
                self.theta_split
            )));
        }
        Ok(())
    }
}

/// Variables appended to a parent pattern, with their own count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension {
    pub extras: Vec<VarId>,
    pub occurrences: u64,
}

/// Presentations of a proper subset of a node's pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetCount {
    pub pattern: Vec<VarId>,
    pub occurrences: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternNode {
    pub pattern: Vec<VarId>,
    /// Exact presentations of `pattern` alone.
    pub occurrences: u64,
    pub extensions: Vec<Extension>,
    pub subsets: Vec<SubsetCount>,
    /// Presentations attached here that were neither subset nor superset.
    pub partial: u64,
}

impl PatternNode {
    fn new(pattern: Vec<VarId>, occurrences: u64) -> Self {
        Self {
            pattern,
            occurrences,
            extensions: Vec::new(),
            subsets: Vec::new(),
            partial: 0,
        }
    }

    /// Parent pattern joined with an extension's extras.
    pub fn full_pattern(&self, ext: &Extension) -> Vec<VarId> {
        union(&self.pattern, &ext.extras)
    }

    /// Every presentation recorded against this node.
    pub fn mass(&self) -> u64 {
        self.occurrences
            + self.extensions.iter().map(|e| e.occurrences).sum::<u64>()
            + self.subsets.iter().map(|s| s.occurrences).sum::<u64>()
            + self.partial
    }

    fn bump_extension(&mut self, extras: Vec<VarId>, by: u64) {
        if by == 0 {
            return;
        }
        match self.extensions.iter_mut().find(|e| e.extras == extras) {
            Some(e) => e.occurrences += by,
            None => self.extensions.push(Extension {
                extras,
                occurrences: by,
            }),
        }
    }

    fn bump_subset(&mut self, pattern: Vec<VarId>, by: u64) {
        if by == 0 {
            return;
        }
        match self.subsets.iter_mut().find(|s| s.pattern == pattern) {
            Some(s) => s.occurrences += by,
            None => self.subsets.push(SubsetCount {
                pattern,
                occurrences: by,
            }),
        }
    }

    fn absorb(&mut self, other: PatternNode) {
        self.occurrences += other.occurrences;
        self.partial += other.partial;
        for e in other.extensions {
            self.bump_extension(e.extras, e.occurrences);
        }
        for s in other.subsets {
            self.bump_subset(s.pattern, s.occurrences);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyStore {
    config: HierarchyConfig,
    universe: usize,
    roots: Vec<PatternNode>,
    presentations: u64,
}

impl HierarchyStore {
    pub fn new(vocab_size: usize, config: HierarchyConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            universe: vocab_size,
            roots: Vec::new(),
            presentations: 0,
        })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.config
    }

    pub fn roots(&self) -> &[PatternNode] {
        &self.roots
    }

    pub fn presentations(&self) -> u64 {
        self.presentations
    }

    /// Sum of every counter in the store; equals `presentations()`.
    pub fn mass(&self) -> u64 {
        self.roots.iter().map(PatternNode::mass).sum()
    }

    pub fn present_pattern(&mut self, event: &Event) -> Result<()> {
        event.check_against(self.universe)?;
        let set = event.sorted_members();
        self.presentations += 1;

        if let Some(root) = self.roots.iter_mut().find(|r| r.pattern == set) {
            root.occurrences += 1;
            return Ok(());
        }

        // largest root that the presentation strictly contains, earliest on ties
        let parent = self
            .roots
            .iter()
            .enumerate()
            .filter(|(_, r)| is_subset(&r.pattern, &set))
            .max_by(|(ia, a), (ib, b)| a.pattern.len().cmp(&b.pattern.len()).then(ib.cmp(ia)))
            .map(|(i, _)| i);
        if let Some(i) = parent {
            let extras = difference(&set, &self.roots[i].pattern);
            self.roots[i].bump_extension(extras, 1);
            return Ok(());
        }

        let best = self
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| (i, intersection_len(&r.pattern, &set) as f64 / set.len() as f64))
            .fold(None, |best: Option<(usize, f64)>, (i, f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((i, f)),
            });
        match best {
            Some((i, f)) if f >= self.config.theta_new => {
                let root = &mut self.roots[i];
                if is_subset(&set, &root.pattern) {
                    root.bump_subset(set, 1);
                } else {
                    root.partial += 1;
                }
            }
            _ => self.roots.push(PatternNode::new(set, 1)),
        }
        Ok(())
    }

    pub fn present_all<'a, I>(&mut self, events: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a Event>,
    {
        for event in events {
            self.present_pattern(event)?;
        }
        Ok(())
    }

    /// Applies merges and splits until neither rule fires.
    pub fn consolidate(&mut self) {
        while self.consolidate_step() {}
    }

    fn consolidate_step(&mut self) -> bool {
        for i in 0..self.roots.len() {
            if let Some(e) = self.merge_candidate(&self.roots[i]) {
                merge_extension(&mut self.roots[i], e);
                self.dedup_roots();
                return true;
            }
            if let Some(s) = self.split_candidate(&self.roots[i]) {
                split_subset(&mut self.roots[i], s);
                self.dedup_roots();
                return true;
            }
        }
        false
    }

    fn merge_candidate(&self, node: &PatternNode) -> Option<usize> {
        let parent_only = node.occurrences as f64;
        node.extensions
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                e.occurrences > 0 && e.occurrences as f64 >= self.config.theta_merge * parent_only
            })
            .max_by(|(_, a), (_, b)| {
                a.occurrences
                    .cmp(&b.occurrences)
                    .then_with(|| b.extras.cmp(&a.extras))
            })
            .map(|(i, _)| i)
    }

    fn split_candidate(&self, node: &PatternNode) -> Option<usize> {
        let full = node.occurrences as f64;
        node.subsets
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.occurrences > 0 && s.occurrences as f64 >= self.config.theta_split * full
            })
            .max_by(|(_, a), (_, b)| {
                a.occurrences
                    .cmp(&b.occurrences)
                    .then_with(|| a.pattern.len().cmp(&b.pattern.len()))
                    .then_with(|| b.pattern.cmp(&a.pattern))
            })
            .map(|(i, _)| i)
    }

    /// Whether `consolidate` would change nothing.
    pub fn is_fixed_point(&self) -> bool {
        self.roots
            .iter()
            .all(|n| self.merge_candidate(n).is_none() && self.split_candidate(n).is_none())
    }

    fn dedup_roots(&mut self) {
        let mut kept: Vec<PatternNode> = Vec::with_capacity(self.roots.len());
        for node in self.roots.drain(..) {
            match kept.iter_mut().find(|k| k.pattern == node.pattern) {
                Some(k) => k.absorb(node),
                None => kept.push(node),
            }
        }
        self.roots = kept;
    }

    /// Indented text tree: `+` extensions, `~` tracked subsets.
    pub fn render_tree(&self, vocab: &Vocabulary) -> String {
        let names = |ids: &[VarId]| {
            ids.iter()
                .map(|&v| vocab.label(v))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        for root in &self.roots {
            let _ = writeln!(out, "[{}] x{}", names(&root.pattern), root.occurrences);
            for e in &root.extensions {
                let _ = writeln!(out, "  + [{}] x{}", names(&e.extras), e.occurrences);
            }
            for s in &root.subsets {
                let _ = writeln!(out, "  ~ [{}] x{}", names(&s.pattern), s.occurrences);
            }
            if root.partial > 0 {
                let _ = writeln!(out, "  ? partial x{}", root.partial);
            }
        }
        out
    }

    pub fn to_json(&self, vocab: &Vocabulary) -> serde_json::Value {
        let names = |ids: &[VarId]| -> Vec<String> {
            ids.iter().map(|&v| vocab.label(v).to_owned()).collect()
        };
        let roots: Vec<serde_json::Value> = self
            .roots
            .iter()
            .map(|n| {
                serde_json::json!({
                    "pattern": names(&n.pattern),
                    "occurrences": n.occurrences,
                    "extensions": n.extensions.iter().map(|e| serde_json::json!({
                        "extras": names(&e.extras),
                        "pattern": names(&n.full_pattern(e)),
                        "occurrences": e.occurrences,
                    })).collect::<Vec<_>>(),
                    "subsets": n.subsets.iter().map(|s| serde_json::json!({
                        "pattern": names(&s.pattern),
                        "occurrences": s.occurrences,
                    })).collect::<Vec<_>>(),
                    "partial": n.partial,
                })
            })
            .collect();
        serde_json::json!({
            "parameters": self.config,
            "presentations": self.presentations,
            "roots": roots,
        })
    }
}

fn merge_extension(node: &mut PatternNode, index: usize) {
    let ext = node.extensions.remove(index);
    let old_pattern = std::mem::take(&mut node.pattern);
    let new_pattern = union(&old_pattern, &ext.extras);
    let parent_only = std::mem::replace(&mut node.occurrences, ext.occurrences);

    let others = std::mem::take(&mut node.extensions);
    node.pattern = new_pattern;
    node.bump_subset(old_pattern.clone(), parent_only);
    for other in others {
        let full = union(&old_pattern, &other.extras);
        if is_subset(&node.pattern, &full) {
            node.bump_extension(difference(&full, &node.pattern), other.occurrences);
        } else if is_subset(&full, &node.pattern) {
            node.bump_subset(full, other.occurrences);
        } else {
            node.partial += other.occurrences;
        }
    }
}

fn split_subset(node: &mut PatternNode, index: usize) {
    let sub = node.subsets.remove(index);
    let old_pattern = std::mem::take(&mut node.pattern);
    let remainder = difference(&old_pattern, &sub.pattern);
    let full_count = std::mem::replace(&mut node.occurrences, sub.occurrences);
    node.pattern = sub.pattern;

    let extensions = std::mem::take(&mut node.extensions);
    let subsets = std::mem::take(&mut node.subsets);
    node.bump_extension(remainder.clone(), full_count);
    for e in extensions {
        node.bump_extension(union(&remainder, &e.extras), e.occurrences);
    }
    for s in subsets {
        if is_subset(&node.pattern, &s.pattern) {
            node.bump_extension(difference(&s.pattern, &node.pattern), s.occurrences);
        } else if is_subset(&s.pattern, &node.pattern) {
            node.bump_subset(s.pattern, s.occurrences);
        } else {
            node.partial += s.occurrences;
        }
    }
}

// Set helpers over ascending id vectors.

/// `a ⊊ b`.
fn is_subset(a: &[VarId], b: &[VarId]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.binary_search(x).is_ok())
}

fn union(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let set: BTreeSet<VarId> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

fn difference(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().filter(|x| b.binary_search(x).is_err()).copied().collect()
}

fn intersection_len(a: &[VarId], b: &[VarId]) -> usize {
    a.iter().filter(|x| b.binary_search(x).is_ok()).count()
}
