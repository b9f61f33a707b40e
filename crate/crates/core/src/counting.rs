//! Counting mechanism over unique pattern instances.
//!
//! Every distinct member set presented becomes one [`InstanceRecord`]. Its
//! local count `I` grows on exact re-presentation; its global count `G` grows
//! on every presentation, from its creation event onward, that shares at
//! least one member with it. Instances whose two counts stay close are the
//! coherent ones and are selected as clusters.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Event, Partition, VarId, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    /// Member set, ascending by id.
    pub pattern: Vec<VarId>,
    pub local_count: f64,
    pub global_count: f64,
    /// Index of the event that created this instance.
    pub created_at: usize,
}

/// How far apart the global and local counts of an instance are.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceMeasure {
    /// `G - I`.
    #[default]
    Difference,
    /// `1 - I / G`.
    Ratio,
}

impl CoherenceMeasure {
    pub fn apply(self, record: &InstanceRecord) -> f64 {
        match self {
            CoherenceMeasure::Difference => record.global_count - record.local_count,
            CoherenceMeasure::Ratio => 1.0 - record.local_count / record.global_count,
        }
    }
}

/// `G - I` for one instance; zero means every overlap was an exact match.
pub fn coherence(record: &InstanceRecord) -> f64 {
    CoherenceMeasure::Difference.apply(record)
}

#[derive(Debug, Clone, Default)]
pub struct InstanceStore {
    universe: usize,
    instances: Vec<InstanceRecord>,
    by_pattern: HashMap<Vec<VarId>, usize>,
    // variable -> instances containing it
    postings: Vec<Vec<usize>>,
    // per-instance stamp of the last event that touched it
    touched: Vec<usize>,
    event_counter: usize,
}

impl InstanceStore {
    pub fn new(vocab_size: usize) -> Self {
        Self {
            universe: vocab_size,
            postings: vec![Vec::new(); vocab_size],
            ..Self::default()
        }
    }

    pub fn instances(&self) -> &[InstanceRecord] {
        &self.instances
    }

    pub fn event_counter(&self) -> usize {
        self.event_counter
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn get(&self, pattern: &[VarId]) -> Option<&InstanceRecord> {
        let mut key = pattern.to_vec();
        key.sort_unstable();
        self.by_pattern.get(&key).map(|&i| &self.instances[i])
    }

    pub fn present(&mut self, event: &Event, weights: &Weights) -> Result<()> {
        event.check_against(self.universe)?;
        let key = event.sorted_members();
        let stamp = self.event_counter + 1;

        // every existing instance sharing a member gets one group increment
        for &m in &key {
            for &i in &self.postings[m.0] {
                if self.touched[i] != stamp {
                    self.touched[i] = stamp;
                    self.instances[i].global_count += weights.omega_g;
                }
            }
        }

        match self.by_pattern.get(&key) {
            Some(&i) => self.instances[i].local_count += weights.omega_i,
            None => {
                let i = self.instances.len();
                for &m in &key {
                    self.postings[m.0].push(i);
                }
                self.touched.push(stamp);
                self.instances.push(InstanceRecord {
                    pattern: key.clone(),
                    local_count: weights.omega_i,
                    global_count: weights.omega_g,
                    created_at: self.event_counter,
                });
                self.by_pattern.insert(key, i);
            }
        }
        self.event_counter += 1;
        Ok(())
    }

    pub fn present_all<'a, I>(&mut self, events: I, weights: &Weights) -> Result<()>
    where
        I: IntoIterator<Item = &'a Event>,
    {
        for event in events {
            self.present(event, weights)?;
        }
        Ok(())
    }

    /// Instance indices, most coherent first. Ties go to the larger local
    /// count, then the smaller pattern, then the lexicographically smaller one.
    pub fn ranked(&self, measure: CoherenceMeasure) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.instances.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (&self.instances[a], &self.instances[b]);
            measure
                .apply(ra)
                .total_cmp(&measure.apply(rb))
                .then_with(|| rb.local_count.total_cmp(&ra.local_count))
                .then_with(|| ra.pattern.len().cmp(&rb.pattern.len()))
                .then_with(|| ra.pattern.cmp(&rb.pattern))
                .then(Ordering::Equal)
        });
        order
    }

    /// Greedily accepts instances in coherence order whenever they are
    /// disjoint from everything already accepted.
    pub fn select_clusters(&self, measure: CoherenceMeasure) -> Partition {
        let mut taken = vec![false; self.universe];
        let mut clusters = Vec::new();
        for i in self.ranked(measure) {
            let pattern = &self.instances[i].pattern;
            if pattern.iter().all(|v| !taken[v.0]) {
                for v in pattern {
                    taken[v.0] = true;
                }
                clusters.push(pattern.clone());
            }
        }
        Partition::new(clusters, self.universe).expect("accepted patterns are disjoint")
    }
}
