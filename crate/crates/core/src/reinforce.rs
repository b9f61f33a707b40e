//! Single-variable reinforcement: one counter per variable, bumped when the
//! variable is present and optionally decayed when it is absent.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Event, Partition, VarId, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReinforceState {
    counts: Vec<f64>,
    updates: usize,
}

/// Variables sharing one exact count value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub count: f64,
    pub members: Vec<VarId>,
}

impl ReinforceState {
    pub fn new(vocab_size: usize) -> Self {
        Self {
            counts: vec![0.0; vocab_size],
            updates: 0,
        }
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn count(&self, v: VarId) -> f64 {
        self.counts[v.0]
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Adds `omega_i` to every present variable and subtracts `delta` from
    /// every absent one, flooring at zero.
    pub fn update(&mut self, event: &Event, weights: &Weights) -> Result<()> {
        event.check_against(self.counts.len())?;
        if weights.delta > 0.0 {
            let mut present = vec![false; self.counts.len()];
            for &m in event.members() {
                present[m.0] = true;
            }
            for (count, present) in self.counts.iter_mut().zip(present) {
                if present {
                    *count += weights.omega_i;
                } else {
                    *count = (*count - weights.delta).max(0.0);
                }
            }
        } else {
            for &m in event.members() {
                self.counts[m.0] += weights.omega_i;
            }
        }
        self.updates += 1;
        Ok(())
    }

    pub fn update_all<'a, I>(&mut self, events: I, weights: &Weights) -> Result<()>
    where
        I: IntoIterator<Item = &'a Event>,
    {
        for event in events {
            self.update(event, weights)?;
        }
        Ok(())
    }

    /// Counts `events` across `shards` scoped threads and merges in chunk
    /// order. Decay does not distribute over shards, so a nonzero `delta`
    /// always counts in a single pass.
    pub fn count_sharded(
        vocab_size: usize,
        events: &[Event],
        weights: &Weights,
        shards: usize,
    ) -> Result<Self> {
        let shards = shards.max(1);
        if shards == 1 || weights.delta > 0.0 || events.len() < 2 {
            let mut state = Self::new(vocab_size);
            state.update_all(events, weights)?;
            return Ok(state);
        }
        let chunk = events.len().div_ceil(shards);
        let parts: Vec<Result<Self>> = std::thread::scope(|s| {
            let handles: Vec<_> = events
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        let mut state = Self::new(vocab_size);
                        state.update_all(part, weights).map(|_| state)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("counting shard panicked"))
                .collect()
        });
        let mut total = Self::new(vocab_size);
        for part in parts {
            total.merge(&part?)?;
        }
        Ok(total)
    }

    /// Sums another shard's counts into this one. Exact only when both
    /// shards were counted with `delta == 0`.
    pub fn merge(&mut self, other: &ReinforceState) -> Result<()> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::VocabularyMismatch(format!(
                "{} vs {} variables",
                self.counts.len(),
                other.counts.len()
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.updates += other.updates;
        Ok(())
    }

    /// Groups variables by exact count, highest count first.
    pub fn band_clusters(&self) -> Vec<Band> {
        if self.updates == 0 {
            return Vec::new();
        }
        let mut order: Vec<VarId> = (0..self.counts.len()).map(VarId).collect();
        order.sort_by(|a, b| {
            self.counts[b.0]
                .total_cmp(&self.counts[a.0])
                .then_with(|| a.cmp(b))
        });
        let mut bands: Vec<Band> = Vec::new();
        for v in order {
            let c = self.counts[v.0];
            match bands.last_mut() {
                Some(band) if band.count.total_cmp(&c) == Ordering::Equal => band.members.push(v),
                _ => bands.push(Band {
                    count: c,
                    members: vec![v],
                }),
            }
        }
        bands
    }

    /// Bands with two or more members as clusters; lone variables unassigned.
    pub fn band_partition(&self) -> Partition {
        let clusters = self
            .band_clusters()
            .into_iter()
            .filter(|b| b.members.len() > 1)
            .map(|b| b.members)
            .collect();
        Partition::new(clusters, self.counts.len()).expect("bands are disjoint")
    }
}
