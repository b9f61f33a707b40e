//! Synthetic workloads shaped like a large presence/absence transaction file.

use cogrid_core::model::{Dataset, Event, VarId, Vocabulary};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// `records` events over `codes` variables. Variables fall into blocks that
/// tend to co-occur, so extraction has real structure to find.
pub fn synthetic(records: usize, codes: usize, seed: u64) -> Dataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let vocab = Vocabulary::from_labels((0..codes).map(|i| format!("c{i:02}"))).unwrap();
    let block = 8.min(codes.max(1));
    let events = (0..records)
        .map(|_| {
            let start = rng.gen_range(0..codes.div_ceil(block)) * block;
            let mut ids: Vec<usize> = (start..(start + block).min(codes))
                .filter(|_| rng.gen_bool(0.7))
                .collect();
            for _ in 0..rng.gen_range(0..3) {
                let v = rng.gen_range(0..codes);
                if !ids.contains(&v) {
                    ids.push(v);
                }
            }
            if ids.is_empty() {
                ids.push(start);
            }
            ids.shuffle(&mut rng);
            Event::new(ids.into_iter().map(VarId).collect()).unwrap()
        })
        .collect();
    Dataset::new(vocab, events).unwrap()
}

/// Roughly the size of the Plants file: 34,781 records over 70 codes.
pub fn plants_scale() -> Dataset {
    synthetic(34_781, 70, 7)
}
