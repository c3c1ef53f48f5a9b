use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

/// Assigns whole locations to train or test.
///
/// Locations are shuffled with `seed`; the train set takes the shuffled
/// prefix whose record count lands closest to `train_fraction` of the total,
/// keeping at least one location on each side.
pub fn split_dataset(
    mut records: Vec<DatasetRecord>,
    train_fraction: f64,
    seed: u64,
) -> Result<Vec<DatasetRecord>, DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::Config(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    if let Some(r) = records.iter().find(|r| r.split.is_some()) {
        return Err(DatasetError::AlreadySplit(r.record_id.clone()));
    }
    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *sizes.entry(r.location_id.as_str()).or_default() += 1;
    }
    if sizes.len() < 2 {
        return Err(DatasetError::TooFewLocations(sizes.len()));
    }

    let mut order: Vec<(&str, usize)> = sizes.into_iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let total = records.len() as f64;
    let goal = train_fraction * total;
    let mut best = (f64::INFINITY, 1);
    let mut cum = 0usize;
    for (k, (_, size)) in order.iter().enumerate().take(order.len() - 1) {
        cum += size;
        let err = (cum as f64 - goal).abs();
        if err < best.0 - 1e-9 {
            best = (err, k + 1);
        }
    }
    let train: BTreeSet<String> = order[..best.1].iter().map(|(l, _)| l.to_string()).collect();
    for r in &mut records {
        r.split = Some(if train.contains(&r.location_id) { Split::Train } else { Split::Test });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::test_record;

    fn grid(locations: usize, per: u32) -> Vec<DatasetRecord> {
        (0..locations)
            .flat_map(|l| (0..per).map(move |h| test_record(&format!("loc{l}"), 8 + h)))
            .collect()
    }

    #[test]
    fn ten_locations_split_seven_three() {
        for seed in 0..20 {
            let out = split_dataset(grid(10, 3), 0.7, seed).unwrap();
            let mut train = BTreeSet::new();
            let mut test = BTreeSet::new();
            for r in &out {
                match r.split.unwrap() {
                    Split::Train => train.insert(r.location_id.clone()),
                    Split::Test => test.insert(r.location_id.clone()),
                };
            }
            assert_eq!((train.len(), test.len()), (7, 3));
            assert!(train.is_disjoint(&test));
        }
    }

    #[test]
    fn same_seed_same_assignment() {
        let a = split_dataset(grid(6, 2), 0.7, 3).unwrap();
        let b = split_dataset(grid(6, 2), 0.7, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(split_dataset(grid(1, 4), 0.7, 0), Err(DatasetError::TooFewLocations(1))));
        assert!(split_dataset(grid(3, 1), 1.0, 0).is_err());
        let done = split_dataset(grid(3, 1), 0.5, 0).unwrap();
        assert!(matches!(split_dataset(done, 0.5, 0), Err(DatasetError::AlreadySplit(_))));
    }

    #[test]
    fn uneven_groups_stay_within_one_group_of_target() {
        let mut records = Vec::new();
        for (l, n) in [("a", 5), ("b", 1), ("c", 3), ("d", 2), ("e", 4)] {
            records.extend((0..n).map(|h| test_record(l, 8 + h)));
        }
        let total = records.len() as f64;
        let largest = 5.0;
        for seed in 0..10 {
            let out = split_dataset(records.clone(), 0.7, seed).unwrap();
            let train = out.iter().filter(|r| r.split == Some(Split::Train)).count() as f64;
            assert!((train - 0.7 * total).abs() <= largest, "seed {seed}: {train}");
        }
    }
}
