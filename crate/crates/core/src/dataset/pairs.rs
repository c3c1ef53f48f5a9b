use std::collections::HashSet;

use chrono::Datelike;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastiveConfig {
    /// Whole-hour gap that makes two snapshots of one location a positive pair.
    pub h: u32,
    pub k_plus: usize,
    pub k_minus: usize,
    pub seed: u64,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            h: 1,
            k_plus: 5,
            k_minus: 5,
            seed: 42,
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.h == 0 || self.k_plus == 0 || self.k_minus == 0 {
            return Err(DatasetError::Config(format!(
                "h, k_plus and k_minus must be positive (got {}, {}, {})",
                self.h, self.k_plus, self.k_minus
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContrastivePair {
    pub i: String,
    pub j: String,
    pub label: u8,
}

fn whole_hours(r: &DatasetRecord) -> i64 {
    r.t_day.date().num_days_from_ce() as i64 * 24 + r.t_day.hour() as i64
}

/// 1 when both records show the same location exactly `h` whole hours apart.
pub fn label_pair(a: &DatasetRecord, b: &DatasetRecord, cfg: &ContrastiveConfig) -> u8 {
    let same_place = a.location_id == b.location_id;
    let gap = (whole_hours(a) - whole_hours(b)).abs();
    u8::from(same_place && gap == cfg.h as i64)
}

/// Samples a balanced buffer of labeled pairs.
///
/// Positive pairs are drawn in random order and kept while both records are
/// involved in fewer than `k_plus` positives. Each record then draws
/// negatives until its negative count matches its positive count (or
/// `k_minus` when it has no positives), never exceeding `k_minus`.
pub fn build_pair_buffer(records: &[DatasetRecord], cfg: &ContrastiveConfig) -> Result<Vec<ContrastivePair>, DatasetError> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    let n = records.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut out = Vec::new();

    let mut positives: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| label_pair(&records[i], &records[j], cfg) == 1)
        .collect();
    positives.shuffle(&mut rng);
    let mut pos_count = vec![0usize; n];
    for (i, j) in positives {
        if pos_count[i] < cfg.k_plus && pos_count[j] < cfg.k_plus {
            pos_count[i] += 1;
            pos_count[j] += 1;
            used.insert((i, j));
            out.push((i, j, 1u8));
        }
    }

    let target: Vec<usize> = pos_count
        .iter()
        .map(|&p| if p == 0 { cfg.k_minus } else { p.min(cfg.k_minus) })
        .collect();
    let mut neg_count = vec![0usize; n];
    for i in 0..n {
        if pos_count[i] == 0 {
            log::warn!("record {} has no positive partner; contributing negatives only", records[i].record_id);
        }
        if neg_count[i] >= target[i] {
            continue;
        }
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&j| j != i && !used.contains(&(i.min(j), i.max(j))))
            .filter(|&j| label_pair(&records[i], &records[j], cfg) == 0)
            .collect();
        candidates.shuffle(&mut rng);
        // partners still below their own target first, then any below the hard cap
        let (preferred, fallback): (Vec<usize>, Vec<usize>) =
            candidates.into_iter().partition(|&j| neg_count[j] < target[j]);
        for j in preferred.into_iter().chain(fallback) {
            if neg_count[i] >= target[i] {
                break;
            }
            if neg_count[j] >= cfg.k_minus {
                continue;
            }
            neg_count[i] += 1;
            neg_count[j] += 1;
            used.insert((i.min(j), i.max(j)));
            out.push((i, j, 0));
        }
    }

    Ok(out
        .into_iter()
        .map(|(i, j, label)| ContrastivePair {
            i: records[i].record_id.clone(),
            j: records[j].record_id.clone(),
            label,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::test_record;
    use std::collections::HashMap;

    #[test]
    fn labels_follow_location_and_gap() {
        let cfg = ContrastiveConfig::default();
        let a = test_record("a", 10);
        assert_eq!(label_pair(&a, &test_record("a", 11), &cfg), 1);
        assert_eq!(label_pair(&test_record("a", 11), &a, &cfg), 1);
        assert_eq!(label_pair(&a, &test_record("a", 14), &cfg), 0);
        assert_eq!(label_pair(&a, &test_record("b", 11), &cfg), 0);
        assert_eq!(label_pair(&a, &test_record("a", 10), &cfg), 0);
        let wide = ContrastiveConfig { h: 4, ..cfg };
        assert_eq!(label_pair(&a, &test_record("a", 14), &wide), 1);
    }

    #[test]
    fn hourly_day_gives_interior_records_two_positives() {
        let records: Vec<_> = (8..=18).map(|h| test_record("loc", h)).collect();
        let pairs = build_pair_buffer(&records, &ContrastiveConfig::default()).unwrap();
        let mut pos: HashMap<&str, usize> = HashMap::new();
        for p in pairs.iter().filter(|p| p.label == 1) {
            *pos.entry(&p.i).or_default() += 1;
            *pos.entry(&p.j).or_default() += 1;
        }
        for r in &records[1..records.len() - 1] {
            assert_eq!(pos[r.record_id.as_str()], 2, "{}", r.record_id);
        }
        assert_eq!(pos[records[0].record_id.as_str()], 1);
    }

    #[test]
    fn buffer_is_deterministic_and_duplicate_free() {
        let records: Vec<_> = ["x", "y", "z"]
            .iter()
            .flat_map(|l| (9..15).map(move |h| test_record(l, h)))
            .collect();
        let cfg = ContrastiveConfig { seed: 7, ..Default::default() };
        let a = build_pair_buffer(&records, &cfg).unwrap();
        assert_eq!(a, build_pair_buffer(&records, &cfg).unwrap());
        let other = build_pair_buffer(&records, &ContrastiveConfig { seed: 8, ..cfg }).unwrap();
        // every record has at most two positive partners, well under k+
        for buf in [&a, &other] {
            assert_eq!(buf.iter().filter(|p| p.label == 1).count(), 15);
        }

        let mut seen = HashSet::new();
        let by_id: HashMap<&str, &DatasetRecord> = records.iter().map(|r| (r.record_id.as_str(), r)).collect();
        for p in &a {
            assert_ne!(p.i, p.j);
            let key = if p.i < p.j { (p.i.clone(), p.j.clone()) } else { (p.j.clone(), p.i.clone()) };
            assert!(seen.insert(key));
            assert_eq!(p.label, label_pair(by_id[p.i.as_str()], by_id[p.j.as_str()], &cfg));
        }
        let positives = a.iter().filter(|p| p.label == 1).count();
        let negatives = a.len() - positives;
        assert!(positives.abs_diff(negatives) <= records.len());
    }

    #[test]
    fn lonely_record_gets_negatives_only() {
        let records = vec![test_record("a", 9), test_record("b", 9), test_record("c", 9)];
        let pairs = build_pair_buffer(&records, &ContrastiveConfig::default()).unwrap();
        assert!(pairs.iter().all(|p| p.label == 0));
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(build_pair_buffer(&[], &ContrastiveConfig::default()), Err(DatasetError::Empty)));
    }
}
