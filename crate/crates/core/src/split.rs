//! Train/test construction with zero-day categories confined to the test set.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{CategoryCount, Dataset, NORMAL};
use crate::error::{Error, Result};
use crate::rng::{stage_rng, TAG_SPLIT, TAG_TEST_SHUFFLE};

/// How zero-day rows enter the test sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InjectMode {
    /// Held-out and zero-day rows interleaved by a seeded permutation.
    #[default]
    Shuffled,
    /// Zero-day rows concatenated after the held-out rows, unpermuted.
    Append,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub zero_day_categories: BTreeSet<String>,
    pub train_fraction: f64,
    pub seed: u64,
    pub inject_mode: InjectMode,
}

impl SplitPlan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Test positions whose row belongs to a zero-day category.
    pub fn zero_day_mask(&self, d: &Dataset) -> Vec<bool> {
        self.test_indices
            .iter()
            .map(|&i| self.zero_day_categories.contains(&d.attack_cat[i]))
            .collect()
    }
}

/// The `n` rarest attack categories, ties broken by name.
pub fn select_zero_day_categories(counts: &[CategoryCount], n: usize) -> Result<BTreeSet<String>> {
    let mut attacks: Vec<&CategoryCount> =
        counts.iter().filter(|c| c.category != NORMAL).collect();
    if n == 0 || n >= attacks.len() {
        return Err(Error::invalid(format!(
            "cannot pick {n} zero-day categories out of {} attack categories",
            attacks.len()
        )));
    }
    attacks.sort_by(|a, b| a.count.cmp(&b.count).then_with(|| a.category.cmp(&b.category)));
    Ok(attacks[..n].iter().map(|c| c.category.clone()).collect())
}

/// Splits non-zero-day rows `train_fraction : 1 - train_fraction`, stratified
/// by label, and routes every zero-day row to the test set.
pub fn make_split(
    d: &Dataset,
    train_fraction: f64,
    zero_day_categories: &BTreeSet<String>,
    seed: u64,
    inject_mode: InjectMode,
) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train_fraction {train_fraction} not in (0, 1)")));
    }
    if zero_day_categories.is_empty() {
        return Err(Error::invalid("no zero-day categories given"));
    }
    for c in zero_day_categories {
        if !d.attack_cat.iter().any(|a| a == c) {
            return Err(Error::UnknownCategory(c.clone()));
        }
    }

    let mut zero_day = Vec::new();
    let mut by_label: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in 0..d.n_rows() {
        if zero_day_categories.contains(&d.attack_cat[i]) {
            zero_day.push(i);
        } else {
            by_label[d.label[i] as usize].push(i);
        }
    }

    let mut rng = stage_rng(seed, TAG_SPLIT);
    let mut train = Vec::new();
    let mut held_out = Vec::new();
    for mut rows in by_label {
        rows.shuffle(&mut rng);
        let take = (train_fraction * rows.len() as f64).round() as usize;
        train.extend_from_slice(&rows[..take]);
        held_out.extend_from_slice(&rows[take..]);
    }
    train.sort_unstable();
    held_out.sort_unstable();
    if train.is_empty() {
        return Err(Error::Empty("training partition".into()));
    }
    if held_out.is_empty() && zero_day.is_empty() {
        return Err(Error::Empty("test partition".into()));
    }

    let mut test = held_out;
    test.extend_from_slice(&zero_day);
    if inject_mode == InjectMode::Shuffled {
        test.shuffle(&mut stage_rng(seed, TAG_TEST_SHUFFLE));
    }

    Ok(SplitPlan {
        train_indices: train,
        test_indices: test,
        zero_day_categories: zero_day_categories.clone(),
        train_fraction,
        seed,
        inject_mode,
    })
}

/// Extracts `(train, test)` in plan order.
pub fn materialize(d: &Dataset, plan: &SplitPlan) -> Result<(Dataset, Dataset)> {
    Ok((d.select_rows(&plan.train_indices)?, d.select_rows(&plan.test_indices)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{category_counts, UNSW_HALF_SET_COUNTS};
    use ndarray::Array2;

    fn counts(pairs: &[(&str, usize)]) -> Vec<CategoryCount> {
        pairs
            .iter()
            .map(|&(c, n)| CategoryCount {
                category: c.to_string(),
                count: n,
                percentage: 0.0,
            })
            .collect()
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rarest_four_of_half_set() {
        let c = counts(&UNSW_HALF_SET_COUNTS);
        assert_eq!(
            select_zero_day_categories(&c, 4).unwrap(),
            set(&["Worms", "Shellcode", "Backdoor", "Analysis"])
        );
        assert_eq!(select_zero_day_categories(&c, 1).unwrap(), set(&["Worms"]));
    }

    #[test]
    fn ties_break_by_name() {
        let c = counts(&[("C", 9), ("B", 5), ("A", 5)]);
        assert_eq!(select_zero_day_categories(&c, 1).unwrap(), set(&["A"]));
        assert!(select_zero_day_categories(&c, 3).is_err());
    }

    fn toy(normals: usize, known: usize, rare: usize) -> Dataset {
        let n = normals + known + rare;
        let mut label = Vec::new();
        let mut cats = Vec::new();
        for i in 0..n {
            let (l, c) = if i < normals {
                (0, NORMAL)
            } else if i < normals + known {
                (1, "Generic")
            } else {
                (1, "Worms")
            };
            label.push(l);
            cats.push(c.to_string());
        }
        let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        Dataset::new(x, vec!["x".into()], label, cats).unwrap()
    }

    #[test]
    fn seventy_thirty_on_non_zero_day_rows() {
        let d = toy(900, 100, 20);
        let plan = make_split(&d, 0.7, &set(&["Worms"]), 5, InjectMode::Shuffled).unwrap();
        assert!((plan.train_indices.len() as i64 - 700).abs() <= 1);
        assert_eq!(plan.train_indices.len() + plan.test_indices.len(), d.n_rows());
        assert!(plan.train_indices.iter().all(|&i| d.attack_cat[i] != "Worms"));
    }

    #[test]
    fn all_attack_categories_zero_day_leaves_normal_train() {
        let d = toy(50, 10, 5);
        let plan = make_split(&d, 0.7, &set(&["Generic", "Worms"]), 1, InjectMode::Shuffled).unwrap();
        assert!(plan.train_indices.iter().all(|&i| d.label[i] == 0));
    }

    #[test]
    fn append_puts_zero_days_last() {
        let d = toy(100, 30, 20);
        let plan = make_split(&d, 0.7, &set(&["Worms"]), 2, InjectMode::Append).unwrap();
        let mask = plan.zero_day_mask(&d);
        let tail = &mask[mask.len() - 20..];
        assert!(tail.iter().all(|&z| z));
        assert!(mask[..mask.len() - 20].iter().all(|&z| !z));
    }

    #[test]
    fn modes_share_test_multiset() {
        let d = toy(200, 40, 10);
        let z = set(&["Worms"]);
        let a = make_split(&d, 0.7, &z, 8, InjectMode::Append).unwrap();
        let s = make_split(&d, 0.7, &z, 8, InjectMode::Shuffled).unwrap();
        assert_eq!(a.train_indices, s.train_indices);
        let mut ta = a.test_indices.clone();
        let mut ts = s.test_indices.clone();
        ta.sort_unstable();
        ts.sort_unstable();
        assert_eq!(ta, ts);
        assert_ne!(a.test_indices, s.test_indices);
        assert_eq!(s, make_split(&d, 0.7, &z, 8, InjectMode::Shuffled).unwrap());
    }

    #[test]
    fn materialize_extracts_in_plan_order() {
        let d = toy(2, 0, 1);
        let plan = SplitPlan {
            train_indices: vec![0, 2],
            test_indices: vec![1],
            zero_day_categories: set(&["Worms"]),
            train_fraction: 0.7,
            seed: 0,
            inject_mode: InjectMode::Shuffled,
        };
        let (train, test) = materialize(&d, &plan).unwrap();
        assert_eq!(train.features.column(0).to_vec(), vec![0.0, 2.0]);
        assert_eq!(test.features.column(0).to_vec(), vec![1.0]);
        assert_eq!(train.feature_names, test.feature_names);
        assert_eq!(materialize(&d, &plan).unwrap(), (train, test));

        let bad = SplitPlan {
            test_indices: vec![7],
            ..plan
        };
        assert!(matches!(materialize(&d, &bad), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn plan_json_round_trip() {
        let d = toy(30, 10, 3);
        let plan = make_split(&d, 0.7, &set(&["Worms"]), 4, InjectMode::Append).unwrap();
        assert_eq!(SplitPlan::from_json(&plan.to_json().unwrap()).unwrap(), plan);
        assert!(category_counts(&d).len() == 3);
    }
}
