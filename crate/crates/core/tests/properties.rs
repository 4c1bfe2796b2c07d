use std::collections::BTreeSet;

use ndarray::Array2;
use proptest::prelude::*;

use zeroday_core::dataset::Dataset;
use zeroday_core::eval::{confusion, kfold_indices, metrics, roc_auc};
use zeroday_core::preprocess::fit_pca;
use zeroday_core::smote::{smote_resample, SmoteConfig, SmoteTarget};
use zeroday_core::split::{make_split, InjectMode};

fn binary_labels(min_each: usize, max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, 2 * min_each..max_len).prop_filter("both classes", move |y| {
        let ones = y.iter().filter(|&&v| v == 1).count();
        ones >= min_each && y.len() - ones >= min_each
    })
}

fn matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    Array2::from_shape_fn((rows, cols), |_| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 * 10.0 - 5.0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kfold_partitions_and_stratifies(y in binary_labels(5, 300), k in 2usize..6, seed in any::<u64>()) {
        let plan = kfold_indices(&y, k, seed).unwrap();
        let mut seen = BTreeSet::new();
        for f in 0..k {
            let (train, test) = plan.train_test(f);
            prop_assert_eq!(train.len() + test.len(), y.len());
            seen.extend(test.iter().copied());
        }
        prop_assert_eq!(seen.len(), y.len());
        for class in [0u8, 1] {
            let per_fold: Vec<usize> = (0..k)
                .map(|f| plan.train_test(f).1.iter().filter(|&&i| y[i] == class).count())
                .collect();
            let lo = *per_fold.iter().min().unwrap();
            let hi = *per_fold.iter().max().unwrap();
            prop_assert!(hi - lo <= 1, "class {} fold counts {:?}", class, per_fold);
        }
    }

    #[test]
    fn smote_equalizes_and_keeps_originals(y in binary_labels(3, 120), seed in any::<u64>(), k in 1usize..7) {
        let ones = y.iter().filter(|&&v| v == 1).count();
        let zeros = y.len() - ones;
        prop_assume!(ones < zeros);
        let x = matrix(y.len(), 3, seed);
        let r = smote_resample(x.view(), &y, &SmoteConfig { k_neighbors: k, target: SmoteTarget::Equalize, seed }).unwrap();
        prop_assert_eq!(r.y.iter().filter(|&&v| v == 1).count(), zeros);
        prop_assert_eq!(r.y.iter().filter(|&&v| v == 0).count(), zeros);
        prop_assert_eq!(r.n_original(), y.len());
        prop_assert_eq!(&r.y[..y.len()], &y[..]);
        prop_assert_eq!(r.x.slice(ndarray::s![..y.len(), ..]), x.view());
        for (o, row) in r.origins.iter().zip(r.x.rows().into_iter().skip(y.len())) {
            prop_assert!(y[o.base] == 1 && y[o.neighbor] == 1 && o.base != o.neighbor);
            prop_assert!((0.0..1.0).contains(&o.u));
            for j in 0..3 {
                let lo = x[[o.base, j]].min(x[[o.neighbor, j]]) - 1e-12;
                let hi = x[[o.base, j]].max(x[[o.neighbor, j]]) + 1e-12;
                prop_assert!(row[j] >= lo && row[j] <= hi);
            }
        }
    }

    #[test]
    fn f1_lies_between_min_and_max_of_precision_recall(
        tp in 0u64..200, fp in 0u64..200, fn_ in 0u64..200, tn in 0u64..200
    ) {
        prop_assume!(tp + fp + fn_ + tn > 0);
        let cm = zeroday_core::eval::ConfusionMatrix { tp, fp, fn_, tn };
        let m = metrics(&cm).unwrap();
        for v in [m.accuracy, m.recall, m.precision, m.f1, m.fpr] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if tp > 0 {
            prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12);
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        }
    }

    #[test]
    fn perfect_predictions_score_one(y in binary_labels(1, 200)) {
        let m = metrics(&confusion(&y, &y).unwrap()).unwrap();
        prop_assert_eq!(m.accuracy, 1.0);
        prop_assert_eq!(m.recall, 1.0);
        prop_assert_eq!(m.precision, 1.0);
        prop_assert_eq!(m.f1, 1.0);
        prop_assert_eq!(m.fpr, 0.0);
        prop_assert!(!m.undefined.any());
    }

    #[test]
    fn auc_of_negated_scores_is_complementary(y in binary_labels(1, 150), seed in any::<u64>()) {
        let s: Vec<f64> = matrix(y.len(), 1, seed).iter().copied().collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let a = roc_auc(&y, &s).unwrap();
        let b = roc_auc(&y, &neg).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12, "{} + {}", a, b);
    }

    #[test]
    fn split_routes_zero_day_rows_to_test(
        cats in prop::collection::vec(0usize..4, 40..300),
        frac in 0.2f64..0.9,
        seed in any::<u64>(),
        append in any::<bool>(),
    ) {
        let names = ["Normal", "DoS", "Exploits", "Worms"];
        prop_assume!(cats.iter().filter(|&&c| c == 0).count() >= 4);
        prop_assume!(cats.iter().filter(|&&c| c == 1 || c == 2).count() >= 4);
        prop_assume!(cats.contains(&3));
        let n = cats.len();
        let d = Dataset::new(
            matrix(n, 2, seed),
            vec!["a".into(), "b".into()],
            cats.iter().map(|&c| u8::from(c != 0)).collect(),
            cats.iter().map(|&c| names[c].to_string()).collect(),
        ).unwrap();
        let zd: BTreeSet<String> = ["Worms".to_string()].into();
        let mode = if append { InjectMode::Append } else { InjectMode::Shuffled };
        let plan = make_split(&d, frac, &zd, seed, mode).unwrap();

        let train: BTreeSet<usize> = plan.train_indices.iter().copied().collect();
        let test: BTreeSet<usize> = plan.test_indices.iter().copied().collect();
        prop_assert_eq!(train.len(), plan.train_indices.len());
        prop_assert_eq!(test.len(), plan.test_indices.len());
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.len() + test.len(), n);
        prop_assert!(train.iter().all(|&i| cats[i] != 3));
        prop_assert!(cats.iter().enumerate().filter(|(_, &c)| c == 3).all(|(i, _)| test.contains(&i)));
        for label in [0u8, 1] {
            let pool = (0..n).filter(|&i| cats[i] != 3 && d.label[i] == label).count();
            let taken = plan.train_indices.iter().filter(|&&i| d.label[i] == label).count();
            prop_assert_eq!(taken, (frac * pool as f64).round() as usize);
        }
        if append {
            let first_zd = plan.test_indices.iter().position(|&i| cats[i] == 3).unwrap();
            prop_assert!(plan.test_indices[first_zd..].iter().all(|&i| cats[i] == 3));
        }
    }

    #[test]
    fn pca_axes_are_orthonormal(rows in 10usize..80, cols in 2usize..7, seed in any::<u64>()) {
        let m = fit_pca(matrix(rows, cols, seed).view(), 0.95).unwrap();
        let c = &m.components;
        let gram = c.dot(&c.t());
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[[i, j]] - e).abs() < 1e-9, "gram[{},{}] = {}", i, j, gram[[i, j]]);
            }
        }
        prop_assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        prop_assert!(m.cumulative_ratio(m.n_components) >= 0.95 - 1e-12);
        prop_assert!(m.n_components == 1 || m.cumulative_ratio(m.n_components - 1) < 0.95);
    }
}
