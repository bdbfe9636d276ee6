use mdn_inverse::dataset::{
    scale_and_filter, split_counts, symmetric_witness, surrogate_spectrum, DesignParams, LabeledDataset, Split,
    DEFAULT_SAMPLES,
};
use mdn_inverse::Error;
use proptest::prelude::*;

#[test]
fn default_dataset_size_and_split() {
    let (ds, meta) = LabeledDataset::generate(DEFAULT_SAMPLES, 0).unwrap();
    assert_eq!(ds.len(), 3848);
    let c = ds.counts();
    assert_eq!((c.train, c.val, c.test), (3078, 384, 386));
    assert_eq!(meta.split_counts, c);
    assert!(meta.sobol_points_consumed > 3848, "the gap constraint rejects some points");
    assert!(ds.records().iter().all(|r| r.design.p - r.design.w >= 200.0));
    let c10 = split_counts(10);
    assert_eq!((c10.train, c10.val, c10.test), (8, 1, 1));
}

#[test]
fn scaling_examples() {
    let kept = scale_and_filter([[0.0; 5], [0.0, 1.0, 0.5, 0.5, 0.5], [1.0, 1.0, 0.0, 0.0, 0.0]]);
    assert_eq!(kept.len(), 2);
    assert_eq!(kept[0].to_array(), [305.0, 45.0, 150.0, 25.0, 80.0]);
    assert_eq!((kept[1].p, kept[1].w), (415.0, 190.0));
}

#[test]
fn csv_round_trip_and_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, _) = LabeledDataset::generate(100, 4).unwrap();
    let path = dir.path().join("d.csv");
    ds.save_csv(&path).unwrap();
    assert_eq!(LabeledDataset::load_csv(&path).unwrap(), ds);

    // Drop the last spectrum column from header and rows.
    let text = std::fs::read_to_string(&path).unwrap();
    let trimmed: String = text.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n").collect();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, trimmed).unwrap();
    assert!(matches!(LabeledDataset::load_csv(&bad), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn same_seed_same_partition() {
    let (a, _) = LabeledDataset::generate(50, 9).unwrap();
    let (b, _) = LabeledDataset::generate(50, 9).unwrap();
    let tags = |d: &LabeledDataset| d.records().iter().map(|r| r.split).collect::<Vec<Split>>();
    assert_eq!(tags(&a), tags(&b));
}

#[test]
fn witness_pair() {
    let (a, b) = symmetric_witness();
    let (ua, ub) = (a.normalized(), b.normalized());
    let dist = ua.iter().zip(&ub).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    assert!(dist >= 0.2);
    let (sa, sb) = (surrogate_spectrum(&a).unwrap(), surrogate_spectrum(&b).unwrap());
    assert!(sa.rmse(sb.as_slice()) <= 0.01);
}

proptest! {
    #[test]
    fn normalization_round_trip(u in prop::array::uniform5(0.0f64..=1.0)) {
        let d = DesignParams::from_normalized(u);
        let back = DesignParams::from_normalized(d.normalized());
        for (x, y) in d.to_array().iter().zip(back.to_array()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn spectra_are_pure_and_bounded(u in prop::array::uniform5(0.0f64..=1.0)) {
        let d = DesignParams::from_normalized(u);
        let s = surrogate_spectrum(&d).unwrap();
        prop_assert_eq!(s.as_slice().len(), 101);
        prop_assert!(s.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert_eq!(s, surrogate_spectrum(&d).unwrap());
    }
}
