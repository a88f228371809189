mod common;

use std::fs;
use std::path::Path;

use common::small_dataset;
use proptest::prelude::*;
use xmtc_core::io::{load_dataset, save_dataset};
use xmtc_core::{Dataset, Error, MultivariateSeries};

const MANIFEST: &str = r#"{
  "format_version": 1,
  "id": "tiny",
  "channels": ["a", "b"],
  "classes": ["l_cup", "r_cup"]
}"#;

const TABLE: &str = "series_id,group_id,label,t,ch_0,ch_1
s1,u1,l_cup,0,0.5,1
s1,u1,l_cup,1,0.25,2
s1,u1,l_cup,2,0.125,3
s2,u2,r_cup,0,-1,0
s2,u2,r_cup,1,-2,0
";

fn write(dir: &Path, manifest: &str, table: &str) {
    fs::write(dir.join("manifest.json"), manifest).unwrap();
    fs::write(dir.join("series.csv"), table).unwrap();
}

#[test]
fn loads_two_series_fixture() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), MANIFEST, TABLE);
    let ds = load_dataset(dir.path()).unwrap();
    assert_eq!(ds.id, "tiny");
    assert_eq!(ds.channel_names(), vec!["a", "b"]);
    assert_eq!(ds.series.len(), 2);
    assert_eq!(ds.series[0].len(), 3);
    assert_eq!(ds.series[1].len(), 2);
    assert_eq!(ds.series[0].values[0], vec![0.5, 0.25, 0.125]);
    assert_eq!(ds.series[1].values[1], vec![0.0, 0.0]);
    assert_eq!(ds.series[1].group, "u2");
    assert!(ds.norm.is_none());
}

#[test]
fn nan_names_series_and_time() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        MANIFEST,
        &TABLE.replace("s2,u2,r_cup,1,-2,0", "s2,u2,r_cup,1,NaN,0"),
    );
    match load_dataset(dir.path()) {
        Err(Error::NonFinite { series_id, t }) => {
            assert_eq!(series_id, "s2");
            assert_eq!(t, 1);
        }
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn rejects_malformed_inputs() {
    let cases: Vec<(String, String, &str)> = vec![
        ("{ not json".into(), TABLE.into(), "malformed manifest"),
        (
            MANIFEST.replace("[\"a\", \"b\"]", "[\"a\"]"),
            TABLE.into(),
            "inconsistent channel count",
        ),
        (MANIFEST.into(), TABLE.replace("r_cup,0", "r_pen,0"), "unknown label"),
        (
            MANIFEST.into(),
            TABLE.replace("s2,u2,r_cup,1", "s2,u2,r_cup,0"),
            "duplicate (series_id, t)",
        ),
        (MANIFEST.into(), TABLE.replace("s1,u1,l_cup,2", "s1,u1,l_cup,5"), "gaps"),
        (MANIFEST.into(), TABLE.replace(",t,", ",time,"), "missing column"),
        (MANIFEST.into(), TABLE.replace("0.25", "0,25"), "fields"),
    ];
    for (manifest, table, needle) in cases {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), &manifest, &table);
        let err = load_dataset(dir.path()).unwrap_err().to_string();
        assert!(err.contains(needle), "expected {needle:?} in {err:?}");
    }
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(load_dataset(empty.path()), Err(Error::Io { .. })));
}

#[test]
fn synthetic_dataset_round_trips() {
    let ds = small_dataset(9);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let back = load_dataset(dir.path()).unwrap();
    assert_eq!(back, ds);
    // and the files are a fixed point
    let again = tempfile::tempdir().unwrap();
    save_dataset(&back, again.path()).unwrap();
    for f in ["manifest.json", "series.csv"] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(again.path().join(f)).unwrap()
        );
    }
}

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, Just(0.0), Just(-0.0), Just(1e-300), Just(f64::MAX)]
}

fn arbitrary_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..4, 1usize..6).prop_flat_map(|(d, n)| {
        proptest::collection::vec(
            (0usize..3, 1usize..20).prop_flat_map(move |(label, len)| {
                (
                    Just(label),
                    proptest::collection::vec(proptest::collection::vec(value(), len), d),
                )
            }),
            n,
        )
        .prop_map(move |rows| {
            let series: Vec<MultivariateSeries> = rows
                .into_iter()
                .enumerate()
                .map(|(i, (label, values))| {
                    MultivariateSeries::new(format!("s{i:02}"), format!("g{}", i % 2), format!("c{label}"), values)
                        .unwrap()
                })
                .collect();
            let channels = (0..d).map(|c| format!("ch{c}")).collect();
            Dataset::new("prop", channels, series).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn load_after_save_is_identity(ds in arbitrary_dataset()) {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        prop_assert_eq!(back, ds);
    }
}
