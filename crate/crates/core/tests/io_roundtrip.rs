use proptest::prelude::*;
use unilocal::io::{bisym_spec_from_json, cm_from_csv, cm_from_json, cm_to_csv, cm_to_json, fs_spec_from_json, read_cm};
use unilocal::oracle::StateSampler;
use unilocal::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_and_csv_round_trip(seed in any::<u64>(), modes in 1usize..6) {
        let cm = StateSampler::new(seed).bona_fide_cm(modes, 3.0, 1.0);
        prop_assert_eq!(&cm_from_json(&cm_to_json(&cm)).unwrap(), &cm);
        prop_assert_eq!(&cm_from_csv(&cm_to_csv(&cm)).unwrap(), &cm);
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = cm_from_json(&text);
        let _ = cm_from_csv(&text);
        let _ = fs_spec_from_json(&text);
        let _ = bisym_spec_from_json(&text);
    }
}

#[test]
fn read_cm_dispatches_on_extension() {
    let dir = tempfile_dir();
    let json = dir.join("a.json");
    let csv = dir.join("a.csv");
    std::fs::write(&json, r#"{"modes":1,"entries":[2,0,0,2]}"#).unwrap();
    std::fs::write(&csv, "# thermal\n2, 0\n0, 2\n").unwrap();
    assert_eq!(read_cm(&json).unwrap(), read_cm(&csv).unwrap());
    let other = dir.join("a.txt");
    std::fs::write(&other, "2,0\n0,2\n").unwrap();
    assert!(read_cm(&other).is_err());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn diagnostics_carry_line_numbers() {
    match cm_from_csv("1,0\n0,1\n\n1,2,3\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    match cm_from_csv("# header\n\n1,0\nx,1\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    match cm_from_json("{\n\"modes\": 1,\n\"entries\": [1, 0, 0]\n}") {
        Err(Error::Parse { .. }) | Err(Error::InvalidArgument(_)) => {}
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(fs_spec_from_json(r#"{"modes":2,"b":1.5,"z1":0,"z2":0,"extra":1}"#).is_err());
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("unilocal-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
