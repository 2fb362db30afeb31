use std::path::Path;

use pdd::data::{load_idx, read_idx_images, write_idx, Dataset};
use pdd::nn::Matrix;
use pdd::policy::ScheduleRecord;
use pdd::Error;
use proptest::prelude::*;

fn schedule() -> impl Strategy<Value = ScheduleRecord> {
    (
        1usize..100_000,
        proptest::collection::vec(0.0f64..=1.0, 0..40),
    )
        .prop_map(|(n, fracs)| {
            let mut retained: Vec<usize> = fracs.iter().map(|f| (f * n as f64) as usize).collect();
            retained.push(n);
            ScheduleRecord::new(n, retained).unwrap()
        })
}

proptest! {
    #[test]
    fn schedule_csv_round_trips(record in schedule()) {
        let text = record.to_csv().unwrap();
        let back = ScheduleRecord::parse(&text, Path::new("s.csv"), Some(record.n())).unwrap();
        prop_assert_eq!(&back, &record);
        prop_assert_eq!(back.to_csv().unwrap(), text);
    }

    #[test]
    fn idx_round_trips(
        rows in 1usize..30,
        side in 1usize..6,
        pixels in proptest::collection::vec(any::<u8>(), 30 * 36),
        labels in proptest::collection::vec(0usize..10, 30),
    ) {
        let dims = side * side;
        let features: Vec<f64> = pixels[..rows * dims].iter().map(|&p| p as f64 / 255.0).collect();
        let labels = labels[..rows].to_vec();
        let ds = Dataset::with_image_dims(
            Matrix::from_vec(rows, dims, features).unwrap(),
            labels,
            10,
            [side, side],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (img, lbl) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&ds, &img, &lbl).unwrap();
        let (count, shape, raw) = read_idx_images(&img).unwrap();
        prop_assert_eq!(count, rows);
        prop_assert_eq!(shape, [side, side]);
        prop_assert_eq!(&raw[..], &pixels[..rows * dims]);
        let back = load_idx(&img, &lbl).unwrap();
        prop_assert_eq!(back.features(), ds.features());
        prop_assert_eq!(back.labels(), ds.labels());
    }
}

fn parse_error(text: &str) -> (usize, String) {
    match ScheduleRecord::parse(text, Path::new("bad.csv"), None) {
        Err(Error::Parse { line, reason, .. }) => (line, reason),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn schedule_errors_name_the_line() {
    assert_eq!(parse_error("epoch,kept\n1,5\n").0, 1);
    assert_eq!(parse_error("epoch,retained\n1,5\n3,5\n").0, 3);
    assert_eq!(parse_error("epoch,retained\n1,5\n2,x\n").0, 3);
    assert_eq!(parse_error("epoch,retained\n1,5\n2;5\n").0, 3);
    let (line, reason) = parse_error("epoch,retained\n1,10\n2,4\n");
    assert_eq!(line, 3);
    assert!(reason.contains("missing revision epoch"), "{reason}");
    assert!(parse_error("epoch,retained\n").1.contains("no epochs"));
}

#[test]
fn schedule_counts_above_n_are_rejected() {
    let err = ScheduleRecord::parse("epoch,retained\n1,11\n2,10\n", Path::new("s"), Some(10));
    assert!(matches!(err, Err(Error::Parse { line: 2, .. })));
}

#[test]
fn idx_rejects_truncated_and_mismatched_files() {
    let dir = tempfile::tempdir().unwrap();
    let ds = Dataset::new(
        Matrix::from_vec(3, 4, vec![0.0; 12]).unwrap(),
        vec![0, 1, 2],
        3,
    )
    .unwrap();
    let (img, lbl) = (dir.path().join("i"), dir.path().join("l"));
    write_idx(&ds, &img, &lbl).unwrap();

    let bytes = std::fs::read(&img).unwrap();
    let cut = dir.path().join("cut");
    std::fs::write(&cut, &bytes[..bytes.len() - 1]).unwrap();
    assert!(matches!(load_idx(&cut, &lbl), Err(Error::Ingestion { .. })));

    let two = Dataset::new(Matrix::from_vec(2, 4, vec![0.0; 8]).unwrap(), vec![0, 1], 2).unwrap();
    let (img2, lbl2) = (dir.path().join("i2"), dir.path().join("l2"));
    write_idx(&two, &img2, &lbl2).unwrap();
    assert!(matches!(
        load_idx(&img, &lbl2),
        Err(Error::Ingestion { .. })
    ));
}
