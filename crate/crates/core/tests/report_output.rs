use fracspec::geometry::Domain;
use fracspec::report::{emit_report, BoundReport, Format, CSV_COLUMNS};
use fracspec::FractionalOrder;

fn small_report() -> BoundReport {
    let d = Domain::interval(-1.0, 1.0).unwrap();
    BoundReport::compute(&d, FractionalOrder::new(0.5).unwrap(), 2.0 / 256.0, 6).unwrap()
}

#[test]
fn json_round_trip_and_determinism() {
    let a = small_report();
    let b = small_report();
    let text = a.to_json().unwrap();
    assert_eq!(text, b.to_json().unwrap());
    assert_eq!(BoundReport::from_json(&text).unwrap(), a);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.get("meta").is_some() && v["rows"].as_array().unwrap().len() == 6);
}

#[test]
fn csv_layout() {
    let r = small_report();
    let csv = r.to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), r.meta.k_max);
    assert!(rows.iter().all(|l| l.split(',').count() == CSV_COLUMNS.len()));
    assert!(rows[0].starts_with("1,"));
}

#[test]
fn report_invariants() {
    let r = small_report();
    let c = r.sandwich();
    assert!(c.lower_ok && c.upper_ok && c.weyl_ok && c.rr_ok, "{:?}", c.failures);
    assert!(r.rows.iter().all(|row| row.cesaro_ratio > 0.0));
    assert!(r.rows.iter().all(|row| row.rr_numeric_bound.is_some()));
    assert_eq!(r.meta.dims, [63, 127, 255]);
}

#[test]
fn files_are_written_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let r = small_report();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    emit_report(&r, &json, Format::from_path(&json)).unwrap();
    emit_report(&r, &csv, Format::from_path(&csv)).unwrap();
    let back = BoundReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), r.to_csv().unwrap());
}
