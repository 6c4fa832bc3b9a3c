//! Shared helpers for the CLI integration tests.

use std::fmt::Write as _;
use std::path::Path;

use gbsvm::Dataset;

/// Path of the compiled `gbsvm` binary under test.
pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gbsvm")
}

/// Write a dataset as a headered CSV with the label in the last column.
pub fn write_dataset_csv(ds: &Dataset, path: &Path) {
    let mut text = String::new();
    for j in 0..ds.dim() {
        let _ = write!(text, "x{j},");
    }
    text.push_str("label\n");
    for i in 0..ds.len() {
        for v in ds.row(i) {
            let _ = write!(text, "{v},");
        }
        let _ = writeln!(text, "{}", i8::from(ds.label(i)));
    }
    std::fs::write(path, text).unwrap();
}
