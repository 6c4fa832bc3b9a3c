//! Write a two-blob toy dataset as CSV.
//!
//! Usage: `make_blobs [n] [separation] [seed] [path]`

use gbsvm::experiment::gaussian_blobs;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|a| a.parse().expect("n must be an integer")).unwrap_or(500);
    let separation: f64 =
        args.next().map(|a| a.parse().expect("separation must be a number")).unwrap_or(4.0);
    let seed: u64 = args.next().map(|a| a.parse().expect("seed must be an integer")).unwrap_or(42);
    let path = args.next().unwrap_or_else(|| "blobs.csv".into());

    let ds = gaussian_blobs(n, separation, seed).expect("generation failed");
    let mut out = String::new();
    for j in 0..ds.dim() {
        out.push_str(&format!("x{j},"));
    }
    out.push_str("label\n");
    for i in 0..ds.len() {
        for v in ds.row(i) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{}\n", ds.label(i).sign() as i8));
    }
    std::fs::write(&path, out).expect("write failed");
    eprintln!("wrote {} rows to {path}", ds.len());
}
