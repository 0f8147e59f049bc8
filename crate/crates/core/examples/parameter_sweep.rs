//! Sweeps the HT-MIA selection parameters over a small grid and prints the
//! resulting table as CSV.
//!
//! Run with `cargo run --release --example parameter_sweep`.

use htmia::attacks::SelectionStrategy;
use htmia::metrics::{sweep, write_sweep_csv, SweepGrid};
use htmia::theory::{generate_synthetic, SyntheticTraceSpec};
use htmia::trace::join_samples;

fn main() {
    let spec = SyntheticTraceSpec {
        n_per_class: 200,
        len_range: (40, 400),
        seed: 21,
        ..Default::default()
    };
    let data = generate_synthetic(&spec).unwrap();
    let joined = join_samples(data.target, data.reference, &data.labels).unwrap();

    let grid = SweepGrid {
        alphas: vec![0.02, 0.1, 0.2, 0.4],
        min_ks: vec![5],
        max_ks: vec![20, 100],
        strategies: vec![SelectionStrategy::ByTarget, SelectionStrategy::ByReference],
        margins: vec![0.0, 0.02],
    };
    let rows = sweep(&joined.records, &grid.points().unwrap()).unwrap();
    write_sweep_csv(std::io::stdout().lock(), &rows, None).unwrap();
}
