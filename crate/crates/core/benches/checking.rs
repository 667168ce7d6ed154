use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};

use kaisar::driver::{run_files, run_files_sequential, Options};

fn corpus() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kaisar"))
        .collect();
    files.sort();
    files
}

fn checking(c: &mut Criterion) {
    let files = corpus();
    let opts = Options::default();
    let mut g = c.benchmark_group("corpus");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| run_files(&files, &opts)));
    g.bench_function("sequential", |b| b.iter(|| run_files_sequential(&files, &opts)));
    g.finish();
}

criterion_group!(benches, checking);
criterion_main!(benches);
