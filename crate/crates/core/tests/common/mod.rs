use std::fs;
use std::path::Path;

use signforecast::harness::{generate, SynthKind, SynthParams};
use signforecast::write_quotes;

pub struct Stock {
    pub ticker: String,
    pub kind: SynthKind,
    pub market_cap: f64,
    pub group: &'static str,
}

/// Twenty stocks, five per group, with caps rising by group.
pub fn universe() -> Vec<Stock> {
    let groups = ["0-25", "25-50", "50-75", "75-100"];
    let kinds = [SynthKind::Sine, SynthKind::Ar1, SynthKind::Gaussian];
    (0..20)
        .map(|i| Stock {
            ticker: format!("S{i:02}"),
            kind: kinds[i % 3],
            market_cap: 1_000.0 * 10f64.powi((i / 5) as i32 + 2) * (1.0 + i as f64 / 10.0),
            group: groups[i / 5],
        })
        .collect()
}

/// Writes quotes, metadata and a fast config under `dir`.
pub fn write_fixture(dir: &Path, stocks: &[Stock], length: usize, runs: usize) {
    let quotes = dir.join("quotes");
    fs::create_dir_all(&quotes).unwrap();
    let mut meta = String::from("ticker,sector,market_cap_kusd,percentile\n");
    for (i, s) in stocks.iter().enumerate() {
        let params = SynthParams { seed: 100 + i as u64, ..Default::default() };
        let q = generate(s.kind, length, &s.ticker, &params).unwrap();
        let mut buf = Vec::new();
        write_quotes(&q, &mut buf).unwrap();
        fs::write(quotes.join(format!("{}.csv", s.ticker)), buf).unwrap();
        meta.push_str(&format!("{},Synthetic,{},{}\n", s.ticker, s.market_cap, s.group));
    }
    fs::write(dir.join("stocks.csv"), meta).unwrap();
    fs::write(
        dir.join("experiment.toml"),
        format!("base_seed = 3\nruns = {runs}\nthreads = 2\nrprop.max_iterations = 60\n"),
    )
    .unwrap();
}

pub fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}
