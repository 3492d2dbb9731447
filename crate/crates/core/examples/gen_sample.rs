//! Regenerates the synthetic book, trade, market and event files under
//! `data/sample` (or the directory given as the first argument).

use std::path::PathBuf;

use spreadlab::synthetic::sample_config;
use spreadlab::Decimal;

const SEED: u64 = 20230524;

fn main() -> Result<(), spreadlab::Error> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample"));
    let data = sample_config::<Decimal>(SEED).generate()?;
    data.write_to_dir(&dir)?;
    println!(
        "{}: {} snapshots, {} trades, {} markets",
        dir.display(),
        data.books.len(),
        data.trades.len(),
        data.specs.len()
    );
    Ok(())
}
