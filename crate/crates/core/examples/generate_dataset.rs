//! Regenerates the bundled synthetic dataset:
//!
//!     cargo run --release -p helixq-core --example generate_dataset -- data/sequences_1k.csv
//!
//! The output is fully determined by the seed below, so the checked-in
//! file can always be reproduced byte for byte.

use std::io::Write;

use helixq_core::datagen::{synthetic_dataset, DatasetSpec};
use helixq_core::pipeline::write_sequences_csv;

fn main() -> helixq_core::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/sequences_1k.csv".into());
    let records = synthetic_dataset(&DatasetSpec::new(1000, 42))?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write_sequences_csv(&records, &mut out)?;
    out.flush()?;
    eprintln!("wrote {} records to {path}", records.len());
    Ok(())
}
