//! Drives the same pipeline as `gcs run` and `gcs verify` from a config
//! file, writing into a scratch directory.
//!
//! ```text
//! cargo run --release --example run_config -- configs/harmonic.toml
//! ```

use gcs_core::app::{self, config::RunConfig};
use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/harmonic.toml")));
    let mut cfg = RunConfig::load(&path)?;
    cfg.output.directory = std::env::temp_dir().join("gcs-example");

    let summary = app::run(&cfg)?;
    println!(
        "{} steps, {} snapshots in {}; min overlap {:.12}, max dq2 drift {:.3e}",
        summary.steps,
        summary.snapshots,
        summary.output_dir.display(),
        summary.min_overlap,
        summary.max_dq2_drift
    );
    let vclass = app::extract_vclass(&cfg)?;
    println!("V_class table: {} rows, max relative deviation {:.3e}", vclass.rows.len(), vclass.max_rel_deviation);

    let report = app::verify(&cfg)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    Ok(())
}
