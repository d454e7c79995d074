//! Classifies every built-in group in permissive mode and prints the table.

use k3lat::classify::ClassifyOptions;
use k3lat::dataset::Dataset;
use k3lat::table::{emit_table, run_table, Format};

fn main() -> k3lat::Result<()> {
    let out = run_table(&Dataset::builtin(), &ClassifyOptions::default())?;
    print!("{}", emit_table(&out.rows, Format::Markdown));
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{} rows, {} warnings", out.rows.len(), out.warnings.len());
    Ok(())
}
