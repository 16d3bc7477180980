//! One-at-a-time hyperparameter sweeps over simulated replicates, and their
//! summaries.

mod config;
mod run;
mod summary;

pub use config::{
    BorutaSettings, Cell, CellValue, Defaults, ExpressionSource, Grids, Hyper, Method, NodeSizeProp, SweepConfig,
};
pub use run::{
    read_records, record_keys, records_path, sort_records, sweep, write_records_csv, write_selections_csv,
    ReplicateRecord, SweepOptions, SweepPlan, SweepReport, CONFIG_FILE, JOURNAL_FILE, RECORDS_FILE, RECORD_COLUMNS,
    SELECTIONS_FILE,
};
pub use summary::{
    label_number, summarize, summary_csv, write_stability_csv, write_summary_csv, Measure, StabilityRow, Summary,
    SummaryRow, SUMMARY_COLUMNS,
};
