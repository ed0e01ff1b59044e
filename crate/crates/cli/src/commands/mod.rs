mod eval;
mod extract;
mod fuse;
mod pipeline;
mod synth;
mod train;

use std::path::Path;

use anyhow::{Context, Result};
use neurofuse::eval::{EvalReport, ProbeReport};

pub use eval::{cmd_eval, SplitOverrides};
pub use extract::{cmd_extract, de_file_name, fft_file_name};
pub use fuse::cmd_fuse;
pub use pipeline::{cmd_pipeline, StageShapes, Summary};
pub use synth::cmd_synth;
pub use train::cmd_train;

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const HISTORY_FILE: &str = "history.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const CONFUSION_CSV: &str = "confusion.csv";
pub const PROBE_JSON: &str = "probe.json";
pub const PROBE_TXT: &str = "probe.txt";
pub const SUMMARY_FILE: &str = "summary.json";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| neurofuse::Error::io(dir, e))
        .with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| neurofuse::Error::io(path, e))
        .with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    write_text(&dir.join(REPORT_JSON), &(report.to_json() + "\n"))?;
    write_text(&dir.join(REPORT_TXT), &report.to_table())?;
    write_text(&dir.join(CONFUSION_CSV), &report.confusion_csv())
}

pub fn probe_table(p: &ProbeReport) -> String {
    format!(
        "Window-level split accuracy: {:.4}\n\
         Trial-level split accuracy:  {:.4}\n\
         Gap (window - trial):        {:+.4}\n\
         Epochs: {}\n\n\
         Window-level split\n{}\n\
         Trial-level split\n{}",
        p.window_accuracy,
        p.trial_accuracy,
        p.gap,
        p.epochs,
        p.window.to_table(),
        p.trial.to_table()
    )
}

fn write_probe(dir: &Path, p: &ProbeReport) -> Result<()> {
    write_json(&dir.join(PROBE_JSON), p)?;
    write_text(&dir.join(PROBE_TXT), &probe_table(p))
}
