//! Command-line front end for the `neurofuse` pipeline.

pub mod args;
pub mod commands;
pub mod settings;

use anyhow::Result;
use neurofuse::ErrorClass;

use args::{Cli, Command};
pub use commands::*;
use settings::{resolve, Preset};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit status for a failed command, from the first library error in the chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let class = err
        .chain()
        .find_map(|e| e.downcast_ref::<neurofuse::Error>())
        .map(neurofuse::Error::class);
    match class {
        Some(ErrorClass::Io) => EXIT_IO,
        Some(ErrorClass::Numerical) => EXIT_NUMERICAL,
        Some(ErrorClass::Validation) => EXIT_VALIDATION,
        None if err.chain().any(|e| e.is::<std::io::Error>()) => EXIT_IO,
        None => EXIT_VALIDATION,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth { out, synth } => {
            let s = resolve(g, Some(synth), Preset::PaperShape)?;
            cmd_synth(&s.spec, out)
        }
        Command::Extract { corpus, out } => cmd_extract(&resolve(g, None, Preset::PaperShape)?.cfg, corpus, out),
        Command::Fuse { corpus, features, out } => cmd_fuse(corpus, features, out),
        Command::Train { dataset, out } => cmd_train(&resolve(g, None, Preset::PaperShape)?.cfg, dataset, out),
        Command::Eval {
            checkpoint,
            dataset,
            out,
            probe,
        } => {
            let overrides = SplitOverrides {
                mode: g.split.map(Into::into),
                train_fraction: g.train_fraction,
                stratify: g.stratify,
                seed: g.seed,
            };
            let fallback = resolve(g, None, Preset::PaperShape)?.cfg;
            cmd_eval(&fallback, &overrides, checkpoint, dataset, out, *probe)
        }
        Command::Pipeline { out, probe, synth } => {
            let s = resolve(g, Some(synth), Preset::Small)?;
            let summary = cmd_pipeline(&s, out, *probe)?;
            for f in [REPORT_TXT, PROBE_TXT] {
                if let Ok(text) = std::fs::read_to_string(out.join(f)) {
                    println!("{text}");
                }
            }
            println!("summary: {} ({} rows, accuracy {:.4})", out.join(SUMMARY_FILE).display(), summary.rows, summary.accuracy);
            Ok(())
        }
    }
}
