use std::path::Path;

use anyhow::{Context, Result};
use neurofuse::io::MANIFEST_FILE;
use neurofuse::synth::{generate_corpus, SynthSpec};

pub fn cmd_synth(spec: &SynthSpec, out: &Path) -> Result<()> {
    let manifest = generate_corpus(spec, out).with_context(|| format!("generating corpus in {}", out.display()))?;
    println!(
        "wrote {} trials ({} files) and {}",
        manifest.entries.len(),
        2 * manifest.entries.len(),
        out.join(MANIFEST_FILE).display()
    );
    Ok(())
}
