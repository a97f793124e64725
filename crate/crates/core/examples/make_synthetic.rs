//! Writes a synthetic full-size `corpus.json` and `responses.json`.
//!
//! ```text
//! cargo run --example make_synthetic -- <out-dir> [seed]
//! ```

use std::path::PathBuf;

use cognitive_status::io::{write_corpus, write_responses, ResponsesFile};
use cognitive_status::synthetic::{generate, SyntheticSpec};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".to_string()));
    let seed = args
        .next()
        .map_or(1, |s| s.parse().expect("seed must be an integer"));
    let (corpus, responses) = generate(&SyntheticSpec::full_size(), seed);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("corpus.json"), write_corpus(&corpus))?;
    std::fs::write(
        dir.join("responses.json"),
        write_responses(&ResponsesFile { responses }),
    )?;
    println!(
        "wrote {}/corpus.json and {}/responses.json",
        dir.display(),
        dir.display()
    );
    Ok(())
}
