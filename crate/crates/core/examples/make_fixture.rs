//! Writes a synthetic corpus and its topic seeds:
//!
//! ```text
//! cargo run --example make_fixture -- <out_dir> [posts] [seed]
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use cascadekit::ingest::to_canonical_json;
use cascadekit::synth::{generate_corpus, CorpusParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: make_fixture <out_dir> [posts] [seed]")?);
    let posts: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1_000);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let corpus = generate_corpus(&CorpusParams { posts, ..CorpusParams::default() }, seed);
    std::fs::create_dir_all(&dir)?;
    let mut out = BufWriter::new(File::create(dir.join("posts.jsonl"))?);
    for p in &corpus.posts {
        writeln!(out, "{}", to_canonical_json(p))?;
    }
    out.flush()?;
    std::fs::write(dir.join("seeds.json"), corpus.seeds.to_json())?;
    println!("wrote {} posts to {}", corpus.posts.len(), dir.display());
    Ok(())
}
