#![allow(dead_code)]

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cascadekit::ingest::to_canonical_json;
use cascadekit::synth::{generate_corpus, CorpusParams};

pub fn cascadekit() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cascadekit"));
    cmd.env_remove("CASCADEKIT_CONFIG");
    cmd
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    cascadekit().current_dir(dir).args(args).output().expect("spawn cascadekit")
}

pub fn ok_in(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "cascadekit {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Synthetic corpus plus seeds. `extra_lines` are appended verbatim.
pub fn write_fixture(dir: &Path, posts: usize, seed: u64, extra_lines: &[&str]) -> PathBuf {
    let corpus = generate_corpus(&CorpusParams { posts, ..CorpusParams::default() }, seed);
    let path = dir.join("posts.jsonl");
    let mut out = BufWriter::new(File::create(&path).unwrap());
    for p in &corpus.posts {
        writeln!(out, "{}", to_canonical_json(p)).unwrap();
    }
    for line in extra_lines {
        writeln!(out, "{line}").unwrap();
    }
    out.flush().unwrap();
    std::fs::write(dir.join("seeds.json"), corpus.seeds.to_json()).unwrap();
    path
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

/// Every stage of the pipeline on the fixture in `dir`.
pub const PIPELINE: &[&[&str]] = &[
    &["ingest", "--input", "posts.jsonl", "--stats-out", "ingest.json", "--out", "canonical.jsonl"],
    &["cascades", "build", "--input", "posts.jsonl", "--out", "cascades.jsonl", "--orphans-out", "orphans.json"],
    &["cascades", "stats", "--input", "cascades.jsonl", "--out", "stats.csv"],
    &["dynamics", "response-rates", "--input", "cascades.jsonl", "--out", "rates.csv"],
    &[
        "dynamics", "evolutions", "--input", "cascades.jsonl", "--events-out", "events.jsonl",
        "--stats-out", "evo_stats.csv", "--timeseries-out", "evo_ts.csv", "--bin", "86400",
    ],
    &["topics", "graph", "--input", "posts.jsonl", "--out", "htgraph.jsonl"],
    &[
        "topics", "label", "--graph", "htgraph.jsonl", "--seeds", "seeds.json", "--tau", "2",
        "--rounds", "1", "--holdout", "4", "--rng-seed", "5", "--truth-out", "truth.json", "--out", "labels.json",
    ],
    &["topics", "assign", "--cascades", "cascades.jsonl", "--labels", "labels.json", "--min-count", "1", "--out", "ctopics.csv"],
    &["topics", "eval", "--labels", "labels.json", "--truth", "truth.json", "--out", "report.json"],
    &["topics", "tiestrength", "--cascades", "cascades.jsonl", "--topics", "ctopics.csv", "--out", "ties.csv", "--pairs-out", "pairs.csv"],
    &["fit", "--timeseries", "evo_ts.csv", "--model", "both", "--out", "fit.json"],
    &[
        "report", "--cascades", "cascades.jsonl", "--rates", "rates.csv", "--events", "events.jsonl",
        "--fit", "fit.json", "--out-dir", "figs",
    ],
];

/// Files whose bytes must not depend on the run.
pub const PRIMARY_OUTPUTS: &[&str] = &[
    "ingest.json", "canonical.jsonl", "cascades.jsonl", "orphans.json", "stats.csv", "rates.csv",
    "events.jsonl", "evo_stats.csv", "evo_ts.csv", "htgraph.jsonl", "labels.json", "truth.json",
    "ctopics.csv", "report.json", "ties.csv", "pairs.csv", "fit.json",
    "figs/fig2b_type_counts.csv", "figs/fig3_depth.csv", "figs/fig3_volume.csv",
    "figs/fig6_response_rate.csv", "figs/fig8_evolution_cost.csv",
    "figs/fig9_evolution_timeseries.csv", "figs/fig12_fit_error.csv",
];

pub fn run_pipeline(dir: &Path) {
    for args in PIPELINE {
        ok_in(dir, args);
    }
}
