use std::collections::{BTreeMap, BTreeSet};
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use cascadekit::topics::{
    assign_cascade_topics, build_hashtag_graph, evaluate_multilabel, holdout_split, label_hashtags,
    tie_strength as tie_table, topic_tie_strength, HashtagGraph, MultiLabelReport, TopicAssignment,
    TopicSeedSet,
};
use serde::Serialize;

use crate::args::{AssignArgs, EvalArgs, GraphArgs, LabelArgs, TieArgs};
use crate::config::apply;
use crate::pipeline::{load_cascades, read_posts};
use crate::table::{create, csv_writer, fmt_num, write_json};
use crate::{Run, UsageError};

type LabelMap = BTreeMap<String, BTreeSet<String>>;

fn read_json<T: serde::de::DeserializeOwned>(run: &mut Run, role: &str, path: &Path) -> anyhow::Result<T> {
    run.input(role, path);
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn graph(run: &mut Run, args: GraphArgs) -> anyhow::Result<()> {
    run.command("topics graph");
    let mut posts = Vec::new();
    read_posts(run, &args.input, args.filter, |p| {
        posts.push(p);
        Ok(())
    })?;
    let g = build_hashtag_graph(&posts);
    g.write_jsonl(create(&args.out)?)?;
    run.count("vertices", g.vertex_count() as u64);
    run.count("edges", g.edge_count() as u64);
    run.output("graph", &args.out);
    Ok(())
}

pub(crate) fn label(run: &mut Run, args: LabelArgs) -> anyhow::Result<()> {
    run.command("topics label");
    let params = run.params_mut();
    apply(&mut params.tau, args.tau);
    apply(&mut params.rounds, args.rounds);
    apply(&mut params.holdout, args.holdout);
    apply(&mut params.rng_seed, args.rng_seed);
    let (tau, rounds, holdout, rng_seed) = (params.tau, params.rounds, params.holdout, params.rng_seed);
    if !(tau >= 0.0) || rounds == 0 {
        return Err(UsageError(format!("need --tau >= 0 and --rounds >= 1, got {tau} and {rounds}")).into());
    }

    run.input("graph", &args.graph);
    let file = std::fs::File::open(&args.graph)
        .with_context(|| format!("cannot open {}", args.graph.display()))?;
    let g = HashtagGraph::read_jsonl(BufReader::new(file))?;
    run.input("seeds", &args.seeds);
    let seed_text = std::fs::read_to_string(&args.seeds)
        .with_context(|| format!("cannot read {}", args.seeds.display()))?;
    let seeds = TopicSeedSet::from_json(&seed_text)?;

    let (train, truth) = holdout_split(&seeds, holdout, rng_seed)?;
    let assignment = label_hashtags(&g, &train, tau, rounds)?;
    write_json(&args.out, &assignment)?;
    run.output("labels", &args.out);
    run.count("seed_hashtags", seeds.hashtag_count() as u64);
    run.count("held_out", truth.len() as u64);
    run.count("labeled_hashtags", assignment.labels.len() as u64);
    if let Some(path) = &args.truth_out {
        write_json(path, &truth)?;
        run.output("truth", path);
    }
    Ok(())
}

pub(crate) fn assign(run: &mut Run, args: AssignArgs) -> anyhow::Result<()> {
    run.command("topics assign");
    apply(&mut run.params_mut().min_count, args.min_count);
    let min_count = run.params().min_count;
    if min_count < 1 {
        return Err(UsageError("--min-count must be at least 1".into()).into());
    }
    let forest = load_cascades(run, "cascades", &args.cascades)?;
    let assignment: TopicAssignment = read_json(run, "labels", &args.labels)?;
    let topics = assign_cascade_topics(&forest, &assignment, min_count)?;
    let mut w = csv_writer(&args.out, &["cascade_id", "topic"])?;
    let mut rows = 0u64;
    for (cascade, ts) in &topics {
        for t in ts {
            w.write_record([cascade, t])?;
            rows += 1;
        }
    }
    w.flush()?;
    run.count("cascades_with_topic", topics.len() as u64);
    run.count("rows", rows);
    run.output("cascade_topics", &args.out);
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    items: usize,
    labels: BTreeSet<String>,
    report: MultiLabelReport,
}

pub(crate) fn eval(run: &mut Run, args: EvalArgs) -> anyhow::Result<()> {
    run.command("topics eval");
    let assignment: TopicAssignment = read_json(run, "labels", &args.labels)?;
    let truth: LabelMap = read_json(run, "truth", &args.truth)?;
    let predicted: LabelMap = truth
        .keys()
        .map(|h| (h.clone(), assignment.labels.get(h).cloned().unwrap_or_default()))
        .collect();
    let mut universe: BTreeSet<String> = assignment.topics.iter().cloned().collect();
    universe.extend(truth.values().flatten().cloned());
    let report = evaluate_multilabel(&predicted, &truth, &universe)?;
    write_json(
        &args.out,
        &EvalOutput {
            items: truth.len(),
            labels: universe,
            report,
        },
    )?;
    run.count("items", truth.len() as u64);
    run.output("report", &args.out);
    Ok(())
}

pub(crate) fn read_cascade_topics(run: &mut Run, path: &Path) -> anyhow::Result<LabelMap> {
    run.input("cascade_topics", path);
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no {name} column", path.display()))
    };
    let (ci, ti) = (col("cascade_id")?, col("topic")?);
    let mut map = LabelMap::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        map.entry(record[ci].to_string()).or_default().insert(record[ti].to_string());
    }
    Ok(map)
}

pub(crate) fn tie_strength(run: &mut Run, args: TieArgs) -> anyhow::Result<()> {
    run.command("topics tiestrength");
    let forest = load_cascades(run, "cascades", &args.cascades)?;
    let cascade_topics = read_cascade_topics(run, &args.topics)?;
    let table = tie_table(&forest);
    let means = topic_tie_strength(&table, &cascade_topics, &forest);
    run.note("tie_strength_unit", "mean of global pair counts over distinct user pairs per topic");

    let mut w = csv_writer(&args.out, &["topic", "mean_tie_strength"])?;
    for (t, m) in &means {
        w.write_record([t.clone(), fmt_num(*m)])?;
    }
    w.flush()?;
    run.output("topic_ties", &args.out);
    run.count("pairs", table.pairs.len() as u64);
    run.count("topics", means.len() as u64);

    if let Some(path) = &args.pairs_out {
        let mut w = csv_writer(path, &["user_a", "user_b", "count"])?;
        for ((a, b), n) in &table.pairs {
            w.write_record([a.as_str(), b.as_str(), &n.to_string()])?;
        }
        w.flush()?;
        run.output("pairs", path);
    }
    Ok(())
}
