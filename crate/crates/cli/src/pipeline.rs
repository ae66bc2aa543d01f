use std::collections::BTreeSet;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::Context;
use cascadekit::cascade::cache::{read_cascades, write_cascades};
use cascadekit::cascade::{build_cascades, cascade_stats, Cascade};
use cascadekit::dynamics::{
    detect_evolutions, evolution_stats, evolution_timeseries, response_rate_table, EvolutionEvent,
};
use cascadekit::ingest::{open_corpus, to_canonical_json, Post, PostFilter, PostKind};
use cascadekit::stats::Summary;
use rayon::prelude::*;

use crate::args::{BuildArgs, EvolutionsArgs, FilterArgs, IngestArgs, ResponseRatesArgs, StatsArgs};
use crate::config::apply;
use crate::table::{create, csv_writer, fmt_num, fmt_opt, write_json};
use crate::{Run, UsageError};

fn resolve_filter(run: &mut Run, flags: FilterArgs) -> anyhow::Result<PostFilter> {
    let params = run.params_mut();
    if flags.from.is_some() {
        params.from = flags.from;
    }
    if flags.to.is_some() {
        params.to = flags.to;
    }
    if flags.kinds.is_some() {
        params.kinds = flags.kinds;
    }
    if let (Some(from), Some(to)) = (params.from, params.to) {
        if from > to {
            return Err(UsageError(format!("--from {from} is after --to {to}")).into());
        }
    }
    let kinds = match &params.kinds {
        None => None,
        Some(names) => Some(
            names
                .iter()
                .map(|k| k.parse::<PostKind>().map_err(|_| UsageError(format!("unknown post kind {k:?}"))))
                .collect::<Result<BTreeSet<_>, _>>()?,
        ),
    };
    Ok(PostFilter {
        from: params.from,
        to: params.to,
        kinds,
    })
}

/// Streams the corpus, recording its counts under `corpus_*`.
pub(crate) fn read_posts(
    run: &mut Run,
    path: &Path,
    filter: FilterArgs,
    mut each: impl FnMut(Post) -> anyhow::Result<()>,
) -> anyhow::Result<cascadekit::ingest::CorpusStats> {
    let filter = resolve_filter(run, filter)?;
    run.input("posts", path);
    let mut reader = open_corpus(path, filter)?;
    for post in reader.by_ref() {
        each(post)?;
    }
    if let Some(e) = reader.take_error() {
        return Err(anyhow::Error::new(e).context(format!("reading {}", path.display())));
    }
    let stats = reader.stats().clone();
    run.count("corpus_records", stats.total_records);
    run.count("corpus_parsed", stats.parsed);
    run.count("corpus_rejected", stats.rejected);
    run.count("corpus_filtered_out", stats.filtered_out);
    if stats.rejected > 0 {
        log::warn!("{} of {} records rejected", stats.rejected, stats.total_records);
    }
    Ok(stats)
}

pub(crate) fn load_cascades(run: &mut Run, role: &str, path: &Path) -> anyhow::Result<Vec<Cascade>> {
    run.input(role, path);
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let forest = read_cascades(BufReader::with_capacity(1 << 20, file))
        .with_context(|| format!("reading {}", path.display()))?;
    run.count("cascades_in", forest.len() as u64);
    Ok(forest)
}

pub(crate) fn ingest(run: &mut Run, args: IngestArgs) -> anyhow::Result<()> {
    run.command("ingest");
    let mut out = args.out.as_deref().map(create).transpose()?;
    let mut emitted = 0u64;
    let stats = read_posts(run, &args.input, args.filter, |post| {
        if let Some(out) = out.as_mut() {
            out.write_all(to_canonical_json(&post).as_bytes())?;
            out.write_all(b"\n")?;
        }
        emitted += 1;
        Ok(())
    })?;
    if let Some(mut out) = out {
        out.flush()?;
    }
    run.count("posts_out", emitted);
    write_json(&args.stats_out, &stats)?;
    run.output("stats", &args.stats_out);
    if let Some(path) = &args.out {
        run.output("posts", path);
    }
    Ok(())
}

pub(crate) fn build(run: &mut Run, args: BuildArgs) -> anyhow::Result<()> {
    run.command("cascades build");
    let mut posts = Vec::new();
    read_posts(run, &args.input, args.filter, |p| {
        posts.push(p);
        Ok(())
    })?;
    let total = posts.len() as u64;
    let built = build_cascades(posts);
    let placed = built.placed_posts() as u64;
    let quarantined = built.orphans.quarantined_count() as u64;
    if placed + quarantined != total {
        anyhow::bail!("internal error: {total} posts in, {placed} placed, {quarantined} quarantined");
    }
    run.count("posts_in", total);
    run.count("posts_placed", placed);
    run.count("posts_quarantined", quarantined);
    run.count("cascades", built.cascades.len() as u64);
    run.count(
        "cascades_orphan_rooted",
        built.cascades.iter().filter(|c| c.orphan_rooted()).count() as u64,
    );
    run.count("late_edges", built.cascades.iter().map(|c| c.late_edges() as u64).sum());

    write_cascades(create(&args.out)?, &built.cascades)?;
    run.output("cascades", &args.out);
    if let Some(path) = &args.orphans_out {
        write_json(path, &built.orphans)?;
        run.output("orphans", path);
    }
    Ok(())
}

const SUMMARY_COLUMNS: [&str; 4] = ["min", "max", "mean", "std"];

fn summary_cells(s: &Summary) -> [String; 4] {
    [
        fmt_opt(s.min_value()),
        fmt_opt(s.max_value()),
        fmt_opt(s.mean()),
        fmt_opt(s.std_dev()),
    ]
}

pub(crate) fn stats(run: &mut Run, args: StatsArgs) -> anyhow::Result<()> {
    run.command("cascades stats");
    let forest = load_cascades(run, "cascades", &args.input)?;
    let summary = cascade_stats(&forest);

    let mut header = vec!["type".to_string(), "count".to_string()];
    for metric in ["depth", "volume", "users", "wiener"] {
        header.extend(SUMMARY_COLUMNS.iter().map(|c| format!("{metric}_{c}")));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = csv_writer(&args.out, &header)?;
    for (t, s) in &summary.per_type {
        let mut row = vec![t.to_string(), s.count.to_string()];
        for metric in [&s.depth, &s.volume, &s.users, &s.wiener] {
            row.extend(summary_cells(metric));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    run.count("types", summary.per_type.len() as u64);
    run.output("stats", &args.out);
    Ok(())
}

pub(crate) fn response_rates(run: &mut Run, args: ResponseRatesArgs) -> anyhow::Result<()> {
    run.command("dynamics response-rates");
    let forest = load_cascades(run, "cascades", &args.input)?;
    let table = response_rate_table(&forest);
    let mut w = csv_writer(
        &args.out,
        &["type", "level", "mean_delta_hours", "rate_per_hour", "samples"],
    )?;
    for ((t, level), r) in &table.entries {
        w.write_record([
            t.to_string(),
            level.to_string(),
            fmt_num(r.mean_delta_hours),
            fmt_num(r.rate_per_hour),
            r.samples.to_string(),
        ])?;
    }
    w.flush()?;
    run.count("rows", table.entries.len() as u64);
    run.output("rates", &args.out);
    Ok(())
}

pub(crate) fn evolutions(run: &mut Run, args: EvolutionsArgs) -> anyhow::Result<()> {
    run.command("dynamics evolutions");
    let params = run.params_mut();
    apply(&mut params.bin_width, args.bin_width);
    params.normalize |= args.normalize;
    params.include_bootstrap |= args.include_bootstrap;
    let (bin_width, normalize, include_bootstrap) =
        (params.bin_width, params.normalize, params.include_bootstrap);
    if bin_width < 1 {
        return Err(UsageError(format!("--bin must be at least 1 second, got {bin_width}")).into());
    }

    let forest = load_cascades(run, "cascades", &args.input)?;
    let events: Vec<EvolutionEvent> = forest.par_iter().flat_map_iter(detect_evolutions).collect();
    let mut out = create(&args.events_out)?;
    for e in &events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    run.count("events", events.len() as u64);
    run.output("events", &args.events_out);

    if let Some(path) = &args.stats_out {
        let stats = evolution_stats(&events, include_bootstrap);
        let mut header = vec!["transition".to_string(), "count".to_string()];
        for metric in ["replies", "hours"] {
            header.extend(SUMMARY_COLUMNS.iter().map(|c| format!("{metric}_{c}")));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut w = csv_writer(path, &header)?;
        for (t, s) in &stats.per_transition {
            let mut row = vec![t.to_string(), s.replies.count.to_string()];
            row.extend(summary_cells(&s.replies));
            row.extend(summary_cells(&s.hours));
            w.write_record(&row)?;
        }
        w.flush()?;
        run.output("evolution_stats", path);
    }

    if let Some(path) = &args.timeseries_out {
        let ts = evolution_timeseries(&events, bin_width, normalize)?;
        let mut header = vec!["transition", "bin_start", "count"];
        if normalize {
            header.push("fraction");
        }
        let mut w = csv_writer(path, &header)?;
        for (t, bins) in &ts.series {
            for b in bins {
                let mut row = vec![t.to_string(), b.start.to_string(), b.count.to_string()];
                if normalize {
                    row.push(fmt_num(b.value));
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        run.output("timeseries", path);
    }
    Ok(())
}
