use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::Context;
use cascadekit::cascade::{classify, CascadeType};
use cascadekit::dynamics::{evolution_timeseries, EvolutionEvent};

use crate::args::ReportArgs;
use crate::config::apply;
use crate::fit::FitOutput;
use crate::pipeline::load_cascades;
use crate::table::{csv_writer, fmt_num};
use crate::{Run, UsageError};

fn require(path: &Path) -> anyhow::Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        anyhow::bail!("missing stage output {}", path.display())
    }
}

pub(crate) fn report(run: &mut Run, args: ReportArgs) -> anyhow::Result<()> {
    run.command("report");
    apply(&mut run.params_mut().bin_width, args.bin_width);
    if args.cascades.is_none() && args.rates.is_none() && args.events.is_none() && args.fit.is_none() {
        return Err(UsageError("report needs at least one of --cascades, --rates, --events, --fit".into()).into());
    }
    for path in [&args.cascades, &args.rates, &args.events, &args.fit].into_iter().flatten() {
        require(path)?;
    }
    let dir = &args.out_dir;
    if let Some(path) = &args.cascades {
        cascade_tables(run, path, dir)?;
    }
    if let Some(path) = &args.rates {
        rate_table(run, path, dir)?;
    }
    if let Some(path) = &args.events {
        event_tables(run, path, dir)?;
    }
    if let Some(path) = &args.fit {
        fit_table(run, path, dir)?;
    }
    Ok(())
}

fn cascade_tables(run: &mut Run, path: &Path, dir: &Path) -> anyhow::Result<()> {
    let forest = load_cascades(run, "cascades", path)?;
    let mut per_type: BTreeMap<CascadeType, (u64, u64)> = BTreeMap::new();
    let mut depth: BTreeMap<(CascadeType, usize), u64> = BTreeMap::new();
    let mut volume: BTreeMap<(CascadeType, usize), u64> = BTreeMap::new();
    for c in &forest {
        let t = classify(c);
        let cell = per_type.entry(t).or_insert((0, 0));
        cell.0 += 1;
        cell.1 += c.volume() as u64;
        *depth.entry((t, c.max_depth())).or_insert(0) += 1;
        *volume.entry((t, c.volume())).or_insert(0) += 1;
    }

    let out = dir.join("fig2b_type_counts.csv");
    let mut w = csv_writer(&out, &["type", "cascades", "posts"])?;
    for (t, (cascades, posts)) in &per_type {
        w.write_record([t.to_string(), cascades.to_string(), posts.to_string()])?;
    }
    w.flush()?;
    run.output("type_counts", &out);

    for (name, column, table) in [("fig3_depth.csv", "depth", &depth), ("fig3_volume.csv", "volume", &volume)] {
        let out = dir.join(name);
        let mut w = csv_writer(&out, &["type", column, "frequency"])?;
        for ((t, v), n) in table {
            w.write_record([t.to_string(), v.to_string(), n.to_string()])?;
        }
        w.flush()?;
        run.output(&format!("{column}_distribution"), &out);
    }
    Ok(())
}

fn rate_table(run: &mut Run, path: &Path, dir: &Path) -> anyhow::Result<()> {
    run.input("rates", path);
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no {name} column", path.display()))
    };
    let (ti, li, ri) = (col("type")?, col("level")?, col("rate_per_hour")?);
    let out = dir.join("fig6_response_rate.csv");
    let mut w = csv_writer(&out, &["type", "level", "rate"])?;
    for record in reader.records() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let rate: f64 = record[ri].parse().with_context(|| format!("bad rate in {}", path.display()))?;
        w.write_record([&record[ti], &record[li], &fmt_num(rate)])?;
    }
    w.flush()?;
    run.output("response_rate", &out);
    Ok(())
}

fn read_events(path: &Path) -> anyhow::Result<Vec<EvolutionEvent>> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    Ok(events)
}

fn event_tables(run: &mut Run, path: &Path, dir: &Path) -> anyhow::Result<()> {
    run.input("events", path);
    let events = read_events(path)?;
    let include_bootstrap = run.params().include_bootstrap;
    let bin_width = run.params().bin_width;

    let out = dir.join("fig8_evolution_cost.csv");
    let mut w = csv_writer(&out, &["transition", "replies", "hours"])?;
    for e in &events {
        if e.transition().is_bootstrap() && !include_bootstrap {
            continue;
        }
        w.write_record([
            e.transition().to_string(),
            e.replies_since_last_transition.to_string(),
            fmt_num(e.elapsed_hours()),
        ])?;
    }
    w.flush()?;
    run.output("evolution_cost", &out);

    let ts = evolution_timeseries(&events, bin_width, false)?;
    let out = dir.join("fig9_evolution_timeseries.csv");
    let mut w = csv_writer(&out, &["transition", "bin", "count"])?;
    for (t, bins) in &ts.series {
        for (i, b) in bins.iter().enumerate() {
            w.write_record([t.to_string(), i.to_string(), b.count.to_string()])?;
        }
    }
    w.flush()?;
    run.output("evolution_timeseries", &out);
    run.count("events", events.len() as u64);
    Ok(())
}

fn fit_table(run: &mut Run, path: &Path, dir: &Path) -> anyhow::Result<()> {
    run.input("fit", path);
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let fits: FitOutput = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let out: PathBuf = dir.join("fig12_fit_error.csv");
    let mut w = csv_writer(&out, &["model", "transition", "mape"])?;
    for r in &fits.results {
        for f in &r.fits {
            w.write_record([f.model.to_string(), r.transition.to_string(), fmt_num(f.mape)])?;
        }
    }
    w.flush()?;
    run.output("fit_error", &out);
    Ok(())
}
