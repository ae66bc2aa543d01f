use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use cascadekit::cascade::Transition;
use cascadekit::growth::{fit_bass, fit_si, EvolutionSeries, FitConfig, GrowthFit, GrowthModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::FitArgs;
use crate::config::apply;
use crate::table::write_json;
use crate::{Run, UsageError};

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct FitOutput {
    pub models: Vec<GrowthModel>,
    pub bin_width: i64,
    pub normalized: bool,
    pub fit: FitConfig,
    pub results: Vec<TransitionFit>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct TransitionFit {
    pub transition: Transition,
    pub first_bin_start: i64,
    pub observed: Vec<f64>,
    pub fits: Vec<GrowthFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Reads `transition,bin_start,count` rows into contiguous, zero-filled
/// count series.
fn read_timeseries(path: &Path, bin_width: i64) -> anyhow::Result<BTreeMap<Transition, (i64, Vec<f64>)>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no {name} column", path.display()))
    };
    let (ti, bi, ci) = (col("transition")?, col("bin_start")?, col("count")?);
    let mut raw: BTreeMap<Transition, BTreeMap<i64, f64>> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let at = || format!("{} row {}", path.display(), line + 2);
        let t: Transition = record[ti].parse().with_context(at)?;
        let start: i64 = record[bi].trim().parse().with_context(at)?;
        let count: f64 = record[ci].trim().parse().with_context(at)?;
        if !(count >= 0.0) {
            anyhow::bail!("{}: negative count", at());
        }
        *raw.entry(t).or_default().entry(start).or_insert(0.0) += count;
    }
    let mut out = BTreeMap::new();
    for (t, bins) in raw {
        let first = *bins.keys().next().expect("nonempty");
        let last = *bins.keys().next_back().expect("nonempty");
        if let Some(bad) = bins.keys().find(|s| (*s - first) % bin_width != 0) {
            anyhow::bail!(
                "{}: {t} bin {bad} is not on the {bin_width}s grid starting at {first}",
                path.display()
            );
        }
        let series = (0..=(last - first) / bin_width)
            .map(|i| bins.get(&(first + i * bin_width)).copied().unwrap_or(0.0))
            .collect();
        out.insert(t, (first, series));
    }
    Ok(out)
}

pub(crate) fn fit(run: &mut Run, args: FitArgs) -> anyhow::Result<()> {
    run.command("fit");
    let params = run.params_mut();
    apply(&mut params.model, args.model);
    apply(&mut params.bin_width, args.bin_width);
    apply(&mut params.epsilon, args.epsilon);
    apply(&mut params.time_scale, args.time_scale);
    if args.bin_index_time {
        params.time_scale = 1.0;
    }
    params.fit_normalized |= args.normalized;
    let params = params.clone();

    let models = match params.model.to_ascii_lowercase().as_str() {
        "both" => vec![GrowthModel::Si, GrowthModel::Bass],
        m => vec![m
            .parse::<GrowthModel>()
            .map_err(|_| UsageError(format!("--model must be si, bass or both, got {m:?}")))?],
    };
    if params.bin_width < 1 {
        return Err(UsageError("--bin must be at least 1 second".into()).into());
    }
    let wanted = args
        .transition
        .as_deref()
        .map(|t| t.parse::<Transition>().map_err(|_| UsageError(format!("unknown transition {t:?}"))))
        .transpose()?;
    let config = FitConfig {
        epsilon: params.epsilon,
        time_scale: params.time_scale,
        ..FitConfig::default()
    };

    run.input("timeseries", &args.timeseries);
    let mut all = read_timeseries(&args.timeseries, params.bin_width)?;
    if let Some(t) = wanted {
        let one = all
            .remove(&t)
            .with_context(|| format!("{} has no rows for {t}", args.timeseries.display()))?;
        all = BTreeMap::from([(t, one)]);
    }

    let results: Vec<anyhow::Result<TransitionFit>> = all
        .into_par_iter()
        .map(|(t, (first, counts))| {
            let mut series = EvolutionSeries::from_counts(counts, params.bin_width)?;
            if params.fit_normalized && series.total > 0.0 {
                let total = series.total;
                series = EvolutionSeries::from_counts(series.y.iter().map(|v| v / total).collect(), params.bin_width)?;
            }
            let mut fits = Vec::new();
            let mut skipped = None;
            for m in &models {
                let r = match m {
                    GrowthModel::Si => fit_si(&series, &config),
                    GrowthModel::Bass => fit_bass(&series, &config),
                };
                match r {
                    Ok(f) => fits.push(f),
                    Err(e) if wanted.is_none() => {
                        log::warn!("{t} {m}: {e}");
                        skipped = Some(e.to_string());
                        fits.clear();
                        break;
                    }
                    Err(e) => return Err(anyhow::Error::new(e).context(format!("fitting {m} to {t}"))),
                }
            }
            Ok(TransitionFit {
                transition: t,
                first_bin_start: first,
                observed: series.y,
                fits,
                skipped,
            })
        })
        .collect();
    let results = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;

    run.count("transitions", results.len() as u64);
    run.count("fitted", results.iter().filter(|r| r.skipped.is_none()).count() as u64);
    let out = FitOutput {
        models,
        bin_width: params.bin_width,
        normalized: params.fit_normalized,
        fit: config,
        results,
    };
    write_json(&args.out, &out)?;
    run.output("fit", &args.out);
    Ok(())
}
