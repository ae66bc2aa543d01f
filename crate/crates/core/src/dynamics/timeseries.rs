use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvolutionEvent;
use crate::cascade::Transition;
use crate::error::{Error, Result};

pub const DEFAULT_BIN_WIDTH: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBin {
    pub start: i64,
    pub count: u64,
    /// `count`, or `count / total` when normalized.
    pub value: f64,
}

/// Event counts per transition in epoch-aligned half-open bins
/// `[start, start + width)`. Each series is contiguous from its first to its
/// last populated bin, with empty bins filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTimeseries {
    pub bin_width: i64,
    pub normalized: bool,
    pub series: BTreeMap<Transition, Vec<TimeBin>>,
}

pub fn evolution_timeseries(
    events: &[EvolutionEvent],
    bin_width: i64,
    normalize: bool,
) -> Result<EvolutionTimeseries> {
    if bin_width < 1 {
        return Err(Error::InvalidParameter(format!(
            "bin width must be >= 1 second, got {bin_width}"
        )));
    }
    let mut counts: BTreeMap<Transition, BTreeMap<i64, u64>> = BTreeMap::new();
    for e in events {
        let start = e.at_timestamp.div_euclid(bin_width) * bin_width;
        *counts
            .entry(e.transition())
            .or_default()
            .entry(start)
            .or_insert(0) += 1;
    }
    let series = counts
        .into_iter()
        .map(|(t, bins)| {
            let total: u64 = bins.values().sum();
            let first = *bins.keys().next().expect("nonempty");
            let last = *bins.keys().next_back().expect("nonempty");
            let filled = (0..=(last - first) / bin_width)
                .map(|i| {
                    let start = first + i * bin_width;
                    let count = bins.get(&start).copied().unwrap_or(0);
                    let value = if normalize {
                        count as f64 / total as f64
                    } else {
                        count as f64
                    };
                    TimeBin {
                        start,
                        count,
                        value,
                    }
                })
                .collect();
            (t, filled)
        })
        .collect();
    Ok(EvolutionTimeseries {
        bin_width,
        normalized: normalize,
        series,
    })
}
