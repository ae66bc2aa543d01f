//! Temporal behaviour of cascades: per-level response rates and replay of
//! structural type changes.

mod evolution;
mod response;
mod timeseries;

pub use evolution::{
    detect_evolutions, evolution_stats, EvolutionEvent, EvolutionStats, TransitionStats,
};
pub use response::{response_rate_table, ResponseRate, ResponseRateTable, MIN_RESPONSE_SECS};
pub use timeseries::{evolution_timeseries, EvolutionTimeseries, TimeBin, DEFAULT_BIN_WIDTH};
