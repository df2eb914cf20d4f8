//! Run configuration, result files, gap reports and plot series.

mod config;
mod plot;
mod results;

pub use config::{RangeGrid, RunConfig, Spacing};
pub use plot::{parameter_figure, rate_figure, Figure, Series};
pub use results::{gap_report, GapEntry, GapReport, ResultFile, ResultRow, COLUMNS};
