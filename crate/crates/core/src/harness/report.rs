//! Summaries of a results CSV grouped by one factor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sweep::{read_results, ResultRow};
use super::HarnessError;
use crate::metrics::{aggregate, AggregateRow, Stats};
use crate::sensor::Weather;
use crate::tracking::TrackerKind;

pub const SUMMARY_HEADER: &str = "group,method,mota_mean,mota_std,idsw_mean,idsw_std,n";
pub const QUANTILE_HEADER: &str = "group,method,metric,n,mean,std,min,q1,median,q3,max";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Weather,
    Density,
    Tracker,
    Place,
}

impl FromStr for GroupBy {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weather" => Ok(Self::Weather),
            "density" => Ok(Self::Density),
            "tracker" => Ok(Self::Tracker),
            "place" => Ok(Self::Place),
            _ => Err(HarnessError::Config(format!(
                "unknown group key `{s}` (expected weather, density, tracker or place)"
            ))),
        }
    }
}

impl GroupBy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Weather => "weather",
            Self::Density => "density",
            Self::Tracker => "tracker",
            Self::Place => "place",
        }
    }

    /// Sort rank and label. Weathers keep their natural order, densities sort
    /// numerically, the rest alphabetically.
    fn key(&self, r: &ResultRow) -> (u64, String) {
        match self {
            Self::Weather => (
                Weather::ALL
                    .iter()
                    .position(|w| *w == r.weather)
                    .unwrap_or(0) as u64,
                r.weather.to_string(),
            ),
            Self::Density => (r.density as u64, r.density.to_string()),
            Self::Tracker => (0, r.tracker.to_string()),
            Self::Place => (0, r.place.clone()),
        }
    }
}

/// One summary line with the trackers it pools.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group: String,
    pub method: String,
    pub stats: AggregateRow<(u64, String)>,
}

/// Groups successful rows; rows with an error or without MOTA are skipped.
pub fn summarize(
    rows: &[ResultRow],
    group_by: GroupBy,
    tracker: Option<TrackerKind>,
) -> Vec<ReportRow> {
    let mut groups: BTreeMap<(u64, String), Vec<(f64, f64)>> = BTreeMap::new();
    let mut methods: BTreeMap<(u64, String), BTreeSet<TrackerKind>> = BTreeMap::new();
    let mut skipped = 0;
    for r in rows
        .iter()
        .filter(|r| tracker.is_none_or(|t| r.tracker == t))
    {
        let key = group_by.key(r);
        let entry = groups.entry(key.clone()).or_default();
        match r.mota {
            Some(m) if r.error.is_empty() => {
                entry.push((m, r.idsw as f64));
                methods.entry(key).or_default().insert(r.tracker);
            }
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} row(s) without a MOTA value were left out");
    }
    aggregate(&groups)
        .into_iter()
        .map(|stats| {
            let method = methods[&stats.key]
                .iter()
                .map(|t| t.as_str())
                .collect::<Vec<_>>()
                .join("+");
            ReportRow {
                group: stats.key.1.clone(),
                method,
                stats,
            }
        })
        .collect()
}

fn f6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn format_summary(rows: &[ReportRow]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let (m, i) = (&r.stats.mota, &r.stats.idsw);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.group,
            r.method,
            f6(m.mean),
            f6(m.std),
            f6(i.mean),
            f6(i.std),
            m.n
        );
    }
    s
}

pub fn format_quantiles(rows: &[ReportRow]) -> String {
    let mut s = format!("{QUANTILE_HEADER}\n");
    for r in rows {
        for (metric, st) in [("mota", &r.stats.mota), ("idsw", &r.stats.idsw)] {
            let Stats {
                n,
                mean,
                std,
                min,
                q1,
                median,
                q3,
                max,
            } = *st;
            let _ = writeln!(
                s,
                "{},{},{metric},{n},{},{},{},{},{},{},{}",
                r.group,
                r.method,
                f6(mean),
                f6(std),
                f6(min),
                f6(q1),
                f6(median),
                f6(q3),
                f6(max)
            );
        }
    }
    s
}

/// Writes `<prefix>.summary.csv` and `<prefix>.quantiles.csv`; returns both
/// paths.
pub fn write_report(
    results: &Path,
    group_by: GroupBy,
    tracker: Option<TrackerKind>,
    prefix: &Path,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    let rows = summarize(&read_results(results)?, group_by, tracker);
    let with_suffix = |suffix: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(suffix);
        PathBuf::from(p)
    };
    let summary = with_suffix(".summary.csv");
    let quantiles = with_suffix(".quantiles.csv");
    if let Some(parent) = summary.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&summary, format_summary(&rows))
        .map_err(|e| HarnessError::Io(format!("{}: {e}", summary.display())))?;
    std::fs::write(&quantiles, format_quantiles(&rows))
        .map_err(|e| HarnessError::Io(format!("{}: {e}", quantiles.display())))?;
    Ok((summary, quantiles))
}
