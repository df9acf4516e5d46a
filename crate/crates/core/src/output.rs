//! Result serialization: sweep CSV, the mirroring JSON report, and optional
//! per-run timeline traces.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::metrics::MetricsReport;
use crate::sim::SweepPoint;
use crate::Scalar;

/// One (axis value, metric) row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub policy: String,
    pub scheduler: String,
    pub pattern: String,
    pub metric: String,
    pub mean: Scalar,
    pub ci95: Option<Scalar>,
    pub n_runs: usize,
}

const METRIC_NAMES: [&str; 7] = [
    "guard_period_ms",
    "channel_usage_pct",
    "dl_usage_pct",
    "ul_usage_pct",
    "capacity_mbps",
    "dl_capacity_mbps",
    "ul_capacity_mbps",
];

fn metric_values(report: &MetricsReport<Scalar>) -> [Scalar; 7] {
    [
        report.avg_guard_period_ms,
        report.channel_usage_pct,
        report.dl_usage_pct,
        report.ul_usage_pct,
        report.avg_capacity_mbps,
        report.dl_capacity_mbps,
        report.ul_capacity_mbps,
    ]
}

/// Flattens sweep points into rows, one per (value, metric), in sweep order.
pub fn sweep_rows(points: &[SweepPoint]) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(points.len() * METRIC_NAMES.len());
    for point in points {
        let values = metric_values(&point.aggregate);
        let cis = point.aggregate.ci95.map(|ci| {
            [
                ci.avg_guard_period_ms,
                ci.channel_usage_pct,
                ci.dl_usage_pct,
                ci.ul_usage_pct,
                ci.avg_capacity_mbps,
                ci.dl_capacity_mbps,
                ci.ul_capacity_mbps,
            ]
        });
        for (i, name) in METRIC_NAMES.iter().enumerate() {
            rows.push(SweepRow {
                axis: point.axis.to_string(),
                value: point.label.clone(),
                policy: point.config.policy.to_string(),
                scheduler: point.config.scheduler.to_string(),
                pattern: point.config.pattern.to_string(),
                metric: name.to_string(),
                mean: values[i],
                ci95: cis.map(|c| c[i]),
                n_runs: point.aggregate.n_runs,
            });
        }
    }
    rows
}

/// Serializes rows as CSV bytes; byte-identical for identical rows.
pub fn csv_bytes(rows: &[SweepRow]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("csv row serializes");
    }
    writer.into_inner().expect("csv buffer")
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    fs::write(path, csv_bytes(rows))
}

/// JSON report mirroring the CSV rows.
pub fn write_json(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(rows).expect("rows serialize");
    bytes.push(b'\n');
    fs::write(path, bytes)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes one trace file per run under `dir/traces/`.
pub fn write_traces(dir: &Path, points: &[SweepPoint]) -> io::Result<()> {
    let trace_dir = dir.join("traces");
    fs::create_dir_all(&trace_dir)?;
    for point in points {
        for run in &point.runs {
            let name = format!(
                "{}_{}_run{:04}.txt",
                sanitize(&point.axis.to_string()),
                sanitize(&point.label),
                run.run_index
            );
            fs::write(trace_dir.join(name), format!("{}\n", run.trace))?;
        }
    }
    Ok(())
}
