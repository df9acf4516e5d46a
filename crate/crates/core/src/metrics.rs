//! Evaluation metrics: average guard period, channel usage, capacity, and
//! Monte Carlo aggregation with normal-approximation confidence intervals.
//!
//! All timeline metrics are taken over the post-warm-up window: from the end
//! of the first complete transmission round trip to the end of the last UL
//! block. For a TA timeline that window is a whole number of periods, so the
//! closed forms `guard = G*slot` and `usage = (X+u)/(X+G+u)` hold exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::LinkQuality;
use crate::float::{from_f64, SimFloat};
use crate::scheduler::SelectionResult;
use crate::tdd::{SlotState, SlotTimeline};

/// Two-sided 95% z value used for the normal-approximation intervals.
const Z95: f64 = 1.96;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("timeline has fewer than two complete transmission rounds")]
    InsufficientRecords,
    #[error("selection has {selected} UEs but {links} link-quality entries were given")]
    SelectionLinkMismatch { selected: usize, links: usize },
    #[error("aggregate needs at least one report")]
    NoReports,
}

/// Per-field 95% confidence half-widths for an aggregated report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiHalfWidths<F> {
    pub avg_guard_period_ms: F,
    pub channel_usage_pct: F,
    pub dl_usage_pct: F,
    pub ul_usage_pct: F,
    pub avg_capacity_mbps: F,
    pub dl_capacity_mbps: F,
    pub ul_capacity_mbps: F,
}

/// The evaluation metrics of one run, or the mean over many runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<F> {
    pub avg_guard_period_ms: F,
    pub channel_usage_pct: F,
    pub dl_usage_pct: F,
    pub ul_usage_pct: F,
    pub avg_capacity_mbps: F,
    pub dl_capacity_mbps: F,
    pub ul_capacity_mbps: F,
    pub n_runs: usize,
    /// Present only for aggregates of two or more runs.
    pub ci95: Option<CiHalfWidths<F>>,
}

/// Post-warm-up slot window `[start, end)`: the first round trip is excluded
/// as warm-up and the window closes at the end of the last UL block.
fn post_warmup_window<F: SimFloat>(timeline: &SlotTimeline<F>) -> Option<(usize, usize)> {
    if timeline.records.len() < 2 {
        return None;
    }
    let u = timeline.grid.ul_slots_per_tx;
    let start = timeline.records[0].ul_slot + u;
    let end = timeline.records.last().unwrap().ul_slot + u;
    Some((start, end))
}

/// Mean length of the maximal idle intervals between allocated slots, in ms.
/// A fully packed window has no idle intervals and reports 0.
pub fn guard_period<F: SimFloat>(timeline: &SlotTimeline<F>) -> Result<F, MetricsError> {
    let (start, end) = post_warmup_window(timeline).ok_or(MetricsError::InsufficientRecords)?;
    let mut runs = 0usize;
    let mut total_idle = 0usize;
    let mut current = 0usize;
    for s in start..end {
        if timeline.slots[s] == SlotState::Idle {
            current += 1;
        } else if current > 0 {
            runs += 1;
            total_idle += current;
            current = 0;
        }
    }
    // the window ends right after an allocated UL slot, so no run is open
    debug_assert_eq!(current, 0);
    if runs == 0 {
        return Ok(F::zero());
    }
    Ok(from_f64::<F>(total_idle as f64 / runs as f64) * timeline.grid.slot_duration_ms)
}

/// Channel usage over the post-warm-up window as percentages
/// `(total, dl, ul)`; timelines without two complete rounds are measured
/// over the whole horizon (an all-idle timeline reports zeros).
pub fn channel_usage<F: SimFloat>(timeline: &SlotTimeline<F>) -> (F, F, F) {
    let (start, end) = post_warmup_window(timeline).unwrap_or((0, timeline.grid.horizon_slots));
    let mut dl = 0usize;
    let mut ul = 0usize;
    for s in start..end {
        match timeline.slots[s] {
            SlotState::Dl(_) => dl += 1,
            SlotState::Ul(_) => ul += 1,
            SlotState::Idle => {}
        }
    }
    let window = (end - start).max(1) as f64;
    let pct = |n: usize| from_f64::<F>(100.0 * n as f64 / window);
    (pct(dl + ul), pct(dl), pct(ul))
}

/// Usage-weighted capacity `(total, dl, ul)` in Mbps: the mean Ergodic
/// capacity of the selected UEs scaled by the DL and UL usage fractions.
pub fn capacity<F: SimFloat>(
    selection: &SelectionResult<F>,
    links: &[LinkQuality<F>],
    dl_usage_fraction: F,
    ul_usage_fraction: F,
) -> Result<(F, F, F), MetricsError> {
    if links.len() != selection.selected_ids.len() {
        return Err(MetricsError::SelectionLinkMismatch {
            selected: selection.selected_ids.len(),
            links: links.len(),
        });
    }
    let mut sum = F::zero();
    for l in links {
        sum += l.ergodic_capacity_mbps;
    }
    let mean = sum / from_f64(links.len() as f64);
    let dl = mean * dl_usage_fraction;
    let ul = mean * ul_usage_fraction;
    Ok((dl + ul, dl, ul))
}

fn fields<F: SimFloat>(r: &MetricsReport<F>) -> [F; 7] {
    [
        r.avg_guard_period_ms,
        r.channel_usage_pct,
        r.dl_usage_pct,
        r.ul_usage_pct,
        r.avg_capacity_mbps,
        r.dl_capacity_mbps,
        r.ul_capacity_mbps,
    ]
}

/// Per-field mean over runs with 95% normal-approximation confidence
/// half-widths (`1.96 * s / sqrt(n)`). With a single report the CI fields
/// are absent.
pub fn aggregate<F: SimFloat>(
    reports: &[MetricsReport<F>],
) -> Result<MetricsReport<F>, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::NoReports);
    }
    let n_runs: usize = reports.iter().map(|r| r.n_runs).sum();
    if reports.len() == 1 {
        return Ok(MetricsReport {
            n_runs,
            ci95: None,
            ..reports[0]
        });
    }
    let n = from_f64::<F>(reports.len() as f64);
    let mut means = [F::zero(); 7];
    for r in reports {
        for (m, v) in means.iter_mut().zip(fields(r)) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut half = [F::zero(); 7];
    for r in reports {
        for ((h, v), m) in half.iter_mut().zip(fields(r)).zip(means) {
            let d = v - m;
            *h += d * d;
        }
    }
    let z = from_f64::<F>(Z95);
    for h in &mut half {
        let var = *h / (n - F::one());
        *h = z * (var / n).sqrt();
    }
    Ok(MetricsReport {
        avg_guard_period_ms: means[0],
        channel_usage_pct: means[1],
        dl_usage_pct: means[2],
        ul_usage_pct: means[3],
        avg_capacity_mbps: means[4],
        dl_capacity_mbps: means[5],
        ul_capacity_mbps: means[6],
        n_runs,
        ci95: Some(CiHalfWidths {
            avg_guard_period_ms: half[0],
            channel_usage_pct: half[1],
            dl_usage_pct: half[2],
            ul_usage_pct: half[3],
            avg_capacity_mbps: half[4],
            dl_capacity_mbps: half[5],
            ul_capacity_mbps: half[6],
        }),
    })
}
