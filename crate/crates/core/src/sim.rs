//! Seeded Monte Carlo execution: scenario generation, single runs, sweeps,
//! and the SNR calibration procedure.
//!
//! Reproducibility contract: every run draws from a ChaCha stream derived
//! from `(seed, run_index)` via `set_stream`, so results are independent of
//! execution order and parallelism degree, and adding runs never perturbs
//! existing ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{link_quality, ChannelError, LinkQuality};
use crate::config::{ConfigError, DelayScope, ScenarioConfig};
use crate::geometry::{delay_extremes, GeometryError, SatelliteGeometry, UeGeometry};
use crate::metrics::{
    aggregate, capacity, channel_usage, guard_period, MetricsError, MetricsReport,
};
use crate::scheduler::{
    select_mg, select_ms, SelectionError, SelectionMethod, SelectionResult, UeStat,
};
use crate::tdd::{
    build_essa_timeline, build_ta_timeline, verify_no_interference, DuplexPolicy, ScheduleError,
    SlotPattern, SlotTimeline,
};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(
        "run {run_index}: schedule failed interference verification:\n{details}\ntrace: {trace}"
    )]
    Interference {
        run_index: u64,
        details: String,
        trace: String,
    },
    #[error("unknown sweep value '{0}'")]
    BadSweepValue(String),
}

/// The per-run random stream: one root seed, one counter-indexed stream per
/// run.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// One drawn UE population with its channel realizations.
pub type ScenarioDraw = (Vec<UeGeometry<Scalar>>, Vec<LinkQuality<Scalar>>);

/// Draws one scenario: uniform elevations in `[alpha_min, alpha_max]`, then
/// geometry and link quality per UE, in UE-id order.
pub fn generate_scenario(
    config: &ScenarioConfig,
    run_index: u64,
) -> Result<ScenarioDraw, SimError> {
    config.validate()?;
    let mut rng = run_rng(config.seed, run_index);
    let geom = SatelliteGeometry::new(config.altitude_km, config.earth_radius_km)?;
    let profile = config.profile.build()?;

    let mut ues = Vec::with_capacity(config.n_ue);
    for id in 0..config.n_ue {
        let alpha = rng.random_range(config.alpha_min_deg..=config.alpha_max_deg);
        ues.push(UeGeometry::from_elevation(id as u32, alpha, &geom)?);
    }
    let mut links = Vec::with_capacity(config.n_ue);
    for ue in &ues {
        links.push(link_quality(ue, &config.link, &profile, &mut rng)?);
    }
    Ok((ues, links))
}

/// One complete, verified simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub run_index: u64,
    pub config_digest: String,
    pub selection: SelectionResult<Scalar>,
    pub metrics: MetricsReport<Scalar>,
    pub trace_digest: String,
    #[serde(skip)]
    pub trace: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Round-robin transmission assignment over the selected set, shortest delay
/// first. Deterministic, and it guarantees the shortest link carries the
/// first round trip.
pub fn assign_round_robin(
    timeline: &SlotTimeline<Scalar>,
    ues: &[UeGeometry<Scalar>],
    selection: &SelectionResult<Scalar>,
) -> Vec<u32> {
    let mut by_delay: Vec<u32> = selection.selected_ids.clone();
    by_delay.sort_by(|a, b| {
        let ta = ues
            .iter()
            .find(|u| u.ue_id == *a)
            .map(|u| u.one_way_delay_ms);
        let tb = ues
            .iter()
            .find(|u| u.ue_id == *b)
            .map(|u| u.one_way_delay_ms);
        ta.partial_cmp(&tb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });
    (0..timeline.records.len())
        .map(|k| by_delay[k % by_delay.len()])
        .collect()
}

/// Generate, select, build the timeline, verify it, and measure.
pub fn run_single(config: &ScenarioConfig, run_index: u64) -> Result<RunResult, SimError> {
    let (ues, links) = generate_scenario(config, run_index)?;

    let stats: Vec<UeStat<Scalar>> = ues
        .iter()
        .zip(&links)
        .map(|(u, l)| UeStat {
            ue_id: u.ue_id,
            snr_db: l.snr_db,
            delay_ms: u.one_way_delay_ms,
        })
        .collect();
    let selection = match config.scheduler {
        SelectionMethod::Mg => select_mg(&stats, config.n_s)?,
        SelectionMethod::Ms => select_ms(&stats, config.n_s)?,
    };

    let (tau_min, tau_max) = match config.delay_scope {
        DelayScope::Selected => (selection.tau_min_ms, selection.tau_max_ms),
        DelayScope::Cell => delay_extremes(&ues)?,
    };
    let timeline = match config.policy {
        DuplexPolicy::Ta => build_ta_timeline(config.grid, config.pattern, tau_max)?,
        DuplexPolicy::Essa => build_essa_timeline(config.grid, config.pattern, tau_min, tau_max)?,
    };

    let assignment = assign_round_robin(&timeline, &ues, &selection);
    let violations = verify_no_interference(&timeline, &ues, &assignment)?;
    if !violations.is_empty() {
        let details = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("\n");
        return Err(SimError::Interference {
            run_index,
            details,
            trace: timeline.trace_string(),
        });
    }

    let avg_guard_period_ms = guard_period(&timeline)?;
    let (total_pct, dl_pct, ul_pct) = channel_usage(&timeline);
    let selected_links: Vec<LinkQuality<Scalar>> = selection
        .selected_ids
        .iter()
        .map(|&id| links[id as usize])
        .collect();
    let (cap, cap_dl, cap_ul) =
        capacity(&selection, &selected_links, dl_pct / 100.0, ul_pct / 100.0)?;

    let trace = timeline.trace_string();
    Ok(RunResult {
        run_index,
        config_digest: config.digest(),
        selection,
        metrics: MetricsReport {
            avg_guard_period_ms,
            channel_usage_pct: total_pct,
            dl_usage_pct: dl_pct,
            ul_usage_pct: ul_pct,
            avg_capacity_mbps: cap,
            dl_capacity_mbps: cap_dl,
            ul_capacity_mbps: cap_ul,
            n_runs: 1,
            ci95: None,
        },
        trace_digest: sha256_hex(trace.as_bytes()),
        trace,
    })
}

/// Sweep axes supported by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    AlphaMin,
    Altitude,
    Pattern,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::AlphaMin => "alpha_min",
            SweepAxis::Altitude => "altitude",
            SweepAxis::Pattern => "pattern",
        })
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alpha_min" => Ok(SweepAxis::AlphaMin),
            "altitude" => Ok(SweepAxis::Altitude),
            "pattern" => Ok(SweepAxis::Pattern),
            other => Err(format!(
                "unknown sweep axis '{other}' (expected alpha_min|altitude|pattern)"
            )),
        }
    }
}

/// Applies one sweep value to a base config, returning the patched config
/// and the canonical value label used in outputs.
pub fn apply_sweep_value(
    base: &ScenarioConfig,
    axis: SweepAxis,
    value: &str,
) -> Result<(ScenarioConfig, String), SimError> {
    let mut config = base.clone();
    let label = match axis {
        SweepAxis::AlphaMin => {
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| SimError::BadSweepValue(value.to_string()))?;
            config.alpha_min_deg = v;
            format!("{v}")
        }
        SweepAxis::Altitude => {
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| SimError::BadSweepValue(value.to_string()))?;
            config.altitude_km = v;
            format!("{v}")
        }
        SweepAxis::Pattern => {
            let p: SlotPattern = value
                .trim()
                .parse()
                .map_err(|_| SimError::BadSweepValue(value.to_string()))?;
            config.pattern = p;
            p.to_string()
        }
    };
    config.validate()?;
    Ok((config, label))
}

/// One sweep point: the patched scenario, its per-run results in run order,
/// and their aggregate.
#[derive(Debug)]
pub struct SweepPoint {
    pub axis: SweepAxis,
    pub label: String,
    pub config: ScenarioConfig,
    pub runs: Vec<RunResult>,
    pub aggregate: MetricsReport<Scalar>,
}

/// Runs every Monte Carlo repetition of one scenario. Runs execute in
/// parallel; results are ordered by run index before aggregation, so the
/// outcome is independent of the parallelism degree.
pub fn run_point(
    config: &ScenarioConfig,
) -> Result<(Vec<RunResult>, MetricsReport<Scalar>), SimError> {
    config.validate()?;
    let runs: Vec<RunResult> = (0..config.runs as u64)
        .into_par_iter()
        .map(|i| run_single(config, i))
        .collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<MetricsReport<Scalar>> = runs.iter().map(|r| r.metrics).collect();
    let agg = aggregate(&reports)?;
    Ok((runs, agg))
}

/// Runs a sweep: one aggregated point per axis value, deterministic given
/// the seed.
pub fn run_sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[String],
) -> Result<Vec<SweepPoint>, SimError> {
    let mut points = Vec::with_capacity(values.len());
    for value in values {
        let (config, label) = apply_sweep_value(base, axis, value)?;
        let (runs, agg) = run_point(&config)?;
        points.push(SweepPoint {
            axis,
            label,
            config,
            runs,
            aggregate: agg,
        });
    }
    Ok(points)
}

/// Pooled SNR of the scheduled UEs over `runs` repetitions; the calibration
/// target statistic.
pub fn selected_snr_median(config: &ScenarioConfig, runs: u64) -> Result<Scalar, SimError> {
    let mut pool: Vec<Scalar> = Vec::new();
    for run_index in 0..runs {
        let (ues, links) = generate_scenario(config, run_index)?;
        let stats: Vec<UeStat<Scalar>> = ues
            .iter()
            .zip(&links)
            .map(|(u, l)| UeStat {
                ue_id: u.ue_id,
                snr_db: l.snr_db,
                delay_ms: u.one_way_delay_ms,
            })
            .collect();
        let selection = match config.scheduler {
            SelectionMethod::Mg => select_mg(&stats, config.n_s)?,
            SelectionMethod::Ms => select_ms(&stats, config.n_s)?,
        };
        pool.extend(
            selection
                .selected_ids
                .iter()
                .map(|&id| links[id as usize].snr_db),
        );
    }
    pool.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = pool.len();
    Ok(if n % 2 == 1 {
        pool[n / 2]
    } else {
        0.5 * (pool[n / 2 - 1] + pool[n / 2])
    })
}

/// Calibration: bisect `calibration_gain_db` until the pooled selected-SNR
/// median hits `target_db` within `tol_db` over `runs` repetitions. The
/// median is affine in the gain, so this converges quickly.
pub fn calibrate_gain(
    base: &ScenarioConfig,
    target_db: Scalar,
    tol_db: Scalar,
    runs: u64,
) -> Result<Scalar, SimError> {
    let mut lo = -50.0;
    let mut hi = 150.0;
    let median_at = |gain: Scalar| -> Result<Scalar, SimError> {
        let mut config = base.clone();
        config.link.calibration_gain_db = gain;
        selected_snr_median(&config, runs)
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let median = median_at(mid)?;
        if (median - target_db).abs() <= tol_db {
            return Ok(mid);
        }
        if median < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
