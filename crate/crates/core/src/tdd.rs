//! TDD slot timelines at the satellite reference point.
//!
//! Two allocation policies share one timeline representation:
//!
//! * **TA** — the benchmark frame structure: a DL block, an idle guard of
//!   `ceil(2*tau_max / slot)` slots so every timing-advanced UL arrives after
//!   the farthest UE finished receiving, one UL slot, then the next DL.
//! * **ESSA** — packs additional DL blocks into the guard period. The
//!   spacing threshold is `T_th = 2*(tau_max - tau_min) + t_UL`; on the slot
//!   grid the next DL block starts `G - floor((2*tau_min - t_UL) / slot)`
//!   slots after the previous block ends, which is `ceil(T_th / slot)` plus
//!   at most one slot absorbing the UL alignment (the reserved UL slot sits
//!   up to one slot after the continuous `2*tau_max` instant, and the
//!   shortest link's UL transmission must still clear the next DL arrival).
//!   A candidate that would stamp on a reserved UL slot shifts past it.
//!   Feasible whenever `2*tau_min >= t_UL`.
//!
//! [`verify_no_interference`] is an independent physical-time oracle: it
//! replays a timeline in continuous time at the satellite and at every
//! assigned UE and reports any half-duplex overlap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::{from_f64, positive, to_f64, SimFloat};
use crate::geometry::UeGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("invalid slot grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid slot pattern: {0}")]
    InvalidPattern(&'static str),
    #[error("tau_i {tau_i} ms exceeds tau_max {tau_max} ms")]
    DelayOrder { tau_i: f64, tau_max: f64 },
    #[error("delay must be non-negative and finite, got {0} ms")]
    BadDelay(f64),
    #[error("t_UL must be positive, got {0} ms")]
    NonPositiveUlDuration(f64),
    #[error(
        "ESSA infeasible: 2*tau_min = {two_tau_min} ms < t_UL = {t_ul} ms; fall back to the TA policy"
    )]
    EssaInfeasible { two_tau_min: f64, t_ul: f64 },
    #[error("transmission {0} has no assigned UE")]
    UnassignedTransmission(u32),
    #[error("assignment references unknown UE id {0}")]
    UnknownUe(u32),
}

/// Slot allocation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplexPolicy {
    Ta,
    Essa,
}

impl std::fmt::Display for DuplexPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DuplexPolicy::Ta => "ta",
            DuplexPolicy::Essa => "essa",
        })
    }
}

impl std::str::FromStr for DuplexPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ta" => Ok(DuplexPolicy::Ta),
            "essa" => Ok(DuplexPolicy::Essa),
            other => Err(format!("unknown policy '{other}' (expected ta|essa)")),
        }
    }
}

/// The discrete slot grid at the satellite reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotGrid<F> {
    /// Slot duration in ms (0.125 ms = 5G NR numerology 3 by default).
    pub slot_duration_ms: F,
    /// Number of slots simulated.
    pub horizon_slots: usize,
    /// UL slots consumed per transmission; t_UL = this count times the slot
    /// duration, an integer multiple by construction.
    pub ul_slots_per_tx: usize,
}

impl<F: SimFloat> SlotGrid<F> {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        if !positive(self.slot_duration_ms) {
            return Err(ScheduleError::InvalidGrid("slot duration must be positive"));
        }
        if self.horizon_slots == 0 {
            return Err(ScheduleError::InvalidGrid(
                "horizon must be at least one slot",
            ));
        }
        if self.ul_slots_per_tx == 0 {
            return Err(ScheduleError::InvalidGrid(
                "UL transmissions need at least one slot",
            ));
        }
        Ok(())
    }

    /// UL transmission duration t_UL in ms.
    pub fn ul_duration_ms(&self) -> F {
        self.slot_duration_ms * from_f64(self.ul_slots_per_tx as f64)
    }
}

/// XDSU slot pattern: X consecutive DL slots per transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotPattern {
    pub dl_slots_per_tx: usize,
}

impl SlotPattern {
    pub fn new(dl_slots_per_tx: usize) -> Result<Self, ScheduleError> {
        if dl_slots_per_tx == 0 {
            return Err(ScheduleError::InvalidPattern(
                "X in XDSU must be at least 1",
            ));
        }
        Ok(Self { dl_slots_per_tx })
    }
}

impl std::fmt::Display for SlotPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.dl_slots_per_tx == 1 {
            f.write_str("dsu")
        } else {
            write!(f, "{}dsu", self.dl_slots_per_tx)
        }
    }
}

impl std::str::FromStr for SlotPattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let body = lower
            .strip_suffix("dsu")
            .ok_or_else(|| format!("unknown pattern '{s}'"))?;
        let x = if body.is_empty() {
            1
        } else {
            body.parse::<usize>()
                .map_err(|_| format!("unknown pattern '{s}'"))?
        };
        SlotPattern::new(x).map_err(|e| e.to_string())
    }
}

/// Per-slot state; the payload is the transmission index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotState {
    Idle,
    Dl(u32),
    Ul(u32),
}

/// One DL-block/UL-slot round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionRecord {
    pub tx_index: u32,
    pub dl_start_slot: usize,
    pub dl_len_slots: usize,
    /// First slot of the UL block, `dl_start + dl_len + guard_slots`.
    pub ul_slot: usize,
    pub guard_slots: usize,
}

/// The satellite-reference-point slot timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotTimeline<F> {
    pub grid: SlotGrid<F>,
    pub slots: Vec<SlotState>,
    pub records: Vec<TransmissionRecord>,
    pub tau_min_ms: F,
    pub tau_max_ms: F,
    pub policy: DuplexPolicy,
    /// Set when the horizon was too small for even one complete round trip.
    pub undersized_horizon: bool,
}

impl<F: SimFloat> SlotTimeline<F> {
    /// Compact textual trace: one character per slot, 'D'/'U'/'.'.
    pub fn trace_string(&self) -> String {
        self.slots
            .iter()
            .map(|s| match s {
                SlotState::Idle => '.',
                SlotState::Dl(_) => 'D',
                SlotState::Ul(_) => 'U',
            })
            .collect()
    }

    /// Start slots of the UL blocks, in order.
    pub fn ul_slot_starts(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.ul_slot).collect()
    }

    /// Count of allocated (DL or UL) slots over the whole horizon.
    pub fn allocated_slots(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| !matches!(s, SlotState::Idle))
            .count()
    }
}

/// Timing advance for a UE: `T_i = 2*(tau_max - tau_i)`, never negative.
pub fn timing_advance<F: SimFloat>(tau_i_ms: F, tau_max_ms: F) -> Result<F, ScheduleError> {
    if tau_i_ms > tau_max_ms {
        return Err(ScheduleError::DelayOrder {
            tau_i: to_f64(tau_i_ms),
            tau_max: to_f64(tau_max_ms),
        });
    }
    Ok(from_f64::<F>(2.0) * (tau_max_ms - tau_i_ms))
}

/// ESSA spacing threshold: `T_th = 2*(tau_max - tau_min) + t_UL`.
pub fn essa_threshold<F: SimFloat>(
    tau_max_ms: F,
    tau_min_ms: F,
    t_ul_ms: F,
) -> Result<F, ScheduleError> {
    if tau_min_ms > tau_max_ms {
        return Err(ScheduleError::DelayOrder {
            tau_i: to_f64(tau_min_ms),
            tau_max: to_f64(tau_max_ms),
        });
    }
    if !positive(t_ul_ms) {
        return Err(ScheduleError::NonPositiveUlDuration(to_f64(t_ul_ms)));
    }
    Ok(from_f64::<F>(2.0) * (tau_max_ms - tau_min_ms) + t_ul_ms)
}

/// ESSA feasibility: additional DL slots fit iff `2*tau_min >= t_UL`.
pub fn essa_feasible<F: SimFloat>(tau_min_ms: F, t_ul_ms: F) -> bool {
    from_f64::<F>(2.0) * tau_min_ms >= t_ul_ms
}

/// Guard length in slots: `ceil(2*tau_max / slot)`. Ceiling is the
/// conservative direction; the continuous-time verifier depends on it.
fn guard_slots<F: SimFloat>(tau_max_ms: F, slot_ms: F) -> usize {
    let ratio = from_f64::<F>(2.0) * tau_max_ms / slot_ms;
    ratio
        .ceil()
        .to_usize()
        .expect("guard slot count out of range")
}

fn mark<F: SimFloat>(timeline: &mut SlotTimeline<F>, rec: TransmissionRecord) {
    for s in rec.dl_start_slot..rec.dl_start_slot + rec.dl_len_slots {
        timeline.slots[s] = SlotState::Dl(rec.tx_index);
    }
    for s in rec.ul_slot..rec.ul_slot + timeline.grid.ul_slots_per_tx {
        debug_assert_eq!(timeline.slots[s], SlotState::Idle);
        timeline.slots[s] = SlotState::Ul(rec.tx_index);
    }
    timeline.records.push(rec);
}

/// Benchmark TA timeline: `[X DL][G idle][UL]` repeating to the horizon, the
/// next DL block immediately after each UL. The guard depends only on the
/// largest delay, so `tau_min` is recorded equal to `tau_max`.
pub fn build_ta_timeline<F: SimFloat>(
    grid: SlotGrid<F>,
    pattern: SlotPattern,
    tau_max_ms: F,
) -> Result<SlotTimeline<F>, ScheduleError> {
    grid.validate()?;
    if tau_max_ms < F::zero() || !tau_max_ms.is_finite() {
        return Err(ScheduleError::BadDelay(to_f64(tau_max_ms)));
    }
    let g = guard_slots(tau_max_ms, grid.slot_duration_ms);
    let x = pattern.dl_slots_per_tx;
    let u = grid.ul_slots_per_tx;
    let period = x + g + u;

    let mut timeline = SlotTimeline {
        grid,
        slots: vec![SlotState::Idle; grid.horizon_slots],
        records: Vec::new(),
        tau_min_ms: tau_max_ms,
        tau_max_ms,
        policy: DuplexPolicy::Ta,
        undersized_horizon: false,
    };
    let mut start = 0usize;
    let mut tx = 0u32;
    while start + period <= grid.horizon_slots {
        mark(
            &mut timeline,
            TransmissionRecord {
                tx_index: tx,
                dl_start_slot: start,
                dl_len_slots: x,
                ul_slot: start + x + g,
                guard_slots: g,
            },
        );
        start += period;
        tx += 1;
    }
    timeline.undersized_horizon = timeline.records.is_empty();
    Ok(timeline)
}

/// ESSA timeline: greedy earliest-feasible DL packing.
///
/// Each DL block reserves its UL at `dl_end + G` (same guard as TA). The
/// next DL block may start once every scheduled UE has finished its
/// slot-aligned UL transmission: `G - floor((2*tau_min - t_UL) / slot)`
/// slots after the previous block ends. A candidate that would stamp on a
/// reserved UL slot shifts to the slot immediately after that UL block.
/// Only complete round trips (UL within the horizon) are placed.
pub fn build_essa_timeline<F: SimFloat>(
    grid: SlotGrid<F>,
    pattern: SlotPattern,
    tau_min_ms: F,
    tau_max_ms: F,
) -> Result<SlotTimeline<F>, ScheduleError> {
    grid.validate()?;
    let t_ul = grid.ul_duration_ms();
    if !essa_feasible(tau_min_ms, t_ul) {
        return Err(ScheduleError::EssaInfeasible {
            two_tau_min: to_f64(from_f64::<F>(2.0) * tau_min_ms),
            t_ul: to_f64(t_ul),
        });
    }
    // validates the delay ordering; the continuous threshold itself is
    // implicit in the quantized gap below
    essa_threshold(tau_max_ms, tau_min_ms, t_ul)?;
    let g = guard_slots(tau_max_ms, grid.slot_duration_ms);
    // slots of UL headroom the shortest link gives back: its UL transmission
    // ends (2*tau_min - t_UL) before its own reception of a DL sent at the
    // same reference instant
    let headroom = ((from_f64::<F>(2.0) * tau_min_ms - t_ul) / grid.slot_duration_ms)
        .floor()
        .to_i64()
        .expect("UL headroom out of range");
    let gap = (g as i64 - headroom).max(1) as usize;
    let x = pattern.dl_slots_per_tx;
    let u = grid.ul_slots_per_tx;

    let mut timeline = SlotTimeline {
        grid,
        slots: vec![SlotState::Idle; grid.horizon_slots],
        records: Vec::new(),
        tau_min_ms,
        tau_max_ms,
        policy: DuplexPolicy::Essa,
        undersized_horizon: false,
    };

    let mut cand = 0usize;
    let mut tx = 0u32;
    'place: loop {
        // settle on a start slot >= cand whose DL span and UL reservation are free
        let start = loop {
            if cand + x + g + u > grid.horizon_slots {
                break 'place;
            }
            let blocking_ul = (cand..cand + x).find_map(|s| match timeline.slots[s] {
                SlotState::Ul(r) => Some(r),
                _ => None,
            });
            if let Some(r) = blocking_ul {
                cand = timeline.records[r as usize].ul_slot + u;
                continue;
            }
            let ul_start = cand + x + g;
            if (ul_start..ul_start + u).any(|s| timeline.slots[s] != SlotState::Idle) {
                cand += 1;
                continue;
            }
            break cand;
        };
        mark(
            &mut timeline,
            TransmissionRecord {
                tx_index: tx,
                dl_start_slot: start,
                dl_len_slots: x,
                ul_slot: start + x + g,
                guard_slots: g,
            },
        );
        tx += 1;
        cand = start + x + gap;
    }
    timeline.undersized_horizon = timeline.records.is_empty();
    Ok(timeline)
}

/// What the physical-time oracle found.
#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    /// The satellite would transmit a DL while a UL arrives.
    SatelliteDlUlOverlap { dl_record: u32, ul_record: u32 },
    /// A UE would receive a DL while transmitting its own UL.
    UeHalfDuplex {
        ue_id: u32,
        dl_record: u32,
        ul_record: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<F> {
    pub kind: ViolationKind,
    /// Overlap window in ms (satellite clock for satellite-side violations,
    /// UE-local time otherwise).
    pub overlap_start_ms: F,
    pub overlap_end_ms: F,
}

impl<F: SimFloat> std::fmt::Display for Violation<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ViolationKind::SatelliteDlUlOverlap {
                dl_record,
                ul_record,
            } => write!(
                f,
                "satellite half-duplex: DL {} overlaps UL {} during [{}, {}) ms",
                dl_record, ul_record, self.overlap_start_ms, self.overlap_end_ms
            ),
            ViolationKind::UeHalfDuplex {
                ue_id,
                dl_record,
                ul_record,
            } => write!(
                f,
                "UE {} half-duplex: receiving DL {} while transmitting UL {} during [{}, {}) ms",
                ue_id, dl_record, ul_record, self.overlap_start_ms, self.overlap_end_ms
            ),
        }
    }
}

fn overlap<F: SimFloat>(a: (F, F), b: (F, F)) -> Option<(F, F)> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// Reports every overlapping pair between two interval lists sorted by start.
fn scan_overlaps<F: SimFloat>(
    a: &[(F, F)],
    b: &[(F, F)],
    mut on_hit: impl FnMut(usize, usize, (F, F)),
) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    let max_b_len = b.iter().map(|(s, e)| *e - *s).fold(F::zero(), F::max);
    for (i, ia) in a.iter().enumerate() {
        let cutoff = ia.0 - max_b_len;
        let mut k = b.partition_point(|(s, _)| *s <= cutoff);
        while k < b.len() && b[k].0 < ia.1 {
            if let Some(w) = overlap(*ia, b[k]) {
                on_hit(i, k, w);
            }
            k += 1;
        }
    }
}

/// Brute-force physical-time interference oracle.
///
/// Works in continuous time, independent of the slot quantization used to
/// build the timeline. For every transmission record the satellite transmits
/// the DL block and receives the UL exactly in its slots; the assigned UE
/// transmits its UL `tau_i` early so it arrives in the UL slot, and receives
/// every DL `tau_i` late. Reported violations:
///
/// * satellite-side: any DL transmit interval overlapping any UL arrival;
/// * UE-side: any DL reception at a UE overlapping one of that UE's own UL
///   transmit intervals.
///
/// An empty list means the schedule is interference-free.
pub fn verify_no_interference<F: SimFloat>(
    timeline: &SlotTimeline<F>,
    ues: &[UeGeometry<F>],
    assignment: &[u32],
) -> Result<Vec<Violation<F>>, ScheduleError> {
    if assignment.len() != timeline.records.len() {
        let missing = assignment.len().min(timeline.records.len()) as u32;
        return Err(ScheduleError::UnassignedTransmission(missing));
    }
    let slot = timeline.grid.slot_duration_ms;
    let t_ul = timeline.grid.ul_duration_ms();
    let at = |s: usize| from_f64::<F>(s as f64) * slot;

    let dl_intervals: Vec<(F, F)> = timeline
        .records
        .iter()
        .map(|r| (at(r.dl_start_slot), at(r.dl_start_slot + r.dl_len_slots)))
        .collect();
    let ul_intervals: Vec<(F, F)> = timeline
        .records
        .iter()
        .map(|r| (at(r.ul_slot), at(r.ul_slot) + t_ul))
        .collect();

    let mut violations = Vec::new();

    // satellite half-duplex: DL transmissions vs UL arrivals
    scan_overlaps(&dl_intervals, &ul_intervals, |i, k, (lo, hi)| {
        violations.push(Violation {
            kind: ViolationKind::SatelliteDlUlOverlap {
                dl_record: i as u32,
                ul_record: k as u32,
            },
            overlap_start_ms: lo,
            overlap_end_ms: hi,
        });
    });

    // UE half-duplex: per assigned UE, every DL reception vs the UE's own UL
    // transmissions, both in UE-local time
    let mut assigned: Vec<u32> = assignment.to_vec();
    assigned.sort_unstable();
    assigned.dedup();
    for ue_id in assigned {
        let ue = ues
            .iter()
            .find(|u| u.ue_id == ue_id)
            .ok_or(ScheduleError::UnknownUe(ue_id))?;
        let tau = ue.one_way_delay_ms;
        let rx_intervals: Vec<(F, F)> = dl_intervals
            .iter()
            .map(|(s, e)| (*s + tau, *e + tau))
            .collect();
        let own_records: Vec<usize> = (0..timeline.records.len())
            .filter(|q| assignment[*q] == ue_id)
            .collect();
        let tx_intervals: Vec<(F, F)> = own_records
            .iter()
            .map(|&q| {
                let start = at(timeline.records[q].ul_slot) - tau;
                (start, start + t_ul)
            })
            .collect();
        scan_overlaps(&rx_intervals, &tx_intervals, |i, k, (lo, hi)| {
            violations.push(Violation {
                kind: ViolationKind::UeHalfDuplex {
                    ue_id,
                    dl_record: i as u32,
                    ul_record: own_records[k] as u32,
                },
                overlap_start_ms: lo,
                overlap_end_ms: hi,
            });
        });
    }

    Ok(violations)
}
