//! UE subset selection: best-SNR (MG) and minimum differential delay (MS).

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

use crate::float::SimFloat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("cannot select {requested} UEs out of {available}")]
    BadSubsetSize { requested: usize, available: usize },
}

/// Selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    /// Pick the N_s UEs with the highest SNR (maximizes the minimum SNR).
    Mg,
    /// Pick the N_s UEs with the smallest delay spread.
    Ms,
}

impl std::fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionMethod::Mg => "mg",
            SelectionMethod::Ms => "ms",
        })
    }
}

impl std::str::FromStr for SelectionMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mg" => Ok(SelectionMethod::Mg),
            "ms" => Ok(SelectionMethod::Ms),
            other => Err(format!("unknown scheduler '{other}' (expected mg|ms)")),
        }
    }
}

/// Per-UE inputs to selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeStat<F> {
    pub ue_id: u32,
    pub snr_db: F,
    pub delay_ms: F,
}

/// The scheduled subset with its delay extremes and SNR floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult<F> {
    /// Selected UE ids, ascending.
    pub selected_ids: Vec<u32>,
    pub tau_min_ms: F,
    pub tau_max_ms: F,
    pub delay_spread_ms: F,
    pub min_snr_db: F,
    pub method: SelectionMethod,
}

fn finish<F: SimFloat>(method: SelectionMethod, mut chosen: Vec<UeStat<F>>) -> SelectionResult<F> {
    chosen.sort_by_key(|u| u.ue_id);
    let mut tau_min = chosen[0].delay_ms;
    let mut tau_max = tau_min;
    let mut min_snr = chosen[0].snr_db;
    for u in &chosen[1..] {
        tau_min = tau_min.min(u.delay_ms);
        tau_max = tau_max.max(u.delay_ms);
        min_snr = min_snr.min(u.snr_db);
    }
    SelectionResult {
        selected_ids: chosen.iter().map(|u| u.ue_id).collect(),
        tau_min_ms: tau_min,
        tau_max_ms: tau_max,
        delay_spread_ms: tau_max - tau_min,
        min_snr_db: min_snr,
        method,
    }
}

fn check_size<F>(ues: &[UeStat<F>], n_s: usize) -> Result<(), SelectionError> {
    if n_s == 0 || n_s > ues.len() {
        return Err(SelectionError::BadSubsetSize {
            requested: n_s,
            available: ues.len(),
        });
    }
    Ok(())
}

/// MG: the N_s UEs with the largest SNR. Top-N_s by value maximizes the
/// minimum SNR over all size-N_s subsets; ties break toward the smaller id.
pub fn select_mg<F: SimFloat>(
    ues: &[UeStat<F>],
    n_s: usize,
) -> Result<SelectionResult<F>, SelectionError> {
    check_size(ues, n_s)?;
    let mut order: Vec<&UeStat<F>> = ues.iter().collect();
    order.sort_by(|a, b| {
        b.snr_db
            .partial_cmp(&a.snr_db)
            .unwrap_or(Ordering::Equal)
            .then(a.ue_id.cmp(&b.ue_id))
    });
    Ok(finish(
        SelectionMethod::Mg,
        order[..n_s].iter().map(|u| **u).collect(),
    ))
}

/// MS: the N_s UEs minimizing the delay spread `max tau - min tau`.
///
/// A window contiguous in tau-sorted order is always optimal for this
/// objective, so a linear window scan over the sort suffices. Ties break
/// toward the window with the smallest starting tau, then smallest id.
pub fn select_ms<F: SimFloat>(
    ues: &[UeStat<F>],
    n_s: usize,
) -> Result<SelectionResult<F>, SelectionError> {
    check_size(ues, n_s)?;
    let mut order: Vec<&UeStat<F>> = ues.iter().collect();
    order.sort_by(|a, b| {
        a.delay_ms
            .partial_cmp(&b.delay_ms)
            .unwrap_or(Ordering::Equal)
            .then(a.ue_id.cmp(&b.ue_id))
    });
    let mut best_start = 0;
    let mut best_spread = order[n_s - 1].delay_ms - order[0].delay_ms;
    for start in 1..=(order.len() - n_s) {
        let spread = order[start + n_s - 1].delay_ms - order[start].delay_ms;
        if spread < best_spread {
            best_spread = spread;
            best_start = start;
        }
    }
    Ok(finish(
        SelectionMethod::Ms,
        order[best_start..best_start + n_s]
            .iter()
            .map(|u| **u)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn stat(id: u32, snr: f64, tau: f64) -> UeStat<f64> {
        UeStat {
            ue_id: id,
            snr_db: snr,
            delay_ms: tau,
        }
    }

    /// Exhaustive subset enumeration over bitmasks; independent of the
    /// selection code paths under test.
    fn best_min_snr_exhaustive(ues: &[UeStat<f64>], n_s: usize) -> f64 {
        let n = ues.len();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n_s {
                continue;
            }
            let min_snr = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| ues[i].snr_db)
                .fold(f64::INFINITY, f64::min);
            best = best.max(min_snr);
        }
        best
    }

    fn best_spread_exhaustive(ues: &[UeStat<f64>], n_s: usize) -> f64 {
        let n = ues.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n_s {
                continue;
            }
            let taus: Vec<f64> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| ues[i].delay_ms)
                .collect();
            let spread = taus.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - taus.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            best = best.min(spread);
        }
        best
    }

    #[test]
    fn mg_picks_top_values() {
        let ues = [stat(0, 10.0, 1.0), stat(1, 20.0, 1.1), stat(2, 30.0, 1.2)];
        let r = select_mg(&ues, 2).unwrap();
        assert_eq!(r.selected_ids, vec![1, 2]);
        assert_eq!(r.min_snr_db, 20.0);
        assert_eq!(r.method, SelectionMethod::Mg);
    }

    #[test]
    fn whole_population_when_ns_equals_u() {
        let ues = [stat(0, 10.0, 1.0), stat(1, 20.0, 2.0)];
        let r = select_mg(&ues, 2).unwrap();
        assert_eq!(r.selected_ids, vec![0, 1]);
        assert_eq!(r.tau_min_ms, 1.0);
        assert_eq!(r.tau_max_ms, 2.0);
    }

    #[test]
    fn ms_picks_tightest_window() {
        let ues = [
            stat(0, 0.0, 1.0),
            stat(1, 0.0, 1.1),
            stat(2, 0.0, 1.15),
            stat(3, 0.0, 2.0),
        ];
        let r = select_ms(&ues, 2).unwrap();
        assert_eq!(r.selected_ids, vec![1, 2]);
        assert!((r.delay_spread_ms - 0.05).abs() < 1e-12);
    }

    #[test]
    fn ms_ties_return_lexicographically_first_ids() {
        let ues: Vec<_> = (0..5).map(|i| stat(i, 0.0, 3.0)).collect();
        let r = select_ms(&ues, 3).unwrap();
        assert_eq!(r.selected_ids, vec![0, 1, 2]);
        assert_eq!(r.delay_spread_ms, 0.0);
    }

    #[test]
    fn size_errors() {
        let ues = [stat(0, 1.0, 1.0)];
        assert!(select_mg(&ues, 0).is_err());
        assert!(select_mg(&ues, 2).is_err());
        assert!(select_ms(&ues, 0).is_err());
    }

    #[test]
    fn mg_matches_exhaustive_enumeration() {
        let mut rng = ChaCha12Rng::seed_from_u64(100);
        for _ in 0..200 {
            let n = rng.random_range(5..=12usize);
            let n_s = rng.random_range(1..=n);
            let ues: Vec<_> = (0..n as u32)
                .map(|i| stat(i, rng.random_range(-10.0..40.0), rng.random_range(1.0..3.0)))
                .collect();
            let r = select_mg(&ues, n_s).unwrap();
            assert_eq!(r.min_snr_db, best_min_snr_exhaustive(&ues, n_s));
        }
    }

    #[test]
    fn ms_matches_exhaustive_enumeration_and_is_contiguous() {
        let mut rng = ChaCha12Rng::seed_from_u64(200);
        for _ in 0..200 {
            let n = rng.random_range(5..=12usize);
            let n_s = rng.random_range(1..=n);
            let ues: Vec<_> = (0..n as u32)
                .map(|i| stat(i, rng.random_range(-10.0..40.0), rng.random_range(1.0..3.0)))
                .collect();
            let r = select_ms(&ues, n_s).unwrap();
            assert!((r.delay_spread_ms - best_spread_exhaustive(&ues, n_s)).abs() < 1e-12);

            // window property: no unselected tau strictly inside the window
            // unless it ties a boundary
            for u in &ues {
                if !r.selected_ids.contains(&u.ue_id) {
                    assert!(
                        u.delay_ms <= r.tau_min_ms || u.delay_ms >= r.tau_max_ms,
                        "tau {} inside window [{}, {}]",
                        u.delay_ms,
                        r.tau_min_ms,
                        r.tau_max_ms
                    );
                }
            }
        }
    }

    #[test]
    fn selection_is_shift_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(300);
        for _ in 0..50 {
            let ues: Vec<_> = (0..10u32)
                .map(|i| stat(i, rng.random_range(-10.0..40.0), rng.random_range(1.0..3.0)))
                .collect();
            let shifted: Vec<_> = ues
                .iter()
                .map(|u| stat(u.ue_id, u.snr_db + 17.25, u.delay_ms + 0.75))
                .collect();
            assert_eq!(
                select_mg(&ues, 4).unwrap().selected_ids,
                select_mg(&shifted, 4).unwrap().selected_ids
            );
            assert_eq!(
                select_ms(&ues, 4).unwrap().selected_ids,
                select_ms(&shifted, 4).unwrap().selected_ids
            );
        }
    }

    #[test]
    fn extremes_cover_exactly_the_selected_set() {
        let ues = [
            stat(0, 5.0, 1.0),
            stat(1, 9.0, 2.5),
            stat(2, 7.0, 1.4),
            stat(3, 8.0, 1.5),
        ];
        let r = select_mg(&ues, 2).unwrap();
        assert_eq!(r.selected_ids, vec![1, 3]);
        assert_eq!(r.tau_min_ms, 1.5);
        assert_eq!(r.tau_max_ms, 2.5);
        assert_eq!(r.min_snr_db, 8.0);
    }
}
