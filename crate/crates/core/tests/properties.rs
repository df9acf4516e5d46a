//! Cross-module invariants: scheduler statistics under shadowing, paired
//! ESSA-vs-TA dominance, and randomized timeline soundness.

use ntn_tdd_sim::config::ScenarioConfig;
use ntn_tdd_sim::geometry::{propagation_delay, slant_range, SatelliteGeometry, UeGeometry};
use ntn_tdd_sim::metrics::{channel_usage, guard_period};
use ntn_tdd_sim::scheduler::{select_mg, select_ms, UeStat};
use ntn_tdd_sim::sim::generate_scenario;
use ntn_tdd_sim::tdd::{
    build_essa_timeline, build_ta_timeline, verify_no_interference, SlotGrid, SlotPattern,
};

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[test]
fn scheduler_statistical_ordering_under_shadowing() {
    // 1000 Monte Carlo draws with the shadowed urban profile: MG should win
    // on the SNR floor, MS on the delay spread, in the median
    let cfg = ScenarioConfig {
        runs: 1,
        ..ScenarioConfig::default()
    };

    let mut mg_floor = Vec::new();
    let mut ms_floor = Vec::new();
    let mut mg_spread = Vec::new();
    let mut ms_spread = Vec::new();
    for run in 0..1000u64 {
        let (ues, links) = generate_scenario(&cfg, run).unwrap();
        let stats: Vec<UeStat<f64>> = ues
            .iter()
            .zip(&links)
            .map(|(u, l)| UeStat {
                ue_id: u.ue_id,
                snr_db: l.snr_db,
                delay_ms: u.one_way_delay_ms,
            })
            .collect();
        let mg = select_mg(&stats, cfg.n_s).unwrap();
        let ms = select_ms(&stats, cfg.n_s).unwrap();
        mg_floor.push(mg.min_snr_db);
        ms_floor.push(ms.min_snr_db);
        mg_spread.push(mg.delay_spread_ms);
        ms_spread.push(ms.delay_spread_ms);
    }
    let mg_floor = median(&mut mg_floor);
    let ms_floor = median(&mut ms_floor);
    let mg_spread = median(&mut mg_spread);
    let ms_spread = median(&mut ms_spread);
    assert!(
        mg_floor >= ms_floor,
        "median SNR floor: mg {mg_floor} < ms {ms_floor}"
    );
    assert!(
        ms_spread <= mg_spread,
        "median spread: ms {ms_spread} > mg {mg_spread}"
    );
}

#[test]
fn essa_dominates_ta_on_every_draw() {
    // paired comparison over 1000 random scenario draws: ESSA never uses the
    // channel less, and never widens the mean idle gap
    let mut rng = ChaCha12Rng::seed_from_u64(55);
    let grid = SlotGrid {
        slot_duration_ms: 0.125,
        horizon_slots: 4096,
        ul_slots_per_tx: 1,
    };
    for trial in 0..1000 {
        let h = rng.random_range(300.0..=800.0);
        let alpha_min = rng.random_range(40.0..=80.0);
        let alpha_hi = rng.random_range(alpha_min..=90.0);
        let geom = SatelliteGeometry::with_altitude(h).unwrap();
        let tau_max = propagation_delay(slant_range(alpha_min, &geom).unwrap()).unwrap();
        let tau_min = propagation_delay(slant_range(alpha_hi, &geom).unwrap()).unwrap();
        let x = *[1usize, 2, 4, 6].get(rng.random_range(0..4usize)).unwrap();
        let pattern = SlotPattern::new(x).unwrap();

        let ta = build_ta_timeline(grid, pattern, tau_max).unwrap();
        let essa = build_essa_timeline(grid, pattern, tau_min, tau_max).unwrap();
        let (u_ta, ..) = channel_usage(&ta);
        let (u_essa, ..) = channel_usage(&essa);
        assert!(
            u_essa >= u_ta - 1e-9,
            "trial {trial}: usage essa {u_essa} < ta {u_ta} (h {h}, a {alpha_min}, x {x})"
        );
        let g_ta = guard_period(&ta).unwrap();
        let g_essa = guard_period(&essa).unwrap();
        assert!(
            g_essa <= g_ta + 1e-9,
            "trial {trial}: guard essa {g_essa} > ta {g_ta} (h {h}, a {alpha_min}, x {x})"
        );
        assert!(essa.allocated_slots() >= ta.allocated_slots());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Quantization soundness: timelines built from arbitrary continuous
    /// delays stay clean under the continuous-time verifier, with UEs at the
    /// extremes and in between.
    #[test]
    fn randomized_timelines_verify_clean(
        h in 300.0f64..800.0,
        alpha_min in 40.0f64..80.0,
        mid in 0.0f64..1.0,
        x in 1usize..6,
    ) {
        let geom = SatelliteGeometry::with_altitude(h).unwrap();
        let ue = |id: u32, alpha: f64| UeGeometry::from_elevation(id, alpha, &geom).unwrap();
        let ues = [
            ue(0, 90.0),
            ue(1, alpha_min),
            ue(2, alpha_min + mid * (90.0 - alpha_min)),
        ];
        let tau_min = ues[0].one_way_delay_ms;
        let tau_max = ues[1].one_way_delay_ms;
        let grid = SlotGrid { slot_duration_ms: 0.125, horizon_slots: 1024, ul_slots_per_tx: 1 };
        let pattern = SlotPattern::new(x).unwrap();

        for timeline in [
            build_ta_timeline(grid, pattern, tau_max).unwrap(),
            build_essa_timeline(grid, pattern, tau_min, tau_max).unwrap(),
        ] {
            let assignment: Vec<u32> =
                (0..timeline.records.len()).map(|k| (k % 3) as u32).collect();
            let violations = verify_no_interference(&timeline, &ues, &assignment).unwrap();
            prop_assert!(violations.is_empty(), "{:?}", violations.first());
        }
    }

    /// Identical inputs always rebuild identical timelines.
    #[test]
    fn timeline_construction_is_pure(
        tau_min in 1.0f64..2.5,
        spread in 0.0f64..1.0,
        x in 1usize..6,
    ) {
        let grid = SlotGrid { slot_duration_ms: 0.125, horizon_slots: 2048, ul_slots_per_tx: 1 };
        let pattern = SlotPattern::new(x).unwrap();
        let tau_max = tau_min + spread;
        let a = build_essa_timeline(grid, pattern, tau_min, tau_max).unwrap();
        let b = build_essa_timeline(grid, pattern, tau_min, tau_max).unwrap();
        prop_assert_eq!(a, b);
    }
}
