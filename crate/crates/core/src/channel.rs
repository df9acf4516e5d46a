//! Link budget and Ergodic capacity for the satellite channel.
//!
//! Path loss is free-space loss plus atmospheric absorption, scintillation,
//! and a log-normal shadowing draw; the loss terms and the shadowing standard
//! deviation come from elevation-bucketed tables loaded from configuration.

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::{from_f64, positive, to_f64, SimFloat};
use crate::geometry::UeGeometry;

/// Boltzmann constant in J/K.
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("frequency must be positive, got {0} GHz")]
    NonPositiveFrequency(f64),
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("invalid link budget: {0}")]
    InvalidLinkBudget(&'static str),
    #[error("invalid elevation table: {0}")]
    InvalidTable(&'static str),
}

/// Transmit-side and noise parameters of the link budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "F: serde::Deserialize<'de> + Default"))]
pub struct LinkBudgetParams<F> {
    /// Transmit power in dBW.
    pub tx_power_dbw: F,
    /// Combined transmit + receive antenna gain in dBi.
    pub total_antenna_gain_dbi: F,
    /// Carrier frequency in GHz.
    pub carrier_freq_ghz: F,
    /// Bandwidth in MHz.
    pub bandwidth_mhz: F,
    /// Antenna noise temperature in K.
    pub noise_temperature_k: F,
    /// Receiver noise figure in dB.
    pub noise_figure_db: F,
    /// Extra gain offset in dB applied on top of the antenna gains,
    /// normally zero; set by the calibration procedure.
    #[serde(default)]
    pub calibration_gain_db: F,
}

impl<F: SimFloat> LinkBudgetParams<F> {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !positive(self.bandwidth_mhz) {
            return Err(ChannelError::InvalidLinkBudget(
                "bandwidth must be positive",
            ));
        }
        if !positive(self.noise_temperature_k) {
            return Err(ChannelError::InvalidLinkBudget(
                "noise temperature must be positive",
            ));
        }
        if !positive(self.carrier_freq_ghz) {
            return Err(ChannelError::InvalidLinkBudget(
                "carrier frequency must be positive",
            ));
        }
        Ok(())
    }

    /// Noise floor `10 log10(k T B)` in dBW, with B in Hz.
    pub fn noise_floor_dbw(&self) -> F {
        let b_hz = self.bandwidth_mhz * from_f64(1e6);
        let ktb = from_f64::<F>(BOLTZMANN_J_PER_K) * self.noise_temperature_k * b_hz;
        from_f64::<F>(10.0) * ktb.log10()
    }
}

/// Loss (or std-dev) in dB as a function of elevation, as a bucketed table.
///
/// Lookup snaps to the nearest reference elevation, midpoints rounding up,
/// matching the 10-degree reference tables this is usually loaded from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElevationTable<F> {
    angles_deg: Vec<F>,
    values_db: Vec<F>,
}

impl<F: SimFloat> ElevationTable<F> {
    pub fn new(angles_deg: Vec<F>, values_db: Vec<F>) -> Result<Self, ChannelError> {
        if angles_deg.is_empty() {
            return Err(ChannelError::InvalidTable(
                "table must have at least one bucket",
            ));
        }
        if angles_deg.len() != values_db.len() {
            return Err(ChannelError::InvalidTable("angle and value counts differ"));
        }
        if !angles_deg.windows(2).all(|w| w[0] < w[1]) {
            return Err(ChannelError::InvalidTable(
                "angles must be strictly ascending",
            ));
        }
        if !values_db.iter().all(|v| v.is_finite() && *v >= F::zero()) {
            return Err(ChannelError::InvalidTable(
                "values must be finite and non-negative",
            ));
        }
        Ok(Self {
            angles_deg,
            values_db,
        })
    }

    /// Flat table: the same value at every elevation.
    pub fn flat(value_db: F) -> Self {
        Self {
            angles_deg: vec![from_f64(90.0)],
            values_db: vec![value_db],
        }
    }

    pub fn lookup(&self, elevation_deg: F) -> F {
        let mut best = 0;
        for i in 1..self.angles_deg.len() {
            let d_best = (self.angles_deg[best] - elevation_deg).abs();
            let d_i = (self.angles_deg[i] - elevation_deg).abs();
            if d_i <= d_best {
                best = i;
            }
        }
        self.values_db[best]
    }
}

/// Elevation-dependent channel terms: atmospheric absorption, scintillation,
/// and shadowing standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile<F> {
    pub atmospheric: ElevationTable<F>,
    pub scintillation: ElevationTable<F>,
    pub shadowing_sigma: ElevationTable<F>,
}

impl<F: SimFloat> ChannelProfile<F> {
    /// All-zero profile for analytic tests: no extra losses, no shadowing.
    pub fn zero_loss() -> Self {
        Self {
            atmospheric: ElevationTable::flat(F::zero()),
            scintillation: ElevationTable::flat(F::zero()),
            shadowing_sigma: ElevationTable::flat(F::zero()),
        }
    }

    /// Ka-band urban defaults, bucketed every 10 degrees from 10 to 90.
    ///
    /// Gaseous absorption scales a ~0.5 dB zenith value by 1/sin(elevation);
    /// scintillation and the shadowing sigma follow the usual urban LOS
    /// reference rows for ~30 GHz carriers.
    pub fn ka_urban() -> Self {
        let deg = |v: f64| from_f64::<F>(v);
        let angles: Vec<F> = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0]
            .iter()
            .map(|&a| deg(a))
            .collect();
        let table = |vals: [f64; 9]| {
            ElevationTable::new(angles.clone(), vals.iter().map(|&v| deg(v)).collect())
                .expect("built-in table is valid")
        };
        Self {
            atmospheric: table([2.88, 1.46, 1.00, 0.78, 0.65, 0.58, 0.53, 0.51, 0.50]),
            scintillation: table([1.08, 0.55, 0.38, 0.30, 0.26, 0.23, 0.21, 0.20, 0.20]),
            shadowing_sigma: table([2.9, 2.4, 2.7, 2.4, 2.4, 2.7, 2.6, 2.8, 0.6]),
        }
    }
}

/// Per-UE link quality after one channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkQuality<F> {
    pub path_loss_db: F,
    pub shadowing_db: F,
    pub rx_power_dbw: F,
    pub snr_db: F,
    pub ergodic_capacity_mbps: F,
}

/// Free-space path loss in dB: `92.45 + 20 log10(f_GHz) + 20 log10(d_km)`.
pub fn fspl<F: SimFloat>(freq_ghz: F, distance_km: F) -> Result<F, ChannelError> {
    if !positive(freq_ghz) {
        return Err(ChannelError::NonPositiveFrequency(to_f64(freq_ghz)));
    }
    if !positive(distance_km) {
        return Err(ChannelError::NonPositiveDistance(to_f64(distance_km)));
    }
    let twenty = from_f64::<F>(20.0);
    Ok(from_f64::<F>(92.45) + twenty * freq_ghz.log10() + twenty * distance_km.log10())
}

/// One shadowing draw in dB: zero-mean Gaussian with the given sigma.
/// Deterministic given the stream state; sigma = 0 always yields 0.
pub fn sample_shadowing<F, R>(sigma_db: F, rng: &mut R) -> F
where
    F: SimFloat,
    R: Rng + ?Sized,
    StandardNormal: Distribution<F>,
{
    let z: F = rng.sample(StandardNormal);
    sigma_db * z
}

/// Total path loss in dB: FSPL plus atmospheric, scintillation, and shadowing.
pub fn path_loss<F: SimFloat>(
    fspl_db: F,
    atmospheric_db: F,
    scintillation_db: F,
    shadowing_db: F,
) -> F {
    fspl_db + atmospheric_db + scintillation_db + shadowing_db
}

/// Shannon Ergodic capacity in Mbps: `B log2(1 + 10^(snr/10))` with B in Hz.
pub fn ergodic_capacity_mbps<F: SimFloat>(snr_db: F, bandwidth_mhz: F) -> F {
    let ten = from_f64::<F>(10.0);
    let b_hz = bandwidth_mhz * from_f64(1e6);
    let snr_lin = ten.powf(snr_db / ten);
    b_hz * (F::one() + snr_lin).log2() / from_f64(1e6)
}

/// Full per-UE link budget chain: FSPL -> shadowing -> path loss -> received
/// power -> SNR -> Ergodic capacity.
pub fn link_quality<F, R>(
    ue: &UeGeometry<F>,
    params: &LinkBudgetParams<F>,
    profile: &ChannelProfile<F>,
    rng: &mut R,
) -> Result<LinkQuality<F>, ChannelError>
where
    F: SimFloat,
    R: Rng + ?Sized,
    StandardNormal: Distribution<F>,
{
    params.validate()?;
    let fspl_db = fspl(params.carrier_freq_ghz, ue.slant_range_km)?;
    let atmospheric_db = profile.atmospheric.lookup(ue.elevation_deg);
    let scintillation_db = profile.scintillation.lookup(ue.elevation_deg);
    let sigma_db = profile.shadowing_sigma.lookup(ue.elevation_deg);
    let shadowing_db = sample_shadowing(sigma_db, rng);
    let path_loss_db = path_loss(fspl_db, atmospheric_db, scintillation_db, shadowing_db);
    let rx_power_dbw =
        params.tx_power_dbw + params.total_antenna_gain_dbi + params.calibration_gain_db
            - path_loss_db;
    let snr_db = rx_power_dbw - params.noise_floor_dbw() - params.noise_figure_db;
    let ergodic_capacity_mbps = ergodic_capacity_mbps(snr_db, params.bandwidth_mhz);
    Ok(LinkQuality {
        path_loss_db,
        shadowing_db,
        rx_power_dbw,
        snr_db,
        ergodic_capacity_mbps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn table1_params() -> LinkBudgetParams<f64> {
        LinkBudgetParams {
            tx_power_dbw: -6.0,
            total_antenna_gain_dbi: 24.0,
            carrier_freq_ghz: 28.0,
            bandwidth_mhz: 200.0,
            noise_temperature_k: 290.0,
            noise_figure_db: 5.0,
            calibration_gain_db: 0.0,
        }
    }

    #[test]
    fn fspl_examples() {
        assert_eq!(fspl(1.0f64, 1.0).unwrap(), 92.45);
        // frozen from a 40-digit evaluation of the closed form
        assert!((fspl(28.0f64, 845.0).unwrap() - 179.9302948058).abs() < 1e-9);
        assert!((fspl(28.0f64, 600.0).unwrap() - 176.9561856345).abs() < 1e-9);
        assert!(fspl(0.0f64, 1.0).is_err());
        assert!(fspl(1.0f64, -3.0).is_err());
    }

    #[test]
    fn path_loss_sums_terms() {
        assert_eq!(path_loss(100.0f64, 0.0, 0.0, 0.0), 100.0);
        assert_eq!(path_loss(179.93f64, 1.0, 0.5, 0.0), 181.43);
        assert!((path_loss(176.96f64, 0.5, 0.3, -1.2) - 176.56).abs() < 1e-12);
    }

    #[test]
    fn shadowing_zero_sigma_is_identically_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            assert_eq!(sample_shadowing(0.0f64, &mut rng), 0.0);
        }
    }

    #[test]
    fn shadowing_statistics() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_shadowing(3.0f64, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!(mean.abs() < 0.05, "sample mean {mean}");
        assert!((std / 3.0 - 1.0).abs() < 0.02, "sample std {std}");
    }

    #[test]
    fn shadowing_is_deterministic_per_seed() {
        let seq = |seed| -> Vec<f64> {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (0..32)
                .map(|_| sample_shadowing(3.0f64, &mut rng))
                .collect()
        };
        assert_eq!(seq(42), seq(42));
        assert_ne!(seq(42), seq(43));
    }

    #[test]
    fn capacity_at_zero_snr_equals_bandwidth() {
        assert_eq!(ergodic_capacity_mbps(0.0f64, 200.0), 200.0);
    }

    #[test]
    fn table1_snr_at_cell_edge() {
        // Table-1 budget at d = 845 km, no atmospherics, no shadowing:
        // -6 + 24 - 179.9303 - (-120.9649) - 5 = -45.9654 dB
        // (frozen from an independent 40-digit evaluation of the chain)
        let ue = UeGeometry {
            ue_id: 0,
            elevation_deg: 70.0,
            slant_range_km: 845.0,
            one_way_delay_ms: 2.8186,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let lq = link_quality(
            &ue,
            &table1_params(),
            &ChannelProfile::zero_loss(),
            &mut rng,
        )
        .unwrap();
        assert!(
            (lq.snr_db - (-45.9654075682)).abs() < 1e-9,
            "snr {}",
            lq.snr_db
        );
    }

    #[test]
    fn capacity_monotone_in_snr() {
        let mut prev = ergodic_capacity_mbps(-60.0f64, 200.0);
        for i in 1..200 {
            let snr = -60.0 + i as f64 * 0.5;
            let c = ergodic_capacity_mbps(snr, 200.0);
            assert!(c > prev, "capacity not increasing at snr {snr}");
            prev = c;
        }
    }

    #[test]
    fn snr_monotone_decreasing_in_distance_without_shadowing() {
        let params = table1_params();
        let profile = ChannelProfile::zero_loss();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let d = 300.0 + 10.0 * i as f64;
            let ue = UeGeometry {
                ue_id: 0,
                elevation_deg: 45.0,
                slant_range_km: d,
                one_way_delay_ms: 1.0,
            };
            let lq = link_quality(&ue, &params, &profile, &mut rng).unwrap();
            assert!(lq.snr_db < prev, "snr not decreasing at d {d}");
            prev = lq.snr_db;
        }
    }

    #[test]
    fn zero_sigma_pipeline_is_seed_independent() {
        let params = table1_params();
        let profile = ChannelProfile::zero_loss();
        let ue = UeGeometry {
            ue_id: 3,
            elevation_deg: 62.0,
            slant_range_km: 700.0,
            one_way_delay_ms: 2.33,
        };
        let mut a = ChaCha12Rng::seed_from_u64(1);
        let mut b = ChaCha12Rng::seed_from_u64(999);
        let la = link_quality(&ue, &params, &profile, &mut a).unwrap();
        let lb = link_quality(&ue, &params, &profile, &mut b).unwrap();
        assert_eq!(la, lb);
    }

    #[test]
    fn capacity_rederivation_from_stored_fields() {
        let params = table1_params();
        let profile = ChannelProfile::ka_urban();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for i in 0..100 {
            let d = 300.0 + 7.0 * i as f64;
            let ue = UeGeometry {
                ue_id: i,
                elevation_deg: 10.0 + (i as f64) * 0.8,
                slant_range_km: d,
                one_way_delay_ms: 1.0,
            };
            let lq = link_quality(&ue, &params, &profile, &mut rng).unwrap();
            let again = ergodic_capacity_mbps(lq.snr_db, params.bandwidth_mhz);
            let rel = ((again - lq.ergodic_capacity_mbps) / lq.ergodic_capacity_mbps).abs();
            assert!(
                rel < 1e-12,
                "rederived {again} stored {}",
                lq.ergodic_capacity_mbps
            );
        }
    }

    #[test]
    fn table_lookup_snaps_to_nearest_bucket() {
        let t = ElevationTable::new(vec![10.0, 20.0, 30.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.lookup(12.0), 1.0);
        assert_eq!(t.lookup(15.0), 2.0); // midpoint rounds up
        assert_eq!(t.lookup(29.0), 3.0);
        assert_eq!(t.lookup(90.0), 3.0);
        assert_eq!(t.lookup(1.0), 1.0);
    }

    #[test]
    fn table_validation() {
        assert!(ElevationTable::<f64>::new(vec![], vec![]).is_err());
        assert!(ElevationTable::new(vec![10.0, 10.0], vec![1.0, 2.0]).is_err());
        assert!(ElevationTable::new(vec![10.0, 20.0], vec![1.0]).is_err());
        assert!(ElevationTable::new(vec![10.0], vec![-0.5]).is_err());
        let p = ChannelProfile::<f64>::ka_urban();
        for a in [10.0, 45.0, 90.0] {
            assert!(p.atmospheric.lookup(a) >= 0.0);
            assert!(p.scintillation.lookup(a) >= 0.0);
            assert!(p.shadowing_sigma.lookup(a) >= 0.0);
        }
    }

    #[test]
    fn works_in_f32() {
        let c = ergodic_capacity_mbps(0.0f32, 200.0f32);
        assert!((c - 200.0).abs() < 1e-3);
    }
}
