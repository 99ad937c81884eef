use serde::{Deserialize, Serialize};

use super::ChannelError;

/// Scenario section of the run configuration.
///
/// Defaults follow the vehicular-environment table: 20 vehicles in platoons
/// of 5, 4 resource blocks of 180 kHz, 30 dBm maximum power, -114 dBm noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_platoons: usize,
    pub platoon_size: usize,
    pub platoon_gap_m: f64,
    pub lane_width_m: f64,
    pub lanes_per_direction: usize,
    pub intersection_spacing_m: f64,
    pub block_height_m: f64,
    pub map_width_m: f64,
    pub map_height_m: f64,
    pub speed_kmh: f64,
    pub carrier_ghz: f64,
    pub num_subchannels: usize,
    pub subchannel_bandwidth_hz: f64,
    pub max_power_dbm: f64,
    pub noise_dbm: f64,
    pub bs_antenna_gain_dbi: f64,
    pub vehicle_antenna_gain_dbi: f64,
    pub bs_noise_figure_db: f64,
    pub vehicle_noise_figure_db: f64,
    pub bs_height_m: f64,
    pub vehicle_height_m: f64,
    pub shadow_std_v2i_db: f64,
    pub shadow_std_v2v_db: f64,
    pub decorrelation_v2i_m: f64,
    pub decorrelation_v2v_m: f64,
    pub large_scale_period_ms: u32,
    pub slot_ms: u32,
    pub min_distance_m: f64,
    /// Base-station position; `None` places it at the map centre.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_position_m: Option<[f64; 2]>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_platoons: 4,
            platoon_size: 5,
            platoon_gap_m: 20.0,
            lane_width_m: 3.5,
            lanes_per_direction: 2,
            intersection_spacing_m: 433.0,
            block_height_m: 250.0,
            map_width_m: 1299.0,
            map_height_m: 750.0,
            speed_kmh: 36.0,
            carrier_ghz: 2.0,
            num_subchannels: 4,
            subchannel_bandwidth_hz: 180e3,
            max_power_dbm: 30.0,
            noise_dbm: -114.0,
            bs_antenna_gain_dbi: 8.0,
            vehicle_antenna_gain_dbi: 3.0,
            bs_noise_figure_db: 5.0,
            vehicle_noise_figure_db: 9.0,
            bs_height_m: 25.0,
            vehicle_height_m: 1.5,
            shadow_std_v2i_db: 8.0,
            shadow_std_v2v_db: 3.0,
            decorrelation_v2i_m: 50.0,
            decorrelation_v2v_m: 10.0,
            large_scale_period_ms: 100,
            slot_ms: 1,
            min_distance_m: 1.0,
            bs_position_m: None,
        }
    }
}

impl ScenarioConfig {
    pub fn num_vehicles(&self) -> usize {
        self.num_platoons * self.platoon_size
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_kmh / 3.6
    }

    pub fn max_power_w(&self) -> f64 {
        super::dbm_to_watts(self.max_power_dbm)
    }

    pub fn noise_w(&self) -> f64 {
        super::dbm_to_watts(self.noise_dbm)
    }

    pub fn slot_s(&self) -> f64 {
        f64::from(self.slot_ms) * 1e-3
    }

    pub fn bs_position(&self) -> [f64; 2] {
        self.bs_position_m
            .unwrap_or([self.map_width_m / 2.0, self.map_height_m / 2.0])
    }

    /// Checks ranges; the error names the offending key.
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |key: &str, msg: &str| Err(ChannelError::Invalid(format!("scenario.{key}: {msg}")));
        if !(5.0..=35.0).contains(&self.platoon_gap_m) {
            return Err(ChannelError::GapOutOfRange(self.platoon_gap_m));
        }
        if self.num_platoons == 0 {
            return bad("num_platoons", "must be at least 1");
        }
        if self.platoon_size == 0 {
            return bad("platoon_size", "must be at least 1");
        }
        if self.num_subchannels == 0 {
            return bad("num_subchannels", "must be at least 1");
        }
        if self.lanes_per_direction == 0 {
            return bad("lanes_per_direction", "must be at least 1");
        }
        if self.map_width_m < 1299.0 || self.map_height_m < 750.0 {
            return bad("map_width_m", "map must be at least 1299 m x 750 m");
        }
        let positive = [
            ("lane_width_m", self.lane_width_m),
            ("intersection_spacing_m", self.intersection_spacing_m),
            ("block_height_m", self.block_height_m),
            ("subchannel_bandwidth_hz", self.subchannel_bandwidth_hz),
            ("min_distance_m", self.min_distance_m),
            ("decorrelation_v2i_m", self.decorrelation_v2i_m),
            ("decorrelation_v2v_m", self.decorrelation_v2v_m),
            ("carrier_ghz", self.carrier_ghz),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(key, "must be positive");
            }
        }
        for (key, v) in [
            ("shadow_std_v2i_db", self.shadow_std_v2i_db),
            ("shadow_std_v2v_db", self.shadow_std_v2v_db),
            ("speed_kmh", self.speed_kmh),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(key, "must be non-negative");
            }
        }
        for (key, v) in [
            ("max_power_dbm", self.max_power_dbm),
            ("noise_dbm", self.noise_dbm),
            ("bs_antenna_gain_dbi", self.bs_antenna_gain_dbi),
            ("vehicle_antenna_gain_dbi", self.vehicle_antenna_gain_dbi),
            ("bs_noise_figure_db", self.bs_noise_figure_db),
            ("vehicle_noise_figure_db", self.vehicle_noise_figure_db),
            ("bs_height_m", self.bs_height_m),
            ("vehicle_height_m", self.vehicle_height_m),
        ] {
            if !v.is_finite() {
                return bad(key, "must be finite");
            }
        }
        if self.slot_ms == 0 {
            return bad("slot_ms", "must be at least 1");
        }
        if self.large_scale_period_ms == 0 || self.large_scale_period_ms % self.slot_ms != 0 {
            return bad("large_scale_period_ms", "must be a positive multiple of slot_ms");
        }
        let half_road = self.lanes_per_direction as f64 * self.lane_width_m;
        if half_road * 2.0 > self.block_height_m.min(self.intersection_spacing_m) {
            return bad("lane_width_m", "roads wider than the blocks that hold them");
        }
        if let Some([x, y]) = self.bs_position_m {
            if !(0.0..=self.map_width_m).contains(&x) || !(0.0..=self.map_height_m).contains(&y) {
                return bad("bs_position_m", "outside the map");
            }
        }
        Ok(())
    }
}
