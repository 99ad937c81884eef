//! Manhattan-grid road layout and platoon placement.
//!
//! Roads run through the middle of each block row/column: horizontal roads at
//! `y = block_height * (j + 1/2)` and vertical roads at
//! `x = intersection_spacing * (i + 1/2)`. Each road carries
//! `lanes_per_direction` lanes in each direction. Vehicles drive straight and
//! wrap toroidally at the map edge.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ChannelError, ScenarioConfig};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// One directed lane. `offset_m` is the fixed coordinate (y for horizontal
/// lanes, x for vertical ones); `s` runs along the lane in `[0, length_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub axis: Axis,
    pub offset_m: f64,
    /// +1 when travelling towards increasing `s`, -1 otherwise.
    pub direction: f64,
    pub length_m: f64,
}

impl Lane {
    pub fn position(&self, s: f64) -> [f64; 2] {
        match self.axis {
            Axis::Horizontal => [s, self.offset_m],
            Axis::Vertical => [self.offset_m, s],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyState {
    pub lanes: Vec<Lane>,
    pub vehicle_lane: Vec<usize>,
    /// Along-lane coordinate of each vehicle.
    pub vehicle_s: Vec<f64>,
    /// Platoon id -> ordered vehicle ids; index 0 is the leader.
    pub platoons: Vec<Vec<usize>>,
    pub gap_m: f64,
    pub speed_mps: f64,
    pub bs_position: [f64; 2],
    pub map_size: [f64; 2],
}

impl TopologyState {
    pub fn num_vehicles(&self) -> usize {
        self.vehicle_s.len()
    }

    pub fn position(&self, vehicle: usize) -> [f64; 2] {
        self.lanes[self.vehicle_lane[vehicle]].position(self.vehicle_s[vehicle])
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        (0..self.num_vehicles()).map(|v| self.position(v)).collect()
    }

    pub fn leader(&self, platoon: usize) -> usize {
        self.platoons[platoon][0]
    }

    /// Along-lane distance from `ahead` back to `behind`, modulo lane length.
    pub fn headway(&self, ahead: usize, behind: usize) -> f64 {
        let lane = &self.lanes[self.vehicle_lane[ahead]];
        ((self.vehicle_s[ahead] - self.vehicle_s[behind]) * lane.direction).rem_euclid(lane.length_m)
    }
}

fn build_lanes(cfg: &ScenarioConfig) -> Vec<Lane> {
    let mut lanes = Vec::new();
    let rows = (cfg.map_height_m / cfg.block_height_m).floor().max(1.0) as usize;
    let cols = (cfg.map_width_m / cfg.intersection_spacing_m).floor().max(1.0) as usize;
    for j in 0..rows {
        let y = cfg.block_height_m * (j as f64 + 0.5);
        for l in 0..cfg.lanes_per_direction {
            let d = (l as f64 + 0.5) * cfg.lane_width_m;
            lanes.push(Lane { axis: Axis::Horizontal, offset_m: y - d, direction: 1.0, length_m: cfg.map_width_m });
            lanes.push(Lane { axis: Axis::Horizontal, offset_m: y + d, direction: -1.0, length_m: cfg.map_width_m });
        }
    }
    for i in 0..cols {
        let x = cfg.intersection_spacing_m * (i as f64 + 0.5);
        for l in 0..cfg.lanes_per_direction {
            let d = (l as f64 + 0.5) * cfg.lane_width_m;
            lanes.push(Lane { axis: Axis::Vertical, offset_m: x + d, direction: 1.0, length_m: cfg.map_height_m });
            lanes.push(Lane { axis: Axis::Vertical, offset_m: x - d, direction: -1.0, length_m: cfg.map_height_m });
        }
    }
    lanes
}

/// Places `num_platoons` platoons of `platoon_size` vehicles on the grid.
///
/// Lanes are visited in a seeded random order; each lane holds at most
/// `floor(length / (size * gap))` platoons, spread evenly from a random
/// offset so that consecutive platoons never overlap.
pub fn build_topology(cfg: &ScenarioConfig, seed: u64) -> Result<TopologyState, ChannelError> {
    if !(5.0..=35.0).contains(&cfg.platoon_gap_m) {
        return Err(ChannelError::GapOutOfRange(cfg.platoon_gap_m));
    }
    cfg.validate()?;
    let lanes = build_lanes(cfg);
    let footprint = cfg.platoon_size as f64 * cfg.platoon_gap_m;
    let capacity: Vec<usize> = lanes.iter().map(|l| (l.length_m / footprint).floor() as usize).collect();
    let total: usize = capacity.iter().sum();
    if cfg.num_platoons > total {
        return Err(ChannelError::LaneCapacity {
            platoons: cfg.num_platoons,
            size: cfg.platoon_size,
            capacity: total,
        });
    }

    let mut rng = rng::stream(seed, Purpose::Topology, 0);
    let mut order: Vec<usize> = (0..lanes.len()).collect();
    order.shuffle(&mut rng);

    // Round-robin over shuffled lanes that still have room.
    let mut per_lane: Vec<Vec<usize>> = vec![Vec::new(); lanes.len()];
    let mut cursor = 0;
    for p in 0..cfg.num_platoons {
        loop {
            let lane = order[cursor % order.len()];
            cursor += 1;
            if per_lane[lane].len() < capacity[lane] {
                per_lane[lane].push(p);
                break;
            }
        }
    }

    let n = cfg.num_vehicles();
    let mut vehicle_lane = vec![0; n];
    let mut vehicle_s = vec![0.0; n];
    let mut platoons = vec![Vec::with_capacity(cfg.platoon_size); cfg.num_platoons];
    for &lane_id in &order {
        let members = &per_lane[lane_id];
        if members.is_empty() {
            continue;
        }
        let lane = &lanes[lane_id];
        let spacing = lane.length_m / members.len() as f64;
        let base: f64 = rng.random_range(0.0..lane.length_m);
        for (slot, &p) in members.iter().enumerate() {
            let lead_s = (base + slot as f64 * spacing).rem_euclid(lane.length_m);
            for j in 0..cfg.platoon_size {
                let v = p * cfg.platoon_size + j;
                vehicle_lane[v] = lane_id;
                vehicle_s[v] =
                    (lead_s - j as f64 * cfg.platoon_gap_m * lane.direction).rem_euclid(lane.length_m);
                platoons[p].push(v);
            }
        }
    }

    Ok(TopologyState {
        lanes,
        vehicle_lane,
        vehicle_s,
        platoons,
        gap_m: cfg.platoon_gap_m,
        speed_mps: cfg.speed_mps(),
        bs_position: cfg.bs_position(),
        map_size: [cfg.map_width_m, cfg.map_height_m],
    })
}

/// Moves every vehicle `speed * dt_s` along its lane (straight through
/// intersections, wrapping at the map edge).
///
/// # Panics
/// Panics if `dt_s` is negative or not finite.
pub fn advance_mobility(topology: &TopologyState, dt_s: f64) -> TopologyState {
    assert!(dt_s.is_finite() && dt_s >= 0.0, "time step must be non-negative, got {dt_s}");
    let mut next = topology.clone();
    let step = topology.speed_mps * dt_s;
    for (v, s) in next.vehicle_s.iter_mut().enumerate() {
        let lane = &topology.lanes[topology.vehicle_lane[v]];
        *s = (*s + lane.direction * step).rem_euclid(lane.length_m);
    }
    next
}
