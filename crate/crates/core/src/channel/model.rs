//! Two-clock channel process: path loss and shadowing refresh on the
//! large-scale period, Rayleigh fading redrawn every slot.
//!
//! Links are reciprocal: the gain of `a -> b` equals that of `b -> a`, and
//! one fading draw per link and subchannel serves every stream on it.

use serde::{Deserialize, Serialize};

use super::propagation::{pathloss_db, sample_fast_fading, update_shadowing, LinkKind, LinkState, ShadowingParams};
use super::{ScenarioConfig, TopologyState};
use crate::rng::{self, Purpose, SimRng};

/// Linear power gains for every (transmitter, receiver, subchannel) at one slot.
///
/// Node ids `0..num_vehicles` are vehicles; `num_nodes - 1` is the base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub num_nodes: usize,
    pub num_subchannels: usize,
    pub slot: u64,
    pub noise_w: f64,
    gains: Vec<f64>,
}

impl ChannelRealization {
    /// Builds a realization from a flat `[tx][rx][k]` gain table.
    pub fn from_gains(num_nodes: usize, num_subchannels: usize, slot: u64, noise_w: f64, gains: Vec<f64>) -> Self {
        assert_eq!(gains.len(), num_nodes * num_nodes * num_subchannels, "gain table shape");
        ChannelRealization { num_nodes, num_subchannels, slot, noise_w, gains }
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize, k: usize) -> f64 {
        self.gains[(tx * self.num_nodes + rx) * self.num_subchannels + k]
    }

    pub fn bs_node(&self) -> usize {
        self.num_nodes - 1
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn is_valid(&self) -> bool {
        self.noise_w > 0.0 && self.gains.iter().all(|g| g.is_finite() && *g >= 0.0)
    }
}

#[derive(Debug, Clone)]
struct PairState {
    kind: LinkKind,
    pathloss_db: f64,
    shadow_db: f64,
    tx_gain_dbi: f64,
    rx_gain_dbi: f64,
    noise_figure_db: f64,
}

#[derive(Debug, Clone)]
pub struct ChannelModel {
    cfg: ScenarioConfig,
    num_nodes: usize,
    pairs: Vec<PairState>,
    /// `pairs.len() * K` fading factors.
    fading: Vec<f64>,
    shadow_rng: SimRng,
    fading_rng: SimRng,
}

fn pair_index(a: usize, b: usize, n: usize) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    // Row-major upper triangle without the diagonal.
    lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)
}

impl ChannelModel {
    pub fn new(cfg: &ScenarioConfig, topology: &TopologyState, seed: u64) -> Self {
        let num_nodes = topology.num_vehicles() + 1;
        let mut shadow_rng = rng::stream(seed, Purpose::Shadowing, 0);
        let fading_rng = rng::stream(seed, Purpose::Fading, 0);
        let mut pairs = Vec::with_capacity(num_nodes * (num_nodes - 1) / 2);
        for a in 0..num_nodes {
            for b in (a + 1)..num_nodes {
                let kind = if b == num_nodes - 1 { LinkKind::V2I } else { LinkKind::V2V };
                let (tx_gain_dbi, rx_gain_dbi, noise_figure_db) = match kind {
                    LinkKind::V2V => (cfg.vehicle_antenna_gain_dbi, cfg.vehicle_antenna_gain_dbi, cfg.vehicle_noise_figure_db),
                    LinkKind::V2I => (cfg.vehicle_antenna_gain_dbi, cfg.bs_antenna_gain_dbi, cfg.bs_noise_figure_db),
                };
                let shadow_db = ShadowingParams::for_link(kind, cfg).sample(&mut shadow_rng);
                pairs.push(PairState {
                    kind,
                    pathloss_db: 0.0,
                    shadow_db,
                    tx_gain_dbi,
                    rx_gain_dbi,
                    noise_figure_db,
                });
            }
        }
        let mut model = ChannelModel {
            cfg: cfg.clone(),
            num_nodes,
            fading: vec![0.0; pairs.len() * cfg.num_subchannels],
            pairs,
            shadow_rng,
            fading_rng,
        };
        model.update_pathloss(topology);
        model.redraw_fast_fading();
        model
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    fn distance(&self, topology: &TopologyState, a: usize, b: usize) -> f64 {
        let bs = self.num_nodes - 1;
        let pos = |v: usize| if v == bs { topology.bs_position } else { topology.position(v) };
        let (pa, pb) = (pos(a), pos(b));
        let dz = if a == bs || b == bs { self.cfg.bs_height_m - self.cfg.vehicle_height_m } else { 0.0 };
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + dz * dz).sqrt()
    }

    fn update_pathloss(&mut self, topology: &TopologyState) {
        let n = self.num_nodes;
        for a in 0..n {
            for b in (a + 1)..n {
                // Co-located vehicles still get the floor distance.
                let d = self.distance(topology, a, b).max(f64::MIN_POSITIVE);
                let idx = pair_index(a, b, n);
                let kind = self.pairs[idx].kind;
                self.pairs[idx].pathloss_db =
                    pathloss_db(d, kind, self.cfg.min_distance_m).expect("distance is positive");
            }
        }
    }

    /// Recomputes path loss at the new positions and evolves shadowing for a
    /// displacement of `moved_m`.
    pub fn refresh_large_scale(&mut self, topology: &TopologyState, moved_m: f64) {
        self.update_pathloss(topology);
        for pair in &mut self.pairs {
            let params = ShadowingParams::for_link(pair.kind, &self.cfg);
            pair.shadow_db = update_shadowing(pair.shadow_db, moved_m, params, &mut self.shadow_rng);
        }
    }

    pub fn redraw_fast_fading(&mut self) {
        for f in &mut self.fading {
            *f = sample_fast_fading(&mut self.fading_rng);
        }
    }

    pub fn link_state(&self, a: usize, b: usize, k: usize) -> LinkState {
        let idx = pair_index(a, b, self.num_nodes);
        let p = &self.pairs[idx];
        LinkState::new(
            p.pathloss_db,
            p.shadow_db,
            self.fading[idx * self.cfg.num_subchannels + k],
            p.tx_gain_dbi,
            p.rx_gain_dbi,
            p.noise_figure_db,
        )
    }

    pub fn realization(&self, slot: u64) -> ChannelRealization {
        let n = self.num_nodes;
        let kk = self.cfg.num_subchannels;
        let mut gains = vec![0.0; n * n * kk];
        for a in 0..n {
            for b in (a + 1)..n {
                for k in 0..kk {
                    let g = self.link_state(a, b, k).gain;
                    gains[(a * n + b) * kk + k] = g;
                    gains[(b * n + a) * kk + k] = g;
                }
            }
        }
        ChannelRealization::from_gains(n, kk, slot, self.cfg.noise_w(), gains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{advance_mobility, build_topology};

    #[test]
    fn pair_index_is_dense() {
        let n = 7;
        let mut seen = vec![false; n * (n - 1) / 2];
        for a in 0..n {
            for b in (a + 1)..n {
                let i = pair_index(a, b, n);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(i, pair_index(b, a, n));
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn realization_is_reciprocal_valid_and_deterministic() {
        let cfg = ScenarioConfig::default();
        let topo = build_topology(&cfg, 4).unwrap();
        let a = ChannelModel::new(&cfg, &topo, 4).realization(0);
        let b = ChannelModel::new(&cfg, &topo, 4).realization(0);
        assert_eq!(a, b);
        assert!(a.is_valid());
        assert_eq!(a.gain(3, 17, 2), a.gain(17, 3, 2));
        assert_eq!(a.gain(5, 5, 0), 0.0);
    }

    #[test]
    fn sequences_repeat_bit_exact() {
        let cfg = ScenarioConfig::default();
        let run = || {
            let mut topo = build_topology(&cfg, 12).unwrap();
            let mut m = ChannelModel::new(&cfg, &topo, 12);
            let mut out = Vec::new();
            for slot in 1..=250u64 {
                topo = advance_mobility(&topo, 1e-3);
                m.redraw_fast_fading();
                if slot % 100 == 0 {
                    m.refresh_large_scale(&topo, 1.0);
                }
                out.push(m.realization(slot));
            }
            out
        };
        let (x, y) = (run(), run());
        for (p, q) in x.iter().zip(&y) {
            assert!(p.gains().iter().zip(q.gains()).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn nearby_members_have_stronger_gain_than_base_station() {
        let cfg = ScenarioConfig::default();
        let topo = build_topology(&cfg, 2).unwrap();
        let m = ChannelModel::new(&cfg, &topo, 2);
        let lead = topo.leader(0);
        let member = topo.platoons[0][1];
        let bs = m.num_nodes() - 1;
        let v2v = m.link_state(lead, member, 0);
        let v2i = m.link_state(lead, bs, 0);
        assert!(v2v.large_scale_loss_db() < v2i.large_scale_loss_db());
    }
}
