//! Large- and small-scale propagation terms and their composition.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{ChannelError, ScenarioConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LinkKind {
    /// Vehicle to vehicle (intra-platoon or cross-platoon interference).
    V2V,
    /// Vehicle to base station.
    V2I,
}

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::of(10.0).powf(db / T::of(10.0))
}

pub fn linear_to_db<T: Real>(x: T) -> T {
    T::of(10.0) * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `128.1 + 37.6 log10(d / 1 km)` dB for both link kinds, with the distance
/// floored at `min_distance_m` first.
pub fn pathloss_db<T: Real>(distance_m: T, _kind: LinkKind, min_distance_m: T) -> Result<T, ChannelError> {
    if !(distance_m > T::zero()) {
        return Err(ChannelError::NonPositiveDistance(distance_m.widen()));
    }
    let d = distance_m.max(min_distance_m);
    Ok(T::of(128.1) + T::of(37.6) * (d / T::of(1000.0)).log10())
}

/// Standard deviation and decorrelation distance of the shadowing process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingParams {
    pub std_db: f64,
    pub decorrelation_m: f64,
}

impl ShadowingParams {
    pub fn for_link(kind: LinkKind, cfg: &ScenarioConfig) -> Self {
        match kind {
            LinkKind::V2V => ShadowingParams {
                std_db: cfg.shadow_std_v2v_db,
                decorrelation_m: cfg.decorrelation_v2v_m,
            },
            LinkKind::V2I => ShadowingParams {
                std_db: cfg.shadow_std_v2i_db,
                decorrelation_m: cfg.decorrelation_v2i_m,
            },
        }
    }

    /// Fresh draw from the stationary distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.std_db * z
    }
}

/// Exponentially correlated shadowing update:
/// `rho * prev + sqrt(1 - rho^2) * eps` with `rho = exp(-moved / d_corr)` and
/// `eps ~ N(0, std^2)`.
///
/// A zero move returns `prev_db` unchanged without consuming randomness.
pub fn update_shadowing<R: Rng + ?Sized>(prev_db: f64, moved_m: f64, params: ShadowingParams, rng: &mut R) -> f64 {
    debug_assert!(moved_m >= 0.0);
    if moved_m <= 0.0 {
        return prev_db;
    }
    let rho = (-moved_m / params.decorrelation_m).exp();
    rho * prev_db + (1.0 - rho * rho).sqrt() * params.sample(rng)
}

/// Rayleigh fading power factor, exponentially distributed with unit mean.
pub fn sample_fast_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// `fading * 10^((tx_gain + rx_gain - pathloss - shadow - noise_figure) / 10)`.
pub fn compose_gain<T: Real>(
    pathloss_db: T,
    shadow_db: T,
    fading_lin: T,
    tx_gain_dbi: T,
    rx_gain_dbi: T,
    noise_figure_db: T,
) -> T {
    let db = tx_gain_dbi + rx_gain_dbi - pathloss_db - shadow_db - noise_figure_db;
    fading_lin * db_to_linear(db)
}

/// All factors of one link on one subchannel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub pathloss_db: f64,
    pub shadow_db: f64,
    pub fading: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub gain: f64,
}

impl LinkState {
    pub fn new(
        pathloss_db: f64,
        shadow_db: f64,
        fading: f64,
        tx_gain_dbi: f64,
        rx_gain_dbi: f64,
        noise_figure_db: f64,
    ) -> Self {
        let gain = compose_gain(pathloss_db, shadow_db, fading, tx_gain_dbi, rx_gain_dbi, noise_figure_db);
        LinkState { pathloss_db, shadow_db, fading, tx_gain_dbi, rx_gain_dbi, noise_figure_db, gain }
    }

    /// Net large-scale attenuation in dB (positive = loss), excluding fading.
    pub fn large_scale_loss_db(&self) -> f64 {
        self.pathloss_db + self.shadow_db + self.noise_figure_db - self.tx_gain_dbi - self.rx_gain_dbi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn pathloss_reference_points() {
        let f = |d: f64| pathloss_db(d, LinkKind::V2I, 1.0).unwrap();
        assert!((f(1000.0) - 128.1).abs() < 1e-12);
        assert!((f(100.0) - 90.5).abs() < 1e-9);
        assert!((f(433.0) - 114.43).abs() < 0.01);
        assert_eq!(f(0.5), f(1.0), "floor applies below 1 m");
        assert!(pathloss_db(0.0, LinkKind::V2V, 1.0).is_err());
        assert!(pathloss_db(-3.0, LinkKind::V2V, 1.0).is_err());
        let single: f32 = pathloss_db(100.0f32, LinkKind::V2V, 1.0).unwrap();
        assert!((single - 90.5).abs() < 1e-4);
    }

    #[test]
    fn shadowing_zero_move_keeps_value() {
        let mut rng = stream(1, Purpose::Shadowing, 0);
        let p = ShadowingParams { std_db: 3.0, decorrelation_m: 10.0 };
        assert_eq!(update_shadowing(2.5, 0.0, p, &mut rng), 2.5);
    }

    #[test]
    fn shadowing_far_move_forgets_history() {
        let p = ShadowingParams { std_db: 8.0, decorrelation_m: 50.0 };
        let mut a = stream(2, Purpose::Shadowing, 0);
        let mut b = stream(2, Purpose::Shadowing, 0);
        let x = update_shadowing(100.0, 1e9, p, &mut a);
        let y = update_shadowing(-100.0, 1e9, p, &mut b);
        assert_eq!(x, y);
    }

    #[test]
    fn compose_gain_examples() {
        assert_eq!(compose_gain(0.0, 0.0, 1.0, 0.0, 0.0, 0.0), 1.0);
        let g = compose_gain(90.5, 0.0, 1.0, 3.0, 3.0, 9.0);
        assert!((g - 10f64.powf(-9.35)).abs() / g < 1e-12);
        assert!((g - 4.47e-10).abs() < 0.01e-10);
        assert_eq!(compose_gain(90.5, 1.0, 0.0, 3.0, 3.0, 9.0), 0.0);
    }

    #[test]
    fn link_state_composition_matches_db_sum() {
        let l = LinkState::new(101.3, -2.2, 0.37, 3.0, 8.0, 5.0);
        let expect = 0.37 * 10f64.powf(-(l.large_scale_loss_db()) / 10.0);
        assert!((l.gain - expect).abs() / expect <= 1e-12);
        let back = linear_to_db(l.gain / l.fading);
        assert!((back + l.large_scale_loss_db()).abs() < 1e-9);
    }

    #[test]
    fn fading_is_nonnegative() {
        let mut rng = stream(9, Purpose::Fading, 0);
        assert!((0..10_000).all(|_| sample_fast_fading(&mut rng) >= 0.0));
    }
}
