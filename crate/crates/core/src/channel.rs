//! One-dimensional propagation model for the timed fast phase.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Geometry and timing slack. Units are arbitrary but consistent; the
/// defaults use natural units with `d = 1` and `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Verifier to whoever answers the challenges.
    pub distance: f64,
    /// Extra one-way distance from a relaying claimant to the real prover.
    pub extra_distance: f64,
    pub speed: f64,
    /// Prover-side turnaround per reply.
    pub processing_delay: f64,
    /// Slack added to the threshold.
    pub epsilon: f64,
    /// Upper bound of uniform noise added to each measured round trip. Zero
    /// keeps timing deterministic.
    pub jitter: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            distance: 1.0,
            extra_distance: 0.0,
            speed: 1.0,
            processing_delay: 0.0,
            epsilon: 0.0,
            jitter: 0.0,
        }
    }
}

/// Speed of light in m/s, for configurations in SI units.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fields = [
            ("distance", self.distance),
            ("extra_distance", self.extra_distance),
            ("processing_delay", self.processing_delay),
            ("epsilon", self.epsilon),
            ("jitter", self.jitter),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Channel(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !self.speed.is_finite() || self.speed <= 0.0 {
            return Err(Error::Channel(format!("speed must be positive, got {}", self.speed)));
        }
        Ok(())
    }

    /// Round-trip time of one challenge/reply exchange. A relayed exchange
    /// also travels to the remote prover and back.
    pub fn rtt(&self, relayed: bool) -> f64 {
        let mut t = 2.0 * self.distance / self.speed + self.processing_delay;
        if relayed {
            t += 2.0 * self.extra_distance / self.speed;
        }
        t
    }

    /// [`rtt`](Self::rtt) plus jitter drawn from `rng` when configured.
    pub fn sample_rtt<R: RngCore + ?Sized>(&self, relayed: bool, rng: &mut R) -> f64 {
        let t = self.rtt(relayed);
        if self.jitter > 0.0 {
            t + rng.gen_range(0.0..=self.jitter)
        } else {
            t
        }
    }

    /// Acceptance bound `2d/c + processing_delay + epsilon`.
    pub fn threshold(&self) -> f64 {
        2.0 * self.distance / self.speed + self.processing_delay + self.epsilon
    }

    /// One-way propagation delay to the claimant.
    pub fn one_way(&self) -> f64 {
        self.distance / self.speed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_and_relayed() {
        let c = ChannelConfig::default();
        assert_eq!(c.rtt(false), 2.0);
        assert_eq!(c.threshold(), 2.0);
        let relay = ChannelConfig {
            extra_distance: 1.0,
            ..c
        };
        assert_eq!(relay.rtt(true), 4.0);
        assert!(relay.rtt(true) > relay.threshold());
        assert_eq!(c.rtt(true), c.rtt(false));
    }

    #[test]
    fn validation() {
        assert!(ChannelConfig::default().validate().is_ok());
        assert!(ChannelConfig { speed: 0.0, ..Default::default() }.validate().is_err());
        assert!(ChannelConfig { epsilon: -1.0, ..Default::default() }.validate().is_err());
        assert!(ChannelConfig { distance: f64::NAN, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn si_units() {
        let c = ChannelConfig {
            distance: 0.1,
            speed: SPEED_OF_LIGHT,
            ..Default::default()
        };
        assert!((c.threshold() - 0.2 / SPEED_OF_LIGHT).abs() < 1e-20);
    }

    fn config() -> impl Strategy<Value = ChannelConfig> {
        (0.0..10.0f64, 0.0..10.0f64, 0.1..10.0f64, 0.0..5.0f64, 0.0..5.0f64).prop_map(
            |(distance, extra_distance, speed, processing_delay, epsilon)| ChannelConfig {
                distance,
                extra_distance,
                speed,
                processing_delay,
                epsilon,
                jitter: 0.0,
            },
        )
    }

    proptest! {
        #[test]
        fn honest_always_within_threshold(c in config()) {
            prop_assert!(c.rtt(false) <= c.threshold());
        }

        #[test]
        fn relay_cut_is_sharp(c in config()) {
            let within = c.rtt(true) <= c.threshold();
            let penalty = 2.0 * c.extra_distance / c.speed;
            let tol = 1e-9 * (1.0 + c.threshold());
            if penalty < c.epsilon - tol {
                prop_assert!(within);
            } else if penalty > c.epsilon + tol {
                prop_assert!(!within);
            }
        }

        #[test]
        fn rtt_monotone(c in config(), dd in 0.0..3.0f64, de in 0.0..3.0f64, dp in 0.0..3.0f64) {
            for relayed in [false, true] {
                let base = c.rtt(relayed);
                let farther = ChannelConfig { distance: c.distance + dd, ..c };
                let longer_relay = ChannelConfig { extra_distance: c.extra_distance + de, ..c };
                let slower = ChannelConfig { processing_delay: c.processing_delay + dp, ..c };
                prop_assert!(farther.rtt(relayed) >= base);
                prop_assert!(longer_relay.rtt(relayed) >= base);
                prop_assert!(slower.rtt(relayed) >= base);
            }
        }
    }
}
