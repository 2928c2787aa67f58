//! Marker amplitude schedules and evolution-time policies.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Marker magnitude `|α^(l)|` per iteration. Must be non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSchedule {
    Constant(f64),
    /// Magnitudes for iterations 1, 2, ...; the last one repeats.
    Steps(Vec<f64>),
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self::Constant(2.0)
    }
}

impl AlphaSchedule {
    pub fn validate(&self) -> Result<()> {
        let values: &[f64] = match self {
            Self::Constant(a) => std::slice::from_ref(a),
            Self::Steps(v) => v,
        };
        if values.is_empty() {
            return Err(Error::InvalidConfig("empty alpha schedule".into()));
        }
        if values.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidConfig(
                "alpha magnitudes must be finite and >= 0".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig(
                "alpha schedule must be non-decreasing".into(),
            ));
        }
        Ok(())
    }

    /// Magnitude for iteration `l` (1-based).
    pub fn magnitude(&self, l: usize) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::Steps(v) => v[l.saturating_sub(1).min(v.len() - 1)],
        }
    }
}

/// How evolution times `t_l` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimePolicy {
    /// `t_l = (2π/g)·r_l` with `r_l` uniform in [0, 1).
    SeededRandom,
    Explicit(Vec<f64>),
}

impl TimePolicy {
    pub fn validate(&self) -> Result<()> {
        if let Self::Explicit(v) = self {
            if v.is_empty() || v.iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidConfig(
                    "explicit times must be finite and non-empty".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Stream of evolution times. Explicit lists end after their last entry.
pub struct TimeStream {
    inner: TimeSource,
}

enum TimeSource {
    Random { rng: rng::Stream, period: f64 },
    Explicit { times: Vec<f64>, next: usize },
}

impl Iterator for TimeStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        match &mut self.inner {
            TimeSource::Random { rng, period } => Some(*period * rng::unit(rng)),
            TimeSource::Explicit { times, next } => {
                let t = times.get(*next).copied();
                *next += 1;
                t
            }
        }
    }
}

/// Times for `policy`; `g` sets the random period `2π/g`.
pub fn sample_times(policy: &TimePolicy, seed: u64, g: f64) -> Result<TimeStream> {
    let inner = match policy {
        TimePolicy::SeededRandom => {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::Domain(format!(
                    "coupling scale g = {g} must be positive"
                )));
            }
            TimeSource::Random {
                rng: rng::stream(seed),
                period: TAU / g,
            }
        }
        TimePolicy::Explicit(v) => TimeSource::Explicit {
            times: v.clone(),
            next: 0,
        },
    };
    Ok(TimeStream { inner })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_times_verbatim() {
        let mut s = sample_times(&TimePolicy::Explicit(vec![1.704]), 0, 1.0).unwrap();
        assert_eq!(s.next(), Some(1.704));
        assert_eq!(s.next(), None);
    }

    #[test]
    fn random_times_in_period_and_reproducible() {
        let a: Vec<f64> = sample_times(&TimePolicy::SeededRandom, 9, 1.0)
            .unwrap()
            .take(1000)
            .collect();
        assert!(a.iter().all(|t| (0.0..TAU).contains(t)));
        let b: Vec<f64> = sample_times(&TimePolicy::SeededRandom, 9, 1.0)
            .unwrap()
            .take(1000)
            .collect();
        assert_eq!(a, b);
        let c: Vec<f64> = sample_times(&TimePolicy::SeededRandom, 9, 2.0)
            .unwrap()
            .take(3)
            .collect();
        assert!(c.iter().all(|t| *t < TAU / 2.0));
        assert!(sample_times(&TimePolicy::SeededRandom, 9, 0.0).is_err());
    }

    #[test]
    fn alpha_schedule_rules() {
        assert!(AlphaSchedule::Steps(vec![1.0, 2.0, 2.0]).validate().is_ok());
        assert!(AlphaSchedule::Steps(vec![2.0, 1.0]).validate().is_err());
        assert!(AlphaSchedule::Constant(-1.0).validate().is_err());
        let s = AlphaSchedule::Steps(vec![1.0, 1.5]);
        assert_eq!(
            (s.magnitude(1), s.magnitude(2), s.magnitude(9)),
            (1.0, 1.5, 1.5)
        );
    }
}
