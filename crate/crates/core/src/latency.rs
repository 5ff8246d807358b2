//! Response-latency model for emulated devices.
//!
//! A delay is `fixed + jitter`, truncated at zero, sampled once per request.
//! Sampling is driven by a seeded ChaCha generator so a profile with a fixed
//! seed produces the same delay sequence on every run.

use core::fmt;
use core::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Jitter {
    #[default]
    None,
    /// Uniform on `[low_us, high_us]`.
    Uniform { low_us: f64, high_us: f64 },
    /// Normal with the given mean and standard deviation; the total delay is
    /// truncated at zero.
    Normal { mean_us: f64, std_dev_us: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid jitter spec `{0}` (expected none, uniform(a,b) or normal(mean,sd) in µs)")]
pub struct JitterParseError(pub alloc::string::String);

impl Jitter {
    /// Parses `none`, `uniform(a,b)` or `normal(mean,sd)`, values in µs.
    pub fn parse(spec: &str) -> Result<Self, JitterParseError> {
        let bad = || JitterParseError(alloc::string::String::from(spec));
        let s = spec.trim().to_ascii_lowercase();
        if s == "none" || s.is_empty() {
            return Ok(Jitter::None);
        }
        let (kind, args) = s.split_once('(').ok_or_else(bad)?;
        let args = args.strip_suffix(')').ok_or_else(bad)?;
        let (a, b) = args.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if !a.is_finite() || !b.is_finite() {
            return Err(bad());
        }
        match kind.trim() {
            "uniform" if a <= b => Ok(Jitter::Uniform {
                low_us: a,
                high_us: b,
            }),
            "normal" if b >= 0.0 => Ok(Jitter::Normal {
                mean_us: a,
                std_dev_us: b,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Jitter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Jitter::None => f.write_str("none"),
            Jitter::Uniform { low_us, high_us } => write!(f, "uniform({low_us},{high_us})"),
            Jitter::Normal {
                mean_us,
                std_dev_us,
            } => write!(f, "normal({mean_us},{std_dev_us})"),
        }
    }
}

/// Extra delay for the first `requests` requests a server answers, e.g. to
/// mimic a runtime that needs time to settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Warmup {
    pub requests: u64,
    pub extra_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatencyProfile {
    pub fixed_us: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub jitter: Jitter,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub warmup: Warmup,
}

impl LatencyProfile {
    pub fn fixed(fixed_us: u64) -> Self {
        LatencyProfile {
            fixed_us,
            ..Default::default()
        }
    }
}

/// One delay sample: fixed part plus jitter, never negative. Warm-up is not
/// applied here; see [`LatencySampler`].
pub fn apply_latency<R: Rng + ?Sized>(profile: &LatencyProfile, rng: &mut R) -> Duration {
    let jitter = match profile.jitter {
        Jitter::None => 0.0,
        Jitter::Uniform { low_us, high_us } => {
            if low_us < high_us {
                rng.random_range(low_us..=high_us)
            } else {
                low_us
            }
        }
        Jitter::Normal {
            mean_us,
            std_dev_us,
        } => match Normal::new(mean_us, std_dev_us) {
            Ok(normal) => normal.sample(rng),
            Err(_) => mean_us,
        },
    };
    let total_us = profile.fixed_us as f64 + jitter;
    if total_us.is_nan() || total_us <= 0.0 {
        return Duration::ZERO;
    }
    Duration::from_nanos(libm::round(total_us * 1_000.0) as u64)
}

/// Stateful per-server sampler: seeded RNG plus warm-up bookkeeping.
#[derive(Debug, Clone)]
pub struct LatencySampler {
    profile: LatencyProfile,
    rng: ChaCha8Rng,
    served: u64,
}

impl LatencySampler {
    pub fn new(profile: LatencyProfile) -> Self {
        LatencySampler {
            profile,
            rng: ChaCha8Rng::seed_from_u64(profile.seed),
            served: 0,
        }
    }

    pub fn profile(&self) -> &LatencyProfile {
        &self.profile
    }

    /// Requests sampled so far.
    pub fn served(&self) -> u64 {
        self.served
    }

    pub fn next_delay(&mut self) -> Duration {
        let mut delay = apply_latency(&self.profile, &mut self.rng);
        if self.served < self.profile.warmup.requests {
            delay += Duration::from_micros(self.profile.warmup.extra_us);
        }
        self.served += 1;
        delay
    }
}
