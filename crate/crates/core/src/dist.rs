//! Random variates as pure functions of their parameters and one uniform draw.
//!
//! Keeping the uniform explicit lets the model pull it from a named stream and
//! lets tests probe the transforms at exact points.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("triangular parameters must satisfy min <= mode <= max and min < max (got {min}, {mode}, {max})")]
    Triangular { min: f64, mode: f64, max: f64 },
    #[error("exponential mean must be positive and finite (got {0})")]
    Exponential(f64),
}

/// Triangular distribution on `[min, max]` peaking at `mode`, in days.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangularParams {
    pub min: f64,
    pub mode: f64,
    pub max: f64,
}

impl TriangularParams {
    pub fn new(min: f64, mode: f64, max: f64) -> Result<Self, DistError> {
        let p = TriangularParams { min, mode, max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DistError> {
        let TriangularParams { min, mode, max } = *self;
        let finite = min.is_finite() && mode.is_finite() && max.is_finite();
        if finite && min <= mode && mode <= max && min < max {
            Ok(())
        } else {
            Err(DistError::Triangular { min, mode, max })
        }
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.mode + self.max) / 3.0
    }

    pub fn variance(&self) -> f64 {
        let (a, c, b) = (self.min, self.mode, self.max);
        (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, c, b) = (self.min, self.mode, self.max);
        if x <= a {
            0.0
        } else if x >= b {
            1.0
        } else if x <= c {
            (x - a) * (x - a) / ((b - a) * (c - a))
        } else {
            1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialParams {
    pub mean: f64,
}

impl ExponentialParams {
    pub fn new(mean: f64) -> Result<Self, DistError> {
        if mean > 0.0 && mean.is_finite() {
            Ok(ExponentialParams { mean })
        } else {
            Err(DistError::Exponential(mean))
        }
    }
}

/// Inverse-CDF transform, `u` in `[0, 1)`.
pub fn sample_triangular(p: &TriangularParams, u: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&u));
    let (a, c, b) = (p.min, p.mode, p.max);
    let split = (c - a) / (b - a);
    let x = if u < split {
        a + (u * (b - a) * (c - a)).sqrt()
    } else {
        b - ((1.0 - u) * (b - a) * (b - c)).sqrt()
    };
    x.clamp(a, b)
}

/// `u` in `(0, 1]`; `u = 1` maps to zero.
pub fn sample_exponential(p: &ExponentialParams, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u <= 1.0);
    // -0.0 at u = 1; normalise so callers never see a negative zero.
    (-p.mean * u.ln()).max(0.0)
}

pub fn sample_bernoulli(prob: f64, u: f64) -> bool {
    u < prob
}

/// Integer uniform on `lo..=hi`.
pub fn sample_uniform_int(lo: u32, hi: u32, u: f64) -> u32 {
    debug_assert!(lo <= hi);
    let span = f64::from(hi - lo) + 1.0;
    let k = (f64::from(lo) + u * span).floor();
    (k as u32).clamp(lo, hi)
}
