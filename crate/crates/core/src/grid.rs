use crate::error::{Error, Result};

/// Strictly increasing simulation times starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `steps` equal steps on `[0, horizon]`. A zero horizon yields the single
    /// point `0`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(Error::invalid(
                "horizon",
                format!("must be finite and >= 0, got {horizon}"),
            ));
        }
        if steps == 0 {
            return Err(Error::invalid("steps", "must be positive"));
        }
        if horizon == 0.0 {
            return Ok(Self { times: vec![0.0] });
        }
        let h = horizon / steps as f64;
        let mut times: Vec<f64> = (0..steps).map(|i| i as f64 * h).collect();
        times.push(horizon);
        Ok(Self { times })
    }

    /// Uniform grid on `[0, horizon]` refined with extra points (which may lie
    /// beyond the horizon). Duplicates are merged.
    pub fn uniform_with_points(horizon: f64, steps: usize, extra: &[f64]) -> Result<Self> {
        let mut times = Self::uniform(horizon, steps)?.times;
        for &p in extra {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::invalid(
                    "t",
                    format!("grid point must be finite and >= 0, got {p}"),
                ));
            }
            times.push(p);
        }
        Self::from_times(times)
    }

    /// Sorts, deduplicates and validates the given times; `0` is added if
    /// missing.
    pub fn from_times(mut times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("t", "grid times must be finite and >= 0"));
        }
        times.push(0.0);
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid holds at least t = 0")
    }

    /// Index of the grid point equal to `t` (up to rounding).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        index_of(&self.times, t)
    }
}

pub(crate) fn index_of(times: &[f64], t: f64) -> Option<usize> {
    let tol = 1e-12 * t.abs().max(1.0);
    let i = times.partition_point(|&s| s < t - tol);
    (i < times.len() && (times[i] - t).abs() <= tol).then_some(i)
}
