//! Grid-exact simulation of the spider: radial part, local time and labels.
//!
//! The radial part started at `x0` is built from a driving Brownian motion
//! `Y` (optionally drifted) with running maximum `S`:
//!
//! ```text
//! X = max(x0, S) - Y,    L = (S - x0)+
//! ```
//!
//! Before `S` reaches `x0` this is the free motion `x0 - Y`; afterwards it is
//! the Skorokhod reflection of that motion with `L` as regulator. At the grid
//! points `Y` is sampled from exact Gaussian increments and `S` from exact
//! bridge maxima, so the joint law of `(X, L)` at grid times carries no
//! discretisation error. A step "touched zero" exactly when `L` increased.

use rand::Rng;

use crate::bridge::{normal, sample_bridge_max};
use crate::error::{ensure_finite, ensure_nonnegative, Error, Result};
use crate::grid::{self, TimeGrid};
use crate::rng::{map_paths, PathRng};
use crate::space::{Ray, RaySpace, SpiderPoint};

/// Radial part and local time at grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSeries {
    pub times: Vec<f64>,
    pub radial: Vec<f64>,
    pub local_time: Vec<f64>,
    /// `touched_zero[i]`: the radial part visited zero during `(t_{i-1}, t_i]`.
    /// Always `false` at index 0.
    pub touched_zero: Vec<bool>,
}

impl RadialSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Reflected Brownian motion from `x0` with its local time at zero on a
/// uniform grid of `steps` steps over `[0, horizon]`.
pub fn simulate_radial_with_local_time<R: Rng + ?Sized>(
    x0: f64,
    horizon: f64,
    steps: usize,
    rng: &mut R,
) -> Result<RadialSeries> {
    ensure_nonnegative("x0", x0)?;
    let grid = TimeGrid::uniform(horizon, steps)?;
    Ok(reflected_on_grid(x0, 0.0, grid.times(), rng))
}

/// Same construction on arbitrary grid times, with a drift `drift` on the
/// driving motion `Y`. The radial part then has drift `-drift` away from the
/// origin: a positive drift gives the bang-bang process.
pub fn reflected_on_grid<R: Rng + ?Sized>(
    x0: f64,
    drift: f64,
    times: &[f64],
    rng: &mut R,
) -> RadialSeries {
    let n = times.len();
    let mut radial = Vec::with_capacity(n);
    let mut local_time = Vec::with_capacity(n);
    let mut touched_zero = Vec::with_capacity(n);
    radial.push(x0);
    local_time.push(0.0);
    touched_zero.push(false);

    let (mut y, mut s) = (0.0f64, 0.0f64);
    for w in times.windows(2) {
        let h = w[1] - w[0];
        let inc = drift * h + h.sqrt() * normal(rng);
        let top = y + sample_bridge_max(inc, h, rng);
        y += inc;
        s = s.max(top);
        let l = (s - x0).max(0.0);
        let prev = *local_time.last().expect("nonempty");
        touched_zero.push(l > prev);
        local_time.push(l);
        radial.push((x0.max(s) - y).max(0.0));
    }
    RadialSeries {
        times: times.to_vec(),
        radial,
        local_time,
        touched_zero,
    }
}

/// Assigns one ray per excursion: a fresh draw from `mu` at every step that
/// touched zero, otherwise the previous label. Before the first visit to zero
/// the path stays on `start_ray` when it starts away from the origin. A point
/// at the origin carries the label of the excursion that follows it.
pub fn label_excursions<R: Rng + ?Sized>(
    series: &RadialSeries,
    space: &RaySpace,
    start_ray: Ray,
    rng: &mut R,
) -> Vec<Ray> {
    let n = series.len();
    let mut labels = Vec::with_capacity(n);
    if n == 0 {
        return labels;
    }
    let from_origin = series.radial[0] == 0.0;
    let mut current = if from_origin {
        space.sample(rng)
    } else {
        start_ray
    };
    labels.push(current);
    for i in 1..n {
        if series.touched_zero[i] {
            current = space.sample(rng);
        }
        labels.push(current);
    }
    if from_origin && n > 1 && series.touched_zero[1] {
        labels[0] = labels[1];
    }
    labels
}

/// A discretised spider trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiderPath {
    pub times: Vec<f64>,
    pub radial: Vec<f64>,
    pub label: Vec<Ray>,
    pub local_time: Vec<f64>,
    pub touched_zero: Vec<bool>,
}

impl SpiderPath {
    pub fn from_parts(series: RadialSeries, label: Vec<Ray>) -> Self {
        debug_assert_eq!(series.len(), label.len());
        Self {
            times: series.times,
            radial: series.radial,
            label,
            local_time: series.local_time,
            touched_zero: series.touched_zero,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, i: usize) -> SpiderPoint {
        SpiderPoint {
            radius: self.radial[i],
            ray: self.label[i],
        }
    }

    pub fn last(&self) -> SpiderPoint {
        self.point(self.len() - 1)
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        grid::index_of(&self.times, t)
    }

    /// The path restricted to `[0, s]`; `s` must be a grid time.
    pub fn prefix(&self, s: f64) -> Result<PathPrefix<'_>> {
        let i = self
            .index_of(s)
            .ok_or(Error::HorizonNotOnGrid { horizon: s })?;
        Ok(self.prefix_at(i))
    }

    pub fn prefix_at(&self, i: usize) -> PathPrefix<'_> {
        let end = i + 1;
        PathPrefix {
            times: &self.times[..end],
            radial: &self.radial[..end],
            label: &self.label[..end],
            local_time: &self.local_time[..end],
            touched_zero: &self.touched_zero[..end],
        }
    }

    /// Whether the radial part visited zero during `(a, b]`, at grid
    /// resolution.
    pub fn touched_zero_between(&self, a: f64, b: f64) -> bool {
        self.times
            .iter()
            .zip(&self.touched_zero)
            .any(|(&t, &z)| z && t > a && t <= b)
    }
}

/// Read-only view of a path up to some grid time; functionals only ever see
/// this, which keeps them adapted.
#[derive(Debug, Clone, Copy)]
pub struct PathPrefix<'a> {
    pub times: &'a [f64],
    pub radial: &'a [f64],
    pub label: &'a [Ray],
    pub local_time: &'a [f64],
    pub touched_zero: &'a [bool],
}

impl PathPrefix<'_> {
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("prefix holds t = 0")
    }

    pub fn radius(&self) -> f64 {
        *self.radial.last().expect("prefix holds t = 0")
    }

    pub fn ray(&self) -> Ray {
        *self.label.last().expect("prefix holds t = 0")
    }

    pub fn local_time(&self) -> f64 {
        *self.local_time.last().expect("prefix holds t = 0")
    }
}

/// Spider from `start` on a uniform grid over `[0, horizon]`.
pub fn simulate_spider<R: Rng + ?Sized>(
    space: &RaySpace,
    start: SpiderPoint,
    horizon: f64,
    steps: usize,
    rng: &mut R,
) -> Result<SpiderPath> {
    let sim = SpiderSimulator::new(space.clone(), TimeGrid::uniform(horizon, steps)?);
    sim.simulate(start, rng)
}

/// Immutable simulator bound to a ray space and a time grid.
#[derive(Debug, Clone)]
pub struct SpiderSimulator {
    space: RaySpace,
    grid: TimeGrid,
}

impl SpiderSimulator {
    pub fn new(space: RaySpace, grid: TimeGrid) -> Self {
        Self { space, grid }
    }

    pub fn space(&self) -> &RaySpace {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn simulate<R: Rng + ?Sized>(&self, start: SpiderPoint, rng: &mut R) -> Result<SpiderPath> {
        ensure_nonnegative("radius", start.radius)?;
        self.space.check(start.ray)?;
        let series = reflected_on_grid(start.radius, 0.0, self.grid.times(), rng);
        let labels = label_excursions(&series, &self.space, start.ray, rng);
        Ok(SpiderPath::from_parts(series, labels))
    }

    /// `n_paths` independent paths; path `i` uses substream `(seed, stream, i)`.
    pub fn simulate_many(
        &self,
        start: SpiderPoint,
        seed: u64,
        stream: u64,
        n_paths: usize,
    ) -> Result<Vec<SpiderPath>> {
        ensure_finite("radius", start.radius)?;
        self.space.check(start.ray)?;
        map_paths(seed, stream, n_paths, |_, rng: &mut PathRng| {
            self.simulate(start, rng)
        })
        .into_iter()
        .collect()
    }
}
