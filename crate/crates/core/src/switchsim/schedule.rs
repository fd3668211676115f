use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;

/// Tolerance when checking interval lengths against the dwell floor.
const DWELL_TOL: f64 = 1e-12;

/// Piecewise-constant switching signal on `[t_0, horizon]`.
///
/// Interval `k` is `[t_k, t_{k+1})` with graph `modes[k]` (0-based); the last
/// interval ends at the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    switch_times: Vec<f64>,
    modes: Vec<usize>,
    dwell_floor: f64,
    horizon: f64,
}

/// One dwell interval of a schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub mode: usize,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

impl Schedule {
    /// Explicit schedule. Without `dwell_floor`, the floor is the shortest
    /// complete interval (the final one may be cut short by the horizon).
    pub fn new(
        switch_times: Vec<f64>,
        modes: Vec<usize>,
        dwell_floor: Option<f64>,
        horizon: f64,
    ) -> Result<Self, SimError> {
        if switch_times.is_empty() || switch_times.len() != modes.len() {
            return Err(SimError::Schedule(format!(
                "{} switch times for {} modes",
                switch_times.len(),
                modes.len()
            )));
        }
        if switch_times.iter().any(|t| !t.is_finite()) || !horizon.is_finite() {
            return Err(SimError::Schedule("times must be finite".into()));
        }
        if switch_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::Schedule("switch times must be strictly increasing".into()));
        }
        let last = *switch_times.last().unwrap();
        if horizon <= last {
            return Err(SimError::Schedule(format!(
                "horizon {horizon} must exceed the last switch time {last}"
            )));
        }
        let shortest = switch_times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let shortest = if shortest.is_finite() {
            shortest
        } else {
            horizon - switch_times[0]
        };
        let dwell_floor = match dwell_floor {
            Some(f) if !(f > 0.0 && f.is_finite()) => {
                return Err(SimError::Schedule(format!("dwell floor must be positive, got {f}")))
            }
            Some(f) if shortest < f - DWELL_TOL => {
                return Err(SimError::Schedule(format!(
                    "an interval of length {shortest} violates the dwell floor {f}"
                )))
            }
            Some(f) => f,
            None => shortest,
        };
        Ok(Self {
            switch_times,
            modes,
            dwell_floor,
            horizon,
        })
    }

    /// A single graph held over `[0, horizon]`.
    pub fn constant(mode: usize, horizon: f64) -> Result<Self, SimError> {
        Self::new(vec![0.0], vec![mode], None, horizon)
    }

    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn dwell_floor(&self) -> f64 {
        self.dwell_floor
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn start(&self) -> f64 {
        self.switch_times[0]
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn intervals(&self) -> Vec<Interval> {
        (0..self.len())
            .map(|k| Interval {
                start: self.switch_times[k],
                end: self.switch_times.get(k + 1).copied().unwrap_or(self.horizon),
                mode: self.modes[k],
            })
            .collect()
    }

    /// Active mode at `t`, or `None` outside `[t_0, horizon]`.
    pub fn mode_at(&self, t: f64) -> Option<usize> {
        if t < self.start() || t > self.horizon {
            return None;
        }
        let k = self.switch_times.partition_point(|&s| s <= t);
        Some(self.modes[k.saturating_sub(1)])
    }

    /// Errors unless every mode indexes into a family of `family_size` graphs.
    pub fn check_modes(&self, family_size: usize) -> Result<(), SimError> {
        match self.modes.iter().find(|&&m| m >= family_size) {
            Some(&mode) => Err(SimError::IndexMismatch { mode, family_size }),
            None => Ok(()),
        }
    }
}

/// Random schedule: dwell times i.i.d. uniform on `[low, high]`, modes i.i.d.
/// uniform on `0..v`, reproducible from `seed`.
pub fn generate_schedule(
    seed: u64,
    v: usize,
    low: f64,
    high: f64,
    horizon: f64,
) -> Result<Schedule, SimError> {
    if !(low > 0.0 && low <= high && high.is_finite()) {
        return Err(SimError::InvalidDwell { low, high });
    }
    if v == 0 {
        return Err(SimError::EmptyFamily);
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SimError::Schedule(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::new();
    let mut modes = Vec::new();
    let mut t = 0.0;
    while t < horizon {
        times.push(t);
        modes.push(rng.gen_range(0..v));
        t += rng.gen_range(low..=high);
    }
    Ok(Schedule {
        switch_times: times,
        modes,
        dwell_floor: low,
        horizon,
    })
}
