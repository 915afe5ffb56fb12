//! Fields sampled on a uniform time grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, RadialGrid};

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    step: f64,
    count: usize,
}

impl TimeGrid {
    /// Uniform grid with `count ≥ 2` samples covering `[t_start, t_max]`.
    pub fn uniform(t_start: f64, t_max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(t_max > t_start) {
            return Err(Error::InvalidArgument(format!(
                "time grid [{t_start}, {t_max}] with {count} samples"
            )));
        }
        Ok(TimeGrid {
            t_start,
            step: (t_max - t_start) / (count - 1) as f64,
            count,
        })
    }

    /// Grid starting at `t_start` with spacing at most `max_step`.
    pub fn with_max_step(t_start: f64, t_max: f64, max_step: f64) -> Result<Self> {
        let count = ((t_max - t_start) / max_step).ceil() as usize + 1;
        Self::uniform(t_start, t_max, count.max(2))
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.count - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_start + n as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|n| self.time(n)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must increase".into()));
        }
        if let Some(first) = fields.first() {
            for f in &fields[1..] {
                first.ensure_same_grid(f)?;
            }
        }
        Ok(Trajectory { times, fields })
    }

    pub fn on_grid(tg: &TimeGrid, fields: Vec<Field>) -> Result<Self> {
        Self::new(tg.times(), fields)
    }

    pub fn zeros(tg: &TimeGrid, grid: &Arc<RadialGrid>) -> Self {
        Trajectory {
            times: tg.times(),
            fields: vec![Field::zeros(grid); tg.len()],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> Option<&Arc<RadialGrid>> {
        self.fields.first().map(Field::grid)
    }

    pub fn map(&self, f: impl Fn(f64, &Field) -> Field) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            fields: self
                .times
                .iter()
                .zip(&self.fields)
                .map(|(&t, u)| f(t, u))
                .collect(),
        }
    }

    pub fn zip_map(&self, other: &Trajectory, f: impl Fn(&Field, &Field) -> Field) -> Trajectory {
        assert_eq!(self.len(), other.len(), "trajectory lengths differ");
        Trajectory {
            times: self.times.clone(),
            fields: self
                .fields
                .iter()
                .zip(&other.fields)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Trajectory) -> Trajectory {
        self.zip_map(other, |a, b| a - b)
    }

    /// Linear interpolation in time; `None` outside the sampled window.
    pub fn sample(&self, t: f64) -> Option<Field> {
        let n = self.times.len();
        let (t0, t1) = (self.times[0], self.times[n - 1]);
        let eps = 1e-12 * (t1 - t0).abs().max(1.0);
        if t < t0 - eps || t > t1 + eps {
            return None;
        }
        let idx = self.times.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (ta, tb) = (self.times[idx - 1], self.times[idx]);
        let theta = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let a = &self.fields[idx - 1];
        let b = &self.fields[idx];
        Some(a.zip_map(b, |x, y| (1.0 - theta) * x + theta * y))
    }
}
