//! Reproducible families of smooth radial test fields.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::{Field, RadialGrid};

/// Sums of one to four Gaussians with random centers, widths and signs,
/// multiplied by `(1 - (r/R)^2)^3` so that each field and its first two
/// derivatives vanish at `R`. Widths are kept at least ten grid spacings.
pub fn smooth_bump_suite(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = grid.radius();
    let min_width = (10.0 * grid.spacing()).max(0.02 * radius);
    let max_width = (0.15 * radius).max(2.0 * min_width);
    (0..count)
        .map(|_| {
            let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=4))
                .map(|_| {
                    let center = rng.random_range(0.0..0.6 * radius);
                    let width = rng.random_range(min_width..max_width);
                    let amp = rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (center, width, amp)
                })
                .collect();
            Field::from_fn(grid, |r| {
                let sum: f64 = bumps
                    .iter()
                    .map(|&(c, w, a)| a * (-0.5 * ((r - c) / w).powi(2)).exp())
                    .sum();
                envelope(r, radius) * sum
            })
        })
        .collect()
}

fn envelope(r: f64, radius: f64) -> f64 {
    (1.0 - (r / radius).powi(2)).powi(3)
}

/// One enveloped Gaussian bump.
pub fn gaussian_bump(grid: &Arc<RadialGrid>, center: f64, width: f64) -> Field {
    let radius = grid.radius();
    Field::from_fn(grid, |r| envelope(r, radius) * (-0.5 * ((r - center) / width).powi(2)).exp())
}

/// The ways a bump can leave every compact set of the function space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneration {
    /// Centered, width shrinking from 1 to four grid spacings.
    Concentration,
    /// Unit width, center moving from 0 to `0.6 R`.
    Translation,
    /// Centered, width growing from 1 to `0.15 R`.
    Dilation,
}

impl Degeneration {
    pub const ALL: [Degeneration; 3] = [Self::Concentration, Self::Translation, Self::Dilation];
}

/// `steps` bumps along `kind`, each paired with the parameter that tends to
/// infinity (`1/width`, `<center>` or `width`).
pub fn degenerating_family(grid: &Arc<RadialGrid>, kind: Degeneration, steps: usize) -> Vec<(f64, Field)> {
    let radius = grid.radius();
    let last = (steps - 1).max(1) as f64;
    (0..steps)
        .map(|i| {
            let t = i as f64 / last;
            match kind {
                Degeneration::Concentration => {
                    let w = (4.0 * grid.spacing()).powf(t);
                    (1.0 / w, gaussian_bump(grid, 0.0, w))
                }
                Degeneration::Translation => {
                    let c = 0.6 * radius * t;
                    ((1.0 + c * c).sqrt(), gaussian_bump(grid, c, 1.0))
                }
                Degeneration::Dilation => {
                    let w = (0.15 * radius).powf(t);
                    (w, gaussian_bump(grid, 0.0, w))
                }
            }
        })
        .collect()
}
