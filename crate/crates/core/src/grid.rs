use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;

/// A uniform midpoint grid over one period square of a doubly periodic domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nr: usize,
    pub ntheta: usize,
    /// Points where `|λ(ρ)|` or `|σ(r)|` fall below this are excluded.
    pub pole_margin: f64,
    pub tolerance_harmonic: f64,
    pub tolerance_biharmonic: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nr: 128,
            ntheta: 128,
            pole_margin: 1e-3,
            tolerance_harmonic: 1e-9,
            tolerance_biharmonic: 1e-8,
        }
    }
}

impl GridSpec {
    pub fn new(nr: usize, ntheta: usize) -> Result<Self> {
        let grid = Self {
            nr,
            ntheta,
            ..Self::default()
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_tolerances(mut self, harmonic: f64, biharmonic: f64) -> Result<Self> {
        self.tolerance_harmonic = harmonic;
        self.tolerance_biharmonic = biharmonic;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nr < 8 || self.ntheta < 8 {
            return Err(Error::invalid(format!(
                "grid needs at least 8x8 points, got {}x{}",
                self.nr, self.ntheta
            )));
        }
        if !(self.pole_margin > 0.0) {
            return Err(Error::invalid("pole margin must be positive"));
        }
        if !(self.tolerance_harmonic > 0.0 && self.tolerance_biharmonic > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }

    /// Step sizes `(Δr, Δθ)` on `domain`.
    pub fn steps(&self, domain: &WarpedSurface) -> Result<(f64, f64)> {
        let (pt, ps) = domain.periods()?;
        Ok((pt / self.nr as f64, ps / self.ntheta as f64))
    }

    pub fn cell_area(&self, domain: &WarpedSurface) -> Result<f64> {
        let (dr, dt) = self.steps(domain)?;
        Ok(dr * dt)
    }

    /// Midpoint nodes, row-major in `r`.
    pub fn nodes(&self, domain: &WarpedSurface) -> Result<Vec<(f64, f64)>> {
        let (dr, dt) = self.steps(domain)?;
        Ok((0..self.nr)
            .flat_map(|i| {
                (0..self.ntheta).map(move |j| ((i as f64 + 0.5) * dr, (j as f64 + 0.5) * dt))
            })
            .collect())
    }

    /// Maximum of `f` over the grid. `f` returns `None` for excluded points.
    ///
    /// Scanning stops once a value `>= cutoff` is seen; the returned value is
    /// then a lower bound on the true maximum that is itself `>= cutoff`.
    pub fn max_over<F>(&self, domain: &WarpedSurface, cutoff: f64, f: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> Result<Option<f64>> + Sync,
    {
        self.validate()?;
        let (dr, dt) = self.steps(domain)?;
        let done = AtomicBool::new(false);
        let rows = (0..self.nr)
            .into_par_iter()
            .map(|i| -> Result<Option<f64>> {
                if done.load(Ordering::Relaxed) {
                    return Ok(None);
                }
                let r = (i as f64 + 0.5) * dr;
                let mut best: Option<f64> = None;
                for j in 0..self.ntheta {
                    let theta = (j as f64 + 0.5) * dt;
                    if let Some(v) = f(r, theta)? {
                        let v = if v.is_nan() { f64::INFINITY } else { v };
                        best = Some(best.map_or(v, |b: f64| b.max(v)));
                        if v >= cutoff {
                            done.store(true, Ordering::Relaxed);
                            break;
                        }
                    }
                }
                Ok(best)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.into_iter()
            .flatten()
            .reduce(f64::max)
            .ok_or(Error::EmptyGrid)
    }

    /// Midpoint-rule integral of `f` over the period square. Rows are summed
    /// in a fixed order so the result is reproducible.
    pub fn integrate<F>(&self, domain: &WarpedSurface, f: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        self.validate()?;
        let (dr, dt) = self.steps(domain)?;
        let rows = (0..self.nr)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let r = (i as f64 + 0.5) * dr;
                let mut sum = 0.0;
                for j in 0..self.ntheta {
                    sum += f(r, (j as f64 + 0.5) * dt)?;
                }
                Ok(sum)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rows.iter().sum::<f64>() * dr * dt)
    }
}
