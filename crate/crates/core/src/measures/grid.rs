use crate::error::{Error, Result};

/// Equal-width partition of the compact domain `[omega_min, omega_max]` into
/// `m` cells, together with the matching probability levels.
///
/// Cell `j` (0-based) is `[edge(j), edge(j + 1)]` with node at its midpoint.
/// Probability level `k` is `(k + 1/2) / m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    omega_min: f64,
    omega_max: f64,
    m: usize,
}

impl Grid {
    pub fn new(omega_min: f64, omega_max: f64, m: usize) -> Result<Self> {
        if !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(Error::InvalidGrid("domain endpoints must be finite".into()));
        }
        if omega_min >= omega_max {
            return Err(Error::InvalidGrid(format!(
                "omega_min ({omega_min}) must be below omega_max ({omega_max})"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells, got {m}"
            )));
        }
        Ok(Self {
            omega_min,
            omega_max,
            m,
        })
    }

    /// The unit interval grid used by the simulation module.
    pub fn unit(m: usize) -> Result<Self> {
        Self::new(0.0, 1.0, m)
    }

    #[inline]
    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    #[inline]
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    /// Always false; a grid has at least two cells.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Length of the domain.
    #[inline]
    pub fn width(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    /// Common cell width `h`.
    #[inline]
    pub fn cell_width(&self) -> f64 {
        self.width() / self.m as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.omega_min + (j as f64 + 0.5) * self.cell_width()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.node(j)).collect()
    }

    /// Cell boundary `j` for `j` in `0..=m`; the outer edges are exact.
    #[inline]
    pub fn edge(&self, j: usize) -> f64 {
        if j == 0 {
            self.omega_min
        } else if j >= self.m {
            self.omega_max
        } else {
            self.omega_min + j as f64 * self.cell_width()
        }
    }

    #[inline]
    pub fn level(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.m as f64
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.level(k)).collect()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.omega_min && x <= self.omega_max
    }

    pub(crate) fn check_contains(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                value: x,
                omega_min: self.omega_min,
                omega_max: self.omega_max,
            })
        }
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.omega_min, self.omega_max)
    }

    /// Fractional node coordinate: `0.0` at the first node, `m - 1` at the last.
    #[inline]
    pub(crate) fn node_coordinate(&self, x: f64) -> f64 {
        (x - self.omega_min) / self.cell_width() - 0.5
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
