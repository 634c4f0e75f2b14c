use crate::error::{Error, Result};

/// Uniform one-dimensional grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// The last point is pinned to `x_max` so that walls land exactly on it.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Trapezoid weight of point `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    /// Same point count, new bounds.
    pub fn with_bounds(&self, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(x_min, x_max, self.n_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_endpoints() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(10), 1.0);
        assert_eq!(g.points().len(), 11);
    }

    #[test]
    fn rejects_bad_bounds_and_sizes() {
        assert!(Grid::new(1.0, 1.0, 16).is_err());
        assert!(Grid::new(2.0, 1.0, 16).is_err());
        assert!(Grid::new(0.0, 1.0, 7).is_err());
    }
}
