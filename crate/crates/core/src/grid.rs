//! Uniform sampling specifications over the `(s, t)` parameter plane and the
//! ruling parameter `r`.

use serde::{Deserialize, Serialize};

/// Uniform samples along one coordinate.
///
/// A closed axis includes both endpoints. A periodic axis covers
/// `[min, max)` and omits the right endpoint, which duplicates `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn closed(min: f64, max: f64, n: usize) -> Self {
        Self {
            min,
            max,
            n,
            periodic: false,
        }
    }

    pub fn periodic(start: f64, period: f64, n: usize) -> Self {
        Self {
            min: start,
            max: start + period,
            n,
            periodic: true,
        }
    }

    pub fn step(&self) -> f64 {
        match (self.periodic, self.n) {
            (_, 0) => 0.0,
            (true, n) => (self.max - self.min) / n as f64,
            (false, 1) => 0.0,
            (false, n) => (self.max - self.min) / (n - 1) as f64,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if !self.periodic && self.n > 1 && i == self.n - 1 {
            return self.max;
        }
        self.min + i as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// Tensor grid over the `(s, t)` plane, row-major in `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub s: Axis,
    pub t: Axis,
}

impl Grid2 {
    pub fn new(s: Axis, t: Axis) -> Self {
        Self { s, t }
    }

    /// `n × m` closed grid on `[s0, s1] × [t0, t1]`.
    pub fn rect(s: (f64, f64), t: (f64, f64), n: usize, m: usize) -> Self {
        Self::new(Axis::closed(s.0, s.1, n), Axis::closed(t.0, t.1, m))
    }

    pub fn len(&self) -> usize {
        self.s.n * self.t.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row `i` of the grid: all `(s_i, t_j)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let s = self.s.point(i);
        (0..self.t.n).map(move |j| (s, self.t.point(j)))
    }
}

/// Tensor grid over `(s, t)` with an explicit list of ruling parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub s: Axis,
    pub t: Axis,
    pub r: Vec<f64>,
}

impl Grid3 {
    pub fn new(plane: Grid2, r: Vec<f64>) -> Self {
        Self {
            s: plane.s,
            t: plane.t,
            r,
        }
    }

    /// `n` values evenly spaced in `[r_min, r_max]`, mirrored to negative
    /// `r` when `symmetric` is set.
    pub fn r_values(r_min: f64, r_max: f64, n: usize, symmetric: bool) -> Vec<f64> {
        let pos = Axis::closed(r_min, r_max, n).points();
        if symmetric {
            let mut out: Vec<f64> = pos.iter().rev().map(|r| -r).collect();
            out.extend(pos);
            out
        } else {
            pos
        }
    }

    pub fn plane(&self) -> Grid2 {
        Grid2::new(self.s, self.t)
    }

    pub fn len(&self) -> usize {
        self.plane().len() * self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
