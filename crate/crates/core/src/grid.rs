//! One-dimensional spatial grids.
//!
//! [`Grid`] holds sample coordinates (where densities are evaluated),
//! [`Bins`] holds bin edges (where events are counted).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed spatial interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

impl Region {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::domain(format!("region [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Self { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Strictly increasing, non-empty list of sample coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("grid is empty"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("grid contains a non-finite coordinate"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid coordinates are not strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `n` points spanning `[lo, hi]` inclusive.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 1 {
            return Self::new(vec![lo]);
        }
        if n == 0 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::domain(format!("cannot build a {n}-point grid on [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        points[n - 1] = hi;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for Grid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Grid::new(points)
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Self {
        g.points
    }
}

/// Histogram bins given by strictly increasing edges. The last bin is closed
/// on the right so that the full interval `[edges[0], edges[n]]` is covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Bins {
    edges: Vec<f64>,
}

impl Bins {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::domain("bins need at least two edges"));
        }
        Grid::new(edges.clone())?;
        Ok(Self { edges })
    }

    pub fn uniform(region: Region, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("bins: zero bins requested"));
        }
        let edges = Grid::uniform(region.lo, region.hi, n + 1)?;
        Self::from_edges(edges.into())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn region(&self) -> Region {
        Region {
            lo: self.lo(),
            hi: self.hi(),
        }
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Index of the bin containing `x`, or `None` outside `[lo, hi]`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        // first edge strictly greater than x
        let k = self.edges.partition_point(|&e| e <= x);
        Some(k.saturating_sub(1).min(self.len() - 1))
    }

    pub fn covers(&self, region: Region) -> bool {
        self.lo() <= region.lo && self.hi() >= region.hi
    }
}

impl TryFrom<Vec<f64>> for Bins {
    type Error = Error;

    fn try_from(edges: Vec<f64>) -> Result<Self> {
        Bins::from_edges(edges)
    }
}

impl From<Bins> for Vec<f64> {
    fn from(b: Bins) -> Self {
        b.edges
    }
}
