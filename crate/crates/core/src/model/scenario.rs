use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ModelError;

/// A finite discretization of a compact uncertainty set.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSet {
    label: String,
    dim: usize,
    points: Vec<Vec<f64>>,
}

/// `(cos t, sin t)` with components below 1e-15 snapped to zero, so axis
/// angles land exactly on the axes.
pub(crate) fn unit_angle(t: f64) -> [f64; 2] {
    let snap = |c: f64| if libm::fabs(c) < 1e-15 { 0.0 } else { c };
    [snap(libm::cos(t)), snap(libm::sin(t))]
}

impl ScenarioSet {
    /// Validates dimensions and removes exact duplicates, keeping first
    /// occurrences in order.
    pub fn new(label: &str, dim: usize, points: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::EmptyScenarioSet(label.to_string()));
        }
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != dim {
                return Err(ModelError::DimensionMismatch(alloc::format!(
                    "scenario set `{label}` expects points of dimension {dim}, got {}",
                    p.len()
                )));
            }
            let dup = kept
                .iter()
                .any(|k| k.iter().zip(&p).all(|(a, b)| a.to_bits() == b.to_bits()));
            if !dup {
                kept.push(p);
            }
        }
        Ok(ScenarioSet { label: label.to_string(), dim, points: kept })
    }

    /// One scenario at the origin of `R^dim`.
    pub fn singleton(dim: usize) -> Self {
        ScenarioSet { label: "single".to_string(), dim, points: alloc::vec![alloc::vec![0.0; dim]] }
    }

    /// Closed ball of radius `r` about the origin: `n` boundary points, a
    /// sparser inner ring and the center.
    pub fn ball(label: &str, q: usize, r: f64, n: usize) -> Result<Self, ModelError> {
        let mut pts = Vec::new();
        match q {
            0 => pts.push(Vec::new()),
            1 => {
                for c in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    pts.push(alloc::vec![c * r]);
                }
            }
            2 => {
                let n = n.max(4);
                for k in 0..n {
                    let u = unit_angle(2.0 * core::f64::consts::PI * k as f64 / n as f64);
                    pts.push(alloc::vec![r * u[0], r * u[1]]);
                }
                let m = (n / 4).max(4);
                for k in 0..m {
                    let u = unit_angle(2.0 * core::f64::consts::PI * k as f64 / m as f64);
                    pts.push(alloc::vec![0.5 * r * u[0], 0.5 * r * u[1]]);
                }
                pts.push(alloc::vec![0.0, 0.0]);
            }
            _ => {
                for p in crate::convgeo::fibonacci_sphere(q, n.max(2 * q)) {
                    pts.push(p.iter().map(|c| r * c).collect());
                }
                pts.push(alloc::vec![0.0; q]);
            }
        }
        Self::new(label, q, pts)
    }

    /// Tensor grid over `[lo, hi]^q` with `steps` intervals per axis.
    pub fn box_grid(label: &str, q: usize, lo: f64, hi: f64, steps: usize) -> Result<Self, ModelError> {
        let steps = steps.max(1);
        let total = (steps + 1).pow(q as u32);
        let mut pts = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut p = alloc::vec![0.0; q];
            for c in p.iter_mut() {
                let k = idx % (steps + 1);
                idx /= steps + 1;
                *c = lo + (hi - lo) * k as f64 / steps as f64;
            }
            pts.push(p);
        }
        Self::new(label, q, pts)
    }

    /// Planar box `[lo0,hi0] x [lo1,hi1]`: `per_edge` points along each edge
    /// plus an `interior x interior` grid strictly inside.
    pub fn box_boundary(label: &str, lo: [f64; 2], hi: [f64; 2], per_edge: usize, interior: usize) -> Result<Self, ModelError> {
        let mut pts = Vec::new();
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        for k in 0..per_edge {
            let t = k as f64 / per_edge as f64;
            pts.push(alloc::vec![lerp(lo[0], hi[0], t), lo[1]]);
            pts.push(alloc::vec![hi[0], lerp(lo[1], hi[1], t)]);
            pts.push(alloc::vec![lerp(hi[0], lo[0], t), hi[1]]);
            pts.push(alloc::vec![lo[0], lerp(hi[1], lo[1], t)]);
        }
        for i in 1..=interior {
            for j in 1..=interior {
                let s = i as f64 / (interior + 1) as f64;
                let t = j as f64 / (interior + 1) as f64;
                pts.push(alloc::vec![lerp(lo[0], hi[0], s), lerp(lo[1], hi[1], t)]);
            }
        }
        Self::new(label, 2, pts)
    }

    /// Unit-disk sector union: boundary arcs over the given angle ranges
    /// (radians), the bounding radii, a few interior points and the center.
    pub fn disk_sectors(label: &str, ranges: &[(f64, f64)], density: usize) -> Result<Self, ModelError> {
        let span: f64 = ranges.iter().map(|(a, b)| b - a).sum();
        let mut pts = Vec::new();
        pts.push(alloc::vec![0.0, 0.0]);
        for &(a, b) in ranges {
            let k = (libm::round(density as f64 * (b - a) / span) as usize).max(2);
            for i in 0..=k {
                let u = unit_angle(a + (b - a) * i as f64 / k as f64);
                pts.push(alloc::vec![u[0], u[1]]);
            }
            for t in [a, b] {
                let u = unit_angle(t);
                for r in [0.2, 0.4, 0.6, 0.8] {
                    pts.push(alloc::vec![r * u[0], r * u[1]]);
                }
            }
            for i in 1..4 {
                let u = unit_angle(a + (b - a) * i as f64 / 4.0);
                pts.push(alloc::vec![0.5 * u[0], 0.5 * u[1]]);
            }
        }
        Self::new(label, 2, pts)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Union with another set of the same dimension (duplicates dropped).
    pub fn union(&self, other: &ScenarioSet) -> Result<Self, ModelError> {
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        Self::new(&self.label, self.dim, pts)
    }
}
