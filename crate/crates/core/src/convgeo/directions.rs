use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{normalize, Point};
use crate::model::Config;

/// Deterministic unit directions: `n_dir_2d` equispaced angles in the plane
/// (axes hit exactly), a Fibonacci sphere in 3-D, and axes plus a Kronecker
/// sequence in higher dimensions.
pub fn canonical_directions(n: usize, cfg: &Config) -> Vec<Point> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![alloc::vec![1.0], alloc::vec![-1.0]],
        2 => (0..cfg.n_dir_2d).map(|k| angle_dir(2.0 * PI * k as f64 / cfg.n_dir_2d as f64)).collect(),
        _ => {
            let count = if n == 3 { cfg.n_dir_3d } else { cfg.n_dir_3d.max(200 * n) };
            fibonacci_sphere(n, count)
        }
    }
}

/// `(cos t, sin t)` with tiny components snapped to zero.
pub fn angle_dir(t: f64) -> Point {
    let snap = |c: f64| if libm::fabs(c) < 1e-15 { 0.0 } else { c };
    alloc::vec![snap(libm::cos(t)), snap(libm::sin(t))]
}

/// Angle of a planar vector in `[0, 2pi)`.
pub fn angle_of(d: &[f64]) -> f64 {
    let a = libm::atan2(d[1], d[0]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Roughly uniform unit vectors. In 3-D the classic golden-angle spiral plus
/// the six axis directions; otherwise axes plus a normalized Kronecker
/// sequence pushed through an inverse-normal map.
pub fn fibonacci_sphere(n: usize, count: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        let mut e = alloc::vec![0.0; n];
        e[i] = 1.0;
        out.push(e.clone());
        e[i] = -1.0;
        out.push(e);
    }
    if n == 3 {
        let golden = PI * (3.0 - libm::sqrt(5.0));
        for i in 0..count {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let t = golden * i as f64;
            out.push(alloc::vec![r * libm::cos(t), r * libm::sin(t), z]);
        }
        return out;
    }
    let alphas = kronecker_alphas(n);
    for i in 1..=count {
        let p: Vec<f64> = alphas
            .iter()
            .map(|a| {
                let u = (0.5 + a * i as f64) % 1.0;
                inverse_normal(u.clamp(1e-9, 1.0 - 1e-9))
            })
            .collect();
        if let Some(u) = normalize(&p) {
            out.push(u);
        }
    }
    out
}

/// Generalized golden-ratio increments for an `n`-dimensional R-sequence.
pub fn kronecker_alphas(n: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = libm::pow(1.0 + phi, 1.0 / (n as f64 + 1.0));
    }
    (1..=n).map(|k| libm::pow(1.0 / phi, k as f64) % 1.0).collect()
}

/// Acklam's rational approximation of the standard normal quantile.
pub fn inverse_normal(p: f64) -> f64 {
    const A: [f64; 6] = [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.383_577_518_672_69e2, -3.066479806614716e1, 2.506628277459239];
    const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < 0.02425 {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p > 1.0 - 0.02425 {
        -tail(libm::sqrt(-2.0 * libm::log(1.0 - p)))
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_directions_hit_axes() {
        let d = canonical_directions(2, &Config::default());
        assert_eq!(d.len(), 360);
        assert_eq!(d[90], alloc::vec![0.0, 1.0]);
        assert_eq!(d[180], alloc::vec![-1.0, 0.0]);
    }

    #[test]
    fn sphere_points_are_unit() {
        for n in [3, 4] {
            for p in fibonacci_sphere(n, 100) {
                assert!((crate::linalg::norm(&p) - 1.0).abs() < 1e-12);
            }
        }
    }
}
