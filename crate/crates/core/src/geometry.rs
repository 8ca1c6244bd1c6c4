//! Closed-form invariants of the twisted graph spheres and their cones.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::params::LomseParams;

/// `Gamma(m / 2)` for a positive integer `m`, by the half-integer recursion.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "Gamma(0) is undefined");
    let (mut x, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = m as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit `n`-sphere in `R^{n+1}`.
pub fn unit_sphere_volume(n: u32) -> f64 {
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1)
}

/// Volume of the unit ball in `R^m`.
pub fn unit_ball_volume(m: u32) -> f64 {
    PI.powf(m as f64 / 2.0) / gamma_half(m + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanAngle {
    pub angle: f64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub cos_alpha: f64,
    pub volume_ratio: f64,
    pub jordan_angles: [JordanAngle; 3],
    pub slope_w: f64,
}

/// `(1 - p/n) / (1 - p/K)`, i.e. `cos^2 theta`.
fn cos2_theta(q: &LomseParams) -> f64 {
    let (n, p, kk) = (q.n as f64, q.p as f64, q.eigenvalue() as f64);
    (1.0 - p / n) / (1.0 - p / kk)
}

pub fn log_cos_alpha(q: &LomseParams) -> f64 {
    let (n, p, kk) = (q.n as f64, q.p as f64, q.eigenvalue() as f64);
    0.5 * cos2_theta(q).ln() + 0.5 * p * ((n - p) / (kk - p)).ln()
}

pub fn log_volume_ratio(q: &LomseParams) -> f64 {
    let (n, p, kk) = (q.n as f64, q.p as f64, q.eigenvalue() as f64);
    0.5 * p * (kk / n).ln() + 0.5 * (n - p) * cos2_theta(q).ln()
}

pub fn jordan_angles(q: &LomseParams) -> [JordanAngle; 3] {
    let (n, p, kk) = (q.n as f64, q.p as f64, q.eigenvalue() as f64);
    [
        JordanAngle {
            angle: ((n - p) / (kk - p)).sqrt().acos(),
            multiplicity: q.p,
        },
        JordanAngle {
            angle: cos2_theta(q).sqrt().acos(),
            multiplicity: 1,
        },
        JordanAngle {
            angle: 0.0,
            multiplicity: q.n - q.p,
        },
    ]
}

pub fn geometry_report(q: &LomseParams) -> GeometryReport {
    let lca = log_cos_alpha(q);
    GeometryReport {
        n: q.n,
        p: q.p,
        k: q.k,
        cos_alpha: lca.exp(),
        volume_ratio: log_volume_ratio(q).exp(),
        jordan_angles: jordan_angles(q),
        slope_w: (-lca).exp(),
    }
}

/// Volume of the minimal sphere `M_{f,theta}` in the unit sphere.
pub fn los_volume(q: &LomseParams) -> f64 {
    log_volume_ratio(q).exp() * unit_sphere_volume(q.n)
}

/// Pointwise volume factor `prod_j sqrt(cos^2 t + sin^2 t lambda_j^2)` for the LOMSE singular values.
pub fn volume_element(q: &LomseParams, theta: f64) -> f64 {
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let with_lambda = (c2 + s2 * q.lambda2()).sqrt().powi(q.p as i32);
    let without = c2.sqrt().powi((q.n - q.p) as i32);
    with_lambda * without
}

/// Relative discrepancy between the integrated volume element at `theta` and the closed-form volume.
pub fn volume_element_check(q: &LomseParams, theta: f64) -> f64 {
    let integrated = volume_element(q, theta) * unit_sphere_volume(q.n);
    let closed = los_volume(q);
    ((integrated - closed) / closed).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, enumerate_admissible};

    fn prm(n: u32, p: u32, k: u32) -> LomseParams {
        build_params(n, p, k, false).unwrap()
    }

    #[test]
    fn omega_constants() {
        assert!((unit_sphere_volume(1) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        // Sphere area is the derivative of ball volume.
        for m in 1..30 {
            let lhs = unit_sphere_volume(m);
            let rhs = (m as f64 + 1.0) * unit_ball_volume(m + 1);
            assert!((lhs - rhs).abs() < 1e-12 * lhs);
        }
    }

    #[test]
    fn report_322() {
        let g = geometry_report(&prm(3, 2, 2));
        assert!((g.cos_alpha - 1.0 / 9.0).abs() < 1e-12);
        assert!((g.volume_ratio - 16.0 / 9.0).abs() < 1e-12);
        assert!((g.slope_w - 9.0).abs() < 1e-12);
        let j = g.jordan_angles;
        assert!((j[0].angle - (1.0f64 / 6.0).sqrt().acos()).abs() < 1e-12);
        assert!((j[1].angle - (2.0f64 / 3.0).acos()).abs() < 1e-12);
        assert_eq!(j[2].angle, 0.0);
        assert_eq!([j[0].multiplicity, j[1].multiplicity, j[2].multiplicity], [2, 1, 1]);
        assert!((los_volume(&prm(3, 2, 2)) - 32.0 * PI * PI / 9.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_k() {
        for (n, p) in [(3, 2), (5, 4), (7, 4), (15, 8)] {
            let reps: Vec<_> = (1..=20).map(|j| geometry_report(&prm(n, p, 2 * j))).collect();
            for w in reps.windows(2) {
                assert!(w[1].cos_alpha < w[0].cos_alpha);
                assert!(w[1].volume_ratio > w[0].volume_ratio);
            }
            assert!(reps.last().unwrap().cos_alpha < 1e-3);
        }
    }

    #[test]
    fn volume_element_matches() {
        for (n, p, k) in [(3, 2, 2), (5, 4, 2), (7, 4, 6), (15, 8, 10)] {
            let q = prm(n, p, k);
            assert!(volume_element_check(&q, q.theta) < 1e-12);
        }
        assert!((volume_element(&prm(3, 2, 2), 1e-9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_invariants_and_gap() {
        let table = enumerate_admissible(31, 20);
        let mut cos_vals = Vec::new();
        let mut vol_vals = Vec::new();
        for q in &table {
            let g = geometry_report(q);
            assert!(g.cos_alpha > 0.0 && g.cos_alpha < 1.0);
            assert!(g.volume_ratio > 1.0);
            assert!((g.slope_w * g.cos_alpha - 1.0).abs() < 1e-12);
            let m: u32 = g.jordan_angles.iter().map(|j| j.multiplicity).sum();
            assert_eq!(m, q.n + 1);
            let w: f64 = g
                .jordan_angles
                .iter()
                .map(|j| (1.0 / j.angle.cos()).powi(j.multiplicity as i32))
                .product();
            assert!((w - g.slope_w).abs() < 1e-12 * g.slope_w);
            cos_vals.push(g.cos_alpha);
            vol_vals.push(g.volume_ratio);
        }
        for vals in [&mut cos_vals, &mut vol_vals] {
            vals.sort_by(f64::total_cmp);
            let gap = vals
                .windows(2)
                .map(|w| (w[1] - w[0]) / w[1])
                .fold(f64::INFINITY, f64::min);
            assert!(gap > 1e-12, "gap {gap}");
        }
    }
}
