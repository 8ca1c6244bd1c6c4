//! The planar autonomous system in `(phi, psi)` with `phi = rho / r`,
//! `t = log r` and `psi = d phi / dt`, together with its linearizations at
//! the saddle `(0, 0)` and at the cone equilibrium `(phi0, 0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::{classify_stability, LomseParams, Stability};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub phi: f64,
    pub psi: f64,
}

impl PhaseState {
    pub fn new(t: f64, phi: f64, psi: f64) -> Self {
        Self { t, phi, psi }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.phi.is_finite() && self.psi.is_finite()
    }
}

fn denom(phi: f64, params: &LomseParams) -> f64 {
    1.0 + params.lambda2() * phi * phi
}

/// `((lambda^2 - 1) p) / (1 + lambda^2 phi^2) - (n - p)`; vanishes at `phi0`.
pub fn f1(phi: f64, params: &LomseParams) -> f64 {
    let p = params.p as f64;
    let n = params.n as f64;
    (params.lambda2() - 1.0) * p / denom(phi, params) - (n - p)
}

/// `n - p + p / (1 + lambda^2 phi^2)`; always positive.
pub fn f2(phi: f64, params: &LomseParams) -> f64 {
    let p = params.p as f64;
    let n = params.n as f64;
    n - p + p / denom(phi, params)
}

pub fn f1_prime(phi: f64, params: &LomseParams) -> f64 {
    let p = params.p as f64;
    let l2 = params.lambda2();
    let d = denom(phi, params);
    -2.0 * (l2 - 1.0) * p * l2 * phi / (d * d)
}

pub fn f2_prime(phi: f64, params: &LomseParams) -> f64 {
    let p = params.p as f64;
    let l2 = params.lambda2();
    let d = denom(phi, params);
    -2.0 * p * l2 * phi / (d * d)
}

/// `f1` written in terms of the offset `u = phi - phi0`.
///
/// Uses `(lambda^2 - 1) p = (n - p)(1 + lambda^2 phi0^2)`, so the result is
/// proportional to `u` and keeps full relative precision as `u -> 0`.
pub fn f1_offset(u: f64, params: &LomseParams) -> f64 {
    let n = params.n as f64;
    let p = params.p as f64;
    let phi = params.phi0 + u;
    -(n - p) * params.lambda2() * u * (phi + params.phi0) / denom(phi, params)
}

fn x2_factored(phi: f64, psi: f64, f1v: f64, f2v: f64) -> f64 {
    let s = phi + psi;
    -psi - (f2v * psi - f1v * phi) * (1.0 + s * s)
}

/// `(X1, X2)` with `X1 = psi`, `X2 = -psi - [f2 psi - f1 phi][1 + (phi + psi)^2]`.
pub fn vector_field(phi: f64, psi: f64, params: &LomseParams) -> (f64, f64) {
    (psi, x2_factored(phi, psi, f1(phi, params), f2(phi, params)))
}

pub fn vector_field_at(state: &PhaseState, params: &LomseParams) -> (f64, f64) {
    vector_field(state.phi, state.psi, params)
}

/// The same field evaluated from `(u, psi)` with `u = phi - phi0`.
pub fn vector_field_offset(u: f64, psi: f64, params: &LomseParams) -> (f64, f64) {
    let phi = params.phi0 + u;
    (psi, x2_factored(phi, psi, f1_offset(u, params), f2(phi, params)))
}

/// The field as printed: the bracket expanded with `n - p + (1 - lambda^2)p / (1 + lambda^2 phi^2)`.
pub fn vector_field_expanded(phi: f64, psi: f64, params: &LomseParams) -> (f64, f64) {
    let n = params.n as f64;
    let p = params.p as f64;
    let l2 = params.lambda2();
    let d = 1.0 + l2 * phi * phi;
    let bracket = (n - p + p / d) * psi + (n - p + (1.0 - l2) * p / d) * phi;
    let s = phi + psi;
    (psi, -psi - bracket * (1.0 + s * s))
}

/// Closed-form Jacobian `d(X1, X2) / d(phi, psi)` as `[[a11, a12], [a21, a22]]`.
pub fn jacobian(phi: f64, psi: f64, params: &LomseParams) -> [[f64; 2]; 2] {
    let f1v = f1(phi, params);
    let f2v = f2(phi, params);
    let s = phi + psi;
    let q = 1.0 + s * s;
    let bracket = f2v * psi - f1v * phi;
    let d_phi = -(f2_prime(phi, params) * psi - f1_prime(phi, params) * phi - f1v) * q
        - bracket * 2.0 * s;
    let d_psi = -1.0 - f2v * q - bracket * 2.0 * s;
    [[0.0, 1.0], [d_phi, d_psi]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginLinearization {
    pub matrix_a: [[f64; 2]; 2],
    pub mu1: f64,
    pub mu2: f64,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

pub fn linearize_origin(params: &LomseParams) -> OriginLinearization {
    let n = params.n as f64;
    let k = params.k as f64;
    let big_k = params.eigenvalue() as f64;
    let mu1 = k - 1.0;
    let mu2 = -n - k;
    OriginLinearization {
        matrix_a: [[0.0, 1.0], [big_k - n, -n - 1.0]],
        mu1,
        mu2,
        v1: [1.0, mu1],
        v2: [1.0, mu2],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Linearization {
    pub a: f64,
    pub b: f64,
    pub discriminant: f64,
    pub mu3: Complex64,
    pub mu4: Complex64,
    pub spiral: bool,
}

/// Linearization `[[0, 1], [a, b]]` at `(phi0, 0)`.
pub fn linearize_p1(params: &LomseParams) -> P1Linearization {
    let n = params.n as f64;
    let big_k = params.eigenvalue() as f64;
    let a = 2.0 * n * (n / big_k - 1.0);
    let b = -n - 1.0;
    let discriminant = b * b + 4.0 * a;
    let (mu3, mu4) = if discriminant >= 0.0 {
        let r = discriminant.sqrt();
        (
            Complex64::new((b + r) / 2.0, 0.0),
            Complex64::new((b - r) / 2.0, 0.0),
        )
    } else {
        let im = (-discriminant).sqrt() / 2.0;
        (Complex64::new(b / 2.0, im), Complex64::new(b / 2.0, -im))
    };
    P1Linearization {
        a,
        b,
        discriminant,
        mu3,
        mu4,
        spiral: classify_stability(params) == Stability::SpiralTypeII,
    }
}

/// `a` from the unreduced expression `2 lambda^2 (1 - lambda^2) p phi0^2 (1 + phi0^2) / (1 + lambda^2 phi0^2)^2`.
pub fn p1_a_unreduced(params: &LomseParams) -> f64 {
    let l2 = params.lambda2();
    let p = params.p as f64;
    let q = params.phi0 * params.phi0;
    let d = 1.0 + l2 * q;
    2.0 * l2 * (1.0 - l2) * p * q * (1.0 + q) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, enumerate_admissible};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prm(n: u32, p: u32, k: u32) -> LomseParams {
        build_params(n, p, k, false).unwrap()
    }

    #[test]
    fn f_values() {
        let q = prm(3, 2, 2);
        assert!(f1(q.phi0, &q).abs() < 1e-14);
        assert!((f1(0.0, &q) - 5.0).abs() < 1e-14);
        assert!((f1(0.5, &q) - 2.0).abs() < 1e-14);
        assert!((f2(0.5, &q) - 2.0).abs() < 1e-14);
        for trip in [(3, 2, 2), (5, 4, 6), (15, 8, 4)] {
            let q = prm(trip.0, trip.1, trip.2);
            assert_eq!(f2(0.0, &q), q.n as f64);
        }
    }

    #[test]
    fn f1_decreasing_f2_positive() {
        let q = prm(3, 2, 4);
        let mut prev = f1(0.0, &q);
        for i in 1..500 {
            let phi = i as f64 * 0.01;
            let cur = f1(phi, &q);
            assert!(cur < prev);
            assert!(f2(phi, &q) > 0.0);
            prev = cur;
        }
    }

    #[test]
    fn hand_evaluated_field() {
        let q = prm(3, 2, 2);
        let (x1, x2) = vector_field(0.5, 0.1, &q);
        assert_eq!(x1, 0.1);
        assert!((x2 - 0.988).abs() < 1e-13);
    }

    #[test]
    fn equilibria() {
        let q = prm(3, 2, 4);
        assert_eq!(vector_field(0.0, 0.0, &q), (0.0, 0.0));
        let (x1, x2) = vector_field(q.phi0, 0.0, &q);
        assert_eq!(x1, 0.0);
        assert!(x2.abs() < 1e-13);
        assert_eq!(vector_field_offset(0.0, 0.0, &q), (0.0, 0.0));
    }

    #[test]
    fn factored_matches_expanded_and_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trip in [(3, 2, 2), (3, 2, 4), (5, 4, 6), (7, 4, 2), (15, 8, 6)] {
            let q = prm(trip.0, trip.1, trip.2);
            for _ in 0..1000 {
                let phi = rng.gen_range(-3.0..3.0);
                let psi = rng.gen_range(-3.0..3.0);
                let (_, a) = vector_field(phi, psi, &q);
                let (_, b) = vector_field_expanded(phi, psi, &q);
                let (_, c) = vector_field_offset(phi - q.phi0, psi, &q);
                let scale = 1.0 + a.abs();
                assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
                assert!((a - c).abs() < 1e-12 * scale, "{a} vs {c}");
            }
        }
    }

    #[test]
    fn odd_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = prm(3, 2, 4);
        for _ in 0..1000 {
            let phi = rng.gen_range(-4.0..4.0);
            let psi = rng.gen_range(-4.0..4.0);
            let (a1, a2) = vector_field(phi, psi, &q);
            let (b1, b2) = vector_field(-phi, -psi, &q);
            assert!((a1 + b1).abs() < 1e-13);
            assert!((a2 + b2).abs() < 1e-13 * (1.0 + a2.abs()));
        }
    }

    #[test]
    fn zeros_only_at_equilibria() {
        // The grid avoids psi = 0 exactly except where X1 = 0 forces it;
        // off the phi-axis X1 = psi != 0, so only the axis needs scanning.
        let q = prm(3, 2, 2);
        let m = 200;
        let lo = -2.0 * q.phi0;
        let step = 4.0 * q.phi0 / (m - 1) as f64;
        for i in 0..m {
            let phi = lo + i as f64 * step;
            if phi.abs() < 1e-6 || (phi.abs() - q.phi0).abs() < 1e-6 {
                continue;
            }
            for j in 0..m {
                let psi = lo + j as f64 * step;
                let (x1, x2) = vector_field(phi, psi, &q);
                assert!(x1.abs() + x2.abs() > 0.0);
            }
            let (_, x2) = vector_field(phi, 0.0, &q);
            assert!(x2.abs() > 1e-12, "spurious zero at phi = {phi}");
        }
    }

    fn fd_jacobian(phi: f64, psi: f64, q: &LomseParams) -> [[f64; 2]; 2] {
        let h = 1e-5;
        let (a1, a2) = vector_field(phi + h, psi, q);
        let (b1, b2) = vector_field(phi - h, psi, q);
        let (c1, c2) = vector_field(phi, psi + h, q);
        let (d1, d2) = vector_field(phi, psi - h, q);
        [
            [(a1 - b1) / (2.0 * h), (c1 - d1) / (2.0 * h)],
            [(a2 - b2) / (2.0 * h), (c2 - d2) / (2.0 * h)],
        ]
    }

    fn close(a: [[f64; 2]; 2], b: [[f64; 2]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() < tol * (1.0 + b[i][j].abs())))
    }

    #[test]
    fn jacobians_match_finite_differences() {
        for q in enumerate_admissible(15, 8) {
            let lin = linearize_origin(&q);
            assert!(close(fd_jacobian(0.0, 0.0, &q), lin.matrix_a, 1e-6));
            let p1 = linearize_p1(&q);
            assert!(close(fd_jacobian(q.phi0, 0.0, &q), [[0.0, 1.0], [p1.a, p1.b]], 1e-6));
            assert!(close(jacobian(0.3, -0.2, &q), fd_jacobian(0.3, -0.2, &q), 1e-6));
        }
    }

    #[test]
    fn origin_examples() {
        let lin = linearize_origin(&prm(3, 2, 2));
        assert_eq!((lin.mu1, lin.mu2), (1.0, -5.0));
        assert_eq!(lin.matrix_a, [[0.0, 1.0], [5.0, -4.0]]);
        let lin = linearize_origin(&prm(3, 2, 4));
        assert_eq!((lin.mu1, lin.mu2), (3.0, -7.0));
        for q in enumerate_admissible(31, 20) {
            let lin = linearize_origin(&q);
            for (mu, v) in [(lin.mu1, lin.v1), (lin.mu2, lin.v2)] {
                let av = [
                    lin.matrix_a[0][0] * v[0] + lin.matrix_a[0][1] * v[1],
                    lin.matrix_a[1][0] * v[0] + lin.matrix_a[1][1] * v[1],
                ];
                assert!((av[0] - mu * v[0]).abs() < 1e-12);
                assert!((av[1] - mu * v[1]).abs() < 1e-12 * (1.0 + mu.abs()));
            }
            assert!(lin.mu1 > 0.0 && lin.mu2 < 0.0);
        }
    }

    #[test]
    fn p1_examples() {
        let l = linearize_p1(&prm(3, 2, 2));
        assert!((l.a + 15.0 / 4.0).abs() < 1e-14);
        assert_eq!(l.b, -4.0);
        assert!((l.discriminant - 1.0).abs() < 1e-13);
        assert!((l.mu3.re + 1.5).abs() < 1e-13 && l.mu3.im == 0.0);
        assert!((l.mu4.re + 2.5).abs() < 1e-13);
        assert!(!l.spiral);

        let l = linearize_p1(&prm(3, 2, 4));
        assert!((l.a + 21.0 / 4.0).abs() < 1e-14);
        assert!((l.discriminant + 5.0).abs() < 1e-13);
        assert!((l.mu3.re + 2.0).abs() < 1e-14);
        assert!((l.mu3.im - 5f64.sqrt() / 2.0).abs() < 1e-14);
        assert!(l.spiral);
    }

    #[test]
    fn p1_invariants_over_table() {
        for q in enumerate_admissible(31, 20) {
            let l = linearize_p1(&q);
            assert!(l.a < 0.0);
            assert!(l.mu3.re < 0.0 && l.mu4.re < 0.0);
            let sum = l.mu3 + l.mu4;
            let prod = l.mu3 * l.mu4;
            assert!((sum.re - l.b).abs() < 1e-12 && sum.im.abs() < 1e-12);
            assert!((prod.re + l.a).abs() < 1e-9 * l.a.abs() && prod.im.abs() < 1e-9);
            let disc = crate::params::stability_discriminant(q.n, q.k);
            assert!((l.discriminant - disc).abs() < 1e-12 * (1.0 + disc.abs()));
            assert_eq!(l.spiral, l.discriminant < 0.0);
            assert!((p1_a_unreduced(&q) - l.a).abs() < 1e-10 * l.a.abs());
        }
    }
}
