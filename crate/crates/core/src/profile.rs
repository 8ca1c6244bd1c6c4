//! Radial profile `rho(r) = r phi(log r)` and residuals of the profile ODEs.

use serde::{Deserialize, Serialize};

use crate::dynsys::{vector_field, PhaseState};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::params::LomseParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r: f64,
    pub rho: f64,
    pub rho_r: f64,
    pub rho_rr: f64,
}

impl ProfileSample {
    /// Transforms one phase state; `rho_rr` uses the vector field, not differencing.
    pub fn from_state(s: &PhaseState, params: &LomseParams) -> Self {
        let (_, x2) = vector_field(s.phi, s.psi, params);
        let r = s.t.exp();
        Self {
            r,
            rho: r * s.phi,
            rho_r: s.phi + s.psi,
            rho_rr: (x2 + s.psi) / r,
        }
    }

    /// Inverse transform back to `(t, phi, psi)`.
    pub fn to_phase(&self) -> PhaseState {
        let phi = self.rho / self.r;
        PhaseState::new(self.r.ln(), phi, self.rho_r - phi)
    }

    /// The sample of `rho_d(r) = rho(d r) / d` corresponding to this one.
    pub fn rescale(&self, d: f64) -> Self {
        Self {
            r: self.r / d,
            rho: self.rho / d,
            rho_r: self.rho_r,
            rho_rr: self.rho_rr * d,
        }
    }
}

pub fn to_profile(traj: &Trajectory) -> Vec<ProfileSample> {
    traj.states()
        .map(|s| ProfileSample::from_state(&s, &traj.params))
        .collect()
}

/// Residual of the radial minimal-graph equation for the LOMSE singular values.
pub fn ode1_residual(s: &ProfileSample, params: &LomseParams) -> f64 {
    let n = params.n as f64;
    let p = params.p as f64;
    let l2 = params.lambda2();
    let r = s.r;
    let q = s.rho / r;
    s.rho_rr / (1.0 + s.rho_r * s.rho_r)
        + (n - p) * s.rho_r / r
        + p * (s.rho_r / r - l2 * s.rho / (r * r)) / (1.0 + l2 * q * q)
}

/// Residual for an arbitrary constant list of `n` singular values.
pub fn ode_general_residual(s: &ProfileSample, sing_values: &[f64], n: usize) -> Result<f64> {
    if sing_values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: sing_values.len(),
        });
    }
    let r = s.r;
    let q = s.rho / r;
    let sum: f64 = sing_values
        .iter()
        .map(|&l| {
            let l2 = l * l;
            (s.rho_r / r - l2 * s.rho / (r * r)) / (1.0 + l2 * q * q)
        })
        .sum();
    Ok(s.rho_rr / (1.0 + s.rho_r * s.rho_r) + sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{shoot_unstable_manifold, ShootConfig};
    use crate::params::build_params;
    use proptest::prelude::*;

    fn prm(n: u32, p: u32, k: u32) -> LomseParams {
        build_params(n, p, k, false).unwrap()
    }

    #[test]
    fn transform_at_origin_time() {
        let q = prm(3, 2, 2);
        let s = ProfileSample::from_state(&PhaseState::new(0.0, 0.5, 0.1), &q);
        assert_eq!((s.r, s.rho), (1.0, 0.5));
        assert!((s.rho_r - 0.6).abs() < 1e-15);
    }

    #[test]
    fn cone_profile() {
        let q = prm(3, 2, 2);
        for t in [-2.0, 0.0, 1.5] {
            let s = ProfileSample::from_state(&PhaseState::new(t, q.phi0, 0.0), &q);
            assert!((s.rho - q.phi0 * s.r).abs() < 1e-12 * s.r);
            assert!((s.rho_r - q.phi0).abs() < 1e-15);
            assert!(s.rho_rr.abs() < 1e-14);
            assert!(ode1_residual(&s, &q).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_residual() {
        let q = prm(3, 2, 2);
        let s = ProfileSample {
            r: 1.0,
            rho: 1.0,
            rho_r: 0.0,
            rho_rr: 0.0,
        };
        assert!((ode1_residual(&s, &q) + 1.6).abs() < 1e-14);
    }

    #[test]
    fn special_singular_lists() {
        let flat = ProfileSample {
            r: 1.7,
            rho: 0.3,
            rho_r: 0.0,
            rho_rr: 0.0,
        };
        assert_eq!(ode_general_residual(&flat, &[0.0; 4], 4).unwrap(), 0.0);
        let diag = ProfileSample {
            r: 2.3,
            rho: 2.3,
            rho_r: 1.0,
            rho_rr: 0.0,
        };
        assert!(ode_general_residual(&diag, &[1.0; 3], 3).unwrap().abs() < 1e-15);
        assert!(matches!(
            ode_general_residual(&diag, &[1.0; 2], 3),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn shot_orbit_small_r_order() {
        // rho = O(r^k): log rho / log r tends to k near launch.
        for k in [2u32, 4] {
            let q = prm(3, 2, k);
            let traj = shoot_unstable_manifold(&q, &ShootConfig::default()).unwrap();
            let prof = to_profile(&traj);
            let (a, b) = (prof[0], prof[50]);
            let order = (b.rho / a.rho).ln() / (b.r / a.r).ln();
            assert!((order - k as f64).abs() < 1e-3, "k={k} order={order}");
        }
    }

    #[test]
    fn shot_orbit_residuals() {
        for (n, p, k) in [(3, 2, 2), (3, 2, 4), (5, 4, 6)] {
            let q = prm(n, p, k);
            let traj = shoot_unstable_manifold(&q, &ShootConfig::default()).unwrap();
            for s in to_profile(&traj) {
                let res = ode1_residual(&s, &q);
                assert!(res.abs() < 1e-6 * (1.0 + s.rho_rr.abs()), "{s:?} {res}");
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(t in -5.0f64..5.0, phi in 0.0f64..2.0, psi in -1.0f64..1.0) {
            let q = prm(5, 4, 2);
            let s = PhaseState::new(t, phi, psi);
            let back = ProfileSample::from_state(&s, &q).to_phase();
            prop_assert!((back.t - t).abs() < 1e-14);
            prop_assert!((back.phi - phi).abs() < 1e-14);
            prop_assert!((back.psi - psi).abs() < 1e-14);
        }

        #[test]
        fn general_matches_specialized(
            r in 0.01f64..10.0, phi in 0.0f64..2.0, psi in -1.0f64..1.0, rr in -5.0f64..5.0
        ) {
            let q = prm(3, 2, 2);
            let s = ProfileSample { r, rho: r * phi, rho_r: phi + psi, rho_rr: rr };
            let l = q.lambda;
            let g = ode_general_residual(&s, &[l, l, 0.0], 3).unwrap();
            let scale = 1.0 + 1.0 / r;
            prop_assert!((g - ode1_residual(&s, &q)).abs() < 1e-14 * scale * scale);
        }

        #[test]
        fn rescaling_invariance(t in -3.0f64..3.0, phi in 0.05f64..2.0, psi in -1.0f64..1.0) {
            let q = prm(3, 2, 4);
            let s = ProfileSample::from_state(&PhaseState::new(t, phi, psi), &q);
            let res = ode1_residual(&s, &q);
            for d in [0.5, 2.0, std::f64::consts::E] {
                let sd = s.rescale(d);
                // The residual has units of 1/r, so it scales by d.
                let rd = ode1_residual(&sd, &q);
                prop_assert!((rd - d * res).abs() < 1e-12 * (1.0 + d * res.abs()) * d / s.r.min(1.0));
                let expect = ProfileSample::from_state(&PhaseState::new(t - d.ln(), phi, psi), &q);
                prop_assert!((sd.r - expect.r).abs() < 1e-13 * expect.r);
                prop_assert!((sd.rho_rr - expect.rho_rr).abs() < 1e-12 * (1.0 + expect.rho_rr.abs()));
            }
        }
    }
}
