//! Dirichlet-problem multiplicity read off an orbit, and volume densities of
//! the resulting minimal graphs.

use serde::{Deserialize, Serialize};

use crate::dynsys::PhaseState;
use crate::error::{Error, Result};
use crate::geometry::{los_volume, unit_ball_volume, unit_sphere_volume};
use crate::integrator::{detect_phi_hits, detect_psi_zeros, hermite, ShootConfig, Trajectory};
use crate::params::LomseParams;
use crate::profile::ProfileSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamilyReport {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub boundary_slope: f64,
    /// Each `d` yields the solution `y -> rho(d|y|) f(y/|y|) / d` on the unit disk.
    pub dilations: Vec<f64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub count_is_lower_bound: bool,
    pub includes_singular_cone: bool,
}

pub fn dirichlet_solutions(traj: &Trajectory, phi_b: f64) -> SolutionFamilyReport {
    let q = &traj.params;
    let zeros = detect_psi_zeros(traj);
    let phi1 = zeros.first().map(|z| z.phi);
    let phi2 = zeros.get(1).map(|z| z.phi);
    let in_window = match (phi1, phi2) {
        (Some(a), Some(b)) => phi_b >= b && phi_b <= a,
        _ => false,
    };
    SolutionFamilyReport {
        n: q.n,
        p: q.p,
        k: q.k,
        boundary_slope: phi_b,
        dilations: detect_phi_hits(traj, phi_b).iter().map(|h| h.d).collect(),
        phi1,
        phi2,
        count_is_lower_bound: q.is_type_ii() && in_window,
        includes_singular_cone: (phi_b - q.phi0).abs() < 1e-10,
    }
}

/// Area factor with `r^n` divided out: `sqrt(1 + rho_r^2) (1 + lambda^2 phi^2)^{p/2}`.
fn reduced_integrand(s: &ProfileSample, q: &LomseParams) -> f64 {
    let phi = s.rho / s.r;
    (1.0 + s.rho_r * s.rho_r).sqrt() * (1.0 + q.lambda2() * phi * phi).powf(q.p as f64 / 2.0)
}

/// Composite Simpson on a nonuniform grid; an odd trailing interval uses the
/// three-point end correction.
pub fn simpson_nonuniform(x: &[f64], f: &[f64]) -> f64 {
    let m = x.len();
    if m < 2 {
        return 0.0;
    }
    if m == 2 {
        return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    }
    let mut sum = 0.0;
    let mut i = 0;
    while i + 2 < m {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        sum += hs / 6.0
            * ((2.0 - h1 / h0) * f[i] + (hs / h0) * (hs / h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i + 1 < m {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let hs = h0 + h1;
        sum += h1 / 6.0
            * (f[i + 1] * (2.0 * h1 + 3.0 * h0) / hs + f[i] * (h1 / h0 + 3.0)
                - f[i - 1] * (h1 / h0) * (h1 / hs));
    }
    sum
}

fn interp_sample(a: &ProfileSample, b: &ProfileSample, r: f64) -> ProfileSample {
    ProfileSample {
        r,
        rho: hermite(a.r, b.r, a.rho, b.rho, a.rho_r, b.rho_r, r),
        rho_r: hermite(a.r, b.r, a.rho_r, b.rho_r, a.rho_rr, b.rho_rr, r),
        rho_rr: f64::NAN,
    }
}

/// Volume of the graph over the part of the profile inside the ball of radius `radius`.
///
/// The segment below the first sample is taken with the integrand frozen at
/// its first value, exact for cones and flat disks.
pub fn graph_volume(profile: &[ProfileSample], q: &LomseParams, radius: f64) -> Result<f64> {
    let r2 = radius * radius;
    let g = |s: &ProfileSample| s.r * s.r + s.rho * s.rho;
    let span_err = || Error::RadiusOutOfRange {
        radius,
        min: profile.first().map_or(f64::NAN, |s| g(s).sqrt()),
        max: profile.last().map_or(f64::NAN, |s| g(s).sqrt()),
    };
    if profile.len() < 2 || !(radius > 0.0) {
        return Err(span_err());
    }
    if g(&profile[0]) >= r2 {
        return Err(span_err());
    }
    let mut j = None;
    for i in 0..profile.len() - 1 {
        if g(&profile[i + 1]) <= g(&profile[i]) {
            return Err(Error::NonMonotoneCut(profile[i].r));
        }
        if g(&profile[i + 1]) >= r2 {
            j = Some(i);
            break;
        }
    }
    let j = j.ok_or_else(span_err)?;
    let (a, b) = (&profile[j], &profile[j + 1]);

    let (mut lo, mut hi) = (a.r, b.r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = interp_sample(a, b, mid);
        if g(&s) < r2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_cut = 0.5 * (lo + hi);

    // Integrate in w = r^{n+1}, where the volume element is reduced_integrand dw / (n+1).
    let np1 = q.n as i32 + 1;
    let w = |r: f64| r.powi(np1);
    let w_floor = 1e-150 * w(r_cut);
    let i0 = profile[..=j].iter().position(|s| w(s.r) > w_floor).unwrap_or(j);
    let head = reduced_integrand(&profile[i0], q) * w(profile[i0].r);
    let xs: Vec<f64> = profile[i0..=j].iter().map(|s| w(s.r)).collect();
    let fs: Vec<f64> = profile[i0..=j].iter().map(|s| reduced_integrand(s, q)).collect();
    let body = simpson_nonuniform(&xs, &fs);
    let r_mid = (0.5 * (w(a.r) + w(r_cut))).powf(1.0 / np1 as f64);
    let mid = interp_sample(a, b, r_mid);
    let end = interp_sample(a, b, r_cut);
    let tail = (w(r_cut) - w(a.r)) / 6.0
        * (reduced_integrand(a, q) + 4.0 * reduced_integrand(&mid, q) + reduced_integrand(&end, q));

    Ok(unit_sphere_volume(q.n) * (head + body + tail) / np1 as f64)
}

/// `Vol / (omega_{n+1} R^{n+1})` with the ball volume of `R^{n+1}`.
pub fn density_from_profile(profile: &[ProfileSample], q: &LomseParams, radius: f64) -> Result<f64> {
    let vol = graph_volume(profile, q, radius)?;
    Ok(vol / (unit_ball_volume(q.n + 1) * radius.powi(q.n as i32 + 1)))
}

/// Profile of the orbit rescaled by `e^shift`, i.e. `rho(e^shift r) / e^shift`,
/// truncated just past radius `keep_radius`.
fn shifted_profile(traj: &Trajectory, shift: f64, keep_radius: f64) -> Vec<ProfileSample> {
    let t_keep = keep_radius.ln() + 0.5;
    let mut out = Vec::new();
    for s in traj.states() {
        let t = s.t - shift;
        out.push(ProfileSample::from_state(&PhaseState::new(t, s.phi, s.psi), &traj.params));
        if t > t_keep {
            break;
        }
    }
    out
}

/// Density of the orbit's graph in the ball of radius `e^log_radius`.
///
/// Works in rescaled coordinates so that very large radii do not overflow.
pub fn density_at_log_radius(traj: &Trajectory, log_radius: f64) -> Result<f64> {
    let prof = shifted_profile(traj, log_radius, 1.0);
    density_from_profile(&prof, &traj.params, 1.0)
}

/// Samples of the cone `rho = phi0 r` for `t` in `[t_min, t_max]`.
pub fn cone_profile(q: &LomseParams, t_min: f64, t_max: f64, dt: f64) -> Vec<ProfileSample> {
    let m = ((t_max - t_min) / dt).ceil() as usize;
    (0..=m)
        .map(|i| {
            let t = t_min + (t_max - t_min) * i as f64 / m as f64;
            ProfileSample::from_state(&PhaseState::new(t, q.phi0, 0.0), q)
        })
        .collect()
}

/// Density of the cone at infinity from the closed-form sphere volume.
pub fn theta_infinity(q: &LomseParams) -> f64 {
    los_volume(q) / ((q.n as f64 + 1.0) * unit_ball_volume(q.n + 1))
}

/// The same density by quadrature of a sampled cone profile.
pub fn theta_infinity_quadrature(q: &LomseParams) -> Result<f64> {
    let prof = cone_profile(q, -8.0, 1.0, 0.01);
    density_from_profile(&prof, q, 1.0)
}

/// Step cap for orbits fed to the volume quadrature, which is fourth order in the step.
pub const DENSITY_MAX_STEP: f64 = 2.5e-3;

pub fn density_shoot_config(base: &ShootConfig) -> ShootConfig {
    let mut cfg = *base;
    cfg.integrator.max_step = cfg.integrator.max_step.min(DENSITY_MAX_STEP);
    cfg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
    pub theta_infinity: f64,
    pub theta_infinity_quadrature: f64,
    pub strictly_below_cone: bool,
}

/// Densities `Theta_i` of the solutions obtained by rescaling at each hit of `phi = phi0`,
/// measured in the ball of radius `sqrt(1 + phi0^2)`.
pub fn density_report(traj: &Trajectory) -> Result<DensityReport> {
    let q = &traj.params;
    if !q.is_type_ii() {
        return Err(Error::NotTypeII);
    }
    let hits = detect_phi_hits(traj, q.phi0);
    if hits.len() < 2 {
        return Err(Error::InsufficientHits {
            needed: 2,
            found: hits.len(),
        });
    }
    let ball = (1.0 + q.phi0 * q.phi0).sqrt();
    let mut thetas = Vec::with_capacity(hits.len());
    for h in &hits {
        let prof = shifted_profile(traj, h.t, ball);
        thetas.push(density_from_profile(&prof, q, ball)?);
    }
    let theta_inf = theta_infinity(q);
    Ok(DensityReport {
        n: q.n,
        p: q.p,
        k: q.k,
        radii: hits.iter().map(|h| h.d * ball).collect(),
        strictly_below_cone: thetas[0] < theta_inf - 1e-9,
        thetas,
        theta_infinity: theta_inf,
        theta_infinity_quadrature: theta_infinity_quadrature(q)?,
    })
}

/// `Theta(R)` at `count` log-uniform radii strictly inside the orbit's span.
pub fn density_curve(traj: &Trajectory, count: usize) -> Result<Vec<(f64, f64)>> {
    let states: Vec<PhaseState> = traj.states().collect();
    let first = states.first().ok_or(Error::InsufficientHits { needed: 1, found: 0 })?;
    let last = states.last().unwrap();
    let lo = first.t + 0.5 * (1.0 + first.phi * first.phi).ln() + 0.1;
    let hi = last.t + 0.5 * (1.0 + last.phi * last.phi).ln() - 0.1;
    (0..count)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64;
            density_at_log_radius(traj, s).map(|th| (s.exp(), th))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{shoot_unstable_manifold, ShootConfig};
    use crate::params::build_params;

    fn prm(n: u32, p: u32, k: u32) -> LomseParams {
        build_params(n, p, k, false).unwrap()
    }

    #[test]
    fn simpson_exact_on_quadratics() {
        let x: Vec<f64> = (0..12).map(|i| 0.1 * (i as f64).powf(1.3)).collect();
        for m in [7usize, 8, 12] {
            let f: Vec<f64> = x[..m].iter().map(|&v| 2.0 * v * v - v + 0.5).collect();
            let (a, b) = (x[0], x[m - 1]);
            let exact = |v: f64| 2.0 / 3.0 * v.powi(3) - 0.5 * v * v + 0.5 * v;
            let got = simpson_nonuniform(&x[..m], &f);
            assert!((got - (exact(b) - exact(a))).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn cone_volume_closed_form() {
        for (n, p, k) in [(3, 2, 2), (5, 4, 6), (7, 4, 2)] {
            let q = prm(n, p, k);
            let prof = cone_profile(&q, -6.0, 2.0, 0.01);
            for radius in [0.3, 1.0, 4.0] {
                let vol = graph_volume(&prof, &q, radius).unwrap();
                let s = 1.0 + q.phi0 * q.phi0;
                let rbar = radius / s.sqrt();
                let expect = s.sqrt()
                    * (1.0 + q.lambda2() * q.phi0 * q.phi0).powf(p as f64 / 2.0)
                    * rbar.powi(n as i32 + 1)
                    / (n as f64 + 1.0)
                    * unit_sphere_volume(n);
                assert!(((vol - expect) / expect).abs() < 1e-8, "{:?} R={radius}", (n, p, k));
            }
        }
    }

    #[test]
    fn flat_disk_volume() {
        let q = prm(3, 2, 2);
        let prof: Vec<_> = (0..=500)
            .map(|i| ProfileSample {
                r: 1e-3 + 5e-3 * i as f64,
                rho: 0.0,
                rho_r: 0.0,
                rho_rr: 0.0,
            })
            .collect();
        let vol = graph_volume(&prof, &q, 2.0).unwrap();
        let expect = unit_sphere_volume(3) * 2.0f64.powi(4) / 4.0;
        assert!(((vol - expect) / expect).abs() < 1e-12);
        assert!((density_from_profile(&prof, &q, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radius_outside_span() {
        let q = prm(3, 2, 2);
        let prof = cone_profile(&q, -2.0, 0.0, 0.01);
        assert!(matches!(
            graph_volume(&prof, &q, 10.0),
            Err(Error::RadiusOutOfRange { .. })
        ));
        assert!(matches!(
            graph_volume(&prof, &q, 0.01),
            Err(Error::RadiusOutOfRange { .. })
        ));
    }

    #[test]
    fn theta_infinity_two_ways() {
        for (n, p, k) in [(3, 2, 2), (3, 2, 4), (5, 4, 6), (15, 8, 4)] {
            let q = prm(n, p, k);
            let a = theta_infinity(&q);
            let b = theta_infinity_quadrature(&q).unwrap();
            assert!(((a - b) / a).abs() < 1e-8, "{a} {b}");
            assert!((a * (n as f64 + 1.0) * unit_ball_volume(n + 1) - los_volume(&q)).abs() < 1e-10);
        }
    }

    #[test]
    fn type_i_single_dilation() {
        let q = prm(3, 2, 2);
        let traj = shoot_unstable_manifold(&q, &ShootConfig::default()).unwrap();
        let rep = dirichlet_solutions(&traj, 0.5 * q.phi0);
        assert_eq!(rep.dilations.len(), 1);
        assert!(!rep.count_is_lower_bound && !rep.includes_singular_cone);
        assert!(matches!(density_report(&traj), Err(Error::NotTypeII)));
    }

    #[test]
    fn type_ii_dilations_reproduce_boundary() {
        let q = prm(3, 2, 4);
        let traj = shoot_unstable_manifold(&q, &ShootConfig::default()).unwrap();
        let rep = dirichlet_solutions(&traj, q.phi0);
        assert!(rep.dilations.len() >= 10);
        assert!(rep.count_is_lower_bound && rep.includes_singular_cone);
        let mid = q.phi0 + 0.5 * (rep.phi1.unwrap() - q.phi0);
        let rep2 = dirichlet_solutions(&traj, mid);
        assert!(rep2.dilations.len() >= 2);
        for d in &rep2.dilations {
            let s = traj.state_at(d.ln()).unwrap();
            assert!((s.phi - mid).abs() < 1e-9);
        }
    }

    #[test]
    fn density_refinement() {
        let q = prm(3, 2, 4);
        let base = density_shoot_config(&ShootConfig::default());
        let mut fine = base;
        fine.integrator.max_step /= 2.0;
        let a = density_report(&shoot_unstable_manifold(&q, &base).unwrap()).unwrap();
        let b = density_report(&shoot_unstable_manifold(&q, &fine).unwrap()).unwrap();
        assert!(((a.thetas[0] - b.thetas[0]) / b.thetas[0]).abs() < 1e-9);
        assert!(a.strictly_below_cone);
        for w in a.thetas.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }
}
