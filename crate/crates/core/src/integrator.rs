//! Adaptive integration of the reduced system, shooting along the unstable
//! manifold of the saddle at the origin, and event detection on the
//! resulting trajectory.
//!
//! The state is carried as `(u, psi)` with `u = phi - phi0`. Near the cone
//! equilibrium a type II orbit contracts by a factor of roughly `e^{-5}` per
//! half turn; in plain `phi` coordinates the oscillation drops below one ulp
//! of `phi0` after a handful of turns, while the offset form keeps full
//! relative precision until the deviation underflows.

use serde::{Deserialize, Serialize};

use crate::dynsys::{vector_field, vector_field_offset, PhaseState};
use crate::error::{Error, Result};
use crate::params::{LomseParams, Stability};

/// Deviation below which a type II orbit is treated as having reached the
/// equilibrium (the offset representation is about to underflow).
const UNDERFLOW_FLOOR: f64 = 1e-200;
const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on accepted steps. Keeps the cubic Hermite dense output
    /// accurate and gives relative accuracy once the orbit is far below `atol`.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 1e-2,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootConfig {
    pub eps: f64,
    pub t_max: f64,
    pub max_crossings: usize,
    pub conv_tol: f64,
    pub event_tol: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            t_max: 400.0,
            max_crossings: 40,
            conv_tol: 1e-8,
            event_tol: 1e-12,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ConvergedToP1,
    MaxTime,
    MaxCrossings,
    Blowup,
}

/// One accepted step endpoint: time, offset state and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub u: f64,
    pub psi: f64,
    pub du: f64,
    pub dpsi: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: LomseParams,
    nodes: Vec<Node>,
    pub eps_start: f64,
    pub tolerances: (f64, f64),
    pub terminated_by: Termination,
}

impl Trajectory {
    /// Builds a trajectory from externally produced samples `(t, phi, psi, phi_t, psi_t)`.
    pub fn from_samples(
        params: LomseParams,
        samples: &[(f64, f64, f64, f64, f64)],
    ) -> Result<Self> {
        let phi0 = params.phi0;
        let nodes: Vec<Node> = samples
            .iter()
            .map(|&(t, phi, psi, du, dpsi)| Node {
                t,
                u: phi - phi0,
                psi,
                du,
                dpsi,
            })
            .collect();
        if nodes.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Domain("sample times must be strictly increasing".into()));
        }
        Ok(Self {
            params,
            nodes,
            eps_start: 0.0,
            tolerances: (0.0, 0.0),
            terminated_by: Termination::MaxTime,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn state(&self, i: usize) -> PhaseState {
        let nd = &self.nodes[i];
        PhaseState::new(nd.t, self.params.phi0 + nd.u, nd.psi)
    }

    pub fn states(&self) -> impl Iterator<Item = PhaseState> + '_ {
        (0..self.nodes.len()).map(move |i| self.state(i))
    }

    pub fn t_start(&self) -> f64 {
        self.nodes.first().map_or(f64::NAN, |n| n.t)
    }

    pub fn t_end(&self) -> f64 {
        self.nodes.last().map_or(f64::NAN, |n| n.t)
    }

    pub fn last_state(&self) -> PhaseState {
        self.state(self.nodes.len() - 1)
    }

    /// Dense output `(u, psi)` at time `t` inside the trajectory span.
    pub fn offset_at(&self, t: f64) -> Option<(f64, f64)> {
        let j = self.segment_index(t)?;
        let (a, b) = (&self.nodes[j], &self.nodes[j + 1]);
        Some((
            hermite(a.t, b.t, a.u, b.u, a.du, b.du, t),
            hermite(a.t, b.t, a.psi, b.psi, a.dpsi, b.dpsi, t),
        ))
    }

    pub fn state_at(&self, t: f64) -> Option<PhaseState> {
        self.offset_at(t)
            .map(|(u, psi)| PhaseState::new(t, self.params.phi0 + u, psi))
    }

    fn segment_index(&self, t: f64) -> Option<usize> {
        let n = self.nodes.len();
        if n < 2 || t < self.nodes[0].t || t > self.nodes[n - 1].t {
            return None;
        }
        let idx = self.nodes.partition_point(|nd| nd.t <= t);
        Some(idx.clamp(1, n - 1) - 1)
    }
}

/// Cubic Hermite interpolant on `[t0, t1]` through values and slopes.
pub fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

fn hermite_slope(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * y0 + (-6.0 * s2 + 6.0 * s) * y1) / h
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (3.0 * s2 - 2.0 * s) * d1
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type V2 = [f64; 2];

#[inline]
fn axpy(y: V2, terms: &[(f64, V2)], h: f64) -> V2 {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

struct Dopri5<'a> {
    params: &'a LomseParams,
    cfg: IntegratorConfig,
}

impl Dopri5<'_> {
    fn rhs(&self, y: V2) -> V2 {
        let (a, b) = vector_field_offset(y[0], y[1], self.params);
        [a, b]
    }

    /// One trial step; returns the 5th-order solution, its derivative (FSAL) and the error estimate.
    fn trial(&self, y: V2, k1: V2, h: f64) -> (V2, V2, V2) {
        let k2 = self.rhs(axpy(y, &[(A21, k1)], h));
        let k3 = self.rhs(axpy(y, &[(A31, k1), (A32, k2)], h));
        let k4 = self.rhs(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
        let k5 = self.rhs(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
        let k6 = self.rhs(axpy(
            y,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            h,
        ));
        let y_new = axpy(
            y,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
            h,
        );
        let k7 = self.rhs(y_new);
        let err = axpy(
            [0.0, 0.0],
            &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
            h,
        );
        (y_new, k7, err)
    }

    /// RMS error norm with the first component weighted by the physical `phi`.
    fn error_norm(&self, y: V2, y_new: V2, err: V2) -> f64 {
        let phi0 = self.params.phi0;
        let sc0 = self.cfg.atol
            + self.cfg.rtol * (phi0 + y[0]).abs().max((phi0 + y_new[0]).abs());
        let sc1 = self.cfg.atol + self.cfg.rtol * y[1].abs().max(y_new[1].abs());
        (((err[0] / sc0).powi(2) + (err[1] / sc1).powi(2)) / 2.0).sqrt()
    }

    /// Integrates from `(t0, y0)` towards `t_end`, handing each accepted node to `observe`.
    /// Stops early when `observe` returns `false`.
    fn run<F>(&self, t0: f64, y0: V2, t_end: f64, mut observe: F) -> Result<Node>
    where
        F: FnMut(&Node) -> bool,
    {
        const SAFE: f64 = 0.9;
        const FAC_MIN: f64 = 0.2;
        const FAC_MAX: f64 = 10.0;
        const BETA: f64 = 0.04;
        let expo1 = 0.2 - BETA * 0.75;

        let mut t = t0;
        let mut y = y0;
        let mut k1 = self.rhs(y);
        let mut node = Node {
            t,
            u: y[0],
            psi: y[1],
            du: k1[0],
            dpsi: k1[1],
        };
        if !observe(&node) || t_end <= t0 {
            return Ok(node);
        }
        let mut h = self.cfg.max_step.min(1e-3).min(t_end - t0);
        let mut fac_old: f64 = 1e-4;
        let mut steps = 0usize;
        let blowup = BLOWUP_FACTOR * self.params.phi0;

        loop {
            if steps >= self.cfg.max_steps {
                return Err(Error::StepSizeUnderflow { t });
            }
            steps += 1;
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            let (y_new, k7, err) = self.trial(y, k1, h);
            let en = self.error_norm(y, y_new, err);
            if !en.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
                let norm = (self.params.phi0 + y_new[0]).hypot(y_new[1]);
                if h < 1e-14 * t.abs().max(1.0) || norm.is_nan() {
                    return Err(Error::BlowupDetected { t, norm });
                }
                h *= FAC_MIN;
                continue;
            }
            let fac11 = en.powf(expo1);
            if en <= 1.0 {
                let mut fac = fac11 / fac_old.powf(BETA);
                fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                fac_old = en.max(1e-4);
                t = if last { t_end } else { t + h };
                y = y_new;
                k1 = k7;
                node = Node {
                    t,
                    u: y[0],
                    psi: y[1],
                    du: k1[0],
                    dpsi: k1[1],
                };
                let norm = (self.params.phi0 + y[0]).hypot(y[1]);
                if norm > blowup {
                    return Err(Error::BlowupDetected { t, norm });
                }
                if !observe(&node) || last {
                    return Ok(node);
                }
                h = (h / fac).min(self.cfg.max_step);
            } else {
                h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t });
            }
        }
    }
}

fn strict_sign_change(a: f64, b: f64) -> bool {
    (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)
}

/// Shoots along the unstable eigendirection `(1, k-1)` of the saddle.
///
/// Launch point `eps (1, k-1) / |(1, k-1)|` at `t_start = log(eps) / (k-1)`.
pub fn shoot_unstable_manifold(params: &LomseParams, cfg: &ShootConfig) -> Result<Trajectory> {
    if !(cfg.eps > 0.0) || !cfg.eps.is_finite() {
        return Err(Error::EpsNonpositive(cfg.eps));
    }
    let mu1 = params.k as f64 - 1.0;
    let norm = (1.0 + mu1 * mu1).sqrt();
    let t_start = cfg.eps.ln() / mu1;
    if !(cfg.t_max > t_start) {
        return Err(Error::Domain(format!(
            "t_max = {} must exceed launch time {t_start}",
            cfg.t_max
        )));
    }
    let phi_launch = cfg.eps / norm;
    let y0 = [phi_launch - params.phi0, cfg.eps * mu1 / norm];

    let stepper = Dopri5 {
        params,
        cfg: cfg.integrator,
    };
    let type_i = params.stability == Stability::CenterTypeI;
    let mut nodes: Vec<Node> = Vec::new();
    let mut crossings = 0usize;
    let mut terminated_by = Termination::MaxTime;
    stepper.run(t_start, y0, cfg.t_max, |nd| {
        if let Some(prev) = nodes.last() {
            if strict_sign_change(prev.psi, nd.psi) {
                crossings += 1;
            }
        }
        nodes.push(*nd);
        let dev = nd.u.hypot(nd.psi);
        if type_i && dev < cfg.conv_tol {
            terminated_by = Termination::ConvergedToP1;
            return false;
        }
        if crossings >= cfg.max_crossings && cfg.max_crossings > 0 {
            terminated_by = Termination::MaxCrossings;
            return false;
        }
        if dev < UNDERFLOW_FLOOR {
            terminated_by = Termination::ConvergedToP1;
            return false;
        }
        true
    })?;

    Ok(Trajectory {
        params: params.clone(),
        nodes,
        eps_start: cfg.eps,
        tolerances: (cfg.integrator.rtol, cfg.integrator.atol),
        terminated_by,
    })
}

/// Adaptive integration from an arbitrary state to `t_end`.
pub fn propagate(
    params: &LomseParams,
    state0: PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<PhaseState> {
    let stepper = Dopri5 { params, cfg: *cfg };
    let last = stepper.run(
        state0.t,
        [state0.phi - params.phi0, state0.psi],
        t_end,
        |_| true,
    )?;
    Ok(PhaseState::new(last.t, params.phi0 + last.u, last.psi))
}

/// Classical fixed-step RK4 in plain `(phi, psi)` coordinates; a test oracle.
pub fn reference_integrate(
    params: &LomseParams,
    state0: PhaseState,
    t_end: f64,
    h: f64,
) -> Result<PhaseState> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step h = {h} must be positive")));
    }
    let f = |y: V2| {
        let (a, b) = vector_field(y[0], y[1], params);
        [a, b]
    };
    let mut y = [state0.phi, state0.psi];
    let steps = ((t_end - state0.t) / h).ceil().max(0.0) as usize;
    let blowup = BLOWUP_FACTOR * params.phi0;
    for i in 0..steps {
        let t = state0.t + i as f64 * h;
        let dt = h.min(t_end - t);
        if dt <= 0.0 {
            break;
        }
        let k1 = f(y);
        let k2 = f(axpy(y, &[(0.5, k1)], dt));
        let k3 = f(axpy(y, &[(0.5, k2)], dt));
        let k4 = f(axpy(y, &[(1.0, k3)], dt));
        y = axpy(
            y,
            &[(1.0 / 6.0, k1), (1.0 / 3.0, k2), (1.0 / 3.0, k3), (1.0 / 6.0, k4)],
            dt,
        );
        let norm = y[0].hypot(y[1]);
        if !(norm <= blowup) {
            return Err(Error::BlowupDetected { t: t + dt, norm });
        }
    }
    Ok(PhaseState::new(t_end.max(state0.t), y[0], y[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiZero {
    pub t: f64,
    pub phi: f64,
    /// `phi - phi0` at the zero, kept separately for full relative precision.
    pub dphi: f64,
    /// Sign of `psi_t` at the zero.
    pub direction: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiHit {
    pub t: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub psi_zeros: Vec<PsiZero>,
    pub phi_hits: Vec<PhiHit>,
    pub target: f64,
}

pub fn crossing_report(traj: &Trajectory, target: f64, event_tol: f64) -> CrossingReport {
    CrossingReport {
        psi_zeros: detect_psi_zeros_tol(traj, event_tol),
        phi_hits: detect_phi_hits_tol(traj, target, event_tol),
        target,
    }
}

/// Bisection for a sign change of `g` on `[a, b]` down to width `tol`.
fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut ga = g(a);
    if ga == 0.0 {
        return a;
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn detect_psi_zeros(traj: &Trajectory) -> Vec<PsiZero> {
    detect_psi_zeros_tol(traj, 1e-12)
}

pub fn detect_psi_zeros_tol(traj: &Trajectory, tol: f64) -> Vec<PsiZero> {
    let nodes = traj.nodes();
    let mut out = Vec::new();
    for w in nodes.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !strict_sign_change(a.psi, b.psi) {
            continue;
        }
        let t = bisect(
            |t| hermite(a.t, b.t, a.psi, b.psi, a.dpsi, b.dpsi, t),
            a.t,
            b.t,
            tol,
        );
        let dphi = hermite(a.t, b.t, a.u, b.u, a.du, b.du, t);
        let slope = hermite_slope(a.t, b.t, a.psi, b.psi, a.dpsi, b.dpsi, t);
        out.push(PsiZero {
            t,
            phi: traj.params.phi0 + dphi,
            dphi,
            direction: if slope < 0.0 { -1 } else { 1 },
        });
    }
    out
}

pub fn detect_phi_hits(traj: &Trajectory, target: f64) -> Vec<PhiHit> {
    detect_phi_hits_tol(traj, target, 1e-12)
}

/// All times with `phi(t) = target`, via the offset `u - (target - phi0)`.
pub fn detect_phi_hits_tol(traj: &Trajectory, target: f64, tol: f64) -> Vec<PhiHit> {
    let shift = target - traj.params.phi0;
    let nodes = traj.nodes();
    let mut out = Vec::new();
    for w in nodes.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !strict_sign_change(a.u - shift, b.u - shift) {
            continue;
        }
        let t = bisect(
            |t| hermite(a.t, b.t, a.u, b.u, a.du, b.du, t) - shift,
            a.t,
            b.t,
            tol,
        );
        out.push(PhiHit { t, d: t.exp() });
    }
    out
}

/// Least-squares slope of `log phi` against `t` over the first decade of growth.
pub fn launch_growth_rate(traj: &Trajectory) -> Option<f64> {
    let phi_first = traj.state(0).phi;
    let pts: Vec<(f64, f64)> = traj
        .states()
        .take_while(|s| s.phi <= 10.0 * phi_first)
        .filter(|s| s.phi > 0.0)
        .map(|s| (s.t, s.phi.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    Some(sxy / sxx)
}
