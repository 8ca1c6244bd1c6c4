//! Invariant-region barriers for the reduced system.
//!
//! Type I: the curve `psi = h(phi) = f1(phi) phi / (c (n-p))` bounds a region
//! that traps the unstable manifold. After the substitution
//! `s = (1 + lambda^2 phi0^2) / (1 + lambda^2 phi^2) - 1` the inward-pointing
//! condition reduces to a cubic `F(s) = F(0) + s G(s) > 0` on `(0, lambda^2 phi0^2)`.
//!
//! Type II (`n - p = 1`): the curve `psi = g(phi) = (2 f1 + 1/5) phi` and the
//! absence of limit cycles in `phi >= sqrt((3p-n-1)/(3(n-p)))`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dynsys::{f1, f1_prime, f2, vector_field};
use crate::error::{Error, Result};
use crate::params::{LomseParams, Stability};

pub type Q = Ratio<i128>;

pub const GRID_POINTS: usize = 10_000;

fn q(v: i128) -> Q {
    Q::from_integer(v)
}

/// Barrier constant known to work for each type I family.
pub fn default_c(params: &LomseParams) -> Result<Q> {
    if params.stability != Stability::CenterTypeI {
        return Err(Error::NotTypeI);
    }
    match (params.n, params.p, params.k) {
        (3, 2, 2) | (5, 4, 2) => Ok(q(1)),
        (5, 4, 4) => Ok(Q::new(6, 7)),
        (n, _, _) if n >= 7 => Ok(Q::new(1, 2)),
        (n, p, k) => Err(Error::NoBarrierConstant { n, p, k }),
    }
}

/// Nearest small-denominator rational to `c`.
pub fn c_from_f64(c: f64) -> Result<Q> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::COutOfRange(c));
    }
    let r = Ratio::<i64>::approximate_float(c).ok_or(Error::COutOfRange(c))?;
    Ok(Q::new(*r.numer() as i128, *r.denom() as i128))
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn fmt_q(x: Q) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact `F(0)`, `G(0)` and `G(lambda^2 phi0^2)`.
pub fn case1_closed_forms(params: &LomseParams, c: Q) -> (Q, Q, Q) {
    let n = q(params.n as i128);
    let p = q(params.p as i128);
    let l2 = Q::new(params.eigenvalue() as i128, params.p as i128);
    let one = q(1);
    let two = q(2);
    let f0 = one + n - two * (l2 * p - n) / (c * (l2 - one) * p) - c * (l2 - one) * n / l2;
    let g0 = (one / c - one) * p - one / c
        + ((q(4) - p) / c - p) * (n - p) / (l2 * p - p)
        + ((c + two) * n - c * p) / l2;
    let g_end = one / c + c * (n - p) / l2 + two * (n - p) / (c * (l2 - one) * p);
    (f0, g0, g_end)
}

/// `F(s) = I + II + III * IV` assembled term by term in floating point, with
/// `IV` replaced by its lower bound.
pub fn case1_f_of_s(params: &LomseParams, c: f64, s: f64) -> f64 {
    let n = params.n as f64;
    let p = params.p as f64;
    let l2 = params.lambda2();
    let s0 = (l2 * p - n) / (n - p);
    let i = 1.0 + s / c;
    let ii = -2.0 * (n - p) / (c * (l2 - 1.0) * p) * (s0 - s) * (1.0 + s);
    let iii = (n - p) / (l2 - 1.0) * (l2 - c * (l2 - 1.0) + s);
    let iv = 1.0 + (s0 - s) * (1.0 + s / c) / l2;
    i + ii + iii * iv
}

/// Monomial coefficients of the cubic `F` recovered from five samples by
/// divided differences; the fourth-order difference (zero for a cubic) is
/// returned alongside.
pub fn case1_polynomial(params: &LomseParams, c: f64) -> ([f64; 4], f64) {
    let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
    let mut dd: Vec<f64> = xs.iter().map(|&s| case1_f_of_s(params, c, s)).collect();
    let mut coef = Vec::with_capacity(5);
    coef.push(dd[0]);
    for lvl in 1..5 {
        for i in 0..5 - lvl {
            dd[i] = (dd[i + 1] - dd[i]) / (xs[i + lvl] - xs[i]);
        }
        coef.push(dd[0]);
    }
    // Newton form a0 + a1 s + a2 s(s-1) + a3 s(s-1)(s-2) to monomials.
    let (a0, a1, a2, a3) = (coef[0], coef[1], coef[2], coef[3]);
    (
        [a0, a1 - a2 + 2.0 * a3, a2 - 3.0 * a3, a3],
        coef[4],
    )
}

/// `h'(phi) - (X2/X1)(phi, h(phi))` for the type I barrier.
pub fn case1_margin(params: &LomseParams, c: f64, phi: f64) -> f64 {
    let nmp = (params.n - params.p) as f64;
    let h = f1(phi, params) * phi / (c * nmp);
    let dh = (f1(phi, params) + f1_prime(phi, params) * phi) / (c * nmp);
    let (x1, x2) = vector_field(phi, h, params);
    dh - x2 / x1
}

fn interior_grid(phi0: f64, m: usize) -> impl Iterator<Item = f64> {
    (1..=m).map(move |i| phi0 * i as f64 / (m + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierCase1Report {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub c: f64,
    pub c_exact: String,
    pub f0: f64,
    pub g0: f64,
    pub g_end: f64,
    pub f0_exact: String,
    pub g0_exact: String,
    pub g_end_exact: String,
    pub pass: bool,
    pub grid_margin: f64,
    pub grid_pass: bool,
}

pub fn case1_check_exact(params: &LomseParams, c: Q) -> Result<BarrierCase1Report> {
    if params.stability != Stability::CenterTypeI {
        return Err(Error::NotTypeI);
    }
    let cf = to_f64(c);
    if !(c > q(0) && c <= q(1)) {
        return Err(Error::COutOfRange(cf));
    }
    let (f0, g0, g_end) = case1_closed_forms(params, c);
    let zero = q(0);
    let grid_margin = interior_grid(params.phi0, GRID_POINTS)
        .map(|phi| case1_margin(params, cf, phi))
        .fold(f64::INFINITY, f64::min);
    Ok(BarrierCase1Report {
        n: params.n,
        p: params.p,
        k: params.k,
        c: cf,
        c_exact: fmt_q(c),
        f0: to_f64(f0),
        g0: to_f64(g0),
        g_end: to_f64(g_end),
        f0_exact: fmt_q(f0),
        g0_exact: fmt_q(g0),
        g_end_exact: fmt_q(g_end),
        pass: f0 >= zero && g0 > zero && g_end > zero,
        grid_margin,
        grid_pass: grid_margin > 0.0,
    })
}

pub fn case1_check(params: &LomseParams, c: f64) -> Result<BarrierCase1Report> {
    case1_check_exact(params, c_from_f64(c)?)
}

/// `F(s) = (4/25) ((3+5s)/(1+s))^2 (1+5s)/(1+10s)`.
pub fn step1_f(s: f64) -> f64 {
    let a = (3.0 + 5.0 * s) / (1.0 + s);
    0.16 * a * a * (1.0 + 5.0 * s) / (1.0 + 10.0 * s)
}

/// Minimum of `F` on `(0, inf)`: the positive root of `175 s^2 + 20 s - 11`
/// compared against both ends.
pub fn step1_f_min() -> (f64, f64) {
    let s_star = (-20.0 + (400.0f64 + 4.0 * 175.0 * 11.0).sqrt()) / 350.0;
    let candidates = [(s_star, step1_f(s_star)), (0.0, 36.0 / 25.0), (f64::INFINITY, 2.0)];
    candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

fn require_type_ii(params: &LomseParams) -> Result<()> {
    if !params.is_type_ii() {
        return Err(Error::NotTypeII);
    }
    Ok(())
}

/// `I - II + III * IV` for the type II barrier in the `s` variable (`n - p = 1`).
pub fn case2_margin_s(params: &LomseParams, s: f64) -> f64 {
    let n = params.n as f64;
    let p = params.p as f64;
    let l2 = params.lambda2();
    let i = 1.2 + 2.0 * s;
    let ii = 4.0 / ((l2 - 1.0) * p) * (l2 * p - n - s) * (1.0 + s);
    let iii = (l2 + s) / (l2 - 1.0) - s / (2.0 * s + 0.2);
    let iv = 1.0 + (l2 * p - n - s) / (l2 * (1.0 + s)) * (1.2 + 2.0 * s).powi(2);
    i - ii + iii * iv
}

/// `g'(phi) - (X2/X1)(phi, g(phi))` evaluated directly.
pub fn case2_margin_direct(params: &LomseParams, phi: f64) -> f64 {
    let g = (2.0 * f1(phi, params) + 0.2) * phi;
    let dg = 2.0 * f1(phi, params) + 0.2 + 2.0 * f1_prime(phi, params) * phi;
    let (x1, x2) = vector_field(phi, g, params);
    dg - x2 / x1
}

fn s_of_phi(params: &LomseParams, phi: f64) -> f64 {
    let l2 = params.lambda2();
    (1.0 + l2 * params.phi0 * params.phi0) / (1.0 + l2 * phi * phi) - 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierCase2Report {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub g_grid_margin: f64,
    pub g_grid_margin_direct: f64,
    pub fs_min: f64,
    pub fs_argmin: f64,
    pub cycle_margin: Option<f64>,
    pub cycle_bound_slack: Option<f64>,
    pub pass: bool,
}

/// Step-1 barrier margins and the minimum of `F(s)`; the limit-cycle fields are left empty.
pub fn case2_step1_check(params: &LomseParams) -> Result<BarrierCase2Report> {
    require_type_ii(params)?;
    if params.n - params.p != 1 {
        return Err(Error::Domain(format!(
            "type II barrier needs n - p = 1, got ({}, {})",
            params.n, params.p
        )));
    }
    let mut by_s = f64::INFINITY;
    let mut direct = f64::INFINITY;
    for phi in interior_grid(params.phi0, GRID_POINTS) {
        by_s = by_s.min(case2_margin_s(params, s_of_phi(params, phi)));
        direct = direct.min(case2_margin_direct(params, phi));
    }
    let (fs_argmin, fs_min) = step1_f_min();
    Ok(BarrierCase2Report {
        n: params.n,
        p: params.p,
        k: params.k,
        g_grid_margin: by_s,
        g_grid_margin_direct: direct,
        fs_min,
        fs_argmin,
        cycle_margin: None,
        cycle_bound_slack: None,
        pass: by_s > 0.0 && direct > 0.0,
    })
}

/// Lower edge of the region where limit cycles are excluded.
pub fn cycle_threshold(params: &LomseParams) -> f64 {
    let (n, p) = (params.n as f64, params.p as f64);
    ((3.0 * p - n - 1.0) / (3.0 * (n - p))).max(0.0).sqrt()
}

/// `Y2 + X2`, where `Y` is the field with `psi` reflected.
pub fn y2_plus_x2(params: &LomseParams, phi: f64, psi: f64) -> f64 {
    let (a, b) = (f1(phi, params), f2(phi, params));
    let x2 = -psi - (b * psi - a * phi) * (1.0 + (phi + psi).powi(2));
    let y2 = -psi - (b * psi + a * phi) * (1.0 + (phi - psi).powi(2));
    x2 + y2
}

fn cycle_grid(params: &LomseParams, grid: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
    let lo = cycle_threshold(params) + 1e-6;
    let hi = 3.0 * params.phi0;
    let m = grid.max(2);
    (0..m).flat_map(move |i| {
        let phi = lo + (hi - lo) * i as f64 / (m - 1) as f64;
        (1..=m).map(move |j| (phi, hi * j as f64 / m as f64))
    })
}

/// Maximum of `Y2 + X2` over the region `phi >= threshold + 1e-6`, `psi` in `(0, 3 phi0]`.
pub fn no_limit_cycle_check(params: &LomseParams, grid: usize) -> Result<f64> {
    require_type_ii(params)?;
    Ok(cycle_grid(params, grid)
        .map(|(phi, psi)| y2_plus_x2(params, phi, psi))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Maximum of `(Y2+X2)/(2 psi)` minus its quartic upper bound over the same grid; must be `<= 0`.
pub fn limit_cycle_bound_slack(params: &LomseParams, grid: usize) -> Result<f64> {
    require_type_ii(params)?;
    let l2 = params.lambda2();
    let nmp = (params.n - params.p) as f64;
    let thr2 = cycle_threshold(params).powi(2);
    Ok(cycle_grid(params, grid)
        .map(|(phi, psi)| {
            let bound =
                -3.0 * l2 * nmp / (1.0 + l2 * phi * phi) * phi * phi * (phi * phi - thr2);
            y2_plus_x2(params, phi, psi) / (2.0 * psi) - bound
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Full type II suite: Step-1 margins plus the limit-cycle checks.
pub fn case2_check(params: &LomseParams, grid: usize) -> Result<BarrierCase2Report> {
    let mut rep = case2_step1_check(params)?;
    let cm = no_limit_cycle_check(params, grid)?;
    let slack = limit_cycle_bound_slack(params, grid)?;
    rep.cycle_margin = Some(cm);
    rep.cycle_bound_slack = Some(slack);
    rep.pass = rep.pass && cm < 0.0 && slack <= 0.0;
    Ok(rep)
}
