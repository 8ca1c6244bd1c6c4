use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::thread;

use serde::{Deserialize, Serialize};

use lo_dynamics::analysis::{density_curve, density_report, density_shoot_config};
use lo_dynamics::barrier::{case1_check, case1_check_exact, case2_check, default_c, BarrierCase1Report, BarrierCase2Report};
use lo_dynamics::geometry::geometry_report;
use lo_dynamics::integrator::{crossing_report, shoot_unstable_manifold, Trajectory};
use lo_dynamics::maps::{condition_b_deviation, numeric_singular_values, random_sphere_points, HopfMap};
use lo_dynamics::params::{build_params, enumerate_admissible, LomseParams, Stability};
use lo_dynamics::profile::{ode1_residual, to_profile};
use lo_dynamics::Error;

use crate::cli::{Command, Triple, TripleOrSweep};
use crate::config::RunConfig;
use crate::output::{write_csv, write_json};
use crate::svg::{polyline_plot, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_BARRIER: i32 = 5;
pub const EXIT_WRONG_TYPE: i32 = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InadmissibleTriple { .. } => EXIT_INADMISSIBLE,
        Error::BlowupDetected { .. }
        | Error::StepSizeUnderflow { .. }
        | Error::NonMonotoneCut(_)
        | Error::InsufficientHits { .. } => EXIT_NUMERIC,
        Error::NoBarrierConstant { .. } => EXIT_BARRIER,
        Error::NotTypeI | Error::NotTypeII => EXIT_WRONG_TYPE,
        Error::Domain(_)
        | Error::EpsNonpositive(_)
        | Error::COutOfRange(_)
        | Error::RadiusOutOfRange { .. }
        | Error::LengthMismatch { .. }
        | Error::NotOnSphere(_)
        | Error::StepOutOfRange(_)
        | Error::Config(_) => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Outcome {
    match command {
        Command::Classify(which) => classify(which, cfg),
        Command::Orbit { triple, target_phi } => orbit(triple, *target_phi, cfg),
        Command::Verify { which, c } => verify(which, *c, cfg),
        Command::Geometry(which) => geometry(which, cfg),
        Command::Density {
            triple,
            radius_sweep,
        } => density(triple, *radius_sweep, cfg),
        Command::MapsCheck => maps_check(cfg),
    }
}

fn params_for(t: &Triple, cfg: &RunConfig) -> Result<LomseParams, Failure> {
    Ok(build_params(t.n, t.p, t.k, cfg.allow_inadmissible)?)
}

fn selected(which: &TripleOrSweep, cfg: &RunConfig) -> Result<Vec<LomseParams>, Failure> {
    match &which.sweep {
        Some(s) => Ok(enumerate_admissible(s[0], s[1])),
        None => {
            let t = Triple {
                n: which.triple[0],
                p: which.triple[1],
                k: which.triple[2],
            };
            Ok(vec![params_for(&t, cfg)?])
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(&cfg.out_dir)
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
pub fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn family_label(q: &LomseParams) -> String {
    format!("{:?}", q.family)
}

fn classify(which: &TripleOrSweep, cfg: &RunConfig) -> Outcome {
    let rows = selected(which, cfg)?;
    println!(
        "{:>3} {:>3} {:>3}  {:<10} {:<20} {:>18} {:>18} {:>18}  type",
        "n", "p", "k", "admissible", "family", "lambda", "theta", "phi0"
    );
    for q in &rows {
        println!(
            "{:>3} {:>3} {:>3}  {:<10} {:<20} {:>18.12} {:>18.12} {:>18.12}  {}",
            q.n,
            q.p,
            q.k,
            q.admissible,
            family_label(q),
            q.lambda,
            q.theta,
            q.phi0,
            q.stability.label()
        );
    }
    Ok(EXIT_OK)
}

fn orbit(t: &Triple, target_phi: Option<f64>, cfg: &RunConfig) -> Outcome {
    let q = params_for(t, cfg)?;
    let traj = shoot_unstable_manifold(&q, &cfg.shoot_config())?;
    let target = target_phi.unwrap_or(q.phi0);
    let events = crossing_report(&traj, target, cfg.event_tol);
    let dir = out_dir(cfg)?;

    if cfg.formats.csv {
        write_csv(
            &dir.join("trajectory.csv"),
            &["t", "phi", "psi"],
            traj.states().map(|s| vec![s.t, s.phi, s.psi]),
        )?;
        write_csv(
            &dir.join("profile.csv"),
            &["r", "rho", "rho_r", "rho_rr", "residual"],
            to_profile(&traj)
                .iter()
                .map(|s| vec![s.r, s.rho, s.rho_r, s.rho_rr, ode1_residual(s, &q)]),
        )?;
    }
    if cfg.formats.json {
        write_json(&dir.join("events.json"), &events)?;
    }
    if cfg.formats.svg {
        write_orbit_plots(dir, &traj, &q)?;
    }

    println!(
        "({},{},{}) {}: {} steps, t in [{:.6}, {:.6}], terminated by {:?}",
        q.n,
        q.p,
        q.k,
        q.stability.label(),
        traj.len(),
        traj.t_start(),
        traj.t_end(),
        traj.terminated_by
    );
    println!(
        "psi zeros: {}, hits of phi = {target}: {}",
        events.psi_zeros.len(),
        events.phi_hits.len()
    );
    Ok(EXIT_OK)
}

fn write_orbit_plots(dir: &Path, traj: &Trajectory, q: &LomseParams) -> io::Result<()> {
    let phase: Vec<(f64, f64)> = traj.states().map(|s| (s.phi, s.psi)).collect();
    let svg = polyline_plot(
        "phase plane (phi, psi)",
        &[Series {
            points: &phase,
            stroke: "#1f4e9c",
        }],
    );
    fs::write(dir.join("phase.svg"), svg)?;

    // Profile up to the third crossing of the cone ray.
    let hits = crossing_report(traj, q.phi0, 1e-12).phi_hits;
    let t_end = hits
        .get(2)
        .map(|h| h.t)
        .unwrap_or_else(|| traj.t_end().min(traj.t_start() + 12.0));
    let profile: Vec<(f64, f64)> = traj
        .states()
        .take_while(|s| s.t <= t_end)
        .map(|s| {
            let r = s.t.exp();
            (r, s.phi * r)
        })
        .collect();
    let r_max = profile.last().map_or(1.0, |p| p.0);
    let ray = [(0.0, 0.0), (r_max, q.phi0 * r_max)];
    let svg = polyline_plot(
        "profile rho(r) and the cone ray rho = phi0 r",
        &[
            Series {
                points: &ray,
                stroke: "#999999",
            },
            Series {
                points: &profile,
                stroke: "#b3261e",
            },
        ],
    );
    fs::write(dir.join("profile.svg"), svg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum BarrierReport {
    TypeI(BarrierCase1Report),
    TypeII(BarrierCase2Report),
}

impl BarrierReport {
    pub fn pass(&self) -> bool {
        match self {
            BarrierReport::TypeI(r) => r.pass && r.grid_pass,
            BarrierReport::TypeII(r) => r.pass,
        }
    }
}

fn barrier_for(q: &LomseParams, c: Option<f64>, grid: usize) -> Result<BarrierReport, Error> {
    match q.stability {
        Stability::CenterTypeI => {
            let rep = match c {
                Some(c) => case1_check(q, c)?,
                None => case1_check_exact(q, default_c(q)?)?,
            };
            Ok(BarrierReport::TypeI(rep))
        }
        Stability::SpiralTypeII => Ok(BarrierReport::TypeII(case2_check(q, grid)?)),
    }
}

fn print_barrier(rep: &BarrierReport) {
    match rep {
        BarrierReport::TypeI(r) => println!(
            "({},{},{}) type I  c={}  F0={}  G0={}  G_end={}  grid_margin={:.6e}  {}",
            r.n,
            r.p,
            r.k,
            r.c_exact,
            r.f0_exact,
            r.g0_exact,
            r.g_end_exact,
            r.grid_margin,
            if r.pass && r.grid_pass { "PASS" } else { "FAIL" }
        ),
        BarrierReport::TypeII(r) => println!(
            "({},{},{}) type II  g_margin={:.6e}  Fs_min={:.12} at s={:.6}  cycle_margin={:.6e}  cycle_slack={:.6e}  {}",
            r.n,
            r.p,
            r.k,
            r.g_grid_margin.min(r.g_grid_margin_direct),
            r.fs_min,
            r.fs_argmin,
            r.cycle_margin.unwrap_or(f64::NAN),
            r.cycle_bound_slack.unwrap_or(f64::NAN),
            if r.pass { "PASS" } else { "FAIL" }
        ),
    }
}

fn verify(which: &TripleOrSweep, c: Option<f64>, cfg: &RunConfig) -> Outcome {
    let triples = selected(which, cfg)?;
    let results = par_map(&triples, cfg.jobs, |q| barrier_for(q, c, cfg.grid));
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r?);
    }
    for r in &reports {
        print_barrier(r);
    }
    if cfg.formats.json {
        let path = out_dir(cfg)?.join("barrier.json");
        if which.sweep.is_some() {
            write_json(&path, &reports)?;
        } else {
            write_json(&path, &reports[0])?;
        }
    }
    Ok(if reports.iter().all(BarrierReport::pass) {
        EXIT_OK
    } else {
        EXIT_BARRIER
    })
}

fn geometry(which: &TripleOrSweep, cfg: &RunConfig) -> Outcome {
    let triples = selected(which, cfg)?;
    let reports = par_map(&triples, cfg.jobs, geometry_report);
    for r in &reports {
        println!(
            "({},{},{}) cos_alpha={:.16e}  volume_ratio={:.16e}  W={:.16e}",
            r.n, r.p, r.k, r.cos_alpha, r.volume_ratio, r.slope_w
        );
    }
    if cfg.formats.json {
        let path = out_dir(cfg)?.join("geometry.json");
        if which.sweep.is_some() {
            write_json(&path, &reports)?;
        } else {
            write_json(&path, &reports[0])?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub theta_infinity: f64,
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
}

fn density(t: &Triple, radius_sweep: Option<usize>, cfg: &RunConfig) -> Outcome {
    let q = params_for(t, cfg)?;
    if radius_sweep.is_none() && !q.is_type_ii() {
        return Err(Error::NotTypeII.into());
    }
    let traj = shoot_unstable_manifold(&q, &density_shoot_config(&cfg.shoot_config()))?;
    let dir = out_dir(cfg)?;
    match radius_sweep {
        None => {
            let rep = density_report(&traj)?;
            for (r, th) in rep.radii.iter().zip(&rep.thetas) {
                println!("R={r:.10e}  Theta={th:.16e}");
            }
            println!(
                "Theta_inf={:.16e}  strictly_below_cone={}",
                rep.theta_infinity, rep.strictly_below_cone
            );
            if cfg.formats.json {
                write_json(&dir.join("density.json"), &rep)?;
            }
        }
        Some(count) => {
            if count == 0 {
                return Err(Failure::usage("--radius-sweep needs at least one radius"));
            }
            let curve = density_curve(&traj, count)?;
            let out = DensityCurve {
                n: q.n,
                p: q.p,
                k: q.k,
                theta_infinity: lo_dynamics::analysis::theta_infinity(&q),
                radii: curve.iter().map(|c| c.0).collect(),
                thetas: curve.iter().map(|c| c.1).collect(),
            };
            println!(
                "{} radii in [{:.6e}, {:.6e}], Theta_inf={:.16e}",
                count,
                out.radii.first().copied().unwrap_or(f64::NAN),
                out.radii.last().copied().unwrap_or(f64::NAN),
                out.theta_infinity
            );
            if cfg.formats.json {
                write_json(&dir.join("density.json"), &out)?;
            }
            if cfg.formats.csv {
                write_csv(
                    &dir.join("density.csv"),
                    &["radius", "theta"],
                    curve.iter().map(|&(r, th)| vec![r, th]),
                )?;
            }
            if cfg.formats.svg {
                let pts: Vec<(f64, f64)> = curve.iter().map(|&(r, th)| (r.ln(), th)).collect();
                let svg = polyline_plot(
                    "density against log radius",
                    &[Series {
                        points: &pts,
                        stroke: "#1f4e9c",
                    }],
                );
                fs::write(dir.join("density.svg"), svg)?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapsCheckReport {
    pub map: String,
    pub theta: f64,
    pub samples: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub max_deviation: f64,
    pub max_singular_value_error: f64,
}

fn maps_check(cfg: &RunConfig) -> Outcome {
    let q = build_params(3, 2, 2, false)?;
    let mut sv_err: f64 = 0.0;
    for x in random_sphere_points(3, cfg.samples, cfg.seed) {
        let sv = numeric_singular_values(&HopfMap, &x, cfg.fd_step)?;
        sv_err = sv_err
            .max((sv[0] - 2.0).abs())
            .max((sv[1] - 2.0).abs())
            .max(sv[2].abs());
    }
    let dev = condition_b_deviation(&HopfMap, q.theta, cfg.samples, cfg.fd_step, cfg.seed)?;
    let rep = MapsCheckReport {
        map: "hopf".into(),
        theta: q.theta,
        samples: cfg.samples,
        seed: cfg.seed,
        fd_step: cfg.fd_step,
        max_deviation: dev,
        max_singular_value_error: sv_err,
    };
    println!(
        "hopf map, {} samples: max deviation {:.3e}, singular value error {:.3e}",
        rep.samples, rep.max_deviation, rep.max_singular_value_error
    );
    if cfg.formats.json {
        write_json(&out_dir(cfg)?.join("maps_check.json"), &rep)?;
    }
    Ok(EXIT_OK)
}
