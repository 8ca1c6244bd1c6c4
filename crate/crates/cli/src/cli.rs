use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lo-dynamics", version, about = "Equivariant minimal graphs over Hopf-type maps")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunFlags,

    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for the run configuration. Unset flags fall back to the config file, then defaults.
#[derive(Debug, Default, Args)]
pub struct RunFlags {
    /// Configuration file; defaults to $LO_DYNAMICS_CONFIG when set.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true)]
    pub conv_tol: Option<f64>,
    #[arg(long, global = true)]
    pub event_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_step: Option<f64>,
    /// Initial offset along the unstable manifold.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub max_crossings: Option<usize>,
    /// Grid resolution for the limit-cycle scan.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Random sample count for maps-check.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for data files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of json,csv,svg.
    #[arg(long, global = true)]
    pub formats: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub allow_inadmissible: bool,
}

#[derive(Debug, Args)]
pub struct TripleOrSweep {
    /// n p k
    #[arg(num_args = 3, value_names = ["N", "P", "K"], required_unless_present = "sweep", conflicts_with = "sweep")]
    pub triple: Vec<u32>,
    /// Every admissible triple with n <= N_MAX and k <= K_MAX.
    #[arg(long, num_args = 2, value_names = ["N_MAX", "K_MAX"])]
    pub sweep: Option<Vec<u32>>,
}

#[derive(Debug, Args)]
pub struct Triple {
    pub n: u32,
    pub p: u32,
    pub k: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissibility, singular value, cone angle and stability type.
    Classify(TripleOrSweep),
    /// Shoot the connecting orbit and write trajectory, profile and events.
    Orbit {
        #[command(flatten)]
        triple: Triple,
        /// Level for the phi-hit events; defaults to the cone slope.
        #[arg(long)]
        target_phi: Option<f64>,
    },
    /// Barrier inequalities for the equilibrium type of each triple.
    Verify {
        #[command(flatten)]
        which: TripleOrSweep,
        /// Barrier constant for type I triples.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Cone angle, volume ratio and Jordan angles.
    Geometry(TripleOrSweep),
    /// Densities of the rescaled solutions, or the density curve with --radius-sweep.
    Density {
        #[command(flatten)]
        triple: Triple,
        /// Sample the density at this many radii instead of at the cone hits.
        #[arg(long, value_name = "COUNT")]
        radius_sweep: Option<usize>,
    },
    /// Numeric check of the singular-value identity for the Hopf map.
    MapsCheck,
}
