//! Command-line surface: synth | feature | covfeat | track | analyze.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "geovox",
    about = "Geodesic surface-variation features, eigenfeature baselines and diffeomorphic vertex tracking on voxel grids",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic test shape as OBJ plus XYZ.
    Synth(SynthArgs),
    /// Run the full feature pipeline on a mesh, point cloud or mask.
    Feature(FeatureArgs),
    /// Covariance eigenfeatures per point from k nearest neighbors.
    Covfeat(CovfeatArgs),
    /// Track mesh vertices across a contour sequence.
    Track(TrackArgs),
    /// Sequence-level analyses over per-frame feature CSVs and meshes.
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub shape: SynthShape,
}

#[derive(Debug, Subcommand)]
pub enum SynthShape {
    /// Torus with major radius R and tube radius r.
    Torus {
        #[arg(long = "R")]
        r_major: f64,
        #[arg(long = "r")]
        r_minor: f64,
        #[arg(long, default_value_t = 32)]
        nu: usize,
        #[arg(long, default_value_t = 16)]
        nv: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Ellipsoid with semi-axes a, b, c.
    Ellipsoid {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 32)]
        nu: usize,
        #[arg(long, default_value_t = 16)]
        nv: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Sphere with a smooth indented cap.
    SphereGap {
        #[arg(long)]
        radius: f64,
        /// Full angular diameter of the indented cap, degrees.
        #[arg(long)]
        gap: f64,
        #[arg(long)]
        depth: f64,
        #[arg(long, default_value_t = 32)]
        nu: usize,
        #[arg(long, default_value_t = 16)]
        nv: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Sphere with sinusoidal radial bumps.
    BumpSphere {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        amp: f64,
        #[arg(long, default_value_t = 3.0)]
        freq: f64,
        #[arg(long, default_value_t = 32)]
        nu: usize,
        #[arg(long, default_value_t = 16)]
        nv: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

impl SynthArgs {
    pub fn out(&self) -> &PathBuf {
        match &self.shape {
            SynthShape::Torus { out, .. }
            | SynthShape::Ellipsoid { out, .. }
            | SynthShape::SphereGap { out, .. }
            | SynthShape::BumpSphere { out, .. } => out,
        }
    }
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// Input mesh (.obj), point cloud (.xyz) or occupancy mask (.vgf).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// TOML config file; CLI flags win over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Padding in voxels per side; derived from the sphere headroom if unset.
    #[arg(long)]
    pub padding: Option<usize>,
    /// Morphological closing iterations during voxelization.
    #[arg(long)]
    pub closing: Option<usize>,
    #[arg(long)]
    pub erosion_iters: Option<usize>,
    #[arg(long)]
    pub radius_scale: Option<f64>,
    /// Jacobi stopping tolerance (absolute, on the 0..1e4 scale).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub length_tol: Option<f64>,
    #[arg(long)]
    pub length_max_sweeps: Option<usize>,
    #[arg(long)]
    pub stagnant_eps: Option<f64>,
    /// Also write h, L0, L1 and G grids.
    #[arg(long)]
    pub dump_intermediates: bool,
    /// Accept OBJ files with paired triangles instead of quads.
    #[arg(long)]
    pub lenient_obj: bool,
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct CovfeatArgs {
    /// Input point cloud (.xyz) or mesh (.obj, vertices used).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Neighborhood size.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Output CSV.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub lenient_obj: bool,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Quad mesh tracked from the first frame.
    #[arg(long)]
    pub mesh0: PathBuf,
    /// Directory of per-frame contour .xyz files, sorted by name.
    #[arg(long)]
    pub contours: PathBuf,
    /// Output directory for per-frame OBJs and diagnostics.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub sigma_v: Option<f64>,
    #[arg(long)]
    pub sigma_w: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub lenient_obj: bool,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Pearson correlation of each frame's feature map against frame 0.
    Correlate {
        /// Per-frame CSV files (or directories of them, sorted).
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        /// CSV column holding the per-vertex values.
        #[arg(long, default_value = "feature")]
        column: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Green-Lagrange elongation of a deformed mesh against a reference.
    Elongate {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        deformed: PathBuf,
        #[arg(long)]
        lenient_obj: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Per-vertex feature difference of frame t against frame 0.
    Diff {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "feature")]
        column: String,
        #[arg(long)]
        frame: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Normalized feature evolution around one vertex's neighborhood.
    Curve {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "feature")]
        column: String,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        lenient_obj: bool,
        #[arg(short, long)]
        out: PathBuf,
        /// Optional SVG line plot of the curve.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}
