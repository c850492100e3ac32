//! Command implementations behind the CLI: shape synthesis, the feature
//! pipeline, covariance features, vertex tracking and sequence analysis.

use std::fs;
use std::path::{Path, PathBuf};

use geovox_core::covariance;
use geovox_core::eulerian::{
    self, feature_field, setup_boundaries, solve_laplace, solve_lengths, surface_feature,
    tangent_field, BoundaryConfig, EulerianParams,
};
use geovox_core::grid::{voxelize, BinaryMask, ScalarGrid};
use geovox_core::lddmm::{self, track_sequence, OptimSettings, TrackSettings};
use geovox_core::math::{eigenvalues_sym3, eigenvector_sym3, sub, Vec3};
use geovox_core::shapes::{self, PointSet, QuadMesh};
use geovox_core::temporal::{
    elongation, feature_difference, pearson_series, point_neighborhood_curve, FeatureSeries,
};
use geovox_core::Error as CoreError;

use crate::cli::{
    AnalyzeCommand, CovfeatArgs, FeatureArgs, SynthArgs, SynthShape, TrackArgs,
};
use crate::config::{FileConfig, Resolved};
use crate::error::{AppError, AppResult};
use crate::report::{self, FeatureReport, TrackFrameReport, TrackReport};
use crate::table::{self, fmt_f64};
use crate::{obj, svg, vgf, xyz};

fn ensure_dir(path: &Path) -> AppResult<()> {
    fs::create_dir_all(path).map_err(|e| AppError::io(path, e))
}

pub fn cmd_synth(args: &SynthArgs) -> AppResult<()> {
    let mesh = match &args.shape {
        SynthShape::Torus { r_major, r_minor, nu, nv, .. } => {
            shapes::gen_torus(*r_major, *r_minor, *nu, *nv)?
        }
        SynthShape::Ellipsoid { a, b, c, nu, nv, .. } => {
            shapes::gen_ellipsoid(*a, *b, *c, *nu, *nv)?
        }
        SynthShape::SphereGap { radius, gap, depth, nu, nv, .. } => {
            shapes::gen_sphere_gap(*radius, *gap, *depth, *nu, *nv)?
        }
        SynthShape::BumpSphere { radius, amp, freq, nu, nv, .. } => {
            shapes::gen_bump_sphere(*radius, *amp, *freq, *nu, *nv)?
        }
    };
    let out = args.out();
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    obj::write_quad_mesh(&mesh, out)?;
    let xyz_path = out.with_extension("xyz");
    xyz::write_points(&mesh.vertices, &xyz_path)?;
    println!("wrote {} and {}", out.display(), xyz_path.display());
    Ok(())
}

/// What the feature pipeline was fed.
enum FeatureInput {
    Mesh(QuadMesh),
    Points(Vec<Vec3>),
    Mask(BinaryMask),
}

fn load_feature_input(path: &Path, lenient_obj: bool) -> AppResult<FeatureInput> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("obj") => Ok(FeatureInput::Mesh(obj::read_quad_mesh(path, !lenient_obj)?)),
        Some("xyz") => Ok(FeatureInput::Points(xyz::read_points(path)?)),
        Some("vgf") => Ok(FeatureInput::Mask(vgf::read_mask(path)?)),
        _ => Err(AppError::Usage(format!(
            "unsupported input {}: expected .obj, .xyz or .vgf",
            path.display()
        ))),
    }
}

/// Padding that guarantees the surrounding sphere (including its 5% growth
/// cap) fits in the voxelized grid.
fn auto_padding(points: &[Vec3], spacing: f64, radius_scale: f64, closing: usize) -> usize {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for a in 0..3 {
            c[a] += p[a] / n;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    let mut lo = points[0];
    let mut hi = points[0];
    let mut dist_max: f64 = 0.0;
    for p in points {
        let d = sub(*p, c);
        for r in 0..3 {
            for s in 0..3 {
                cov[r][s] += d[r] * d[s] / n;
            }
            lo[r] = lo[r].min(p[r]);
            hi[r] = hi[r].max(p[r]);
        }
        dist_max = dist_max.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
    }
    let eig = eigenvalues_sym3(&cov);
    let axis = eigenvector_sym3(&cov, eig[2]);
    let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let d = sub(*p, c);
        let proj = d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2];
        pmin = pmin.min(proj);
        pmax = pmax.max(proj);
    }
    // The sphere may grow in 5% steps until it contains the farthest voxel;
    // one voxel of rasterization slack on top.
    let r_cap = (radius_scale * (pmax - pmin)).max(dist_max * 1.05) + spacing;
    let mut need: f64 = 0.0;
    for a in 0..3 {
        need = need.max(c[a] + r_cap - hi[a]);
        need = need.max(lo[a] - (c[a] - r_cap));
    }
    let pad = (need / spacing).ceil() as usize + 3;
    pad.max(closing + 1)
}

pub fn cmd_feature(args: &FeatureArgs) -> AppResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let mut resolved = Resolved::default();
    let spacing = resolved.pick("spacing", args.spacing, file_cfg.spacing, 1.0);
    let closing = resolved.pick("closing", args.closing, file_cfg.closing, 2usize);
    let erosion_iters =
        resolved.pick("erosion_iters", args.erosion_iters, file_cfg.erosion_iters, 1usize);
    let radius_scale =
        resolved.pick("radius_scale", args.radius_scale, file_cfg.radius_scale, 0.8);
    let tol = resolved.pick("tol", args.tol, file_cfg.tol, 0.5);
    let max_iters = resolved.pick("max_iters", args.max_iters, file_cfg.max_iters, 5000usize);
    let length_tol = resolved.pick("length_tol", args.length_tol, file_cfg.length_tol, 1e-3);
    let length_max_sweeps = resolved.pick(
        "length_max_sweeps",
        args.length_max_sweeps,
        file_cfg.length_max_sweeps,
        4000usize,
    );
    let stagnant_eps =
        resolved.pick("stagnant_eps", args.stagnant_eps, file_cfg.stagnant_eps, 1e-6);
    let padding_opt = resolved.pick_opt("padding", args.padding, file_cfg.padding);

    let input = load_feature_input(&args.input, args.lenient_obj)?;
    let (shape, surface_points, mesh): (BinaryMask, Option<Vec<Vec3>>, Option<QuadMesh>) =
        match input {
            FeatureInput::Mask(m) => (m, None, None),
            FeatureInput::Points(pts) => {
                if pts.is_empty() {
                    return Err(CoreError::InvalidInput("empty point set".into()).into());
                }
                let pad = padding_opt
                    .unwrap_or_else(|| auto_padding(&pts, spacing, radius_scale, closing));
                let src = resolved.sources["padding"].clone();
                resolved.note("padding", pad as f64, &src);
                (voxelize(&pts, spacing, pad, closing)?, Some(pts), None)
            }
            FeatureInput::Mesh(mesh) => {
                let pts = mesh.vertices.clone();
                if pts.is_empty() {
                    return Err(CoreError::InvalidInput("mesh has no vertices".into()).into());
                }
                let pad = padding_opt
                    .unwrap_or_else(|| auto_padding(&pts, spacing, radius_scale, closing));
                let src = resolved.sources["padding"].clone();
                resolved.note("padding", pad as f64, &src);
                (voxelize(&pts, spacing, pad, closing)?, Some(pts), Some(mesh))
            }
        };

    ensure_dir(&args.out)?;
    let dump = |name: &str, grid: &ScalarGrid| -> AppResult<()> {
        vgf::write_grid(grid, &args.out.join(name))
    };

    let cfg = setup_boundaries(&shape, erosion_iters, radius_scale)?;
    if cfg.growth_steps() > 0 && args.verbose {
        eprintln!(
            "note: sphere radius grown {} time(s) to contain the shape",
            cfg.growth_steps()
        );
    }
    let lap = match solve_laplace(&cfg, tol, max_iters) {
        Ok(sol) => sol,
        Err(CoreError::NotConverged(info)) => {
            if args.dump_intermediates {
                dump("h.vgf", &info.last[0])?;
            }
            return Err(CoreError::NotConverged(info).into());
        }
        Err(e) => return Err(e.into()),
    };
    let tangent = tangent_field(&lap.h, cfg.region(), stagnant_eps)?;
    let length_max_cycles = (length_max_sweeps / 8).max(1);
    let lens = match solve_lengths(&tangent, &cfg, length_tol, length_max_cycles) {
        Ok(sol) => sol,
        Err(CoreError::NotConverged(info)) => {
            if args.dump_intermediates {
                dump("h.vgf", &lap.h)?;
                dump("l0.vgf", &info.last[0])?;
                dump("l1.vgf", &info.last[1])?;
            }
            return Err(CoreError::NotConverged(info).into());
        }
        Err(e) => return Err(e.into()),
    };
    let feat = feature_field(&cfg, &lens.g)?;

    vgf::write_grid(&feat, &args.out.join("feature.vgf"))?;
    if args.dump_intermediates {
        dump("h.vgf", &lap.h)?;
        dump("l0.vgf", &lens.l0)?;
        dump("l1.vgf", &lens.l1)?;
        dump("g.vgf", &lens.g)?;
    }

    let mut projected_count = 0usize;
    let mut out_of_domain = Vec::new();
    if let Some(points) = &surface_points {
        let samples = surface_feature(points, &feat, &cfg)?;
        projected_count = samples.projected.len();
        out_of_domain = samples.out_of_domain.clone();
        let rows: Vec<Vec<String>> = points
            .iter()
            .zip(&samples.values)
            .enumerate()
            .map(|(i, (p, v))| {
                vec![
                    i.to_string(),
                    fmt_f64(p[0]),
                    fmt_f64(p[1]),
                    fmt_f64(p[2]),
                    fmt_f64(*v),
                ]
            })
            .collect();
        table::write_csv(
            &args.out.join("vertex_features.csv"),
            &["vertex_index", "x", "y", "z", "feature"],
            &rows,
        )?;
        if let Some(mesh) = &mesh {
            obj::write_mesh_with_scalar(mesh, &samples.values, &args.out.join("mesh_feature.obj"))?;
        }
    }

    let full = FeatureReport {
        iterations: lap.iterations,
        residual: lap.residual,
        stagnant_count: tangent.stagnant_count,
        r: cfg.radius(),
        center: cfg.center(),
        length_sweeps: lens.sweeps,
        length_residual: lens.residual,
        growth_steps: cfg.growth_steps(),
        projected_count,
        out_of_domain,
        params: resolved.values.clone(),
        param_sources: resolved.sources.clone(),
    };
    report::write_json(&full, &args.out.join("report.json"))?;
    println!("wrote feature field and report under {}", args.out.display());
    Ok(())
}

pub fn cmd_covfeat(args: &CovfeatArgs) -> AppResult<()> {
    let points: Vec<Vec3> = match args.input.extension().and_then(|e| e.to_str()) {
        Some("xyz") => xyz::read_points(&args.input)?,
        Some("obj") => obj::read_quad_mesh(&args.input, !args.lenient_obj)?.vertices,
        _ => {
            return Err(AppError::Usage(format!(
                "unsupported input {}: expected .obj or .xyz",
                args.input.display()
            )))
        }
    };
    let set = PointSet::new(points.clone());
    let feats = covariance::pointwise_features(&set, args.k)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(&feats)
        .enumerate()
        .map(|(i, (p, f))| {
            vec![
                i.to_string(),
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(p[2]),
                fmt_f64(f.lambda[0]),
                fmt_f64(f.lambda[1]),
                fmt_f64(f.lambda[2]),
                fmt_f64(f.anisotropy),
                fmt_f64(f.omnivariance),
                fmt_f64(f.linearity),
                fmt_f64(f.planarity),
                fmt_f64(f.sphericity),
                fmt_f64(f.curvature),
            ]
        })
        .collect();
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    table::write_csv(
        &args.out,
        &[
            "point_index",
            "x",
            "y",
            "z",
            "lambda1",
            "lambda2",
            "lambda3",
            "anisotropy",
            "omnivariance",
            "linearity",
            "planarity",
            "sphericity",
            "curvature",
        ],
        &rows,
    )?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn sorted_xyz_files(dir: &Path) -> AppResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| AppError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("xyz"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn cmd_track(args: &TrackArgs) -> AppResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let mut resolved = Resolved::default();
    let sigma_v = resolved.pick("sigma_v", args.sigma_v, file_cfg.sigma_v, 8.0);
    let sigma_w = resolved.pick_opt("sigma_w", args.sigma_w, file_cfg.sigma_w);
    let gamma = resolved.pick("gamma", args.gamma, file_cfg.gamma, 0.01);
    let steps = resolved.pick("steps", args.steps, file_cfg.steps, 15usize);
    let max_iters = resolved.pick("max_iters", args.max_iters, file_cfg.max_iters, 200usize);
    let step_size = resolved.pick("step_size", args.step_size, file_cfg.step_size, 1.0);
    let grad_tol = resolved.pick("grad_tol", args.grad_tol, file_cfg.grad_tol, 1e-6);

    let mesh0 = obj::read_quad_mesh(&args.mesh0, !args.lenient_obj)?;
    let contour_files = sorted_xyz_files(&args.contours)?;
    if contour_files.len() < 2 {
        return Err(AppError::Usage(format!(
            "need at least two .xyz contour frames in {}, found {}",
            args.contours.display(),
            contour_files.len()
        )));
    }
    let mut contours = Vec::with_capacity(contour_files.len());
    for f in &contour_files {
        contours.push(PointSet::new(xyz::read_points(f)?));
    }

    let settings = TrackSettings {
        sigma_v,
        sigma_w,
        gamma,
        n_steps: steps,
        optim: OptimSettings {
            step_size,
            max_iters,
            grad_tol,
        },
    };
    let result = track_sequence(&mesh0, &contours, &settings)?;

    ensure_dir(&args.out)?;
    for (t, frame) in result.trajectory.iter().enumerate() {
        let mesh = QuadMesh {
            vertices: frame.clone(),
            faces: result.faces.clone(),
        };
        obj::write_quad_mesh(&mesh, &args.out.join(format!("frame_{t:03}.obj")))?;
    }
    let frames: Vec<TrackFrameReport> = result
        .diagnostics
        .iter()
        .map(|d| TrackFrameReport {
            frame: d.frame,
            loss: d.loss,
            iters: d.iterations,
            error: d.error,
            converged: d.converged,
            data_term: d.data_term,
        })
        .collect();
    let final_error = match result.trajectory.last() {
        Some(last) if result.aborted_at.is_none() => Some(lddmm::tracking_error(
            last,
            &contours[result.trajectory.len() - 1].points,
        )?),
        _ => None,
    };
    let track_report = TrackReport {
        frames,
        final_error,
        aborted_at: result.aborted_at,
        params: resolved.values.clone(),
        param_sources: resolved.sources.clone(),
    };
    report::write_json(&track_report, &args.out.join("diagnostics.json"))?;
    if let Some(frame) = result.aborted_at {
        return Err(AppError::TrackAborted { frame });
    }
    println!(
        "tracked {} frames into {}",
        result.trajectory.len(),
        args.out.display()
    );
    Ok(())
}

fn series_inputs(inputs: &[PathBuf]) -> AppResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| AppError::io(input, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(AppError::Usage("no input CSV files".into()));
    }
    Ok(files)
}

fn load_series(inputs: &[PathBuf], column: &str) -> AppResult<FeatureSeries> {
    let files = series_inputs(inputs)?;
    let mut frames = Vec::with_capacity(files.len());
    for f in &files {
        frames.push(table::read_csv_column(f, column)?);
    }
    Ok(FeatureSeries::new(frames)?)
}

pub fn cmd_analyze(cmd: &AnalyzeCommand) -> AppResult<()> {
    match cmd {
        AnalyzeCommand::Correlate { inputs, column, out } => {
            let series = load_series(inputs, column)?;
            let rs = pearson_series(&series)?;
            let rows: Vec<Vec<String>> = rs
                .iter()
                .enumerate()
                .map(|(t, r)| {
                    vec![
                        t.to_string(),
                        match r {
                            Some(v) => fmt_f64(*v),
                            None => "NaN".into(),
                        },
                    ]
                })
                .collect();
            table::write_csv(out, &["frame", "r_t"], &rows)?;
            println!("wrote {}", out.display());
        }
        AnalyzeCommand::Elongate { reference, deformed, lenient_obj, out } => {
            let r = obj::read_quad_mesh(reference, !lenient_obj)?;
            let d = obj::read_quad_mesh(deformed, !lenient_obj)?;
            let strains = elongation(&r, &d)?;
            let rows: Vec<Vec<String>> = strains
                .iter()
                .enumerate()
                .map(|(v, s)| vec![v.to_string(), fmt_f64(*s)])
                .collect();
            table::write_csv(out, &["vertex", "elongation"], &rows)?;
            println!("wrote {}", out.display());
        }
        AnalyzeCommand::Diff { inputs, column, frame, out } => {
            let series = load_series(inputs, column)?;
            let diff = feature_difference(&series, *frame)?;
            let rows: Vec<Vec<String>> = diff
                .iter()
                .enumerate()
                .map(|(v, d)| vec![v.to_string(), fmt_f64(*d)])
                .collect();
            table::write_csv(out, &["vertex", "difference"], &rows)?;
            println!("wrote {}", out.display());
        }
        AnalyzeCommand::Curve { inputs, column, mesh, vertex, lenient_obj, out, svg: svg_out } => {
            let series = load_series(inputs, column)?;
            let mesh = obj::read_quad_mesh(mesh, !lenient_obj)?;
            let curve = point_neighborhood_curve(&series, &mesh, *vertex)?;
            let rows: Vec<Vec<String>> = curve
                .normalized
                .iter()
                .enumerate()
                .map(|(t, v)| vec![t.to_string(), fmt_f64(*v)])
                .collect();
            table::write_csv(out, &["frame", "curve_value"], &rows)?;
            if let Some(svg_path) = svg_out {
                svg::write_line_plot(
                    svg_path,
                    &curve.normalized,
                    &format!("normalized feature around vertex {vertex}"),
                    "feature",
                )?;
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

/// Shared pipeline used by tests: voxelize points and compute all fields.
pub fn feature_fields_for_points(
    points: &[Vec3],
    spacing: f64,
    closing: usize,
    params: &EulerianParams,
) -> AppResult<(eulerian::GeodesicFields, eulerian::FieldReport)> {
    let pad = auto_padding(points, spacing, params.radius_scale, closing);
    let shape = voxelize(points, spacing, pad, closing)?;
    Ok(eulerian::compute_feature_fields(&shape, params)?)
}

/// Feature values sampled at `points` after running the pipeline on them.
pub fn surface_feature_for_points(
    points: &[Vec3],
    spacing: f64,
    closing: usize,
    params: &EulerianParams,
) -> AppResult<(Vec<f64>, BoundaryConfig)> {
    let (fields, _) = feature_fields_for_points(points, spacing, closing, params)?;
    let samples = surface_feature(points, &fields.feat, &fields.cfg)?;
    Ok((samples.values, fields.cfg))
}
