//! End-to-end checks of the command-line surface: exit codes, file outputs
//! and the documented behaviors of each subcommand.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use geovox::obj;
use geovox::table::read_csv_column;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geovox"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn geovox")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_torus_default_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["synth", "torus", "--R", "10", "--r", "4", "-o", "torus.obj"], dir.path());
    assert_code(&out, 0);
    let mesh = obj::read_quad_mesh(&dir.path().join("torus.obj"), true).unwrap();
    assert_eq!(mesh.faces.len(), 512);
    assert_eq!(mesh.vertices.len(), 512);
    // Watertight: every edge shared by exactly two faces.
    assert!(mesh.edge_face_counts().values().all(|&c| c == 2));
    assert!(dir.path().join("torus.xyz").exists());
}

#[test]
fn synth_sphere_gap_watertight_audit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["synth", "sphere-gap", "--radius", "10", "--gap", "60", "--depth", "3", "-o", "gap.obj"],
        dir.path(),
    );
    assert_code(&out, 0);
    let mesh = obj::read_quad_mesh(&dir.path().join("gap.obj"), true).unwrap();
    // Pole-ring edges belong to one face, everything else to two.
    for (_, count) in mesh.edge_face_counts() {
        assert!(count == 1 || count == 2);
    }
    let interior = mesh
        .edge_face_counts()
        .values()
        .filter(|&&c| c == 2)
        .count();
    assert!(interior > 0);
}

#[test]
fn synth_unknown_shape_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["synth", "nosuch"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn feature_missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["feature", "-i", "absent.obj", "-o", "outdir"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn feature_sphere_constancy_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            &["synth", "ellipsoid", "--a", "8", "--b", "8", "--c", "8", "--nu", "64", "--nv", "32", "-o", "s.obj"],
            dir.path(),
        ),
        0,
    );
    assert_code(
        &run(
            &["feature", "-i", "s.obj", "-o", "f", "--spacing", "0.5"],
            dir.path(),
        ),
        0,
    );
    let vals = read_csv_column(&dir.path().join("f/vertex_features.csv"), "feature").unwrap();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
    assert!(var.sqrt() / mean < 0.05, "cv = {}", var.sqrt() / mean);
    assert!(dir.path().join("f/report.json").exists());
    assert!(dir.path().join("f/feature.vgf").exists());
    assert!(dir.path().join("f/mesh_feature.obj").exists());
}

#[test]
fn feature_torus_polarity_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            &["synth", "torus", "--R", "10", "--r", "4", "--nu", "48", "--nv", "24", "-o", "t.obj"],
            dir.path(),
        ),
        0,
    );
    assert_code(
        &run(&["feature", "-i", "t.obj", "-o", "f", "--spacing", "0.8"], dir.path()),
        0,
    );
    let vals = read_csv_column(&dir.path().join("f/vertex_features.csv"), "feature").unwrap();
    // Vertex layout of the torus generator: index = u * nv + v; v = 0 is the
    // outer equator ring, v = nv/2 the inner one.
    let (nu, nv) = (48usize, 24usize);
    let ring_mean = |v0: usize| {
        let vals: Vec<f64> = (0..nu).map(|u| vals[u * nv + v0]).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let outer = ring_mean(0);
    let inner = ring_mean(nv / 2);
    assert!(
        outer > inner,
        "outer equator mean {outer} must exceed inner {inner}"
    );
}

#[test]
fn feature_not_converged_exits_3_with_partial_dumps() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            &["synth", "ellipsoid", "--a", "5", "--b", "5", "--c", "5", "--nu", "32", "--nv", "16", "-o", "s.obj"],
            dir.path(),
        ),
        0,
    );
    let out = run(
        &[
            "feature", "-i", "s.obj", "-o", "f", "--tol", "1e-9", "--max-iters", "3",
            "--dump-intermediates",
        ],
        dir.path(),
    );
    assert_code(&out, 3);
    assert!(
        dir.path().join("f/h.vgf").exists(),
        "partial h dump must be retained"
    );
}

#[test]
fn covfeat_plane_patch_zero_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for x in 0..8 {
        for y in 0..8 {
            text.push_str(&format!("{} {} 0\n", x, y));
        }
    }
    fs::write(dir.path().join("plane.xyz"), text).unwrap();
    assert_code(
        &run(&["covfeat", "-i", "plane.xyz", "--k", "4", "-o", "c.csv"], dir.path()),
        0,
    );
    let curv = read_csv_column(&dir.path().join("c.csv"), "curvature").unwrap();
    assert_eq!(curv.len(), 64);
    assert!(curv.iter().all(|&c| c.abs() < 1e-12));
}

#[test]
fn track_static_sequence_small_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            &["synth", "ellipsoid", "--a", "5", "--b", "5", "--c", "5", "--nu", "12", "--nv", "8", "-o", "m.obj"],
            dir.path(),
        ),
        0,
    );
    fs::create_dir(dir.path().join("frames")).unwrap();
    for t in 0..3 {
        fs::copy(
            dir.path().join("m.xyz"),
            dir.path().join(format!("frames/f_{t:03}.xyz")),
        )
        .unwrap();
    }
    assert_code(
        &run(
            &["track", "--mesh0", "m.obj", "--contours", "frames", "-o", "out", "--sigma-v", "5"],
            dir.path(),
        ),
        0,
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/diagnostics.json")).unwrap())
            .unwrap();
    let frames = report["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 2);
    for f in frames {
        assert!(f["error"].as_f64().unwrap() < 1e-3);
    }
    assert!(dir.path().join("out/frame_002.obj").exists());
}

#[test]
fn analyze_correlate_single_frame() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("f0.csv"), "vertex_index,feature\n0,1.0\n1,2.0\n2,3.5\n").unwrap();
    assert_code(
        &run(
            &["analyze", "correlate", "--inputs", "f0.csv", "-o", "r.csv"],
            dir.path(),
        ),
        0,
    );
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(text, "frame,r_t\n0,1\n");
}

#[test]
fn analyze_elongate_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(&["synth", "torus", "--R", "6", "--r", "2", "--nu", "8", "--nv", "8", "-o", "t.obj"], dir.path()),
        0,
    );
    // Uniformly scaled copy: all strains (s^2-1)/2.
    let mesh = obj::read_quad_mesh(&dir.path().join("t.obj"), true).unwrap();
    let mut scaled = mesh.clone();
    for p in &mut scaled.vertices {
        for a in 0..3 {
            p[a] *= 2.0;
        }
    }
    obj::write_quad_mesh(&scaled, &dir.path().join("t2.obj")).unwrap();
    assert_code(
        &run(
            &["analyze", "elongate", "--reference", "t.obj", "--deformed", "t2.obj", "-o", "e.csv"],
            dir.path(),
        ),
        0,
    );
    let e = read_csv_column(&dir.path().join("e.csv"), "elongation").unwrap();
    assert!(e.iter().all(|&v| (v - 1.5).abs() < 1e-9));

    // Two frames of per-vertex values for the curve.
    let n = mesh.vertices.len();
    let mut f0 = String::from("vertex_index,feature\n");
    let mut f1 = String::from("vertex_index,feature\n");
    for i in 0..n {
        f0.push_str(&format!("{i},{}\n", i as f64));
        f1.push_str(&format!("{i},{}\n", 2.0 * i as f64));
    }
    fs::write(dir.path().join("s0.csv"), f0).unwrap();
    fs::write(dir.path().join("s1.csv"), f1).unwrap();
    assert_code(
        &run(
            &[
                "analyze", "curve", "--inputs", "s0.csv", "s1.csv", "--mesh", "t.obj",
                "--vertex", "9", "-o", "c.csv", "--svg", "c.svg",
            ],
            dir.path(),
        ),
        0,
    );
    let c = read_csv_column(&dir.path().join("c.csv"), "curve_value").unwrap();
    assert_eq!(c, vec![0.0, 1.0]);
    assert!(fs::read_to_string(dir.path().join("c.svg")).unwrap().contains("polyline"));

    assert_code(
        &run(
            &["analyze", "diff", "--inputs", "s0.csv", "s1.csv", "--frame", "1", "-o", "d.csv"],
            dir.path(),
        ),
        0,
    );
    let d = read_csv_column(&dir.path().join("d.csv"), "difference").unwrap();
    assert_eq!(d[3], 3.0);
}

#[test]
fn bad_threads_env_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["synth", "torus", "--R", "10", "--r", "4", "-o", "t.obj"])
        .current_dir(dir.path())
        .env("GEOVOX_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["covfeat", "--nonsense", "1"], dir.path());
    assert_code(&out, 2);
}
