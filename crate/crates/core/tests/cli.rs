use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;
use voxcurv::cli;
use voxcurv::prelude::*;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("voxcurv").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn gen(dir: &Path, shape: &str, name: &str) -> PathBuf {
    let path = dir.join(name);
    let r = run(&["gen", shape, "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn csv_values(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn analyze_unit_cube() {
    let dir = TempDir::new().unwrap();
    let cube = gen(dir.path(), "cube:1", "cube.txt");
    let r = run(&["analyze", s(&cube)]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    assert_eq!(v["surface"]["counts"]["M3"], 8);
    assert_eq!(v["surface"]["counts"]["M4Flat"], 0);
    assert_eq!(v["genus"], 0);
    assert_eq!(v["total_gaussian"]["quarter_pi_units"], 8);
    assert!((v["total_gaussian"]["radians"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-12);
    assert_eq!(v["eq1"]["holds"], true);
    assert_eq!(v["feature_vector"]["ratios"][0], 1.0);
}

#[test]
fn analyze_torus() {
    let dir = TempDir::new().unwrap();
    let t = gen(dir.path(), "torus:4,1", "torus.txt");
    let v = json(&run(&["analyze", s(&t)]).stdout);
    assert_eq!(v["genus"], 1);
    assert_eq!(v["euler_characteristic"], 0);
    assert_eq!(v["total_gaussian"]["quarter_pi_units"], 0);
    assert_eq!(v["eq1"]["holds"], false);
    assert_eq!(v["eq1"]["applicable"], false);
}

#[test]
fn analyze_empty_grid() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("empty.txt");
    let mut bytes = Vec::new();
    save_grid(
        &VoxelGrid::new(2, 2, 2).unwrap(),
        GridFormat::Text,
        &mut bytes,
    )
    .unwrap();
    fs::write(&p, bytes).unwrap();
    let r = run(&["analyze", s(&p)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("empty object"));
}

#[test]
fn analyze_nonmanifold_omits_genus() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("diag.txt");
    fs::write(&p, "vox3 2 2 1\n10\n01\n").unwrap();
    let r = run(&["analyze", s(&p)]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    assert_eq!(v["nonmanifold"], true);
    assert!(v.get("genus").is_none());
    assert!(v["surface"]["nonmanifold_vertices"].as_u64().unwrap() > 0);
    assert!(v["surface"]["edge_defects"].as_u64().unwrap() > 0);
}

#[test]
fn analyze_format_override_and_errors() {
    let dir = TempDir::new().unwrap();
    let raw = dir.path().join("c.vox");
    assert_eq!(
        run(&["gen", "cube:2", "--out", s(&raw), "--format", "raw"]).code,
        0
    );
    assert_eq!(run(&["analyze", s(&raw)]).code, 0);
    assert_eq!(run(&["analyze", s(&raw), "--format", "raw"]).code, 0);
    assert_eq!(run(&["analyze", s(&raw), "--format", "text"]).code, 2);
    assert_eq!(run(&["analyze", "/nonexistent/grid.txt"]).code, 2);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "vox3 1 1 1\n2\n").unwrap();
    let r = run(&["analyze", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("at byte 11"), "{}", r.stderr);
}

#[test]
fn curvmap_unit_cube_gauss() {
    let dir = TempDir::new().unwrap();
    let cube = gen(dir.path(), "cube:1", "cube.txt");
    let out = dir.path().join("map.csv");
    let r = run(&[
        "curvmap",
        s(&cube),
        "--kind",
        "gauss",
        "--axis",
        "z",
        "--level",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let rows = csv_values(&text);
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row.len(), 2);
        for v in row {
            assert!((v - PI).abs() < 1e-9);
        }
    }
}

#[test]
fn curvmap_meanabs_flat_slab_interior() {
    let dir = TempDir::new().unwrap();
    let slab = gen(dir.path(), "box:16,16,1", "slab.txt");
    let r = run(&[
        "curvmap",
        s(&slab),
        "--kind",
        "meanabs",
        "--axis",
        "z",
        "--level",
        "1",
    ]);
    assert_eq!(r.code, 0);
    let rows = csv_values(&r.stdout);
    assert_eq!((rows.len(), rows[0].len()), (9, 9));
    for row in &rows[1..8] {
        for &v in &row[1..8] {
            assert_eq!(v, 0.0);
        }
    }
    assert!(rows[0][0] > 0.0);
}

#[test]
fn curvmap_level_clamped() {
    let dir = TempDir::new().unwrap();
    let cube = gen(dir.path(), "cube:3", "cube.txt");
    let r = run(&["curvmap", s(&cube), "--level", "7"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("clamped"));
    let rows = csv_values(&r.stdout);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][0] - 4.0 * PI).abs() < 1e-9);
    assert!(r
        .stdout
        .starts_with("# vox3-map kind=gauss_sum level=2 plane=xy nx=1 ny=1\n"));
}

#[test]
fn curvmap_pgm_and_bad_flags() {
    let dir = TempDir::new().unwrap();
    let cube = gen(dir.path(), "cube:2", "cube.txt");
    let out = dir.path().join("m.pgm");
    assert_eq!(
        run(&["curvmap", s(&cube), "--format", "pgm", "--out", s(&out)]).code,
        0
    );
    assert!(fs::read(&out).unwrap().starts_with(b"P5\n# vox3-map"));
    assert_eq!(run(&["curvmap", s(&cube), "--kind", "fancy"]).code, 2);
    assert_eq!(run(&["curvmap", s(&cube), "--axis", "w"]).code, 2);
    assert_eq!(run(&["curvmap", s(&cube), "--level", "-1"]).code, 2);
}

#[test]
fn pyramid_unit_cube_totals() {
    let dir = TempDir::new().unwrap();
    let cube = gen(dir.path(), "cube:1", "cube.txt");
    let out = dir.path().join("pyr");
    let r = run(&[
        "pyramid",
        s(&cube),
        "--kind",
        "gauss",
        "--axis",
        "z",
        "--levels",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let summary = json(&fs::read_to_string(out.join("summary.json")).unwrap());
    assert_eq!(summary, json(&r.stdout));
    let levels = summary["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);
    for l in levels {
        assert_eq!(l["total_quarter_pi_units"], 8);
        assert!((l["total"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-12);
    }
    assert!(out.join("level_0.csv").exists());
    assert!(out.join("level_1.csv").exists());
}

#[test]
fn pyramid_bump_plate_argmax() {
    let dir = TempDir::new().unwrap();
    let plate = gen(dir.path(), "bump_plate:21,2,6", "plate.txt");
    let out = dir.path().join("pyr");
    let r = run(&[
        "pyramid",
        s(&plate),
        "--kind",
        "meanabs",
        "--levels",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0);
    let summary = json(&r.stdout);
    let field = assign_curvatures(&extract_surface(
        &generate_shape(&"bump_plate:21,2,6".parse().unwrap()).unwrap(),
    ));
    for (k, level) in summary["levels"].as_array().unwrap().iter().enumerate() {
        let map = mean_abs_map(&field, Axis::Z, 1 << k).unwrap();
        let (want, _) = map.argmax().unwrap();
        let got: Vec<usize> = serde_json::from_value(level["argmax"].clone()).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn pyramid_zero_levels() {
    let dir = TempDir::new().unwrap();
    let cube = gen(dir.path(), "cube:1", "cube.txt");
    let out = dir.path().join("pyr");
    assert_eq!(
        run(&["pyramid", s(&cube), "--levels", "0", "--out", s(&out)]).code,
        2
    );
}

#[test]
fn compare_examples() {
    let dir = TempDir::new().unwrap();
    let a = gen(dir.path(), "cube:3", "a.txt");
    let b = gen(dir.path(), "torus:4,1", "b.txt");
    let same = run(&["compare", s(&a), s(&a)]);
    assert_eq!((same.code, same.stdout.as_str()), (0, "0.000000000\n"));

    let fv = |shape: &str| {
        let mesh = extract_surface(&generate_shape(&shape.parse().unwrap()).unwrap());
        feature_vector(&mesh, FeatureLayout::Four).unwrap()
    };
    for (flag, metric) in [
        ("euclid", Metric::Euclid),
        ("sq", Metric::SqEuclid),
        ("minkowski:3", Metric::Minkowski(3.0)),
    ] {
        let want = distance(fv("cube:3").ratios(), fv("torus:4,1").ratios(), metric).unwrap();
        let r = run(&["compare", s(&a), s(&b), "--metric", flag]);
        assert_eq!(r.stdout, format!("{want:.9}\n"));
    }

    let r = run(&["compare", s(&a), s(&b), "--metric", "minkowski:0.5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("p must be ≥ 1"), "{}", r.stderr);
}

#[test]
fn compare_six_layout() {
    let dir = TempDir::new().unwrap();
    let a = gen(dir.path(), "cube:1", "a.txt");
    let b = gen(dir.path(), "cube:2", "b.txt");
    let four = run(&["compare", s(&a), s(&b), "--metric", "minkowski:1"]);
    let six = run(&[
        "compare",
        s(&a),
        s(&b),
        "--metric",
        "minkowski:1",
        "--layout",
        "six",
    ]);
    // cube:2 has M4Flat 6/26 and M4Bent 12/26; both layouts see the same L1 total here.
    assert_eq!(four.stdout, six.stdout);
    let sq4 = run(&["compare", s(&a), s(&b), "--metric", "sq"]);
    let sq6 = run(&["compare", s(&a), s(&b), "--metric", "sq", "--layout", "six"]);
    assert_ne!(sq4.stdout, sq6.stdout);
}

const REFERENCE: [(&str, [f64; 4]); 6] = [
    ("1", [0.288267, 0.592615, 0.107207, 0.016677]),
    ("2", [0.262424, 0.508752, 0.193369, 0.044133]),
    ("3", [0.168149, 0.680220, 0.144854, 0.008895]),
    ("4", [0.152833, 0.711492, 0.122506, 0.013966]),
    ("5", [0.148500, 0.710425, 0.135432, 0.007128]),
    ("6", [0.162700, 0.688310, 0.140705, 0.010093]),
];

#[test]
fn matrix_from_vectors_json() {
    let dir = TempDir::new().unwrap();
    let vj = dir.path().join("vectors.json");
    let rows: Vec<Value> = REFERENCE
        .iter()
        .map(|(l, r)| serde_json::json!({"label": l, "ratios": r}))
        .collect();
    fs::write(&vj, serde_json::to_string(&rows).unwrap()).unwrap();
    let out = dir.path().join("m.csv");
    let r = run(&[
        "matrix",
        "--vectors-json",
        s(&vj),
        "--metric",
        "sq",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "label,1,2,3,4,5,6");
    let cell = |i: usize, j: usize| -> f64 { lines[i].split(',').nth(j).unwrap().parse().unwrap() };
    assert!((cell(2, 1) - 0.015878586).abs() < 1e-7);
    assert!((cell(5, 4) - 0.000233753).abs() < 1e-7);
    assert!((cell(6, 3) - 0.000113789).abs() < 1e-7);

    let summary = json(&r.stdout);
    let nn = summary["neighbors"].as_array().unwrap();
    assert_eq!(nn[0]["neighbors"][0]["label"], "2");
    assert_eq!(nn[4]["neighbors"][0]["label"], "4");
}

#[test]
fn matrix_directory_and_list_file() {
    let dir = TempDir::new().unwrap();
    let grids = dir.path().join("grids");
    fs::create_dir(&grids).unwrap();
    gen(&grids, "cube:2", "b.txt");
    gen(&grids, "cube:2", "a.txt");
    let out = dir.path().join("m.csv");
    let r = run(&["matrix", s(&grids), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        "label,a,b\na,0.000000000,0.000000000\nb,0.000000000,0.000000000\n"
    );

    let list = dir.path().join("list.lst");
    fs::write(&list, "grids/b.txt\n\ngrids/a.txt\n").unwrap();
    let out2 = dir.path().join("m2.csv");
    assert_eq!(run(&["matrix", s(&list), "--out", s(&out2)]).code, 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn matrix_needs_two_inputs() {
    let dir = TempDir::new().unwrap();
    let a = gen(dir.path(), "cube:2", "a.txt");
    let out = dir.path().join("m.csv");
    assert_eq!(run(&["matrix", s(&a), "--out", s(&out)]).code, 2);
}

#[test]
fn matrix_names_unreadable_member() {
    let dir = TempDir::new().unwrap();
    let a = gen(dir.path(), "cube:2", "a.txt");
    let bad = dir.path().join("broken.txt");
    fs::write(&bad, "vox3 2 2 2\n11\n").unwrap();
    let r = run(&[
        "matrix",
        s(&a),
        s(&bad),
        "--out",
        s(&dir.path().join("m.csv")),
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("broken.txt"));
}

#[test]
fn gen_examples() {
    let dir = TempDir::new().unwrap();
    let r = run(&["gen", "cube:3"]);
    assert_eq!(r.code, 0);
    let grid = load_grid(r.stdout.as_bytes(), GridFormat::Text).unwrap();
    assert_eq!((grid.dims(), grid.occupied_count()), ([3, 3, 3], 27));

    let t = gen(dir.path(), "torus:4,1", "t.txt");
    assert_eq!(json(&run(&["analyze", s(&t)]).stdout)["genus"], 1);

    let a = gen(dir.path(), "blob:7,20", "a.txt");
    let b = gen(dir.path(), "blob:7,20", "b.txt");
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());

    assert_eq!(run(&["gen", "torus:1,1"]).code, 2);
    assert_eq!(run(&["gen", "pyramid:3"]).code, 2);
}

#[test]
fn eq1_status_tracks_genus() {
    let dir = TempDir::new().unwrap();
    for shape in ["sphere:4", "box:2,3,5", "torus:5,2", "blob:3,12"] {
        let p = gen(dir.path(), shape, "f.txt");
        let v = json(&run(&["analyze", s(&p)]).stdout);
        if let Some(g) = v["genus"].as_i64() {
            assert_eq!(v["eq1"]["holds"].as_bool().unwrap(), g == 0, "{shape}");
        }
    }
}

#[test]
fn help_and_usage_codes() {
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_voxcurv");
    let out = Command::new(bin)
        .args(["gen", "cube:1", "--out"])
        .arg(dir.path().join("c.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(bin)
        .args(["--threads", "2", "analyze"])
        .arg(dir.path().join("c.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(std::str::from_utf8(&out.stdout).unwrap())["genus"], 0);
    let out = Command::new(bin)
        .args(["analyze", "/nonexistent"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin)
        .env("VOXCURV_THREADS", "lots")
        .args(["gen", "cube:1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
