//! End-to-end tests of the command-line binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cellbounds"))
}

fn write_tmp(name: &str, content: &str) -> std::path::PathBuf {
    let dir = tempfile::tempdir().unwrap().keep();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

const TRIANGLE: &str = "\
DIMENSION 2
KIND triangle
VERTICES 3
0 0
1 0
0 1
GAMMA 0
";

const MESH: &str = "\
DIMENSION 2
VERTICES 9
0 0
0.5 0
1 0
0 0.5
0.5 0.5
1 0.5
0 1
0.5 1
1 1
CELLS 4
quadrilateral 0 1 4 3
quadrilateral 1 2 5 4
quadrilateral 3 4 7 6
quadrilateral 4 5 8 7
HULL_MEASURE 1
";

#[test]
fn bounds_text_and_machine_agree() {
    let cell = write_tmp("t.cell", TRIANGLE);
    let text = bin().arg("bounds").arg(&cell).output().unwrap();
    assert!(text.status.success());
    let stdout = String::from_utf8(text.stdout).unwrap();
    assert!(stdout.contains("0.49291193"), "missing exact value:\n{stdout}");
    assert!(stdout.contains("0.60770802"), "missing majorant:\n{stdout}");

    let machine = bin()
        .arg("bounds")
        .arg(&cell)
        .args(["--format", "machine"])
        .output()
        .unwrap();
    assert!(machine.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&machine.stdout).expect("machine output is JSON");
    // every number in the human report appears in the machine report
    let values: Vec<f64> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["value"].as_f64().unwrap())
        .collect();
    for shown in [0.49291193f64, 0.60770802, 0.29403662] {
        assert!(
            values.iter().any(|v| (v - shown).abs() < 1e-7),
            "machine output misses {shown}"
        );
    }
}

#[test]
fn sharp_csv_has_convergence_table() {
    let cell = write_tmp("t.cell", TRIANGLE);
    let out = bin()
        .arg("sharp")
        .arg(&cell)
        .args(["--level", "2", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "level,unknowns,eigenvalue,constant,delta");
    assert_eq!(lines.count(), 3);
}

#[test]
fn interp_writes_parseable_values_file() {
    let mesh = write_tmp("m.mesh", MESH);
    let out_path = mesh.with_extension("out");
    let out = bin()
        .arg("interp")
        .arg(&mesh)
        .args(["--field", "x1", "--plan", "faces:3,3,3,3", "--output"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("VALUES cell scalar 4"));
    // the values must include the per-cell face means 0 and 1/2
    let doc = cellbounds::io::parse_mesh_file(&text).unwrap();
    match doc.values {
        Some(cellbounds::io::ValuesSection::CellScalar(v)) => {
            let mut v = v;
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!((v[0] - 0.0).abs() < 1e-12 && (v[3] - 0.5).abs() < 1e-12);
        }
        other => panic!("unexpected values section {other:?}"),
    }
}

#[test]
fn nodal_field_from_file_is_supported_on_triangle_meshes() {
    let mesh = "\
DIMENSION 2
VERTICES 4
0 0
1 0
1 1
0 1
CELLS 2
triangle 0 1 2
triangle 0 2 3
VALUES vertex scalar 4
0
1
2
1
";
    let path = write_tmp("tri.mesh", mesh);
    let out = bin()
        .arg("interp")
        .arg(&path)
        .args(["--field", "from-file"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("L2 error"));
}

#[test]
fn failures_exit_nonzero_with_machine_readable_list() {
    let bad = write_tmp("bad.cell", "DIMENSION 2\nKIND triangle\nVERTICES 1\n0 0\n");
    let out = bin().arg("bounds").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let json: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap())
        .expect("failure list is JSON");
    assert!(json["failures"].as_array().unwrap().len() == 1);

    let missing = bin().arg("bounds").arg("/nonexistent.cell").output().unwrap();
    assert!(!missing.status.success());
}

#[test]
fn unknown_field_is_reported() {
    let mesh = write_tmp("m.mesh", MESH);
    let out = bin()
        .arg("interp")
        .arg(&mesh)
        .args(["--field", "nonsense"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown field"));
}
