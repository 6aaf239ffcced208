//! The mesh document format: shared vertices, cell records, and optional
//! per-vertex or per-cell field values.

use super::{fmt_f64, parse_f64, parse_usize, tokenize, Line};
use crate::error::{Error, Result};
use crate::geometry::{point2, point3, CellKind, Point, Vector};
use crate::mesh::CellMesh;

/// Field data attached to a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuesSection {
    VertexScalar(Vec<f64>),
    CellScalar(Vec<f64>),
    CellVector(Vec<Vector>),
}

/// A parsed mesh file.
#[derive(Debug, Clone)]
pub struct MeshDocument {
    pub mesh: CellMesh,
    pub hull_measure: Option<f64>,
    pub values: Option<ValuesSection>,
}

pub fn parse_mesh_file(text: &str) -> Result<MeshDocument> {
    let lines = tokenize(text);
    let mut pos = 0usize;
    let mut dim: Option<usize> = None;
    let mut vertices: Vec<Point> = Vec::new();
    let mut records: Vec<(CellKind, Vec<usize>)> = Vec::new();
    let mut hull: Option<f64> = None;
    let mut values: Option<ValuesSection> = None;

    while pos < lines.len() {
        let line = &lines[pos];
        match line.tokens[0].to_ascii_uppercase().as_str() {
            "DIMENSION" => {
                let d = parse_usize(line, require(line, 1)?)?;
                if d != 2 && d != 3 {
                    return Err(Error::parse(line.number, "dimension must be 2 or 3"));
                }
                dim = Some(d);
                pos += 1;
            }
            "VERTICES" => {
                let d = dim
                    .ok_or_else(|| Error::parse(line.number, "DIMENSION must come first"))?;
                let n = parse_usize(line, require(line, 1)?)?;
                pos += 1;
                for _ in 0..n {
                    let l = lines
                        .get(pos)
                        .ok_or_else(|| Error::parse(line.number, "missing vertex line"))?;
                    if l.tokens.len() != d {
                        return Err(Error::parse(
                            l.number,
                            format!("expected {d} coordinates, got {}", l.tokens.len()),
                        ));
                    }
                    let x = parse_f64(l, l.tokens[0])?;
                    let y = parse_f64(l, l.tokens[1])?;
                    vertices.push(if d == 2 {
                        point2(x, y)
                    } else {
                        point3(x, y, parse_f64(l, l.tokens[2])?)
                    });
                    pos += 1;
                }
            }
            "CELLS" => {
                let n = parse_usize(line, require(line, 1)?)?;
                pos += 1;
                for _ in 0..n {
                    let l = lines
                        .get(pos)
                        .ok_or_else(|| Error::parse(line.number, "missing cell line"))?;
                    let kind = match l.tokens[0] {
                        "triangle" => CellKind::Triangle,
                        "quadrilateral" => CellKind::Quadrilateral,
                        "tetrahedron" => CellKind::Tetrahedron,
                        "pyramid" => CellKind::Pyramid,
                        "polytope" => CellKind::GenericPolytope,
                        other => {
                            return Err(Error::parse(
                                l.number,
                                format!("unknown mesh cell kind '{other}'"),
                            ))
                        }
                    };
                    let idx: Vec<usize> = l.tokens[1..]
                        .iter()
                        .map(|t| parse_usize(l, t))
                        .collect::<Result<_>>()?;
                    records.push((kind, idx));
                    pos += 1;
                }
            }
            "HULL_MEASURE" => {
                hull = Some(parse_f64(line, require(line, 1)?)?);
                pos += 1;
            }
            "VALUES" => {
                let target = require(line, 1)?;
                let kind = require(line, 2)?;
                let n = parse_usize(line, require(line, 3)?)?;
                pos += 1;
                let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
                for _ in 0..n {
                    let l = lines
                        .get(pos)
                        .ok_or_else(|| Error::parse(line.number, "missing values line"))?;
                    rows.push(
                        l.tokens
                            .iter()
                            .map(|t| parse_f64(l, t))
                            .collect::<Result<_>>()?,
                    );
                    pos += 1;
                }
                values = Some(match (target, kind) {
                    ("vertex", "scalar") => {
                        ValuesSection::VertexScalar(rows.iter().map(|r| r[0]).collect())
                    }
                    ("cell", "scalar") => {
                        ValuesSection::CellScalar(rows.iter().map(|r| r[0]).collect())
                    }
                    ("cell", "vector") => ValuesSection::CellVector(
                        rows.iter()
                            .map(|r| Vector::new(r[0], r[1], *r.get(2).unwrap_or(&0.0)))
                            .collect(),
                    ),
                    _ => {
                        return Err(Error::parse(
                            line.number,
                            format!("unsupported VALUES section '{target} {kind}'"),
                        ))
                    }
                });
            }
            other => {
                return Err(Error::parse(
                    line.number,
                    format!("unknown section '{other}'"),
                ))
            }
        }
    }

    let dim = dim.ok_or_else(|| Error::parse(0, "missing DIMENSION"))?;
    if let Some(v) = &values {
        let ok = match v {
            ValuesSection::VertexScalar(d) => d.len() == vertices.len(),
            ValuesSection::CellScalar(d) => d.len() == records.len(),
            ValuesSection::CellVector(d) => d.len() == records.len(),
        };
        if !ok {
            return Err(Error::parse(0, "VALUES count does not match the mesh"));
        }
    }
    let mesh = CellMesh::new(dim, vertices, records, hull)?;
    Ok(MeshDocument {
        mesh,
        hull_measure: hull,
        values,
    })
}

fn require<'a>(line: &Line<'a>, idx: usize) -> Result<&'a str> {
    line.tokens
        .get(idx)
        .copied()
        .ok_or_else(|| Error::parse(line.number, "missing field"))
}

pub fn write_mesh_file(doc: &MeshDocument) -> String {
    let mesh = &doc.mesh;
    let mut out = String::new();
    out.push_str(&format!("DIMENSION {}\n", mesh.dim));
    out.push_str(&format!("VERTICES {}\n", mesh.vertices.len()));
    for p in &mesh.vertices {
        if mesh.dim == 2 {
            out.push_str(&format!("{} {}\n", fmt_f64(p.x), fmt_f64(p.y)));
        } else {
            out.push_str(&format!(
                "{} {} {}\n",
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.z)
            ));
        }
    }
    out.push_str(&format!("CELLS {}\n", mesh.cells.len()));
    for mc in &mesh.cells {
        out.push_str(mc.cell.kind().name());
        for i in &mc.global {
            out.push_str(&format!(" {i}"));
        }
        out.push('\n');
    }
    if let Some(h) = doc.hull_measure {
        out.push_str(&format!("HULL_MEASURE {}\n", fmt_f64(h)));
    }
    match &doc.values {
        None => {}
        Some(ValuesSection::VertexScalar(v)) => {
            out.push_str(&format!("VALUES vertex scalar {}\n", v.len()));
            for x in v {
                out.push_str(&format!("{}\n", fmt_f64(*x)));
            }
        }
        Some(ValuesSection::CellScalar(v)) => {
            out.push_str(&format!("VALUES cell scalar {}\n", v.len()));
            for x in v {
                out.push_str(&format!("{}\n", fmt_f64(*x)));
            }
        }
        Some(ValuesSection::CellVector(v)) => {
            out.push_str(&format!("VALUES cell vector {}\n", v.len()));
            for x in v {
                if mesh.dim == 2 {
                    out.push_str(&format!("{} {}\n", fmt_f64(x.x), fmt_f64(x.y)));
                } else {
                    out.push_str(&format!(
                        "{} {} {}\n",
                        fmt_f64(x.x),
                        fmt_f64(x.y),
                        fmt_f64(x.z)
                    ));
                }
            }
        }
    }
    out
}

/// Serialize a mesh with no attached values (helper for mesh generators).
pub fn mesh_to_text(mesh: &CellMesh) -> String {
    write_mesh_file(&MeshDocument {
        mesh: mesh.clone(),
        hull_measure: None,
        values: None,
    })
}
