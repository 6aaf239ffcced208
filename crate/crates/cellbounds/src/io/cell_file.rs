//! The single-cell document format.

use super::{fmt_f64, parse_f64, parse_usize, tokenize, Line};
use crate::error::{Error, Result};
use crate::geometry::{point2, point3, Cell, CellKind, Face, FaceKind, Point};

/// A parsed cell file: the validated cell plus the optional face selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDocument {
    pub cell: Cell,
    pub gamma: Option<Vec<usize>>,
}

fn kind_from_name(line: &Line, name: &str) -> Result<CellKind> {
    match name {
        "triangle" => Ok(CellKind::Triangle),
        "quadrilateral" => Ok(CellKind::Quadrilateral),
        "tetrahedron" => Ok(CellKind::Tetrahedron),
        "pyramid" => Ok(CellKind::Pyramid),
        "prism" => Ok(CellKind::Prism),
        "polytope" => Ok(CellKind::GenericPolytope),
        "macrocell" => Ok(CellKind::Macrocell),
        _ => Err(Error::parse(line.number, format!("unknown cell kind '{name}'"))),
    }
}

/// Parse a cell document; all geometry invariants are checked on load.
pub fn parse_cell_file(text: &str) -> Result<CellDocument> {
    let lines = tokenize(text);
    let mut pos = 0usize;
    let mut dim: Option<usize> = None;
    let mut kind: Option<CellKind> = None;
    let mut vertices: Vec<Point> = Vec::new();
    let mut faces: Option<Vec<Face>> = None;
    let mut curved: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
    let mut gamma: Option<Vec<usize>> = None;
    let mut heights: Option<Vec<f64>> = None;
    let mut children: Vec<(CellKind, Vec<usize>)> = Vec::new();

    while pos < lines.len() {
        let line = &lines[pos];
        let head = lines[pos].tokens[0].to_ascii_uppercase();
        match head.as_str() {
            "DIMENSION" => {
                let d = parse_usize(line, require(line, 1)?)?;
                if d != 2 && d != 3 {
                    return Err(Error::parse(line.number, "dimension must be 2 or 3"));
                }
                dim = Some(d);
                pos += 1;
            }
            "KIND" => {
                kind = Some(kind_from_name(line, require(line, 1)?)?);
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
                    // prism bases may give 2 coordinates in a 3D file (z = 0)
                    if l.tokens.len() != d && l.tokens.len() != 2 {
                        return Err(Error::parse(
                            l.number,
                            format!("expected {d} coordinates, got {}", l.tokens.len()),
                        ));
                    }
                    let x = parse_f64(l, l.tokens[0])?;
                    let y = parse_f64(l, l.tokens[1])?;
                    vertices.push(if l.tokens.len() == 2 {
                        point2(x, y)
                    } else {
                        point3(x, y, parse_f64(l, l.tokens[2])?)
                    });
                    pos += 1;
                }
            }
            "FACES" => {
                let n = parse_usize(line, require(line, 1)?)?;
                pos += 1;
                let mut fs = Vec::with_capacity(n);
                for _ in 0..n {
                    let l = lines
                        .get(pos)
                        .ok_or_else(|| Error::parse(line.number, "missing face line"))?;
                    let idx: Vec<usize> = l
                        .tokens
                        .iter()
                        .map(|t| parse_usize(l, t))
                        .collect::<Result<_>>()?;
                    for &i in &idx {
                        if i >= vertices.len() {
                            return Err(Error::parse(
                                l.number,
                                format!("face vertex index {i} out of range"),
                            ));
                        }
                    }
                    fs.push(Face::planar(idx));
                    pos += 1;
                }
                faces = Some(fs);
            }
            "CURVED" => {
                let f = parse_usize(line, require(line, 1)?)?;
                let n = parse_usize(line, require(line, 2)?)?;
                pos += 1;
                let mut subs = Vec::with_capacity(n);
                for _ in 0..n {
                    let l = lines
                        .get(pos)
                        .ok_or_else(|| Error::parse(line.number, "missing sub-facet line"))?;
                    subs.push(
                        l.tokens
                            .iter()
                            .map(|t| parse_usize(l, t))
                            .collect::<Result<Vec<usize>>>()?,
                    );
                    pos += 1;
                }
                curved.push((f, subs));
            }
            "GAMMA" => {
                gamma = Some(
                    line.tokens[1..]
                        .iter()
                        .map(|t| parse_usize(line, t))
                        .collect::<Result<_>>()?,
                );
                pos += 1;
            }
            "HEIGHTS" => {
                heights = Some(
                    line.tokens[1..]
                        .iter()
                        .map(|t| parse_f64(line, t))
                        .collect::<Result<_>>()?,
                );
                pos += 1;
            }
            "CELLS" => {
                let n = parse_usize(line, require(line, 1)?)?;
                pos += 1;
                for _ in 0..n {
                    let l = lines
                        .get(pos)
                        .ok_or_else(|| Error::parse(line.number, "missing child cell line"))?;
                    let k = kind_from_name(l, l.tokens[0])?;
                    let idx: Vec<usize> = l.tokens[1..]
                        .iter()
                        .map(|t| parse_usize(l, t))
                        .collect::<Result<_>>()?;
                    for &i in &idx {
                        if i >= vertices.len() {
                            return Err(Error::parse(
                                l.number,
                                format!("child vertex index {i} out of range"),
                            ));
                        }
                    }
                    children.push((k, idx));
                    pos += 1;
                }
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
    let kind = kind.ok_or_else(|| Error::parse(0, "missing KIND"))?;
    let cell = build_cell(dim, kind, vertices, faces, curved, heights, children)?;
    if let Some(g) = &gamma {
        for &f in g {
            cell.face(f)?;
        }
    }
    Ok(CellDocument { cell, gamma })
}

fn require<'a>(line: &Line<'a>, idx: usize) -> Result<&'a str> {
    line.tokens
        .get(idx)
        .copied()
        .ok_or_else(|| Error::parse(line.number, "missing field"))
}

fn build_cell(
    dim: usize,
    kind: CellKind,
    vertices: Vec<Point>,
    faces: Option<Vec<Face>>,
    curved: Vec<(usize, Vec<Vec<usize>>)>,
    heights: Option<Vec<f64>>,
    children: Vec<(CellKind, Vec<usize>)>,
) -> Result<Cell> {
    let apply_curved = |mut fs: Vec<Face>| -> Result<Vec<Face>> {
        for (f, subs) in &curved {
            let face = fs
                .get_mut(*f)
                .ok_or_else(|| Error::parse(0, format!("CURVED face {f} out of range")))?;
            face.kind = FaceKind::Curvilinear(subs.clone());
        }
        Ok(fs)
    };
    match (kind, dim) {
        (CellKind::Triangle, 2) => {
            expect_vertices(&vertices, 3)?;
            Cell::triangle(vertices[0], vertices[1], vertices[2])
        }
        (CellKind::Quadrilateral, 2) => {
            expect_vertices(&vertices, 4)?;
            Cell::quadrilateral([vertices[0], vertices[1], vertices[2], vertices[3]])
        }
        (CellKind::Tetrahedron, 3) => {
            expect_vertices(&vertices, 4)?;
            Cell::tetrahedron([vertices[0], vertices[1], vertices[2], vertices[3]])
        }
        (CellKind::Pyramid, 3) => {
            expect_vertices(&vertices, 5)?;
            Cell::pyramid(
                vertices[0],
                [vertices[1], vertices[2], vertices[3], vertices[4]],
            )
        }
        (CellKind::Prism, 3) => {
            let heights = heights.ok_or_else(|| {
                Error::InvalidGeometry("prism cells need a HEIGHTS section".into())
            })?;
            Cell::prism(vertices, heights)
        }
        (CellKind::GenericPolytope, 2) => match faces {
            Some(fs) => Cell::polygon_with_faces(vertices, apply_curved(fs)?),
            None => Cell::polygon(vertices),
        },
        (CellKind::GenericPolytope, 3) => {
            let fs = faces.ok_or_else(|| {
                Error::InvalidGeometry("3D polytopes need an explicit FACES section".into())
            })?;
            Cell::polytope3(vertices, apply_curved(fs)?)
        }
        (CellKind::Macrocell, _) => {
            let mut cells = Vec::with_capacity(children.len());
            for (k, idx) in children {
                let pts: Vec<Point> = idx.iter().map(|&i| vertices[i]).collect();
                let child = match (k, dim) {
                    (CellKind::Triangle, 2) => Cell::triangle(pts[0], pts[1], pts[2])?,
                    (CellKind::Quadrilateral, 2) => {
                        Cell::quadrilateral([pts[0], pts[1], pts[2], pts[3]])?
                    }
                    (CellKind::GenericPolytope, 2) => Cell::polygon(pts)?,
                    (CellKind::Tetrahedron, 3) => {
                        Cell::tetrahedron([pts[0], pts[1], pts[2], pts[3]])?
                    }
                    (CellKind::Pyramid, 3) => {
                        Cell::pyramid(pts[0], [pts[1], pts[2], pts[3], pts[4]])?
                    }
                    _ => {
                        return Err(Error::UnsupportedCellKind(format!(
                            "macrocell child of kind {}",
                            k.name()
                        )))
                    }
                };
                cells.push(child);
            }
            Cell::macrocell(cells)
        }
        _ => Err(Error::UnsupportedCellKind(format!(
            "{} in dimension {dim}",
            kind.name()
        ))),
    }
}

fn expect_vertices(vertices: &[Point], n: usize) -> Result<()> {
    if vertices.len() != n {
        return Err(Error::InvalidGeometry(format!(
            "expected {n} vertices, got {}",
            vertices.len()
        )));
    }
    Ok(())
}

/// Serialize a cell document; parsing the output reproduces it bitwise.
pub fn write_cell_file(doc: &CellDocument) -> String {
    let cell = &doc.cell;
    let dim = cell.dim();
    let mut out = String::new();
    out.push_str(&format!("DIMENSION {dim}\n"));
    out.push_str(&format!("KIND {}\n", cell.kind().name()));
    if cell.kind() == CellKind::Macrocell {
        // children carry their own vertices; rebuild a shared list
        let mut vertices: Vec<Point> = Vec::new();
        let mut records: Vec<(CellKind, Vec<usize>)> = Vec::new();
        for child in cell.children() {
            let mut idx = Vec::new();
            for p in child.vertices() {
                let found = vertices.iter().position(|q| q == p);
                idx.push(match found {
                    Some(i) => i,
                    None => {
                        vertices.push(*p);
                        vertices.len() - 1
                    }
                });
            }
            records.push((child.kind(), idx));
        }
        push_vertices(&mut out, dim, &vertices);
        out.push_str(&format!("CELLS {}\n", records.len()));
        for (k, idx) in records {
            out.push_str(k.name());
            for i in idx {
                out.push_str(&format!(" {i}"));
            }
            out.push('\n');
        }
    } else if cell.kind() == CellKind::Prism {
        let n = cell.base_len();
        push_vertices(&mut out, 2, &cell.vertices()[..n]);
        out.push_str("HEIGHTS");
        for h in cell.heights() {
            out.push_str(&format!(" {}", fmt_f64(*h)));
        }
        out.push('\n');
    } else {
        push_vertices(&mut out, dim, cell.vertices());
        let auto = matches!(
            cell.kind(),
            CellKind::Triangle | CellKind::Quadrilateral | CellKind::Tetrahedron | CellKind::Pyramid
        );
        if !auto {
            out.push_str(&format!("FACES {}\n", cell.faces().len()));
            for face in cell.faces() {
                let idx: Vec<String> = face.vertices.iter().map(|v| v.to_string()).collect();
                out.push_str(&idx.join(" "));
                out.push('\n');
            }
            for (fi, face) in cell.faces().iter().enumerate() {
                if let FaceKind::Curvilinear(subs) = &face.kind {
                    out.push_str(&format!("CURVED {fi} {}\n", subs.len()));
                    for sub in subs {
                        let idx: Vec<String> = sub.iter().map(|v| v.to_string()).collect();
                        out.push_str(&idx.join(" "));
                        out.push('\n');
                    }
                }
            }
        }
    }
    if let Some(g) = &doc.gamma {
        out.push_str("GAMMA");
        for f in g {
            out.push_str(&format!(" {f}"));
        }
        out.push('\n');
    }
    out
}

fn push_vertices(out: &mut String, dim: usize, vertices: &[Point]) {
    out.push_str(&format!("VERTICES {}\n", vertices.len()));
    for p in vertices {
        if dim == 2 {
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
}
