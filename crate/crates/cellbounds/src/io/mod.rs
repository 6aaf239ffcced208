//! Line-oriented text formats for cells and meshes.
//!
//! Both formats use explicit section headers (`DIMENSION`, `VERTICES`,
//! `FACES`, `CURVED`, `GAMMA`, `HEIGHTS`, `CELLS`, `HULL_MEASURE`, `VALUES`)
//! with whitespace-separated fields and `#` comments. Coordinates are
//! written with shortest round-trip formatting, so parse -> write -> parse
//! reproduces bitwise-identical cells and meshes.

mod cell_file;
mod mesh_file;

pub use cell_file::{parse_cell_file, write_cell_file, CellDocument};
pub use mesh_file::{mesh_to_text, parse_mesh_file, write_mesh_file, MeshDocument, ValuesSection};

use crate::error::{Error, Result};

/// A non-comment line with its 1-based source line number.
pub(crate) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<&'a str>,
}

pub(crate) fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                None
            } else {
                Some(Line {
                    number: i + 1,
                    tokens: body.split_whitespace().collect(),
                })
            }
        })
        .collect()
}

pub(crate) fn parse_f64(line: &Line, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::parse(line.number, format!("expected a number, got '{token}'")))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line.number, "coordinates must be finite"))
            }
        })
}

pub(crate) fn parse_usize(line: &Line, token: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(line.number, format!("expected an index, got '{token}'")))
}

/// Shortest round-trip decimal form of a float.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
