//! Plain-text path and field inputs.
//!
//! Path file: one `x y` pair per line. Blank lines and text after `#` are
//! ignored. An optional first keyword line `closed` or `open` sets the kind
//! (default closed).
//!
//! Grid file: header `grid nx ny x0 y0 h`, then `ny` rows of `nx` values;
//! row `j` covers `y0 + j·h ≤ y < y0 + (j+1)·h`.

use std::path::Path;

use phaselab::anyon::{FieldMap, PlanarPath, Point};

use crate::error::CliError;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn number(tok: &str, origin: &str, line: usize) -> Result<f64, CliError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::input(origin, line, format!("`{tok}` is not a finite number")))
}

pub fn parse_path(text: &str, origin: &str) -> Result<PlanarPath, CliError> {
    let mut closed = true;
    let mut vertices = Vec::new();
    for (idx, (line, l)) in content_lines(text).enumerate() {
        if idx == 0 && (l == "closed" || l == "open") {
            closed = l == "closed";
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(CliError::input(origin, line, format!("expected `x y`, got {} fields", toks.len())));
        }
        vertices.push(Point::new(number(toks[0], origin, line)?, number(toks[1], origin, line)?));
    }
    PlanarPath::new(vertices, closed).map_err(|e| CliError::input(origin, 0, e.to_string()))
}

pub fn parse_grid(text: &str, origin: &str) -> Result<FieldMap, CliError> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| CliError::input(origin, 0, "empty grid file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "grid" {
        return Err(CliError::input(origin, line, "header must be `grid nx ny x0 y0 h`".into()));
    }
    let count = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| CliError::input(origin, line, format!("`{t}` is not a cell count")))
    };
    let (nx, ny) = (count(toks[1])?, count(toks[2])?);
    let (x0, y0, h) = (number(toks[3], origin, line)?, number(toks[4], origin, line)?, number(toks[5], origin, line)?);
    let mut values = Vec::with_capacity(nx * ny);
    let mut rows = 0;
    for (line, l) in lines {
        let row: Vec<f64> = l
            .split_whitespace()
            .map(|t| number(t, origin, line))
            .collect::<Result<_, _>>()?;
        if row.len() != nx {
            return Err(CliError::input(origin, line, format!("row has {} values, expected {nx}", row.len())));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != ny {
        return Err(CliError::input(origin, 0, format!("found {rows} rows, expected {ny}")));
    }
    let field = FieldMap::Grid { nx, ny, x0, y0, h, values };
    field.validate().map_err(|e| CliError::input(origin, 0, e.to_string()))?;
    Ok(field)
}

pub fn read_path(file: &Path) -> Result<PlanarPath, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    parse_path(&text, &file.display().to_string())
}

pub fn read_grid(file: &Path) -> Result<FieldMap, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    parse_grid(&text, &file.display().to_string())
}
