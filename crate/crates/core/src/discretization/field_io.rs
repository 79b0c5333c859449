//! Plain-text grid-field files.
//!
//! ```text
//! dim n1 [n2]
//! origin... extent...
//! <value>      one per node, first axis fastest, 17 significant digits
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Grid, GridFunction};
use crate::error::{Error, Result};

pub fn format_field(u: &GridFunction) -> String {
    let g = u.grid();
    let mut out = String::with_capacity(24 * (g.len() + 2));
    out.push_str(&g.dim().to_string());
    for n in g.shape() {
        let _ = write!(out, " {n}");
    }
    out.push('\n');
    let header: Vec<String> = g
        .origin()
        .iter()
        .chain(g.extent().iter())
        .map(|v| format!("{v:.16e}"))
        .collect();
    out.push_str(&header.join(" "));
    out.push('\n');
    for v in u.values() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn parse_field(text: &str) -> std::result::Result<GridFunction, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head: Vec<usize> = lines
        .next()
        .ok_or("missing header line")?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| format!("bad header: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let (&dim, shape) = head.split_first().ok_or("empty header")?;
    if shape.len() != dim {
        return Err(format!("header declares dim {dim} with {} sizes", shape.len()));
    }
    let geo: Vec<f64> = lines
        .next()
        .ok_or("missing geometry line")?
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad geometry: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if geo.len() != 2 * dim {
        return Err(format!("geometry line needs {} numbers", 2 * dim));
    }
    let grid = Grid::new(&geo[..dim], &geo[dim..], shape).map_err(|e| e.to_string())?;
    let values: Vec<f64> = lines
        .map(|l| l.trim().parse::<f64>().map_err(|e| format!("bad value '{l}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    GridFunction::new(grid, values).map_err(|e| e.to_string())
}

pub fn write_field(path: &Path, u: &GridFunction) -> Result<()> {
    fs::write(path, format_field(u))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path)?;
    parse_field(&text).map_err(|msg| Error::Parse {
        path: path.to_path_buf(),
        msg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(&[0.0, -1.0], &[2.0, 1.0], &[5, 3]).unwrap();
        let u = GridFunction::from_fn(g, |p| p[0] - p[1]);
        let text = format_field(&u);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("2 5 3"));
        assert_eq!(lines.next().unwrap().split_whitespace().count(), 4);
        assert_eq!(lines.count(), 15);
    }

    #[test]
    fn rejects_truncated_file() {
        let g = Grid::interval(0.0, 1.0, 4).unwrap();
        let text = format_field(&GridFunction::zeros(g));
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(parse_field(&cut).is_err());
    }
}
