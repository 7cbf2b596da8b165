//! DPGRID v1 reader/writer and CSV import.
//!
//! A DPGRID file is one JSON header line followed by little-endian f64
//! samples, row-major over axes with the component index fastest.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    n: usize,
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    components: usize,
}

pub fn write_dpgrid<W: Write>(mut w: W, u: &GridFunction) -> Result<()> {
    let header = Header {
        magic: "DPGRID".into(),
        version: 1,
        n: u.n(),
        dims: u.grid.dims.clone(),
        origin: u.grid.origin.clone(),
        spacing: u.grid.spacing,
        components: u.components,
    };
    let line = serde_json::to_string(&header)?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(u.values.len() * 8);
    for v in &u.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dpgrid<R: BufRead>(mut r: R) -> Result<GridFunction> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header =
        serde_json::from_str(line.trim_end_matches('\n')).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.magic != "DPGRID" || header.version != 1 {
        return Err(Error::Format("not a DPGRID v1 file".into()));
    }
    if header.dims.len() != header.n {
        return Err(Error::Format("header n differs from dims length".into()));
    }
    let grid = Grid::new(header.dims, header.origin, header.spacing)?;
    let count = grid.npoints() * header.components;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!("expected {} payload bytes, found {}", count * 8, bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    GridFunction::new(grid, header.components, values)
}

/// Parse CSV rows `x1[,x2],c1[,c2...]` for n <= 2. A non-numeric first line is
/// treated as a header.
pub fn read_csv(text: &str, n: usize) -> Result<GridFunction> {
    if !(1..=2).contains(&n) {
        return Err(Error::Format("CSV input supports n <= 2".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if ln == 0 => continue,
            Err(e) => return Err(Error::Format(format!("line {}: {e}", ln + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }
    let width = rows[0].len();
    if width <= n || rows.iter().any(|r| r.len() != width) {
        return Err(Error::Format("inconsistent column count".into()));
    }
    let k = width - n;
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); n];
    for r in &rows {
        for a in 0..n {
            axes[a].push(r[a]);
        }
    }
    for ax in axes.iter_mut() {
        ax.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ax.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
    }
    if axes.iter().any(|a| a.len() < 2) {
        return Err(Error::Format("each axis needs two distinct coordinates".into()));
    }
    let h = axes[0][1] - axes[0][0];
    for ax in &axes {
        for w in ax.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::Format("coordinates are not uniformly spaced".into()));
            }
        }
    }
    let dims: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let origin: Vec<f64> = axes.iter().map(|a| a[0] - 0.5 * h).collect();
    let grid = Grid::new(dims.clone(), origin, h)?;
    if rows.len() != grid.npoints() {
        return Err(Error::Format("rows do not fill the lattice".into()));
    }
    let mut values = vec![f64::NAN; grid.npoints() * k];
    for r in &rows {
        let mut ijk = [0usize; 3];
        for a in 0..n {
            ijk[a] = ((r[a] - axes[a][0]) / h).round() as usize;
        }
        let p = grid.ravel(ijk);
        values[p * k..(p + 1) * k].copy_from_slice(&r[n..]);
    }
    GridFunction::new(grid, k, values)
}

/// Load a grid from a `.dpgrid` file, or from CSV when the extension is `.csv`.
pub fn load(path: &Path, csv_dim: Option<usize>) -> Result<GridFunction> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let text = std::fs::read_to_string(path)?;
        let n = csv_dim.unwrap_or_else(|| guess_csv_dim(&text));
        return read_csv(&text, n);
    }
    let f = std::fs::File::open(path)?;
    read_dpgrid(std::io::BufReader::new(f))
}

fn guess_csv_dim(text: &str) -> usize {
    let header = text.lines().next().unwrap_or("");
    let xs = header.split(',').filter(|t| t.trim().starts_with('x')).count();
    xs.clamp(1, 2)
}

pub fn save(path: &Path, u: &GridFunction) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_dpgrid(std::io::BufWriter::new(f), u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dpgrid_round_trip_is_bitwise() {
        let g = Grid::cube(2, -1.0, 1.0, 5);
        let u = g.sample_vec(2, |x, o| {
            o[0] = x[0].sin();
            o[1] = x[1] * 1e-300;
        })
        .unwrap();
        let mut buf = Vec::new();
        write_dpgrid(&mut buf, &u).unwrap();
        let first = buf.iter().position(|&b| b == b'\n').unwrap();
        let header = std::str::from_utf8(&buf[..first]).unwrap();
        assert!(header.starts_with("{\"magic\":\"DPGRID\",\"version\":1,\"n\":2"));
        let back = read_dpgrid(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let u = Grid::cube(1, 0.0, 1.0, 4).sample(|x| x[0]).unwrap();
        let mut buf = Vec::new();
        write_dpgrid(&mut buf, &u).unwrap();
        buf.pop();
        assert!(read_dpgrid(std::io::Cursor::new(buf)).is_err());
    }

    #[test]
    fn csv_matches_sampled_grid() {
        let text = "x1,x2,u\n0.25,0.25,1\n0.25,0.75,2\n0.75,0.25,3\n0.75,0.75,4\n";
        let u = read_csv(text, 2).unwrap();
        assert_eq!(u.grid.dims, vec![2, 2]);
        assert_eq!(u.grid.origin, vec![0.0, 0.0]);
        assert_eq!(u.values, vec![1.0, 2.0, 3.0, 4.0]);
    }
}
