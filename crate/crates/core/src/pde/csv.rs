//! Grid functions as CSV: a header `x1,...,xn,value` and one row per node.

use std::io::{BufRead, Write};

use super::grid::Grid;
use super::PdeError;

pub fn write_grid_csv<W: Write>(mut w: W, grid: &Grid, values: &[f64]) -> std::io::Result<()> {
    let n = grid.dim();
    let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).chain(["value".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, v) in values.iter().enumerate() {
        let mut line = String::new();
        for x in grid.point(i) {
            line.push_str(&format!("{x:?},"));
        }
        line.push_str(&format!("{v:?}"));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCsv {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

pub fn read_grid_csv<R: BufRead>(r: R) -> Result<GridCsv, PdeError> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| PdeError::Csv("empty file".into()))?.map_err(|e| PdeError::Csv(e.to_string()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.last() != Some(&"value") || cols.len() < 2 {
        return Err(PdeError::Csv(format!("unexpected header '{header}'")));
    }
    let n = cols.len() - 1;
    let mut out = GridCsv { points: Vec::new(), values: Vec::new() };
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| PdeError::Csv(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| PdeError::Csv(format!("line {}: {e}", k + 2)))?;
        if v.len() != n + 1 {
            return Err(PdeError::Csv(format!("line {}: expected {} fields", k + 2, n + 1)));
        }
        out.values.push(v[n]);
        out.points.push(v[..n].to_vec());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = Grid::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![3, 4]).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.1).sin() / 3.0).collect();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &g, &vals).unwrap();
        let back = read_grid_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.values, vals);
        assert_eq!(back.points[5], g.point(5));
    }
}
