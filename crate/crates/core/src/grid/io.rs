use std::io::{BufRead, Write};

use super::GridData;
use crate::dim::Dimension;
use crate::error::{Error, Result};

/// Writes the header `d,N,R` and its values, then one value per line in
/// row-major order.
pub fn write_grid_csv<W: Write>(grid: &GridData, mut w: W) -> std::io::Result<()> {
    writeln!(w, "d,N,R")?;
    writeln!(w, "{},{},{}", grid.dim().d(), grid.n(), grid.r())?;
    for v in grid.values() {
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

pub fn read_grid_csv<R: BufRead>(r: R) -> Result<GridData> {
    let mut lines = r.lines().map(|l| l.map_err(|e| Error::Parse(e.to_string())));
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of grid file".into()))?
            .map(|l| l.trim().to_string())
    };
    if next()? != "d,N,R" {
        return Err(Error::Parse("missing d,N,R header".into()));
    }
    let head = next()?;
    let parts: Vec<&str> = head.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("bad grid header line '{head}'")));
    }
    let bad = |s: &str| Error::Parse(format!("bad number '{s}'"));
    let d: usize = parts[0].parse().map_err(|_| bad(parts[0]))?;
    let n: usize = parts[1].parse().map_err(|_| bad(parts[1]))?;
    let radius: f64 = parts[2].parse().map_err(|_| bad(parts[2]))?;
    let dim = Dimension::new(d)?;
    let mut values = Vec::with_capacity(n.pow(d as u32));
    while let Ok(line) = next() {
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|_| bad(&line))?);
    }
    GridData::new(dim, n, radius, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;

    #[test]
    fn round_trip() {
        let f = Field::gaussian(Dimension::TWO, 1.0, 2.0);
        let g = GridData::sample(&f, 8, 2.0).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&g, &mut buf).unwrap();
        let back = read_grid_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(back.n(), 8);
    }

    #[test]
    fn rejects_truncated_file() {
        let txt = "d,N,R\n2,2,1\n1\n2\n";
        assert!(read_grid_csv(txt.as_bytes()).is_err());
    }
}
