use std::io::{BufRead, Write};
use std::path::Path;

use super::SymmetricMatrix;
use crate::error::{Error, Result};

/// Writes `n` followed by the upper triangle, one row per line, with 17
/// significant digits.
pub fn write_matrix<W: Write>(m: &SymmetricMatrix, mut w: W) -> Result<()> {
    let n = m.n();
    writeln!(w, "{n}")?;
    for i in 0..n {
        let row: Vec<String> = (i..n).map(|j| format!("{:.16e}", m.get(i, j))).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Reads the format produced by [`write_matrix`]. Any whitespace layout of
/// the values is accepted.
pub fn read_matrix<R: BufRead>(r: R) -> Result<SymmetricMatrix> {
    let mut tokens = Vec::new();
    for line in r.lines() {
        let line = line?;
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let n: usize = it
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
    let vals = it
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value {t:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    SymmetricMatrix::from_upper(n, &vals)
}

pub fn write_matrix_file(m: &SymmetricMatrix, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_matrix(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<SymmetricMatrix> {
    let f = std::fs::File::open(path)?;
    read_matrix(std::io::BufReader::new(f))
}
