//! Matrix Market coordinate files.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// A coordinate matrix exactly as stored in the file (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct CoordMatrix {
    pub rows: usize,
    pub cols: usize,
    pub symmetry: Symmetry,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CoordMatrix {
    /// All entries with the implied mirror entries of symmetric storage added.
    pub fn expanded(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.entries.len() * 2);
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                match self.symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => out.push((j, i, v)),
                    Symmetry::SkewSymmetric => out.push((j, i, -v)),
                }
            }
        }
        out
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads `coordinate` files with `real`, `integer` or `pattern` fields.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CoordMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err(lineno, "size line needs rows, cols, nnz"));
                }
                let nums: std::result::Result<Vec<usize>, _> = parts.iter().map(|s| s.parse::<usize>()).collect();
                let nums = nums.map_err(|e| parse_err(lineno, e.to_string()))?;
                size = Some((nums[0], nums[1], nums[2]));
                entries.reserve(nums[2]);
            }
            Some((rows, cols, _)) => {
                let need = if pattern { 2 } else { 3 };
                if parts.len() < need {
                    return Err(parse_err(lineno, "truncated entry"));
                }
                let i: usize = parts[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let j: usize = parts[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(lineno, format!("entry ({i}, {j}) outside {rows}×{cols}")));
                }
                let v = if pattern {
                    1.0
                } else {
                    parts[2].parse::<f64>().map_err(|_| parse_err(lineno, "bad value"))?
                };
                entries.push((i - 1, j - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(parse_err(0, format!("expected {nnz} entries, found {}", entries.len())));
    }
    Ok(CoordMatrix { rows, cols, symmetry, entries })
}

pub fn read_matrix_market_file(path: &std::path::Path) -> Result<CoordMatrix> {
    let f = std::fs::File::open(path)?;
    read_matrix_market(std::io::BufReader::new(f))
}

/// Writes a `coordinate real` file.
pub fn write_matrix_market<W: Write>(mut w: W, m: &CoordMatrix) -> Result<()> {
    let sym = match m.symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
        Symmetry::SkewSymmetric => "skew-symmetric",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real {sym}")?;
    writeln!(w, "{} {} {}", m.rows, m.cols, m.entries.len())?;
    for &(i, j, v) in &m.entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
