//! Matrix Market coordinate I/O (`real general` only).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_matrix_market<R: Read>(reader: R) -> Result<SparseMatrix> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lno, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(lno, "expected a %%MatrixMarket header"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(parse_err(lno, "only `matrix coordinate` files are supported"));
    }
    if tokens[3] != "real" {
        return Err(parse_err(lno, format!("unsupported field `{}`", tokens[3])));
    }
    if tokens[4] != "general" {
        return Err(parse_err(lno, format!("unsupported symmetry `{}`", tokens[4])));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (lno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lno, "size line must hold `rows cols nnz`"));
                }
                let parse = |s: &str| s.parse::<usize>().map_err(|e| parse_err(lno, format!("{s}: {e}")));
                let dims = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                triplets.reserve(dims.2);
                size = Some(dims);
            }
            Some((rows, cols, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(lno, "entry line must hold `row col value`"));
                }
                let r: usize = fields[0].parse().map_err(|e| parse_err(lno, format!("row: {e}")))?;
                let c: usize = fields[1].parse().map_err(|e| parse_err(lno, format!("col: {e}")))?;
                let v: f64 = fields[2].parse().map_err(|e| parse_err(lno, format!("value: {e}")))?;
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(parse_err(lno, format!("index ({r}, {c}) outside {rows}x{cols}")));
                }
                if v == 0.0 {
                    return Err(parse_err(lno, format!("explicit zero at ({r}, {c})")));
                }
                triplets.push((r - 1, c - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(
            0,
            format!("size line announces {nnz} entries but {} were read", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_matrix_market<W: Write>(m: &SparseMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (r, c, v) in m.triplets() {
        writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SparseMatrix> {
    read_matrix_market(File::open(path)?)
}

pub fn save(m: &SparseMatrix, path: &Path) -> Result<()> {
    write_matrix_market(m, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_one_based_coordinates() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n3 2 2\n1 1 4.5\n3 2 -1\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!((m.rows(), m.cols(), m.nnz()), (3, 2, 2));
        assert_eq!(m.triplets().collect::<Vec<_>>(), vec![(0, 0, 4.5), (2, 1, -1.0)]);
    }

    #[test]
    fn rejects_bad_header() {
        let err = read_matrix_market("%%MatrixMarket matrix array real general\n1 1\n".as_bytes());
        assert!(matches!(err, Err(Error::Parse { line: 1, .. })));
        let err = read_matrix_market("hello\n".as_bytes());
        assert!(matches!(err, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_explicit_zero_and_duplicates() {
        let zero = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 0.0\n";
        assert!(matches!(read_matrix_market(zero.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let dup = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n1 2 3.0\n";
        assert!(read_matrix_market(dup.as_bytes()).is_err());
    }

    #[test]
    fn reports_line_of_bad_entry() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 x 2.0\n";
        match read_matrix_market(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_read() {
        let m = SparseMatrix::from_triplets(4, 3, &[(0, 0, 1.25), (3, 2, -7.0), (1, 1, 1e-9)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(HEADER));
        assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), m);
    }
}
