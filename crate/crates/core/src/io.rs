//! Plain-text inputs and outputs: headerless CSV matrices and vectors, and
//! group label files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::groups::GroupStructure;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: '{field}' is not a number")))
}

/// Reads a headerless numeric CSV into a row-major matrix.
pub fn read_matrix(reader: impl Read) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::Parse(format!(
                    "line {}: expected {c} fields, found {}",
                    i + 1,
                    rec.len()
                )))
            }
            _ => {}
        }
        for f in rec.iter() {
            data.push(parse_f64(f, i + 1)?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parse("matrix file is empty".into()))?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_matrix_file(path: &Path) -> Result<Array2<f64>> {
    read_matrix(open(path)?)
}

/// Reads a vector stored one value per line (a single CSV column or row).
pub fn read_vector(reader: impl Read) -> Result<Array1<f64>> {
    let m = read_matrix(reader)?;
    if m.ncols() == 1 || m.nrows() == 1 {
        Ok(Array1::from_iter(m.iter().copied()))
    } else {
        Err(Error::Parse(format!(
            "expected a single column or row, found a {}x{} table",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn read_vector_file(path: &Path) -> Result<Array1<f64>> {
    read_vector(open(path)?)
}

/// Reads integer group labels, separated by newlines, commas or whitespace.
pub fn read_groups(reader: impl Read) -> Result<GroupStructure> {
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let label: i64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: '{tok}' is not an integer group label", i + 1)))?;
            labels.push(label);
        }
    }
    GroupStructure::from_assignment(&labels)
}

pub fn read_groups_file(path: &Path) -> Result<GroupStructure> {
    read_groups(open(path)?)
}

pub fn write_matrix(m: &Array2<f64>, w: impl Write) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in m.rows() {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_vector(v: &[f64], mut w: impl Write) -> Result<()> {
    for x in v {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

/// Writes 0-based group labels, one per variable.
pub fn write_groups(groups: &GroupStructure, mut w: impl Write) -> Result<()> {
    for g in groups.assignment() {
        writeln!(w, "{g}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_round_trip() {
        let m = array![[1.0, -2.5], [0.125, 1e-300], [3.0, 4.0]];
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn vector_and_groups() {
        let v = read_vector("1\n2.5\n-3\n".as_bytes()).unwrap();
        assert_eq!(v.to_vec(), vec![1.0, 2.5, -3.0]);
        let v = read_vector("1,2,3".as_bytes()).unwrap();
        assert_eq!(v.len(), 3);
        assert!(read_vector("1,2\n3,4\n".as_bytes()).is_err());

        let g = read_groups("5\n5\n2\n".as_bytes()).unwrap();
        assert_eq!(g.sizes(), &[1, 2]);
        let mut buf = Vec::new();
        write_groups(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1\n1\n0\n");
    }

    #[test]
    fn reports_bad_input() {
        assert!(matches!(read_matrix("1,2\n3\n".as_bytes()), Err(Error::Parse(_)) | Err(Error::Csv(_))));
        assert!(matches!(read_matrix("1,x\n".as_bytes()), Err(Error::Parse(_))));
        assert!(read_groups("0\na\n".as_bytes()).is_err());
        assert!(read_matrix("".as_bytes()).is_err());
    }
}
