//! `MHDF1` binary field files.
//!
//! Layout: `b"MHDF"`, version `u8 = 1`, `d: u8`, `N: u32 LE`, `M: f64 LE`,
//! `n_components: u8`, then `n_components × N^d` little-endian `f64` samples,
//! component-major, axis 0 fastest within a component.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Field, Grid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"MHDF";
pub const VERSION: u8 = 1;
const HEADER_LEN: u64 = 4 + 1 + 1 + 4 + 8 + 1;

pub fn write_fields<T: Scalar>(path: &Path, fields: &[Field<T>]) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidParams("no fields to write".into()))?;
    let grid = first.grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let ncomp = u8::try_from(fields.len())
        .map_err(|_| Error::InvalidParams("too many components".into()))?;
    let points = u32::try_from(grid.points_per_axis())
        .map_err(|_| Error::InvalidParams("grid too large for MHDF1".into()))?;
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&[VERSION, grid.dims() as u8]).map_err(io)?;
    w.write_all(&points.to_le_bytes()).map_err(io)?;
    w.write_all(&grid.period_scale().as_f64().to_le_bytes()).map_err(io)?;
    w.write_all(&[ncomp]).map_err(io)?;
    for f in fields {
        for v in f.samples() {
            w.write_all(&v.as_f64().to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

struct Cursor<'a> {
    path: &'a Path,
    reader: BufReader<File>,
    offset: u64,
}

impl Cursor<'_> {
    fn take<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        let mut buf = [0u8; K];
        self.reader.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                self.format(format!("truncated while reading {what}"))
            } else {
                Error::io(self.path, e)
            }
        })?;
        self.offset += K as u64;
        Ok(buf)
    }

    fn format(&self, reason: String) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: self.offset,
            reason,
        }
    }
}

pub fn read_fields<T: Scalar>(path: &Path) -> Result<(Grid<T>, Vec<Field<T>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor {
        path,
        reader: BufReader::new(file),
        offset: 0,
    };
    let magic = cur.take::<4>("magic")?;
    if &magic != MAGIC {
        cur.offset = 0;
        return Err(cur.format(format!("bad magic {magic:?}, expected \"MHDF\"")));
    }
    let [version] = cur.take::<1>("version")?;
    if version != VERSION {
        cur.offset -= 1;
        return Err(cur.format(format!("unsupported version {version}")));
    }
    let [dims] = cur.take::<1>("dimension")?;
    let points = u32::from_le_bytes(cur.take::<4>("points per axis")?);
    let scale = f64::from_le_bytes(cur.take::<8>("period scale")?);
    let [ncomp] = cur.take::<1>("component count")?;
    let grid = Grid::new(dims as usize, points as usize, T::lit(scale)).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        offset: 5,
        reason: e.to_string(),
    })?;
    if ncomp == 0 {
        cur.offset = HEADER_LEN - 1;
        return Err(cur.format("zero components".into()));
    }
    let mut fields = Vec::with_capacity(ncomp as usize);
    for c in 0..ncomp {
        let mut samples = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let v = f64::from_le_bytes(cur.take::<8>(&format!("samples of component {c}"))?);
            samples.push(T::lit(v));
        }
        fields.push(Field::from_samples(&grid, &samples)?);
    }
    let mut extra = [0u8; 1];
    if cur.reader.read(&mut extra).map_err(|e| Error::io(path, e))? != 0 {
        return Err(cur.format("trailing bytes after last component".into()));
    }
    Ok((grid, fields))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.mhdf");
        let g = Grid::<f64>::new(2, 16, 8.0).unwrap();
        let a = Field::from_fn(&g, |x| (x[0] / 8.0).sin());
        let b = Field::from_fn(&g, |x| (3.0 * x[1] / 8.0).cos());
        write_fields(&path, &[a.clone(), b.clone()]).unwrap();
        let (g2, fs) = read_fields::<f64>(&path).unwrap();
        assert_eq!(g2, g);
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].samples(), a.samples());
        assert_eq!(fs[1].samples(), b.samples());
        let bytes = std::fs::metadata(&path).unwrap().len();
        assert_eq!(bytes, HEADER_LEN + 2 * 256 * 8);
    }

    #[test]
    fn bad_magic_names_file_and_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mhdf");
        std::fs::write(&path, b"XHDF\x01\x02").unwrap();
        let err = read_fields::<f64>(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.mhdf") && msg.contains("offset 0"), "{msg}");
    }

    #[test]
    fn truncation_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.mhdf");
        let g = Grid::<f64>::new(2, 8, 1.0).unwrap();
        write_fields(&path, &[Field::from_fn(&g, |x| x[0].sin())]).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(HEADER_LEN as usize + 20);
        std::fs::write(&path, &bytes).unwrap();
        match read_fields::<f64>(&path).unwrap_err() {
            Error::Format { offset, .. } => assert_eq!(offset, HEADER_LEN + 16),
            other => panic!("unexpected {other}"),
        }
    }
}
