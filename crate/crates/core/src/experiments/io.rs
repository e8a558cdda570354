//! CSV series and JSON reports. Floats are written in shortest round-trip
//! form, so reading a CSV back reproduces the exact values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

fn table_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Table {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| table_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| table_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| table_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(|e| table_error(path, e))
}

pub fn write_json<R: Serialize + ?Sized>(path: &Path, value: &R) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Row {
        n: u32,
        t: f64,
        value: f64,
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            Row { n: 4, t: 0.1 + 0.2, value: 1.0 / 3.0 },
            Row { n: 8, t: 1e-300, value: -2.5e17 },
        ];
        write_csv(&path, &rows).unwrap();
        let back: Vec<Row> = read_csv(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn malformed_table_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "n,t,value\nfour,0.1,1\n").unwrap();
        let err = read_csv::<Row>(&path).unwrap_err();
        assert!(matches!(err, Error::Table { .. }));
        assert!(err.to_string().contains("bad.csv"));
        assert!(matches!(read_csv::<Row>(&dir.path().join("missing.csv")), Err(Error::Io { .. })));
    }
}
