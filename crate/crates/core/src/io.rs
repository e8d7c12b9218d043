//! Field snapshots and norm-series CSV files.
//!
//! Snapshot layout (little endian): magic `WNSF`, version `u32`, `d: u32`,
//! `alpha: f64`, `N: u32`, `N_r: u32`, `L: f64`, `R_max: f64`, `t: f64`,
//! component count `u32`, then `Lambda_max: f64` and `N_lambda: u32`, then
//! each component as `N^d * N_r` row-major `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, WnsError};
use crate::grid::{GridSpec, PhysicalField, VelocityState};
use crate::solver::{NormSeries, Workspace};
use crate::special_fn::BesselOrder;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"WNSF";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 5] = ["t", "lp_norm", "l2_norm", "div_norm", "lower_bound"];

pub fn write_snapshot(path: &Path, u: &VelocityState) -> Result<()> {
    let g = u.grid();
    let mut buf = Vec::with_capacity(80 + 8 * g.physical_len() * u.components.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.d as u32).to_le_bytes());
    buf.extend_from_slice(&g.alpha().to_le_bytes());
    buf.extend_from_slice(&(g.n as u32).to_le_bytes());
    buf.extend_from_slice(&(g.n_r as u32).to_le_bytes());
    buf.extend_from_slice(&g.box_len.to_le_bytes());
    buf.extend_from_slice(&g.r_max.to_le_bytes());
    buf.extend_from_slice(&u.t.to_le_bytes());
    buf.extend_from_slice(&(u.components.len() as u32).to_le_bytes());
    buf.extend_from_slice(&g.lambda_max.to_le_bytes());
    buf.extend_from_slice(&(g.n_lambda as u32).to_le_bytes());
    for c in &u.components {
        for v in &c.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = BufWriter::new(File::create(path).map_err(|e| WnsError::io(path, e))?);
    f.write_all(&buf).map_err(|e| WnsError::io(path, e))?;
    f.flush().map_err(|e| WnsError::io(path, e))
}

struct Cursor<'a> {
    path: &'a Path,
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        let end = self.pos + K;
        let bytes = self.data.get(self.pos..end).ok_or_else(|| WnsError::Parse {
            path: self.path.to_path_buf(),
            line: 0,
            message: format!("snapshot truncated while reading {what} at byte {}", self.pos),
        })?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }
}

pub fn read_snapshot(path: &Path) -> Result<VelocityState> {
    let mut data = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut data))
        .map_err(|e| WnsError::io(path, e))?;
    let bad = |message: String| WnsError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message,
    };
    let mut cur = Cursor { path, data: &data, pos: 0 };
    if &cur.take::<4>("magic")? != SNAPSHOT_MAGIC {
        return Err(bad("not a WNSF snapshot".into()));
    }
    let version = cur.u32("version")?;
    if version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported snapshot version {version}")));
    }
    let d = cur.u32("d")? as usize;
    let alpha = cur.f64("alpha")?;
    let n = cur.u32("N")? as usize;
    let n_r = cur.u32("N_r")? as usize;
    let box_len = cur.f64("L")?;
    let r_max = cur.f64("R_max")?;
    let t = cur.f64("time")?;
    let count = cur.u32("component count")? as usize;
    let lambda_max = cur.f64("Lambda_max")?;
    let n_lambda = cur.u32("N_lambda")? as usize;
    let order = BesselOrder::new_or_classical(alpha)?;
    let grid = GridSpec::new(d, order, box_len, n, r_max, n_r, lambda_max, n_lambda)?;
    if count != d + 1 {
        return Err(bad(format!("expected {} components, header says {count}", d + 1)));
    }
    let len = grid.physical_len();
    let expected = cur.pos + 8 * len * count;
    if data.len() != expected {
        return Err(bad(format!("payload is {} bytes, expected {}", data.len() - cur.pos, expected - cur.pos)));
    }
    let mut components = Vec::with_capacity(count);
    for j in 0..count {
        let values = (0..len)
            .map(|_| cur.f64(&format!("component {j}")))
            .collect::<Result<Vec<_>>>()?;
        components.push(PhysicalField::from_values(&grid, values)?);
    }
    let mut state = VelocityState { t, components, div_norm: 0.0 };
    let ws = Workspace::new(&grid, false);
    state.div_norm = ws.div_norm(&ws.to_spectral(&state)?);
    Ok(state)
}

/// Writes `series` with the CSV header; `lower_bound` stays empty until a fit exists.
pub fn write_series_csv(path: &Path, series: &NormSeries) -> Result<()> {
    let file = File::create(path).map_err(|e| WnsError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| WnsError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    };
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for i in 0..series.len() {
        let bound = series.lower_bound(i).map(|v| format!("{v:e}")).unwrap_or_default();
        w.write_record([
            format!("{:e}", series.times[i]),
            format!("{:e}", series.lp_norms[i]),
            format!("{:e}", series.l2_norms[i]),
            format!("{:e}", series.div_norms[i]),
            bound,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| WnsError::io(path, e))
}

/// Reads a norm series; errors carry the 1-based line number.
pub fn read_series_csv(path: &Path) -> Result<NormSeries> {
    let file = File::open(path).map_err(|e| WnsError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(BufReader::new(file));
    let err = |line: usize, message: String| WnsError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut records = r.records();
    let header = match records.next() {
        None => return Err(err(1, "empty file, expected the header row".into())),
        Some(rec) => rec.map_err(|e| err(1, e.to_string()))?,
    };
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(err(1, format!("header must be `{}`", CSV_HEADER.join(","))));
    }
    let mut series = NormSeries::default();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(err(line, format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len())));
        }
        let field = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| err(line, format!("`{}` is not a number in column {}", &rec[i], CSV_HEADER[i])))
        };
        let (t, lp, l2, div) = (field(0)?, field(1)?, field(2)?, field(3)?);
        series
            .push(t, lp, l2, div)
            .map_err(|e| err(line, e.to_string()))?;
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::initial;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.wnsf");
        let g = GridSpec::new(1, BesselOrder::new(0.5).unwrap(), 6.0, 8, 5.0, 12, 4.0, 10).unwrap();
        let mut u = initial::gaussian_shear(&g, 0.5, 1.3).unwrap();
        u.t = 0.25;
        write_snapshot(&path, &u).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.grid(), &g);
        assert_eq!(back.t, 0.25);
        for (a, b) in u.components.iter().zip(&back.components) {
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn snapshot_rejects_garbage_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_snapshot(&path), Err(WnsError::Parse { .. })));
        let g = GridSpec::new(1, BesselOrder::new(0.0).unwrap(), 6.0, 8, 5.0, 12, 4.0, 10).unwrap();
        write_snapshot(&path, &VelocityState::zeros(&g, 0.0)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(read_snapshot(&path).is_err());
        assert!(matches!(read_snapshot(&dir.path().join("missing")), Err(WnsError::Io { .. })));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut s = NormSeries::default();
        for i in 0..4 {
            let t = 0.1 * i as f64;
            s.push(t, 1.0 + t, 2.0, 1e-14).unwrap();
        }
        write_series_csv(&path, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,lp_norm,l2_norm,div_norm,lower_bound\n"));
        assert_eq!(read_series_csv(&path).unwrap(), s);

        std::fs::write(&path, "").unwrap();
        match read_series_csv(&path) {
            Err(WnsError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "t,lp_norm,l2_norm,div_norm,lower_bound\n0,1,1,0,\n0.1,x,1,0,\n").unwrap();
        match read_series_csv(&path) {
            Err(WnsError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("lp_norm"));
            }
            other => panic!("{other:?}"),
        }
    }
}
