//! CSV tables: `.` decimal point, comma separator, header row.

use std::path::Path;

use geosep_core::eval::MeasureRow;
use geosep_core::separation::TraceRecord;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Serialize)]
struct MeasureCsvRow {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "M_p")]
    m_p: f64,
    #[serde(rename = "M_c")]
    m_c: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for row in rows {
        w.serialize(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Columns `iteration,lambda,residual_norm,l1_wavelet,l1_shearlet`.
pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    write_rows(path, trace)
}

/// Columns `T,M_p,M_c`.
pub fn write_measures(path: &Path, rows: &[MeasureRow]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| MeasureCsvRow {
            t: r.t,
            m_p: r.m_p,
            m_c: r.m_c,
        }),
    )
}

/// Reads a file written by [`write_measures`].
pub fn read_measures(path: &Path) -> Result<Vec<MeasureRow>> {
    let mut rdr = csv::Reader::from_reader(crate::io::open(path)?);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Corrupt {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["T", "M_p", "M_c"] {
        return Err(CliError::Corrupt {
            path: path.to_path_buf(),
            reason: format!("unexpected header {headers:?}"),
        });
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::Corrupt {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
            let field = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| CliError::Corrupt {
                    path: path.to_path_buf(),
                    reason: format!("bad number {:?}", &rec[i]),
                })
            };
            Ok(MeasureRow {
                t: field(0)?,
                m_p: field(1)?,
                m_c: field(2)?,
            })
        })
        .collect()
}
