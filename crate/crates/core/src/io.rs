//! CSV and JSON writers for point sets, simulated series and reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::quasirandom::PointSet;

/// Creates `path` (and its parent directories) for buffered writing.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    writer.flush()?;
    Ok(())
}

pub fn write_json_file<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    write_json(value, create_file(path)?)
}

/// Header `index,u_1,..,u_d`; one row per point.
pub fn write_point_set_csv<W: Write>(ps: &PointSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string()];
    header.extend((1..=ps.dim()).map(|j| format!("u_{j}")));
    w.write_record(&header)?;
    for (i, p) in ps.points().iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Header `t,y` with `t` starting at 1.
pub fn write_series_csv<W: Write>(series: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "y"])?;
    for (t, y) in series.iter().enumerate() {
        w.write_record([(t + 1).to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
