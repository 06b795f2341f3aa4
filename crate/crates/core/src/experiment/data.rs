use std::path::Path;

use crate::error::{Error, Result};
use crate::models::Dataset;

/// Writes `t,y1..yd,x1..xk`, one row per time index.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let dy = data.observations.first().map_or(0, Vec::len);
    let dx = data.latent.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=dy).map(|i| format!("y{i}")));
    header.extend((1..=dx).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (t, (y, x)) in data.observations.iter().zip(&data.latent).enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(y.iter().chain(x).map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let ys: Vec<usize> = (0..header.len())
        .filter(|&i| header[i].starts_with('y'))
        .collect();
    let xs: Vec<usize> = (0..header.len())
        .filter(|&i| header[i].starts_with('x'))
        .collect();
    let mut data = Dataset {
        observations: Vec::new(),
        latent: Vec::new(),
    };
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("row {}: bad number `{}`", line + 1, &rec[i])))
        };
        if rec[0].trim() != line.to_string() {
            return Err(Error::Config(format!(
                "row {}: time index out of sequence",
                line + 1
            )));
        }
        data.observations
            .push(ys.iter().map(|&i| parse(i)).collect::<Result<_>>()?);
        data.latent
            .push(xs.iter().map(|&i| parse(i)).collect::<Result<_>>()?);
    }
    Ok(data)
}
