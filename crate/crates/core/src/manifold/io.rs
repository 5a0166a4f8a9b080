//! CSV ingestion of profiles and fields.

use std::path::Path;

use super::metric::{ScalarField, SphereMetric};
use crate::error::{Error, Result};
use crate::numeric::spline::CubicSpline;

fn read_pairs(path: &Path, second: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.len() < 2 || headers[0].trim() != "x" || headers[1].trim() != second {
        return Err(Error::Parse(format!("{}: expected header `x,{second}`", path.display())));
    }
    let (mut xs, mut vs) = (vec![], vec![]);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |k: usize| -> Result<f64> {
            rec[k].trim().parse::<f64>().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        };
        xs.push(parse(0)?);
        vs.push(parse(1)?);
    }
    Ok((xs, vs))
}

/// Reads a profile CSV with header `x,b` and normalizes it to arc-length form on [0, pi].
pub fn read_profile_csv(path: &Path, nodes: usize) -> Result<SphereMetric> {
    let (xs, bs) = read_pairs(path, "b")?;
    SphereMetric::from_profile_samples(&xs, &bs, nodes)
}

/// Reads a field CSV with header `x,value` and resamples it onto the metric grid.
/// The x column spans the same interval as the source profile and is rescaled to [0, pi].
pub fn read_field_csv(path: &Path, metric: &SphereMetric) -> Result<ScalarField> {
    let (xs, vs) = read_pairs(path, "value")?;
    if metric.grid_len() == 1 {
        if vs.iter().any(|v| *v != vs[0]) {
            return Err(Error::Resolution("round metrics admit only constant fields".into()));
        }
        return Ok(ScalarField(vec![vs[0]]));
    }
    let len = *xs.last().ok_or_else(|| Error::Parse("empty field CSV".into()))?;
    let spline = CubicSpline::new(xs, vs)?;
    let scale = len / std::f64::consts::PI;
    Ok(metric.field_from_fn(|x| spline.eval(x * scale)))
}
