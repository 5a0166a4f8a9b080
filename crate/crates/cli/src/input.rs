//! Parsing of metric and path specs, sweep grids and Bartnik data files.

use std::path::{Path, PathBuf};

use fillin_core::manifold::io::{read_field_csv, read_profile_csv};
use fillin_core::manifold::{ScalarField, SphereMetric};
use fillin_core::paths::{convex_path, MetricPath};
use fillin_core::quasispherical::BartnikData;
use fillin_core::tol;
use fillin_core::Error;
use serde::Deserialize;

fn num(s: &str, what: &str) -> Result<f64, Error> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{what}: `{s}` is not a number")))
}

/// `round[:R]`, `ellipsoid:P:Q[:NODES]`, `profile:FILE.csv[:NODES]`.
pub fn parse_metric(spec: &str, n: usize) -> Result<SphereMetric, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nodes = |k: usize| -> Result<usize, Error> {
        match parts.get(k) {
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad node count `{v}`"))),
            None => Ok(tol::DEFAULT_NODES),
        }
    };
    match parts[0] {
        "round" => {
            let r = parts.get(1).map(|v| num(v, "radius")).transpose()?.unwrap_or(1.0);
            SphereMetric::round(n, r)
        }
        "ellipsoid" if parts.len() >= 3 => {
            SphereMetric::ellipsoid(nodes(3)?, num(parts[1], "ellipsoid p")?, num(parts[2], "ellipsoid q")?)
        }
        "profile" if parts.len() >= 2 => read_profile_csv(Path::new(parts[1]), nodes(2)?),
        _ => Err(Error::Parse(format!(
            "unknown metric `{spec}` (expected round[:R], ellipsoid:P:Q[:NODES] or profile:FILE[:NODES])"
        ))),
    }
}

/// `const[:METRIC]`, `eccentric:Q[:NODES]`, `to-round:Q[:NODES]`, `convex:METRIC,METRIC`.
/// `const` alone is the constant path at `default`.
pub fn parse_path(spec: &str, default: &SphereMetric) -> Result<MetricPath, Error> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nodes = |k: usize| -> Result<usize, Error> {
        match rest.split(':').nth(k) {
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad node count `{v}`"))),
            None => Ok(61),
        }
    };
    let q = || num(rest.split(':').next().unwrap_or(""), "eccentricity");
    match head {
        "const" if rest.is_empty() => MetricPath::constant(default),
        "const" => MetricPath::constant(&parse_metric(rest, default.n())?),
        "eccentric" => MetricPath::eccentric_excursion(nodes(1)?, q()?),
        "to-round" => MetricPath::eccentric_to_round(nodes(1)?, q()?),
        "convex" => {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse("convex path needs `convex:METRIC,METRIC`".into()))?;
            convex_path(&parse_metric(a, default.n())?, &parse_metric(b, default.n())?)
        }
        _ => Err(Error::Parse(format!(
            "unknown path `{spec}` (expected const[:METRIC], eccentric:Q, to-round:Q or convex:A,B)"
        ))),
    }
}

/// `A:B:STEP` (inclusive) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    if spec.contains(',') {
        return spec.split(',').map(|v| num(v, "grid value")).collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("grid `{spec}` must be A:B:STEP or a comma list")));
    }
    let (a, b, h) = (num(parts[0], "grid start")?, num(parts[1], "grid end")?, num(parts[2], "grid step")?);
    if !(h > 0.0) || !(b >= a) {
        return Err(Error::Parse(format!("grid `{spec}` needs A <= B and STEP > 0")));
    }
    let count = ((b - a) / h + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| a + k as f64 * h).collect())
}

#[derive(Debug, Deserialize)]
struct MetricJson {
    kind: String,
    radius: Option<f64>,
    profile_csv: Option<PathBuf>,
    scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum HJson {
    Value(f64),
    Csv { csv: PathBuf },
}

#[derive(Debug, Deserialize)]
struct DataJson {
    n: usize,
    metric: MetricJson,
    #[serde(rename = "H")]
    h: HJson,
}

/// Loads Bartnik data; relative CSV paths resolve against the data file's directory.
pub fn load_data(path: &Path) -> Result<BartnikData, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let raw: DataJson = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };
    let mut metric = match raw.metric.kind.as_str() {
        "round" => SphereMetric::round(raw.n, raw.metric.radius.unwrap_or(1.0))?,
        "axisym" => {
            let csv = raw
                .metric
                .profile_csv
                .as_ref()
                .ok_or_else(|| Error::Parse("axisym metric needs `profile_csv`".into()))?;
            read_profile_csv(&resolve(csv), tol::DEFAULT_NODES)?
        }
        other => return Err(Error::Parse(format!("metric kind `{other}` must be round or axisym"))),
    };
    if let Some(k) = raw.metric.scale {
        metric = SphereMetric::scaled(metric, k)?;
    }
    let h = match raw.h {
        HJson::Value(v) => ScalarField::constant(metric.grid_len(), v),
        HJson::Csv { csv } => read_field_csv(&resolve(&csv), &metric)?,
    };
    Ok(BartnikData { n: raw.n, metric, h })
}
