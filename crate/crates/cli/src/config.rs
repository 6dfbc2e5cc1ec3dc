//! TOML metric and integral files.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use torus_hydro::integral::{liouville_quadratic_integral, IntegralCoeffs};
use torus_hydro::{
    field_from_samples, liouville_conformal_factor, ConformalMetric, Lattice, LiouvilleSpec, Metric, Model, Profile,
    ScalarField, SemiGeodesicMetric,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    kind: String,
    periods: Option<[f64; 2]>,
    g: Option<String>,
    lambda: Option<String>,
    f1: Option<String>,
    f2: Option<String>,
    directions: Option<[f64; 4]>,
    model: Option<String>,
    nx: Option<usize>,
    ny: Option<usize>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegralFile {
    kind: Option<String>,
    model: Option<String>,
    coefficients: Option<Vec<String>>,
    lower: Option<Vec<String>>,
}

#[derive(Clone)]
pub struct LoadedMetric {
    pub metric: Metric,
    pub liouville: Option<LiouvilleSpec>,
}

/// Raw file contents, kept for the config hash.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_model(s: &str) -> Result<Model, CliError> {
    match s {
        "conformal" => Ok(Model::Conformal),
        "semigeodesic" => Ok(Model::SemiGeodesic),
        other => Err(CliError::Usage(format!("unknown model `{other}` (conformal | semigeodesic)"))),
    }
}

fn need<T>(v: Option<T>, key: &str, kind: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("metric kind `{kind}` needs `{key}`")))
}

pub fn parse_metric(text: &str) -> Result<LoadedMetric, CliError> {
    let file: MetricFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("metric file: {e}")))?;
    let lat = match file.periods {
        Some([l1, l2]) => Lattice::new(l1, l2)?,
        None => Lattice::unit(),
    };
    let kind = file.kind.as_str();
    let (metric, liouville) = match kind {
        "semigeodesic" => {
            let g = ScalarField::parse(&need(file.g, "g", kind)?, lat)?;
            (Metric::SemiGeodesic(SemiGeodesicMetric::new(g)?), None)
        }
        "conformal" => {
            let l = ScalarField::parse(&need(file.lambda, "lambda", kind)?, lat)?;
            (Metric::Conformal(ConformalMetric::new(l)?), None)
        }
        "liouville" => {
            let f1 = Profile::parse(&need(file.f1, "f1", kind)?)?;
            let f2 = Profile::parse(&need(file.f2, "f2", kind)?)?;
            let spec = LiouvilleSpec::new(f1, f2, need(file.directions, "directions", kind)?, lat);
            (Metric::Conformal(liouville_conformal_factor(&spec)?), Some(spec))
        }
        "samples" => {
            let model = parse_model(&need(file.model, "model", kind)?)?;
            let (nx, ny) = (need(file.nx, "nx", kind)?, need(file.ny, "ny", kind)?);
            let field = field_from_samples(&need(file.values, "values", kind)?, nx, ny, lat)?;
            let m = match model {
                Model::Conformal => Metric::Conformal(ConformalMetric::new(field)?),
                Model::SemiGeodesic => Metric::SemiGeodesic(SemiGeodesicMetric::new(field)?),
            };
            (m, None)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown metric kind `{other}` (conformal | semigeodesic | liouville | samples)"
            )))
        }
    };
    Ok(LoadedMetric { metric, liouville })
}

pub fn parse_integral(text: &str, metric: &LoadedMetric) -> Result<IntegralCoeffs, CliError> {
    let file: IntegralFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("integral file: {e}")))?;
    let model = match &file.model {
        Some(m) => parse_model(m)?,
        None => metric.metric.model(),
    };
    if model != metric.metric.model() {
        return Err(CliError::Usage("integral and metric use different coordinate models".into()));
    }
    let lat = metric.metric.lattice();
    let given = [file.kind.is_some(), file.coefficients.is_some(), file.lower.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(CliError::Usage(
            "integral file needs exactly one of `kind`, `coefficients`, `lower`".into(),
        ));
    }
    if let Some(kind) = file.kind {
        if kind != "liouville" {
            return Err(CliError::Usage(format!("unknown integral kind `{kind}` (liouville)")));
        }
        let spec = metric
            .liouville
            .as_ref()
            .ok_or_else(|| CliError::Usage("integral kind `liouville` needs a liouville metric".into()))?;
        return Ok(liouville_quadratic_integral(spec, metric.metric.field())?);
    }
    if let Some(c) = file.coefficients {
        let refs: Vec<&str> = c.iter().map(String::as_str).collect();
        return Ok(IntegralCoeffs::parse(model, &refs, lat)?);
    }
    let lower = file.lower.unwrap_or_default();
    let Metric::SemiGeodesic(m) = &metric.metric else {
        return Err(CliError::Usage("`lower` (normalized form) needs a semigeodesic metric".into()));
    };
    let fields = lower
        .iter()
        .map(|s| ScalarField::parse(s, lat))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntegralCoeffs::normalized(&m.g, fields)?)
}
