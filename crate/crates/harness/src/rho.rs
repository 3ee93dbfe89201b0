//! Single Kac-Rice evaluations as machine-readable records.

use gafzeros_core::kacrice::rho_k;
use gafzeros_core::{Complex64, EnsembleSpec, Model, SurfacePoint};
use serde::Serialize;

use crate::error::{usage, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoRecord {
    pub model: &'static str,
    pub n: Option<usize>,
    pub radius: Option<f64>,
    pub k: usize,
    /// Chart-0 coordinates of the query points.
    pub points: Vec<[f64; 2]>,
    pub value: f64,
    pub cond: f64,
    pub pi_power: f64,
    pub volume_factor: f64,
    pub rotated: bool,
}

/// `ρ_k` at `points`, given in chart-0 (sphere), fundamental-domain (torus)
/// or plane coordinates. `k`, when given, must equal the number of points.
pub fn run_rho(spec: &EnsembleSpec, points: &[Complex64], k: Option<usize>) -> Result<RhoRecord> {
    if points.is_empty() {
        return Err(usage("at least one point is required"));
    }
    if let Some(k) = k {
        if k != points.len() {
            return Err(usage(format!("k = {k} but {} points were given", points.len())));
        }
    }
    let pts: Vec<SurfacePoint> = points
        .iter()
        .map(|&z| match spec.model() {
            Model::Su2 => SurfacePoint::sphere(z),
            Model::TorusTheta => SurfacePoint::torus(z),
            Model::Gef => SurfacePoint::plane(z),
        })
        .collect();
    let r = rho_k(spec, &pts)?;
    let (n, radius) = match *spec {
        EnsembleSpec::Gef { radius, .. } => (None, Some(radius)),
        _ => (Some(spec.degree()), None),
    };
    Ok(RhoRecord {
        model: spec.model().as_str(),
        n,
        radius,
        k: points.len(),
        points: points.iter().map(|z| [z.re, z.im]).collect(),
        value: r.value,
        cond: r.cond,
        pi_power: r.normalization.pi_power,
        volume_factor: r.normalization.volume_factor,
        rotated: r.normalization.rotated,
    })
}

/// Parse `re,im` (or a bare real number).
pub fn parse_point(s: &str) -> Result<Complex64> {
    let bad = || usage(format!("invalid point `{s}`, expected `re,im`"));
    let mut parts = s.split(',').map(str::trim);
    let re = parts.next().ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
    let im = match parts.next() {
        Some(p) => p.parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}
