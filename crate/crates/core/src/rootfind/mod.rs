//! Zero sets of sampled sections.

mod aberth;
mod torus;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ensembles::{horner_reversed, relative_residual, EnsembleSpec, RandomSection};
use crate::error::{Error, Result};
use crate::geometry::SurfacePoint;

pub use aberth::{roots_polynomial, PolynomialRoots, MAX_ITERATIONS, RESIDUAL_TOLERANCE};
pub use torus::winding_total as torus_winding_total;

/// Residuals above this fail [`verify_zeroset`].
pub const ZERO_RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Reported zeros closer than this are considered duplicates.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Validated zeros of one section.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub spec: EnsembleSpec,
    pub zeros: Vec<SurfacePoint>,
    /// Componentwise relative residual at each zero.
    pub residuals: Vec<f64>,
    /// GEF only: zeros with `R < |z| ≤ R + 1/R`, excluded from `zeros`.
    pub boundary: Vec<SurfacePoint>,
    /// Aberth sweeps, or for the torus the number of cell offsets tried.
    pub iterations: usize,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

/// All zeros of a section, dispatching on the model.
pub fn zeros(section: &RandomSection) -> Result<ZeroSet> {
    match section.spec() {
        EnsembleSpec::Su2 { .. } => zeros_su2(section),
        EnsembleSpec::TorusTheta { .. } => zeros_torus(section),
        EnsembleSpec::Gef { .. } => zeros_gef(section),
    }
}

/// The `n` zeros of an SU(2) polynomial.
///
/// One Aberth run on the scaled coefficients in chart 0. Roots outside the
/// unit disk are moved to chart 1 as `ζ = 1/z` and polished there by Newton
/// steps on the reversed polynomial; vanishing top coefficients become zeros
/// at `ζ = 0`.
pub fn zeros_su2(section: &RandomSection) -> Result<ZeroSet> {
    let EnsembleSpec::Su2 { degree } = *section.spec() else {
        return Err(Error::InvalidArgument("expected an SU(2) section"));
    };
    let c = section.scaled_coefficients();
    let top = c.iter().rposition(|x| x.norm_sqr() > 0.0).ok_or(Error::InvalidArgument("zero section"))?;
    let mut points = Vec::with_capacity(degree);
    let mut iterations = 0;
    if top > 0 {
        let found = roots_polynomial(&c[..=top])?;
        iterations = found.iterations;
        for r in found.roots {
            if r.norm_sqr() <= 1.0 {
                points.push(SurfacePoint::affine0(r));
            } else {
                points.push(SurfacePoint::affine1(polish_reversed(c, r.inv())));
            }
        }
    }
    points.extend(core::iter::repeat(SurfacePoint::affine1(Complex64::new(0.0, 0.0))).take(degree - top));
    if points.len() != degree {
        return Err(Error::ZeroCount { expected: degree, found: points.len() });
    }
    Ok(finish(section, points, Vec::new(), iterations))
}

fn polish_reversed(c: &[Complex64], mut zeta: Complex64) -> Complex64 {
    let (mut v, mut d, mut mag) = horner_reversed(c, zeta);
    for _ in 0..2 {
        if v.norm_sqr() == 0.0 || d.norm_sqr() == 0.0 {
            break;
        }
        let candidate = zeta - v / d;
        let (v2, d2, mag2) = horner_reversed(c, candidate);
        if v2.norm() / mag2 <= v.norm() / mag {
            zeta = candidate;
            (v, d, mag) = (v2, d2, mag2);
        } else {
            break;
        }
    }
    zeta
}

/// Zeros of a theta section in the fundamental square, by winding-number
/// subdivision and Newton refinement.
pub fn zeros_torus(section: &RandomSection) -> Result<ZeroSet> {
    if !matches!(section.spec(), EnsembleSpec::TorusTheta { .. }) {
        return Err(Error::InvalidArgument("expected a theta section"));
    }
    let (points, attempts) = torus::find_zeros(section)?;
    Ok(finish(section, points, Vec::new(), attempts))
}

/// Zeros of the truncated entire function in the closed disk `|z| ≤ R`.
pub fn zeros_gef(section: &RandomSection) -> Result<ZeroSet> {
    let EnsembleSpec::Gef { radius, .. } = *section.spec() else {
        return Err(Error::InvalidArgument("expected an entire-function section"));
    };
    let found = roots_polynomial(section.scaled_coefficients())?;
    let mut inside = Vec::new();
    let mut boundary = Vec::new();
    for zeta in found.roots {
        let z = zeta * radius;
        let r = z.norm();
        if r <= radius {
            inside.push(SurfacePoint::plane(z));
        } else if r <= radius + 1.0 / radius {
            boundary.push(SurfacePoint::plane(z));
        }
    }
    Ok(finish(section, inside, boundary, found.iterations))
}

fn finish(section: &RandomSection, zeros: Vec<SurfacePoint>, boundary: Vec<SurfacePoint>, iterations: usize) -> ZeroSet {
    let residuals = zeros.iter().map(|p| relative_residual(section, p)).collect();
    ZeroSet { spec: *section.spec(), zeros, residuals, boundary, iterations }
}

/// Outcome of [`verify_zeroset`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSetDiagnostics {
    pub pass: bool,
    pub expected: usize,
    pub found: usize,
    pub count_ok: bool,
    pub worst_residual: f64,
    pub worst_index: Option<usize>,
    /// Indices whose residual exceeds [`ZERO_RESIDUAL_TOLERANCE`].
    pub flagged: Vec<usize>,
    pub min_separation: f64,
    /// Argument-principle count over the fundamental square (torus) or the
    /// circle `|z| = R` (GEF).
    pub winding_total: Option<i64>,
}

/// Recompute residuals, counts and winding totals for a zero set.
pub fn verify_zeroset(section: &RandomSection, zeroset: &ZeroSet) -> ZeroSetDiagnostics {
    let spec = section.spec();
    let mut worst_residual = 0.0;
    let mut worst_index = None;
    let mut flagged = Vec::new();
    for (i, p) in zeroset.zeros.iter().enumerate() {
        let r = relative_residual(section, p);
        if !(r <= worst_residual) {
            worst_residual = r;
            worst_index = Some(i);
        }
        if !(r <= ZERO_RESIDUAL_TOLERANCE) {
            flagged.push(i);
        }
    }
    let winding_total = match spec {
        EnsembleSpec::TorusTheta { .. } => torus::winding_total(section),
        EnsembleSpec::Gef { .. } => gef_winding(section),
        EnsembleSpec::Su2 { .. } => None,
    };
    let expected = match spec {
        EnsembleSpec::Gef { .. } => winding_total.map_or(usize::MAX, |w| w.max(0) as usize),
        _ => spec.degree(),
    };
    let found = zeroset.zeros.len();
    let count_ok = found == expected;
    let min_separation = match found {
        0 | 1 => f64::INFINITY,
        _ => crate::extremes::k_smallest(zeroset, 1).map_or(f64::INFINITY, |d| d[0]),
    };
    let winding_ok = match (spec, winding_total) {
        (EnsembleSpec::TorusTheta { degree }, Some(w)) => w == *degree as i64,
        (EnsembleSpec::TorusTheta { .. }, None) => false,
        _ => true,
    };
    let pass = count_ok
        && winding_ok
        && flagged.is_empty()
        && zeroset.spec == *spec
        && (found < 2 || min_separation >= MERGE_TOLERANCE);
    ZeroSetDiagnostics {
        pass,
        expected,
        found,
        count_ok,
        worst_residual,
        worst_index,
        flagged,
        min_separation,
        winding_total,
    }
}

/// Winding number of the truncated entire function around `|z| = R`.
fn gef_winding(section: &RandomSection) -> Option<i64> {
    let c = section.scaled_coefficients();
    let eval = |t: f64| {
        let zeta = Complex64::from_polar(1.0, t);
        let (v, _, mag) = crate::ensembles::horner(c, zeta);
        (v, mag)
    };
    let samples = 4 * c.len().max(64);
    let step = 2.0 * core::f64::consts::PI / samples as f64;
    let mut total = 0.0;
    let mut prev = eval(0.0);
    let mut stack = vec![];
    for s in 1..=samples {
        let t1 = s as f64 * step;
        let next = eval(t1);
        stack.push((t1 - step, prev.0, t1, next.0));
        while let Some((a, fa, b, fb)) = stack.pop() {
            let d = (fb * fa.conj()).arg();
            if d.abs() < core::f64::consts::FRAC_PI_2 {
                total += d;
                continue;
            }
            if b - a < 1e-12 {
                return None;
            }
            let m = 0.5 * (a + b);
            let (fm, mag) = eval(m);
            if fm.norm() <= 1e-15 * mag {
                return None;
            }
            // right half first so the left half is processed next
            stack.push((m, fm, b, fb));
            stack.push((a, fa, m, fm));
        }
        prev = next;
    }
    Some(libm::round(total / (2.0 * core::f64::consts::PI)) as i64)
}
