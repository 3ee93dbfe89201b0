//! Zero correlation functions: the universal limit laws in closed form and a
//! Kac-Rice engine for the three ensembles.
//!
//! For zeros `z_1..z_k` the engine forms the value covariance
//! `K_ab = K(z_a, z_b)`, the cross covariance `B_ab = ∂_z K(z_a, z_b)` and the
//! derivative covariance `A_ab = ∂_z ∂_w̄ K(z_a, z_b)`, regresses the
//! derivatives on the values, `Λ = A − B K⁻¹ Bᴴ`, and returns
//!
//! ```text
//! ρ_k = perm(Λ) / (π^k det K ∏_a vol(z_a))
//! ```
//!
//! with `vol` the Lebesgue density of `ω/π` in the chart used. The
//! expression is invariant under rescaling the field at each point by a
//! positive constant, so the scaled kernel jets serve directly.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::ensembles::{scaled_kernel_jet, EnsembleSpec, Model};
use crate::error::{Error, Result};
use crate::geometry::{dist, volume_density, Chart, SurfacePoint};
use crate::linalg::{condition_number, CMatrix, Cholesky};
use crate::quadrature::gauss_legendre;

/// Largest permanent evaluated.
pub const MAX_PERMANENT_ORDER: usize = 8;
/// Largest number of points accepted by [`rho_k`].
pub const MAX_POINTS: usize = 6;
/// Rejection threshold for the condition number of the value covariance.
pub const MAX_CONDITION: f64 = 1e12;
/// Points closer than this are treated as coincident.
pub const COINCIDENCE: f64 = 1e-8;

const H_SERIES_BELOW: f64 = 1e-2;

/// `H(t) = ((sinh²t + t²) cosh t − 2t sinh t) / sinh³t`, with `H(t) → 1`
/// as `t → ∞` and `H(t) = t − 2t³/9 + 2t⁵/45 + O(t⁷)` at the origin.
pub fn h_function(t: f64) -> f64 {
    if t < H_SERIES_BELOW {
        let t2 = t * t;
        return t * (1.0 - t2 * (2.0 / 9.0 - t2 * (2.0 / 45.0)));
    }
    if t > 20.0 {
        // divide through by sinh³t: coth t + t² coth t csch² t − 2t csch² t
        let coth = 1.0 / libm::tanh(t);
        let csch = 1.0 / libm::sinh(t);
        let csch2 = csch * csch;
        return coth + t * t * coth * csch2 - 2.0 * t * csch2;
    }
    let (s, c) = (libm::sinh(t), libm::cosh(t));
    ((s * s + t * t) * c - 2.0 * t * s) / (s * s * s)
}

/// Universal two-point function `ρ₂^∞(z, w) = H(|z − w|²/2)`.
pub fn rho2_inf(z: Complex64, w: Complex64) -> f64 {
    h_function(0.5 * (z - w).norm_sqr())
}

/// Permanent by Ryser's formula, visiting column subsets in Gray-code order.
pub fn permanent(m: &CMatrix) -> Result<Complex64> {
    let n = m.order();
    if n > MAX_PERMANENT_ORDER {
        return Err(Error::TooLarge(n));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut subset = 0u32;
    let mut total = Complex64::new(0.0, 0.0);
    for step in 1u32..(1 << n) {
        let col = step.trailing_zeros() as usize;
        let adding = subset & (1 << col) == 0;
        subset ^= 1 << col;
        for (i, r) in row_sums.iter_mut().enumerate() {
            if adding {
                *r += m[(i, col)];
            } else {
                *r -= m[(i, col)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if subset.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(if n % 2 == 1 { -total } else { total })
}

/// Factors applied to turn `perm(Λ)/det K` into a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    /// `π^k`.
    pub pi_power: f64,
    /// `∏_a vol(z_a)` in the chart used.
    pub volume_factor: f64,
    /// Whether sphere points were moved by a rotation onto a common chart.
    pub rotated: bool,
}

/// One correlation value with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    /// `ρ_k` with respect to `(ω/π)^k` (`(dℓ/π)^k` in the plane).
    pub value: f64,
    /// 1-norm condition number of the value covariance with unit diagonal.
    pub cond: f64,
    pub normalization: Normalization,
}

/// `k`-point correlation function of the zeros of `spec` at `points`.
pub fn rho_k(spec: &EnsembleSpec, points: &[SurfacePoint]) -> Result<CorrelationResult> {
    let k = points.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    if k > MAX_POINTS {
        return Err(Error::TooLarge(k));
    }
    for a in 0..k {
        for b in a + 1..k {
            if !(dist(spec, &points[a], &points[b]) > COINCIDENCE) {
                return Err(Error::CoincidentPoints(a, b));
            }
        }
    }
    let (coords, rotated) = common_chart(spec, points);
    let jets: Vec<_> = (0..k * k).map(|ab| scaled_kernel_jet(spec, coords[ab / k], coords[ab % k])).collect();
    let diag: Vec<f64> = (0..k).map(|a| 1.0 / libm::sqrt(jets[a * k + a].k.re)).collect();
    if diag.iter().any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(Error::NonFinite);
    }
    let scale = |a: usize, b: usize, v: Complex64| v * (diag[a] * diag[b]);
    let kmat = CMatrix::from_fn(k, |a, b| scale(a, b, jets[a * k + b].k));
    let bmat = CMatrix::from_fn(k, |a, b| scale(a, b, jets[a * k + b].dk_dz));
    let amat = CMatrix::from_fn(k, |a, b| scale(a, b, jets[a * k + b].d2k_dz_dwbar));
    let chol = Cholesky::new(&kmat).ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let cond = condition_number(&kmat, &chol);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }
    // Λ = A − Xᴴ X with X = L⁻¹ Bᴴ
    let x = chol.forward_solve(&bmat.adjoint());
    let lambda = CMatrix::from_fn(k, |a, b| amat[(a, b)] - (0..k).map(|c| x[(c, a)].conj() * x[(c, b)]).sum::<Complex64>());
    let numerator = permanent(&lambda)?.re;
    // undo the unit-diagonal normalization: perm and det scale alike
    let det = chol.determinant();
    let pi_power = libm::pow(PI, k as f64);
    let volume_factor: f64 = coords.iter().map(|&z| chart_density(spec, z)).product();
    let value = numerator / (pi_power * det * volume_factor);
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(CorrelationResult { value, cond, normalization: Normalization { pi_power, volume_factor, rotated } })
}

fn chart_density(spec: &EnsembleSpec, z: Complex64) -> f64 {
    match spec.model() {
        Model::Su2 => volume_density(spec, &SurfacePoint::affine0(z)),
        Model::TorusTheta => volume_density(spec, &SurfacePoint::torus(z)),
        Model::Gef => volume_density(spec, &SurfacePoint::plane(z)),
    }
}

/// Coordinates of all points in one chart. Sphere points split across the two
/// affine charts are first moved by the rotation that sends the direction
/// farthest from all of them to `∞`.
fn common_chart(spec: &EnsembleSpec, points: &[SurfacePoint]) -> (Vec<Complex64>, bool) {
    let coords = points.iter().map(|p| p.coord).collect();
    if spec.model() != Model::Su2 {
        return (coords, false);
    }
    // the inversion z ↦ 1/z is an isometry preserving the ensemble
    if points.iter().all(|p| p.chart == points[0].chart) {
        return (coords, false);
    }
    let embedded: Vec<[f64; 3]> = points.iter().map(|p| p.sphere_embedding()).collect();
    let s = libm::sqrt(1.0 / 3.0);
    let mut candidates: Vec<[f64; 3]> = vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    for sx in [-s, s] {
        for sy in [-s, s] {
            for sz in [-s, s] {
                candidates.push([sx, sy, sz]);
            }
        }
    }
    let score = |v: &[f64; 3]| {
        embedded
            .iter()
            .map(|e| (0..3).map(|i| (e[i] - v[i]) * (e[i] - v[i])).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    let best = candidates
        .iter()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .copied()
        .unwrap_or([0.0, 0.0, -1.0]);
    // chart-0 coordinate of the chosen direction, then the SU(2) map
    // M(z) = (q̄ z + 1)/(q − z) that sends it to ∞
    let q = Complex64::new(best[0], best[1]) / (1.0 - best[2]);
    let mapped = points
        .iter()
        .map(|p| match p.chart {
            Chart::Affine1 => (q.conj() + p.coord) / (q * p.coord - 1.0),
            _ => (q.conj() * p.coord + 1.0) / (q - p.coord),
        })
        .collect();
    (mapped, true)
}

/// Normal-coordinate scale: chart displacement per unit of rescaled
/// coordinate `u`.
pub fn normal_scale(spec: &EnsembleSpec) -> f64 {
    match *spec {
        EnsembleSpec::Su2 { degree } => 1.0 / libm::sqrt(degree as f64),
        // the flat metric is π|dz|², so geodesic coordinates are √π z
        EnsembleSpec::TorusTheta { degree } => 1.0 / libm::sqrt(PI * degree as f64),
        EnsembleSpec::Gef { .. } => 1.0,
    }
}

/// Points at rescaled normal coordinates `u_i` around `z0`.
pub fn normal_points(spec: &EnsembleSpec, z0: &SurfacePoint, us: &[Complex64]) -> Vec<SurfacePoint> {
    let h = normal_scale(spec);
    us.iter()
        .map(|&u| {
            let v = u * h;
            match spec.model() {
                // rotation of the sphere taking 0 to z0, in z0's chart
                Model::Su2 => SurfacePoint { chart: z0.chart, coord: (v + z0.coord) / (1.0 - z0.coord.conj() * v) },
                Model::TorusTheta => SurfacePoint::torus(z0.coord + v),
                Model::Gef => SurfacePoint::plane(z0.coord + v),
            }
        })
        .collect()
}

/// `n^{-k} ρ_k` at rescaled normal coordinates `u_i` around `z0`; tends to
/// `ρ_k^∞(u)` as `n → ∞`. For the entire function `n = 1`.
pub fn rescaled_rho_k(spec: &EnsembleSpec, z0: &SurfacePoint, us: &[Complex64]) -> Result<f64> {
    let pts = normal_points(spec, z0, us);
    let n = match spec.model() {
        Model::Gef => 1.0,
        _ => spec.degree() as f64,
    };
    Ok(rho_k(spec, &pts)?.value / libm::pow(n, us.len() as f64))
}

/// Universal limit `ρ_k^∞(u)`: the correlation of the entire function's
/// zeros, whose kernel is exactly `e^{z w̄}/π`.
pub fn rho_k_inf(us: &[Complex64]) -> Result<f64> {
    let spec = EnsembleSpec::Gef { radius: 1.0, truncation: 1 };
    let pts: Vec<SurfacePoint> = us.iter().map(|&u| SurfacePoint::plane(u)).collect();
    Ok(rho_k(&spec, &pts)?.value)
}

/// `∏_{i<j} min(|u_i − u_j|², 1)`.
pub fn short_range_product(us: &[Complex64]) -> f64 {
    let mut p = 1.0;
    for i in 0..us.len() {
        for j in i + 1..us.len() {
            p *= (us[i] - us[j]).norm_sqr().min(1.0);
        }
    }
    p
}

fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// Density `4 x^{4k−1} e^{−x⁴} / (k−1)!` of the limiting `k`-th smallest
/// rescaled distance.
pub fn limit_density(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "k starts at 1");
    if x <= 0.0 {
        return if k == 1 && x == 0.0 { 0.0 } else { 0.0 };
    }
    let x4 = x * x * x * x;
    4.0 * libm::exp((4 * k - 1) as f64 * libm::log(x) - x4 - ln_factorial(k - 1))
}

/// Survival function `e^{−x⁴} Σ_{j<k} x^{4j}/j!`: probability that a Poisson
/// process with mean measure `x⁴` has fewer than `k` points.
pub fn limit_survival(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "k starts at 1");
    if x <= 0.0 {
        return 1.0;
    }
    let x4 = x * x * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= x4 / j as f64;
        sum += term;
    }
    libm::exp(-x4) * sum
}

/// Limit CDF `1 − S_k(x)`.
pub fn limit_cdf(k: usize, x: f64) -> f64 {
    1.0 - limit_survival(k, x)
}

/// Mean number of pairs at rescaled distance below `a` with mark in a window
/// of measure `region_measure`: `(a⁴/8) · region_measure`.
pub fn intensity(a: f64, region_measure: f64) -> f64 {
    a * a * a * a / 8.0 * region_measure
}

const BALL_RELATIVE_TOLERANCE: f64 = 1e-8;

/// `∫_{B_r(z0)} ρ₂(z0, w) ω(w)/π` by Gauss-Legendre in the squared geodesic
/// radius and the trapezoid rule in the angle, doubling both until successive
/// estimates agree to `1e-8` relative.
///
/// `ρ₂(z0, ·)` is analytic in the squared distance, so the substitution
/// `s = r√v` gives a smooth integrand in `v` and keeps the nodes away from
/// `z0`, where the regression loses precision.
pub fn ball_integral_rho2(spec: &EnsembleSpec, z0: &SurfacePoint, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive"));
    }
    let mut previous = f64::NAN;
    let mut change = f64::INFINITY;
    let (mut radial, mut angular) = (8, 8);
    while radial <= 128 {
        let estimate = ball_rule(spec, z0, radius, radial, angular)?;
        change = ((estimate - previous) / estimate).abs();
        if change <= BALL_RELATIVE_TOLERANCE {
            return Ok(estimate);
        }
        previous = estimate;
        radial *= 2;
        angular *= 2;
    }
    Err(Error::Quadrature(change))
}

fn ball_rule(spec: &EnsembleSpec, z0: &SurfacePoint, radius: f64, radial: usize, angular: usize) -> Result<f64> {
    let rule = gauss_legendre(radial);
    let mut total = 0.0;
    for &(x, w) in &rule {
        let v = 0.5 * (x + 1.0);
        let s = radius * libm::sqrt(v);
        // ds = r dv / (2√v); the jacobian below is the ω/π measure of the
        // geodesic circle of radius s per unit angle, divided by s
        let (u_radius, jacobian_over_s) = match spec.model() {
            Model::Su2 => {
                let n = spec.degree() as f64;
                let sinc = if s == 0.0 { 1.0 } else { libm::sin(s) / s };
                (libm::tan(s) * libm::sqrt(n), sinc * libm::cos(s) / PI)
            }
            Model::TorusTheta => {
                let n = spec.degree() as f64;
                (s * libm::sqrt(n), 1.0 / PI)
            }
            Model::Gef => (s, 1.0 / PI),
        };
        let mut ring = 0.0;
        for j in 0..angular {
            let theta = 2.0 * PI * (j as f64 + 0.5) / angular as f64;
            let u = Complex64::from_polar(u_radius, theta);
            let pts = normal_points(spec, z0, &[Complex64::new(0.0, 0.0), u]);
            ring += rho_k(spec, &pts)?.value;
        }
        total += w * jacobian_over_s * ring * (2.0 * PI / angular as f64);
    }
    // ∫ f(s) s ds over [0, r] = (r²/2) ∫_0^1 f(r√v) dv, and dv = dx/2
    Ok(total * 0.25 * radius * radius)
}

/// `π⁻¹ ∫_{|z| ≤ ε} H(|z|²/2) dℓ(z) = ∫_0^{ε²/2} 2 H(t) dt`.
pub fn ball_integral_limit(epsilon: f64) -> f64 {
    let upper = 0.5 * epsilon * epsilon;
    crate::quadrature::integrate(32, 0.0, upper, |t| 2.0 * h_function(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_permanent(m: &CMatrix) -> Complex64 {
        fn go(m: &CMatrix, row: usize, used: &mut Vec<bool>) -> Complex64 {
            if row == m.order() {
                return c(1.0, 0.0);
            }
            let mut s = c(0.0, 0.0);
            for col in 0..m.order() {
                if !used[col] {
                    used[col] = true;
                    s += m[(row, col)] * go(m, row + 1, used);
                    used[col] = false;
                }
            }
            s
        }
        go(m, 0, &mut vec![false; m.order()])
    }

    #[test]
    fn h_values() {
        assert_eq!(h_function(0.0), 0.0);
        let expected = 0.01 - (2.0 / 9.0) * 1e-6 + (2.0 / 45.0) * 1e-10;
        // 0.01 is on the closed-form side, which keeps about 12 digits there
        assert!((h_function(0.01) - expected).abs() < 1e-14);
        assert!((h_function(20.0) - 1.0).abs() <= 1e-6);
        assert!((h_function(800.0) - 1.0).abs() <= 1e-12);
        // both branches agree across the switch
        let t = H_SERIES_BELOW;
        let (s, ch) = (libm::sinh(t), libm::cosh(t));
        let closed = ((s * s + t * t) * ch - 2.0 * t * s) / (s * s * s);
        assert!((closed - h_function(t * (1.0 - 1e-15))).abs() < 1e-10);
    }

    #[test]
    fn small_permanents() {
        let a = c(1.5, -0.5);
        assert_eq!(permanent(&CMatrix::from_fn(1, |_, _| a)).unwrap(), a);
        let m = CMatrix::from_fn(2, |i, j| c((1 + 2 * i + j) as f64, (i as f64) - (j as f64)));
        let expect = m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)];
        assert!((permanent(&m).unwrap() - expect).norm() < 1e-14);
        assert!(matches!(permanent(&CMatrix::zeros(9)), Err(Error::TooLarge(9))));
    }

    #[test]
    fn ryser_matches_naive_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 1..=6 {
            for _ in 0..20 {
                let m = CMatrix::from_fn(k, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                let a = permanent(&m).unwrap();
                let b = naive_permanent(&m);
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "k={k}");
            }
        }
    }

    #[test]
    fn gef_one_point_density_is_one() {
        let spec = EnsembleSpec::gef(5.0).unwrap();
        for z in [c(0.0, 0.0), c(1.3, -2.0), c(-4.0, 0.5)] {
            let r = rho_k(&spec, &[SurfacePoint::plane(z)]).unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
        }
    }

    #[test]
    fn su2_one_point_density_is_n() {
        let spec = EnsembleSpec::su2(50).unwrap();
        for p in [SurfacePoint::affine0(c(0.0, 0.0)), SurfacePoint::affine0(c(1.0, 0.0)), SurfacePoint::affine1(c(0.2, 0.7))] {
            let r = rho_k(&spec, &[p]).unwrap();
            assert!((r.value - 50.0).abs() < 1e-8, "{}", r.value);
        }
    }

    #[test]
    fn torus_one_point_density_is_n() {
        // the density is constant up to terms exponentially small in n
        let spec = EnsembleSpec::torus(30).unwrap();
        for z in [c(0.1, 0.2), c(0.7, 0.9)] {
            let r = rho_k(&spec, &[SurfacePoint::torus(z)]).unwrap();
            assert!((r.value - 30.0).abs() < 1e-8, "{}", r.value);
        }
    }

    #[test]
    fn gef_two_point_function_is_h() {
        let spec = EnsembleSpec::gef(5.0).unwrap();
        for k in 0..20 {
            let u = Complex64::from_polar(0.05 + 0.25 * k as f64, 0.3 * k as f64);
            let z0 = c(0.4, -0.2);
            let r = rho_k(&spec, &[SurfacePoint::plane(z0), SurfacePoint::plane(z0 + u)]).unwrap();
            assert!((r.value - rho2_inf(c(0.0, 0.0), u)).abs() < 1e-8, "|u|={} {} vs {}", u.norm(), r.value, rho2_inf(c(0.0, 0.0), u));
        }
    }

    #[test]
    fn permutation_symmetry_and_mixed_charts() {
        let spec = EnsembleSpec::su2(9).unwrap();
        let pts = [
            SurfacePoint::affine0(c(0.3, 0.1)),
            SurfacePoint::affine1(c(0.2, -0.4)),
            SurfacePoint::affine0(c(-0.5, 0.6)),
        ];
        let a = rho_k(&spec, &pts).unwrap();
        assert!(a.normalization.rotated);
        let b = rho_k(&spec, &[pts[2], pts[0], pts[1]]).unwrap();
        assert!((a.value - b.value).abs() <= 1e-10 * a.value);
        // same configuration written entirely in chart 0
        let c0: Vec<SurfacePoint> = pts.iter().map(|p| SurfacePoint::affine0(p.chart0_coord())).collect();
        let c = rho_k(&spec, &c0).unwrap();
        assert!((a.value - c.value).abs() <= 1e-9 * a.value, "{} {}", a.value, c.value);
        assert!(a.value > 0.0);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let spec = EnsembleSpec::gef(5.0).unwrap();
        let p = SurfacePoint::plane(c(1.0, 1.0));
        assert_eq!(rho_k(&spec, &[p, p]).unwrap_err(), Error::CoincidentPoints(0, 1));
    }

    #[test]
    fn survival_and_density() {
        for k in 1..=4 {
            let total = crate::quadrature::integrate(64, 0.0, 4.0, |x| limit_density(k, x));
            assert!((total - 1.0).abs() < 1e-8, "k={k} {total}");
            for x in [0.3, 0.8, 1.2, 1.9] {
                let h = 1e-5;
                let fd = -(limit_survival(k, x + h) - limit_survival(k, x - h)) / (2.0 * h);
                assert!((fd - limit_density(k, x)).abs() < 1e-8);
            }
        }
        assert!((limit_survival(2, 1.0) - 2.0 / core::f64::consts::E).abs() < 1e-15);
        assert!((limit_density(1, 1.1) - 4.0 * 1.1f64.powi(3) * (-(1.1f64.powi(4))).exp()).abs() < 1e-14);
    }

    #[test]
    fn intensities() {
        assert_eq!(intensity(1.0, 1.0), 0.125);
        assert_eq!(intensity(0.0, 1.0), 0.0);
        assert!((intensity(1.5, 0.5) - 0.31640625).abs() < 1e-15);
    }

    #[test]
    fn limiting_ball_integral() {
        let eps = 0.2;
        let v = ball_integral_limit(eps);
        assert!((v / (eps.powi(4) / 4.0) - 1.0).abs() < 1e-3);
        let spec = EnsembleSpec::gef(5.0).unwrap();
        let w = ball_integral_rho2(&spec, &SurfacePoint::plane(c(0.0, 0.0)), eps).unwrap();
        assert!((w - v).abs() < 1e-8 * v, "{w} {v}");
        let small = ball_integral_rho2(&spec, &SurfacePoint::plane(c(0.0, 0.0)), 0.02).unwrap();
        assert!(small / 0.02f64.powi(4) < 1.0);
    }

    #[test]
    fn ball_integrals_agree_across_models() {
        // same rescaled radius on the sphere and the torus
        let n = 2048;
        let r = libm::pow(n as f64, -0.75);
        let su2 = ball_integral_rho2(&EnsembleSpec::su2(n).unwrap(), &SurfacePoint::sphere(c(0.3, 0.1)), r).unwrap();
        let torus = ball_integral_rho2(&EnsembleSpec::torus(n).unwrap(), &SurfacePoint::torus(c(0.3, 0.1)), r).unwrap();
        assert!((su2 - 0.25).abs() < 0.005, "{su2}");
        assert!((torus - 0.25).abs() < 0.005, "{torus}");
    }
}
