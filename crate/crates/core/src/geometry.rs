//! Surface points, geodesic distances, volume densities and the near-pair
//! rescaling factors for the three models.
//!
//! Metrics, with `ω/π` the probability volume of each surface:
//!
//! * sphere: Fubini-Study, `ds = |dz| / (1 + |z|²)` in either affine chart,
//! * torus: flat, `ds² = π |dz|²` on `ℂ / (ℤ + iℤ)`,
//! * plane: Euclidean, with reference measure `dℓ/π`.

use core::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use crate::ensembles::{EnsembleSpec, Model};

/// Coordinate chart of a [`SurfacePoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chart {
    /// Sphere, affine coordinate `z`.
    Affine0,
    /// Sphere, affine coordinate `ζ = 1/z` around the point at infinity.
    Affine1,
    /// Torus, coordinate reduced to the fundamental square `[0,1)²`.
    Torus,
    /// Plane.
    Plane,
}

impl Chart {
    pub fn as_str(self) -> &'static str {
        match self {
            Chart::Affine0 => "affine0",
            Chart::Affine1 => "affine1",
            Chart::Torus => "torus",
            Chart::Plane => "plane",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub chart: Chart,
    pub coord: Complex64,
}

impl SurfacePoint {
    pub fn affine0(z: Complex64) -> Self {
        Self { chart: Chart::Affine0, coord: z }
    }

    pub fn affine1(zeta: Complex64) -> Self {
        Self { chart: Chart::Affine1, coord: zeta }
    }

    /// Sphere point given in chart 0, stored in whichever chart keeps the
    /// coordinate inside the closed unit disk.
    pub fn sphere(z: Complex64) -> Self {
        if z.norm_sqr() <= 1.0 {
            Self::affine0(z)
        } else {
            Self::affine1(z.inv())
        }
    }

    /// Torus point, reduced into `[0,1)²`.
    pub fn torus(z: Complex64) -> Self {
        Self { chart: Chart::Torus, coord: reduce_torus(z) }
    }

    pub fn plane(z: Complex64) -> Self {
        Self { chart: Chart::Plane, coord: z }
    }

    /// Coordinate in sphere chart 0 (may be huge or infinite near `ζ = 0`).
    pub fn chart0_coord(&self) -> Complex64 {
        match self.chart {
            Chart::Affine1 => self.coord.inv(),
            _ => self.coord,
        }
    }

    /// Unit-sphere embedding of a sphere point (inverse stereographic
    /// projection). Fubini-Study distance is half the great-circle angle.
    pub fn sphere_embedding(&self) -> [f64; 3] {
        let c = self.coord;
        let r2 = c.norm_sqr();
        let d = 1.0 + r2;
        match self.chart {
            Chart::Affine1 => [2.0 * c.re / d, -2.0 * c.im / d, (1.0 - r2) / d],
            _ => [2.0 * c.re / d, 2.0 * c.im / d, (r2 - 1.0) / d],
        }
    }

    fn is_sphere(&self) -> bool {
        matches!(self.chart, Chart::Affine0 | Chart::Affine1)
    }
}

/// Reduce a torus coordinate into `[0,1)²`.
pub fn reduce_torus(z: Complex64) -> Complex64 {
    let mut x = z.re - libm::floor(z.re);
    let mut y = z.im - libm::floor(z.im);
    // floor can leave exactly 1.0 for tiny negative inputs
    if x >= 1.0 {
        x = 0.0;
    }
    if y >= 1.0 {
        y = 0.0;
    }
    Complex64::new(x, y)
}

/// Geodesic distance on the surface of `spec`'s model.
pub fn dist(spec: &EnsembleSpec, p: &SurfacePoint, q: &SurfacePoint) -> f64 {
    match spec.model() {
        Model::Su2 => sphere_dist(p, q),
        Model::TorusTheta => torus_dist(p.coord, q.coord),
        Model::Gef => (p.coord - q.coord).norm(),
    }
}

/// Fubini-Study distance `atan(|z − w| / |1 + z w̄|)`, evaluated without
/// leaving either point's chart.
pub fn sphere_dist(p: &SurfacePoint, q: &SurfacePoint) -> f64 {
    debug_assert!(p.is_sphere() && q.is_sphere());
    let (a, b) = (p.coord, q.coord);
    let (num, den) = match (p.chart, q.chart) {
        (Chart::Affine1, Chart::Affine1) | (Chart::Affine0, Chart::Affine0) => {
            ((a - b).norm(), (Complex64::new(1.0, 0.0) + a * b.conj()).norm())
        }
        // ζ = 1/z against w: |z − w| ∝ |1 − ζ w|, |1 + z w̄| ∝ |ζ + w̄|
        (Chart::Affine1, _) => ((Complex64::new(1.0, 0.0) - a * b).norm(), (a + b.conj()).norm()),
        (_, Chart::Affine1) => ((Complex64::new(1.0, 0.0) - a * b).norm(), (b + a.conj()).norm()),
        _ => unreachable!("sphere_dist on non-sphere charts"),
    };
    libm::atan2(num, den)
}

/// Flat torus distance between two points already reduced to `[0,1)²`.
pub fn torus_dist(z: Complex64, w: Complex64) -> f64 {
    let d = z - w;
    let mut best = f64::INFINITY;
    for m in -1..=1 {
        for k in -1..=1 {
            let t = Complex64::new(d.re + f64::from(m), d.im + f64::from(k)).norm_sqr();
            if t < best {
                best = t;
            }
        }
    }
    libm::sqrt(PI * best)
}

/// Density of `ω/π` with respect to Lebesgue measure in the point's chart.
pub fn volume_density(spec: &EnsembleSpec, p: &SurfacePoint) -> f64 {
    match spec.model() {
        Model::Su2 => {
            let d = 1.0 + p.coord.norm_sqr();
            FRAC_1_PI / (d * d)
        }
        Model::TorusTheta => 1.0,
        Model::Gef => FRAC_1_PI,
    }
}

/// Factor turning raw geodesic distances into the near-pair scale:
/// `n^{3/4}` on the sphere and torus, `R^{1/2}` for the entire function.
pub fn rescale_factor(spec: &EnsembleSpec) -> f64 {
    match *spec {
        EnsembleSpec::Su2 { degree } | EnsembleSpec::TorusTheta { degree } => {
            libm::pow(degree as f64, 0.75)
        }
        EnsembleSpec::Gef { radius, .. } => libm::sqrt(radius),
    }
}

/// Largest possible geodesic distance on the model's surface (the plane
/// reports the diameter of the sampling disk).
pub fn diameter(spec: &EnsembleSpec) -> f64 {
    match *spec {
        EnsembleSpec::Su2 { .. } => PI / 2.0,
        EnsembleSpec::TorusTheta { .. } => libm::sqrt(PI / 2.0),
        EnsembleSpec::Gef { radius, .. } => 2.0 * radius,
    }
}

/// Named windows `U` used for near-pair counts `N(a, U)`.
///
/// Entire-function marks are tested in the rescaled disk `ẑ / R ∈ B_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// The whole surface (`B_1` for the entire function).
    Whole,
    /// Sphere points with `|z| < 1` in chart 0.
    Hemisphere,
    /// Torus points with `x < 1/2`.
    TorusHalf,
    /// Plane points with `Im z ≥ 0`.
    DiskSector,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Whole => "whole",
            Region::Hemisphere => "hemisphere",
            Region::TorusHalf => "torus-half",
            Region::DiskSector => "disk-sector",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "whole" => Region::Whole,
            "hemisphere" => Region::Hemisphere,
            "torus-half" => Region::TorusHalf,
            "disk-sector" => Region::DiskSector,
            _ => return None,
        })
    }

    pub fn applies_to(self, model: Model) -> bool {
        matches!(
            (self, model),
            (Region::Whole, _)
                | (Region::Hemisphere, Model::Su2)
                | (Region::TorusHalf, Model::TorusTheta)
                | (Region::DiskSector, Model::Gef)
        )
    }

    /// `∫_U ω/π` (or `∫_U dℓ/π` over `B_1` for the plane).
    pub fn measure(self) -> f64 {
        match self {
            Region::Whole => 1.0,
            _ => 0.5,
        }
    }

    pub fn contains(self, p: &SurfacePoint) -> bool {
        match self {
            Region::Whole => true,
            Region::Hemisphere => p.chart == Chart::Affine0 && p.coord.norm_sqr() < 1.0,
            Region::TorusHalf => p.coord.re < 0.5,
            Region::DiskSector => p.coord.im >= 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn su2() -> EnsembleSpec {
        EnsembleSpec::su2(16).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Arc length of the real segment [0, 1] under |dz|/(1+|z|²), by
    /// composite Simpson.
    fn real_axis_length(upper: f64) -> f64 {
        let m = 2000;
        let h = upper / m as f64;
        let f = |t: f64| 1.0 / (1.0 + t * t);
        let mut s = f(0.0) + f(upper);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn zero_distance_for_identical_points() {
        let p = SurfacePoint::affine0(c(0.3, -0.2));
        assert_eq!(dist(&su2(), &p, &p), 0.0);
        let t = SurfacePoint::torus(c(0.3, 0.9));
        assert_eq!(dist(&EnsembleSpec::torus(4).unwrap(), &t, &t), 0.0);
        let g = SurfacePoint::plane(c(3.0, 1.0));
        assert_eq!(dist(&EnsembleSpec::gef(2.0).unwrap(), &g, &g), 0.0);
    }

    #[test]
    fn sphere_distance_zero_to_one_matches_path_length() {
        let oracle = real_axis_length(1.0);
        let d = dist(&su2(), &SurfacePoint::affine0(c(0.0, 0.0)), &SurfacePoint::affine0(c(1.0, 0.0)));
        assert_relative_eq!(oracle, PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(d, oracle, epsilon = 1e-12);
    }

    #[test]
    fn sphere_distance_is_minimal_among_shooting_paths() {
        // Paths t ↦ t + i·h·sin(πt) from 0 to 1; the straight one is shortest.
        let length = |h: f64| {
            let m = 4000;
            let mut s = 0.0;
            for i in 0..m {
                let t0 = i as f64 / m as f64;
                let t1 = (i + 1) as f64 / m as f64;
                let z0 = c(t0, h * libm::sin(PI * t0));
                let z1 = c(t1, h * libm::sin(PI * t1));
                let mid = (z0 + z1) * 0.5;
                s += (z1 - z0).norm() / (1.0 + mid.norm_sqr());
            }
            s
        };
        let straight = length(0.0);
        for h in [-0.3, -0.1, 0.05, 0.2, 0.5] {
            assert!(length(h) > straight);
        }
        assert_relative_eq!(straight, PI / 4.0, epsilon = 1e-7);
    }

    #[test]
    fn torus_distance_to_centre() {
        let spec = EnsembleSpec::torus(3).unwrap();
        let d = dist(&spec, &SurfacePoint::torus(c(0.0, 0.0)), &SurfacePoint::torus(c(0.5, 0.5)));
        assert_relative_eq!(d, libm::sqrt(PI) * libm::sqrt(2.0) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn volume_densities() {
        let spec = su2();
        assert_relative_eq!(volume_density(&spec, &SurfacePoint::affine0(c(0.0, 0.0))), FRAC_1_PI);
        // total ω/π over both charts, each covering its unit disk
        let m = 4000;
        let mut total = 0.0;
        for i in 0..m {
            let r = (i as f64 + 0.5) / m as f64;
            let rho = volume_density(&spec, &SurfacePoint::affine0(c(r, 0.0)));
            total += 2.0 * PI * r * rho / m as f64;
        }
        assert_relative_eq!(2.0 * total, 1.0, epsilon = 1e-6);
        let torus = EnsembleSpec::torus(2).unwrap();
        assert_eq!(volume_density(&torus, &SurfacePoint::torus(c(0.2, 0.7))), 1.0);
    }

    #[test]
    fn rescale_factors() {
        assert_relative_eq!(rescale_factor(&EnsembleSpec::su2(16).unwrap()), 8.0, epsilon = 1e-14);
        assert_relative_eq!(rescale_factor(&EnsembleSpec::gef(4.0).unwrap()), 2.0);
        assert_eq!(rescale_factor(&EnsembleSpec::su2(1).unwrap()), 1.0);
    }

    #[test]
    fn small_distance_expansion() {
        let n = 1.0e4_f64;
        let spec = su2();
        let mut worst: f64 = 0.0;
        for z0 in [c(0.0, 0.0), c(0.4, -0.3), c(-0.9, 0.2)] {
            for k in 1..=12 {
                let u = Complex64::from_polar(0.25 * k as f64, 0.7 * k as f64);
                // normal coordinates at z0 come from the isometry v ↦ (v + z0)/(1 − z̄0 v)
                let v = u / libm::sqrt(n);
                let w = (v + z0) / (1.0 - z0.conj() * v);
                let d = dist(&spec, &SurfacePoint::affine0(z0), &SurfacePoint::affine0(w));
                let rel = d * libm::sqrt(n) / u.norm() - 1.0;
                worst = worst.max(rel.abs() / (u.norm_sqr() / n));
            }
        }
        assert!(worst <= 5.0, "bound constant {worst}");
    }

    #[test]
    fn regions_have_expected_measure() {
        assert_eq!(Region::Whole.measure(), 1.0);
        assert!(Region::Hemisphere.contains(&SurfacePoint::sphere(c(0.5, 0.0))));
        assert!(!Region::Hemisphere.contains(&SurfacePoint::sphere(c(2.0, 0.0))));
        assert!(Region::TorusHalf.applies_to(Model::TorusTheta));
        assert!(!Region::TorusHalf.applies_to(Model::Su2));
    }

    fn sphere_point() -> impl Strategy<Value = SurfacePoint> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| SurfacePoint::sphere(c(x, y)))
    }

    proptest! {
        #[test]
        fn sphere_metric_axioms(p in sphere_point(), q in sphere_point(), r in sphere_point()) {
            let spec = su2();
            let pq = dist(&spec, &p, &q);
            prop_assert!(pq >= 0.0);
            prop_assert_eq!(pq, dist(&spec, &q, &p));
            prop_assert!(dist(&spec, &p, &r) <= pq + dist(&spec, &q, &r) + 1e-12);
        }

        #[test]
        fn sphere_rotation_and_chart_invariance(x in -2.0..2.0f64, y in -2.0..2.0f64,
                                                 u in -2.0..2.0f64, v in -2.0..2.0f64,
                                                 theta in 0.0..6.28f64) {
            let spec = su2();
            let z = c(x, y);
            let w = c(u, v);
            let rot = Complex64::from_polar(1.0, theta);
            let d = dist(&spec, &SurfacePoint::affine0(z), &SurfacePoint::affine0(w));
            let dr = dist(&spec, &SurfacePoint::affine0(rot * z), &SurfacePoint::affine0(rot * w));
            prop_assert!((d - dr).abs() <= 1e-12);
            prop_assume!(z.norm() > 0.05 && w.norm() > 0.05);
            let d1 = dist(&spec, &SurfacePoint::affine1(z.inv()), &SurfacePoint::affine1(w.inv()));
            let dmix = dist(&spec, &SurfacePoint::affine1(z.inv()), &SurfacePoint::affine0(w));
            prop_assert!((d - d1).abs() <= 1e-12);
            prop_assert!((d - dmix).abs() <= 1e-12);
        }

        #[test]
        fn torus_metric_and_lattice_invariance(x in 0.0..1.0f64, y in 0.0..1.0f64,
                                                u in 0.0..1.0f64, v in 0.0..1.0f64,
                                                a in 0.0..1.0f64, b in 0.0..1.0f64,
                                                m in -3i32..3, k in -3i32..3) {
            let spec = EnsembleSpec::torus(5).unwrap();
            let p = SurfacePoint::torus(c(x, y));
            let q = SurfacePoint::torus(c(u, v));
            let r = SurfacePoint::torus(c(a, b));
            let pq = dist(&spec, &p, &q);
            prop_assert_eq!(pq, dist(&spec, &q, &p));
            prop_assert!(dist(&spec, &p, &r) <= pq + dist(&spec, &q, &r) + 1e-12);
            // shifting by lattice vectors whose sum is exactly representable
            let shifted = SurfacePoint::torus(c(x + f64::from(m), y + f64::from(k)));
            prop_assert!((dist(&spec, &shifted, &q) - pq).abs() <= 1e-14);
        }
    }
}
