//! The three Gaussian ensembles: sampling, section evaluation and closed-form
//! covariance-kernel jets.
//!
//! Each random section is `s = Σ b_j f_j` with i.i.d. standard complex
//! Gaussian `b_j` and an orthonormal basis `f_j`:
//!
//! * SU(2): `f_j = √((n+1)/π) √C(n,j) z^j` on the sphere, potential
//!   `φ = log(1+|z|²)`,
//! * theta: `f_j = π^{-1/2} (2n)^{1/4} θ_j(z)` on `ℂ/(ℤ+iℤ)`, potential
//!   `φ = 2π y²`,
//! * GEF: `f_j = z^j / √(j!)`, truncated at degree `J`, weight `e^{-|z|²}`.
//!
//! Raw values grow like `e^{nφ/2}`, which overflows doubles for the degrees
//! of interest. Internally every evaluation is carried out on a *scaled*
//! representation that differs from the true value by a positive real
//! factor, so zeros, phases and winding numbers are unaffected.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{Chart, SurfacePoint};

/// Theta lattice sums keep the integers `m` with `(π/n)(m + n y)² ≤ THETA_CUTOFF`,
/// i.e. weighted terms down to `e^{-60}` of the largest.
pub const THETA_CUTOFF: f64 = 60.0;

/// Upper bound on the relative truncation tail of the entire function's
/// kernel, `Σ_{j>J} R^{2j}/j! / e^{R²}`.
pub const GEF_TAIL_BOUND: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Su2,
    TorusTheta,
    Gef,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Su2 => "su2",
            Model::TorusTheta => "torus",
            Model::Gef => "gef",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "su2" => Some(Model::Su2),
            "torus" => Some(Model::TorusTheta),
            "gef" => Some(Model::Gef),
            _ => None,
        }
    }
}

/// Which ensemble to sample, with its scale parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSpec {
    Su2 { degree: usize },
    TorusTheta { degree: usize },
    /// Entire function restricted to the disk `B_R`, truncated at degree
    /// `truncation`.
    Gef { radius: f64, truncation: usize },
}

impl EnsembleSpec {
    pub fn su2(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidSpec("degree must be at least 1"));
        }
        Ok(Self::Su2 { degree })
    }

    pub fn torus(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidSpec("degree must be at least 1"));
        }
        Ok(Self::TorusTheta { degree })
    }

    /// Entire function on `B_radius` with the default truncation degree.
    pub fn gef(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSpec("radius must be positive"));
        }
        Self::gef_with_truncation(radius, gef_default_truncation(radius))
    }

    pub fn gef_with_truncation(radius: f64, truncation: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSpec("radius must be positive"));
        }
        if truncation == 0 || gef_relative_tail(radius, truncation) >= GEF_TAIL_BOUND {
            return Err(Error::InvalidSpec("truncation degree too small for the radius"));
        }
        Ok(Self::Gef { radius, truncation })
    }

    pub fn model(&self) -> Model {
        match self {
            Self::Su2 { .. } => Model::Su2,
            Self::TorusTheta { .. } => Model::TorusTheta,
            Self::Gef { .. } => Model::Gef,
        }
    }

    /// Line-bundle degree `n`; the entire function counts as degree 1.
    pub fn degree(&self) -> usize {
        match *self {
            Self::Su2 { degree } | Self::TorusTheta { degree } => degree,
            Self::Gef { .. } => 1,
        }
    }

    /// Number of Gaussian coefficients in a sample.
    pub fn coefficient_count(&self) -> usize {
        match *self {
            Self::Su2 { degree } => degree + 1,
            Self::TorusTheta { degree } => degree,
            Self::Gef { truncation, .. } => truncation + 1,
        }
    }

    /// Mean number of zeros: `n` on compact surfaces, `R²` in `B_R`.
    pub fn expected_zero_count(&self) -> f64 {
        match *self {
            Self::Su2 { degree } | Self::TorusTheta { degree } => degree as f64,
            Self::Gef { radius, .. } => radius * radius,
        }
    }

    /// `nφ(z)/2`, the log of the factor separating raw and weighted values.
    pub fn weight_exponent(&self, z: Complex64) -> f64 {
        match *self {
            Self::Su2 { degree } => 0.5 * degree as f64 * libm::log1p(z.norm_sqr()),
            Self::TorusTheta { degree } => PI * degree as f64 * z.im * z.im,
            Self::Gef { .. } => 0.5 * z.norm_sqr(),
        }
    }

    /// Wirtinger derivative `∂_z` of [`Self::weight_exponent`].
    pub fn weight_exponent_dz(&self, z: Complex64) -> Complex64 {
        match *self {
            Self::Su2 { degree } => z.conj() * (0.5 * degree as f64 / (1.0 + z.norm_sqr())),
            Self::TorusTheta { degree } => Complex64::new(0.0, -PI * degree as f64 * z.im),
            Self::Gef { .. } => z.conj() * 0.5,
        }
    }
}

/// `⌈R² + 12R + 20⌉`.
pub fn gef_default_truncation(radius: f64) -> usize {
    libm::ceil(radius * radius + 12.0 * radius + 20.0) as usize
}

/// `Σ_{j>J} R^{2j}/j!` relative to the full sum `e^{R²}`, summed in log space.
pub fn gef_relative_tail(radius: f64, truncation: usize) -> f64 {
    let r2 = radius * radius;
    let log_r2 = libm::log(r2);
    let mut total = 0.0;
    let mut j = truncation + 1;
    loop {
        let log_term = j as f64 * log_r2 - libm::lgamma(j as f64 + 1.0) - r2;
        let term = libm::exp(log_term);
        total += term;
        // terms decrease once j > R²; stop when negligible
        if j as f64 > r2 && term <= total * 1e-18 {
            break;
        }
        if j > truncation + 100_000 {
            break;
        }
        j += 1;
    }
    total
}

/// Provenance of a sampled section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedRecord {
    pub master_seed: u64,
    pub trial_index: u64,
}

/// One sampled coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSection {
    spec: EnsembleSpec,
    coefficients: Vec<Complex64>,
    scaled: Vec<Complex64>,
    log_scale: f64,
    seed: Option<SeedRecord>,
}

impl RandomSection {
    /// Wrap explicit Gaussian coefficients `b_j`.
    pub fn from_coefficients(spec: EnsembleSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != spec.coefficient_count() {
            return Err(Error::InvalidArgument("coefficient count does not match the ensemble"));
        }
        if coefficients.iter().any(|b| !(b.re.is_finite() && b.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let (scaled, log_scale) = match spec {
            EnsembleSpec::Su2 { degree } => {
                let ln_n = libm::lgamma(degree as f64 + 1.0);
                scale_by_logs(&coefficients, |j| {
                    0.5 * (ln_n
                        - libm::lgamma(j as f64 + 1.0)
                        - libm::lgamma((degree - j) as f64 + 1.0))
                })
            }
            EnsembleSpec::Gef { radius, .. } => {
                let ln_r = libm::log(radius);
                scale_by_logs(&coefficients, |j| j as f64 * ln_r - 0.5 * libm::lgamma(j as f64 + 1.0))
            }
            EnsembleSpec::TorusTheta { .. } => (coefficients.clone(), 0.0),
        };
        Ok(Self { spec, coefficients, scaled, log_scale, seed: None })
    }

    pub fn with_seed(mut self, seed: SeedRecord) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// The Gaussian coefficients `b_j`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Polynomial coefficients used for root finding: for SU(2)
    /// `c_j = b_j √C(n,j) e^{-s}` in `z`; for the entire function
    /// `b_j R^j / √(j!) e^{-s}` in `ζ = z/R`; theta coefficients unchanged.
    pub fn scaled_coefficients(&self) -> &[Complex64] {
        &self.scaled
    }

    /// The shift `s` removed from the scaled coefficients.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
    }
}

fn scale_by_logs(b: &[Complex64], log_weight: impl Fn(usize) -> f64) -> (Vec<Complex64>, f64) {
    let logs: Vec<f64> = b
        .iter()
        .enumerate()
        .map(|(j, bj)| {
            let m = bj.norm();
            if m > 0.0 {
                log_weight(j) + libm::log(m)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let s = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = if s.is_finite() { s } else { 0.0 };
    let scaled = b
        .iter()
        .enumerate()
        .map(|(j, bj)| *bj * libm::exp(log_weight(j) - s))
        .collect();
    (scaled, s)
}

/// Draw one section: every `b_j` has independent real and imaginary parts of
/// variance 1/2.
pub fn sample_section<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> RandomSection {
    let coefficients = (0..spec.coefficient_count())
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    RandomSection::from_coefficients(*spec, coefficients).expect("sampled coefficients are valid")
}

/// Section value in a common scaled representation: `value = f(z) e^{-scale_log}`
/// with `f` the local holomorphic representative in the point's chart.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledValue {
    pub value: Complex64,
    /// `Σ_j |b_j f_j(z)|` in the same scaling, for componentwise residuals.
    pub magnitude: f64,
    pub scale_log: f64,
}

pub(crate) fn evaluate_scaled(section: &RandomSection, p: &SurfacePoint) -> ScaledValue {
    match section.spec {
        EnsembleSpec::Su2 { degree } => {
            let norm_log = section.log_scale + 0.5 * libm::log((degree as f64 + 1.0) * FRAC_1_PI);
            let (v, _, mag) = match p.chart {
                Chart::Affine1 => horner_reversed(&section.scaled, p.coord),
                _ => horner(&section.scaled, p.coord),
            };
            ScaledValue { value: v, magnitude: mag, scale_log: norm_log }
        }
        EnsembleSpec::Gef { radius, .. } => {
            let zeta = p.coord / radius;
            let (v, _, mag) = horner(&section.scaled, zeta);
            ScaledValue { value: v, magnitude: mag, scale_log: section.log_scale }
        }
        EnsembleSpec::TorusTheta { degree } => {
            let t = theta_weighted(&section.scaled, degree, p.coord, THETA_CUTOFF);
            let scale_log =
                0.25 * libm::log(2.0 * degree as f64) - 0.5 * libm::log(PI) + PI * degree as f64 * p.coord.im * p.coord.im;
            ScaledValue { value: t.value, magnitude: t.magnitude, scale_log }
        }
    }
}

/// Value, derivative and `Σ |c_j||z|^j` of `Σ c_j z^j`.
pub(crate) fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let r = z.norm();
    for cj in c.iter().rev() {
        d = d * z + v;
        v = v * z + *cj;
        mag = mag * r + libm::sqrt(cj.norm_sqr());
    }
    (v, d, mag)
}

/// Same for the coefficient-reversed polynomial `Σ c_j ζ^{n-j}`.
pub(crate) fn horner_reversed(c: &[Complex64], zeta: Complex64) -> (Complex64, Complex64, f64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let r = zeta.norm();
    for cj in c.iter() {
        d = d * zeta + v;
        v = v * zeta + *cj;
        mag = mag * r + libm::sqrt(cj.norm_sqr());
    }
    (v, d, mag)
}

pub(crate) struct ThetaValue {
    pub value: Complex64,
    pub magnitude: f64,
}

/// Integer range of the truncated lattice sum at height `y`.
pub(crate) fn theta_window(degree: usize, y: f64, cutoff: f64) -> (i64, i64) {
    let n = degree as f64;
    let half = libm::sqrt(cutoff * n / PI);
    let centre = -n * y;
    (libm::ceil(centre - half) as i64, libm::floor(centre + half) as i64)
}

/// `e^{-πny²} Σ_m b_{m mod n} e^{-πm²/n + 2πimz}` and `Σ_m |b_m| |term_m|`. Every `m` corresponds to exactly one
/// pair `(j, k)` with `m = j + nk` in the basis sums `θ_j`.
pub(crate) fn theta_weighted(b: &[Complex64], degree: usize, z: Complex64, cutoff: f64) -> ThetaValue {
    let n = degree as f64;
    let (lo, hi) = theta_window(degree, z.im, cutoff);
    let (x, y) = (z.re, z.im);
    let k = PI / n;
    // Gaussian factor g(m) = exp(-k (m + n y)²) by a two-term recurrence
    let t0 = lo as f64 + n * y;
    let mut g = libm::exp(-k * t0 * t0);
    let mut ratio = libm::exp(-k * (2.0 * t0 + 1.0));
    let step_ratio = libm::exp(-2.0 * k);
    let mut phase = Complex64::from_polar(1.0, 2.0 * PI * frac(lo as f64 * x));
    let step = Complex64::from_polar(1.0, 2.0 * PI * x);
    let mut value = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let nd = degree as i64;
    for m in lo..=hi {
        let bj = b[m.rem_euclid(nd) as usize];
        let term = bj * phase * g;
        value += term;
        magnitude += libm::sqrt(bj.norm_sqr()) * g;
        g *= ratio;
        ratio *= step_ratio;
        phase *= step;
    }
    ThetaValue { value, magnitude }
}

/// [`theta_weighted`] without the componentwise magnitude, plus the
/// holomorphic derivative under the same weight when `DERIV` is set.
#[inline]
pub(crate) fn theta_fast<const DERIV: bool>(b: &[Complex64], degree: usize, z: Complex64) -> (Complex64, Complex64) {
    let n = degree as f64;
    let (lo, hi) = theta_window(degree, z.im, THETA_CUTOFF);
    let (x, y) = (z.re, z.im);
    let k = PI / n;
    let t0 = lo as f64 + n * y;
    let mut g = libm::exp(-k * t0 * t0);
    let mut ratio = libm::exp(-k * (2.0 * t0 + 1.0));
    let step_ratio = libm::exp(-2.0 * k);
    let mut phase = Complex64::from_polar(1.0, 2.0 * PI * frac(lo as f64 * x));
    let step = Complex64::from_polar(1.0, 2.0 * PI * x);
    let mut value = Complex64::new(0.0, 0.0);
    let mut moment = Complex64::new(0.0, 0.0);
    let mut j = lo.rem_euclid(degree as i64) as usize;
    let mut m = lo as f64;
    for _ in lo..=hi {
        let term = b[j] * phase * g;
        value += term;
        if DERIV {
            moment += term * m;
        }
        j += 1;
        if j == degree {
            j = 0;
        }
        m += 1.0;
        g *= ratio;
        ratio *= step_ratio;
        phase *= step;
    }
    (value, moment * Complex64::new(0.0, 2.0 * PI))
}

fn frac(t: f64) -> f64 {
    t - libm::floor(t)
}

/// Raw section value `Σ b_j f_j(z)` in the point's chart.
///
/// Fails with [`Error::Overflow`] when the value leaves double range, which
/// happens for large degrees away from the chart origin.
pub fn evaluate_raw(section: &RandomSection, p: &SurfacePoint) -> Result<Complex64> {
    let s = evaluate_scaled(section, p);
    let out = s.value * libm::exp(s.scale_log);
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow)
    }
}

/// Weighted value `s̃(z) = Σ b_j f_j(z) e^{-nφ(z)/2}`.
pub fn evaluate_weighted(section: &RandomSection, p: &SurfacePoint) -> Result<Complex64> {
    let s = evaluate_scaled(section, p);
    let e = s.scale_log - section.spec.weight_exponent(p.coord);
    let out = s.value * libm::exp(e);
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow)
    }
}

/// Componentwise relative residual `|Σ b_j f_j(z)| / Σ |b_j f_j(z)|`.
pub fn relative_residual(section: &RandomSection, p: &SurfacePoint) -> f64 {
    let s = evaluate_scaled(section, p);
    if s.magnitude > 0.0 {
        s.value.norm() / s.magnitude
    } else {
        0.0
    }
}

/// Ratio `E|s̃(z)|² / K̃(z, z)` between the sampler's covariance and
/// [`kernel_jet`]. The entire function is sampled in the Bargmann-Fock
/// normalization `Σ b_j z^j/√(j!)` while its kernel carries the `1/π` of the
/// reference measure `dℓ/π`; correlation functions do not see the constant.
pub fn sampler_kernel_ratio(spec: &EnsembleSpec) -> f64 {
    match spec.model() {
        Model::Gef => PI,
        _ => 1.0,
    }
}

/// Kernel value and first mixed derivatives at `(z, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelJet {
    pub k: Complex64,
    pub dk_dz: Complex64,
    pub dk_dwbar: Complex64,
    pub d2k_dz_dwbar: Complex64,
    pub weighted: bool,
}

impl KernelJet {
    fn scale(self, s: f64) -> Self {
        Self {
            k: self.k * s,
            dk_dz: self.dk_dz * s,
            dk_dwbar: self.dk_dwbar * s,
            d2k_dz_dwbar: self.d2k_dz_dwbar * s,
            weighted: self.weighted,
        }
    }

    fn is_finite(&self) -> bool {
        [self.k, self.dk_dz, self.dk_dwbar, self.d2k_dz_dwbar]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Jets of the covariance kernel at chart coordinates `(z, w)`.
///
/// Unweighted: `K = Σ f_j(z) conj f_j(w)`: SU(2) `((n+1)/π)(1+z w̄)^n`, GEF
/// `e^{z w̄}/π`, theta `(2n)^{1/2} π^{-1} Σ θ_j(z) conj θ_j(w)`. Weighted:
/// `K e^{-nφ(z)/2 - nφ(w)/2}` with its exact Wirtinger derivatives. Both
/// coordinates must be in the same chart.
pub fn kernel_jet(spec: &EnsembleSpec, z: Complex64, w: Complex64, weighted: bool) -> Result<KernelJet> {
    let s = scaled_kernel_jet(spec, z, w);
    let jet = if weighted {
        let ez = spec.weight_exponent_dz(z);
        let ew = spec.weight_exponent_dz(w).conj();
        KernelJet {
            k: s.k,
            dk_dz: s.dk_dz - ez * s.k,
            dk_dwbar: s.dk_dwbar - ew * s.k,
            d2k_dz_dwbar: s.d2k_dz_dwbar - ez * s.dk_dwbar - ew * s.dk_dz + ez * ew * s.k,
            weighted: true,
        }
    } else {
        let f = libm::exp(spec.weight_exponent(z) + spec.weight_exponent(w));
        KernelJet { weighted: false, ..s.scale(f) }
    };
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(Error::NonFinite)
    }
}

/// Unweighted (holomorphic) jets divided by `e^{nφ(z)/2 + nφ(w)/2}`.
///
/// This is what the Kac-Rice engine consumes: rescaling the value and
/// derivative of the field at each point by the same positive constant leaves
/// correlation functions unchanged, and the rescaled jets never overflow.
pub fn scaled_kernel_jet(spec: &EnsembleSpec, z: Complex64, w: Complex64) -> KernelJet {
    match *spec {
        EnsembleSpec::Su2 { degree } => su2_scaled_jet(degree, z, w),
        EnsembleSpec::Gef { .. } => {
            let zw = z * w.conj();
            let p = (zw - 0.5 * (z.norm_sqr() + w.norm_sqr())).exp() * FRAC_1_PI;
            KernelJet {
                k: p,
                dk_dz: w.conj() * p,
                dk_dwbar: z * p,
                d2k_dz_dwbar: (zw + 1.0) * p,
                weighted: false,
            }
        }
        EnsembleSpec::TorusTheta { degree } => torus_scaled_jet(degree, z, w, THETA_CUTOFF),
    }
}

fn su2_scaled_jet(degree: usize, z: Complex64, w: Complex64) -> KernelJet {
    let n = degree as f64;
    let c = (n + 1.0) * FRAC_1_PI;
    let zw = z * w.conj();
    let shift = 0.5 * n * (libm::log1p(z.norm_sqr()) + libm::log1p(w.norm_sqr()));
    let q = zw + 1.0;
    // (1 + z w̄)^{n-k} e^{-shift} for k = 0, 1, 2
    let power = |k: usize| -> Complex64 {
        if k > degree {
            return Complex64::new(0.0, 0.0);
        }
        let e = (degree - k) as f64;
        if e == 0.0 {
            return Complex64::new(libm::exp(-shift), 0.0);
        }
        if q.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (ln_1p(zw) * e - shift).exp()
    };
    let p0 = power(0);
    let p1 = power(1);
    let p2 = power(2);
    KernelJet {
        k: p0 * c,
        dk_dz: w.conj() * p1 * (c * n),
        dk_dwbar: z * p1 * (c * n),
        d2k_dz_dwbar: (p1 + zw * p2 * (n - 1.0)) * (c * n),
        weighted: false,
    }
}

/// Principal `log(1 + x)` accurate for small `|x|`.
fn ln_1p(x: Complex64) -> Complex64 {
    let re = 0.5 * libm::log1p(2.0 * x.re + x.norm_sqr());
    let im = libm::atan2(x.im, 1.0 + x.re);
    Complex64::new(re, im)
}

/// Weighted `θ_j(z)` and `θ_j'(z)` for every residue `j`, dense in `j`.
fn theta_components(degree: usize, z: Complex64, cutoff: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = degree as f64;
    let (lo, hi) = theta_window(degree, z.im, cutoff);
    let (x, y) = (z.re, z.im);
    let mut values = vec![Complex64::new(0.0, 0.0); degree];
    let mut derivs = vec![Complex64::new(0.0, 0.0); degree];
    let k = PI / n;
    let nd = degree as i64;
    for m in lo..=hi {
        let t = m as f64 + n * y;
        let term = Complex64::from_polar(libm::exp(-k * t * t), 2.0 * PI * frac(m as f64 * x));
        let j = m.rem_euclid(nd) as usize;
        values[j] += term;
        derivs[j] += term * Complex64::new(0.0, 2.0 * PI * m as f64);
    }
    (values, derivs)
}

pub(crate) fn torus_scaled_jet(degree: usize, z: Complex64, w: Complex64, cutoff: f64) -> KernelJet {
    let c = libm::sqrt(2.0 * degree as f64) * FRAC_1_PI;
    let (tz, dz) = theta_components(degree, z, cutoff);
    let (tw, dw) = theta_components(degree, w, cutoff);
    let mut jet = KernelJet {
        k: Complex64::new(0.0, 0.0),
        dk_dz: Complex64::new(0.0, 0.0),
        dk_dwbar: Complex64::new(0.0, 0.0),
        d2k_dz_dwbar: Complex64::new(0.0, 0.0),
        weighted: false,
    };
    for j in 0..degree {
        let (a, da, b, db) = (tz[j], dz[j], tw[j].conj(), dw[j].conj());
        jet.k += a * b;
        jet.dk_dz += da * b;
        jet.dk_dwbar += a * db;
        jet.d2k_dz_dwbar += da * db;
    }
    jet.scale(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;
    use approx::assert_relative_eq;
    use std::vec::Vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(EnsembleSpec::su2(0).is_err());
        assert!(EnsembleSpec::torus(0).is_err());
        assert!(EnsembleSpec::gef(-1.0).is_err());
        assert!(EnsembleSpec::gef_with_truncation(12.0, 150).is_err());
        assert!(EnsembleSpec::gef(12.0).is_ok());
    }

    #[test]
    fn default_truncation_meets_tail_bound() {
        for r in [0.5, 1.0, 3.0, 12.0, 20.0] {
            let j = gef_default_truncation(r);
            // direct summation of the Poisson(R²) tail in log space
            let r2: f64 = r * r;
            let mut tail = 0.0;
            for k in (j + 1)..(j + 2000) {
                tail += libm::exp(k as f64 * libm::log(r2) - libm::lgamma(k as f64 + 1.0) - r2);
            }
            assert!(tail < GEF_TAIL_BOUND, "R={r} tail {tail:e}");
            assert_relative_eq!(gef_relative_tail(r, j), tail, max_relative = 1e-6);
        }
    }

    #[test]
    fn sampling_moments() {
        let spec = EnsembleSpec::su2(4).unwrap();
        let mut rng = trial_stream(11, 0);
        let draws = 1_000_000 / 5;
        let mut abs2 = [0.0; 5];
        let mut sq = [c(0.0, 0.0); 5];
        for _ in 0..draws * 5 {
            let s = sample_section(&spec, &mut rng);
            for (j, b) in s.coefficients().iter().enumerate() {
                abs2[j] += b.norm_sqr();
                sq[j] += b * b;
            }
        }
        let total = (draws * 5) as f64;
        for j in 0..5 {
            assert!((abs2[j] / total - 1.0).abs() < 0.005, "E|b|² = {}", abs2[j] / total);
            assert!((sq[j].re / total).abs() < 0.005 && (sq[j].im / total).abs() < 0.005);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::gef(3.0).unwrap();
        let a = sample_section(&spec, &mut trial_stream(5, 17));
        let b = sample_section(&spec, &mut trial_stream(5, 17));
        assert_eq!(a, b);
    }

    #[test]
    fn su2_scaled_coefficients_are_order_one() {
        let spec = EnsembleSpec::su2(2000).unwrap();
        let s = sample_section(&spec, &mut trial_stream(1, 2));
        let max = s.scaled_coefficients().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!((0.5..=2.0).contains(&max));
        assert!(s.scaled_coefficients().iter().all(|c| c.re.is_finite() && c.im.is_finite()));
    }

    #[test]
    fn su2_constant_section_at_origin() {
        let spec = EnsembleSpec::su2(2).unwrap();
        let s = RandomSection::from_coefficients(spec, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = SurfacePoint::affine0(c(0.0, 0.0));
        let v = evaluate_raw(&s, &p).unwrap();
        assert_relative_eq!(v.re, libm::sqrt(3.0 / PI), epsilon = 1e-14);
        assert_eq!(evaluate_weighted(&s, &p).unwrap(), v);
    }

    #[test]
    fn gef_values() {
        let spec = EnsembleSpec::gef(2.0).unwrap();
        let mut b = vec![c(0.0, 0.0); spec.coefficient_count()];
        b[0] = c(1.0, 0.0);
        b[1] = c(-1.0, 0.0);
        let s = RandomSection::from_coefficients(spec, b).unwrap();
        assert!(evaluate_raw(&s, &SurfacePoint::plane(c(1.0, 0.0))).unwrap().norm() < 1e-15);

        let mut b = vec![c(0.0, 0.0); spec.coefficient_count()];
        b[0] = c(1.0, 0.0);
        let s = RandomSection::from_coefficients(spec, b).unwrap();
        for x in [0.0, 0.5, 1.7, 3.0] {
            let v = evaluate_weighted(&s, &SurfacePoint::plane(c(x, 0.0))).unwrap();
            assert_relative_eq!(v.re, libm::exp(-x * x / 2.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn single_theta_vanishes_at_half_period() {
        let spec = EnsembleSpec::torus(1).unwrap();
        let s = RandomSection::from_coefficients(spec, vec![c(1.0, 0.0)]).unwrap();
        let v = evaluate_raw(&s, &SurfacePoint::torus(c(0.5, 0.5))).unwrap();
        assert!(v.norm() < 1e-12, "{v}");
        let off = evaluate_raw(&s, &SurfacePoint::torus(c(0.3, 0.5))).unwrap();
        assert!(off.norm() > 1e-2);
    }

    #[test]
    fn theta_quasi_periodicity() {
        let n = 5;
        let spec = EnsembleSpec::torus(n).unwrap();
        let s = sample_section(&spec, &mut trial_stream(3, 3));
        let raw = |z: Complex64| {
            let v = evaluate_scaled(&s, &SurfacePoint { chart: Chart::Torus, coord: z });
            v.value * libm::exp(v.scale_log)
        };
        for z in [c(0.1, 0.2), c(0.7, -0.3), c(0.45, 0.05)] {
            assert!(rel(raw(z + 1.0), raw(z)) < 1e-12);
            let factor = (Complex64::new(0.0, -2.0 * PI * n as f64) * z + PI * n as f64).exp();
            assert!(rel(raw(z + c(0.0, 1.0)), factor * raw(z)) < 1e-11);
        }
    }

    #[test]
    fn theta_truncation_is_converged() {
        let n = 37;
        let s = sample_section(&EnsembleSpec::torus(n).unwrap(), &mut trial_stream(2, 9));
        for k in 0..20 {
            let z = c(0.05 * k as f64, 0.97 - 0.049 * k as f64);
            let a = theta_weighted(s.scaled_coefficients(), n, z, THETA_CUTOFF);
            let b = theta_weighted(s.scaled_coefficients(), n, z, 2.0 * THETA_CUTOFF);
            assert!(rel(a.value, b.value) < 1e-12);
        }
    }

    #[test]
    fn kernel_closed_forms() {
        let su2 = EnsembleSpec::su2(3).unwrap();
        let j = kernel_jet(&su2, c(0.0, 0.0), c(0.0, 0.0), true).unwrap();
        assert_relative_eq!(j.k.re, 4.0 / PI, epsilon = 1e-14);

        let gef = EnsembleSpec::gef(2.0).unwrap();
        let w = c(0.4, -1.3);
        let j = kernel_jet(&gef, c(0.0, 0.0), w, false).unwrap();
        assert_relative_eq!(j.k.re, FRAC_1_PI, epsilon = 1e-15);
        assert!(rel(j.dk_dz, w.conj() / PI) < 1e-15);
    }

    #[test]
    fn su2_rescaled_kernel_expansion() {
        let n = 1000usize;
        let spec = EnsembleSpec::su2(n).unwrap();
        let (u, v) = (c(0.3, 0.0), c(0.0, 0.1));
        let sq = libm::sqrt(n as f64);
        let k = kernel_jet(&spec, u / sq, v / sq, true).unwrap().k * (PI / n as f64);
        let uv = u * v.conj();
        let lead = (uv - 0.5 * (u.norm_sqr() + v.norm_sqr())).exp();
        let corr = 1.0 - uv * uv * 0.5 + (u.norm_sqr().powi(2) + v.norm_sqr().powi(2)) / 4.0;
        let approx = lead * (corr / n as f64 + 1.0);
        assert!((k - approx).norm() < 5.0 / (n * n) as f64);
        assert!((k - lead).norm() > 0.5 / n as f64);
    }

    fn specs() -> Vec<EnsembleSpec> {
        vec![EnsembleSpec::su2(7).unwrap(), EnsembleSpec::torus(6).unwrap(), EnsembleSpec::gef(2.0).unwrap()]
    }

    fn grid_points(spec: &EnsembleSpec, count: usize, seed: u64) -> Vec<Complex64> {
        use rand::Rng;
        let mut rng = trial_stream(seed, 0);
        (0..count)
            .map(|_| match spec.model() {
                Model::Su2 => c(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)),
                Model::TorusTheta => c(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)),
                Model::Gef => c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            })
            .collect()
    }

    #[test]
    fn hermitian_symmetry_and_jet_consistency() {
        for spec in specs() {
            let pts = grid_points(&spec, 8, 4);
            for &z in &pts {
                for &w in &pts {
                    for weighted in [false, true] {
                        let a = kernel_jet(&spec, z, w, weighted).unwrap();
                        let b = kernel_jet(&spec, w, z, weighted).unwrap();
                        let scale = a.k.norm() + a.dk_dz.norm() + 1e-300;
                        assert!((a.k - b.k.conj()).norm() <= 1e-12 * scale);
                        assert!((a.dk_dz - b.dk_dwbar.conj()).norm() <= 1e-10 * scale.max(a.dk_dz.norm()));
                    }
                }
                let d = kernel_jet(&spec, z, z, true).unwrap().k;
                assert!(d.re > 0.0 && d.im.abs() <= 1e-12 * d.re);
            }
        }
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite() {
        for spec in specs() {
            for seed in 0..5 {
                let pts = grid_points(&spec, 4, 100 + seed);
                let m = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
                    let k = kernel_jet(&spec, pts[i], pts[j], true).unwrap().k;
                    nalgebra::Complex::new(k.re, k.im)
                });
                let trace: f64 = (0..4).map(|i| m[(i, i)].re).sum();
                let eig = m.symmetric_eigenvalues();
                assert!(eig.iter().all(|&l| l >= -1e-10 * trace), "{eig:?}");
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let h = 1e-5;
        for spec in specs() {
            let pts = grid_points(&spec, 4, 8);
            for weighted in [false, true] {
                for (&z, &w) in pts.iter().zip(pts.iter().rev()) {
                    let k = |z: Complex64, w: Complex64| kernel_jet(&spec, z, w, weighted).unwrap();
                    let jet = k(z, w);
                    let dx = (k(z + h, w).k - k(z - h, w).k) / (2.0 * h);
                    let dy = (k(z + c(0.0, h), w).k - k(z - c(0.0, h), w).k) / (2.0 * h);
                    let dz = (dx - dy * c(0.0, 1.0)) * 0.5;
                    let du = (k(z, w + h).k - k(z, w - h).k) / (2.0 * h);
                    let dv = (k(z, w + c(0.0, h)).k - k(z, w - c(0.0, h)).k) / (2.0 * h);
                    let dwbar = (du + dv * c(0.0, 1.0)) * 0.5;
                    let ddx = (k(z + h, w).dk_dwbar - k(z - h, w).dk_dwbar) / (2.0 * h);
                    let ddy = (k(z + c(0.0, h), w).dk_dwbar - k(z - c(0.0, h), w).dk_dwbar) / (2.0 * h);
                    let d2 = (ddx - ddy * c(0.0, 1.0)) * 0.5;
                    let scale = |x: Complex64| x.norm().max(jet.k.norm());
                    assert!((dz - jet.dk_dz).norm() <= 1e-6 * scale(jet.dk_dz), "{spec:?} dz");
                    assert!((dwbar - jet.dk_dwbar).norm() <= 1e-6 * scale(jet.dk_dwbar), "{spec:?} dwbar");
                    assert!(
                        (d2 - jet.d2k_dz_dwbar).norm() <= 1e-6 * scale(jet.d2k_dz_dwbar),
                        "{spec:?} d2"
                    );
                }
            }
        }
    }

    #[test]
    fn monte_carlo_covariance_matches_weighted_kernel() {
        let samples = 100_000;
        for spec in specs() {
            let pts = grid_points(&spec, 2, 21);
            let (z, w) = (pts[0], pts[1]);
            let chart = match spec.model() {
                Model::Su2 => Chart::Affine0,
                Model::TorusTheta => Chart::Torus,
                Model::Gef => Chart::Plane,
            };
            let pz = SurfacePoint { chart, coord: z };
            let pw = SurfacePoint { chart, coord: w };
            let mut rng = trial_stream(77, spec.coefficient_count() as u64);
            let (mut var_sum, mut var_sq) = (0.0, 0.0);
            let mut cov = c(0.0, 0.0);
            let mut cov_sq = 0.0;
            for _ in 0..samples {
                let s = sample_section(&spec, &mut rng);
                let a = evaluate_weighted(&s, &pz).unwrap();
                let b = evaluate_weighted(&s, &pw).unwrap();
                var_sum += a.norm_sqr();
                var_sq += a.norm_sqr() * a.norm_sqr();
                let x = a * b.conj();
                cov += x;
                cov_sq += x.norm_sqr();
            }
            let m = samples as f64;
            let ratio = sampler_kernel_ratio(&spec);
            let var = var_sum / m;
            let var_se = libm::sqrt((var_sq / m - var * var) / m);
            let kzz = kernel_jet(&spec, z, z, true).unwrap().k.re * ratio;
            assert!((var - kzz).abs() <= 3.0 * var_se, "{spec:?}: {var} vs {kzz} ± {var_se}");
            let cv = cov / m;
            let cov_se = libm::sqrt((cov_sq / m - cv.norm_sqr()) / m);
            let kzw = kernel_jet(&spec, z, w, true).unwrap().k * ratio;
            assert!((cv - kzw).norm() <= 3.0 * cov_se, "{spec:?}: {cv} vs {kzw} ± {cov_se}");
        }
    }

    #[test]
    fn expected_zero_count() {
        assert_eq!(EnsembleSpec::su2(9).unwrap().expected_zero_count(), 9.0);
        assert_eq!(EnsembleSpec::gef(3.0).unwrap().expected_zero_count(), 9.0);
    }
}
