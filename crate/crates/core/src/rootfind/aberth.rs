//! Aberth-Ehrlich simultaneous iteration for all roots of a complex
//! polynomial.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
/// Acceptance threshold on `|p(r)| / Σ|c_j||r|^j`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Roots of one polynomial with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct PolynomialRoots {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub worst_residual: f64,
}

/// All `d` roots of `Σ_j c_j z^j` (coefficients in ascending order).
///
/// Trailing zero coefficients are trimmed; the degree after trimming must be
/// at least one. Roots start on the circles of the Newton polygon, are
/// refined by Gauss-Seidel Aberth sweeps and polished by two Newton steps.
/// Multiple roots are accepted on the residual criterion.
pub fn roots_polynomial(coefficients: &[Complex64]) -> Result<PolynomialRoots> {
    let last = coefficients
        .iter()
        .rposition(|c| c.norm_sqr() > 0.0)
        .ok_or(Error::InvalidArgument("zero polynomial"))?;
    if last == 0 {
        return Err(Error::InvalidArgument("polynomial has degree zero"));
    }
    if coefficients[..=last].iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let zero_roots = coefficients.iter().position(|c| c.norm_sqr() > 0.0).unwrap_or(0);
    let poly = &coefficients[zero_roots..=last];
    let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];
    let degree = poly.len() - 1;
    if degree == 0 {
        return Ok(PolynomialRoots { roots, iterations: 0, worst_residual: 0.0 });
    }
    let mut solver = Aberth::new(poly);
    let iterations = solver.run();
    let worst_residual = solver.polish();
    if !(worst_residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::NoConvergence { iterations, worst_residual });
    }
    roots.extend(solver.roots());
    Ok(PolynomialRoots { roots, iterations, worst_residual })
}

const CONVERGED_STEP: f64 = 1e-7;

/// Roots whose Horner chains are interleaved.
const LANES: usize = 4;

struct Aberth<'a> {
    c: &'a [Complex64],
    abs_c: Vec<f64>,
    c_desc: Vec<Complex64>,
    abs_desc: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
    done: Vec<bool>,
}

/// Newton correction `p/p'` together with the relative residual.
struct Correction {
    ratio: Complex64,
    residual: f64,
}

impl<'a> Aberth<'a> {
    fn new(c: &'a [Complex64]) -> Self {
        let d = c.len() - 1;
        let abs_c: Vec<f64> = c.iter().map(|x| x.norm()).collect();
        let init = initial_guesses(&abs_c);
        debug_assert_eq!(init.len(), d);
        Self {
            c,
            c_desc: c.iter().rev().copied().collect(),
            abs_desc: abs_c.iter().rev().copied().collect(),
            abs_c,
            re: init.iter().map(|z| z.re).collect(),
            im: init.iter().map(|z| z.im).collect(),
            done: vec![false; d],
        }
    }

    fn degree(&self) -> usize {
        self.c.len() - 1
    }

    fn roots(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.re.iter().zip(&self.im).map(|(&x, &y)| Complex64::new(x, y))
    }

    /// `p(z)/p'(z)` and `|p(z)| / Σ|c_j||z|^j`, using the reversed polynomial
    /// outside the unit disk.
    fn correction(&self, z: Complex64) -> Correction {
        let d = self.degree();
        if z.norm_sqr() <= 1.0 {
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            let r = z.norm();
            for (cj, aj) in self.c.iter().zip(&self.abs_c).rev() {
                dp = dp * z + p;
                p = p * z + *cj;
                mag = mag * r + aj;
            }
            Correction { ratio: p / dp, residual: p.norm() / mag }
        } else {
            let w = z.inv();
            let mut q = Complex64::new(0.0, 0.0);
            let mut dq = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            let r = w.norm();
            for (cj, aj) in self.c.iter().zip(&self.abs_c) {
                dq = dq * w + q;
                q = q * w + *cj;
                mag = mag * r + aj;
            }
            // p(z) = z^d q(1/z), p'(z) = z^{d-1} (d q − w q')
            let denom = q * d as f64 - w * dq;
            Correction { ratio: z * q / denom, residual: q.norm() / mag }
        }
    }

    /// [`Self::correction`] for up to [`LANES`] points at once, with the
    /// Horner recurrences interleaved.
    fn corrections(&self, zs: &[Complex64]) -> [Correction; LANES] {
        let d = self.degree();
        let zero = Complex64::new(0.0, 0.0);
        let mut w = [zero; LANES];
        let mut r = [0.0; LANES];
        let mut outside = [false; LANES];
        let mut coeffs: [&[Complex64]; LANES] = [&self.c_desc; LANES];
        let mut abs: [&[f64]; LANES] = [&self.abs_desc; LANES];
        for (l, &z) in zs.iter().enumerate() {
            if z.norm_sqr() > 1.0 {
                outside[l] = true;
                w[l] = z.inv();
                coeffs[l] = self.c;
                abs[l] = &self.abs_c;
            } else {
                w[l] = z;
            }
            r[l] = w[l].norm();
        }
        let mut p = [zero; LANES];
        let mut dp = [zero; LANES];
        let mut mag = [0.0; LANES];
        for j in 0..=d {
            for l in 0..LANES {
                dp[l] = dp[l] * w[l] + p[l];
                p[l] = p[l] * w[l] + coeffs[l][j];
                mag[l] = mag[l] * r[l] + abs[l][j];
            }
        }
        core::array::from_fn(|l| {
            let residual = p[l].norm() / mag[l];
            let ratio = if outside[l] {
                zs[l] * p[l] / (p[l] * d as f64 - w[l] * dp[l])
            } else {
                p[l] / dp[l]
            };
            Correction { ratio, residual }
        })
    }

    fn run(&mut self) -> usize {
        let eps = f64::EPSILON;
        let mut active: Vec<usize> = (0..self.degree()).collect();
        for iteration in 1..=MAX_ITERATIONS {
            for chunk in active.chunks(LANES) {
                let mut zs = [Complex64::new(0.0, 0.0); LANES];
                for (slot, &i) in zs.iter_mut().zip(chunk) {
                    *slot = Complex64::new(self.re[i], self.im[i]);
                }
                let corr = self.corrections(&zs[..chunk.len()]);
                for (l, &i) in chunk.iter().enumerate() {
                    let z = zs[l];
                    let c = &corr[l];
                    if c.residual <= 2.0 * eps {
                        self.done[i] = true;
                        continue;
                    }
                    if !(c.ratio.re.is_finite() && c.ratio.im.is_finite()) {
                        // p' vanished: nudge off the critical point
                        self.re[i] += 1e-8 * (1.0 + z.norm());
                        continue;
                    }
                    let s = self.repulsion(i);
                    let step = c.ratio / (Complex64::new(1.0, 0.0) - c.ratio * s);
                    let step = if step.re.is_finite() && step.im.is_finite() { step } else { c.ratio };
                    self.re[i] -= step.re;
                    self.im[i] -= step.im;
                    // cubic convergence: a step this small leaves an error far
                    // below roundoff once the neighbours have settled
                    if step.norm() <= CONVERGED_STEP * z.norm() {
                        self.done[i] = true;
                    }
                }
            }
            active.retain(|&i| !self.done[i]);
            if active.is_empty() {
                return iteration;
            }
        }
        MAX_ITERATIONS
    }

    /// `Σ_{j≠i} 1/(z_i − z_j)`.
    fn repulsion(&self, i: usize) -> Complex64 {
        let (xi, yi) = (self.re[i], self.im[i]);
        // independent partial sums so the loop vectorizes
        let mut sr = [0.0; 8];
        let mut si = [0.0; 8];
        let mut acc = |xs: &[f64], ys: &[f64]| {
            let xc = xs.chunks_exact(8);
            let yc = ys.chunks_exact(8);
            let (xr, yr) = (xc.remainder(), yc.remainder());
            for (xb, yb) in xc.zip(yc) {
                for l in 0..8 {
                    let dx = xi - xb[l];
                    let dy = yi - yb[l];
                    let inv = 1.0 / (dx * dx + dy * dy);
                    sr[l] += dx * inv;
                    si[l] -= dy * inv;
                }
            }
            for (l, (&x, &y)) in xr.iter().zip(yr).enumerate() {
                let dx = xi - x;
                let dy = yi - y;
                let inv = 1.0 / (dx * dx + dy * dy);
                sr[l] += dx * inv;
                si[l] -= dy * inv;
            }
        };
        acc(&self.re[..i], &self.im[..i]);
        acc(&self.re[i + 1..], &self.im[i + 1..]);
        Complex64::new(sr.iter().sum(), si.iter().sum())
    }

    /// Two residual-decreasing Newton steps per root; returns the worst
    /// final residual.
    fn polish(&mut self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.degree() {
            let mut z = Complex64::new(self.re[i], self.im[i]);
            let mut corr = self.correction(z);
            for _ in 0..2 {
                if corr.residual == 0.0 || !(corr.ratio.re.is_finite() && corr.ratio.im.is_finite()) {
                    break;
                }
                let candidate = z - corr.ratio;
                let next = self.correction(candidate);
                if next.residual <= corr.residual {
                    z = candidate;
                    corr = next;
                } else {
                    break;
                }
            }
            self.re[i] = z.re;
            self.im[i] = z.im;
            worst = if corr.residual.is_nan() { f64::NAN } else { worst.max(corr.residual) };
        }
        worst
    }
}

/// Starting points on the circles of the upper convex hull of
/// `(j, log|c_j|)`, each circle rotated and perturbed so no two start
/// points coincide.
fn initial_guesses(abs_c: &[f64]) -> Vec<Complex64> {
    let d = abs_c.len() - 1;
    let logs: Vec<f64> = abs_c
        .iter()
        .map(|&a| if a > 0.0 { libm::log(a) } else { f64::NEG_INFINITY })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..=d {
        if !logs[j].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord a→j
            let cross = (b - a) as f64 * (logs[j] - logs[a]) - (j - a) as f64 * (logs[b] - logs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut guesses = Vec::with_capacity(d);
    for (seg, pair) in hull.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let count = b - a;
        let radius = libm::exp((logs[a] - logs[b]) / count as f64);
        let offset = 2.0 * PI * seg as f64 / d as f64 + 0.4;
        for k in 0..count {
            let angle = 2.0 * PI * k as f64 / count as f64 + offset;
            let r = radius * (1.0 + 1e-3 * libm::sin(1.7 * k as f64 + seg as f64));
            guesses.push(Complex64::from_polar(r, angle));
        }
    }
    guesses
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic() {
        let r = roots_polynomial(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let mut xs: Vec<f64> = r.roots.iter().map(|z| z.re).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 1.0).abs() < 1e-15 && (xs[1] - 1.0).abs() < 1e-15);
        assert!(r.roots.iter().all(|z| z.im.abs() < 1e-15));
    }

    #[test]
    fn triple_root_accepted_on_residual() {
        // (z − 2)³ = z³ − 6z² + 12z − 8
        let r = roots_polynomial(&[c(-8.0, 0.0), c(12.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(r.roots.len(), 3);
        for z in &r.roots {
            assert!((z - c(2.0, 0.0)).norm() < 1e-4, "{z}");
        }
        assert!(r.worst_residual <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn zero_roots_and_trimming() {
        let r = roots_polynomial(&[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.roots.len(), 3);
        assert_eq!(r.roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(r.roots.iter().any(|z| (z + 2.0).norm() < 1e-14));
        assert!(roots_polynomial(&[c(3.0, 0.0)]).is_err());
        assert!(roots_polynomial(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn widely_scaled_roots() {
        // roots 1e-6, 1, 1e6
        let roots = [1e-6, 1.0, 1e6];
        let mut poly = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![c(0.0, 0.0); poly.len() + 1];
            for (j, a) in poly.iter().enumerate() {
                next[j + 1] += *a;
                next[j] -= *a * r;
            }
            poly = next;
        }
        let found = roots_polynomial(&poly).unwrap();
        for r in roots {
            assert!(found.roots.iter().any(|z| (z - c(r, 0.0)).norm() <= 1e-10 * r));
        }
    }
}
