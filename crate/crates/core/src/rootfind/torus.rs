//! Zeros of theta sections by winding numbers over a cell grid.
//!
//! Winding numbers are computed for `G(z) = F̃(z) e^{2πinxy}`, where `F̃` is
//! the weighted section. `G` differs from `f(z) e^{πnz²}` by a positive
//! factor, so its winding around any closed curve counts the zeros of `f`
//! inside. Along horizontal edges `G` varies slowly and is sampled directly.
//! Along vertical edges `F̃` varies slowly; the gauge increment
//! `2πn x Δy` is added in closed form.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::ensembles::{theta_fast, EnsembleSpec, RandomSection};
use crate::error::{Error, Result};
use crate::geometry::{torus_dist, SurfacePoint};

const MAX_JITTERS: usize = 8;
const MAX_DEPTH: usize = 40;
const NEWTON_ITERATIONS: usize = 60;
/// Longest accepted edge piece, in units of `1/√n`.
const MAX_PIECE: f64 = 0.2;

struct Field<'a> {
    b: &'a [Complex64],
    n: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Dir {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy)]
struct Sample {
    value: Complex64,
    dx: Complex64,
    dy: Complex64,
}

impl Field<'_> {
    fn eval(&self, z: Complex64) -> Sample {
        let (value, dx) = theta_fast::<true>(self.b, self.n, z);
        // each term carries e^{-π(m+ny)²/n}, so ∂_y = -2π(m + ny)
        let dy = (dx * Complex64::new(0.0, -1.0) + value * (2.0 * PI * self.n as f64 * z.im)) * -1.0;
        Sample { value, dx, dy }
    }

    /// Value of `G` (up to the closed-form vertical gauge) and the rate of
    /// change of its argument along `dir`.
    fn gauged(&self, z: Complex64, s: Sample, dir: Dir) -> (Complex64, f64) {
        match dir {
            Dir::Vertical => (s.value, (s.dy / s.value).im),
            Dir::Horizontal => {
                let t = self.n as f64 * z.re * z.im;
                let g = Complex64::from_polar(1.0, 2.0 * PI * (t - libm::floor(t)));
                (s.value * g, (s.dx / s.value).im + 2.0 * PI * self.n as f64 * z.im)
            }
        }
    }

    /// Continuous change of `arg G` from `a` to `b` on an axis-parallel
    /// segment. A piece is accepted only when it is short on the scale of
    /// the Gaussian envelope and its phase change agrees with the endpoint
    /// derivatives. `None` when a zero sits on the segment.
    fn increment(&self, a: Complex64, fa: Sample, b: Complex64, fb: Sample, dir: Dir) -> Option<f64> {
        let mut total = match dir {
            Dir::Vertical => 2.0 * PI * self.n as f64 * a.re * (b.im - a.im),
            Dir::Horizontal => 0.0,
        };
        let max_len = MAX_PIECE / libm::sqrt(self.n as f64);
        let along = |p: Complex64, q: Complex64| match dir {
            Dir::Vertical => q.im - p.im,
            Dir::Horizontal => q.re - p.re,
        };
        let (ga, ra) = self.gauged(a, fa, dir);
        let (gb, rb) = self.gauged(b, fb, dir);
        let mut stack = vec![(a, ga, ra, b, gb, rb)];
        while let Some((p, gp, rp, q, gq, rq)) = stack.pop() {
            let len = along(p, q);
            if gp.norm_sqr() > 0.0 && gq.norm_sqr() > 0.0 && len.abs() <= max_len {
                let d = (gq * gp.conj()).arg();
                let predicted = 0.5 * len * (rp + rq);
                if d.abs() < FRAC_PI_2 && (d - predicted).abs() < FRAC_PI_4 {
                    total += d;
                    continue;
                }
            }
            if (q - p).norm() < 1e-13 {
                return None;
            }
            let m = 0.5 * (p + q);
            let fm = self.eval(m);
            if fm.value.norm_sqr() == 0.0 {
                return None;
            }
            let (gm, rm) = self.gauged(m, fm, dir);
            stack.push((m, gm, rm, q, gq, rq));
            stack.push((p, gp, rp, m, gm, rm));
        }
        Some(total)
    }

    /// Newton's method on `f(z) e^{2πin y_k z}`, with `y_k` the current
    /// height. The factor removes the `−2πin y` drift of `f'/f` that the
    /// theta carrier contributes, which otherwise confines the basin of
    /// attraction to a neighbourhood of size `O(1/n)`.
    fn newton(&self, z0: Complex64, h: f64) -> Option<Complex64> {
        let start = z0 + Complex64::new(0.5 * h, 0.5 * h);
        let drift = 2.0 * PI * self.n as f64;
        let step_at = |z: Complex64| {
            let (v, d) = theta_fast::<true>(self.b, self.n, z);
            v / (d + v * Complex64::new(0.0, drift * z.im))
        };
        let mut z = start;
        let mut converged = false;
        for _ in 0..NEWTON_ITERATIONS {
            let step = step_at(z);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            z -= step;
            if (z - start).norm() > 2.0 * h {
                return None;
            }
            if step.norm() < 1e-11 {
                let last = step_at(z);
                if last.re.is_finite() && last.im.is_finite() {
                    z -= last;
                }
                converged = true;
                break;
            }
        }
        let tol = 1e-12;
        let inside = z.re >= z0.re - tol
            && z.re <= z0.re + h + tol
            && z.im >= z0.im - tol
            && z.im <= z0.im + h + tol;
        (converged && inside).then_some(z)
    }

    /// Locate the `m` zeros inside a square cell, splitting it into quarters
    /// until each piece holds a single zero that Newton's method captures.
    fn solve_cell(&self, z0: Complex64, h: f64, f: [Sample; 4], m: i64, depth: usize, out: &mut Vec<Complex64>) -> Option<()> {
        if m == 1 {
            if let Some(z) = self.newton(z0, h) {
                out.push(z);
                return Some(());
            }
        }
        if depth >= MAX_DEPTH {
            return None;
        }
        let half = 0.5 * h;
        let node = |r: usize, c: usize| z0 + Complex64::new(c as f64 * half, r as f64 * half);
        let mut v = [[f[0]; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                v[r][c] = match (r, c) {
                    (0, 0) => f[0],
                    (0, 2) => f[1],
                    (2, 0) => f[2],
                    (2, 2) => f[3],
                    _ => self.eval(node(r, c)),
                };
            }
        }
        let mut hor = [[0.0; 2]; 3];
        let mut ver = [[0.0; 3]; 2];
        for r in 0..3 {
            for c in 0..2 {
                hor[r][c] = self.increment(node(r, c), v[r][c], node(r, c + 1), v[r][c + 1], Dir::Horizontal)?;
            }
        }
        for r in 0..2 {
            for c in 0..3 {
                ver[r][c] = self.increment(node(r, c), v[r][c], node(r + 1, c), v[r + 1][c], Dir::Vertical)?;
            }
        }
        let mut windings = [[0i64; 2]; 2];
        let mut sum = 0;
        for r in 0..2 {
            for c in 0..2 {
                let w = round_winding(hor[r][c] + ver[r][c + 1] - hor[r + 1][c] - ver[r][c])?;
                windings[r][c] = w;
                sum += w;
            }
        }
        if sum != m {
            return None;
        }
        for r in 0..2 {
            for c in 0..2 {
                if windings[r][c] > 0 {
                    let corners = [v[r][c], v[r][c + 1], v[r + 1][c], v[r + 1][c + 1]];
                    self.solve_cell(node(r, c), half, corners, windings[r][c], depth + 1, out)?;
                }
            }
        }
        Some(())
    }
}

fn round_winding(phase: f64) -> Option<i64> {
    let w = phase / (2.0 * PI);
    let r = libm::round(w);
    ((w - r).abs() < 0.25 && r >= 0.0).then_some(r as i64)
}

fn grid_size(n: usize) -> usize {
    let target = libm::ceil(2.0 * libm::sqrt(n as f64)) as usize;
    target.max(64).next_power_of_two()
}

/// Grid offset for the given attempt, a fraction of one cell.
fn offset(attempt: usize, h: f64) -> Complex64 {
    let frac = |t: f64| t - libm::floor(t);
    let a = attempt as f64;
    Complex64::new(
        h * frac(0.236_067_977_5 + 0.618_033_988_7 * a),
        h * frac(0.414_213_562_4 + 0.754_877_666_2 * a),
    )
}

pub(super) fn find_zeros(section: &RandomSection) -> Result<(Vec<SurfacePoint>, usize)> {
    let EnsembleSpec::TorusTheta { degree } = *section.spec() else {
        return Err(Error::InvalidArgument("expected a theta section"));
    };
    let field = Field { b: section.scaled_coefficients(), n: degree };
    for attempt in 0..=MAX_JITTERS {
        if let Some(points) = try_grid(&field, offset(attempt, 1.0 / grid_size(degree) as f64)) {
            return Ok((points, attempt + 1));
        }
    }
    Err(Error::WindingMismatch { attempts: MAX_JITTERS + 1 })
}

fn try_grid(field: &Field<'_>, origin: Complex64) -> Option<Vec<SurfacePoint>> {
    let g = grid_size(field.n);
    let h = 1.0 / g as f64;
    let node = |r: usize, c: usize| origin + Complex64::new(c as f64 * h, r as f64 * h);
    let stride = g + 1;
    let mut values = Vec::with_capacity(stride * stride);
    for r in 0..=g {
        for c in 0..=g {
            values.push(field.eval(node(r, c)));
        }
    }
    let at = |r: usize, c: usize| values[r * stride + c];
    let mut hor = vec![0.0; stride * g];
    for r in 0..=g {
        for c in 0..g {
            hor[r * g + c] = field.increment(node(r, c), at(r, c), node(r, c + 1), at(r, c + 1), Dir::Horizontal)?;
        }
    }
    let mut ver = vec![0.0; g * stride];
    for r in 0..g {
        for c in 0..=g {
            ver[r * stride + c] = field.increment(node(r, c), at(r, c), node(r + 1, c), at(r + 1, c), Dir::Vertical)?;
        }
    }
    let mut found = Vec::with_capacity(field.n);
    let mut total = 0;
    for r in 0..g {
        for c in 0..g {
            let phase = hor[r * g + c] + ver[r * stride + c + 1] - hor[(r + 1) * g + c] - ver[r * stride + c];
            let w = round_winding(phase)?;
            if w > 0 {
                let corners = [at(r, c), at(r, c + 1), at(r + 1, c), at(r + 1, c + 1)];
                field.solve_cell(node(r, c), h, corners, w, 0, &mut found)?;
                total += w;
            }
        }
    }
    if total != field.n as i64 || found.len() != field.n {
        return None;
    }
    let mut points: Vec<SurfacePoint> = found.into_iter().map(SurfacePoint::torus).collect();
    points.sort_by(|p, q| p.coord.re.total_cmp(&q.coord.re));
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[j].coord.re - points[i].coord.re > 1e-9 {
                break;
            }
            if torus_dist(points[i].coord, points[j].coord) < super::MERGE_TOLERANCE {
                return None;
            }
        }
    }
    Some(points)
}

/// Argument-principle zero count over the boundary of `[0,1]²`.
pub fn winding_total(section: &RandomSection) -> Option<i64> {
    let EnsembleSpec::TorusTheta { degree } = *section.spec() else {
        return None;
    };
    let field = Field { b: section.scaled_coefficients(), n: degree };
    let corners = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, 1.0),
    ];
    let pieces = 64;
    let mut total = 0.0;
    for side in 0..4 {
        let (a, b) = (corners[side], corners[(side + 1) % 4]);
        let dir = if side % 2 == 0 { Dir::Horizontal } else { Dir::Vertical };
        let mut p = a;
        let mut fp = field.eval(p);
        for k in 1..=pieces {
            let q = a + (b - a) * (k as f64 / pieces as f64);
            let fq = field.eval(q);
            total += field.increment(p, fp, q, fq, dir)?;
            (p, fp) = (q, fq);
        }
    }
    round_winding(total)
}
