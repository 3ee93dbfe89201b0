//! The marked process of near pairs: rescaled distances, location marks,
//! the `k` smallest distances, window counts and the isolation filter.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use rand::RngCore;

use crate::ensembles::{EnsembleSpec, SeedRecord};
use crate::error::{Error, Result};
use crate::geometry::{diameter, dist, rescale_factor, Region, SurfacePoint};
use crate::rng::mix64;
use crate::rootfind::ZeroSet;

/// `(1/8)^{1/4}`: turns `rescale · σ_k` into `σ̃_k`, whose smallest value has
/// survival function `e^{-x⁴}` in the limit.
pub const SIGMA_NORMALIZATION: f64 = 0.594_603_557_501_360_5;

/// One near pair `(i, j)`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEvent {
    pub i: usize,
    pub j: usize,
    /// `rescale_factor · raw_distance`.
    pub x: f64,
    pub raw_distance: f64,
    /// Position of zero `i` or zero `j`, chosen uniformly.
    pub mark: SurfacePoint,
}

/// Unordered pair of zero indices with their geodesic distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

fn pair_order(a: &Pair, b: &Pair) -> Ordering {
    a.distance.total_cmp(&b.distance).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j))
}

/// Per-trial key for the endpoint coin flips. Each pair's choice is a hash of
/// the key and the pair, so a pair receives the same mark whichever query
/// reports it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkKey(pub u64);

impl MarkKey {
    pub fn draw<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        MarkKey(rng.next_u64())
    }

    /// `true` selects endpoint `j`.
    pub fn picks_second(self, i: usize, j: usize) -> bool {
        let h = mix64(self.0 ^ mix64((i as u64) << 32 | j as u64));
        h >> 63 == 1
    }

    pub fn mark(self, zeroset: &ZeroSet, i: usize, j: usize) -> SurfacePoint {
        zeroset.zeros[if self.picks_second(i, j) { j } else { i }]
    }
}

/// Cell index over a chart-appropriate embedding: 3D unit-sphere points with
/// chordal cells for the sphere, wrapped square cells for the torus, plain
/// square cells for the plane.
struct CellList {
    dims: usize,
    wrap: bool,
    m: i64,
    keys: Vec<u64>,
    order: Vec<usize>,
}

impl CellList {
    fn build(cells: &[[i64; 3]], dims: usize, wrap: bool, m: i64) -> Self {
        let mut keyed: Vec<(u64, usize)> =
            cells.iter().enumerate().map(|(i, c)| (Self::key_of(m, dims, *c), i)).collect();
        keyed.sort_unstable();
        Self {
            dims,
            wrap,
            m,
            keys: keyed.iter().map(|k| k.0).collect(),
            order: keyed.iter().map(|k| k.1).collect(),
        }
    }

    fn key_of(m: i64, dims: usize, c: [i64; 3]) -> u64 {
        let mut k = 0u64;
        for &ci in &c[..dims] {
            k = k * m as u64 + ci as u64;
        }
        k
    }

    fn members(&self, mut c: [i64; 3]) -> &[usize] {
        for ci in &mut c[..self.dims] {
            if self.wrap {
                *ci = ci.rem_euclid(self.m);
            } else if *ci < 0 || *ci >= self.m {
                return &[];
            }
        }
        let key = Self::key_of(self.m, self.dims, c);
        let lo = self.keys.partition_point(|&k| k < key);
        let hi = self.keys.partition_point(|&k| k <= key);
        &self.order[lo..hi]
    }

    fn neighbours(&self, c: [i64; 3], mut visit: impl FnMut(usize)) {
        let span = |d: usize| if d < self.dims { -1..=1 } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    for &j in self.members([c[0] + dx, c[1] + dy, c[2] + dz]) {
                        visit(j);
                    }
                }
            }
        }
    }
}

/// Every pair of zeros at geodesic distance strictly below `radius`, sorted
/// by `(distance, i, j)`.
pub fn pairs_within(zeroset: &ZeroSet, radius: f64) -> Vec<Pair> {
    let spec = &zeroset.spec;
    let pts = &zeroset.zeros;
    let n = pts.len();
    let mut out = Vec::new();
    if n < 2 || !(radius > 0.0) {
        return out;
    }
    let exact = |i: usize, j: usize, out: &mut Vec<Pair>| {
        let d = dist(spec, &pts[i], &pts[j]);
        if d < radius {
            out.push(Pair { i, j, distance: d });
        }
    };
    let brute = |out: &mut Vec<Pair>| {
        for i in 0..n {
            for j in i + 1..n {
                exact(i, j, out);
            }
        }
    };
    // cell side in the embedding, and the embedded coordinates scaled to it
    let (dims, wrap, side, coords): (usize, bool, f64, Vec<[f64; 3]>) = match spec {
        EnsembleSpec::Su2 { .. } => {
            if radius >= PI / 2.0 {
                brute(&mut out);
                out.sort_by(pair_order);
                return out;
            }
            // FS distance d ↔ chordal distance 2 sin d on the unit sphere
            let chord = 2.0 * libm::sin(radius) * (1.0 + 1e-9);
            let side = chord.max(2.0 / (1u64 << 20) as f64);
            let c = pts.iter().map(|p| p.sphere_embedding().map(|v| v + 1.0)).collect();
            (3, false, side, c)
        }
        EnsembleSpec::TorusTheta { .. } => {
            let flat = radius / libm::sqrt(PI) * (1.0 + 1e-9);
            let c = pts.iter().map(|p| [p.coord.re, p.coord.im, 0.0]).collect();
            (2, true, flat.max(1.0 / (1u64 << 30) as f64), c)
        }
        EnsembleSpec::Gef { .. } => {
            let lo_re = pts.iter().map(|p| p.coord.re).fold(f64::INFINITY, f64::min);
            let lo_im = pts.iter().map(|p| p.coord.im).fold(f64::INFINITY, f64::min);
            let hi_re = pts.iter().map(|p| p.coord.re).fold(f64::NEG_INFINITY, f64::max);
            let hi_im = pts.iter().map(|p| p.coord.im).fold(f64::NEG_INFINITY, f64::max);
            let extent = (hi_re - lo_re).max(hi_im - lo_im).max(1e-300);
            let side = (radius * (1.0 + 1e-9)).max(extent / (1u64 << 30) as f64);
            let c = pts.iter().map(|p| [p.coord.re - lo_re, p.coord.im - lo_im, 0.0]).collect();
            (2, false, side, c)
        }
    };
    let m = match wrap {
        // wrapped cells must tile the unit square exactly
        true => libm::floor(1.0 / side) as i64,
        false => {
            let extent = coords.iter().flat_map(|c| c[..dims].iter().copied()).fold(0.0, f64::max);
            libm::floor(extent / side) as i64 + 1
        }
    };
    if m < 3 {
        brute(&mut out);
        out.sort_by(pair_order);
        return out;
    }
    let cell_side = if wrap { 1.0 / m as f64 } else { side };
    let cells: Vec<[i64; 3]> = coords
        .iter()
        .map(|c| core::array::from_fn(|d| if d < dims { ((c[d] / cell_side) as i64).clamp(0, m - 1) } else { 0 }))
        .collect();
    let list = CellList::build(&cells, dims, wrap, m);
    for i in 0..n {
        list.neighbours(cells[i], |j| {
            if j > i {
                exact(i, j, &mut out);
            }
        });
    }
    out.sort_by(pair_order);
    out
}

/// All pairs with rescaled distance below `a`, i.e. raw distance below
/// `a_n = a / rescale_factor`, each marked at one endpoint chosen with the
/// trial stream.
pub fn pair_events<R: RngCore + ?Sized>(zeroset: &ZeroSet, a: f64, rng: &mut R) -> Vec<PairEvent> {
    events_with_key(zeroset, a, MarkKey::draw(rng))
}

pub fn events_with_key(zeroset: &ZeroSet, a: f64, key: MarkKey) -> Vec<PairEvent> {
    let scale = rescale_factor(&zeroset.spec);
    pairs_within(zeroset, a / scale)
        .into_iter()
        .map(|p| to_event(zeroset, p, scale, key))
        .collect()
}

fn to_event(zeroset: &ZeroSet, p: Pair, scale: f64, key: MarkKey) -> PairEvent {
    PairEvent { i: p.i, j: p.j, x: scale * p.distance, raw_distance: p.distance, mark: key.mark(zeroset, p.i, p.j) }
}

/// The `k` closest pairs, found by doubling the search radius from
/// `4 / rescale_factor` until at least `k` pairs fall inside.
pub fn nearest_pairs(zeroset: &ZeroSet, k: usize) -> Result<Vec<Pair>> {
    let n = zeroset.zeros.len();
    if k == 0 || k > n * n.saturating_sub(1) / 2 {
        return Err(Error::InvalidArgument("k must lie in 1..=n(n-1)/2"));
    }
    let limit = diameter(&zeroset.spec);
    let mut radius = 4.0 / rescale_factor(&zeroset.spec);
    loop {
        let mut pairs = pairs_within(zeroset, radius);
        if pairs.len() >= k || radius > limit {
            pairs.truncate(k);
            return Ok(pairs);
        }
        radius *= 2.0;
    }
}

/// The `k` smallest pairwise geodesic distances in increasing order.
pub fn k_smallest(zeroset: &ZeroSet, k: usize) -> Result<Vec<f64>> {
    Ok(nearest_pairs(zeroset, k)?.into_iter().map(|p| p.distance).collect())
}

/// Isolation radius `4 log²n / √n`.
pub fn isolation_radius(n: f64) -> f64 {
    let l = libm::log(n);
    4.0 * l * l / libm::sqrt(n)
}

/// Distance between two pairs: the smallest distance between an endpoint of
/// one and an endpoint of the other.
pub fn pair_set_distance(zeroset: &ZeroSet, a: (usize, usize), b: (usize, usize)) -> f64 {
    let d = |x: usize, y: usize| if x == y { 0.0 } else { dist(&zeroset.spec, &zeroset.zeros[x], &zeroset.zeros[y]) };
    d(a.0, b.0).min(d(a.0, b.1)).min(d(a.1, b.0)).min(d(a.1, b.1))
}

/// Events with no other event within pair-set distance
/// [`isolation_radius`]`(n)`.
pub fn filter_isolated(events: &[PairEvent], zeroset: &ZeroSet, n: f64) -> Vec<PairEvent> {
    let r = isolation_radius(n);
    events
        .iter()
        .enumerate()
        .filter(|(a, e)| {
            events
                .iter()
                .enumerate()
                .all(|(b, f)| *a == b || pair_set_distance(zeroset, (e.i, e.j), (f.i, f.j)) > r)
        })
        .map(|(_, e)| *e)
        .collect()
}

/// What to extract from each trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    /// Rescaled thresholds `a`, each > 0.
    pub thresholds: Vec<f64>,
    pub regions: Vec<Region>,
    pub k_max: usize,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1"));
        }
        if self.thresholds.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument("thresholds must be positive"));
        }
        if self.regions.is_empty() {
            return Err(Error::InvalidArgument("at least one region is required"));
        }
        Ok(())
    }
}

/// Summary of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: Option<SeedRecord>,
    pub zero_count: usize,
    /// `σ̃_1 < … < σ̃_k`, at most `k_max` entries.
    pub sigma: Vec<f64>,
    /// Marks of the pairs behind `sigma`.
    pub marks: Vec<SurfacePoint>,
    /// `counts[t][r]` = `N(thresholds[t], regions[r])`.
    pub counts: Vec<Vec<u64>>,
    /// `isolated[t]` = number of events at `thresholds[t]` kept by
    /// [`filter_isolated`].
    pub isolated: Vec<u64>,
}

impl TrialRecord {
    pub fn count(&self, threshold: usize, region: usize) -> u64 {
        self.counts[threshold][region]
    }
}

/// Extract the near-pair summary of one zero set. The mark key is the next
/// draw from `rng`.
pub fn collect_trial<R: RngCore + ?Sized>(zeroset: &ZeroSet, config: &TrialConfig, rng: &mut R) -> Result<TrialRecord> {
    config.validate()?;
    let key = MarkKey::draw(rng);
    let spec = zeroset.spec;
    let scale = rescale_factor(&spec);
    let n = zeroset.zeros.len();
    let available = n * n.saturating_sub(1) / 2;
    let nearest = if available == 0 { Vec::new() } else { nearest_pairs(zeroset, config.k_max.min(available))? };
    let sigma = nearest.iter().map(|p| SIGMA_NORMALIZATION * scale * p.distance).collect();
    let marks = nearest.iter().map(|p| key.mark(zeroset, p.i, p.j)).collect();

    let a_max = config.thresholds.iter().copied().fold(0.0, f64::max);
    let all: Vec<PairEvent> = pairs_within(zeroset, a_max / scale)
        .into_iter()
        .map(|p| to_event(zeroset, p, scale, key))
        .collect();
    let degree = match spec {
        EnsembleSpec::Gef { .. } => spec.expected_zero_count(),
        _ => spec.degree() as f64,
    };
    let mut counts = vec![vec![0u64; config.regions.len()]; config.thresholds.len()];
    let mut isolated = vec![0u64; config.thresholds.len()];
    for (t, &a) in config.thresholds.iter().enumerate() {
        let events: Vec<PairEvent> = all.iter().copied().filter(|e| e.raw_distance < a / scale).collect();
        for (r, region) in config.regions.iter().enumerate() {
            counts[t][r] = events.iter().filter(|e| region.contains(&e.mark)).count() as u64;
        }
        isolated[t] = filter_isolated(&events, zeroset, degree).len() as u64;
    }
    Ok(TrialRecord { seed: None, zero_count: n, sigma, marks, counts, isolated })
}
