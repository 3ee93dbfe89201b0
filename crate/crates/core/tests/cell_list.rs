use gafzeros_core::extremes::{nearest_pairs, pairs_within, Pair};
use gafzeros_core::geometry::dist;
use gafzeros_core::{trial_stream, Complex64, EnsembleSpec, SurfacePoint, ZeroSet};
use proptest::prelude::*;
use rand::Rng;

fn point(model: u8, rng: &mut impl Rng) -> SurfacePoint {
    match model {
        0 => {
            let r = 10f64.powf(rng.random_range(-3.0..3.0));
            SurfacePoint::sphere(Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)))
        }
        1 => {
            // bias towards the edges of the fundamental domain
            let mut coord = || {
                let x: f64 = rng.random();
                if rng.random_bool(0.3) { (x * 0.02 + 0.99).fract() } else { x }
            };
            SurfacePoint::torus(Complex64::new(coord(), coord()))
        }
        _ => SurfacePoint::plane(Complex64::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0))),
    }
}

fn instance(model: u8, n: usize, seed: u64) -> ZeroSet {
    let spec = match model {
        0 => EnsembleSpec::su2(n).unwrap(),
        1 => EnsembleSpec::torus(n).unwrap(),
        _ => EnsembleSpec::gef(30.0).unwrap(),
    };
    let mut rng = trial_stream(seed, n as u64);
    let mut zeros: Vec<SurfacePoint> = Vec::with_capacity(n);
    while zeros.len() < n {
        let p = if !zeros.is_empty() && rng.random_bool(0.3) {
            // a close neighbour of an earlier point
            let q = zeros[rng.random_range(0..zeros.len())];
            let eps = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 1e-3;
            match model {
                0 => SurfacePoint::sphere(q.chart0_coord() + eps),
                1 => SurfacePoint::torus(Complex64::new((q.coord.re + eps.re).rem_euclid(1.0), (q.coord.im + eps.im).rem_euclid(1.0))),
                _ => SurfacePoint::plane(q.coord + eps),
            }
        } else {
            point(model, &mut rng)
        };
        zeros.push(p);
    }
    ZeroSet { spec, residuals: vec![0.0; n], zeros, boundary: vec![], iterations: 0 }
}

fn brute(zs: &ZeroSet, radius: f64) -> Vec<Pair> {
    let mut out = Vec::new();
    for i in 0..zs.zeros.len() {
        for j in i + 1..zs.zeros.len() {
            let d = dist(&zs.spec, &zs.zeros[i], &zs.zeros[j]);
            if d < radius {
                out.push(Pair { i, j, distance: d });
            }
        }
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cell_list_equals_brute_force(model in 0u8..3, n in 2usize..=300, seed in any::<u64>(), log_r in -3.5f64..0.5) {
        let zs = instance(model, n, seed);
        let radius = 10f64.powf(log_r);
        prop_assert_eq!(pairs_within(&zs, radius), brute(&zs, radius));
    }

    #[test]
    fn nearest_pairs_equal_sorted_prefix(model in 0u8..3, n in 2usize..=200, seed in any::<u64>(), k in 1usize..20) {
        let zs = instance(model, n, seed);
        let k = k.min(n * (n - 1) / 2);
        let all = brute(&zs, f64::INFINITY);
        prop_assert_eq!(nearest_pairs(&zs, k).unwrap(), all[..k].to_vec());
    }
}
