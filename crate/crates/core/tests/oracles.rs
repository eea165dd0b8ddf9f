//! Library results against independent computations written here.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phimax::intersection::{ip_decide_fullspace, ip_no_witness_certificate_1d, Verdict};
use phimax::minimax::{saddle_values, SaddleProblem};
use phimax::primitives::{Grid, QuadMinorant, SampledFunction, Vector};
use phimax::subdiff::subdiff_domain;
use phimax::support::{envelope, phi_convexity_gap, MinorantDictionary};

fn line(lo: f64, hi: f64, step: f64) -> Arc<Grid> {
    Arc::new(Grid::cube(1, lo, hi, step).unwrap())
}

fn sampled(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> SampledFunction {
    SampledFunction::from_real_fn(grid.clone(), |x| f(x[0])).unwrap()
}

/// Lower convex hull of points sorted by x (monotone chain), evaluated at each x.
fn lower_hull_values(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut seg = 0;
    for &x in xs {
        while seg + 2 < hull.len() && xs[hull[seg + 1]] < x {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
        let y = if a == b {
            ys[a]
        } else {
            ys[a] + (ys[b] - ys[a]) * (x - xs[a]) / (xs[b] - xs[a])
        };
        out.push(y);
    }
    out
}

#[test]
fn affine_envelope_tracks_convex_hull() {
    let grid = line(-2.0, 2.0, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let slope_step = 0.05;
    for _ in 0..20 {
        let (p, q, r) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0), rng.gen_range(-1.0..1.0));
        let f = sampled(&grid, |x| (q * x).sin() * p + r * x * x);
        let xs: Vec<f64> = (0..grid.len()).map(|i| grid.point(i)[0]).collect();
        let ys: Vec<f64> = (0..grid.len()).map(|i| f.value(i).finite().unwrap()).collect();
        let hull = lower_hull_values(&xs, &ys);
        let bound = ys.windows(2).map(|w| ((w[1] - w[0]) / 0.05).abs()).fold(0.0, f64::max) + slope_step;
        let dict = MinorantDictionary::lattice(vec![0.0], &[bound], slope_step).unwrap();
        let env = envelope(&f, &dict).unwrap();
        for i in 0..xs.len() {
            let e = env.value(i).finite().unwrap();
            assert!(e <= hull[i] + 1e-9, "envelope above hull at {}", xs[i]);
            // A lattice slope within step/2 of the hull slope loses at most
            // (step/2)·width against the supporting line.
            assert!(hull[i] - e <= slope_step / 2.0 * 4.0 + 1e-9, "{} vs {}", hull[i], e);
        }
    }
}

#[test]
fn maxima_of_dictionary_members_are_phi_convex() {
    let grid = line(-2.0, 2.0, 0.1);
    let dict = MinorantDictionary::lattice(vec![0.0, 0.5, 1.0], &[2.0], 0.5).unwrap();
    let members: Vec<QuadMinorant> = dict
        .pairs()
        .map(|(a, l)| QuadMinorant::new(a, l.clone(), 0.3 * l[0] - a).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let k = rng.gen_range(2..5);
        let picked: Vec<&QuadMinorant> = (0..k).map(|_| &members[rng.gen_range(0..members.len())]).collect();
        let f = SampledFunction::from_real_fn(grid.clone(), |x| {
            picked.iter().map(|p| p.eval_slice(x)).fold(f64::NEG_INFINITY, f64::max)
        })
        .unwrap();
        assert!(phi_convexity_gap(&f, &dict).unwrap() <= 1e-9);
    }
}

#[test]
fn concave_kink_has_positive_gap() {
    // -|x| with affine minorants only: the envelope is the constant -1 on [-1, 1].
    let grid = line(-1.0, 1.0, 0.1);
    let f = sampled(&grid, |x| -x.abs());
    let dict = MinorantDictionary::lattice(vec![0.0], &[2.0], 0.25).unwrap();
    assert!((phi_convexity_gap(&f, &dict).unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn subdifferentiable_points_are_dense() {
    let grid = line(-2.0, 2.0, 0.05);
    let step = grid.step();
    for f in [
        sampled(&grid, |x| x * x),
        sampled(&grid, |x| (2.0 * x).sin()),
        sampled(&grid, |x| x.abs() - 0.5 * x),
        sampled(&grid, |x| -(x * x) / 4.0 + x.exp2()),
    ] {
        let dict = MinorantDictionary::default_for(&f).unwrap();
        let dom = subdiff_domain(&f, &dict).unwrap();
        assert!(!dom.is_empty());
        for (_, x, _) in f.domain() {
            let near = dom.iter().map(|d| (d[0] - x[0]).abs()).fold(f64::INFINITY, f64::min);
            assert!(near <= 2.0 * step + 1e-12, "no subdifferentiable point near {}", x[0]);
        }
    }
}

#[test]
fn gap_instance_saddle_values_match_closed_form() {
    let grid = line(-2.0, 2.0, 0.01);
    let a1 = sampled(&grid, |x| -(x + 1.0) * (x + 1.0));
    let a2 = sampled(&grid, |x| -(x - 1.0) * (x - 1.0));
    let p = SaddleProblem::new(vec!["y1".into(), "y2".into()], vec![a1, a2], None).unwrap();
    let v = saddle_values(&p).unwrap();
    // Inner infimum of the t-mixture sits at x = ±2: -max(1 + 8t, 9 - 8t).
    let lower = (0..=100)
        .map(|k| k as f64 / 100.0)
        .map(|t| -(1.0 + 8.0 * t).max(9.0 - 8.0 * t))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((v.lower - lower).abs() <= 1e-9);
    // max of the two labels is -(|x| - 1)^2, smallest at x ∈ {0, ±2}.
    assert!((v.upper + 1.0).abs() <= 1e-9);
}

/// Affine or constant minorants touching `f` at an interior grid point, as `(slope, offset)`.
fn interior_touching(f: &SampledFunction, slopes: &[f64]) -> Vec<(f64, f64)> {
    let grid = f.grid();
    let n = f.len();
    let mut out = Vec::new();
    for &l in slopes {
        let vals: Vec<f64> = (0..n).map(|i| f.value(i).finite().unwrap() - l * grid.point(i)[0]).collect();
        let m = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if (1..n - 1).any(|i| vals[i] <= m + 1e-12) {
            out.push((l, m));
        }
    }
    out
}

#[test]
fn certificate_never_contradicts_a_found_pair() {
    let grid = line(-1.0, 1.0, 0.1);
    let slopes: Vec<f64> = (-80..=80).map(|k| k as f64 * 0.05).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut found_any = 0;
    for _ in 0..60 {
        let mut make = || {
            let pieces: Vec<(f64, f64)> = (0..rng.gen_range(1..4))
                .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let curv = rng.gen_range(-1.0..1.0);
            sampled(&grid, move |x| {
                pieces.iter().map(|(s, c)| s * x + c).fold(f64::NEG_INFINITY, f64::max) + curv * x * x
            })
        };
        let (f, g) = (make(), make());
        let alpha = rng.gen_range(-1.0..1.0);
        let tf = interior_touching(&f, &slopes);
        let tg = interior_touching(&g, &slopes);
        let pair = tf.iter().any(|&(l1, c1)| {
            tg.iter().any(|&(l2, c2)| {
                let p1 = QuadMinorant::affine(Vector::scalar(l1).unwrap(), c1).unwrap();
                let p2 = QuadMinorant::affine(Vector::scalar(l2).unwrap(), c2).unwrap();
                ip_decide_fullspace(&p1, &p2, alpha, 1).unwrap().verdict == Verdict::Holds
            })
        });
        let certified = ip_no_witness_certificate_1d(&f, &g, alpha).unwrap();
        if pair {
            found_any += 1;
            assert!(!certified, "certificate denies a pair the brute force found");
        }
    }
    assert!(found_any > 0);
}
