use std::f64::consts::TAU;

use loopfact::fourier::{decay_profile, hilbert_transform, project_disk, DiskPart, LaurentBoundaryFunction, C64};
use loopfact::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 16;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random(rng: &mut ChaCha8Rng, circles: usize, n: usize) -> LaurentBoundaryFunction {
    let comps = (0..circles)
        .map(|_| (0..2 * n + 1).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    LaurentBoundaryFunction::from_coefficients(comps).unwrap()
}

fn z() -> LaurentBoundaryFunction {
    LaurentBoundaryFunction::monomial(1, N, 1, c(1.0, 0.0))
}

fn zinv() -> LaurentBoundaryFunction {
    LaurentBoundaryFunction::monomial(1, N, -1, c(1.0, 0.0))
}

#[test]
fn constant_and_single_mode_from_samples() {
    let g = 4 * N;
    let ones = vec![vec![c(1.0, 0.0); g]];
    let f = LaurentBoundaryFunction::from_samples(&ones, N).unwrap();
    assert_eq!(f, LaurentBoundaryFunction::constant(1, N, c(1.0, 0.0)));
    let wave: Vec<C64> = (0..g).map(|j| C64::from_polar(1.0, TAU * j as f64 / g as f64)).collect();
    let f = LaurentBoundaryFunction::from_samples(&[wave], N).unwrap();
    assert!(f.distance(&z()) < 1e-15);
}

#[test]
fn samples_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for circles in [1, 2] {
        let f = random(&mut rng, circles, N);
        let s = f.samples();
        assert_eq!(s[0].len(), 4 * N);
        let back = LaurentBoundaryFunction::from_samples(&s, N).unwrap();
        assert!(back.distance(&f) < 1e-12 * f.max_coefficient());
        for (circle, comp) in s.iter().enumerate() {
            for (j, v) in comp.iter().enumerate() {
                let e = f.eval(circle, j as f64 / comp.len() as f64);
                assert!((e - v).norm() < 1e-12 * f.max_coefficient());
            }
        }
        // The minimal grid 2N+1 is enough.
        let tight = f.samples_on(2 * N + 1);
        assert!(LaurentBoundaryFunction::from_samples(&tight, N).unwrap().distance(&f) < 1e-12);
    }
}

#[test]
fn short_grids_alias() {
    let s = vec![vec![c(1.0, 0.0); 2 * N]];
    assert!(matches!(LaurentBoundaryFunction::from_samples(&s, N), Err(Error::Aliasing { .. })));
}

#[test]
fn monomial_split() {
    let f = z().add(&zinv()).add_constant(c(3.0, 0.0));
    let minus = project_disk(&f, DiskPart::Minus).unwrap();
    let zero = project_disk(&f, DiskPart::Zero).unwrap();
    let plus = project_disk(&f, DiskPart::Plus).unwrap();
    assert_eq!(minus, zinv());
    assert_eq!(zero, LaurentBoundaryFunction::constant(1, N, c(3.0, 0.0)));
    assert_eq!(plus, z());
    let zero_f = LaurentBoundaryFunction::zeros(1, N);
    for part in [DiskPart::Minus, DiskPart::Zero, DiskPart::Plus] {
        assert_eq!(project_disk(&zero_f, part).unwrap(), zero_f);
    }
}

#[test]
fn projections_sum_and_are_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random(&mut rng, 1, N);
    let parts: Vec<_> = [DiskPart::Minus, DiskPart::Zero, DiskPart::Plus]
        .iter()
        .map(|&p| project_disk(&f, p).unwrap())
        .collect();
    assert_eq!(parts[0].add(&parts[1]).add(&parts[2]), f);
    for (i, p) in [DiskPart::Minus, DiskPart::Zero, DiskPart::Plus].iter().enumerate() {
        assert_eq!(project_disk(&parts[i], *p).unwrap(), parts[i]);
        for (j, other) in parts.iter().enumerate() {
            if i != j {
                assert_eq!(project_disk(other, *p).unwrap().max_coefficient(), 0.0);
            }
        }
    }
    // f₊ vanishes at 0: no constant term.
    assert_eq!(parts[2].coefficient(0, 0), c(0.0, 0.0));
}

#[test]
fn projections_refuse_two_circles() {
    let f = LaurentBoundaryFunction::zeros(2, N);
    assert!(matches!(project_disk(&f, DiskPart::Plus), Err(Error::WrongModel(_))));
    assert!(matches!(hilbert_transform(&f), Err(Error::WrongModel(_))));
}

#[test]
fn hilbert_examples() {
    let h = hilbert_transform(&z().add(&zinv())).unwrap();
    assert_eq!(h, z().scale(c(0.0, 1.0)).sub(&zinv().scale(c(0.0, 1.0))));
    // 2cos θ ↦ −2 sin θ on the grid.
    for (j, v) in h.samples()[0].iter().enumerate() {
        let t = TAU * j as f64 / (4 * N) as f64;
        assert!((v - c(-2.0 * t.sin(), 0.0)).norm() < 1e-13);
    }
    let one = LaurentBoundaryFunction::constant(1, N, c(1.0, 0.0));
    assert_eq!(hilbert_transform(&one).unwrap().max_coefficient(), 0.0);
}

#[test]
fn hilbert_of_real_is_real_and_squares_to_minus_one_off_the_zero_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random(&mut rng, 1, N);
    let real = f.add(&f.star()).scale(c(0.5, 0.0));
    let h = hilbert_transform(&real).unwrap();
    let im = h.samples()[0].iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!(im < 1e-13);
    let hh = hilbert_transform(&h).unwrap();
    let f0 = project_disk(&real, DiskPart::Zero).unwrap();
    assert!(hh.add(&real).sub(&f0).max_coefficient() < 1e-14);
}

#[test]
fn decay_profile_examples() {
    assert_eq!(decay_profile(&z()).sobolev_half_norm, 1.0);
    assert_eq!(decay_profile(&LaurentBoundaryFunction::zeros(1, N)).sobolev_half_norm, 0.0);
    let n = 40;
    for r in [0.3f64, 0.5, 0.8] {
        let f = LaurentBoundaryFunction::from_coefficients(vec![(0..2 * n + 1)
            .map(|i| c(r.powi((i as i32 - n as i32).abs()), 0.0))
            .collect()])
        .unwrap();
        let p = decay_profile(&f);
        assert!((p.geometric_rate - r).abs() < 0.05 * r, "{r}: {p:?}");
        let want: f64 = (1..=n).map(|k| 2.0 * k as f64 * r.powi(2 * k as i32)).sum();
        assert!((p.sobolev_half_norm - want).abs() < 1e-12 * want);
        // Tail truncation cannot increase the half norm.
        assert!(decay_profile(&f.with_truncation(n / 2)).sobolev_half_norm <= p.sobolev_half_norm);
    }
}

#[test]
fn power_law_bounds_survive_projection() {
    let n = 64;
    let s = 0.7;
    let coeffs: Vec<C64> = (0..2 * n + 1)
        .map(|i| {
            let k = (i as i64 - n as i64).unsigned_abs().max(1) as f64;
            C64::from_polar(k.powf(-(s + 1.0)), i as f64)
        })
        .collect();
    let f = LaurentBoundaryFunction::from_coefficients(vec![coeffs]).unwrap();
    for part in [DiskPart::Minus, DiskPart::Plus] {
        let p = project_disk(&f, part).unwrap();
        for k in -(n as i64)..=n as i64 {
            let bound = (k.unsigned_abs().max(1) as f64).powf(-(s + 1.0));
            assert!(p.coefficient(0, k).norm() <= bound * (1.0 + 1e-15));
        }
    }
}

#[test]
fn json_layout_and_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = random(&mut rng, 2, 3);
    let v = serde_json::to_value(&f).unwrap();
    let comp = &v["components"][0];
    assert_eq!(comp["n_min"], -3);
    assert_eq!(comp["n_max"], 3);
    assert_eq!(comp["re"].as_array().unwrap().len(), 7);
    assert_eq!(comp["im"].as_array().unwrap().len(), 7);
    let back: LaurentBoundaryFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(back, f);
}
