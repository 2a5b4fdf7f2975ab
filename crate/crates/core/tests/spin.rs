use loopfact::fourier::C64;
use loopfact::spin::{kn_bandwidth_check, smoothing_profile, KnBasis, KnFunction, SpinLabel, SpinStructureData, SpinorField};
use loopfact::surface::{disk_model, elliptic_model, ModelDescriptor, SurfaceModel};
use loopfact::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G: usize = 256;

fn torus() -> SurfaceModel {
    ModelDescriptor::default_elliptic().build().unwrap()
}

fn random_field(spin: &SpinStructureData, rng: &mut ChaCha8Rng, decay: f64) -> SpinorField {
    let circles = spin.model().circles();
    let mut f = SpinorField::zeros(circles, spin.modes_up_to(40));
    for c in 0..circles {
        for (i, m) in f.modes.clone().iter().enumerate() {
            let a = decay.powf(m.abs());
            f.coeffs[c][i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * a;
        }
    }
    f
}

fn grid_field(spin: &SpinStructureData, samples: &[Vec<C64>]) -> SpinorField {
    SpinorField::from_grid(samples, spin.mode_offset())
}

fn restrict(f: &SpinorField, modes: &[f64]) -> SpinorField {
    let mut out = SpinorField::zeros(f.circles(), modes.to_vec());
    for (i, m) in modes.iter().enumerate() {
        let j = f.modes.iter().position(|x| x == m).unwrap();
        for c in 0..f.circles() {
            out.coeffs[c][i] = f.coeffs[c][j];
        }
    }
    out
}

#[test]
fn disk_projection_is_classical() {
    let spin = SpinStructureData::new(&disk_model(), SpinLabel::Trivial).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_field(&spin, &mut rng, 0.8);
    let p = spin.spin_projection(&f.to_grid(G)).unwrap();
    let got = restrict(&grid_field(&spin, &p), &f.modes);
    let want = spin.classical_projection(&f);
    assert!(got.distance(&want) < 1e-12);
    for (i, m) in want.modes.iter().enumerate() {
        if *m < 0.0 {
            assert_eq!(want.coeffs[0][i], C64::new(0.0, 0.0));
        }
    }
}

#[test]
fn torus_quadrature_matches_exact_projection() {
    for label in [SpinLabel::Theta2, SpinLabel::Theta3, SpinLabel::Theta4] {
        let spin = SpinStructureData::new(&torus(), label).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_field(&spin, &mut rng, 0.6);
        let p = spin.spin_projection(&f.to_grid(G)).unwrap();
        let got = restrict(&grid_field(&spin, &p), &f.modes);
        let want = spin.exact_projection(&f);
        let err = got.distance(&want);
        assert!(err < 1e-10, "{label:?}: {err:.3e}");
    }
}

#[test]
fn torus_projection_is_idempotent() {
    let spin = SpinStructureData::new(&torus(), SpinLabel::Theta3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let f = random_field(&spin, &mut rng, 0.7);
        let p = spin.spin_projection(&f.to_grid(G)).unwrap();
        let pp = spin.spin_projection(&p).unwrap();
        let d = p.iter().flatten().zip(pp.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-10, "{d:.3e}");
    }
}

#[test]
fn odd_structure_is_rejected() {
    assert!(matches!(SpinStructureData::new(&torus(), SpinLabel::Theta1), Err(Error::UnsupportedSpin(_))));
    assert!(matches!(SpinStructureData::new(&disk_model(), SpinLabel::Theta3), Err(Error::UnsupportedSpin(_))));
}

#[test]
fn kn_spinors_split_by_sign() {
    let m = torus();
    let e = m.elliptic().unwrap();
    let spin = SpinStructureData::new(&m, SpinLabel::Theta3).unwrap();
    let kn = KnBasis::new(&spin).unwrap();
    for mode in [0.5, 1.5, 2.5, -0.5, -1.5, -2.5] {
        let samples: Vec<Vec<C64>> = (0..2)
            .map(|c| (0..G).map(|j| kn.spinor(mode, e.boundary_point(c, j as f64 / G as f64))).collect())
            .collect();
        let p = spin.spin_projection(&samples).unwrap();
        let scale = samples.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let target = if mode > 0.0 { samples.clone() } else { vec![vec![C64::new(0.0, 0.0); G]; 2] };
        let d = p.iter().flatten().zip(target.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-9 * scale, "mode {mode}: {:.3e}", d / scale);
    }
}

#[test]
fn kn_multiplication_has_band_two() {
    let m = elliptic_model(C64::new(0.0, 1.0), C64::new(0.1, 0.2)).unwrap();
    let spin = SpinStructureData::new(&m, SpinLabel::Theta3).unwrap();
    for n in [1.5, -1.5, 2.5] {
        let r = kn_bandwidth_check(&spin, KnFunction { index: n }).unwrap();
        assert!(r.fit_residual < 1e-9, "{n}: {r:?}");
        assert_eq!(r.band_width, 2, "{n}: {r:?}");
    }
}

#[test]
fn symmetric_basepoint_degenerates_kn_functions() {
    let spin = SpinStructureData::new(&torus(), SpinLabel::Theta3).unwrap();
    let r = kn_bandwidth_check(&spin, KnFunction { index: 1.5 });
    assert!(matches!(r, Err(Error::Conditioning(_))));
}

#[test]
fn disk_band_structure() {
    let spin = SpinStructureData::new(&disk_model(), SpinLabel::Trivial).unwrap();
    let r = kn_bandwidth_check(&spin, KnFunction { index: 1.0 }).unwrap();
    assert_eq!(r.band_width, 1);
    let r = kn_bandwidth_check(&spin, KnFunction { index: 2.0 }).unwrap();
    assert_eq!(r.offsets, vec![2.0]);
}

#[test]
fn projection_minus_classical_is_smoothing() {
    let spin = SpinStructureData::new(&torus(), SpinLabel::Theta3).unwrap();
    let r = smoothing_profile(&spin, G, 24).unwrap();
    assert!(r.fitted_ratio > 0.0 && r.fitted_ratio < 0.9, "{r:?}");
    assert!(r.quadrature_error < 1e-10, "{}", r.quadrature_error);
    eprintln!("{:?}", r);
}
