use std::f64::consts::PI;

use loopfact::fourier::{project_disk, DiskPart, LaurentBoundaryFunction, C64};
use loopfact::surface::{disk_model, elliptic_model, ModelDescriptor, SurfaceModel};
use loopfact::Error;

const N: usize = 64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn torus() -> SurfaceModel {
    ModelDescriptor::default_elliptic().build().unwrap()
}

#[test]
fn disk_dk_residues_and_time() {
    let m = disk_model();
    let r0 = m.dk_residue(c(0.0, 0.0), 0.5, 128);
    assert!((r0 - c(1.0, 0.0)).norm() < 1e-12);
    assert_eq!(m.zero_modes(N).dimension, 1);
    assert!((m.tau(c(0.5, 0.0)) + 2f64.ln()).abs() < 1e-15);
    assert!(m.dk_zeros().is_empty());
}

#[test]
fn torus_dk_residues() {
    let m = torus();
    let e = m.elliptic().unwrap();
    let r0 = m.dk_residue(e.basepoint, 0.05, 256);
    let r1 = m.dk_residue(e.reflected_basepoint, 0.05, 256);
    assert!((r0 - c(1.0, 0.0)).norm() < 1e-8, "{r0}");
    assert!((r1 + c(1.0, 0.0)).norm() < 1e-8, "{r1}");
}

#[test]
fn torus_periods_are_imaginary() {
    let m = torus();
    for p in m.dk_periods() {
        assert!(p.re.abs() < 1e-8, "{p}");
    }
}

#[test]
fn torus_has_two_simple_zeros() {
    let m = torus();
    let e = m.elliptic().unwrap();
    let zs = m.dk_zeros();
    assert_eq!(zs.len(), 2);
    for z in &zs {
        assert!(e.dk(*z).norm() < 1e-10);
        assert!(e.dk_prime(*z).norm() > 1e-3);
    }
    assert!((e.zero_count_sigma() - 1.0).abs() < 1e-8, "{}", e.zero_count_sigma());
    assert!((zs[1] - e.reflect(zs[0])).norm() < 1e-12);
}

#[test]
fn torus_quadrature_weights_real_positive() {
    let m = torus();
    let w = m.quadrature_weights(256);
    let mut total = c(0.0, 0.0);
    for circle in &w {
        for x in circle {
            assert!(x.im.abs() < 1e-12 * x.norm().max(1e-3), "{x}");
            assert!(x.re > 0.0);
            total += x;
        }
    }
    assert!((total - c(1.0, 0.0)).norm() < 1e-10, "{total}");
}

#[test]
fn torus_time_function_vanishes_on_boundary() {
    let m = torus();
    let e = m.elliptic().unwrap();
    for j in 0..16 {
        let x = j as f64 / 16.0;
        assert!(m.tau(e.boundary_point(0, x)).abs() < 1e-10);
        assert!(m.tau(e.boundary_point(1, x)).abs() < 1e-10);
    }
    assert!(m.tau(e.basepoint + c(0.0, 1e-3)) < -5.0);
}

#[test]
fn equivariant_map_is_unimodular_and_equivariant() {
    let m = torus();
    let z = m.equivariant_map();
    assert_eq!(z.degree, 2);
    assert!(z.eval(m.basepoint()).norm() < 1e-10);
    for circle in 0..2 {
        for j in 0..64 {
            let p = m.boundary_point(circle, j as f64 / 64.0);
            assert!((z.eval(p).norm() - 1.0).abs() < 1e-8);
        }
    }
    for j in 0..10 {
        let p = c(j as f64 / 10.0 + 0.03, 0.05 + 0.04 * j as f64);
        let rp = m.reflect(p).unwrap();
        let prod = z.eval(rp) * z.eval(p).conj();
        assert!((prod - c(1.0, 0.0)).norm() < 1e-8, "{prod}");
        assert!(z.eval(p).norm() < 1.0);
    }
}

#[test]
fn zero_mode_du_dk_has_poles_at_dk_zeros() {
    let m = torus();
    let e = m.elliptic().unwrap();
    for z in m.dk_zeros() {
        // Residue of 1/f at a simple zero is 1/f'.
        let mut sum = c(0.0, 0.0);
        let r = 0.02;
        let n = 256;
        for j in 0..n {
            let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            sum += w * r / e.dk(z + w * r) / n as f64;
        }
        assert!((sum - 1.0 / e.dk_prime(z)).norm() < 1e-8);
    }
    // χ₀((0)) = χ₀((∞)) = 0 for du/dk.
    assert!((1.0 / e.dk(e.basepoint + c(1e-9, 0.0))).norm() < 1e-8);
}

#[test]
fn basepoint_outside_strip_rejected() {
    for bp in [c(0.0, 0.0), c(0.0, 0.5), c(0.2, 0.7)] {
        assert!(matches!(elliptic_model(c(0.0, 1.0), bp), Err(Error::Domain(_))));
    }
    assert!(matches!(elliptic_model(c(0.1, 1.0), c(0.0, 0.25)), Err(Error::Domain(_))));
}

#[test]
fn disk_decompose_matches_classical_split() {
    let m = disk_model();
    let mut f = LaurentBoundaryFunction::zeros(1, N);
    f.set_coefficient(0, 0, c(3.0, 0.0));
    f.set_coefficient(0, 1, c(1.0, 0.0));
    f.set_coefficient(0, -1, c(1.0, 0.0));
    let d = m.decompose(&f).unwrap();
    assert!(d.minus.distance(&project_disk(&f, DiskPart::Minus).unwrap()) < 1e-14);
    assert!(d.zero.distance(&project_disk(&f, DiskPart::Zero).unwrap()) < 1e-14);
    assert!(d.plus.distance(&project_disk(&f, DiskPart::Plus).unwrap()) < 1e-14);
}

#[test]
fn torus_decompose_fixes_zero_modes() {
    let m = torus();
    for mode in m.zero_modes(N).modes {
        let d = m.decompose(&mode).unwrap();
        assert!(d.zero.distance(&mode) < 1e-8);
        assert!(d.plus.max_coefficient() < 1e-8);
        assert!(d.minus.max_coefficient() < 1e-8);
    }
}

#[test]
fn torus_decompose_sigma_holomorphic() {
    let m = torus();
    let mut f = LaurentBoundaryFunction::zeros(2, N);
    for (n, a) in [(1, c(0.5, 0.1)), (-1, c(0.2, 0.0)), (2, c(0.0, 0.3)), (-3, c(0.01, 0.0))] {
        f = f.add(&m.plus_basis_function(N, n).scale(a));
    }
    let d = m.decompose_with(&f, 48).unwrap();
    assert!(d.plus.distance(&f) < 1e-8, "{}", d.plus.distance(&f));
    assert!(d.zero.max_coefficient() < 1e-8);
    assert!(d.minus.max_coefficient() < 1e-8);
    assert!(d.residual < 1e-8);
    assert!(m.value_at_basepoint(&f).norm() < 1e-10);
}

#[test]
fn torus_decompose_is_projection_triple() {
    let m = torus();
    let f = m.sample(N, |u| {
        let w = (c(0.0, 2.0 * PI) * u).exp();
        w + 0.3 / (w * w) + c(0.2, 0.1) / (w - 2.0)
    });
    let d = m.decompose(&f).unwrap();
    let sum = d.minus.add(&d.zero).add(&d.plus);
    assert!(sum.distance(&f) < 1e-10);
    for part in [&d.minus, &d.zero, &d.plus] {
        let again = m.decompose(part).unwrap();
        let same = again.minus.add(&again.zero).add(&again.plus);
        assert!(same.distance(part) < 1e-8);
    }
    let dm = m.decompose(&d.minus).unwrap();
    assert!(dm.minus.distance(&d.minus) < 1e-8);
    let dp = m.decompose(&d.plus).unwrap();
    assert!(dp.plus.distance(&d.plus) < 1e-8);
}

#[test]
fn wp_ladder_lies_in_plus_space() {
    // ℘(u − P₋) − ℘(p₀ − P₋) and its derivative have poles only in Σ*.
    let m = torus();
    let e = m.elliptic().unwrap();
    let w = e.weierstrass();
    let pm = e.reflected_basepoint;
    let p0 = e.basepoint;
    let f = m.sample(N, |u| w.wp(u - pm) - w.wp(p0 - pm));
    let g = m.sample(N, |u| w.wp_prime(u - pm) - w.wp_prime(p0 - pm));
    for h in [f, g] {
        let d = m.decompose(&h).unwrap();
        assert!(d.plus.distance(&h) < 1e-8 * h.max_coefficient());
    }
}

#[test]
fn multiplication_stability() {
    let m = torus();
    let chi0 = m.zero_modes(N).modes[1].clone();
    let one = LaurentBoundaryFunction::constant(2, N, c(1.0, 0.0));
    assert!(m.multiply_stability_check(&one, &chi0).unwrap() < 1e-8);
    let f = m.plus_basis_function(N, 1).add(&m.plus_basis_function(N, -2).scale(c(0.3, 0.0)));
    let r = m.multiply_stability_check(&f, &chi0).unwrap();
    assert!(r < 1e-8, "{r}");
    let dm = disk_model();
    let g = LaurentBoundaryFunction::monomial(1, N, 3, c(1.0, 0.0));
    let k = LaurentBoundaryFunction::constant(1, N, c(2.0, 0.0));
    assert!(dm.multiply_stability_check(&g, &k).unwrap() < 1e-14);
}

#[test]
fn uniqueness_profile_bounded_away_from_zero() {
    let m = torus();
    for (size, s) in m.uniqueness_profile(&[16, 32, 48, 64]).unwrap() {
        assert!(s > 1e-6, "basis size {size}: {s}");
    }
}

#[test]
fn descriptor_json_round_trip() {
    let d = ModelDescriptor::default_elliptic();
    let s = serde_json::to_string(&d).unwrap();
    assert!(s.contains("\"kind\":\"elliptic\""));
    let back: ModelDescriptor = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
    let disk: ModelDescriptor = serde_json::from_str("{\"kind\":\"disk\"}").unwrap();
    assert_eq!(disk, ModelDescriptor::Disk);
}
