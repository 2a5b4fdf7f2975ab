use loopfact::bundle::{
    birkhoff_scan, collar_values, degree, pair_act, partial_indices, straight_line_test, HyperfunctionPair,
    OffBoundaryFunction,
};
use loopfact::fourier::{LaurentBoundaryFunction, C64};
use loopfact::loops::{assemble_g, build_k1, build_k2, RootSubgroupSequence, SU2Loop};
use loopfact::surface::{disk_model, ModelDescriptor, SurfaceModel};
use loopfact::toeplitz::MatrixSymbol;
use loopfact::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn torus() -> SurfaceModel {
    ModelDescriptor::default_elliptic().build().unwrap()
}

fn mono(k: i64, a: C64) -> LaurentBoundaryFunction {
    LaurentBoundaryFunction::monomial(1, N, k, a)
}

fn diag_loop(m: &SurfaceModel, f: LaurentBoundaryFunction) -> SU2Loop {
    SU2Loop::diagonal(m, &f, &f.recip())
}

#[test]
fn degree_of_monomials_and_constants() {
    let m = disk_model();
    let d = degree(&m, &mono(1, c(1.0, 0.0))).unwrap();
    assert_eq!((d.transition_degree, d.bundle_degree), (1, -1));
    let d = degree(&m, &mono(2, c(-1.0, 0.0))).unwrap();
    assert_eq!(d.transition_degree, 2);
    assert_eq!(degree(&m, &mono(-2, c(-1.0, 0.0))).unwrap().bundle_degree, 2);
    assert_eq!(degree(&m, &mono(0, c(3.0, 1.0))).unwrap().transition_degree, 0);
    let mut chi = LaurentBoundaryFunction::zeros(1, N);
    chi.set_coefficient(0, 1, c(0.0, 2.0));
    chi.set_coefficient(0, -1, c(0.0, 2.0));
    chi.set_coefficient(0, 3, c(0.0, 0.7));
    chi.set_coefficient(0, -3, c(0.0, 0.7));
    assert_eq!(degree(&m, &chi.exp()).unwrap().transition_degree, 0);
}

#[test]
fn degree_is_additive() {
    let m = disk_model();
    let f = mono(1, c(1.0, 0.0)).add(&mono(0, c(0.3, 0.0)));
    let g = mono(-1, c(1.0, 0.0)).add(&mono(2, c(0.2, 0.1)));
    let (df, dg) = (degree(&m, &f).unwrap(), degree(&m, &g).unwrap());
    let dfg = degree(&m, &f.mul(&g)).unwrap();
    assert_eq!(dfg.transition_degree, df.transition_degree + dg.transition_degree);
}

#[test]
fn degree_on_torus_uses_orientation() {
    let t = torus();
    // e^{2πiu} winds +1 along C₀ and −1 along C₁ (traversed in −x).
    let w = t.sample(N, |u| (c(0.0, 2.0 * std::f64::consts::PI) * u).exp());
    let d = degree(&t, &w).unwrap();
    assert_eq!(d.windings, vec![1, -1]);
    assert_eq!(d.transition_degree, 0);
    let z = t.equivariant_map().boundary(N);
    assert_eq!(degree(&t, &z).unwrap().transition_degree, 2);
}

#[test]
fn degree_refuses_vanishing_functions() {
    let m = disk_model();
    let f = mono(1, c(1.0, 0.0)).add(&mono(0, c(-1.0, 0.0)));
    assert!(matches!(degree(&m, &f), Err(Error::Domain(_))));
}

#[test]
fn monomial_partial_indices() {
    let m = disk_model();
    let id = SU2Loop::identity(&m, N);
    assert_eq!(partial_indices(&id, N).unwrap().indices, vec![0, 0]);
    let z = diag_loop(&m, mono(1, c(1.0, 0.0)));
    assert_eq!(partial_indices(&z, N).unwrap().indices, vec![1, -1]);
    let z3 = diag_loop(&m, mono(-3, c(1.0, 0.0)));
    let p = partial_indices(&z3, N).unwrap();
    assert_eq!((p.indices.clone(), p.sum), (vec![3, -3], 0));
}

#[test]
fn out_of_range_indices_are_inconclusive() {
    let m = disk_model();
    let z5 = diag_loop(&m, mono(5, c(1.0, 0.0)));
    assert!(matches!(partial_indices(&z5, N), Err(Error::Inconclusive(_))));
    let t = torus();
    assert!(matches!(partial_indices(&SU2Loop::identity(&t, N), N), Err(Error::WrongModel(_))));
}

fn random_seq(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

#[test]
fn assembled_loops_are_semistable() {
    let m = disk_model();
    let map = m.equivariant_map();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let l1 = rng.gen_range(1..=3);
        let l2 = rng.gen_range(1..=3);
        let k1 = build_k1(&m, &map, &RootSubgroupSequence::eta(random_seq(&mut rng, l1)), N).unwrap();
        let k2 = build_k2(&m, &map, &RootSubgroupSequence::zeta(random_seq(&mut rng, l2)), N).unwrap();
        let mut chi = LaurentBoundaryFunction::zeros(1, N);
        let a = c(0.0, rng.gen_range(-0.5..0.5));
        chi.set_coefficient(0, 1, a);
        chi.set_coefficient(0, -1, a);
        let g = assemble_g(&k1, &chi, &k2).unwrap();
        let v = birkhoff_scan(&m, &MatrixSymbol::from_loop(&g), N, 4).unwrap();
        assert_eq!(v.indices, vec![0, 0]);
        assert!(v.semistable);
    }
}

fn unit() -> LaurentBoundaryFunction {
    mono(0, c(1.0, 0.0))
}

fn diag_symbol(f: &LaurentBoundaryFunction) -> MatrixSymbol {
    MatrixSymbol::diagonal(&[f.clone(), f.recip()]).unwrap()
}

#[test]
fn pair_action_preserves_indices() {
    let m = disk_model();
    let g = diag_loop(&m, mono(1, c(1.0, 0.0)).mul(&mono(0, c(0.0, 1.0))));
    let pair = HyperfunctionPair::from_loop(&g);

    let id = OffBoundaryFunction {
        outside: diag_symbol(&unit()),
        inside: diag_symbol(&unit()),
    };
    let same = pair_act(&pair, &id).unwrap();
    let d = same.induced_loop().unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!(d.entry(i, j).distance(pair.left.entry(i, j)) < 1e-14);
        }
    }

    // p(z) = 1 + 0.3z has no zeros in the closed disk; q(1/z) = 1 + 0.2/z none outside.
    let p = unit().add(&mono(1, c(0.3, 0.0)));
    let q = unit().add(&mono(-1, c(0.2, 0.0)));
    let f = OffBoundaryFunction {
        outside: diag_symbol(&q),
        inside: diag_symbol(&p),
    };
    let moved = pair_act(&pair, &f).unwrap();
    let before = birkhoff_scan(&m, &pair.induced_loop().unwrap(), N, 4).unwrap();
    let after = birkhoff_scan(&m, &moved.induced_loop().unwrap(), N, 4).unwrap();
    assert_eq!(before.indices, vec![1, -1]);
    assert_eq!(after.indices, before.indices);

    // Unipotent factors: (1, f*; 0, 1) on the outside, (1, 0; f, 1) inside.
    let zero = LaurentBoundaryFunction::zeros(1, N);
    let fz = mono(1, c(0.4, 0.1)).add(&mono(2, c(0.0, 0.2)));
    let uni = OffBoundaryFunction {
        outside: MatrixSymbol::new(2, vec![unit(), fz.star(), zero.clone(), unit()]).unwrap(),
        inside: MatrixSymbol::new(2, vec![unit(), zero, fz, unit()]).unwrap(),
    };
    let moved = pair_act(&pair, &uni).unwrap();
    assert_eq!(birkhoff_scan(&m, &moved.induced_loop().unwrap(), N, 4).unwrap().indices, vec![1, -1]);
}

#[test]
fn scalar_pair_action_keeps_degree() {
    let m = disk_model();
    let z2 = mono(2, c(1.0, 0.0));
    let pair = HyperfunctionPair::new(&m, MatrixSymbol::scalar(&z2), MatrixSymbol::scalar(&unit())).unwrap();
    let f = OffBoundaryFunction {
        outside: MatrixSymbol::scalar(&unit().add(&mono(-2, c(0.4, 0.0)))),
        inside: MatrixSymbol::scalar(&unit().add(&mono(1, c(0.0, 0.5)))),
    };
    let moved = pair_act(&pair, &f).unwrap();
    let lp = moved.induced_loop().unwrap();
    assert_eq!(degree(&m, lp.entry(0, 0)).unwrap().transition_degree, 2);
}

#[test]
fn collar_values_continue_laurent_series() {
    let m = disk_model();
    let z = mono(1, c(1.0, 0.0));
    let out = collar_values(&m, &z, true, 8);
    assert!((out[0][0] - c(1.0 + 1.0 / 16.0, 0.0)).norm() < 1e-14);
    let inn = collar_values(&m, &z, false, 8);
    assert!((inn[0][0] - c(1.0 - 1.0 / 16.0, 0.0)).norm() < 1e-14);
    // Torus: e^{2πiu} at u = −iδ on C₀ (outside Σ) is e^{2πδ}.
    let t = torus();
    let e = t.elliptic().unwrap();
    let w = t.sample(N, |u| (c(0.0, 2.0 * std::f64::consts::PI) * u).exp());
    let vals = collar_values(&t, &w, true, 4);
    let delta = e.t / 32.0;
    assert!((vals[0][0] - c((2.0 * std::f64::consts::PI * delta).exp(), 0.0)).norm() < 1e-10);
    assert!((vals[1][0] - c((-2.0 * std::f64::consts::PI * (e.t / 2.0 + delta)).exp(), 0.0)).norm() < 1e-10);
}

fn circle(im: f64, g: usize, wobble: f64) -> Vec<C64> {
    (0..g)
        .map(|j| {
            let s = j as f64 / g as f64;
            c(s, im + wobble * (2.0 * std::f64::consts::PI * s).sin())
        })
        .collect()
}

#[test]
fn horizontal_circle_is_straight() {
    let t = torus();
    let v = straight_line_test(&t, &circle(0.2, 128, 0.0)).unwrap();
    assert!(v.straight);
    let w = v.witness.unwrap();
    // Re(λ du) vanishes along dx iff λ is imaginary.
    assert!(w.re.abs() < 1e-10 && (w.im.abs() - 1.0).abs() < 1e-10, "{w}");
    assert!((v.displacement - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn sloped_closed_geodesic_is_straight() {
    let t = torus();
    let e = t.elliptic().unwrap();
    let dir = c(1.0, 0.0) + e.tau;
    let samples: Vec<C64> = (0..256).map(|j| c(0.1, 0.05) + dir * (j as f64 / 256.0)).collect();
    let v = straight_line_test(&t, &samples).unwrap();
    assert!(v.straight);
    assert!((v.witness.unwrap() * dir).re.abs() < 1e-10);
}

#[test]
fn wobbly_circle_is_not_straight() {
    let t = torus();
    let v = straight_line_test(&t, &circle(0.2, 128, 0.05)).unwrap();
    assert!(!v.straight);
    assert!(v.witness.is_none());
    assert!(v.pairing_singular_values[1] > 1e-3);
}

#[test]
fn degenerate_curves_are_rejected() {
    let t = torus();
    let mut s = circle(0.2, 64, 0.0);
    s[10] = s[9];
    assert!(matches!(straight_line_test(&t, &s), Err(Error::BadInput(_))));
    // Figure-eight style revisit of a point.
    let mut s = circle(0.2, 64, 0.0);
    s[40] = s[20];
    assert!(matches!(straight_line_test(&t, &s), Err(Error::BadInput(_))));
    assert!(matches!(straight_line_test(&disk_model(), &circle(0.0, 64, 0.0)), Err(Error::WrongModel(_))));
}
