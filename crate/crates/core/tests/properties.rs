use std::f64::consts::TAU;

use loopfact::bundle::{birkhoff_scan, degree, partial_indices};
use loopfact::experiment::chi_function;
use loopfact::fourier::{hilbert_transform, project_disk, DiskPart, LaurentBoundaryFunction, C64};
use loopfact::loops::{
    assemble_g, build_k1, build_k2, factor_k1, factor_k2, factor_k2_with, RootSubgroupSequence, SolverPath, SU2Loop,
};
use loopfact::spin::{SpinLabel, SpinStructureData};
use loopfact::surface::{disk_model, ModelDescriptor, Part, SurfaceModel};
use loopfact::toeplitz::{check_product_factorization, cocycle_at, det_a_ainv, MatrixSymbol};
use proptest::prelude::*;

const N: usize = 32;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex(max: f64) -> impl Strategy<Value = C64> {
    (0.0..=max, 0.0..TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn sequence() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(0.5), 0..=3)
}

fn coefficients(n: usize) -> impl Strategy<Value = LaurentBoundaryFunction> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * n + 1).prop_map(|v| {
        LaurentBoundaryFunction::from_coefficients(vec![v.into_iter().map(|(a, b)| c(a, b)).collect()]).unwrap()
    })
}

fn pair(m: &SurfaceModel, eta: &[C64], zeta: &[C64], n: usize) -> (SU2Loop, SU2Loop) {
    let map = m.equivariant_map();
    (
        build_k1(m, &map, &RootSubgroupSequence::eta(eta.to_vec()), n).unwrap(),
        build_k2(m, &map, &RootSubgroupSequence::zeta(zeta.to_vec()), n).unwrap(),
    )
}

fn disk_spin() -> SpinStructureData {
    SpinStructureData::new(&disk_model(), SpinLabel::Trivial).unwrap()
}

fn unipotents(m: &SurfaceModel, f: C64, n: usize) -> (MatrixSymbol, MatrixSymbol) {
    let f = m.plus_basis_function(n, 1).scale(f);
    let one = LaurentBoundaryFunction::constant(m.circles(), n, c(1.0, 0.0));
    let zero = LaurentBoundaryFunction::zeros(m.circles(), n);
    (
        MatrixSymbol::new(2, vec![one.clone(), f.star(), zero.clone(), one.clone()]).unwrap(),
        MatrixSymbol::new(2, vec![one.clone(), zero, f, one]).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_projections_partition_exactly(f in coefficients(8)) {
        let parts = [DiskPart::Minus, DiskPart::Zero, DiskPart::Plus];
        let p: Vec<_> = parts.iter().map(|&q| project_disk(&f, q).unwrap()).collect();
        prop_assert_eq!(p[0].add(&p[1]).add(&p[2]), f.clone());
        for (i, &q) in parts.iter().enumerate() {
            prop_assert_eq!(project_disk(&p[i], q).unwrap(), p[i].clone());
            for (j, other) in p.iter().enumerate() {
                if i != j {
                    prop_assert_eq!(project_disk(other, q).unwrap().max_coefficient(), 0.0);
                }
            }
        }
    }

    #[test]
    fn hilbert_is_diagonal_and_linear(f in coefficients(8), g in coefficients(8), s in complex(2.0)) {
        let h = hilbert_transform(&f).unwrap();
        for k in -8i64..=8 {
            prop_assert_eq!(h.coefficient(0, k), c(0.0, k.signum() as f64) * f.coefficient(0, k));
        }
        let lhs = hilbert_transform(&f.scale(s).add(&g)).unwrap();
        let rhs = h.scale(s).add(&hilbert_transform(&g).unwrap());
        prop_assert!(lhs.distance(&rhs) < 1e-14);
    }

    #[test]
    fn samples_round_trip(f in coefficients(12)) {
        let back = LaurentBoundaryFunction::from_samples(&f.samples(), 12).unwrap();
        prop_assert!(back.distance(&f) < 1e-12 * f.max_coefficient().max(1e-300));
    }

    #[test]
    fn degree_is_additive(a in -3i64..=3, b in -3i64..=3, p in prop::collection::vec(complex(0.3), 3), q in prop::collection::vec(complex(0.3), 3)) {
        let m = disk_model();
        let wobble = |mode: i64, cs: &[C64]| {
            let mut f = LaurentBoundaryFunction::monomial(1, N, mode, c(1.0, 0.0));
            for (j, &z) in cs.iter().enumerate() {
                f = f.add(&LaurentBoundaryFunction::monomial(1, N, mode + j as i64 - 1, z));
            }
            f
        };
        let (f, g) = (wobble(a, &p), wobble(b, &q));
        let df = degree(&m, &f).unwrap().transition_degree;
        let dg = degree(&m, &g).unwrap().transition_degree;
        prop_assert_eq!(df, a);
        prop_assert_eq!(degree(&m, &f.mul(&g)).unwrap().transition_degree, df + dg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn built_loops_have_their_forms_and_factor_back(eta in sequence(), zeta in sequence()) {
        let m = disk_model();
        let (k1, k2) = pair(&m, &eta, &zeta, N);
        prop_assert!(k1.check_k1_form().is_ok());
        prop_assert!(k2.check_k2_form().is_ok());
        prop_assert!(k1.unitarity_defect() < 1e-12 && k2.unitarity_defect() < 1e-12);
        let f1 = factor_k1(&m, &k1).unwrap();
        let f2 = factor_k2(&m, &k2).unwrap();
        prop_assert!(f1.assemble(&m).distance(&k1) < 1e-8);
        prop_assert!(f2.assemble(&m).distance(&k2) < 1e-8);
        prop_assert_eq!(f1.zero_part.max_coefficient(), 0.0);
        prop_assert_eq!(f2.zero_part.max_coefficient(), 0.0);
    }

    #[test]
    fn solver_paths_agree(zeta in sequence()) {
        let m = disk_model();
        let (_, k2) = pair(&m, &[], &zeta, N);
        let svd = factor_k2_with(&m, &k2, SolverPath::Svd).unwrap();
        for path in [SolverPath::Qr, SolverPath::Normal] {
            let other = factor_k2_with(&m, &k2, path).unwrap();
            prop_assert!(other.off_diagonal.distance(&svd.off_diagonal) < 1e-7);
        }
    }

    #[test]
    fn truncated_products_converge(a in 0.05..0.5f64, r in 0.2..0.7f64, t in 0.0..TAU) {
        let m = disk_model();
        let map = m.equivariant_map();
        let eta: Vec<C64> = (0..6).map(|j| C64::from_polar(a * r.powi(j), t * j as f64)).collect();
        let seq = RootSubgroupSequence::eta(eta.clone());
        for n in 1..5 {
            let short = build_k1(&m, &map, &seq.truncate(n), N).unwrap();
            let long = build_k1(&m, &map, &seq.truncate(n + 1), N).unwrap();
            prop_assert!(short.distance(&long) <= 4.0 * eta[n].norm(), "n={} {} vs {}", n, short.distance(&long), eta[n].norm());
        }
    }

    #[test]
    fn holomorphic_factors_multiply_through(eta in sequence(), zeta in sequence()) {
        let m = disk_model();
        let (k1, k2) = pair(&m, &eta, &zeta, N);
        let r = check_product_factorization(&disk_spin(), &k1, &k2, N).unwrap();
        prop_assert!(r.bc_norm <= 1e-10);
        prop_assert!(r.a_defect <= 1e-8);
    }

    #[test]
    fn unitary_symbols_have_determinant_in_unit_interval(eta in sequence(), zeta in sequence(), x in complex(0.3)) {
        let m = disk_model();
        let (k1, k2) = pair(&m, &eta, &zeta, N);
        let g = assemble_g(&k1, &chi_function(&m, &[x], N), &k2).unwrap();
        let r = det_a_ainv(&disk_spin(), &MatrixSymbol::from_loop(&g), &[16, 24, 32]).unwrap();
        prop_assert!(r.extrapolated.im.abs() < 1e-8);
        prop_assert!(r.extrapolated.re > 0.0 && r.extrapolated.re <= 1.0 + 1e-8, "{}", r.extrapolated);
    }

    #[test]
    fn cocycle_identity_on_random_triples(fs in prop::collection::vec(prop::collection::vec(complex(0.3), 5), 3)) {
        let spin = disk_spin();
        let sym = |cs: &[C64]| {
            let mut f = LaurentBoundaryFunction::zeros(1, N);
            for (j, &z) in cs.iter().enumerate() {
                f = f.add(&LaurentBoundaryFunction::monomial(1, N, j as i64 - 2, z));
            }
            MatrixSymbol::scalar(&f.exp())
        };
        let (g, h, k) = (sym(&fs[0]), sym(&fs[1]), sym(&fs[2]));
        let cc = |a: &MatrixSymbol, b: &MatrixSymbol| cocycle_at(&spin, a, b, 24).unwrap();
        let lhs = cc(&g, &h) * cc(&g.mul(&h).unwrap(), &k);
        let rhs = cc(&g, &h.mul(&k).unwrap()) * cc(&h, &k);
        prop_assert!((lhs - rhs).norm() <= 1e-6 * lhs.norm());
    }

    #[test]
    fn assembled_loops_are_semistable_and_stay_so(eta in sequence(), zeta in sequence(), x in complex(0.3), u in complex(0.4)) {
        let m = disk_model();
        let (k1, k2) = pair(&m, &eta, &zeta, N);
        let g = assemble_g(&k1, &chi_function(&m, &[x], N), &k2).unwrap();
        prop_assert_eq!(partial_indices(&g, N).unwrap().indices, vec![0, 0]);
        let (lower, upper) = unipotents(&m, u, N);
        let moved = lower.mul(&MatrixSymbol::from_loop(&g)).unwrap().mul(&upper).unwrap();
        prop_assert_eq!(birkhoff_scan(&m, &moved, N, 4).unwrap().indices, vec![0, 0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn torus_decomposition_is_a_projection_triple(cs in prop::collection::vec(complex(0.5), 3), d in complex(0.5)) {
        let m = ModelDescriptor::default_elliptic().build().unwrap();
        let n = 24;
        let f = chi_function(&m, &cs, n).add_constant(d);
        let parts = m.decompose(&f).unwrap();
        for part in [Part::Minus, Part::Zero, Part::Plus] {
            let again = m.decompose(parts.part(part)).unwrap();
            prop_assert!(again.part(part).distance(parts.part(part)) <= 1e-8);
        }
        prop_assert!(parts.minus.add(&parts.zero).add(&parts.plus).distance(&f) <= 1e-8);
    }
}
