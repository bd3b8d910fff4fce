use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;

use super::*;
use crate::cis;
use crate::fixtures::{c, systems};

fn pt(v: &[C64]) -> PointN {
    DVector::from_column_slice(v)
}

fn grid2() -> GridN {
    GridN::new(2, 1.0, 3).unwrap()
}

fn permutation_phases() -> EquivariantMapN {
    let u = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), cis(0.7), cis(-1.9), c(0.0, 0.0)]);
    EquivariantMapN::linear(&u).unwrap()
}

#[test]
fn group_operations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = GroupElementN::random(3, &mut rng);
    let h = GroupElementN::random(3, &mut rng);
    let z = pt(&[c(0.1, 0.2), c(-1.0, 0.3), c(0.5, -0.5)]);
    assert!((g.compose(&h).act(&z) - g.act(&h.act(&z))).norm() < 1e-12);
    assert!((g.inverse().act(&g.act(&z)) - &z).norm() < 1e-12);
    assert_eq!(GroupElementN::identity(3).act(&z), z);
    let bad = DMatrix::from_element(2, 2, c(1.0, 0.0));
    assert!(GroupElementN::new(bad, DVector::zeros(2)).is_err());
    assert!(GroupElementN::new(DMatrix::identity(2, 2), DVector::zeros(3)).is_err());
}

#[test]
fn map_validation() {
    assert!(EquivariantMapN::identity(0).is_err());
    assert!(EquivariantMapN::identity(MAX_DIM + 1).is_err());
    let bad = TauN::Linear { u: vec![vec![c(2.0, 0.0)]] };
    assert!(EquivariantMapN::new(1, bad).is_err());
    let short = TauN::Polynomial { components: vec![vec![]] };
    assert!(EquivariantMapN::new(2, short).is_err());
    let tau = EquivariantMapN::identity(2).unwrap();
    assert!(tau.eval(&pt(&[c(1.0, 0.0)])).is_err());
}

#[test]
fn descriptor_json() {
    let t: TauN = serde_json::from_str(r#"{"kind":"linear","U":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
    assert!(matches!(t, TauN::Linear { .. }));
    let t: TauN = serde_json::from_str(r#"{"kind":"conjugate"}"#).unwrap();
    assert_eq!(t, TauN::Conjugate);
    let t: TauN = serde_json::from_str(
        r#"{"kind":"polynomial","components":[[{"coeff":[1,0],"z":[2]}],[{"coeff":[0,1],"zbar":[0,1]}]]}"#,
    )
    .unwrap();
    let tau = EquivariantMapN::new(2, t).unwrap();
    let v = tau.eval(&pt(&[c(1.0, 1.0), c(0.0, 2.0)])).unwrap();
    assert!((v[0] - c(0.0, 2.0)).norm() < 1e-15);
    assert!((v[1] - c(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn jacobian_examples() {
    let z = pt(&[c(0.3, -0.1), c(1.2, 0.4)]);
    let id = DMatrix::<C64>::identity(2, 2);
    let zero = DMatrix::<C64>::zeros(2, 2);
    let (j, jb) = EquivariantMapN::identity(2).unwrap().jacobian_blocks(&z).unwrap();
    assert_eq!((j, jb), (id.clone(), zero.clone()));
    let (j, jb) = EquivariantMapN::conjugate(2).unwrap().jacobian_blocks(&z).unwrap();
    assert_eq!((j, jb), (zero.clone(), id));
    let tau = EquivariantMapN::rotation(FRAC_PI_4).unwrap();
    let (j, jb) = tau.jacobian_blocks(&z).unwrap();
    let s = FRAC_PI_4.sin();
    let u = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(-s, 0.0), c(s, 0.0), c(s, 0.0)]);
    assert!(max_abs(&(j - u)) < 1e-15 && jb == zero);
}

#[test]
fn determinant_examples() {
    let z = pt(&[c(0.3, -0.1), c(1.2, 0.4)]);
    let id = EquivariantMapN::identity(2).unwrap();
    let cj = EquivariantMapN::conjugate(2).unwrap();
    for l in 0..2 {
        for k in 0..2 {
            let a = determinant_coeffs(&id, &z, l, 0, 1, k).unwrap();
            assert_eq!([a.a, a.b, a.c, a.d], [C64::new(0.0, 0.0); 4]);
            assert_eq!(a.f, if k == l { -1.0 } else { 0.0 });
            let b = determinant_coeffs(&cj, &z, l, 0, 1, k).unwrap();
            assert_eq!([b.a, b.b, b.c, b.d], [C64::new(0.0, 0.0); 4]);
            assert_eq!(b.f, if k == l { 1.0 } else { 0.0 });
        }
    }
    assert!(matches!(determinant_coeffs(&id, &z, 0, 1, 1, 0), Err(MafError::Precondition(_))));
    assert!(determinant_coeffs(&id, &z, 2, 0, 1, 0).is_err());
    // 45° rotation: B_{ℓ,12} = -conj(u_{ℓ2}) u_{ℓ1}
    let rot = EquivariantMapN::rotation(FRAC_PI_4).unwrap();
    let b = determinant_coeffs(&rot, &z, 0, 0, 1, 0).unwrap();
    assert!((b.b - c(0.5, 0.0)).norm() < 1e-15);
    assert!((b.f + 0.5).abs() < 1e-15);
}

fn arb_poly() -> impl Strategy<Value = EquivariantMapN> {
    let mono = (-1.0..1.0f64, -1.0..1.0f64, prop::collection::vec(0u32..3, 2), prop::collection::vec(0u32..3, 2))
        .prop_map(|(re, im, z, zbar)| Monomial { coeff: c(re, im), z, zbar });
    prop::collection::vec(prop::collection::vec(mono, 1..4), 2)
        .prop_map(|components| EquivariantMapN::new(2, TauN::Polynomial { components }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conjugation_identities(tau in arb_poly(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let z = pt(&[c(x, y), c(y, -x)]);
        for l in 0..2 {
            let d = determinant_coeffs(&tau, &z, l, 0, 1, 0).unwrap();
            prop_assert!((d.d + d.a.conj()).norm() <= 1e-12 * (1.0 + d.a.norm()));
            prop_assert!((d.c + d.b.conj()).norm() <= 1e-12 * (1.0 + d.b.norm()));
        }
        let (j, jb) = tau.jacobian_blocks(&z).unwrap();
        let (jn, jbn) = tau.jacobian_blocks_fd(&z, 1e-4).unwrap();
        prop_assert!(max_abs(&(j - jn)) <= 1e-8 && max_abs(&(jb - jbn)) <= 1e-8);
    }

    #[test]
    fn per_component_pass_implies_direct_pass(tau in arb_poly()) {
        let v = constant_field_test(&tau, 1.0, 0.5, &GridN::new(2, 0.8, 2).unwrap(), 1e-6).unwrap();
        if v.per_component.pass {
            prop_assert!(v.direct.pass);
        }
    }
}

#[test]
fn constant_field_identity_and_conjugate() {
    for (tau, f) in [(EquivariantMapN::identity(2).unwrap(), -1.0), (EquivariantMapN::conjugate(2).unwrap(), 1.0)] {
        let v = constant_field_test(&tau, 3.0, 1.0, &grid2(), 1e-6).unwrap();
        assert!(v.per_component.pass, "{:?}", v.per_component);
        assert!(v.direct.pass, "{:?}", v.direct);
        assert!(v.agreement);
        assert_eq!(v.f_values, vec![vec![f, 0.0], vec![0.0, f]]);
        // coefficient of dz_k∧dz̄_k is ν - μF
        for d in &v.field_diagonal {
            assert!((d - c(3.0 - f, 0.0)).norm() < 1e-9);
        }
    }
}

#[test]
fn constant_field_rotation_disagrees() {
    let v = constant_field_test(&EquivariantMapN::rotation(FRAC_PI_4).unwrap(), 1.0, 0.5, &grid2(), 1e-6).unwrap();
    assert!(!v.per_component.pass);
    assert!(v.direct.pass, "{:?}", v.direct);
    assert!(!v.agreement);
    assert!((v.per_component.metadata["max_abs_B"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let flag = &v.reports()[2];
    assert!(!flag.pass);
}

#[test]
fn constant_field_permutation_with_phases() {
    let v = constant_field_test(&permutation_phases(), 1.0, 0.5, &grid2(), 1e-6).unwrap();
    assert!(v.per_component.pass && v.direct.pass && v.agreement);
}

#[test]
fn non_constant_field_fails_both() {
    let comp = |k: usize| {
        let mut e = vec![0; 2];
        e[k] = 2;
        vec![Monomial { coeff: c(1.0, 0.0), z: e, zbar: vec![] }]
    };
    let tau = EquivariantMapN::new(2, TauN::Polynomial { components: vec![comp(0), comp(1)] }).unwrap();
    let v = constant_field_test(&tau, 1.0, 0.5, &grid2(), 1e-6).unwrap();
    assert!(!v.per_component.pass && !v.direct.pass && v.agreement);
}

#[test]
fn equivariance_examples() {
    let id = EquivariantMapN::identity(2).unwrap();
    assert_eq!(equivariance_check_n(&id, &RhoN::Identity, 20, 1).unwrap().max_residual, 0.0);
    for tau in [
        EquivariantMapN::conjugate(2).unwrap(),
        EquivariantMapN::rotation(FRAC_PI_4).unwrap(),
        permutation_phases(),
    ] {
        let rho = tau.declared_rho().unwrap();
        let rep = equivariance_check_n(&tau, &rho, 50, 7).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = chain_rule_residual(&tau, &rho, 20, 7).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
    let rep = equivariance_check_n(&EquivariantMapN::conjugate(2).unwrap(), &RhoN::Identity, 20, 1).unwrap();
    assert!(!rep.pass);
}

#[test]
fn potential_examples() {
    let z = pt(&[c(0.3, -0.1), c(1.2, 0.4)]);
    let landau = potential_n(&EquivariantMapN::conjugate(2).unwrap(), 1.5, 0.0, &z).unwrap();
    for k in 0..2 {
        assert!((landau.dz[k] + 0.75 * z[k].conj()).norm() < 1e-15);
        assert!((landau.dzbar[k] - 0.75 * z[k]).norm() < 1e-15);
    }
    // unitary invariance: τ = Uz with (ν, μ) gives the μ = 0 potential at ν + μ
    let rot = potential_n(&EquivariantMapN::rotation(0.3).unwrap(), 1.0, 0.5, &z).unwrap();
    let flat = potential_n(&EquivariantMapN::identity(2).unwrap(), 1.5, 0.0, &z).unwrap();
    assert!((rot.dz - flat.dz).norm() < 1e-14 && (rot.dzbar - flat.dzbar).norm() < 1e-14);
}

#[test]
fn one_dimension_matches_magnetics() {
    let pts: Vec<C64> = crate::calculus::Grid::square(1.5, 5).points().collect();
    for sys in systems() {
        let tau = EquivariantMapN::from_affine(&sys.tau().affine().unwrap()).unwrap();
        let theta = sys.potential();
        for &z in &pts {
            let p = potential_n(&tau, sys.nu(), sys.mu(), &pt(&[z])).unwrap();
            assert!((p.dz[0] - theta.coeff_dz.eval(z)).norm() <= 1e-9);
            assert!((p.dzbar[0] - theta.coeff_dzbar.eval(z)).norm() <= 1e-9);
            let two = two_form_coeffs(&tau, sys.nu(), sys.mu(), &pt(&[z])).unwrap();
            assert!((two.dz_dzbar[(0, 0)] - sys.b()).norm() <= 1e-9);
        }
        let v = constant_field_test(&tau, sys.nu(), sys.mu(), &GridN::new(1, 1.5, 5).unwrap(), 1e-9).unwrap();
        assert!(v.per_component.pass && v.direct.pass);
    }
}

#[test]
fn grid_points() {
    let g = GridN::new(2, 1.0, 3).unwrap();
    let pts = g.points();
    assert_eq!(pts.len(), 81);
    assert!(pts.iter().all(|p| p.iter().all(|v| v.re.abs() <= 1.0 && v.im.abs() <= 1.0)));
    assert!(GridN::new(2, 1.0, 1).is_err());
}
