use std::f64::consts::FRAC_PI_3;

use proptest::prelude::*;

use super::*;
use crate::cis;
use crate::fixtures::{alteration, c, conjugate, landau, systems, t};

fn small_grid() -> Grid {
    Grid::square(1.5, 7)
}

fn test_fields() -> Vec<ScalarField> {
    vec![
        ScalarField::gaussian_monomial(0, 0, 0.5),
        ScalarField::gaussian_monomial(1, 0, 0.4),
        ScalarField::gaussian_monomial(0, 1, 0.6),
        ScalarField::gaussian_monomial(1, 1, 0.5),
        ScalarField::gaussian_monomial(2, 1, 0.3),
    ]
}

#[test]
fn field_values() {
    let g = Grid::default();
    for (sys, b) in systems().into_iter().zip([1.0, 1.0, 1.5]) {
        let rep = sys.field_constancy(&g).unwrap();
        assert!(rep.pass && rep.max_residual <= 1e-8, "{rep:?}");
        assert!((sys.b() - b).abs() < 1e-14);
    }
}

#[test]
fn field_constancy_with_finite_differences() {
    let sys = alteration();
    let numeric = EquivariantMap::custom("numeric affine", sys.tau().field().numeric());
    let sys2 = MagneticSystem::new(1.0, 0.5, sys.rho().clone(), numeric, sys.gamma().clone(), sys.chi().clone()).unwrap();
    let rep = sys2.field_constancy(&Grid::default()).unwrap();
    assert!(rep.pass && rep.max_residual <= 1e-6, "{rep:?}");
}

#[test]
fn s_field_examples() {
    let z = c(0.7, -0.4);
    assert!((landau().s_field(z).unwrap() - z).norm() < 1e-15);
    assert!((conjugate().s_field(z).unwrap() - z * 1.0).norm() < 1e-15);
    // finite-difference oracle for the affine map
    let sys = alteration();
    let numeric = sys.tau().field().numeric();
    let (d, db) = numeric.wirtinger(z).unwrap();
    let tz = sys.tau().eval(z);
    let oracle = z * sys.nu() + (tz * d.conj() - tz.conj() * db) * sys.mu();
    assert!((sys.s_field(z).unwrap() - oracle).norm() < 1e-9);
}

#[test]
fn potential_is_landau_gauge_for_mu_zero() {
    let (p, l) = (landau().potential(), OneForm::landau(1.0));
    for z in small_grid().points() {
        assert!((p.coeff_dz.eval(z) - l.coeff_dz.eval(z)).norm() < 1e-15);
        assert!((p.coeff_dzbar.eval(z) - l.coeff_dzbar.eval(z)).norm() < 1e-15);
    }
    assert!(alteration().potential().reality_residual(small_grid().points(), 1e-12).pass);
}

#[test]
fn curl_equals_field() {
    for sys in systems() {
        let rep = sys.curl_residual(&small_grid());
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn laplacian_examples() {
    let nu = 1.0;
    let sys = landau();
    let ground = ScalarField::gaussian_monomial(0, 0, nu / 2.0);
    let one = ScalarField::constant(c(1.0, 0.0));
    for z in small_grid().points() {
        let v = sys.apply_mixed_laplacian(&ground, z).unwrap();
        assert!((v + ground.eval(z) * 2.0 * nu).norm() < 1e-12);
        let v = sys.apply_mixed_laplacian(&ground.numeric(), z).unwrap();
        assert!((v + ground.eval(z) * 2.0 * nu).norm() < 1e-7);
        let v = sys.apply_mixed_laplacian(&one, z).unwrap();
        assert!((v + nu * nu * z.norm_sqr()).norm() < 1e-12);
    }
    // conjugate system: φ ≡ 0, so the ground state of Δ_{ν−μ} is an eigenfunction
    let sys = conjugate();
    let g = ScalarField::gaussian_monomial(0, 0, (sys.nu() - sys.mu()) / 2.0);
    for z in small_grid().points() {
        let v = sys.apply_mixed_laplacian(&g, z).unwrap();
        assert!((v + g.eval(z) * 2.0 * (sys.nu() - sys.mu())).norm() < 1e-12);
    }
}

#[test]
fn landau_operator_examples() {
    let f = ScalarField::gaussian_monomial(1, 2, 0.3);
    for z in small_grid().points() {
        let flat = apply_landau(0.0, &f, z).unwrap();
        assert!((flat - f.laplacian(z).unwrap()).norm() < 1e-14);
        let a = apply_landau(1.0, &f, z).unwrap();
        let b = landau().apply_mixed_laplacian(&f, z).unwrap();
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn representation_examples() {
    let sys = alteration();
    let f = ScalarField::gaussian_monomial(1, 0, 0.5);
    let id = sys.representation(&GroupElement::IDENTITY, &f).unwrap();
    let g = sys.gamma().generators()[0];
    let tg = sys.representation(&g, &f).unwrap();
    for z in small_grid().points() {
        assert!((id.eval(z) - f.eval(z)).norm() < 1e-15);
        assert!((tg.eval(z).norm() - f.eval(g.act(z)).norm()).abs() < 1e-12);
    }
    assert!(sys.representation(&t(c(0.1, 0.0)), &f).is_err());
    let h = GroupElement::from_angle(0.4, c(0.3, -0.2));
    let k = GroupElement::from_angle(-1.1, c(-0.5, 0.6));
    assert!(sys.projective_phase_spread(&h, &k, &f, &small_grid()).pass);
}

#[test]
fn invariance_examples() {
    let f = ScalarField::gaussian_monomial(1, 0, 0.5);
    let g = small_grid();
    assert!(landau().invariance_residual(&GroupElement::IDENTITY, &f, &g).unwrap().max_residual < 1e-12);
    let rep = landau().invariance_residual(&t(c(1.0, 0.0)), &f, &g).unwrap();
    assert!(rep.pass, "{rep:?}");
    let rep = conjugate()
        .invariance_residual(&GroupElement::new(crate::I, c(1.0, 0.0)).unwrap(), &f, &g)
        .unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn gauge_values() {
    let pts = [c(1.0, 1.0), c(-0.3, 2.0), c(1.7, -0.9)];
    for z in pts {
        assert!(landau().gauge_phi(z, PathChoice::Both).unwrap().abs() < 1e-14);
        // τ = z̄ gives θ = θ_B exactly, so the normalised gauge vanishes
        assert!(conjugate().gauge_phi(z, PathChoice::Both).unwrap().abs() < 1e-14);
        let expect = -(3f64.sqrt() / 4.0) * z.re - z.im / 4.0;
        assert!((alteration().gauge_phi(z, PathChoice::Both).unwrap() - expect).abs() < 1e-12);
    }
    let sys = alteration();
    assert!(sys.gauge_closedness(&pts).unwrap().pass);
    let loops = vec![vec![c(0.0, 0.0), c(1.0, 0.2), c(0.8, 1.3), c(-0.4, 0.9)]];
    assert!(sys.gauge_loop_residual(&loops).unwrap().max_residual < 1e-12);
}

#[test]
fn gauge_field_derivatives_match_fd() {
    let phi = alteration().gauge_field();
    for z in small_grid().points() {
        let (d, db) = phi.wirtinger(z).unwrap();
        let (dn, dbn) = phi.wirtinger_fd(z).unwrap();
        assert!((d - dn).norm() < 1e-8 && (db - dbn).norm() < 1e-8);
    }
}

#[test]
fn w_transform_examples() {
    let sys = alteration();
    let f = ScalarField::gaussian_monomial(2, 0, 0.3);
    let w = sys.w_transform(&f);
    let back = sys.w_inverse(&w);
    for z in small_grid().points() {
        assert!((w.eval(z).norm() - f.eval(z).norm()).abs() < 1e-12);
        assert!((back.eval(z) - f.eval(z)).norm() < 1e-12);
    }
    // μ = 0: φ ≡ 0 so W is the identity
    let w = landau().w_transform(&f);
    assert!((w.eval(c(0.4, 0.4)) - f.eval(c(0.4, 0.4))).norm() < 1e-15);
}

#[test]
fn chi_tau_examples() {
    let sys = landau();
    for g in sys.gamma().enumerate_words(2) {
        let a = sys.chi_tau(&g, ChiTauConvention::Derived).unwrap();
        assert!((a - sys.chi_table().get(&g).unwrap()).norm() < 1e-15);
    }
    let sys = conjugate();
    let g = t(c(1.0, 0.0));
    assert!((sys.chi_tau(&g, ChiTauConvention::Derived).unwrap() - 1.0).norm() < 1e-15);
    for sys in systems() {
        for g in sys.gamma().generators() {
            let rep = sys.chi_tau_hat_spread(g, &Grid::default()).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert!(rep.metadata["chi_tau_gap"].as_f64().unwrap() < 1e-12);
        }
    }
}

#[test]
fn lifting_examples() {
    let g = Grid::default();
    for sys in systems() {
        for gen in sys.gamma().enumerate_words(2) {
            let rep = sys.lifting_residual(&gen, &g, ChiTauConvention::Derived).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
    let rep = landau().lifting_residual(&t(c(1.0, 0.0)), &g, ChiTauConvention::Derived).unwrap();
    assert!(rep.max_residual <= 1e-12);
    let sys = alteration();
    let gen = sys.gamma().generators()[0];
    for conv in [ChiTauConvention::DroppedCorrection, ChiTauConvention::DoubledMu] {
        let rep = sys.lifting_residual(&gen, &g, conv).unwrap();
        assert!(rep.max_residual >= 1e-3, "{conv:?}");
    }
}

#[test]
fn lifted_maf_is_classical() {
    // W carries a solution of the mixed functional equation to a classical
    // (Γ, χ_τ)-automorphic function with factor j^B
    let sys = alteration();
    let gen = sys.gamma().generators()[0];
    let f = ScalarField::gaussian_monomial(0, 0, 0.5);
    let chi_tau = sys.chi_tau(&gen, ChiTauConvention::Derived).unwrap();
    for z in small_grid().points() {
        let mixed = sys.mixed_factor(&gen, z).unwrap();
        let phi = |w| sys.gauge_phi(w, PathChoice::RealFirst).unwrap();
        let lhs = cis(phi(gen.act(z))) * mixed * cis(-phi(z));
        let rhs = chi_tau * crate::automorphy::j_factor(sys.b(), &gen, z);
        assert!((lhs - rhs).norm() < 1e-10);
        let _ = f.eval(z);
    }
}

#[test]
fn intertwining_examples() {
    let g = Grid::square(2.0, 9);
    for sys in systems() {
        for f in test_fields() {
            let rep = sys.intertwining_residual(&f, &g, None).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
    let f = ScalarField::gaussian_monomial(0, 0, 0.5);
    let rep = landau().intertwining_residual(&f, &g, None).unwrap();
    assert!(rep.max_residual <= 1e-6);
    let sys = conjugate();
    let rep = sys.intertwining_residual(&f, &Grid::square(1.0, 9), Some(sys.b() + 0.1)).unwrap();
    assert!(rep.max_residual > 1e-2);
}

#[test]
fn construction_rejects_bad_systems() {
    let line = DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap();
    let r = MagneticSystem::new(
        1.0,
        2.0,
        Endomorphism::ComplexConjugate,
        EquivariantMap::conjugate(),
        line.clone(),
        PseudoCharacter::trivial(1),
    );
    assert!(matches!(r, Err(MafError::NonPositiveField(b)) if (b + 1.0).abs() < 1e-12));
    let r = MagneticSystem::new(
        1.0,
        0.5,
        Endomorphism::Identity,
        EquivariantMap::affine_map(c(1.0, 0.0), c(1.0, 0.0)),
        line.clone(),
        PseudoCharacter::trivial(1),
    );
    assert!(matches!(r, Err(MafError::Precondition(_))));
    let r = MagneticSystem::new(
        1.0,
        0.5,
        Endomorphism::Identity,
        EquivariantMap::identity(),
        line,
        PseudoCharacter::trivial(2),
    );
    assert!(matches!(r, Err(MafError::InvalidInput(_))));
    // ρ_h rotates the real line out of a rank-one Γ
    let h = GroupElement::from_angle(FRAC_PI_3, c(1.0, 0.0));
    let r = MagneticSystem::new(
        1.0,
        0.5,
        Endomorphism::Conjugation(h),
        EquivariantMap::affine_map(h.a(), h.b()),
        DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap(),
        PseudoCharacter::trivial(1),
    );
    assert!(matches!(r, Err(MafError::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariance_for_random_motions(t0 in 0.0..6.3f64, bx in -1.0..1.0f64, by in -1.0..1.0f64) {
        let g = GroupElement::from_angle(t0, c(bx, by));
        let f = ScalarField::gaussian_monomial(0, 1, 0.5);
        for sys in systems() {
            let rep = sys.invariance_residual(&g, &f, &Grid::square(1.0, 3)).unwrap();
            prop_assert!(rep.pass, "{:?}", rep);
        }
    }

    #[test]
    fn gauge_is_path_independent(x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let sys = alteration();
        let a = sys.gauge_integral(c(x, y), PathChoice::RealFirst).unwrap();
        let b = sys.gauge_integral(c(x, y), PathChoice::ImagFirst).unwrap();
        prop_assert!((a - b).norm() <= 1e-8);
        prop_assert!(a.im.abs() <= 1e-9);
    }
}
