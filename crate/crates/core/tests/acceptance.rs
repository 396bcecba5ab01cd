//! Acceptance gate: one test per criterion, exact arithmetic throughout.
//! Each test prints a single summary line; run with `--nocapture` to see
//! them all.

use std::sync::Arc;

use phi_loop_core::conformal::{
    build_current, build_novikov, build_virasoro, check_g_structure, quotient_by_h, CAElement,
    GStructure, LieData, NovikovData,
};
use phi_loop_core::delta::{DeltaSum, DeltaTerm, Window};
use phi_loop_core::field::{CycloScalar, FieldCtx};
use phi_loop_core::fock::{basis_through_degree, FockCtx};
use phi_loop_core::loop_alg::LoopCtx;
use phi_loop_core::models::{
    alpha_phi, twisted_affine_build, verify_affine_iso, verify_virasoro_iso,
};
use phi_loop_core::rng::Rng;
use phi_loop_core::suite::{run_suite, SuiteConfig};
use phi_loop_core::{Deformation, LaurentSeries};

const SAMPLES: u32 = 50;
const SEED: u64 = 0;

fn rationals() -> Arc<FieldCtx> {
    FieldCtx::rationals()
}

fn deformation(field: &Arc<FieldCtx>, p: &str) -> Deformation {
    Deformation::parse(field, p).expect("valid deformation")
}

fn chevalley(field: &Arc<FieldCtx>) -> Vec<Vec<CycloScalar>> {
    let m1 = CycloScalar::from_int(field, -1);
    let z = CycloScalar::zero(field);
    vec![
        vec![z.clone(), m1.clone(), z.clone()],
        vec![m1.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), m1],
    ]
}

#[test]
fn criterion_01_associate_law() {
    let field = rationals();
    for p in ["1", "x", "x^2", "x^-1", "1 + x"] {
        let def = deformation(&field, p);
        assert!(
            def.phi_compose_check(8),
            "composition law fails for p = {}",
            p
        );
    }
    // p = 1 is exactly x + z.
    let add = deformation(&field, "1").phi_expand(8);
    assert_eq!(add[0], LaurentSeries::x(&field));
    assert_eq!(add[1], LaurentSeries::one(&field));
    assert!(add[2..].iter().all(|c| c.is_exactly_zero()));
    // p = x carries the coefficients of x e^z: entry k is x / k!.
    let mul = deformation(&field, "x").phi_expand(8);
    let mut factorial = 1i64;
    for (k, c) in mul.iter().enumerate() {
        if k > 0 {
            factorial *= k as i64;
        }
        assert_eq!(
            c,
            &LaurentSeries::monomial(CycloScalar::from_ratio(&field, 1, factorial), 1),
            "entry {}",
            k
        );
    }
    println!("ACCEPTANCE 01 associate-law: PASS");
}

#[test]
fn criterion_02_delta_annihilation() {
    let field = FieldCtx::new(3);
    let lambdas = [
        CycloScalar::one(&field),
        CycloScalar::from_int(&field, 2),
        CycloScalar::zeta(&field),
    ];
    for p in ["1", "x", "x^2"] {
        let def = Deformation::parse(&field, p).unwrap();
        for lambda in &lambdas {
            for j in 0..3u32 {
                for k in (j + 1)..=3 {
                    let sum = DeltaSum::new(
                        def.clone(),
                        vec![
                            DeltaTerm::new(lambda.clone(), j, LaurentSeries::one(&field)).unwrap(),
                        ],
                    )
                    .unwrap();
                    let table = sum.mul_binomial(lambda, k, Window::square(12)).unwrap();
                    assert!(
                        table.is_zero(),
                        "p = {}, lambda = {}, j = {}, k = {}",
                        p,
                        lambda,
                        j,
                        k
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE 02 delta-annihilation: PASS");
}

#[test]
fn criterion_03_conformal_axioms() {
    let field = rationals();
    let families = [
        ("sl2", build_current(&LieData::sl2(&field))),
        ("gl2", build_current(&LieData::gl2(&field))),
        ("virasoro", build_virasoro(&field)),
        (
            "novikov",
            build_novikov(&NovikovData::one_dim(
                &field,
                CycloScalar::one(&field),
                CycloScalar::one(&field),
            )),
        ),
    ];
    for (name, alg) in &families {
        let report = alg.check_axioms(SAMPLES, SEED);
        assert!(report.passed, "{}: {}", name, report.to_json());
    }
    // Negative controls: shift the (0,0) zeroth product by a generator,
    // which the skew-symmetry sweep flags deterministically.
    for (name, alg) in &families {
        let honest = alg.nprod_gen(0, 0, 0);
        let bad = alg.with_entry(0, 0, 0, honest.add(&CAElement::gen(&field, 0)));
        let report = bad.check_axioms(SAMPLES, SEED);
        assert!(!report.passed, "corrupted {} still passed", name);
        assert!(
            report
                .checks
                .iter()
                .any(|c| c.status == phi_loop_core::report::Status::Fail && c.witness.is_some()),
            "corrupted {} lacks a witness",
            name
        );
    }
    println!("ACCEPTANCE 03 conformal-axioms: PASS");
}

#[test]
fn criterion_04_loop_lie_structure() {
    let field = rationals();
    for p in ["1", "x", "x^2", "1 + x"] {
        let def = deformation(&field, p);
        let algebras = [
            ("sl2", build_current(&LieData::sl2(&field))),
            ("virasoro", build_virasoro(&field)),
            (
                "novikov",
                build_novikov(&NovikovData::one_dim(
                    &field,
                    CycloScalar::one(&field),
                    CycloScalar::one(&field),
                )),
            ),
        ];
        for (name, alg) in algebras {
            let lc = LoopCtx::new(Arc::new(alg), def.clone()).unwrap();
            let report = lc.jacobi_check(SAMPLES, SEED);
            assert!(report.passed, "{} p = {}: {}", name, p, report.to_json());
        }
        // Well-definedness under image shifts, on the richest family.
        let lc = LoopCtx::new(Arc::new(build_current(&LieData::sl2(&field))), def).unwrap();
        let report = lc.well_definedness_check(SAMPLES, SEED);
        assert!(
            report.passed,
            "well-definedness p = {}: {}",
            p,
            report.to_json()
        );
    }
    println!("ACCEPTANCE 04 loop-lie-structure: PASS");
}

#[test]
fn criterion_05_field_commutator() {
    let field = rationals();
    for p in ["1", "x"] {
        let def = deformation(&field, p);
        let heis = LoopCtx::new(
            Arc::new(build_current(&LieData::heisenberg(&field))),
            def.clone(),
        )
        .unwrap();
        let report = heis
            .check_field_commutator("a", "a", Window::square(8))
            .unwrap();
        assert!(report.passed, "heisenberg p = {}: {}", p, report.to_json());

        let vir = LoopCtx::new(Arc::new(build_virasoro(&field)), def).unwrap();
        let report = vir
            .check_field_commutator("L", "L", Window::square(8))
            .unwrap();
        assert!(report.passed, "virasoro p = {}: {}", p, report.to_json());
    }

    // p = 1 mode relations against independent residue oracles.
    let def = deformation(&field, "1");
    let heis = LoopCtx::new(
        Arc::new(build_current(&LieData::heisenberg(&field))),
        def.clone(),
    )
    .unwrap();
    for m in -8..=8i64 {
        for n in -8..=8i64 {
            let br = heis
                .bracket(
                    &heis.field_mode("a", m).unwrap(),
                    &heis.field_mode("a", n).unwrap(),
                )
                .unwrap();
            // Oracle: Res((x^m)' x^n) by direct series calculus.
            let oracle = LaurentSeries::monomial(CycloScalar::one(&field), m)
                .derivative()
                .mul(&LaurentSeries::monomial(CycloScalar::one(&field), n))
                .residue()
                .unwrap();
            assert_eq!(br.central(), &oracle, "heisenberg ({}, {})", m, n);
            assert_eq!(br.parts().count(), 0);
            // Frozen form m delta_{m+n,0}.
            let frozen = if m + n == 0 {
                CycloScalar::from_int(&field, m)
            } else {
                CycloScalar::zero(&field)
            };
            assert_eq!(oracle, frozen);
        }
    }

    let vir = LoopCtx::new(Arc::new(build_virasoro(&field)), def).unwrap();
    for m in -8..=8i64 {
        for n in -8..=8i64 {
            // L_m = class of L (x) x^(m+1) when p = 1.
            let br = vir
                .bracket(
                    &vir.field_mode("L", m + 1).unwrap(),
                    &vir.field_mode("L", n + 1).unwrap(),
                )
                .unwrap();
            let expected_part =
                LaurentSeries::monomial(CycloScalar::from_int(&field, m - n), m + n + 1);
            match br.part(0) {
                Some(s) => assert_eq!(s, &expected_part, "({}, {})", m, n),
                None => assert!(expected_part.is_exactly_zero(), "({}, {})", m, n),
            }
            // Oracle: (1/2) Res((d/dx)^(3) x^(m+1) * x^(n+1)) by direct
            // series calculus, then frozen to (m^3 - m)/12 delta_{m+n,0}.
            let oracle = &LaurentSeries::monomial(CycloScalar::one(&field), m + 1)
                .derivative_divided(3)
                .mul(&LaurentSeries::monomial(CycloScalar::one(&field), n + 1))
                .residue()
                .unwrap()
                * &CycloScalar::from_ratio(&field, 1, 2);
            let frozen = if m + n == 0 {
                CycloScalar::from_ratio(&field, m * m * m - m, 12)
            } else {
                CycloScalar::zero(&field)
            };
            assert_eq!(oracle, frozen, "oracle disagrees with the frozen form");
            assert_eq!(br.central(), &oracle, "virasoro central ({}, {})", m, n);
        }
    }
    println!("ACCEPTANCE 05 field-commutator: PASS");
}

#[test]
fn criterion_06_affine_isomorphism() {
    let field = rationals();
    for p in ["1", "x", "x^2", "x^-1", "1 + x"] {
        let def = deformation(&field, p);
        for (name, data) in [
            ("sl2", LieData::sl2(&field)),
            ("abelian", LieData::heisenberg(&field)),
            ("gl2", LieData::gl2(&field)),
        ] {
            let report = verify_affine_iso(&data, &def, SAMPLES, SEED);
            assert!(report.passed, "{} p = {}: {}", name, p, report.to_json());
        }
    }
    println!("ACCEPTANCE 06 affine-isomorphism: PASS");
}

#[test]
fn criterion_07_virasoro_isomorphism() {
    let field = rationals();
    // alpha vanishes identically for constant p.
    let p1 = deformation(&field, "1");
    let mut rng = Rng::new(SEED);
    for _ in 0..20 {
        let f = rng.series(&field, -6, 6, 4);
        assert!(alpha_phi(&p1, &f).unwrap().is_zero());
    }
    // The derived oracle value at p = x, f = 1.
    let px = deformation(&field, "x");
    assert_eq!(
        alpha_phi(&px, &LaurentSeries::one(&field)).unwrap(),
        CycloScalar::from_ratio(&field, -1, 24)
    );

    let mut shared: Option<Vec<(i64, i64)>> = None;
    for p in ["1", "x", "x^2", "x^-1", "1 + x"] {
        let def = deformation(&field, p);
        let outcome = verify_virasoro_iso(&def, SAMPLES, SEED);
        assert!(
            outcome.report.passed,
            "p = {}: {}",
            p,
            outcome.report.to_json()
        );
        assert!(!outcome.passing.is_empty(), "no convention for p = {}", p);
        assert!(
            outcome
                .report
                .config
                .get("passing_conventions")
                .map_or(false, |v| !v.is_empty()),
            "convention missing from the report"
        );
        shared = Some(match shared {
            None => outcome.passing.clone(),
            Some(prev) => prev
                .into_iter()
                .filter(|c| outcome.passing.contains(c))
                .collect(),
        });
    }
    let shared = shared.unwrap();
    assert!(
        !shared.is_empty(),
        "no sign convention works across the whole matrix"
    );
    assert!(shared.contains(&(-1, 1)), "shared = {:?}", shared);
    println!(
        "ACCEPTANCE 07 virasoro-isomorphism: PASS (shared conventions {:?})",
        shared
    );
}

#[test]
fn criterion_08_equivariant_layer() {
    let field = rationals();
    let one = CycloScalar::one(&field);
    let m1 = CycloScalar::from_int(&field, -1);

    // Forced case p = 1: chi must equal chi_phi.
    let alg = build_current(&LieData::heisenberg(&field));
    let id = vec![vec![one.clone()]];
    let p1 = deformation(&field, "1");
    let eq = GStructure::for_current(2, &id, m1.clone(), m1.clone()).unwrap();
    assert!(check_g_structure(&alg, &eq, &p1).passed);
    let ne = GStructure::for_current(2, &id, one.clone(), m1.clone()).unwrap();
    assert!(!check_g_structure(&alg, &ne, &p1).passed);

    // Forced case p = x: chi must be trivial.
    let px = deformation(&field, "x");
    let trivial_chi = GStructure::for_current(2, &id, one.clone(), m1.clone()).unwrap();
    assert!(check_g_structure(&alg, &trivial_chi, &px).passed);
    let bad_chi = GStructure::for_current(2, &id, m1.clone(), m1.clone()).unwrap();
    assert!(!check_g_structure(&alg, &bad_chi, &px).passed);

    // Twisted current algebra of sl2 under the Chevalley involution,
    // p = x, chi = 1, chi_phi = -1: covariant commutator formula on the
    // window and the fixed-subalgebra embedding.
    let sl2 = LieData::sl2(&field);
    let (lc, report) = twisted_affine_build(
        &sl2,
        &chevalley(&field),
        2,
        &px,
        one.clone(),
        m1.clone(),
        SAMPLES,
        SEED,
    )
    .unwrap();
    assert!(report.passed, "{}", report.to_json());
    for (a, b) in [("e", "f"), ("h", "e"), ("e", "e")] {
        let cells = lc.check_field_commutator(a, b, Window::square(6)).unwrap();
        assert!(cells.passed, "({}, {}): {}", a, b, cells.to_json());
    }
    let fixed = lc.fixed_subalgebra_compare(-4, 4, SAMPLES, SEED);
    assert!(fixed.passed, "{}", fixed.to_json());
    println!("ACCEPTANCE 08 equivariant-layer: PASS");
}

#[test]
fn criterion_09_quotient_conformal_algebra() {
    let field = rationals();
    let one = CycloScalar::one(&field);

    // Trivial kernel returns the input identically.
    let sl2 = build_current(&LieData::sl2(&field));
    let trivial = GStructure::trivial(&field, 3);
    let (q, qg) = quotient_by_h(&sl2, &trivial).unwrap();
    assert!(q == sl2 && qg == trivial);

    // Order-2 kernels: Chevalley coinvariants and the doubling action both
    // yield conformal algebras.
    let gs = GStructure::new(2, chevalley(&field), one.clone(), one.clone()).unwrap();
    let (q, _) = quotient_by_h(&sl2, &gs).unwrap();
    let report = q.check_axioms(SAMPLES, SEED);
    assert!(report.passed, "chevalley quotient: {}", report.to_json());

    let heis = build_current(&LieData::heisenberg(&field));
    let doubling = GStructure::new(2, vec![vec![one.clone()]], one.clone(), one.clone()).unwrap();
    let (q, _) = quotient_by_h(&heis, &doubling).unwrap();
    assert_eq!(
        q.nprod_gen(0, 0, 1),
        CAElement::central(&field, CycloScalar::from_int(&field, 2))
    );
    let report = q.check_axioms(SAMPLES, SEED);
    assert!(report.passed, "doubling quotient: {}", report.to_json());
    println!("ACCEPTANCE 09 quotient-conformal-algebra: PASS");
}

#[test]
fn criterion_10_restricted_module_witness() {
    let field = rationals();
    let vectors = basis_through_degree(&field, 6);
    for p in ["1", "x", "x^2"] {
        let def = deformation(&field, p);
        for level in ["0", "1", "-2", "1/2"] {
            let lvl = phi_loop_core::parse::parse_scalar(&field, level).unwrap();
            let fc = FockCtx::new(lvl, def.clone());
            assert!(
                fc.restricted_check(&vectors, 16),
                "restricted p = {} level = {}",
                p,
                level
            );
            let report = fc.verify_module_commutator(Window::square(8), &vectors);
            assert!(
                report.passed,
                "commutator p = {} level = {}: {}",
                p,
                level,
                report.to_json()
            );
        }
    }
    println!("ACCEPTANCE 10 restricted-module-witness: PASS");
}

#[test]
fn criterion_11_report_determinism() {
    let cfg = SuiteConfig {
        suite: "all".into(),
        samples: 8,
        seed: 3,
        ..SuiteConfig::default()
    };
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&cfg).unwrap();
    assert!(a.passed, "{}", a.to_json());
    assert_eq!(a.to_json().into_bytes(), b.to_json().into_bytes());

    // A second configuration, exercising the per-suite paths.
    let cfg2 = SuiteConfig {
        suite: "virasoro".into(),
        p: "x^2".into(),
        samples: 10,
        seed: 11,
        ..SuiteConfig::default()
    };
    let a2 = run_suite(&cfg2).unwrap();
    let b2 = run_suite(&cfg2).unwrap();
    assert_eq!(a2.to_json().into_bytes(), b2.to_json().into_bytes());
    println!("ACCEPTANCE 11 report-determinism: PASS");
}
