//! Named verification suites with deterministic, machine-readable reports.
//!
//! Each suite wires the library verifiers to a [`SuiteConfig`]; `all` runs
//! the shipped matrix. Identical configs produce byte-identical JSON: every
//! sweep is ordered, every sampler is seeded, and reports sort their checks.

use std::sync::Arc;

use crate::conformal::{
    build_current, build_novikov, build_virasoro, parse_algebra, quotient_by_h, AlgebraData,
    CAElement, GStructure, LieData, NovikovData,
};
use crate::deform::Deformation;
use crate::delta::{DeltaSum, DeltaTerm, Window};
use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};
use crate::fock::{basis_through_degree, FockCtx};
use crate::loop_alg::LoopCtx;
use crate::models::{
    twisted_affine_build, verify_affine_iso, verify_novikov_loop_agreement, verify_virasoro_iso,
};
use crate::parse::parse_scalar;
use crate::report::Report;
use crate::series::LaurentSeries;

/// Configuration for one suite run. The `algebra_json` payload (if any) is
/// the raw JSON text; the label is echoed in reports.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suite: String,
    pub p: String,
    pub m: u64,
    pub algebra_json: Option<String>,
    pub algebra_label: Option<String>,
    pub samples: u32,
    pub seed: u64,
    pub window: i64,
    pub precision: i64,
    pub level: String,
    pub degree: u32,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            suite: "all".into(),
            p: "x".into(),
            m: 1,
            algebra_json: None,
            algebra_label: None,
            samples: 50,
            seed: 0,
            window: 8,
            precision: 32,
            level: "1".into(),
            degree: 6,
        }
    }
}

impl SuiteConfig {
    fn field(&self) -> Arc<FieldCtx> {
        FieldCtx::new(self.m.max(1))
    }

    fn deformation(&self) -> Result<Deformation> {
        Deformation::parse(&self.field(), &self.p)
    }

    fn echo(&self, report: &mut Report) {
        report.set_config("suite", &self.suite);
        report.set_config("p", &self.p);
        report.set_config("M", self.m.to_string());
        report.set_config(
            "algebra",
            self.algebra_label
                .clone()
                .unwrap_or_else(|| "builtin".into()),
        );
        report.set_config("samples", self.samples.to_string());
        report.set_config("seed", self.seed.to_string());
        report.set_config("window", self.window.to_string());
        report.set_config("precision", self.precision.to_string());
        report.set_config("level", &self.level);
        report.set_config("degree", self.degree.to_string());
    }

    fn lie_data(&self) -> Result<Option<LieData>> {
        match &self.algebra_json {
            None => Ok(None),
            Some(json) => match parse_algebra(&self.field(), json)? {
                AlgebraData::Lie(d) => Ok(Some(d)),
                AlgebraData::Novikov(_) => Err(Error::InvalidAlgebra(
                    "this suite needs Lie data, got Novikov data".into(),
                )),
            },
        }
    }

    fn novikov_data(&self) -> Result<Option<NovikovData>> {
        match &self.algebra_json {
            None => Ok(None),
            Some(json) => match parse_algebra(&self.field(), json)? {
                AlgebraData::Novikov(d) => Ok(Some(d)),
                AlgebraData::Lie(_) => Err(Error::InvalidAlgebra(
                    "this suite needs Novikov data, got Lie data".into(),
                )),
            },
        }
    }
}

/// Run one named suite. Parse and setup problems surface as `Err`; identity
/// violations land in the report as failing checks.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = match cfg.suite.as_str() {
        "phi" => suite_phi(cfg)?,
        "delta" => suite_delta(cfg)?,
        "conformal" => suite_conformal(cfg)?,
        "loop" => suite_loop(cfg)?,
        "fields" => suite_fields(cfg)?,
        "affine" => suite_affine(cfg)?,
        "virasoro" => suite_virasoro(cfg)?,
        "novikov" => suite_novikov(cfg)?,
        "twisted" => suite_twisted(cfg)?,
        "quotient" => suite_quotient(cfg)?,
        "fock" => suite_fock(cfg)?,
        "all" => suite_all(cfg)?,
        other => {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("unknown suite `{}`", other),
            })
        }
    };
    cfg.echo(&mut report);
    Ok(report.finalize())
}

/// Composition law of the substitution series, with the two anchored
/// expansions (additive for p = 1, multiplicative for p = x) pinned exactly.
fn suite_phi(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("phi");
    let def = cfg.deformation()?;
    let field = def.ctx().clone();
    report.check("associate-law/order-8", def.phi_compose_check(8), || {
        format!("composition law fails for p = {}", def.p())
    });

    let expansion = def.phi_expand(8);
    if def.p() == &LaurentSeries::one(&field) {
        let ok = expansion[0] == LaurentSeries::x(&field)
            && expansion[1] == LaurentSeries::one(&field)
            && expansion[2..].iter().all(|c| c.is_exactly_zero());
        report.check("expansion/additive", ok, || {
            "p = 1 must give exactly x + z".to_string()
        });
    }
    if def.p() == &LaurentSeries::x(&field) {
        let ok = expansion.iter().enumerate().all(|(k, c)| {
            c == &LaurentSeries::monomial(crate::series::inv_factorial(&field, k as u32), 1)
        });
        report.check("expansion/multiplicative", ok, || {
            "p = x must give the coefficients of x e^z".to_string()
        });
    }
    Ok(report)
}

/// Annihilation of derivative delta terms by matching binomial powers, with
/// a mismatched-root negative control.
fn suite_delta(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("delta");
    let def = cfg.deformation()?;
    let field = def.ctx().clone();
    let radius = cfg.window.min(12).max(4);
    let mut lambdas = vec![CycloScalar::one(&field), CycloScalar::from_int(&field, 2)];
    if field.degree() > 1 {
        lambdas.push(CycloScalar::zeta(&field));
    }
    for (li, lambda) in lambdas.iter().enumerate() {
        for j in 0..=2u32 {
            for k in (j + 1)..=3 {
                let sum = DeltaSum::new(
                    def.clone(),
                    vec![DeltaTerm::new(
                        lambda.clone(),
                        j,
                        LaurentSeries::one(&field),
                    )?],
                )?;
                let table = sum.mul_binomial(lambda, k, Window::square(radius))?;
                report.check(
                    format!("annihilation/lambda{}-j{}-k{}", li, j, k),
                    table.is_zero(),
                    || {
                        format!(
                            "(z - lambda w)^{} does not kill the j = {} term for lambda = {}",
                            k, j, lambda
                        )
                    },
                );
            }
        }
    }
    // Negative control: a mismatched root must NOT annihilate.
    let sum = DeltaSum::new(
        def.clone(),
        vec![DeltaTerm::new(
            CycloScalar::one(&field),
            1,
            LaurentSeries::one(&field),
        )?],
    )?;
    let table = sum.mul_binomial(&CycloScalar::from_int(&field, 2), 1, Window::square(radius))?;
    report.check("negative-control/mismatched-root", !table.is_zero(), || {
        "a binomial with the wrong root annihilated a delta term".to_string()
    });
    Ok(report)
}

fn builtin_conformal_families(
    field: &Arc<FieldCtx>,
) -> Vec<(&'static str, crate::conformal::ConformalAlgebra)> {
    vec![
        ("sl2", build_current(&LieData::sl2(field))),
        ("gl2", build_current(&LieData::gl2(field))),
        ("virasoro", build_virasoro(field)),
        (
            "novikov",
            build_novikov(&NovikovData::one_dim(
                field,
                CycloScalar::one(field),
                CycloScalar::one(field),
            )),
        ),
    ]
}

/// Conformal axioms for the builtin families (or a supplied algebra), with
/// a corrupted-table negative control.
fn suite_conformal(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("conformal");
    let field = cfg.field();
    match cfg.lie_data()? {
        Some(data) => {
            let alg = build_current(&data);
            report.absorb("custom", alg.check_axioms(cfg.samples, cfg.seed));
        }
        None => {
            for (name, alg) in builtin_conformal_families(&field) {
                report.absorb(name, alg.check_axioms(cfg.samples, cfg.seed));
            }
            // Negative control: corrupt the sl2 form entry and expect a
            // skew-symmetry witness.
            let alg = build_current(&LieData::sl2(&field));
            let bad = alg.with_entry(
                0,
                1,
                1,
                CAElement::central(&field, CycloScalar::from_int(&field, 2)),
            );
            let corrupted = bad.check_axioms(cfg.samples.min(10), cfg.seed);
            report.check(
                "negative-control/corrupted-table-fails",
                !corrupted.passed,
                || "a corrupted product table still passed the axioms".to_string(),
            );
        }
    }
    Ok(report)
}

/// Lie structure of the loop algebra: Jacobi, antisymmetry, and bracket
/// well-definedness under image shifts.
fn suite_loop(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("loop");
    let field = cfg.field();
    let def = cfg.deformation()?;
    let algebras: Vec<(String, crate::conformal::ConformalAlgebra)> = match cfg.lie_data()? {
        Some(data) => vec![("custom".to_string(), build_current(&data))],
        None => vec![
            ("sl2".to_string(), build_current(&LieData::sl2(&field))),
            ("virasoro".to_string(), build_virasoro(&field)),
            (
                "novikov".to_string(),
                build_novikov(&NovikovData::one_dim(
                    &field,
                    CycloScalar::one(&field),
                    CycloScalar::one(&field),
                )),
            ),
        ],
    };
    for (name, alg) in algebras {
        let lc = LoopCtx::new(Arc::new(alg), def.clone())?;
        report.absorb(
            &format!("{}/jacobi", name),
            lc.jacobi_check(cfg.samples, cfg.seed),
        );
        report.absorb(
            &format!("{}/well-defined", name),
            lc.well_definedness_check(cfg.samples, cfg.seed),
        );
    }
    Ok(report)
}

/// Generating-field commutator formula on a window, for the rank-one
/// current algebra and the Virasoro conformal algebra.
fn suite_fields(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("fields");
    let field = cfg.field();
    let def = cfg.deformation()?;
    let window = Window::square(cfg.window.min(8));

    let heis = LoopCtx::new(
        Arc::new(build_current(&LieData::heisenberg(&field))),
        def.clone(),
    )?;
    report.absorb("heisenberg", heis.check_field_commutator("a", "a", window)?);

    let vir = LoopCtx::new(Arc::new(build_virasoro(&field)), def.clone())?;
    let vir_window = Window::square(cfg.window.min(6));
    report.absorb(
        "virasoro",
        vir.check_field_commutator("L", "L", vir_window)?,
    );
    Ok(report)
}

fn builtin_lie_matrix(field: &Arc<FieldCtx>) -> Vec<(&'static str, LieData)> {
    vec![
        ("sl2", LieData::sl2(field)),
        ("abelian", LieData::heisenberg(field)),
        ("gl2", LieData::gl2(field)),
    ]
}

fn suite_affine(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("affine");
    let field = cfg.field();
    let def = cfg.deformation()?;
    match cfg.lie_data()? {
        Some(data) => {
            report.absorb(
                "custom",
                verify_affine_iso(&data, &def, cfg.samples, cfg.seed),
            );
        }
        None => {
            for (name, data) in builtin_lie_matrix(&field) {
                report.absorb(name, verify_affine_iso(&data, &def, cfg.samples, cfg.seed));
            }
        }
    }
    Ok(report)
}

fn suite_virasoro(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("virasoro");
    let def = cfg.deformation()?;
    let outcome = verify_virasoro_iso(&def, cfg.samples, cfg.seed);
    report.note(format!(
        "determined sign conventions for p = {}: {}",
        cfg.p,
        outcome
            .passing
            .iter()
            .map(|(a, b)| format!("(s1={}, s2={})", a, b))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    report.absorb("iso", outcome.report);
    Ok(report)
}

fn suite_novikov(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("novikov");
    let field = cfg.field();
    let def = cfg.deformation()?;
    let data = match cfg.novikov_data()? {
        Some(d) => d,
        None => NovikovData::one_dim(&field, CycloScalar::one(&field), CycloScalar::one(&field)),
    };
    report.absorb(
        "agreement",
        verify_novikov_loop_agreement(&data, &def, cfg.samples, cfg.seed),
    );
    Ok(report)
}

/// Twisted current algebras: sl2 under the Chevalley involution with
/// p = x, and the rank-one sign flip with p = 1.
fn suite_twisted(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("twisted");
    let field = cfg.field();
    let one = CycloScalar::one(&field);
    let m1 = CycloScalar::from_int(&field, -1);
    let z = CycloScalar::zero(&field);

    let sl2 = LieData::sl2(&field);
    let chevalley = vec![
        vec![z.clone(), m1.clone(), z.clone()],
        vec![m1.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), m1.clone()],
    ];
    let def_x = Deformation::parse(&field, "x")?;
    let (_, rep) = twisted_affine_build(
        &sl2,
        &chevalley,
        2,
        &def_x,
        one.clone(),
        m1.clone(),
        cfg.samples,
        cfg.seed,
    )?;
    report.absorb("sl2-chevalley", rep);

    let heis = LieData::heisenberg(&field);
    let flip = vec![vec![m1.clone()]];
    let def_1 = Deformation::parse(&field, "1")?;
    let (_, rep) = twisted_affine_build(
        &heis,
        &flip,
        2,
        &def_1,
        m1.clone(),
        m1,
        cfg.samples,
        cfg.seed,
    )?;
    report.absorb("abelian-flip", rep);
    Ok(report)
}

/// Quotients by the kernel of chi_phi: the trivial case must return the
/// input, the order-2 cases must pass the axioms.
fn suite_quotient(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("quotient");
    let field = cfg.field();
    let one = CycloScalar::one(&field);
    let m1 = CycloScalar::from_int(&field, -1);
    let z = CycloScalar::zero(&field);

    // Trivial kernel: identity on the algebra.
    let sl2 = build_current(&LieData::sl2(&field));
    let trivial = GStructure::trivial(&field, 3);
    let (q, qg) = quotient_by_h(&sl2, &trivial)?;
    report.check("trivial-kernel/identity", q == sl2 && qg == trivial, || {
        "quotient by a trivial kernel changed the algebra".to_string()
    });

    // Chevalley involution with chi = chi_phi = 1: full order-2 kernel.
    let chevalley = vec![
        vec![z.clone(), m1.clone(), z.clone()],
        vec![m1.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), m1.clone()],
    ];
    let gs = GStructure::new(2, chevalley, one.clone(), one.clone())?;
    let (q, _) = quotient_by_h(&sl2, &gs)?;
    report.check("sl2-chevalley/coinvariant-rank", q.ngens() == 1, || {
        format!("expected 1 coinvariant generator, got {}", q.ngens())
    });
    report.absorb(
        "sl2-chevalley/axioms",
        q.check_axioms(cfg.samples, cfg.seed),
    );

    // Order-2 kernel acting trivially doubles the products.
    let heis = build_current(&LieData::heisenberg(&field));
    let doubling = GStructure::new(2, vec![vec![one.clone()]], one.clone(), one.clone())?;
    let (q, _) = quotient_by_h(&heis, &doubling)?;
    let doubled =
        q.nprod_gen(0, 0, 1) == CAElement::central(&field, CycloScalar::from_int(&field, 2));
    report.check("abelian-doubling/products", doubled, || {
        "the order-2 trivial action did not double the central product".to_string()
    });
    report.absorb(
        "abelian-doubling/axioms",
        q.check_axioms(cfg.samples, cfg.seed),
    );

    // Sign flip collapses the generator line; only the central line is left.
    let flip = GStructure::new(2, vec![vec![m1.clone()]], one.clone(), one)?;
    let (q, _) = quotient_by_h(&heis, &flip)?;
    report.check("abelian-flip/collapse", q.ngens() == 0, || {
        format!(
            "expected a fully collapsed quotient, got {} generators",
            q.ngens()
        )
    });
    report.absorb(
        "abelian-flip/axioms",
        q.check_axioms(cfg.samples.min(10), cfg.seed),
    );
    Ok(report)
}

fn suite_fock(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("fock");
    let field = cfg.field();
    let def = cfg.deformation()?;
    let level = parse_scalar(&field, &cfg.level)?;
    let fc = FockCtx::new(level, def);
    let vectors = basis_through_degree(&field, cfg.degree);
    report.check(
        "restricted",
        fc.restricted_check(&vectors, cfg.window.max(8) + i64::from(cfg.degree)),
        || "a sample vector is not eventually annihilated".to_string(),
    );
    report.absorb(
        "commutator",
        fc.verify_module_commutator(Window::square(cfg.window.min(8)), &vectors),
    );
    Ok(report)
}

/// The shipped verification matrix: every family crossed with the standard
/// deformations at the configured sample count.
fn suite_all(cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new("all");
    let sub = |suite: &str, p: &str, m: u64| -> SuiteConfig {
        SuiteConfig {
            suite: suite.into(),
            p: p.into(),
            m,
            algebra_json: None,
            algebra_label: None,
            ..cfg.clone()
        }
    };

    for p in ["1", "x", "x^2", "x^-1", "1 + x"] {
        report.absorb(&format!("phi/p={}", p), suite_phi(&sub("phi", p, 1))?);
    }
    for p in ["1", "x", "x^2"] {
        report.absorb(&format!("delta/p={}", p), suite_delta(&sub("delta", p, 3))?);
    }
    report.absorb("conformal", suite_conformal(&sub("conformal", "x", 1))?);
    for p in ["1", "x", "x^2", "1 + x"] {
        report.absorb(&format!("loop/p={}", p), suite_loop(&sub("loop", p, 1))?);
    }
    for p in ["1", "x"] {
        report.absorb(
            &format!("fields/p={}", p),
            suite_fields(&sub("fields", p, 1))?,
        );
    }
    for p in ["1", "x", "x^2", "x^-1", "1 + x"] {
        report.absorb(
            &format!("affine/p={}", p),
            suite_affine(&sub("affine", p, 1))?,
        );
        report.absorb(
            &format!("virasoro/p={}", p),
            suite_virasoro(&sub("virasoro", p, 1))?,
        );
    }
    for p in ["x", "x^2"] {
        report.absorb(
            &format!("novikov/p={}", p),
            suite_novikov(&sub("novikov", p, 1))?,
        );
    }
    report.absorb("twisted", suite_twisted(&sub("twisted", "x", 1))?);
    report.absorb("quotient", suite_quotient(&sub("quotient", "x", 1))?);
    for p in ["1", "x", "x^2"] {
        for level in ["0", "1", "-2", "1/2"] {
            let mut fcfg = sub("fock", p, 1);
            fcfg.level = level.into();
            report.absorb(&format!("fock/p={}/level={}", p, level), suite_fock(&fcfg)?);
        }
    }
    Ok(report)
}
