//! Concrete target Lie algebras and executable isomorphism checks.
//!
//! Three families are realized directly on Laurent-series coefficients: the
//! affine algebra of a Lie algebra with invariant form, the Virasoro algebra
//! of vector fields, and the affinization of a Novikov algebra. Each comes
//! with a verifier that brute-forces the corresponding loop-algebra bracket
//! on random elements and compares both sides of the structure map exactly.
//!
//! The Virasoro map needs empirical sign adjudication: the verifier sweeps
//! all four sign conventions for the vector-field and cocycle parts and
//! reports which survive; see `verify_virasoro_iso`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::conformal::{
    build_current, build_novikov, build_virasoro, GStructure, LieData, NovikovData,
};
use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};
use crate::loop_alg::{LoopCtx, LoopElement};
use crate::report::Report;
use crate::rng::Rng;
use crate::series::LaurentSeries;

/// Element of the affine algebra: one series per Lie-algebra basis vector
/// plus a central coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineElement {
    pub parts: BTreeMap<usize, LaurentSeries>,
    pub central: CycloScalar,
}

impl AffineElement {
    pub fn zero(ctx: &Arc<FieldCtx>) -> AffineElement {
        AffineElement {
            parts: BTreeMap::new(),
            central: CycloScalar::zero(ctx),
        }
    }

    pub fn from_parts(
        ctx: &Arc<FieldCtx>,
        parts: Vec<(usize, LaurentSeries)>,
        central: CycloScalar,
    ) -> AffineElement {
        let mut e = AffineElement::zero(ctx);
        for (i, f) in parts {
            if !f.is_exactly_zero() {
                let entry = e.parts.entry(i).or_insert_with(|| LaurentSeries::zero(ctx));
                *entry = entry.add(&f);
            }
        }
        e.central = central;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty() && self.central.is_zero()
    }

    fn add_part(&mut self, ctx: &Arc<FieldCtx>, i: usize, f: &LaurentSeries) {
        let entry = self
            .parts
            .entry(i)
            .or_insert_with(|| LaurentSeries::zero(ctx));
        *entry = entry.add(f);
        if entry.is_exactly_zero() {
            self.parts.remove(&i);
        }
    }
}

/// Affine bracket `[a (x) f, b (x) g] = [a,b] (x) fg + (a,b) Res(f' g) c`.
pub fn affine_bracket(g: &LieData, u: &AffineElement, v: &AffineElement) -> Result<AffineElement> {
    let ctx = g.ctx();
    let mut out = AffineElement::zero(ctx);
    for (i, f) in &u.parts {
        for (j, h) in &v.parts {
            let prod = f.mul(h);
            for (k, coeff) in g.bracket_of(*i, *j).iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                out.add_part(ctx, k, &prod.scalar_mul(coeff));
            }
            let pair = g.form_of(*i, *j);
            if !pair.is_zero() {
                let res = f.derivative().mul(h).residue()?;
                out.central = &out.central + &(&res * pair);
            }
        }
    }
    Ok(out)
}

/// Map a canonical loop element of the current algebra to the affine
/// algebra: identical coordinates; the canonical central class goes to the
/// affine central element.
pub fn current_to_affine(u: &LoopElement) -> AffineElement {
    AffineElement {
        parts: u.parts().map(|(g, f)| (g, f.clone())).collect(),
        central: u.central().clone(),
    }
}

/// Verify that the coordinate map from the loop algebra of the current
/// conformal algebra to the affine algebra intertwines the brackets, on
/// seeded random pairs, and that the central cocycle is Res(f' g)
/// independently of the deformation.
pub fn verify_affine_iso(g: &LieData, def: &Deformation, samples: u32, seed: u64) -> Report {
    let mut report = Report::new("affine-iso");
    report.set_config("p", def.p().to_string());
    report.set_config("dim", g.dim().to_string());
    report.set_config("samples", samples.to_string());
    report.set_config("seed", seed.to_string());
    let ctx = g.ctx().clone();
    let alg = Arc::new(build_current(g));
    let lc = match LoopCtx::new(alg, def.clone()) {
        Ok(lc) => lc,
        Err(e) => {
            report.error("setup", e.to_string());
            return report.finalize();
        }
    };
    let mut rng = Rng::new(seed);
    for s in 0..samples {
        let result = (|| -> Result<()> {
            let u = lc.random_element(&mut rng, -6, 6)?;
            let v = lc.random_element(&mut rng, -6, 6)?;
            let lhs = current_to_affine(&lc.bracket(&u, &v)?);
            let rhs = affine_bracket(g, &current_to_affine(&u), &current_to_affine(&v))?;
            report.check(format!("homomorphism/sample-{}", s), lhs == rhs, || {
                format!(
                    "u = {}, v = {}: loop image {:?} vs affine {:?}",
                    lc.render(&u),
                    lc.render(&v),
                    lhs,
                    rhs
                )
            });
            Ok(())
        })();
        if let Err(e) = result {
            report.error(format!("homomorphism/sample-{}", s), e.to_string());
        }
    }

    // Central cocycle on single tensors: the loop bracket central value is
    // Res(f' g) whatever p is.
    let mut rng = Rng::new(seed.wrapping_add(1));
    for s in 0..samples.min(20) {
        let result = (|| -> Result<()> {
            let i = rng.range_i64(0, g.dim() as i64 - 1) as usize;
            let j = rng.range_i64(0, g.dim() as i64 - 1) as usize;
            let f = rng.series(&ctx, -6, 6, 3);
            let h = rng.series(&ctx, -6, 6, 3);
            let u = LoopElement::from_parts(vec![(i, f.clone())], CycloScalar::zero(&ctx));
            let v = LoopElement::from_parts(vec![(j, h.clone())], CycloScalar::zero(&ctx));
            let br = lc.bracket(&u, &v)?;
            let expected = &f.derivative().mul(&h).residue()? * g.form_of(i, j);
            report.check(
                format!("central-cocycle/sample-{}", s),
                br.central() == &expected,
                || {
                    format!(
                        "f = {}, g = {}: central {} vs Res(f'g)(a,b) = {}",
                        f,
                        h,
                        br.central(),
                        expected
                    )
                },
            );
            Ok(())
        })();
        if let Err(e) = result {
            report.error(format!("central-cocycle/sample-{}", s), e.to_string());
        }
    }
    report.finalize()
}

/// Element F(x) d/dx + central of the Virasoro algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct VirasoroElement {
    pub coeff: LaurentSeries,
    pub central: CycloScalar,
}

impl VirasoroElement {
    pub fn new(coeff: LaurentSeries, central: CycloScalar) -> VirasoroElement {
        VirasoroElement { coeff, central }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_exactly_zero() && self.central.is_zero()
    }
}

/// `[F d/dx, G d/dx] = (F G' - G F') d/dx + (c/2) Res((d/dx)^(3) F) G`.
pub fn virasoro_bracket(u: &VirasoroElement, v: &VirasoroElement) -> Result<VirasoroElement> {
    let field = u.coeff.ctx().clone();
    let coeff = u
        .coeff
        .mul(&v.coeff.derivative())
        .sub(&v.coeff.mul(&u.coeff.derivative()));
    let half = CycloScalar::from_ratio(&field, 1, 2);
    let central = &u.coeff.derivative_divided(3).mul(&v.coeff).residue()? * &half;
    Ok(VirasoroElement { coeff, central })
}

/// The cocycle correction of the Virasoro structure map:
/// `(1/24) Res f (2 p'' - p^-1 (p')^2)`.
pub fn alpha_phi(def: &Deformation, f: &LaurentSeries) -> Result<CycloScalar> {
    let field = def.ctx().clone();
    let dp = def.p().derivative();
    let ddp = def.p().derivative().derivative();
    let two = CycloScalar::from_int(&field, 2);
    let mut weight = ddp.scalar_mul(&two);
    let sq = dp.mul(&dp);
    if !sq.is_exactly_zero() {
        // p^-1 truncated far enough for the residue of f * p^-1 (p')^2.
        let lo_f = f.lo().unwrap_or(0);
        let lo_sq = sq.lo().expect("nonzero");
        let target = (2 - lo_f - lo_sq).max(32);
        let pinv = def.p_inverse(target);
        weight = weight.sub(&pinv.mul(&sq));
    }
    let res = f.mul(&weight).residue()?;
    Ok(&res * &CycloScalar::from_ratio(&field, 1, 24))
}

/// Outcome of the Virasoro sign sweep: the report plus every sign
/// convention `(s1, s2)` under which the candidate map
/// `L (x) f -> s1 p f d/dx + (s2 alpha(f) + central) c` passed all samples.
pub struct VirasoroIsoOutcome {
    pub report: Report,
    pub passing: Vec<(i64, i64)>,
}

/// Sweep the four sign conventions of the Virasoro structure map on seeded
/// random pairs and record the surviving ones.
///
/// The vector-field part of the textbook assignment is an anti-homomorphism
/// under this bracket orientation, so the sweep is the adjudicating oracle
/// rather than a fixed constant; the passing conventions land in the report
/// notes and config.
pub fn verify_virasoro_iso(def: &Deformation, samples: u32, seed: u64) -> VirasoroIsoOutcome {
    let mut report = Report::new("virasoro-iso");
    report.set_config("p", def.p().to_string());
    report.set_config("samples", samples.to_string());
    report.set_config("seed", seed.to_string());
    let field = def.ctx().clone();
    let alg = Arc::new(build_virasoro(&field));
    let lc = match LoopCtx::new(alg, def.clone()) {
        Ok(lc) => lc,
        Err(e) => {
            report.error("setup", e.to_string());
            return VirasoroIsoOutcome {
                report: report.finalize(),
                passing: Vec::new(),
            };
        }
    };

    let apply_map =
        |u: &LoopElement, s1: &CycloScalar, s2: &CycloScalar| -> Result<VirasoroElement> {
            let f = u
                .part(0)
                .cloned()
                .unwrap_or_else(|| LaurentSeries::zero(&field));
            let coeff = def.p().mul(&f).scalar_mul(s1);
            let central = &(&alpha_phi(def, &f)? * s2) + u.central();
            Ok(VirasoroElement { coeff, central })
        };

    let mut passing = Vec::new();
    for (s1, s2) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
        let sc1 = CycloScalar::from_int(&field, s1);
        let sc2 = CycloScalar::from_int(&field, s2);
        let mut rng = Rng::new(seed);
        let mut all_ok = true;
        let mut first_witness = None;
        for _ in 0..samples {
            let outcome = (|| -> Result<bool> {
                let u = lc.random_element(&mut rng, -6, 6)?;
                let v = lc.random_element(&mut rng, -6, 6)?;
                let lhs = apply_map(&lc.bracket(&u, &v)?, &sc1, &sc2)?;
                let rhs =
                    virasoro_bracket(&apply_map(&u, &sc1, &sc2)?, &apply_map(&v, &sc1, &sc2)?)?;
                if lhs != rhs && first_witness.is_none() {
                    first_witness = Some(format!(
                        "u = {}, v = {}: image {:?} vs bracket {:?}",
                        lc.render(&u),
                        lc.render(&v),
                        lhs,
                        rhs
                    ));
                }
                Ok(lhs == rhs)
            })();
            match outcome {
                Ok(true) => {}
                Ok(false) => all_ok = false,
                Err(e) => {
                    all_ok = false;
                    if first_witness.is_none() {
                        first_witness = Some(e.to_string());
                    }
                }
            }
        }
        let name = format!("convention/s1={}-s2={}", s1, s2);
        if all_ok {
            report.pass(name);
            passing.push((s1, s2));
        } else {
            // A convention failing the sweep is expected data, not a suite
            // failure; record it as a note with the witness.
            report.note(format!(
                "convention (s1={}, s2={}) rejected: {}",
                s1,
                s2,
                first_witness.unwrap_or_default()
            ));
        }
    }

    report.check(
        "sign-sweep/some-convention-passes",
        !passing.is_empty(),
        || "no sign convention satisfies the homomorphism identity".to_string(),
    );
    report.set_config(
        "passing_conventions",
        passing
            .iter()
            .map(|(a, b)| format!("({},{})", a, b))
            .collect::<Vec<_>>()
            .join(" "),
    );
    report.note(
        "sign adjudication: the map L(x)f -> s1 p f d/dx + (s2 alpha(f) + central) c \
         was swept over all four sign conventions; the literal textbook \
         orientation (s1,s2) = (1,1) makes the vector-field part an \
         anti-homomorphism, and the sweep records the empirically valid choice."
            .to_string(),
    );
    VirasoroIsoOutcome {
        report: report.finalize(),
        passing,
    }
}

/// Element of the Novikov affinization.
#[derive(Clone, Debug, PartialEq)]
pub struct NovikovAffineElement {
    pub parts: BTreeMap<usize, LaurentSeries>,
    pub central: CycloScalar,
}

impl NovikovAffineElement {
    pub fn zero(ctx: &Arc<FieldCtx>) -> NovikovAffineElement {
        NovikovAffineElement {
            parts: BTreeMap::new(),
            central: CycloScalar::zero(ctx),
        }
    }

    pub fn from_parts(
        ctx: &Arc<FieldCtx>,
        parts: Vec<(usize, LaurentSeries)>,
        central: CycloScalar,
    ) -> NovikovAffineElement {
        let mut e = NovikovAffineElement::zero(ctx);
        for (i, f) in parts {
            if !f.is_exactly_zero() {
                e.parts.insert(i, f);
            }
        }
        e.central = central;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty() && self.central.is_zero()
    }
}

/// Central weight of the Novikov affinization bracket:
/// `(1/2) Res p^-1 ((p d/dx)^(3) f) g`; `use_p_inverse = false` drops the
/// p^-1 normalization (a deliberately wrong variant for negative controls).
pub(crate) fn novikov_central_weight(
    def: &Deformation,
    f: &LaurentSeries,
    g: &LaurentSeries,
    use_p_inverse: bool,
) -> Result<CycloScalar> {
    let field = def.ctx().clone();
    let third = def.d_p(f, 3);
    let combined = if use_p_inverse {
        if third.is_exactly_zero() {
            LaurentSeries::zero(&field)
        } else {
            let lo_t = third.lo().unwrap_or(0);
            let lo_g = g.lo().unwrap_or(0);
            let target = (2 - lo_t - lo_g).max(32);
            def.p_inverse(target).mul(&third).mul(g)
        }
    } else {
        third.mul(g)
    };
    let res = combined.residue()?;
    Ok(&res * &CycloScalar::from_ratio(&field, 1, 2))
}

/// Deformed Novikov affinization bracket:
/// `[a (x) f, b (x) g] = ab (x) (p f') g - ba (x) (p g') f
///  + (c/2) <a,b> Res p^-1 ((p d/dx)^(3) f) g`.
pub fn novikov_affine_bracket(
    a: &NovikovData,
    def: &Deformation,
    u: &NovikovAffineElement,
    v: &NovikovAffineElement,
) -> Result<NovikovAffineElement> {
    let ctx = a.ctx();
    let n = a.dim();
    let mut out = NovikovAffineElement::zero(ctx);
    let basis_vec = |i: usize| -> Vec<CycloScalar> {
        let mut v = vec![CycloScalar::zero(ctx); n];
        v[i] = CycloScalar::one(ctx);
        v
    };
    for (i, f) in &u.parts {
        for (j, g) in &v.parts {
            let (ei, ej) = (basis_vec(*i), basis_vec(*j));
            let ab = a.product_vec(&ei, &ej);
            let ba = a.product_vec(&ej, &ei);
            let left = def.d_p_once(f).mul(g);
            let right = def.d_p_once(g).mul(f);
            for k in 0..n {
                let mut term = LaurentSeries::zero(ctx);
                if !ab[k].is_zero() {
                    term = term.add(&left.scalar_mul(&ab[k]));
                }
                if !ba[k].is_zero() {
                    term = term.sub(&right.scalar_mul(&ba[k]));
                }
                if !term.is_exactly_zero() {
                    let entry = out
                        .parts
                        .entry(k)
                        .or_insert_with(|| LaurentSeries::zero(ctx));
                    *entry = entry.add(&term);
                }
            }
            let pair = a.form_of(*i, *j);
            if !pair.is_zero() {
                let w = novikov_central_weight(def, f, g, true)?;
                out.central = &out.central + &(&w * pair);
            }
        }
    }
    out.parts.retain(|_, s| !s.is_exactly_zero());
    Ok(out)
}

/// Verify that the coordinate map from the loop algebra of the Novikov
/// conformal algebra agrees with the direct affinization bracket, and that
/// the affinization satisfies antisymmetry and Jacobi on its own.
pub fn verify_novikov_loop_agreement(
    a: &NovikovData,
    def: &Deformation,
    samples: u32,
    seed: u64,
) -> Report {
    let mut report = Report::new("novikov-agreement");
    report.set_config("p", def.p().to_string());
    report.set_config("dim", a.dim().to_string());
    report.set_config("samples", samples.to_string());
    report.set_config("seed", seed.to_string());
    let ctx = a.ctx().clone();
    let alg = Arc::new(build_novikov(a));
    let lc = match LoopCtx::new(alg, def.clone()) {
        Ok(lc) => lc,
        Err(e) => {
            report.error("setup", e.to_string());
            return report.finalize();
        }
    };
    let to_target = |u: &LoopElement| -> NovikovAffineElement {
        NovikovAffineElement {
            parts: u.parts().map(|(g, f)| (g, f.clone())).collect(),
            central: u.central().clone(),
        }
    };
    let mut rng = Rng::new(seed);
    for s in 0..samples {
        let result = (|| -> Result<()> {
            let u = lc.random_element(&mut rng, -6, 6)?;
            let v = lc.random_element(&mut rng, -6, 6)?;
            let w = lc.random_element(&mut rng, -6, 6)?;
            let lhs = to_target(&lc.bracket(&u, &v)?);
            let rhs = novikov_affine_bracket(a, def, &to_target(&u), &to_target(&v))?;
            report.check(format!("agreement/sample-{}", s), lhs == rhs, || {
                format!(
                    "u = {}, v = {}: loop image {:?} vs affinization {:?}",
                    lc.render(&u),
                    lc.render(&v),
                    lhs,
                    rhs
                )
            });

            // Lie axioms of the affinization itself.
            let (tu, tv, tw) = (to_target(&u), to_target(&v), to_target(&w));
            let anti = {
                let x = novikov_affine_bracket(a, def, &tu, &tv)?;
                let y = novikov_affine_bracket(a, def, &tv, &tu)?;
                add_novikov(&ctx, &x, &y)
            };
            report.check(format!("antisymmetry/sample-{}", s), anti.is_zero(), || {
                format!(
                    "u = {}, v = {}: [u,v]+[v,u] = {:?}",
                    lc.render(&u),
                    lc.render(&v),
                    anti
                )
            });
            let t1 =
                novikov_affine_bracket(a, def, &novikov_affine_bracket(a, def, &tu, &tv)?, &tw)?;
            let t2 =
                novikov_affine_bracket(a, def, &novikov_affine_bracket(a, def, &tv, &tw)?, &tu)?;
            let t3 =
                novikov_affine_bracket(a, def, &novikov_affine_bracket(a, def, &tw, &tu)?, &tv)?;
            let jac = add_novikov(&ctx, &add_novikov(&ctx, &t1, &t2), &t3);
            report.check(format!("jacobi/sample-{}", s), jac.is_zero(), || {
                format!("cyclic sum = {:?}", jac)
            });
            Ok(())
        })();
        if let Err(e) = result {
            report.error(format!("agreement/sample-{}", s), e.to_string());
        }
    }
    report.finalize()
}

fn add_novikov(
    ctx: &Arc<FieldCtx>,
    x: &NovikovAffineElement,
    y: &NovikovAffineElement,
) -> NovikovAffineElement {
    let mut out = x.clone();
    for (i, f) in &y.parts {
        let entry = out
            .parts
            .entry(*i)
            .or_insert_with(|| LaurentSeries::zero(ctx));
        *entry = entry.add(f);
    }
    out.parts.retain(|_, s| !s.is_exactly_zero());
    out.central = &out.central + &y.central;
    out
}

/// Build the covariant loop context of a current algebra twisted by a Lie
/// algebra automorphism, and verify it: automorphism and character
/// compatibility first, then the Lie structure and the fixed-subalgebra
/// embedding.
pub fn twisted_affine_build(
    g: &LieData,
    sigma: &[Vec<CycloScalar>],
    order: u32,
    def: &Deformation,
    chi: CycloScalar,
    chi_phi: CycloScalar,
    samples: u32,
    seed: u64,
) -> Result<(LoopCtx, Report)> {
    let violations = g.automorphism_violations(sigma);
    if !violations.is_empty() {
        return Err(Error::InvalidGroup(violations.join("; ")));
    }
    let gs = GStructure::for_current(order, sigma, chi, chi_phi)?;
    let alg = Arc::new(build_current(g));
    let lc = LoopCtx::with_group(alg, def.clone(), gs)?;

    let mut report = Report::new("twisted-affine");
    report.set_config("p", def.p().to_string());
    report.set_config("order", order.to_string());
    report.set_config("samples", samples.to_string());
    report.set_config("seed", seed.to_string());
    report.absorb("jacobi", lc.jacobi_check(samples, seed));
    report.absorb(
        "fixed-subalgebra",
        lc.fixed_subalgebra_compare(-4, 4, samples, seed),
    );
    Ok((lc, report.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_series;

    fn qq() -> Arc<FieldCtx> {
        FieldCtx::rationals()
    }

    #[test]
    fn affine_bracket_sl2_example() {
        let ctx = qq();
        let g = LieData::sl2(&ctx);
        // [e (x) x^-1, f (x) x] = h (x) 1 - (e,f) c.
        let u = AffineElement::from_parts(
            &ctx,
            vec![(0, parse_series(&ctx, "x^-1").unwrap())],
            CycloScalar::zero(&ctx),
        );
        let v = AffineElement::from_parts(
            &ctx,
            vec![(1, LaurentSeries::x(&ctx))],
            CycloScalar::zero(&ctx),
        );
        let br = affine_bracket(&g, &u, &v).unwrap();
        assert_eq!(br.parts.get(&2), Some(&LaurentSeries::one(&ctx)));
        assert_eq!(br.central, CycloScalar::from_int(&ctx, -1));
    }

    #[test]
    fn affine_bracket_antisymmetry_edge_cases() {
        let ctx = qq();
        let g = LieData::heisenberg(&ctx);
        let f = parse_series(&ctx, "2 - x^3 + x^-2").unwrap();
        let u = AffineElement::from_parts(&ctx, vec![(0, f.clone())], CycloScalar::zero(&ctx));
        // [a (x) f, a (x) f] = 0 because Res(f' f) = 0.
        let br = affine_bracket(&g, &u, &u).unwrap();
        assert!(br.is_zero());
        // [a (x) 1, a (x) g] = 0 because the derivative kills constants.
        let one = AffineElement::from_parts(
            &ctx,
            vec![(0, LaurentSeries::one(&ctx))],
            CycloScalar::zero(&ctx),
        );
        let v = AffineElement::from_parts(
            &ctx,
            vec![(0, parse_series(&ctx, "x^-3 + 5*x^2").unwrap())],
            CycloScalar::zero(&ctx),
        );
        assert!(affine_bracket(&g, &one, &v).unwrap().is_zero());
    }

    #[test]
    fn affine_iso_passes_for_sample_matrix() {
        let ctx = qq();
        for p in ["1", "x", "x^2", "x^-1", "1 + x"] {
            let def = Deformation::parse(&ctx, p).unwrap();
            for g in [LieData::sl2(&ctx), LieData::heisenberg(&ctx)] {
                let report = verify_affine_iso(&g, &def, 10, 5);
                assert!(report.passed, "p = {}: {}", p, report.to_json());
            }
        }
    }

    #[test]
    fn affine_iso_detects_dropped_central() {
        // Dropping the central coordinate from the map breaks the
        // homomorphism identity on a concrete pair.
        let ctx = qq();
        let g = LieData::heisenberg(&ctx);
        let def = Deformation::parse(&ctx, "x").unwrap();
        let alg = Arc::new(build_current(&g));
        let lc = LoopCtx::new(alg, def).unwrap();
        let u = LoopElement::from_parts(
            vec![(0, parse_series(&ctx, "x^-1").unwrap())],
            CycloScalar::zero(&ctx),
        );
        let v = LoopElement::from_parts(vec![(0, LaurentSeries::x(&ctx))], CycloScalar::zero(&ctx));
        let br = lc.bracket(&u, &v).unwrap();
        let broken = AffineElement {
            parts: br.parts().map(|(g, f)| (g, f.clone())).collect(),
            central: CycloScalar::zero(&ctx), // drop the central value
        };
        let honest = affine_bracket(&g, &current_to_affine(&u), &current_to_affine(&v)).unwrap();
        assert_ne!(broken, honest);
    }

    #[test]
    fn virasoro_bracket_examples() {
        let ctx = qq();
        let zero = CycloScalar::zero(&ctx);
        // [x d/dx, x^2 d/dx] = x^2 d/dx.
        let u = VirasoroElement::new(LaurentSeries::x(&ctx), zero.clone());
        let v = VirasoroElement::new(parse_series(&ctx, "x^2").unwrap(), zero.clone());
        let br = virasoro_bracket(&u, &v).unwrap();
        assert_eq!(br.coeff, parse_series(&ctx, "x^2").unwrap());
        assert!(br.central.is_zero());

        // [F d/dx, F d/dx] = 0.
        let f = VirasoroElement::new(parse_series(&ctx, "x^-1 + 3*x^2").unwrap(), zero.clone());
        let self_br = virasoro_bracket(&f, &f).unwrap();
        assert!(self_br.is_zero());

        // [x^2 d/dx, x^-1 d/dx]: vector-field part -3 and no central term.
        let a = VirasoroElement::new(parse_series(&ctx, "x^2").unwrap(), zero.clone());
        let b = VirasoroElement::new(parse_series(&ctx, "x^-1").unwrap(), zero);
        let br2 = virasoro_bracket(&a, &b).unwrap();
        assert_eq!(br2.coeff, parse_series(&ctx, "-3").unwrap());
        assert!(br2.central.is_zero());

        // The central term of [L_2, L_-2] in vector-field coordinates
        // F = x^3, G = x^-1: (1/2) Res((d/dx)^(3) x^3 x^-1) = 1/2.
        let l2 = VirasoroElement::new(parse_series(&ctx, "x^3").unwrap(), CycloScalar::zero(&ctx));
        let lm2 =
            VirasoroElement::new(parse_series(&ctx, "x^-1").unwrap(), CycloScalar::zero(&ctx));
        let br3 = virasoro_bracket(&l2, &lm2).unwrap();
        assert_eq!(br3.central, CycloScalar::from_ratio(&ctx, 1, 2));
    }

    #[test]
    fn virasoro_bracket_satisfies_jacobi() {
        let ctx = qq();
        let mut rng = crate::rng::Rng::new(13);
        for _ in 0..25 {
            let elem = |rng: &mut crate::rng::Rng| {
                VirasoroElement::new(rng.series(&ctx, -5, 5, 3), rng.rational(&ctx))
            };
            let (u, v, w) = (elem(&mut rng), elem(&mut rng), elem(&mut rng));
            let anti = {
                let a = virasoro_bracket(&u, &v).unwrap();
                let b = virasoro_bracket(&v, &u).unwrap();
                VirasoroElement::new(a.coeff.add(&b.coeff), &a.central + &b.central)
            };
            assert!(anti.is_zero());
            let t1 = virasoro_bracket(&virasoro_bracket(&u, &v).unwrap(), &w).unwrap();
            let t2 = virasoro_bracket(&virasoro_bracket(&v, &w).unwrap(), &u).unwrap();
            let t3 = virasoro_bracket(&virasoro_bracket(&w, &u).unwrap(), &v).unwrap();
            let coeff = t1.coeff.add(&t2.coeff).add(&t3.coeff);
            let central = &(&t1.central + &t2.central) + &t3.central;
            assert!(coeff.is_exactly_zero() && central.is_zero());
        }
    }

    #[test]
    fn alpha_phi_examples() {
        let ctx = qq();
        // p = 1: both derivative terms vanish identically.
        let p1 = Deformation::parse(&ctx, "1").unwrap();
        for f in ["1", "x^-1", "2 + x^5 - x^-3"] {
            let val = alpha_phi(&p1, &parse_series(&ctx, f).unwrap()).unwrap();
            assert!(val.is_zero(), "f = {}", f);
        }
        // p = x: alpha(1) = -1/24, alpha(x^2) = 0.
        let px = Deformation::parse(&ctx, "x").unwrap();
        assert_eq!(
            alpha_phi(&px, &LaurentSeries::one(&ctx)).unwrap(),
            CycloScalar::from_ratio(&ctx, -1, 24)
        );
        assert!(alpha_phi(&px, &parse_series(&ctx, "x^2").unwrap())
            .unwrap()
            .is_zero());
        // Linearity in f.
        let f = parse_series(&ctx, "3 - x^2").unwrap();
        let g = parse_series(&ctx, "x^-2 + 7").unwrap();
        let p = Deformation::parse(&ctx, "x^2 + x").unwrap();
        let lhs = alpha_phi(&p, &f.add(&g)).unwrap();
        let rhs = &alpha_phi(&p, &f).unwrap() + &alpha_phi(&p, &g).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn virasoro_iso_sweep_fixes_the_convention() {
        let ctx = qq();
        let mut shared: Option<Vec<(i64, i64)>> = None;
        for p in ["1", "x", "x^2", "1 + x"] {
            let def = Deformation::parse(&ctx, p).unwrap();
            let outcome = verify_virasoro_iso(&def, 12, 5);
            assert!(
                outcome.report.passed,
                "p = {}: {}",
                p,
                outcome.report.to_json()
            );
            assert!(!outcome.passing.is_empty(), "p = {}", p);
            shared = Some(match shared {
                None => outcome.passing.clone(),
                Some(prev) => prev
                    .into_iter()
                    .filter(|c| outcome.passing.contains(c))
                    .collect(),
            });
        }
        let shared = shared.unwrap();
        // One convention works for every deformation: the sign-flipped
        // vector field with the plain cocycle.
        assert!(shared.contains(&(-1, 1)), "shared = {:?}", shared);
        // For p = x the cocycle is nontrivial and the convention is unique.
        // (For p = 1 or p = x^2 the cocycle weight 2p'' - p^-1 (p')^2
        // vanishes identically, leaving the cocycle sign unconstrained.)
        let def = Deformation::parse(&ctx, "x").unwrap();
        let outcome = verify_virasoro_iso(&def, 20, 5);
        assert_eq!(outcome.passing, vec![(-1, 1)]);
    }

    #[test]
    fn novikov_affine_bracket_examples() {
        let ctx = qq();
        // One-dimensional a o a = a, zero form, p = 1:
        // [a (x) x, a (x) 1] = a (x) 1.
        let a = NovikovData::one_dim(&ctx, CycloScalar::one(&ctx), CycloScalar::zero(&ctx));
        let def = Deformation::parse(&ctx, "1").unwrap();
        let u = NovikovAffineElement::from_parts(
            &ctx,
            vec![(0, LaurentSeries::x(&ctx))],
            CycloScalar::zero(&ctx),
        );
        let v = NovikovAffineElement::from_parts(
            &ctx,
            vec![(0, LaurentSeries::one(&ctx))],
            CycloScalar::zero(&ctx),
        );
        let br = novikov_affine_bracket(&a, &def, &u, &v).unwrap();
        assert_eq!(br.parts.get(&0), Some(&LaurentSeries::one(&ctx)));
        assert!(br.central.is_zero());

        // Self-bracket vanishes.
        let w = NovikovAffineElement::from_parts(
            &ctx,
            vec![(0, parse_series(&ctx, "x^-2 + 3*x").unwrap())],
            CycloScalar::zero(&ctx),
        );
        assert!(novikov_affine_bracket(&a, &def, &w, &w).unwrap().is_zero());

        // Zero multiplication with nonzero form: the bracket is purely
        // central.
        let b = NovikovData::one_dim(&ctx, CycloScalar::zero(&ctx), CycloScalar::one(&ctx));
        let br2 = novikov_affine_bracket(
            &b,
            &def,
            &NovikovAffineElement::from_parts(
                &ctx,
                vec![(0, parse_series(&ctx, "x^3").unwrap())],
                CycloScalar::zero(&ctx),
            ),
            &NovikovAffineElement::from_parts(
                &ctx,
                vec![(0, parse_series(&ctx, "x^-1").unwrap())],
                CycloScalar::zero(&ctx),
            ),
        )
        .unwrap();
        assert!(br2.parts.is_empty());
        // (1/2) Res((d/dx)^(3) x^3 * x^-1) = 1/2.
        assert_eq!(br2.central, CycloScalar::from_ratio(&ctx, 1, 2));
    }

    #[test]
    fn novikov_agreement_passes_and_corrupted_normalization_fails() {
        let ctx = qq();
        let a = NovikovData::one_dim(&ctx, CycloScalar::one(&ctx), CycloScalar::one(&ctx));
        for p in ["x", "x^2"] {
            let def = Deformation::parse(&ctx, p).unwrap();
            let report = verify_novikov_loop_agreement(&a, &def, 10, 5);
            assert!(report.passed, "p = {}: {}", p, report.to_json());
        }
        // Omitting the p^-1 normalization changes the central weight for a
        // deformation with nonconstant p.
        let def = Deformation::parse(&ctx, "x").unwrap();
        let f = parse_series(&ctx, "x^-2").unwrap();
        let g = parse_series(&ctx, "x^2").unwrap();
        let honest = novikov_central_weight(&def, &f, &g, true).unwrap();
        let corrupted = novikov_central_weight(&def, &f, &g, false).unwrap();
        assert_ne!(honest, corrupted);
    }

    #[test]
    fn twisted_affine_chevalley_example() {
        let ctx = qq();
        let g = LieData::sl2(&ctx);
        let m1 = CycloScalar::from_int(&ctx, -1);
        let z = CycloScalar::zero(&ctx);
        let chevalley = vec![
            vec![z.clone(), m1.clone(), z.clone()],
            vec![m1.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), m1.clone()],
        ];
        let def = Deformation::parse(&ctx, "x").unwrap();
        let (lc, report) =
            twisted_affine_build(&g, &chevalley, 2, &def, CycloScalar::one(&ctx), m1, 8, 5)
                .unwrap();
        assert!(report.passed, "{}", report.to_json());
        assert!(lc.group().is_some());
    }

    #[test]
    fn twisted_affine_order_one_is_untwisted() {
        let ctx = qq();
        let g = LieData::heisenberg(&ctx);
        let id = vec![vec![CycloScalar::one(&ctx)]];
        let def = Deformation::parse(&ctx, "1").unwrap();
        let (lc, report) = twisted_affine_build(
            &g,
            &id,
            1,
            &def,
            CycloScalar::one(&ctx),
            CycloScalar::one(&ctx),
            8,
            5,
        )
        .unwrap();
        assert!(report.passed, "{}", report.to_json());
        // The twisted bracket with the trivial group equals the plain one.
        let plain = LoopCtx::new(Arc::new(build_current(&g)), def).unwrap();
        let mut rng = Rng::new(3);
        let u = plain.random_element(&mut rng, -4, 4).unwrap();
        let v = plain.random_element(&mut rng, -4, 4).unwrap();
        assert_eq!(lc.bracket(&u, &v).unwrap(), plain.bracket(&u, &v).unwrap());
    }

    #[test]
    fn twisted_affine_abelian_sign_flip() {
        // Abelian rank one with sigma = -1, p = 1, chi = chi_phi of order 2.
        let ctx = qq();
        let g = LieData::heisenberg(&ctx);
        let m1 = CycloScalar::from_int(&ctx, -1);
        let sigma = vec![vec![m1.clone()]];
        let def = Deformation::parse(&ctx, "1").unwrap();
        let (_lc, report) =
            twisted_affine_build(&g, &sigma, 2, &def, m1.clone(), m1, 8, 5).unwrap();
        assert!(report.passed, "{}", report.to_json());
    }

    #[test]
    fn twisted_affine_rejects_non_automorphism() {
        let ctx = qq();
        let g = LieData::sl2(&ctx);
        // Swapping e and f without negating does not preserve the bracket.
        let z = CycloScalar::zero(&ctx);
        let one = CycloScalar::one(&ctx);
        let bad = vec![
            vec![z.clone(), one.clone(), z.clone()],
            vec![one.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), one.clone()],
        ];
        let def = Deformation::parse(&ctx, "x").unwrap();
        let err = twisted_affine_build(
            &g,
            &bad,
            2,
            &def,
            CycloScalar::one(&ctx),
            CycloScalar::from_int(&ctx, -1),
            4,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidGroup(_)));
    }
}
