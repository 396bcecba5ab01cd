//! The loop Lie algebra of a conformal algebra: the space of elements
//! `a (x) f(x)` modulo the image of `d (x) 1 + 1 (x) p(x) d/dx`, with bracket
//!
//! ```text
//!     [a (x) f, b (x) g] = sum_i (a_i b) (x) ((p d/dx)^(i) f) g
//! ```
//!
//! and, when a group structure is present, the covariant version whose
//! bracket sums over twists `[R^g u, v]` and whose elements are classes
//! modulo `R^g u - u`, represented by symmetrized canonical forms.
//!
//! Canonical form: no derivative powers remain (they reduce through
//! `d a (x) f = - a (x) p f'`) and central tensors collapse to the scalar
//! residue of f / p.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::conformal::{check_g_structure, CAElement, ConformalAlgebra, GStructure};
use crate::deform::Deformation;
use crate::delta::Window;
use crate::error::{Error, Result};
use crate::field::CycloScalar;
use crate::report::Report;
use crate::rng::Rng;
use crate::series::{LaurentSeries, Prec};

/// Evaluation context: the conformal algebra, the deformation, and an
/// optional cyclic group structure (which must have injective chi_phi).
#[derive(Clone, Debug)]
pub struct LoopCtx {
    algebra: Arc<ConformalAlgebra>,
    def: Deformation,
    group: Option<GStructure>,
}

/// Canonical element: one series per generator plus a central scalar (the
/// coefficient of the class of `c (x) x^-1 p(x)`).
#[derive(Clone, Debug, PartialEq)]
pub struct LoopElement {
    parts: BTreeMap<usize, LaurentSeries>,
    central: CycloScalar,
}

/// Formal sum of tensors `element (x) series`, not yet reduced.
#[derive(Clone, Debug)]
pub struct RawSum {
    terms: Vec<(CAElement, LaurentSeries)>,
}

impl RawSum {
    pub fn new(terms: Vec<(CAElement, LaurentSeries)>) -> RawSum {
        RawSum { terms }
    }

    pub fn empty() -> RawSum {
        RawSum { terms: Vec::new() }
    }

    pub fn push(&mut self, elem: CAElement, f: LaurentSeries) {
        self.terms.push((elem, f));
    }

    pub fn extend(&mut self, other: RawSum) {
        self.terms.extend(other.terms);
    }

    pub fn terms(&self) -> &[(CAElement, LaurentSeries)] {
        &self.terms
    }
}

impl LoopCtx {
    pub fn new(algebra: Arc<ConformalAlgebra>, def: Deformation) -> Result<LoopCtx> {
        if algebra.ctx().order() != def.ctx().order() {
            return Err(Error::CtxMismatch(algebra.ctx().order(), def.ctx().order()));
        }
        Ok(LoopCtx {
            algebra,
            def,
            group: None,
        })
    }

    /// Covariant context. Requires chi_phi injective on the group (quotient
    /// upstream by ker chi_phi otherwise) and a group structure compatible
    /// with the algebra and deformation.
    pub fn with_group(
        algebra: Arc<ConformalAlgebra>,
        def: Deformation,
        group: GStructure,
    ) -> Result<LoopCtx> {
        let mut ctx = LoopCtx::new(algebra, def)?;
        if !group.chi_phi_injective() {
            return Err(Error::InvalidGroup(
                "chi_phi must be injective; quotient by its kernel first".into(),
            ));
        }
        let gcheck = check_g_structure(&ctx.algebra, &group, &ctx.def);
        if !gcheck.passed {
            return Err(Error::InvalidGroup(format!(
                "group structure checks failed: {}",
                gcheck
                    .checks
                    .iter()
                    .filter(|c| c.status != crate::report::Status::Pass)
                    .map(|c| c.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        ctx.group = Some(group);
        Ok(ctx)
    }

    pub fn algebra(&self) -> &ConformalAlgebra {
        &self.algebra
    }

    pub fn def(&self) -> &Deformation {
        &self.def
    }

    pub fn group(&self) -> Option<&GStructure> {
        self.group.as_ref()
    }

    pub fn zero(&self) -> LoopElement {
        LoopElement {
            parts: BTreeMap::new(),
            central: CycloScalar::zero(self.algebra.ctx()),
        }
    }

    /// Residue of g / p, the central normalization.
    fn central_residue(&self, g: &LaurentSeries) -> Result<CycloScalar> {
        if g.is_exactly_zero() {
            return Ok(CycloScalar::zero(self.algebra.ctx()));
        }
        let basis = g.lo().or(match g.prec() {
            Prec::Trunc(h) => Some(h),
            Prec::Exact => None,
        });
        let lo = basis.expect("nonzero or truncated series has a window edge");
        let target = (1 - lo).max(1);
        let pinv = self.def.p_inverse(target);
        g.mul(&pinv).residue()
    }

    /// Reduce a formal sum to the canonical form of the plain loop algebra:
    /// `d^k a (x) f` becomes `a (x) (-p d/dx)^k f` and central tensors
    /// become residues.
    pub fn reduce_plain(&self, raw: &RawSum) -> Result<LoopElement> {
        let field = self.algebra.ctx();
        let mut parts: BTreeMap<usize, LaurentSeries> = BTreeMap::new();
        let mut central = CycloScalar::zero(field);
        for (elem, f) in raw.terms() {
            for (dpow, gen, coeff) in elem.terms() {
                let mut series = f.clone();
                for _ in 0..dpow {
                    series = self.def.d_p_once(&series).neg();
                }
                series = series.scalar_mul(coeff);
                match parts.get_mut(&gen) {
                    Some(s) => *s = s.add(&series),
                    None => {
                        parts.insert(gen, series);
                    }
                }
            }
            if !elem.central_part().is_zero() {
                let c = self.central_residue(f)?;
                central = &central + &(&c * elem.central_part());
            }
        }
        parts.retain(|_, s| !s.is_exactly_zero());
        Ok(LoopElement { parts, central })
    }

    /// Reduce to the context's canonical form: the plain reduction, then the
    /// group average when a group is present (classes modulo `R^g u - u` are
    /// represented by their symmetrizations).
    pub fn reduce(&self, raw: &RawSum) -> Result<LoopElement> {
        let plain = self.reduce_plain(raw)?;
        match &self.group {
            None => Ok(plain),
            Some(_) => self.symmetrize(&plain),
        }
    }

    /// The twist `R^(sigma^k)` on a canonical element:
    /// `a (x) f  ->  chi^-k R_(sigma^k)(a) (x) f(chi_phi^-k x)`; the central
    /// scalar is fixed.
    pub fn hat_r(&self, k: u32, u: &LoopElement) -> Result<LoopElement> {
        let g = self
            .group
            .as_ref()
            .ok_or_else(|| Error::InvalidGroup("no group structure in context".into()))?;
        let k = k % g.order();
        let chi_inv = g.chi_pow(k).inv()?;
        let scale = g.chi_phi_pow(k).inv()?;
        let mat = g.matrix_pow(k);
        let mut parts: BTreeMap<usize, LaurentSeries> = BTreeMap::new();
        for (j, f) in &u.parts {
            let twisted = f.scale_x(&scale)?.scalar_mul(&chi_inv);
            for (i, row) in mat.iter().enumerate() {
                if row[*j].is_zero() {
                    continue;
                }
                let piece = twisted.scalar_mul(&row[*j]);
                match parts.get_mut(&i) {
                    Some(s) => *s = s.add(&piece),
                    None => {
                        parts.insert(i, piece);
                    }
                }
            }
        }
        parts.retain(|_, s| !s.is_exactly_zero());
        Ok(LoopElement {
            parts,
            central: u.central.clone(),
        })
    }

    /// Group average (1/|G|) sum_g R^g u.
    pub fn symmetrize(&self, u: &LoopElement) -> Result<LoopElement> {
        let g = self
            .group
            .as_ref()
            .ok_or_else(|| Error::InvalidGroup("no group structure in context".into()))?;
        let field = self.algebra.ctx();
        let mut acc = self.zero();
        for k in 0..g.order() {
            acc = acc.add(&self.hat_r(k, u)?);
        }
        let inv_order = CycloScalar::from_int(field, g.order() as i64).inv()?;
        Ok(acc.scalar_mul(&inv_order))
    }

    /// Bracket of formal sums, before reduction: the i-indexed products of
    /// the tensor factors weighted by divided derivative powers.
    pub fn bracket_raw(&self, u: &RawSum, v: &RawSum) -> RawSum {
        let mut out = RawSum::empty();
        for (eu, fu) in u.terms() {
            for (ev, fv) in v.terms() {
                let bound = self.algebra.support_bound() + eu.max_dpow() + ev.max_dpow();
                for i in 0..bound {
                    let prod = self.algebra.nprod_full(eu, ev, i);
                    if prod.is_zero() {
                        continue;
                    }
                    let series = self.def.d_p(fu, i).mul(fv);
                    out.push(prod, series);
                }
            }
        }
        out
    }

    /// Lie bracket on canonical elements. With a group present this is the
    /// covariant bracket `sum_g [R^g u, v]` on symmetrized representatives.
    pub fn bracket(&self, u: &LoopElement, v: &LoopElement) -> Result<LoopElement> {
        let vraw = self.to_raw(v);
        match &self.group {
            None => {
                let raw = self.bracket_raw(&self.to_raw(u), &vraw);
                self.reduce_plain(&raw)
            }
            Some(g) => {
                let mut raw = RawSum::empty();
                for k in 0..g.order() {
                    let tu = self.hat_r(k, u)?;
                    raw.extend(self.bracket_raw(&self.to_raw(&tu), &vraw));
                }
                self.reduce(&raw)
            }
        }
    }

    /// Canonical representative as a formal sum.
    pub fn to_raw(&self, u: &LoopElement) -> RawSum {
        let field = self.algebra.ctx();
        let mut out = RawSum::empty();
        for (gen, f) in &u.parts {
            out.push(CAElement::gen(field, *gen), f.clone());
        }
        if !u.central.is_zero() {
            out.push(
                CAElement::central(field, u.central.clone()),
                self.def.p_bar().clone(),
            );
        }
        out
    }

    /// The image of `d (x) 1 + 1 (x) p d/dx` on `elem (x) f`; reduces to
    /// zero, which makes bracket well-definedness testable.
    pub fn d_image(&self, elem: &CAElement, f: &LaurentSeries) -> RawSum {
        RawSum::new(vec![
            (elem.partial(), f.clone()),
            (elem.clone(), self.def.d_p_once(f)),
        ])
    }

    /// Mode `n` of the generating field of `name`: the class of
    /// `a (x) x^n p(x)`. The central name yields delta_{n,-1} central.
    pub fn field_mode(&self, name: &str, n: i64) -> Result<LoopElement> {
        let field = self.algebra.ctx();
        let elem = if self.algebra.central_name() == Some(name) {
            CAElement::central(field, CycloScalar::one(field))
        } else {
            CAElement::gen(field, self.algebra.gen_index(name)?)
        };
        let series = self.def.p().shift(n);
        self.reduce(&RawSum::new(vec![(elem, series)]))
    }

    /// Mode `n` attached to an arbitrary coefficient element.
    fn elem_mode(&self, elem: &CAElement, n: i64) -> Result<LoopElement> {
        let series = self.def.p().shift(n);
        self.reduce(&RawSum::new(vec![(elem.clone(), series)]))
    }

    /// Random canonical element with exact series parts, exponents within
    /// `lo..=hi`.
    pub fn random_element(&self, rng: &mut Rng, lo: i64, hi: i64) -> Result<LoopElement> {
        let field = self.algebra.ctx();
        let mut raw = RawSum::empty();
        if self.algebra.ngens() > 0 {
            let picks = rng.range_i64(1, 2);
            for _ in 0..picks {
                let gen = rng.range_i64(0, self.algebra.ngens() as i64 - 1) as usize;
                raw.push(CAElement::gen(field, gen), rng.series(field, lo, hi, 3));
            }
        }
        raw.push(
            CAElement::central(field, rng.rational(field)),
            self.def.p_bar().clone(),
        );
        self.reduce(&raw)
    }

    /// Render an element with generator names, for witnesses.
    pub fn render(&self, u: &LoopElement) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (gen, f) in &u.parts {
            parts.push(format!("{}:({})", self.algebra.gens()[*gen], f));
        }
        if !u.central.is_zero() {
            let mut s = String::new();
            let _ = write!(
                s,
                "{}:({})",
                self.algebra.central_name().unwrap_or("c"),
                u.central
            );
            parts.push(s);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Antisymmetry and the Jacobi identity on seeded random triples, plus
    /// bracket well-definedness under shifts by reducible image elements.
    pub fn jacobi_check(&self, samples: u32, seed: u64) -> Report {
        let mut report = Report::new("loop-jacobi");
        report.set_config("p", self.def.p().to_string());
        report.set_config("family", self.algebra.family().to_string());
        report.set_config("samples", samples.to_string());
        report.set_config("seed", seed.to_string());
        report.set_config(
            "group",
            self.group
                .as_ref()
                .map_or("none".to_string(), |g| format!("cyclic-{}", g.order())),
        );
        let mut rng = Rng::new(seed);
        for s in 0..samples {
            let result = (|| -> Result<()> {
                let u = self.random_element(&mut rng, -6, 6)?;
                let v = self.random_element(&mut rng, -6, 6)?;
                let w = self.random_element(&mut rng, -6, 6)?;

                let anti = self.bracket(&u, &v)?.add(&self.bracket(&v, &u)?);
                report.check(format!("antisymmetry/sample-{}", s), anti.is_zero(), || {
                    format!(
                        "u = {}, v = {}: [u,v] + [v,u] = {}",
                        self.render(&u),
                        self.render(&v),
                        self.render(&anti)
                    )
                });

                let t1 = self.bracket(&self.bracket(&u, &v)?, &w)?;
                let t2 = self.bracket(&self.bracket(&v, &w)?, &u)?;
                let t3 = self.bracket(&self.bracket(&w, &u)?, &v)?;
                let jac = t1.add(&t2).add(&t3);
                report.check(format!("jacobi/sample-{}", s), jac.is_zero(), || {
                    format!(
                        "u = {}, v = {}, w = {}: cyclic sum = {}",
                        self.render(&u),
                        self.render(&v),
                        self.render(&w),
                        self.render(&jac)
                    )
                });
                Ok(())
            })();
            if let Err(e) = result {
                report.error(format!("jacobi/sample-{}", s), e.to_string());
            }
        }
        report.finalize()
    }

    /// Bracket well-definedness: adding an image element to either argument
    /// does not change the bracket.
    pub fn well_definedness_check(&self, samples: u32, seed: u64) -> Report {
        let mut report = Report::new("loop-well-defined");
        report.set_config("p", self.def.p().to_string());
        report.set_config("samples", samples.to_string());
        report.set_config("seed", seed.to_string());
        let field = self.algebra.ctx();
        let mut rng = Rng::new(seed);
        for s in 0..samples {
            let result = (|| -> Result<()> {
                let u = self.random_element(&mut rng, -6, 6)?;
                let v = self.random_element(&mut rng, -6, 6)?;
                let elem = self.algebra.random_element(&mut rng, 2);
                let f = rng.series(field, -5, 5, 3);
                let image = self.d_image(&elem, &f);

                report.check(
                    format!("image-reduces-to-zero/sample-{}", s),
                    self.reduce(&image)?.is_zero(),
                    || format!("reduce(D({} (x) {})) != 0", self.algebra.render(&elem), f),
                );

                let mut shifted = self.to_raw(&u);
                shifted.extend(image.clone());
                let base = match &self.group {
                    None => {
                        self.reduce_plain(&self.bracket_raw(&self.to_raw(&u), &self.to_raw(&v)))?
                    }
                    Some(_) => self.bracket(&u, &v)?,
                };
                let moved = match &self.group {
                    None => self.reduce_plain(&self.bracket_raw(&shifted, &self.to_raw(&v)))?,
                    Some(g) => {
                        let mut raw = RawSum::empty();
                        let u_shift = self.reduce_plain(&shifted)?;
                        for k in 0..g.order() {
                            let tu = self.hat_r(k, &u_shift)?;
                            raw.extend(self.bracket_raw(&self.to_raw(&tu), &self.to_raw(&v)));
                        }
                        self.reduce(&raw)?
                    }
                };
                report.check(
                    format!("bracket-invariant/sample-{}", s),
                    base == moved,
                    || {
                        format!(
                            "u = {}, v = {}: bracket changed under an image shift: {} vs {}",
                            self.render(&u),
                            self.render(&v),
                            self.render(&base),
                            self.render(&moved)
                        )
                    },
                );
                Ok(())
            })();
            if let Err(e) = result {
                report.error(format!("well-defined/sample-{}", s), e.to_string());
            }
        }
        report.finalize()
    }

    /// Unit-amplitude delta coefficient at (m, s): the coefficient of
    /// z^(-m-1) w^s in (p(w) d/dw)^(i) [pbar(lambda^-1 z) delta(lambda w/z)],
    /// which is lambda^(m+1) [w^s] (p d/dw)^(i) (w^(m+1) pbar(w)).
    fn delta_weights(
        &self,
        lambda: &CycloScalar,
        i: u32,
        m: i64,
    ) -> Result<Vec<(i64, CycloScalar)>> {
        let scale = lambda.pow(m + 1)?;
        let base = self.def.p_bar().shift(m + 1);
        let series = self.def.d_p(&base, i);
        Ok(series.terms().map(|(s, c)| (s, c * &scale)).collect())
    }

    /// Windowed check of the generating-field commutator formula: for every
    /// (m, n) in the window, the bracket of modes must match the delta-sum
    /// side whose amplitudes carry the conformal products.
    pub fn check_field_commutator(&self, a: &str, b: &str, window: Window) -> Result<Report> {
        let mut report = Report::new("field-commutator");
        report.set_config("a", a);
        report.set_config("b", b);
        report.set_config("p", self.def.p().to_string());
        report.set_config(
            "window",
            format!(
                "[{},{}]x[{},{}]",
                window.m_lo, window.m_hi, window.n_lo, window.n_hi
            ),
        );
        let field = self.algebra.ctx();
        let ia = self.algebra.gen_index(a)?;
        let ib = self.algebra.gen_index(b)?;
        let bound = self.algebra.support_bound();

        for (m, n) in window.cells() {
            let lhs = self.bracket(&self.field_mode(a, m)?, &self.field_mode(b, n)?)?;

            let mut rhs = self.zero();
            match &self.group {
                None => {
                    for i in 0..bound {
                        let prod = self.algebra.nprod_gen(ia, ib, i);
                        if prod.is_zero() {
                            continue;
                        }
                        for (s, weight) in self.delta_weights(&CycloScalar::one(field), i, m)? {
                            let mode = self.elem_mode(&prod, n + s)?;
                            rhs = rhs.add(&mode.scalar_mul(&weight));
                        }
                    }
                }
                Some(g) => {
                    for k in 0..g.order() {
                        // Summand for g = sigma^k: products twisted by the
                        // inverse element, delta scaled by chi_phi(g).
                        let kinv = (g.order() - k) % g.order();
                        let ra = g.apply(kinv, &CAElement::gen(field, ia));
                        let lambda = g.chi_phi_pow(k);
                        for i in 0..bound {
                            let prod = self.algebra.nprod_full(&ra, &CAElement::gen(field, ib), i);
                            if prod.is_zero() {
                                continue;
                            }
                            for (s, weight) in self.delta_weights(&lambda, i, m)? {
                                let mode = self.elem_mode(&prod, n + s)?;
                                rhs = rhs.add(&mode.scalar_mul(&weight));
                            }
                        }
                    }
                }
            }

            report.check(format!("cell/m{}-n{}", m, n), lhs == rhs, || {
                format!(
                    "[{}({}), {}({})]: bracket side {} vs delta side {}",
                    a,
                    m,
                    b,
                    n,
                    self.render(&lhs),
                    self.render(&rhs)
                )
            });
        }
        Ok(report.finalize())
    }

    /// For finite groups the covariant algebra embeds into the plain loop
    /// algebra as the fixed subalgebra via `u -> sum_g R^g u`; verify the
    /// embedding intertwines the brackets on sampled pairs.
    pub fn fixed_subalgebra_compare(&self, lo: i64, hi: i64, samples: u32, seed: u64) -> Report {
        let mut report = Report::new("fixed-subalgebra");
        report.set_config("p", self.def.p().to_string());
        report.set_config("samples", samples.to_string());
        report.set_config("seed", seed.to_string());
        let Some(g) = self.group.clone() else {
            report.error("setup", "no group structure in context");
            return report.finalize();
        };
        report.set_config("group", format!("cyclic-{}", g.order()));
        let mut rng = Rng::new(seed);
        for s in 0..samples {
            let result = (|| -> Result<()> {
                let u = self.random_element(&mut rng, lo, hi)?;
                let v = self.random_element(&mut rng, lo, hi)?;
                // Sum over the group, not the average: the symmetrization map
                // intertwines the covariant bracket with the plain one.
                let mut su = self.zero();
                let mut sv = self.zero();
                for k in 0..g.order() {
                    su = su.add(&self.hat_r(k, &u)?);
                    sv = sv.add(&self.hat_r(k, &v)?);
                }
                let plain =
                    self.reduce_plain(&self.bracket_raw(&self.to_raw(&su), &self.to_raw(&sv)))?;

                let mut graw = RawSum::empty();
                for k in 0..g.order() {
                    let tu = self.hat_r(k, &u)?;
                    graw.extend(self.bracket_raw(&self.to_raw(&tu), &self.to_raw(&v)));
                }
                let gbracket = self.reduce_plain(&graw)?;
                let mut mapped = self.zero();
                for k in 0..g.order() {
                    mapped = mapped.add(&self.hat_r(k, &gbracket)?);
                }

                report.check(format!("intertwines/sample-{}", s), plain == mapped, || {
                    format!(
                        "u = {}, v = {}: [S(u),S(v)] = {} but S([u,v]_G) = {}",
                        self.render(&u),
                        self.render(&v),
                        self.render(&plain),
                        self.render(&mapped)
                    )
                });
                Ok(())
            })();
            if let Err(e) = result {
                report.error(format!("intertwines/sample-{}", s), e.to_string());
            }
        }
        report.finalize()
    }
}

impl LoopElement {
    pub fn is_zero(&self) -> bool {
        self.parts.is_empty() && self.central.is_zero()
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &LaurentSeries)> {
        self.parts.iter().map(|(g, f)| (*g, f))
    }

    pub fn part(&self, gen: usize) -> Option<&LaurentSeries> {
        self.parts.get(&gen)
    }

    pub fn central(&self) -> &CycloScalar {
        &self.central
    }

    pub fn add(&self, other: &LoopElement) -> LoopElement {
        let mut parts = self.parts.clone();
        for (g, f) in &other.parts {
            match parts.get_mut(g) {
                Some(s) => *s = s.add(f),
                None => {
                    parts.insert(*g, f.clone());
                }
            }
        }
        parts.retain(|_, s| !s.is_exactly_zero());
        LoopElement {
            parts,
            central: &self.central + &other.central,
        }
    }

    pub fn neg(&self) -> LoopElement {
        LoopElement {
            parts: self.parts.iter().map(|(g, f)| (*g, f.neg())).collect(),
            central: self.central.neg(),
        }
    }

    pub fn sub(&self, other: &LoopElement) -> LoopElement {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, s: &CycloScalar) -> LoopElement {
        let mut parts: BTreeMap<usize, LaurentSeries> = self
            .parts
            .iter()
            .map(|(g, f)| (*g, f.scalar_mul(s)))
            .collect();
        parts.retain(|_, f| !f.is_exactly_zero());
        LoopElement {
            parts,
            central: &self.central * s,
        }
    }

    /// Build a canonical element directly from per-generator series and a
    /// central scalar.
    pub fn from_parts(parts: Vec<(usize, LaurentSeries)>, central: CycloScalar) -> LoopElement {
        let mut map = BTreeMap::new();
        for (g, f) in parts {
            if !f.is_exactly_zero() {
                map.insert(g, f);
            }
        }
        LoopElement {
            parts: map,
            central,
        }
    }
}
