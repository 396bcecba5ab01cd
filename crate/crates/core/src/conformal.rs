//! Conformal algebras with finitely many generators: free modules over the
//! one-variable polynomial algebra in `d` (the translation generator) with an
//! optional central element, N-indexed products stored on generator pairs,
//! cyclic-group actions, and quotients by the kernel subgroup of chi_phi.
//!
//! The generator table determines everything else: products of derivative
//! shifts follow from the left rule `(d a)_n b = -n a_{n-1} b` and the right
//! rule `a_n (d b) = d(a_n b) + n a_{n-1} b`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Deserialize;

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};
use crate::parse::parse_scalar;
use crate::report::Report;
use crate::rng::Rng;

/// Element of a conformal algebra in free-module normal form:
/// sum of `coeff * d^k gen_i` plus a central scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct CAElement {
    ctx: Arc<FieldCtx>,
    terms: BTreeMap<(u32, usize), CycloScalar>,
    central: CycloScalar,
}

impl CAElement {
    pub fn zero(ctx: &Arc<FieldCtx>) -> CAElement {
        CAElement {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
            central: CycloScalar::zero(ctx),
        }
    }

    pub fn gen(ctx: &Arc<FieldCtx>, idx: usize) -> CAElement {
        let mut e = CAElement::zero(ctx);
        e.terms.insert((0, idx), CycloScalar::one(ctx));
        e
    }

    pub fn central(ctx: &Arc<FieldCtx>, coeff: CycloScalar) -> CAElement {
        let mut e = CAElement::zero(ctx);
        e.central = coeff;
        e
    }

    pub fn from_gen_coeffs(ctx: &Arc<FieldCtx>, coeffs: &[CycloScalar]) -> CAElement {
        let mut e = CAElement::zero(ctx);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                e.terms.insert((0, i), c.clone());
            }
        }
        e
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.central.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, usize, &CycloScalar)> {
        self.terms.iter().map(|((k, i), c)| (*k, *i, c))
    }

    pub fn central_part(&self) -> &CycloScalar {
        &self.central
    }

    pub fn max_dpow(&self) -> u32 {
        self.terms.keys().map(|(k, _)| *k).max().unwrap_or(0)
    }

    /// Coefficient vector over generators at a fixed derivative power.
    pub fn gen_vector(&self, dpow: u32, ngens: usize) -> Vec<CycloScalar> {
        let mut v = vec![CycloScalar::zero(&self.ctx); ngens];
        for ((k, i), c) in &self.terms {
            if *k == dpow {
                v[*i] = c.clone();
            }
        }
        v
    }

    pub fn add(&self, other: &CAElement) -> CAElement {
        let mut out = self.clone();
        for ((k, i), c) in &other.terms {
            let e = out
                .terms
                .entry((*k, *i))
                .or_insert_with(|| CycloScalar::zero(&self.ctx));
            *e = &*e + c;
        }
        out.central = &out.central + &other.central;
        out.prune();
        out
    }

    pub fn sub(&self, other: &CAElement) -> CAElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CAElement {
        CAElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
            central: self.central.neg(),
        }
    }

    pub fn scalar_mul(&self, s: &CycloScalar) -> CAElement {
        let mut out = CAElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
            central: &self.central * s,
        };
        out.prune();
        out
    }

    /// Apply the translation generator d; central terms are killed.
    pub fn partial(&self) -> CAElement {
        CAElement {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|((k, i), c)| ((*k + 1, *i), c.clone()))
                .collect(),
            central: CycloScalar::zero(&self.ctx),
        }
    }

    /// Divided power d^(j) = d^j / j!.
    pub fn partial_divided(&self, j: u32) -> CAElement {
        let mut out = self.clone();
        for _ in 0..j {
            out = out.partial();
        }
        out.scalar_mul(&crate::series::inv_factorial(&self.ctx, j))
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }
}

/// A finitely generated conformal algebra: generator names, optional central
/// element, and the n-product table on generator pairs.
#[derive(Clone, Debug)]
pub struct ConformalAlgebra {
    ctx: Arc<FieldCtx>,
    gens: Vec<String>,
    central_name: Option<String>,
    nprod: BTreeMap<(usize, usize, u32), CAElement>,
    family: String,
}

impl PartialEq for ConformalAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.order() == other.ctx.order()
            && self.gens == other.gens
            && self.central_name == other.central_name
            && self.nprod == other.nprod
    }
}

impl ConformalAlgebra {
    pub fn new(
        ctx: &Arc<FieldCtx>,
        gens: Vec<String>,
        central_name: Option<String>,
        family: &str,
    ) -> ConformalAlgebra {
        ConformalAlgebra {
            ctx: ctx.clone(),
            gens,
            central_name,
            nprod: BTreeMap::new(),
            family: family.to_string(),
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn central_name(&self) -> Option<&str> {
        self.central_name.as_deref()
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn gen_index(&self, name: &str) -> Result<usize> {
        self.gens
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn set_entry(&mut self, a: usize, b: usize, n: u32, elem: CAElement) {
        if elem.is_zero() {
            self.nprod.remove(&(a, b, n));
        } else {
            self.nprod.insert((a, b, n), elem);
        }
    }

    /// Copy with one table entry replaced; used for negative controls.
    pub fn with_entry(&self, a: usize, b: usize, n: u32, elem: CAElement) -> ConformalAlgebra {
        let mut out = self.clone();
        out.family = format!("{}(modified)", self.family);
        out.set_entry(a, b, n, elem);
        out
    }

    /// Table lookup: gen_a (n) gen_b, zero off the stored support.
    pub fn nprod_gen(&self, a: usize, b: usize, n: u32) -> CAElement {
        self.nprod
            .get(&(a, b, n))
            .cloned()
            .unwrap_or_else(|| CAElement::zero(&self.ctx))
    }

    /// Exclusive upper bound on stored product indices.
    pub fn support_bound(&self) -> u32 {
        self.nprod.keys().map(|(_, _, n)| n + 1).max().unwrap_or(0)
    }

    /// Full bilinear n-product on elements, using the left rule for
    /// derivative powers of the first argument and the right rule for the
    /// second. Central components never produce anything.
    pub fn nprod_full(&self, u: &CAElement, v: &CAElement, n: u32) -> CAElement {
        let mut acc = CAElement::zero(&self.ctx);
        for (ka, ia, ca) in u.terms() {
            for (kb, ib, cb) in v.terms() {
                let base = self.nprod_shifted(ia, ka, ib, kb, n);
                if !base.is_zero() {
                    acc = acc.add(&base.scalar_mul(&(ca * cb)));
                }
            }
        }
        acc
    }

    /// (d^ka gen_ia)_n (d^kb gen_ib).
    fn nprod_shifted(&self, ia: usize, ka: u32, ib: usize, kb: u32, n: u32) -> CAElement {
        // Left rule iterated: (d^k a)_n x = (-1)^k n (n-1) ... (n-k+1) a_{n-k} x.
        if n < ka {
            return CAElement::zero(&self.ctx);
        }
        let mut fall = 1i64;
        for i in 0..ka {
            fall *= (n - i) as i64;
        }
        if ka % 2 == 1 {
            fall = -fall;
        }
        let scale = CycloScalar::from_int(&self.ctx, fall);
        self.right_rule(ia, ib, (n - ka) as i64, kb)
            .scalar_mul(&scale)
    }

    /// a_m (d^l b) by the right rule, recursing on l. Negative m is zero.
    fn right_rule(&self, ia: usize, ib: usize, m: i64, l: u32) -> CAElement {
        if m < 0 {
            return CAElement::zero(&self.ctx);
        }
        if l == 0 {
            return self.nprod_gen(ia, ib, m as u32);
        }
        let head = self.right_rule(ia, ib, m, l - 1).partial();
        let tail = self
            .right_rule(ia, ib, m - 1, l - 1)
            .scalar_mul(&CycloScalar::from_int(&self.ctx, m));
        head.add(&tail)
    }

    /// Skew-symmetry expansion: the element `- sum_j (-1)^(j+n) d^(j) (b_{n+j} a)`
    /// computed from arbitrary product data supplied by `prod`.
    fn skew_expansion<F>(&self, n: u32, prod: F) -> CAElement
    where
        F: Fn(u32) -> CAElement,
    {
        let mut acc = CAElement::zero(&self.ctx);
        let bound = self.support_bound();
        for j in 0..=bound {
            if n + j >= bound {
                break;
            }
            let term = prod(n + j).partial_divided(j);
            let sign_positive = (j + n) % 2 == 1; // overall minus times (-1)^(j+n)
            acc = acc.add(&if sign_positive { term } else { term.neg() });
        }
        acc
    }

    /// Right-hand side of the skew-symmetry axiom for a generator pair.
    pub fn skew_product(&self, a: usize, b: usize, n: u32) -> CAElement {
        self.skew_expansion(n, |m| self.nprod_gen(b, a, m))
    }

    /// Render an element with this algebra's generator names.
    pub fn render(&self, e: &CAElement) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (k, i, c) in e.terms() {
            let mut s = String::new();
            if !c.is_one() {
                let _ = write!(s, "({})*", c);
            }
            if k == 0 {
                let _ = write!(s, "{}", self.gens[i]);
            } else if k == 1 {
                let _ = write!(s, "d({})", self.gens[i]);
            } else {
                let _ = write!(s, "d^{}({})", k, self.gens[i]);
            }
            parts.push(s);
        }
        if !e.central_part().is_zero() {
            let name = self.central_name.as_deref().unwrap_or("c");
            if e.central_part().is_one() {
                parts.push(name.to_string());
            } else {
                parts.push(format!("({})*{}", e.central_part(), name));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// Random element with derivative powers up to `max_dpow`.
    pub fn random_element(&self, rng: &mut Rng, max_dpow: u32) -> CAElement {
        let mut e = CAElement::zero(&self.ctx);
        if self.ngens() == 0 {
            return e.add(&CAElement::central(&self.ctx, rng.rational(&self.ctx)));
        }
        let picks = rng.range_i64(1, 3) as usize;
        for _ in 0..picks {
            let i = rng.range_i64(0, self.ngens() as i64 - 1) as usize;
            let k = rng.range_i64(0, max_dpow as i64) as u32;
            let c = rng.rational(&self.ctx);
            e = e.add(&CAElement {
                ctx: self.ctx.clone(),
                terms: BTreeMap::from([((k, i), c)]),
                central: CycloScalar::zero(&self.ctx),
            });
        }
        e.add(&CAElement::central(&self.ctx, rng.rational(&self.ctx)))
    }

    /// Verify the axioms: finite support, skew-symmetry on generator pairs
    /// (and its involutivity), and the commutator identity on random triples
    /// with indices m, n <= 4.
    pub fn check_axioms(&self, samples: u32, seed: u64) -> Report {
        let mut report = Report::new("conformal-axioms");
        report.set_config("family", &self.family);
        report.set_config("samples", samples.to_string());
        report.set_config("seed", seed.to_string());

        let bound = self.support_bound();
        report.check("c0-finite-support", bound < 64, || {
            format!("stored support bound {} is implausibly large", bound)
        });

        for a in 0..self.ngens() {
            for b in 0..self.ngens() {
                for n in 0..=bound + 1 {
                    let lhs = self.nprod_gen(a, b, n);
                    let rhs = self.skew_product(a, b, n);
                    report.check(
                        format!("c2/{}-{}-n{}", self.gens[a], self.gens[b], n),
                        lhs == rhs,
                        || {
                            format!(
                                "{}_{} {} = {} but skew expansion gives {}",
                                self.gens[a],
                                n,
                                self.gens[b],
                                self.render(&lhs),
                                self.render(&rhs)
                            )
                        },
                    );
                    // Substituting the expansion into itself must return the
                    // original product.
                    let twice = self.skew_expansion(n, |m| self.skew_product(b, a, m));
                    report.check(
                        format!("c2-involution/{}-{}-n{}", self.gens[a], self.gens[b], n),
                        twice == lhs,
                        || {
                            format!(
                                "double skew expansion of {}_{} {} gives {}",
                                self.gens[a],
                                n,
                                self.gens[b],
                                self.render(&twice)
                            )
                        },
                    );
                }
            }
        }

        let mut rng = Rng::new(seed);
        for s in 0..samples {
            let a = self.random_element(&mut rng, 2);
            let b = self.random_element(&mut rng, 2);
            let c = self.random_element(&mut rng, 2);
            let m = rng.range_i64(0, 4) as u32;
            let n = rng.range_i64(0, 4) as u32;
            let lhs = self.nprod_full(&a, &self.nprod_full(&b, &c, n), m);
            let mut rhs = self.nprod_full(&b, &self.nprod_full(&a, &c, m), n);
            for j in 0..=m {
                let inner = self.nprod_full(&self.nprod_full(&a, &b, j), &c, m + n - j);
                rhs = rhs.add(&inner.scalar_mul(&crate::series::binomial(&self.ctx, m, j)));
            }
            report.check(format!("c3/sample-{}", s), lhs == rhs, || {
                format!(
                    "a = {}, b = {}, c = {}, m = {}, n = {}: lhs {} vs rhs {}",
                    self.render(&a),
                    self.render(&b),
                    self.render(&c),
                    m,
                    n,
                    self.render(&lhs),
                    self.render(&rhs)
                )
            });
        }

        report.finalize()
    }
}

// ----------------------------------------------------------------------
// Input data: Lie algebras and Novikov algebras with bilinear forms.
// ----------------------------------------------------------------------

fn name_ok(name: &str) -> bool {
    !name.is_empty()
        && name != "x"
        && name != "w"
        && name
            .chars()
            .next()
            .map_or(false, |c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Finite-dimensional Lie algebra with an invariant symmetric bilinear form,
/// given by structure constants.
#[derive(Clone, Debug)]
pub struct LieData {
    ctx: Arc<FieldCtx>,
    basis: Vec<String>,
    /// bracket[i][j] = coefficients of [e_i, e_j] over the basis.
    bracket: Vec<Vec<Vec<CycloScalar>>>,
    form: Vec<Vec<CycloScalar>>,
}

impl LieData {
    pub fn new(
        ctx: &Arc<FieldCtx>,
        basis: Vec<String>,
        bracket: Vec<Vec<Vec<CycloScalar>>>,
        form: Vec<Vec<CycloScalar>>,
    ) -> Result<LieData> {
        let data = LieData {
            ctx: ctx.clone(),
            basis,
            bracket,
            form,
        };
        let violations = data.validate();
        if violations.is_empty() {
            Ok(data)
        } else {
            Err(Error::InvalidAlgebra(violations.join("; ")))
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn bracket_of(&self, i: usize, j: usize) -> &[CycloScalar] {
        &self.bracket[i][j]
    }

    pub fn form_of(&self, i: usize, j: usize) -> &CycloScalar {
        &self.form[i][j]
    }

    /// Bracket of coefficient vectors.
    pub fn bracket_vec(&self, u: &[CycloScalar], v: &[CycloScalar]) -> Vec<CycloScalar> {
        let n = self.dim();
        let mut out = vec![CycloScalar::zero(&self.ctx); n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() {
                    continue;
                }
                let scale = &u[i] * &v[j];
                for k in 0..n {
                    out[k] = &out[k] + &(&self.bracket[i][j][k] * &scale);
                }
            }
        }
        out
    }

    pub fn form_vec(&self, u: &[CycloScalar], v: &[CycloScalar]) -> CycloScalar {
        let n = self.dim();
        let mut out = CycloScalar::zero(&self.ctx);
        for i in 0..n {
            for j in 0..n {
                out = &out + &(&(&u[i] * &v[j]) * &self.form[i][j]);
            }
        }
        out
    }

    /// Empty result means valid. Violations name the failed identity.
    pub fn validate(&self) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::new();
        if n == 0 {
            out.push("empty basis".to_string());
            return out;
        }
        for name in &self.basis {
            if !name_ok(name) {
                out.push(format!("bad basis name `{}`", name));
            }
        }
        if self.bracket.len() != n
            || self
                .bracket
                .iter()
                .any(|r| r.len() != n || r.iter().any(|v| v.len() != n))
            || self.form.len() != n
            || self.form.iter().any(|r| r.len() != n)
        {
            out.push("structure constant shape mismatch".to_string());
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let sum = &self.bracket[i][j][k] + &self.bracket[j][i][k];
                    if !sum.is_zero() {
                        out.push(format!(
                            "antisymmetry fails on [{},{}]",
                            self.basis[i], self.basis[j]
                        ));
                    }
                }
                if self.form[i][j] != self.form[j][i] {
                    out.push(format!(
                        "form symmetry fails on ({},{})",
                        self.basis[i], self.basis[j]
                    ));
                }
            }
        }
        let basis_vec = |i: usize| -> Vec<CycloScalar> {
            let mut v = vec![CycloScalar::zero(&self.ctx); n];
            v[i] = CycloScalar::one(&self.ctx);
            v
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (ei, ej, ek) = (basis_vec(i), basis_vec(j), basis_vec(k));
                    let jac = {
                        let t1 = self.bracket_vec(&self.bracket_vec(&ei, &ej), &ek);
                        let t2 = self.bracket_vec(&self.bracket_vec(&ej, &ek), &ei);
                        let t3 = self.bracket_vec(&self.bracket_vec(&ek, &ei), &ej);
                        t1.iter()
                            .zip(&t2)
                            .zip(&t3)
                            .map(|((a, b), c)| &(a + b) + c)
                            .collect::<Vec<_>>()
                    };
                    if jac.iter().any(|c| !c.is_zero()) {
                        out.push(format!(
                            "jacobi fails on ({},{},{})",
                            self.basis[i], self.basis[j], self.basis[k]
                        ));
                    }
                    let inv_l = self.form_vec(&self.bracket_vec(&ei, &ej), &ek);
                    let inv_r = self.form_vec(&ei, &self.bracket_vec(&ej, &ek));
                    if inv_l != inv_r {
                        out.push(format!(
                            "form invariance fails on ({},{},{})",
                            self.basis[i], self.basis[j], self.basis[k]
                        ));
                    }
                }
            }
        }
        out.dedup();
        out
    }

    /// Violations of `sigma` being a form-preserving Lie automorphism.
    pub fn automorphism_violations(&self, sigma: &[Vec<CycloScalar>]) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::new();
        if sigma.len() != n || sigma.iter().any(|r| r.len() != n) {
            out.push("automorphism matrix shape mismatch".to_string());
            return out;
        }
        let apply = |v: &[CycloScalar]| -> Vec<CycloScalar> {
            let mut w = vec![CycloScalar::zero(&self.ctx); n];
            for (j, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for i in 0..n {
                    w[i] = &w[i] + &(&sigma[i][j] * c);
                }
            }
            w
        };
        let basis_vec = |i: usize| -> Vec<CycloScalar> {
            let mut v = vec![CycloScalar::zero(&self.ctx); n];
            v[i] = CycloScalar::one(&self.ctx);
            v
        };
        for i in 0..n {
            for j in 0..n {
                let (ei, ej) = (basis_vec(i), basis_vec(j));
                let lhs = apply(&self.bracket_vec(&ei, &ej));
                let rhs = self.bracket_vec(&apply(&ei), &apply(&ej));
                if lhs != rhs {
                    out.push(format!(
                        "sigma does not preserve [{},{}]",
                        self.basis[i], self.basis[j]
                    ));
                }
                if self.form_vec(&apply(&ei), &apply(&ej)) != *self.form_of(i, j) {
                    out.push(format!(
                        "sigma does not preserve the form on ({},{})",
                        self.basis[i], self.basis[j]
                    ));
                }
            }
        }
        out
    }

    /// sl2 with basis e, f, h and the trace form of the defining
    /// representation: [e,f] = h, [h,e] = 2e, [h,f] = -2f, (e,f) = 1,
    /// (h,h) = 2.
    pub fn sl2(ctx: &Arc<FieldCtx>) -> LieData {
        let names = ["e", "f", "h"];
        let z = || CycloScalar::zero(ctx);
        let from = |n: i64| CycloScalar::from_int(ctx, n);
        let mut bracket = vec![vec![vec![z(); 3]; 3]; 3];
        // [e,f] = h
        bracket[0][1][2] = from(1);
        bracket[1][0][2] = from(-1);
        // [h,e] = 2e
        bracket[2][0][0] = from(2);
        bracket[0][2][0] = from(-2);
        // [h,f] = -2f
        bracket[2][1][1] = from(-2);
        bracket[1][2][1] = from(2);
        let mut form = vec![vec![z(); 3]; 3];
        form[0][1] = from(1);
        form[1][0] = from(1);
        form[2][2] = from(2);
        LieData::new(
            ctx,
            names.iter().map(|s| s.to_string()).collect(),
            bracket,
            form,
        )
        .expect("sl2 data is valid")
    }

    /// gl2 = sl2 plus a central identity element with the trace form.
    pub fn gl2(ctx: &Arc<FieldCtx>) -> LieData {
        let names = ["e", "f", "h", "id"];
        let z = || CycloScalar::zero(ctx);
        let from = |n: i64| CycloScalar::from_int(ctx, n);
        let mut bracket = vec![vec![vec![z(); 4]; 4]; 4];
        bracket[0][1][2] = from(1);
        bracket[1][0][2] = from(-1);
        bracket[2][0][0] = from(2);
        bracket[0][2][0] = from(-2);
        bracket[2][1][1] = from(-2);
        bracket[1][2][1] = from(2);
        let mut form = vec![vec![z(); 4]; 4];
        form[0][1] = from(1);
        form[1][0] = from(1);
        form[2][2] = from(2);
        form[3][3] = from(2);
        LieData::new(
            ctx,
            names.iter().map(|s| s.to_string()).collect(),
            bracket,
            form,
        )
        .expect("gl2 data is valid")
    }

    /// Abelian Lie algebra with a diagonal form.
    pub fn abelian(ctx: &Arc<FieldCtx>, names: &[&str], diag: &[CycloScalar]) -> LieData {
        let n = names.len();
        let z = || CycloScalar::zero(ctx);
        let bracket = vec![vec![vec![z(); n]; n]; n];
        let mut form = vec![vec![z(); n]; n];
        for i in 0..n {
            form[i][i] = diag[i].clone();
        }
        LieData::new(
            ctx,
            names.iter().map(|s| s.to_string()).collect(),
            bracket,
            form,
        )
        .expect("abelian data is valid")
    }

    /// Rank-one abelian algebra with (a,a) = 1; its current algebra is the
    /// Heisenberg conformal algebra.
    pub fn heisenberg(ctx: &Arc<FieldCtx>) -> LieData {
        LieData::abelian(ctx, &["a"], &[CycloScalar::one(ctx)])
    }
}

/// Novikov algebra with a compatible symmetric bilinear form.
#[derive(Clone, Debug)]
pub struct NovikovData {
    ctx: Arc<FieldCtx>,
    basis: Vec<String>,
    /// product[i][j] = coefficients of e_i o e_j over the basis.
    product: Vec<Vec<Vec<CycloScalar>>>,
    form: Vec<Vec<CycloScalar>>,
}

impl NovikovData {
    pub fn new(
        ctx: &Arc<FieldCtx>,
        basis: Vec<String>,
        product: Vec<Vec<Vec<CycloScalar>>>,
        form: Vec<Vec<CycloScalar>>,
    ) -> Result<NovikovData> {
        let data = NovikovData {
            ctx: ctx.clone(),
            basis,
            product,
            form,
        };
        let n = data.dim();
        let all: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
            .collect();
        let violations = data
            .validate_shape()
            .into_iter()
            .chain(data.check_identities_on(&all))
            .collect::<Vec<_>>();
        if violations.is_empty() {
            Ok(data)
        } else {
            Err(Error::InvalidAlgebra(violations.join("; ")))
        }
    }

    /// Construct without running identity validation; used for windowed
    /// truncations of infinite algebras where only interior triples satisfy
    /// the identities.
    pub fn new_unchecked(
        ctx: &Arc<FieldCtx>,
        basis: Vec<String>,
        product: Vec<Vec<Vec<CycloScalar>>>,
        form: Vec<Vec<CycloScalar>>,
    ) -> NovikovData {
        NovikovData {
            ctx: ctx.clone(),
            basis,
            product,
            form,
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn form_of(&self, i: usize, j: usize) -> &CycloScalar {
        &self.form[i][j]
    }

    pub fn product_vec(&self, u: &[CycloScalar], v: &[CycloScalar]) -> Vec<CycloScalar> {
        let n = self.dim();
        let mut out = vec![CycloScalar::zero(&self.ctx); n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() {
                    continue;
                }
                let scale = &u[i] * &v[j];
                for k in 0..n {
                    out[k] = &out[k] + &(&self.product[i][j][k] * &scale);
                }
            }
        }
        out
    }

    fn validate_shape(&self) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::new();
        if n == 0 {
            out.push("empty basis".to_string());
            return out;
        }
        for name in &self.basis {
            if !name_ok(name) {
                out.push(format!("bad basis name `{}`", name));
            }
        }
        if self.product.len() != n
            || self
                .product
                .iter()
                .any(|r| r.len() != n || r.iter().any(|v| v.len() != n))
            || self.form.len() != n
            || self.form.iter().any(|r| r.len() != n)
        {
            out.push("structure constant shape mismatch".to_string());
        }
        out
    }

    /// Check the two Novikov identities and the form conditions on the given
    /// basis triples. Empty result means all hold.
    pub fn check_identities_on(&self, triples: &[(usize, usize, usize)]) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::new();
        let basis_vec = |i: usize| -> Vec<CycloScalar> {
            let mut v = vec![CycloScalar::zero(&self.ctx); n];
            v[i] = CycloScalar::one(&self.ctx);
            v
        };
        let form_vec = |u: &[CycloScalar], v: &[CycloScalar]| -> CycloScalar {
            let mut acc = CycloScalar::zero(&self.ctx);
            for i in 0..n {
                for j in 0..n {
                    acc = &acc + &(&(&u[i] * &v[j]) * &self.form[i][j]);
                }
            }
            acc
        };
        for &(i, j, k) in triples {
            let (a, b, c) = (basis_vec(i), basis_vec(j), basis_vec(k));
            let assoc =
                |x: &[CycloScalar], y: &[CycloScalar], z: &[CycloScalar]| -> Vec<CycloScalar> {
                    let xy_z = self.product_vec(&self.product_vec(x, y), z);
                    let x_yz = self.product_vec(x, &self.product_vec(y, z));
                    xy_z.iter().zip(&x_yz).map(|(p, q)| p - q).collect()
                };
            let left = assoc(&a, &b, &c);
            let right = assoc(&b, &a, &c);
            if left != right {
                out.push(format!(
                    "left symmetry fails on ({},{},{})",
                    self.basis[i], self.basis[j], self.basis[k]
                ));
            }
            let ab_c = self.product_vec(&self.product_vec(&a, &b), &c);
            let ac_b = self.product_vec(&self.product_vec(&a, &c), &b);
            if ab_c != ac_b {
                out.push(format!(
                    "right commutativity fails on ({},{},{})",
                    self.basis[i], self.basis[j], self.basis[k]
                ));
            }
            let ab = self.product_vec(&a, &b);
            let bc = self.product_vec(&b, &c);
            let ba = self.product_vec(&b, &a);
            if form_vec(&ab, &c) != form_vec(&a, &bc) {
                out.push(format!(
                    "form associativity fails on ({},{},{})",
                    self.basis[i], self.basis[j], self.basis[k]
                ));
            }
            if form_vec(&ab, &c) != form_vec(&ba, &c) {
                out.push(format!(
                    "form commutativity fails on ({},{},{})",
                    self.basis[i], self.basis[j], self.basis[k]
                ));
            }
            if form_vec(&a, &b) != form_vec(&b, &a) {
                out.push(format!(
                    "form symmetry fails on ({},{})",
                    self.basis[i], self.basis[j]
                ));
            }
        }
        out.dedup();
        out
    }

    /// One-dimensional algebra with a o a = mu a and <a,a> = kappa.
    pub fn one_dim(ctx: &Arc<FieldCtx>, mu: CycloScalar, kappa: CycloScalar) -> NovikovData {
        NovikovData::new(
            ctx,
            vec!["a".to_string()],
            vec![vec![vec![mu]]],
            vec![vec![kappa]],
        )
        .expect("one-dimensional Novikov data is valid")
    }

    /// Truncation of the Laurent-polynomial Novikov algebra
    /// y^i o y^j = j y^(i+j) to basis indices |i| <= window. Products landing
    /// outside the window are dropped, so only interior triples satisfy the
    /// identities; validate with [`NovikovData::check_identities_on`].
    pub fn laurent_window(ctx: &Arc<FieldCtx>, window: i64) -> NovikovData {
        let idx: Vec<i64> = (-window..=window).collect();
        let n = idx.len();
        let names: Vec<String> = idx
            .iter()
            .map(|i| {
                if *i < 0 {
                    format!("ym{}", -i)
                } else {
                    format!("y{}", i)
                }
            })
            .collect();
        let z = || CycloScalar::zero(ctx);
        let mut product = vec![vec![vec![z(); n]; n]; n];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                let target = i + j;
                if target.abs() <= window {
                    let t = (target + window) as usize;
                    product[a][b][t] = CycloScalar::from_int(ctx, j);
                }
            }
        }
        let form = vec![vec![z(); n]; n];
        NovikovData::new_unchecked(ctx, names, product, form)
    }
}

// ----------------------------------------------------------------------
// Builders for the three families.
// ----------------------------------------------------------------------

fn fresh_central_name(taken: &[String]) -> String {
    let mut name = "c".to_string();
    while taken.iter().any(|g| g == &name) {
        name.push('c');
    }
    name
}

/// Current conformal algebra of a Lie algebra with invariant form:
/// a_0 b = [a,b], a_1 b = (a,b) c, all higher products zero.
pub fn build_current(g: &LieData) -> ConformalAlgebra {
    let ctx = g.ctx();
    let central = fresh_central_name(&g.basis().to_vec());
    let mut alg = ConformalAlgebra::new(ctx, g.basis().to_vec(), Some(central), "current");
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let br = CAElement::from_gen_coeffs(ctx, g.bracket_of(i, j));
            alg.set_entry(i, j, 0, br);
            alg.set_entry(i, j, 1, CAElement::central(ctx, g.form_of(i, j).clone()));
        }
    }
    alg
}

/// Virasoro conformal algebra: one generator L with
/// L_0 L = dL, L_1 L = 2L, L_3 L = c/2.
pub fn build_virasoro(ctx: &Arc<FieldCtx>) -> ConformalAlgebra {
    let mut alg = ConformalAlgebra::new(
        ctx,
        vec!["L".to_string()],
        Some("c".to_string()),
        "virasoro",
    );
    let l = CAElement::gen(ctx, 0);
    alg.set_entry(0, 0, 0, l.partial());
    alg.set_entry(0, 0, 1, l.scalar_mul(&CycloScalar::from_int(ctx, 2)));
    alg.set_entry(
        0,
        0,
        3,
        CAElement::central(ctx, CycloScalar::from_ratio(ctx, 1, 2)),
    );
    alg
}

/// Conformal algebra of a Novikov algebra:
/// a_0 b = d(b o a), a_1 b = a o b + b o a, a_3 b = <a,b> c / 2.
pub fn build_novikov(a: &NovikovData) -> ConformalAlgebra {
    let ctx = a.ctx();
    let central = fresh_central_name(&a.basis().to_vec());
    let mut alg = ConformalAlgebra::new(ctx, a.basis().to_vec(), Some(central), "novikov");
    let n = a.dim();
    let basis_vec = |i: usize| -> Vec<CycloScalar> {
        let mut v = vec![CycloScalar::zero(ctx); n];
        v[i] = CycloScalar::one(ctx);
        v
    };
    for i in 0..n {
        for j in 0..n {
            let (ei, ej) = (basis_vec(i), basis_vec(j));
            let ba = a.product_vec(&ej, &ei);
            let ab = a.product_vec(&ei, &ej);
            let sym: Vec<CycloScalar> = ab.iter().zip(&ba).map(|(p, q)| p + q).collect();
            alg.set_entry(i, j, 0, CAElement::from_gen_coeffs(ctx, &ba).partial());
            alg.set_entry(i, j, 1, CAElement::from_gen_coeffs(ctx, &sym));
            let half = CycloScalar::from_ratio(ctx, 1, 2);
            alg.set_entry(i, j, 3, CAElement::central(ctx, &half * a.form_of(i, j)));
        }
    }
    alg
}

// ----------------------------------------------------------------------
// Cyclic group structure and the quotient by ker chi_phi.
// ----------------------------------------------------------------------

/// Action of a cyclic group G = <sigma> of finite order on a conformal
/// algebra, together with the two linear characters chi and chi_phi.
///
/// The stored matrix is the action of sigma on the span of the generators
/// (derivative power zero); the action on d^n-shifted generators picks up
/// the factor chi(sigma)^n, and the central element is fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct GStructure {
    order: u32,
    matrix: Vec<Vec<CycloScalar>>,
    chi: CycloScalar,
    chi_phi: CycloScalar,
}

impl GStructure {
    pub fn new(
        order: u32,
        matrix: Vec<Vec<CycloScalar>>,
        chi: CycloScalar,
        chi_phi: CycloScalar,
    ) -> Result<GStructure> {
        if order == 0 {
            return Err(Error::InvalidGroup("group order must be positive".into()));
        }
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGroup("action matrix must be square".into()));
        }
        let g = GStructure {
            order,
            matrix,
            chi,
            chi_phi,
        };
        if !is_identity(&g.matrix_pow(order)) {
            return Err(Error::InvalidGroup(
                "action matrix does not have the stated order".into(),
            ));
        }
        if !g.chi.pow(order as i64).map_or(false, |v| v.is_one()) {
            return Err(Error::InvalidGroup("chi^M is not 1".into()));
        }
        if !g.chi_phi.pow(order as i64).map_or(false, |v| v.is_one()) {
            return Err(Error::InvalidGroup("chi_phi^M is not 1".into()));
        }
        Ok(g)
    }

    /// Group structure on a current conformal algebra induced by a Lie
    /// algebra automorphism: the degree-zero action is chi(sigma) times the
    /// Lie-level matrix.
    pub fn for_current(
        order: u32,
        lie_matrix: &[Vec<CycloScalar>],
        chi: CycloScalar,
        chi_phi: CycloScalar,
    ) -> Result<GStructure> {
        let matrix = lie_matrix
            .iter()
            .map(|row| row.iter().map(|c| c * &chi).collect())
            .collect();
        GStructure::new(order, matrix, chi, chi_phi)
    }

    /// The trivial group on `ngens` generators.
    pub fn trivial(ctx: &Arc<FieldCtx>, ngens: usize) -> GStructure {
        let mut matrix = vec![vec![CycloScalar::zero(ctx); ngens]; ngens];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = CycloScalar::one(ctx);
        }
        GStructure {
            order: 1,
            matrix,
            chi: CycloScalar::one(ctx),
            chi_phi: CycloScalar::one(ctx),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn ngens(&self) -> usize {
        self.matrix.len()
    }

    pub fn chi(&self) -> &CycloScalar {
        &self.chi
    }

    pub fn chi_phi(&self) -> &CycloScalar {
        &self.chi_phi
    }

    pub fn chi_pow(&self, k: u32) -> CycloScalar {
        self.chi.pow(k as i64).expect("chi is invertible")
    }

    pub fn chi_phi_pow(&self, k: u32) -> CycloScalar {
        self.chi_phi.pow(k as i64).expect("chi_phi is invertible")
    }

    /// Matrix of sigma^k on the generator span.
    pub fn matrix_pow(&self, k: u32) -> Vec<Vec<CycloScalar>> {
        let ctx = self.ctx();
        let n = self.ngens();
        let mut acc = vec![vec![CycloScalar::zero(&ctx); n]; n];
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] = CycloScalar::one(&ctx);
        }
        for _ in 0..(k % self.order) {
            acc = mat_mul(&self.matrix, &acc);
        }
        acc
    }

    fn ctx(&self) -> Arc<FieldCtx> {
        self.chi.ctx().clone()
    }

    /// Whether chi_phi is injective on the cyclic group.
    pub fn chi_phi_injective(&self) -> bool {
        self.chi_phi_kernel_step() == self.order
    }

    /// The least d >= 1 with chi_phi(sigma^d) = 1; ker chi_phi = <sigma^d>.
    pub fn chi_phi_kernel_step(&self) -> u32 {
        let mut acc = CycloScalar::one(&self.ctx());
        for d in 1..=self.order {
            acc = acc.checked_mul(&self.chi_phi).expect("same ctx");
            if acc.is_one() {
                return d;
            }
        }
        self.order
    }

    /// Apply sigma^k to an element: d^n-shifted generators scale by chi^(kn),
    /// the central part is fixed.
    pub fn apply(&self, k: u32, e: &CAElement) -> CAElement {
        let ctx = self.ctx();
        let mat = self.matrix_pow(k);
        let chi_k = self.chi_pow(k);
        let mut out = CAElement::central(&ctx, e.central_part().clone());
        for (dpow, j, c) in e.terms() {
            let scale = chi_k.pow(dpow as i64).expect("chi invertible");
            for (i, row) in mat.iter().enumerate() {
                let m = &row[j];
                if m.is_zero() {
                    continue;
                }
                let coeff = &(c * m) * &scale;
                let mut t = CAElement::zero(&ctx);
                if !coeff.is_zero() {
                    t = CAElement {
                        ctx: ctx.clone(),
                        terms: BTreeMap::from([((dpow, i), coeff)]),
                        central: CycloScalar::zero(&ctx),
                    };
                }
                out = out.add(&t);
            }
        }
        out
    }
}

fn mat_mul(a: &[Vec<CycloScalar>], b: &[Vec<CycloScalar>]) -> Vec<Vec<CycloScalar>> {
    let n = a.len();
    let ctx = a[0][0].ctx().clone();
    let mut out = vec![vec![CycloScalar::zero(&ctx); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
            }
        }
    }
    out
}

fn is_identity(m: &[Vec<CycloScalar>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, c)| if i == j { c.is_one() } else { c.is_zero() })
    })
}

/// Verify the group-structure conditions: the derivative intertwining rule,
/// the product covariance rule on all generator pairs and stored indices,
/// finiteness, and compatibility of (chi, chi_phi) with the deformation.
pub fn check_g_structure(alg: &ConformalAlgebra, g: &GStructure, def: &Deformation) -> Report {
    let mut report = Report::new("g-structure");
    report.set_config("order", g.order().to_string());
    report.set_config("chi", g.chi().to_string());
    report.set_config("chi_phi", g.chi_phi().to_string());
    report.set_config("p", def.p().to_string());

    if g.ngens() != alg.ngens() {
        report.fail(
            "shape",
            format!(
                "action matrix is {}x{} but the algebra has {} generators",
                g.ngens(),
                g.ngens(),
                alg.ngens()
            ),
        );
        return report.finalize();
    }

    // Characters must satisfy p(chi_phi x) = chi^-1 chi_phi p(x).
    let lhs = def.p().scale_x(g.chi_phi());
    let scale = g.chi().inv().and_then(|ci| ci.checked_mul(g.chi_phi()));
    match (lhs, scale) {
        (Ok(l), Ok(s)) => {
            let r = def.p().scalar_mul(&s);
            report.check("character-compatibility", l == r, || {
                format!("p(chi_phi x) = {} but chi^-1 chi_phi p(x) = {}", l, r)
            });
        }
        _ => report.error("character-compatibility", "characters are not invertible"),
    }

    for k in 1..g.order() {
        let chi_k = g.chi_pow(k);
        for a in 0..alg.ngens() {
            // Derivative rule: R(d u) = chi d R(u) on generators.
            let u = CAElement::gen(alg.ctx(), a);
            let lhs = g.apply(k, &u.partial());
            let rhs = g.apply(k, &u).partial().scalar_mul(&chi_k);
            report.check(format!("cr1/{}-g{}", alg.gens()[a], k), lhs == rhs, || {
                format!(
                    "R(d {}) = {} but chi d R({}) = {}",
                    alg.gens()[a],
                    alg.render(&lhs),
                    alg.gens()[a],
                    alg.render(&rhs)
                )
            });
        }
        // Product covariance on generator pairs at every stored index.
        for a in 0..alg.ngens() {
            for b in 0..alg.ngens() {
                for n in 0..alg.support_bound() {
                    let lhs = g.apply(k, &alg.nprod_gen(a, b, n));
                    let ra = g.apply(k, &CAElement::gen(alg.ctx(), a));
                    let rb = g.apply(k, &CAElement::gen(alg.ctx(), b));
                    let factor = chi_k.pow(-(n as i64 + 1)).expect("chi invertible");
                    let rhs = alg.nprod_full(&ra, &rb, n).scalar_mul(&factor);
                    report.check(
                        format!("cr2/{}-{}-n{}-g{}", alg.gens()[a], alg.gens()[b], n, k),
                        lhs == rhs,
                        || {
                            format!(
                                "R({}_{} {}) = {} but chi^-(n+1) (R{})_{} (R{}) = {}",
                                alg.gens()[a],
                                n,
                                alg.gens()[b],
                                alg.render(&lhs),
                                alg.gens()[a],
                                n,
                                alg.gens()[b],
                                alg.render(&rhs)
                            )
                        },
                    );
                }
            }
        }
    }

    // Finiteness of the twisted products is automatic for a stored table.
    report.pass("cr3-finiteness");
    report.finalize()
}

/// Row-reduce `rows` over the scalar field; returns (reduced rows, pivots).
fn rref(mut rows: Vec<Vec<CycloScalar>>, width: usize) -> (Vec<Vec<CycloScalar>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(sel) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = rows[r][col].inv().expect("nonzero pivot");
        for c in rows[r].iter_mut() {
            *c = &*c * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for j in 0..width {
                    let t = &rows[r][j] * &factor;
                    rows[i][j] = &rows[i][j] - &t;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Coordinate projection onto the quotient by a row space.
struct Projection {
    rows: Vec<Vec<CycloScalar>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl Projection {
    fn new(span_rows: Vec<Vec<CycloScalar>>, width: usize) -> Projection {
        let (rows, pivots) = rref(span_rows, width);
        let free = (0..width).filter(|c| !pivots.contains(c)).collect();
        Projection { rows, pivots, free }
    }

    /// Express the class of `v` in the free coordinates.
    fn apply(&self, v: &[CycloScalar]) -> Vec<CycloScalar> {
        let mut out: Vec<CycloScalar> = self.free.iter().map(|&f| v[f].clone()).collect();
        for (i, &p) in self.pivots.iter().enumerate() {
            if v[p].is_zero() {
                continue;
            }
            for (fi, &f) in self.free.iter().enumerate() {
                let t = &v[p] * &self.rows[i][f];
                out[fi] = &out[fi] - &t;
            }
        }
        out
    }
}

/// Quotient conformal algebra by H = ker chi_phi, with products
/// (uH)_n (vH) = sum_{h in H} ((R_h u)_n v) H and the induced action of the
/// quotient group. dim H > 1 requires chi to be trivial on H, which the
/// character compatibility guarantees; this is validated.
pub fn quotient_by_h(
    alg: &ConformalAlgebra,
    g: &GStructure,
) -> Result<(ConformalAlgebra, GStructure)> {
    if g.ngens() != alg.ngens() {
        return Err(Error::InvalidGroup(
            "action matrix size does not match the algebra".into(),
        ));
    }
    let d = g.chi_phi_kernel_step();
    if d == g.order() {
        // chi_phi is injective: H is trivial and the quotient is the algebra
        // itself.
        return Ok((alg.clone(), g.clone()));
    }
    if !g.chi_pow(d).is_one() {
        return Err(Error::InvalidGroup(
            "chi must be trivial on ker chi_phi".into(),
        ));
    }
    let ctx = alg.ctx().clone();
    let n = alg.ngens();
    let h_size = g.order() / d;

    // Span of (R_h - 1) on the generator space; chi(h) = 1 makes the span a
    // submodule for the derivative, so one projection serves every
    // derivative power.
    let mut span_rows = Vec::new();
    for t in 1..h_size {
        let mat = g.matrix_pow(d * t);
        for j in 0..n {
            let mut row: Vec<CycloScalar> = (0..n).map(|i| mat[i][j].clone()).collect();
            row[j] = &row[j] - &CycloScalar::one(&ctx);
            if row.iter().any(|c| !c.is_zero()) {
                span_rows.push(row);
            }
        }
    }
    let proj = Projection::new(span_rows, n);

    let new_gens: Vec<String> = proj.free.iter().map(|&f| alg.gens()[f].clone()).collect();
    let project_elem = |e: &CAElement| -> CAElement {
        let mut out = CAElement::central(&ctx, e.central_part().clone());
        for dpow in 0..=e.max_dpow() {
            let v = e.gen_vector(dpow, n);
            let q = proj.apply(&v);
            for (fi, c) in q.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut single = CAElement::gen(&ctx, fi).scalar_mul(&c);
                for _ in 0..dpow {
                    single = single.partial();
                }
                out = out.add(&single);
            }
        }
        out
    };

    let mut out = ConformalAlgebra::new(
        &ctx,
        new_gens,
        alg.central_name().map(|s| s.to_string()),
        "quotient",
    );
    for (qa, &fa) in proj.free.iter().enumerate() {
        for (qb, &fb) in proj.free.iter().enumerate() {
            for m in 0..alg.support_bound() {
                let mut acc = CAElement::zero(&ctx);
                for t in 0..h_size {
                    let ra = g.apply(d * t, &CAElement::gen(&ctx, fa));
                    let term = alg.nprod_full(&ra, &CAElement::gen(&ctx, fb), m);
                    acc = acc.add(&term);
                }
                out.set_entry(qa, qb, m, project_elem(&acc));
            }
        }
    }

    // Induced action of the quotient group, generated by the class of sigma.
    let sigma = g.matrix_pow(1);
    let mut new_matrix = vec![vec![CycloScalar::zero(&ctx); proj.free.len()]; proj.free.len()];
    for (qj, &fj) in proj.free.iter().enumerate() {
        let col: Vec<CycloScalar> = (0..n).map(|i| sigma[i][fj].clone()).collect();
        let q = proj.apply(&col);
        for (qi, c) in q.into_iter().enumerate() {
            new_matrix[qi][qj] = c;
        }
    }
    let new_g = GStructure::new(d, new_matrix, g.chi().clone(), g.chi_phi().clone())?;
    Ok((out, new_g))
}

// ----------------------------------------------------------------------
// JSON ingestion.
// ----------------------------------------------------------------------

#[derive(Deserialize)]
struct AlgebraFile {
    #[serde(default)]
    kind: Option<String>,
    basis: Vec<String>,
    #[serde(default)]
    brackets: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    products: BTreeMap<String, BTreeMap<String, String>>,
    form: Vec<Vec<String>>,
}

/// Parsed algebra input: either Lie data or Novikov data.
#[derive(Clone, Debug)]
pub enum AlgebraData {
    Lie(LieData),
    Novikov(NovikovData),
}

/// Split a pair key of the form `[a,b]` or `a*b` into its two names.
fn split_pair_key(key: &str) -> Result<(String, String)> {
    let bad = || Error::InvalidAlgebra(format!("bad pair key `{}`", key));
    let inner = key.trim();
    let (l, r) = if inner.starts_with('[') && inner.ends_with(']') {
        inner[1..inner.len() - 1].split_once(',').ok_or_else(bad)?
    } else {
        inner.split_once('*').ok_or_else(bad)?
    };
    Ok((l.trim().to_string(), r.trim().to_string()))
}

/// Parse the JSON algebra schema:
/// `{ "basis": [...], "brackets": {"[a,b]": {"h": "1"}}, "form": [["0",..]] }`
/// with rationals as strings. A `"kind": "novikov"` entry (or a `products`
/// table with `a*b` keys) selects Novikov data; the default is Lie data,
/// where omitted mirror brackets are filled by antisymmetry.
pub fn parse_algebra(ctx: &Arc<FieldCtx>, json: &str) -> Result<AlgebraData> {
    let file: AlgebraFile =
        serde_json::from_str(json).map_err(|e| Error::InvalidAlgebra(format!("json: {}", e)))?;
    let n = file.basis.len();
    if n == 0 {
        return Err(Error::InvalidAlgebra("empty basis".into()));
    }
    let index = |name: &str| -> Result<usize> {
        file.basis
            .iter()
            .position(|b| b == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    };
    let zero = || CycloScalar::zero(ctx);
    if file.form.len() != n || file.form.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidAlgebra(format!(
            "form must be a {n}x{n} matrix"
        )));
    }
    let mut form = vec![vec![zero(); n]; n];
    for (i, row) in file.form.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            form[i][j] = parse_scalar(ctx, s)?;
        }
    }

    let is_novikov = file.kind.as_deref() == Some("novikov")
        || (!file.products.is_empty() && file.brackets.is_empty());
    let entries = if file.products.is_empty() {
        &file.brackets
    } else {
        &file.products
    };

    let mut table = vec![vec![vec![zero(); n]; n]; n];
    let mut given = vec![vec![false; n]; n];
    for (key, value) in entries {
        let (l, r) = split_pair_key(key)?;
        let (i, j) = (index(&l)?, index(&r)?);
        given[i][j] = true;
        for (target, coeff) in value {
            let k = index(target)?;
            table[i][j][k] = parse_scalar(ctx, coeff)?;
        }
    }

    if is_novikov {
        let data = NovikovData::new(ctx, file.basis, table, form)?;
        Ok(AlgebraData::Novikov(data))
    } else {
        // Fill missing mirrors by antisymmetry.
        for i in 0..n {
            for j in 0..n {
                if given[i][j] && !given[j][i] {
                    for k in 0..n {
                        table[j][i][k] = table[i][j][k].neg();
                    }
                    given[j][i] = true;
                }
            }
        }
        let data = LieData::new(ctx, file.basis, table, form)?;
        Ok(AlgebraData::Lie(data))
    }
}
