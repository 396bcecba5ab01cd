//! Rank-one oscillator Fock space: the polynomial module generated from a
//! vacuum by negative modes of a single oscillator with `[a_m, a_n] =
//! m delta_{m+n,0} level`. It is the minimal faithful restricted module on
//! which the generating-field commutator formula is a nontrivial operator
//! identity.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::deform::Deformation;
use crate::delta::{unit_term_coeff, Window};
use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};
use crate::report::Report;
use crate::series::{LaurentSeries, Prec};

/// Finite linear combination of monomials `a_{-n_1} ... a_{-n_k} |0>`,
/// each stored as a descending multiset of positive mode indices.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    ctx: Arc<FieldCtx>,
    terms: BTreeMap<Vec<u32>, CycloScalar>,
}

impl FockVector {
    pub fn zero(ctx: &Arc<FieldCtx>) -> FockVector {
        FockVector {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(ctx: &Arc<FieldCtx>) -> FockVector {
        let mut v = FockVector::zero(ctx);
        v.terms.insert(Vec::new(), CycloScalar::one(ctx));
        v
    }

    /// The basis monomial with the given creation indices (all >= 1).
    pub fn monomial(ctx: &Arc<FieldCtx>, indices: &[u32]) -> FockVector {
        assert!(indices.iter().all(|&n| n >= 1));
        let mut key = indices.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        let mut v = FockVector::zero(ctx);
        v.terms.insert(key, CycloScalar::one(ctx));
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CycloScalar)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            let e = out
                .terms
                .entry(k.clone())
                .or_insert_with(|| CycloScalar::zero(&self.ctx));
            *e = &*e + c;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FockVector {
        FockVector {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn scalar_mul(&self, s: &CycloScalar) -> FockVector {
        let mut out = FockVector {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        };
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Largest oscillator index appearing in any monomial (0 for scalars of
    /// the vacuum and for zero).
    pub fn max_level(&self) -> u32 {
        self.terms
            .keys()
            .filter_map(|k| k.first().copied())
            .max()
            .unwrap_or(0)
    }

    /// Total oscillator degree (maximum over monomials of the index sum).
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

/// All basis monomials of oscillator degree at most `d` (partitions of
/// 0..=d), vacuum first.
pub fn basis_through_degree(ctx: &Arc<FieldCtx>, d: u32) -> Vec<FockVector> {
    fn partitions(total: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(prefix.clone());
        for part in (1..=max_part.min(total)).rev() {
            prefix.push(part);
            partitions(total - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut keys = Vec::new();
    partitions(d, d, &mut Vec::new(), &mut keys);
    keys.sort();
    keys.dedup();
    keys.sort_by_key(|k| (k.iter().sum::<u32>(), k.clone()));
    keys.into_iter()
        .map(|k| FockVector::monomial(ctx, &k))
        .collect()
}

/// Fock module parameters: the central level and the deformation that
/// shapes the generating-field modes.
#[derive(Clone, Debug)]
pub struct FockCtx {
    level: CycloScalar,
    def: Deformation,
}

impl FockCtx {
    pub fn new(level: CycloScalar, def: Deformation) -> FockCtx {
        FockCtx { level, def }
    }

    pub fn level(&self) -> &CycloScalar {
        &self.level
    }

    pub fn def(&self) -> &Deformation {
        &self.def
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        self.def.ctx()
    }

    /// Single oscillator mode: creation for n < 0, zero mode kills
    /// everything, annihilation contracts against matching creations with
    /// the factor `n * level`.
    pub fn apply_mode(&self, n: i64, v: &FockVector) -> FockVector {
        let ctx = self.field();
        let mut out = FockVector::zero(ctx);
        if n == 0 {
            return out;
        }
        for (key, coeff) in v.terms() {
            if n < 0 {
                let mut k = key.clone();
                k.push((-n) as u32);
                k.sort_unstable_by(|a, b| b.cmp(a));
                let e = out.terms.entry(k).or_insert_with(|| CycloScalar::zero(ctx));
                *e = &*e + coeff;
            } else {
                let idx = n as u32;
                let count = key.iter().filter(|&&m| m == idx).count() as i64;
                if count == 0 {
                    continue;
                }
                let mut k = key.clone();
                let pos = k.iter().position(|&m| m == idx).expect("present");
                k.remove(pos);
                let factor = CycloScalar::from_int(ctx, n * count);
                let e = out.terms.entry(k).or_insert_with(|| CycloScalar::zero(ctx));
                *e = &*e + &(&(coeff * &factor) * &self.level);
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Action of `a (x) f`: the sum of `f_n a_n` over the exponents of f.
    /// A truncated f whose unknown tail could still act is refused.
    pub fn act(&self, f: &LaurentSeries, v: &FockVector) -> Result<FockVector> {
        if let Prec::Trunc(h) = f.prec() {
            if h <= i64::from(v.max_level()) {
                return Err(Error::PrecisionInsufficient(h));
            }
        }
        let mut out = FockVector::zero(self.field());
        for (n, c) in f.terms() {
            out = out.add(&self.apply_mode(n, v).scalar_mul(c));
        }
        Ok(out)
    }

    /// Generating-field mode `A_k`: the action of `x^k p(x)`.
    pub fn field_mode_action(&self, k: i64, v: &FockVector) -> Result<FockVector> {
        self.act(&self.def.p().shift(k), v)
    }

    /// True when every sample vector is eventually annihilated by the
    /// generating-field modes, with the switchover bounded by `n_max`.
    pub fn restricted_check(&self, vectors: &[FockVector], n_max: i64) -> bool {
        self.restricted_check_with(
            |n, v| self.field_mode_action(n, v).expect("exact p"),
            vectors,
            n_max,
        )
    }

    /// Same sweep under an arbitrary mode action; lets tests probe
    /// non-restricted (wrong-direction) actions.
    pub(crate) fn restricted_check_with<F>(
        &self,
        action: F,
        vectors: &[FockVector],
        n_max: i64,
    ) -> bool
    where
        F: Fn(i64, &FockVector) -> FockVector,
    {
        let lo_p = self.def.p().lo().expect("p nonzero");
        for v in vectors {
            // A_n = sum_j p_j a_{n+j} annihilates v once n + lo_p exceeds
            // every oscillator index of v.
            let bound = i64::from(v.max_level()) - lo_p + 1;
            if bound > n_max {
                return false;
            }
            for n in bound.max(-n_max)..=n_max {
                if !action(n, v).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Operator-level commutator check: for every (m, n) in the window and
    /// every sample vector, `[A_m, A_n] v` must equal the delta-side scalar
    /// `level * coeff(m, n)` acting on v, where the coefficient comes from
    /// the first-derivative delta term (the only surviving product of the
    /// rank-one current algebra).
    pub fn verify_module_commutator(&self, window: Window, vectors: &[FockVector]) -> Report {
        let mut report = Report::new("fock-commutator");
        report.set_config("p", self.def.p().to_string());
        report.set_config("level", self.level.to_string());
        report.set_config(
            "window",
            format!(
                "[{},{}]x[{},{}]",
                window.m_lo, window.m_hi, window.n_lo, window.n_hi
            ),
        );
        report.set_config("vectors", vectors.len().to_string());
        let ctx = self.field().clone();
        let one = CycloScalar::one(&ctx);
        for (m, n) in window.cells() {
            let result = (|| -> Result<()> {
                // Coefficient of z^(-m-1) w^(-n-1) in
                // (p(w) d/dw)^(1) [pbar(z) delta(w/z)].
                let coeff = unit_term_coeff(&self.def, &one, 1, m, -n - 1)?;
                let scale = &coeff * &self.level;
                for (vi, v) in vectors.iter().enumerate() {
                    let lhs = self
                        .field_mode_action(m, &self.field_mode_action(n, v)?)?
                        .sub(&self.field_mode_action(n, &self.field_mode_action(m, v)?)?);
                    let rhs = v.scalar_mul(&scale);
                    report.check(format!("cell/m{}-n{}/v{}", m, n, vi), lhs == rhs, || {
                        format!(
                            "[A_{}, A_{}] on vector {} gave {:?}, expected scalar {}",
                            m, n, vi, lhs, scale
                        )
                    });
                }
                Ok(())
            })();
            if let Err(e) = result {
                report.error(format!("cell/m{}-n{}", m, n), e.to_string());
            }
        }
        report.finalize()
    }
}
