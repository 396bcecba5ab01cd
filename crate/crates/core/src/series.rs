//! Truncated-or-exact Laurent series over the cyclotomic scalar field.
//!
//! A series is either an exact Laurent polynomial (all unstored coefficients
//! are zero) or truncated at a precision exponent: coefficients at exponents
//! `>= prec` are unknown and asking for one is an error, never a silent zero.
//! Arithmetic propagates the tightest derivable window.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};

/// Knowledge window of a series: exact, or known strictly below an exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prec {
    Exact,
    Trunc(i64),
}

impl Prec {
    fn min(self, other: Prec) -> Prec {
        match (self, other) {
            (Prec::Exact, p) | (p, Prec::Exact) => p,
            (Prec::Trunc(a), Prec::Trunc(b)) => Prec::Trunc(a.min(b)),
        }
    }

    /// True when the coefficient at `k` is inside the known window.
    pub fn covers(self, k: i64) -> bool {
        match self {
            Prec::Exact => true,
            Prec::Trunc(h) => k < h,
        }
    }
}

/// Laurent series with exact coefficients and an explicit knowledge window.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    ctx: Arc<FieldCtx>,
    /// Nonzero known coefficients, keyed by exponent.
    coeffs: BTreeMap<i64, CycloScalar>,
    prec: Prec,
}

impl LaurentSeries {
    fn normalized(
        ctx: Arc<FieldCtx>,
        coeffs: BTreeMap<i64, CycloScalar>,
        prec: Prec,
    ) -> LaurentSeries {
        let coeffs = coeffs
            .into_iter()
            .filter(|(k, c)| !c.is_zero() && prec.covers(*k))
            .collect();
        LaurentSeries { ctx, coeffs, prec }
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> LaurentSeries {
        LaurentSeries {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
            prec: Prec::Exact,
        }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> LaurentSeries {
        LaurentSeries::monomial(CycloScalar::one(ctx), 0)
    }

    /// The coordinate x.
    pub fn x(ctx: &Arc<FieldCtx>) -> LaurentSeries {
        LaurentSeries::monomial(CycloScalar::one(ctx), 1)
    }

    pub fn monomial(c: CycloScalar, k: i64) -> LaurentSeries {
        let ctx = c.ctx().clone();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        LaurentSeries {
            ctx,
            coeffs,
            prec: Prec::Exact,
        }
    }

    pub fn from_terms<I>(ctx: &Arc<FieldCtx>, terms: I) -> LaurentSeries
    where
        I: IntoIterator<Item = (i64, CycloScalar)>,
    {
        let mut out = LaurentSeries::zero(ctx);
        for (k, c) in terms {
            out = out.add(&LaurentSeries::monomial(c, k));
        }
        out
    }

    /// Exact Laurent polynomial with small integer coefficients.
    pub fn from_int_terms(ctx: &Arc<FieldCtx>, terms: &[(i64, i64)]) -> LaurentSeries {
        LaurentSeries::from_terms(
            ctx,
            terms
                .iter()
                .map(|&(k, n)| (k, CycloScalar::from_int(ctx, n))),
        )
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == Prec::Exact
    }

    /// Exactly the zero series (zero everywhere, no unknown region caveat).
    pub fn is_exactly_zero(&self) -> bool {
        self.is_exact() && self.coeffs.is_empty()
    }

    /// Known coefficients as stored (nonzero, below the window edge).
    pub fn terms(&self) -> impl Iterator<Item = (i64, &CycloScalar)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Lowest stored exponent, if any coefficient is known nonzero.
    pub fn lo(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Highest stored exponent.
    pub fn hi(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lowest possibly-nonzero exponent: the lowest stored key, or the window
    /// edge for a truncated series with no known nonzero coefficient.
    fn lo_bound(&self) -> Option<i64> {
        match (self.lo(), self.prec) {
            (Some(l), _) => Some(l),
            (None, Prec::Trunc(h)) => Some(h),
            (None, Prec::Exact) => None, // exactly zero
        }
    }

    /// Coefficient at exponent `k`; errors when `k` is outside the window.
    pub fn coeff(&self, k: i64) -> Result<CycloScalar> {
        if !self.prec.covers(k) {
            return Err(Error::PrecisionInsufficient(k));
        }
        Ok(self
            .coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| CycloScalar::zero(&self.ctx)))
    }

    fn check_ctx(&self, other: &LaurentSeries) -> Result<()> {
        if self.ctx.order() != other.ctx.order() {
            return Err(Error::CtxMismatch(self.ctx.order(), other.ctx.order()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &LaurentSeries) -> Result<LaurentSeries> {
        self.check_ctx(other)?;
        let prec = self.prec.min(other.prec);
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let entry = coeffs
                .entry(*k)
                .or_insert_with(|| CycloScalar::zero(&self.ctx));
            *entry = &*entry + c;
        }
        Ok(LaurentSeries::normalized(self.ctx.clone(), coeffs, prec))
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        self.checked_add(other).expect("context mismatch")
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LaurentSeries {
        LaurentSeries {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn scalar_mul(&self, s: &CycloScalar) -> LaurentSeries {
        if s.is_zero() {
            // Scaling by zero erases content but not the knowledge window:
            // the result is exactly zero.
            return LaurentSeries::zero(&self.ctx);
        }
        LaurentSeries::normalized(
            self.ctx.clone(),
            self.coeffs.iter().map(|(k, c)| (*k, c * s)).collect(),
            self.prec,
        )
    }

    pub fn checked_mul(&self, other: &LaurentSeries) -> Result<LaurentSeries> {
        self.check_ctx(other)?;
        if self.is_exactly_zero() || other.is_exactly_zero() {
            return Ok(LaurentSeries::zero(&self.ctx));
        }
        // Tightest window: the unknown tail of one factor first pollutes the
        // product at (window edge) + (lowest exponent of the other factor).
        let mut prec = Prec::Exact;
        if let Prec::Trunc(hf) = self.prec {
            prec = prec.min(Prec::Trunc(hf + other.lo_bound().expect("nonzero")));
        }
        if let Prec::Trunc(hg) = other.prec {
            prec = prec.min(Prec::Trunc(hg + self.lo_bound().expect("nonzero")));
        }
        let mut coeffs: BTreeMap<i64, CycloScalar> = BTreeMap::new();
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let k = i + j;
                if !prec.covers(k) {
                    continue;
                }
                let entry = coeffs
                    .entry(k)
                    .or_insert_with(|| CycloScalar::zero(&self.ctx));
                *entry = &*entry + &(a * b);
            }
        }
        Ok(LaurentSeries::normalized(self.ctx.clone(), coeffs, prec))
    }

    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        self.checked_mul(other).expect("context mismatch")
    }

    /// Multiply by the monomial x^k.
    pub fn shift(&self, k: i64) -> LaurentSeries {
        let prec = match self.prec {
            Prec::Exact => Prec::Exact,
            Prec::Trunc(h) => Prec::Trunc(h + k),
        };
        LaurentSeries {
            ctx: self.ctx.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e + k, c.clone()))
                .collect(),
            prec,
        }
    }

    /// Formal derivative d/dx.
    pub fn derivative(&self) -> LaurentSeries {
        let prec = match self.prec {
            Prec::Exact => Prec::Exact,
            Prec::Trunc(h) => Prec::Trunc(h - 1),
        };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let factor = CycloScalar::from_int(&self.ctx, *k);
                (k - 1, c * &factor)
            })
            .collect();
        LaurentSeries::normalized(self.ctx.clone(), coeffs, prec)
    }

    /// Divided-power derivative (d/dx)^(n) = (d/dx)^n / n!.
    pub fn derivative_divided(&self, n: u32) -> LaurentSeries {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.derivative();
        }
        out.scalar_mul(&inv_factorial(&self.ctx, n))
    }

    /// Restrict the window to exponents below `h`.
    pub fn truncate(&self, h: i64) -> LaurentSeries {
        let prec = self.prec.min(Prec::Trunc(h));
        LaurentSeries::normalized(self.ctx.clone(), self.coeffs.clone(), prec)
    }

    /// Coefficient of x^-1. Errors if that exponent is outside the window.
    pub fn residue(&self) -> Result<CycloScalar> {
        self.coeff(-1)
    }

    /// Substitute x -> lambda * x: coefficient at exponent n picks up lambda^n.
    pub fn scale_x(&self, lambda: &CycloScalar) -> Result<LaurentSeries> {
        if lambda.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            coeffs.insert(*k, c * &lambda.pow(*k)?);
        }
        Ok(LaurentSeries::normalized(
            self.ctx.clone(),
            coeffs,
            self.prec,
        ))
    }

    /// Multiplicative inverse, truncated at `target_prec`.
    ///
    /// The valuation must be visible: a series whose known coefficients are
    /// all zero cannot be inverted.
    pub fn inverse(&self, target_prec: i64) -> Result<LaurentSeries> {
        let v = self.lo().ok_or(Error::ZeroSeries)?;
        let c0 = self.coeffs.get(&v).expect("lo is stored").clone();
        // f = c0 x^v (1 + u) with u of valuation >= 1.
        let cap = (target_prec + v).max(1); // required window for (1+u)^-1
        let u = self
            .shift(-v)
            .scalar_mul(&c0.inv()?)
            .sub(&LaurentSeries::one(&self.ctx))
            .truncate(cap);
        let mut acc = LaurentSeries::one(&self.ctx).truncate(cap);
        let mut term = u.neg();
        // Geometric accumulation; re-truncating each power keeps the term
        // valuation climbing past the cap, which ends the loop.
        while !term.coeffs.is_empty() {
            acc = acc.add(&term);
            term = term.mul(&u).neg().truncate(cap);
        }
        // Honest window: acc's own window, capped at the request.
        Ok(acc.scalar_mul(&c0.inv()?).shift(-v).truncate(target_prec))
    }
}

/// 1/n! as a scalar.
pub(crate) fn inv_factorial(ctx: &Arc<FieldCtx>, n: u32) -> CycloScalar {
    let mut f = BigInt::from(1);
    for k in 2..=n as i64 {
        f *= BigInt::from(k);
    }
    CycloScalar::from_rational(ctx, BigRational::new(BigInt::from(1), f))
}

/// Binomial coefficient as a scalar.
pub(crate) fn binomial(ctx: &Arc<FieldCtx>, n: u32, k: u32) -> CycloScalar {
    if k > n {
        return CycloScalar::zero(ctx);
    }
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for i in 0..k as i64 {
        num *= BigInt::from(n as i64 - i);
        den *= BigInt::from(i + 1);
    }
    CycloScalar::from_rational(ctx, BigRational::new(num, den))
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.coeffs {
            let (sign, body) = render_scalar_factor(c);
            if first {
                if sign {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match (*k, body.as_str()) {
                (0, b) => write!(f, "{}", b)?,
                (1, "1") => write!(f, "x")?,
                (1, b) => write!(f, "{}*x", b)?,
                (e, "1") => write!(f, "x^{}", e)?,
                (e, b) => write!(f, "{}*x^{}", b, e)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Prec::Trunc(h) = self.prec {
            write!(f, " + O(x^{})", h)?;
        }
        Ok(())
    }
}

/// Split a scalar into (leading minus sign, rendered magnitude), wrapping
/// genuinely cyclotomic values in parentheses so series display re-parses.
fn render_scalar_factor(c: &CycloScalar) -> (bool, String) {
    use num::Signed;
    if let Some(r) = c.as_rational() {
        (r.is_negative(), r.abs().to_string())
    } else {
        (false, format!("({})", c))
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentSeries({})", self)
    }
}
