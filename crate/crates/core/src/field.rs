//! Exact coefficient field: the cyclotomic field Q(zeta_M).
//!
//! [`FieldCtx`] fixes the cyclotomic order `M` and the minimal polynomial of
//! a primitive `M`-th root of unity; [`CycloScalar`] is a residue modulo that
//! polynomial with rational coefficients. `M = 1` gives plain rationals.
//! Every element carries its context, so arithmetic can detect mixups between
//! fields of different orders.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Euler totient of `m`.
pub fn totient(m: u64) -> u64 {
    (1..=m).filter(|k| num::integer::gcd(*k, m) == 1).count() as u64
}

// Dense polynomial helpers over BigRational: coefficient vectors, index = degree,
// no trailing zeros.

fn poly_trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    poly_trim(out)
}

/// Quotient and remainder of `a / b`; `b` must be nonzero.
fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    if rem.len() <= db {
        return (Vec::new(), poly_trim(rem));
    }
    let mut quo = vec![BigRational::zero(); rem.len() - db];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let c = &rem[dr] / lead;
        quo[dr - db] = c.clone();
        for k in 0..=db {
            let t = &c * &b[k];
            rem[dr - db + k] -= t;
        }
        rem = poly_trim(rem);
        if rem.is_empty() {
            break;
        }
    }
    (poly_trim(quo), rem)
}

/// The `m`-th cyclotomic polynomial as an integer-coefficient vector.
///
/// Computed from `x^m - 1 = prod_{d | m} Phi_d` by exact division.
pub fn cyclotomic_polynomial(m: u64) -> Vec<BigInt> {
    assert!(m >= 1);
    let mut num: Vec<BigRational> = vec![BigRational::zero(); m as usize + 1];
    num[0] = -BigRational::one();
    num[m as usize] = BigRational::one();
    for d in 1..m {
        if m % d == 0 {
            let phi_d: Vec<BigRational> = cyclotomic_polynomial(d)
                .into_iter()
                .map(BigRational::from_integer)
                .collect();
            let (q, r) = poly_divmod(&num, &phi_d);
            debug_assert!(r.is_empty());
            num = q;
        }
    }
    num.into_iter()
        .map(|c| {
            debug_assert!(c.is_integer());
            c.to_integer()
        })
        .collect()
}

/// Shared field context: order `M` and the minimal polynomial of zeta_M.
#[derive(Debug)]
pub struct FieldCtx {
    order: u64,
    /// Monic minimal polynomial of zeta_M, degree = totient(M).
    modulus: Vec<BigRational>,
}

impl FieldCtx {
    /// Field context for Q(zeta_m); `m = 1` is the rationals.
    pub fn new(m: u64) -> Arc<FieldCtx> {
        assert!(m >= 1, "cyclotomic order must be positive");
        let modulus = cyclotomic_polynomial(m)
            .into_iter()
            .map(BigRational::from_integer)
            .collect();
        Arc::new(FieldCtx { order: m, modulus })
    }

    /// Plain rational numbers (order 1).
    pub fn rationals() -> Arc<FieldCtx> {
        FieldCtx::new(1)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Degree of the field extension, totient(M).
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// Minimal polynomial coefficients (monic, constant term first).
    pub fn modulus(&self) -> &[BigRational] {
        &self.modulus
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}
impl Eq for FieldCtx {}

/// Element of Q(zeta_M): the unique residue of degree < totient(M).
#[derive(Clone)]
pub struct CycloScalar {
    ctx: Arc<FieldCtx>,
    /// Dense coefficients of 1, zeta, ..., zeta^(deg-1).
    coeffs: Vec<BigRational>,
}

impl CycloScalar {
    fn normalized(ctx: Arc<FieldCtx>, poly: Vec<BigRational>) -> CycloScalar {
        let poly = poly_trim(poly);
        let reduced = if poly.len() > ctx.degree() {
            poly_divmod(&poly, &ctx.modulus).1
        } else {
            poly
        };
        let mut coeffs = reduced;
        coeffs.resize(ctx.degree(), BigRational::zero());
        CycloScalar { ctx, coeffs }
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> CycloScalar {
        CycloScalar {
            ctx: ctx.clone(),
            coeffs: vec![BigRational::zero(); ctx.degree()],
        }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> CycloScalar {
        CycloScalar::from_rational(ctx, BigRational::one())
    }

    pub fn from_rational(ctx: &Arc<FieldCtx>, r: BigRational) -> CycloScalar {
        CycloScalar::normalized(ctx.clone(), vec![r])
    }

    pub fn from_int(ctx: &Arc<FieldCtx>, n: i64) -> CycloScalar {
        CycloScalar::from_rational(ctx, BigRational::from_integer(BigInt::from(n)))
    }

    /// num/den as an exact rational.
    pub fn from_ratio(ctx: &Arc<FieldCtx>, num: i64, den: i64) -> CycloScalar {
        assert!(den != 0);
        CycloScalar::from_rational(ctx, BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The distinguished primitive root zeta_M (reduces to 1 when M = 1).
    pub fn zeta(ctx: &Arc<FieldCtx>) -> CycloScalar {
        let poly = vec![BigRational::zero(), BigRational::one()];
        CycloScalar::normalized(ctx.clone(), poly)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The rational part if the element is rational, else `None`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_ctx(&self, other: &CycloScalar) -> Result<()> {
        if self.ctx.order() != other.ctx.order() {
            return Err(Error::CtxMismatch(self.ctx.order(), other.ctx.order()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &CycloScalar) -> Result<CycloScalar> {
        self.check_ctx(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycloScalar {
            ctx: self.ctx.clone(),
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &CycloScalar) -> Result<CycloScalar> {
        self.check_ctx(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycloScalar {
            ctx: self.ctx.clone(),
            coeffs,
        })
    }

    pub fn checked_mul(&self, other: &CycloScalar) -> Result<CycloScalar> {
        self.check_ctx(other)?;
        let prod = poly_mul(&self.coeffs, &other.coeffs);
        Ok(CycloScalar::normalized(self.ctx.clone(), prod))
    }

    pub fn checked_div(&self, other: &CycloScalar) -> Result<CycloScalar> {
        self.check_ctx(other)?;
        let inv = other.inv()?;
        self.checked_mul(&inv)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inv(&self) -> Result<CycloScalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // Invariants: r0 = s0 * self (mod modulus), r1 = s1 * self (mod modulus).
        let mut r0 = self.ctx.modulus.clone();
        let mut r1 = poly_trim(self.coeffs.clone());
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1 = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let qs = poly_mul(&q, &s1);
            let mut s = s0.clone();
            s.resize(s.len().max(qs.len()), BigRational::zero());
            for (i, c) in qs.into_iter().enumerate() {
                s[i] -= c;
            }
            s0 = s1;
            s1 = poly_trim(s);
            r0 = r1;
            r1 = r;
        }
        // r0 = gcd, a nonzero constant since the modulus is irreducible.
        debug_assert_eq!(r0.len(), 1);
        let scale = r0[0].recip();
        let inv: Vec<BigRational> = s0.into_iter().map(|c| c * &scale).collect();
        Ok(CycloScalar::normalized(self.ctx.clone(), inv))
    }

    pub fn neg(&self) -> CycloScalar {
        CycloScalar {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<CycloScalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = CycloScalar::one(&self.ctx);
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.checked_mul(&b)?;
            }
            n >>= 1;
            if n > 0 {
                b = b.checked_mul(&b)?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative order when the element is a root of unity, else `None`.
    pub fn root_of_unity_order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut acc = self.clone();
        for k in 1..=2 * self.ctx.order() {
            if acc.is_one() {
                return Some(k);
            }
            acc = acc.checked_mul(self).ok()?;
        }
        None
    }
}

/// The four field operations as a single dispatch, with context checking.
pub fn field_arith(a: &CycloScalar, b: &CycloScalar, op: FieldOp) -> Result<CycloScalar> {
    match op {
        FieldOp::Add => a.checked_add(b),
        FieldOp::Sub => a.checked_sub(b),
        FieldOp::Mul => a.checked_mul(b),
        FieldOp::Div => a.checked_div(b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl PartialEq for CycloScalar {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.order() == other.ctx.order() && self.coeffs == other.coeffs
    }
}
impl Eq for CycloScalar {}

impl PartialOrd for CycloScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CycloScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ctx
            .order()
            .cmp(&other.ctx.order())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

// Operator sugar for same-context arithmetic; panics on mismatched contexts,
// which is a programming error inside this crate. Fallible entry points are
// the checked_* methods and `field_arith`.

impl std::ops::Add for &CycloScalar {
    type Output = CycloScalar;
    fn add(self, rhs: &CycloScalar) -> CycloScalar {
        self.checked_add(rhs).expect("context mismatch")
    }
}
impl std::ops::Sub for &CycloScalar {
    type Output = CycloScalar;
    fn sub(self, rhs: &CycloScalar) -> CycloScalar {
        self.checked_sub(rhs).expect("context mismatch")
    }
}
impl std::ops::Mul for &CycloScalar {
    type Output = CycloScalar;
    fn mul(self, rhs: &CycloScalar) -> CycloScalar {
        self.checked_mul(rhs).expect("context mismatch")
    }
}
impl std::ops::Neg for &CycloScalar {
    type Output = CycloScalar;
    fn neg(self) -> CycloScalar {
        CycloScalar::neg(self)
    }
}

impl fmt::Display for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_coeff = mag.is_one() && k > 0;
            if !unit_coeff {
                write!(f, "{}", mag)?;
            }
            if k > 0 {
                if !unit_coeff {
                    write!(f, "*")?;
                }
                if k == 1 {
                    write!(f, "w")?;
                } else {
                    write!(f, "w^{}", k)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloScalar({})", self)
    }
}
