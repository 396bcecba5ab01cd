//! The deformation p(x), its derivation D_p = p(x) d/dx, and the associated
//! one-parameter substitution series phi(x,z) = exp(z D_p)(x).
//!
//! phi generalizes x + z (p = 1) and x e^z (p = x) and satisfies the
//! composition law phi(phi(x,z1),z2) = phi(x,z1+z2), which
//! [`Deformation::phi_compose_check`] verifies order by order.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};
use crate::parse::parse_series;
use crate::series::{binomial, inv_factorial, LaurentSeries};

/// A nonzero exact Laurent polynomial p(x) together with p_bar = x^-1 p.
#[derive(Clone, PartialEq)]
pub struct Deformation {
    p: LaurentSeries,
    p_bar: LaurentSeries,
}

impl Deformation {
    pub fn new(p: LaurentSeries) -> Result<Deformation> {
        if !p.is_exact() {
            return Err(Error::InvalidDeformation(
                "p(x) must be an exact Laurent polynomial".into(),
            ));
        }
        if p.is_exactly_zero() {
            return Err(Error::InvalidDeformation("p(x) must be nonzero".into()));
        }
        let p_bar = p.shift(-1);
        Ok(Deformation { p, p_bar })
    }

    pub fn parse(ctx: &Arc<FieldCtx>, src: &str) -> Result<Deformation> {
        Deformation::new(parse_series(ctx, src)?)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.p.ctx()
    }

    pub fn p(&self) -> &LaurentSeries {
        &self.p
    }

    /// x^-1 p(x).
    pub fn p_bar(&self) -> &LaurentSeries {
        &self.p_bar
    }

    /// One application of the derivation: p(x) f'(x).
    pub fn d_p_once(&self, f: &LaurentSeries) -> LaurentSeries {
        self.p.mul(&f.derivative())
    }

    /// Divided power (p d/dx)^(j) f = (p d/dx)^j f / j!.
    pub fn d_p(&self, f: &LaurentSeries, j: u32) -> LaurentSeries {
        let mut out = f.clone();
        for _ in 0..j {
            out = self.d_p_once(&out);
        }
        out.scalar_mul(&inv_factorial(f.ctx(), j))
    }

    /// p(x)^-1 truncated at `target_prec`.
    pub fn p_inverse(&self, target_prec: i64) -> LaurentSeries {
        self.p.inverse(target_prec).expect("p is nonzero and exact")
    }

    /// Coefficients of z^0..z^order in phi(x,z): the k-th entry is D_p^(k)(x).
    pub fn phi_expand(&self, order: u32) -> Vec<LaurentSeries> {
        let ctx = self.ctx();
        let mut out = Vec::with_capacity(order as usize + 1);
        out.push(LaurentSeries::x(ctx));
        for k in 1..=order {
            // c_k = D_p(c_{k-1}) / k keeps the divided-power normalization.
            let prev = out.last().expect("nonempty");
            let next = self
                .d_p_once(prev)
                .scalar_mul(&CycloScalar::from_ratio(ctx, 1, k as i64));
            out.push(next);
        }
        out
    }

    /// Check the composition law phi(phi(x,z1),z2) = phi(x,z1+z2) for all
    /// bidegrees (i,j) with i + j <= order. Exact.
    pub fn phi_compose_check(&self, order: u32) -> bool {
        let coeffs = self.phi_expand(order);
        compose_law_holds(self, &coeffs, order)
    }
}

impl std::fmt::Debug for Deformation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Deformation(p = {})", self.p)
    }
}

/// Core of the composition-law check, on caller-supplied expansion
/// coefficients so corrupted expansions can be probed in tests.
pub(crate) fn compose_law_holds(def: &Deformation, coeffs: &[LaurentSeries], order: u32) -> bool {
    let ctx = def.ctx();
    let n = order as usize;
    if coeffs.len() < n + 1 {
        return false;
    }

    // delta = phi(x,z1) - x has z1-valuation 1; dp[t][i] is the coefficient
    // of z1^i in delta^t, for i <= order.
    let zero = LaurentSeries::zero(ctx);
    let mut dp: Vec<Vec<LaurentSeries>> = Vec::with_capacity(n + 1);
    let mut row0 = vec![zero.clone(); n + 1];
    row0[0] = LaurentSeries::one(ctx);
    dp.push(row0);
    for t in 1..=n {
        let mut row = vec![zero.clone(); n + 1];
        for i in t..=n {
            let mut acc = zero.clone();
            for k in 1..=(i - t + 1) {
                acc = acc.add(&coeffs[k].mul(&dp[t - 1][i - k]));
            }
            row[i] = acc;
        }
        dp.push(row);
    }

    for i in 0..=n {
        for j in 0..=(n - i) {
            // z1^i z2^j of phi(phi(x,z1),z2): Taylor expansion of c_j around x.
            let mut lhs = zero.clone();
            for t in 0..=i {
                lhs = lhs.add(&coeffs[j].derivative_divided(t as u32).mul(&dp[t][i]));
            }
            let rhs = coeffs[i + j].scalar_mul(&binomial(ctx, (i + j) as u32, i as u32));
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}
