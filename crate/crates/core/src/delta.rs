//! Two-variable delta-type formal distributions in normal form.
//!
//! A [`DeltaTerm`] (lambda, j, A) denotes
//!
//! ```text
//!     A(w) * (p(w) d/dw)^(j) [ p_bar(lambda^-1 z) * delta(lambda w / z) ]
//! ```
//!
//! where `delta(y) = sum_{k in Z} y^k` is the formal delta function. The
//! doubly infinite distribution is never materialized; everything is driven
//! by exact coefficient extraction. Finite sums of such terms, canonicalized
//! so that each (lambda, j) appears once, form a [`DeltaSum`]. The normal
//! form is unique, so equality of sums is a term-by-term comparison.

use std::collections::BTreeMap;

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::field::CycloScalar;
use crate::series::{binomial, LaurentSeries};

/// One normal-form summand A(w) (p(w) d/dw)^(j) [p_bar(lambda^-1 z) delta(lambda w/z)].
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTerm {
    pub lambda: CycloScalar,
    pub j: u32,
    pub a: LaurentSeries,
}

impl DeltaTerm {
    pub fn new(lambda: CycloScalar, j: u32, a: LaurentSeries) -> Result<DeltaTerm> {
        if lambda.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(DeltaTerm { lambda, j, a })
    }
}

/// Canonical finite sum of delta-type terms over a fixed deformation.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaSum {
    def: Deformation,
    terms: Vec<DeltaTerm>,
}

/// Rectangular index window for coefficient sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub m_lo: i64,
    pub m_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
}

impl Window {
    /// The square |m|, |n| <= r.
    pub fn square(r: i64) -> Window {
        Window {
            m_lo: -r,
            m_hi: r,
            n_lo: -r,
            n_hi: r,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.m_lo..=self.m_hi).flat_map(move |m| (self.n_lo..=self.n_hi).map(move |n| (m, n)))
    }
}

/// Coefficients of z^(-m-1) w^n over a window, row-major in m.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub window: Window,
    pub values: Vec<Vec<CycloScalar>>,
}

impl CoeffTable {
    pub fn is_zero(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.iter().all(|c| c.is_zero()))
    }

    pub fn get(&self, m: i64, n: i64) -> Option<&CycloScalar> {
        let i = usize::try_from(m - self.window.m_lo).ok()?;
        let j = usize::try_from(n - self.window.n_lo).ok()?;
        self.values.get(i)?.get(j)
    }
}

impl DeltaSum {
    pub fn empty(def: Deformation) -> DeltaSum {
        DeltaSum {
            def,
            terms: Vec::new(),
        }
    }

    pub fn new(def: Deformation, terms: Vec<DeltaTerm>) -> Result<DeltaSum> {
        for t in &terms {
            if t.lambda.is_zero() {
                return Err(Error::DivisionByZero);
            }
        }
        let mut sum = DeltaSum { def, terms };
        sum.canonicalize();
        Ok(sum)
    }

    pub fn def(&self) -> &Deformation {
        &self.def
    }

    pub fn terms(&self) -> &[DeltaTerm] {
        &self.terms
    }

    /// Merge duplicate (lambda, j) slots and drop exactly-zero amplitudes.
    fn canonicalize(&mut self) {
        let mut slots: BTreeMap<(CycloScalar, u32), LaurentSeries> = BTreeMap::new();
        for t in self.terms.drain(..) {
            let key = (t.lambda.clone(), t.j);
            match slots.get_mut(&key) {
                Some(a) => *a = a.add(&t.a),
                None => {
                    slots.insert(key, t.a);
                }
            }
        }
        self.terms = slots
            .into_iter()
            .filter(|(_, a)| !a.is_exactly_zero())
            .map(|((lambda, j), a)| DeltaTerm { lambda, j, a })
            .collect();
    }

    /// Sum of two delta sums over the same deformation.
    pub fn add(&self, other: &DeltaSum) -> DeltaSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let mut out = DeltaSum {
            def: self.def.clone(),
            terms,
        };
        out.canonicalize();
        out
    }

    pub fn scalar_mul(&self, s: &CycloScalar) -> DeltaSum {
        let mut out = DeltaSum {
            def: self.def.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| DeltaTerm {
                    lambda: t.lambda.clone(),
                    j: t.j,
                    a: t.a.scalar_mul(s),
                })
                .collect(),
        };
        out.canonicalize();
        out
    }

    /// Exact coefficient of z^(-m-1) w^n.
    pub fn coeff(&self, m: i64, n: i64) -> Result<CycloScalar> {
        let ctx = self.def.ctx();
        let mut acc = CycloScalar::zero(ctx);
        for t in &self.terms {
            acc = &acc + &term_coeff(&self.def, t, m, n)?;
        }
        Ok(acc)
    }

    pub fn coeff_table(&self, window: Window) -> Result<CoeffTable> {
        let mut values = Vec::new();
        for m in window.m_lo..=window.m_hi {
            let mut row = Vec::new();
            for n in window.n_lo..=window.n_hi {
                row.push(self.coeff(m, n)?);
            }
            values.push(row);
        }
        Ok(CoeffTable { window, values })
    }

    /// Coefficient table of (z - lambda0 w)^k times this sum.
    pub fn mul_binomial(
        &self,
        lambda0: &CycloScalar,
        k: u32,
        window: Window,
    ) -> Result<CoeffTable> {
        if lambda0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = self.def.ctx();
        let mut values = Vec::new();
        for m in window.m_lo..=window.m_hi {
            let mut row = Vec::new();
            for n in window.n_lo..=window.n_hi {
                let mut acc = CycloScalar::zero(ctx);
                for t in 0..=k {
                    // (z - l0 w)^k = sum_t C(k,t) z^(k-t) (-l0 w)^t; the factor
                    // z^(k-t) w^t shifts the probed cell to (m + k - t, n - t).
                    let coeff = self.coeff(m + i64::from(k - t), n - i64::from(t))?;
                    let sign =
                        binomial(ctx, k, t).checked_mul(&lambda0.neg().pow(i64::from(t))?)?;
                    acc = &acc + &(&coeff * &sign);
                }
                row.push(acc);
            }
            values.push(row);
        }
        Ok(CoeffTable { window, values })
    }

    /// Canonical-form equality; exact, no window probing.
    pub fn equal(&self, other: &DeltaSum) -> bool {
        self.def == other.def && self.terms == other.terms
    }

    /// Coefficients of z0^0..z0^order in exp(z0 p(w) d/dw) applied to this
    /// sum: entry k is (p(w) d/dw)^(k) of the sum.
    pub fn exp_shift(&self, order: u32) -> Vec<DeltaSum> {
        let ctx = self.def.ctx();
        let mut out = Vec::with_capacity(order as usize + 1);
        for k in 0..=order {
            let mut terms = Vec::new();
            for t in &self.terms {
                // Divided-power Leibniz rule: D^(k)(A * D^(j) B) splits as
                // sum_l D^(k-l) A * C(l + j, j) D^(l + j) B.
                for l in 0..=k {
                    let a = self
                        .def
                        .d_p(&t.a, k - l)
                        .scalar_mul(&binomial(ctx, l + t.j, t.j));
                    terms.push(DeltaTerm {
                        lambda: t.lambda.clone(),
                        j: t.j + l,
                        a,
                    });
                }
            }
            let mut sum = DeltaSum {
                def: self.def.clone(),
                terms,
            };
            sum.canonicalize();
            out.push(sum);
        }
        out
    }

    /// Search a window for a cell where two sums disagree.
    pub fn differ_witness(&self, other: &DeltaSum, radius: i64) -> Result<Option<(i64, i64)>> {
        for (m, n) in Window::square(radius).cells() {
            if self.coeff(m, n)? != other.coeff(m, n)? {
                return Ok(Some((m, n)));
            }
        }
        Ok(None)
    }

    /// Window radius guaranteed to exhibit a difference of canonical forms:
    /// max derivative order plus the amplitude window span plus margin.
    pub fn probe_radius(&self, other: &DeltaSum) -> i64 {
        let mut r = 4;
        for t in self.terms.iter().chain(other.terms.iter()) {
            let span = match (t.a.lo(), t.a.hi()) {
                (Some(lo), Some(hi)) => (hi - lo).max(lo.abs()).max(hi.abs()),
                _ => 0,
            };
            r = r.max(i64::from(t.j) + span + 4);
        }
        r
    }
}

/// Coefficient of z^(-m-1) w^n in a single term.
///
/// Writing the base distribution as sum_{k,r} pbar_r lambda^(k-r) w^k z^(r-k),
/// the z-exponent pins k = m + 1 + r, giving
///
/// ```text
///     lambda^(m+1) * sum_r pbar_r [w^n] ( A(w) * (p d/dw)^(j) w^(m+1+r) )
/// ```
///
/// with r running over the finitely many exponents of p_bar.
pub fn term_coeff(def: &Deformation, t: &DeltaTerm, m: i64, n: i64) -> Result<CycloScalar> {
    let ctx = def.ctx();
    let mut acc = CycloScalar::zero(ctx);
    for (r, pbar_r) in def.p_bar().terms() {
        let k = m + 1 + r;
        let dmon = def.d_p(&LaurentSeries::monomial(CycloScalar::one(ctx), k), t.j);
        let c = t.a.mul(&dmon).coeff(n)?;
        acc = &acc + &(&c * pbar_r);
    }
    acc.checked_mul(&t.lambda.pow(m + 1)?)
}

/// Coefficient of z^(-m-1) w^n of the unit-amplitude term (lambda, j, 1).
pub fn unit_term_coeff(
    def: &Deformation,
    lambda: &CycloScalar,
    j: u32,
    m: i64,
    n: i64,
) -> Result<CycloScalar> {
    let t = DeltaTerm {
        lambda: lambda.clone(),
        j,
        a: LaurentSeries::one(def.ctx()),
    };
    term_coeff(def, &t, m, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn rational_def(p: &str) -> Deformation {
        Deformation::parse(&FieldCtx::rationals(), p).unwrap()
    }

    fn unit_sum(def: &Deformation, lambda: i64, j: u32) -> DeltaSum {
        let ctx = def.ctx();
        DeltaSum::new(
            def.clone(),
            vec![DeltaTerm::new(
                CycloScalar::from_int(ctx, lambda),
                j,
                LaurentSeries::one(ctx),
            )
            .unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn base_coefficients_for_p_x() {
        // p = x gives p_bar = 1, so the base term is delta(w/z) itself:
        // nonzero exactly when n = m + 1.
        let def = rational_def("x");
        let s = unit_sum(&def, 1, 0);
        for m in -5..=5 {
            for n in -5..=5 {
                let c = s.coeff(m, n).unwrap();
                if n == m + 1 {
                    assert!(c.is_one(), "({}, {})", m, n);
                } else {
                    assert!(c.is_zero(), "({}, {})", m, n);
                }
            }
        }
    }

    #[test]
    fn base_coefficients_for_p_one() {
        // p = 1 gives p_bar = x^-1 and the term z^-1 delta(w/z): nonzero
        // exactly on the diagonal n = m.
        let def = rational_def("1");
        let s = unit_sum(&def, 1, 0);
        for m in -5..=5 {
            for n in -5..=5 {
                let c = s.coeff(m, n).unwrap();
                assert_eq!(c.is_one(), n == m, "({}, {})", m, n);
            }
        }
    }

    #[test]
    fn empty_sum_is_zero_everywhere() {
        let def = rational_def("1 + x");
        let s = DeltaSum::empty(def);
        for (m, n) in Window::square(4).cells() {
            assert!(s.coeff(m, n).unwrap().is_zero());
        }
    }

    /// Brute-force oracle: expand delta(lambda w/z) with |k| <= 40 into an
    /// explicit bivariate table keyed by (z-exponent, w-exponent). No
    /// exponent pinning; every delta summand is enumerated.
    fn brute_force_table(def: &Deformation, t: &DeltaTerm) -> BTreeMap<(i64, i64), CycloScalar> {
        let ctx = def.ctx();
        let mut table: BTreeMap<(i64, i64), CycloScalar> = BTreeMap::new();
        for k in -40..=40i64 {
            for (r, pbar_r) in def.p_bar().terms() {
                let scale = &t.lambda.pow(k - r).unwrap() * pbar_r;
                let dmon = def.d_p(&LaurentSeries::monomial(CycloScalar::one(ctx), k), t.j);
                let in_w = t.a.mul(&dmon);
                for (we, wc) in in_w.terms() {
                    let e = table
                        .entry((r - k, we))
                        .or_insert_with(|| CycloScalar::zero(ctx));
                    *e = &*e + &(&scale * wc);
                }
            }
        }
        table
    }

    #[test]
    fn closed_form_matches_brute_force_expansion() {
        let ctx = FieldCtx::new(3);
        let zeta = CycloScalar::zeta(&ctx);
        let two = CycloScalar::from_int(&ctx, 2);
        for p in ["1", "x", "x^2"] {
            let def = Deformation::parse(&ctx, p).unwrap();
            for lambda in [CycloScalar::one(&ctx), two.clone(), zeta.clone()] {
                for j in 0..=2u32 {
                    let a = crate::parse::parse_series(&ctx, "2 - x^-1 + 1/3*x^2").unwrap();
                    let t = DeltaTerm::new(lambda.clone(), j, a).unwrap();
                    let slow = brute_force_table(&def, &t);
                    for (m, n) in Window::square(12).cells() {
                        let fast = term_coeff(&def, &t, m, n).unwrap();
                        let expected = slow
                            .get(&(-m - 1, n))
                            .cloned()
                            .unwrap_or_else(|| CycloScalar::zero(&ctx));
                        assert_eq!(
                            fast, expected,
                            "p={} lambda={} j={} ({},{})",
                            p, lambda, j, m, n
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn annihilation_by_matching_binomial_powers() {
        // (z - lambda w)^k kills a j-th derivative term whenever k > j.
        for p in ["1", "x", "x^2"] {
            let def = rational_def(p);
            let ctx = def.ctx().clone();
            for lambda in [1i64, 2] {
                for j in 0..=2u32 {
                    for k in (j + 1)..=3 {
                        let s = unit_sum(&def, lambda, j);
                        let table = s
                            .mul_binomial(
                                &CycloScalar::from_int(&ctx, lambda),
                                k,
                                Window::square(12),
                            )
                            .unwrap();
                        assert!(table.is_zero(), "p={} lambda={} j={} k={}", p, lambda, j, k);
                    }
                }
            }
        }
    }

    #[test]
    fn binomial_power_zero_is_identity() {
        let def = rational_def("x^2");
        let ctx = def.ctx().clone();
        let s = unit_sum(&def, 2, 1);
        let w = Window::square(6);
        let table = s
            .mul_binomial(&CycloScalar::from_int(&ctx, 3), 0, w)
            .unwrap();
        assert_eq!(table, s.coeff_table(w).unwrap());
    }

    #[test]
    fn mismatched_binomial_root_does_not_annihilate() {
        let def = rational_def("x");
        let ctx = def.ctx().clone();
        let s = unit_sum(&def, 1, 1);
        let table = s
            .mul_binomial(&CycloScalar::from_int(&ctx, 2), 1, Window::square(6))
            .unwrap();
        assert!(!table.is_zero());
    }

    #[test]
    fn truncated_amplitude_errors_outside_its_window() {
        let def = rational_def("x");
        let ctx = def.ctx().clone();
        // Amplitude known only below exponent 1: probing a cell that needs
        // higher amplitude coefficients must fail rather than guess.
        let a = LaurentSeries::one(&ctx).truncate(1);
        let t = DeltaTerm::new(CycloScalar::one(&ctx), 0, a).unwrap();
        // p = x has p_bar = 1, so cell (m, n) reads the amplitude at
        // n - m - 1; (0, 3) needs exponent 2.
        assert!(matches!(
            term_coeff(&def, &t, 0, 3),
            Err(crate::error::Error::PrecisionInsufficient(_))
        ));
        // Cells inside the window still extract exactly.
        assert!(term_coeff(&def, &t, 0, 1).unwrap().is_one());
        assert!(term_coeff(&def, &t, 3, 3).unwrap().is_zero());
    }

    #[test]
    fn equality_is_canonical() {
        let def = rational_def("x");
        let ctx = def.ctx().clone();
        let one = LaurentSeries::one(&ctx);
        let t1 = DeltaTerm::new(CycloScalar::from_int(&ctx, 2), 1, one.clone()).unwrap();
        let t2 = DeltaTerm::new(CycloScalar::one(&ctx), 0, LaurentSeries::x(&ctx)).unwrap();
        let s12 = DeltaSum::new(def.clone(), vec![t1.clone(), t2.clone()]).unwrap();
        let s21 = DeltaSum::new(def.clone(), vec![t2.clone(), t1.clone()]).unwrap();
        assert!(s12.equal(&s21));
        assert!(s12.equal(&s12));

        let doubled = DeltaSum::new(def.clone(), vec![t1.clone(), t1.clone()]).unwrap();
        let single = DeltaSum::new(def.clone(), vec![t1]).unwrap();
        assert!(!doubled.equal(&single));

        // Cancelling amplitudes leave the empty sum.
        let t2neg =
            DeltaTerm::new(CycloScalar::one(&ctx), 0, LaurentSeries::x(&ctx).neg()).unwrap();
        let cancel = DeltaSum::new(def.clone(), vec![t2, t2neg]).unwrap();
        assert!(cancel.terms().is_empty());
    }

    #[test]
    fn unequal_sums_show_a_window_witness() {
        let def = rational_def("1 + x");
        let ctx = def.ctx().clone();
        let s1 = unit_sum(&def, 1, 1);
        let extra = DeltaSum::new(
            def.clone(),
            vec![
                DeltaTerm::new(CycloScalar::from_int(&ctx, 2), 0, LaurentSeries::x(&ctx)).unwrap(),
            ],
        )
        .unwrap();
        let s2 = s1.add(&extra);
        assert!(!s1.equal(&s2));
        let r = s1.probe_radius(&s2);
        assert!(s1.differ_witness(&s2, r).unwrap().is_some());
        assert!(s1.differ_witness(&s1, 4).unwrap().is_none());
    }

    #[test]
    fn exp_shift_on_constant_amplitude() {
        // With A = 1 the shift just raises the derivative index.
        let def = rational_def("x^2");
        let s = unit_sum(&def, 1, 0);
        let shifted = s.exp_shift(3);
        assert_eq!(shifted[0], s);
        for (k, sk) in shifted.iter().enumerate() {
            assert_eq!(sk.terms().len(), 1);
            assert_eq!(sk.terms()[0].j, k as u32);
            assert_eq!(sk.terms()[0].a, LaurentSeries::one(def.ctx()));
        }
    }

    #[test]
    fn exp_shift_leibniz_on_linear_amplitude() {
        // A = w: the first shift produces the (lambda, 1, w) term plus the
        // derivative of the amplitude as a (lambda, 0, p) term.
        let def = rational_def("x^2");
        let ctx = def.ctx().clone();
        let s = DeltaSum::new(
            def.clone(),
            vec![DeltaTerm::new(CycloScalar::one(&ctx), 0, LaurentSeries::x(&ctx)).unwrap()],
        )
        .unwrap();
        let shifted = s.exp_shift(1);
        let entry = &shifted[1];
        assert_eq!(entry.terms().len(), 2);
        assert_eq!(entry.terms()[0].j, 0);
        assert_eq!(entry.terms()[0].a, def.p().clone());
        assert_eq!(entry.terms()[1].j, 1);
        assert_eq!(entry.terms()[1].a, LaurentSeries::x(&ctx));
    }

    #[test]
    fn exp_shift_composition_is_divided_power_consistent() {
        // Applying the first-order shift to the first-order shift doubles
        // the second divided power: D(D(s)) = 2 D^(2)(s).
        let def = rational_def("x");
        let ctx = def.ctx().clone();
        let a = crate::parse::parse_series(&ctx, "x^-1 + 3").unwrap();
        let s = DeltaSum::new(
            def.clone(),
            vec![DeltaTerm::new(CycloScalar::from_int(&ctx, 2), 1, a).unwrap()],
        )
        .unwrap();
        let shifted = s.exp_shift(2);
        let double = shifted[1].exp_shift(1)[1].clone();
        for (m, n) in Window::square(8).cells() {
            let lhs = double.coeff(m, n).unwrap();
            let rhs = &CycloScalar::from_int(&ctx, 2) * &shifted[2].coeff(m, n).unwrap();
            assert_eq!(lhs, rhs, "({}, {})", m, n);
        }
    }
}
