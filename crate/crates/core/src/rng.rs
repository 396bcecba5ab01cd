//! Seeded pseudorandom sampling for property checks.
//!
//! SplitMix64, fixed in-repo so that identical seeds give identical samples
//! on every platform and toolchain. Not cryptographic; determinism of
//! reports is the only requirement.

use std::sync::Arc;

use crate::field::{CycloScalar, FieldCtx};
use crate::series::LaurentSeries;

#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform-ish integer in `lo..=hi`. Modulo bias is irrelevant here.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    /// Small rational with numerator in [-4, 4] and denominator in [1, 3].
    pub fn rational(&mut self, ctx: &Arc<FieldCtx>) -> CycloScalar {
        let num = self.range_i64(-4, 4);
        let den = self.range_i64(1, 3);
        CycloScalar::from_ratio(ctx, num, den)
    }

    /// Like [`Rng::rational`] but never zero.
    pub fn nonzero_rational(&mut self, ctx: &Arc<FieldCtx>) -> CycloScalar {
        loop {
            let c = self.rational(ctx);
            if !c.is_zero() {
                return c;
            }
        }
    }

    /// Exact Laurent polynomial with up to `max_terms` terms and exponents
    /// in `lo..=hi`.
    pub fn series(
        &mut self,
        ctx: &Arc<FieldCtx>,
        lo: i64,
        hi: i64,
        max_terms: usize,
    ) -> LaurentSeries {
        let count = self.range_i64(1, max_terms as i64) as usize;
        let mut out = LaurentSeries::zero(ctx);
        for _ in 0..count {
            let k = self.range_i64(lo, hi);
            let c = self.rational(ctx);
            out = out.add(&LaurentSeries::monomial(c, k));
        }
        out
    }

    /// Exact Laurent polynomial guaranteed to have at least one nonzero term.
    pub fn nonzero_series(
        &mut self,
        ctx: &Arc<FieldCtx>,
        lo: i64,
        hi: i64,
        max_terms: usize,
    ) -> LaurentSeries {
        loop {
            let s = self.series(ctx, lo, hi, max_terms);
            if !s.is_exactly_zero() {
                return s;
            }
        }
    }
}
