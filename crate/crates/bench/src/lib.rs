//! Shared fixtures for the kernel benchmarks.

use std::sync::Arc;

use phi_loop_core::conformal::{build_current, build_virasoro, LieData};
use phi_loop_core::field::FieldCtx;
use phi_loop_core::loop_alg::{LoopCtx, LoopElement};
use phi_loop_core::rng::Rng;
use phi_loop_core::Deformation;

pub fn virasoro_ctx(p: &str) -> LoopCtx {
    let field = FieldCtx::rationals();
    let def = Deformation::parse(&field, p).expect("valid deformation");
    LoopCtx::new(Arc::new(build_virasoro(&field)), def).expect("context")
}

pub fn sl2_ctx(p: &str) -> LoopCtx {
    let field = FieldCtx::rationals();
    let def = Deformation::parse(&field, p).expect("valid deformation");
    LoopCtx::new(Arc::new(build_current(&LieData::sl2(&field))), def).expect("context")
}

pub fn sample_pairs(lc: &LoopCtx, count: usize, seed: u64) -> Vec<(LoopElement, LoopElement)> {
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|_| {
            (
                lc.random_element(&mut rng, -6, 6).expect("sample"),
                lc.random_element(&mut rng, -6, 6).expect("sample"),
            )
        })
        .collect()
}
