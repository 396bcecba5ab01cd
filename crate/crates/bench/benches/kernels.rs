use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use phi_loop_bench::{sample_pairs, sl2_ctx, virasoro_ctx};
use phi_loop_core::delta::Window;
use phi_loop_core::field::{CycloScalar, FieldCtx};
use phi_loop_core::parse::parse_series;

fn field_ops(c: &mut Criterion) {
    let ctx = FieldCtx::new(12);
    let zeta = CycloScalar::zeta(&ctx);
    let x = CycloScalar::from_ratio(&ctx, 7, 3)
        .checked_add(&zeta)
        .unwrap();
    c.bench_function("cyclotomic_mul_q12", |b| {
        b.iter(|| black_box(&x).checked_mul(black_box(&zeta)).unwrap())
    });
    c.bench_function("cyclotomic_inv_q12", |b| {
        b.iter(|| black_box(&x).inv().unwrap())
    });
}

fn series_ops(c: &mut Criterion) {
    let ctx = FieldCtx::rationals();
    let f = parse_series(&ctx, "1 - 3/2*x^-1 + x^2 + 5*x^7").unwrap();
    let g = parse_series(&ctx, "x^-3 + 2*x + 1/7*x^4").unwrap();
    c.bench_function("laurent_mul", |b| {
        b.iter(|| black_box(&f).mul(black_box(&g)))
    });
    let h = parse_series(&ctx, "1 + x + 3*x^2").unwrap();
    c.bench_function("laurent_inverse_32", |b| {
        b.iter(|| black_box(&h).inverse(32).unwrap())
    });
}

fn loop_brackets(c: &mut Criterion) {
    let vir = virasoro_ctx("x^2");
    let pairs = sample_pairs(&vir, 16, 7);
    c.bench_function("bracket_virasoro_x2", |b| {
        b.iter(|| {
            for (u, v) in &pairs {
                black_box(vir.bracket(u, v).unwrap());
            }
        })
    });

    let sl2 = sl2_ctx("1 + x");
    let pairs = sample_pairs(&sl2, 16, 7);
    c.bench_function("bracket_sl2_one_plus_x", |b| {
        b.iter(|| {
            for (u, v) in &pairs {
                black_box(sl2.bracket(u, v).unwrap());
            }
        })
    });
}

fn field_commutator(c: &mut Criterion) {
    let vir = virasoro_ctx("x");
    c.bench_function("field_commutator_virasoro_w4", |b| {
        b.iter(|| {
            black_box(
                vir.check_field_commutator("L", "L", Window::square(4))
                    .unwrap(),
            )
        })
    });
}

criterion_group!(
    benches,
    field_ops,
    series_ops,
    loop_brackets,
    field_commutator
);
criterion_main!(benches);
