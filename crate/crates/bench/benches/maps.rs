use aeq_bench::pyramid;
use aeq_core::transforms::Mapper;
use aeq_core::DitherStream;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn maps(c: &mut Criterion) {
    let pyr = pyramid(4096, 3, 12, 1);
    let dither = DitherStream::new(1, 0);
    let mut mapper = Mapper::new();
    let (stack, _) = mapper.forward(&pyr, &dither, 4096).unwrap();

    c.bench_function("forward n=4096 k=3..12", |b| {
        b.iter(|| mapper.forward(black_box(&pyr), &dither, 4096).unwrap())
    });
    let mut mapper = Mapper::new();
    c.bench_function("inverse n=4096 k=3..12", |b| b.iter(|| mapper.inverse(black_box(&stack)).unwrap()));
}

criterion_group!(benches, maps);
criterion_main!(benches);
