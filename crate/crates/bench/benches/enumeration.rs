use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spinpoly::graphs::enumerate_graphs;
use spinpoly::polytopes::assemble;
use spinpoly::toric::{assembled_boxtimes_order, hilbert, is_normal, quadratic_squarefree_gb, relation_degree};
use spinpoly_bench::{graph_fixtures, polytope};

fn lattice_points(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice_points");
    for (name, g, r, level) in graph_fixtures() {
        let p = polytope(&g, &r, level);
        for n in [1u32, 3] {
            group.bench_with_input(BenchmarkId::new(name.clone(), n), &n, |b, &n| {
                b.iter(|| black_box(p.count_lattice_points(n).unwrap()))
            });
        }
    }
    group.finish();
}

fn hilbert_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("hilbert");
    for (name, g, r, level) in graph_fixtures() {
        let p = polytope(&g, &r, level);
        group.bench_function(name, |b| b.iter(|| black_box(hilbert(&p, 3).unwrap())));
    }
    group.finish();
}

fn fiber_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("fibers");
    group.sample_size(10);
    for (name, g, r, level) in graph_fixtures().into_iter().take(2) {
        let p = polytope(&g, &r, level);
        group.bench_function(format!("normal/{name}"), |b| b.iter(|| black_box(is_normal(&p, 4).unwrap())));
        group.bench_function(format!("relations/{name}"), |b| {
            b.iter(|| black_box(relation_degree(&p, 3, 4).unwrap()))
        });
    }
    let (_, g, _, level) = graph_fixtures().pop().unwrap();
    let asm = assemble(&g, &[2, 2, 2, 2], level).unwrap();
    let order = assembled_boxtimes_order(&asm).unwrap().into();
    group.bench_function("gb/doubled edge n=4", |b| {
        b.iter(|| black_box(quadratic_squarefree_gb(&asm.polytope, &order, 3).unwrap()))
    });
    group.finish();
}

fn graph_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_graphs");
    for (genus, n) in [(0, 5), (1, 2), (1, 3)] {
        group.bench_function(format!("g={genus} n={n}"), |b| {
            b.iter(|| black_box(enumerate_graphs(genus, n, n + 2 * genus).unwrap().len()))
        });
    }
    group.finish();
}

criterion_group!(benches, lattice_points, hilbert_tables, fiber_checks, graph_enumeration);
criterion_main!(benches);
