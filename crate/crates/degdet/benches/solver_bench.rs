//! Sequential vs parallel execution on the two batch-heavy surfaces: the
//! Monte Carlo determinant oracle (independent substitution trials) and the
//! valuated greedy `max_deg_subdet` (independent candidate columns).
//!
//! Run with `cargo bench -p degdet`. Building with `--no-default-features`
//! removes rayon, in which case the `auto` rows degenerate to `sequential`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use degdet::exec::ExecMode;
use degdet::field::{Field, GfP};
use degdet::mvsp::MvspStrategy;
use degdet::pencil::{commutative_degdet_oracle_mode, Pencil, Term};
use degdet::poly::Laurent;
use degdet::solver::max_deg_subdet_mode;

const MODES: [(&str, ExecMode); 2] =
    [("sequential", ExecMode::Sequential), ("auto", ExecMode::Auto)];

/// Square pencil with monomial rank-1 variable terms, dense enough that each
/// oracle trial does real elimination work.
fn rank1_pencil(f: &GfP, rng: &mut ChaCha8Rng, n: usize, m: usize) -> Pencil<GfP> {
    let mut terms = vec![Term::zero()];
    for _ in 0..m {
        let a: Vec<u64> = (0..n).map(|_| f.sample(rng)).collect();
        let b: Vec<u64> = (0..n).map(|_| f.sample(rng)).collect();
        let k = rng.gen_range(0..=2);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c = f.mul(&a[i], &b[j]);
                if !f.is_zero(&c) {
                    entries.push((i, j, Laurent::monomial(f, c, k)));
                }
            }
        }
        terms.push(Term::from_entries(entries));
    }
    Pencil::new(n, n, terms)
}

/// Wide sparse pencil; the greedy subdet scan evaluates hundreds of
/// candidate columns per round.
fn wide_pencil(f: &GfP, rng: &mut ChaCha8Rng, n: usize, np: usize) -> Pencil<GfP> {
    let mut terms = Vec::new();
    for ti in 0..3 {
        let density = if ti == 0 { 0.5 } else { 0.4 };
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..np {
                if rng.gen_bool(density) {
                    entries.push((
                        i,
                        j,
                        Laurent::monomial(f, f.sample_nonzero(rng), rng.gen_range(0..=2)),
                    ));
                }
            }
        }
        terms.push(Term::from_entries(entries));
    }
    Pencil::new(n, np, terms)
}

fn bench_oracle_trials(c: &mut Criterion) {
    let f = GfP::new(10007).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = rank1_pencil(&f, &mut rng, 12, 16);
    let mut group = c.benchmark_group("oracle_12x12_32_trials");
    group.sample_size(10);
    for (label, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| commutative_degdet_oracle_mode(&f, &a, 32, 0xBE, mode).unwrap().value)
        });
    }
    group.finish();
}

fn bench_subdet_scan(c: &mut Criterion) {
    let f = GfP::new(10007).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = wide_pencil(&f, &mut rng, 2, 40);
    let mut group = c.benchmark_group("subdet_2x40_greedy");
    group.sample_size(10);
    for (label, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| max_deg_subdet_mode(&f, &a, &MvspStrategy::Auto, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_oracle_trials, bench_subdet_scan);
criterion_main!(benches);
