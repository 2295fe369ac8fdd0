use criterion::{black_box, criterion_group, criterion_main, Criterion};

use lcstrat::curvelab::{curve_with_itinerary, integrate, u_invariant};
use lcstrat::poly::rat;
use lcstrat::polysect::{build_perturbed_family, FamilyKind};
use lcstrat::poset::{prec, PrecConfig, SamplingBudget, SectionOracle};
use lcstrat::spinalg::{acute, q_of_word};
use lcstrat::{CliffordEven, CurvatureSpec, Permutation, Word};
use lcstrat_bench::{section, square_points};

fn exact(c: &mut Criterion) {
    let aba = section(2, &[1, 2, 1]);
    let acb = section(3, &[1, 3, 2]);
    let pts = square_points(4);
    c.bench_function("classify_point aba 81 points", |b| {
        b.iter(|| pts.iter().map(|x| aba.classify_point(black_box(x)).unwrap().word.len()).sum::<usize>())
    });
    c.bench_function("classify_point acb 81 points", |b| {
        b.iter(|| pts.iter().map(|x| acb.classify_point(black_box(x)).unwrap().word.len()).sum::<usize>())
    });
    c.bench_function("betaprime resultants", |b| {
        b.iter(|| build_perturbed_family(FamilyKind::Betaprime, None).unwrap().resultants().unwrap())
    });
    c.bench_function("acute eta n=4", |b| b.iter(|| acute(&Permutation::eta(black_box(4)))));
    let w = Word::parse("a[ba]b[cb]", 3).unwrap();
    c.bench_function("q_of_word", |b| b.iter(|| q_of_word(black_box(&w)).unwrap()));
}

fn numeric(c: &mut Criterion) {
    let mut g = c.benchmark_group("numeric");
    g.sample_size(10);
    let spec = CurvatureSpec::h_speed(3, std::f64::consts::PI, 0.0, 1.5);
    g.bench_function("integrate + events, h n=3", |b| {
        b.iter(|| integrate(black_box(&spec), &CliffordEven::one(3)).unwrap().events().unwrap().len())
    });
    let w = Word::parse("abab", 2).unwrap();
    g.bench_function("curve_with_itinerary abab", |b| b.iter(|| curve_with_itinerary(black_box(&w), None, 0).unwrap()));
    let fam = build_perturbed_family(FamilyKind::Betaprime, Some(rat(2, 5))).unwrap();
    let curve = lcstrat::curvelab::section_curve(&fam, &[rat(0, 1), rat(0, 1)]).unwrap();
    g.bench_function("u_invariant betaprime", |b| b.iter(|| u_invariant(black_box(&curve)).unwrap()));
    g.finish();
}

fn order(c: &mut Criterion) {
    let mut g = c.benchmark_group("poset");
    g.sample_size(10);
    let mut oracle = SectionOracle::new(SamplingBudget::default());
    let (lo, hi) = (Word::parse("aa[aba]", 2).unwrap(), Word::parse("[aba][aba]", 2).unwrap());
    prec(&lo, &hi, &mut oracle, &PrecConfig::default()).unwrap();
    g.bench_function("prec warm oracle", |b| b.iter(|| prec(black_box(&lo), &hi, &mut oracle, &PrecConfig::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, exact, numeric, order);
criterion_main!(benches);
