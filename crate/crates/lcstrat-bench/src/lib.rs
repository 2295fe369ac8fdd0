//! Fixtures shared by the benchmarks in `benches/`.

use lcstrat::poly::rat;
use lcstrat::{CliffordEven, Permutation, Rat, SectionFamily};

pub fn section(n: usize, word: &[usize]) -> SectionFamily {
    let sigma = Permutation::from_word(n, word).expect("valid word");
    lcstrat::polysect::build_section(&sigma, &CliffordEven::one(n)).expect("section")
}

/// Points of the square `[−1/2, 1/2]²` with denominators `2·steps`.
pub fn square_points(steps: i64) -> Vec<Vec<Rat>> {
    let mut out = Vec::new();
    for i in -steps..=steps {
        for j in -steps..=steps {
            out.push(vec![rat(i, 2 * steps), rat(j, 2 * steps)]);
        }
    }
    out
}
