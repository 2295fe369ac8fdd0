use std::collections::BTreeSet;

use lcstrat::poly::{rat, rint, MultiPoly, Rat};
use lcstrat::polysect::{build_perturbed_family, build_section, FamilyKind, GridSpec, SectionFamily};
use lcstrat::{CliffordEven, Permutation};

fn section(n: usize, word: &[usize]) -> SectionFamily {
    build_section(&Permutation::from_word(n, word).unwrap(), &CliffordEven::one(n)).unwrap()
}

fn p(s: &SectionFamily, e: &str) -> MultiPoly {
    MultiPoly::parse(&s.ring, e).unwrap()
}

fn label(s: &SectionFamily, x: &[Rat]) -> String {
    s.classify_point(x).unwrap().word.to_string()
}

#[test]
fn aba_polynomials() {
    let s = section(2, &[1, 2, 1]);
    assert_eq!(s.minors[0], p(&s, "t^2/2 + x2"));
    assert_eq!(s.minors[1], p(&s, "t^2/2 + x1*t - x2"));
    let d = s.discriminants().unwrap();
    assert_eq!(d[0], p(&s, "-2*x2"));
    assert_eq!(d[1], p(&s, "x1^2 + 2*x2"));
    let r = s.resultants().unwrap();
    assert_eq!(r[&(1, 2)], (&d[0] * &d[1]).scale(&rat(-1, 4)));
}

#[test]
fn acb_polynomials() {
    let s = section(3, &[1, 3, 2]);
    assert_eq!(s.minors[0], p(&s, "t^2/2 + x2"));
    assert_eq!(s.minors[1], p(&s, "-t"));
    assert_eq!(s.minors[2], p(&s, "t^2/2 - x1"));
    let d = s.discriminants().unwrap();
    assert_eq!(d[0], p(&s, "-2*x2"));
    assert_eq!(d[1], p(&s, "1"));
    assert_eq!(d[2], p(&s, "2*x1"));
    let r = s.resultants().unwrap();
    assert_eq!(r[&(1, 3)], p(&s, "(x1 + x2)^2/4"));
    assert_eq!(d[0], r[&(1, 2)].scale(&rint(-2)));
    assert_eq!(d[2], r[&(2, 3)].scale(&rint(-2)));
}

#[test]
fn betaprime_polynomials() {
    let s = build_perturbed_family(FamilyKind::Betaprime, None).unwrap();
    assert_eq!(s.minors[0], p(&s, "u*t^3/3 + t^2/2 + x2"));
    assert_eq!(s.minors[1], p(&s, "-t"));
    assert_eq!(s.minors[2], p(&s, "-u*t^3/3 + t^2/2 - x1"));
    let d = s.discriminants().unwrap();
    assert_eq!(d[0], p(&s, "-x2*(6*u^2*x2 + 1)/2"));
    assert_eq!(d[2], p(&s, "-x1*(6*u^2*x1 - 1)/2"));
    let r = s.resultants().unwrap();
    assert_eq!(r[&(1, 3)], p(&s, "u/108*(4*u^2*(x2 - x1)^3 + 9*(x1 + x2)^2)"));
    assert_eq!(r[&(1, 2)], p(&s, "x2"));
    assert_eq!(r[&(2, 3)], p(&s, "x1"));
}

#[test]
fn perturbed_families_degenerate_to_acb() {
    let base = section(3, &[1, 3, 2]);
    for kind in [FamilyKind::Betaprime, FamilyKind::MatrixU] {
        let s = build_perturbed_family(kind, Some(rint(0))).unwrap();
        assert_eq!(s.minors, base.minors, "{kind:?}");
    }
}

#[test]
fn matrix_u_entries() {
    let s = build_perturbed_family(FamilyKind::MatrixU, None).unwrap();
    let expect = [
        ["-t", "-1", "0", "0"],
        ["-t^3/6 - x1*t", "-t^2/2 - x1", "-t", "-1"],
        ["-u*t - 1", "-u", "0", "0"],
        ["t^2/2 + x2", "t", "1", "0"],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(s.m[i][j], p(&s, expect[i][j]), "entry {i},{j}");
        }
    }
}

#[test]
fn aba_stratum_labels() {
    let s = section(2, &[1, 2, 1]);
    let cases = [
        ((1, 8), (1, 4), "bb"),
        ((0, 1), (-1, 4), "aa"),
        ((-1, 2), (-1, 16), "abab"),
        ((1, 2), (-1, 16), "baba"),
        ((-1, 4), (0, 1), "[ab]b"),
        ((1, 4), (0, 1), "b[ab]"),
        ((-1, 2), (-1, 8), "a[ba]"),
        ((1, 2), (-1, 8), "[ba]a"),
        ((1, 3), (-1, 18), "[ba]a"),
        ((0, 1), (0, 1), "[aba]"),
    ];
    for ((a, b), (c, d), want) in cases {
        assert_eq!(label(&s, &[rat(a, b), rat(c, d)]), want, "x = ({a}/{b}, {c}/{d})");
    }
    let c = s.classify_point(&[rat(1, 3), rat(-1, 18)]).unwrap();
    let r = c.roots_refined(50);
    assert!(r.len() == 2 && (r[0] + 1.0 / 3.0).abs() < 1e-12 && (r[1] - 1.0 / 3.0).abs() < 1e-12, "{r:?}");
}

#[test]
fn acb_stratum_labels() {
    let s = section(3, &[1, 3, 2]);
    let cases = [
        ((-1, 4), (1, 4), "b"),
        ((-1, 4), (1, 4 * 4), "b"),
        ((1, 4), (1, 4), "cbc"),
        ((-1, 4), (-1, 4), "aba"),
        ((1, 8), (-1, 16), "cabac"),
        ((1, 16), (-1, 8), "acbca"),
        ((0, 1), (1, 4), "[cb]"),
        ((0, 1), (-1, 4), "a[cb]a"),
        ((-1, 4), (0, 1), "[ab]"),
        ((1, 4), (0, 1), "c[ab]c"),
        ((1, 18), (-1, 18), "[ac]b[ac]"),
        ((-1, 4), (1, 4), "b"),
        ((0, 1), (0, 1), "[acb]"),
    ];
    for ((a, b), (c, d), want) in cases {
        assert_eq!(label(&s, &[rat(a, b), rat(c, d)]), want, "x = ({a}/{b}, {c}/{d})");
    }
    let c = s.classify_point(&[rat(1, 18), rat(-1, 18)]).unwrap();
    let r: Vec<f64> = c.roots_refined(50);
    assert!((r[0] + 1.0 / 3.0).abs() < 1e-12 && r[1] == 0.0 && (r[2] - 1.0 / 3.0).abs() < 1e-12);
}

fn labels(s: &SectionFamily, grid: &GridSpec) -> BTreeSet<String> {
    s.stratum_map(grid).unwrap().into_iter().map(|g| g.itinerary).collect()
}

// At u = 0 the minors m_1, m_3 are even in t, so neither split occurs on the plane itself.
#[test]
fn betaprime_asymmetry() {
    let grid = GridSpec::square(2, rat(1, 2), 100);
    for (u, acbac, cabca) in [(rat(2, 5), true, false), (rat(-2, 5), false, true), (rint(0), false, false)] {
        let s = build_perturbed_family(FamilyKind::Betaprime, Some(u.clone())).unwrap();
        let l = labels(&s, &grid);
        assert_eq!(l.contains("acbac"), acbac, "u = {u}: {l:?}");
        assert_eq!(l.contains("cabca"), cabca, "u = {u}: {l:?}");
    }
}

