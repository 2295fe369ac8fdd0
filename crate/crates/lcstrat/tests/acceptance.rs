//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Each criterion reports its wall time against its budget; a criterion passes only if
//! every check holds and it finishes within budget. Lines go to the process stdout directly,
//! so they show up without `--nocapture`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lcstrat::curvelab::{
    curve_with_itinerary, hausdorff, integrate, kappa_to_xi, model_letter_curve, section_curve, u_invariant, CurvatureMode,
    SpecPiece,
};
use lcstrat::linalg::Mat;
use lcstrat::poly::{rat, rint, ring, MultiPoly, Rat, RatFunc};
use lcstrat::polysect::{build_perturbed_family, build_section, FamilyKind, GridSpec};
use lcstrat::poset::{hasse, letter_oracle_section, prec, PrecConfig, SamplingBudget, SectionOracle, Verdict};
use lcstrat::spinalg::{acute_word, alpha_quarter, hat, q_of_word};
use lcstrat::triang::accessibility_quasiproduct;
use lcstrat::{CliffordEven, CurvatureSpec, Dyadic, Permutation, SectionFamily, UniTriMatrix, Word};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &'static str, budget_s: f64, f: impl FnOnce() -> Outcome) -> Line {
    let t = Instant::now();
    let res = f();
    let secs = t.elapsed().as_secs_f64();
    let (pass, detail) = match res {
        Ok(d) if secs < budget_s => (true, d),
        Ok(d) => (false, format!("{d}; over budget")),
        Err(d) => (false, d),
    };
    let budget = if budget_s.is_finite() { format!("{budget_s} s") } else { "no budget".into() };
    let line = Line { id, name, pass, detail: format!("{detail} [{secs:.2} s / {budget}]") };
    report(&format!("{} {:>2}. {}: {}", if line.pass { "PASS" } else { "FAIL" }, line.id, line.name, line.detail));
    line
}

// bypasses the test harness capture
fn report(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{s}");
    let _ = out.flush();
}

fn section(n: usize, word: &[usize]) -> SectionFamily {
    build_section(&Permutation::from_word(n, word).unwrap(), &CliffordEven::one(n)).unwrap()
}

fn mult_le(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Observed itineraries paired with the letter whose section or model curve produced them.
#[derive(Default)]
struct Labels(Vec<(Word, Permutation)>);

// ---------------------------------------------------------------------------

fn polynomials() -> Outcome {
    let mut checked = 0;
    let mut eq = |s: &SectionFamily, got: &MultiPoly, want: &str| -> Result<(), String> {
        let w = MultiPoly::parse(&s.ring, want).map_err(e2s)?;
        checked += 1;
        ensure(*got == w, || format!("{} != {want}", got))
    };
    let t = Instant::now();
    let aba = section(2, &[1, 2, 1]);
    let d = aba.discriminants().map_err(e2s)?;
    let r = aba.resultants().map_err(e2s)?;
    eq(&aba, &aba.minors[0], "t^2/2 + x2")?;
    eq(&aba, &aba.minors[1], "t^2/2 + x1*t - x2")?;
    eq(&aba, &d[0], "-2*x2")?;
    eq(&aba, &d[1], "x1^2 + 2*x2")?;
    eq(&aba, &r[&(1, 2)], "-(-2*x2)*(x1^2 + 2*x2)/4")?;
    let t_aba = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let acb = section(3, &[1, 3, 2]);
    let d = acb.discriminants().map_err(e2s)?;
    let r = acb.resultants().map_err(e2s)?;
    eq(&acb, &acb.minors[0], "t^2/2 + x2")?;
    eq(&acb, &acb.minors[1], "-t")?;
    eq(&acb, &acb.minors[2], "t^2/2 - x1")?;
    eq(&acb, &d[0], "-2*x2")?;
    eq(&acb, &d[2], "2*x1")?;
    eq(&acb, &r[&(1, 3)], "(x1 + x2)^2/4")?;
    let t_acb = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let bp = build_perturbed_family(FamilyKind::Betaprime, None).map_err(e2s)?;
    let d = bp.discriminants().map_err(e2s)?;
    let r = bp.resultants().map_err(e2s)?;
    eq(&bp, &bp.minors[0], "u*t^3/3 + t^2/2 + x2")?;
    eq(&bp, &d[0], "-x2*(6*u^2*x2 + 1)/2")?;
    eq(&bp, &r[&(1, 3)], "(u/108)*(4*u^2*(x2 - x1)^3 + 9*(x1 + x2)^2)")?;
    let t_bp = t.elapsed().as_secs_f64();

    let worst = t_aba.max(t_acb).max(t_bp);
    ensure(worst < 1.0, || format!("slowest example took {worst:.2} s"))?;
    Ok(format!("{checked} formulas exact; per example {t_aba:.3}/{t_acb:.3}/{t_bp:.3} s"))
}

const ABA_POINTS: [((i64, i64), (i64, i64), &str); 10] = [
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

const ACB_POINTS: [((i64, i64), (i64, i64), &str); 12] = [
    ((-1, 4), (1, 4), "b"),
    ((1, 4), (1, 4), "cbc"),
    ((-1, 4), (-1, 4), "aba"),
    ((1, 8), (-1, 16), "cabac"),
    ((1, 16), (-1, 8), "acbca"),
    ((0, 1), (1, 4), "[cb]"),
    ((0, 1), (-1, 4), "a[cb]a"),
    ((-1, 4), (0, 1), "[ab]"),
    ((1, 4), (0, 1), "c[ab]c"),
    ((1, 18), (-1, 18), "[ac]b[ac]"),
    ((1, 5), (-1, 5), "[ac]b[ac]"),
    ((0, 1), (0, 1), "[acb]"),
];

fn stratum_labels(labels: &mut Labels) -> Outcome {
    let mut seen = [BTreeSet::new(), BTreeSet::new()];
    for (k, (fam, pts)) in [(section(2, &[1, 2, 1]), &ABA_POINTS[..]), (section(3, &[1, 3, 2]), &ACB_POINTS[..])].iter().enumerate() {
        for &((a, b), (c, d), want) in pts.iter() {
            let cl = fam.classify_point(&[rat(a, b), rat(c, d)]).map_err(e2s)?;
            let got = cl.word.to_string();
            ensure(got == want, || format!("({a}/{b}, {c}/{d}) on {}: {got}, expected {want}", fam.sigma.letters()))?;
            seen[k].insert(got);
            labels.0.push((cl.word, fam.sigma.clone()));
        }
        // the same two sections on a grid, for the mult check
        for g in fam.stratum_map(&GridSpec::square(2, rat(1, 2), 41)).map_err(e2s)? {
            labels.0.push((Word::parse(&g.itinerary, fam.n).map_err(e2s)?, fam.sigma.clone()));
        }
    }
    ensure(seen[0].len() == 9 && seen[1].len() == 11, || format!("{} and {} itineraries", seen[0].len(), seen[1].len()))?;
    Ok(format!("aba: {} itineraries, acb: {} itineraries, all labels exact", seen[0].len(), seen[1].len()))
}

const SUB_ABA: [&str; 9] = ["[aba]", "a[ba]", "[ba]a", "b[ab]", "[ab]b", "aa", "abab", "baba", "bb"];

/// Neighbouring relation read off the stratum map: `v` sits below `w` when `v` labels
/// points arbitrarily close to a point labelled `w` and has codimension one less.
fn neighbouring_relation(fam: &SectionFamily) -> Result<BTreeSet<(String, String)>, String> {
    let label = |x: Rat, y: Rat| fam.classify_point(&[x, y]).map(|c| c.word).map_err(e2s);
    let mut rel = BTreeSet::new();
    let offsets = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    // points on the codimension-one curves x2 = 0 and x2 = −x1²/2
    let mut curve_points = vec![];
    for k in 2..=5 {
        let s = rat(1, 1 << k);
        for x1 in [s.clone(), -s.clone()] {
            curve_points.push((x1.clone(), rint(0)));
            curve_points.push((x1.clone(), -(&x1 * &x1) / rint(2)));
        }
    }
    for (x, y) in &curve_points {
        let w = label(x.clone(), y.clone())?;
        // well inside the gap x1²/2 between the two curves
        let eps = x * x / rint(16);
        for (dx, dy) in offsets {
            let v = label(x + &eps * rint(dx), y + &eps * rint(dy))?;
            if v.dim() + 1 == w.dim() {
                rel.insert((v.to_string(), w.to_string()));
            }
        }
    }
    // the origin against the curve points near it
    let top = label(rint(0), rint(0))?;
    for (x, y) in curve_points {
        let v = label(x, y)?;
        if v.dim() + 1 == top.dim() {
            rel.insert((v.to_string(), top.to_string()));
        }
    }
    Ok(rel)
}

fn hasse_aba(labels: &mut Labels) -> Outcome {
    let sigma = Permutation::from_word(2, &[1, 2, 1]).unwrap();
    let obs = letter_oracle_section(&sigma, &SamplingBudget::default()).map_err(e2s)?;
    let words: BTreeSet<String> = obs.words.keys().map(|w| w.to_string()).collect();
    let want: BTreeSet<String> = SUB_ABA.iter().map(|s| s.to_string()).collect();
    ensure(words == want, || format!("observed {words:?}"))?;
    for w in obs.words.keys() {
        labels.0.push((w.clone(), sigma.clone()));
    }
    let mut oracle = SectionOracle::new(SamplingBudget::default());
    let cfg = PrecConfig::default();
    let mut unknown = 0;
    let h = hasse(&obs.word_set(), |a, b| {
        let c = prec(a, b, &mut oracle, &cfg)?;
        unknown += (c.verdict == Verdict::Unknown) as usize;
        Ok(c.verdict == Verdict::Yes)
    })
    .map_err(e2s)?;
    ensure(unknown == 0, || format!("{unknown} undecided pairs"))?;
    let covers: BTreeSet<(String, String)> = h.cover_strings().into_iter().collect();
    let expected = neighbouring_relation(&section(2, &[1, 2, 1]))?;
    ensure(covers == expected, || format!("covers {covers:?}, stratum map adjacency {expected:?}"))?;
    Ok(format!("9 words from {} samples; {} covers match the stratum-map adjacency", obs.points, covers.len()))
}

fn asymmetry(labels: &mut Labels) -> Outcome {
    let grid = GridSpec::square(2, rat(1, 2), 100);
    let acb = Permutation::from_word(3, &[1, 3, 2]).unwrap();
    let mut split = |u: Rat| -> Result<(bool, bool), String> {
        let fam = build_perturbed_family(FamilyKind::Betaprime, Some(u)).map_err(e2s)?;
        let mut its = BTreeSet::new();
        for g in fam.stratum_map(&grid).map_err(e2s)? {
            labels.0.push((Word::parse(&g.itinerary, 3).map_err(e2s)?, acb.clone()));
            its.insert(g.itinerary);
        }
        Ok((its.contains("acbac"), its.contains("cabca")))
    };
    let plus = split(rat(2, 5))?;
    ensure(plus == (true, false), || format!("u = 2/5: acbac {}, cabca {}", plus.0, plus.1))?;
    let minus = split(rat(-2, 5))?;
    ensure(minus == (false, true), || format!("u = -2/5: acbac {}, cabca {}", minus.0, minus.1))?;
    // u = 0 is read as a neighbourhood of the u = 0 plane: the plane itself has neither split
    let zero = split(rint(0))?;
    let (near_p, near_m) = (split(rat(1, 10))?, split(rat(-1, 10))?);
    let both = (near_p.0 || near_m.0) && (near_p.1 || near_m.1);
    ensure(both, || format!("u = ±1/10: acbac {}, cabca {}", near_p.0 || near_m.0, near_p.1 || near_m.1))?;
    Ok(format!(
        "100x100 grids: u=2/5 acbac only, u=-2/5 cabca only; near u=0 (u=±1/10) both occur; on u=0 itself acbac {} cabca {}",
        zero.0, zero.1
    ))
}

fn u_invariants() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, b) in [(2, 5), (-2, 5), (1, 10), (-1, 10)] {
        let fam = build_perturbed_family(FamilyKind::Betaprime, Some(rat(a, b))).map_err(e2s)?;
        let c = section_curve(&fam, &[rint(0), rint(0)]).map_err(e2s)?;
        let err = (u_invariant(&c).map_err(e2s)? - a as f64 / b as f64).abs();
        worst = worst.max(err);
    }
    ensure(worst < 1e-9, || format!("max error {worst:e}"))?;
    Ok(format!("u in {{±2/5, ±1/10}}, max error {worst:.1e}"))
}

fn endpoint_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = rng.gen_range(2..=4);
        let perms: Vec<Permutation> = Permutation::all(n).into_iter().filter(|p| (1..=3).contains(&p.inversions())).collect();
        let l = rng.gen_range(1..=4);
        let w = Word::new(n, (0..l).map(|_| perms[rng.gen_range(0..perms.len())].clone()).collect()).map_err(e2s)?;
        let c = curve_with_itinerary(&w, None, trial).map_err(|e| format!("{w} (n={n}): {e}"))?;
        let back = c.itinerary().map_err(e2s)?;
        ensure(back == w, || format!("{w} re-extracted as {back}"))?;
        let d = c.end_spin.max_abs_diff(&q_of_word(&w).map_err(e2s)?.to_f64());
        ensure(d < 1e-6, || format!("{w}: endpoint off by {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("50 words, itineraries exact, endpoint error ≤ {worst:.1e}"))
}

fn skew(n: usize, rng: &mut ChaCha8Rng, eps: f64) -> Mat {
    let mut m = Mat::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in i + 1..=n {
            let v = eps * rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

fn mult_monotone(labels: &Labels) -> Outcome {
    let grid_bad = labels.0.iter().filter(|(w, s)| !mult_le(&w.mult(), &s.mult_vector())).count();
    ensure(grid_bad == 0, || format!("{grid_bad} grid labels violate mult"))?;
    let letters: Vec<Permutation> = (2..=3).flat_map(Permutation::all).filter(|p| !p.is_identity()).collect();
    let eta = |n| lcstrat::spinalg::acute(&Permutation::eta(n));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut bad, mut moved) = (0, 0);
    for k in 0..1000 {
        let s = &letters[k % letters.len()];
        let n = s.n();
        let base = model_letter_curve(s, 0.5).map_err(e2s)?;
        let z = (&eta(n) * &lcstrat::spinalg::acute(s)).to_f64();
        let eps = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let zp = &z * &CliffordEven::exp_skew(n, &skew(n, &mut rng, eps));
        let c = lcstrat::FrameCurve::nil_model(&zp, base.t0, base.t1).map_err(e2s)?;
        let w = c.itinerary().map_err(|e| format!("{}: {e}", s.letters()))?;
        moved += (w.letters != [s.clone()]) as usize;
        bad += (!mult_le(&w.mult(), &s.mult_vector())) as usize;
    }
    ensure(bad == 0, || format!("{bad} perturbed model curves violate mult"))?;
    Ok(format!("{} grid labels and 1000 perturbed model curves ({moved} split), zero violations", labels.0.len()))
}

fn group_algebra() -> Outcome {
    let mut words = 0;
    for n in 1..=3 {
        for s in Permutation::all(n) {
            let rws = s.all_reduced_words();
            let a0 = acute_word(n, &rws[0].letters);
            for rw in &rws {
                words += 1;
                ensure(acute_word(n, &rw.letters) == a0, || format!("acute depends on the word for {}", s.letters()))?;
            }
        }
    }
    let eta_words = Permutation::eta(3).all_reduced_words();
    ensure(eta_words.len() == 16, || format!("{} reduced words of eta in S_4", eta_words.len()))?;
    for n in 1..=4 {
        for j in 1..=n {
            let q = alpha_quarter(n, j, true);
            let full = &(&q * &q) * &(&q * &q);
            ensure(full == CliffordEven::one(n).scale(Dyadic::int(-1)), || format!("alpha_{j}(2pi) != -1 for n={n}"))?;
        }
    }
    let mut hats = 0;
    for n in 1..=4 {
        for s in Permutation::all(n) {
            hats += 1;
            ensure(hat(&s).is_quat(), || format!("hat({}) not in Quat", s.letters()))?;
        }
    }
    Ok(format!("{words} reduced words agree; 16 words of eta; alpha_j(2pi) = -1; {hats} hats in Quat"))
}

fn accessibility() -> Outcome {
    let r = ring(&["x", "y", "z", "t1", "t2"]);
    let f = |n: &str, d: &str| RatFunc::parse(&r, n, d).map_err(e2s);
    let (one, zero) = (f("1", "1")?, f("0", "1")?);
    let l = UniTriMatrix::from_rows(vec![
        vec![one.clone(), zero.clone(), zero.clone()],
        vec![f("x", "1")?, one.clone(), zero.clone()],
        vec![f("z", "1")?, f("y", "1")?, one],
    ])
    .map_err(e2s)?;
    ensure(l.factor_along(&[1, 2, 1]).map_err(e2s)? == vec![f("x*y - z", "y")?, f("y", "1")?, f("z", "y")?], || "c".into())?;
    ensure(l.factor_along(&[2, 1, 2]).map_err(e2s)? == vec![f("z", "x")?, f("x", "1")?, f("x*y - z", "x")?], || "c~".into())?;
    let q = accessibility_quasiproduct(&l, &[1, 2, 1]).map_err(e2s)?;
    ensure(q.bound(&[f("t1", "1")?]).map_err(e2s)? == f("z", "x - t1")?, || "g_2".into())?;
    ensure(q.bound(&[f("t1", "1")?, f("t2", "1")?]).map_err(e2s)? == f("x*y - z - t1*y", "y - t2")?, || "g_3".into())?;

    let lx = UniTriMatrix::from_rows(vec![vec![rint(1), rint(0), rint(0)], vec![rint(7), rint(1), rint(0)], vec![rint(15), rint(3), rint(1)]])
        .map_err(e2s)?;
    ensure(lx.factor_along(&[1, 2, 1]).map_err(e2s)? == vec![rint(2), rint(3), rint(5)], || "c at (7,3,15)".into())?;
    ensure(lx.factor_along(&[2, 1, 2]).map_err(e2s)? == vec![rat(15, 7), rint(7), rat(6, 7)], || "c~ at (7,3,15)".into())?;
    let q = accessibility_quasiproduct(&lx, &[1, 2, 1]).map_err(e2s)?;
    ensure(q.bound(&[rint(1)]).map_err(e2s)? == rat(15, 6), || "g_2 at t1 = 1".into())?;

    // soundness: interior points of the quasiproduct give products ≪ L_x
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fails = 0;
    let frac = |rng: &mut ChaCha8Rng| rat(rng.gen_range(1..64), 64);
    for k in 0..1000 {
        let (q, lx) = if k % 2 == 0 {
            (q.clone(), lx.clone())
        } else {
            let n = 3;
            let eta = Permutation::eta(n).reduced_word().letters;
            let params: Vec<Rat> = (0..eta.len()).map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..5))).collect();
            let lx = UniTriMatrix::product_along(n, &eta, &params, &rint(1)).map_err(e2s)?;
            let perms: Vec<Permutation> = Permutation::all(n).into_iter().filter(|p| !p.is_identity()).collect();
            let word = perms[rng.gen_range(0..perms.len())].reduced_word().letters;
            (accessibility_quasiproduct(&lx, &word).map_err(e2s)?, lx)
        };
        let mut t = vec![];
        for _ in 0..q.len() {
            let g = q.bound(&t).map_err(e2s)?;
            t.push(&g * &frac(&mut rng));
        }
        fails += (!q.contains(&t) || !q.product(&t).map_err(e2s)?.is_ll(&lx)) as usize;
    }
    ensure(fails == 0, || format!("{fails} interior samples not below L_x"))?;
    Ok("closed forms exact (symbolic and x=7,y=3,z=15); 1000 interior samples, zero failures".into())
}

fn frenet_circle() -> Outcome {
    let c = integrate(&CurvatureSpec::h_speed(2, PI, 0.0, 1.0), &CliffordEven::one(2)).map_err(e2s)?;
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let t = i as f64 / 1000.0;
        let f = c.frame(t);
        let w = 2.0 * PI * t;
        let want = [0.5 * (1.0 + w.cos()), 0.5 * 2f64.sqrt() * w.sin(), 0.5 * (1.0 - w.cos())];
        for (k, v) in want.iter().enumerate() {
            worst = worst.max((f[(k, 0)] - v).abs());
        }
    }
    ensure(worst < 1e-8, || format!("sup error {worst:e}"))?;
    let sing = c.singular_set().map_err(e2s)?;
    ensure(sing.is_empty(), || format!("singular set {:?}", sing.points))?;
    Ok(format!("sup error {worst:.1e} over 1001 samples, singular set empty"))
}

fn xi_spec(n: usize, t1: f64, xi: Vec<Vec<f64>>) -> CurvatureSpec {
    CurvatureSpec { n, mode: CurvatureMode::Xi, pieces: vec![SpecPiece { start: 0.0, end: t1, coeffs: xi }] }
}

fn hausdorff_continuity() -> Outcome {
    let h = |n: usize| -> Vec<Vec<f64>> { (1..=n).map(|j| vec![kappa_to_xi(PI * ((j * (n + 1 - j)) as f64).sqrt())]).collect() };
    let bases = [
        xi_spec(2, 1.5, h(2)),
        xi_spec(3, 1.5, h(3)),
        xi_spec(2, 3.0, vec![vec![0.5, 1.0], vec![-0.3, 0.2]]),
        xi_spec(3, 3.0, vec![vec![2.0, 0.5], vec![1.0], vec![0.5, 1.0]]),
    ];
    let epss = [1e-2, 1e-3, 1e-4];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut medians = vec![vec![]; epss.len()];
    let mut vanished = 0;
    let mut sizes = vec![];
    for base in &bases {
        let one = CliffordEven::one(base.n);
        let sing = integrate(base, &one).map_err(e2s)?.singular_set().map_err(e2s)?;
        ensure(!sing.is_empty(), || "base curve has empty singular set".into())?;
        sizes.push(sing.len());
        for (k, &eps) in epss.iter().enumerate() {
            let mut ds = vec![];
            for _ in 0..12 {
                let mut spec = base.clone();
                for c in &mut spec.pieces[0].coeffs {
                    c.resize(c.len().max(2), 0.0);
                    c[0] += eps * rng.gen_range(-1.0..1.0);
                    c[1] += eps * rng.gen_range(-1.0..1.0);
                }
                let s = integrate(&spec, &one).map_err(e2s)?.singular_set().map_err(e2s)?;
                vanished += s.is_empty() as usize;
                ds.push(hausdorff(&sing, &s));
            }
            ds.sort_by(f64::total_cmp);
            medians[k].push(0.5 * (ds[5] + ds[6]));
        }
    }
    let med: Vec<f64> = (0..epss.len())
        .map(|k| {
            let mut m = medians[k].clone();
            m.sort_by(f64::total_cmp);
            m[m.len() / 2]
        })
        .collect();
    ensure(vanished == 0, || format!("{vanished} perturbed singular sets became empty"))?;
    let per_base = (0..bases.len()).all(|b| medians[0][b] > medians[1][b] && medians[1][b] > medians[2][b]);
    ensure(per_base && med[0] > med[1] && med[1] > med[2], || format!("medians per eps {medians:?}"))?;
    Ok(format!(
        "{} base curves (sing sizes {sizes:?}), 12 perturbations per eps; median d_H {:.1e} > {:.1e} > {:.1e}; none emptied",
        bases.len(),
        med[0],
        med[1],
        med[2]
    ))
}

#[test]
fn acceptance() {
    let mut labels = Labels::default();
    report("");
    let lines = vec![
        run(1, "exact polynomial reproduction", 3.0, polynomials),
        run(2, "stratum maps of aba and acb", 5.0, || stratum_labels(&mut labels)),
        run(3, "Hasse diagram below [aba]", 30.0, || hasse_aba(&mut labels)),
        run(4, "asymmetry of the betaprime family", 120.0, || asymmetry(&mut labels)),
        run(5, "u-invariant", 10.0, u_invariants),
        run(6, "endpoint law", 180.0, endpoint_law),
        run(7, "mult monotonicity", f64::INFINITY, || mult_monotone(&labels)),
        run(8, "group algebra", 30.0, group_algebra),
        run(9, "accessibility", 30.0, accessibility),
        run(10, "Frenet circle", 5.0, frenet_circle),
        run(11, "Hausdorff continuity", 120.0, hausdorff_continuity),
    ];
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    report(&format!("{} of {} criteria pass", lines.len() - failed.len(), lines.len()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
