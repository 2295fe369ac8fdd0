use std::f64::consts::PI;

use lcstrat::curvelab::*;
use lcstrat::poly::rat;
use lcstrat::polysect::build_section;
use lcstrat::spinalg::{acute, q_of_word};
use lcstrat::{CliffordEven, Permutation, Word};

fn one(n: usize) -> CliffordEven<f64> {
    CliffordEven::one(n)
}

#[test]
fn circle_first_column() {
    let c = integrate(&CurvatureSpec::h_speed(2, PI, 0.0, 1.0), &one(2)).unwrap();
    for k in 0..=20 {
        let t = k as f64 / 20.0;
        let q = c.frame(t);
        let want = [0.5 * (1.0 + (2.0 * PI * t).cos()), 0.5 * 2f64.sqrt() * (2.0 * PI * t).sin(), 0.5 * (1.0 - (2.0 * PI * t).cos())];
        for i in 0..3 {
            assert!((q[(i, 0)] - want[i]).abs() < 1e-8, "t = {t}: {:?}", q);
        }
    }
    let ae = acute(&Permutation::eta(2)).to_f64();
    assert!(c.spin(0.5).max_abs_diff(&ae) < 1e-8);
    assert!(c.end_spin.max_abs_diff(&(&ae * &ae)) < 1e-8);
}

#[test]
fn model_letters() {
    for n in 2..=3 {
        for s in Permutation::all(n) {
            if s.is_identity() {
                continue;
            }
            let c = model_letter_curve(&s, 0.5).unwrap();
            let ev = c.events().unwrap();
            assert_eq!(ev.len(), 1, "{s:?}");
            assert_eq!(ev[0].letter, s);
            assert!(ev[0].time.abs() < 1e-9);
        }
    }
}

#[test]
fn aba_section_curve() {
    let s = build_section(&Permutation::from_word(2, &[1, 2, 1]).unwrap(), &CliffordEven::one(2)).unwrap();
    let c = section_curve(&s, &[rat(1, 3), rat(-1, 18)]).unwrap();
    let ev = c.events().unwrap();
    assert_eq!(c.itinerary().unwrap().to_string(), "[ba]a");
    assert!((ev[0].time + 1.0 / 3.0).abs() < 1e-9 && (ev[1].time - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn synth_small() {
    for (n, w) in [(2, "abab"), (2, "a"), (2, "[ab]"), (3, "acb"), (3, "[acb]")] {
        let word = Word::parse(w, n).unwrap();
        let c = curve_with_itinerary(&word, None, 1).unwrap();
        assert_eq!(c.itinerary().unwrap(), word);
        let q = q_of_word(&word).unwrap().to_f64();
        assert!(c.end_spin.max_abs_diff(&q) < 1e-6);
    }
}

#[test]
fn synth_random_words() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut fails = vec![];
    for trial in 0..12 {
        let n = rng.gen_range(2..=4);
        let perms: Vec<Permutation> = Permutation::all(n).into_iter().filter(|p| (1..=3).contains(&p.inversions())).collect();
        let l = rng.gen_range(1..=4);
        let w = Word::new(n, (0..l).map(|_| perms[rng.gen_range(0..perms.len())].clone()).collect()).unwrap();
        match curve_with_itinerary(&w, None, trial) {
            Ok(c) => assert_eq!(c.itinerary().unwrap(), w),
            Err(e) => fails.push(format!("{n} {w}: {e}")),
        }
    }
    assert!(fails.is_empty(), "{fails:?}");
}

#[test]
fn u_invariant_families() {
    use lcstrat::polysect::{build_perturbed_family, FamilyKind};
    for (a, b) in [(2, 5), (-2, 5), (1, 10), (-1, 10)] {
        let u = a as f64 / b as f64;
        let f = build_perturbed_family(FamilyKind::Betaprime, Some(rat(a, b))).unwrap();
        let c = section_curve(&f, &[rat(0, 1), rat(0, 1)]).unwrap();
        assert!((u_invariant(&c).unwrap() - u).abs() < 1e-9);
        // the matrix_u family runs the other way
        let f = build_perturbed_family(FamilyKind::MatrixU, Some(rat(a, b))).unwrap();
        let c = section_curve(&f, &[rat(0, 1), rat(0, 1)]).unwrap();
        assert!((u_invariant(&c).unwrap() + u).abs() < 1e-9);
    }
}

#[test]
fn zero_length_integration_is_constant() {
    let z = lcstrat::spinalg::alpha(3, 2, 0.7);
    let c = integrate(&CurvatureSpec::h_speed(3, 1.0, 0.3, 0.3), &z).unwrap();
    assert!(c.end_spin.max_abs_diff(&z) < 1e-15);
    assert!(c.singular_set().unwrap().is_empty());
}

#[test]
fn reversal_round_trip() {
    let spec = CurvatureSpec::polynomial(3, CurvatureMode::Xi, 0.0, 1.0, vec![vec![0.3, -2.0, 1.5], vec![-0.5, 4.0], vec![1.0, 0.0, -3.0, 2.0]]);
    let c = integrate(&spec, &one(3)).unwrap();
    let back = integrate_backward(&spec, &c.end_spin).unwrap();
    assert!(back.start_spin.max_abs_diff(&one(3)) < 1e-8);
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        assert!(back.frame(t).max_abs_diff(&c.frame(t)) < 1e-8, "t = {t}");
    }
}

#[test]
fn non_positive_curvature_rejected() {
    let spec = CurvatureSpec::polynomial(2, CurvatureMode::Kappa, 0.0, 1.0, vec![vec![1.0], vec![0.5, -1.0]]);
    assert!(matches!(integrate(&spec, &one(2)), Err(CurveError::NonPositiveCurvature { j: 2, .. })));
}

#[test]
fn southwest_minor_examples() {
    assert!(southwest_minors(&lcstrat::linalg::Mat::identity(4)).iter().all(|&m| m == 0.0));
    for n in 2..=4 {
        let p = acute(&Permutation::eta(n)).to_f64().project();
        assert!(southwest_minors(&p).iter().all(|m| (m.abs() - 1.0).abs() < 1e-12));
    }
    let s = build_section(&Permutation::from_word(2, &[1, 2, 1]).unwrap(), &CliffordEven::one(2)).unwrap();
    let c = section_curve(&s, &[rat(0, 1), rat(0, 1)]).unwrap();
    for t in [-0.7, -0.2, 0.1, 0.55] {
        let m = c.minors_at(t);
        // minors of Q(M) differ from those of M by positive factors
        let scale = c.presentation(t).qr_positive().unwrap().1;
        let r1 = scale[(0, 0)];
        let r2 = r1 * scale[(1, 1)];
        assert!((m[0] * r1 - t * t / 2.0).abs() < 1e-12 && (m[1] * r2 - t * t / 2.0).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn hausdorff_examples() {
    let a = CompactSubset::new(vec![0.2]);
    let b = CompactSubset::new(vec![0.3]);
    assert!((hausdorff(&a, &b) - 0.1).abs() < 1e-15);
    assert_eq!(hausdorff(&CompactSubset::empty(), &CompactSubset::new(vec![0.5])), 1.0);
    assert_eq!(hausdorff(&CompactSubset::empty(), &CompactSubset::empty()), 0.0);
    let x = CompactSubset::new(vec![0.4, 0.1, 0.4, 0.9]);
    assert_eq!(x.len(), 3);
    assert_eq!(hausdorff(&x, &x), 0.0);
    assert!((hausdorff(&x, &CompactSubset::new(vec![0.1, 0.9])) - 0.3).abs() < 1e-15);
}

#[test]
fn convexity() {
    let short = integrate(&CurvatureSpec::h_speed(2, 1.0, 0.0, 0.4 * PI), &one(2)).unwrap();
    assert!(short.is_convex_arc());
    let long = integrate(&CurvatureSpec::h_speed(2, PI, 0.0, 1.5), &one(2)).unwrap();
    assert!(!long.singular_set().unwrap().is_empty());
    assert!(!long.is_convex_arc());
    // acute σ·exp(v(t − ½)𝔥) on [0, 1]: convex, but singular at ½ before translating
    let sigma = Permutation::from_word(2, &[1]).unwrap();
    let z = acute(&sigma).to_f64();
    let v = 0.5;
    let start = &z * &integrate(&CurvatureSpec::h_speed(2, v, 0.0, 0.5), &one(2)).unwrap().end_spin.reverse();
    let g = integrate(&CurvatureSpec::h_speed(2, v, 0.0, 1.0), &start).unwrap();
    assert!(g.spin(0.5).max_abs_diff(&z) < 1e-9);
    assert!(g.is_convex_arc());
    let sing = g.singular_set().unwrap();
    assert!(sing.points.iter().any(|&t| (t - 0.5).abs() < 1e-9), "{sing:?}");
}

fn circle_jet(t: f64) -> lcstrat::linalg::Mat {
    let w = 2.0 * PI * t;
    let r = 0.5 * 2f64.sqrt();
    let mut m = lcstrat::linalg::Mat::zeros(3, 3);
    let cols = [
        [0.5 * (1.0 + w.cos()), r * w.sin(), 0.5 * (1.0 - w.cos())],
        [-PI * w.sin(), 2.0 * PI * r * w.cos(), PI * w.sin()],
        [-2.0 * PI * PI * w.cos(), -4.0 * PI * PI * r * w.sin(), 2.0 * PI * PI * w.cos()],
    ];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..3 {
            m[(i, j)] = c[i];
        }
    }
    m
}

#[test]
fn frenet_of_circle_matches_integration() {
    let c = integrate(&CurvatureSpec::h_speed(2, PI, 0.0, 1.0), &one(2)).unwrap();
    let times: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    let jets: Vec<_> = times.iter().map(|&t| circle_jet(t)).collect();
    let frames = frenet_frames(&jets).unwrap();
    for (t, f) in times.iter().zip(&frames) {
        assert!(f.max_abs_diff(&c.frame(*t)) < 1e-8, "t = {t}");
    }
    let f = frenet_frame(&times, &jets, None).unwrap();
    assert!(f.end_spin.max_abs_diff(&c.end_spin) < 1e-8);
    let mut bad = jets.clone();
    for i in 0..3 {
        bad[7][(i, 2)] = -bad[7][(i, 2)];
    }
    assert!(matches!(frenet_frames(&bad), Err(CurveError::DegenerateJet(7))));
}

#[test]
fn frenet_of_convex_connector_has_positive_curvature() {
    use lcstrat::triang::convex_connect;
    let a = one(3);
    let b = integrate(&CurvatureSpec::constant(3, &[1.0, 0.6, 1.4], 0.0, 1.1), &a).unwrap().end_spin;
    let arc = convex_connect(&a, &b).unwrap();
    // jet of s ↦ Π(G·exp(s𝔫)) e_1: columns are G·exp(s𝔫) itself
    let times: Vec<f64> = (0..=40).map(|k| arc.s0 + (arc.s1 - arc.s0) * k as f64 / 40.0).collect();
    let jets: Vec<_> = times.iter().map(|&s| arc.presentation(s)).collect();
    let f = frenet_frame(&times, &jets, Some(&a)).unwrap();
    for k in 0..40 {
        let s = 0.5 * (times[k] + times[k + 1]);
        assert!(f.curvatures(s).iter().all(|&x| x > 0.0), "s = {s}");
    }
    assert!(f.end_spin.max_abs_diff(&b) < 1e-6);
}

#[test]
fn projective_transforms_preserve_itinerary() {
    use lcstrat::linalg::Mat;
    let s = build_section(&Permutation::from_word(3, &[1, 3, 2]).unwrap(), &CliffordEven::one(3)).unwrap();
    let c = section_curve(&s, &[rat(1, 18), rat(-1, 18)]).unwrap();
    let ev = c.events().unwrap();
    let u = Mat::from_fn(4, 4, |i, j| if i == j { 0.5 + i as f64 } else if i < j { (i + 2 * j) as f64 * 0.3 - 1.0 } else { 0.0 });
    let lambda: f64 = 3.0;
    let e = Mat::from_fn(4, 4, |i, j| if i == j { lambda.powi(i as i32) } else { 0.0 });
    for m in [u, e] {
        let t = c.projective_transform(&m).unwrap();
        let et = t.events().unwrap();
        assert_eq!(t.itinerary().unwrap(), c.itinerary().unwrap());
        for (a, b) in ev.iter().zip(&et) {
            assert!((a.time - b.time).abs() < 1e-9);
        }
        for k in 0..=8 {
            let tt = -1.0 + k as f64 / 4.0;
            let want = (&m.inverse().unwrap() * &c.presentation(tt)).q_part();
            assert!(t.frame(tt).max_abs_diff(&want) < 1e-9);
        }
    }
    let lower = Mat::from_fn(4, 4, |i, j| if i >= j { 1.0 } else { 0.0 });
    assert!(matches!(c.projective_transform(&lower), Err(CurveError::BadTransform)));
}

#[test]
fn abab_with_given_times() {
    let w = Word::parse("abab", 2).unwrap();
    let times = [0.2, 0.4, 0.6, 0.8];
    let c = curve_with_itinerary(&w, Some(&times), 3).unwrap();
    let ev = c.events().unwrap();
    assert_eq!(ev.len(), 4);
    for (e, t) in ev.iter().zip(times) {
        assert!((e.time - t).abs() < 1e-6);
    }
    assert!(c.start_spin.max_abs_diff(&one(2)) < 1e-12);
    assert!(c.end_spin.max_abs_diff(&q_of_word(&w).unwrap().to_f64()) < 1e-6);
    assert!(matches!(curve_with_itinerary(&w, Some(&[0.2, 0.1, 0.6, 0.8]), 0), Err(CurveError::BadTimes)));
}

#[test]
fn empty_word_has_no_events() {
    for n in 2..=4 {
        let w = Word::empty(n);
        let c = curve_with_itinerary(&w, None, 0).unwrap();
        assert!(c.events().unwrap().is_empty());
        assert!(c.end_spin.max_abs_diff(&q_of_word(&w).unwrap().to_f64()) < 1e-6);
    }
}

#[test]
fn u_invariant_vanishes_for_symmetric_betas() {
    use lcstrat::polysect::{build_perturbed_family, FamilyKind};
    let f = build_perturbed_family(FamilyKind::Betaprime, Some(rat(0, 1))).unwrap();
    let c = section_curve(&f, &[rat(0, 1), rat(0, 1)]).unwrap();
    assert!(u_invariant(&c).unwrap().abs() < 1e-12);
    let aba = build_section(&Permutation::from_word(2, &[1, 2, 1]).unwrap(), &CliffordEven::one(2)).unwrap();
    assert!(matches!(u_invariant(&section_curve(&aba, &[rat(0, 1), rat(0, 1)]).unwrap()), Err(CurveError::NotAnAcbEvent)));
}

#[test]
fn numeric_and_exact_classification_agree() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for (n, word) in [(2, vec![1, 2, 1]), (3, vec![1, 3, 2]), (3, vec![1, 2])] {
        let s = build_section(&Permutation::from_word(n, &word).unwrap(), &CliffordEven::one(n)).unwrap();
        for _ in 0..100 {
            let x: Vec<_> = (0..s.d).map(|_| rat(rng.gen_range(-24..=24), 97)).collect();
            let exact = s.classify_point(&x).unwrap();
            let c = section_curve(&s, &x).unwrap();
            let ev = c.events().unwrap();
            assert_eq!(c.itinerary().unwrap(), exact.word, "x = {x:?}");
            let roots = exact.roots_refined(60);
            for ((e, x_ev), r) in ev.iter().zip(&exact.events).zip(&roots) {
                assert!((e.time - r).abs() < 1e-7);
                assert_eq!(e.mult, x_ev.mult);
            }
        }
    }
}
