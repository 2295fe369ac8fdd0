use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Subcommand};
use lcstrat::curvelab::{curve_with_itinerary, integrate, section_curve, FrameCurve};
use lcstrat::poly::{fmt_rat, parse_rat};
use lcstrat::polysect::{build_perturbed_family, build_section, FamilyKind, GridSpec};
use lcstrat::poset::{hasse, prec, PrecConfig, SamplingBudget, SectionOracle, Verdict};
use lcstrat::spinalg::{acute, grave, hat, q_of_word, word_table, CliffordJson};
use lcstrat::symgrp::{r_bullet, Permutation, ReducedWord, Word};
use lcstrat::{CliffordEven, CurvatureSpec, Dyadic, Rat};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["spec", "section", "word"])))]
pub struct ItiArgs {
    /// Curvature spec (JSON), integrated from the identity.
    spec: Option<PathBuf>,
    /// Use the section curve of this letter instead (with --x).
    #[arg(long, requires = "x")]
    section: Option<String>,
    /// Section coordinates, comma separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Synthesize a curve with this itinerary instead.
    #[arg(long)]
    word: Option<String>,
    /// Event times for --word, comma separated, strictly increasing in (0,1).
    #[arg(long, requires = "word")]
    times: Option<String>,
    /// Rank `n`; inferred from the letters when absent.
    #[arg(short, long)]
    n: Option<usize>,
    /// Write the minor traces `t,m1,..,mn` here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Include sampled frames in the JSON output.
    #[arg(long)]
    frames: bool,
}

#[derive(Args, Debug)]
pub struct SectionArgs {
    /// Letter as a reduced word (`aba`, `[aba]`), an image list (`[3,2,1]`), or `e`.
    sigma: String,
    /// Rank `n`; inferred from the letters when absent.
    #[arg(short, long)]
    n: Option<usize>,
    /// Perturbed `[acb]` family: betaprime or matrix_u.
    #[arg(long)]
    family: Option<FamilyKind>,
    /// Value of the family parameter; symbolic when absent.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Label a grid `AxB` (one count per coordinate, or a single count for all).
    #[arg(long)]
    grid: Option<String>,
    /// Grid half-width (rational); defaults to `grid.radius`.
    #[arg(long)]
    radius: Option<String>,
    /// Classify a single point, comma separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Write the grid labels here; without it the CSV replaces the JSON on stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["w0", "below"])))]
pub struct PosetArgs {
    /// Lower word, e.g. `[ab]a`.
    #[arg(requires = "w1")]
    w0: Option<String>,
    /// Upper word.
    w1: Option<String>,
    /// Hasse diagram of the words observed on the section of this letter.
    #[arg(long)]
    below: Option<String>,
    /// DOT output path for --below; stdout when absent.
    #[arg(long, requires = "below")]
    hasse: Option<PathBuf>,
    /// Rank `n`; inferred from the letters when absent.
    #[arg(short, long)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum GroupQuery {
    /// Multiplicity vector of a permutation.
    Mult { sigma: String },
    /// Number of inversions.
    Inv { sigma: String },
    /// `acute σ` in the even Clifford algebra, with its projection.
    Acute { sigma: String },
    /// `grave σ`, the mirror lift of `σ`.
    Grave { sigma: String },
    /// `hat σ = acute σ · (grave σ)⁻¹`, an element of Quat.
    Hat { sigma: String },
    /// All reduced words of a permutation.
    Words { sigma: String },
    /// Permutation with a given multiplicity vector, e.g. `2,1,2`.
    FromMult { mult: String },
    /// `acute η · ŵ · acute η` for an itinerary word.
    Qword { word: String },
    /// The table `B(w, j)`, `j = 0, ½, …, ℓ+1`.
    Btable { word: String },
    /// `r_•(n)`.
    Rbullet { n: usize },
}

fn usage(s: impl Into<String>) -> CliError {
    CliError::Usage(s.into())
}

/// Writes to stdout, ignoring a closed pipe.
pub fn out(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn emit(v: &Value) {
    out(&format!("{}\n", serde_json::to_string_pretty(v).expect("json")));
}

fn write_file(path: &Path, s: &str) -> Result<(), CliError> {
    std::fs::write(path, s).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn rats(s: &str) -> Result<Vec<Rat>, CliError> {
    s.split(',').map(|p| parse_rat(p).map_err(|e| usage(format!("bad rational {p:?}: {e}")))).collect()
}

/// Rank from an explicit `-n`, else the highest generator letter, else 2.
fn rank(n: Option<usize>, s: &str) -> usize {
    n.unwrap_or_else(|| Word::infer_rank(s).unwrap_or(2).max(2))
}

/// A single letter: `e`, an image list `[3,1,4,2]`, or a reduced word with optional brackets.
pub fn parse_letter(s: &str, n: Option<usize>) -> Result<Permutation, CliError> {
    let s = s.trim();
    if s == "e" {
        return Ok(Permutation::identity(n.unwrap_or(2)));
    }
    if s.starts_with('[') && s[1..].trim_start().starts_with(|c: char| c.is_ascii_digit()) {
        let images: Vec<usize> = serde_json::from_str(s).map_err(|e| usage(format!("bad image list {s:?}: {e}")))?;
        let p = Permutation::from_images(images)?;
        if n.is_some_and(|n| n != p.n()) {
            return Err(usage(format!("{s} is not a permutation of rank {}", n.unwrap_or(0))));
        }
        return Ok(p);
    }
    let inner = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(s);
    let n = rank(n, inner);
    let gens: Vec<usize> = inner
        .chars()
        .map(|c| if c.is_ascii_lowercase() { Ok((c as u8 - b'a') as usize + 1) } else { Err(usage(format!("bad letter {c:?} in {s:?}"))) })
        .collect::<Result<_, _>>()?;
    Ok(ReducedWord::new(n, gens)?.permutation())
}

fn parse_word(s: &str, n: Option<usize>) -> Result<Word, CliError> {
    Ok(Word::parse(s, rank(n, s))?)
}

fn clifford_json(z: &CliffordEven<Dyadic>) -> Value {
    json!({ "element": z.to_json(), "matrix": z.project_i64() })
}

/// Elements `±e_I`, `|I|` even, of the lifted diagonal sign group.
fn quat_elements(n: usize) -> Vec<CliffordEven<Dyadic>> {
    let mut out = Vec::new();
    for mask in 0usize..(1 << (n + 1)) {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let idx: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
        for s in [1, -1] {
            out.push(CliffordEven::blade(n, &idx, Dyadic::int(s)));
        }
    }
    out
}

/// The element `q·acute σ` within `1e-6` of `z`, if any.
fn nearest_lifted(z: &CliffordEven<f64>) -> Option<CliffordJson> {
    let n = z.n();
    let quats = quat_elements(n);
    Permutation::all(n).iter().find_map(|s| {
        let a = acute(s);
        quats.iter().map(|q| q * &a).find(|c| c.to_f64().max_abs_diff(z) < 1e-6).map(|c| c.to_json())
    })
}

/// Exact label `q·acute η` of the open-cell component containing `z`.
fn open_cell_label(z: &CliffordEven<f64>) -> Option<CliffordJson> {
    let ae = acute(&Permutation::eta(z.n()));
    quat_elements(z.n())
        .into_iter()
        .find(|q| lcstrat::curvelab::in_open_cell(&(&q.reverse().to_f64() * z)))
        .map(|q| (&q * &ae).to_json())
}

fn iti_json(curve: &FrameCurve, samples: usize, frames: bool) -> Result<Value, CliError> {
    let events = curve.events()?;
    let word = curve.itinerary()?;
    let end = curve.spin(curve.t1);
    let mut v = json!({
        "n": curve.n,
        "t0": curve.t0,
        "t1": curve.t1,
        "itinerary": word.to_string(),
        "dim": word.dim(),
        "mult": word.mult(),
        "events": events.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
        "endpoint": {
            "spin": end.coeffs(),
            "lifted": nearest_lifted(&end),
            "open_cell": open_cell_label(&end),
        },
    });
    if frames {
        v["frames"] = curve.to_json(samples)?;
    }
    Ok(v)
}

pub fn iti(a: &ItiArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let curve = if let Some(path) = &a.spec {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let spec = CurvatureSpec::from_json(&text)?;
        if a.n.is_some_and(|n| n != spec.n) {
            return Err(usage(format!("spec has n = {}", spec.n)));
        }
        integrate(&spec, &CliffordEven::one(spec.n))?
    } else if let Some(sigma) = &a.section {
        let sigma = parse_letter(sigma, a.n)?;
        let fam = build_section(&sigma, &CliffordEven::one(sigma.n()))?;
        let x = rats(a.x.as_deref().unwrap_or_default())?;
        section_curve(&fam, &x)?
    } else {
        let w = parse_word(a.word.as_deref().unwrap_or_default(), a.n)?;
        let times = match &a.times {
            Some(t) => Some(t.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("bad time {s:?}")))).collect::<Result<Vec<_>, _>>()?),
            None => None,
        };
        curve_with_itinerary(&w, times.as_deref(), cfg.seed)?
    };
    let v = iti_json(&curve, cfg.samples, a.frames)?;
    if let Some(p) = &a.csv {
        write_file(p, &curve.minors_csv(cfg.samples))?;
    }
    emit(&v);
    Ok(())
}

fn grid_spec(s: &str, d: usize, radius: &Rat) -> Result<GridSpec, CliError> {
    let counts: Vec<usize> = s.split('x').map(|c| c.trim().parse().map_err(|_| usage(format!("bad grid {s:?}")))).collect::<Result<_, _>>()?;
    let counts = match counts.len() {
        1 => vec![counts[0]; d],
        k if k == d => counts,
        k => return Err(usage(format!("grid has {k} axes, section has {d} coordinates"))),
    };
    Ok(GridSpec { axes: counts.into_iter().map(|c| (-radius.clone(), radius.clone(), c)).collect() })
}

pub fn section(a: &SectionArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let u = a.u.as_deref().map(rats).transpose()?.map(|mut v| v.remove(0));
    let fam = match a.family {
        Some(kind) => {
            let sigma = parse_letter(&a.sigma, a.n)?;
            if sigma != Permutation::from_word(3, &[1, 3, 2])? {
                return Err(usage("--family perturbs the section of acb only"));
            }
            build_perturbed_family(kind, u.clone())?
        }
        None => {
            if u.is_some() {
                return Err(usage("--u needs --family"));
            }
            let sigma = parse_letter(&a.sigma, a.n)?;
            build_section(&sigma, &CliffordEven::one(sigma.n()))?
        }
    };
    if a.family.is_some() && u.is_none() && (a.grid.is_some() || a.point.is_some()) {
        return Err(usage("labelling a perturbed family needs --u"));
    }
    if let Some(p) = &a.point {
        let x = rats(p)?;
        let c = fam.classify_point(&x)?;
        emit(&json!({
            "x": x.iter().map(fmt_rat).collect::<Vec<_>>(),
            "itinerary": c.word.to_string(),
            "mult": c.word.mult(),
            "events": c.events.iter().map(|e| json!({ "letter": e.letter.letters(), "mult": e.mult })).collect::<Vec<_>>(),
            "roots": c.roots_refined(cfg.root_bits),
        }));
        return Ok(());
    }
    let Some(g) = &a.grid else {
        emit(&fam.to_json()?);
        return Ok(());
    };
    let radius = match &a.radius {
        Some(r) => rats(r)?.remove(0),
        None => cfg.grid_radius.clone(),
    };
    let labels = fam.stratum_map(&grid_spec(g, fam.d, &radius)?)?;
    let mut csv = fam.csv_header();
    csv.push('\n');
    for l in &labels {
        csv.push_str(&fam.csv_row(l));
        csv.push('\n');
    }
    match &a.csv {
        Some(p) => {
            write_file(p, &csv)?;
            emit(&fam.to_json()?);
        }
        None => out(&csv),
    }
    Ok(())
}

pub fn poset(a: &PosetArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let budget = SamplingBudget { k_max: cfg.oracle_k_max, steps: cfg.oracle_steps, max_points: cfg.oracle_max_points, seed: cfg.seed };
    let pc = PrecConfig { max_l0: cfg.prec_max_l0, max_l1: cfg.prec_max_l1 };
    let mut oracle = SectionOracle::new(budget);
    if let Some(sigma) = &a.below {
        let sigma = parse_letter(sigma, a.n)?;
        let obs = oracle.observations(&sigma)?.clone();
        let mut unknown = Vec::new();
        let h = hasse(&obs.word_set(), |x, y| {
            let c = prec(x, y, &mut oracle, &pc)?;
            if c.verdict == Verdict::Unknown {
                unknown.push(json!([x.to_string(), y.to_string()]));
            }
            Ok(c.verdict == Verdict::Yes)
        })?;
        for o in &obs.mult_violations {
            eprintln!("warning: observed {} at x = {:?} exceeds mult of the letter", o.word, o.x);
        }
        let dot = h.to_dot();
        let summary = json!({
            "sigma": sigma.letters(),
            "points": obs.points,
            "nodes": h.nodes.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "covers": h.cover_strings(),
            "minimal": h.minimal().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "maximal": h.maximal().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "unknown": unknown,
            "mult_violations": obs.mult_violations.len(),
        });
        match &a.hasse {
            Some(p) => {
                write_file(p, &dot)?;
                emit(&summary);
            }
            None => out(&dot),
        }
        return Ok(());
    }
    let (s0, s1) = (a.w0.as_deref().unwrap_or_default(), a.w1.as_deref().unwrap_or_default());
    let n = a.n.unwrap_or_else(|| rank(None, s0).max(rank(None, s1)));
    let (w0, w1) = (Word::parse(s0, n)?, Word::parse(s1, n)?);
    let cert = prec(&w0, &w1, &mut oracle, &pc)?;
    if !cert.replay()? {
        return Err(CliError::Internal("certificate does not replay".into()));
    }
    emit(&cert.to_json());
    Ok(())
}

pub fn group(q: &GroupQuery, n: Option<usize>) -> Result<(), CliError> {
    let v = match q {
        GroupQuery::Mult { sigma } => json!(parse_letter(sigma, n)?.mult_vector()),
        GroupQuery::Inv { sigma } => json!(parse_letter(sigma, n)?.inversions()),
        GroupQuery::Acute { sigma } => clifford_json(&acute(&parse_letter(sigma, n)?)),
        GroupQuery::Grave { sigma } => clifford_json(&grave(&parse_letter(sigma, n)?)),
        GroupQuery::Hat { sigma } => clifford_json(&hat(&parse_letter(sigma, n)?)),
        GroupQuery::Words { sigma } => {
            json!(parse_letter(sigma, n)?.all_reduced_words().iter().map(|w| w.to_string()).collect::<Vec<_>>())
        }
        GroupQuery::FromMult { mult } => {
            let m: Vec<i64> = mult.split(',').map(|s| s.trim().parse().map_err(|_| usage(format!("bad entry {s:?}")))).collect::<Result<_, _>>()?;
            let p = Permutation::from_mult(&m, n.unwrap_or(m.len()))?;
            json!({ "images": p.images(), "word": p.letters() })
        }
        GroupQuery::Qword { word } => {
            let w = parse_word(word, n)?;
            let mut v = clifford_json(&q_of_word(&w)?);
            v["word"] = w.to_string().into();
            v
        }
        GroupQuery::Btable { word } => {
            let w = parse_word(word, n)?;
            let t = word_table(&w)?;
            let rows: Vec<Value> = t
                .half
                .iter()
                .enumerate()
                .map(|(k, z)| {
                    let j = if k % 2 == 0 { (k / 2).to_string() } else { format!("{}/2", k) };
                    json!({ "j": j, "element": z.to_json() })
                })
                .collect();
            json!({ "word": w.to_string(), "table": rows })
        }
        GroupQuery::Rbullet { n } => json!(r_bullet(*n)),
    };
    emit(&v);
    Ok(())
}
