//! The partial order `⪯` on itinerary words: necessary conditions, the search over
//! factorizations into single-letter blocks, certificates from sampled transversal sections,
//! and Hasse diagrams.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{fmt_rat, parse_rat, rat, rint, Rat};
use crate::poly::UniPoly;
use crate::polysect::{build_perturbed_family, build_section, classify_minors, FamilyKind, GridSpec, SectError};
use crate::spinalg::{hat_word, CliffordEven};
use crate::symgrp::{Permutation, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PosetError {
    #[error("not a partial order: {reason} ({a}, {b})")]
    NotAPartialOrder { a: String, b: String, reason: &'static str },
    #[error("words of rank {0} and {1}")]
    RankMismatch(usize, usize),
    #[error("bad certificate: {0}")]
    BadCertificate(String),
    #[error(transparent)]
    Sect(#[from] SectError),
}

pub type Result<T> = std::result::Result<T, PosetError>;

// ---------------------------------------------------------------------------
// Necessary conditions
// ---------------------------------------------------------------------------

/// A violated necessary condition for `w_0 ⪯ w_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// The empty word is comparable only with itself.
    IsolatedEmpty,
    /// `mult_j(w_0) > mult_j(w_1)`.
    Mult { j: usize, lower: i64, upper: i64 },
    /// `hat(w_0) ≠ hat(w_1)`: the strata end in different cells.
    Hat,
    Rank { lower: usize, upper: usize },
}

impl Violation {
    /// The mult inequality is only known for `H^r`, `r > r_•(n)`; for `⪯` itself it is open.
    pub fn is_conjectural(&self) -> bool {
        matches!(self, Violation::Mult { .. })
    }
}

pub fn necessary_conditions(w0: &Word, w1: &Word) -> std::result::Result<(), Violation> {
    if w0.n != w1.n {
        return Err(Violation::Rank { lower: w0.n, upper: w1.n });
    }
    if w0.is_empty() != w1.is_empty() {
        return Err(Violation::IsolatedEmpty);
    }
    if hat_word(w0) != hat_word(w1) {
        return Err(Violation::Hat);
    }
    for (j, (a, b)) in w0.mult().into_iter().zip(w1.mult()).enumerate() {
        if a > b {
            return Err(Violation::Mult { j: j + 1, lower: a, upper: b });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

/// Why a block `w̃` satisfies `w̃ ⪯ (σ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LetterEvidence {
    Reflexive,
    /// `Γ_x` in the section of `σ` has itinerary `w̃`; exact classification.
    SectionSample { sigma: String, x: Vec<String>, roots: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub word: Word,
    pub letter: Permutation,
    pub evidence: LetterEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Necessary { violation: Violation, conjectural: bool },
    Factorization { blocks: Vec<Block> },
    /// Every factorization has a block refuted by a necessary condition.
    AllFactorizationsRefuted { factorizations: usize, conjectural: bool },
    /// Some factorization has blocks that pass the necessary conditions but were not observed.
    Undecided { open_blocks: Vec<(Word, Permutation)> },
    CapExceeded { l0: usize, l1: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrecCertificate {
    pub w0: Word,
    pub w1: Word,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl PrecCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["w0"] = self.w0.to_string().into();
        v["w1"] = self.w1.to_string().into();
        if let Evidence::Factorization { blocks } = &self.evidence {
            v["evidence"]["blocks"] = blocks
                .iter()
                .map(|b| serde_json::json!({ "word": b.word.to_string(), "letter": b.letter.letters(), "evidence": b.evidence }))
                .collect::<Vec<_>>()
                .into();
        }
        if let Evidence::Undecided { open_blocks } = &self.evidence {
            v["evidence"]["open_blocks"] =
                open_blocks.iter().map(|(w, s)| serde_json::json!([w.to_string(), s.letters()])).collect::<Vec<_>>().into();
        }
        v
    }

    /// Reclassifies every sampled witness exactly; true iff all reproduce their block.
    pub fn replay(&self) -> Result<bool> {
        let Evidence::Factorization { blocks } = &self.evidence else {
            return Ok(true);
        };
        if blocks.iter().map(|b| b.word.letters.clone()).collect::<Vec<_>>().concat() != self.w0.letters {
            return Ok(false);
        }
        for b in blocks {
            match &b.evidence {
                LetterEvidence::Reflexive => {
                    if b.word.letters != [b.letter.clone()] {
                        return Ok(false);
                    }
                }
                LetterEvidence::SectionSample { x, .. } => {
                    let fam = build_section(&b.letter, &CliffordEven::one(b.letter.n()))?;
                    let x: Vec<Rat> = x.iter().map(|s| parse_rat(s).map_err(|e| PosetError::BadCertificate(e.to_string()))).collect::<Result<_>>()?;
                    if fam.classify_point(&x)?.word != b.word {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Decides or samples `w̃ ⪯ (σ)` for single letters.
pub trait LetterOracle {
    /// Evidence when `w ⪯ (σ)` is certified, `None` when not known.
    fn certify(&mut self, w: &Word, sigma: &Permutation) -> Result<Option<LetterEvidence>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecConfig {
    pub max_l0: usize,
    pub max_l1: usize,
}

impl Default for PrecConfig {
    fn default() -> Self {
        PrecConfig { max_l0: 12, max_l1: 6 }
    }
}

#[derive(Clone, Debug)]
enum Status {
    Yes(Vec<Block>),
    Unknown(Vec<(Word, Permutation)>),
    No { count: usize, conjectural: bool },
}

fn rank(s: &Status) -> u8 {
    match s {
        Status::Yes(_) => 2,
        Status::Unknown(_) => 1,
        Status::No { .. } => 0,
    }
}

struct Search<'a, O: LetterOracle> {
    w0: &'a Word,
    w1: &'a Word,
    oracle: &'a mut O,
    memo: HashMap<(usize, usize), Status>,
    blocks: HashMap<(usize, usize, usize), Status>,
}

impl<O: LetterOracle> Search<'_, O> {
    fn block(&mut self, i: usize, a: usize, b: usize) -> Result<Status> {
        if let Some(s) = self.blocks.get(&(i, a, b)) {
            return Ok(s.clone());
        }
        let word = Word { n: self.w0.n, letters: self.w0.letters[a..b].to_vec() };
        let sigma = self.w1.letters[i].clone();
        let s = if word.letters == [sigma.clone()] {
            Status::Yes(vec![Block { word, letter: sigma, evidence: LetterEvidence::Reflexive }])
        } else {
            let single = Word { n: self.w0.n, letters: vec![sigma.clone()] };
            match necessary_conditions(&word, &single) {
                Err(v) => Status::No { count: 1, conjectural: v.is_conjectural() },
                Ok(()) => match self.oracle.certify(&word, &sigma)? {
                    Some(evidence) => Status::Yes(vec![Block { word, letter: sigma, evidence }]),
                    None => Status::Unknown(vec![(word, sigma)]),
                },
            }
        };
        self.blocks.insert((i, a, b), s.clone());
        Ok(s)
    }

    /// Best status for factoring `w0[a..]` over letters `i..` of `w1`.
    fn go(&mut self, i: usize, a: usize) -> Result<Status> {
        let (l0, l1) = (self.w0.len(), self.w1.len());
        if i == l1 {
            return Ok(if a == l0 { Status::Yes(vec![]) } else { Status::No { count: 1, conjectural: false } });
        }
        if let Some(s) = self.memo.get(&(i, a)) {
            return Ok(s.clone());
        }
        let mut best = Status::No { count: 0, conjectural: false };
        let last = l0 + i + 1 - l1;
        for b in a + 1..=last {
            let head = self.block(i, a, b)?;
            let combined = match head {
                Status::No { conjectural, .. } => {
                    // every completion of this cut is refuted
                    let tails = self.count_tails(i + 1, b);
                    Status::No { count: tails, conjectural }
                }
                head => {
                    let tail = self.go(i + 1, b)?;
                    match (head, tail) {
                        (_, Status::No { count, conjectural }) => Status::No { count, conjectural },
                        (Status::Yes(mut h), Status::Yes(t)) => {
                            h.extend(t);
                            Status::Yes(h)
                        }
                        (Status::Yes(_), Status::Unknown(u)) => Status::Unknown(u),
                        (Status::Unknown(u), Status::Yes(_)) => Status::Unknown(u),
                        (Status::Unknown(mut u), Status::Unknown(v)) => {
                            u.extend(v);
                            Status::Unknown(u)
                        }
                        (Status::No { .. }, _) => unreachable!(),
                    }
                }
            };
            best = match (best, combined) {
                (Status::No { count: c0, conjectural: k0 }, Status::No { count: c1, conjectural: k1 }) => {
                    Status::No { count: c0 + c1, conjectural: k0 || k1 }
                }
                (b, c) => {
                    if rank(&c) > rank(&b) {
                        c
                    } else {
                        b
                    }
                }
            };
            if matches!(best, Status::Yes(_)) {
                break;
            }
        }
        self.memo.insert((i, a), best.clone());
        Ok(best)
    }

    /// Number of ways to cut `w0[a..]` into `l1 − i` nonempty blocks.
    fn count_tails(&self, i: usize, a: usize) -> usize {
        let k = self.w1.len() - i;
        let m = self.w0.len() - a;
        if k == 0 {
            return usize::from(m == 0);
        }
        if m < k {
            return 0;
        }
        binomial(m - 1, k - 1)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `w_0 ⪯ w_1` through factorizations `w_0 = w̃_1⋯w̃_ℓ` with `w̃_i ⪯ (σ_i)`.
pub fn prec<O: LetterOracle>(w0: &Word, w1: &Word, oracle: &mut O, cfg: &PrecConfig) -> Result<PrecCertificate> {
    let cert = |verdict, evidence| Ok(PrecCertificate { w0: w0.clone(), w1: w1.clone(), verdict, evidence });
    if let Err(violation) = necessary_conditions(w0, w1) {
        let conjectural = violation.is_conjectural();
        return cert(Verdict::No, Evidence::Necessary { violation, conjectural });
    }
    if w0.is_empty() {
        return cert(Verdict::Yes, Evidence::Factorization { blocks: vec![] });
    }
    if w0.len() > cfg.max_l0 || w1.len() > cfg.max_l1 {
        return cert(Verdict::Unknown, Evidence::CapExceeded { l0: w0.len(), l1: w1.len() });
    }
    if w0.len() < w1.len() {
        return cert(Verdict::No, Evidence::AllFactorizationsRefuted { factorizations: 0, conjectural: false });
    }
    let mut s = Search { w0, w1, oracle, memo: HashMap::new(), blocks: HashMap::new() };
    match s.go(0, 0)? {
        Status::Yes(blocks) => cert(Verdict::Yes, Evidence::Factorization { blocks }),
        Status::Unknown(open_blocks) => cert(Verdict::Unknown, Evidence::Undecided { open_blocks }),
        Status::No { count, conjectural } => cert(Verdict::No, Evidence::AllFactorizationsRefuted { factorizations: count, conjectural }),
    }
}

// ---------------------------------------------------------------------------
// Section sampling
// ---------------------------------------------------------------------------

/// Dyadic grids of radius `2^{-k}`, `k = 1..=k_max`, with `steps` points per axis; grids
/// with more than `max_points` points are replaced by that many random points of the same lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingBudget {
    pub k_max: u32,
    pub steps: usize,
    pub max_points: usize,
    pub seed: u64,
}

impl Default for SamplingBudget {
    fn default() -> Self {
        SamplingBudget { k_max: 8, steps: 17, max_points: 4096, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub word: Word,
    pub x: Vec<String>,
    pub roots: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LetterObservations {
    pub sigma: Permutation,
    /// First witness of each observed itinerary.
    pub words: BTreeMap<Word, Observation>,
    pub points: usize,
    /// Samples with a real root of some minor outside the window `(−1, 1)`, which are not used.
    pub out_of_range: usize,
    /// Observed words with `mult(w) ≰ mult(σ)`; none are expected.
    pub mult_violations: Vec<Observation>,
}

impl LetterObservations {
    pub fn word_set(&self) -> Vec<Word> {
        self.words.keys().cloned().collect()
    }

    pub fn evidence(&self, w: &Word) -> Option<LetterEvidence> {
        self.words.get(w).map(|o| LetterEvidence::SectionSample { sigma: self.sigma.letters(), x: o.x.clone(), roots: o.roots.clone() })
    }
}

fn lattice_points(d: usize, radius: &Rat, budget: &SamplingBudget, k: u32) -> Vec<Vec<Rat>> {
    let steps = budget.steps.max(1);
    let total = (steps as f64).powi(d as i32);
    if total <= budget.max_points as f64 {
        return GridSpec::square(d, radius.clone(), steps).points();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ (u64::from(k) << 32));
    let den = (steps - 1).max(1) as i64;
    (0..budget.max_points)
        .map(|_| (0..d).map(|_| radius * (rat(2 * rng.gen_range(0..=den), den) - rint(1))).collect())
        .collect()
}

/// Cauchy bound on the real roots of all of `ms`.
fn root_bound(ms: &[UniPoly]) -> Rat {
    let mut b = rint(1);
    for m in ms {
        let c = m.coeffs();
        let Some(lead) = c.last() else { continue };
        let s = c[..c.len() - 1].iter().fold(rint(0), |acc, x| acc + (x / lead).abs());
        if s > b {
            b = s;
        }
    }
    b + rint(1)
}

/// Exact itineraries observed on the section of `σ` over shrinking dyadic grids.
///
/// A sample is used only when its classification on the window `(−1, 1)` agrees with the one
/// on the whole real line, so that no letter is lost at the ends.
pub fn letter_oracle_section(sigma: &Permutation, budget: &SamplingBudget) -> Result<LetterObservations> {
    let fam = build_section(sigma, &CliffordEven::one(sigma.n()))?;
    let top = sigma.mult_vector();
    let mut obs = LetterObservations { sigma: sigma.clone(), words: BTreeMap::new(), points: 0, out_of_range: 0, mult_violations: vec![] };
    for k in 1..=budget.k_max {
        let radius = Rat::new(1.into(), num_bigint::BigInt::from(2).pow(k));
        let pts = lattice_points(fam.d, &radius, budget, k);
        obs.points += pts.len();
        let labels: Vec<Option<Observation>> = pts
            .par_iter()
            .map(|x| {
                let ms = fam.minors_at(x)?;
                let b = root_bound(&ms);
                let full = classify_minors(&ms, fam.n, &(-b.clone(), b))?;
                let c = classify_minors(&ms, fam.n, &fam.window)?;
                if c.events.len() != full.events.len() || c.word != full.word {
                    return Ok(None);
                }
                Ok(Some(Observation { word: c.word.clone(), x: x.iter().map(fmt_rat).collect(), roots: c.roots_refined(40) }))
            })
            .collect::<Result<_>>()?;
        for o in labels {
            let Some(o) = o else {
                obs.out_of_range += 1;
                continue;
            };
            if obs.words.contains_key(&o.word) {
                continue;
            }
            if o.word.mult().iter().zip(&top).any(|(a, b)| a > b) {
                obs.mult_violations.push(o.clone());
            }
            obs.words.insert(o.word.clone(), o);
        }
    }
    Ok(obs)
}

/// Letter oracle backed by [`letter_oracle_section`], cached per letter.
pub struct SectionOracle {
    pub budget: SamplingBudget,
    cache: HashMap<Permutation, LetterObservations>,
}

impl SectionOracle {
    pub fn new(budget: SamplingBudget) -> Self {
        SectionOracle { budget, cache: HashMap::new() }
    }

    pub fn observations(&mut self, sigma: &Permutation) -> Result<&LetterObservations> {
        if !self.cache.contains_key(sigma) {
            let o = letter_oracle_section(sigma, &self.budget)?;
            self.cache.insert(sigma.clone(), o);
        }
        Ok(&self.cache[sigma])
    }
}

impl LetterOracle for SectionOracle {
    fn certify(&mut self, w: &Word, sigma: &Permutation) -> Result<Option<LetterEvidence>> {
        Ok(self.observations(sigma)?.evidence(w))
    }
}

// ---------------------------------------------------------------------------
// Hasse diagrams
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct Hasse {
    /// Sorted by `(dim, notation)`.
    pub nodes: Vec<Word>,
    /// Cover relations `(lower, upper)` as node indices.
    pub covers: Vec<(usize, usize)>,
}

impl Hasse {
    pub fn minimal(&self) -> Vec<&Word> {
        (0..self.nodes.len()).filter(|&i| !self.covers.iter().any(|&(_, u)| u == i)).map(|i| &self.nodes[i]).collect()
    }

    pub fn maximal(&self) -> Vec<&Word> {
        (0..self.nodes.len()).filter(|&i| !self.covers.iter().any(|&(l, _)| l == i)).map(|i| &self.nodes[i]).collect()
    }

    pub fn cover_strings(&self) -> Vec<(String, String)> {
        self.covers.iter().map(|&(l, u)| (self.nodes[l].to_string(), self.nodes[u].to_string())).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=plaintext];\n");
        for (i, w) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{w}\"];");
        }
        for &(l, u) in &self.covers {
            let _ = writeln!(s, "  n{l} -> n{u};");
        }
        s.push_str("}\n");
        s
    }
}

/// Transitive reduction of `rel` on `words`, after checking that it is a partial order.
pub fn hasse(words: &[Word], mut rel: impl FnMut(&Word, &Word) -> Result<bool>) -> Result<Hasse> {
    let mut nodes = words.to_vec();
    nodes.sort_by_cached_key(|w| (w.dim(), w.to_string()));
    nodes.dedup();
    let m = nodes.len();
    let mut le = vec![vec![false; m]; m];
    for i in 0..m {
        for j in 0..m {
            le[i][j] = rel(&nodes[i], &nodes[j])?;
        }
    }
    let err = |a: usize, b: usize, reason| PosetError::NotAPartialOrder { a: nodes[a].to_string(), b: nodes[b].to_string(), reason };
    for i in 0..m {
        if !le[i][i] {
            return Err(err(i, i, "not reflexive"));
        }
        for j in 0..m {
            if i != j && le[i][j] && le[j][i] {
                return Err(err(i, j, "not antisymmetric"));
            }
            for k in 0..m {
                if le[i][j] && le[j][k] && !le[i][k] {
                    return Err(err(i, k, "not transitive"));
                }
            }
        }
    }
    let covers = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && le[i][j] && !(0..m).any(|k| k != i && k != j && le[i][k] && le[k][j]))
        .collect();
    Ok(Hasse { nodes, covers })
}

// ---------------------------------------------------------------------------
// Splittings of [acb] in the perturbed family
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitSample {
    pub u: String,
    pub points: usize,
    /// First grid point with itinerary `acbac`, if any.
    pub acbac: Option<Vec<String>>,
    pub cabca: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingReport {
    pub samples: Vec<SplitSample>,
}

impl SplittingReport {
    pub fn acbac(&self) -> bool {
        self.samples.iter().any(|s| s.acbac.is_some())
    }

    pub fn cabca(&self) -> bool {
        self.samples.iter().any(|s| s.cabca.is_some())
    }

    /// Exactly one of the two splittings occurs in every sample.
    pub fn exclusive(&self) -> bool {
        self.samples.iter().all(|s| s.acbac.is_some() != s.cabca.is_some())
    }
}

/// Which of `acbac`, `cabca` occur on `steps × steps` grids of radius `radius` in the
/// betaprime family, one grid per value of `u`.
pub fn hr_splitting_report(us: &[Rat], radius: &Rat, steps: usize) -> Result<SplittingReport> {
    let acbac = Word::parse("acbac", 3).expect("valid word").to_string();
    let cabca = Word::parse("cabca", 3).expect("valid word").to_string();
    let grid = GridSpec::square(2, radius.clone(), steps);
    let mut samples = Vec::with_capacity(us.len());
    for u in us {
        let fam = build_perturbed_family(FamilyKind::Betaprime, Some(u.clone()))?;
        let labels = fam.stratum_map(&grid)?;
        let find = |w: &str| labels.iter().find(|g| g.itinerary == w).map(|g| g.x.clone());
        samples.push(SplitSample { u: fmt_rat(u), points: labels.len(), acbac: find(&acbac), cabca: find(&cabca) });
    }
    Ok(SplittingReport { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, n: usize) -> Word {
        Word::parse(s, n).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(7, 7), 1);
    }

    #[test]
    fn necessary_examples() {
        assert_eq!(necessary_conditions(&w("aa", 2), &w("[aba]", 2)), Ok(()));
        assert_eq!(necessary_conditions(&w("()", 2), &w("a", 2)), Err(Violation::IsolatedEmpty));
        assert_eq!(necessary_conditions(&w("[ac]b[ac]", 3), &w("[acb]", 3)), Ok(()));
        assert_eq!(w("[ac]b[ac]", 3).mult(), vec![2, 1, 2]);
        // hat(bb) = hat(aa) = −1: only mult separates them
        assert_eq!(hat_word(&w("bb", 2)), hat_word(&w("aa", 2)));
        assert_eq!(necessary_conditions(&w("bb", 2), &w("aa", 2)), Err(Violation::Mult { j: 2, lower: 2, upper: 0 }));
        assert_eq!(necessary_conditions(&w("a", 2), &w("b", 2)), Err(Violation::Hat));
    }
}
