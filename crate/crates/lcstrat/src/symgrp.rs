//! Permutations of `S_{n+1}` in one-line notation.
//!
//! `images[i-1] = i^σ`. Products act on the right: in `σ·τ` the factor `σ` is
//! applied first, so `(στ)(i) = τ(σ(i))`. With this rule `a·c·b = [3142]` and
//! `a·b·a = [321]`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("not a permutation of 1..={0}: {1:?}")]
    NotABijection(usize, Vec<usize>),
    #[error("mult vector {0:?} is not realizable in S_{1}")]
    NotARealizableMultVector(Vec<i64>, usize),
    #[error("generator index {0} out of range for n = {1}")]
    GeneratorOutOfRange(usize, usize),
    #[error("word parse error: {0}")]
    Parse(String),
    #[error("identity letter in word")]
    IdentityLetter,
}

pub type Result<T> = std::result::Result<T, SymError>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = SymError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::from_images(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.images
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.images.iter().enumerate() {
            if k > 0 && self.images.len() > 9 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n + 1).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m + 1];
        for &v in &images {
            if v == 0 || v > m || seen[v] {
                return Err(SymError::NotABijection(m, images));
            }
            seen[v] = true;
        }
        if m < 2 {
            return Err(SymError::NotABijection(m, images));
        }
        Ok(Permutation { images })
    }

    /// The Coxeter generator `a_j = (j, j+1)`.
    pub fn generator(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j > n {
            return Err(SymError::GeneratorOutOfRange(j, n));
        }
        let mut p = Self::identity(n);
        p.images.swap(j - 1, j);
        Ok(p)
    }

    /// The longest element `η: j ↦ n+2−j`.
    pub fn eta(n: usize) -> Self {
        Permutation { images: (1..=n + 1).rev().collect() }
    }

    pub fn from_word(n: usize, word: &[usize]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &j in word {
            p = p.compose(&Self::generator(n, j)?)?;
        }
        Ok(p)
    }

    /// Rank `n`; the group is `S_{n+1}`.
    pub fn n(&self) -> usize {
        self.images.len() - 1
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `i^σ` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(SymError::RankMismatch(self.n(), other.n()));
        }
        Ok(Permutation { images: self.images.iter().map(|&i| other.images[i - 1]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn inversions(&self) -> usize {
        let m = self.images.len();
        let mut c = 0;
        for i in 0..m {
            for j in i + 1..m {
                if self.images[i] > self.images[j] {
                    c += 1;
                }
            }
        }
        c
    }

    /// `dim σ = inv σ − 1`.
    pub fn dim(&self) -> i64 {
        self.inversions() as i64 - 1
    }

    pub fn mult_vector(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.n());
        let mut acc: i64 = 0;
        for j in 1..=self.n() {
            acc += self.images[j - 1] as i64 - j as i64;
            out.push(acc);
        }
        out
    }

    pub fn from_mult(m: &[i64], n: usize) -> Result<Self> {
        if m.len() != n {
            return Err(SymError::NotARealizableMultVector(m.to_vec(), n + 1));
        }
        let mut images = Vec::with_capacity(n + 1);
        let mut prev = 0i64;
        for j in 1..=n + 1 {
            let cur = if j <= n { m[j - 1] } else { 0 };
            let v = cur - prev + j as i64;
            if v < 1 || v > (n + 1) as i64 {
                return Err(SymError::NotARealizableMultVector(m.to_vec(), n + 1));
            }
            images.push(v as usize);
            prev = cur;
        }
        Permutation::from_images(images).map_err(|_| SymError::NotARealizableMultVector(m.to_vec(), n + 1))
    }

    /// Positions `j` with `σ = a_j·σ'` and `inv σ' < inv σ`.
    pub fn left_descents(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&j| self.images[j - 1] > self.images[j]).collect()
    }

    /// Lexicographically smallest reduced word.
    pub fn reduced_word(&self) -> ReducedWord {
        let mut p = self.images.clone();
        let mut letters = Vec::new();
        loop {
            match (1..p.len()).find(|&j| p[j - 1] > p[j]) {
                Some(j) => {
                    letters.push(j);
                    p.swap(j - 1, j);
                }
                None => return ReducedWord { n: self.n(), letters },
            }
        }
    }

    /// All reduced words, in lexicographic order.
    pub fn all_reduced_words(&self) -> Vec<ReducedWord> {
        assert!(self.n() <= 6, "all_reduced_words guarded to n <= 6");
        let mut memo: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
        fn go(p: &[usize], memo: &mut HashMap<Vec<usize>, Vec<Vec<usize>>>) -> Vec<Vec<usize>> {
            if let Some(v) = memo.get(p) {
                return v.clone();
            }
            let mut out = Vec::new();
            let mut any = false;
            for j in 1..p.len() {
                if p[j - 1] > p[j] {
                    any = true;
                    let mut q = p.to_vec();
                    q.swap(j - 1, j);
                    for mut tail in go(&q, memo) {
                        tail.insert(0, j);
                        out.push(tail);
                    }
                }
            }
            if !any {
                out.push(Vec::new());
            }
            out.sort();
            memo.insert(p.to_vec(), out.clone());
            out
        }
        go(&self.images, &mut memo)
            .into_iter()
            .map(|letters| ReducedWord { n: self.n(), letters })
            .collect()
    }

    fn rank_table(&self) -> Vec<Vec<usize>> {
        // r[i][k] = #{a ≤ i : a^σ ≥ k}, 1-based i, k.
        let m = self.images.len();
        let mut r = vec![vec![0; m + 2]; m + 1];
        for i in 1..=m {
            for k in 1..=m {
                r[i][k] = r[i - 1][k] + usize::from(self.images[i - 1] >= k);
            }
        }
        r
    }

    /// Bruhat order by the rank-matrix criterion.
    pub fn bruhat_leq(&self, other: &Permutation) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let a = self.rank_table();
        let b = other.rank_table();
        a.iter().zip(&b).all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| x <= y))
    }

    pub fn covers(&self, other: &Permutation) -> bool {
        other.inversions() == self.inversions() + 1 && self.bruhat_leq(other)
    }

    /// Every element of `S_{n+1}`, sorted lexicographically by images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=n + 1).collect();
        loop {
            out.push(Permutation { images: cur.clone() });
            // next lexicographic permutation
            let m = cur.len();
            let mut i = m - 1;
            while i > 0 && cur[i - 1] >= cur[i] {
                i -= 1;
            }
            if i == 0 {
                return out;
            }
            let mut j = m - 1;
            while cur[j] <= cur[i - 1] {
                j -= 1;
            }
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
    }

    /// Letter string of the lexicographically smallest reduced word, e.g. `"acb"`.
    pub fn letters(&self) -> String {
        self.reduced_word().letters.iter().map(|&j| gen_char(j)).collect()
    }
}

/// `r_•(n) = ⌊((n+1)/2)²⌋`.
pub fn r_bullet(n: usize) -> usize {
    (n + 1) * (n + 1) / 4
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    pub n: usize,
    pub letters: Vec<usize>,
}

impl ReducedWord {
    pub fn new(n: usize, letters: Vec<usize>) -> Result<Self> {
        let p = Permutation::from_word(n, &letters)?;
        if p.inversions() != letters.len() {
            return Err(SymError::Parse(format!("word {letters:?} is not reduced")));
        }
        Ok(ReducedWord { n, letters })
    }

    pub fn permutation(&self) -> Permutation {
        Permutation::from_word(self.n, &self.letters).expect("valid generators")
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &j in &self.letters {
            write!(f, "{}", gen_char(j))?;
        }
        Ok(())
    }
}

pub fn gen_char(j: usize) -> char {
    (b'a' + (j - 1) as u8) as char
}

fn char_gen(c: char) -> Option<usize> {
    if c.is_ascii_lowercase() {
        Some((c as u8 - b'a') as usize + 1)
    } else {
        None
    }
}

/// An itinerary word `(σ_1, …, σ_ℓ)` of non-identity permutations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    pub n: usize,
    pub letters: Vec<Permutation>,
}

impl Word {
    pub fn new(n: usize, letters: Vec<Permutation>) -> Result<Self> {
        for l in &letters {
            if l.n() != n {
                return Err(SymError::RankMismatch(n, l.n()));
            }
            if l.is_identity() {
                return Err(SymError::IdentityLetter);
            }
        }
        Ok(Word { n, letters })
    }

    pub fn empty(n: usize) -> Self {
        Word { n, letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Parses the bracket notation: `"a[ba]"` is `(a, ba)`, `"[aba]"` is the single
    /// letter `aba`, `"aba"` is `(a, b, a)`, `"()"` or `""` is the empty word.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "()" {
            return Ok(Word::empty(n));
        }
        let mut letters = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            if c.is_whitespace() {
                continue;
            }
            if c == '[' {
                let mut gens = Vec::new();
                loop {
                    match chars.next() {
                        Some(']') => break,
                        Some(d) => gens.push(
                            char_gen(d).ok_or_else(|| SymError::Parse(format!("bad letter '{d}' in {s:?}")))?,
                        ),
                        None => return Err(SymError::Parse(format!("unclosed bracket in {s:?}"))),
                    }
                }
                if gens.is_empty() {
                    return Err(SymError::Parse("empty bracket".into()));
                }
                let rw = ReducedWord::new(n, gens).map_err(|e| match e {
                    SymError::Parse(_) => SymError::Parse(format!("bracket contents in {s:?} are not reduced")),
                    other => other,
                })?;
                letters.push(rw.permutation());
            } else {
                let j = char_gen(c).ok_or_else(|| SymError::Parse(format!("bad character '{c}' in {s:?}")))?;
                letters.push(Permutation::generator(n, j)?);
            }
        }
        Word::new(n, letters)
    }

    /// Smallest `n` such that `s` parses (highest generator letter used).
    pub fn infer_rank(s: &str) -> Option<usize> {
        s.chars().filter_map(char_gen).max()
    }

    pub fn dim(&self) -> i64 {
        self.letters.iter().map(|l| l.dim()).sum()
    }

    pub fn mult(&self) -> Vec<i64> {
        let mut m = vec![0; self.n];
        for l in &self.letters {
            for (a, b) in m.iter_mut().zip(l.mult_vector()) {
                *a += b;
            }
        }
        m
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Word { n: self.n, letters }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "()");
        }
        for l in &self.letters {
            let s = l.letters();
            if s.len() == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "[{s}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Set of words rendered in bracket notation, for comparisons in tests and reports.
pub fn word_strings<'a>(ws: impl IntoIterator<Item = &'a Word>) -> BTreeSet<String> {
    ws.into_iter().map(|w| w.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_images(v.to_vec()).unwrap()
    }

    #[test]
    fn anchors() {
        assert_eq!(Permutation::from_word(3, &[1, 3, 2]).unwrap(), p(&[3, 1, 4, 2]));
        assert_eq!(Permutation::from_word(2, &[1, 2, 1]).unwrap(), p(&[3, 2, 1]));
        assert_eq!(Permutation::from_word(2, &[2, 1]).unwrap().mult_vector(), vec![1, 2]);
    }

    #[test]
    fn mult_examples() {
        assert_eq!(Permutation::from_word(3, &[1, 3]).unwrap().mult_vector(), vec![1, 0, 1]);
        assert_eq!(Permutation::from_mult(&[2, 1, 2], 3).unwrap(), p(&[3, 1, 4, 2]));
        assert_eq!(Permutation::from_mult(&[1, 0], 2).unwrap(), p(&[2, 1, 3]));
        assert!(Permutation::from_mult(&[3, 0], 2).is_err());
    }

    #[test]
    fn reduced_words_of_eta() {
        let w: Vec<String> = Permutation::eta(2).all_reduced_words().iter().map(|w| w.to_string()).collect();
        assert_eq!(w, vec!["aba", "bab"]);
        assert_eq!(Permutation::eta(3).all_reduced_words().len(), 16);
    }

    #[test]
    fn r_bullet_matches_enumeration() {
        for n in 2..=5 {
            let m = Permutation::all(n).iter().flat_map(|s| s.mult_vector()).max().unwrap();
            assert_eq!(m as usize, r_bullet(n));
        }
        assert_eq!(r_bullet(3), 4);
        assert_eq!(r_bullet(4), 6);
    }

    #[test]
    fn word_parse_and_display() {
        let w = Word::parse("a[ba]", 2).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.to_string(), "a[ba]");
        assert_eq!(Word::parse("[aba]", 2).unwrap().len(), 1);
        assert_eq!(Word::parse("aba", 2).unwrap().len(), 3);
        assert_eq!(Word::parse("[ca]b[ac]", 3).unwrap().to_string(), "[ac]b[ac]");
        assert!(Word::parse("[aa]", 2).is_err());
        assert!(Word::parse("[ab", 2).is_err());
        assert_eq!(Word::parse("()", 3).unwrap().to_string(), "()");
    }
}
