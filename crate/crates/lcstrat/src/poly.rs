//! Exact polynomials over ℚ: univariate with real-root isolation, sparse multivariate with
//! resultants and discriminants, and a small float polynomial root finder.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("variable ring mismatch")]
    RingMismatch,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("division is not exact")]
    InexactDivision,
    #[error("parse error: {0}")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // huge numerators: shift both down
            let bits = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
            let s = bits.max(0) as usize;
            let a = (r.numer() >> s).to_f64().unwrap_or(0.0);
            let b = (r.denom() >> s).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

/// Parses "p/q", "p" or a decimal like "0.25".
pub fn parse_rat(s: &str) -> Result<Rat, PolyError> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| PolyError::Parse(s.into()))?;
        let b: BigInt = b.trim().parse().map_err(|_| PolyError::Parse(s.into()))?;
        if b.is_zero() {
            return Err(PolyError::Parse(s.into()));
        }
        return Ok(Rat::new(a, b));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ipv: BigInt = if ip.is_empty() || ip == "-" { BigInt::zero() } else { ip.parse().map_err(|_| PolyError::Parse(s.into()))? };
        let fpv: BigInt = if fp.is_empty() { BigInt::zero() } else { fp.parse().map_err(|_| PolyError::Parse(s.into()))? };
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let frac = Rat::new(fpv, den);
        let base = Rat::from_integer(ipv);
        return Ok(if neg { base - frac } else { base + frac });
    }
    let a: BigInt = s.parse().map_err(|_| PolyError::Parse(s.into()))?;
    Ok(Rat::from_integer(a))
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// Univariate
// ---------------------------------------------------------------------------

/// Dense univariate polynomial, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    c: Vec<Rat>,
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("t"))
    }
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { c: vec![] }
    }

    pub fn constant(r: Rat) -> Self {
        Self::from_coeffs(vec![r])
    }

    pub fn x() -> Self {
        Self::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    pub fn from_coeffs(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        UniPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&v| rint(v)).collect())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> Rat {
        self.c.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn sign_at(&self, x: &Rat) -> i32 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, a| acc * x + rat_to_f64(a))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.c.iter().map(rat_to_f64).collect()
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(self.c.iter().enumerate().skip(1).map(|(i, a)| a * rint(i as i64)).collect())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::from_coeffs(self.c.iter().map(|a| a * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lc();
        self.scale(&(Rat::one() / l))
    }

    /// Order of vanishing at `t = 0`.
    pub fn order_at_zero(&self) -> Option<usize> {
        self.c.iter().position(|a| !a.is_zero())
    }

    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut q = vec![Rat::zero(); r.len() - dd];
        let lc = d.lc();
        for k in (0..q.len()).rev() {
            let coef = &r[k + dd] / &lc;
            if !coef.is_zero() {
                for (i, di) in d.c.iter().enumerate() {
                    r[k + i] -= &coef * di;
                }
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (UniPoly::from_coeffs(q), UniPoly::from_coeffs(r))
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn squarefree_part(&self) -> UniPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Yun's algorithm: `self = lc · Π f_k^k` with `f_k` squarefree and pairwise coprime.
    /// Returns the nonconstant `(f_k, k)`.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut k = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = &c - &b.derivative();
            k += 1;
        }
        out
    }

    /// Sturm sequence, each term rescaled by a positive constant.
    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let norm = |p: UniPoly| {
            if p.is_zero() {
                p
            } else {
                let l = p.lc().abs();
                p.scale(&(Rat::one() / l))
            }
        };
        let mut seq = vec![norm(self.clone())];
        let d = norm(self.derivative());
        if d.is_zero() {
            return seq;
        }
        seq.push(d);
        loop {
            let k = seq.len();
            let r = seq[k - 2].div_rem(&seq[k - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(norm(-&r));
        }
        seq
    }

    pub fn cauchy_bound(&self) -> Rat {
        let lc = self.lc().abs();
        let m = self.c.iter().take(self.c.len().saturating_sub(1)).map(|a| a.abs() / &lc).fold(Rat::zero(), |a, b| if b > a { b } else { a });
        Rat::one() + m
    }

    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            push_term(&mut s, a, &if k == 0 { String::new() } else if k == 1 { var.to_string() } else { format!("{var}^{k}") });
        }
        s
    }
}

fn push_term(s: &mut String, a: &Rat, mono: &str) {
    let neg = a.is_negative();
    let mag = a.abs();
    if s.is_empty() {
        if neg {
            s.push('-');
        }
    } else {
        s.push_str(if neg { " - " } else { " + " });
    }
    if mono.is_empty() {
        s.push_str(&fmt_rat(&mag));
    } else if mag.is_one() {
        s.push_str(mono);
    } else {
        s.push_str(&fmt_rat(&mag));
        s.push('*');
        s.push_str(mono);
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, o: &UniPoly) -> UniPoly {
        let n = self.c.len().max(o.c.len());
        let z = Rat::zero();
        UniPoly::from_coeffs((0..n).map(|i| self.c.get(i).unwrap_or(&z) + o.c.get(i).unwrap_or(&z)).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, o: &UniPoly) -> UniPoly {
        let n = self.c.len().max(o.c.len());
        let z = Rat::zero();
        UniPoly::from_coeffs((0..n).map(|i| self.c.get(i).unwrap_or(&z) - o.c.get(i).unwrap_or(&z)).collect())
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut c = vec![Rat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(c)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly { c: self.c.iter().map(|a| -a).collect() }
    }
}

/// A real root of a squarefree polynomial: either exactly `lo == hi` (rational), or the
/// unique root in the open interval `(lo, hi)` whose endpoints are not roots.
#[derive(Clone, Debug, PartialEq)]
pub struct RootInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn approx(&self) -> f64 {
        rat_to_f64(&((&self.lo + &self.hi) / rint(2)))
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }
}

/// Sturm-sequence machinery for one squarefree polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    pub p: UniPoly,
    seq: Vec<Vec<BigInt>>,
    ip: Vec<BigInt>,
}

/// Coefficients scaled by a positive integer to clear denominators.
fn int_coeffs(p: &UniPoly) -> Vec<BigInt> {
    let l = p.c.iter().fold(BigInt::one(), |l, a| num_integer::Integer::lcm(&l, a.denom()));
    p.c.iter().map(|a| a.numer() * (&l / a.denom())).collect()
}

/// Sign of `Σ c_k x^k` at `x = a/b` via `Σ c_k a^k b^{d−k}` (`b > 0`).
fn sign_int(c: &[BigInt], x: &Rat) -> i32 {
    if c.is_empty() {
        return 0;
    }
    let (a, b) = (x.numer(), x.denom());
    let d = c.len() - 1;
    let mut acc = c[d].clone();
    let mut bp = BigInt::one();
    for k in (0..d).rev() {
        bp *= b;
        acc = acc * a + &c[k] * &bp;
    }
    match acc.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}

impl SturmChain {
    pub fn new(p: &UniPoly) -> Self {
        SturmChain { p: p.clone(), seq: p.sturm_sequence().iter().map(int_coeffs).collect(), ip: int_coeffs(p) }
    }

    pub fn sign_at(&self, x: &Rat) -> i32 {
        sign_int(&self.ip, x)
    }

    pub fn variations(&self, x: &Rat) -> usize {
        let mut last = 0;
        let mut v = 0;
        for q in &self.seq {
            let s = sign_int(q, x);
            if s != 0 {
                if last != 0 && s != last {
                    v += 1;
                }
                last = s;
            }
        }
        v
    }

    /// Distinct roots in `(a, b]`.
    pub fn count(&self, a: &Rat, b: &Rat) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }

    /// Does the root described by `r` (a root of some polynomial whose roots include all
    /// roots of `self.p`) belong to `self.p`?
    pub fn has_root_in(&self, r: &RootInterval) -> bool {
        if r.is_exact() {
            self.sign_at(&r.lo) == 0
        } else {
            self.count(&r.lo, &r.hi) > 0
        }
    }

    /// Isolating intervals for all real roots, sorted.
    pub fn isolate(&self) -> Vec<RootInterval> {
        let b = self.p.cauchy_bound();
        self.isolate_in(&-b.clone(), &b)
    }

    /// Isolating intervals for the roots in `(lo, hi]`, sorted.
    pub fn isolate_in(&self, lo: &Rat, hi: &Rat) -> Vec<RootInterval> {
        if self.p.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        let mut stack = vec![(lo.clone(), hi.clone())];
        let two = rint(2);
        while let Some((a, b)) = stack.pop() {
            let c = self.count(&a, &b);
            if c == 0 {
                continue;
            }
            if c == 1 {
                out.push(RootInterval { lo: a, hi: b });
                continue;
            }
            let m = (&a + &b) / &two;
            if self.sign_at(&m) == 0 {
                let mut d = (&b - &a) / rint(4);
                loop {
                    let (l, h) = (&m - &d, &m + &d);
                    if self.sign_at(&l) != 0 && self.sign_at(&h) != 0 && self.count(&l, &h) == 1 {
                        out.push(RootInterval { lo: m.clone(), hi: m.clone() });
                        stack.push((a.clone(), l));
                        stack.push((h, b.clone()));
                        break;
                    }
                    d /= &two;
                }
            } else {
                stack.push((a, m.clone()));
                stack.push((m, b));
            }
        }
        out.sort_by(|x, y| x.lo.cmp(&y.lo));
        // a root exactly at the top of a half-open interval is really rational; expose it
        for r in &mut out {
            if !r.is_exact() && self.sign_at(&r.hi) == 0 {
                r.lo = r.hi.clone();
            }
        }
        out
    }

    /// Bisect until the width is below `w`; snaps to an exact rational root when met.
    pub fn refine(&self, r: &RootInterval, w: &Rat) -> RootInterval {
        if r.is_exact() {
            return r.clone();
        }
        let (mut lo, mut hi) = (r.lo.clone(), r.hi.clone());
        let slo = self.sign_at(&lo);
        let two = rint(2);
        while &(&hi - &lo) > w {
            let m = (&lo + &hi) / &two;
            let s = self.sign_at(&m);
            if s == 0 {
                return RootInterval { lo: m.clone(), hi: m };
            }
            if s == slo {
                lo = m;
            } else {
                hi = m;
            }
        }
        RootInterval { lo, hi }
    }

    /// Tries to recover a rational root by finding the simplest fraction in a refined interval.
    pub fn try_rational(&self, r: &RootInterval) -> Option<Rat> {
        if r.is_exact() {
            return Some(r.lo.clone());
        }
        let eps = rat(1, 1_000_000_000_000);
        let rr = self.refine(r, &eps);
        if rr.is_exact() {
            return Some(rr.lo);
        }
        let c = simplest_between(&rr.lo, &rr.hi);
        if self.sign_at(&c) == 0 {
            Some(c)
        } else {
            None
        }
    }
}

/// Simplest rational in the closed interval `[lo, hi]` (Stern–Brocot descent).
pub fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Rat::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    if fl.clone() + Rat::one() <= *hi {
        return fl + Rat::one();
    }
    let inner = simplest_between(&(Rat::one() / (hi - &fl)), &(Rat::one() / (lo - &fl)));
    fl + Rat::one() / inner
}

// ---------------------------------------------------------------------------
// Multivariate
// ---------------------------------------------------------------------------

/// Ordered variable names shared by polynomials of one ring.
pub type Ring = Arc<Vec<String>>;

pub fn ring(names: &[&str]) -> Ring {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

/// Sparse polynomial over ℚ. Monomials are exponent vectors indexed like the ring.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ring: Ring,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl MultiPoly {
    pub fn zero(ring: &Ring) -> Self {
        MultiPoly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Ring, c: Rat) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(vec![0; ring.len()], c);
        }
        p
    }

    pub fn one(ring: &Ring) -> Self {
        Self::constant(ring, Rat::one())
    }

    pub fn var(ring: &Ring, i: usize) -> Self {
        let mut e = vec![0; ring.len()];
        e[i] = 1;
        let mut p = Self::zero(ring);
        p.terms.insert(e, Rat::one());
        p
    }

    pub fn var_named(ring: &Ring, name: &str) -> Result<Self, PolyError> {
        Ok(Self::var(ring, var_index(ring, name)?))
    }

    pub fn monomial(ring: &Ring, exps: Vec<u32>, c: Rat) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zero(&self.ring);
        }
        MultiPoly { ring: self.ring.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn degree_in(&self, v: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[v]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Coefficients with respect to variable `v`, ascending; `v` removed from each.
    pub fn coeffs_in(&self, v: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(v).unwrap_or(0) as usize;
        let mut out = vec![Self::zero(&self.ring); if self.is_zero() { 0 } else { d + 1 }];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[v] as usize;
            e2[v] = 0;
            out[k].add_term(e2, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(ring: &Ring, v: usize, cs: &[MultiPoly]) -> Self {
        let mut p = Self::zero(ring);
        for (k, c) in cs.iter().enumerate() {
            for (e, a) in &c.terms {
                let mut e2 = e.clone();
                e2[v] += k as u32;
                p.add_term(e2, a.clone());
            }
        }
        p
    }

    pub fn derivative(&self, v: usize) -> Self {
        let mut p = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            if e[v] > 0 {
                let mut e2 = e.clone();
                e2[v] -= 1;
                p.add_term(e2, c * rint(e[v] as i64));
            }
        }
        p
    }

    /// Antiderivative in `v` vanishing at `v = 0`.
    pub fn integral(&self, v: usize) -> Self {
        let mut p = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[v] += 1;
            let k = e2[v] as i64;
            p.add_term(e2, c / rint(k));
        }
        p
    }

    pub fn subs(&self, v: usize, val: &Rat) -> Self {
        let mut p = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[v];
            e2[v] = 0;
            p.add_term(e2, c * num_traits::pow(val.clone(), k as usize));
        }
        p
    }

    pub fn subs_many(&self, assign: &[(usize, Rat)]) -> Self {
        let mut p = self.clone();
        for (v, val) in assign {
            p = p.subs(*v, val);
        }
        p
    }

    /// Univariate view in `v`; every other variable must already be eliminated.
    pub fn to_uni(&self, v: usize) -> Option<UniPoly> {
        let mut c = Vec::new();
        for (e, a) in &self.terms {
            if e.iter().enumerate().any(|(i, &x)| i != v && x != 0) {
                return None;
            }
            let k = e[v] as usize;
            if c.len() <= k {
                c.resize(k + 1, Rat::zero());
            }
            c[k] += a;
        }
        Some(UniPoly::from_coeffs(c))
    }

    pub fn from_uni(ring: &Ring, v: usize, p: &UniPoly) -> Self {
        let mut out = Self::zero(ring);
        for (k, a) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; ring.len()];
            e[v] = k as u32;
            out.add_term(e, a.clone());
        }
        out
    }

    pub fn eval(&self, vals: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= num_traits::pow(vals[i].clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, vals: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| rat_to_f64(c) * e.iter().enumerate().map(|(i, &k)| vals[i].powi(k as i32)).product::<f64>()).sum()
    }

    fn leading(&self) -> Option<(&Vec<u32>, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient, `None` when the division leaves a remainder.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        let (de, dc) = d.leading()?;
        let mut r = self.clone();
        let mut q = Self::zero(&self.ring);
        while let Some((re, rc)) = r.leading() {
            if re.iter().zip(de).any(|(a, b)| a < b) {
                return None;
            }
            let e: Vec<u32> = re.iter().zip(de).map(|(a, b)| a - b).collect();
            let c = rc / dc;
            let t = Self::monomial(&self.ring, e, c);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        Some(q)
    }

    /// Resultant with respect to `v` via the Sylvester determinant.
    pub fn resultant(&self, o: &MultiPoly, v: usize) -> Result<MultiPoly, PolyError> {
        if self.is_zero() || o.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let f = self.coeffs_in(v);
        let g = o.coeffs_in(v);
        let (m, n) = (f.len() - 1, g.len() - 1);
        if m == 0 {
            return Ok(f[0].pow(n as u32));
        }
        if n == 0 {
            return Ok(g[0].pow(m as u32));
        }
        let size = m + n;
        let zero = Self::zero(&self.ring);
        let mut mat = vec![vec![zero.clone(); size]; size];
        for i in 0..n {
            for k in 0..=m {
                mat[i][i + k] = f[m - k].clone();
            }
        }
        for i in 0..m {
            for k in 0..=n {
                mat[n + i][i + k] = g[n - k].clone();
            }
        }
        Ok(det_poly(&mat, &self.ring))
    }

    /// Discriminant in `v`: `(−1)^{k(k−1)/2} res(f, ∂f) / lc(f)` with `k` the degree. This is
    /// the classical normalization, for which `a t² + b t + c ↦ b² − 4ac`.
    pub fn discriminant(&self, v: usize) -> Result<MultiPoly, PolyError> {
        let k = self.degree_in(v).ok_or(PolyError::ZeroPolynomial)? as usize;
        if k == 0 {
            return Err(PolyError::ZeroPolynomial);
        }
        let lc = self.coeffs_in(v).pop().unwrap();
        let r = self.resultant(&self.derivative(v), v)?;
        let r = if (k * (k - 1) / 2) % 2 == 1 { -&r } else { r };
        r.div_exact(&lc).ok_or(PolyError::InexactDivision)
    }

    pub fn parse(ring: &Ring, s: &str) -> Result<MultiPoly, PolyError> {
        let toks = tokenize(s)?;
        let mut p = Parser { toks, pos: 0, ring };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(PolyError::Parse(format!("trailing input in {s:?}")));
        }
        Ok(e)
    }

    fn check_ring(&self, o: &MultiPoly) {
        assert!(Arc::ptr_eq(&self.ring, &o.ring) || self.ring == o.ring, "ring mismatch");
    }
}

pub fn var_index(ring: &Ring, name: &str) -> Result<usize, PolyError> {
    ring.iter().position(|n| n == name).ok_or_else(|| PolyError::UnknownVariable(name.into()))
}

/// Determinant of a polynomial matrix by Laplace expansion with memoization over column sets.
pub fn det_poly(m: &[Vec<MultiPoly>], ring: &Ring) -> MultiPoly {
    let k = m.len();
    assert!(k <= 24);
    let mut memo: HashMap<u32, MultiPoly> = HashMap::new();
    fn rec(m: &[Vec<MultiPoly>], row: usize, used: u32, memo: &mut HashMap<u32, MultiPoly>, ring: &Ring) -> MultiPoly {
        let k = m.len();
        if row == k {
            return MultiPoly::one(ring);
        }
        if let Some(v) = memo.get(&used) {
            return v.clone();
        }
        let mut acc = MultiPoly::zero(ring);
        let mut sign_pos = true;
        for col in 0..k {
            if used & (1 << col) != 0 {
                continue;
            }
            let e = &m[row][col];
            if !e.is_zero() {
                let sub = rec(m, row + 1, used | (1 << col), memo, ring);
                let term = e * &sub;
                acc = if sign_pos { &acc + &term } else { &acc - &term };
            }
            sign_pos = !sign_pos;
        }
        memo.insert(used, acc.clone());
        acc
    }
    rec(m, 0, 0, &mut memo, ring)
}

impl fmt::Display for MultiPoly {
    /// Canonical text: terms by descending total degree, then descending exponent vector.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        let mut s = String::new();
        for (e, c) in ts {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.ring[i].clone() } else { format!("{}^{}", self.ring[i], k) })
                .collect();
            push_term(&mut s, c, &mono.join("*"));
        }
        write!(f, "{s}")
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        self.check_ring(o);
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        self.check_ring(o);
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        self.check_ring(o);
        let mut p = MultiPoly::zero(&self.ring);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rat::one())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, PolyError> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(parse_rat(&cs[st..i].iter().collect::<String>())?));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(PolyError::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ring: &'a Ring,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = if self.peek() == Some(&Tok::Op('-')) {
            self.pos += 1;
            -&self.term()?
        } else {
            if self.peek() == Some(&Tok::Op('+')) {
                self.pos += 1;
            }
            self.term()?
        };
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    let c = f.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| PolyError::Parse("division by a non-constant".into()))?;
                    acc = acc.scale(&(Rat::one() / c));
                }
                // implicit product like "2x"
                Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<MultiPoly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.pos += 1;
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(k)) if k.is_integer() && !k.is_negative() => {
                    self.pos += 1;
                    return Ok(base.pow(k.to_integer().to_u32().ok_or_else(|| PolyError::Parse("exponent".into()))?));
                }
                _ => return Err(PolyError::Parse("exponent must be a natural number".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(self.ring, r))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                MultiPoly::var_named(self.ring, &name)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.toks.get(self.pos) != Some(&Tok::Op(')')) {
                    return Err(PolyError::Parse("missing )".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            t => Err(PolyError::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// Unreduced fraction of polynomials; equality by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut f = RatFunc { num, den };
        f.tidy();
        f
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let den = MultiPoly::one(p.ring());
        RatFunc { num: p, den }
    }

    pub fn constant(ring: &Ring, c: Rat) -> Self {
        Self::from_poly(MultiPoly::constant(ring, c))
    }

    pub fn parse(ring: &Ring, num: &str, den: &str) -> Result<Self, PolyError> {
        Ok(Self::new(MultiPoly::parse(ring, num)?, MultiPoly::parse(ring, den)?))
    }

    pub fn ring(&self) -> &Ring {
        self.num.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn eval(&self, vals: &[Rat]) -> Option<Rat> {
        let d = self.den.eval(vals);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(vals) / d)
        }
    }

    /// Cancels an exact common factor when the denominator divides the numerator, and
    /// moves a constant leading coefficient into the numerator.
    fn tidy(&mut self) {
        if self.num.is_zero() {
            self.den = MultiPoly::one(self.num.ring());
            return;
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            self.num = q;
            self.den = MultiPoly::one(self.num.ring());
            return;
        }
        if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&(Rat::one() / c));
            self.den = MultiPoly::one(self.num.ring());
        }
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &Self) -> bool {
        (&self.num * &o.den) == (&o.num * &self.den)
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den.clone());
        }
        RatFunc::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant() == Some(Rat::one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Float polynomials
// ---------------------------------------------------------------------------

/// Dense float polynomial, ascending coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FloatPoly(pub Vec<f64>);

impl FloatPoly {
    pub fn constant(c: f64) -> Self {
        FloatPoly(vec![c])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, a| acc * x + a)
    }

    pub fn derivative(&self) -> Self {
        FloatPoly(self.0.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        FloatPoly((0..n).map(|i| self.0.get(i).unwrap_or(&0.0) + o.0.get(i).unwrap_or(&0.0)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        FloatPoly(self.0.iter().map(|a| a * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.0.is_empty() || o.0.is_empty() {
            return FloatPoly(vec![]);
        }
        let mut c = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        FloatPoly(c)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `p(a + h·u)` as a polynomial in `u`.
    pub fn rescale(&self, a: f64, h: f64) -> Self {
        // Horner in the shifted variable
        let mut acc = FloatPoly(vec![]);
        let lin = FloatPoly(vec![a, h]);
        for c in self.0.iter().rev() {
            acc = acc.mul(&lin).add(&FloatPoly::constant(*c));
        }
        acc
    }
}

/// Determinant of a small matrix of float polynomials (Laplace expansion).
pub fn det_float_poly(m: &[Vec<FloatPoly>]) -> FloatPoly {
    let k = m.len();
    let mut memo: HashMap<u32, FloatPoly> = HashMap::new();
    fn rec(m: &[Vec<FloatPoly>], row: usize, used: u32, memo: &mut HashMap<u32, FloatPoly>) -> FloatPoly {
        let k = m.len();
        if row == k {
            return FloatPoly::constant(1.0);
        }
        if let Some(v) = memo.get(&used) {
            return v.clone();
        }
        let mut acc = FloatPoly(vec![]);
        let mut pos = true;
        for col in 0..k {
            if used & (1 << col) != 0 {
                continue;
            }
            let e = &m[row][col];
            if e.0.iter().any(|&v| v != 0.0) {
                let term = e.mul(&rec(m, row + 1, used | (1 << col), memo));
                acc = if pos { acc.add(&term) } else { acc.sub(&term) };
            }
            pos = !pos;
        }
        memo.insert(used, acc.clone());
        acc
    }
    if k == 0 {
        return FloatPoly::constant(1.0);
    }
    rec(m, 0, 0, &mut memo)
}

/// Complex roots of a float polynomial (ascending coefficients) by Aberth–Ehrlich iteration.
pub fn complex_roots(c: &[f64]) -> Vec<(f64, f64)> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|&v| v == 0.0) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return vec![];
    }
    let lc = c[deg];
    let a: Vec<f64> = c.iter().map(|v| v / lc).collect();
    let radius = 1.0 + a[..deg].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    type C = (f64, f64);
    let cmul = |x: C, y: C| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
    let cdiv = |x: C, y: C| {
        let d = y.0 * y.0 + y.1 * y.1;
        ((x.0 * y.0 + x.1 * y.1) / d, (x.1 * y.0 - x.0 * y.1) / d)
    };
    let horner = |z: C| {
        let mut p = (1.0, 0.0);
        let mut dp = (0.0, 0.0);
        for k in (0..deg).rev() {
            dp = cmul(dp, z);
            dp.0 += p.0;
            dp.1 += p.1;
            p = cmul(p, z);
            p.0 += a[k];
        }
        (p, dp)
    };
    let mut z: Vec<C> = (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
            (0.5 * radius * th.cos(), 0.5 * radius * th.sin())
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(z[i]);
            if p.0 == 0.0 && p.1 == 0.0 {
                continue;
            }
            let ratio = cdiv(p, dp);
            let mut s = (0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let d = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    let inv = cdiv((1.0, 0.0), d);
                    s.0 += inv.0;
                    s.1 += inv.1;
                }
            }
            let den = (1.0 - cmul(ratio, s).0, -cmul(ratio, s).1);
            let w = cdiv(ratio, den);
            if w.0.is_finite() && w.1.is_finite() {
                z[i].0 -= w.0;
                z[i].1 -= w.1;
                moved = moved.max(w.0.hypot(w.1));
            }
        }
        if moved < 1e-17 * radius {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yun_and_isolation() {
        // (t − 1)^2 (t + 2) (t^2 − 2)
        let p = &(&UniPoly::from_i64(&[1, -2, 1]) * &UniPoly::from_i64(&[2, 1])) * &UniPoly::from_i64(&[-2, 0, 1]);
        let dec = p.squarefree_decomposition();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec[1], (UniPoly::from_i64(&[-1, 1]), 2));
        let sq = p.squarefree_part();
        let ch = SturmChain::new(&sq);
        let roots = ch.isolate();
        assert_eq!(roots.len(), 4);
        let approx: Vec<f64> = roots.iter().map(|r| ch.refine(r, &rat(1, 1 << 40)).approx()).collect();
        let want = [-2.0, -2f64.sqrt(), 1.0, 2f64.sqrt()];
        for (a, b) in approx.iter().zip(want) {
            assert!((a - b).abs() < 1e-9, "{approx:?}");
        }
        assert_eq!(ch.try_rational(&roots[2]), Some(rint(1)));
        assert_eq!(ch.try_rational(&roots[3]), None);
    }

    #[test]
    fn parse_and_print() {
        let r = ring(&["x1", "x2", "t"]);
        let p = MultiPoly::parse(&r, "t^2/2 + x1*t - x2").unwrap();
        assert_eq!(p.to_string(), "x1*t + 1/2*t^2 - x2");
        let q = MultiPoly::parse(&r, "(x1 + x2)^2/4").unwrap();
        assert_eq!(q.to_string(), "1/4*x1^2 + 1/2*x1*x2 + 1/4*x2^2");
    }

    #[test]
    fn classical_discriminants() {
        let r = ring(&["a", "b", "c", "d", "t"]);
        let quad = MultiPoly::parse(&r, "a*t^2 + b*t + c").unwrap();
        assert_eq!(quad.discriminant(4).unwrap(), MultiPoly::parse(&r, "b^2 - 4*a*c").unwrap());
        let cubic = MultiPoly::parse(&r, "a*t^3 + b*t^2 + c*t + d").unwrap();
        let want = MultiPoly::parse(&r, "b^2*c^2 - 4*a*c^3 - 4*b^3*d - 27*a^2*d^2 + 18*a*b*c*d").unwrap();
        assert_eq!(cubic.discriminant(4).unwrap(), want);
    }

    #[test]
    fn aberth_finds_roots() {
        let r = complex_roots(&[-6.0, 11.0, -6.0, 1.0]);
        let mut re: Vec<f64> = r.iter().map(|z| z.0).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn simplest_fraction() {
        assert_eq!(simplest_between(&rat(3, 10), &rat(7, 20)), rat(1, 3));
        assert_eq!(simplest_between(&rat(-1, 2), &rat(1, 2)), rint(0));
    }
}
