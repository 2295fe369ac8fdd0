//! Even Clifford algebra over `ℝ^{n+1}` with `e_i² = +1`, housing `Spin_{n+1}`.
//!
//! Blades are bitmasks (bit `i-1` for `e_i`). The generator `𝔞_j` corresponds to the
//! bivector `½ e_{j+1}e_j`, so `α_j(θ) = cos(θ/2) + sin(θ/2) e_{j+1}e_j`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat;
use crate::symgrp::{Permutation, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("element is not a unit (|z z~ - 1| = {0:e})")]
    NotUnit(f64),
    #[error("element is not in the lifted signed permutation group")]
    NotInLiftedSignedGroup,
    #[error("identity letter in word")]
    IdentityLetter,
    #[error("no exit angle found in (0, pi)")]
    NoRootInInterval,
    #[error("coefficient not representable as m/sqrt2^k: {0}")]
    NotSingleTerm(String),
    #[error("rank mismatch")]
    RankMismatch,
}

pub type Result<T> = std::result::Result<T, SpinError>;

/// Exact scalar `(a + b√2) / 2^e`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    a: i128,
    b: i128,
    e: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { a: 0, b: 0, e: 0 };
    pub const ONE: Dyadic = Dyadic { a: 1, b: 0, e: 0 };

    pub fn new(a: i128, b: i128, e: u32) -> Self {
        Dyadic { a, b, e }.normalized()
    }

    pub fn int(a: i128) -> Self {
        Dyadic::new(a, 0, 0)
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Dyadic::new(0, 1, 1)
    }

    /// `m · 2^{−k/2}`.
    pub fn from_halfpow(m: i128, k: u32) -> Self {
        if k % 2 == 0 {
            Dyadic::new(m, 0, k / 2)
        } else {
            Dyadic::new(0, m, k.div_ceil(2))
        }
    }

    /// `Some((m, k))` with value `m · 2^{−k/2}` when a single such term suffices.
    pub fn to_halfpow(&self) -> Option<(i128, u32)> {
        match (self.a, self.b) {
            (0, 0) => Some((0, 0)),
            (a, 0) => Some((a, 2 * self.e)),
            (0, b) if self.e > 0 => Some((b, 2 * self.e - 1)),
            (0, b) => Some((2 * b, 1)),
            _ => None,
        }
    }

    fn normalized(mut self) -> Self {
        if self.a == 0 && self.b == 0 {
            return Dyadic::ZERO;
        }
        while self.e > 0 && self.a % 2 == 0 && self.b % 2 == 0 {
            self.a /= 2;
            self.b /= 2;
            self.e -= 1;
        }
        self
    }

    fn align(x: Dyadic, y: Dyadic) -> (i128, i128, i128, i128, u32) {
        let e = x.e.max(y.e);
        let sx = 1i128 << (e - x.e);
        let sy = 1i128 << (e - y.e);
        (x.a * sx, x.b * sx, y.a * sy, y.b * sy, e)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn to_f64(&self) -> f64 {
        (self.a as f64 + self.b as f64 * std::f64::consts::SQRT_2) / 2f64.powi(self.e as i32)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_halfpow() {
            Some((m, 0)) => write!(f, "{m}"),
            Some((m, k)) => write!(f, "{m}/√2^{k}"),
            None => write!(f, "({}+{}√2)/2^{}", self.a, self.b, self.e),
        }
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, o: Dyadic) -> Dyadic {
        let (a1, b1, a2, b2, e) = Dyadic::align(self, o);
        Dyadic::new(a1 + a2, b1 + b2, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, o: Dyadic) -> Dyadic {
        self + (-o)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { a: -self.a, b: -self.b, e: self.e }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, o: Dyadic) -> Dyadic {
        Dyadic::new(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a, self.e + o.e)
    }
}

/// Scalars usable as Clifford coefficients.
pub trait Scalar: Copy + PartialEq + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Scalar for Dyadic {
    fn zero() -> Self {
        Dyadic::ZERO
    }
    fn one() -> Self {
        Dyadic::ONE
    }
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        Dyadic::to_f64(self)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Sign of `e_A e_B` relative to `e_{A xor B}` when every `e_i² = +1`.
pub fn blade_sign(a: u32, b: u32) -> i32 {
    let mut swaps = 0u32;
    let mut x = a >> 1;
    while x != 0 {
        swaps += (x & b).count_ones();
        x >>= 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Dense multivector of `Cl_{n+1}`; used internally for odd intermediate values.
#[derive(Clone, PartialEq, Debug)]
pub struct Multivector<S: Scalar> {
    pub dim: usize,
    pub c: Vec<S>,
}

impl<S: Scalar> Multivector<S> {
    pub fn zero(dim: usize) -> Self {
        Multivector { dim, c: vec![S::zero(); 1 << dim] }
    }

    pub fn basis_vector(dim: usize, i: usize) -> Self {
        let mut m = Self::zero(dim);
        m.c[1 << (i - 1)] = S::one();
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, ca) in self.c.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in o.c.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let v = *ca * *cb;
                let k = a ^ b;
                if blade_sign(a as u32, b as u32) > 0 {
                    out.c[k] = out.c[k] + v;
                } else {
                    out.c[k] = out.c[k] - v;
                }
            }
        }
        out
    }

    pub fn reverse(&self) -> Self {
        let mut out = self.clone();
        for (m, c) in out.c.iter_mut().enumerate() {
            let g = (m as u32).count_ones();
            if (g * g.saturating_sub(1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }
}

/// Element of the even subalgebra `Cliff⁰_{n+1}`.
#[derive(Clone, PartialEq, Debug)]
pub struct CliffordEven<S: Scalar = Dyadic> {
    n: usize,
    mv: Multivector<S>,
}

impl<S: Scalar> CliffordEven<S> {
    pub fn one(n: usize) -> Self {
        let mut mv = Multivector::zero(n + 1);
        mv.c[0] = S::one();
        CliffordEven { n, mv }
    }

    pub fn zero(n: usize) -> Self {
        CliffordEven { n, mv: Multivector::zero(n + 1) }
    }

    /// The blade `e_{i_1}⋯e_{i_k}` with sorted, distinct, even-count indices.
    pub fn blade(n: usize, indices: &[usize], coeff: S) -> Self {
        let mut z = Self::zero(n);
        let mut mask = 0u32;
        let mut sign = 1;
        for &i in indices {
            let bit = 1u32 << (i - 1);
            sign *= blade_sign(mask, bit);
            mask ^= bit;
        }
        assert!(mask.count_ones() % 2 == 0, "odd blade");
        z.mv.c[mask as usize] = if sign > 0 { coeff } else { -coeff };
        z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, mask: usize) -> S {
        self.mv.c[mask]
    }

    pub fn coeffs(&self) -> &[S] {
        &self.mv.c
    }

    pub fn from_coeffs(n: usize, c: Vec<S>) -> Self {
        assert_eq!(c.len(), 1 << (n + 1));
        CliffordEven { n, mv: Multivector { dim: n + 1, c } }
    }

    pub fn reverse(&self) -> Self {
        CliffordEven { n: self.n, mv: self.mv.reverse() }
    }

    /// Inverse of a unit element.
    pub fn inv_unit(&self) -> Self {
        self.reverse()
    }

    pub fn scale(&self, s: S) -> Self {
        CliffordEven { n: self.n, mv: Multivector { dim: self.mv.dim, c: self.mv.c.iter().map(|&x| x * s).collect() } }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mv.c.len()).filter(|&m| !self.mv.c[m].is_zero()).collect()
    }

    pub fn to_f64(&self) -> CliffordEven<f64> {
        CliffordEven { n: self.n, mv: Multivector { dim: self.mv.dim, c: self.mv.c.iter().map(|x| x.to_f64()).collect() } }
    }

    /// `z e_j z̃` for each `j`, as matrix columns.
    pub fn project(&self) -> Mat {
        let dim = self.n + 1;
        let zr = self.mv.reverse();
        let zf = Multivector { dim, c: self.mv.c.iter().map(|x| x.to_f64()).collect::<Vec<f64>>() };
        let zrf = Multivector { dim, c: zr.c.iter().map(|x| x.to_f64()).collect::<Vec<f64>>() };
        let mut m = Mat::zeros(dim, dim);
        for j in 1..=dim {
            let v = zf.mul(&Multivector::basis_vector(dim, j)).mul(&zrf);
            for i in 1..=dim {
                m[(i - 1, j - 1)] = v.c[1 << (i - 1)];
            }
        }
        m
    }

    /// Exact projection as an integer matrix (valid for lifted signed permutations).
    pub fn project_exact(&self) -> Vec<Vec<S>> {
        let dim = self.n + 1;
        let zr = self.mv.reverse();
        let mut out = vec![vec![S::zero(); dim]; dim];
        for j in 1..=dim {
            let v = self.mv.mul(&Multivector::basis_vector(dim, j)).mul(&zr);
            for i in 1..=dim {
                out[i - 1][j - 1] = v.c[1 << (i - 1)];
            }
        }
        out
    }

    /// Scalar part of `z z̃`.
    pub fn norm2(&self) -> S {
        self.mv.mul(&self.mv.reverse()).c[0]
    }
}

impl<S: Scalar> Mul for &CliffordEven<S> {
    type Output = CliffordEven<S>;
    fn mul(self, o: &CliffordEven<S>) -> CliffordEven<S> {
        assert_eq!(self.n, o.n, "rank mismatch");
        CliffordEven { n: self.n, mv: self.mv.mul(&o.mv) }
    }
}

impl<S: Scalar> Mul for CliffordEven<S> {
    type Output = CliffordEven<S>;
    fn mul(self, o: CliffordEven<S>) -> CliffordEven<S> {
        &self * &o
    }
}

impl<S: Scalar> Add for &CliffordEven<S> {
    type Output = CliffordEven<S>;
    fn add(self, o: &CliffordEven<S>) -> CliffordEven<S> {
        let c = self.mv.c.iter().zip(&o.mv.c).map(|(&a, &b)| a + b).collect();
        CliffordEven { n: self.n, mv: Multivector { dim: self.mv.dim, c } }
    }
}

impl<S: Scalar> Neg for &CliffordEven<S> {
    type Output = CliffordEven<S>;
    fn neg(self) -> CliffordEven<S> {
        self.scale(-S::one())
    }
}

impl CliffordEven<f64> {
    pub fn max_abs_diff(&self, o: &CliffordEven<f64>) -> f64 {
        self.mv.c.iter().zip(&o.mv.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Renormalizes so that `z z̃ = 1`.
    pub fn normalize(&self) -> Self {
        let s = self.norm2().sqrt();
        self.scale(1.0 / s)
    }

    pub fn check_unit(&self, tol: f64) -> Result<()> {
        let d = self.mv.mul(&self.mv.reverse());
        let mut err = (d.c[0] - 1.0).abs();
        for c in &d.c[1..] {
            err = err.max(c.abs());
        }
        if err > tol {
            Err(SpinError::NotUnit(err))
        } else {
            Ok(())
        }
    }

    /// Exponential of a bivector given by skew matrix `Ω` (generator `E_{ij} − E_{ji}`
    /// maps to `½ e_i e_j`), by scaling and squaring of the Taylor series.
    pub fn exp_skew(n: usize, omega: &Mat) -> Self {
        let dim = n + 1;
        let mut b = CliffordEven::<f64>::zero(n);
        for i in 0..dim {
            for j in 0..i {
                let w = omega[(i, j)];
                if w != 0.0 {
                    // ½ e_{i+1} e_{j+1} = −½ e_{j+1} e_{i+1}
                    b = &b + &CliffordEven::blade(n, &[j + 1, i + 1], -0.5 * w);
                }
            }
        }
        let norm: f64 = b.coeffs().iter().map(|x| x.abs()).sum();
        let mut k = 0;
        let mut s = 1.0;
        while norm * s > 0.25 {
            s *= 0.5;
            k += 1;
        }
        let bs = b.scale(s);
        let mut term = CliffordEven::one(n);
        let mut sum = CliffordEven::one(n);
        for m in 1..20 {
            term = (&term * &bs).scale(1.0 / m as f64);
            sum = &sum + &term;
        }
        for _ in 0..k {
            sum = &sum * &sum;
        }
        sum.normalize()
    }
}

impl fmt::Display for CliffordEven<Dyadic> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in self.support() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{:?}", self.mv.c[m])?;
            for i in 0..=self.n {
                if m & (1 << i) != 0 {
                    write!(f, "·e{}", i + 1)?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TermJson {
    pub blade: Vec<usize>,
    pub num: i128,
    pub halfpow: u32,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CliffordJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl CliffordEven<Dyadic> {
    pub fn to_json(&self) -> CliffordJson {
        let mut terms = Vec::new();
        for m in self.support() {
            let blade: Vec<usize> = (0..=self.n).filter(|i| m & (1 << i) != 0).map(|i| i + 1).collect();
            let c = self.mv.c[m];
            match c.to_halfpow() {
                Some((num, halfpow)) => terms.push(TermJson { blade, num, halfpow }),
                None => {
                    // split (a + b√2)/2^e into two single terms
                    terms.push(TermJson { blade: blade.clone(), num: c.a, halfpow: 2 * c.e });
                    let (num, halfpow) = Dyadic::new(0, c.b, c.e).to_halfpow().expect("single term");
                    terms.push(TermJson { blade, num, halfpow });
                }
            }
        }
        CliffordJson { n: self.n, terms }
    }

    pub fn from_json(j: &CliffordJson) -> Self {
        let mut z = CliffordEven::zero(j.n);
        for t in &j.terms {
            z = &z + &CliffordEven::blade(j.n, &t.blade, Dyadic::from_halfpow(t.num, t.halfpow));
        }
        z
    }

    pub fn is_unit(&self) -> bool {
        let d = self.mv.mul(&self.mv.reverse());
        d.c[0] == Dyadic::ONE && d.c[1..].iter().all(|c| c.is_zero())
    }

    /// `±` a single blade.
    pub fn is_quat(&self) -> bool {
        let s = self.support();
        s.len() == 1 && {
            let c = self.mv.c[s[0]];
            c == Dyadic::ONE || c == -Dyadic::ONE
        }
    }

    pub fn project_i64(&self) -> Vec<Vec<i64>> {
        self.project_exact()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| match x.to_halfpow() {
                        Some((m, 0)) => m as i64,
                        _ => panic!("projection entry {x:?} is not an integer"),
                    })
                    .collect()
            })
            .collect()
    }
}

/// `α_j(θ)` in floating point.
pub fn alpha(n: usize, j: usize, theta: f64) -> CliffordEven<f64> {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    // e_{j+1} e_j = −e_j e_{j+1}
    &CliffordEven::one(n).scale(c) + &CliffordEven::blade(n, &[j, j + 1], -s)
}

/// `α_j(±π/2)` exactly.
pub fn alpha_quarter(n: usize, j: usize, positive: bool) -> CliffordEven<Dyadic> {
    let r = Dyadic::inv_sqrt2();
    let s = if positive { -r } else { r };
    &CliffordEven::one(n).scale(r) + &CliffordEven::blade(n, &[j, j + 1], s)
}

pub fn acute_word(n: usize, word: &[usize]) -> CliffordEven<Dyadic> {
    word.iter().fold(CliffordEven::one(n), |acc, &j| &acc * &alpha_quarter(n, j, true))
}

pub fn grave_word(n: usize, word: &[usize]) -> CliffordEven<Dyadic> {
    word.iter().fold(CliffordEven::one(n), |acc, &j| &acc * &alpha_quarter(n, j, false))
}

pub fn acute(sigma: &Permutation) -> CliffordEven<Dyadic> {
    acute_word(sigma.n(), &sigma.reduced_word().letters)
}

pub fn grave(sigma: &Permutation) -> CliffordEven<Dyadic> {
    grave_word(sigma.n(), &sigma.reduced_word().letters)
}

pub fn hat(sigma: &Permutation) -> CliffordEven<Dyadic> {
    &acute(sigma) * &grave(sigma).reverse()
}

/// `ŵ = σ̂_1 ⋯ σ̂_ℓ`.
pub fn hat_word(w: &Word) -> CliffordEven<Dyadic> {
    w.letters.iter().fold(CliffordEven::one(w.n), |acc, s| &acc * &hat(s))
}

/// Table of `B(w, j)` for `j ∈ {0, ½, 1, …, ℓ+½, ℓ+1}`.
#[derive(Clone, Debug)]
pub struct SpinWordTable {
    pub word: Word,
    /// `half[k] = B(w, k/2)`.
    pub half: Vec<CliffordEven<Dyadic>>,
}

impl SpinWordTable {
    /// `B(w, j)` for integer `j`.
    pub fn at(&self, j: usize) -> &CliffordEven<Dyadic> {
        &self.half[2 * j]
    }

    /// `B(w, j+½)`.
    pub fn at_half(&self, j: usize) -> &CliffordEven<Dyadic> {
        &self.half[2 * j + 1]
    }

    pub fn endpoint(&self) -> &CliffordEven<Dyadic> {
        self.half.last().expect("nonempty")
    }
}

pub fn word_table(w: &Word) -> Result<SpinWordTable> {
    let n = w.n;
    if w.letters.iter().any(|l| l.is_identity()) {
        return Err(SpinError::IdentityLetter);
    }
    let ae = acute(&Permutation::eta(n));
    let mut half = vec![CliffordEven::one(n), ae.clone()];
    for s in &w.letters {
        let prev = half.last().expect("nonempty").clone();
        half.push(&prev * &acute(s));
        half.push(&prev * &hat(s));
    }
    let last = half.last().expect("nonempty").clone();
    half.push(&last * &ae);
    Ok(SpinWordTable { word: w.clone(), half })
}

/// `acute η · ŵ · acute η`.
pub fn q_of_word(w: &Word) -> Result<CliffordEven<Dyadic>> {
    if w.letters.iter().any(|l| l.is_identity()) {
        return Err(SpinError::IdentityLetter);
    }
    let ae = acute(&Permutation::eta(w.n));
    Ok(&(&ae * &hat_word(w)) * &ae)
}

/// Permutation `σ` of a signed permutation matrix: row `i` is supported at column `i^σ`.
pub fn signed_perm_of(m: &[Vec<i64>]) -> Option<(Permutation, Vec<i64>)> {
    let k = m.len();
    let mut images = Vec::with_capacity(k);
    let mut signs = Vec::with_capacity(k);
    for row in m {
        let nz: Vec<usize> = (0..k).filter(|&j| row[j] != 0).collect();
        if nz.len() != 1 || row[nz[0]].abs() != 1 {
            return None;
        }
        images.push(nz[0] + 1);
        signs.push(row[nz[0]]);
    }
    Permutation::from_images(images).ok().map(|p| (p, signs))
}

/// Writes `z = q·acute σ` with `q ∈ Quat`.
pub fn decompose_lifted(z: &CliffordEven<Dyadic>) -> Result<(CliffordEven<Dyadic>, Permutation)> {
    if !z.is_unit() {
        return Err(SpinError::NotInLiftedSignedGroup);
    }
    let m = z.project_exact();
    let mi: Option<Vec<Vec<i64>>> = m
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| match x.to_halfpow() {
                    Some((v, 0)) => Some(v as i64),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let (sigma, _) = mi.as_deref().and_then(signed_perm_of).ok_or(SpinError::NotInLiftedSignedGroup)?;
    let q = z * &acute(&sigma).reverse();
    if !q.is_quat() {
        return Err(SpinError::NotInLiftedSignedGroup);
    }
    Ok((q, sigma))
}

/// `adv(z) = q_a · acute η` for `z = q_a · acute σ_0`.
pub fn adv(z: &CliffordEven<Dyadic>) -> Result<CliffordEven<Dyadic>> {
    let (qa, _) = decompose_lifted(z)?;
    Ok(&qa * &acute(&Permutation::eta(z.n())))
}

/// `chop(z) = q_c · grave η` for `z = q_c · grave σ_0`.
pub fn chop(z: &CliffordEven<Dyadic>) -> Result<CliffordEven<Dyadic>> {
    let (_, sigma) = decompose_lifted(z)?;
    let qc = z * &grave(&sigma).reverse();
    if !qc.is_quat() {
        return Err(SpinError::NotInLiftedSignedGroup);
    }
    Ok(&qc * &grave(&Permutation::eta(z.n())))
}

/// Signed permutation part of an invertible matrix under the double coset
/// decomposition by upper triangular matrices with positive diagonal.
///
/// Returns `σ` (row `i` supported at column `i^σ`) and the signs of the pivots.
pub fn bruhat_cell(m: &Mat, tol: f64) -> Option<(Permutation, Vec<i64>)> {
    let k = m.rows();
    let mut a = m.clone();
    let scale = a.max_abs().max(1e-300);
    let mut used = vec![false; k];
    let mut images = vec![0usize; k];
    let mut signs = vec![0i64; k];
    for i in (0..k).rev() {
        let j = (0..k).find(|&j| !used[j] && a[(i, j)].abs() > tol * scale)?;
        used[j] = true;
        images[i] = j + 1;
        signs[i] = if a[(i, j)] > 0.0 { 1 } else { -1 };
        let p = a[(i, j)];
        // clear column j above row i with row operations from below
        for r in 0..i {
            let f = a[(r, j)] / p;
            if f != 0.0 {
                for c in 0..k {
                    let v = a[(i, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        // clear row i to the right of j with column operations from the left
        for c in j + 1..k {
            let f = a[(i, c)] / p;
            if f != 0.0 {
                for r in 0..k {
                    let v = a[(r, j)];
                    a[(r, c)] -= f * v;
                }
            }
        }
    }
    Permutation::from_images(images).ok().map(|p| (p, signs))
}

/// Exit angle `θ ∈ (0, π)` with `y·α_i(−θ) ∈ Bru_{ρ a_i}`.
pub fn theta_exit(y: &CliffordEven<f64>, i: usize, rho: &Permutation) -> Result<f64> {
    let n = y.n();
    let target = rho.compose(&Permutation::generator(n, i).map_err(|_| SpinError::RankMismatch)?).map_err(|_| SpinError::RankMismatch)?;
    if target.inversions() + 1 != rho.inversions() {
        return Err(SpinError::NoRootInInterval);
    }
    let k = n + 1;
    // southwest blocks whose rank drops from ρ to ρ a_i
    let count = |p: &Permutation, r: usize, c: usize| (r..=k).filter(|&rr| p.apply(rr) <= c).count();
    let mut blocks = Vec::new();
    for r in 1..=k {
        for c in 1..=k {
            let (hi, lo) = (count(rho, r, c), count(&target, r, c));
            if lo + 1 == hi {
                blocks.push((r, c, hi));
            }
        }
    }
    if blocks.is_empty() {
        return Err(SpinError::NoRootInInterval);
    }
    let mat_at = |theta: f64| (y * &alpha(n, i, -theta)).project();
    let minors_at = |theta: f64| -> Vec<f64> {
        let m = mat_at(theta);
        let mut out = Vec::new();
        for &(r, c, h) in &blocks {
            let rows: Vec<usize> = (r - 1..k).collect();
            let cols: Vec<usize> = (0..c).collect();
            for rs in crate::linalg::combinations(&rows, h) {
                for cs in crate::linalg::combinations(&cols, h) {
                    out.push(m.submatrix(&rs, &cs).det());
                }
            }
        }
        out
    };
    let steps = 3142;
    let h = std::f64::consts::PI / steps as f64;
    let mut prev = minors_at(h * 0.5);
    let mut candidates = Vec::new();
    for s in 1..steps {
        let t = h * (s as f64 + 0.5);
        let cur = minors_at(t);
        for (idx, (&a, &b)) in prev.iter().zip(&cur).enumerate() {
            if a.abs() > 1e-14 && b.abs() > 1e-14 && (a > 0.0) != (b > 0.0) {
                candidates.push((t - h, t, idx));
            }
        }
        prev = cur;
    }
    for (mut lo, mut hi, idx) in candidates {
        let sgn = minors_at(lo)[idx] > 0.0;
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if (minors_at(mid)[idx] > 0.0) == sgn {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if minors_at(t).iter().all(|v| v.abs() < 1e-8) {
            return Ok(t);
        }
    }
    Err(SpinError::NoRootInInterval)
}

/// Continues the spin lift `start` along sampled frames `Q_0, Q_1, …` (with `Π(start) ≈ Q_0`);
/// consecutive frames must be close.
pub fn lift_along(start: &CliffordEven<f64>, frames: &[Mat]) -> CliffordEven<f64> {
    let n = start.n();
    let mut z = start.clone();
    for w in frames.windows(2) {
        let step = &w[0].transpose() * &w[1];
        let omega = crate::linalg::log_near_identity(&step);
        z = (&z * &CliffordEven::exp_skew(n, &omega)).normalize();
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_full_turn_is_minus_one() {
        let z = alpha(2, 1, 2.0 * std::f64::consts::PI);
        assert!(z.max_abs_diff(&CliffordEven::one(2).scale(-1.0)) < 1e-15);
        let q = &alpha_quarter(2, 1, true) * &alpha_quarter(2, 1, true);
        let q4 = &q * &q;
        assert_eq!(q4, CliffordEven::one(2).scale(-Dyadic::ONE));
    }

    #[test]
    fn projection_of_quarter_turn() {
        let m = alpha_quarter(2, 1, true).project_i64();
        assert_eq!(m, vec![vec![0, -1, 0], vec![1, 0, 0], vec![0, 0, 1]]);
        let h = hat(&Permutation::generator(2, 1).unwrap());
        assert_eq!(h.project_i64(), vec![vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, 1]]);
        assert!(h.is_quat());
    }

    #[test]
    fn hat_eta_is_acute_eta_squared() {
        for n in 2..=4 {
            let e = Permutation::eta(n);
            assert_eq!(hat(&e), &acute(&e) * &acute(&e));
        }
    }

    #[test]
    fn lift_follows_rotation() {
        let frames: Vec<Mat> = (0..=100).map(|k| alpha(3, 2, 5.0 * k as f64 / 100.0).project()).collect();
        let z = lift_along(&CliffordEven::one(3), &frames);
        assert!(z.max_abs_diff(&alpha(3, 2, 5.0)) < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let z = acute(&Permutation::from_word(3, &[1, 3, 2]).unwrap());
        let j = z.to_json();
        assert_eq!(CliffordEven::from_json(&j), z);
    }

    #[test]
    fn acute_row_pattern_matches_permutation() {
        let s = Permutation::from_word(3, &[1, 3, 2]).unwrap();
        let (p, _) = signed_perm_of(&acute(&s).project_i64()).unwrap();
        assert_eq!(p, s);
    }
}
