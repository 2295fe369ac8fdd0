//! The unit lower triangular group `Lo¹_{n+1}`: Jacobi factors, total positivity, the
//! orders `≪` and `≤`, accessibility quasiproducts, and the bridges to `SO_{n+1}`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{combinations, exp_nil_f64, Mat};
use crate::poly::{det_float_poly, rat_to_f64, FloatPoly, Rat, RatFunc};
use crate::spinalg::CliffordEven;
use crate::symgrp::Permutation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriError {
    #[error("matrix is not unit lower triangular")]
    NotUnitLower,
    #[error("not factorizable with positive parameters along the given word")]
    NotFactorizable,
    #[error("degenerate sum s1 + s3 = 0")]
    DegenerateSum,
    #[error("matrix is not totally positive")]
    NotTotallyPositive,
    #[error("matrix has no LU decomposition")]
    NotLUDecomposable,
    #[error("endpoints are not connectable inside one open cell")]
    NotConnectableInCell,
    #[error("parameter outside the quasiproduct domain")]
    OutsideDomain,
    #[error("generator index out of range")]
    BadGenerator,
}

pub type Result<T> = std::result::Result<T, TriError>;

/// Field operations needed by the factorization machinery. Exact types ignore `scale` in
/// zero tests; floats compare against `1e−9·scale`.
pub trait Entry: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn near_zero(&self, scale: f64) -> bool;
    fn magnitude(&self) -> f64;
    /// `None` when the sign cannot be decided (symbolic entries).
    fn sign(&self) -> Option<i32>;
}

impl Entry for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self, scale: f64) -> bool {
        self.abs() <= 1e-9 * scale.max(1.0)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn sign(&self) -> Option<i32> {
        Some(if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        })
    }
}

impl Entry for Rat {
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self, _: f64) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        rat_to_f64(&self.abs())
    }
    fn sign(&self) -> Option<i32> {
        Some(if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        })
    }
}

impl Entry for RatFunc {
    fn zero_like(&self) -> Self {
        RatFunc::constant(self.ring(), Rat::zero())
    }
    fn one_like(&self) -> Self {
        RatFunc::constant(self.ring(), Rat::one())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self * &o.recip()
    }
    fn neg(&self) -> Self {
        -self
    }
    fn near_zero(&self, _: f64) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
    fn sign(&self) -> Option<i32> {
        if self.is_zero() {
            Some(0)
        } else {
            self.num.as_constant().zip(self.den.as_constant()).map(|(a, b)| {
                let q = a / b;
                if q.is_positive() {
                    1
                } else {
                    -1
                }
            })
        }
    }
}

/// Unit lower triangular `(n+1)×(n+1)` matrix.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct UniTriMatrix<T = Rat> {
    rows: Vec<Vec<T>>,
}

impl<T: Entry> UniTriMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let k = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(TriError::NotUnitLower);
            }
            for (j, e) in r.iter().enumerate() {
                let ok = if i == j {
                    *e == e.one_like()
                } else if j > i {
                    *e == e.zero_like()
                } else {
                    true
                };
                if !ok {
                    return Err(TriError::NotUnitLower);
                }
            }
        }
        Ok(UniTriMatrix { rows })
    }

    pub fn identity_like(k: usize, sample: &T) -> Self {
        let rows = (0..k).map(|i| (0..k).map(|j| if i == j { sample.one_like() } else { sample.zero_like() }).collect()).collect();
        UniTriMatrix { rows }
    }

    /// `λ_j(t) = I + t·E_{j+1,j}` (1-based `j`).
    pub fn jacobi_like(n: usize, j: usize, t: &T) -> Result<Self> {
        if j == 0 || j > n {
            return Err(TriError::BadGenerator);
        }
        let mut m = Self::identity_like(n + 1, t);
        m.rows[j][j - 1] = t.clone();
        Ok(m)
    }

    /// `∏ λ_{i_l}(t_l)` in order.
    pub fn product_along(n: usize, word: &[usize], params: &[T], sample: &T) -> Result<Self> {
        let mut m = Self::identity_like(n + 1, sample);
        for (&i, t) in word.iter().zip(params) {
            m = m.mul(&Self::jacobi_like(n, i, t)?);
        }
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k = self.k();
        let z = self.rows[0][0].zero_like();
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if j > i {
                            return z.clone();
                        }
                        let mut acc = z.clone();
                        for l in j..=i {
                            acc = acc.add(&self.rows[i][l].mul(&o.rows[l][j]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        UniTriMatrix { rows }
    }

    /// Inverse by forward substitution.
    pub fn inverse(&self) -> Self {
        let k = self.k();
        let mut inv = Self::identity_like(k, &self.rows[0][0]);
        for j in 0..k {
            for i in j + 1..k {
                let mut acc = self.rows[i][j].clone();
                for l in j + 1..i {
                    acc = acc.add(&self.rows[i][l].mul(&inv.rows[l][j]));
                }
                inv.rows[i][j] = acc.neg();
            }
        }
        inv
    }

    pub fn scale(&self) -> f64 {
        self.rows.iter().flatten().fold(1.0f64, |m, e| m.max(e.magnitude()))
    }

    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> T {
        det_generic(&rows.iter().map(|&i| cols.iter().map(|&j| self.rows[i][j].clone()).collect()).collect::<Vec<_>>(), self.scale())
    }

    /// `rank(rows r.., cols ..=c)` for all `r, c` (0-based).
    pub fn sw_rank_table(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        let scale = self.scale();
        (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| {
                        let sub: Vec<Vec<T>> = (r..k).map(|i| (0..=c).map(|j| self.rows[i][j].clone()).collect()).collect();
                        rank_generic(sub, scale)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        let scale = self.scale();
        (0..self.k()).all(|i| (0..i).all(|j| self.rows[i][j].near_zero(scale)))
    }

    /// Peels `L = λ_{i_1}(t_1)⋯λ_{i_k}(t_k)` along a reduced word. Every parameter must be
    /// positive (or of undecidable sign for symbolic entries) and the product is re-checked.
    pub fn factor_along(&self, word: &[usize]) -> Result<Vec<T>> {
        let n = self.n();
        let k = self.k();
        let mut cur = self.clone();
        let mut params = Vec::with_capacity(word.len());
        for idx in 0..word.len() {
            let i = word[idx];
            if i == 0 || i > n {
                return Err(TriError::BadGenerator);
            }
            let a = word_rank_table(n, &word[idx..]);
            let b = word_rank_table(n, &word[idx + 1..]);
            if cur.sw_rank_table() != a {
                return Err(TriError::NotFactorizable);
            }
            // modified row p = i (0-based), source row s = i − 1
            let (p, s) = (i, i - 1);
            let c = (0..k).find(|&c| b[p][c] < a[p][c]).ok_or(TriError::NotFactorizable)?;
            let rk = a[p][c];
            let lower: Vec<usize> = (p + 1..k).collect();
            let cols: Vec<usize> = (0..=c).collect();
            let mut best: Option<(f64, T, T)> = None;
            for srows in combinations(&lower, rk - 1) {
                for cs in combinations(&cols, rk) {
                    let mut with_s = vec![s];
                    with_s.extend(&srows);
                    let den = cur.minor(&with_s, &cs);
                    let mag = den.magnitude();
                    if mag > 0.0 && best.as_ref().is_none_or(|b| mag > b.0) {
                        let mut with_p = vec![p];
                        with_p.extend(&srows);
                        best = Some((mag, cur.minor(&with_p, &cs), den));
                    }
                }
            }
            let (_, num, den) = best.ok_or(TriError::NotFactorizable)?;
            let t = num.div(&den);
            match t.sign() {
                Some(1) | None => {}
                _ => return Err(TriError::NotFactorizable),
            }
            cur = Self::jacobi_like(n, i, &t.neg())?.mul(&cur);
            params.push(t);
        }
        if !cur.is_identity() {
            return Err(TriError::NotFactorizable);
        }
        let back = Self::product_along(n, word, &params, &self.rows[0][0])?;
        if !approx_equal(&back, self) {
            return Err(TriError::NotFactorizable);
        }
        Ok(params)
    }

    /// `L0 ≪ L1` iff `L0^{-1} L1 ∈ Pos_η`.
    pub fn is_ll(&self, other: &Self) -> bool {
        let m = self.inverse().mul(other);
        m.factor_along(&Permutation::eta(self.n()).reduced_word().letters).is_ok()
    }

    /// `L0 ≤ L1` iff `L0^{-1} L1` lies in the closure of `Pos_η`: the cell is detected by
    /// rank tables and the factorization is run along the lex-minimal word of that cell.
    pub fn is_leq(&self, other: &Self) -> bool {
        let m = self.inverse().mul(other);
        match m.detect_cell() {
            Some(sigma) => m.factor_along(&sigma.reduced_word().letters).is_ok(),
            None => false,
        }
    }

    /// Permutation `σ` whose positive Jacobi products share the rank table of `self`.
    pub fn detect_cell(&self) -> Option<Permutation> {
        let n = self.n();
        let table = self.sw_rank_table();
        Permutation::all(n).into_iter().find(|p| word_rank_table(n, &p.reduced_word().letters) == table)
    }
}

fn approx_equal<T: Entry>(a: &UniTriMatrix<T>, b: &UniTriMatrix<T>) -> bool {
    let scale = a.scale().max(b.scale());
    let k = a.k();
    (0..k).all(|i| (0..i).all(|j| {
        let d = a.rows[i][j].sub(&b.rows[i][j]);
        // floats: relative 1e−10
        match d.sign() {
            Some(0) => true,
            _ => d.magnitude() <= 1e-10 * scale && d.near_zero(scale),
        }
    }))
}

/// Rank table of `∏ λ_{i}(1)` along `word`.
pub fn word_rank_table(n: usize, word: &[usize]) -> Vec<Vec<usize>> {
    let one = Rat::one();
    let params = vec![one.clone(); word.len()];
    UniTriMatrix::product_along(n, word, &params, &one).expect("valid word").sw_rank_table()
}

fn det_generic<T: Entry>(m: &[Vec<T>], scale: f64) -> T {
    let k = m.len();
    if k == 0 {
        panic!("empty determinant needs a sample element");
    }
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut det = a[0][0].one_like();
    for col in 0..k {
        let p = (col..k).max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude())).unwrap();
        if a[p][col].magnitude() == 0.0 || a[p][col].near_zero(0.0) && a[p][col].sign() == Some(0) {
            return a[0][0].zero_like();
        }
        if p != col {
            a.swap(p, col);
            det = det.neg();
        }
        let piv = a[col][col].clone();
        det = det.mul(&piv);
        for r in col + 1..k {
            let f = a[r][col].div(&piv);
            if f.magnitude() != 0.0 {
                for j in col..k {
                    let v = a[col][j].mul(&f);
                    a[r][j] = a[r][j].sub(&v);
                }
            }
        }
    }
    let _ = scale;
    det
}

fn rank_generic<T: Entry>(mut a: Vec<Vec<T>>, scale: f64) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let p = (rank..rows).max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude())).unwrap();
        if a[p][col].near_zero(scale) {
            continue;
        }
        a.swap(p, rank);
        let piv = a[rank][col].clone();
        for r in rank + 1..rows {
            let f = a[r][col].div(&piv);
            for j in col..cols {
                let v = a[rank][j].mul(&f);
                a[r][j] = a[r][j].sub(&v);
            }
        }
        rank += 1;
    }
    rank
}

impl UniTriMatrix<Rat> {
    pub fn identity(n: usize) -> Self {
        Self::identity_like(n + 1, &Rat::one())
    }

    pub fn jacobi(n: usize, j: usize, t: Rat) -> Result<Self> {
        Self::jacobi_like(n, j, &t)
    }

    /// `exp(t𝔫)`, entry `(i,j)` equal to `t^{i−j}/(i−j)!`.
    pub fn exp_nilpotent(n: usize, t: &Rat) -> Self {
        let k = n + 1;
        let mut rows = vec![vec![Rat::zero(); k]; k];
        for (i, row) in rows.iter_mut().enumerate() {
            let mut term = Rat::one();
            for d in 0..=i {
                row[i - d] = term.clone();
                term = term * t / Rat::from_integer((d as i64 + 1).into());
            }
        }
        UniTriMatrix { rows }
    }

    pub fn to_f64(&self) -> UniTriMatrix<f64> {
        UniTriMatrix { rows: self.rows.iter().map(|r| r.iter().map(rat_to_f64).collect()).collect() }
    }

    /// `E_λ^{-1} L E_λ` with `E_λ = diag(1, λ, …, λ^n)`.
    pub fn projective_scale(&self, lambda: &Rat) -> Self {
        let mut m = self.clone();
        for i in 0..self.k() {
            for j in 0..i {
                m.rows[i][j] = &m.rows[i][j] / num_traits::pow(lambda.clone(), i - j);
            }
        }
        m
    }
}

impl UniTriMatrix<f64> {
    pub fn identity_f64(n: usize) -> Self {
        Self::identity_like(n + 1, &1.0)
    }

    pub fn from_mat(m: &Mat) -> Result<Self> {
        let k = m.rows();
        for i in 0..k {
            if (m[(i, i)] - 1.0).abs() > 1e-12 || (i + 1..k).any(|j| m[(i, j)].abs() > 1e-12) {
                return Err(TriError::NotUnitLower);
            }
        }
        Ok(UniTriMatrix { rows: (0..k).map(|i| (0..k).map(|j| if j < i { m[(i, j)] } else if i == j { 1.0 } else { 0.0 }).collect()).collect() })
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_rows(&self.rows)
    }

    pub fn exp_nilpotent_f64(n: usize, t: f64) -> Self {
        Self::from_mat(&exp_nil_f64(n + 1, t)).expect("unit lower")
    }

    /// `exp(s𝔥_L)` with `𝔥_L = Σ √(j(n+1−j)) 𝔩_j`.
    pub fn exp_hl(n: usize, s: f64) -> Self {
        let k = n + 1;
        let mut h = Mat::zeros(k, k);
        for j in 1..=n {
            h[(j, j - 1)] = s * ((j * (n + 1 - j)) as f64).sqrt();
        }
        let mut term = Mat::identity(k);
        let mut sum = Mat::identity(k);
        for m in 1..=n {
            term = (&term * &h).scale(1.0 / m as f64);
            sum = &sum + &term;
        }
        Self::from_mat(&sum).expect("unit lower")
    }

    pub fn projective_scale(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.k() {
            for j in 0..i {
                m.rows[i][j] /= lambda.powi((i - j) as i32);
            }
        }
        m
    }
}

/// `λ_i(s1)λ_{i+1}(s2)λ_i(s3) = λ_{i+1}(s̃1)λ_i(s̃2)λ_{i+1}(s̃3)`.
pub fn commute_identity(s1: &Rat, s2: &Rat, s3: &Rat) -> Result<(Rat, Rat, Rat)> {
    let sum = s1 + s3;
    if sum.is_zero() {
        return Err(TriError::DegenerateSum);
    }
    Ok((s2 * s3 / &sum, sum.clone(), s1 * s2 / &sum))
}

/// Lex-minimal reduced word of `η` whose first letter is `i`.
pub fn eta_word_starting_with(n: usize, i: usize) -> Vec<usize> {
    let ai = Permutation::generator(n, i).expect("generator");
    let rest = ai.compose(&Permutation::eta(n)).expect("same rank");
    let mut w = vec![i];
    w.extend(rest.reduced_word().letters);
    w
}

/// Nested domain `X_1 ⊃ … ⊃ X_k` describing `Ac_σ(L_x)` along a reduced word of `σ`.
#[derive(Clone, Debug)]
pub struct Quasiproduct<T = Rat> {
    pub lx: UniTriMatrix<T>,
    pub word: Vec<usize>,
    eta_words: Vec<Vec<usize>>,
    pub c1: T,
}

impl<T: Entry> Quasiproduct<T> {
    /// Bound `g_k(t_1..t_{k−1})` (1-based `k`; `g_1 = c_1`).
    pub fn bound(&self, prefix: &[T]) -> Result<T> {
        let k = prefix.len();
        if k >= self.word.len() {
            return Err(TriError::OutsideDomain);
        }
        let n = self.lx.n();
        let mut m = self.lx.clone();
        for (l, t) in prefix.iter().enumerate() {
            m = UniTriMatrix::jacobi_like(n, self.word[l], &t.neg())?.mul(&m);
        }
        let params = m.factor_along(&self.eta_words[k]).map_err(|_| TriError::OutsideDomain)?;
        Ok(params[0].clone())
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Membership in `X_j`, `j = params.len()`.
    pub fn contains(&self, params: &[T]) -> bool {
        for k in 0..params.len() {
            let Ok(g) = self.bound(&params[..k]) else { return false };
            if params[k].sign() != Some(1) || g.sub(&params[k]).sign() != Some(1) {
                return false;
            }
        }
        true
    }

    pub fn product(&self, params: &[T]) -> Result<UniTriMatrix<T>> {
        UniTriMatrix::product_along(self.lx.n(), &self.word[..params.len()], params, &self.c1)
    }
}

impl Quasiproduct<f64> {
    /// Point of `X_k` with `t_j = u_j·g_j`, `u_j ∈ (0,1)`.
    pub fn point(&self, fractions: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(fractions.len());
        for &u in fractions {
            let g = self.bound(&out)?;
            out.push(u * g);
        }
        Ok(out)
    }
}

/// Builds the quasiproduct for `Ac_σ(L_x)` with `σ` given by a reduced word.
pub fn accessibility_quasiproduct<T: Entry>(lx: &UniTriMatrix<T>, word: &[usize]) -> Result<Quasiproduct<T>> {
    let n = lx.n();
    let eta = Permutation::eta(n).reduced_word().letters;
    if lx.factor_along(&eta).is_err() {
        return Err(TriError::NotTotallyPositive);
    }
    let eta_words: Vec<Vec<usize>> = word.iter().map(|&i| eta_word_starting_with(n, i)).collect();
    let mut q = Quasiproduct { lx: lx.clone(), word: word.to_vec(), eta_words, c1: lx.rows[0][0].clone() };
    if !word.is_empty() {
        q.c1 = q.bound(&[])?;
    }
    Ok(q)
}

// ---------------------------------------------------------------------------
// Bridges to SO_{n+1}
// ---------------------------------------------------------------------------

/// `L` part of `Q = L·U`.
pub fn lu_of_rotation(q: &Mat) -> Result<UniTriMatrix<f64>> {
    let (l, _) = q.lu().ok_or(TriError::NotLUDecomposable)?;
    UniTriMatrix::from_mat(&l)
}

pub fn qr_positive(m: &Mat) -> Result<(Mat, Mat)> {
    m.qr_positive().ok_or(TriError::NotLUDecomposable)
}

/// `Γ^U(t) = Q(U^{-1}Γ(t))` applied to sampled frames.
pub fn projective_transform_upper(points: &[Mat], u: &Mat) -> Result<Vec<Mat>> {
    let ui = u.inverse().ok_or(TriError::NotLUDecomposable)?;
    points.iter().map(|p| qr_positive(&(&ui * p)).map(|x| x.0)).collect()
}

/// Curve piece `s ↦ Q(G·exp(s𝔫))`, `s ∈ [s0, s1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilArc {
    pub g: Mat,
    pub s0: f64,
    pub s1: f64,
}

impl NilArc {
    pub fn presentation(&self, s: f64) -> Mat {
        &self.g * &exp_nil_f64(self.g.rows(), s)
    }

    pub fn frame(&self, s: f64) -> Mat {
        self.presentation(s).q_part()
    }

    /// Entries of `G·exp(s𝔫)` as polynomials in `s`.
    pub fn poly_entries(&self) -> Vec<Vec<FloatPoly>> {
        let k = self.g.rows();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        // column j of G·exp(s𝔫) = Σ_{l ≥ j} G[:, l] s^{l−j}/(l−j)!
                        let mut c = vec![0.0; k - j];
                        for l in j..k {
                            c[l - j] = self.g[(i, l)] / crate::linalg::factorial(l - j);
                        }
                        FloatPoly(c)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Leading principal minors of a polynomial matrix.
fn leading_minor_polys(e: &[Vec<FloatPoly>]) -> Vec<FloatPoly> {
    (1..=e.len()).map(|j| det_float_poly(&e[..j].iter().map(|r| r[..j].to_vec()).collect::<Vec<_>>())).collect()
}

fn positive_on(p: &FloatPoly, a: f64, b: f64) -> bool {
    let scale = p.max_abs().max(1e-300);
    let samples = 400;
    for k in 0..=samples {
        let s = a + (b - a) * k as f64 / samples as f64;
        if p.eval(s) <= 1e-12 * scale {
            return false;
        }
    }
    // real roots in the interval that sampling might step over
    for (re, im) in crate::poly::complex_roots(&p.0) {
        if im.abs() < 1e-6 * (1.0 + re.abs()) && re >= a - 1e-9 && re <= b + 1e-9 {
            return false;
        }
    }
    true
}

/// Convex arc in `Lo¹` from `I` to `P ∈ Pos_η`: returns `(U^{-1}, S)` such that
/// `C(s) = L(U^{-1} exp(s𝔫))`, `s ∈ [0, S]`, has `C(0) = I`, `C(S) = P`.
pub fn convex_connect_lo(p: &Mat) -> Result<(Mat, f64)> {
    let k = p.rows();
    let j = Mat::from_fn(k, k, |a, b| if a + b + 1 == k { 1.0 } else { 0.0 });
    // M = U_M J R_M from the LU of J M
    let upper_factor = |m: &Mat| -> Option<Mat> {
        let (l, _) = (&j * m).lu()?;
        Some(&(&j * &l) * &j)
    };
    let up = upper_factor(p).ok_or(TriError::NotConnectableInCell)?;
    for s in [1.0, 0.25, 4.0, 1.0 / 16.0, 16.0, 1.0 / 64.0, 64.0] {
        let e = exp_nil_f64(k, s);
        let Some(ue) = upper_factor(&e) else { continue };
        let uinv = &up * &ue.inverse().expect("unipotent");
        let arc = NilArc { g: uinv.clone(), s0: 0.0, s1: s };
        let minors = leading_minor_polys(&arc.poly_entries());
        if minors.iter().all(|m| positive_on(m, 0.0, s)) {
            // endpoint check
            let end = arc.presentation(s);
            let (l, _) = end.lu().ok_or(TriError::NotConnectableInCell)?;
            if l.max_abs_diff(p) <= 1e-8 * p.max_abs().max(1.0) {
                return Ok((uinv, s));
            }
        }
    }
    Err(TriError::NotConnectableInCell)
}

/// Convex arc from `A` to `B` inside `A·Bru_{acute η}`, realized as `s ↦ Q(Π(A)·U^{-1}·exp(s𝔫))`.
pub fn convex_connect(a: &CliffordEven<f64>, b: &CliffordEven<f64>) -> Result<NilArc> {
    let (pa, pb) = (a.project(), b.project());
    let x = &pa.transpose() * &pb;
    let (l, u) = x.lu().ok_or(TriError::NotConnectableInCell)?;
    let k = x.rows();
    if (0..k).any(|i| u[(i, i)] <= 0.0) {
        return Err(TriError::NotConnectableInCell);
    }
    let lt = UniTriMatrix::from_mat(&l)?;
    if !UniTriMatrix::identity_f64(k - 1).is_ll(&lt) {
        return Err(TriError::NotConnectableInCell);
    }
    let (uinv, s) = convex_connect_lo(&l)?;
    let arc = NilArc { g: &pa * &uinv, s0: 0.0, s1: s };
    // spin component: continue the lift from A along the arc
    let end = crate::spinalg::lift_along(&a.clone(), &sample_frames(&arc, 400));
    if end.max_abs_diff(b) > 1e-6 {
        return Err(TriError::NotConnectableInCell);
    }
    Ok(arc)
}

pub fn sample_frames(arc: &NilArc, m: usize) -> Vec<Mat> {
    (0..=m).map(|i| arc.frame(arc.s0 + (arc.s1 - arc.s0) * i as f64 / m as f64)).collect()
}
