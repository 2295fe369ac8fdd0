//! Locally convex curves: frame integration, singular sets, itineraries and synthesis.
//!
//! A [`FrameCurve`] is a chain of pieces. Each piece carries a polynomial presentation
//! `A(u)`, `u ∈ [0,1]`, whose orthogonal factor `Q(A(u))` is the frame; southwest minors of
//! `A` and of `Q(A)` differ by positive factors, so zeros and their orders agree.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::linalg::{exp_nil_f64, Mat};
use crate::poly::{complex_roots, det_float_poly, FloatPoly, Rat};
use crate::polysect::{SectError, SectionFamily};
use crate::spinalg::{acute, alpha, bruhat_cell, q_of_word, theta_exit, word_table, CliffordEven, SpinError, SpinWordTable};
use crate::symgrp::{r_bullet, Permutation, Word};
use crate::triang::{convex_connect_lo, NilArc, TriError, UniTriMatrix};

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("curvature κ_{j} is not positive at t = {t}")]
    NonPositiveCurvature { j: usize, t: f64 },
    #[error("jet at sample {0} has non-positive determinant")]
    DegenerateJet(usize),
    #[error("unresolved zero cluster of m_{minor} near t = {time}")]
    UnresolvedCluster { minor: usize, time: f64 },
    #[error("multiplicities {mult:?} at t = {time} do not come from a letter")]
    UnrecognizedMultPattern { time: f64, mult: Vec<i64> },
    #[error("no accessible path realizes the itinerary")]
    PathNotAccessible,
    #[error("the curve has no [acb] event")]
    NotAnAcbEvent,
    #[error("identity letter in word")]
    IdentityLetter,
    #[error("invalid curvature spec: {0}")]
    BadSpec(String),
    #[error("times must be strictly increasing in (0,1), one per letter")]
    BadTimes,
    #[error("transform must be upper triangular with positive diagonal")]
    BadTransform,
    #[error("presentation is singular at t = {0}")]
    SingularPresentation(f64),
    #[error("pieces do not join at t = {0}")]
    Discontinuous(f64),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error(transparent)]
    Sect(#[from] SectError),
}

pub type Result<T> = std::result::Result<T, CurveError>;

/// Taylor order of the dense-output windows of [`integrate`].
pub const TAYLOR_ORDER: usize = 16;
const LOCAL_TOL: f64 = 1e-12;
const MAX_STEP: f64 = 1.0 / 16.0;
/// Relative size below which Taylor coefficients of a minor count as zero.
const ZERO_TOL: f64 = 1e-10;
/// Absolute floor for the same test; minors of orthonormal frames are `O(1)`.
const ZERO_ABS: f64 = 1e-12;
/// Zeros of different minors closer than this are one event.
pub const CLUSTER_TOL: f64 = 1e-7;

// ---------------------------------------------------------------------------
// Curvature specs
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureMode {
    Kappa,
    Xi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecPiece {
    pub start: f64,
    pub end: f64,
    /// `coeffs[j]`: ascending coefficients in `t − start`.
    pub coeffs: Vec<Vec<f64>>,
}

/// Piecewise-polynomial curvatures `κ_1..κ_n`, or `ξ_j = κ_j − 1/κ_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpec {
    pub n: usize,
    pub mode: CurvatureMode,
    pub pieces: Vec<SpecPiece>,
}

/// `κ = (ξ + √(ξ²+4))/2`.
pub fn xi_to_kappa(xi: f64) -> f64 {
    let r = (xi * xi + 4.0).sqrt();
    if xi >= 0.0 {
        0.5 * (xi + r)
    } else {
        2.0 / (r - xi)
    }
}

pub fn kappa_to_xi(kappa: f64) -> f64 {
    kappa - 1.0 / kappa
}

fn ser_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            c[i + j] += x * y;
        }
    }
    c
}

fn ser_inv(a: &[f64], len: usize) -> Vec<f64> {
    let mut b = vec![0.0; len];
    b[0] = 1.0 / a[0];
    for m in 1..len {
        let s: f64 = (1..=m).map(|i| a.get(i).copied().unwrap_or(0.0) * b[m - i]).sum();
        b[m] = -s / a[0];
    }
    b
}

fn ser_sqrt(a: &[f64], len: usize) -> Vec<f64> {
    let mut g = vec![0.0; len];
    g[0] = a[0].sqrt();
    for m in 1..len {
        let s: f64 = (1..m).map(|i| g[i] * g[m - i]).sum();
        g[m] = (a.get(m).copied().unwrap_or(0.0) - s) / (2.0 * g[0]);
    }
    g
}

impl CurvatureSpec {
    pub fn constant(n: usize, kappa: &[f64], t0: f64, t1: f64) -> Self {
        CurvatureSpec {
            n,
            mode: CurvatureMode::Kappa,
            pieces: vec![SpecPiece { start: t0, end: t1, coeffs: kappa.iter().map(|&k| vec![k]).collect() }],
        }
    }

    /// `κ_j = speed·√(j(n+1−j))`, so that `Γ(t) = Γ(t_0)·exp(speed·(t−t_0)·𝔥)`.
    pub fn h_speed(n: usize, speed: f64, t0: f64, t1: f64) -> Self {
        let k: Vec<f64> = (1..=n).map(|j| speed * ((j * (n + 1 - j)) as f64).sqrt()).collect();
        Self::constant(n, &k, t0, t1)
    }

    pub fn polynomial(n: usize, mode: CurvatureMode, t0: f64, t1: f64, coeffs: Vec<Vec<f64>>) -> Self {
        CurvatureSpec { n, mode, pieces: vec![SpecPiece { start: t0, end: t1, coeffs }] }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: CurvatureSpec = serde_json::from_str(s).map_err(|e| CurveError::BadSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(CurveError::BadSpec("no pieces".into()));
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if !(p.start <= p.end) || !p.start.is_finite() || !p.end.is_finite() {
                return Err(CurveError::BadSpec(format!("piece {i} has bad bounds")));
            }
            if p.coeffs.len() != self.n || p.coeffs.iter().any(|c| c.is_empty()) {
                return Err(CurveError::BadSpec(format!("piece {i} needs {} nonempty coefficient lists", self.n)));
            }
            if i > 0 && (self.pieces[i - 1].end - p.start).abs() > 1e-12 {
                return Err(CurveError::BadSpec(format!("piece {i} does not start where piece {} ends", i - 1)));
            }
        }
        Ok(())
    }

    pub fn t0(&self) -> f64 {
        self.pieces[0].start
    }

    pub fn t1(&self) -> f64 {
        self.pieces.last().expect("validated").end
    }

    fn piece_index(&self, t: f64) -> usize {
        self.pieces.iter().position(|p| t <= p.end).unwrap_or(self.pieces.len() - 1)
    }

    /// Values of the stored functions (`κ` or `ξ`) at `t`.
    pub fn raw(&self, t: f64) -> Vec<f64> {
        let p = &self.pieces[self.piece_index(t)];
        p.coeffs.iter().map(|c| FloatPoly(c.clone()).eval(t - p.start)).collect()
    }

    pub fn kappa(&self, t: f64) -> Vec<f64> {
        let r = self.raw(t);
        match self.mode {
            CurvatureMode::Kappa => r,
            CurvatureMode::Xi => r.into_iter().map(xi_to_kappa).collect(),
        }
    }

    /// Taylor coefficients of `κ_j(t + s)` in `s`, using the polynomial of piece `piece`.
    fn kappa_series(&self, piece: usize, t: f64, len: usize) -> Vec<Vec<f64>> {
        let p = &self.pieces[piece];
        p.coeffs
            .iter()
            .map(|c| {
                let mut s = FloatPoly(c.clone()).rescale(t - p.start, 1.0).0;
                s.resize(len, 0.0);
                s.truncate(len);
                match self.mode {
                    CurvatureMode::Kappa => s,
                    CurvatureMode::Xi => {
                        let mut sq = ser_mul(&s, &s, len);
                        sq[0] += 4.0;
                        let root = ser_sqrt(&sq, len);
                        s.iter().zip(&root).map(|(a, b)| 0.5 * (a + b)).collect()
                    }
                }
            })
            .collect()
    }
}

/// `Σ κ_j 𝔞_j` with `𝔞_j = E_{j+1,j} − E_{j,j+1}`.
pub fn kappa_matrix(kappa: &[f64]) -> Mat {
    let k = kappa.len() + 1;
    let mut m = Mat::zeros(k, k);
    for (j, &v) in kappa.iter().enumerate() {
        m[(j + 1, j)] = v;
        m[(j, j + 1)] = -v;
    }
    m
}

// ---------------------------------------------------------------------------
// Frame curves
// ---------------------------------------------------------------------------

/// One piece of a frame curve on `[t0, t1]`; `t = t0 + u·(t1 − t0)`.
#[derive(Clone, Debug)]
pub struct CurvePiece {
    pub t0: f64,
    pub t1: f64,
    /// Presentation entries as polynomials in `u ∈ [0,1]`.
    pub entries: Vec<Vec<FloatPoly>>,
    /// Minors are truncated to this degree (Taylor windows).
    pub truncate: Option<usize>,
    /// Spin lift at `t0`.
    pub spin0: CliffordEven<f64>,
}

impl CurvePiece {
    pub fn presentation(&self, u: f64) -> Mat {
        let k = self.entries.len();
        Mat::from_fn(k, k, |i, j| self.entries[i][j].eval(u))
    }

    fn local(&self, t: f64) -> f64 {
        if self.t1 > self.t0 {
            (t - self.t0) / (self.t1 - self.t0)
        } else {
            0.0
        }
    }

    /// Southwest minors of the presentation as polynomials in `u`.
    pub fn minor_polys(&self) -> Vec<FloatPoly> {
        let k = self.entries.len();
        (1..k)
            .map(|j| {
                let sub: Vec<Vec<FloatPoly>> = self.entries[k - j..].iter().map(|r| r[..j].to_vec()).collect();
                let mut p = det_float_poly(&sub);
                if let Some(d) = self.truncate {
                    p.0.truncate(d + 1);
                }
                p
            })
            .collect()
    }
}

/// Unprocessed piece: `(t0, t1, entries in u, truncation degree)`.
pub type RawPiece = (f64, f64, Vec<Vec<FloatPoly>>, Option<usize>);

#[derive(Clone, Debug)]
pub struct FrameCurve {
    pub n: usize,
    pub t0: f64,
    pub t1: f64,
    pub pieces: Vec<CurvePiece>,
    pub start_spin: CliffordEven<f64>,
    pub end_spin: CliffordEven<f64>,
}

/// Continues `start` along `frame(s)`, `s` from `a` to `b`, refining until consecutive frames are close.
pub fn lift_path(start: &CliffordEven<f64>, frame: impl Fn(f64) -> Mat, a: f64, b: f64) -> CliffordEven<f64> {
    let mut m = 8usize;
    loop {
        let frames: Vec<Mat> = (0..=m).map(|i| frame(a + (b - a) * i as f64 / m as f64)).collect();
        let gap = frames.windows(2).map(|w| w[0].max_abs_diff(&w[1])).fold(0.0, f64::max);
        if gap <= 0.15 || m >= 1 << 16 {
            return crate::spinalg::lift_along(start, &frames);
        }
        m *= 2;
    }
}

/// Some spin lift of a rotation, via adjacent Givens rotations.
pub fn spin_of_rotation(r: &Mat) -> CliffordEven<f64> {
    let k = r.rows();
    let n = k - 1;
    let mut a = r.clone();
    let mut z = CliffordEven::one(n);
    // Π(z)·a = r throughout
    for col in 0..k {
        for row in (col + 1..k).rev() {
            let (x, y) = (a[(row - 1, col)], a[(row, col)]);
            if y == 0.0 {
                continue;
            }
            let theta = y.atan2(x);
            // exp(θ𝔞_row) acts on rows row-1, row
            let g = alpha(n, row, theta);
            let gi = alpha(n, row, -theta).project();
            a = &gi * &a;
            z = &z * &g;
        }
    }
    for i in 0..n {
        if a[(i, i)] < 0.0 {
            let g = alpha(n, i + 1, PI);
            a = &alpha(n, i + 1, -PI).project() * &a;
            z = &z * &g;
        }
    }
    z.normalize()
}

fn nil_entries_u(g: &Mat, s0: f64, s1: f64) -> Vec<Vec<FloatPoly>> {
    NilArc { g: g.clone(), s0, s1 }
        .poly_entries()
        .into_iter()
        .map(|r| r.into_iter().map(|p| p.rescale(s0, s1 - s0)).collect())
        .collect()
}

impl FrameCurve {
    /// Chains raw pieces, lifting the spin continuously from `start` (a lift of the first frame).
    pub fn from_pieces(n: usize, raw: Vec<RawPiece>, start: &CliffordEven<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(CurveError::BadSpec("no pieces".into()));
        }
        let mut pieces = Vec::with_capacity(raw.len());
        let mut z = start.clone();
        let mut prev_end: Option<Mat> = None;
        for (t0, t1, entries, truncate) in raw {
            let p = CurvePiece { t0, t1, entries, truncate, spin0: z.clone() };
            let f0 = p.presentation(0.0).qr_positive().ok_or(CurveError::SingularPresentation(t0))?.0;
            if let Some(pe) = &prev_end {
                if pe.max_abs_diff(&f0) > 1e-6 {
                    return Err(CurveError::Discontinuous(t0));
                }
            }
            let f1 = p.presentation(1.0).qr_positive().ok_or(CurveError::SingularPresentation(t1))?.0;
            z = lift_path(&z, |u| p.presentation(u).q_part(), 0.0, 1.0);
            prev_end = Some(f1);
            pieces.push(p);
        }
        Ok(FrameCurve { n, t0: pieces[0].t0, t1: pieces.last().expect("nonempty").t1, pieces, start_spin: start.clone(), end_spin: z })
    }

    /// Constant curve on a degenerate interval.
    pub fn point(z: &CliffordEven<f64>, t: f64) -> Self {
        FrameCurve { n: z.n(), t0: t, t1: t, pieces: vec![], start_spin: z.clone(), end_spin: z.clone() }
    }

    /// `s ↦ Q(G·exp(s𝔫))` for `s ∈ [s0, s1]`, on the time interval `[t0, t1]`.
    pub fn nil_arc(g: &Mat, s0: f64, s1: f64, t0: f64, t1: f64, start: &CliffordEven<f64>) -> Result<Self> {
        Self::from_pieces(g.rows() - 1, vec![(t0, t1, nil_entries_u(g, s0, s1), None)], start)
    }

    /// `t ↦ Q(Π(z)·exp(t𝔫))`, `t ∈ [t0, t1]`, lifted so that the spin at `t = 0` is `z`.
    pub fn nil_model(z: &CliffordEven<f64>, t0: f64, t1: f64) -> Result<Self> {
        let g = z.project();
        let k = g.rows();
        let start = lift_path(z, |s| (&g * &exp_nil_f64(k, s)).q_part(), 0.0, t0);
        Self::nil_arc(&g, t0, t1, t0, t1, &start)
    }

    pub fn is_point(&self) -> bool {
        self.pieces.is_empty()
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let idx = self.pieces.iter().position(|p| t <= p.t1).unwrap_or(self.pieces.len() - 1);
        (idx, self.pieces[idx].local(t))
    }

    pub fn presentation(&self, t: f64) -> Mat {
        if self.is_point() {
            return self.start_spin.project();
        }
        let (i, u) = self.locate(t);
        self.pieces[i].presentation(u)
    }

    pub fn frame(&self, t: f64) -> Mat {
        if self.is_point() {
            return self.start_spin.project();
        }
        self.presentation(t).q_part()
    }

    pub fn spin(&self, t: f64) -> CliffordEven<f64> {
        if self.is_point() {
            return self.start_spin.clone();
        }
        let (i, u) = self.locate(t);
        let p = &self.pieces[i];
        lift_path(&p.spin0, |v| p.presentation(v).q_part(), 0.0, u)
    }

    /// Piece boundaries.
    pub fn grid(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.pieces.iter().map(|p| p.t0).collect();
        g.push(self.t1);
        g
    }

    pub fn minors_at(&self, t: f64) -> Vec<f64> {
        southwest_minors(&self.frame(t))
    }

    /// `κ_j(t)`: subdiagonal of `Q^T Q'`.
    pub fn curvatures(&self, t: f64) -> Vec<f64> {
        let (i, u) = self.locate(t);
        let p = &self.pieces[i];
        let k = self.n + 1;
        let a = p.presentation(u);
        let span = p.t1 - p.t0;
        let da = Mat::from_fn(k, k, |r, c| p.entries[r][c].derivative().eval(u) / span);
        let (q, r) = a.qr_positive().expect("invertible presentation");
        let x = &(&q.transpose() * &da) * &r.inverse().expect("triangular");
        (0..self.n).map(|j| x[(j + 1, j)]).collect()
    }

    /// `z·Γ`.
    pub fn left_translate(&self, z: &CliffordEven<f64>) -> FrameCurve {
        let pz = z.project();
        let pieces = self
            .pieces
            .iter()
            .map(|p| CurvePiece {
                t0: p.t0,
                t1: p.t1,
                entries: mat_poly_mul(&pz, &p.entries),
                truncate: p.truncate,
                spin0: (z * &p.spin0).normalize(),
            })
            .collect();
        FrameCurve {
            n: self.n,
            t0: self.t0,
            t1: self.t1,
            pieces,
            start_spin: (z * &self.start_spin).normalize(),
            end_spin: (z * &self.end_spin).normalize(),
        }
    }

    /// `Γ^U(t) = Q(U^{-1}·Γ(t))` for `U` upper triangular with positive diagonal.
    pub fn projective_transform(&self, u: &Mat) -> Result<FrameCurve> {
        let k = self.n + 1;
        if u.rows() != k || (0..k).any(|i| u[(i, i)] <= 0.0 || (0..i).any(|j| u[(i, j)] != 0.0)) {
            return Err(CurveError::BadTransform);
        }
        let ui = u.inverse().ok_or(CurveError::BadTransform)?;
        let a0 = self.presentation(self.t0);
        // homotopy I → U through upper triangular matrices with positive diagonal
        let path = |s: f64| {
            let us = Mat::from_fn(k, k, |i, j| (1.0 - s) * if i == j { 1.0 } else { 0.0 } + s * u[(i, j)]);
            (&us.inverse().expect("positive diagonal") * &a0).q_part()
        };
        let start = lift_path(&self.start_spin, path, 0.0, 1.0);
        if self.is_point() {
            return Ok(FrameCurve::point(&start, self.t0));
        }
        let raw = self.pieces.iter().map(|p| (p.t0, p.t1, mat_poly_mul(&ui, &p.entries), p.truncate)).collect();
        FrameCurve::from_pieces(self.n, raw, &start)
    }

    /// Affine change of time onto `[a, b]`.
    pub fn reparametrized(&self, a: f64, b: f64) -> FrameCurve {
        let len = self.t1 - self.t0;
        let map = |t: f64| if len > 0.0 { a + (t - self.t0) / len * (b - a) } else { a };
        let mut c = self.clone();
        for p in &mut c.pieces {
            p.t0 = map(p.t0);
            p.t1 = map(p.t1);
        }
        c.t0 = a;
        c.t1 = if len > 0.0 { b } else { a };
        c
    }

    /// Concatenation; `other` must start at the frame and time where `self` ends.
    pub fn concat(&self, other: &FrameCurve) -> Result<FrameCurve> {
        if (self.t1 - other.t0).abs() > 1e-12 || self.end_spin.max_abs_diff(&other.start_spin) > 1e-6 {
            return Err(CurveError::Discontinuous(self.t1));
        }
        let mut c = self.clone();
        c.pieces.extend(other.pieces.iter().cloned());
        c.t1 = other.t1;
        c.end_spin = other.end_spin.clone();
        Ok(c)
    }

    /// Events of the itinerary, sorted by time.
    pub fn events(&self) -> Result<Vec<SingularEvent>> {
        find_events(self)
    }

    pub fn singular_set(&self) -> Result<CompactSubset> {
        Ok(CompactSubset::new(self.events()?.iter().map(|e| e.time).collect()))
    }

    pub fn itinerary(&self) -> Result<Word> {
        let letters = self.events()?.into_iter().map(|e| e.letter).collect();
        Word::new(self.n, letters).map_err(|_| CurveError::IdentityLetter)
    }

    /// JSON `{n, grid, matrices, events}` with `samples + 1` equally spaced sample times.
    pub fn to_json(&self, samples: usize) -> Result<serde_json::Value> {
        let ts = sample_times(self.t0, self.t1, samples);
        let mats: Vec<Vec<Vec<f64>>> = ts.iter().map(|&t| self.frame(t).to_rows()).collect();
        let events: Vec<serde_json::Value> = self.events()?.iter().map(SingularEvent::to_json).collect();
        Ok(json!({ "n": self.n, "grid": ts, "matrices": mats, "events": events }))
    }

    /// CSV trace `t,m1,..,mn`.
    pub fn minors_csv(&self, samples: usize) -> String {
        let mut out = String::from("t");
        for j in 1..=self.n {
            out.push_str(&format!(",m{j}"));
        }
        out.push('\n');
        for t in sample_times(self.t0, self.t1, samples) {
            out.push_str(&format!("{t}"));
            for m in self.minors_at(t) {
                out.push_str(&format!(",{m:.12e}"));
            }
            out.push('\n');
        }
        out
    }

    /// True iff `Γ(t_0)^{-1}Γ(t_+)` lies in the right component of the open cell for sampled
    /// `t_0 < t_+`, and the curve translated to start at `1` has empty singular set.
    pub fn is_convex_arc(&self) -> bool {
        if self.is_point() {
            return true;
        }
        let m = 12;
        let ts = sample_times(self.t0, self.t1, m);
        let spins: Vec<CliffordEven<f64>> = ts.iter().map(|&t| self.spin(t)).collect();
        for a in 0..m {
            let inv = spins[a].reverse();
            for b in a + 1..=m {
                if !in_open_cell(&(&inv * &spins[b])) {
                    return false;
                }
            }
        }
        let tr = self.left_translate(&self.start_spin.reverse());
        matches!(tr.singular_set(), Ok(s) if s.is_empty()) && in_open_cell(&tr.end_spin)
    }
}

pub fn sample_times(t0: f64, t1: f64, m: usize) -> Vec<f64> {
    if m == 0 {
        return vec![t0];
    }
    (0..=m).map(|i| t0 + (t1 - t0) * i as f64 / m as f64).collect()
}

fn mat_poly_mul(m: &Mat, e: &[Vec<FloatPoly>]) -> Vec<Vec<FloatPoly>> {
    let k = e.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    (0..k).fold(FloatPoly(vec![]), |acc, l| if m[(i, l)] == 0.0 { acc } else { acc.add(&e[l][j].scale(m[(i, l)])) })
                })
                .collect()
        })
        .collect()
}

/// Southwest minors `m_1..m_n` (rows `n+2−j..n+1`, columns `1..j`).
pub fn southwest_minors(q: &Mat) -> Vec<f64> {
    q.southwest_minors()
}

/// Whether `z` lies in the component of the open cell `Bru_{acute η}` containing `acute η`.
pub fn in_open_cell(z: &CliffordEven<f64>) -> bool {
    let n = z.n();
    let ae = acute(&Permutation::eta(n)).to_f64();
    let pa = ae.project();
    let x = &pa.transpose() * &z.project();
    let Some((l, u)) = x.lu() else { return false };
    if (0..=n).any(|i| u[(i, i)] <= 0.0) {
        return false;
    }
    // L_s = I + s(L − I) keeps Π(acute η)·Q(L_s) in the same component
    let id = Mat::identity(n + 1);
    let path = |s: f64| (&pa * &(&id + &(&l - &id).scale(s))).q_part();
    let end = lift_path(&ae, path, 0.0, 1.0);
    end.max_abs_diff(z) < 1e-6
}

// ---------------------------------------------------------------------------
// Singular events
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct SingularEvent {
    pub time: f64,
    pub letter: Permutation,
    pub mult: Vec<i64>,
    /// Interval containing all zeros merged into the event.
    pub bracket: (f64, f64),
    /// `|m_j^{(k)}(τ)|/k!` with `k = mult_j` (value of `m_j` when `k = 0`).
    pub leading: Vec<f64>,
}

impl SingularEvent {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "time": self.time,
            "letter": self.letter.images(),
            "word": self.letter.letters(),
            "mult": self.mult,
            "bracket": [self.bracket.0, self.bracket.1],
            "leading": self.leading,
        })
    }
}

/// Coefficients of `p(c + x)`.
fn taylor_at(p: &[f64], c: f64) -> Vec<f64> {
    let mut a = p.to_vec();
    let n = a.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            a[k] += c * a[k + 1];
        }
    }
    a
}

fn newton(p: &FloatPoly, c0: f64) -> f64 {
    let dp = p.derivative();
    let mut c = c0;
    for _ in 0..80 {
        let d = dp.eval(c);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = p.eval(c) / d;
        if !step.is_finite() {
            break;
        }
        c -= step;
        if (c - c0).abs() > 0.25 {
            return c0;
        }
        if step.abs() <= 1e-16 * (1.0 + c.abs()) {
            break;
        }
    }
    c
}

/// Zero of `p` near `c0` with multiplicity `k`: largest `k ≤ kmax` such that the first `k`
/// Taylor coefficients at the `(k−1)`-th derivative's zero are negligible.
fn resolve_zero(p: &FloatPoly, c0: f64, kmax: usize) -> Option<(f64, usize, f64)> {
    let deg = p.0.len().saturating_sub(1);
    let mut deriv = vec![p.clone()];
    for _ in 1..kmax.min(deg) {
        let d = deriv.last().expect("nonempty").derivative();
        deriv.push(d);
    }
    for k in (1..=kmax.min(deg)).rev() {
        let c = newton(&deriv[k - 1], c0);
        let b = taylor_at(&p.0, c);
        let big = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tiny = (ZERO_TOL * big).max(ZERO_ABS);
        if b[..k].iter().all(|x| x.abs() <= tiny) && b[k].abs() > tiny {
            return Some((c, k, b[k].abs()));
        }
    }
    None
}

/// Zeros `(u, k, |coef|)` of a minor on a piece, with `u` near `[0,1]`.
fn piece_zeros(p: &FloatPoly, kmax: usize, t0: f64, t1: f64, minor: usize) -> Result<Vec<(f64, usize, f64)>> {
    let mut c = p.0.clone();
    let big = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if big == 0.0 {
        return Err(CurveError::UnresolvedCluster { minor, time: t0 });
    }
    while c.len() > 1 && c.last().is_some_and(|x| x.abs() <= 1e-13 * big) {
        c.pop();
    }
    let p = FloatPoly(c);
    let roots = complex_roots(&p.0);
    let mut cand: Vec<(f64, f64)> = roots.into_iter().filter(|&(re, im)| (-0.05..=1.05).contains(&re) && im.abs() <= 0.05).collect();
    cand.sort_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    let mut used = vec![false; cand.len()];
    let mut out = Vec::new();
    for i in 0..cand.len() {
        if used[i] {
            continue;
        }
        match resolve_zero(&p, cand[i].0, kmax) {
            Some((c, k, lead)) => {
                // consume the k candidates nearest to c
                let mut order: Vec<usize> = (0..cand.len()).filter(|&j| !used[j]).collect();
                order.sort_by(|&a, &b| dist(cand[a], c).total_cmp(&dist(cand[b], c)));
                for &j in order.iter().take(k) {
                    used[j] = true;
                }
                used[i] = true;
                if (-1e-12..=1.0 + 1e-12).contains(&c) && !out.iter().any(|&(o, _, _): &(f64, usize, f64)| (o - c).abs() < 1e-12) {
                    out.push((c.clamp(0.0, 1.0), k, lead));
                }
            }
            None => {
                used[i] = true;
                let (re, im) = cand[i];
                if im.abs() <= 1e-6 && (-1e-9..=1.0 + 1e-9).contains(&re) {
                    return Err(CurveError::UnresolvedCluster { minor, time: t0 + re * (t1 - t0) });
                }
            }
        }
    }
    Ok(out)
}

fn dist(z: (f64, f64), c: f64) -> f64 {
    (z.0 - c).hypot(z.1)
}

fn find_events(curve: &FrameCurve) -> Result<Vec<SingularEvent>> {
    if curve.is_point() {
        return Ok(vec![]);
    }
    let n = curve.n;
    let kmax = r_bullet(n);
    // (time, minor index, multiplicity, leading coefficient in t units)
    let mut zeros: Vec<(f64, usize, usize, f64)> = Vec::new();
    for p in &curve.pieces {
        let span = p.t1 - p.t0;
        if span <= 0.0 {
            continue;
        }
        for (j, m) in p.minor_polys().iter().enumerate() {
            let near_end = |t: f64| (t - curve.t0).abs() <= 1e-9 || (t - curve.t1).abs() <= 1e-9;
            let zs = match piece_zeros(m, kmax, p.t0, p.t1, j + 1) {
                Ok(z) => z,
                Err(CurveError::UnresolvedCluster { time, .. }) if near_end(time) => continue,
                Err(e) => return Err(e),
            };
            for (u, k, lead) in zs {
                let t = p.t0 + u * span;
                if zeros.iter().any(|&(s, i, _, _)| i == j && (s - t).abs() <= 1e-9) {
                    continue;
                }
                zeros.push((t, j, k, lead / span.powi(k as i32)));
            }
        }
    }
    zeros.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut events = Vec::new();
    let mut i = 0;
    while i < zeros.len() {
        let mut j = i + 1;
        while j < zeros.len() && zeros[j].0 - zeros[i].0 <= CLUSTER_TOL {
            j += 1;
        }
        let group = &zeros[i..j];
        i = j;
        let lo = group[0].0;
        let hi = group[group.len() - 1].0;
        let time = group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64;
        if time - curve.t0 <= CLUSTER_TOL || curve.t1 - time <= CLUSTER_TOL {
            continue;
        }
        let mut mult = vec![0i64; n];
        let mut leading = vec![0.0; n];
        for &(_, m, k, lead) in group {
            mult[m] += k as i64;
            leading[m] = lead;
        }
        let minors = curve.minors_at(time);
        for m in 0..n {
            if mult[m] == 0 {
                leading[m] = minors[m].abs();
            }
        }
        let letter = match Permutation::from_mult(&mult, n) {
            Ok(p) if !p.is_identity() && p.mult_vector() == mult => p,
            _ => return Err(CurveError::UnrecognizedMultPattern { time, mult }),
        };
        events.push(SingularEvent { time, letter, mult, bracket: (lo, hi), leading });
    }
    Ok(events)
}

// ---------------------------------------------------------------------------
// Compact subsets
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct CompactSubset {
    pub points: Vec<f64>,
}

impl CompactSubset {
    pub fn new(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        CompactSubset { points }
    }

    pub fn empty() -> Self {
        CompactSubset { points: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Hausdorff distance, with `d(∅, X) = 1` for `X ≠ ∅` and `d(∅, ∅) = 0`.
pub fn hausdorff(x: &CompactSubset, y: &CompactSubset) -> f64 {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => {
            let one_sided = |a: &[f64], b: &[f64]| a.iter().map(|p| b.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
            one_sided(&x.points, &y.points).max(one_sided(&y.points, &x.points))
        }
    }
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

fn rk4(y: &Mat, t: f64, h: f64, spec: &CurvatureSpec) -> Mat {
    let k = |t: f64| kappa_matrix(&spec.kappa(t));
    let k1 = y * &k(t);
    let k2 = &(y + &k1.scale(h / 2.0)) * &k(t + h / 2.0);
    let k3 = &(y + &k2.scale(h / 2.0)) * &k(t + h / 2.0);
    let k4 = &(y + &k3.scale(h)) * &k(t + h);
    let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
    y + &incr.scale(h / 6.0)
}

/// Taylor window `M·Φ(s)` with `Φ' = Φ·K(t + s)`, `Φ(0) = I`, as polynomials in `s`.
fn taylor_window(m: &Mat, spec: &CurvatureSpec, piece: usize, t: f64) -> Vec<Vec<Vec<f64>>> {
    let len = TAYLOR_ORDER + 1;
    let k = m.rows();
    let ks = spec.kappa_series(piece, t, len);
    let kr: Vec<Mat> = (0..len).map(|r| kappa_matrix(&ks.iter().map(|s| s[r]).collect::<Vec<_>>())).collect();
    let mut phi = vec![Mat::identity(k)];
    for r in 0..TAYLOR_ORDER {
        let mut acc = Mat::zeros(k, k);
        for i in 0..=r {
            acc = &acc + &(&phi[i] * &kr[r - i]);
        }
        phi.push(acc.scale(1.0 / (r + 1) as f64));
    }
    let e: Vec<Mat> = phi.iter().map(|p| m * p).collect();
    (0..k).map(|i| (0..k).map(|j| e.iter().map(|x| x[(i, j)]).collect()).collect()).collect()
}

fn check_kappa(spec: &CurvatureSpec, t: f64) -> Result<f64> {
    let kap = spec.kappa(t);
    if let Some(j) = kap.iter().position(|&v| !(v > 0.0)) {
        return Err(CurveError::NonPositiveCurvature { j: j + 1, t });
    }
    Ok(kap.iter().fold(0.0, |m: f64, v| m.max(*v)))
}

/// Runs the ODE on one spec piece from `a` to `b` (either direction) starting at frame `m`,
/// spin `z`. Returns raw pieces (with spins at their lower ends) in the order produced.
fn solve_piece(spec: &CurvatureSpec, piece: usize, a: f64, b: f64, m: &mut Mat, z: &mut CliffordEven<f64>) -> Result<Vec<CurvePiece>> {
    let dir = if b >= a { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    let mut t = a;
    let mut h = dir * MAX_STEP.min((b - a).abs());
    while dir * (b - t) > 1e-14 {
        let kmax = check_kappa(spec, t)?.max(check_kappa(spec, t + h / 2.0)?).max(check_kappa(spec, t + h)?);
        let hcap = MAX_STEP.min(0.5 / (2.0 * kmax).max(1e-300));
        if h.abs() > hcap {
            h = dir * hcap;
            continue;
        }
        if dir * (t + h - b) > 0.0 || (b - t - h).abs() < 1e-12 {
            h = b - t;
        }
        let y1 = rk4(m, t, h, spec);
        let yh = rk4(m, t, h / 2.0, spec);
        let y2 = rk4(&yh, t + h / 2.0, h / 2.0, spec);
        let err = (&y2 - &y1).max_abs() / 15.0;
        if err > LOCAL_TOL && h.abs() > 1e-9 {
            h *= (0.9 * (LOCAL_TOL / err).powf(0.2)).max(0.1);
            continue;
        }
        let next = (&y2 + &(&y2 - &y1).scale(1.0 / 15.0)).q_part();
        let window = taylor_window(m, spec, piece, t);
        let ent_s: Vec<Vec<FloatPoly>> = window.into_iter().map(|r| r.into_iter().map(FloatPoly).collect()).collect();
        let frame_at = |v: f64| Mat::from_fn(m.rows(), m.rows(), |i, j| ent_s[i][j].eval(v * h)).q_part();
        let z_next = lift_path(z, frame_at, 0.0, 1.0);
        let (lo, hi, entries, spin0) = if dir > 0.0 {
            let e = ent_s.iter().map(|r| r.iter().map(|p| p.rescale(0.0, h)).collect()).collect();
            (t, t + h, e, z.clone())
        } else {
            // u = 0 at t + h, u = 1 at t: s = h·(1 − u)
            let e = ent_s.iter().map(|r| r.iter().map(|p| p.rescale(h, -h)).collect()).collect();
            (t + h, t, e, z_next.clone())
        };
        out.push(CurvePiece { t0: lo, t1: hi, entries, truncate: Some(TAYLOR_ORDER), spin0 });
        t += h;
        *m = next;
        *z = z_next;
        let grow = if err > 0.0 { (0.9 * (LOCAL_TOL / err).powf(0.2)).min(2.0) } else { 2.0 };
        h *= grow.max(1.0);
        if h.abs() > MAX_STEP {
            h = dir * MAX_STEP;
        }
    }
    Ok(out)
}

/// Solves `Γ^{-1}Γ' = Σ κ_j 𝔞_j` on the spec interval with `Γ(t_0) = start`.
pub fn integrate(spec: &CurvatureSpec, start: &CliffordEven<f64>) -> Result<FrameCurve> {
    integrate_through(spec, spec.t0(), start)
}

/// Solves backwards from `Γ(t_1) = end`.
pub fn integrate_backward(spec: &CurvatureSpec, end: &CliffordEven<f64>) -> Result<FrameCurve> {
    integrate_through(spec, spec.t1(), end)
}

/// Solves with `Γ(anchor) = z`, in both directions from the anchor.
pub fn integrate_through(spec: &CurvatureSpec, anchor: f64, z: &CliffordEven<f64>) -> Result<FrameCurve> {
    spec.validate()?;
    if spec.n != z.n() {
        return Err(CurveError::BadSpec("rank mismatch".into()));
    }
    let (t0, t1) = (spec.t0(), spec.t1());
    if !(t0..=t1).contains(&anchor) {
        return Err(CurveError::BadSpec("anchor outside the interval".into()));
    }
    if t1 - t0 <= 0.0 {
        check_kappa(spec, t0)?;
        return Ok(FrameCurve::point(z, t0));
    }
    let z = z.normalize();
    let mut pieces: Vec<CurvePiece> = Vec::new();
    // backward part, pieces collected in decreasing time
    let (mut m, mut zz) = (z.project(), z.clone());
    let mut back = Vec::new();
    for (idx, p) in spec.pieces.iter().enumerate().rev() {
        if p.start >= anchor {
            continue;
        }
        let hi = p.end.min(anchor);
        back.extend(solve_piece(spec, idx, hi, p.start, &mut m, &mut zz)?);
    }
    let start_spin = zz.clone();
    back.reverse();
    pieces.extend(back);
    let (mut m, mut zz) = (z.project(), z.clone());
    for (idx, p) in spec.pieces.iter().enumerate() {
        if p.end <= anchor {
            continue;
        }
        let lo = p.start.max(anchor);
        pieces.extend(solve_piece(spec, idx, lo, p.end, &mut m, &mut zz)?);
    }
    Ok(FrameCurve { n: spec.n, t0, t1, pieces, start_spin, end_spin: zz })
}

// ---------------------------------------------------------------------------
// Frenet frames
// ---------------------------------------------------------------------------

/// Frenet frame curve from jets: `jets[i]` has columns `γ, γ', …, γ^{(n)}` at `times[i]`.
/// Between samples the jet is interpolated linearly; `start` defaults to some lift of the first frame.
pub fn frenet_frame(times: &[f64], jets: &[Mat], start: Option<&CliffordEven<f64>>) -> Result<FrameCurve> {
    if times.len() != jets.len() || times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CurveError::BadTimes);
    }
    for (i, j) in jets.iter().enumerate() {
        if !(j.det() > 0.0) {
            return Err(CurveError::DegenerateJet(i));
        }
    }
    let k = jets[0].rows();
    let raw: Vec<RawPiece> = (0..jets.len() - 1)
        .map(|i| {
            let e = (0..k).map(|r| (0..k).map(|c| FloatPoly(vec![jets[i][(r, c)], jets[i + 1][(r, c)] - jets[i][(r, c)]])).collect()).collect();
            (times[i], times[i + 1], e, None)
        })
        .collect();
    let z0 = match start {
        Some(z) => z.clone(),
        None => spin_of_rotation(&jets[0].q_part()),
    };
    FrameCurve::from_pieces(k - 1, raw, &z0)
}

/// Gram–Schmidt frames of jets, without interpolation.
pub fn frenet_frames(jets: &[Mat]) -> Result<Vec<Mat>> {
    jets.iter().enumerate().map(|(i, j)| if j.det() > 0.0 { Ok(j.q_part()) } else { Err(CurveError::DegenerateJet(i)) }).collect()
}

// ---------------------------------------------------------------------------
// Section curves and model curves
// ---------------------------------------------------------------------------

/// `t ↦ M(x, t)` on the family window, as a single polynomial piece.
pub fn section_curve(fam: &SectionFamily, x: &[Rat]) -> Result<FrameCurve> {
    let m = fam.matrix_at(x)?;
    let lo = crate::poly::rat_to_f64(&fam.window.0);
    let hi = crate::poly::rat_to_f64(&fam.window.1);
    let entries: Vec<Vec<FloatPoly>> = m.iter().map(|r| r.iter().map(|p| FloatPoly(p.to_f64_coeffs()).rescale(lo, hi - lo)).collect()).collect();
    let k = entries.len();
    let a0 = Mat::from_fn(k, k, |i, j| entries[i][j].eval(0.0));
    let z0 = spin_of_rotation(&a0.q_part());
    FrameCurve::from_pieces(fam.n, vec![(lo, hi, entries, None)], &z0)
}

/// `t ↦ Q(Π(acute η·acute σ)·exp(t𝔫))` on `[−r, r]`; its only singular time is `0`, with letter `σ`.
pub fn model_letter_curve(sigma: &Permutation, r: f64) -> Result<FrameCurve> {
    let n = sigma.n();
    let z = (&acute(&Permutation::eta(n)) * &acute(sigma)).to_f64();
    FrameCurve::nil_model(&z, -r, r)
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// `M = U_z·S·R` with `U_z` unit upper, `S` a signed permutation and `R` upper; returns `U_z`.
pub fn normal_form(m: &Mat) -> Option<Mat> {
    let k = m.rows();
    let mut a = m.clone();
    let mut e = Mat::identity(k);
    let sc = a.max_abs();
    let mut used = vec![false; k];
    for i in (0..k).rev() {
        let j = (0..k).find(|&j| !used[j] && a[(i, j)].abs() > 1e-12 * sc)?;
        used[j] = true;
        let p = a[(i, j)];
        for r in 0..i {
            let f = a[(r, j)] / p;
            if f != 0.0 {
                for c in 0..k {
                    let (va, ve) = (a[(i, c)], e[(i, c)]);
                    a[(r, c)] -= f * va;
                    e[(r, c)] -= f * ve;
                }
            }
        }
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
    e.inverse()
}

/// Backward accessible path: `z_j = Q_j·Z'_j` built from exit angles scaled by `frac()`.
fn sample_path(table: &SpinWordTable, mut frac: impl FnMut() -> f64) -> Result<Vec<CliffordEven<f64>>> {
    let w = &table.word;
    let (n, l) = (w.n, w.len());
    let eta = Permutation::eta(n);
    let ae = acute(&eta).to_f64();
    let he = &ae * &ae;
    let mut z = vec![CliffordEven::one(n); l + 2];
    z[0] = table.at(0).to_f64();
    z[l + 1] = table.at(l + 1).to_f64();
    for j in (1..=l).rev() {
        let q = &table.at_half(j).to_f64() * &ae.reverse();
        let y0 = &(&z[j + 1].reverse() * &q) * &he;
        let (mut rho, _) = bruhat_cell(&y0.project(), 1e-9).ok_or(CurveError::PathNotAccessible)?;
        let word = eta.compose(&w.letters[j - 1]).map_err(|_| CurveError::PathNotAccessible)?.reduced_word();
        let mut zp = CliffordEven::one(n);
        for &im in &word.letters {
            let g = Permutation::generator(n, im).map_err(|_| CurveError::PathNotAccessible)?;
            let nr = rho.compose(&g).map_err(|_| CurveError::PathNotAccessible)?;
            let th_max = if nr.inversions() == rho.inversions() + 1 {
                rho = nr;
                PI
            } else {
                PI - theta_exit(&(&y0 * &zp), im, &rho)?
            };
            zp = &zp * &alpha(n, im, frac() * th_max);
        }
        z[j] = &q * &zp;
        let want = bruhat_cell(&table.at(j).to_f64().project(), 1e-9).map(|c| c.0);
        if bruhat_cell(&z[j].project(), 1e-9).map(|c| c.0) != want {
            return Err(CurveError::PathNotAccessible);
        }
    }
    Ok(z)
}

/// Builds the concatenation of model arcs around `M_j` and convex connectors inside the cells
/// `B(w, j−½)·Bru_η`; `None` when some connector does not exist at half-width `half`.
fn assemble(n: usize, ms: &[Mat], b: &[Mat], half: f64, times: &[f64]) -> Option<Vec<RawPiece>> {
    let k = n + 1;
    let l = ms.len() - 2;
    let mut knots = vec![0.0];
    knots.extend_from_slice(times);
    knots.push(1.0);
    let delta = 0.25 * knots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut raw: Vec<RawPiece> = vec![(0.0, delta, nil_entries_u(&ms[0], 0.0, half), None)];
    for i in 1..=l + 1 {
        let bb = &b[2 * i - 1];
        let xa = &(&bb.transpose() * &ms[i - 1]) * &exp_nil_f64(k, half);
        let xb = &(&bb.transpose() * &ms[i]) * &exp_nil_f64(k, -half);
        let (la, ua) = xa.lu()?;
        let (lb, ub) = xb.lu()?;
        if (0..k).any(|d| ua[(d, d)] <= 0.0 || ub[(d, d)] <= 0.0) {
            return None;
        }
        let lta = UniTriMatrix::from_mat(&la).ok()?;
        let ltb = UniTriMatrix::from_mat(&lb).ok()?;
        if !lta.is_ll(&ltb) {
            return None;
        }
        let p = &la.inverse()? * &lb;
        let (uinv, s) = convex_connect_lo(&p).ok()?;
        let g = &(bb * &la) * &uinv;
        let c0 = if i == 1 { delta } else { times[i - 2] + delta };
        let c1 = if i == l + 1 { 1.0 - delta } else { times[i - 1] - delta };
        raw.push((c0, c1, nil_entries_u(&g, 0.0, s), None));
        if i <= l {
            raw.push((c1, times[i - 1] + delta, nil_entries_u(&ms[i], -half, half), None));
        } else {
            raw.push((c1, 1.0, nil_entries_u(&ms[i], -half, 0.0), None));
        }
    }
    Some(raw)
}

/// Index pairs `(I, J)` of the minors of a lower triangular matrix that are not forced to vanish.
fn lower_minor_index(k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let all: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    for s in 1..=k {
        let combos = crate::linalg::combinations(&all, s);
        for i in &combos {
            for j in &combos {
                if i.iter().zip(j).all(|(a, b)| a >= b) {
                    out.push((i.clone(), j.clone()));
                }
            }
        }
    }
    out
}

const CONNECTOR_MAX: f64 = 1e4;

/// Per-cell check score: sum of the negative parts of `asinh(10³·minor) − 1` over the minors
/// of `L_A^{-1}L_B` in every cell, minus `ln(max|entry|/CONNECTOR_MAX)` where positive; zero iff
/// every cell passes with a small margin and moderate entries.
fn path_score(ms: &[Mat], b: &[Mat], half: f64, idx: &[(Vec<usize>, Vec<usize>)]) -> f64 {
    let k = ms[0].rows();
    let (ep, em) = (exp_nil_f64(k, half), exp_nil_f64(k, -half));
    let mut score = 0.0;
    for i in 1..ms.len() {
        let bt = b[2 * i - 1].transpose();
        let (Some((la, ua)), Some((lb, ub))) = ((&(&bt * &ms[i - 1]) * &ep).lu(), (&(&bt * &ms[i]) * &em).lu()) else {
            return -1e9;
        };
        let diag_bad: f64 = (0..k).map(|d| ua[(d, d)].min(0.0) + ub[(d, d)].min(0.0)).sum();
        if diag_bad < 0.0 {
            score += -1e3 + diag_bad;
            continue;
        }
        let p = &la.inverse().expect("unit lower") * &lb;
        for (r, c) in idx {
            score += ((p.submatrix(r, c).det() * 1e3).asinh() - 1.0).min(0.0);
        }
        // large entries defeat the floating point factorization in `assemble`
        score -= (p.max_abs() / CONNECTOR_MAX).ln().max(0.0);
    }
    score
}

/// Random search over upper triangular factors `U_j` (positive diagonal) in the arc centres
/// `U_j·M_j` until every cell passes.
fn climb(ms: &[Mat], b: &[Mat], half: f64, rng: &mut ChaCha8Rng, iters: usize) -> Option<Vec<Mat>> {
    let k = ms[0].rows();
    let l = ms.len() - 2;
    if l == 0 {
        return None;
    }
    let idx = lower_minor_index(k);
    let mut cur_ms = ms.to_vec();
    let mut cur = path_score(&cur_ms, b, half, &idx);
    for _ in 0..iters {
        if cur >= 0.0 {
            return Some(cur_ms);
        }
        let j = rng.gen_range(1..=l);
        let scale = 2.0 * rng.gen::<f64>().powi(2);
        let mut step = Mat::identity(k);
        for r in 0..k {
            step[(r, r)] = (scale * rng.gen_range(-0.5..0.5)).exp();
            for c in r + 1..k {
                step[(r, c)] = scale * rng.gen_range(-1.7..1.7);
            }
        }
        let mut cand = cur_ms.clone();
        cand[j] = &step * &cur_ms[j];
        let v = path_score(&cand, b, half, &idx);
        if v >= cur {
            cur_ms = cand;
            cur = v;
        }
    }
    (cur >= 0.0).then_some(cur_ms)
}

/// Locally convex curve on `[0,1]` from `1` with itinerary `w`, events at `times`
/// (default `i/(ℓ+1)`).
///
/// Model arcs `Q(M_j·exp(τ𝔫))` with `M_j = U_j·B(w,j)` are joined by convex connectors.
/// Centres are tried in order: the vertex path `U_j = I`, random search from it, then paths
/// sampled backwards from exit angles and random search from those.
pub fn curve_with_itinerary(w: &Word, times: Option<&[f64]>, seed: u64) -> Result<FrameCurve> {
    let (n, l) = (w.n, w.len());
    if w.letters.iter().any(|s| s.is_identity()) {
        return Err(CurveError::IdentityLetter);
    }
    let times: Vec<f64> = match times {
        Some(t) => {
            if t.len() != l || t.iter().any(|&x| !(x > 0.0 && x < 1.0)) || t.windows(2).any(|p| p[1] <= p[0]) {
                return Err(CurveError::BadTimes);
            }
            t.to_vec()
        }
        None => (1..=l).map(|i| i as f64 / (l + 1) as f64).collect(),
    };
    let table = word_table(w)?;
    let b: Vec<Mat> = table.half.iter().map(|z| z.to_f64().project()).collect();
    let target = q_of_word(w)?.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let halves = [0.5, 0.25, 0.1, 0.05, 0.01];
    let try_centres = |ms: &[Mat], halves: &[f64]| -> Option<FrameCurve> {
        for &half in halves {
            let Some(raw) = assemble(n, ms, &b, half, &times) else { continue };
            let Ok(curve) = FrameCurve::from_pieces(n, raw, &CliffordEven::one(n)) else { continue };
            if curve.end_spin.max_abs_diff(&target) > 1e-6 {
                continue;
            }
            let Ok(ev) = curve.events() else { continue };
            if ev.len() == l && ev.iter().zip(&w.letters).zip(&times).all(|((e, s), t)| e.letter == *s && (e.time - t).abs() <= 1e-6) {
                return Some(curve);
            }
        }
        None
    };
    let vertex: Vec<Mat> = (0..=l + 1).map(|j| b[2 * j].clone()).collect();
    if let Some(c) = try_centres(&vertex, &halves) {
        return Ok(c);
    }
    for round in 0..6 {
        for half in [0.5, 0.25, 0.1] {
            if let Some(ms) = climb(&vertex, &b, half, &mut rng, 3000) {
                if let Some(c) = try_centres(&ms, &[half]) {
                    return Ok(c);
                }
            }
        }
        let path = if round == 0 { sample_path(&table, || 0.5) } else { sample_path(&table, || rng.gen_range(0.2..0.8)) };
        let Ok(z) = path else { continue };
        let Some(ms) = (0..=l + 1).map(|j| normal_form(&z[j].project()).map(|u| &u * &b[2 * j])).collect::<Option<Vec<Mat>>>() else {
            continue;
        };
        if let Some(c) = try_centres(&ms, &halves) {
            return Ok(c);
        }
        for half in [0.25, 0.1] {
            if let Some(ms) = climb(&ms, &b, half, &mut rng, 3000) {
                if let Some(c) = try_centres(&ms, &[half]) {
                    return Ok(c);
                }
            }
        }
    }
    Err(CurveError::PathNotAccessible)
}

// ---------------------------------------------------------------------------
// u-invariant
// ---------------------------------------------------------------------------

const USER_LEN: usize = 6;

/// `u = (b_3β̃'_1 − b_1β̃'_3)/(2b_1b_3)` at the first `[acb]` event, after reparametrizing
/// the triangular presentation so that `β_2 ≡ 1`.
pub fn u_invariant(curve: &FrameCurve) -> Result<f64> {
    if curve.n != 3 {
        return Err(CurveError::NotAnAcbEvent);
    }
    let acb = Permutation::from_word(3, &[1, 3, 2]).expect("valid word");
    let ev = curve.events()?.into_iter().find(|e| e.letter == acb).ok_or(CurveError::NotAnAcbEvent)?;
    let betas = triangular_betas(curve, ev.time, &acb)?;
    // β_j(t) series; reparametrize by dτ = β_2 dt
    let (b1, b2, b3) = (&betas[0], &betas[1], &betas[2]);
    let r1 = b1[0] / b2[0];
    let r3 = b3[0] / b2[0];
    let d1 = (b1[1] * b2[0] - b1[0] * b2[1]) / b2[0].powi(3);
    let d3 = (b3[1] * b2[0] - b3[0] * b2[1]) / b2[0].powi(3);
    Ok((r3 * d1 - r1 * d3) / (2.0 * r1 * r3))
}

/// Series (in `t − t*`) of `β_j` with `L^{-1}L' = Σ β_j 𝔩_j`, `L` the lower factor of
/// `B^T·A(t)` for `B = Π(acute η·acute σ)` with signs making the pivots positive.
pub fn triangular_betas(curve: &FrameCurve, tstar: f64, sigma: &Permutation) -> Result<Vec<Vec<f64>>> {
    let n = curve.n;
    let k = n + 1;
    let len = USER_LEN;
    let (idx, u) = curve.locate(tstar);
    let p = &curve.pieces[idx];
    let span = p.t1 - p.t0;
    // entries as series in h = t − t*
    let a: Vec<Vec<Vec<f64>>> = p
        .entries
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| {
                    let mut c = e.rescale(u, 1.0).0;
                    c.resize(len, 0.0);
                    c.truncate(len);
                    c.iter().enumerate().map(|(r, v)| v / span.powi(r as i32)).collect()
                })
                .collect()
        })
        .collect();
    let bm = (&acute(&Permutation::eta(n)) * &acute(sigma)).to_f64().project();
    let a0 = Mat::from_fn(k, k, |i, j| a[i][j][0]);
    let (_, u0) = (&bm.transpose() * &a0).lu().ok_or(CurveError::SingularPresentation(tstar))?;
    let d: Vec<f64> = (0..k).map(|i| u0[(i, i)].signum()).collect();
    // X = D·B^T·A
    let mut x: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut s = vec![0.0; len];
                    for l in 0..k {
                        if bm[(l, i)] != 0.0 {
                            for r in 0..len {
                                s[r] += d[i] * bm[(l, i)] * a[l][j][r];
                            }
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    // Doolittle on series
    let mut lmat: Vec<Vec<Vec<f64>>> = (0..k).map(|i| (0..k).map(|j| { let mut s = vec![0.0; len]; if i == j { s[0] = 1.0; } s }).collect()).collect();
    for c in 0..k {
        if x[c][c][0].abs() < 1e-12 {
            return Err(CurveError::SingularPresentation(tstar));
        }
        let pinv = ser_inv(&x[c][c], len);
        for r in c + 1..k {
            let f = ser_mul(&x[r][c], &pinv, len);
            for j in 0..k {
                let prod = ser_mul(&f, &x[c][j], len);
                for (v, w) in x[r][j].iter_mut().zip(&prod) {
                    *v -= w;
                }
            }
            lmat[r][c] = f;
        }
    }
    // L^{-1} by forward substitution, L' termwise
    let mut linv: Vec<Vec<Vec<f64>>> = (0..k).map(|i| (0..k).map(|j| { let mut s = vec![0.0; len]; if i == j { s[0] = 1.0; } s }).collect()).collect();
    for i in 0..k {
        for j in 0..i {
            let mut s = vec![0.0; len];
            for m in j..i {
                let prod = ser_mul(&lmat[i][m], &linv[m][j], len);
                for (v, w) in s.iter_mut().zip(&prod) {
                    *v -= w;
                }
            }
            linv[i][j] = s;
        }
    }
    let deriv = |s: &[f64]| -> Vec<f64> { (0..len).map(|r| if r + 1 < len { (r + 1) as f64 * s[r + 1] } else { 0.0 }).collect() };
    Ok((0..n)
        .map(|j| {
            // (L^{-1}L')_{j+1, j}
            let mut s = vec![0.0; len];
            for m in j..k {
                let prod = ser_mul(&linv[j + 1][m], &deriv(&lmat[m][j]), len);
                for (v, w) in s.iter_mut().zip(&prod) {
                    *v += w;
                }
            }
            s
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_shift() {
        assert_eq!(taylor_at(&[0.0, 0.0, 1.0], 1.0), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn xi_kappa_round_trip() {
        for xi in [-50.0, -1.0, 0.0, 0.3, 20.0] {
            let k = xi_to_kappa(xi);
            assert!(k > 0.0 && (kappa_to_xi(k) - xi).abs() < 1e-9);
        }
    }

    #[test]
    fn resolve_double_and_simple() {
        // (u − 0.3)²(u − 0.7)
        let p = FloatPoly(vec![-0.063, 0.51, -1.3, 1.0]);
        let z = piece_zeros(&p, 4, 0.0, 1.0, 1).unwrap();
        let mut ks: Vec<(i64, usize)> = z.iter().map(|&(c, k, _)| ((c * 1e6).round() as i64, k)).collect();
        ks.sort();
        assert_eq!(ks, vec![(300000, 2), (700000, 1)]);
    }

    #[test]
    fn spin_of_rotation_projects_back() {
        let z = &alpha(3, 2, 0.7) * &alpha(3, 1, 2.9);
        let z = &z * &alpha(3, 3, -1.3);
        let r = z.project();
        let w = spin_of_rotation(&r);
        assert!(w.project().max_abs_diff(&r) < 1e-12);
    }

    #[test]
    fn normal_form_splits_upper_factor() {
        let b = acute(&Permutation::from_word(2, &[1, 2]).unwrap()).to_f64().project();
        let u = Mat::from_rows(&[vec![1.0, 0.3, -0.2], vec![0.0, 1.0, 0.5], vec![0.0, 0.0, 1.0]]);
        let r = Mat::from_rows(&[vec![2.0, 0.1, 0.4], vec![0.0, 0.5, -0.3], vec![0.0, 0.0, 1.5]]);
        let m = &(&u * &b) * &r;
        let v = normal_form(&m).unwrap();
        assert!((0..3).all(|i| v[(i, i)] == 1.0 && (0..i).all(|j| v[(i, j)] == 0.0)));
        // V^{-1}M = S'R' with the same permutation pattern as b
        let x = &v.inverse().unwrap() * &m;
        let lead = |a: &Mat, i: usize| (0..3).find(|&j| a[(i, j)].abs() > 1e-12).unwrap();
        assert!((0..3).all(|i| lead(&x, i) == lead(&b, i)));
    }
}
