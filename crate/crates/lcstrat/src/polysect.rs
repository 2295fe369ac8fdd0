//! Exact transversal sections `M(x,t) = M̃(x)·exp(t𝔫)` to Bruhat cells, their southwest
//! minors, discriminants and resultants, and exact itinerary classification.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{fmt_rat, rat, rint, ring, MultiPoly, PolyError, Rat, Ring, RootInterval, SturmChain, UniPoly};
use crate::spinalg::{acute, CliffordEven, Dyadic};
use crate::symgrp::{Permutation, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectError {
    #[error("the identity permutation has no transversal section")]
    IdentityLetter,
    #[error("q is not an element of Quat")]
    NotQuat,
    #[error("southwest minor m_{0} vanishes identically")]
    ZeroPolynomial(usize),
    #[error("multiplicity pattern {0:?} is not realizable by a permutation")]
    UnrecognizedMultPattern(Vec<i64>),
    #[error("point has {got} coordinates, section expects {want}")]
    BadPoint { got: usize, want: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Result<T> = std::result::Result<T, SectError>;

/// Which perturbation of the `[acb]` section to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// ODE `Γ' = Γ(β_1𝔩_1 + β_2𝔩_2 + β_3𝔩_3)` with `β = (1+ut, 1, 1−ut)`.
    Betaprime,
    /// `M̃_{1,u}`: the `[acb]` section with an extra `−u` entry.
    MatrixU,
}

impl std::str::FromStr for FamilyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "betaprime" => Ok(FamilyKind::Betaprime),
            "matrix_u" | "matrixu" => Ok(FamilyKind::MatrixU),
            _ => Err(format!("unknown family {s:?} (expected betaprime or matrix_u)")),
        }
    }
}

/// Polynomial section family with its minors.
#[derive(Clone, Debug)]
pub struct SectionFamily {
    pub n: usize,
    pub sigma: Permutation,
    pub q: CliffordEven<Dyadic>,
    pub ring: Ring,
    /// Number of slice coordinates `x_1..x_d`.
    pub d: usize,
    pub t_var: usize,
    /// Ring index of `u` when it is kept symbolic.
    pub u_var: Option<usize>,
    /// Fixed value of `u` for perturbed families.
    pub u_value: Option<Rat>,
    pub family: Option<FamilyKind>,
    /// `M̃(x)` before the slice `x_{d+1} = 0`.
    pub mtilde: Vec<Vec<MultiPoly>>,
    /// `M(x,t)` on the slice.
    pub m: Vec<Vec<MultiPoly>>,
    pub minors: Vec<MultiPoly>,
    /// Open time window; roots outside are ignored.
    pub window: (Rat, Rat),
}

fn x_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

fn make_ring(nx: usize, with_u: bool) -> Ring {
    let mut names = x_names(nx);
    if with_u {
        names.push("u".into());
    }
    names.push("t".into());
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    ring(&refs)
}

/// `M̃·exp(t𝔫)`: column `j` is `Σ_{k ≥ j} M̃_{:,k} t^{k−j}/(k−j)!`.
pub fn times_exp_tn(mt: &[Vec<MultiPoly>], ring: &Ring, t_var: usize) -> Vec<Vec<MultiPoly>> {
    let k = mt.len();
    let t = MultiPoly::var(ring, t_var);
    let powers: Vec<MultiPoly> = (0..k)
        .map(|e| {
            let fact: i64 = (1..=e as i64).product();
            t.pow(e as u32).scale(&rat(1, fact))
        })
        .collect();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut acc = MultiPoly::zero(ring);
                    for l in j..k {
                        if !mt[i][l].is_zero() {
                            acc = &acc + &(&mt[i][l] * &powers[l - j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Southwest `j×j` minors, `j = 1..n`.
pub fn southwest_minor_polys(m: &[Vec<MultiPoly>], ring: &Ring) -> Vec<MultiPoly> {
    let k = m.len();
    (1..k)
        .map(|j| {
            let sub: Vec<Vec<MultiPoly>> = (k - j..k).map(|r| m[r][..j].to_vec()).collect();
            crate::poly::det_poly(&sub, ring)
        })
        .collect()
}

/// Positions `(i,j)` (0-based) with `j < i^ρ` and `j^{ρ^{-1}} < i`, in reading order.
pub fn variable_positions(rho: &Permutation) -> Vec<(usize, usize)> {
    let k = rho.n() + 1;
    let inv = rho.inverse();
    let mut out = Vec::new();
    for i in 1..=k {
        for j in 1..=k {
            if j < rho.apply(i) && inv.apply(j) < i {
                out.push((i - 1, j - 1));
            }
        }
    }
    out
}

/// Section through `Π(q·acute η·acute σ)`.
pub fn build_section(sigma: &Permutation, q: &CliffordEven<Dyadic>) -> Result<SectionFamily> {
    if sigma.is_identity() {
        return Err(SectError::IdentityLetter);
    }
    if !q.is_quat() {
        return Err(SectError::NotQuat);
    }
    let n = sigma.n();
    let k = n + 1;
    let eta = Permutation::eta(n);
    let rho = eta.compose(sigma).expect("same rank");
    let z0 = &(q * &acute(&eta)) * &acute(sigma);
    let q0 = z0.project_i64();
    let pos = variable_positions(&rho);
    let nx = pos.len();
    let ring = make_ring(nx, false);
    let mut mt = vec![vec![MultiPoly::zero(&ring); k]; k];
    for i in 1..=k {
        let c = rho.apply(i);
        let s = q0[i - 1][c - 1];
        debug_assert!(s == 1 || s == -1, "Q_0 must have ±1 at (i, i^ρ)");
        mt[i - 1][c - 1] = MultiPoly::constant(&ring, rint(s));
    }
    for (l, &(i, j)) in pos.iter().enumerate() {
        let s = q0[i][rho.apply(i + 1) - 1];
        mt[i][j] = MultiPoly::var(&ring, l).scale(&rint(s));
    }
    finish(n, sigma.clone(), q.clone(), ring, nx, None, None, None, mt)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    n: usize,
    sigma: Permutation,
    q: CliffordEven<Dyadic>,
    ring: Ring,
    nx: usize,
    u_var: Option<usize>,
    u_value: Option<Rat>,
    family: Option<FamilyKind>,
    mt: Vec<Vec<MultiPoly>>,
) -> Result<SectionFamily> {
    let t_var = ring.len() - 1;
    let sliced: Vec<Vec<MultiPoly>> = mt.iter().map(|r| r.iter().map(|p| p.subs(nx - 1, &Rat::zero())).collect()).collect();
    let m = times_exp_tn(&sliced, &ring, t_var);
    let minors = southwest_minor_polys(&m, &ring);
    Ok(SectionFamily { n, sigma, q, d: nx - 1, t_var, u_var, u_value, family, mtilde: mt, m, minors, ring, window: (rint(-1), rint(1)) })
}

/// Perturbations of the `[acb]` section. `u = None` keeps `u` symbolic.
pub fn build_perturbed_family(kind: FamilyKind, u: Option<Rat>) -> Result<SectionFamily> {
    let n = 3;
    let sigma = Permutation::from_word(n, &[1, 3, 2]).expect("acb");
    let ring = make_ring(3, u.is_none());
    let t_var = ring.len() - 1;
    let u_var = u.is_none().then_some(3);
    let c = |v: i64| MultiPoly::constant(&ring, rint(v));
    let x = |i: usize| MultiPoly::var(&ring, i);
    let upoly = match &u {
        Some(v) => MultiPoly::constant(&ring, v.clone()),
        None => MultiPoly::var(&ring, 3),
    };
    let q = CliffordEven::one(n);
    match kind {
        FamilyKind::MatrixU => {
            let mt = vec![
                vec![c(0), c(-1), c(0), c(0)],
                vec![c(0), -&x(0), c(0), c(-1)],
                vec![c(-1), -&upoly, c(0), c(0)],
                vec![x(1), x(2), c(1), c(0)],
            ];
            finish(n, sigma, q, ring, 3, u_var, u, Some(kind), mt)
        }
        FamilyKind::Betaprime => {
            let g0 = vec![
                vec![c(0), c(-1), c(0), c(0)],
                vec![c(0), -&x(0), c(0), c(-1)],
                vec![c(-1), c(0), c(0), c(0)],
                vec![x(1), c(0), c(1), c(0)],
            ];
            let t = MultiPoly::var(&ring, t_var);
            let ut = &upoly * &t;
            let beta = [&c(1) + &ut, c(1), &c(1) - &ut];
            // column j' = β_j · column j+1, last column constant
            let mut cols: Vec<Vec<MultiPoly>> = (0..4).map(|j| (0..4).map(|i| g0[i][j].clone()).collect()).collect();
            for j in (0..3).rev() {
                let next = cols[j + 1].clone();
                for i in 0..4 {
                    let integrand = &beta[j] * &next[i];
                    cols[j][i] = &g0[i][j] + &integrand.integral(t_var);
                }
            }
            let m: Vec<Vec<MultiPoly>> = (0..4).map(|i| (0..4).map(|j| cols[j][i].clone()).collect()).collect();
            let minors = southwest_minor_polys(&m, &ring);
            Ok(SectionFamily {
                n,
                sigma,
                q,
                d: 2,
                t_var,
                u_var,
                u_value: u,
                family: Some(kind),
                mtilde: g0,
                m,
                minors,
                ring,
                window: (rint(-1), rint(1)),
            })
        }
    }
}

/// One point of `sing(Γ_x)` with its letter.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactEvent {
    pub root: RootInterval,
    pub mult: Vec<i64>,
    pub letter: Permutation,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub events: Vec<ExactEvent>,
    pub word: Word,
    /// Sturm chain of the squarefree product of all minors.
    pub chain: SturmChain,
}

impl Classification {
    /// Isolating-interval midpoints.
    pub fn roots_approx(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.root.approx()).collect()
    }

    /// Roots refined to width `2^{-bits}`.
    pub fn roots_refined(&self, bits: u32) -> Vec<f64> {
        let w = Rat::new(1.into(), num_bigint::BigInt::from(2).pow(bits));
        self.events.iter().map(|e| self.chain.refine(&e.root, &w).approx()).collect()
    }
}

/// Labeled grid point.
#[derive(Clone, Debug, Serialize)]
pub struct GridLabel {
    pub x: Vec<String>,
    pub itinerary: String,
    pub roots: Vec<f64>,
}

/// Rectangular grid: per axis `(lo, hi, steps)` with `steps ≥ 2` equally spaced points
/// including both ends, or a single point `lo` when `steps = 1`.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub axes: Vec<(Rat, Rat, usize)>,
}

impl GridSpec {
    pub fn square(d: usize, radius: Rat, steps: usize) -> Self {
        GridSpec { axes: vec![(-radius.clone(), radius, steps); d] }
    }

    pub fn points(&self) -> Vec<Vec<Rat>> {
        let mut out: Vec<Vec<Rat>> = vec![vec![]];
        for (lo, hi, steps) in &self.axes {
            let vals: Vec<Rat> = if *steps <= 1 {
                vec![lo.clone()]
            } else {
                (0..*steps).map(|k| lo + (hi - lo) * rat(k as i64, *steps as i64 - 1)).collect()
            };
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        out
    }
}

impl SectionFamily {
    pub fn t(&self) -> MultiPoly {
        MultiPoly::var(&self.ring, self.t_var)
    }

    pub fn var_names(&self) -> Vec<String> {
        self.ring.iter().take(self.d).cloned().collect()
    }

    pub fn minors(&self) -> &[MultiPoly] {
        &self.minors
    }

    fn check_nonzero(&self) -> Result<()> {
        for (j, m) in self.minors.iter().enumerate() {
            if m.is_zero() {
                return Err(SectError::ZeroPolynomial(j + 1));
            }
        }
        Ok(())
    }

    /// `d_j = discrim_t m_j`.
    pub fn discriminants(&self) -> Result<Vec<MultiPoly>> {
        self.check_nonzero()?;
        self.minors.iter().map(|m| Ok(m.discriminant(self.t_var)?)).collect()
    }

    /// `r_{i,j} = res_t(m_i, m_j)` for `i < j` (1-based keys).
    pub fn resultants(&self) -> Result<BTreeMap<(usize, usize), MultiPoly>> {
        self.check_nonzero()?;
        let mut out = BTreeMap::new();
        for i in 0..self.minors.len() {
            for j in i + 1..self.minors.len() {
                out.insert((i + 1, j + 1), self.minors[i].resultant(&self.minors[j], self.t_var)?);
            }
        }
        Ok(out)
    }

    /// Zero loci `d_j = 0`, `r_{i,j} = 0` as `(name, polynomial)` strings.
    pub fn zero_loci(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for (j, d) in self.discriminants()?.iter().enumerate() {
            out.push((format!("d{}", j + 1), d.to_string()));
        }
        for ((i, j), r) in self.resultants()? {
            out.push((format!("r{i}{j}"), r.to_string()));
        }
        Ok(out)
    }

    /// Column-shift law `(M)_{i,j+1} = ∂_t (M)_{i,j}`.
    pub fn column_shift_holds(&self) -> bool {
        let k = self.n + 1;
        (0..k).all(|i| (0..k - 1).all(|j| self.m[i][j].derivative(self.t_var) == self.m[i][j + 1]))
    }

    fn assignment(&self, x: &[Rat]) -> Result<Vec<(usize, Rat)>> {
        if x.len() != self.d {
            return Err(SectError::BadPoint { got: x.len(), want: self.d });
        }
        Ok(x.iter().cloned().enumerate().collect())
    }

    /// Minors at `x` as univariate polynomials in `t` (`u` must be fixed).
    pub fn minors_at(&self, x: &[Rat]) -> Result<Vec<UniPoly>> {
        let asg = self.assignment(x)?;
        self.minors
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let p = m.subs_many(&asg);
                let up = p.to_uni(self.t_var).ok_or(SectError::BadPoint { got: x.len(), want: self.d })?;
                if up.is_zero() {
                    Err(SectError::ZeroPolynomial(j + 1))
                } else {
                    Ok(up)
                }
            })
            .collect()
    }

    /// Entries of `M(x,t)` at `x` as univariate polynomials in `t`.
    pub fn matrix_at(&self, x: &[Rat]) -> Result<Vec<Vec<UniPoly>>> {
        let asg = self.assignment(x)?;
        self.m
            .iter()
            .map(|r| r.iter().map(|p| p.subs_many(&asg).to_uni(self.t_var).ok_or(SectError::BadPoint { got: x.len(), want: self.d })).collect())
            .collect()
    }

    /// Exact itinerary of `Γ_x` on the open window.
    pub fn classify_point(&self, x: &[Rat]) -> Result<Classification> {
        let ms = self.minors_at(x)?;
        classify_minors(&ms, self.n, &self.window)
    }

    pub fn with_window(mut self, lo: Rat, hi: Rat) -> Self {
        self.window = (lo, hi);
        self
    }

    /// Labels for all grid points, in grid order.
    pub fn stratum_map(&self, grid: &GridSpec) -> Result<Vec<GridLabel>> {
        let pts = grid.points();
        pts.par_iter()
            .map(|p| {
                let c = self.classify_point(p)?;
                Ok(GridLabel { x: p.iter().map(fmt_rat).collect(), itinerary: c.word.to_string(), roots: c.roots_refined(34) })
            })
            .collect()
    }

    pub fn csv_header(&self) -> String {
        let mut cols = self.var_names();
        cols.push("u".into());
        cols.push("itinerary".into());
        cols.push("roots".into());
        cols.join(",")
    }

    pub fn csv_row(&self, g: &GridLabel) -> String {
        let u = self.u_value.as_ref().map(fmt_rat).unwrap_or_default();
        let roots: Vec<String> = g.roots.iter().map(|r| format!("{r:.12}")).collect();
        format!("{},{},{},{}", g.x.join(","), u, g.itinerary, roots.join(";"))
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mat = |m: &[Vec<MultiPoly>]| -> Vec<Vec<String>> { m.iter().map(|r| r.iter().map(|p| p.to_string()).collect()).collect() };
        let res: BTreeMap<String, String> = self.resultants()?.into_iter().map(|((i, j), r)| (format!("r{i}{j}"), r.to_string())).collect();
        Ok(serde_json::json!({
            "sigma": self.sigma.letters(),
            "n": self.n,
            "q": self.q.to_json(),
            "variables": self.ring.as_ref(),
            "family": self.family,
            "u": self.u_value.as_ref().map(fmt_rat),
            "mtilde": mat(&self.mtilde),
            "m": mat(&self.m),
            "minors": self.minors.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "discriminants": self.discriminants()?.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "resultants": res,
        }))
    }
}

/// Classifies the common real roots of the minors inside the open window.
pub fn classify_minors(ms: &[UniPoly], n: usize, window: &(Rat, Rat)) -> Result<Classification> {
    let mut g = UniPoly::constant(Rat::one());
    let mut factors: Vec<Vec<(SturmChain, usize)>> = Vec::with_capacity(ms.len());
    for (j, m) in ms.iter().enumerate() {
        if m.is_zero() {
            return Err(SectError::ZeroPolynomial(j + 1));
        }
        g = &g * &m.squarefree_part();
        factors.push(m.squarefree_decomposition().into_iter().filter(|(f, _)| f.degree().unwrap_or(0) > 0).map(|(f, e)| (SturmChain::new(&f), e)).collect());
    }
    let g = g.squarefree_part();
    let chain = SturmChain::new(&g);
    let mut events = Vec::new();
    for r in chain.isolate_in(&window.0, &window.1) {
        if r.is_exact() && r.lo == window.1 {
            continue;
        }
        let mult: Vec<i64> = factors.iter().map(|fs| fs.iter().filter(|(c, _)| c.has_root_in(&r)).map(|(_, e)| *e as i64).sum()).collect();
        let letter = Permutation::from_mult(&mult, n).map_err(|_| SectError::UnrecognizedMultPattern(mult.clone()))?;
        if letter.is_identity() {
            return Err(SectError::UnrecognizedMultPattern(mult));
        }
        events.push(ExactEvent { root: r, mult, letter });
    }
    let word = Word::new(n, events.iter().map(|e| e.letter.clone()).collect()).expect("non-identity letters");
    Ok(Classification { events, word, chain })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(sec: &SectionFamily, s: &str) -> MultiPoly {
        MultiPoly::parse(&sec.ring, s).unwrap()
    }

    #[test]
    fn section_matrices_match_examples() {
        let aba = build_section(&Permutation::from_word(2, &[1, 2, 1]).unwrap(), &CliffordEven::one(2)).unwrap();
        assert_eq!(aba.mtilde[1][0], p(&aba, "x1"));
        assert_eq!(aba.mtilde[2][0], p(&aba, "x2"));
        assert_eq!(aba.mtilde[2][1], p(&aba, "x3"));
        let acb = build_section(&Permutation::from_word(3, &[1, 3, 2]).unwrap(), &CliffordEven::one(3)).unwrap();
        let expect = [["0", "-1", "0", "0"], ["0", "-x1", "0", "-1"], ["-1", "0", "0", "0"], ["x2", "x3", "1", "0"]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(acb.mtilde[i][j], p(&acb, expect[i][j]), "entry {i},{j}");
            }
        }
        assert!(acb.column_shift_holds());
    }

    #[test]
    fn window_excludes_far_roots() {
        // m = (t − 1/2)(t − 3)
        let m = UniPoly::from_coeffs(vec![rat(3, 2), rat(-7, 2), rint(1)]);
        let c = classify_minors(&[m], 1, &(rint(-1), rint(1))).unwrap();
        assert_eq!(c.events.len(), 1);
    }
}
