//! Small dense matrices over `f64` and over an exact field.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    r: usize,
    c: usize,
    d: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.r {
            write!(f, "  ")?;
            for j in 0..self.c {
                write!(f, "{:>12.6} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.d[i * self.c + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.d[i * self.c + j]
    }
}

impl Mat {
    pub fn zeros(r: usize, c: usize) -> Self {
        Mat { r, c, d: vec![0.0; r * c] }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_fn(r: usize, c: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.r).map(|i| (0..self.c).map(|j| self[(i, j)]).collect()).collect()
    }

    pub fn rows(&self) -> usize {
        self.r
    }

    pub fn cols(&self) -> usize {
        self.c
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.c, self.r, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { r: self.r, c: self.c, d: self.d.iter().map(|x| x * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.d.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn max_abs_diff(&self, o: &Mat) -> f64 {
        self.d.iter().zip(&o.d).fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Determinant by partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.r, self.c);
        let k = self.r;
        if k == 0 {
            return 1.0;
        }
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..k {
            let p = (col..k).max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs())).expect("nonempty");
            if a[(p, col)] == 0.0 {
                return 0.0;
            }
            if p != col {
                for j in 0..k {
                    a.d.swap(p * k + j, col * k + j);
                }
                det = -det;
            }
            let piv = a[(col, col)];
            det *= piv;
            for r in col + 1..k {
                let f = a[(r, col)] / piv;
                if f != 0.0 {
                    for j in col..k {
                        let v = a[(col, j)];
                        a[(r, j)] -= f * v;
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Mat> {
        let k = self.r;
        let mut a = self.clone();
        let mut inv = Mat::identity(k);
        for col in 0..k {
            let p = (col..k).max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))?;
            if a[(p, col)].abs() < 1e-300 {
                return None;
            }
            for j in 0..k {
                a.d.swap(p * k + j, col * k + j);
                inv.d.swap(p * k + j, col * k + j);
            }
            let piv = a[(col, col)];
            for j in 0..k {
                a[(col, j)] /= piv;
                inv[(col, j)] /= piv;
            }
            for r in 0..k {
                if r != col {
                    let f = a[(r, col)];
                    if f != 0.0 {
                        for j in 0..k {
                            let (av, iv) = (a[(col, j)], inv[(col, j)]);
                            a[(r, j)] -= f * av;
                            inv[(r, j)] -= f * iv;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// `M = L·U` without pivoting; `L` unit lower. `None` if a pivot vanishes.
    pub fn lu(&self) -> Option<(Mat, Mat)> {
        let k = self.r;
        let mut u = self.clone();
        let mut l = Mat::identity(k);
        let scale = self.max_abs().max(1e-300);
        for col in 0..k {
            let p = u[(col, col)];
            if p.abs() <= 1e-14 * scale {
                return None;
            }
            for r in col + 1..k {
                let f = u[(r, col)] / p;
                l[(r, col)] = f;
                for j in 0..k {
                    let v = u[(col, j)];
                    u[(r, j)] -= f * v;
                }
                u[(r, col)] = 0.0;
            }
        }
        Some((l, u))
    }

    /// `M = Q·R` with `R` upper triangular with positive diagonal (modified Gram–Schmidt,
    /// repeated once for stability).
    pub fn qr_positive(&self) -> Option<(Mat, Mat)> {
        let k = self.r;
        let mut q = self.clone();
        let mut rr = Mat::zeros(k, k);
        for j in 0..k {
            for _pass in 0..2 {
                for i in 0..j {
                    let mut dot = 0.0;
                    for r in 0..k {
                        dot += q[(r, i)] * q[(r, j)];
                    }
                    rr[(i, j)] += dot;
                    for r in 0..k {
                        let v = q[(r, i)];
                        q[(r, j)] -= dot * v;
                    }
                }
            }
            let norm = (0..k).map(|r| q[(r, j)] * q[(r, j)]).sum::<f64>().sqrt();
            if norm < 1e-300 {
                return None;
            }
            rr[(j, j)] = norm;
            for r in 0..k {
                q[(r, j)] /= norm;
            }
        }
        Some((q, rr))
    }

    /// Orthogonal factor of [`Mat::qr_positive`].
    pub fn q_part(&self) -> Mat {
        self.qr_positive().expect("invertible").0
    }

    /// Southwest `j×j` minor: rows `n+2−j..=n+1`, columns `1..=j` (1-based).
    pub fn southwest_minor(&self, j: usize) -> f64 {
        let k = self.r;
        let rows: Vec<usize> = (k - j..k).collect();
        let cols: Vec<usize> = (0..j).collect();
        self.submatrix(&rows, &cols).det()
    }

    pub fn southwest_minors(&self) -> Vec<f64> {
        (1..self.r).map(|j| self.southwest_minor(j)).collect()
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, o: &Mat) -> Mat {
        assert_eq!(self.c, o.r, "shape mismatch");
        let mut m = Mat::zeros(self.r, o.c);
        for i in 0..self.r {
            for k in 0..self.c {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..o.c {
                    m.d[i * o.c + j] += a * o.d[k * o.c + j];
                }
            }
        }
        m
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, o: Mat) -> Mat {
        &self * &o
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, o: &Mat) -> Mat {
        Mat { r: self.r, c: self.c, d: self.d.iter().zip(&o.d).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, o: &Mat) -> Mat {
        Mat { r: self.r, c: self.c, d: self.d.iter().zip(&o.d).map(|(a, b)| a - b).collect() }
    }
}

/// `k`-subsets of `items` in lexicographic order.
pub fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let m = items.len();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i].clone()).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 && idx[0] == m - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `exp(s𝔫)` with `(i,j)` entry `s^{i−j}/(i−j)!`.
pub fn exp_nil_f64(k: usize, s: f64) -> Mat {
    Mat::from_fn(k, k, |i, j| if i >= j { s.powi((i - j) as i32) / factorial(i - j) } else { 0.0 })
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |a, b| a * b as f64)
}

/// Matrix logarithm of a rotation close to the identity (angle well below π/2).
pub fn log_near_identity(r: &Mat) -> Mat {
    let k = r.rows();
    let x = r - &Mat::identity(k);
    let mut term = x.clone();
    let mut sum = x.clone();
    for m in 2..60 {
        term = &term * &x;
        let coef = if m % 2 == 0 { -1.0 / m as f64 } else { 1.0 / m as f64 };
        sum = &sum + &term.scale(coef);
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    // project onto skew matrices
    (&sum - &sum.transpose()).scale(0.5)
}
