//! Dense exact linear algebra over `K` and `K(t)`: rank and kernels,
//! determinant degrees, biproperness, maximum minor degrees, Smith-McMillan
//! diagonalization, and Bruhat `L D P U` factorization.

use std::fmt;

use crate::field::Field;
use crate::poly::{interpolate, Deg, NotProper, Poly, RatFn};

/// Dense rectangular grid in row-major order.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(v)).collect(),
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl<T: Clone> Mat<T> {
    pub fn fill(rows: usize, cols: usize, v: T) -> Self {
        Mat { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        Mat::from_fn(row_idx.len(), col_idx.len(), |i, j| {
            self.at(row_idx[i], col_idx[j]).clone()
        })
    }
}

/// Errors raised by the matrix engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixError {
    /// An entry of positive degree where a proper matrix is required.
    NotProper { row: usize, col: usize },
    /// A nonsingular matrix is required.
    SingularInput,
    /// An oracle-grade enumeration exceeds its size cap.
    SizeCapExceeded { dim: usize, cap: usize },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::NotProper { row, col } => {
                write!(f, "entry ({row}, {col}) has positive degree")
            }
            MatrixError::SingularInput => write!(f, "matrix is singular"),
            MatrixError::SizeCapExceeded { dim, cap } => {
                write!(f, "minor enumeration over dimension {dim} exceeds cap {cap}")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

// ---------------------------------------------------------------------------
// Matrices over K
// ---------------------------------------------------------------------------

pub fn k_zero<F: Field>(f: &F, rows: usize, cols: usize) -> Mat<F::Elem> {
    Mat::fill(rows, cols, f.zero())
}

pub fn k_identity<F: Field>(f: &F, n: usize) -> Mat<F::Elem> {
    Mat::from_fn(n, n, |i, j| if i == j { f.one() } else { f.zero() })
}

pub fn k_is_zero<F: Field>(f: &F, m: &Mat<F::Elem>) -> bool {
    m.data.iter().all(|v| f.is_zero(v))
}

pub fn k_add<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |i, j| f.add(a.at(i, j), b.at(i, j)))
}

pub fn k_mul<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!(a.cols, b.rows, "dimension mismatch");
    Mat::from_fn(a.rows, b.cols, |i, j| {
        let mut acc = f.zero();
        for k in 0..a.cols {
            acc = f.add(&acc, &f.mul(a.at(i, k), b.at(k, j)));
        }
        acc
    })
}

/// Reduced row echelon form. Returns the reduced matrix and the pivot
/// column of each nonzero row.
pub fn rref<F: Field>(f: &F, m: &Mat<F::Elem>) -> (Mat<F::Elem>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(pr) = (r..a.rows).find(|&i| !f.is_zero(a.at(i, c))) else {
            continue;
        };
        a.swap_rows(r, pr);
        let inv = f.inv(a.at(r, c)).expect("nonzero pivot");
        for j in c..a.cols {
            let v = f.mul(a.at(r, j), &inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i != r && !f.is_zero(a.at(i, c)) {
                let factor = a.at(i, c).clone();
                for j in c..a.cols {
                    let v = f.sub(a.at(i, j), &f.mul(&factor, a.at(r, j)));
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Rank together with bases of both kernels: the right kernel as columns of
/// an `n' x (n' - rank)` matrix, the left kernel as rows of a
/// `(n - rank) x n` matrix.
pub fn rank_and_kernels<F: Field>(
    f: &F,
    m: &Mat<F::Elem>,
) -> (usize, Mat<F::Elem>, Mat<F::Elem>) {
    let (r, pivots) = rref(f, m);
    let rank = pivots.len();
    // Right kernel from the RREF: one basis vector per free column.
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut right = k_zero(f, m.cols, free.len());
    for (k, &fc) in free.iter().enumerate() {
        right.set(fc, k, f.one());
        for (i, &pc) in pivots.iter().enumerate() {
            right.set(pc, k, f.neg(r.at(i, fc)));
        }
    }
    // Left kernel: row-reduce [M | I]; rows whose M-part vanished record the
    // vanishing combinations.
    let aug = Mat::from_fn(m.rows, m.cols + m.rows, |i, j| {
        if j < m.cols {
            m.at(i, j).clone()
        } else if j - m.cols == i {
            f.one()
        } else {
            f.zero()
        }
    });
    let (raug, _) = rref(f, &aug);
    let mut left_rows = Vec::new();
    for i in 0..m.rows {
        let m_part_zero = (0..m.cols).all(|j| f.is_zero(raug.at(i, j)));
        if m_part_zero {
            let row: Vec<F::Elem> =
                (0..m.rows).map(|j| raug.at(i, m.cols + j).clone()).collect();
            if row.iter().any(|v| !f.is_zero(v)) {
                left_rows.push(row);
            }
        }
    }
    let left = if left_rows.is_empty() {
        k_zero(f, 0, m.rows)
    } else {
        Mat::from_rows(left_rows)
    };
    debug_assert_eq!(rank + right.cols, m.cols);
    debug_assert_eq!(rank + left.rows, m.rows);
    (rank, right, left)
}

pub fn k_rank<F: Field>(f: &F, m: &Mat<F::Elem>) -> usize {
    rref(f, m).1.len()
}

/// Determinant over `K` by Gaussian elimination.
pub fn k_det<F: Field>(f: &F, m: &Mat<F::Elem>) -> F::Elem {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let mut a = m.clone();
    let n = a.rows;
    let mut det = f.one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !f.is_zero(a.at(i, c))) else {
            return f.zero();
        };
        if pr != c {
            a.swap_rows(c, pr);
            det = f.neg(&det);
        }
        let piv = a.at(c, c).clone();
        det = f.mul(&det, &piv);
        let inv = f.inv(&piv).expect("nonzero pivot");
        for i in (c + 1)..n {
            if f.is_zero(a.at(i, c)) {
                continue;
            }
            let factor = f.mul(a.at(i, c), &inv);
            for j in c..n {
                let v = f.sub(a.at(i, j), &f.mul(&factor, a.at(c, j)));
                a.set(i, j, v);
            }
        }
    }
    det
}

/// Inverse over `K`; `None` when singular.
pub fn k_inverse<F: Field>(f: &F, m: &Mat<F::Elem>) -> Option<Mat<F::Elem>> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let aug = Mat::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m.at(i, j).clone()
        } else if j - n == i {
            f.one()
        } else {
            f.zero()
        }
    });
    let (r, pivots) = rref(f, &aug);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(Mat::from_fn(n, n, |i, j| r.at(i, n + j).clone()))
}

/// Complete independent rows to a nonsingular square matrix by appending
/// standard basis vectors at the non-pivot columns, in ascending column
/// order. The given rows stay on top, unchanged.
pub fn echelon_complete<F: Field>(f: &F, rows: &Mat<F::Elem>) -> Mat<F::Elem> {
    let n = rows.cols;
    let (_, pivots) = rref(f, rows);
    assert_eq!(pivots.len(), rows.rows, "rows must be independent");
    let mut out = Vec::with_capacity(n);
    for i in 0..rows.rows {
        out.push(rows.row(i).to_vec());
    }
    for c in 0..n {
        if !pivots.contains(&c) {
            let mut e = vec![f.zero(); n];
            e[c] = f.one();
            out.push(e);
        }
    }
    Mat::from_rows(out)
}

// ---------------------------------------------------------------------------
// Matrices over K(t)
// ---------------------------------------------------------------------------

pub fn r_identity<F: Field>(f: &F, n: usize) -> Mat<RatFn<F>> {
    Mat::from_fn(n, n, |i, j| if i == j { RatFn::one(f) } else { RatFn::zero(f) })
}

pub fn r_from_k<F: Field>(f: &F, m: &Mat<F::Elem>) -> Mat<RatFn<F>> {
    m.map(|v| RatFn::constant(f, v.clone()))
}

pub fn r_mul<F: Field>(f: &F, a: &Mat<RatFn<F>>, b: &Mat<RatFn<F>>) -> Mat<RatFn<F>> {
    assert_eq!(a.cols, b.rows, "dimension mismatch");
    Mat::from_fn(a.rows, b.cols, |i, j| {
        let mut acc = RatFn::zero(f);
        for k in 0..a.cols {
            acc = RatFn::add(f, &acc, &RatFn::mul(f, a.at(i, k), b.at(k, j)));
        }
        acc
    })
}

/// Determinant of a polynomial matrix, exactly.
///
/// Fast path: evaluate at `bound + 1` distinct field points and interpolate
/// (`bound` = a degree bound for the determinant). Falls back to
/// fraction-free Bareiss elimination when the field has too few points.
pub fn poly_det<F: Field>(f: &F, m: &Mat<Poly<F>>) -> Poly<F> {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return Poly::one(f);
    }
    let bound: i64 = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| match m.at(i, j).deg() {
                    Deg::Fin(d) => Some(d),
                    Deg::NegInf => None,
                })
                .max()
                .unwrap_or(0)
        })
        .sum();
    let points_needed = bound as u64 + 1;
    let enough_points = f.order().map_or(true, |q| q >= points_needed);
    if enough_points {
        let mut samples = Vec::with_capacity(points_needed as usize);
        for k in 0..points_needed {
            let x = f.from_i64(k as i64);
            let mk = m.map(|p| p.eval(f, &x));
            samples.push((x, k_det(f, &mk)));
        }
        interpolate(f, &samples)
    } else {
        bareiss_det(f, m)
    }
}

/// Fraction-free Bareiss elimination over `K[t]`; every division is exact.
fn bareiss_det<F: Field>(f: &F, m: &Mat<Poly<F>>) -> Poly<F> {
    let n = m.rows;
    let mut a = m.clone();
    let mut sign = false;
    let mut prev = Poly::one(f);
    for k in 0..n.saturating_sub(1) {
        let Some(pr) = (k..n).find(|&i| !a.at(i, k).is_zero()) else {
            return Poly::zero();
        };
        if pr != k {
            a.swap_rows(k, pr);
            sign = !sign;
        }
        let piv = a.at(k, k).clone();
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = Poly::sub(
                    f,
                    &Poly::mul(f, a.at(i, j), &piv),
                    &Poly::mul(f, a.at(i, k), a.at(k, j)),
                );
                let v = Poly::div_exact(f, &num, &prev).expect("Bareiss division is exact");
                a.set(i, j, v);
            }
            a.set(i, k, Poly::zero());
        }
        prev = piv;
    }
    let det = a.at(n - 1, n - 1).clone();
    if sign {
        Poly::neg(f, &det)
    } else {
        det
    }
}

/// Degree of the ordinary determinant; minus infinity iff singular.
///
/// Denominators are cleared per row, the polynomial determinant is computed
/// exactly (evaluation-interpolation or Bareiss), and the row corrections
/// are subtracted.
pub fn deg_det<F: Field>(f: &F, m: &Mat<RatFn<F>>) -> Deg {
    assert_eq!(m.rows, m.cols, "deg_det of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return Deg::Fin(0);
    }
    let mut cleared = Mat::fill(n, n, Poly::<F>::zero());
    let mut correction: i64 = 0;
    for i in 0..n {
        // lcm of the denominators in row i
        let mut lcm = Poly::one(f);
        for j in 0..n {
            let den = m.at(i, j).den();
            let g = Poly::gcd(f, &lcm, den);
            lcm = Poly::mul(f, &lcm, &Poly::div_exact(f, den, &g).expect("gcd divides"));
        }
        correction += lcm.deg().finite();
        for j in 0..n {
            let e = m.at(i, j);
            let scaled = Poly::mul(
                f,
                e.num(),
                &Poly::div_exact(f, &lcm, e.den()).expect("lcm divisible by denominator"),
            );
            cleared.set(i, j, scaled);
        }
    }
    poly_det(f, &cleared).deg().shift(-correction)
}

/// Maximum degree of a determinant over all `k x k` submatrices (the
/// Smith-McMillan invariant `delta_k`), by exhaustive enumeration.
///
/// Oracle-grade: the enumeration is exponential and guarded by a size cap on
/// `min(rows, cols)` (default 5, see [`MAX_MINOR_DIM_CAP`]).
pub fn max_minor_degree<F: Field>(
    f: &F,
    m: &Mat<RatFn<F>>,
    k: usize,
) -> Result<Deg, MatrixError> {
    max_minor_degree_capped(f, m, k, MAX_MINOR_DIM_CAP)
}

/// Default cap for [`max_minor_degree`] enumeration.
pub const MAX_MINOR_DIM_CAP: usize = 5;

pub fn max_minor_degree_capped<F: Field>(
    f: &F,
    m: &Mat<RatFn<F>>,
    k: usize,
    cap: usize,
) -> Result<Deg, MatrixError> {
    let dim = m.rows.min(m.cols);
    assert!(k <= dim, "minor order exceeds matrix dimensions");
    if k == 0 {
        return Ok(Deg::Fin(0));
    }
    if dim > cap {
        return Err(MatrixError::SizeCapExceeded { dim, cap });
    }
    let mut best = Deg::NegInf;
    for rows_sel in subsets_of_size(m.rows, k) {
        for cols_sel in subsets_of_size(m.cols, k) {
            let sub = m.submatrix(&rows_sel, &cols_sel);
            best = best.max(deg_det(f, &sub));
        }
    }
    Ok(best)
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let remaining = k - cur.len();
        for v in start..=(n - remaining) {
            cur.push(v);
            rec(n, k, v + 1, cur, out);
            cur.pop();
        }
    }
    if k <= n {
        rec(n, k, 0, &mut cur, &mut out);
    }
    out
}

/// Entrywise leading coefficients `A^0` of a proper matrix.
///
/// # Errors
/// `NotProper` with the position of the first offending entry.
pub fn leading_coeff_matrix<F: Field>(
    f: &F,
    m: &Mat<RatFn<F>>,
) -> Result<Mat<F::Elem>, MatrixError> {
    let mut out = k_zero(f, m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            match m.at(i, j).proper_leading(f) {
                Ok(v) => out.set(i, j, v),
                Err(NotProper) => return Err(MatrixError::NotProper { row: i, col: j }),
            }
        }
    }
    Ok(out)
}

/// True iff every entry is proper and the leading coefficient matrix is
/// nonsingular over `K`.
pub fn is_biproper<F: Field>(f: &F, m: &Mat<RatFn<F>>) -> bool {
    if m.rows != m.cols {
        return false;
    }
    match leading_coeff_matrix(f, m) {
        Ok(lead) => k_rank(f, &lead) == m.rows,
        Err(_) => false,
    }
}

/// Smith-McMillan form: biproper `S`, `T` and nonincreasing integer
/// exponents with `S A T = diag(t^alpha)`.
#[derive(Clone, Debug)]
pub struct SmithMcMillanForm<F: Field> {
    pub s: Mat<RatFn<F>>,
    pub t: Mat<RatFn<F>>,
    pub alpha: Vec<i64>,
}

/// Smith-McMillan diagonalization of a nonsingular matrix over `K(t)`.
///
/// Constructive procedure: bring a maximum-degree entry (ties broken by
/// smallest row, then column) to the pivot, clear its row and column with
/// proper elementary transforms, normalize the pivot to a pure power of `t`
/// by a degree-zero scaling, and recurse on the remaining block. The
/// accumulated `S` and `T` are products of permutations, proper elementary
/// matrices, and degree-zero diagonal scalings, hence biproper.
///
/// # Errors
/// `SingularInput` when a remaining block is identically zero (the input
/// was singular).
pub fn smith_mcmillan<F: Field>(
    f: &F,
    a: &Mat<RatFn<F>>,
) -> Result<SmithMcMillanForm<F>, MatrixError> {
    assert_eq!(a.rows, a.cols, "smith_mcmillan of a non-square matrix");
    let n = a.rows;
    let mut b = a.clone();
    let mut s = r_identity(f, n);
    let mut t = r_identity(f, n);
    let mut alpha = Vec::with_capacity(n);
    for k in 0..n {
        // Locate a maximum-degree entry of the trailing block.
        let mut best: Option<(Deg, usize, usize)> = None;
        for i in k..n {
            for j in k..n {
                let d = b.at(i, j).deg();
                if d == Deg::NegInf {
                    continue;
                }
                if best.map_or(true, |(bd, _, _)| d > bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let Some((d, pi, pj)) = best else {
            return Err(MatrixError::SingularInput);
        };
        let d = d.finite();
        b.swap_rows(k, pi);
        s.swap_rows(k, pi);
        b.swap_cols(k, pj);
        t.swap_cols(k, pj);
        let piv = b.at(k, k).clone();
        // Clear the pivot column below with proper row transforms.
        for i in (k + 1)..n {
            if b.at(i, k).is_zero() {
                continue;
            }
            let u = RatFn::div(f, b.at(i, k), &piv).expect("nonzero pivot");
            debug_assert!(u.is_proper(), "pivot has maximum degree");
            for j in 0..n {
                let bv = RatFn::sub(f, b.at(i, j), &RatFn::mul(f, &u, b.at(k, j)));
                b.set(i, j, bv);
                let sv = RatFn::sub(f, s.at(i, j), &RatFn::mul(f, &u, s.at(k, j)));
                s.set(i, j, sv);
            }
        }
        // Clear the pivot row to the right with proper column transforms.
        for j in (k + 1)..n {
            if b.at(k, j).is_zero() {
                continue;
            }
            let v = RatFn::div(f, b.at(k, j), &piv).expect("nonzero pivot");
            debug_assert!(v.is_proper(), "pivot has maximum degree");
            for i in 0..n {
                let bv = RatFn::sub(f, b.at(i, j), &RatFn::mul(f, &v, b.at(i, k)));
                b.set(i, j, bv);
                let tv = RatFn::sub(f, t.at(i, j), &RatFn::mul(f, &v, t.at(i, k)));
                t.set(i, j, tv);
            }
        }
        // Normalize the pivot to t^d by a degree-zero row scaling.
        let w = RatFn::div(f, &RatFn::t_power(f, d), &piv).expect("nonzero pivot");
        debug_assert_eq!(w.deg(), Deg::Fin(0));
        for j in 0..n {
            let bv = RatFn::mul(f, &w, b.at(k, j));
            b.set(k, j, bv);
            let sv = RatFn::mul(f, &w, s.at(k, j));
            s.set(k, j, sv);
        }
        alpha.push(d);
    }
    debug_assert!(alpha.windows(2).all(|w| w[0] >= w[1]));
    Ok(SmithMcMillanForm { s, t, alpha })
}

/// Bruhat-style factorization `A = L D P U` of a nonsingular matrix:
/// `L` lower-unitriangular, `D` diagonal, `P` a permutation, `U`
/// upper-unitriangular. `D P` is uniquely determined; the commutative
/// Dieudonné pathway reads off `det A = sgn(P) * prod(d_i)`.
#[derive(Clone, Debug)]
pub struct BruhatLdpu<F: Field> {
    pub l: Mat<RatFn<F>>,
    pub d: Vec<RatFn<F>>,
    /// Row `i` of the permutation matrix `P` is the standard basis row
    /// `e_{perm[i]}`.
    pub perm: Vec<usize>,
    pub u: Mat<RatFn<F>>,
}

impl<F: Field> BruhatLdpu<F> {
    pub fn permutation_matrix(&self, f: &F) -> Mat<RatFn<F>> {
        let n = self.perm.len();
        Mat::from_fn(n, n, |i, j| {
            if self.perm[i] == j {
                RatFn::one(f)
            } else {
                RatFn::zero(f)
            }
        })
    }

    pub fn sign(&self) -> i32 {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        let mut sign = 1;
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let mut j = i;
            let mut len = 0;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    pub fn reassemble(&self, f: &F) -> Mat<RatFn<F>> {
        let n = self.perm.len();
        let dmat = Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.d[i].clone()
            } else {
                RatFn::zero(f)
            }
        });
        r_mul(
            f,
            &r_mul(f, &self.l, &dmat),
            &r_mul(f, &self.permutation_matrix(f), &self.u),
        )
    }
}

/// Factor a nonsingular matrix over `K(t)` (or `K`, lifted) as `L D P U`.
///
/// Deterministic pivoting: for each row top-down, the pivot is the first
/// nonzero entry among columns not yet used.
///
/// # Errors
/// `SingularInput` when some row has no available pivot.
pub fn bruhat_ldpu<F: Field>(f: &F, a: &Mat<RatFn<F>>) -> Result<BruhatLdpu<F>, MatrixError> {
    assert_eq!(a.rows, a.cols, "bruhat_ldpu of a non-square matrix");
    let n = a.rows;
    let mut b = a.clone();
    let mut l = r_identity(f, n);
    let mut u = r_identity(f, n);
    let mut used = vec![false; n];
    let mut perm = vec![0usize; n];
    let mut d = vec![RatFn::zero(f); n];
    for i in 0..n {
        let Some(j) = (0..n).find(|&j| !used[j] && !b.at(i, j).is_zero()) else {
            return Err(MatrixError::SingularInput);
        };
        used[j] = true;
        perm[i] = j;
        let piv = b.at(i, j).clone();
        d[i] = piv.clone();
        // Clear row i to the right of the pivot (unused columns only; used
        // columns are already zero in this row).
        for jj in (j + 1)..n {
            if used[jj] || b.at(i, jj).is_zero() {
                continue;
            }
            let v = RatFn::div(f, b.at(i, jj), &piv).expect("nonzero pivot");
            // Column op: col_jj -= v * col_j. Accumulate U = E^{-1} products:
            // U gains +v at (j, jj).
            for r in 0..n {
                let bv = RatFn::sub(f, b.at(r, jj), &RatFn::mul(f, &v, b.at(r, j)));
                b.set(r, jj, bv);
            }
            let uv = RatFn::add(f, u.at(j, jj), &v);
            u.set(j, jj, uv);
        }
        // Clear column j below row i.
        for r in (i + 1)..n {
            if b.at(r, j).is_zero() {
                continue;
            }
            let w = RatFn::div(f, b.at(r, j), &piv).expect("nonzero pivot");
            for jj in 0..n {
                let bv = RatFn::sub(f, b.at(r, jj), &RatFn::mul(f, &w, b.at(i, jj)));
                b.set(r, jj, bv);
            }
            let lv = RatFn::add(f, l.at(r, i), &w);
            l.set(r, i, lv);
        }
    }
    Ok(BruhatLdpu { l, d, perm, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GfP, Rationals};
    use crate::poly::{fmt_poly, parse_poly, parse_ratfn};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rmat<F: Field>(f: &F, rows: &[&[&str]]) -> Mat<RatFn<F>> {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_ratfn(f, s).unwrap()).collect())
                .collect(),
        )
    }

    #[test]
    fn rank_and_kernels_examples() {
        let f = Rationals;
        let id = k_identity(&f, 3);
        let (rank, right, left) = rank_and_kernels(&f, &id);
        assert_eq!((rank, right.cols(), left.rows()), (3, 0, 0));

        let z = k_zero(&f, 2, 3);
        let (rank, right, left) = rank_and_kernels(&f, &z);
        assert_eq!((rank, right.cols(), left.rows()), (0, 3, 2));

        let g = GfP::new(2).unwrap();
        let ones = Mat::from_rows(vec![vec![1u64, 1], vec![1, 1]]);
        let (rank, right, left) = rank_and_kernels(&g, &ones);
        assert_eq!(rank, 1);
        assert_eq!(right.cols(), 1);
        assert_eq!((*right.at(0, 0), *right.at(1, 0)), (1, 1));
        assert_eq!(left.rows(), 1);
        // Kernel bases actually annihilate.
        assert!(k_is_zero(&g, &k_mul(&g, &ones, &right)));
        assert!(k_is_zero(&g, &k_mul(&g, &left, &ones)));
    }

    #[test]
    fn deg_det_examples() {
        let f = Rationals;
        let m = rmat(&f, &[&["t^2", "0"], &["0", "t^-1"]]);
        assert_eq!(deg_det(&f, &m), Deg::Fin(1));

        let m = rmat(&f, &[&["t + 1", "t"], &["t + 1", "t"]]);
        assert_eq!(deg_det(&f, &m), Deg::NegInf);

        // deg det [[a,b],[c,d]] = max(deg a + deg d, deg b + deg c) when the
        // two candidates differ.
        let m = rmat(&f, &[&["t^3", "t"], &["1", "t"]]);
        assert_eq!(deg_det(&f, &m), Deg::Fin(4));
    }

    #[test]
    fn deg_det_methods_agree() {
        // Evaluation-interpolation (large field) and Bareiss (forced by the
        // tiny field) must agree with each other and with the rationals.
        let q2 = GfP::new(2).unwrap();
        let q = Rationals;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let entries: Vec<Vec<i64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            let degs: Vec<Vec<i64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.gen_range(-2..=2)).collect())
                .collect();
            let m2 = Mat::from_fn(3, 3, |i, j| {
                let c = q2.from_i64(entries[i][j]);
                RatFn::mul(
                    &q2,
                    &RatFn::constant(&q2, c),
                    &RatFn::t_power(&q2, degs[i][j]),
                )
            });
            let mq = Mat::from_fn(3, 3, |i, j| {
                let c = q.from_i64(entries[i][j]);
                RatFn::mul(&q, &RatFn::constant(&q, c), &RatFn::t_power(&q, degs[i][j]))
            });
            assert_eq!(deg_det(&q2, &m2), deg_det(&q, &mq));
        }
    }

    #[test]
    fn deg_det_multiplicative_on_random_nonsingular_pairs() {
        let f = GfP::new(10007).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        while done < 30 {
            let a = random_ratmat(&f, &mut rng, 3);
            let b = random_ratmat(&f, &mut rng, 3);
            let (da, db) = (deg_det(&f, &a), deg_det(&f, &b));
            if !da.is_finite() || !db.is_finite() {
                continue;
            }
            assert_eq!(deg_det(&f, &r_mul(&f, &a, &b)), da.plus(db));
            done += 1;
        }
    }

    fn random_ratmat<F: Field>(f: &F, rng: &mut ChaCha8Rng, n: usize) -> Mat<RatFn<F>> {
        Mat::from_fn(n, n, |_, _| {
            let c = f.sample(rng);
            RatFn::mul(
                f,
                &RatFn::constant(f, c),
                &RatFn::t_power(f, rng.gen_range(-2..=3)),
            )
        })
    }

    #[test]
    fn minor_degrees() {
        let f = Rationals;
        let m = rmat(&f, &[&["t^3", "t"], &["1", "t"]]);
        assert_eq!(max_minor_degree(&f, &m, 0).unwrap(), Deg::Fin(0));
        assert_eq!(max_minor_degree(&f, &m, 1).unwrap(), Deg::Fin(3));
        assert_eq!(max_minor_degree(&f, &m, 2).unwrap(), deg_det(&f, &m));
        let big = Mat::fill(7, 7, RatFn::one(&f));
        assert!(matches!(
            max_minor_degree(&f, &big, 2),
            Err(MatrixError::SizeCapExceeded { dim: 7, cap: 5 })
        ));
    }

    #[test]
    fn biproper_examples() {
        let f = Rationals;
        assert!(is_biproper(&f, &r_identity(&f, 2)));
        let m = rmat(&f, &[&["t^-1", "0"], &["0", "1"]]);
        assert!(!is_biproper(&f, &m));
        let m = rmat(&f, &[&["1", "t^-1"], &["t^-1", "1"]]);
        assert!(is_biproper(&f, &m));
        // proper and nonsingular (det = t^-1) but the leading matrix
        // [[1,1],[1,1]] is singular, so not biproper
        let m = rmat(&f, &[&["1", "1"], &["1", "1 + t^-1"]]);
        assert!(!is_biproper(&f, &m));
    }

    #[test]
    fn leading_coeff_matrix_examples() {
        let f = Rationals;
        let m = rmat(&f, &[&["t^-1", "0"], &["0", "2"]]);
        let lead = leading_coeff_matrix(&f, &m).unwrap();
        assert_eq!(lead, Mat::from_rows(vec![
            vec![f.from_i64(0), f.from_i64(0)],
            vec![f.from_i64(0), f.from_i64(2)],
        ]));
        let m = rmat(&f, &[&["(t + 1)/(t)"]]);
        let lead = leading_coeff_matrix(&f, &m).unwrap();
        assert_eq!(*lead.at(0, 0), f.one());
        let m = rmat(&f, &[&["1", "t"], &["0", "1"]]);
        assert_eq!(
            leading_coeff_matrix(&f, &m).unwrap_err(),
            MatrixError::NotProper { row: 0, col: 1 }
        );
    }

    #[test]
    fn smith_mcmillan_examples() {
        let f = Rationals;
        let m = rmat(&f, &[&["t^3", "0"], &["0", "t"]]);
        let sm = smith_mcmillan(&f, &m).unwrap();
        assert_eq!(sm.alpha, vec![3, 1]);

        let m = rmat(&f, &[&["t", "1"], &["0", "1"]]);
        let sm = smith_mcmillan(&f, &m).unwrap();
        assert_eq!(sm.alpha, vec![1, 0]);

        let sing = rmat(&f, &[&["1", "1"], &["1", "1"]]);
        assert!(matches!(
            smith_mcmillan(&f, &sing),
            Err(MatrixError::SingularInput)
        ));
    }

    #[test]
    fn smith_mcmillan_random_invariants() {
        let f = GfP::new(10007).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut done = 0;
        while done < 25 {
            let n = rng.gen_range(1..=4);
            let a = random_ratmat(&f, &mut rng, n);
            let dd = deg_det(&f, &a);
            if !dd.is_finite() {
                continue;
            }
            let sm = smith_mcmillan(&f, &a).unwrap();
            assert!(is_biproper(&f, &sm.s));
            assert!(is_biproper(&f, &sm.t));
            assert!(sm.alpha.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(sm.alpha.iter().sum::<i64>(), dd.finite());
            // S A T = diag(t^alpha) exactly.
            let prod = r_mul(&f, &r_mul(&f, &sm.s, &a), &sm.t);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j {
                        RatFn::t_power(&f, sm.alpha[i])
                    } else {
                        RatFn::zero(&f)
                    };
                    assert_eq!(*prod.at(i, j), expect, "entry ({i},{j})");
                }
            }
            // alpha_k = delta_k - delta_{k-1} against exhaustive minors.
            let mut prev = 0i64;
            for k in 1..=n {
                let dk = max_minor_degree(&f, &a, k).unwrap().finite();
                assert_eq!(sm.alpha[k - 1], dk - prev, "alpha_{k}");
                prev = dk;
            }
            done += 1;
        }
    }

    #[test]
    fn bruhat_examples() {
        let f = Rationals;
        // [[a,b],[c,d]] with a nonzero: D = diag(a, d - c a^{-1} b).
        let m = rmat(&f, &[&["2", "3"], &["4", "5"]]);
        let b = bruhat_ldpu(&f, &m).unwrap();
        assert_eq!(b.perm, vec![0, 1]);
        assert_eq!(b.d[0], parse_ratfn(&f, "2").unwrap());
        assert_eq!(b.d[1], parse_ratfn(&f, "-1").unwrap()); // 5 - 4*3/2
        assert_eq!(b.reassemble(&f), m);

        // [[0,b],[c,d]]: degree pathway via -bc.
        let m = rmat(&f, &[&["0", "t^2"], &["t^3", "1"]]);
        let b = bruhat_ldpu(&f, &m).unwrap();
        assert_eq!(b.perm, vec![1, 0]);
        assert_eq!(b.sign(), -1);
        let mut total = Deg::Fin(0);
        for di in &b.d {
            total = total.plus(di.deg());
        }
        assert_eq!(total, Deg::Fin(5));
        assert_eq!(b.reassemble(&f), m);

        let id = r_identity(&f, 3);
        let b = bruhat_ldpu(&f, &id).unwrap();
        assert_eq!(b.reassemble(&f), id);
        assert_eq!(b.perm, vec![0, 1, 2]);

        let sing = rmat(&f, &[&["1", "2"], &["2", "4"]]);
        assert!(matches!(
            bruhat_ldpu(&f, &sing),
            Err(MatrixError::SingularInput)
        ));
    }

    #[test]
    fn bruhat_random_reassembly_and_det() {
        let f = GfP::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut done = 0;
        while done < 25 {
            let n = rng.gen_range(1..=4);
            let a = random_ratmat(&f, &mut rng, n);
            match bruhat_ldpu(&f, &a) {
                Ok(b) => {
                    assert_eq!(b.reassemble(&f), a);
                    // sgn(P) * prod d_i equals the determinant degree pathway.
                    let mut total = Deg::Fin(0);
                    for di in &b.d {
                        total = total.plus(di.deg());
                    }
                    assert_eq!(total, deg_det(&f, &a));
                    done += 1;
                }
                Err(MatrixError::SingularInput) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn proper_matrix_degree_bound() {
        // lem:key commutative instance: proper square A has deg det <= 0,
        // with equality iff biproper.
        let f = GfP::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..60 {
            let n = rng.gen_range(1..=3);
            let a = Mat::from_fn(n, n, |_, _| {
                let c = f.sample(&mut rng);
                RatFn::mul(
                    &f,
                    &RatFn::constant(&f, c),
                    &RatFn::t_power(&f, rng.gen_range(-2..=0)),
                )
            });
            let dd = deg_det(&f, &a);
            assert!(dd <= Deg::Fin(0));
            assert_eq!(dd == Deg::Fin(0), is_biproper(&f, &a));
        }
    }

    #[test]
    fn echelon_complete_is_nonsingular_and_preserves_rows() {
        let f = GfP::new(7).unwrap();
        let rows = Mat::from_rows(vec![vec![0u64, 2, 1], vec![0, 0, 3]]);
        let full = echelon_complete(&f, &rows);
        assert_eq!(full.rows(), 3);
        assert_eq!(full.row(0), rows.row(0));
        assert_eq!(full.row(1), rows.row(1));
        assert_eq!(k_rank(&f, &full), 3);
    }

    #[test]
    fn poly_det_interpolation_matches_bareiss() {
        let f = GfP::new(10007).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.gen_range(1..=4);
            let m = Mat::from_fn(n, n, |_, _| {
                let len = rng.gen_range(0..=3);
                Poly::from_coeffs(&f, (0..len).map(|_| f.sample(&mut rng)).collect())
            });
            let by_interp = poly_det(&f, &m);
            let by_bareiss = super::bareiss_det(&f, &m);
            assert_eq!(
                fmt_poly(&f, &by_interp),
                fmt_poly(&f, &by_bareiss)
            );
        }
        let q = Rationals;
        let m = Mat::from_rows(vec![
            vec![parse_poly(&q, "t + 1").unwrap(), parse_poly(&q, "2").unwrap()],
            vec![parse_poly(&q, "t^2").unwrap(), parse_poly(&q, "t - 1").unwrap()],
        ]);
        assert_eq!(
            fmt_poly(&q, &poly_det(&q, &m)),
            fmt_poly(&q, &super::bareiss_det(&q, &m))
        );
    }
}
