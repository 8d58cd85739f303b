//! Maximum vanishing subspace problem (MVSP) solvers over the ground field.
//!
//! Given the leading coefficient matrices `A_0, ..., A_m` of a proper pencil,
//! MVSP asks for subspaces `X` (row side) and `Y` (column side) maximizing
//! `dim X + dim Y` subject to `X A_i Y = 0` for every `i`. The optimum equals
//! `n + n' - ncrank`, so these solvers double as nc-rank oracles.
//!
//! Four routes are implemented: exhaustive enumeration over small finite
//! fields (the ground-truth oracle, with structured shortcuts that keep it
//! exact), a bipartite-support solver (König), a rank-one solver (matroid
//! intersection over the two vector families), and a layered mixed-matrix
//! solver (matroid intersection over columns and incidences). The appendix
//! reductions between MVSP and its block form round out the module.

use crate::exec::{self, ExecMode};
use crate::field::Field;
use crate::matrix::{k_identity, k_mul, k_rank, k_zero, rank_and_kernels, subsets_of_size, Mat};
use crate::matroid::{matroid_intersection_core, LinearMatroid, PartitionMatroid, SumMatroid};
use crate::pencil::{LeadingPencil, PencilClass};
use std::error::Error;
use std::fmt;

/// Default bound on enumeration states for the brute-force solver.
pub const DEFAULT_STATE_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MvspError {
    /// The pencil does not belong to the class the chosen solver handles.
    WrongClass { expected: &'static str, detail: String },
    /// Exhaustive enumeration would exceed the state cap.
    CapExceeded { states: u128, cap: u64 },
    /// Brute force requires an enumerable (finite) ground field.
    FieldNotEnumerable,
    /// Block sizes do not tile the matrix.
    InconsistentPartition { detail: String },
}

impl fmt::Display for MvspError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MvspError::WrongClass { expected, detail } => {
                write!(out, "pencil is not in the {} class: {}", expected, detail)
            }
            MvspError::CapExceeded { states, cap } => {
                write!(out, "enumeration needs {} states, cap is {}", states, cap)
            }
            MvspError::FieldNotEnumerable => {
                write!(out, "brute-force enumeration needs a finite field")
            }
            MvspError::InconsistentPartition { detail } => {
                write!(out, "inconsistent block partition: {}", detail)
            }
        }
    }
}

impl Error for MvspError {}

/// A vanishing pair: `Xbasis` rows span `X`, `Ybasis` columns span `Y`,
/// and `Xbasis A_i Ybasis = 0` for every term of the target pencil.
#[derive(Debug, Clone)]
pub struct MvSubspace<F: Field> {
    pub xbasis: Mat<F::Elem>,
    pub ybasis: Mat<F::Elem>,
    pub value: usize,
}

impl<F: Field> MvSubspace<F> {
    pub fn dim_x(&self) -> usize {
        self.xbasis.rows()
    }

    pub fn dim_y(&self) -> usize {
        self.ybasis.cols()
    }

    /// Exact validity check: full-rank bases, consistent value, vanishing
    /// products against every term.
    pub fn verify(&self, f: &F, lead: &LeadingPencil<F>) -> bool {
        if self.xbasis.cols() != lead.n() || self.ybasis.rows() != lead.nprime() {
            return false;
        }
        if self.value != self.dim_x() + self.dim_y() {
            return false;
        }
        if k_rank(f, &self.xbasis) != self.dim_x() || k_rank(f, &self.ybasis) != self.dim_y() {
            return false;
        }
        lead.terms.iter().all(|m| {
            let prod = k_mul(f, &k_mul(f, &self.xbasis, m), &self.ybasis);
            (0..prod.rows()).all(|i| (0..prod.cols()).all(|j| f.is_zero(prod.at(i, j))))
        })
    }
}

/// nc-rank via the MVSP optimum: `n + n' - value`.
pub fn nc_rank<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    strategy: &MvspStrategy,
) -> Result<usize, MvspError> {
    let mv = solve_mvsp(f, lead, strategy, ExecMode::Auto)?;
    Ok(lead.n() + lead.nprime() - mv.value)
}

/// Solver selection for MVSP instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvspStrategy {
    /// Probe the class of the leading pencil and pick the cheapest valid
    /// solver; general instances fall back to brute force.
    Auto,
    Brute { cap: u64 },
    Bipartite,
    Rank1,
    Layered,
}

impl Default for MvspStrategy {
    fn default() -> Self {
        MvspStrategy::Auto
    }
}

/// Class of a leading pencil, mirroring the pencil-level classes but decided
/// on the coefficient matrices alone (which is all MVSP sees).
pub fn lead_class<F: Field>(f: &F, lead: &LeadingPencil<F>) -> PencilClass {
    let a0_zero = mat_is_zero(f, &lead.terms[0]);
    let vars = &lead.terms[1..];
    if a0_zero && vars.iter().all(|m| count_entries(f, m) <= 1) {
        return PencilClass::BipartiteSupport;
    }
    if a0_zero && vars.iter().all(|m| k_rank(f, m) <= 1) {
        return PencilClass::PureRank1;
    }
    if layered_decompose(f, lead).is_ok() {
        return PencilClass::LayeredMixed;
    }
    PencilClass::General
}

/// Route an MVSP instance to the requested solver. `Auto` probes the class;
/// explicitly requested solvers reject out-of-class pencils with `WrongClass`.
pub fn solve_mvsp<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    strategy: &MvspStrategy,
    mode: ExecMode,
) -> Result<MvSubspace<F>, MvspError> {
    match strategy {
        MvspStrategy::Auto => match lead_class(f, lead) {
            PencilClass::BipartiteSupport => mvsp_bipartite(f, lead),
            PencilClass::PureRank1 => mvsp_rank1_from_lead(f, lead),
            PencilClass::LayeredMixed => mvsp_layered_from_lead(f, lead),
            PencilClass::General => mvsp_bruteforce_mode(f, lead, None, mode),
        },
        MvspStrategy::Brute { cap } => mvsp_bruteforce_mode(f, lead, Some(*cap), mode),
        MvspStrategy::Bipartite => mvsp_bipartite(f, lead),
        MvspStrategy::Rank1 => mvsp_rank1_from_lead(f, lead),
        MvspStrategy::Layered => mvsp_layered_from_lead(f, lead),
    }
}

fn mat_is_zero<F: Field>(f: &F, m: &Mat<F::Elem>) -> bool {
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| f.is_zero(m.at(i, j))))
}

fn count_entries<F: Field>(f: &F, m: &Mat<F::Elem>) -> usize {
    (0..m.rows())
        .map(|i| (0..m.cols()).filter(|&j| !f.is_zero(m.at(i, j))).count())
        .sum()
}

/// Largest `X` with `X A_i ybasis = 0` for all terms: the left kernel of the
/// horizontally stacked products `A_i ybasis`.
fn annihilator_x<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    ybasis: &Mat<F::Elem>,
) -> Mat<F::Elem> {
    let n = lead.n();
    let b = ybasis.cols();
    let stacked = Mat::from_fn(n, lead.terms.len() * b, |i, jj| {
        let (term, j) = (jj / b, jj % b);
        let m = &lead.terms[term];
        let mut acc = f.zero();
        for k in 0..lead.nprime() {
            acc = f.add(&acc, &f.mul(m.at(i, k), ybasis.at(k, j)));
        }
        acc
    });
    let (_, _, left) = rank_and_kernels(f, &stacked);
    left
}

/// Largest `Y` with `xbasis A_i Y = 0`: right kernel of the stacked `xbasis A_i`.
fn annihilator_y<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    xbasis: &Mat<F::Elem>,
) -> Mat<F::Elem> {
    let a = xbasis.rows();
    let stacked = Mat::from_fn(lead.terms.len() * a, lead.nprime(), |ii, j| {
        let (term, i) = (ii / a, ii % a);
        let m = &lead.terms[term];
        let mut acc = f.zero();
        for k in 0..lead.n() {
            acc = f.add(&acc, &f.mul(xbasis.at(i, k), m.at(k, j)));
        }
        acc
    });
    let (_, right, _) = rank_and_kernels(f, &stacked);
    right
}

// ---------------------------------------------------------------------------
// Brute force

/// Number of `dim`-dimensional subspaces of `GF(q)^ambient`, saturating.
fn gauss_count(q: u64, ambient: usize, dim: usize) -> u128 {
    if dim > ambient {
        return 0;
    }
    // Product of (q^(ambient-i) - 1) / (q^(i+1) - 1). Each prefix of the
    // multiply-then-divide order is itself a Gaussian binomial, so the
    // division stays exact short of saturation.
    let mut total: u128 = 1;
    for i in 0..dim {
        let num = pow_sat(q as u128, ambient - i).saturating_sub(1);
        let den = pow_sat(q as u128, i + 1).saturating_sub(1);
        total = total.saturating_mul(num) / den.max(1);
    }
    total
}

fn pow_sat(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

fn subspace_count(q: u64, ambient: usize) -> u128 {
    (0..=ambient).map(|d| gauss_count(q, ambient, d)).fold(0u128, |a, b| a.saturating_add(b))
}

/// All `dim`-dimensional subspaces of `K^ambient` as reduced-echelon row
/// bases, ordered by pivot-column choice then free-entry odometer.
fn rref_bases<F: Field>(f: &F, ambient: usize, dim: usize) -> Vec<Mat<F::Elem>> {
    let elems = f.elements().expect("enumeration requires a finite field");
    let mut out = Vec::new();
    for pivots in subsets_of_size(ambient, dim) {
        // Free positions: to the right of the row's pivot, not a pivot column.
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for j in p + 1..ambient {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut m = k_zero(f, dim, ambient);
            for (i, &p) in pivots.iter().enumerate() {
                m.set(i, p, f.one());
            }
            for (k, &(i, j)) in free.iter().enumerate() {
                m.set(i, j, elems[digits[k]].clone());
            }
            out.push(m);
            // Odometer over free entries.
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < elems.len() {
                    break;
                }
                digits[pos] = 0;
            }
            if free.is_empty() || (pos == 0 && digits[0] == 0) {
                break;
            }
        }
    }
    out
}

/// Exhaustive MVSP with the default state cap.
pub fn mvsp_bruteforce<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    cap: Option<u64>,
) -> Result<MvSubspace<F>, MvspError> {
    mvsp_bruteforce_mode(f, lead, cap, ExecMode::Auto)
}

/// Exhaustive MVSP over a finite field.
///
/// The search is exact: either a full subspace enumeration (when the count
/// fits the cap) or a sweep over `(dim X, dim Y)` patterns from the largest
/// conceivable value downward, where each pattern is decided exactly via
/// kernels, a rank-one linearization, or a one-sided enumeration. Ties among
/// optima resolve to minimal `dim X`, and within that to the first basis in
/// enumeration order, so results are deterministic.
pub fn mvsp_bruteforce_mode<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    cap: Option<u64>,
    mode: ExecMode,
) -> Result<MvSubspace<F>, MvspError> {
    let cap = cap.unwrap_or(DEFAULT_STATE_CAP);
    let q = match f.order() {
        Some(q) => q,
        None => return Err(MvspError::FieldNotEnumerable),
    };
    let n = lead.n();
    let nprime = lead.nprime();

    // Rows and columns untouched by every term belong to every maximal
    // optimum; strip them, solve the reduced instance, and lift back.
    let used_rows: Vec<bool> = (0..n)
        .map(|i| lead.terms.iter().any(|m| (0..nprime).any(|j| !f.is_zero(m.at(i, j)))))
        .collect();
    let used_cols: Vec<bool> = (0..nprime)
        .map(|j| lead.terms.iter().any(|m| (0..n).any(|i| !f.is_zero(m.at(i, j)))))
        .collect();
    if used_rows.iter().any(|u| !u) || used_cols.iter().any(|u| !u) {
        let kr: Vec<usize> = (0..n).filter(|&i| used_rows[i]).collect();
        let kc: Vec<usize> = (0..nprime).filter(|&j| used_cols[j]).collect();
        let reduced = LeadingPencil {
            terms: lead.terms.iter().map(|m| m.submatrix(&kr, &kc)).collect(),
        };
        let sub = mvsp_bruteforce_mode(f, &reduced, Some(cap), mode)?;
        let mut xrows: Vec<Vec<F::Elem>> = Vec::new();
        for i in 0..sub.dim_x() {
            let mut row = vec![f.zero(); n];
            for (kidx, &orig) in kr.iter().enumerate() {
                row[orig] = sub.xbasis.at(i, kidx).clone();
            }
            xrows.push(row);
        }
        for i in 0..n {
            if !used_rows[i] {
                let mut row = vec![f.zero(); n];
                row[i] = f.one();
                xrows.push(row);
            }
        }
        let mut ycols: Vec<Vec<F::Elem>> = Vec::new();
        for j in 0..sub.dim_y() {
            let mut col = vec![f.zero(); nprime];
            for (kidx, &orig) in kc.iter().enumerate() {
                col[orig] = sub.ybasis.at(kidx, j).clone();
            }
            ycols.push(col);
        }
        for j in 0..nprime {
            if !used_cols[j] {
                let mut col = vec![f.zero(); nprime];
                col[j] = f.one();
                ycols.push(col);
            }
        }
        let dim_x = xrows.len();
        let dim_y = ycols.len();
        let xbasis =
            if dim_x == 0 { k_zero(f, 0, n) } else { Mat::from_rows(xrows) };
        let ybasis = Mat::from_fn(nprime, dim_y, |i, j| ycols[j][i].clone());
        return Ok(MvSubspace { xbasis, ybasis, value: dim_x + dim_y });
    }

    // Full enumeration when the subspace lattice is small enough.
    let total = subspace_count(q, nprime);
    if total <= cap as u128 {
        let mut candidates: Vec<Mat<F::Elem>> = Vec::new();
        for d in 0..=nprime {
            candidates.extend(rref_bases(f, nprime, d));
        }
        let best = exec::best_in_order(
            mode,
            candidates,
            |ybase| {
                let ybasis = ybase.transpose();
                let xbasis = annihilator_x(f, lead, &ybasis);
                let value = xbasis.rows() + ybasis.cols();
                Some((value, ybasis.cols(), xbasis, ybasis))
            },
            // Prefer larger value, then larger dim Y (so dim X is minimal);
            // the scan keeps the earliest among full ties.
            |cand, inc| (cand.0, cand.1) > (inc.0, inc.1),
        )
        .expect("at least the zero subspace is enumerated");
        let (value, _, xbasis, ybasis) = best;
        return Ok(MvSubspace { xbasis, ybasis, value });
    }

    // Pattern sweep: try values from n + n' downward, dim X ascending within
    // each value. Patterns too big for the cap are deferred; they only turn
    // into an error when nothing else at the same value succeeds, since by
    // then the exact optimum is genuinely undecided.
    let mut states: u128 = 0;
    for v in (n.max(nprime)..=n + nprime).rev() {
        let mut deferred: Option<u128> = None;
        let lo = v.saturating_sub(nprime);
        for a in lo..=n.min(v) {
            let b = v - a;
            if b > nprime {
                continue;
            }
            if b == nprime {
                // Y is everything: X must lie in the common left kernel.
                let stacked = hstack_terms(f, lead);
                let (_, _, left) = rank_and_kernels(f, &stacked);
                if left.rows() >= a {
                    let xbasis = take_rows(f, &left, a, n);
                    let ybasis = k_identity(f, nprime);
                    return Ok(MvSubspace { xbasis, ybasis, value: a + nprime });
                }
                continue;
            }
            if a == n {
                let stacked = vstack_terms(f, lead);
                let (_, right, _) = rank_and_kernels(f, &stacked);
                if right.cols() >= b {
                    let xbasis = k_identity(f, n);
                    let ybasis = take_cols(f, &right, b, nprime);
                    return Ok(MvSubspace { xbasis, ybasis, value: n + b });
                }
                continue;
            }
            if a == 0 || b == 0 {
                // Dominated by the full-side branches at a higher value.
                continue;
            }
            if a + 1 == n && b + 1 == nprime {
                match hyperplane_pair(f, lead, q, cap, &mut states) {
                    Ok(Some((xbasis, ybasis))) => {
                        return Ok(MvSubspace { xbasis, ybasis, value: a + b });
                    }
                    Ok(None) => {}
                    Err(MvspError::CapExceeded { states: need, .. }) => {
                        deferred = Some(deferred.map_or(need, |d| d.max(need)));
                    }
                    Err(e) => return Err(e),
                }
                continue;
            }
            // Middle pattern: enumerate the cheaper side exactly.
            let count_x = gauss_count(q, n, a);
            let count_y = gauss_count(q, nprime, b);
            let batch = count_x.min(count_y);
            if states.saturating_add(batch) > cap as u128 {
                let need = states.saturating_add(batch);
                deferred = Some(deferred.map_or(need, |d| d.max(need)));
                continue;
            }
            states += batch;
            if count_x <= count_y {
                for xb in rref_bases(f, n, a) {
                    let ann = annihilator_y(f, lead, &xb);
                    if ann.cols() >= b {
                        let ybasis = take_cols(f, &ann, b, nprime);
                        return Ok(MvSubspace { xbasis: xb, ybasis, value: a + b });
                    }
                }
            } else {
                for yb in rref_bases(f, nprime, b) {
                    let ybasis = yb.transpose();
                    let ann = annihilator_x(f, lead, &ybasis);
                    if ann.rows() >= a {
                        let xbasis = take_rows(f, &ann, a, n);
                        return Ok(MvSubspace { xbasis, ybasis, value: a + b });
                    }
                }
            }
        }
        if let Some(need) = deferred {
            // A pattern at this value stayed undecided and no cheaper one
            // attained the value, so exactness is lost: report honestly.
            return Err(MvspError::CapExceeded { states: need, cap });
        }
    }
    unreachable!("the trivial pattern at value max(n, n') is always feasible")
}

fn hstack_terms<F: Field>(f: &F, lead: &LeadingPencil<F>) -> Mat<F::Elem> {
    let n = lead.n();
    let w = lead.nprime();
    Mat::from_fn(n, lead.terms.len() * w, |i, jj| {
        let _ = f;
        lead.terms[jj / w].at(i, jj % w).clone()
    })
}

fn vstack_terms<F: Field>(f: &F, lead: &LeadingPencil<F>) -> Mat<F::Elem> {
    let n = lead.n();
    let w = lead.nprime();
    Mat::from_fn(lead.terms.len() * n, w, |ii, j| {
        let _ = f;
        lead.terms[ii / n].at(ii % n, j).clone()
    })
}

fn take_rows<F: Field>(f: &F, m: &Mat<F::Elem>, a: usize, cols: usize) -> Mat<F::Elem> {
    if a == 0 {
        return k_zero(f, 0, cols);
    }
    Mat::from_fn(a, cols, |i, j| m.at(i, j).clone())
}

fn take_cols<F: Field>(f: &F, m: &Mat<F::Elem>, b: usize, rows: usize) -> Mat<F::Elem> {
    if b == 0 {
        return k_zero(f, rows, 0);
    }
    Mat::from_fn(rows, b, |i, j| m.at(i, j).clone())
}

/// Decide the `(n-1, n'-1)` pattern exactly: a hyperplane pair `(u^perp,
/// ker w^T)` vanishes for all terms iff the rank-one matrix `Z = u w^T`
/// satisfies, for every term `M` and index pairs `j<k`, `l<m`,
/// `M[k,l] Z[j,m] - M[j,l] Z[k,m] - M[k,m] Z[j,l] + M[j,m] Z[k,l] = 0`.
/// We solve that linear system for `Z` and scan its kernel (projectively)
/// for a rank-one point.
fn hyperplane_pair<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    q: u64,
    cap: u64,
    states: &mut u128,
) -> Result<Option<(Mat<F::Elem>, Mat<F::Elem>)>, MvspError> {
    let n = lead.n();
    let np = lead.nprime();
    debug_assert!(n >= 2 && np >= 2);
    let unknowns = n * np;
    let z = |i: usize, j: usize| i * np + j;
    let mut rows: Vec<Vec<F::Elem>> = Vec::new();
    for m in &lead.terms {
        for j in 0..n {
            for k in j + 1..n {
                for l in 0..np {
                    for mm in l + 1..np {
                        let mut row = vec![f.zero(); unknowns];
                        row[z(j, mm)] = f.add(&row[z(j, mm)], m.at(k, l));
                        row[z(k, mm)] = f.sub(&row[z(k, mm)], m.at(j, l));
                        row[z(j, l)] = f.sub(&row[z(j, l)], m.at(k, mm));
                        row[z(k, l)] = f.add(&row[z(k, l)], m.at(j, mm));
                        if row.iter().any(|v| !f.is_zero(v)) {
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    let kernel = if rows.is_empty() {
        k_identity(f, unknowns)
    } else {
        let (_, right, _) = rank_and_kernels(f, &Mat::from_rows(rows));
        right
    };
    let d = kernel.cols();
    if d == 0 {
        return Ok(None);
    }
    let candidates = (pow_sat(q as u128, d) - 1) / (q as u128 - 1);
    if states.saturating_add(candidates) > cap as u128 {
        return Err(MvspError::CapExceeded {
            states: states.saturating_add(candidates),
            cap,
        });
    }
    *states += candidates;
    let elems = f.elements().expect("finite field checked by caller");
    // Projective scan: leading coordinate normalized to one.
    for leadpos in 0..d {
        let tail = d - leadpos - 1;
        let mut digits = vec![0usize; tail];
        loop {
            let mut coords = vec![f.zero(); d];
            coords[leadpos] = f.one();
            for (k, &dig) in digits.iter().enumerate() {
                coords[leadpos + 1 + k] = elems[dig].clone();
            }
            let zmat = Mat::from_fn(n, np, |i, j| {
                let mut acc = f.zero();
                for (c, coord) in coords.iter().enumerate() {
                    acc = f.add(&acc, &f.mul(kernel.at(z(i, j), c), coord));
                }
                acc
            });
            if let Some((u, w)) = rank_one_factor(f, &zmat) {
                let urow = Mat::from_rows(vec![u]);
                let (_, right, _) = rank_and_kernels(f, &urow);
                let xbasis = right.transpose();
                let wrow = Mat::from_rows(vec![w]);
                let (_, yker, _) = rank_and_kernels(f, &wrow);
                debug_assert_eq!(xbasis.rows(), n - 1);
                debug_assert_eq!(yker.cols(), np - 1);
                return Ok(Some((xbasis, yker)));
            }
            let mut pos = tail;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < elems.len() {
                    break;
                }
                digits[pos] = 0;
            }
            if tail == 0 || (pos == 0 && digits[0] == 0) {
                break;
            }
        }
    }
    Ok(None)
}

/// `Some((u, w))` with `m = u w^T` when `m` is nonzero of rank one.
fn rank_one_factor<F: Field>(f: &F, m: &Mat<F::Elem>) -> Option<(Vec<F::Elem>, Vec<F::Elem>)> {
    let mut pivot = None;
    'scan: for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !f.is_zero(m.at(i, j)) {
                pivot = Some((i, j));
                break 'scan;
            }
        }
    }
    let (i0, j0) = pivot?;
    let inv = f.inv(m.at(i0, j0)).expect("nonzero pivot");
    let u: Vec<F::Elem> = (0..m.rows()).map(|i| m.at(i, j0).clone()).collect();
    let w: Vec<F::Elem> = (0..m.cols()).map(|j| f.mul(m.at(i0, j), &inv)).collect();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if *m.at(i, j) != f.mul(&u[i], &w[j]) {
                return None;
            }
        }
    }
    Some((u, w))
}

// ---------------------------------------------------------------------------
// Bipartite support

/// Maximum stable set `(I, J)` of the bipartite support graph together with
/// the matching number, via augmenting paths and the alternating-reachability
/// cover. Among maximum stable sets this returns the one with smallest `I`.
pub fn bipartite_stable_set(
    n: usize,
    nprime: usize,
    edges: &[(usize, usize)],
) -> (Vec<usize>, Vec<usize>, usize) {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in edges {
        if !adj[i].contains(&j) {
            adj[i].push(j);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut match_l: Vec<Option<usize>> = vec![None; n];
    let mut match_r: Vec<Option<usize>> = vec![None; nprime];
    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        match_l: &mut [Option<usize>],
        match_r: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if match_r[v].is_none()
                || augment(match_r[v].unwrap(), adj, match_l, match_r, seen)
            {
                match_l[u] = Some(v);
                match_r[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut nu = 0;
    for u in 0..n {
        let mut seen = vec![false; nprime];
        if augment(u, &adj, &mut match_l, &mut match_r, &mut seen) {
            nu += 1;
        }
    }
    // Alternating reachability from unmatched left vertices.
    let mut zl = vec![false; n];
    let mut zr = vec![false; nprime];
    let mut stack: Vec<usize> = (0..n).filter(|&u| match_l[u].is_none()).collect();
    for &u in &stack {
        zl[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !zr[v] {
                zr[v] = true;
                if let Some(u2) = match_r[v] {
                    if !zl[u2] {
                        zl[u2] = true;
                        stack.push(u2);
                    }
                }
            }
        }
    }
    let i_set: Vec<usize> = (0..n).filter(|&u| zl[u]).collect();
    let j_set: Vec<usize> = (0..nprime).filter(|&v| !zr[v]).collect();
    debug_assert_eq!(i_set.len() + j_set.len(), n + nprime - nu);
    (i_set, j_set, nu)
}

/// MVSP for bipartite-support pencils: `A_0 = 0` and every variable matrix
/// has at most one nonzero entry. The optimum is a coordinate pair from a
/// maximum stable set of the support graph; value `n + n' - nu`.
pub fn mvsp_bipartite<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
) -> Result<MvSubspace<F>, MvspError> {
    let n = lead.n();
    let nprime = lead.nprime();
    if !mat_is_zero(f, &lead.terms[0]) {
        return Err(MvspError::WrongClass {
            expected: "bipartite-support",
            detail: "constant term is nonzero".into(),
        });
    }
    let mut edges = Vec::new();
    for (idx, m) in lead.terms.iter().enumerate().skip(1) {
        let mut found = 0;
        for i in 0..n {
            for j in 0..nprime {
                if !f.is_zero(m.at(i, j)) {
                    edges.push((i, j));
                    found += 1;
                }
            }
        }
        if found > 1 {
            return Err(MvspError::WrongClass {
                expected: "bipartite-support",
                detail: format!("term {} has {} nonzero entries", idx, found),
            });
        }
    }
    let (i_set, j_set, nu) = bipartite_stable_set(n, nprime, &edges);
    let xbasis = coordinate_rows(f, n, &i_set);
    let ybasis = coordinate_cols(f, nprime, &j_set);
    let value = i_set.len() + j_set.len();
    debug_assert_eq!(value, n + nprime - nu);
    Ok(MvSubspace { xbasis, ybasis, value })
}

fn coordinate_rows<F: Field>(f: &F, ambient: usize, idx: &[usize]) -> Mat<F::Elem> {
    let mut m = k_zero(f, idx.len(), ambient);
    for (r, &i) in idx.iter().enumerate() {
        m.set(r, i, f.one());
    }
    m
}

fn coordinate_cols<F: Field>(f: &F, ambient: usize, idx: &[usize]) -> Mat<F::Elem> {
    let mut m = k_zero(f, ambient, idx.len());
    for (c, &j) in idx.iter().enumerate() {
        m.set(j, c, f.one());
    }
    m
}

// ---------------------------------------------------------------------------
// Rank one

/// MVSP for pencils `sum_i x_i a_i b_i^T` (no constant term), given the
/// factor pairs directly. The optimal bipartition comes from matroid
/// intersection on the two vector families; the result is
/// `X = {a_i : i in I}^perp`, `Y = {b_j : j in J}^perp`.
pub fn mvsp_rank1<F: Field>(
    f: &F,
    n: usize,
    nprime: usize,
    pairs: &[(Vec<F::Elem>, Vec<F::Elem>)],
) -> Result<MvSubspace<F>, MvspError> {
    for (a, b) in pairs {
        if a.len() != n || b.len() != nprime {
            return Err(MvspError::WrongClass {
                expected: "rank-one",
                detail: "factor vector of wrong dimension".into(),
            });
        }
    }
    let m = pairs.len();
    let avecs = Mat::from_fn(n, m, |i, k| pairs[k].0[i].clone());
    let bvecs = Mat::from_fn(nprime, m, |i, k| pairs[k].1[i].clone());
    let ma = LinearMatroid::new(f.clone(), avecs);
    let mb = LinearMatroid::new(f.clone(), bvecs);
    let inter = matroid_intersection_core(&ma, &mb);
    // X kills the a-vectors on the unreached side, Y the b-vectors on the
    // reached side; the intersection size prices the optimum.
    let arows: Vec<Vec<F::Elem>> =
        inter.cert_m1.iter().map(|&i| pairs[i].0.clone()).collect();
    let xbasis = if arows.is_empty() {
        k_identity(f, n)
    } else {
        let (_, right, _) = rank_and_kernels(f, &Mat::from_rows(arows));
        right.transpose()
    };
    let brows: Vec<Vec<F::Elem>> =
        inter.cert_m2.iter().map(|&j| pairs[j].1.clone()).collect();
    let ybasis = if brows.is_empty() {
        k_identity(f, nprime)
    } else {
        let (_, right, _) = rank_and_kernels(f, &Mat::from_rows(brows));
        right
    };
    let value = xbasis.rows() + ybasis.cols();
    debug_assert_eq!(value, n + nprime - inter.common.len());
    Ok(MvSubspace { xbasis, ybasis, value })
}

/// Extract factor pairs from a rank-one-class leading pencil and solve.
pub fn mvsp_rank1_from_lead<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
) -> Result<MvSubspace<F>, MvspError> {
    if !mat_is_zero(f, &lead.terms[0]) {
        return Err(MvspError::WrongClass {
            expected: "rank-one",
            detail: "constant term is nonzero".into(),
        });
    }
    let mut pairs = Vec::new();
    for (idx, m) in lead.terms.iter().enumerate().skip(1) {
        if mat_is_zero(f, m) {
            continue;
        }
        match rank_one_factor(f, m) {
            Some(pair) => pairs.push(pair),
            None => {
                return Err(MvspError::WrongClass {
                    expected: "rank-one",
                    detail: format!("term {} has rank at least two", idx),
                })
            }
        }
    }
    mvsp_rank1(f, lead.n(), lead.nprime(), &pairs)
}

// ---------------------------------------------------------------------------
// Layered mixed

/// A layered mixed matrix `(Q; T)`: a numeric block over `K` on top of a
/// generic block whose entries are independent variables, one per support
/// triple `(t_row, col, var)`.
#[derive(Debug, Clone)]
pub struct LayeredMixedMatrix<F: Field> {
    pub q: Mat<F::Elem>,
    pub t_rows: usize,
    pub t_support: Vec<(usize, usize, usize)>,
}

/// MVSP for layered mixed matrices.
///
/// The rank formula `min_J rank Q[J] + |Gamma(J)| + n' - |J|` is minimized by
/// matroid intersection on the ground set of columns plus T-incidences:
/// the first matroid is the linear matroid of Q-columns summed with the
/// partition matroid of T-rows (capacity one), the second the partition
/// matroid whose blocks couple each column with its incidences. The wholly
/// unreachable blocks of the termination cut name the minimizer `J`, and the
/// returned pair is `X = ker_L Q[J] + K^{R_T minus Gamma(J)}`, `Y = K^J`.
pub fn mvsp_layered<F: Field>(
    f: &F,
    l: &LayeredMixedMatrix<F>,
) -> Result<MvSubspace<F>, MvspError> {
    let mq = l.q.rows();
    let nprime = l.q.cols();
    let n = mq + l.t_rows;
    let mut seen_vars = std::collections::HashSet::new();
    for &(r, c, v) in &l.t_support {
        if r >= l.t_rows || c >= nprime {
            return Err(MvspError::WrongClass {
                expected: "layered-mixed",
                detail: format!("support triple ({}, {}, {}) out of range", r, c, v),
            });
        }
        if !seen_vars.insert(v) {
            return Err(MvspError::WrongClass {
                expected: "layered-mixed",
                detail: format!("variable {} appears in two triples", v),
            });
        }
    }
    let mut incidences: Vec<(usize, usize)> =
        l.t_support.iter().map(|&(r, c, _)| (r, c)).collect();
    incidences.sort_unstable();
    incidences.dedup();
    let h = incidences.len();

    let m_q = LinearMatroid::new(f.clone(), l.q.clone());
    let row_part = PartitionMatroid::unit_caps(
        incidences.iter().map(|&(r, _)| r).collect(),
        l.t_rows.max(1),
    );
    let m1 = SumMatroid::new(&m_q, &row_part);
    let mut block_of = Vec::with_capacity(nprime + h);
    block_of.extend(0..nprime);
    block_of.extend(incidences.iter().map(|&(_, c)| c));
    let m2 = PartitionMatroid::unit_caps(block_of, nprime);
    let inter = matroid_intersection_core(&m1, &m2);

    let mut reachable = vec![false; nprime + h];
    for &e in &inter.cert_m2 {
        reachable[e] = true;
    }
    let mut blocked = vec![false; nprime];
    for j in 0..nprime {
        blocked[j] = reachable[j];
    }
    for (k, &(_, c)) in incidences.iter().enumerate() {
        if reachable[nprime + k] {
            blocked[c] = true;
        }
    }
    let j_set: Vec<usize> = (0..nprime).filter(|&j| !blocked[j]).collect();
    let gamma: Vec<bool> = {
        let mut g = vec![false; l.t_rows];
        for &(r, c) in &incidences {
            if !blocked[c] {
                g[r] = true;
            }
        }
        g
    };

    // X = left kernel of Q[J] on the Q-rows, plus free T-rows outside Gamma(J).
    let qj = Mat::from_fn(mq, j_set.len(), |i, k| l.q.at(i, j_set[k]).clone());
    let (rank_qj, _, left) = rank_and_kernels(f, &qj);
    let mut xrows: Vec<Vec<F::Elem>> = Vec::new();
    for i in 0..left.rows() {
        let mut row = vec![f.zero(); n];
        for c in 0..mq {
            row[c] = left.at(i, c).clone();
        }
        xrows.push(row);
    }
    for r in 0..l.t_rows {
        if !gamma[r] {
            let mut row = vec![f.zero(); n];
            row[mq + r] = f.one();
            xrows.push(row);
        }
    }
    let xbasis = if xrows.is_empty() { k_zero(f, 0, n) } else { Mat::from_rows(xrows) };
    let ybasis = coordinate_cols(f, nprime, &j_set);
    let value = xbasis.rows() + ybasis.cols();
    let gamma_size = gamma.iter().filter(|&&g| g).count();
    debug_assert_eq!(value, n + nprime - (rank_qj + gamma_size + nprime - j_set.len()));
    debug_assert_eq!(value, n + nprime - inter.common.len());
    Ok(MvSubspace { xbasis, ybasis, value })
}

/// Recognize a layered-class leading pencil: rows split into a constant part
/// (all of `A_0`) and a generic part where each variable term has exactly one
/// entry. Returns the canonical layered form plus the row order used.
pub fn layered_decompose<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
) -> Result<(LayeredMixedMatrix<F>, Vec<usize>), MvspError> {
    let n = lead.n();
    let nprime = lead.nprime();
    let mut var_entries: Vec<(usize, usize)> = Vec::new();
    let mut t_row_flag = vec![false; n];
    for (idx, m) in lead.terms.iter().enumerate().skip(1) {
        let mut entry = None;
        let mut count = 0;
        for i in 0..n {
            for j in 0..nprime {
                if !f.is_zero(m.at(i, j)) {
                    entry = Some((i, j));
                    count += 1;
                }
            }
        }
        if count > 1 {
            return Err(MvspError::WrongClass {
                expected: "layered-mixed",
                detail: format!("term {} has {} entries", idx, count),
            });
        }
        if let Some((i, j)) = entry {
            t_row_flag[i] = true;
            var_entries.push((i, j));
        }
    }
    for i in 0..n {
        if t_row_flag[i] && (0..nprime).any(|j| !f.is_zero(lead.terms[0].at(i, j))) {
            return Err(MvspError::WrongClass {
                expected: "layered-mixed",
                detail: format!("row {} mixes constants and variables", i),
            });
        }
    }
    let q_rows: Vec<usize> = (0..n).filter(|&i| !t_row_flag[i]).collect();
    let generic_rows: Vec<usize> = (0..n).filter(|&i| t_row_flag[i]).collect();
    let mut t_index = vec![usize::MAX; n];
    for (k, &r) in generic_rows.iter().enumerate() {
        t_index[r] = k;
    }
    let q = Mat::from_fn(q_rows.len(), nprime, |i, j| lead.terms[0].at(q_rows[i], j).clone());
    let t_support: Vec<(usize, usize, usize)> = var_entries
        .iter()
        .enumerate()
        .map(|(v, &(i, j))| (t_index[i], j, v))
        .collect();
    let t_rows = generic_rows.len();
    let mut order = q_rows;
    order.extend(generic_rows);
    Ok((LayeredMixedMatrix { q, t_rows, t_support }, order))
}

/// Layered MVSP on a leading pencil, permuting rows to the canonical layered
/// order and back.
pub fn mvsp_layered_from_lead<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
) -> Result<MvSubspace<F>, MvspError> {
    let (layered, order) = layered_decompose(f, lead)?;
    let sub = mvsp_layered(f, &layered)?;
    let n = lead.n();
    let xbasis = Mat::from_fn(sub.xbasis.rows(), n, |i, j| {
        // Column j of the original corresponds to the canonical position of
        // row j in the layered order.
        let canon = order.iter().position(|&r| r == j).expect("order is a permutation");
        sub.xbasis.at(i, canon).clone()
    });
    Ok(MvSubspace { xbasis, ybasis: sub.ybasis, value: sub.value })
}

// ---------------------------------------------------------------------------
// Block MVSP reductions

/// A matrix with a block partition of its rows and columns.
#[derive(Debug, Clone)]
pub struct BlockMatrix<F: Field> {
    pub row_sizes: Vec<usize>,
    pub col_sizes: Vec<usize>,
    pub mat: Mat<F::Elem>,
}

impl<F: Field> BlockMatrix<F> {
    pub fn row_offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for &s in &self.row_sizes {
            off.push(off.last().unwrap() + s);
        }
        off
    }

    pub fn col_offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for &s in &self.col_sizes {
            off.push(off.last().unwrap() + s);
        }
        off
    }
}

/// Reduce block-MVSP to plain MVSP: one variable per block, each term the
/// block embedded at its offsets, no constant term.
pub fn block_mvsp_to_mvsp<F: Field>(
    f: &F,
    b: &BlockMatrix<F>,
) -> Result<LeadingPencil<F>, MvspError> {
    let n: usize = b.row_sizes.iter().sum();
    let nprime: usize = b.col_sizes.iter().sum();
    if n != b.mat.rows() || nprime != b.mat.cols() {
        return Err(MvspError::InconsistentPartition {
            detail: format!(
                "block sizes tile {}x{}, matrix is {}x{}",
                n,
                nprime,
                b.mat.rows(),
                b.mat.cols()
            ),
        });
    }
    let roff = b.row_offsets();
    let coff = b.col_offsets();
    let mut terms = vec![k_zero(f, n, nprime)];
    for alpha in 0..b.row_sizes.len() {
        for beta in 0..b.col_sizes.len() {
            let mut t = k_zero(f, n, nprime);
            for i in roff[alpha]..roff[alpha + 1] {
                for j in coff[beta]..coff[beta + 1] {
                    t.set(i, j, b.mat.at(i, j).clone());
                }
            }
            terms.push(t);
        }
    }
    Ok(LeadingPencil { terms })
}

/// The converse reduction: embed a pencil with terms `A_0..A_m` into an
/// `(m+1) x (m+1)` block matrix
/// `(A_0 I; A_1 I I; ...; A_m ... I)` whose block-MVSP optimum exceeds the
/// pencil's MVSP optimum by exactly `m * n`.
pub fn mvsp_to_block<F: Field>(f: &F, lead: &LeadingPencil<F>) -> BlockMatrix<F> {
    let n = lead.n();
    let nprime = lead.nprime();
    let m = lead.terms.len() - 1;
    let row_sizes = vec![n; m + 1];
    let mut col_sizes = vec![nprime];
    col_sizes.extend(std::iter::repeat(n).take(m));
    let total_rows = n * (m + 1);
    let total_cols = nprime + n * m;
    let mut mat = k_zero(f, total_rows, total_cols);
    for (alpha, term) in lead.terms.iter().enumerate() {
        for i in 0..n {
            for j in 0..nprime {
                mat.set(alpha * n + i, j, term.at(i, j).clone());
            }
        }
    }
    for beta in 1..=m {
        let cbase = nprime + (beta - 1) * n;
        for i in 0..n {
            // Identity above the diagonal block and on it.
            mat.set((beta - 1) * n + i, cbase + i, f.one());
            mat.set(beta * n + i, cbase + i, f.one());
        }
    }
    BlockMatrix { row_sizes, col_sizes, mat }
}
