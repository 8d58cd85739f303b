//! The linear symbolic matrix (pencil) `A = A_0 + A_1 x_1 + ... + A_m x_m`
//! with truncated Laurent coefficients: normalization, steepest-descent
//! moves, transform accounting, the randomized commutative degree oracle,
//! and structure probing.

use std::fmt;

use crate::exec::{map_range, ExecMode};
use crate::field::{Field, GfP, Rationals};
use crate::matrix::{k_rank, k_zero, Mat};
use crate::poly::{fmt_laurent, parse_laurent, Deg, Laurent};

/// One coefficient matrix, stored as sorted sparse entries. Dense matrices
/// are simply fully populated; single-entry variable terms stay single
/// entries across coordinate moves.
#[derive(Clone, PartialEq, Debug)]
pub struct Term<F: Field> {
    /// `(row, col, value)`, sorted by `(row, col)`, values nonzero.
    entries: Vec<(usize, usize, Laurent<F>)>,
}

impl<F: Field> Term<F> {
    pub fn zero() -> Self {
        Term { entries: Vec::new() }
    }

    pub fn from_entries(mut entries: Vec<(usize, usize, Laurent<F>)>) -> Self {
        entries.retain(|(_, _, v)| !v.is_zero());
        entries.sort_by_key(|&(i, j, _)| (i, j));
        debug_assert!(entries.windows(2).all(|w| (w[0].0, w[0].1) != (w[1].0, w[1].1)));
        Term { entries }
    }

    pub fn from_dense(f: &F, m: &Mat<Laurent<F>>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m.at(i, j);
                if !v.is_zero() {
                    entries.push((i, j, v.clone()));
                }
            }
        }
        let _ = f;
        Term { entries }
    }

    pub fn entries(&self) -> &[(usize, usize, Laurent<F>)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self, rows: usize, cols: usize) -> Mat<Laurent<F>> {
        let mut m = Mat::fill(rows, cols, Laurent::zero());
        for (i, j, v) in &self.entries {
            m.set(*i, *j, v.clone());
        }
        m
    }

    pub fn max_degree(&self) -> Deg {
        self.entries
            .iter()
            .map(|(_, _, v)| v.deg())
            .max()
            .unwrap_or(Deg::NegInf)
    }

    pub fn shift(&self, k: i64) -> Self {
        Term {
            entries: self
                .entries
                .iter()
                .map(|(i, j, v)| (*i, *j, v.shift(k)))
                .collect(),
        }
    }

    /// The `t^0` coefficient matrix (leading matrix of a proper term).
    pub fn coeff0(&self, f: &F, rows: usize, cols: usize) -> Mat<F::Elem> {
        let mut m = k_zero(f, rows, cols);
        for (i, j, v) in &self.entries {
            m.set(*i, *j, v.coeff_at(f, 0));
        }
        m
    }
}

/// Errors raised by pencil operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PencilError {
    NonSquare { n: usize, nprime: usize },
    /// An entry of positive degree where a proper pencil is required.
    NotProper { term: usize, row: usize, col: usize },
    /// The vanishing precondition of a move fails (the leading block is not
    /// zero to the requested depth) at the given position.
    MoveInfeasible { term: usize, row: usize, col: usize },
    /// The leading block stays zero at every depth: the degree is minus
    /// infinity.
    FeasibilityUnbounded,
    /// The field has too few elements for the requested randomized
    /// guarantee.
    FieldTooSmall { needed: u64, available: u64 },
}

impl fmt::Display for PencilError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PencilError::NonSquare { n, nprime } => {
                write!(f, "pencil is {n} x {nprime}, expected square")
            }
            PencilError::NotProper { term, row, col } => {
                write!(f, "term {term} entry ({row}, {col}) has positive degree")
            }
            PencilError::MoveInfeasible { term, row, col } => write!(
                f,
                "leading block is nonzero at term {term} entry ({row}, {col})"
            ),
            PencilError::FeasibilityUnbounded => {
                write!(f, "move depth is unbounded (degree is minus infinity)")
            }
            PencilError::FieldTooSmall { needed, available } => write!(
                f,
                "field with {available} sample points cannot give the requested guarantee (needs {needed})"
            ),
        }
    }
}

impl std::error::Error for PencilError {}

/// The symbolic matrix `A_0 + sum A_i x_i` with Laurent coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct Pencil<F: Field> {
    pub n: usize,
    pub nprime: usize,
    /// `terms[0]` is the constant matrix `A_0`; `terms[i]` is `A_i`.
    pub terms: Vec<Term<F>>,
    pub var_names: Option<Vec<String>>,
}

/// The leading pencil: the `t^0` coefficient matrices `A_i^0` of a proper
/// pencil, the input to MVSP.
#[derive(Clone, Debug)]
pub struct LeadingPencil<F: Field> {
    /// `terms[0]` corresponds to `A_0`.
    pub terms: Vec<Mat<F::Elem>>,
}

impl<F: Field> LeadingPencil<F> {
    pub fn n(&self) -> usize {
        self.terms[0].rows()
    }

    pub fn nprime(&self) -> usize {
        self.terms[0].cols()
    }
}

impl<F: Field> Pencil<F> {
    pub fn new(n: usize, nprime: usize, terms: Vec<Term<F>>) -> Self {
        assert!(!terms.is_empty(), "a pencil needs at least the constant term");
        for t in &terms {
            for (i, j, _) in t.entries() {
                assert!(*i < n && *j < nprime, "entry out of bounds");
            }
        }
        Pencil { n, nprime, terms, var_names: None }
    }

    pub fn from_dense_terms(f: &F, n: usize, nprime: usize, terms: Vec<Mat<Laurent<F>>>) -> Self {
        Pencil::new(
            n,
            nprime,
            terms.iter().map(|m| Term::from_dense(f, m)).collect(),
        )
    }

    /// Number of variables `m` (the constant term is not a variable).
    pub fn num_vars(&self) -> usize {
        self.terms.len() - 1
    }

    /// Maximum entry degree over all terms (the bound `l`); `NegInf` for the
    /// zero pencil.
    pub fn max_entry_degree(&self) -> Deg {
        self.terms
            .iter()
            .map(|t| t.max_degree())
            .max()
            .unwrap_or(Deg::NegInf)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_zero())
    }

    /// Shift every entry by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        Pencil {
            n: self.n,
            nprime: self.nprime,
            terms: self.terms.iter().map(|t| t.shift(k)).collect(),
            var_names: self.var_names.clone(),
        }
    }

    /// Substitute field values for the variables, leaving a matrix over the
    /// Laurent ring.
    pub fn substitute(&self, f: &F, values: &[F::Elem]) -> Mat<Laurent<F>> {
        assert_eq!(values.len(), self.num_vars());
        let mut acc = Mat::fill(self.n, self.nprime, Laurent::zero());
        for (idx, term) in self.terms.iter().enumerate() {
            let scale = if idx == 0 { f.one() } else { values[idx - 1].clone() };
            if f.is_zero(&scale) {
                continue;
            }
            for (i, j, v) in term.entries() {
                let add = Laurent::scale(f, v, &scale);
                let cur = Laurent::add(f, acc.at(*i, *j), &add);
                acc.set(*i, *j, cur);
            }
        }
        acc
    }
}

/// Step 0 of the steepest descent: shift by `t^{-l}` so every entry is
/// proper, and start the upper bound at `Dstar = n*l`.
///
/// # Errors
/// `NonSquare` for rectangular pencils. Entries must be polynomial in `t`
/// (nonnegative orders); this is the caller's obligation and is asserted.
pub fn normalize<F: Field>(a: &Pencil<F>) -> Result<(Pencil<F>, i64), PencilError> {
    if a.n != a.nprime {
        return Err(PencilError::NonSquare { n: a.n, nprime: a.nprime });
    }
    for t in &a.terms {
        for (_, _, v) in t.entries() {
            debug_assert!(v.ord() >= Deg::Fin(0), "polynomial entries required");
        }
    }
    let ell = match a.max_entry_degree() {
        Deg::Fin(d) => d,
        Deg::NegInf => 0, // zero pencil; flagged singular downstream
    };
    Ok((a.shift(-ell), a.n as i64 * ell))
}

/// Leading matrices `A_i^0` of a proper pencil.
///
/// # Errors
/// `NotProper` with the first offending term and position.
pub fn leading<F: Field>(f: &F, a: &Pencil<F>) -> Result<LeadingPencil<F>, PencilError> {
    let mut terms = Vec::with_capacity(a.terms.len());
    for (idx, t) in a.terms.iter().enumerate() {
        for (i, j, v) in t.entries() {
            if v.deg() > Deg::Fin(0) {
                return Err(PencilError::NotProper { term: idx, row: *i, col: *j });
            }
        }
        terms.push(t.coeff0(f, a.n, a.nprime));
    }
    Ok(LeadingPencil { terms })
}

/// Sparsity plan for `S * A_i * T`: nonzero entries of each column of `S`
/// and each row of `T`, so sparse terms transform in time proportional to
/// their support.
struct TransformPlan<F: Field> {
    s_cols: Vec<Vec<(usize, F::Elem)>>,
    t_rows: Vec<Vec<(usize, F::Elem)>>,
}

impl<F: Field> TransformPlan<F> {
    fn new(f: &F, s: &Mat<F::Elem>, t: &Mat<F::Elem>) -> Self {
        let s_cols = (0..s.cols())
            .map(|k| {
                (0..s.rows())
                    .filter(|&r| !f.is_zero(s.at(r, k)))
                    .map(|r| (r, s.at(r, k).clone()))
                    .collect()
            })
            .collect();
        let t_rows = (0..t.rows())
            .map(|j| {
                (0..t.cols())
                    .filter(|&c| !f.is_zero(t.at(j, c)))
                    .map(|c| (c, t.at(j, c).clone()))
                    .collect()
            })
            .collect();
        TransformPlan { s_cols, t_rows }
    }

    fn apply(&self, f: &F, term: &Term<F>, rows: usize, cols: usize) -> Term<F> {
        let mut acc: Mat<Laurent<F>> = Mat::fill(rows, cols, Laurent::zero());
        for (i, j, v) in term.entries() {
            for (r, sv) in &self.s_cols[*i] {
                let scaled = Laurent::scale(f, v, sv);
                for (c, tv) in &self.t_rows[*j] {
                    let add = Laurent::scale(f, &scaled, tv);
                    let cur = Laurent::add(f, acc.at(*r, *c), &add);
                    acc.set(*r, *c, cur);
                }
            }
        }
        Term::from_dense(f, &acc)
    }
}

/// Step 3 / 3': replace `A_i` by `(t^{kappa 1_{<=r}}) S A_i T (t^{-kappa 1_{>s}})`.
///
/// Requires `S`, `T` nonsingular over `K` and every `(S A_i T)` entry of the
/// first `r` rows by first `s` columns block to vanish to depth `kappa`
/// (degree at most `-kappa`). The result is proper whenever the input is.
///
/// # Errors
/// `MoveInfeasible` when the vanishing precondition fails.
pub fn apply_move<F: Field>(
    f: &F,
    a: &Pencil<F>,
    s: &Mat<F::Elem>,
    t: &Mat<F::Elem>,
    r: usize,
    s_dim: usize,
    kappa: i64,
) -> Result<Pencil<F>, PencilError> {
    assert!(kappa >= 1, "kappa must be at least one");
    assert!(r <= a.n && s_dim <= a.nprime);
    let row_exp: Vec<i64> = (0..a.n).map(|i| if i < r { kappa } else { 0 }).collect();
    let col_exp: Vec<i64> =
        (0..a.nprime).map(|j| if j >= s_dim { -kappa } else { 0 }).collect();
    apply_exponent_move(f, a, s, t, &row_exp, &col_exp)
}

/// General diagonal-exponent move: `A <- (t^{row_exp}) S A T (t^{col_exp})`.
///
/// Requires `S`, `T` nonsingular over `K` and the result proper: every entry
/// of the transformed pencil must satisfy `deg + row_exp[i] + col_exp[j] <= 0`.
/// Dual-feasible exponent vectors from an assignment problem always satisfy
/// this by construction.
///
/// # Errors
/// `MoveInfeasible` at the first entry that would become improper.
pub fn apply_exponent_move<F: Field>(
    f: &F,
    a: &Pencil<F>,
    s: &Mat<F::Elem>,
    t: &Mat<F::Elem>,
    row_exp: &[i64],
    col_exp: &[i64],
) -> Result<Pencil<F>, PencilError> {
    assert_eq!(a.n, a.nprime, "moves require a square pencil");
    assert_eq!(row_exp.len(), a.n);
    assert_eq!(col_exp.len(), a.nprime);
    assert_eq!(k_rank(f, s), a.n, "S must be nonsingular");
    assert_eq!(k_rank(f, t), a.nprime, "T must be nonsingular");
    let plan = TransformPlan::new(f, s, t);
    let mut new_terms = Vec::with_capacity(a.terms.len());
    for (idx, term) in a.terms.iter().enumerate() {
        let transformed = plan.apply(f, term, a.n, a.nprime);
        for (i, j, v) in transformed.entries() {
            if v.deg() > Deg::Fin(-(row_exp[*i] + col_exp[*j])) {
                return Err(PencilError::MoveInfeasible { term: idx, row: *i, col: *j });
            }
        }
        let shifted = Term::from_entries(
            transformed
                .entries()
                .iter()
                .map(|(i, j, v)| (*i, *j, v.shift(row_exp[*i] + col_exp[*j])))
                .collect(),
        );
        new_terms.push(shifted);
    }
    Ok(Pencil {
        n: a.n,
        nprime: a.nprime,
        terms: new_terms,
        var_names: a.var_names.clone(),
    })
}

/// The minimum feasible depth `kappa >= 1` for a move: the smallest shift
/// that brings a nonzero coefficient of the transformed `r x s` block to the
/// surface.
///
/// # Errors
/// `MoveInfeasible` when the block's leading coefficients are not all zero
/// (no `kappa >= 1` is feasible); `FeasibilityUnbounded` when the block is
/// identically zero (every `kappa` is feasible, certifying minus infinity).
pub fn kappa_star<F: Field>(
    f: &F,
    a: &Pencil<F>,
    s: &Mat<F::Elem>,
    t: &Mat<F::Elem>,
    r: usize,
    s_dim: usize,
) -> Result<i64, PencilError> {
    let plan = TransformPlan::new(f, s, t);
    let mut best: Option<i64> = None;
    for (idx, term) in a.terms.iter().enumerate() {
        let transformed = plan.apply(f, term, a.n, a.nprime);
        for (i, j, v) in transformed.entries() {
            if *i < r && *j < s_dim {
                match v.deg() {
                    Deg::Fin(d) if d > -1 => {
                        return Err(PencilError::MoveInfeasible { term: idx, row: *i, col: *j })
                    }
                    Deg::Fin(d) => {
                        let k = -d;
                        if best.map_or(true, |b| k < b) {
                            best = Some(k);
                        }
                    }
                    Deg::NegInf => {}
                }
            }
        }
    }
    best.ok_or(PencilError::FeasibilityUnbounded)
}

/// One recorded move: `A <- (t^{row_exp}) S A T (t^{col_exp})` where the
/// exponent vectors apply entrywise as diagonal `t`-power scalings.
#[derive(Clone, Debug)]
pub struct MoveRecord<F: Field> {
    pub s: Mat<F::Elem>,
    pub t: Mat<F::Elem>,
    pub row_exp: Vec<i64>,
    pub col_exp: Vec<i64>,
    pub r: usize,
    pub s_dim: usize,
    pub kappa: i64,
    pub dstar_after: i64,
}

/// The accumulated transform: a replayable list of moves plus the running
/// upper bound `Dstar`.
#[derive(Clone, Debug)]
pub struct TransformLog<F: Field> {
    /// Normalization shift applied before the first move.
    pub ell: i64,
    pub n: usize,
    pub moves: Vec<MoveRecord<F>>,
    pub dstar: i64,
}

impl<F: Field> TransformLog<F> {
    pub fn new(ell: i64, n: usize) -> Self {
        TransformLog { ell, n, moves: Vec::new(), dstar: n as i64 * ell }
    }

    pub fn record(
        &mut self,
        s: Mat<F::Elem>,
        t: Mat<F::Elem>,
        r: usize,
        s_dim: usize,
        kappa: i64,
    ) {
        let n = self.n;
        let row_exp = (0..n).map(|i| if i < r { kappa } else { 0 }).collect();
        let col_exp = (0..n).map(|j| if j >= s_dim { -kappa } else { 0 }).collect();
        self.record_general(s, t, row_exp, col_exp, r, s_dim, kappa);
    }

    /// Record a general diagonal-exponent move. `Dstar` drops by the total
    /// exponent mass, the degree of the determinant of the two `t`-power
    /// factors. `kappa` is carried for reporting only.
    pub fn record_general(
        &mut self,
        s: Mat<F::Elem>,
        t: Mat<F::Elem>,
        row_exp: Vec<i64>,
        col_exp: Vec<i64>,
        r: usize,
        s_dim: usize,
        kappa: i64,
    ) {
        let total: i64 = row_exp.iter().sum::<i64>() + col_exp.iter().sum::<i64>();
        self.dstar -= total;
        self.moves.push(MoveRecord {
            s,
            t,
            row_exp,
            col_exp,
            r,
            s_dim,
            kappa,
            dstar_after: self.dstar,
        });
    }

    /// Replay every move against the normalized original pencil. The result
    /// must equal the solver's working pencil exactly.
    pub fn replay(&self, f: &F, normalized: &Pencil<F>) -> Result<Pencil<F>, PencilError> {
        let mut cur = normalized.clone();
        for mv in &self.moves {
            cur = apply_exponent_move(f, &cur, &mv.s, &mv.t, &mv.row_exp, &mv.col_exp)?;
        }
        Ok(cur)
    }

    /// Cumulative `t`-power applied to each original row (left) and column
    /// (right), tracked through the `K`-matrix factors. Meaningful when all
    /// recorded `S`, `T` are monomial (scaled permutation) matrices, as in
    /// coordinate solver runs; returns `None` otherwise.
    pub fn cumulative_exponents(&self, f: &F) -> Option<(Vec<i64>, Vec<i64>)> {
        self.exponent_snapshots(f)
            .map(|snaps| snaps.last().cloned().unwrap_or((vec![0; self.n], vec![0; self.n])))
    }

    /// Cumulative exponents after each move, in original coordinates: the
    /// running dual pair of the apartment assignment problem. Same monomial
    /// requirement as [`TransformLog::cumulative_exponents`].
    pub fn exponent_snapshots(&self, f: &F) -> Option<Vec<(Vec<i64>, Vec<i64>)>> {
        let n = self.n;
        // row_of[i] = current position of original row i; exponents indexed
        // by original row/column.
        let mut row_of: Vec<usize> = (0..n).collect();
        let mut col_of: Vec<usize> = (0..n).collect();
        let mut p = vec![0i64; n];
        let mut q = vec![0i64; n];
        let mut snaps = Vec::with_capacity(self.moves.len());
        for mv in &self.moves {
            let rperm = monomial_perm(f, &mv.s)?;
            // S acts on the left: new row r = sum_k S[r,k] old row k, so the
            // original row currently at position k moves to position r with
            // S[r,k] nonzero.
            let mut new_row_of = vec![0usize; n];
            for orig in 0..n {
                new_row_of[orig] = rperm[row_of[orig]];
            }
            row_of = new_row_of;
            let cperm = monomial_perm_cols(f, &mv.t)?;
            let mut new_col_of = vec![0usize; n];
            for orig in 0..n {
                new_col_of[orig] = cperm[col_of[orig]];
            }
            col_of = new_col_of;
            for orig in 0..n {
                p[orig] += mv.row_exp[row_of[orig]];
                q[orig] += mv.col_exp[col_of[orig]];
            }
            snaps.push((p.clone(), q.clone()));
        }
        Some(snaps)
    }
}

/// For a monomial matrix, the destination row of each source index under
/// left multiplication; `None` if not monomial.
fn monomial_perm<F: Field>(f: &F, m: &Mat<F::Elem>) -> Option<Vec<usize>> {
    let n = m.rows();
    let mut dest = vec![usize::MAX; n];
    for r in 0..n {
        let mut hits = 0;
        for k in 0..n {
            if !f.is_zero(m.at(r, k)) {
                if dest[k] != usize::MAX {
                    return None;
                }
                dest[k] = r;
                hits += 1;
            }
        }
        if hits != 1 {
            return None;
        }
    }
    Some(dest)
}

/// For a monomial matrix, the destination column of each source column
/// under right multiplication.
fn monomial_perm_cols<F: Field>(f: &F, m: &Mat<F::Elem>) -> Option<Vec<usize>> {
    monomial_perm(f, &m.transpose())
}

/// Outcome of the randomized commutative oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    /// Max over trials; never exceeds the true `deg det`.
    pub value: Deg,
    /// Schwartz-Zippel failure bound for a single trial.
    pub per_trial_failure: f64,
    /// Probability that every trial missed the true value.
    pub aggregate_failure: f64,
    pub trials: u32,
}

/// Monte Carlo `deg det`: substitute independent uniform field values for
/// the variables and take the maximum exact [`crate::matrix::deg_det`] over
/// trials. One-sided: the result never exceeds the true value, and equals it
/// except with the reported probability.
///
/// # Errors
/// `FieldTooSmall` when a single trial cannot fail with probability below
/// one.
pub fn commutative_degdet_oracle<F: Field>(
    f: &F,
    a: &Pencil<F>,
    trials: u32,
    seed: u64,
) -> Result<OracleReport, PencilError> {
    commutative_degdet_oracle_mode(f, a, trials, seed, ExecMode::Auto)
}

pub fn commutative_degdet_oracle_mode<F: Field>(
    f: &F,
    a: &Pencil<F>,
    trials: u32,
    seed: u64,
    mode: ExecMode,
) -> Result<OracleReport, PencilError> {
    use rand::{Rng, SeedableRng};
    assert_eq!(a.n, a.nprime, "oracle requires a square pencil");
    let n = a.n as u64;
    let ell = match a.max_entry_degree() {
        Deg::Fin(d) => d.unsigned_abs().max(1),
        Deg::NegInf => 1,
    };
    // Sample domain: the whole field, capped at 1e6 points for infinite K.
    let points = f.order().unwrap_or(1_000_000).min(1_000_000);
    let needed = n * n * ell;
    if a.num_vars() > 0 && needed >= points {
        return Err(PencilError::FieldTooSmall { needed, available: points });
    }
    let per_trial = if a.num_vars() == 0 {
        0.0
    } else {
        needed as f64 / points as f64
    };
    let effective_trials = if a.num_vars() == 0 { 1 } else { trials.max(1) };
    let values = map_range(mode, effective_trials as usize, |k| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let subs: Vec<F::Elem> = (0..a.num_vars())
            .map(|_| f.from_i64(rng.gen_range(0..points) as i64))
            .collect();
        let m = a.substitute(f, &subs);
        let r = m.map(|l| l.to_ratfn(f));
        crate::matrix::deg_det(f, &r)
    });
    let value = values.into_iter().max().unwrap_or(Deg::NegInf);
    Ok(OracleReport {
        value,
        per_trial_failure: per_trial,
        aggregate_failure: per_trial.powi(effective_trials as i32),
        trials: effective_trials,
    })
}

/// Structural class of a pencil, used to route MVSP to a matching solver.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PencilClass {
    /// `A_0 = 0` and every variable matrix has a single nonzero entry.
    BipartiteSupport,
    /// `A_0 = 0` and every variable matrix has rank at most one over `K(t)`.
    PureRank1,
    /// Rows split into a constant-only part and a part whose entries are
    /// single-variable monomials, one entry per variable.
    LayeredMixed,
    General,
}

/// Detect the structural class. Checks run from most to least specific:
/// bipartite support, pure rank one, layered mixed, then general.
pub fn block_structure_probe<F: Field>(f: &F, a: &Pencil<F>) -> PencilClass {
    let a0_zero = a.terms[0].is_zero();
    let vars = &a.terms[1..];
    if a0_zero && vars.iter().all(|t| t.entry_count() <= 1) {
        return PencilClass::BipartiteSupport;
    }
    if a0_zero && vars.iter().all(|t| laurent_rank_le_1(f, t)) {
        return PencilClass::PureRank1;
    }
    if is_layered(a) {
        return PencilClass::LayeredMixed;
    }
    PencilClass::General
}

/// Rank <= 1 over `K(t)` via anchored two-by-two minors (no division).
fn laurent_rank_le_1<F: Field>(f: &F, t: &Term<F>) -> bool {
    let entries = t.entries();
    let Some((ai, aj, av)) = entries.first() else {
        return true;
    };
    for (i, j, v) in entries.iter().skip(1) {
        if i == ai || j == aj {
            continue;
        }
        // anchored minor rows {ai, i} cols {aj, j}
        let b = entries
            .iter()
            .find(|(r, c, _)| r == ai && c == j)
            .map(|(_, _, x)| x.clone())
            .unwrap_or_else(Laurent::zero);
        let c = entries
            .iter()
            .find(|(r, c2, _)| r == i && c2 == aj)
            .map(|(_, _, x)| x.clone())
            .unwrap_or_else(Laurent::zero);
        let lhs = Laurent::mul(f, av, v);
        let rhs = Laurent::mul(f, &b, &c);
        if lhs != rhs {
            return false;
        }
    }
    // Entries sharing the anchor row or column never witness rank 2 against
    // the anchor, but two of them can between themselves when the anchor
    // row/col pattern is degenerate; recheck entries off the anchor row.
    let off_rows: Vec<&(usize, usize, Laurent<F>)> =
        entries.iter().filter(|(i, _, _)| i != ai).collect();
    for (idx, (i1, j1, v1)) in off_rows.iter().enumerate() {
        for (i2, j2, v2) in off_rows.iter().skip(idx + 1) {
            if i1 == i2 || j1 == j2 {
                continue;
            }
            let b = entries
                .iter()
                .find(|(r, c, _)| r == i1 && c == j2)
                .map(|(_, _, x)| x.clone())
                .unwrap_or_else(Laurent::zero);
            let c = entries
                .iter()
                .find(|(r, c2, _)| r == i2 && c2 == j1)
                .map(|(_, _, x)| x.clone())
                .unwrap_or_else(Laurent::zero);
            let lhs = Laurent::mul(f, v1, v2);
            let rhs = Laurent::mul(f, &b, &c);
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

fn is_layered<F: Field>(a: &Pencil<F>) -> bool {
    let vars = &a.terms[1..];
    if vars.is_empty() {
        return false;
    }
    if !vars.iter().all(|t| t.entry_count() <= 1) {
        return false;
    }
    // Rows hosting variables carry no constant part, and no two variables
    // share an entry position.
    let mut var_rows = std::collections::BTreeSet::new();
    let mut positions = std::collections::BTreeSet::new();
    for t in vars {
        for (i, j, _) in t.entries() {
            var_rows.insert(*i);
            if !positions.insert((*i, *j)) {
                return false;
            }
        }
    }
    a.terms[0]
        .entries()
        .iter()
        .all(|(i, _, _)| !var_rows.contains(i))
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

/// Error in a structured pencil document, with a JSON-path-style location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocError {
    pub path: String,
    pub message: String,
}

impl DocError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        DocError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for DocError {}

/// A pencil over the field declared by its document.
#[derive(Clone, Debug)]
pub enum AnyPencil {
    GfP(GfP, Pencil<GfP>),
    Rational(Rationals, Pencil<Rationals>),
}

/// Parse the field block `{"kind":"gfp","p":...}` or `{"kind":"rational"}`.
pub fn parse_field_doc(v: &serde_json::Value, path: &str) -> Result<FieldSpec, DocError> {
    let kind = v
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| DocError::new(format!("{path}.kind"), "expected a string"))?;
    match kind {
        "gfp" => {
            let p = v
                .get("p")
                .and_then(|p| p.as_u64())
                .ok_or_else(|| DocError::new(format!("{path}.p"), "expected a positive integer"))?;
            Ok(FieldSpec::GfP(p))
        }
        "rational" => Ok(FieldSpec::Rational),
        other => Err(DocError::new(
            format!("{path}.kind"),
            format!("unknown field kind `{other}`"),
        )),
    }
}

/// Declared ground field of a document.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FieldSpec {
    GfP(u64),
    Rational,
}

impl FieldSpec {
    pub fn to_json(self) -> serde_json::Value {
        match self {
            FieldSpec::GfP(p) => serde_json::json!({"kind": "gfp", "p": p}),
            FieldSpec::Rational => serde_json::json!({"kind": "rational"}),
        }
    }
}

/// Parse a pencil document:
/// `{"field":..., "n":..., "nprime":..., "terms":[{"var":0|1|..., "entries":[["<laurent>",...],...]},...]}`.
/// Variable index 0 is the constant term. Dimension mismatches are rejected
/// with positional diagnostics.
pub fn parse_pencil_doc(v: &serde_json::Value) -> Result<AnyPencil, DocError> {
    let field = v
        .get("field")
        .ok_or_else(|| DocError::new("field", "missing"))?;
    match parse_field_doc(field, "field")? {
        FieldSpec::GfP(p) => {
            let f = GfP::new(p)
                .map_err(|e| DocError::new("field.p", e.to_string()))?;
            let pencil = parse_pencil_body(&f, v)?;
            Ok(AnyPencil::GfP(f, pencil))
        }
        FieldSpec::Rational => {
            let f = Rationals;
            let pencil = parse_pencil_body(&f, v)?;
            Ok(AnyPencil::Rational(f, pencil))
        }
    }
}

fn parse_pencil_body<F: Field>(f: &F, v: &serde_json::Value) -> Result<Pencil<F>, DocError> {
    let n = v
        .get("n")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| DocError::new("n", "expected a positive integer"))? as usize;
    let nprime = v
        .get("nprime")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| DocError::new("nprime", "expected a positive integer"))?
        as usize;
    if n == 0 || nprime == 0 {
        return Err(DocError::new("n", "dimensions must be positive"));
    }
    let terms_json = v
        .get("terms")
        .and_then(|t| t.as_array())
        .ok_or_else(|| DocError::new("terms", "expected an array"))?;
    let mut by_var: Vec<Option<Term<F>>> = Vec::new();
    for (ti, tj) in terms_json.iter().enumerate() {
        let path = format!("terms[{ti}]");
        let var = tj
            .get("var")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| DocError::new(format!("{path}.var"), "expected a nonnegative integer"))?
            as usize;
        let entries = tj
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| DocError::new(format!("{path}.entries"), "expected an array of rows"))?;
        if entries.len() != n {
            return Err(DocError::new(
                format!("{path}.entries"),
                format!("expected {n} rows, found {}", entries.len()),
            ));
        }
        let mut dense = Mat::fill(n, nprime, Laurent::zero());
        for (i, row) in entries.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| {
                DocError::new(format!("{path}.entries[{i}]"), "expected an array of strings")
            })?;
            if row.len() != nprime {
                return Err(DocError::new(
                    format!("{path}.entries[{i}]"),
                    format!("expected {nprime} entries, found {}", row.len()),
                ));
            }
            for (j, cell) in row.iter().enumerate() {
                let srcpath = format!("{path}.entries[{i}][{j}]");
                let s = cell
                    .as_str()
                    .ok_or_else(|| DocError::new(srcpath.clone(), "expected a string"))?;
                let l = parse_laurent(f, s)
                    .map_err(|e| DocError::new(srcpath, e.to_string()))?;
                dense.set(i, j, l);
            }
        }
        if by_var.len() <= var {
            by_var.resize(var + 1, None);
        }
        if by_var[var].is_some() {
            return Err(DocError::new(
                format!("{path}.var"),
                format!("duplicate term for variable {var}"),
            ));
        }
        by_var[var] = Some(Term::from_dense(f, &dense));
    }
    if by_var.is_empty() {
        by_var.push(Some(Term::zero()));
    }
    let terms = by_var
        .into_iter()
        .map(|t| t.unwrap_or_else(Term::zero))
        .collect();
    Ok(Pencil::new(n, nprime, terms))
}

/// Serialize a pencil back to document form.
pub fn pencil_to_json<F: Field>(f: &F, spec: FieldSpec, a: &Pencil<F>) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = a
        .terms
        .iter()
        .enumerate()
        .map(|(var, t)| {
            let dense = t.to_dense(a.n, a.nprime);
            let rows: Vec<serde_json::Value> = (0..a.n)
                .map(|i| {
                    serde_json::Value::Array(
                        (0..a.nprime)
                            .map(|j| serde_json::Value::String(fmt_laurent(f, dense.at(i, j))))
                            .collect(),
                    )
                })
                .collect();
            serde_json::json!({"var": var, "entries": rows})
        })
        .collect();
    serde_json::json!({
        "field": spec.to_json(),
        "n": a.n,
        "nprime": a.nprime,
        "terms": terms,
    })
}
