//! Degree of the Dieudonné determinant of a square symbolic pencil.
//!
//! Two exact algorithms over the same move machinery from [`crate::pencil`]:
//!
//! - [`sda_degdet`]: steepest descent on the running upper bound `Dstar`.
//!   Each round solves MVSP for the leading pencil; an optimal vanishing
//!   pair either certifies `deg Det = Dstar` (value at most `n`) or yields a
//!   basis change whose exponent shift strictly decreases `Dstar`. The
//!   [`SdaVariant::Kappa`] flavor takes the longest feasible step per
//!   direction instead of a unit step.
//! - [`combinatorial_relaxation`]: after the same MVSP-guided rotation, the
//!   step is the optimal dual of the maximum-weight perfect matching on the
//!   entry degree matrix ([`mvmp_sigma_dual`]), which decreases `Dstar` by at
//!   least as much as the unit step.
//!
//! Both maintain `deg Det A = deg Det A_cur + Dstar` with `A_cur` proper, so
//! termination with a nonsingular leading pencil pins the value exactly, and
//! `Dstar < 0` proves the determinant is identically zero.
//!
//! The module also hosts the subdeterminant maximizer [`max_deg_subdet`]
//! (greedy exchange over the valuated matroid of column subsets) and the
//! two-by-four exchange probe [`valuated_exchange_check`].

use std::error::Error;
use std::fmt;

use crate::exec::{map_collect, ExecMode};
use crate::field::Field;
use crate::matrix::{deg_det, echelon_complete, Mat};
use crate::mvsp::{solve_mvsp, MvSubspace, MvspError, MvspStrategy};
use crate::pencil::{
    apply_exponent_move, apply_move, kappa_star, leading, normalize, LeadingPencil, Pencil,
    PencilError, Term, TransformLog,
};
use crate::poly::{Deg, Laurent, RatFn};

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Pencil(PencilError),
    Mvsp(MvspError),
    /// The supplied subspace pair is not a vanishing pair of the pencil, or
    /// its recorded value disagrees with its dimensions.
    InvalidCertificate { detail: String },
    /// The degree matrix admits no perfect matching on finite entries, so
    /// the assignment dual is unbounded.
    Unbounded,
    /// A delegated degree evaluation was downgraded to an inexact bound, so
    /// the caller's exchange argument cannot certify its answer.
    InexactOracle { detail: String },
}

impl fmt::Display for SolverError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Pencil(e) => write!(out, "pencil error: {}", e),
            SolverError::Mvsp(e) => write!(out, "MVSP error: {}", e),
            SolverError::InvalidCertificate { detail } => {
                write!(out, "invalid certificate: {}", detail)
            }
            SolverError::Unbounded => {
                write!(out, "no perfect matching on finite entries; the dual is unbounded")
            }
            SolverError::InexactOracle { detail } => {
                write!(out, "inexact degree oracle: {}", detail)
            }
        }
    }
}

impl Error for SolverError {}

impl From<PencilError> for SolverError {
    fn from(e: PencilError) -> Self {
        SolverError::Pencil(e)
    }
}

impl From<MvspError> for SolverError {
    fn from(e: MvspError) -> Self {
        SolverError::Mvsp(e)
    }
}

/// Step rule of the steepest descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdaVariant {
    /// Unit step `kappa = 1` per move.
    Plain,
    /// Longest feasible step per move; detects identically zero determinants
    /// early when a transformed block vanishes at every depth.
    Kappa,
}

/// Knobs for a descent run.
#[derive(Debug, Clone)]
pub struct SdaConfig {
    pub variant: SdaVariant,
    pub strategy: MvspStrategy,
    pub mode: ExecMode,
    /// Move budget; `None` uses the intrinsic bound `Dstar_0 + 1`, which a
    /// correct run can never exhaust (each move decreases `Dstar` by at
    /// least one, and `Dstar < 0` terminates).
    pub max_iterations: Option<usize>,
}

impl SdaConfig {
    pub fn new(variant: SdaVariant, strategy: MvspStrategy) -> Self {
        SdaConfig { variant, strategy, mode: ExecMode::Auto, max_iterations: None }
    }
}

/// Outcome of a solved pencil.
#[derive(Debug, Clone)]
pub struct DegDetResult<F: Field> {
    /// `deg Det A`, or `NegInf` for identically singular pencils.
    pub value: Deg,
    /// Moves applied.
    pub iterations: usize,
    /// Replayable transform trail; `log.dstar` is the final upper bound.
    pub log: TransformLog<F>,
    /// Terminal MVSP optimum witnessing nonsingularity of the final leading
    /// pencil (absent for minus-infinity and inexact outcomes).
    pub certificate: Option<MvSubspace<F>>,
    /// Smith-McMillan exponents `alpha_1 >= ... >= alpha_n` recovered from
    /// the unit-step decrement profile; attached only to exact finite plain
    /// runs entered through the standard normalization.
    pub alpha_trace: Option<Vec<i64>>,
    /// False when an MVSP cap was hit and `value` is only the upper bound
    /// `Dstar` reached so far.
    pub exact: bool,
}

/// Result of a prepared run that may stop at a caller-imposed move budget.
#[derive(Debug, Clone)]
pub enum SdaOutcome<F: Field> {
    Finished(DegDetResult<F>),
    /// The caller's `max_iterations` was reached before termination.
    IterationCapHit { iterations: usize, dstar: i64, log: TransformLog<F> },
}

/// `deg Det A` of a square polynomial pencil by steepest descent.
///
/// # Errors
/// `Pencil(NonSquare)` for rectangular input; MVSP class errors when a forced
/// `strategy` does not match the pencil; `InvalidCertificate` if an MVSP
/// solution fails its vanishing obligation (a solver bug, surfaced rather
/// than trusted).
pub fn sda_degdet<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: &MvspStrategy,
    variant: SdaVariant,
) -> Result<DegDetResult<F>, SolverError> {
    sda_degdet_mode(f, a, strategy, variant, ExecMode::Auto)
}

pub fn sda_degdet_mode<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: &MvspStrategy,
    variant: SdaVariant,
    mode: ExecMode,
) -> Result<DegDetResult<F>, SolverError> {
    let (proper, dstar0) = normalize(a)?;
    let ell = match a.max_entry_degree() {
        Deg::Fin(d) => d,
        Deg::NegInf => 0,
    };
    let cfg = SdaConfig { variant, strategy: *strategy, mode, max_iterations: None };
    match sda_degdet_prepared(f, &proper, ell, dstar0, &cfg)? {
        SdaOutcome::Finished(res) => Ok(res),
        SdaOutcome::IterationCapHit { .. } => {
            unreachable!("the intrinsic move budget cannot be exhausted")
        }
    }
}

/// Descent on an already proper pencil with an explicit starting bound
/// `dstar0` (`deg Det A_orig = deg Det proper + dstar0`). This is the entry
/// point for callers that normalize differently, for example per-column
/// scalings, or that need a hard move budget.
pub fn sda_degdet_prepared<F: Field>(
    f: &F,
    proper: &Pencil<F>,
    ell: i64,
    dstar0: i64,
    cfg: &SdaConfig,
) -> Result<SdaOutcome<F>, SolverError> {
    assert_eq!(proper.n, proper.nprime, "descent requires a square pencil");
    let n = proper.n;
    let mut log: TransformLog<F> = TransformLog::new(ell, n);
    log.dstar = dstar0;
    let fuse = cfg.max_iterations.unwrap_or(dstar0.max(0) as usize + 1);
    let standard_entry = dstar0 == n as i64 * ell;
    let mut cur = proper.clone();
    let mut decrements: Vec<i64> = Vec::new();
    let mut iterations = 0usize;
    loop {
        let lead = leading(f, &cur)?;
        let mv = match solve_mvsp(f, &lead, &cfg.strategy, cfg.mode) {
            Ok(mv) => mv,
            Err(MvspError::CapExceeded { .. }) => {
                // Downgrade: Dstar is still a valid upper bound, flagged as
                // such instead of silently passed off as the answer.
                return Ok(SdaOutcome::Finished(DegDetResult {
                    value: Deg::Fin(log.dstar),
                    iterations,
                    log,
                    certificate: None,
                    alpha_trace: None,
                    exact: false,
                }));
            }
            Err(e) => return Err(e.into()),
        };
        if mv.value <= n {
            let alpha_trace = if cfg.variant == SdaVariant::Plain && standard_entry {
                Some(alpha_from_decrements(ell, n, &decrements))
            } else {
                None
            };
            return Ok(SdaOutcome::Finished(DegDetResult {
                value: Deg::Fin(log.dstar),
                iterations,
                log,
                certificate: Some(mv),
                alpha_trace,
                exact: true,
            }));
        }
        if iterations == fuse {
            if cfg.max_iterations.is_some() {
                return Ok(SdaOutcome::IterationCapHit { iterations, dstar: log.dstar, log });
            }
            panic!("descent exceeded {} moves without driving Dstar negative", fuse);
        }
        let r = mv.dim_x();
        let s_dim = mv.dim_y();
        let s = echelon_complete(f, &mv.xbasis);
        let t = echelon_complete(f, &mv.ybasis.transpose()).transpose();
        let kappa = match cfg.variant {
            SdaVariant::Plain => 1,
            SdaVariant::Kappa => match kappa_star(f, &cur, &s, &t, r, s_dim) {
                Ok(k) => k,
                Err(PencilError::FeasibilityUnbounded) => {
                    // The transformed block vanishes at every depth: the
                    // pencil is identically singular.
                    return Ok(SdaOutcome::Finished(DegDetResult {
                        value: Deg::NegInf,
                        iterations,
                        log,
                        certificate: None,
                        alpha_trace: None,
                        exact: true,
                    }));
                }
                Err(PencilError::MoveInfeasible { term, row, col }) => {
                    return Err(SolverError::InvalidCertificate {
                        detail: format!(
                            "transformed block does not vanish at term {} entry ({}, {})",
                            term, row, col
                        ),
                    });
                }
                Err(e) => return Err(e.into()),
            },
        };
        cur = match apply_move(f, &cur, &s, &t, r, s_dim, kappa) {
            Ok(next) => next,
            Err(PencilError::MoveInfeasible { term, row, col }) => {
                return Err(SolverError::InvalidCertificate {
                    detail: format!(
                        "transformed block does not vanish at term {} entry ({}, {})",
                        term, row, col
                    ),
                });
            }
            Err(e) => return Err(e.into()),
        };
        log.record(s, t, r, s_dim, kappa);
        decrements.push((r + s_dim) as i64 - n as i64);
        iterations += 1;
        if log.dstar < 0 {
            return Ok(SdaOutcome::Finished(DegDetResult {
                value: Deg::NegInf,
                iterations,
                log,
                certificate: None,
                alpha_trace: None,
                exact: true,
            }));
        }
    }
}

/// Recover Smith-McMillan exponents of the original pencil from a unit-step
/// run. At descent depth `i` the decrement `c_i = r_i + s_i - n` counts the
/// exponents with `alpha_k <= l - i`, so `alpha_{n+1-k} = l - #{i : c_i >= k}`.
fn alpha_from_decrements(ell: i64, n: usize, decrements: &[i64]) -> Vec<i64> {
    let mut alpha = vec![0i64; n];
    for k in 1..=n {
        let hits = decrements.iter().filter(|&&c| c >= k as i64).count() as i64;
        alpha[n - k] = ell - hits;
    }
    alpha
}

/// Checks a vanishing-pair certificate against a leading pencil and reports
/// whether it proves the current bound optimal (MVSP value at most `n`).
///
/// # Errors
/// `InvalidCertificate` when the pair fails its vanishing products, has
/// dependent bases, or misstates its value.
pub fn optimality_certificate<F: Field>(
    f: &F,
    lead: &LeadingPencil<F>,
    mv: &MvSubspace<F>,
) -> Result<bool, SolverError> {
    if !mv.verify(f, lead) {
        return Err(SolverError::InvalidCertificate {
            detail: format!(
                "claimed value {} with dims ({}, {}) fails verification",
                mv.value,
                mv.dim_x(),
                mv.dim_y()
            ),
        });
    }
    Ok(mv.value <= lead.n())
}

/// Entrywise degree matrix `d_ij = max_k deg (A_k)_ij`, the weight matrix of
/// the assignment bound; `NegInf` marks structural zeros.
pub fn degree_matrix<F: Field>(a: &Pencil<F>) -> Mat<Deg> {
    let mut d = Mat::fill(a.n, a.nprime, Deg::NegInf);
    for term in &a.terms {
        for (i, j, v) in term.entries() {
            if v.deg() > *d.at(*i, *j) {
                d.set(*i, *j, v.deg());
            }
        }
    }
    d
}

/// Optimal dual of the maximum-weight perfect matching on a degree matrix:
/// nonnegative `p`, `q` with `p_i - q_j + d_ij <= 0` and `sum p - sum q`
/// equal to minus the matching weight (the largest value any feasible pair
/// attains).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentDual {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
}

impl AssignmentDual {
    pub fn dual_value(&self) -> i64 {
        self.p.iter().sum::<i64>() - self.q.iter().sum::<i64>()
    }

    pub fn is_feasible(&self, d: &Mat<Deg>) -> bool {
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if let Deg::Fin(w) = *d.at(i, j) {
                    if self.p[i] - self.q[j] + w > 0 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

const COST_INF: i64 = i64::MAX / 4;

/// Optimal assignment dual for a square degree matrix by shortest augmenting
/// paths with potentials.
///
/// # Errors
/// `Unbounded` when the finite entries admit no perfect matching.
pub fn mvmp_sigma_dual(d: &Mat<Deg>) -> Result<AssignmentDual, SolverError> {
    assert_eq!(d.rows(), d.cols(), "assignment dual of a non-square matrix");
    let n = d.rows();
    if n == 0 {
        return Ok(AssignmentDual { p: Vec::new(), q: Vec::new() });
    }
    // Min-cost assignment on c = shift - d >= 0; shifting every entry by the
    // same constant moves row potentials by the shift and nothing else.
    let mut shift = 0i64;
    for i in 0..n {
        for j in 0..n {
            if let Deg::Fin(w) = *d.at(i, j) {
                shift = shift.max(w);
            }
        }
    }
    let cost = Mat::from_fn(n, n, |i, j| match *d.at(i, j) {
        Deg::Fin(w) => shift - w,
        Deg::NegInf => COST_INF,
    });
    let (u, v) = jv_duals(&cost).ok_or(SolverError::Unbounded)?;
    // u_i + v_j <= c_ij, so (u_i - shift) + v_j <= -d_ij; then translate the
    // pair to the nonnegative orthant.
    let mut p: Vec<i64> = u.iter().map(|&ui| ui - shift).collect();
    let mut q: Vec<i64> = v.iter().map(|&vj| -vj).collect();
    let low = p.iter().chain(q.iter()).copied().min().unwrap_or(0).min(0);
    for x in p.iter_mut().chain(q.iter_mut()) {
        *x -= low;
    }
    let dual = AssignmentDual { p, q };
    debug_assert!(dual.is_feasible(d));
    Ok(dual)
}

/// Jonker-Volgenant style shortest augmenting paths. Returns row and column
/// potentials with `u_i + v_j <= cost_ij` everywhere, tight on an optimal
/// matching, so `sum u + sum v` is the minimum assignment cost; `None` when
/// some row cannot be matched over finite costs.
fn jv_duals(cost: &Mat<i64>) -> Option<(Vec<i64>, Vec<i64>)> {
    let n = cost.rows();
    // 1-indexed with column 0 as the virtual start of each augmentation.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![COST_INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = COST_INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let c = *cost.at(i0 - 1, j - 1);
                if c < COST_INF {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if delta >= COST_INF {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    Some((u[1..].to_vec(), v[1..].to_vec()))
}

/// `deg Det A` by combinatorial relaxation: rotate by the MVSP certificate,
/// then step by the optimal assignment dual of the rotated degree matrix.
/// The certificate pair `(r, s)` yields a feasible dual of value
/// `r + s - n >= 1`, so each round decreases `Dstar` by at least the plain
/// unit step.
pub fn combinatorial_relaxation<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: &MvspStrategy,
) -> Result<DegDetResult<F>, SolverError> {
    combinatorial_relaxation_mode(f, a, strategy, ExecMode::Auto)
}

pub fn combinatorial_relaxation_mode<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: &MvspStrategy,
    mode: ExecMode,
) -> Result<DegDetResult<F>, SolverError> {
    let (mut cur, dstar0) = normalize(a)?;
    let ell = match a.max_entry_degree() {
        Deg::Fin(d) => d,
        Deg::NegInf => 0,
    };
    let n = cur.n;
    let mut log: TransformLog<F> = TransformLog::new(ell, n);
    let fuse = dstar0.max(0) as usize + 1;
    let mut iterations = 0usize;
    loop {
        let lead = leading(f, &cur)?;
        let mv = match solve_mvsp(f, &lead, strategy, mode) {
            Ok(mv) => mv,
            Err(MvspError::CapExceeded { .. }) => {
                return Ok(DegDetResult {
                    value: Deg::Fin(log.dstar),
                    iterations,
                    log,
                    certificate: None,
                    alpha_trace: None,
                    exact: false,
                });
            }
            Err(e) => return Err(e.into()),
        };
        if mv.value <= n {
            return Ok(DegDetResult {
                value: Deg::Fin(log.dstar),
                iterations,
                log,
                certificate: Some(mv),
                alpha_trace: None,
                exact: true,
            });
        }
        if iterations == fuse {
            panic!("relaxation exceeded {} rounds without driving Dstar negative", fuse);
        }
        let r = mv.dim_x();
        let s_dim = mv.dim_y();
        let s = echelon_complete(f, &mv.xbasis);
        let t = echelon_complete(f, &mv.ybasis.transpose()).transpose();
        let zeros = vec![0i64; n];
        let rotated = apply_exponent_move(f, &cur, &s, &t, &zeros, &zeros)?;
        let dual = match mvmp_sigma_dual(&degree_matrix(&rotated)) {
            Ok(dual) => dual,
            // No perfect matching on the support: Det is identically zero.
            Err(SolverError::Unbounded) => {
                return Ok(DegDetResult {
                    value: Deg::NegInf,
                    iterations,
                    log,
                    certificate: None,
                    alpha_trace: None,
                    exact: true,
                });
            }
            Err(e) => return Err(e),
        };
        let step = dual.dual_value();
        debug_assert!(step >= (r + s_dim) as i64 - n as i64);
        let col_exp: Vec<i64> = dual.q.iter().map(|&x| -x).collect();
        cur = match apply_exponent_move(f, &rotated, &crate::matrix::k_identity(f, n), &crate::matrix::k_identity(f, n), &dual.p, &col_exp) {
            Ok(next) => next,
            Err(PencilError::MoveInfeasible { term, row, col }) => {
                return Err(SolverError::InvalidCertificate {
                    detail: format!(
                        "assignment dual infeasible at term {} entry ({}, {})",
                        term, row, col
                    ),
                });
            }
            Err(e) => return Err(e.into()),
        };
        log.record_general(s, t, dual.p.clone(), col_exp, r, s_dim, step);
        iterations += 1;
        if log.dstar < 0 {
            return Ok(DegDetResult {
                value: Deg::NegInf,
                iterations,
                log,
                certificate: None,
                alpha_trace: None,
                exact: true,
            });
        }
    }
}

/// Maximum degree of a subdeterminant of any order of an `n x n'` pencil
/// (`n <= n'`), with the empty minor contributing degree zero.
///
/// Runs greedy exchange on the augmented pencil `(I | A)`: column subsets of
/// size `n` form a valuated matroid under `deg Det`, so a basis with no
/// improving single swap is globally optimal. Identity columns encode the
/// order drop, hence the result is never `NegInf`.
pub fn max_deg_subdet<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: &MvspStrategy,
) -> Result<Deg, SolverError> {
    max_deg_subdet_mode(f, a, strategy, ExecMode::Auto)
}

pub fn max_deg_subdet_mode<F: Field>(
    f: &F,
    a: &Pencil<F>,
    strategy: &MvspStrategy,
    mode: ExecMode,
) -> Result<Deg, SolverError> {
    assert!(a.n <= a.nprime, "wide orientation required: n <= n'");
    let n = a.n;
    let total = n + a.nprime;
    let mut basis: Vec<usize> = (0..n).collect();
    let mut best = augmented_omega(f, a, &basis, strategy, mode)?;
    loop {
        let mut candidates = Vec::new();
        for slot in 0..basis.len() {
            for col in 0..total {
                if !basis.contains(&col) {
                    let mut next = basis.clone();
                    next[slot] = col;
                    next.sort_unstable();
                    candidates.push(next);
                }
            }
        }
        let evaluated: Vec<Result<(Deg, Vec<usize>), SolverError>> =
            map_collect(mode, candidates, |cols| {
                augmented_omega(f, a, &cols, strategy, mode).map(|w| (w, cols))
            });
        let mut round_best: Option<(Deg, Vec<usize>)> = None;
        for item in evaluated {
            let (w, cols) = item?;
            if round_best.as_ref().map_or(true, |(bw, _)| w > *bw) {
                round_best = Some((w, cols));
            }
        }
        match round_best {
            Some((w, cols)) if w > best => {
                best = w;
                basis = cols;
            }
            _ => return Ok(best),
        }
    }
}

/// `deg Det` of the column subset of the augmented pencil `(I | A)`.
fn augmented_omega<F: Field>(
    f: &F,
    a: &Pencil<F>,
    cols: &[usize],
    strategy: &MvspStrategy,
    mode: ExecMode,
) -> Result<Deg, SolverError> {
    let n = a.n;
    let mut entry_lists: Vec<Vec<(usize, usize, Laurent<F>)>> = vec![Vec::new(); a.terms.len()];
    for (pos, &c) in cols.iter().enumerate() {
        if c < n {
            entry_lists[0].push((c, pos, Laurent::one(f)));
        } else {
            let source = c - n;
            for (k, term) in a.terms.iter().enumerate() {
                for (i, j, v) in term.entries() {
                    if *j == source {
                        entry_lists[k].push((*i, pos, v.clone()));
                    }
                }
            }
        }
    }
    let sub = Pencil::new(n, n, entry_lists.into_iter().map(Term::from_entries).collect());
    let res = sda_degdet_mode(f, &sub, strategy, SdaVariant::Kappa, mode)?;
    if !res.exact {
        return Err(SolverError::InexactOracle {
            detail: format!("subdeterminant on columns {:?} hit the MVSP cap", cols),
        });
    }
    Ok(res.value)
}

/// Local exchange test for `deg det` as a valuated matroid, on a `2 x 4`
/// matrix over `K(t)`: of the three pairings `{12|34, 13|24, 14|23}` of
/// columns into complementary bases, the maximum sum must be attained at
/// least twice.
pub fn valuated_exchange_check<F: Field>(f: &F, b: &Mat<RatFn<F>>) -> bool {
    assert!(b.rows() == 2 && b.cols() == 4, "exchange probe expects a 2 x 4 matrix");
    let omega = |c1: usize, c2: usize| {
        let m = Mat::from_rows(vec![
            vec![b.at(0, c1).clone(), b.at(0, c2).clone()],
            vec![b.at(1, c1).clone(), b.at(1, c2).clone()],
        ]);
        deg_det(f, &m)
    };
    let pair = |x: Deg, y: Deg| match (x, y) {
        (Deg::Fin(a), Deg::Fin(b)) => Deg::Fin(a + b),
        _ => Deg::NegInf,
    };
    let sums = [
        pair(omega(0, 1), omega(2, 3)),
        pair(omega(0, 2), omega(1, 3)),
        pair(omega(0, 3), omega(1, 2)),
    ];
    let top = *sums.iter().max().expect("three pairings");
    sums.iter().filter(|&&s| s == top).count() >= 2
}

/// Machine-readable run report.
pub fn result_to_report<F: Field>(
    f: &F,
    res: &DegDetResult<F>,
    seed: Option<u64>,
) -> serde_json::Value {
    let value = match res.value {
        Deg::Fin(v) => serde_json::json!(v),
        Deg::NegInf => serde_json::json!("-inf"),
    };
    let trace: Vec<serde_json::Value> = res
        .log
        .moves
        .iter()
        .map(|m| {
            serde_json::json!({
                "r": m.r,
                "s": m.s_dim,
                "kappa": m.kappa,
                "dstar": m.dstar_after,
            })
        })
        .collect();
    let mat_strings = |m: &Mat<F::Elem>| -> Vec<Vec<String>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| f.fmt_elem(m.at(i, j))).collect())
            .collect()
    };
    let certificate = res.certificate.as_ref().map(|mv| {
        serde_json::json!({
            "value": mv.value,
            "dim_x": mv.dim_x(),
            "dim_y": mv.dim_y(),
            "xbasis": mat_strings(&mv.xbasis),
            "ybasis": mat_strings(&mv.ybasis),
        })
    });
    serde_json::json!({
        "value": value,
        "exact": res.exact,
        "iterations": res.iterations,
        "dstar": res.log.dstar,
        "trace": trace,
        "certificate": certificate,
        "alpha": res.alpha_trace,
        "seed": seed,
    })
}
