//! Combinatorial front-ends for the degree-of-determinant solvers.
//!
//! Each problem here reduces to `deg Det` of a purpose-built pencil:
//!
//! - [`solve_weighted_matching`]: maximum-weight perfect bipartite matching
//!   via the pencil `sum t^{c_e} x_e E_{ij}`;
//! - [`solve_max_weight_base`]: maximum-weight base of a linear matroid,
//!   solved by the classical greedy and cross-checked against the descent on
//!   `sum t^{c_i} x_i a_i a_i^T`;
//! - [`solve_weighted_matroid_intersection`]: maximum-weight common base of
//!   two linear matroids via `sum t^{c_i} x_i a_i b_i^T`;
//! - [`mixed_poly_degdet`]: `deg Det` of a mixed polynomial matrix `Q + T`
//!   (numeric part plus independent-variable part) through the layered
//!   `2n x 2n` lift `[[Q, I], [T, D]]` with fresh diagonal variables `D`;
//! - [`dae_index`]: the index of a linear differential-algebraic system with
//!   mixed coefficient matrix, read off the iteration count of a unit-step
//!   descent on the per-column normalized lift.
//!
//! Weights may be negative; every reduction shifts them into `t`-powers with
//! nonnegative exponent and subtracts the shift from the answer afterwards.
//! The module also hosts the JSON instance formats used by the command-line
//! tool, one `"kind"`-discriminated document per problem.

use std::error::Error;
use std::fmt;

use crate::exec::ExecMode;
use crate::field::{Field, GfP, Rationals};
use crate::matrix::{k_identity, k_rank, Mat};
use crate::mvsp::MvspStrategy;
use crate::pencil::{
    apply_exponent_move, parse_field_doc, DocError, FieldSpec, Pencil, PencilError, Term,
};
use crate::poly::{parse_poly, Deg, Laurent, Poly};
use crate::solver::{
    sda_degdet_mode, sda_degdet_prepared, DegDetResult, SdaConfig, SdaOutcome, SdaVariant,
    SolverError,
};

#[derive(Debug, Clone, PartialEq)]
pub enum AppsError {
    /// The operation needs a square matrix.
    NonSquare { rows: usize, cols: usize },
    /// An instance fails its shape obligations (index range, duplicate
    /// edge or variable, mismatched lengths, negative degree).
    InvalidInstance { detail: String },
    /// The system matrix has identically zero determinant, so no index (or
    /// solution map) exists.
    SingularSystem,
    Solver(SolverError),
}

impl fmt::Display for AppsError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppsError::NonSquare { rows, cols } => {
                write!(out, "expected a square matrix, got {} x {}", rows, cols)
            }
            AppsError::InvalidInstance { detail } => write!(out, "invalid instance: {}", detail),
            AppsError::SingularSystem => {
                write!(out, "the system matrix is singular; no index exists")
            }
            AppsError::Solver(e) => write!(out, "solver error: {}", e),
        }
    }
}

impl Error for AppsError {}

impl From<SolverError> for AppsError {
    fn from(e: SolverError) -> Self {
        AppsError::Solver(e)
    }
}

impl From<PencilError> for AppsError {
    fn from(e: PencilError) -> Self {
        AppsError::Solver(SolverError::Pencil(e))
    }
}

fn invalid(detail: impl Into<String>) -> AppsError {
    AppsError::InvalidInstance { detail: detail.into() }
}

/// Subtract a weight shift folded into the pencil from a finite answer.
fn unshift(value: Deg, total_shift: i64) -> Deg {
    match value {
        Deg::Fin(v) => Deg::Fin(v - total_shift),
        Deg::NegInf => Deg::NegInf,
    }
}

/// Nonnegative offset that makes every weight nonnegative.
fn weight_shift(weights: impl Iterator<Item = i64>) -> i64 {
    weights.min().map_or(0, |m| (-m).max(0))
}

// ---------------------------------------------------------------------------
// Weighted perfect bipartite matching
// ---------------------------------------------------------------------------

/// A bipartite graph on `n + n` vertices with integer edge weights. Vertices
/// are indexed from zero on both sides; at most one edge per pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedBipartiteInstance {
    pub n: usize,
    /// `(left, right, weight)` triples.
    pub edges: Vec<(usize, usize, i64)>,
}

impl WeightedBipartiteInstance {
    pub fn validate(&self) -> Result<(), AppsError> {
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j, _) in &self.edges {
            if i >= self.n || j >= self.n {
                return Err(invalid(format!(
                    "edge ({}, {}) out of range for n = {}",
                    i, j, self.n
                )));
            }
            if !seen.insert((i, j)) {
                return Err(invalid(format!("duplicate edge ({}, {})", i, j)));
            }
        }
        Ok(())
    }
}

/// Maximum weight of a perfect matching, or minus infinity when none exists.
///
/// Builds the pencil `sum_e t^{c_e + W} x_e E_{i(e), j(e)}` (with `W` large
/// enough to clear negative weights) and runs the long-step descent with the
/// bipartite MVSP solver; `deg Det` is the optimum plus `n W`.
///
/// # Errors
/// `InvalidInstance` for out-of-range or duplicate edges.
pub fn solve_weighted_matching<F: Field>(
    f: &F,
    inst: &WeightedBipartiteInstance,
) -> Result<Deg, AppsError> {
    solve_weighted_matching_mode(f, inst, ExecMode::Auto)
}

pub fn solve_weighted_matching_mode<F: Field>(
    f: &F,
    inst: &WeightedBipartiteInstance,
    mode: ExecMode,
) -> Result<Deg, AppsError> {
    inst.validate()?;
    if inst.n == 0 {
        return Ok(Deg::Fin(0)); // the empty matching is perfect
    }
    let shift = weight_shift(inst.edges.iter().map(|&(_, _, c)| c));
    let mut terms = vec![Term::zero()];
    for &(i, j, c) in &inst.edges {
        terms.push(Term::from_entries(vec![(
            i,
            j,
            Laurent::monomial(f, f.one(), c + shift),
        )]));
    }
    let a = Pencil::new(inst.n, inst.n, terms);
    let res = sda_degdet_mode(f, &a, &MvspStrategy::Bipartite, SdaVariant::Kappa, mode)?;
    debug_assert!(res.exact, "bipartite MVSP has no enumeration cap");
    Ok(unshift(res.value, inst.n as i64 * shift))
}

// ---------------------------------------------------------------------------
// Maximum-weight base of a linear matroid
// ---------------------------------------------------------------------------

/// Maximum weight of a base (full-rank subset) of the vector family, or
/// minus infinity when the family does not span.
///
/// Two independent routes whose agreement is asserted: the matroid greedy on
/// ranks, and the steepest descent on `sum_i t^{c_i + W} x_i a_i a_i^T`,
/// whose `deg Det` is the optimum plus `n W`.
///
/// # Errors
/// `InvalidInstance` for empty input or mismatched dimensions.
pub fn solve_max_weight_base<F: Field>(
    f: &F,
    vectors: &[Vec<F::Elem>],
    weights: &[i64],
) -> Result<Deg, AppsError> {
    solve_max_weight_base_mode(f, vectors, weights, ExecMode::Auto)
}

pub fn solve_max_weight_base_mode<F: Field>(
    f: &F,
    vectors: &[Vec<F::Elem>],
    weights: &[i64],
    mode: ExecMode,
) -> Result<Deg, AppsError> {
    if vectors.len() != weights.len() {
        return Err(invalid(format!(
            "{} vectors but {} weights",
            vectors.len(),
            weights.len()
        )));
    }
    let n = vectors.first().map_or(0, |v| v.len());
    if n == 0 {
        return Err(invalid("need at least one vector of positive dimension"));
    }
    if vectors.iter().any(|v| v.len() != n) {
        return Err(invalid("vectors must share one dimension"));
    }

    // Greedy route: scan by weight (descending, index as tie-break) and keep
    // every vector that grows the rank.
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for idx in order {
        let mut rows: Vec<Vec<F::Elem>> = chosen.iter().map(|&i| vectors[i].clone()).collect();
        rows.push(vectors[idx].clone());
        let r = k_rank(f, &Mat::from_rows(rows));
        if r > rank {
            rank = r;
            chosen.push(idx);
            if rank == n {
                break;
            }
        }
    }
    let greedy = if rank == n {
        Deg::Fin(chosen.iter().map(|&i| weights[i]).sum())
    } else {
        Deg::NegInf
    };

    // Descent route on the Gram-style rank-one pencil.
    let shift = weight_shift(weights.iter().copied());
    let mut terms = vec![Term::zero()];
    for (vec, &c) in vectors.iter().zip(weights) {
        terms.push(rank1_term(f, vec, vec, c + shift));
    }
    let a = Pencil::new(n, n, terms);
    let res = sda_degdet_mode(f, &a, &MvspStrategy::Rank1, SdaVariant::Kappa, mode)?;
    let descent = unshift(res.value, n as i64 * shift);
    assert_eq!(
        greedy, descent,
        "matroid greedy and steepest descent disagree on the optimal base weight"
    );
    Ok(greedy)
}

/// Single-variable term `t^k a b^T` as sparse entries.
fn rank1_term<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem], k: i64) -> Term<F> {
    let mut entries = Vec::new();
    for (i, ai) in a.iter().enumerate() {
        if f.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if f.is_zero(bj) {
                continue;
            }
            entries.push((i, j, Laurent::monomial(f, f.mul(ai, bj), k)));
        }
    }
    Term::from_entries(entries)
}

// ---------------------------------------------------------------------------
// Weighted linear matroid intersection
// ---------------------------------------------------------------------------

/// Two linear matroids given by vector families of equal length, with one
/// weight per index. A common base is an index set whose `a`-vectors and
/// `b`-vectors are both bases.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatroidIntersectionInstance<F: Field> {
    pub avectors: Vec<Vec<F::Elem>>,
    pub bvectors: Vec<Vec<F::Elem>>,
    pub weights: Vec<i64>,
}

impl<F: Field> WeightedMatroidIntersectionInstance<F> {
    fn validated_dim(&self) -> Result<usize, AppsError> {
        if self.avectors.len() != self.bvectors.len() || self.avectors.len() != self.weights.len()
        {
            return Err(invalid(format!(
                "family sizes disagree: {} a-vectors, {} b-vectors, {} weights",
                self.avectors.len(),
                self.bvectors.len(),
                self.weights.len()
            )));
        }
        let n = self.avectors.first().map_or(0, |v| v.len());
        if n == 0 {
            return Err(invalid("need at least one vector of positive dimension"));
        }
        if self.avectors.iter().any(|v| v.len() != n) || self.bvectors.iter().any(|v| v.len() != n)
        {
            return Err(invalid("all vectors must live in one common dimension"));
        }
        Ok(n)
    }
}

/// Maximum weight of a common base, or minus infinity when none exists.
///
/// `deg Det` of `sum_i t^{c_i + W} x_i a_i b_i^T` equals the optimum plus
/// `n W`; the rank-one MVSP solver (weighted matroid intersection underneath)
/// keeps every descent round polynomial.
///
/// # Errors
/// `InvalidInstance` for mismatched family sizes or dimensions.
pub fn solve_weighted_matroid_intersection<F: Field>(
    f: &F,
    inst: &WeightedMatroidIntersectionInstance<F>,
) -> Result<Deg, AppsError> {
    solve_weighted_matroid_intersection_mode(f, inst, ExecMode::Auto)
}

pub fn solve_weighted_matroid_intersection_mode<F: Field>(
    f: &F,
    inst: &WeightedMatroidIntersectionInstance<F>,
    mode: ExecMode,
) -> Result<Deg, AppsError> {
    let n = inst.validated_dim()?;
    let shift = weight_shift(inst.weights.iter().copied());
    let mut terms = vec![Term::zero()];
    for ((a_vec, b_vec), &c) in inst.avectors.iter().zip(&inst.bvectors).zip(&inst.weights) {
        terms.push(rank1_term(f, a_vec, b_vec, c + shift));
    }
    let a = Pencil::new(n, n, terms);
    let res = sda_degdet_mode(f, &a, &MvspStrategy::Rank1, SdaVariant::Kappa, mode)?;
    Ok(unshift(res.value, n as i64 * shift))
}

// ---------------------------------------------------------------------------
// Mixed polynomial matrices
// ---------------------------------------------------------------------------

/// A mixed polynomial matrix `A(t) = Q(t) + T(t)`: a numeric polynomial part
/// `Q` plus a variable part `T` whose nonzero entries are `t^k x_v` with
/// algebraically independent `x_v`, each variable appearing exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPolySystem<F: Field> {
    pub qpart: Mat<Poly<F>>,
    /// `(row, col, var, k)` placements; one placement per variable id and
    /// per position.
    pub tpart: Vec<(usize, usize, usize, i64)>,
}

impl<F: Field> MixedPolySystem<F> {
    pub fn new(
        qpart: Mat<Poly<F>>,
        tpart: Vec<(usize, usize, usize, i64)>,
    ) -> Result<Self, AppsError> {
        let sys = MixedPolySystem { qpart, tpart };
        sys.validate()?;
        Ok(sys)
    }

    pub fn size(&self) -> usize {
        self.qpart.rows()
    }

    pub fn validate(&self) -> Result<(), AppsError> {
        if self.qpart.rows() != self.qpart.cols() {
            return Err(AppsError::NonSquare {
                rows: self.qpart.rows(),
                cols: self.qpart.cols(),
            });
        }
        let n = self.qpart.rows();
        if n == 0 {
            return Err(invalid("the system matrix must have positive dimension"));
        }
        let mut vars = std::collections::BTreeSet::new();
        let mut cells = std::collections::BTreeSet::new();
        for &(row, col, var, k) in &self.tpart {
            if row >= n || col >= n {
                return Err(invalid(format!(
                    "placement ({}, {}) out of range for n = {}",
                    row, col, n
                )));
            }
            if k < 0 {
                return Err(invalid(format!("placement degree {} is negative", k)));
            }
            if !vars.insert(var) {
                return Err(invalid(format!("variable {} placed twice", var)));
            }
            if !cells.insert((row, col)) {
                return Err(invalid(format!("two placements at ({}, {})", row, col)));
            }
        }
        Ok(())
    }

    /// Upper bound `l` on entry degrees of both `Q` and `T` (at least zero).
    pub fn degree_bound(&self) -> i64 {
        let mut ell = 0i64;
        for i in 0..self.qpart.rows() {
            for j in 0..self.qpart.cols() {
                if let Deg::Fin(d) = self.qpart.at(i, j).deg() {
                    ell = ell.max(d);
                }
            }
        }
        for &(_, _, _, k) in &self.tpart {
            ell = ell.max(k);
        }
        ell
    }

    /// The system as an ordinary `n x n` pencil `Q + sum t^k x_v E_{row,col}`,
    /// variables ordered by id. Used by oracles; the solvers prefer
    /// [`MixedPolySystem::lift`].
    pub fn to_pencil(&self, f: &F) -> Pencil<F> {
        let n = self.size();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = self.qpart.at(i, j);
                if !p.is_zero() {
                    entries.push((i, j, Laurent::from_poly(f, p)));
                }
            }
        }
        let mut terms = vec![Term::from_entries(entries)];
        for &(row, col, _, k) in &self.sorted_placements() {
            terms.push(Term::from_entries(vec![(
                row,
                col,
                Laurent::monomial(f, f.one(), k),
            )]));
        }
        Pencil::new(n, n, terms)
    }

    /// The `2n x 2n` layered lift
    ///
    /// ```text
    ///   [ Q  I ]
    ///   [ T  D ]
    /// ```
    ///
    /// with fresh diagonal variables `D = diag(d_1, ..., d_n)`. Expanding
    /// `Det` along the `d`-monomials shows `deg Det` of the lift equals
    /// `deg Det (Q + T)`: the fresh variables keep the mixed subdeterminants
    /// from cancelling. Every leading pencil met during descent stays in the
    /// layered class, so the matroid-intersection MVSP solver applies
    /// throughout.
    pub fn lift(&self, f: &F) -> Pencil<F> {
        let n = self.size();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = self.qpart.at(i, j);
                if !p.is_zero() {
                    entries.push((i, j, Laurent::from_poly(f, p)));
                }
            }
        }
        for i in 0..n {
            entries.push((i, n + i, Laurent::one(f)));
        }
        let mut terms = vec![Term::from_entries(entries)];
        for &(row, col, _, k) in &self.sorted_placements() {
            terms.push(Term::from_entries(vec![(
                n + row,
                col,
                Laurent::monomial(f, f.one(), k),
            )]));
        }
        for i in 0..n {
            terms.push(Term::from_entries(vec![(n + i, n + i, Laurent::one(f))]));
        }
        Pencil::new(2 * n, 2 * n, terms)
    }

    fn sorted_placements(&self) -> Vec<(usize, usize, usize, i64)> {
        let mut p = self.tpart.clone();
        p.sort_by_key(|&(_, _, var, _)| var);
        p
    }
}

/// `deg Det` of a mixed polynomial matrix, through the layered lift.
///
/// The returned result describes the run on the lift; its `value` is the
/// degree for the system itself (the lift introduces no correction term).
///
/// # Errors
/// `NonSquare` / `InvalidInstance` for malformed systems.
pub fn mixed_poly_degdet<F: Field>(
    f: &F,
    sys: &MixedPolySystem<F>,
) -> Result<DegDetResult<F>, AppsError> {
    mixed_poly_degdet_mode(f, sys, ExecMode::Auto)
}

pub fn mixed_poly_degdet_mode<F: Field>(
    f: &F,
    sys: &MixedPolySystem<F>,
    mode: ExecMode,
) -> Result<DegDetResult<F>, AppsError> {
    sys.validate()?;
    let lift = sys.lift(f);
    let res = sda_degdet_mode(f, &lift, &MvspStrategy::Layered, SdaVariant::Kappa, mode)?;
    debug_assert!(res.exact, "the layered MVSP solver has no enumeration cap");
    Ok(res)
}

// ---------------------------------------------------------------------------
// DAE index analysis
// ---------------------------------------------------------------------------

/// Answer of [`dae_index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaeOutcome {
    Index(i64),
    /// The index is larger than the tested bound `delta`.
    Exceeds { delta: i64 },
}

/// Index of the linear time-invariant system with matrix `A(t) = Q + T`
/// (`t` standing for differentiation), decided up to a caller-chosen bound.
///
/// The index equals `1 - alpha_n` for the smallest Smith-McMillan exponent
/// `alpha_n` of `A`, and a unit-step descent on the per-column normalized
/// lift performs exactly `l - alpha_n` moves before its leading pencil turns
/// nonsingular. Capping the move budget at `l + delta - 1` therefore decides
/// "index at most `delta`" without ever paying for a larger index; a budget
/// overrun reports [`DaeOutcome::Exceeds`]. A finite answer above `delta`
/// can still be returned when the run happens to finish within the budget.
///
/// # Errors
/// `SingularSystem` when `Dstar` turns negative first (the determinant is
/// identically zero, so no index exists); `InvalidInstance` for negative
/// `delta` or malformed systems.
pub fn dae_index<F: Field>(
    f: &F,
    sys: &MixedPolySystem<F>,
    delta: i64,
) -> Result<DaeOutcome, AppsError> {
    dae_index_mode(f, sys, delta, ExecMode::Auto)
}

pub fn dae_index_mode<F: Field>(
    f: &F,
    sys: &MixedPolySystem<F>,
    delta: i64,
    mode: ExecMode,
) -> Result<DaeOutcome, AppsError> {
    sys.validate()?;
    if delta < 0 {
        return Err(invalid(format!("delta must be nonnegative, got {}", delta)));
    }
    let n = sys.size();
    let ell = sys.degree_bound();
    let lift = sys.lift(f);
    // Normalize only the first n columns: the identity and D blocks are
    // already proper. Dstar starts at n*l, matching deg Det of the scaling.
    let two_n = 2 * n;
    let id = k_identity(f, two_n);
    let row_exp = vec![0i64; two_n];
    let col_exp: Vec<i64> = (0..two_n).map(|j| if j < n { -ell } else { 0 }).collect();
    let proper = apply_exponent_move(f, &lift, &id, &id, &row_exp, &col_exp)
        .map_err(SolverError::from)?;
    let cfg = SdaConfig {
        variant: SdaVariant::Plain,
        strategy: MvspStrategy::Layered,
        mode,
        max_iterations: Some((ell + delta - 1).max(0) as usize),
    };
    match sda_degdet_prepared(f, &proper, ell, n as i64 * ell, &cfg)? {
        SdaOutcome::Finished(res) => match res.value {
            Deg::NegInf => Err(AppsError::SingularSystem),
            Deg::Fin(_) => {
                debug_assert!(res.exact);
                Ok(DaeOutcome::Index(res.iterations as i64 - ell + 1))
            }
        },
        SdaOutcome::IterationCapHit { .. } => Ok(DaeOutcome::Exceeds { delta }),
    }
}

// ---------------------------------------------------------------------------
// Instance documents
// ---------------------------------------------------------------------------

/// The `"kind"` discriminator of an instance document.
pub fn instance_kind(v: &serde_json::Value) -> Result<&str, DocError> {
    v.get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| DocError::new("kind", "expected a string"))
}

/// Parse `{"kind":"matching", "n":..., "edges":[[i,j,c],...]}`.
pub fn parse_matching_doc(v: &serde_json::Value) -> Result<WeightedBipartiteInstance, DocError> {
    let n = v
        .get("n")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| DocError::new("n", "expected a nonnegative integer"))? as usize;
    let edges_json = v
        .get("edges")
        .and_then(|e| e.as_array())
        .ok_or_else(|| DocError::new("edges", "expected an array"))?;
    let mut edges = Vec::with_capacity(edges_json.len());
    for (idx, e) in edges_json.iter().enumerate() {
        let path = format!("edges[{idx}]");
        let triple = e
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| DocError::new(path.clone(), "expected [left, right, weight]"))?;
        let i = triple[0]
            .as_u64()
            .ok_or_else(|| DocError::new(format!("{path}[0]"), "expected a nonnegative integer"))?;
        let j = triple[1]
            .as_u64()
            .ok_or_else(|| DocError::new(format!("{path}[1]"), "expected a nonnegative integer"))?;
        let c = triple[2]
            .as_i64()
            .ok_or_else(|| DocError::new(format!("{path}[2]"), "expected an integer"))?;
        edges.push((i as usize, j as usize, c));
    }
    Ok(WeightedBipartiteInstance { n, edges })
}

/// Integer vector families as they appear in matroid documents; mapped into
/// the declared field right before solving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidBaseDoc {
    pub field: FieldSpec,
    pub vectors: Vec<Vec<i64>>,
    pub weights: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidIntersectionDoc {
    pub field: FieldSpec,
    pub avectors: Vec<Vec<i64>>,
    pub bvectors: Vec<Vec<i64>>,
    pub weights: Vec<i64>,
}

/// Parse `{"kind":"matroid-base", "field":..., "vectors":[[..],..],
/// "weights":[..]}` with integer vector entries.
pub fn parse_matroid_base_doc(v: &serde_json::Value) -> Result<MatroidBaseDoc, DocError> {
    let field = parse_field_at(v)?;
    let vectors = parse_int_matrix(v, "vectors")?;
    let weights = parse_int_list(v, "weights")?;
    Ok(MatroidBaseDoc { field, vectors, weights })
}

/// Parse `{"kind":"matroid-intersection", "field":..., "avectors":...,
/// "bvectors":..., "weights":...}`.
pub fn parse_matroid_intersection_doc(
    v: &serde_json::Value,
) -> Result<MatroidIntersectionDoc, DocError> {
    let field = parse_field_at(v)?;
    let avectors = parse_int_matrix(v, "avectors")?;
    let bvectors = parse_int_matrix(v, "bvectors")?;
    let weights = parse_int_list(v, "weights")?;
    Ok(MatroidIntersectionDoc { field, avectors, bvectors, weights })
}

fn parse_field_at(v: &serde_json::Value) -> Result<FieldSpec, DocError> {
    let field = v.get("field").ok_or_else(|| DocError::new("field", "missing"))?;
    parse_field_doc(field, "field")
}

fn parse_int_list(v: &serde_json::Value, key: &str) -> Result<Vec<i64>, DocError> {
    let arr = v
        .get(key)
        .and_then(|x| x.as_array())
        .ok_or_else(|| DocError::new(key, "expected an array of integers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_i64()
                .ok_or_else(|| DocError::new(format!("{key}[{i}]"), "expected an integer"))
        })
        .collect()
}

fn parse_int_matrix(v: &serde_json::Value, key: &str) -> Result<Vec<Vec<i64>>, DocError> {
    let arr = v
        .get(key)
        .and_then(|x| x.as_array())
        .ok_or_else(|| DocError::new(key, "expected an array of integer vectors"))?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| DocError::new(format!("{key}[{i}]"), "expected an array"))?;
            row.iter()
                .enumerate()
                .map(|(j, x)| {
                    x.as_i64().ok_or_else(|| {
                        DocError::new(format!("{key}[{i}][{j}]"), "expected an integer")
                    })
                })
                .collect()
        })
        .collect()
}

/// Map integer document vectors into field elements.
pub fn int_vectors<F: Field>(f: &F, rows: &[Vec<i64>]) -> Vec<Vec<F::Elem>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| f.from_i64(x)).collect())
        .collect()
}

/// A mixed polynomial system over the field declared by its document.
#[derive(Debug, Clone)]
pub enum AnyMixed {
    GfP(GfP, MixedPolySystem<GfP>),
    Rational(Rationals, MixedPolySystem<Rationals>),
}

/// Parse `{"kind":"mixed", "field":..., "q":[["<poly>",...],...],
/// "t":[[row,col,var,k],...]}`. Entries of `q` are polynomials in `t`;
/// negative exponents are rejected.
pub fn parse_mixed_doc(v: &serde_json::Value) -> Result<AnyMixed, DocError> {
    match parse_field_at(v)? {
        FieldSpec::GfP(p) => {
            let f = GfP::new(p).map_err(|e| DocError::new("field.p", e.to_string()))?;
            let sys = parse_mixed_body(&f, v)?;
            Ok(AnyMixed::GfP(f, sys))
        }
        FieldSpec::Rational => {
            let f = Rationals;
            let sys = parse_mixed_body(&f, v)?;
            Ok(AnyMixed::Rational(f, sys))
        }
    }
}

fn parse_mixed_body<F: Field>(
    f: &F,
    v: &serde_json::Value,
) -> Result<MixedPolySystem<F>, DocError> {
    let q_json = v
        .get("q")
        .and_then(|x| x.as_array())
        .ok_or_else(|| DocError::new("q", "expected an array of rows"))?;
    let n = q_json.len();
    if n == 0 {
        return Err(DocError::new("q", "the numeric part must be nonempty"));
    }
    let mut qpart = Mat::fill(n, n, Poly::zero());
    for (i, row) in q_json.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| DocError::new(format!("q[{i}]"), "expected an array of strings"))?;
        if row.len() != n {
            return Err(DocError::new(
                format!("q[{i}]"),
                format!("expected {} entries, found {}", n, row.len()),
            ));
        }
        for (j, cell) in row.iter().enumerate() {
            let path = format!("q[{i}][{j}]");
            let s = cell
                .as_str()
                .ok_or_else(|| DocError::new(path.clone(), "expected a string"))?;
            let p = parse_poly(f, s).map_err(|e| DocError::new(path, e.to_string()))?;
            qpart.set(i, j, p);
        }
    }
    let t_json = v
        .get("t")
        .and_then(|x| x.as_array())
        .ok_or_else(|| DocError::new("t", "expected an array of placements"))?;
    let mut tpart = Vec::with_capacity(t_json.len());
    for (idx, e) in t_json.iter().enumerate() {
        let path = format!("t[{idx}]");
        let quad = e
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| DocError::new(path.clone(), "expected [row, col, var, k]"))?;
        let mut nums = [0i64; 4];
        for (slot, cell) in nums.iter_mut().zip(quad) {
            *slot = cell
                .as_i64()
                .ok_or_else(|| DocError::new(path.clone(), "expected integers"))?;
        }
        if nums[0] < 0 || nums[1] < 0 || nums[2] < 0 {
            return Err(DocError::new(path, "row, col and var must be nonnegative"));
        }
        tpart.push((nums[0] as usize, nums[1] as usize, nums[2] as usize, nums[3]));
    }
    MixedPolySystem::new(qpart, tpart).map_err(|e| DocError::new("t", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{deg_det, smith_mcmillan, subsets_of_size};
    use crate::pencil::commutative_degdet_oracle;
    use crate::poly::RatFn;
    use rand::{Rng, SeedableRng};

    fn gf(p: u64) -> GfP {
        GfP::new(p).unwrap()
    }

    fn matching_bruteforce(inst: &WeightedBipartiteInstance) -> Deg {
        let mut weight = std::collections::BTreeMap::new();
        for &(i, j, c) in &inst.edges {
            weight.insert((i, j), c);
        }
        let mut perm: Vec<usize> = (0..inst.n).collect();
        let mut best = Deg::NegInf;
        permute_all(&mut perm, 0, &mut |p| {
            let mut total = 0i64;
            for (i, &j) in p.iter().enumerate() {
                match weight.get(&(i, j)) {
                    Some(&c) => total += c,
                    None => return,
                }
            }
            best = best.max(Deg::Fin(total));
        });
        best
    }

    fn permute_all(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute_all(perm, k + 1, visit);
            perm.swap(k, i);
        }
    }

    #[test]
    fn matching_examples() {
        let f = gf(10007);
        let k22 = WeightedBipartiteInstance {
            n: 2,
            edges: vec![(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 4)],
        };
        assert_eq!(solve_weighted_matching(&f, &k22).unwrap(), Deg::Fin(5));

        let isolated = WeightedBipartiteInstance { n: 2, edges: vec![(0, 0, 7)] };
        assert_eq!(solve_weighted_matching(&f, &isolated).unwrap(), Deg::NegInf);

        let zeros = WeightedBipartiteInstance { n: 2, edges: vec![(0, 0, 0), (1, 1, 0)] };
        assert_eq!(solve_weighted_matching(&f, &zeros).unwrap(), Deg::Fin(0));

        let negative = WeightedBipartiteInstance {
            n: 2,
            edges: vec![(0, 0, -1), (0, 1, -2), (1, 0, -3), (1, 1, -4)],
        };
        assert_eq!(solve_weighted_matching(&f, &negative).unwrap(), Deg::Fin(-5));

        let dup = WeightedBipartiteInstance { n: 1, edges: vec![(0, 0, 1), (0, 0, 2)] };
        assert!(matches!(
            solve_weighted_matching(&f, &dup),
            Err(AppsError::InvalidInstance { .. })
        ));
    }

    #[test]
    fn matching_random_agrees_with_bruteforce() {
        let f = gf(10007);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9a7c);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if rng.gen_bool(0.6) {
                        edges.push((i, j, rng.gen_range(-3..=3)));
                    }
                }
            }
            let inst = WeightedBipartiteInstance { n, edges };
            assert_eq!(
                solve_weighted_matching(&f, &inst).unwrap(),
                matching_bruteforce(&inst),
            );
        }
    }

    fn elems<F: Field>(f: &F, rows: &[&[i64]]) -> Vec<Vec<F::Elem>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| f.from_i64(x)).collect())
            .collect()
    }

    #[test]
    fn max_weight_base_examples() {
        let f = gf(10007);
        let std3 = elems(&f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(solve_max_weight_base(&f, &std3, &[3, 2, 1]).unwrap(), Deg::Fin(6));

        // Two parallel vectors in dimension one: only the heavier one counts.
        let parallel = elems(&f, &[&[1], &[2]]);
        assert_eq!(solve_max_weight_base(&f, &parallel, &[5, 4]).unwrap(), Deg::Fin(5));

        let nonspanning = elems(&f, &[&[1, 0], &[2, 0]]);
        assert_eq!(
            solve_max_weight_base(&f, &nonspanning, &[1, 1]).unwrap(),
            Deg::NegInf
        );

        let negative = elems(&f, &[&[1]]);
        assert_eq!(solve_max_weight_base(&f, &negative, &[-2]).unwrap(), Deg::Fin(-2));
    }

    #[test]
    fn max_weight_base_random_agrees_with_subset_enumeration() {
        let f = gf(10007);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x51eb);
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=6);
            let vectors: Vec<Vec<u64>> = (0..m)
                .map(|_| (0..n).map(|_| f.from_i64(rng.gen_range(-2..=2))).collect())
                .collect();
            let weights: Vec<i64> = (0..m).map(|_| rng.gen_range(-2..=4)).collect();

            let mut best = Deg::NegInf;
            for subset in subsets_of_size(m, n) {
                let rows: Vec<Vec<u64>> = subset.iter().map(|&i| vectors[i].clone()).collect();
                if k_rank(&f, &Mat::from_rows(rows)) == n {
                    best = best.max(Deg::Fin(subset.iter().map(|&i| weights[i]).sum()));
                }
            }
            // The op itself asserts greedy == descent.
            assert_eq!(solve_max_weight_base(&f, &vectors, &weights).unwrap(), best);
        }
    }

    #[test]
    fn matroid_intersection_examples() {
        let f = gf(10007);
        // Both families generic: every size-2 subset is a common base.
        let inst = WeightedMatroidIntersectionInstance {
            avectors: elems(&f, &[&[1, 1], &[1, 2], &[1, 3]]),
            bvectors: elems(&f, &[&[2, 1], &[3, 1], &[5, 2]]),
            weights: vec![4, 1, 3],
        };
        assert_eq!(
            solve_weighted_matroid_intersection(&f, &inst).unwrap(),
            Deg::Fin(7)
        );

        // The a-family spans but every b-vector is parallel: no common base.
        let no_common = WeightedMatroidIntersectionInstance {
            avectors: elems(&f, &[&[1, 0], &[0, 1]]),
            bvectors: elems(&f, &[&[1, 1], &[2, 2]]),
            weights: vec![1, 1],
        };
        assert_eq!(
            solve_weighted_matroid_intersection(&f, &no_common).unwrap(),
            Deg::NegInf
        );
    }

    #[test]
    fn matroid_intersection_random_agrees_with_subset_enumeration() {
        let f = gf(10007);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xadd1);
        for _ in 0..15 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=6);
            let sample = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<u64>> {
                (0..m)
                    .map(|_| (0..n).map(|_| f.from_i64(rng.gen_range(-2..=2))).collect())
                    .collect()
            };
            let inst = WeightedMatroidIntersectionInstance {
                avectors: sample(&mut rng),
                bvectors: sample(&mut rng),
                weights: (0..m).map(|_| rng.gen_range(-3..=3)).collect(),
            };

            let mut best = Deg::NegInf;
            for subset in subsets_of_size(m, n) {
                let arows: Vec<Vec<u64>> =
                    subset.iter().map(|&i| inst.avectors[i].clone()).collect();
                let brows: Vec<Vec<u64>> =
                    subset.iter().map(|&i| inst.bvectors[i].clone()).collect();
                if k_rank(&f, &Mat::from_rows(arows)) == n
                    && k_rank(&f, &Mat::from_rows(brows)) == n
                {
                    best = best.max(Deg::Fin(subset.iter().map(|&i| inst.weights[i]).sum()));
                }
            }
            assert_eq!(solve_weighted_matroid_intersection(&f, &inst).unwrap(), best);
        }
    }

    fn poly_of<F: Field>(f: &F, coeffs: &[i64]) -> Poly<F> {
        Poly::from_coeffs(f, coeffs.iter().map(|&c| f.from_i64(c)).collect())
    }

    #[test]
    fn mixed_numeric_only_matches_plain_determinant() {
        let f = gf(10007);
        let q = Mat::from_rows(vec![
            vec![poly_of(&f, &[1, 2]), poly_of(&f, &[0, 0, 3])],
            vec![poly_of(&f, &[5]), poly_of(&f, &[1, 1])],
        ]);
        let sys = MixedPolySystem::new(q.clone(), vec![]).unwrap();
        let direct = deg_det(&f, &q.map(|p| RatFn::from_poly(&f, p.clone())));
        assert_eq!(mixed_poly_degdet(&f, &sys).unwrap().value, direct);
    }

    #[test]
    fn mixed_variable_diagonal_sums_exponents() {
        let f = gf(10007);
        let q = Mat::fill(3, 3, Poly::<GfP>::zero());
        let sys = MixedPolySystem::new(q, vec![(0, 0, 0, 3), (1, 1, 1, 1), (2, 2, 2, 2)]).unwrap();
        assert_eq!(mixed_poly_degdet(&f, &sys).unwrap().value, Deg::Fin(6));
    }

    #[test]
    fn mixed_random_agrees_with_substitution_oracle() {
        let f = gf(10007);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x3a1d);
        for trial in 0..10 {
            let n = 3;
            let q = Mat::from_fn(n, n, |_, _| {
                if rng.gen_bool(0.5) {
                    poly_of(
                        &f,
                        &[rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..3)],
                    )
                } else {
                    Poly::zero()
                }
            });
            let mut tpart = Vec::new();
            let mut var = 0usize;
            for _ in 0..rng.gen_range(0..=3) {
                let (row, col) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if tpart.iter().any(|&(r, c, _, _)| (r, c) == (row, col)) {
                    continue;
                }
                tpart.push((row, col, var, rng.gen_range(0..=2i64)));
                var += 1;
            }
            let sys = MixedPolySystem::new(q, tpart).unwrap();
            let oracle = commutative_degdet_oracle(&f, &sys.to_pencil(&f), 8, 0xbeef + trial)
                .unwrap()
                .value;
            assert_eq!(mixed_poly_degdet(&f, &sys).unwrap().value, oracle);
        }
    }

    #[test]
    fn mixed_rejects_malformed_systems() {
        let f = gf(10007);
        let rect = Mat::fill(2, 3, Poly::<GfP>::zero());
        assert!(matches!(
            MixedPolySystem::new(rect, vec![]),
            Err(AppsError::NonSquare { rows: 2, cols: 3 })
        ));
        let q = Mat::fill(2, 2, Poly::<GfP>::zero());
        assert!(matches!(
            MixedPolySystem::new(q.clone(), vec![(0, 0, 7, 0), (1, 1, 7, 0)]),
            Err(AppsError::InvalidInstance { .. })
        ));
        assert!(matches!(
            MixedPolySystem::new(q.clone(), vec![(0, 0, 0, 0), (0, 0, 1, 1)]),
            Err(AppsError::InvalidInstance { .. })
        ));
        assert!(matches!(
            MixedPolySystem::new(q, vec![(0, 0, 0, -1)]),
            Err(AppsError::InvalidInstance { .. })
        ));
        let _ = f;
    }

    #[test]
    fn dae_index_worked_examples() {
        let f = gf(10007);
        // Pure ODE x' = 0: matrix tI, index zero.
        let ode = MixedPolySystem::new(
            Mat::from_rows(vec![
                vec![poly_of(&f, &[0, 1]), Poly::zero()],
                vec![Poly::zero(), poly_of(&f, &[0, 1])],
            ]),
            vec![],
        )
        .unwrap();
        assert_eq!(dae_index(&f, &ode, 2).unwrap(), DaeOutcome::Index(0));

        // Purely algebraic x = 0: matrix I, index one.
        let algebraic = MixedPolySystem::new(
            Mat::from_rows(vec![
                vec![poly_of(&f, &[1]), Poly::zero()],
                vec![Poly::zero(), poly_of(&f, &[1])],
            ]),
            vec![],
        )
        .unwrap();
        assert_eq!(dae_index(&f, &algebraic, 2).unwrap(), DaeOutcome::Index(1));

        // diag(t, 1): one differential and one algebraic equation, index one.
        let semi = MixedPolySystem::new(
            Mat::from_rows(vec![
                vec![poly_of(&f, &[0, 1]), Poly::zero()],
                vec![Poly::zero(), poly_of(&f, &[1])],
            ]),
            vec![],
        )
        .unwrap();
        assert_eq!(dae_index(&f, &semi, 2).unwrap(), DaeOutcome::Index(1));

        // [[1, t], [t, t^2 + 1]] has determinant 1 and alpha = (2, -2):
        // index three. A budget for index two must give up; three suffices.
        let hidden = MixedPolySystem::new(
            Mat::from_rows(vec![
                vec![poly_of(&f, &[1]), poly_of(&f, &[0, 1])],
                vec![poly_of(&f, &[0, 1]), poly_of(&f, &[1, 0, 1])],
            ]),
            vec![],
        )
        .unwrap();
        assert_eq!(dae_index(&f, &hidden, 2).unwrap(), DaeOutcome::Exceeds { delta: 2 });
        assert_eq!(dae_index(&f, &hidden, 3).unwrap(), DaeOutcome::Index(3));

        // Singular system: no index.
        let singular = MixedPolySystem::new(
            Mat::from_rows(vec![
                vec![poly_of(&f, &[1]), Poly::zero()],
                vec![Poly::zero(), Poly::zero()],
            ]),
            vec![],
        )
        .unwrap();
        assert_eq!(dae_index(&f, &singular, 3), Err(AppsError::SingularSystem));
    }

    #[test]
    fn dae_index_matches_smith_mcmillan_exponent() {
        let f = gf(10007);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xdae0);
        let mut checked = 0;
        for _ in 0..8 {
            let n = rng.gen_range(2..=3);
            // Q = I + t R is nonsingular for every R, so the index exists.
            let q = Mat::from_fn(n, n, |i, j| {
                let lead = i64::from(i == j);
                poly_of(&f, &[lead, rng.gen_range(0..7)])
            });
            let mut tpart = Vec::new();
            for var in 0..rng.gen_range(0..=2usize) {
                let (row, col) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if tpart.iter().any(|&(r, c, _, _)| (r, c) == (row, col)) {
                    continue;
                }
                tpart.push((row, col, var, rng.gen_range(0..=1i64)));
            }
            let sys = MixedPolySystem::new(q, tpart).unwrap();
            let DaeOutcome::Index(idx) = dae_index(&f, &sys, 6).unwrap() else {
                continue;
            };
            let symbolic = mixed_poly_degdet(&f, &sys).unwrap().value;
            let direct = sys.to_pencil(&f);
            // Substitute until the degree survives, then compare exponents.
            for attempt in 0..20 {
                let subs: Vec<u64> = (0..direct.num_vars())
                    .map(|_| f.from_i64(rng.gen_range(1..10007)))
                    .collect();
                let m = direct.substitute(&f, &subs).map(|l| l.to_ratfn(&f));
                if deg_det(&f, &m) != symbolic {
                    assert!(attempt < 19, "no substitution preserved the degree");
                    continue;
                }
                let smith = smith_mcmillan(&f, &m).unwrap();
                assert_eq!(idx, 1 - smith.alpha[n - 1]);
                checked += 1;
                break;
            }
        }
        assert!(checked >= 4, "too few nonsingular trials: {checked}");
    }

    #[test]
    fn instance_documents_parse_and_reject() {
        let matching = serde_json::json!({
            "kind": "matching",
            "n": 2,
            "edges": [[0, 0, 1], [1, 1, -4]],
        });
        assert_eq!(instance_kind(&matching).unwrap(), "matching");
        let inst = parse_matching_doc(&matching).unwrap();
        assert_eq!(inst.n, 2);
        assert_eq!(inst.edges, vec![(0, 0, 1), (1, 1, -4)]);
        assert!(parse_matching_doc(&serde_json::json!({"kind":"matching","n":1}))
            .is_err());

        let base = serde_json::json!({
            "kind": "matroid-base",
            "field": {"kind": "gfp", "p": 10007},
            "vectors": [[1, 0], [0, 1], [1, 1]],
            "weights": [3, 2, 1],
        });
        let doc = parse_matroid_base_doc(&base).unwrap();
        assert_eq!(doc.field, FieldSpec::GfP(10007));
        assert_eq!(doc.vectors.len(), 3);
        let f = gf(10007);
        let value =
            solve_max_weight_base(&f, &int_vectors(&f, &doc.vectors), &doc.weights).unwrap();
        assert_eq!(value, Deg::Fin(5));

        let inter = serde_json::json!({
            "kind": "matroid-intersection",
            "field": {"kind": "rational"},
            "avectors": [[1, 0], [0, 1]],
            "bvectors": [[1, 1], [1, 2]],
            "weights": [2, 2],
        });
        let doc = parse_matroid_intersection_doc(&inter).unwrap();
        assert_eq!(doc.field, FieldSpec::Rational);

        let mixed = serde_json::json!({
            "kind": "mixed",
            "field": {"kind": "gfp", "p": 10007},
            "q": [["1", "t"], ["0", "t^2+1"]],
            "t": [[1, 0, 0, 1]],
        });
        let AnyMixed::GfP(f, sys) = parse_mixed_doc(&mixed).unwrap() else {
            panic!("expected a GF(p) system");
        };
        assert_eq!(sys.size(), 2);
        assert_eq!(sys.tpart, vec![(1, 0, 0, 1)]);
        assert_eq!(sys.qpart.at(0, 1), &poly_of(&f, &[0, 1]));

        let negative_exp = serde_json::json!({
            "kind": "mixed",
            "field": {"kind": "gfp", "p": 10007},
            "q": [["t^-1"]],
            "t": [],
        });
        assert!(parse_mixed_doc(&negative_exp).is_err());

        let bad_kind = serde_json::json!({"kind": 7});
        assert!(instance_kind(&bad_kind).is_err());
    }
}
