//! Steepest descent for L-convex functions on the integer lattice.
//!
//! An L-convex function satisfies the discrete submodularity inequality
//! `g(x) + g(y) >= g(min(x,y)) + g(max(x,y))` and is affine along the
//! all-ones direction; we work with the 1-periodic case, where minimizing
//! over unit-box steps `x + {0,1}^n` is enough. Local optimality is global,
//! and the number of descent steps equals the l-infinity distance to the
//! nearest minimizer above the start, which `iteration_bound_check`
//! instruments against a brute-forced box.
//!
//! This module is the scalar reference model for the matrix solver: the
//! degree of the Dieudonne determinant is the minimum of an L-convex
//! function on the building of lattices, and the matrix algorithm mirrors
//! `sda_zn` step for step.

use crate::exec::{self, ExecMode};
use crate::matrix::subsets_of_size;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::error::Error;
use std::fmt;

/// Unit-box minimization enumerates `2^n` candidates up to this dimension.
pub const ENUM_CAP: usize = 20;

/// Iteration fuse: converts nontermination on invalid inputs into an error.
pub const DEFAULT_FUSE: usize = 1_000_000;

/// Float slack for submodularity checks on evaluated values.
const SUB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LconvexError {
    /// Dimension exceeds the enumeration cap and no custom step minimizer
    /// was supplied.
    CapExceeded { dim: usize, cap: usize },
    /// Descent did not terminate within the fuse. Either the function is not
    /// L-convex (a violating pair is reported when the spot check finds one)
    /// or it has no minimizer.
    NoDescentProgress {
        point: Vec<i64>,
        iterations: usize,
        violation: Option<(Vec<i64>, Vec<i64>)>,
    },
    /// The verification box does not provably contain the relevant
    /// minimizers.
    BoxTooSmall { detail: String },
}

impl fmt::Display for LconvexError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LconvexError::CapExceeded { dim, cap } => {
                write!(out, "dimension {} exceeds the enumeration cap {}", dim, cap)
            }
            LconvexError::NoDescentProgress { point, iterations, violation } => {
                write!(out, "no convergence after {} steps at {:?}", iterations, point)?;
                match violation {
                    Some((x, y)) => {
                        write!(out, "; submodularity fails on the pair {:?}, {:?}", x, y)
                    }
                    None => write!(out, "; no submodularity violation found, the function may be unbounded below"),
                }
            }
            LconvexError::BoxTooSmall { detail } => {
                write!(out, "verification box too small: {}", detail)
            }
        }
    }
}

impl Error for LconvexError {}

/// A function `Z^n -> R ∪ {+inf}` (`f64::INFINITY` encodes infinity).
///
/// `submodular_checked` and `lin_periodic` are caller certifications: the
/// first skips the defensive submodularity spot check, the second tells the
/// bound checker that minimizers translate along the all-ones vector.
pub struct ZFunction<'a> {
    pub dim: usize,
    eval: Box<dyn Fn(&[i64]) -> f64 + Send + Sync + 'a>,
    pub submodular_checked: bool,
    pub lin_periodic: bool,
    step_minimizer: Option<Box<dyn Fn(&[i64]) -> Vec<u8> + Send + Sync + 'a>>,
}

impl<'a> ZFunction<'a> {
    pub fn new(dim: usize, eval: impl Fn(&[i64]) -> f64 + Send + Sync + 'a) -> Self {
        ZFunction {
            dim,
            eval: Box::new(eval),
            submodular_checked: false,
            lin_periodic: false,
            step_minimizer: None,
        }
    }

    /// Certify submodularity, skipping the runtime spot check.
    pub fn certified_submodular(mut self) -> Self {
        self.submodular_checked = true;
        self
    }

    /// Certify 1-periodicity: `g(x + all-ones) = g(x)`.
    pub fn certified_periodic(mut self) -> Self {
        self.lin_periodic = true;
        self
    }

    /// Install a custom unit-box minimizer, lifting the enumeration cap.
    /// Given `x` it must return a 0/1 vector `u` minimizing `g(x + u)`.
    pub fn with_step_minimizer(
        mut self,
        m: impl Fn(&[i64]) -> Vec<u8> + Send + Sync + 'a,
    ) -> Self {
        self.step_minimizer = Some(Box::new(m));
        self
    }

    pub fn eval(&self, x: &[i64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }
}

impl fmt::Debug for ZFunction<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.debug_struct("ZFunction")
            .field("dim", &self.dim)
            .field("submodular_checked", &self.submodular_checked)
            .field("lin_periodic", &self.lin_periodic)
            .finish()
    }
}

/// The itinerary of one descent run: visited points, their values, and the
/// chosen 0/1 direction per step. `values` strictly decreases.
#[derive(Debug, Clone, PartialEq)]
pub struct SdaTrace {
    pub points: Vec<Vec<i64>>,
    pub values: Vec<f64>,
    pub directions: Vec<Vec<u8>>,
}

impl SdaTrace {
    pub fn steps(&self) -> usize {
        self.directions.len()
    }

    pub fn final_point(&self) -> &[i64] {
        self.points.last().expect("trace holds at least the start")
    }
}

/// Minimize `g` over the unit box `x + {0,1}^n`, returning the optimal step.
///
/// Ties break to fewer raised coordinates, then to the earliest raised
/// index, so `u = 0` whenever `x` is already box-optimal. Enumeration walks
/// support sizes in ascending order; candidates within a layer may be
/// evaluated concurrently, with the winner chosen in deterministic order.
///
/// # Errors
/// `CapExceeded` when `n` exceeds [`ENUM_CAP`] and no custom minimizer is
/// installed.
pub fn steepest_direction(g: &ZFunction<'_>, x: &[i64]) -> Result<Vec<u8>, LconvexError> {
    let n = g.dim;
    assert_eq!(x.len(), n);
    if let Some(custom) = &g.step_minimizer {
        let u = custom(x);
        assert_eq!(u.len(), n, "custom step minimizer returned a wrong-sized direction");
        debug_assert!(u.iter().all(|&b| b <= 1));
        return Ok(u);
    }
    if n > ENUM_CAP {
        return Err(LconvexError::CapExceeded { dim: n, cap: ENUM_CAP });
    }
    let base = g.eval(x);
    assert!(base.is_finite(), "descent requires a finite starting value");
    let mut best_val = base;
    let mut best_u = vec![0u8; n];
    for k in 1..=n {
        let layer = subsets_of_size(n, k);
        let layer_best = exec::best_in_order(
            ExecMode::Auto,
            layer,
            |support| {
                let mut y = x.to_vec();
                for &i in &support {
                    y[i] += 1;
                }
                let v = g.eval(&y);
                v.is_finite().then_some((v, support))
            },
            |cand, inc| cand.0 < inc.0,
        );
        if let Some((v, support)) = layer_best {
            if v < best_val {
                best_val = v;
                best_u = vec![0u8; n];
                for i in support {
                    best_u[i] = 1;
                }
            }
        }
    }
    Ok(best_u)
}

/// Steepest descent on `Z^n` with the default fuse.
pub fn sda_zn(g: &ZFunction<'_>, x0: &[i64]) -> Result<(Vec<i64>, SdaTrace), LconvexError> {
    sda_zn_capped(g, x0, DEFAULT_FUSE)
}

/// Steepest descent: repeatedly take the best unit-box step until none
/// improves. For L-convex `g` the terminal point is a global minimizer and
/// the step count meets the distance bound checked by
/// [`iteration_bound_check`].
///
/// # Errors
/// `CapExceeded` from the direction oracle; `NoDescentProgress` when the
/// submodularity spot check fails up front or the fuse runs out.
pub fn sda_zn_capped(
    g: &ZFunction<'_>,
    x0: &[i64],
    fuse: usize,
) -> Result<(Vec<i64>, SdaTrace), LconvexError> {
    assert_eq!(x0.len(), g.dim);
    let start = g.eval(x0);
    assert!(start.is_finite(), "descent requires a finite starting value");
    if !g.submodular_checked {
        if let Some(pair) = submodularity_violation(g, x0) {
            return Err(LconvexError::NoDescentProgress {
                point: x0.to_vec(),
                iterations: 0,
                violation: Some(pair),
            });
        }
    }
    let mut x = x0.to_vec();
    let mut value = start;
    let mut trace = SdaTrace {
        points: vec![x.clone()],
        values: vec![value],
        directions: Vec::new(),
    };
    for _ in 0..fuse {
        let u = steepest_direction(g, &x)?;
        if u.iter().all(|&b| b == 0) {
            return Ok((x, trace));
        }
        for (xi, &ui) in x.iter_mut().zip(&u) {
            *xi += ui as i64;
        }
        let next = g.eval(&x);
        // The direction oracle prefers u = 0 on ties, so movement is strict.
        debug_assert!(next < value);
        value = next;
        trace.points.push(x.clone());
        trace.values.push(value);
        trace.directions.push(u);
    }
    Err(LconvexError::NoDescentProgress {
        point: x,
        iterations: fuse,
        violation: submodularity_violation(g, x0),
    })
}

/// Deterministic random spot check of `g(x) + g(y) >= g(min) + g(max)` on
/// pairs near `center`; returns a violating pair if one is found.
fn submodularity_violation(g: &ZFunction<'_>, center: &[i64]) -> Option<(Vec<i64>, Vec<i64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF_EE);
    for _ in 0..64 {
        let x: Vec<i64> = center.iter().map(|&c| c + rng.gen_range(-2..=2)).collect();
        let y: Vec<i64> = center.iter().map(|&c| c + rng.gen_range(-2..=2)).collect();
        let gx = g.eval(&x);
        let gy = g.eval(&y);
        if !gx.is_finite() || !gy.is_finite() {
            continue;
        }
        let lo: Vec<i64> = x.iter().zip(&y).map(|(&a, &b)| a.min(b)).collect();
        let hi: Vec<i64> = x.iter().zip(&y).map(|(&a, &b)| a.max(b)).collect();
        let rhs = g.eval(&lo) + g.eval(&hi);
        if gx + gy + SUB_TOL < rhs {
            return Some((x, y));
        }
    }
    None
}

/// Enumerate every lattice point of the box `[lo, hi]`, calling `visit`.
fn walk_box(lo: &[i64], hi: &[i64], mut visit: impl FnMut(&[i64])) {
    let n = lo.len();
    let mut point: Vec<i64> = lo.to_vec();
    if lo.iter().zip(hi).any(|(&a, &b)| a > b) {
        return;
    }
    loop {
        visit(&point);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            point[pos] += 1;
            if point[pos] <= hi[pos] {
                break;
            }
            point[pos] = lo[pos];
        }
    }
}

/// Verify the iteration bound against a brute-forced box: the trace length
/// must not exceed the least l-infinity distance from `x0` to a minimizer
/// sitting above `x0`, and the terminal value must equal the box minimum.
///
/// For certified-periodic functions, in-box minimizers are translated along
/// the all-ones vector to their closest representative above `x0`; otherwise
/// only in-box minimizers above `x0` count.
///
/// # Errors
/// `BoxTooSmall` when `x0` is outside the box, the box holds no finite
/// value, or no admissible minimizer exists in it.
pub fn iteration_bound_check(
    g: &ZFunction<'_>,
    trace: &SdaTrace,
    x0: &[i64],
    lo: &[i64],
    hi: &[i64],
) -> Result<bool, LconvexError> {
    let n = g.dim;
    assert_eq!(x0.len(), n);
    assert_eq!(lo.len(), n);
    assert_eq!(hi.len(), n);
    let volume: i64 = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| (b - a + 1).max(0))
        .product();
    assert!(volume <= 10_000_000, "box too large to brute force");
    if x0.iter().zip(lo.iter().zip(hi)).any(|(&v, (&a, &b))| v < a || v > b) {
        return Err(LconvexError::BoxTooSmall {
            detail: "start point lies outside the box".into(),
        });
    }
    let mut best = f64::INFINITY;
    let mut minimizers: Vec<Vec<i64>> = Vec::new();
    walk_box(lo, hi, |p| {
        let v = g.eval(p);
        if v < best - SUB_TOL {
            best = v;
            minimizers.clear();
            minimizers.push(p.to_vec());
        } else if (v - best).abs() <= SUB_TOL {
            minimizers.push(p.to_vec());
        }
    });
    if !best.is_finite() {
        return Err(LconvexError::BoxTooSmall {
            detail: "no finite value in the box".into(),
        });
    }
    let final_value = trace.values.last().copied().unwrap_or(f64::INFINITY);
    if final_value < best - SUB_TOL {
        // The descent reached a value the box never sees, so the box is
        // certainly missing the minimizers.
        return Err(LconvexError::BoxTooSmall {
            detail: format!(
                "descent reached {} but the box minimum is {}",
                final_value, best
            ),
        });
    }
    let mut k: Option<i64> = None;
    for y in &minimizers {
        let candidate = if g.lin_periodic {
            // Slide y along the all-ones line to the least translate >= x0.
            let c = y.iter().zip(x0).map(|(&yi, &xi)| xi - yi).max().unwrap_or(0);
            y.iter().zip(x0).map(|(&yi, &xi)| yi + c - xi).max().unwrap_or(0)
        } else {
            if y.iter().zip(x0).any(|(&yi, &xi)| yi < xi) {
                continue;
            }
            y.iter().zip(x0).map(|(&yi, &xi)| yi - xi).max().unwrap_or(0)
        };
        k = Some(k.map_or(candidate, |cur: i64| cur.min(candidate)));
    }
    let k = match k {
        Some(k) => k,
        None => {
            return Err(LconvexError::BoxTooSmall {
                detail: "no minimizer above the start point in the box".into(),
            })
        }
    };
    let reaches_min = (final_value - best).abs() <= SUB_TOL;
    Ok(reaches_min && trace.steps() as i64 <= k)
}

/// The network-flow dual family `g(x) = sum w |x_i - x_j - b|` over the
/// given arcs: L-convex and 1-periodic, the staple test instance.
pub fn network_dual(n: usize, arcs: Vec<(usize, usize, i64, f64)>) -> ZFunction<'static> {
    for &(i, j, _, w) in &arcs {
        assert!(i < n && j < n, "arc endpoint out of range");
        assert!(w >= 0.0, "arc weights must be nonnegative");
    }
    ZFunction::new(n, move |x: &[i64]| {
        arcs.iter()
            .map(|&(i, j, b, w)| w * (x[i] - x[j] - b).abs() as f64)
            .sum()
    })
    .certified_submodular()
    .certified_periodic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn abs_sum() -> ZFunction<'static> {
        ZFunction::new(2, |x: &[i64]| x.iter().map(|&v| v.abs() as f64).sum())
    }

    #[test]
    fn steepest_direction_examples() {
        let g = abs_sum();
        assert_eq!(steepest_direction(&g, &[-1, -1]).unwrap(), vec![1, 1]);
        assert_eq!(steepest_direction(&g, &[0, 0]).unwrap(), vec![0, 0]);

        // Off-band points are infeasible: the step must stay in the band
        // |x1 - x2| <= 1 while still descending.
        let band = ZFunction::new(2, |x: &[i64]| {
            if (x[0] - x[1]).abs() > 1 {
                f64::INFINITY
            } else {
                (x[0].abs() + x[1].abs()) as f64
            }
        });
        let u = steepest_direction(&band, &[-3, -2]).unwrap();
        assert_eq!(u, vec![1, 1], "the diagonal step is the only in-band improvement");
    }

    #[test]
    fn steepest_direction_tie_breaks_to_smallest_support() {
        // Flat along both axes: moving gains nothing, so stay put.
        let flat = ZFunction::new(3, |_: &[i64]| 1.0);
        assert_eq!(steepest_direction(&flat, &[5, -2, 0]).unwrap(), vec![0, 0, 0]);
        // Two equally good single steps: the earliest index wins.
        let g = ZFunction::new(2, |x: &[i64]| (-(x[0] + x[1])).max(0) as f64);
        assert_eq!(steepest_direction(&g, &[-1, 0]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn enumeration_cap_is_enforced_and_liftable() {
        let big = ZFunction::new(21, |_: &[i64]| 0.0);
        assert!(matches!(
            steepest_direction(&big, &vec![0; 21]),
            Err(LconvexError::CapExceeded { dim: 21, cap: ENUM_CAP })
        ));
        let lifted = ZFunction::new(21, |_: &[i64]| 0.0)
            .with_step_minimizer(|_: &[i64]| vec![0; 21]);
        assert_eq!(steepest_direction(&lifted, &vec![0; 21]).unwrap(), vec![0; 21]);
    }

    #[test]
    fn one_dimensional_descent_takes_exactly_the_distance() {
        let g = ZFunction::new(1, |x: &[i64]| (x[0] - 5).abs() as f64).certified_submodular();
        let (min, trace) = sda_zn(&g, &[0]).unwrap();
        assert_eq!(min, vec![5]);
        assert_eq!(trace.steps(), 5);
        assert!(iteration_bound_check(&g, &trace, &[0], &[-2], &[9]).unwrap());
        // Values strictly decrease along the trace.
        assert!(trace.values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn constant_function_returns_immediately() {
        let g = ZFunction::new(3, |_: &[i64]| 7.0).certified_submodular();
        let (min, trace) = sda_zn(&g, &[4, -1, 2]).unwrap();
        assert_eq!(min, vec![4, -1, 2]);
        assert_eq!(trace.steps(), 0);
    }

    #[test]
    fn separable_convex_converges_in_max_gap_steps() {
        let target = [3i64, 1, 4];
        let g = ZFunction::new(3, move |x: &[i64]| {
            x.iter().zip(&target).map(|(&v, &t)| (v - t).abs() as f64).sum()
        })
        .certified_submodular();
        let x0 = [0i64, 0, 0];
        let (min, trace) = sda_zn(&g, &x0).unwrap();
        assert_eq!(min, vec![3, 1, 4]);
        let max_gap = target.iter().zip(&x0).map(|(&t, &s)| t - s).max().unwrap();
        assert_eq!(trace.steps() as i64, max_gap);
    }

    #[test]
    fn non_submodular_input_is_rejected_with_a_witness() {
        // (x1 + x2)^2 is convex but supermodular off the diagonal.
        let g = ZFunction::new(2, |x: &[i64]| ((x[0] + x[1]) * (x[0] + x[1])) as f64);
        match sda_zn(&g, &[0, 0]) {
            Err(LconvexError::NoDescentProgress { violation: Some((x, y)), .. }) => {
                let lo: Vec<i64> = x.iter().zip(&y).map(|(&a, &b)| a.min(b)).collect();
                let hi: Vec<i64> = x.iter().zip(&y).map(|(&a, &b)| a.max(b)).collect();
                assert!(g.eval(&x) + g.eval(&y) < g.eval(&lo) + g.eval(&hi));
            }
            other => panic!("expected a submodularity witness, got {:?}", other.map(|r| r.0)),
        }
    }

    #[test]
    fn unbounded_descent_hits_the_fuse() {
        let g = ZFunction::new(1, |x: &[i64]| -x[0] as f64).certified_submodular();
        match sda_zn_capped(&g, &[0], 50) {
            Err(LconvexError::NoDescentProgress { iterations: 50, violation: None, .. }) => {}
            other => panic!("expected a fuse trip, got {:?}", other.map(|r| r.0)),
        }
    }

    #[test]
    fn bound_check_flags_bad_boxes() {
        let g = ZFunction::new(1, |x: &[i64]| (x[0] - 5).abs() as f64).certified_submodular();
        let (_, trace) = sda_zn(&g, &[0]).unwrap();
        // Start outside the box.
        assert!(matches!(
            iteration_bound_check(&g, &trace, &[0], &[1], &[9]),
            Err(LconvexError::BoxTooSmall { .. })
        ));
        // Box misses every minimizer above the start.
        assert!(matches!(
            iteration_bound_check(&g, &trace, &[0], &[-2], &[4]),
            Err(LconvexError::BoxTooSmall { .. })
        ));
    }

    fn random_network_dual(rng: &mut impl Rng, n: usize) -> ZFunction<'static> {
        let arcs = (0..rng.gen_range(1..=6))
            .map(|_| {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                if j == i {
                    j = (j + 1) % n;
                }
                (i, j, rng.gen_range(-3..=3), rng.gen_range(0..=4) as f64)
            })
            .collect();
        network_dual(n, arcs)
    }

    #[test]
    fn network_duals_reach_box_minima_within_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let n = rng.gen_range(2..=3);
            let g = random_network_dual(&mut rng, n);
            let x0: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            let (min, trace) = sda_zn(&g, &x0).unwrap();
            // Some minimizer sits within (n-1)*max|b| + spread(x0) above x0,
            // so this box provably contains one.
            let lo: Vec<i64> = x0.iter().map(|&v| v - 1).collect();
            let hi: Vec<i64> = x0.iter().map(|&v| v + 11).collect();
            assert!(
                iteration_bound_check(&g, &trace, &x0, &lo, &hi).unwrap(),
                "bound violated for start {:?}",
                x0
            );
            // Local-to-global: the terminal point admits no improving step.
            let u = steepest_direction(&g, &min).unwrap();
            assert_eq!(u, vec![0; n]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Strict descent and the distance bound hold across random network
        /// duals and random starts.
        #[test]
        fn descent_invariants_hold(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=3);
            let g = random_network_dual(&mut rng, n);
            let x0: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            let (_, trace) = sda_zn(&g, &x0).unwrap();
            prop_assert!(trace.values.windows(2).all(|w| w[1] < w[0]));
            let lo: Vec<i64> = x0.iter().map(|&v| v - 1).collect();
            let hi: Vec<i64> = x0.iter().map(|&v| v + 13).collect();
            prop_assert!(iteration_bound_check(&g, &trace, &x0, &lo, &hi).unwrap());
        }

        /// A separable convex function is minimized coordinatewise.
        #[test]
        fn separable_minimum_is_componentwise(t1 in -4i64..=4, t2 in -4i64..=4) {
            let g = ZFunction::new(2, move |x: &[i64]| {
                ((x[0] - t1).abs() + (x[1] - t2).abs()) as f64
            })
            .certified_submodular();
            let x0 = [t1.min(t2) - 2, t1.min(t2) - 2];
            let (min, _) = sda_zn(&g, &x0).unwrap();
            prop_assert_eq!(min, vec![t1, t2]);
        }
    }
}
