//! Batch execution helpers: data-parallel map with a sequential fallback.
//!
//! Everything in this crate is a pure function over immutable values, so
//! batch loops (oracle trials, exhaustive sweeps) can fan out freely. With
//! the `parallel` feature the helpers dispatch to rayon once a batch is
//! large enough to amortize scheduling; without it they compile to plain
//! iterator loops. Results are merged in input order, so both paths are
//! bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for batch helpers.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ExecMode {
    /// Parallel when available and the batch clears the size threshold.
    #[default]
    Auto,
    /// Always run on the calling thread.
    Sequential,
}

/// Batches smaller than this run sequentially even in `Auto` mode.
const PAR_THRESHOLD: usize = 16;

#[cfg(feature = "parallel")]
fn use_parallel(mode: ExecMode, len: usize) -> bool {
    mode == ExecMode::Auto && len >= PAR_THRESHOLD
}

/// Map a batch, preserving input order in the output.
pub fn map_collect<T, U, Op>(mode: ExecMode, items: Vec<T>, op: Op) -> Vec<U>
where
    T: Send,
    U: Send,
    Op: Fn(T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if use_parallel(mode, items.len()) {
        return items.into_par_iter().map(op).collect();
    }
    items.into_iter().map(op).collect()
}

/// Map an index range, preserving order.
pub fn map_range<U, Op>(mode: ExecMode, n: usize, op: Op) -> Vec<U>
where
    U: Send,
    Op: Fn(usize) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if use_parallel(mode, n) {
        return (0..n).into_par_iter().map(op).collect();
    }
    (0..n).map(op).collect()
}

/// Keep the best value under `better(candidate, incumbent)`, scanning in
/// input order so ties resolve to the earliest item deterministically.
pub fn best_in_order<T, U, Op, Better>(
    mode: ExecMode,
    items: Vec<T>,
    op: Op,
    better: Better,
) -> Option<U>
where
    T: Send,
    U: Send,
    Op: Fn(T) -> Option<U> + Send + Sync,
    Better: Fn(&U, &U) -> bool,
{
    let evaluated = map_collect(mode, items, op);
    let mut best: Option<U> = None;
    for cand in evaluated.into_iter().flatten() {
        match &best {
            Some(b) if !better(&cand, b) => {}
            _ => best = Some(cand),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        let seq = map_collect(ExecMode::Sequential, v.clone(), |x| x * x);
        let auto = map_collect(ExecMode::Auto, v, |x| x * x);
        assert_eq!(seq, auto);
    }

    #[test]
    fn best_takes_earliest_among_ties() {
        let items = vec![(3, 'a'), (1, 'b'), (3, 'c')];
        let best = best_in_order(
            ExecMode::Sequential,
            items,
            Some,
            |c: &(i32, char), b: &(i32, char)| c.0 > b.0,
        );
        assert_eq!(best, Some((3, 'a')));
    }
}
