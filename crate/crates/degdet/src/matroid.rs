//! Matroids and (unweighted) matroid intersection.
//!
//! Three concrete matroids are enough for everything downstream: linear
//! matroids over a [`Field`](crate::field::Field), partition matroids, and
//! direct sums of the two. The intersection solver is the classic shortest
//! augmenting path scheme on the exchange digraph; it reports, besides a
//! maximum common independent set, the min-max certificate pair obtained
//! from the reachability cut at termination.

use crate::field::Field;
use crate::matrix::{rref, Mat};
use std::collections::VecDeque;
use std::error::Error;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatroidError {
    /// The two matroids handed to an intersection live on different ground sets.
    GroundMismatch { left: usize, right: usize },
}

impl fmt::Display for MatroidError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatroidError::GroundMismatch { left, right } => {
                write!(out, "ground sets differ: {} vs {}", left, right)
            }
        }
    }
}

impl Error for MatroidError {}

/// Batch answers for all single-element exchanges against one independent set.
///
/// `addable[z]` says whether `I + z` stays independent; `swap[k][z]` whether
/// `I - I[k] + z` is independent (only consulted for `z` outside `I`).
pub struct Exchanges {
    pub addable: Vec<bool>,
    pub swap: Vec<Vec<bool>>,
}

pub trait Matroid {
    fn ground_size(&self) -> usize;

    /// Rank of the given subset of the ground set (indices need not be sorted).
    fn rank(&self, set: &[usize]) -> usize;

    fn is_independent(&self, set: &[usize]) -> bool {
        self.rank(set) == set.len()
    }

    /// All exchange queries against `ind` in one call. The default answers
    /// them through the rank oracle; implementations override this when a
    /// single factorization can answer the whole batch.
    fn exchanges(&self, ind: &[usize]) -> Exchanges {
        let n = self.ground_size();
        let mut inside = vec![false; n];
        for &e in ind {
            inside[e] = true;
        }
        let mut buf: Vec<usize> = Vec::with_capacity(ind.len() + 1);
        let mut addable = vec![false; n];
        for z in 0..n {
            if inside[z] {
                continue;
            }
            buf.clear();
            buf.extend_from_slice(ind);
            buf.push(z);
            addable[z] = self.is_independent(&buf);
        }
        let mut swap = Vec::with_capacity(ind.len());
        for k in 0..ind.len() {
            let mut row = vec![false; n];
            for z in 0..n {
                if inside[z] {
                    continue;
                }
                if addable[z] {
                    row[z] = true;
                    continue;
                }
                buf.clear();
                buf.extend(ind.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &e)| e));
                buf.push(z);
                row[z] = self.is_independent(&buf);
            }
            swap.push(row);
        }
        Exchanges { addable, swap }
    }
}

/// Column matroid of a K-matrix: ground element `j` is column `j`.
pub struct LinearMatroid<F: Field> {
    field: F,
    vectors: Mat<F::Elem>,
}

impl<F: Field> LinearMatroid<F> {
    pub fn new(field: F, vectors: Mat<F::Elem>) -> Self {
        LinearMatroid { field, vectors }
    }

    pub fn vectors(&self) -> &Mat<F::Elem> {
        &self.vectors
    }

    fn columns(&self, set: &[usize]) -> Mat<F::Elem> {
        Mat::from_fn(self.vectors.rows(), set.len(), |i, j| {
            self.vectors.at(i, set[j]).clone()
        })
    }
}

impl<F: Field> Matroid for LinearMatroid<F> {
    fn ground_size(&self) -> usize {
        self.vectors.cols()
    }

    fn rank(&self, set: &[usize]) -> usize {
        rref(&self.field, &self.columns(set)).1.len()
    }

    // One reduction of [I-columns | all columns] answers every exchange:
    // a column is addable iff it has support below the pivot rows, and
    // I - I[k] + z stays independent iff z is addable or its coordinate
    // over I touches I[k].
    fn exchanges(&self, ind: &[usize]) -> Exchanges {
        let f = &self.field;
        let n = self.ground_size();
        let d = self.vectors.rows();
        let r = ind.len();
        let aug = Mat::from_fn(d, r + n, |i, j| {
            if j < r {
                self.vectors.at(i, ind[j]).clone()
            } else {
                self.vectors.at(i, j - r).clone()
            }
        });
        let (e, pivots) = rref(f, &aug);
        // ind is independent, so the first r columns are all pivotal.
        debug_assert!(pivots.len() >= r && pivots[..r].iter().copied().eq(0..r));
        let mut inside = vec![false; n];
        for &e in ind {
            inside[e] = true;
        }
        let mut addable = vec![false; n];
        for z in 0..n {
            if !inside[z] {
                addable[z] = (r..d).any(|i| !f.is_zero(e.at(i, r + z)));
            }
        }
        let mut swap = Vec::with_capacity(r);
        for k in 0..r {
            let mut row = vec![false; n];
            for z in 0..n {
                if !inside[z] {
                    row[z] = addable[z] || !f.is_zero(e.at(k, r + z));
                }
            }
            swap.push(row);
        }
        Exchanges { addable, swap }
    }
}

/// Partition matroid: ground elements are grouped into blocks, each block
/// carrying an independence cap.
pub struct PartitionMatroid {
    block_of: Vec<usize>,
    caps: Vec<usize>,
}

impl PartitionMatroid {
    /// `block_of[e]` names the block of element `e`; `caps[b]` its capacity.
    pub fn new(block_of: Vec<usize>, caps: Vec<usize>) -> Self {
        assert!(block_of.iter().all(|&b| b < caps.len()));
        PartitionMatroid { block_of, caps }
    }

    /// Every listed block gets capacity one.
    pub fn unit_caps(block_of: Vec<usize>, blocks: usize) -> Self {
        PartitionMatroid::new(block_of, vec![1; blocks])
    }

    fn counts(&self, set: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.caps.len()];
        for &e in set {
            counts[self.block_of[e]] += 1;
        }
        counts
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn rank(&self, set: &[usize]) -> usize {
        self.counts(set)
            .iter()
            .zip(&self.caps)
            .map(|(&c, &cap)| c.min(cap))
            .sum()
    }

    fn exchanges(&self, ind: &[usize]) -> Exchanges {
        let n = self.ground_size();
        let counts = self.counts(ind);
        let mut inside = vec![false; n];
        for &e in ind {
            inside[e] = true;
        }
        let mut addable = vec![false; n];
        for z in 0..n {
            if !inside[z] {
                let b = self.block_of[z];
                addable[z] = counts[b] < self.caps[b];
            }
        }
        let mut swap = Vec::with_capacity(ind.len());
        for &y in ind {
            let mut row = vec![false; n];
            for z in 0..n {
                if !inside[z] {
                    row[z] = addable[z] || self.block_of[z] == self.block_of[y];
                }
            }
            swap.push(row);
        }
        Exchanges { addable, swap }
    }
}

/// Direct sum of two matroids; the second ground set is shifted past the first.
pub struct SumMatroid<'a, A: Matroid + ?Sized, B: Matroid + ?Sized> {
    left: &'a A,
    right: &'a B,
}

impl<'a, A: Matroid + ?Sized, B: Matroid + ?Sized> SumMatroid<'a, A, B> {
    pub fn new(left: &'a A, right: &'a B) -> Self {
        SumMatroid { left, right }
    }

    fn split(&self, set: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let cut = self.left.ground_size();
        let mut l = Vec::new();
        let mut r = Vec::new();
        for &e in set {
            if e < cut {
                l.push(e);
            } else {
                r.push(e - cut);
            }
        }
        (l, r)
    }
}

impl<A: Matroid + ?Sized, B: Matroid + ?Sized> Matroid for SumMatroid<'_, A, B> {
    fn ground_size(&self) -> usize {
        self.left.ground_size() + self.right.ground_size()
    }

    fn rank(&self, set: &[usize]) -> usize {
        let (l, r) = self.split(set);
        self.left.rank(&l) + self.right.rank(&r)
    }

    fn exchanges(&self, ind: &[usize]) -> Exchanges {
        let cut = self.left.ground_size();
        let n = self.ground_size();
        let (l, r) = self.split(ind);
        let el = self.left.exchanges(&l);
        let er = self.right.exchanges(&r);
        let mut addable = vec![false; n];
        for z in 0..n {
            addable[z] = if z < cut { el.addable[z] } else { er.addable[z - cut] };
        }
        // Map positions in ind back to positions within each part.
        let mut swap = Vec::with_capacity(ind.len());
        let mut li = 0;
        let mut ri = 0;
        for &y in ind {
            let mut row = vec![false; n];
            if y < cut {
                for z in 0..n {
                    row[z] = if z < cut { el.swap[li][z] } else { addable[z] };
                }
                li += 1;
            } else {
                for z in 0..n {
                    row[z] = if z < cut { addable[z] } else { er.swap[ri][z - cut] };
                }
                ri += 1;
            }
            swap.push(row);
        }
        Exchanges { addable, swap }
    }
}

/// Result of a matroid intersection run.
///
/// `cert_m1`/`cert_m2` partition the ground set and certify optimality:
/// `common.len() == rank1(cert_m1) + rank2(cert_m2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intersection {
    pub common: Vec<usize>,
    pub cert_m1: Vec<usize>,
    pub cert_m2: Vec<usize>,
}

/// Maximum common independent set by shortest augmenting paths.
///
/// The exchange digraph has arcs y -> z when I - y + z is independent in the
/// first matroid and z -> y when it is independent in the second; sources are
/// elements addable in the first matroid, sinks those addable in the second.
/// Scans are in ascending element order, so the run is deterministic. At
/// termination the set unreachable from the sources certifies the first rank
/// term, the reachable set the second.
pub fn matroid_intersection_core<A, B>(m1: &A, m2: &B) -> Intersection
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    let n = m1.ground_size();
    assert_eq!(n, m2.ground_size(), "ground sets must agree");
    let mut ind: Vec<usize> = Vec::new();
    loop {
        let ex1 = m1.exchanges(&ind);
        let ex2 = m2.exchanges(&ind);
        let mut inside = vec![false; n];
        let mut pos_in_ind = vec![usize::MAX; n];
        for (k, &e) in ind.iter().enumerate() {
            inside[e] = true;
            pos_in_ind[e] = k;
        }
        // BFS from all sources at once.
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for z in 0..n {
            if ex1.addable[z] {
                seen[z] = true;
                parent[z] = n; // root marker
                queue.push_back(z);
            }
        }
        let mut reached_sink = None;
        'bfs: while let Some(v) = queue.pop_front() {
            if !inside[v] {
                if ex2.addable[v] {
                    reached_sink = Some(v);
                    break 'bfs;
                }
                // Arcs z -> y into the independent set (second matroid swap).
                for (k, &y) in ind.iter().enumerate() {
                    if !seen[y] && ex2.swap[k][v] {
                        seen[y] = true;
                        parent[y] = v;
                        queue.push_back(y);
                    }
                }
            } else {
                // Arcs y -> z out of the independent set (first matroid swap).
                let k = pos_in_ind[v];
                for z in 0..n {
                    if !inside[z] && !seen[z] && ex1.swap[k][z] {
                        seen[z] = true;
                        parent[z] = v;
                        queue.push_back(z);
                    }
                }
            }
        }
        match reached_sink {
            Some(t) => {
                // Toggle membership along the path; the set grows by one.
                let mut v = t;
                while v != n {
                    if inside[v] {
                        ind.retain(|&e| e != v);
                    } else {
                        ind.push(v);
                    }
                    v = parent[v];
                }
                ind.sort_unstable();
                debug_assert!(m1.is_independent(&ind) && m2.is_independent(&ind));
            }
            None => {
                let cert_m1: Vec<usize> = (0..n).filter(|&z| !seen[z]).collect();
                let cert_m2: Vec<usize> = (0..n).filter(|&z| seen[z]).collect();
                debug_assert_eq!(ind.len(), m1.rank(&cert_m1) + m2.rank(&cert_m2));
                return Intersection { common: ind, cert_m1, cert_m2 };
            }
        }
    }
}

/// Intersection of two linear matroids on a common ground set.
pub fn matroid_intersection<F: Field>(
    m1: &LinearMatroid<F>,
    m2: &LinearMatroid<F>,
) -> Result<Intersection, MatroidError> {
    if m1.ground_size() != m2.ground_size() {
        return Err(MatroidError::GroundMismatch {
            left: m1.ground_size(),
            right: m2.ground_size(),
        });
    }
    Ok(matroid_intersection_core(m1, m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, GfP};
    use crate::matrix::k_identity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(f: &GfP, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<u64> {
        Mat::from_fn(rows, cols, |_, _| f.from_i64(rng.gen_range(0..f.modulus() as i64)))
    }

    /// Exhaustive maximum common independent set for cross-checking.
    fn brute_max_common<A: Matroid, B: Matroid>(m1: &A, m2: &B) -> usize {
        let n = m1.ground_size();
        assert!(n <= 16);
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
            if set.len() > best && m1.is_independent(&set) && m2.is_independent(&set) {
                best = set.len();
            }
        }
        best
    }

    fn assert_exchanges_match<M: Matroid>(m: &M, ind: &[usize]) {
        let fast = m.exchanges(ind);
        // Rebuild through the rank oracle only.
        struct ByRank<'a, M: Matroid>(&'a M);
        impl<M: Matroid> Matroid for ByRank<'_, M> {
            fn ground_size(&self) -> usize {
                self.0.ground_size()
            }
            fn rank(&self, set: &[usize]) -> usize {
                self.0.rank(set)
            }
        }
        let slow = ByRank(m).exchanges(ind);
        assert_eq!(fast.addable, slow.addable, "addable mismatch at {:?}", ind);
        for k in 0..ind.len() {
            for z in 0..m.ground_size() {
                let inside = ind.contains(&z);
                if !inside {
                    assert_eq!(
                        fast.swap[k][z], slow.swap[k][z],
                        "swap mismatch at ind={:?} k={} z={}",
                        ind, k, z
                    );
                }
            }
        }
    }

    fn greedy_independent<M: Matroid>(m: &M, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = m.ground_size();
        let mut ind = Vec::new();
        for z in 0..n {
            if rng.gen_bool(0.6) {
                let mut cand = ind.clone();
                cand.push(z);
                if m.is_independent(&cand) {
                    ind = cand;
                }
            }
        }
        ind
    }

    #[test]
    fn linear_exchange_oracle_matches_rank_oracle() {
        let f = GfP::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=7);
            let m = LinearMatroid::new(f, random_matrix(&f, &mut rng, rows, cols));
            let ind = greedy_independent(&m, &mut rng);
            assert_exchanges_match(&m, &ind);
        }
    }

    #[test]
    fn partition_and_sum_exchange_oracles_match() {
        let f = GfP::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let blocks = rng.gen_range(1..=3);
            let n = rng.gen_range(1..=6);
            let block_of: Vec<usize> = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
            let caps: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=2)).collect();
            let p = PartitionMatroid::new(block_of, caps);
            let ind = greedy_independent(&p, &mut rng);
            assert_exchanges_match(&p, &ind);

            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(1..=4);
            let l = LinearMatroid::new(f, random_matrix(&f, &mut rng, rows, cols));
            let s = SumMatroid::new(&l, &p);
            let ind = greedy_independent(&s, &mut rng);
            assert_exchanges_match(&s, &ind);
        }
    }

    #[test]
    fn intersection_examples() {
        let f = GfP::new(7).unwrap();
        // Two free matroids on three elements: the whole ground set.
        let id = LinearMatroid::new(f, k_identity(&f, 3));
        let id2 = LinearMatroid::new(f, k_identity(&f, 3));
        let got = matroid_intersection(&id, &id2).unwrap();
        assert_eq!(got.common, vec![0, 1, 2]);

        // Free vs rank-one (all columns equal): one element survives.
        let ones = Mat::from_fn(3, 3, |i, _| if i == 0 { f.one() } else { f.zero() });
        let rank1 = LinearMatroid::new(f, ones);
        let free = LinearMatroid::new(f, k_identity(&f, 3));
        let got = matroid_intersection(&free, &rank1).unwrap();
        assert_eq!(got.common.len(), 1);

        // Ground mismatch is reported, not asserted.
        let small = LinearMatroid::new(f, k_identity(&f, 2));
        let err = matroid_intersection(&id, &small).unwrap_err();
        assert_eq!(err, MatroidError::GroundMismatch { left: 3, right: 2 });
    }

    #[test]
    fn intersection_matches_brute_force_and_certifies() {
        for (seed, p) in [(21u64, 2u64), (22, 3), (23, 10007)] {
            let f = GfP::new(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..30 {
                let n = rng.gen_range(1..=8);
                let r1 = rng.gen_range(1..=4);
                let r2 = rng.gen_range(1..=4);
                let m1 = LinearMatroid::new(f, random_matrix(&f, &mut rng, r1, n));
                let m2 = LinearMatroid::new(f, random_matrix(&f, &mut rng, r2, n));
                let got = matroid_intersection(&m1, &m2).unwrap();
                assert!(m1.is_independent(&got.common));
                assert!(m2.is_independent(&got.common));
                assert_eq!(got.common.len(), brute_max_common(&m1, &m2));
                // The certificate realizes the min-max bound exactly.
                assert_eq!(
                    got.common.len(),
                    m1.rank(&got.cert_m1) + m2.rank(&got.cert_m2)
                );
                let mut all = got.cert_m1.clone();
                all.extend(&got.cert_m2);
                all.sort_unstable();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn intersection_with_partition_side() {
        let f = GfP::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.gen_range(1..=7);
            let rows = rng.gen_range(1..=3);
            let lin = LinearMatroid::new(f, random_matrix(&f, &mut rng, rows, n));
            let blocks = rng.gen_range(1..=3);
            let block_of: Vec<usize> = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
            let part = PartitionMatroid::unit_caps(block_of, blocks);
            let got = matroid_intersection_core(&lin, &part);
            assert_eq!(got.common.len(), brute_max_common(&lin, &part));
            assert_eq!(
                got.common.len(),
                lin.rank(&got.cert_m1) + part.rank(&got.cert_m2)
            );
        }
    }
}
