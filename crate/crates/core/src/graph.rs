//! Union-symmetrized kNN graph with local updates on instance deletion.
//!
//! Every alive instance keeps an ordered list of its `k` nearest alive
//! instances under the total order (distance, row index). The undirected
//! graph joins `i` and `j` when either lists the other, so the neighborhood
//! of an instance is its own neighbors plus its associates.
//!
//! Deleting an instance only touches the instances that listed it (they pull
//! in their next-nearest alive instance), the instances it listed, and the
//! instances that gain a new associate. Everything else is left untouched,
//! and the result is identical to a rebuild on the survivors.

use std::cmp::Ordering;
use std::io::Write;

use crate::error::{RcgError, Result};
use crate::metric::DistanceMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodGraph {
    k: usize,
    n_classes: usize,
    labels: Vec<usize>,
    alive: Vec<bool>,
    alive_count: usize,
    out: Vec<Vec<usize>>,
    assoc: Vec<Vec<usize>>,
    adjacency: Vec<Vec<usize>>,
    tallies: Vec<Vec<usize>>,
    edge_count: usize,
}

#[inline]
fn closer(m: &DistanceMatrix, from: usize, a: usize, b: usize) -> Ordering {
    m.get(from, a).total_cmp(&m.get(from, b)).then(a.cmp(&b))
}

fn sorted_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

impl NeighborhoodGraph {
    /// Builds the graph over every instance of `matrix`. `labels` are indexed
    /// by local matrix index and must be `< n_classes`.
    pub fn build(matrix: &DistanceMatrix, labels: &[usize], n_classes: usize, k: usize) -> Result<Self> {
        Self::build_on(matrix, labels, n_classes, k, &vec![true; matrix.size()])
    }

    /// Builds the graph over the instances flagged in `alive` only. Dead
    /// instances keep their slot with empty lists.
    pub fn build_on(
        matrix: &DistanceMatrix,
        labels: &[usize],
        n_classes: usize,
        k: usize,
        alive: &[bool],
    ) -> Result<Self> {
        let m = matrix.size();
        if labels.len() != m || alive.len() != m {
            return Err(RcgError::invalid("labels/alive length differs from matrix size"));
        }
        if k == 0 {
            return Err(RcgError::invalid("k must be at least 1"));
        }
        if labels.iter().any(|&y| y >= n_classes) {
            return Err(RcgError::invalid("label id out of range"));
        }
        let alive_count = alive.iter().filter(|&&a| a).count();
        if alive_count < 2 {
            return Err(RcgError::data(format!("kNN graph needs at least 2 alive instances, got {alive_count}")));
        }

        let out: Vec<Vec<usize>> = (0..m)
            .map(|i| {
                if !alive[i] {
                    return Vec::new();
                }
                let mut cand: Vec<usize> = (0..m).filter(|&j| j != i && alive[j]).collect();
                let take = k.min(cand.len());
                if take < cand.len() {
                    cand.select_nth_unstable_by(take, |&a, &b| closer(matrix, i, a, b));
                    cand.truncate(take);
                }
                cand.sort_unstable_by(|&a, &b| closer(matrix, i, a, b));
                cand
            })
            .collect();

        let mut assoc: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (i, list) in out.iter().enumerate() {
            for &j in list {
                assoc[j].push(i);
            }
        }
        // pushed in ascending i, so already sorted
        let adjacency: Vec<Vec<usize>> = (0..m).map(|i| sorted_union(&out[i], &assoc[i])).collect();
        let tallies = adjacency
            .iter()
            .map(|adj| {
                let mut t = vec![0; n_classes];
                for &j in adj {
                    t[labels[j]] += 1;
                }
                t
            })
            .collect();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;

        Ok(NeighborhoodGraph {
            k,
            n_classes,
            labels: labels.to_vec(),
            alive: alive.to_vec(),
            alive_count,
            out,
            assoc,
            adjacency,
            tallies,
            edge_count,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Number of slots (alive or dead).
    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_alive(&self, i: usize) -> bool {
        self.alive[i]
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn alive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive.iter().enumerate().filter_map(|(i, &a)| a.then_some(i))
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn associates(&self, i: usize) -> &[usize] {
        &self.assoc[i]
    }

    /// N(i): sorted neighbors and associates.
    pub fn neighborhood(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// n_i. = |N(i)|.
    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// n_ij for every class j.
    pub fn class_tally(&self, i: usize) -> &[usize] {
        &self.tallies[i]
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Class counts over alive instances.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for i in self.alive_indices() {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Next-nearest alive instance of `i` not already listed, pretending
    /// `excluded` is dead.
    fn replacement(&self, matrix: &DistanceMatrix, i: usize, excluded: usize) -> Option<usize> {
        let listed = &self.out[i];
        (0..self.len())
            .filter(|&j| j != i && j != excluded && self.alive[j] && !listed.contains(&j))
            .min_by(|&a, &b| closer(matrix, i, a, b))
    }

    /// Instances whose neighborhood (and hence local uncertainty) would change
    /// if `victim` were deleted: N(victim) plus every instance that would
    /// gain a new associate.
    pub fn affected_set(&self, matrix: &DistanceMatrix, victim: usize) -> Vec<usize> {
        let mut set = self.adjacency[victim].clone();
        for &i in &self.assoc[victim] {
            if let Some(r) = self.replacement(matrix, i, victim) {
                set.push(r);
            }
        }
        set.sort_unstable();
        set.dedup();
        set
    }

    /// Deletes `victim` and repairs the graph locally. Returns the sorted set
    /// of alive instances whose neighborhood was recomputed.
    pub fn remove_instance(&mut self, matrix: &DistanceMatrix, victim: usize) -> Result<Vec<usize>> {
        if victim >= self.len() || !self.alive[victim] {
            return Err(RcgError::invalid(format!("instance {victim} is not alive")));
        }
        if self.alive_count < 3 {
            return Err(RcgError::data("cannot remove an instance below 2 alive instances"));
        }

        let mut affected = self.adjacency[victim].clone();
        let mut degree_delta = -(self.adjacency[victim].len() as isize);

        self.alive[victim] = false;
        self.alive_count -= 1;

        for j in std::mem::take(&mut self.out[victim]) {
            self.assoc[j].retain(|&x| x != victim);
        }
        for i in std::mem::take(&mut self.assoc[victim]) {
            self.out[i].retain(|&x| x != victim);
            if let Some(r) = self.replacement(matrix, i, victim) {
                self.out[i].push(r);
                let pos = self.assoc[r].binary_search(&i).unwrap_err();
                self.assoc[r].insert(pos, i);
                affected.push(r);
            }
        }
        self.adjacency[victim].clear();
        self.tallies[victim].iter_mut().for_each(|t| *t = 0);

        affected.sort_unstable();
        affected.dedup();
        for &a in &affected {
            let new_adj = sorted_union(&self.out[a], &self.assoc[a]);
            degree_delta += new_adj.len() as isize - self.adjacency[a].len() as isize;
            let tally = &mut self.tallies[a];
            tally.iter_mut().for_each(|t| *t = 0);
            for &j in &new_adj {
                tally[self.labels[j]] += 1;
            }
            self.adjacency[a] = new_adj;
        }
        self.edge_count = ((2 * self.edge_count) as isize + degree_delta) as usize / 2;
        Ok(affected)
    }

    /// Writes one `row_i row_j distance` line per undirected edge, using
    /// dataset row ids.
    pub fn write_edge_list<W: Write>(&self, matrix: &DistanceMatrix, mut w: W) -> std::io::Result<()> {
        for i in self.alive_indices() {
            for &j in &self.adjacency[i] {
                if i < j {
                    writeln!(w, "{} {} {}", matrix.row_id(i), matrix.row_id(j), matrix.get(i, j))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, FeatureMask, InstanceMask};
    use crate::metric::DistanceSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn line(points: &[f64]) -> DistanceMatrix {
        let m = points.len();
        let data = (0..m).flat_map(|i| points.iter().map(move |&q| (points[i] - q).abs())).collect();
        DistanceMatrix::from_raw((0..m).collect(), data).unwrap()
    }

    /// k nearest by brute-force full sort of the row.
    fn brute_out(m: &DistanceMatrix, alive: &[bool], i: usize, k: usize) -> Vec<usize> {
        let mut others: Vec<(f64, usize)> =
            (0..m.size()).filter(|&j| j != i && alive[j]).map(|j| (m.get(i, j), j)).collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        others.into_iter().take(k).map(|(_, j)| j).collect()
    }

    fn random_matrix(seed: u64, n: usize) -> (DistanceMatrix, Vec<usize>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let mut fixed = labels.clone();
        fixed[0] = 0;
        fixed[1] = 1;
        let ds = Dataset::from_numeric(&rows, &fixed).unwrap();
        let spec = DistanceSpec::from_dataset(&ds);
        let m = DistanceMatrix::compute(&ds, &InstanceMask::full(n), &FeatureMask::full(2), &spec).unwrap();
        (m, fixed)
    }

    #[test]
    fn line_example_with_k1() {
        let m = line(&[0.0, 1.0, 2.0, 10.0]);
        let g = NeighborhoodGraph::build(&m, &[0, 0, 1, 1], 2, 1).unwrap();
        for i in 0..4 {
            assert_eq!(g.out_neighbors(i), brute_out(&m, &[true; 4], i, 1).as_slice());
        }
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.out_neighbors(1), &[0]);
        assert_eq!(g.out_neighbors(2), &[1]);
        assert_eq!(g.out_neighbors(3), &[2]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.neighborhood(2), &[1, 3]);
        assert_eq!(g.associates(2), &[3]);
        assert_eq!(g.neighborhood(1), &[0, 2]);
    }

    #[test]
    fn k_truncates_to_available_instances() {
        let m = line(&[0.0, 1.0]);
        let g = NeighborhoodGraph::build(&m, &[0, 1], 2, 5).unwrap();
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.out_neighbors(1), &[0]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn build_errors() {
        let m = line(&[0.0, 1.0, 2.0]);
        assert!(NeighborhoodGraph::build_on(&m, &[0, 1, 0], 2, 1, &[true, false, false]).is_err());
        assert!(NeighborhoodGraph::build(&m, &[0, 1, 0], 2, 0).is_err());
    }

    #[test]
    fn removal_on_line_matches_rebuild() {
        let m = line(&[0.0, 1.0, 2.0, 10.0]);
        let labels = [0, 0, 1, 1];
        let mut g = NeighborhoodGraph::build(&m, &labels, 2, 1).unwrap();
        let preview = g.affected_set(&m, 1);
        assert!(preview.contains(&0) && preview.contains(&2));
        let affected = g.remove_instance(&m, 1).unwrap();
        assert_eq!(preview, affected);
        assert_eq!(g.out_neighbors(0), &[2]);
        assert_eq!(g.out_neighbors(2), &[0]);
        let rebuilt = NeighborhoodGraph::build_on(&m, &labels, 2, 1, &[true, false, true, true]).unwrap();
        assert_eq!(g, rebuilt);
    }

    #[test]
    fn removing_an_unchosen_instance_is_local() {
        // 3 is chosen by nobody with k = 1
        let m = line(&[0.0, 1.0, 3.0, 10.0]);
        let mut g = NeighborhoodGraph::build(&m, &[0, 0, 1, 1], 2, 1).unwrap();
        assert!(g.associates(3).is_empty());
        let before: Vec<Vec<usize>> = (0..3).map(|i| g.out_neighbors(i).to_vec()).collect();
        g.remove_instance(&m, 3).unwrap();
        for (i, b) in before.iter().enumerate() {
            assert_eq!(g.out_neighbors(i), b.as_slice());
        }
    }

    #[test]
    fn cannot_remove_below_two() {
        let m = line(&[0.0, 1.0, 2.0]);
        let mut g = NeighborhoodGraph::build(&m, &[0, 1, 0], 2, 1).unwrap();
        g.remove_instance(&m, 0).unwrap();
        assert!(g.remove_instance(&m, 1).is_err());
        assert!(g.remove_instance(&m, 0).is_err());
    }

    #[test]
    fn fifty_points_ten_removals_match_rebuild() {
        let (m, labels) = random_matrix(5, 50);
        let mut g = NeighborhoodGraph::build(&m, &labels, 3, 3).unwrap();
        let mut alive = vec![true; 50];
        for victim in [7, 0, 33, 12, 49, 1, 25, 26, 40, 3] {
            g.remove_instance(&m, victim).unwrap();
            alive[victim] = false;
            assert_eq!(g, NeighborhoodGraph::build_on(&m, &labels, 3, 3, &alive).unwrap());
        }
    }

    #[test]
    fn edge_list_dump() {
        let m = line(&[0.0, 1.0, 2.0, 10.0]);
        let g = NeighborhoodGraph::build(&m, &[0, 0, 1, 1], 2, 1).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("0 1 1\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn incremental_equals_rebuild(seed in 0u64..10_000, k in 1usize..6, removals in 1usize..20) {
            let n = 25;
            let (m, labels) = random_matrix(seed, n);
            let mut g = NeighborhoodGraph::build(&m, &labels, 3, k).unwrap();
            let mut alive = vec![true; n];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            for _ in 0..removals {
                let living: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
                let victim = living[rng.gen_range(0..living.len())];
                let before = g.clone();
                let preview = g.affected_set(&m, victim);
                let affected = g.remove_instance(&m, victim).unwrap();
                prop_assert_eq!(&preview, &affected);
                alive[victim] = false;
                // outside the affected set nothing moves
                for i in (0..n).filter(|&i| alive[i] && !affected.contains(&i)) {
                    prop_assert_eq!(before.neighborhood(i), g.neighborhood(i));
                    prop_assert_eq!(before.out_neighbors(i), g.out_neighbors(i));
                }
                prop_assert_eq!(&g, &NeighborhoodGraph::build_on(&m, &labels, 3, k, &alive).unwrap());
                let degree_sum: usize = (0..n).map(|i| g.degree(i)).sum();
                prop_assert_eq!(degree_sum, 2 * g.edge_count());
                for i in g.alive_indices() {
                    prop_assert_eq!(g.out_neighbors(i).len(), k.min(g.alive_count() - 1));
                    prop_assert_eq!(g.class_tally(i).iter().sum::<usize>(), g.degree(i));
                }
            }
        }
    }
}
