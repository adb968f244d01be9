//! Seed groups from the cosine-similarity graph.
//!
//! Every embedding is a node; an undirected edge joins two rows whose cosine
//! similarity reaches the threshold. Each connected component becomes one
//! initial group and isolated nodes become singleton groups.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::unit_cosine;
use crate::group::{Group, SeedProvenance};

pub const DEFAULT_GRAPH_THRESHOLD: f64 = 0.5;

const ROW_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    adjacency: Vec<Vec<usize>>,
    threshold: f64,
}

impl SimilarityGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }
}

/// Exact all-pairs construction. Rows are processed in parallel blocks; the
/// result does not depend on the number of worker threads.
pub fn build_similarity_graph(ds: &EmbeddingDataset, threshold: f64) -> Result<SimilarityGraph> {
    if !(threshold > -1.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "graph threshold must lie in (-1, 1), got {threshold}"
        )));
    }
    let n = ds.len();
    let upper: Vec<Vec<usize>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(ROW_BLOCK)
        .flat_map_iter(|block| {
            block.iter().map(|&i| {
                let ei = ds.row(i);
                (i + 1..n)
                    .filter(|&j| unit_cosine(ei, ds.row(j)) >= threshold)
                    .collect::<Vec<_>>()
            })
        })
        .collect();

    // Lower neighbors arrive in increasing order before the upper list is
    // appended, so every list ends up sorted.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, ups) in upper.into_iter().enumerate() {
        for &j in &ups {
            adjacency[j].push(i);
        }
        adjacency[i].extend(ups);
    }
    Ok(SimilarityGraph { adjacency, threshold })
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Connected components as initial groups, ordered by smallest member with
/// members ascending. Isolated nodes become singleton groups.
pub fn connected_components(graph: &SimilarityGraph) -> Vec<Group> {
    let n = graph.node_count();
    let mut dsu = DisjointSet::new(n);
    for (i, nbrs) in graph.adjacency.iter().enumerate() {
        for &j in nbrs.iter().filter(|&&j| j > i) {
            dsu.union(i, j);
        }
    }
    let mut slot_of_root = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = dsu.find(i);
        if slot_of_root[r] == usize::MAX {
            slot_of_root[r] = members.len();
            members.push(Vec::new());
        }
        members[slot_of_root[r]].push(i);
    }
    members
        .into_iter()
        .map(|m| {
            let provenance = if m.len() == 1 {
                SeedProvenance::Singleton
            } else {
                SeedProvenance::GraphComponent
            };
            Group::new(m, provenance).expect("components are disjoint")
        })
        .collect()
}

/// Optional restrictions on which components are used as seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedFilter {
    pub min_size: usize,
    pub max_size: Option<usize>,
    pub min_identities: usize,
    /// When more groups pass, keep this many spread evenly over the ordered
    /// list.
    pub max_seeds: Option<usize>,
}

impl Default for SeedFilter {
    fn default() -> Self {
        Self {
            min_size: 1,
            max_size: None,
            min_identities: 1,
            max_seeds: None,
        }
    }
}

impl SeedFilter {
    pub fn apply(&self, ds: &EmbeddingDataset, groups: Vec<Group>) -> Vec<Group> {
        let kept: Vec<Group> = groups
            .into_iter()
            .filter(|g| {
                let ids: HashSet<usize> = g.members().iter().map(|&m| ds.identity(m)).collect();
                g.len() >= self.min_size
                    && self.max_size.is_none_or(|mx| g.len() <= mx)
                    && ids.len() >= self.min_identities
            })
            .collect();
        match self.max_seeds {
            Some(k) if k < kept.len() => {
                let total = kept.len();
                let picks: HashSet<usize> = (0..k).map(|i| i * total / k).collect();
                kept.into_iter()
                    .enumerate()
                    .filter(|(i, _)| picks.contains(i))
                    .map(|(_, g)| g)
                    .collect()
            }
            _ => kept,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[Vec<f64>]) -> EmbeddingDataset {
        let ids: Vec<usize> = (0..rows.len()).collect();
        EmbeddingDataset::from_rows(rows, &ids).unwrap()
    }

    #[test]
    fn identical_pair_has_edge() {
        let g = build_similarity_graph(&ds(&[vec![1.0, 0.0], vec![1.0, 0.0]]), 0.5).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
    }

    #[test]
    fn orthogonal_pair_has_no_edge() {
        let g = build_similarity_graph(&ds(&[vec![1.0, 0.0], vec![0.0, 1.0]]), 0.5).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn threshold_out_of_range() {
        let d = ds(&[vec![1.0, 0.0]]);
        assert!(build_similarity_graph(&d, 1.0).is_err());
        assert!(build_similarity_graph(&d, -1.0).is_err());
        assert!(build_similarity_graph(&d, f64::NAN).is_err());
    }

    #[test]
    fn empty_edge_set_gives_singletons() {
        let g = SimilarityGraph {
            adjacency: vec![vec![]; 3],
            threshold: 0.5,
        };
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 3);
        for (i, c) in comps.iter().enumerate() {
            assert_eq!(c.members(), &[i]);
            assert_eq!(c.provenance, SeedProvenance::Singleton);
        }
    }

    #[test]
    fn path_is_one_component() {
        let g = SimilarityGraph {
            adjacency: vec![vec![1], vec![0, 2], vec![1]],
            threshold: 0.5,
        };
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].members(), &[0, 1, 2]);
        assert_eq!(comps[0].provenance, SeedProvenance::GraphComponent);
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let n = 200_000;
        let adjacency = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        let comps = connected_components(&SimilarityGraph {
            adjacency,
            threshold: 0.5,
        });
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), n);
    }

    #[test]
    fn components_ordered_by_smallest_member() {
        let g = SimilarityGraph {
            adjacency: vec![vec![3], vec![], vec![4], vec![0], vec![2]],
            threshold: 0.5,
        };
        let comps: Vec<Vec<usize>> = connected_components(&g).iter().map(|c| c.members().to_vec()).collect();
        assert_eq!(comps, vec![vec![0, 3], vec![1], vec![2, 4]]);
    }

    #[test]
    fn seed_filter_limits() {
        let d = EmbeddingDataset::from_rows(
            &[
                vec![1.0, 0.0],
                vec![1.0, 0.1],
                vec![0.0, 1.0],
                vec![0.1, 1.0],
                vec![-1.0, 0.0],
            ],
            &[0, 1, 2, 2, 3],
        )
        .unwrap();
        let groups = connected_components(&build_similarity_graph(&d, 0.5).unwrap());
        assert_eq!(groups.len(), 3);
        let f = SeedFilter {
            min_size: 2,
            min_identities: 2,
            ..SeedFilter::default()
        };
        let kept = f.apply(&d, groups.clone());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].members(), &[0, 1]);
        let f = SeedFilter {
            max_seeds: Some(2),
            ..SeedFilter::default()
        };
        let kept = f.apply(&d, groups);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].members(), &[0, 1]);
        assert_eq!(kept[1].members(), &[2, 3]);
    }
}
